use std::collections::BTreeMap;
use std::path::Path;

use clap::{Arg, ArgMatches, Command};
use serde_json::{json, Value};

use crate::CliError;

pub struct Flag {
    pub name: &'static str,
    pub value_name: &'static str,
    pub help: &'static str,
    pub default: Option<&'static str>,
    /// List values may start with a minus sign.
    pub hyphen_values: bool,
}

const fn flag(name: &'static str, value_name: &'static str, help: &'static str) -> Flag {
    Flag {
        name,
        value_name,
        help,
        default: None,
        hyphen_values: false,
    }
}

const fn with_default(mut f: Flag, default: &'static str) -> Flag {
    f.default = Some(default);
    f
}

const fn list(mut f: Flag) -> Flag {
    f.hyphen_values = true;
    f
}

pub struct Leaf {
    pub path: &'static [&'static str],
    pub about: &'static str,
    pub flags: &'static [Flag],
}

const EFIELD: Flag = flag("efield-v-per-cm", "V_PER_CM", "Field strength in V/cm");

pub const LEAVES: &[Leaf] = &[
    Leaf {
        path: &["tripartite"],
        about: "Reduced apparatus state of a correlated system-apparatus-environment state",
        flags: &[
            list(flag("coeffs", "C0,C1,...", "Real branch amplitudes")),
            flag("env-overlap", "R", "Pairwise environment overlap in [0, 1]"),
        ],
    },
    Leaf {
        path: &["dephasing"],
        about: "Central qubit dephasing against a spin bath",
        flags: &[
            flag("spins", "N", "Number of bath spins"),
            list(flag(
                "coupling",
                "G|G1,G2,...",
                "One coupling for all spins, or one per spin",
            )),
            flag("t-max", "T", "Final time"),
            with_default(flag("steps", "N", "Number of time points"), "100"),
        ],
    },
    Leaf {
        path: &["lattice", "superselect"],
        about: "Charge superselection checks on the truncated-link lattice",
        flags: &[
            flag("sites", "N", "Number of lattice sites"),
            flag("emax", "M", "Link field truncation"),
            with_default(flag("left-field", "K", "Left boundary field"), "0"),
        ],
    },
    Leaf {
        path: &["lattice", "identity-check"],
        about: "Surface/bulk split of the gauge generator over random gauge functions",
        flags: &[
            flag("sites", "N", "Number of lattice sites"),
            flag("emax", "M", "Link field truncation"),
            with_default(flag("seed", "S", "Random seed"), "0"),
        ],
    },
    Leaf {
        path: &["field", "factor"],
        about: "Suppression factor of field-branch interference",
        flags: &[flag("volume-cm3", "V", "Volume in cm^3"), EFIELD],
    },
    Leaf {
        path: &["field", "coherence-length"],
        about: "Edge length at which field-branch interference is suppressed",
        flags: &[
            EFIELD,
            with_default(
                flag(
                    "threshold",
                    "X",
                    "Suppression exponent defining decoherence",
                ),
                "1.0",
            ),
        ],
    },
    Leaf {
        path: &["field", "validity-time"],
        about: "Time after which the semiclassical suppression applies",
        flags: &[EFIELD],
    },
    Leaf {
        path: &["thermal", "length"],
        about: "Coherence length of free electrons in thermal radiation",
        flags: &[
            flag("time-s", "T", "Elapsed time in seconds"),
            with_default(
                flag("lambda-cm2s", "L", "Localization rate in cm^-2 s^-1"),
                "100",
            ),
        ],
    },
];

const COMMON: &[&str] = &["out", "format", "config"];

fn leaf_command(leaf: &Leaf) -> Command {
    let name = *leaf.path.last().expect("non-empty path");
    let mut cmd = Command::new(name)
        .about(leaf.about)
        .allow_negative_numbers(true);
    for f in leaf.flags {
        let help = match f.default {
            Some(d) => format!("{} [default: {d}]", f.help),
            None => format!("{} (required)", f.help),
        };
        cmd = cmd.arg(
            Arg::new(f.name)
                .long(f.name)
                .value_name(f.value_name)
                .help(help)
                .num_args(1)
                .allow_hyphen_values(f.hyphen_values),
        );
    }
    cmd.arg(
        Arg::new("out")
            .long("out")
            .value_name("PATH")
            .help("Write the report to a file"),
    )
    .arg(
        Arg::new("format")
            .long("format")
            .value_name("json|csv")
            .help("Report format [default: json]"),
    )
    .arg(
        Arg::new("config")
            .long("config")
            .value_name("PATH")
            .help("Flat TOML file of flag values (dashes written as underscores)"),
    )
}

pub fn command() -> Command {
    let mut root = Command::new("qdeco")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Decoherence and superselection experiments")
        .subcommand_required(true)
        .arg_required_else_help(true);
    let mut groups: BTreeMap<&str, Command> = BTreeMap::new();
    for leaf in LEAVES {
        match leaf.path {
            [_] => root = root.subcommand(leaf_command(leaf)),
            [group, _] => {
                let parent = groups.remove(group).unwrap_or_else(|| {
                    Command::new(*group)
                        .subcommand_required(true)
                        .arg_required_else_help(true)
                });
                groups.insert(group, parent.subcommand(leaf_command(leaf)));
            }
            _ => unreachable!("leaf paths have one or two segments"),
        }
    }
    for (name, cmd) in groups {
        let about = match name {
            "lattice" => "Truncated-link U(1) lattice experiments",
            "field" => "Macroscopic field decoherence",
            _ => "Thermal localization model",
        };
        root = root.subcommand(cmd.about(about));
    }
    root
}

/// Leaf selected by the parsed matches, with its own matches.
pub fn resolve(matches: &ArgMatches) -> (&'static Leaf, &ArgMatches) {
    let (first, sub) = matches.subcommand().expect("subcommand required");
    let (name, leaf_matches) = match sub.subcommand() {
        Some((second, m)) => (vec![first, second], m),
        None => (vec![first], sub),
    };
    let leaf = LEAVES
        .iter()
        .find(|l| l.path == name.as_slice())
        .expect("clap only accepts known paths");
    (leaf, leaf_matches)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Flag values after merging the config file with the command line. Typed
/// getters record what they read into the input echo.
pub struct Params {
    leaf: &'static Leaf,
    raw: BTreeMap<String, String>,
    pub inputs: BTreeMap<String, Value>,
}

impl Params {
    pub fn from_matches(leaf: &'static Leaf, matches: &ArgMatches) -> Result<Self, CliError> {
        let mut raw = BTreeMap::new();
        if let Some(path) = matches.get_one::<String>("config") {
            raw = read_config(leaf, Path::new(path))?;
        }
        for name in leaf.flags.iter().map(|f| f.name).chain(["out", "format"]) {
            if let Some(v) = matches.get_one::<String>(name) {
                raw.insert(name.to_string(), v.clone());
            }
        }
        Ok(Self {
            leaf,
            raw,
            inputs: BTreeMap::new(),
        })
    }

    pub fn command_name(&self) -> String {
        self.leaf.path.join(" ")
    }

    pub fn out(&self) -> Option<&str> {
        self.raw.get("out").map(String::as_str)
    }

    pub fn format(&self) -> Result<Format, CliError> {
        match self.raw.get("format").map(String::as_str) {
            None | Some("json") => Ok(Format::Json),
            Some("csv") => Ok(Format::Csv),
            Some(other) => Err(CliError::Usage(format!(
                "invalid value '{other}' for --format: expected json or csv"
            ))),
        }
    }

    fn text(&self, name: &str) -> Result<&str, CliError> {
        let spec = self
            .leaf
            .flags
            .iter()
            .find(|f| f.name == name)
            .expect("getter names match the flag table");
        self.raw
            .get(name)
            .map(String::as_str)
            .or(spec.default)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "missing required flag --{name} for '{}'",
                    self.command_name()
                ))
            })
    }

    fn parse<T: std::str::FromStr>(&self, name: &str, kind: &str) -> Result<T, CliError> {
        let text = self.text(name)?;
        text.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "invalid value '{text}' for --{name}: expected {kind}"
            ))
        })
    }

    fn record(&mut self, name: &str, value: Value) {
        self.inputs.insert(name.replace('-', "_"), value);
    }

    pub fn f64(&mut self, name: &str) -> Result<f64, CliError> {
        let v: f64 = self.parse(name, "a number")?;
        if !v.is_finite() {
            return Err(CliError::Usage(format!("--{name} must be finite")));
        }
        self.record(name, json!(v));
        Ok(v)
    }

    pub fn usize(&mut self, name: &str) -> Result<usize, CliError> {
        let v: usize = self.parse(name, "a non-negative integer")?;
        self.record(name, json!(v));
        Ok(v)
    }

    pub fn i64(&mut self, name: &str) -> Result<i64, CliError> {
        let v: i64 = self.parse(name, "an integer")?;
        self.record(name, json!(v));
        Ok(v)
    }

    pub fn u64(&mut self, name: &str) -> Result<u64, CliError> {
        let v: u64 = self.parse(name, "a non-negative integer")?;
        self.record(name, json!(v));
        Ok(v)
    }

    pub fn f64_list(&mut self, name: &str) -> Result<Vec<f64>, CliError> {
        let text = self.text(name)?.to_string();
        let values = text
            .split(',')
            .map(|s| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "invalid value '{text}' for --{name}: expected comma-separated numbers"
                ))
            })?;
        self.record(name, json!(values));
        Ok(values)
    }
}

fn read_config(leaf: &Leaf, path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (key, value) in table {
        let name = key.replace('_', "-");
        let known = leaf.flags.iter().any(|f| f.name == name)
            || (COMMON.contains(&name.as_str()) && name != "config");
        if !known || key.contains('-') {
            return Err(CliError::Usage(format!(
                "config {}: unknown key '{key}' for '{}'",
                path.display(),
                leaf.path.join(" ")
            )));
        }
        out.insert(name, config_text(&key, &value)?);
    }
    Ok(out)
}

fn config_text(key: &str, value: &toml::Value) -> Result<String, CliError> {
    match value {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(format!("{f:?}")),
        toml::Value::Array(items) => Ok(items
            .iter()
            .map(|v| config_text(key, v))
            .collect::<Result<Vec<_>, _>>()?
            .join(",")),
        _ => Err(CliError::Usage(format!(
            "config key '{key}' must be a number, string or array"
        ))),
    }
}
