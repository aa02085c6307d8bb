use std::collections::BTreeMap;

use qdeco_core::decoherence::{
    dephasing_experiment, time_grid, tripartite_experiment, SpinBathModel, SPEC_NORM_TOL,
};
use qdeco_core::field_decoherence::{
    coherence_length, decoherence_factor, suppression_exponent_natural,
    thermal_coherence_length_cm, validity_time, Dimension, PhysicalQuantity, ThermalModel,
};
use qdeco_core::hilbert::{HERMITIAN_TOL, NORM_TOL};
use qdeco_core::lattice_qed::{identity_check, superselection_experiment, LatticeSpec, EXACT_TOL};
use qdeco_core::Execution;
use serde_json::{json, Value};

use crate::args::Params;
use crate::report::{RunReport, Table};
use crate::CliError;

/// Gauge functions drawn per left boundary field in `lattice identity-check`.
pub const IDENTITY_SAMPLES: usize = 50;

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn report(params: Params, outputs: Value) -> RunReport {
    RunReport {
        command: params.command_name(),
        inputs: params.inputs,
        outputs,
        seed: None,
        tolerances: BTreeMap::new(),
        table: None,
    }
}

pub fn dispatch(path: &[&str], mut p: Params) -> Result<RunReport, CliError> {
    match path {
        ["tripartite"] => {
            let coeffs = p.f64_list("coeffs")?;
            let r = p.f64("env-overlap")?;
            let summary = tripartite_experiment(&coeffs, r)?;
            let mut rep = report(p, to_value(&summary));
            rep.tolerances =
                BTreeMap::from([("norm", SPEC_NORM_TOL), ("hermitian", HERMITIAN_TOL)]);
            Ok(rep)
        }
        ["dephasing"] => {
            let spins = p.usize("spins")?;
            let couplings = p.f64_list("coupling")?;
            let t_max = p.f64("t-max")?;
            let steps = p.usize("steps")?;
            let couplings = match couplings.as_slice() {
                [g] => vec![*g; spins],
                list if list.len() == spins => list.to_vec(),
                list => {
                    return Err(CliError::Validation(format!(
                        "--coupling has {} values for {spins} spins",
                        list.len()
                    )))
                }
            };
            let model = SpinBathModel::equal_weights(couplings)?;
            let times = time_grid(t_max, steps)?;
            let result = dephasing_experiment(&model, &times, Execution::default())?;
            let outputs = json!({
                "spins": spins,
                "couplings": result.couplings,
                "points": result.curve.len(),
                "max_coherence_deviation": result.max_coherence_deviation,
                "entropy_max_deviation": result.entropy.max_deviation,
                "entropy_monotone": result.entropy.monotone,
            });
            let mut rep = report(p, outputs);
            rep.tolerances = BTreeMap::from([("norm", NORM_TOL)]);
            rep.table = Some(Table {
                header: ["t", "coherence", "coherence_closed_form", "entropy_nats"]
                    .map(String::from)
                    .to_vec(),
                rows: result.rows().iter().map(|r| r.to_vec()).collect(),
            });
            Ok(rep)
        }
        ["lattice", "superselect"] => {
            let sites = p.usize("sites")?;
            let e_max = p.i64("emax")?;
            let left = p.i64("left-field")?;
            let spec = LatticeSpec::new(sites, e_max, left)?;
            let exp = superselection_experiment(&spec)?;
            let mut outputs = to_value(&exp.report);
            outputs["superselected"] = json!(exp.report.superselected(EXACT_TOL));
            outputs["contrast"] = to_value(&exp.contrast);
            let mut rep = report(p, outputs);
            rep.tolerances = BTreeMap::from([("exact", EXACT_TOL)]);
            Ok(rep)
        }
        ["lattice", "identity-check"] => {
            let sites = p.usize("sites")?;
            let e_max = p.i64("emax")?;
            let seed = p.u64("seed")?;
            let result =
                identity_check(sites, e_max, IDENTITY_SAMPLES, seed, Execution::default())?;
            let mut outputs = to_value(&result);
            outputs["passed"] = json!(result.passed(EXACT_TOL));
            let mut rep = report(p, outputs);
            rep.seed = Some(seed);
            rep.tolerances = BTreeMap::from([("exact", EXACT_TOL)]);
            Ok(rep)
        }
        ["field", "factor"] => {
            let volume = PhysicalQuantity::cubic_centimetres(p.f64("volume-cm3")?);
            let field = PhysicalQuantity::volts_per_centimetre(p.f64("efield-v-per-cm")?);
            let factor = decoherence_factor(&volume, &field)?;
            let exponent = suppression_exponent_natural(
                volume.natural_magnitude(Dimension::Volume)?,
                field.natural_magnitude(Dimension::ElectricField)?,
            )?;
            Ok(report(
                p,
                json!({ "factor": factor, "suppression_exponent": exponent }),
            ))
        }
        ["field", "coherence-length"] => {
            let field = PhysicalQuantity::volts_per_centimetre(p.f64("efield-v-per-cm")?);
            let threshold = p.f64("threshold")?;
            let length = coherence_length(&field, threshold)?;
            Ok(report(
                p,
                json!({
                    "length_cm": length.in_centimetres()?,
                    "length_inverse_mev": length.magnitude,
                    "threshold_exponent": threshold,
                    "threshold_scaling": "length grows as threshold^(1/3)",
                }),
            ))
        }
        ["field", "validity-time"] => {
            let field = PhysicalQuantity::volts_per_centimetre(p.f64("efield-v-per-cm")?);
            let t = validity_time(&field)?;
            Ok(report(
                p,
                json!({ "t_min_s": t.in_seconds()?, "t_min_inverse_mev": t.magnitude }),
            ))
        }
        ["thermal", "length"] => {
            let time_s = p.f64("time-s")?;
            let model = ThermalModel::with_rate(p.f64("lambda-cm2s")?)?;
            let length = thermal_coherence_length_cm(time_s, &model)?;
            Ok(report(
                p,
                json!({
                    "length_cm": length,
                    "lambda_cm2s": model.lambda_cm2s(),
                    "temperature_k": model.temperature_k(),
                }),
            ))
        }
        _ => Err(CliError::Usage(format!(
            "unknown command '{}'",
            path.join(" ")
        ))),
    }
}
