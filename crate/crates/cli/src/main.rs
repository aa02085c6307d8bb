use std::io::Write;

fn main() {
    let outcome = qdeco_cli::run(std::env::args());
    // a closed pipe leaves nothing useful to report
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    std::process::exit(outcome.code);
}
