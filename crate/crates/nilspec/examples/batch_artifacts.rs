//! The batch surface behind the `nilspec` binary, driven in-process:
//! config-file layering with flag overrides, validated experiment configs,
//! and deterministic CSV/JSON artifacts.
//!
//! Run with: cargo run -p nilspec --example batch_artifacts

use clap::Parser;
use nilspec::run::{execute, resolve_config, Cli, CommonArgs};
use nilspec::config::Experiment;

fn main() -> nilspec::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, "model = torus:1\nlambda-max = 40000\ngrid-points = 6\n")?;

    // Flags override file entries key by key; here the file's grid survives
    // while lambda-max is replaced.
    let csv_path = dir.path().join("weyl.csv");
    let json_path = dir.path().join("weyl.json");
    let cli = Cli::parse_from([
        "nilspec",
        "weyl",
        "--config",
        cfg_path.to_str().unwrap(),
        "--lambda-max",
        "90000",
        "--csv",
        csv_path.to_str().unwrap(),
        "--json",
        json_path.to_str().unwrap(),
    ]);
    execute(cli)?;

    println!("CSV artifact:");
    print!("{}", std::fs::read_to_string(&csv_path)?);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path)?).expect("valid JSON");
    println!("\nJSON artifact (schema_version {}):", report["schema_version"]);
    println!("  tool          = {}", report["tool"]);
    println!("  model         = {}", report["model"]);
    println!("  fitted W      = {}", report["data"]["fitted"]["value"]);
    println!("  closed form   = {}", report["data"]["closed_form"]);
    println!("  rel deviation = {}", report["data"]["relative_deviation"]);

    // Validation happens before any work: out-of-range parameters come back
    // as one PARAM_RANGE diagnostic per offending key.
    let mut bad = CommonArgs::default();
    bad.model = Some("torus:1".into());
    bad.lambda_max = Some("-5".into());
    match resolve_config(Experiment::Weyl, &bad) {
        Err(e) => println!("\nrejected config: {e} (exit code {})", e.exit_code()),
        Ok(_) => unreachable!("negative cutoff must not validate"),
    }
    Ok(())
}
