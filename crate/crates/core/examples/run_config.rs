//! Drive a run from a TOML config, as the binary does.
//!
//! `cargo run --example run_config -- configs/f1_verify.toml verify`

use std::path::PathBuf;

use hemi_ns::cli::{execute, Command, RunConfig};

fn main() -> hemi_ns::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = PathBuf::from(args.next().unwrap_or_else(|| "configs/f3_decay.toml".into()));
    let command = match args.next().as_deref().unwrap_or("verify") {
        "check-law" => Command::CheckLaw,
        "solve" => Command::Solve,
        "sweep" => Command::Sweep,
        "control" => Command::Control,
        "dgc" => Command::Dgc,
        _ => Command::Verify,
    };
    let cfg = RunConfig::load(&path)?;
    let out = std::env::temp_dir().join("hemi-ns-example");
    let outcome = execute(command, &cfg, Some(out), None)?;
    print!("{}", outcome.report);
    println!("passed: {}, files: {:?}", outcome.passed, outcome.files);
    Ok(())
}
