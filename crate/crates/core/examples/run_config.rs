//! Runs one CLI command from a TOML config without going through the binary.
//!
//! Usage: `cargo run --example run_config -- examples/configs/cosine.toml verify`

use twolayer::cli::{run, Command};
use twolayer::config::RunConfig;

fn main() -> twolayer::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/cosine.toml").into());
    let command = match args.next().as_deref().unwrap_or("verify") {
        "admissible" => Command::Admissible,
        "solve" => Command::Solve,
        "verify" => Command::Verify,
        "refine-study" => Command::RefineStudy,
        "stability-study" => Command::StabilityStudy,
        "kappa-study" => Command::KappaStudy,
        other => return Err(twolayer::Error::Config(format!("unknown command {other}"))),
    };
    let cfg = RunConfig::load(path.as_ref())?;
    let code = run(command, &cfg)?;
    println!("\nexit code {code}, artifacts in {}", cfg.output.dir.display());
    Ok(())
}
