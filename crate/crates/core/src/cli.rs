//! Command-line driver. Every command reads a [`RunConfig`] and writes its
//! artifacts into the output directory.
//!
//! Exit codes: 0 success, 2 inadmissible profile, 3 solver failure, 4 malformed
//! input, 1 anything else. Failures print one line
//! `error code=<n> kind=<kind> message=<text>` on stderr.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::RunConfig;
use crate::diagnostics::{
    flux_jump_residual, identity_check, kappa_family_study, poincare_check, refine_study, stability_study,
    trace_gradient, FluxJump, IdentityReport, PoincareCheck, TraceLocation,
};
use crate::error::{Error, Result};
use crate::geometry::{classify, Admissibility, BuiltinProfile};
use crate::io;
use crate::solver::{solve, SolveReport};

#[derive(Debug, Parser)]
#[command(name = "twolayer", version, about = "Two-layer transmission solver and diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for solves and studies.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Reserved; nothing is random yet.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Classify the profile and print the admissibility record.
    Admissible,
    /// Solve and write field.csv, mesh.csv and report.json.
    Solve,
    /// Solve and check flux, Poincaré, identity and minimality; writes verify.json.
    Verify,
    /// Mesh refinement over `study.levels`; writes refine.csv and refine.json.
    RefineStudy,
    /// Perturbation study `u + w/n`; writes stability.csv and stability.json.
    StabilityStudy,
    /// H² surrogates over a profile family; writes kappa.csv and kappa.json.
    KappaStudy,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Inadmissible(_) => 2,
        Error::NotConverged { .. } | Error::NegativeCurvature { .. } => 3,
        Error::InvalidParams(_)
        | Error::InvalidProfile(_)
        | Error::InvalidMesh(_)
        | Error::Config(_)
        | Error::Parse(_) => 4,
        _ => 1,
    }
}

fn kind(err: &Error) -> &'static str {
    match err {
        Error::InvalidParams(_) => "invalid_params",
        Error::InvalidProfile(_) => "invalid_profile",
        Error::Inadmissible(_) => "inadmissible",
        Error::Collapse { .. } => "collapse",
        Error::InvalidMesh(_) => "invalid_mesh",
        Error::DegenerateElement { .. } => "degenerate_element",
        Error::NotConverged { .. } => "not_converged",
        Error::NegativeCurvature { .. } => "negative_curvature",
        Error::Diagnostic(_) => "diagnostic",
        Error::Config(_) => "config",
        Error::Parse(_) => "parse",
        Error::Io { .. } => "io",
    }
}

pub fn error_line(err: &Error) -> String {
    format!("error code={} kind={} message={}", exit_code(err), kind(err), err.to_string().replace('\n', " "))
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("error code=4 kind=usage message={first}");
            return 4;
        }
        Err(e) => {
            print!("{e}");
            return 0;
        }
    };
    match run_cli(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{}", error_line(&err));
            exit_code(&err)
        }
    }
}

pub fn main_from_env() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    main_with_args(std::env::args_os())
}

fn run_cli(cli: &Cli) -> Result<i32> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    match cli.threads {
        Some(0) => Err(Error::Config("--threads must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| run(cli.command, &cfg))
        }
        None => run(cli.command, &cfg),
    }
}

#[derive(Serialize)]
struct Check<T> {
    pass: bool,
    #[serde(flatten)]
    value: T,
}

#[derive(Serialize)]
struct Minimality {
    energy_psi: f64,
    energy_h: f64,
}

#[derive(Serialize)]
struct TraceSummary {
    top_l2: f64,
    top_l4: f64,
    interface_l2: f64,
    interface_l4: f64,
}

#[derive(Serialize)]
struct VerifyReport {
    pass: bool,
    flux: Check<FluxJump>,
    poincare: Check<PoincareCheck>,
    /// Absent when a column collapses.
    identity: Option<Check<IdentityReport>>,
    identity_skipped: Option<String>,
    minimality: Check<Minimality>,
    trace: Check<TraceSummary>,
    report: SolveReport,
}

/// Classifies with the configured tolerances, failing with [`Error::Inadmissible`].
fn admissible_profile(cfg: &RunConfig) -> Result<(crate::geometry::Profile, Admissibility)> {
    let profile = cfg.profile()?;
    let tol = cfg.tolerances(&profile);
    let adm = classify(&profile, tol.eps_sign, tol.eps_touch)?;
    Ok((profile, adm))
}

fn require_admissible(cfg: &RunConfig) -> Result<crate::geometry::Profile> {
    let (profile, adm) = admissible_profile(cfg)?;
    if !adm.is_admissible() {
        return Err(Error::Inadmissible(format!("{:?}", adm.reasons)));
    }
    Ok(profile)
}

fn require_builtin(cfg: &RunConfig) -> Result<BuiltinProfile> {
    cfg.profile
        .builtin()
        .ok_or_else(|| Error::Config("this study needs a built-in profile".into()))
}

/// Runs one command against a parsed configuration.
pub fn run(command: Command, cfg: &RunConfig) -> Result<i32> {
    let out = &cfg.output.dir;
    let study = cfg.study();
    match command {
        Command::Admissible => {
            let (_, adm) = admissible_profile(cfg)?;
            let text = io::to_stable_json(&adm)?;
            print!("{text}");
            io::write_json(&out.join("admissibility.json"), &adm)?;
            if !adm.is_admissible() {
                let err = Error::Inadmissible(format!("{:?}", adm.reasons));
                eprintln!("{}", error_line(&err));
                return Ok(2);
            }
        }
        Command::Solve => {
            let profile = require_admissible(cfg)?;
            let sol = solve(&profile, cfg.mesh.spec(), &cfg.solver)?;
            io::write_field_csv(&out.join("field.csv"), &sol)?;
            io::write_mesh_csv(&out.join("mesh.csv"), &sol.mesh)?;
            io::write_json(&out.join("report.json"), &sol.report)?;
            print!("{}", io::to_stable_json(&sol.report)?);
        }
        Command::Verify => {
            let profile = require_admissible(cfg)?;
            let sol = solve(&profile, cfg.mesh.spec(), &cfg.solver)?;
            let flux = flux_jump_residual(&sol.psi, &sol.mesh)?;
            let poincare = poincare_check(&sol.chi, &sol.mesh)?;
            let (identity, identity_skipped) = match identity_check(&sol.chi, &sol.mesh, &profile) {
                Ok(r) => (Some(Check { pass: r.is_finite(), value: r }), None),
                Err(Error::Diagnostic(why)) => (None, Some(why)),
                Err(e) => return Err(e),
            };
            let top = trace_gradient(&sol.psi, &sol.mesh, TraceLocation::Top)?;
            let iface = trace_gradient(&sol.psi, &sol.mesh, TraceLocation::InterfaceUpper)?;
            let r = &sol.report;
            let minimality = Check {
                pass: r.energy_psi <= r.energy_h + 10.0 * cfg.solver.cg_tol * r.energy_h,
                value: Minimality { energy_psi: r.energy_psi, energy_h: r.energy_h },
            };
            let trace = TraceSummary { top_l2: top.l2, top_l4: top.l4, interface_l2: iface.l2, interface_l4: iface.l4 };
            let trace_ok = [trace.top_l2, trace.top_l4, trace.interface_l2, trace.interface_l4].iter().all(|v| v.is_finite());
            let flux = Check { pass: flux.l2.is_finite() && flux.linf.is_finite(), value: flux };
            let poincare = Check { pass: poincare.holds(), value: poincare };
            let pass = flux.pass
                && poincare.pass
                && identity.as_ref().map_or(true, |c| c.pass)
                && minimality.pass
                && trace_ok;
            let report = VerifyReport {
                pass,
                flux,
                poincare,
                identity,
                identity_skipped,
                minimality,
                trace: Check { pass: trace_ok, value: trace },
                report: sol.report.clone(),
            };
            io::write_json(&out.join("verify.json"), &report)?;
            print!("{}", io::to_stable_json(&report)?);
        }
        Command::RefineStudy => {
            let b = require_builtin(cfg)?;
            require_admissible(cfg)?;
            let r = refine_study(b, cfg.params, &study.levels, cfg.mesh.lateral, &cfg.solver)?;
            io::write_refine_csv(&out.join("refine.csv"), &r)?;
            io::write_json(&out.join("refine.json"), &r)?;
            println!("order_l2={:.4} order_linf={:.4} order_flux={:.4}", r.order_l2, r.order_linf, r.order_flux);
        }
        Command::StabilityStudy => {
            let base = require_admissible(cfg)?;
            let w = study.perturbation.unwrap_or(BuiltinProfile::Cosine { amplitude: -0.5 }).sample(cfg.params, cfg.mesh.nx)?;
            let table = stability_study(&base, &w, &study.schedule, cfg.mesh.spec(), &cfg.solver)?;
            io::write_study_csv(&out.join("stability.csv"), &table)?;
            io::write_json(&out.join("stability.json"), &table)?;
            for r in &table.records {
                println!("n={} e_h1={:.6e} energy_gap={:.6e} trace_gap_p2={:.6e}", r.n, r.e_h1, r.energy_gap, r.trace_gap_p2);
            }
        }
        Command::KappaStudy => {
            let family = study.family.clone().unwrap_or_else(BuiltinProfile::standard_family);
            let k = kappa_family_study(&family, cfg.params, study.kappa, &study.levels, cfg.mesh.lateral, study.max_ratio, &cfg.solver)?;
            io::write_kappa_csv(&out.join("kappa.csv"), &k)?;
            io::write_json(&out.join("kappa.json"), &k)?;
            for s in &k.summaries {
                match &s.excluded {
                    Some(why) => println!("{}: excluded ({why})", s.profile),
                    None => println!(
                        "{}: ratio_lower={:.4} ratio_upper={:.4} masked={:.4} blow_up={}",
                        s.profile, s.ratio_lower, s.ratio_upper, s.masked_fraction, s.blow_up
                    ),
                }
            }
        }
    }
    Ok(0)
}
