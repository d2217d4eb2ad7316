//! H2 surrogates of the potential across the profile family and mesh levels.

use twolayer::diagnostics::kappa_family_study;
use twolayer::{BuiltinProfile, LateralBoundary, PhysicalParams, SolverSettings};

fn main() -> twolayer::Result<()> {
    let study = kappa_family_study(
        &BuiltinProfile::standard_family(),
        PhysicalParams::case_flat(),
        10.0,
        &[16, 32, 64],
        LateralBoundary::Dirichlet,
        1.5,
        &SolverSettings::default(),
    )?;
    for r in &study.records {
        println!("{:<16} level {:>3}: lower {:.4} upper {:.4}", r.profile, r.level, r.lower.estimate, r.upper.estimate);
    }
    for s in &study.summaries {
        println!(
            "{:<16} ratios {:.3} {:.3} masked {:.4} blow-up {}",
            s.profile, s.ratio_lower, s.ratio_upper, s.masked_fraction, s.blow_up
        );
    }
    println!("family max {:.4} {:.4}", study.family_max_lower, study.family_max_upper);
    Ok(())
}
