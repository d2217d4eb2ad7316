//! Evaluates the second-derivative integral identity on the discrete solution
//! for a flat and a curved interface under refinement.

use twolayer::diagnostics::identity_check;
use twolayer::{solve, BuiltinProfile, LateralBoundary, MeshSpec, PhysicalParams, SolverSettings};

fn main() -> twolayer::Result<()> {
    let params = PhysicalParams::case_flat();
    let cases = [
        (BuiltinProfile::Flat, LateralBoundary::Insulated),
        (BuiltinProfile::Cosine { amplitude: -0.5 }, LateralBoundary::Dirichlet),
        (BuiltinProfile::Cosine { amplitude: 0.5 }, LateralBoundary::Dirichlet),
    ];
    for (shape, lateral) in cases {
        println!("{} ({})", shape.label(), format!("{lateral:?}").to_lowercase());
        for n in [32, 64, 128] {
            let profile = shape.sample(params, n)?;
            let sol = solve(&profile, MeshSpec::new(n, n).with_lateral(lateral), &SolverSettings::default())?;
            let r = identity_check(&sol.chi, &sol.mesh, &profile)?;
            println!(
                "  n {n:>3}: lhs {:+.5e} mixed {:+.5e} top {:+.5e} interface {:+.5e} relative residual {:.4e}",
                r.lhs,
                r.rhs_mixed,
                r.rhs_top,
                r.rhs_interface,
                r.relative()
            );
        }
    }
    Ok(())
}
