//! Flat interface with insulated sides: the solution is piecewise linear in z
//! and the discrete solve reproduces it to round-off.

use twolayer::diagnostics::{flat_errors, FlatClosedForm};
use twolayer::{solve, BuiltinProfile, LateralBoundary, MeshSpec, PhysicalParams, SolverSettings};

fn main() -> twolayer::Result<()> {
    let params = PhysicalParams::case_flat();
    let exact = FlatClosedForm::new(params);
    let (lower, upper) = exact.slopes();
    println!("exact slopes {lower:.6} (lower) {upper:.6} (plate), energy {:.6}, flux {:.6}", exact.energy(), exact.flux());
    for n in [8, 16, 32, 64] {
        let profile = BuiltinProfile::Flat.sample(params, n)?;
        let sol = solve(&profile, MeshSpec::new(n, n).with_lateral(LateralBoundary::Insulated), &SolverSettings::default())?;
        let e = flat_errors(&sol)?;
        println!(
            "n {n:>3}: energy {:.12} L2 {:.3e} nodal Linf {:.3e} CG {} its",
            sol.report.energy_psi, e.l2, e.linf_nodal, sol.report.cg_iters
        );
    }
    Ok(())
}
