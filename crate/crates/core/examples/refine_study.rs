//! Mesh refinement: errors against the closed form on the flat case and
//! against the finest level otherwise, with fitted orders.

use twolayer::diagnostics::refine_study;
use twolayer::{BuiltinProfile, LateralBoundary, PhysicalParams, SolverSettings};

fn main() -> twolayer::Result<()> {
    let params = PhysicalParams::case_flat();
    let cases = [
        (BuiltinProfile::Flat, LateralBoundary::Insulated),
        (BuiltinProfile::Cosine { amplitude: -0.25 }, LateralBoundary::Dirichlet),
    ];
    for (shape, lateral) in cases {
        let study = refine_study(shape, params, &[16, 32, 64, 128], lateral, &SolverSettings::default())?;
        println!("{} (closed form: {})", study.profile, study.closed_form);
        for r in &study.records {
            println!(
                "  nx {:>3}: L2 {:.3e} Linf {:.3e} energy {:.8} flux jump {:.3e}",
                r.nx, r.l2_error, r.linf_error, r.energy, r.flux_jump_l2
            );
        }
        println!("  orders: L2 {:.2} Linf {:.2} flux {:.2}", study.order_l2, study.order_linf, study.order_flux);
    }
    Ok(())
}
