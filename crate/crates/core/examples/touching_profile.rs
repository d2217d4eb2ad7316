//! A deflection that touches the ground plate: the lower layer pinches off,
//! collapsed columns are masked and every diagnostic stays finite.

use twolayer::diagnostics::{flux_jump_residual, h2_surrogate, identity_check, poincare_check, trace_gradient, TraceLocation};
use twolayer::geometry::{classify_default, Layer};
use twolayer::{solve, BuiltinProfile, MeshSpec, PhysicalParams, SolverSettings};

fn main() -> twolayer::Result<()> {
    let params = PhysicalParams::case_flat();
    let profile = BuiltinProfile::ParabolaTouch.sample(params, 64)?;
    let adm = classify_default(&profile)?;
    println!("class {:?}, contact runs {:?}", adm.class, adm.coincidence);

    let sol = solve(&profile, MeshSpec::new(64, 64), &SolverSettings::default())?;
    let collapsed = sol.mesh.collapsed().iter().filter(|&&c| c).count();
    let (lo, hi) = sol.psi.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    println!("collapsed columns {collapsed}, psi range [{lo:.3e}, {hi:.6}], energy {:.6}", sol.report.energy_psi);

    let flux = flux_jump_residual(&sol.psi, &sol.mesh)?;
    println!("flux jump L2 {:.4e} (skipped {} interface nodes)", flux.l2, flux.skipped);
    let p = poincare_check(&sol.chi, &sol.mesh)?;
    println!("Poincare {:.4e} <= {:.4e}", p.lhs, p.bound);
    for layer in [Layer::Lower, Layer::Upper] {
        let s = h2_surrogate(&sol.psi, &sol.mesh, &profile, layer)?;
        println!("{} H2 surrogate {:.4} (masked fraction {:.4})", layer.as_str(), s.estimate, s.excluded_fraction);
    }
    let top = trace_gradient(&sol.psi, &sol.mesh, TraceLocation::Top)?;
    println!("top trace |grad psi| L2 {:.4} L4 {:.4}", top.l2, top.l4);
    match identity_check(&sol.chi, &sol.mesh, &profile) {
        Ok(r) => println!("identity relative residual {:.4e}", r.relative()),
        Err(e) => println!("identity not evaluated: {e}"),
    }
    Ok(())
}
