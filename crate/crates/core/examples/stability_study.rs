//! Perturbs a flat interface by `w/n` and tracks the H1 distance of the
//! potentials, the energy gap and the trace gaps.

use twolayer::diagnostics::stability_study;
use twolayer::{BuiltinProfile, MeshSpec, PhysicalParams, SolverSettings};

fn main() -> twolayer::Result<()> {
    let params = PhysicalParams::case_flat();
    let base = BuiltinProfile::Flat.sample(params, 64)?;
    let w = BuiltinProfile::Cosine { amplitude: -0.5 }.sample(params, 64)?;
    let table = stability_study(&base, &w, &[1, 2, 4, 8, 16], MeshSpec::new(32, 32), &SolverSettings::default())?;
    println!("base energy {:.6}", table.base_energy);
    println!("{:>3} {:>12} {:>12} {:>12} {:>12}", "n", "e_h1", "energy gap", "top L2 gap", "iface L2 gap");
    for r in &table.records {
        println!(
            "{:>3} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            r.n, r.e_h1, r.energy_gap, r.trace_gap_p2, r.interface_gap_p2
        );
    }
    Ok(())
}
