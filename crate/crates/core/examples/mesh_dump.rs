//! Writes the mesh, the solved field and the profile as CSV, plus the report as JSON.
//!
//! Usage: `cargo run --example mesh_dump -- [output-dir]` (default `mesh_dump_out`).

use std::path::PathBuf;

use twolayer::{io, solve, BuiltinProfile, MeshSpec, PhysicalParams, SolverSettings};

fn main() -> twolayer::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "mesh_dump_out".into()));
    let profile = BuiltinProfile::Bump { amplitude: 0.4, half_width: 0.5 }.sample(PhysicalParams::case_flat(), 32)?;
    let sol = solve(&profile, MeshSpec::new(8, 8), &SolverSettings::default())?;
    io::write_profile_csv(&dir.join("profile.csv"), &profile)?;
    io::write_mesh_csv(&dir.join("mesh.csv"), &sol.mesh)?;
    io::write_field_csv(&dir.join("field.csv"), &sol)?;
    io::write_json(&dir.join("report.json"), &sol.report)?;
    println!("{} nodes, {} elements written to {}", sol.mesh.node_count(), sol.mesh.elements().len(), dir.display());
    Ok(())
}
