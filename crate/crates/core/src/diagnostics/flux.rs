use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mesh::{eval_reference, LayeredMesh};
use crate::solver::Field;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxJump {
    /// `(Σ |⟦σ∇ψ⟧·n|² · |segment|)^{1/2}` over the interface segments.
    pub l2: f64,
    pub linf: f64,
    /// Segments skipped because one of their columns is collapsed.
    pub skipped: usize,
}

/// Jump of the conormal flux `σ∇ψ·n` across the interface, with one-sided
/// gradients taken from the lower and upper elements at each interface-edge midpoint.
pub fn flux_jump_residual(psi: &Field, mesh: &LayeredMesh) -> Result<FluxJump> {
    let (n1, nx) = (mesh.n1(), mesh.nx());
    let mut sum = 0.0;
    let mut linf = 0.0_f64;
    let mut skipped = 0;
    for i in 0..nx {
        if mesh.collapsed()[i] || mesh.collapsed()[i + 1] {
            skipped += 1;
            continue;
        }
        let slope = mesh.interface_slope(i);
        let len = (1.0 + slope * slope).sqrt();
        let normal = [-slope / len, 1.0 / len];
        let dx = mesh.column_x()[i + 1] - mesh.column_x()[i];

        let mut flux = [0.0; 2];
        for (side, (row, eta)) in [(n1 - 1, 1.0), (n1, -1.0)].into_iter().enumerate() {
            let e = mesh.element_index(i, row);
            let elem = &mesh.elements()[e];
            let q = eval_reference(mesh, elem, e, 0.0, eta)?;
            let (gx, gz) = crate::solver::interpolant_gradient(&q, elem.nodes, &psi.values);
            flux[side] = elem.sigma * (gx * normal[0] + gz * normal[1]);
        }
        let jump = flux[0] - flux[1];
        sum += jump * jump * dx * len;
        linf = linf.max(jump.abs());
    }
    Ok(FluxJump { l2: sum.sqrt(), linf, skipped })
}
