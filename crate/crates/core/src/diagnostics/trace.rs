use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mesh::{eval_reference, LayeredMesh};
use crate::solver::{interpolant_gradient, Field};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceLocation {
    /// Plate side of the interface, `z = u(x)⁺`.
    InterfaceUpper,
    /// Top of the plate, `z = u(x) + d`.
    Top,
}

/// `∇ψ₂` sampled at the midpoints of the interface or top edges of the plate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceData {
    pub location: TraceLocation,
    pub x: Vec<f64>,
    pub grad: Vec<[f64; 2]>,
    pub dx: f64,
    pub l2: f64,
    pub l4: f64,
}

fn lp_norm(values: impl Iterator<Item = f64>, dx: f64, p: f64) -> f64 {
    (values.map(|v| v.powf(p)).sum::<f64>() * dx).powf(1.0 / p)
}

pub fn trace_gradient(psi: &Field, mesh: &LayeredMesh, location: TraceLocation) -> Result<TraceData> {
    let (row, eta) = match location {
        TraceLocation::InterfaceUpper => (mesh.n1(), -1.0),
        TraceLocation::Top => (mesh.n1() + mesh.n2() - 1, 1.0),
    };
    let xs = mesh.column_x();
    let dx = xs[1] - xs[0];
    let mut x = Vec::with_capacity(mesh.nx());
    let mut grad = Vec::with_capacity(mesh.nx());
    for i in 0..mesh.nx() {
        let e = mesh.element_index(i, row);
        let elem = &mesh.elements()[e];
        let q = eval_reference(mesh, elem, e, 0.0, eta)?;
        let (gx, gz) = interpolant_gradient(&q, elem.nodes, &psi.values);
        x.push(0.5 * (xs[i] + xs[i + 1]));
        grad.push([gx, gz]);
    }
    let mag = |g: &[f64; 2]| g[0].hypot(g[1]);
    let l2 = lp_norm(grad.iter().map(mag), dx, 2.0);
    let l4 = lp_norm(grad.iter().map(mag), dx, 4.0);
    Ok(TraceData { location, x, grad, dx, l2, l4 })
}

/// `‖∇ψ_a − ∇ψ_b‖_{L_p(D)}` between two traces sampled on the same midpoints.
pub fn trace_gap(a: &TraceData, b: &TraceData, p: f64) -> f64 {
    assert_eq!(a.x.len(), b.x.len(), "traces sampled on different grids");
    let diff = a.grad.iter().zip(&b.grad).map(|(g, h)| (g[0] - h[0]).hypot(g[1] - h[1]));
    lp_norm(diff, a.dx, p)
}
