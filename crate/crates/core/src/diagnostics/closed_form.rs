use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PhysicalParams;
use crate::mesh::{eval_reference, LateralBoundary};
use crate::solver::Solution;

/// Exact potential of the flat stack `u ≡ 0` with insulated sides: piecewise
/// linear in `z` with continuous flux `σ₁σ₂V/Δ`, `Δ = σ₂H + σ₁d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatClosedForm {
    pub params: PhysicalParams,
}

impl FlatClosedForm {
    pub fn new(params: PhysicalParams) -> Self {
        FlatClosedForm { params }
    }

    fn delta(&self) -> f64 {
        self.params.sigma2 * self.params.ground_depth + self.params.sigma1 * self.params.thickness
    }

    /// `∂_zψ` in the lower and upper layer.
    pub fn slopes(&self) -> (f64, f64) {
        let p = &self.params;
        (p.sigma2 * p.voltage / self.delta(), p.sigma1 * p.voltage / self.delta())
    }

    pub fn psi(&self, z: f64) -> f64 {
        let (a, b) = self.slopes();
        if z <= 0.0 {
            a * (z + self.params.ground_depth)
        } else {
            a * self.params.ground_depth + b * z
        }
    }

    /// `½∫σ|∇ψ|² = Lσ₁σ₂V²/Δ`.
    pub fn energy(&self) -> f64 {
        let p = &self.params;
        p.half_width * p.sigma1 * p.sigma2 * p.voltage * p.voltage / self.delta()
    }

    /// Normal flux `σ₁σ₂V/Δ`, the same on both sides of the interface.
    pub fn flux(&self) -> f64 {
        let p = &self.params;
        p.sigma1 * p.sigma2 * p.voltage / self.delta()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatErrors {
    /// `‖(χ_h + h) − ψ‖_{L²}` with `h` in closed form.
    pub l2: f64,
    /// Largest nodal `|ψ_h − ψ|`.
    pub linf_nodal: f64,
    pub energy_error: f64,
}

/// Errors of a flat, insulated-sides solution against [`FlatClosedForm`].
pub fn flat_errors(sol: &Solution) -> Result<FlatErrors> {
    if sol.profile.u().iter().any(|&u| u != 0.0) {
        return Err(Error::Diagnostic("closed form requires the flat profile".into()));
    }
    if sol.mesh.lateral() != LateralBoundary::Insulated {
        return Err(Error::Diagnostic("closed form requires insulated lateral sides".into()));
    }
    let exact = FlatClosedForm::new(*sol.profile.params());
    let mesh = &sol.mesh;
    let linf_nodal = (0..mesh.node_count())
        .map(|n| (sol.psi.values[n] - exact.psi(mesh.coords(n).1)).abs())
        .fold(0.0_f64, f64::max);

    let g = (0.6_f64).sqrt();
    let rule = [(-g, 5.0 / 9.0), (0.0, 8.0 / 9.0), (g, 5.0 / 9.0)];
    let mut l2 = 0.0;
    for (e, elem) in mesh.elements().iter().enumerate() {
        for &(xi, wx) in &rule {
            for &(eta, wz) in &rule {
                let q = eval_reference(mesh, elem, e, xi, eta)?;
                let chi: f64 = (0..4).map(|a| q.shape[a] * sol.chi.values[elem.nodes[a]]).sum();
                let (_, z) = q.point;
                let h = sol.lift.eval_local(0.0, 0.0, z).value;
                let err = chi + h - exact.psi(z);
                l2 += wx * wz * q.jxw * err * err;
            }
        }
    }
    Ok(FlatErrors { l2: l2.sqrt(), linf_nodal, energy_error: (sol.report.energy_psi - exact.energy()).abs() })
}
