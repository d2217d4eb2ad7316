use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mesh::LayeredMesh;
use crate::solver::{l2_parts, Field};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareCheck {
    /// `‖χ‖_{L²(Ω)}`.
    pub lhs: f64,
    /// `2‖H + d + u‖_∞ · ‖∂_zχ‖_{L²(Ω)}`.
    pub bound: f64,
}

impl PoincareCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.bound
    }
}

/// Poincaré inequality in the vertical direction for a field vanishing on the
/// ground plate.
pub fn poincare_check(chi: &Field, mesh: &LayeredMesh) -> Result<PoincareCheck> {
    let p = mesh.params();
    let height = (0..=mesh.nx())
        .map(|i| p.ground_depth + p.thickness + mesh.interface_height(i))
        .fold(0.0_f64, f64::max);
    let (v2, _, z2) = l2_parts(&chi.values, mesh)?;
    Ok(PoincareCheck { lhs: v2.sqrt(), bound: 2.0 * height * z2.sqrt() })
}
