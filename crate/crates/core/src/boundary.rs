//! The Dirichlet lift `h_u(x, z) = ζ(z − u(x) + 1)` with the quadratic ramp
//! `ζ(r) = V·min{1, (r − 1)²/d²}` for `r > 1` and `ζ ≡ 0` on `(−∞, 1]`.
//!
//! `h_u` vanishes on the lower layer and on the ground plate and equals `V` on the
//! top of the plate. Since `ζ(1) = ζ'(1) = 0`, both one-sided traces and both
//! conormal fluxes of `h_u` vanish on the interface.

use serde::{Deserialize, Serialize};

use crate::geometry::{PhysicalParams, Profile};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lift {
    pub voltage: f64,
    pub thickness: f64,
}

/// `(ζ, ζ', ζ'')`. Derivatives at the kinks `r = 1` and `r = 1 + d` are taken from the left.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ramp {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

/// Value and gradient of `h` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftValue {
    pub value: f64,
    pub dx: f64,
    pub dz: f64,
}

impl Lift {
    pub fn new(params: &PhysicalParams) -> Self {
        Lift { voltage: params.voltage, thickness: params.thickness }
    }

    pub fn eval_zeta(&self, r: f64) -> Ramp {
        let (v, d) = (self.voltage, self.thickness);
        if r <= 1.0 {
            Ramp { value: 0.0, first: 0.0, second: 0.0 }
        } else if r <= 1.0 + d {
            let s = r - 1.0;
            Ramp { value: v * s * s / (d * d), first: 2.0 * v * s / (d * d), second: 2.0 * v / (d * d) }
        } else {
            Ramp { value: v, first: 0.0, second: 0.0 }
        }
    }

    /// `h` for an interface at height `u` with slope `du`.
    pub fn eval_local(&self, u: f64, du: f64, z: f64) -> LiftValue {
        let ramp = self.eval_zeta(z - u + 1.0);
        LiftValue { value: ramp.value, dx: -du * ramp.first, dz: ramp.first }
    }

    /// `h_u(x, z)` with `u` and `u'` interpolated from the profile samples.
    pub fn eval_h(&self, profile: &Profile, x: f64, z: f64) -> LiftValue {
        self.eval_local(profile.value_at(x), profile.slope_at(x), z)
    }
}
