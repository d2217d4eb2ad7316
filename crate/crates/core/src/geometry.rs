//! Deflection profiles, physical parameters and admissibility.
//!
//! A profile is the deflection `u` of the bottom of the elastic plate sampled on a
//! uniform grid of `[-L, L]`. It determines the lower layer `-H < z < u(x)`, the
//! plate `u(x) < z < u(x) + d` and the interface `z = u(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometric and material constants of the device.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// Half-width of `D = (-L, L)`.
    pub half_width: f64,
    /// Depth `H` of the ground plate below `z = 0`.
    pub ground_depth: f64,
    /// Plate thickness `d`.
    pub thickness: f64,
    /// Potential `V` imposed on the top of the plate.
    pub voltage: f64,
    /// Permittivity of the lower layer.
    pub sigma1: f64,
    /// Permittivity of the plate.
    pub sigma2: f64,
}

impl PhysicalParams {
    pub fn new(half_width: f64, ground_depth: f64, thickness: f64, voltage: f64, sigma1: f64, sigma2: f64) -> Result<Self> {
        let p = PhysicalParams { half_width, ground_depth, thickness, voltage, sigma1, sigma2 };
        p.validate()?;
        Ok(p)
    }

    /// `L = H = d = V = 1`, `σ₁ = 1`, `σ₂ = 2`.
    pub fn case_flat() -> Self {
        PhysicalParams { half_width: 1.0, ground_depth: 1.0, thickness: 1.0, voltage: 1.0, sigma1: 1.0, sigma2: 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("half_width", self.half_width),
            ("ground_depth", self.ground_depth),
            ("thickness", self.thickness),
            ("voltage", self.voltage),
            ("sigma1", self.sigma1),
            ("sigma2", self.sigma2),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive and finite, got {value}")));
            }
        }
        if self.sigma1 == self.sigma2 {
            log::warn!("sigma1 == sigma2 = {}: the interface carries no material jump", self.sigma1);
        }
        Ok(())
    }

    /// `⟦σ⟧ = σ₁ − σ₂`, lower minus upper.
    pub fn sigma_jump(&self) -> f64 {
        self.sigma1 - self.sigma2
    }

    pub fn sigma(&self, layer: Layer) -> f64 {
        match layer {
            Layer::Lower => self.sigma1,
            Layer::Upper => self.sigma2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Lower,
    Upper,
}

impl Layer {
    pub fn as_str(self) -> &'static str {
        match self {
            Layer::Lower => "lower",
            Layer::Upper => "upper",
        }
    }
}

/// Numerical tolerances used when testing the exact admissibility conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub eps_sign: f64,
    pub eps_touch: f64,
}

impl Tolerances {
    /// `eps_sign = 1e-10·max(1, |⟦σ⟧|·‖u'‖∞)`, `eps_touch = 1e-9·H`.
    pub fn for_profile(profile: &Profile) -> Self {
        let p = profile.params();
        let du_max = profile.du().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        Tolerances {
            eps_sign: 1e-10 * (p.sigma_jump().abs() * du_max).max(1.0),
            eps_touch: eps_touch(p.ground_depth),
        }
    }
}

pub fn eps_touch(ground_depth: f64) -> f64 {
    1e-9 * ground_depth
}

fn eps_bc(ground_depth: f64) -> f64 {
    1e-12 * ground_depth.max(1.0)
}

/// Samples within this distance below `-H` are clamped onto the ground plate.
fn eps_geo(ground_depth: f64) -> f64 {
    1e-9 * ground_depth
}

/// A deflection sampled on `Nx + 1` uniformly spaced abscissae of `[-L, L]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    params: PhysicalParams,
    x: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
    d2u: Vec<f64>,
}

impl Profile {
    /// Builds a profile from samples on the canonical grid `x_i = -L + i·2L/Nx`,
    /// with finite-difference derivatives.
    pub fn from_samples(params: PhysicalParams, u: Vec<f64>) -> Result<Self> {
        if u.len() < 3 {
            return Err(Error::InvalidProfile(format!("need at least 3 samples, got {}", u.len())));
        }
        let x = uniform_grid(params.half_width, u.len() - 1);
        Self::from_grid(params, x, u)
    }

    /// Builds a profile from explicit `(x, u)` pairs, e.g. read from CSV. The grid
    /// must be uniform and span `[-L, L]`.
    pub fn from_grid(params: PhysicalParams, x: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        params.validate()?;
        if x.len() != u.len() {
            return Err(Error::InvalidProfile(format!("{} abscissae but {} values", x.len(), u.len())));
        }
        if x.len() < 3 {
            return Err(Error::InvalidProfile(format!("need at least 3 samples, got {}", x.len())));
        }
        check_uniform(&x, params.half_width)?;
        let dx = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
        let (du, d2u) = finite_differences(&u, dx);
        Self::assemble(params, x, u, du, d2u)
    }

    /// Samples an analytically defined profile together with its exact derivatives.
    pub fn from_analytic(
        params: PhysicalParams,
        nx: usize,
        u: impl Fn(f64) -> f64,
        du: impl Fn(f64) -> f64,
        d2u: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        params.validate()?;
        if nx < 2 {
            return Err(Error::InvalidProfile(format!("need at least 2 intervals, got {nx}")));
        }
        let x = uniform_grid(params.half_width, nx);
        let uu = x.iter().map(|&t| u(t)).collect();
        let dd = x.iter().map(|&t| du(t)).collect();
        let d2 = x.iter().map(|&t| d2u(t)).collect();
        Self::assemble(params, x, uu, dd, d2)
    }

    /// Samples `u` and differentiates it numerically.
    pub fn from_fn(params: PhysicalParams, nx: usize, u: impl Fn(f64) -> f64) -> Result<Self> {
        params.validate()?;
        let x = uniform_grid(params.half_width, nx.max(2));
        let u = x.iter().map(|&t| u(t)).collect();
        Self::from_grid(params, x, u)
    }

    fn assemble(params: PhysicalParams, x: Vec<f64>, mut u: Vec<f64>, du: Vec<f64>, d2u: Vec<f64>) -> Result<Self> {
        let h = params.ground_depth;
        let n = u.len() - 1;
        let tol_bc = eps_bc(h);
        for (end, idx) in [("-L", 0), ("+L", n)] {
            if !(u[idx].abs() <= tol_bc) {
                return Err(Error::InvalidProfile(format!("u({end}) = {:e} does not vanish", u[idx])));
            }
        }
        let tol_geo = eps_geo(h);
        for (i, v) in u.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidProfile(format!("u[{i}] is not finite")));
            }
            if *v < -h - tol_geo {
                return Err(Error::InvalidProfile(format!("u[{i}] = {v} penetrates the ground plate at -H = {}", -h)));
            }
            if *v < -h {
                *v = -h;
            }
        }
        if du.iter().chain(&d2u).any(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile("derivative samples are not finite".into()));
        }
        Ok(Profile { params, x, u, du, d2u })
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    /// Same samples with different physical constants (the grid is rebuilt from `L`).
    pub fn with_params(&self, params: PhysicalParams) -> Result<Self> {
        params.validate()?;
        let x = uniform_grid(params.half_width, self.nx());
        Self::assemble(params, x, self.u.clone(), self.du.clone(), self.d2u.clone())
    }

    pub fn nx(&self) -> usize {
        self.x.len() - 1
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.params.half_width / self.nx() as f64
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn du(&self) -> &[f64] {
        &self.du
    }

    pub fn d2u(&self) -> &[f64] {
        &self.d2u
    }

    /// Piecewise-linear interpolation of the samples.
    pub fn value_at(&self, x: f64) -> f64 {
        let (i, s) = self.locate(x);
        (1.0 - s) * self.u[i] + s * self.u[i + 1]
    }

    /// Piecewise-linear interpolation of the derivative samples.
    pub fn slope_at(&self, x: f64) -> f64 {
        let (i, s) = self.locate(x);
        (1.0 - s) * self.du[i] + s * self.du[i + 1]
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.nx();
        let t = ((x - self.x[0]) / self.dx()).clamp(0.0, n as f64);
        let i = (t.floor() as usize).min(n - 1);
        (i, t - i as f64)
    }

    /// `v = self + scale·direction`, sample by sample (derivatives included).
    pub fn perturbed(&self, direction: &Profile, scale: f64) -> Result<Self> {
        if direction.nx() != self.nx() {
            return Err(Error::InvalidProfile(format!(
                "perturbation has {} intervals, base has {}",
                direction.nx(),
                self.nx()
            )));
        }
        let comb = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p + scale * q).collect::<Vec<_>>();
        Self::assemble(
            self.params,
            self.x.clone(),
            comb(&self.u, &direction.u),
            comb(&self.du, &direction.du),
            comb(&self.d2u, &direction.d2u),
        )
    }

    /// FNV-1a digest of the parameters and samples.
    pub fn digest(&self) -> u64 {
        let p = &self.params;
        let scalars = [p.half_width, p.ground_depth, p.thickness, p.voltage, p.sigma1, p.sigma2];
        let mut hash = 0xcbf2_9ce4_8422_2325_u64;
        for v in scalars.iter().chain(&self.u) {
            for b in v.to_bits().to_le_bytes() {
                hash ^= u64::from(b);
                hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        hash
    }
}

pub(crate) fn uniform_grid(half_width: f64, nx: usize) -> Vec<f64> {
    let dx = 2.0 * half_width / nx as f64;
    (0..=nx).map(|i| if i == nx { half_width } else { -half_width + i as f64 * dx }).collect()
}

fn check_uniform(x: &[f64], half_width: f64) -> Result<()> {
    let n = x.len() - 1;
    let dx = 2.0 * half_width / n as f64;
    let tol = 1e-9 * dx;
    if (x[0] + half_width).abs() > tol || (x[n] - half_width).abs() > tol {
        return Err(Error::InvalidProfile(format!("grid must span [-{half_width}, {half_width}], got [{}, {}]", x[0], x[n])));
    }
    for (i, w) in x.windows(2).enumerate() {
        if !((w[1] - w[0] - dx).abs() <= tol) {
            return Err(Error::InvalidProfile(format!("grid is not uniform at interval {i}: spacing {} vs {dx}", w[1] - w[0])));
        }
    }
    Ok(())
}

/// Centered 3-point stencils inside, second-order one-sided stencils at the ends.
fn finite_differences(u: &[f64], dx: f64) -> (Vec<f64>, Vec<f64>) {
    let n = u.len() - 1;
    let mut du = vec![0.0; n + 1];
    let mut d2u = vec![0.0; n + 1];
    for i in 1..n {
        du[i] = (u[i + 1] - u[i - 1]) / (2.0 * dx);
        d2u[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dx * dx);
    }
    du[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx);
    du[n] = (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * dx);
    if n >= 3 {
        d2u[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / (dx * dx);
        d2u[n] = (2.0 * u[n] - 5.0 * u[n - 1] + 4.0 * u[n - 2] - u[n - 3]) / (dx * dx);
    } else {
        d2u[0] = d2u[1];
        d2u[n] = d2u[n - 1];
    }
    (du, d2u)
}

/// Built-in deflections, all with exact derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum BuiltinProfile {
    /// `u ≡ 0`.
    Flat,
    /// `u = H(x²/L² − 1)`, touching the ground plate at `x = 0`.
    ParabolaTouch,
    /// `u = a·cos(πx/2L)`.
    Cosine { amplitude: f64 },
    /// `u = −a·cos²(πx/2c)` on `|x| < c` and zero outside; `C¹` with a jump in `u''`.
    Bump { amplitude: f64, half_width: f64 },
}

impl BuiltinProfile {
    pub fn label(&self) -> String {
        match self {
            BuiltinProfile::Flat => "flat".into(),
            BuiltinProfile::ParabolaTouch => "parabola_touch".into(),
            BuiltinProfile::Cosine { amplitude } => format!("cosine({amplitude})"),
            BuiltinProfile::Bump { amplitude, half_width } => format!("bump({amplitude},{half_width})"),
        }
    }

    /// The five-member family used by the regularity studies.
    pub fn standard_family() -> Vec<BuiltinProfile> {
        vec![
            BuiltinProfile::Flat,
            BuiltinProfile::Cosine { amplitude: -0.5 },
            BuiltinProfile::Cosine { amplitude: -0.25 },
            BuiltinProfile::ParabolaTouch,
            BuiltinProfile::Bump { amplitude: 0.4, half_width: 0.5 },
        ]
    }

    pub fn sample(&self, params: PhysicalParams, nx: usize) -> Result<Profile> {
        let l = params.half_width;
        let h = params.ground_depth;
        match *self {
            BuiltinProfile::Flat => Profile::from_analytic(params, nx, |_| 0.0, |_| 0.0, |_| 0.0),
            BuiltinProfile::ParabolaTouch => Profile::from_analytic(
                params,
                nx,
                |x| h * (x * x / (l * l) - 1.0),
                |x| 2.0 * h * x / (l * l),
                |_| 2.0 * h / (l * l),
            ),
            BuiltinProfile::Cosine { amplitude: a } => {
                let k = std::f64::consts::PI / (2.0 * l);
                Profile::from_analytic(
                    params,
                    nx,
                    |x| a * (k * x).cos(),
                    |x| -a * k * (k * x).sin(),
                    |x| -a * k * k * (k * x).cos(),
                )
            }
            BuiltinProfile::Bump { amplitude: a, half_width: c } => {
                if !(c > 0.0 && c <= l) {
                    return Err(Error::InvalidProfile(format!("bump half-width {c} must lie in (0, L]")));
                }
                let k = std::f64::consts::PI / c;
                let inside = move |x: f64| x.abs() < c;
                Profile::from_analytic(
                    params,
                    nx,
                    |x| if inside(x) { -0.5 * a * (1.0 + (k * x).cos()) } else { 0.0 },
                    |x| if inside(x) { 0.5 * a * k * (k * x).sin() } else { 0.0 },
                    |x| if inside(x) { 0.5 * a * k * k * (k * x).cos() } else { 0.0 },
                )
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdmissibilityClass {
    /// `u > −H` everywhere and the endpoint sign condition holds.
    InteriorS,
    /// Non-empty coincidence set, sign condition holds.
    BarSOnly,
    Inadmissible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum Violation {
    /// `⟦σ⟧·u'(L) > eps_sign`.
    SignAtRight { value: f64 },
    /// `−⟦σ⟧·u'(−L) > eps_sign`.
    SignAtLeft { value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub class: AdmissibilityClass,
    pub reasons: Vec<Violation>,
    /// Maximal inclusive index runs `[start, end]` where `u[i] + H ≤ eps_touch`.
    pub coincidence: Vec<(usize, usize)>,
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        self.class != AdmissibilityClass::Inadmissible
    }
}

/// Endpoint slopes from one-sided 3-point differences of the samples.
pub fn endpoint_slopes(profile: &Profile) -> (f64, f64) {
    let u = profile.u();
    let n = profile.nx();
    let dx = profile.dx();
    let left = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dx);
    let right = (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * dx);
    (left, right)
}

pub fn classify(profile: &Profile, eps_sign: f64, eps_touch: f64) -> Result<Admissibility> {
    if profile.x().len() < 5 {
        return Err(Error::InvalidProfile(format!("classification needs at least 5 samples, got {}", profile.x().len())));
    }
    check_uniform(profile.x(), profile.params().half_width)?;

    let jump = profile.params().sigma_jump();
    let (left, right) = endpoint_slopes(profile);
    let mut reasons = Vec::new();
    let at_right = jump * right;
    if at_right > eps_sign {
        reasons.push(Violation::SignAtRight { value: at_right });
    }
    let at_left = -jump * left;
    if at_left > eps_sign {
        reasons.push(Violation::SignAtLeft { value: at_left });
    }

    let h = profile.params().ground_depth;
    let mut coincidence = Vec::new();
    let mut start = None;
    for (i, &v) in profile.u().iter().enumerate() {
        let touching = v + h <= eps_touch;
        match (touching, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                coincidence.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        coincidence.push((s, profile.nx()));
    }

    let class = if !reasons.is_empty() {
        AdmissibilityClass::Inadmissible
    } else if coincidence.is_empty() {
        AdmissibilityClass::InteriorS
    } else {
        AdmissibilityClass::BarSOnly
    };
    Ok(Admissibility { class, reasons, coincidence })
}

/// Classification with the default tolerances.
pub fn classify_default(profile: &Profile) -> Result<Admissibility> {
    let tol = Tolerances::for_profile(profile);
    classify(profile, tol.eps_sign, tol.eps_touch)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileNorms {
    pub l_inf: f64,
    pub h1: f64,
    pub h2: f64,
}

fn trapezoid(dx: f64, values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    values
        .enumerate()
        .map(|(i, v)| if i == 0 || i + 1 == n { 0.5 * v } else { v })
        .sum::<f64>()
        * dx
}

pub fn profile_norms(profile: &Profile) -> ProfileNorms {
    let dx = profile.dx();
    let l_inf = profile.u().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let h1_sq = trapezoid(dx, profile.u().iter().zip(profile.du()).map(|(u, d)| u * u + d * d));
    let h2_sq = trapezoid(
        dx,
        profile.u().iter().zip(profile.du()).zip(profile.d2u()).map(|((u, d), s)| u * u + d * d + s * s),
    );
    ProfileNorms { l_inf, h1: h1_sq.sqrt(), h2: h2_sq.sqrt() }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSummary {
    pub area_lower: f64,
    pub area_upper: f64,
    pub interface_length: f64,
    /// `M = d + ‖u‖∞`, the height of the common comparison box above `z = 0`.
    pub m: f64,
}

pub fn build_domain_summary(profile: &Profile) -> DomainSummary {
    let p = profile.params();
    let dx = profile.dx();
    let area_lower = trapezoid(dx, profile.u().iter().map(|u| u + p.ground_depth));
    let interface_length = trapezoid(dx, profile.du().iter().map(|d| (1.0 + d * d).sqrt()));
    DomainSummary {
        area_lower,
        area_upper: 2.0 * p.half_width * p.thickness,
        interface_length,
        m: p.thickness + profile_norms(profile).l_inf,
    }
}

/// `T₁(x, z) = (x, (z + H)/(u(x) + H))`, mapping the lower layer onto `D × (0, 1)`.
pub fn map_t1(profile: &Profile, x: f64, z: f64) -> Result<(f64, f64)> {
    let h = profile.params().ground_depth;
    let thickness = profile.value_at(x) + h;
    if thickness <= eps_touch(h) {
        return Err(Error::Collapse { x, thickness });
    }
    Ok((x, (z + h) / thickness))
}

pub fn map_t1_inverse(profile: &Profile, x: f64, eta: f64) -> (f64, f64) {
    let h = profile.params().ground_depth;
    (x, eta * (profile.value_at(x) + h) - h)
}

/// `T₂(x, z) = (x, z − u(x) + 1)`, mapping the plate onto `D × (1, 1 + d)`.
pub fn map_t2(profile: &Profile, x: f64, z: f64) -> (f64, f64) {
    (x, z - profile.value_at(x) + 1.0)
}

pub fn map_t2_inverse(profile: &Profile, x: f64, eta: f64) -> (f64, f64) {
    (x, eta + profile.value_at(x) - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(s1: f64, s2: f64) -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 1.0, 1.0, s1, s2).unwrap()
    }

    #[test]
    fn flat_profile_is_interior() {
        let p = BuiltinProfile::Flat.sample(params(1.0, 2.0), 32).unwrap();
        let adm = classify_default(&p).unwrap();
        assert_eq!(adm.class, AdmissibilityClass::InteriorS);
        assert!(adm.coincidence.is_empty());
    }

    #[test]
    fn parabola_touch_classification_depends_on_jump_sign() {
        let p = BuiltinProfile::ParabolaTouch.sample(params(1.0, 2.0), 32).unwrap();
        let adm = classify_default(&p).unwrap();
        assert_eq!(adm.class, AdmissibilityClass::BarSOnly);
        assert_eq!(adm.coincidence, vec![(16, 16)]);
        assert_eq!(p.x()[16], 0.0);

        let q = BuiltinProfile::ParabolaTouch.sample(params(2.0, 1.0), 32).unwrap();
        let adm = classify_default(&q).unwrap();
        assert_eq!(adm.class, AdmissibilityClass::Inadmissible);
        assert_eq!(adm.reasons.len(), 2);
    }

    #[test]
    fn equal_permittivities_make_any_slope_admissible() {
        let p = BuiltinProfile::ParabolaTouch.sample(params(1.5, 1.5), 16).unwrap();
        assert_eq!(classify_default(&p).unwrap().class, AdmissibilityClass::BarSOnly);
    }

    #[test]
    fn classify_rejects_short_profiles() {
        let p = Profile::from_samples(params(1.0, 2.0), vec![0.0, -0.1, -0.1, 0.0]).unwrap();
        assert!(classify_default(&p).is_err());
    }

    #[test]
    fn grid_must_be_uniform() {
        let x = vec![-1.0, -0.4, 0.0, 0.5, 1.0];
        let u = vec![0.0; 5];
        assert!(Profile::from_grid(params(1.0, 2.0), x, u).is_err());
    }

    #[test]
    fn profile_must_vanish_at_ends_and_respect_ground() {
        assert!(Profile::from_samples(params(1.0, 2.0), vec![0.1, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(Profile::from_samples(params(1.0, 2.0), vec![0.0, -1.5, 0.0, 0.0, 0.0]).is_err());
        let clamped = Profile::from_samples(params(1.0, 2.0), vec![0.0, -1.0 - 1e-11, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(clamped.u()[1], -1.0);
    }

    #[test]
    fn norms_of_zero_and_cosine() {
        let p = BuiltinProfile::Flat.sample(params(1.0, 2.0), 16).unwrap();
        let n = profile_norms(&p);
        assert_eq!((n.l_inf, n.h1, n.h2), (0.0, 0.0, 0.0));

        let c = BuiltinProfile::Cosine { amplitude: -0.5 }.sample(params(1.0, 2.0), 64).unwrap();
        assert_relative_eq!(profile_norms(&c).l_inf, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn parabola_h2_norm_matches_symbolic_integral() {
        // ∫₋₁¹ (x²−1)² + 4x² + 4 dx = 16/15 + 8/3 + 8
        let exact = 16.0 / 15.0 + 8.0 / 3.0 + 8.0;
        let p = BuiltinProfile::ParabolaTouch.sample(params(1.0, 2.0), 1024).unwrap();
        assert_relative_eq!(profile_norms(&p).h2.powi(2), exact, max_relative = 1e-6);
    }

    #[test]
    fn domain_summary_examples() {
        let flat = BuiltinProfile::Flat.sample(params(1.0, 2.0), 8).unwrap();
        let s = build_domain_summary(&flat);
        assert_eq!((s.area_lower, s.area_upper, s.interface_length, s.m), (2.0, 2.0, 2.0, 1.0));

        let par = BuiltinProfile::ParabolaTouch.sample(params(1.0, 2.0), 512).unwrap();
        assert_relative_eq!(build_domain_summary(&par).area_lower, 2.0 / 3.0, max_relative = 1e-5);

        let cos = BuiltinProfile::Cosine { amplitude: -0.5 }.sample(params(1.0, 2.0), 64).unwrap();
        assert_relative_eq!(build_domain_summary(&cos).m, 1.5, epsilon = 1e-15);
    }

    #[test]
    fn total_area_matches_direct_integral() {
        let p = BuiltinProfile::Cosine { amplitude: -0.25 }.sample(params(1.0, 2.0), 100).unwrap();
        let s = build_domain_summary(&p);
        let direct = trapezoid(p.dx(), p.u().iter().map(|u| u + 1.0 + 1.0));
        assert_relative_eq!(s.area_lower + s.area_upper, direct, max_relative = 1e-12);
    }

    #[test]
    fn maps_send_layer_boundaries_to_rectangle_edges() {
        let p = BuiltinProfile::Cosine { amplitude: -0.5 }.sample(params(1.0, 2.0), 40).unwrap();
        for &x in &[-0.9, -0.3, 0.0, 0.55] {
            let u = p.value_at(x);
            assert_eq!(map_t1(&p, x, -1.0).unwrap(), (x, 0.0));
            assert_relative_eq!(map_t1(&p, x, u).unwrap().1, 1.0, epsilon = 1e-15);
            assert_relative_eq!(map_t2(&p, x, u).1, 1.0, epsilon = 1e-15);
            assert_relative_eq!(map_t2(&p, x, u + 1.0).1, 2.0, epsilon = 1e-15);
        }
        let flat = BuiltinProfile::Flat.sample(params(1.0, 2.0), 10).unwrap();
        assert_eq!(map_t1(&flat, 0.3, -0.5).unwrap(), (0.3, 0.5));
    }

    #[test]
    fn t1_is_singular_on_the_coincidence_set() {
        let p = BuiltinProfile::ParabolaTouch.sample(params(1.0, 2.0), 32).unwrap();
        assert!(matches!(map_t1(&p, 0.0, -1.0), Err(Error::Collapse { .. })));
    }

    #[test]
    fn finite_difference_profile_matches_analytic() {
        let a = BuiltinProfile::Cosine { amplitude: -0.5 }.sample(params(1.0, 2.0), 200).unwrap();
        let b = Profile::from_samples(*a.params(), a.u().to_vec()).unwrap();
        for i in 0..=200 {
            assert!((a.du()[i] - b.du()[i]).abs() < 1e-4);
            assert!((a.d2u()[i] - b.d2u()[i]).abs() < 1e-3);
        }
    }
}
