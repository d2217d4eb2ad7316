//! Second derivatives on the transformed rectangles, the H² surrogate and the
//! integration-by-parts identity for `∫σ ∂²_xχ ∂²_zχ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Layer, Profile};
use crate::mesh::{transform_field_to_rectangles, LayeredMesh};
use crate::solver::Field;

/// Physical derivatives of one layer, recovered from second-order differences of
/// the rectangle grid `Φ` and pulled back through `T₁` or `T₂`.
///
/// Arrays are indexed `i·(rows+1) + j` with `j` counting rows of the layer from
/// its bottom. Entries of excluded columns are NaN and carry zero weight.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondDerivatives {
    pub layer: Layer,
    pub nx: usize,
    pub rows: usize,
    pub dx: f64,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub xx: Vec<f64>,
    pub xz: Vec<f64>,
    pub zz: Vec<f64>,
    /// Trapezoid weight of each node times the Jacobian of the map.
    pub weight: Vec<f64>,
    /// Trapezoid weight along `x` per column, zero on excluded columns.
    pub column_weight: Vec<f64>,
    pub excluded: Vec<bool>,
}

impl SecondDerivatives {
    pub fn at(&self, i: usize, j: usize) -> usize {
        i * (self.rows + 1) + j
    }

    pub fn excluded_fraction(&self) -> f64 {
        self.excluded.iter().filter(|&&e| e).count() as f64 / self.excluded.len() as f64
    }
}

/// Difference numerators below this fraction of the largest grid value are round-off
/// and are set to zero.
pub const DIFFERENCE_FLOOR: f64 = 1e-12;

fn floored(num: f64, floor: f64) -> f64 {
    if num.abs() <= floor {
        0.0
    } else {
        num
    }
}

fn d1(v: &[f64], k: usize, h: f64, floor: f64) -> f64 {
    let n = v.len();
    let num = if k == 0 {
        -3.0 * v[0] + 4.0 * v[1] - v[2]
    } else if k + 1 == n {
        3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]
    } else {
        v[k + 1] - v[k - 1]
    };
    floored(num, floor) / (2.0 * h)
}

fn d2(v: &[f64], k: usize, h: f64, floor: f64) -> f64 {
    let n = v.len();
    let num = if k == 0 {
        2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]
    } else if k + 1 == n {
        2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]
    } else {
        v[k + 1] - 2.0 * v[k] + v[k - 1]
    };
    floored(num, floor) / (h * h)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().filter(|x| x.is_finite()).fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn trapezoid_weight(k: usize, n: usize, h: f64) -> f64 {
    if k == 0 || k + 1 == n {
        0.5 * h
    } else {
        h
    }
}

/// Maximal runs of unmasked columns with at least four members.
fn column_runs(masked: &[bool]) -> Vec<std::ops::Range<usize>> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &m) in masked.iter().chain(std::iter::once(&true)).enumerate() {
        match (m, start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                if i - s >= 4 {
                    runs.push(s..i);
                }
                start = None;
            }
            _ => {}
        }
    }
    runs
}

/// Derivatives of `values` in one layer. Needs at least three cells per layer.
pub fn layer_second_derivatives(values: &[f64], mesh: &LayeredMesh, profile: &Profile, layer: Layer) -> Result<SecondDerivatives> {
    if profile.nx() != mesh.nx() {
        return Err(Error::Diagnostic(format!("profile has {} intervals, mesh has {}", profile.nx(), mesh.nx())));
    }
    let grids = transform_field_to_rectangles(values, mesh);
    let params = mesh.params();
    let (rows, deta, phi, masked) = match layer {
        Layer::Lower => (grids.n1, grids.d_eta_lower, &grids.lower, grids.masked.clone()),
        Layer::Upper => (grids.n2, grids.d_eta_upper, &grids.upper, vec![false; grids.nx + 1]),
    };
    if rows < 3 {
        return Err(Error::Diagnostic(format!("{} layer needs at least 3 cells, got {rows}", layer.as_str())));
    }
    let nx = grids.nx;
    let dx = grids.dx;
    let len = (nx + 1) * (rows + 1);
    let idx = |i: usize, j: usize| i * (rows + 1) + j;

    let floor = DIFFERENCE_FLOOR * max_abs(phi);
    // η-derivatives column by column
    let mut p_eta = vec![f64::NAN; len];
    let mut p_etaeta = vec![f64::NAN; len];
    for i in 0..=nx {
        if masked[i] {
            continue;
        }
        let col = &phi[idx(i, 0)..=idx(i, rows)];
        for j in 0..=rows {
            p_eta[idx(i, j)] = d1(col, j, deta, floor);
            p_etaeta[idx(i, j)] = d2(col, j, deta, floor);
        }
    }

    let floor_eta = DIFFERENCE_FLOOR * max_abs(&p_eta);
    let runs = column_runs(&masked);
    let mut excluded = vec![true; nx + 1];
    let mut column_weight = vec![0.0; nx + 1];
    let mut p_x = vec![f64::NAN; len];
    let mut p_xx = vec![f64::NAN; len];
    let mut p_xeta = vec![f64::NAN; len];
    for run in &runs {
        let n = run.len();
        for (k, i) in run.clone().enumerate() {
            excluded[i] = false;
            column_weight[i] = trapezoid_weight(k, n, dx);
        }
        for j in 0..=rows {
            let line: Vec<f64> = run.clone().map(|i| phi[idx(i, j)]).collect();
            let line_eta: Vec<f64> = run.clone().map(|i| p_eta[idx(i, j)]).collect();
            for (k, i) in run.clone().enumerate() {
                p_x[idx(i, j)] = d1(&line, k, dx, floor);
                p_xx[idx(i, j)] = d2(&line, k, dx, floor);
                p_xeta[idx(i, j)] = d1(&line_eta, k, dx, floor_eta);
            }
        }
    }

    let mut out = SecondDerivatives {
        layer,
        nx,
        rows,
        dx,
        x: vec![f64::NAN; len],
        z: vec![f64::NAN; len],
        xx: vec![f64::NAN; len],
        xz: vec![f64::NAN; len],
        zz: vec![f64::NAN; len],
        weight: vec![0.0; len],
        column_weight: column_weight.clone(),
        excluded: excluded.clone(),
    };
    for i in (0..=nx).filter(|&i| !excluded[i]) {
        let (u, du, d2u) = (mesh.interface_height(i), profile.du()[i], profile.d2u()[i]);
        for j in 0..=rows {
            let k = idx(i, j);
            let (fx, fe, fxx, fxe, fee) = (p_x[k], p_eta[k], p_xx[k], p_xeta[k], p_etaeta[k]);
            let wq = column_weight[i] * trapezoid_weight(j, rows + 1, deta);
            match layer {
                Layer::Lower => {
                    let g = u + params.ground_depth;
                    let a = du / g;
                    let eta = j as f64 / rows as f64;
                    out.x[k] = fx - eta * a * fe;
                    out.z[k] = fe / g;
                    out.xx[k] = fxx - 2.0 * eta * a * fxe + eta * (2.0 * a * a - d2u / g) * fe + eta * eta * a * a * fee;
                    out.xz[k] = (fxe - a * fe - eta * a * fee) / g;
                    out.zz[k] = fee / (g * g);
                    out.weight[k] = wq * g;
                }
                Layer::Upper => {
                    out.x[k] = fx - du * fe;
                    out.z[k] = fe;
                    out.xx[k] = fxx - 2.0 * du * fxe - d2u * fe + du * du * fee;
                    out.xz[k] = fxe - du * fee;
                    out.zz[k] = fee;
                    out.weight[k] = wq;
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct H2Surrogate {
    pub layer: Layer,
    /// `(∫ |D²ψ|²)^{1/2}` over the retained columns.
    pub estimate: f64,
    /// Fraction of grid columns left out (collapsed, or in runs too short to difference).
    pub excluded_fraction: f64,
    /// Every column was excluded; `estimate` is then 0.
    pub empty: bool,
}

/// Second-difference estimate of the H² seminorm of `field` on one layer.
pub fn h2_surrogate(field: &Field, mesh: &LayeredMesh, profile: &Profile, layer: Layer) -> Result<H2Surrogate> {
    let sd = layer_second_derivatives(&field.values, mesh, profile, layer)?;
    let empty = sd.excluded.iter().all(|&e| e);
    let mut sum = 0.0;
    for k in 0..sd.weight.len() {
        if sd.weight[k] > 0.0 {
            sum += sd.weight[k] * (sd.xx[k] * sd.xx[k] + 2.0 * sd.xz[k] * sd.xz[k] + sd.zz[k] * sd.zz[k]);
        }
    }
    Ok(H2Surrogate { layer, estimate: sum.sqrt(), excluded_fraction: sd.excluded_fraction(), empty })
}

/// The four terms of the identity
/// `Σ∫σχ_xxχ_zz = Σ∫σχ_xz² − (σ₂/2)∫u''(∂_zχ₂(x,u+d))² − ½∫u''/(1+u'²)·⟦σ|∇χ|²⟧(x,u)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs_mixed: f64,
    pub rhs_top: f64,
    pub rhs_interface: f64,
    pub residual: f64,
    pub scale: f64,
}

impl IdentityReport {
    /// `|residual| / scale`, or 0 when every term vanishes.
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual.abs() / self.scale
        } else {
            0.0
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.lhs, self.rhs_mixed, self.rhs_top, self.rhs_interface, self.residual, self.scale]
            .iter()
            .all(|v| v.is_finite())
    }
}

pub fn identity_check(chi: &Field, mesh: &LayeredMesh, profile: &Profile) -> Result<IdentityReport> {
    if let Some(i) = mesh.collapsed().iter().position(|&c| c) {
        return Err(Error::Diagnostic(format!("identity check needs a non-collapsed lower layer, column {i} collapses")));
    }
    let p = mesh.params();
    let lower = layer_second_derivatives(&chi.values, mesh, profile, Layer::Lower)?;
    let upper = layer_second_derivatives(&chi.values, mesh, profile, Layer::Upper)?;

    let mut lhs = 0.0;
    let mut rhs_mixed = 0.0;
    for (sd, sigma) in [(&lower, p.sigma1), (&upper, p.sigma2)] {
        for k in 0..sd.weight.len() {
            lhs += sigma * sd.weight[k] * sd.xx[k] * sd.zz[k];
            rhs_mixed += sigma * sd.weight[k] * sd.xz[k] * sd.xz[k];
        }
    }

    let mut rhs_top = 0.0;
    let mut rhs_interface = 0.0;
    for i in 0..=mesh.nx() {
        let (du, d2u) = (profile.du()[i], profile.d2u()[i]);
        let w = upper.column_weight[i];
        let top = upper.z[upper.at(i, upper.rows)];
        rhs_top -= 0.5 * p.sigma2 * w * d2u * top * top;
        let (k1, k2) = (lower.at(i, lower.rows), upper.at(i, 0));
        let g1 = lower.x[k1] * lower.x[k1] + lower.z[k1] * lower.z[k1];
        let g2 = upper.x[k2] * upper.x[k2] + upper.z[k2] * upper.z[k2];
        rhs_interface -= 0.5 * w * d2u / (1.0 + du * du) * (p.sigma1 * g1 - p.sigma2 * g2);
    }

    let residual = lhs - (rhs_mixed + rhs_top + rhs_interface);
    let scale = lhs.abs() + rhs_mixed.abs() + rhs_top.abs() + rhs_interface.abs();
    Ok(IdentityReport { lhs, rhs_mixed, rhs_top, rhs_interface, residual, scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_domain_summary, BuiltinProfile, PhysicalParams};
    use crate::mesh::MeshSpec;
    use crate::solver::FieldKind;

    #[test]
    fn runs_skip_short_gaps() {
        let m = [false, false, false, false, true, false, false, true, false, false, false, false, false];
        assert_eq!(column_runs(&m), vec![0..4, 8..13]);
        assert!(column_runs(&[true; 5]).is_empty());
    }

    #[test]
    fn quadratic_in_x_reproduces_area() {
        let params = PhysicalParams::case_flat();
        let profile = BuiltinProfile::Cosine { amplitude: -0.5 }.sample(params, 64).unwrap();
        let mesh = LayeredMesh::build(&profile, MeshSpec::new(16, 16)).unwrap();
        let field = Field::interpolate(FieldKind::Psi, &mesh, |x, _| x * x);
        let summary = build_domain_summary(&profile);
        for (layer, area) in [(Layer::Lower, summary.area_lower), (Layer::Upper, summary.area_upper)] {
            let s = h2_surrogate(&field, &mesh, &profile, layer).unwrap();
            let rel = (s.estimate * s.estimate - 4.0 * area).abs() / (4.0 * area);
            assert!(rel < 0.02, "{layer:?}: {} vs {}", s.estimate * s.estimate, 4.0 * area);
            assert_eq!(s.excluded_fraction, 0.0);
        }
    }

    #[test]
    fn linear_field_has_no_curvature() {
        let params = PhysicalParams::case_flat();
        let linear = |x: f64, z: f64| 0.3 * x - 1.7 * z + 2.0;
        let flat = BuiltinProfile::Flat.sample(params, 32).unwrap();
        let mesh = LayeredMesh::build(&flat, MeshSpec::new(8, 8)).unwrap();
        let field = Field::interpolate(FieldKind::Psi, &mesh, linear);
        for layer in [Layer::Lower, Layer::Upper] {
            assert!(h2_surrogate(&field, &mesh, &flat, layer).unwrap().estimate < 1e-9);
        }
        // on a curved profile only the truncation error of the pulled-back differences remains
        let mut last = f64::INFINITY;
        for nx in [16, 32, 64] {
            let profile = BuiltinProfile::Cosine { amplitude: -0.25 }.sample(params, nx).unwrap();
            let mesh = LayeredMesh::build(&profile, MeshSpec::new(nx / 4, nx / 4)).unwrap();
            let field = Field::interpolate(FieldKind::Psi, &mesh, linear);
            let s = h2_surrogate(&field, &mesh, &profile, Layer::Lower).unwrap().estimate;
            assert!(s < 0.5 * last);
            last = s;
        }
    }

    #[test]
    fn touching_profile_masks_the_contact_column() {
        let params = PhysicalParams::case_flat();
        let profile = BuiltinProfile::ParabolaTouch.sample(params, 16).unwrap();
        let mesh = LayeredMesh::build(&profile, MeshSpec::new(4, 4)).unwrap();
        let field = Field::interpolate(FieldKind::Psi, &mesh, |x, _| x * x);
        let s = h2_surrogate(&field, &mesh, &profile, Layer::Lower).unwrap();
        assert!(s.estimate.is_finite() && !s.empty);
        assert_eq!(s.excluded_fraction, 1.0 / 17.0);
        assert!(identity_check(&field, &mesh, &profile).is_err());
    }

    #[test]
    fn separable_field_balances_on_a_flat_strip() {
        // χ = sin(πx)·z(1−z)... vanishes on top and sides of the strip, u'' = 0
        let params = PhysicalParams::case_flat();
        let profile = BuiltinProfile::Flat.sample(params, 64).unwrap();
        let mesh = LayeredMesh::build(&profile, MeshSpec::new(32, 32)).unwrap();
        let pi = std::f64::consts::PI;
        let field = Field::interpolate(FieldKind::Chi, &mesh, |x, z| (pi * x).sin() * (z + 1.0) * (1.0 - z));
        let r = identity_check(&field, &mesh, &profile).unwrap();
        assert!(r.relative() < 1e-2, "{r:?}");
        assert_eq!((r.rhs_top, r.rhs_interface), (0.0, 0.0));
    }
}
