//! Study drivers: profile perturbation, regularity across a profile family and
//! mesh refinement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::closed_form::flat_errors;
use super::resample::ComparisonGrid;
use super::second::{h2_surrogate, identity_check, H2Surrogate};
use super::trace::{trace_gap, trace_gradient, TraceLocation};
use crate::error::{Error, Result};
use crate::geometry::{build_domain_summary, classify_default, profile_norms, BuiltinProfile, Layer, PhysicalParams, Profile};
use crate::mesh::{LateralBoundary, MeshSpec};
use crate::solver::{solve, Solution, SolverSettings};

/// Surrogates this small are treated as zero when forming ratios.
pub const SURROGATE_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub n: usize,
    pub perturbation: f64,
    /// `‖χ_n − χ‖_{H¹(Ω_M)}` with both fields extended by zero.
    pub e_h1: f64,
    pub energy: f64,
    pub energy_gap: f64,
    /// `L₂` and `L₄` gaps of `∇ψ₂` on the top of the plate.
    pub trace_gap_p2: f64,
    pub trace_gap_p4: f64,
    /// The same on the plate side of the interface.
    pub interface_gap_p2: f64,
    pub interface_gap_p4: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyTable {
    pub base_energy: f64,
    pub nx: usize,
    pub n1: usize,
    pub n2: usize,
    /// Sorted by `n`.
    pub records: Vec<StabilityRecord>,
}

impl StudyTable {
    pub fn column(&self, f: impl Fn(&StabilityRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }
}

/// Solves `v_n = base + w/n` for each `n` of the schedule and compares with the base
/// solution on a common box.
pub fn stability_study(
    base: &Profile,
    direction: &Profile,
    schedule: &[usize],
    spec: MeshSpec,
    settings: &SolverSettings,
) -> Result<StudyTable> {
    let mut schedule = schedule.to_vec();
    schedule.sort_unstable();
    schedule.dedup();
    if schedule.first() == Some(&0) {
        return Err(Error::InvalidParams("perturbation schedule entries must be positive".into()));
    }
    let mut members = Vec::with_capacity(schedule.len());
    for &n in &schedule {
        let v = base.perturbed(direction, 1.0 / n as f64)?;
        let adm = classify_default(&v)?;
        if !adm.is_admissible() {
            return Err(Error::Inadmissible(format!("family member n = {n}: {:?}", adm.reasons)));
        }
        members.push(v);
    }

    let base_solution = solve(base, spec, settings)?;
    let solutions: Vec<Solution> = members.par_iter().map(|v| solve(v, spec, settings)).collect::<Result<_>>()?;

    let p = base.params();
    let m = members.iter().chain(std::iter::once(base)).map(|v| build_domain_summary(v).m).fold(0.0_f64, f64::max);
    let grid = ComparisonGrid {
        half_width: p.half_width,
        bottom: -p.ground_depth,
        top: m,
        nx: 2 * base.nx(),
        nz: 2 * (spec.n1 + spec.n2),
    };
    let base_chi = grid.sample(&base_solution.mesh, &base_solution.chi.values);
    let base_top = trace_gradient(&base_solution.psi, &base_solution.mesh, TraceLocation::Top)?;
    let base_iface = trace_gradient(&base_solution.psi, &base_solution.mesh, TraceLocation::InterfaceUpper)?;
    let base_energy = base_solution.report.energy_psi;

    let records = schedule
        .par_iter()
        .zip(&solutions)
        .map(|(&n, sol)| {
            let chi = grid.sample(&sol.mesh, &sol.chi.values);
            let top = trace_gradient(&sol.psi, &sol.mesh, TraceLocation::Top)?;
            let iface = trace_gradient(&sol.psi, &sol.mesh, TraceLocation::InterfaceUpper)?;
            Ok(StabilityRecord {
                n,
                perturbation: 1.0 / n as f64,
                e_h1: grid.h1_distance(&chi, &base_chi),
                energy: sol.report.energy_psi,
                energy_gap: (sol.report.energy_psi - base_energy).abs(),
                trace_gap_p2: trace_gap(&top, &base_top, 2.0),
                trace_gap_p4: trace_gap(&top, &base_top, 4.0),
                interface_gap_p2: trace_gap(&iface, &base_iface, 2.0),
                interface_gap_p4: trace_gap(&iface, &base_iface, 4.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StudyTable { base_energy, nx: base.nx(), n1: spec.n1, n2: spec.n2, records })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaRecord {
    pub profile: String,
    /// Cells per direction: `Nx = N1 = N2 = level`.
    pub level: usize,
    pub lower: H2Surrogate,
    pub upper: H2Surrogate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaSummary {
    pub profile: String,
    pub h2_norm: f64,
    /// Why the profile was left out of the study, if it was.
    pub excluded: Option<String>,
    pub ratio_lower: f64,
    pub ratio_upper: f64,
    /// Largest excluded-column fraction of the lower layer over all levels.
    pub masked_fraction: f64,
    pub blow_up: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaStudy {
    pub kappa: f64,
    pub max_ratio: f64,
    pub levels: Vec<usize>,
    pub records: Vec<KappaRecord>,
    pub summaries: Vec<KappaSummary>,
    pub family_max_lower: f64,
    pub family_max_upper: f64,
}

/// Finest over coarsest surrogate; two values below [`SURROGATE_FLOOR`] count as ratio 1.
pub fn surrogate_ratio(finest: f64, coarsest: f64) -> f64 {
    if finest < SURROGATE_FLOOR && coarsest < SURROGATE_FLOOR {
        1.0
    } else {
        finest / coarsest
    }
}

/// H² surrogates of `ψ` for every profile with `‖u‖_{H²} ≤ κ` at every level.
/// A profile blows up if a surrogate is not finite or its finest/coarsest ratio
/// exceeds `max_ratio` in either layer.
pub fn kappa_family_study(
    family: &[BuiltinProfile],
    params: PhysicalParams,
    kappa: f64,
    levels: &[usize],
    lateral: LateralBoundary,
    max_ratio: f64,
    settings: &SolverSettings,
) -> Result<KappaStudy> {
    let mut levels = levels.to_vec();
    levels.sort_unstable();
    levels.dedup();
    if levels.is_empty() {
        return Err(Error::InvalidParams("kappa study needs at least one mesh level".into()));
    }
    let finest = *levels.last().unwrap();

    let mut summaries = Vec::new();
    let mut jobs = Vec::new();
    for b in family {
        let label = b.label();
        let norm = profile_norms(&b.sample(params, finest)?).h2;
        let mut excluded = None;
        if norm > kappa {
            excluded = Some(format!("H2 norm {norm:.6} exceeds kappa {kappa}"));
        } else {
            let adm = classify_default(&b.sample(params, finest)?)?;
            if !adm.is_admissible() {
                excluded = Some(format!("inadmissible: {:?}", adm.reasons));
            }
        }
        if excluded.is_none() {
            for &level in &levels {
                jobs.push((summaries.len(), *b, level));
            }
        }
        summaries.push(KappaSummary {
            profile: label,
            h2_norm: norm,
            excluded,
            ratio_lower: f64::NAN,
            ratio_upper: f64::NAN,
            masked_fraction: 0.0,
            blow_up: false,
        });
    }

    let records: Vec<(usize, KappaRecord)> = jobs
        .par_iter()
        .map(|&(s, b, level)| {
            let profile = b.sample(params, level)?;
            let sol = solve(&profile, MeshSpec::new(level, level).with_lateral(lateral), settings)?;
            let lower = h2_surrogate(&sol.psi, &sol.mesh, &profile, Layer::Lower)?;
            let upper = h2_surrogate(&sol.psi, &sol.mesh, &profile, Layer::Upper)?;
            Ok((s, KappaRecord { profile: b.label(), level, lower, upper }))
        })
        .collect::<Result<_>>()?;

    for (s, summary) in summaries.iter_mut().enumerate() {
        let mine: Vec<&KappaRecord> = records.iter().filter(|(k, _)| *k == s).map(|(_, r)| r).collect();
        let (Some(first), Some(last)) = (mine.first(), mine.last()) else { continue };
        summary.ratio_lower = surrogate_ratio(last.lower.estimate, first.lower.estimate);
        summary.ratio_upper = surrogate_ratio(last.upper.estimate, first.upper.estimate);
        summary.masked_fraction = mine.iter().map(|r| r.lower.excluded_fraction).fold(0.0, f64::max);
        let finite = mine.iter().all(|r| r.lower.estimate.is_finite() && r.upper.estimate.is_finite());
        summary.blow_up = !finite || !(summary.ratio_lower <= max_ratio) || !(summary.ratio_upper <= max_ratio);
    }

    let records: Vec<KappaRecord> = records.into_iter().map(|(_, r)| r).collect();
    let family_max_lower = records.iter().map(|r| r.lower.estimate).fold(0.0, f64::max);
    let family_max_upper = records.iter().map(|r| r.upper.estimate).fold(0.0, f64::max);
    Ok(KappaStudy { kappa, max_ratio, levels, records, summaries, family_max_lower, family_max_upper })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineRecord {
    pub nx: usize,
    pub h: f64,
    pub l2_error: f64,
    pub linf_error: f64,
    pub energy: f64,
    pub flux_jump_l2: f64,
    /// `|residual|/scale` of the identity check; absent when a column collapses.
    pub identity_relative: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineStudy {
    pub profile: String,
    /// Errors against the closed form (`true`) or against the finest level.
    pub closed_form: bool,
    pub records: Vec<RefineRecord>,
    pub order_l2: f64,
    pub order_linf: f64,
    pub order_flux: f64,
}

/// Solves on `Nx = N1 = N2 = level` for each level. The flat profile with insulated
/// sides is measured against its closed form; anything else against the finest
/// level, resampled on a grid twice as fine, which is then left out of the fits.
/// That comparison uses `χ`, which vanishes on the outer boundary, so its zero
/// extension stays continuous where the piecewise-linear boundaries of two levels
/// disagree. `ψ = V` on the top plate would jump there.
pub fn refine_study(
    builtin: BuiltinProfile,
    params: PhysicalParams,
    levels: &[usize],
    lateral: LateralBoundary,
    settings: &SolverSettings,
) -> Result<RefineStudy> {
    let mut levels = levels.to_vec();
    levels.sort_unstable();
    levels.dedup();
    if levels.len() < 2 {
        return Err(Error::InvalidParams("refinement study needs at least two levels".into()));
    }
    let closed_form = builtin == BuiltinProfile::Flat && lateral == LateralBoundary::Insulated;
    let solutions: Vec<Solution> = levels
        .par_iter()
        .map(|&n| solve(&builtin.sample(params, n)?, MeshSpec::new(n, n).with_lateral(lateral), settings))
        .collect::<Result<_>>()?;

    let finest = solutions.last().unwrap();
    let grid = ComparisonGrid {
        half_width: params.half_width,
        bottom: -params.ground_depth,
        top: build_domain_summary(&finest.profile).m,
        nx: 2 * finest.mesh.nx(),
        nz: 2 * (finest.mesh.n1() + finest.mesh.n2()),
    };
    let reference = if closed_form { Vec::new() } else { grid.sample(&finest.mesh, &finest.chi.values) };

    let records = solutions
        .iter()
        .map(|sol| {
            let (l2_error, linf_error) = if closed_form {
                let e = flat_errors(sol)?;
                (e.l2, e.linf_nodal)
            } else {
                let v = grid.sample(&sol.mesh, &sol.chi.values);
                let linf = v.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                (grid.l2_distance(&v, &reference), linf)
            };
            let identity_relative = if sol.mesh.collapsed().iter().any(|&c| c) {
                None
            } else {
                Some(identity_check(&sol.chi, &sol.mesh, &sol.profile)?.relative())
            };
            Ok(RefineRecord {
                nx: sol.mesh.nx(),
                h: 2.0 * params.half_width / sol.mesh.nx() as f64,
                l2_error,
                linf_error,
                energy: sol.report.energy_psi,
                flux_jump_l2: sol.report.flux_jump_l2,
                identity_relative,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let fitted = if closed_form { &records[..] } else { &records[..records.len() - 1] };
    let hs: Vec<f64> = fitted.iter().map(|r| r.h).collect();
    let all_h: Vec<f64> = records.iter().map(|r| r.h).collect();
    let order_l2 = fitted_order(&hs, &fitted.iter().map(|r| r.l2_error).collect::<Vec<_>>());
    let order_linf = fitted_order(&hs, &fitted.iter().map(|r| r.linf_error).collect::<Vec<_>>());
    let order_flux = fitted_order(&all_h, &records.iter().map(|r| r.flux_jump_l2).collect::<Vec<_>>());
    Ok(RefineStudy { profile: builtin.label(), closed_form, records, order_l2, order_linf, order_flux })
}

/// Least-squares slope of `log err` against `log h`. NaN with fewer than two
/// positive errors.
pub fn fitted_order(h: &[f64], err: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = h.iter().zip(err).filter(|(_, &e)| e > 0.0).map(|(&h, &e)| (h.ln(), e.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fitted_order_of_exact_power_law() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|h| 3.0 * h * h).collect();
        assert_relative_eq!(fitted_order(&h, &e), 2.0, epsilon = 1e-12);
        assert!(fitted_order(&h, &[0.0, 0.0, 1.0]).is_nan());
    }

    #[test]
    fn ratio_floor() {
        assert_eq!(surrogate_ratio(1e-12, 1e-13), 1.0);
        assert_eq!(surrogate_ratio(2.0, 4.0), 0.5);
    }
}
