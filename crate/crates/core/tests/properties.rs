use proptest::prelude::*;

use twolayer::diagnostics::{h2_surrogate, kappa_family_study, poincare_check, stability_study};
use twolayer::geometry::{classify_default, AdmissibilityClass, BuiltinProfile, Layer, PhysicalParams};
use twolayer::solver::{dirichlet_energy, solve_from};
use twolayer::{solve, Field, FieldKind, LateralBoundary, LayeredMesh, MeshSpec, SolverSettings};

fn settings() -> SolverSettings {
    SolverSettings { cg_tol: 1e-12, max_iter: 100_000 }
}

fn cosine_solution(amplitude: f64, n: usize) -> twolayer::Solution {
    let profile = BuiltinProfile::Cosine { amplitude }.sample(PhysicalParams::case_flat(), n).unwrap();
    solve(&profile, MeshSpec::new(n, n), &settings()).unwrap()
}

/// Pseudo-random admissible variation: zero on Dirichlet nodes.
fn variation(mesh: &LayeredMesh, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..mesh.node_count())
        .map(|n| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let r = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            if mesh.is_dirichlet(n) || !mesh.node_active(n) { 0.0 } else { r }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    // J(ψ + θ) − J(ψ) = J(θ) when ψ is the discrete minimizer: the cross term vanishes.
    // On flat strips the nodal lift energy and the assembled load agree exactly.
    #[test]
    fn energy_expansion_has_no_linear_term(
        seed in any::<u64>(),
        sigma1 in 0.2f64..5.0,
        sigma2 in 0.2f64..5.0,
        depth in 0.3f64..2.0,
        thickness in 0.3f64..2.0,
    ) {
        let params = PhysicalParams::new(1.0, depth, thickness, 1.0, sigma1, sigma2).unwrap();
        let profile = BuiltinProfile::Flat.sample(params, 12).unwrap();
        let sol = solve(&profile, MeshSpec::new(6, 6), &settings()).unwrap();
        let theta = variation(&sol.mesh, seed);
        let perturbed: Vec<f64> = sol.psi.values.iter().zip(&theta).map(|(a, b)| a + b).collect();
        let gain = dirichlet_energy(&perturbed, &sol.mesh).unwrap() - sol.report.energy_psi;
        let quad = dirichlet_energy(&theta, &sol.mesh).unwrap();
        prop_assert!(gain >= 0.0);
        prop_assert!((gain - quad).abs() <= 1e-9 * (1.0 + quad), "gain {gain} quad {quad}");
    }

    #[test]
    fn poincare_holds_for_admissible_fields(seed in any::<u64>(), amplitude in -0.9f64..0.9) {
        let sol = cosine_solution(amplitude, 10);
        let theta = Field::new(FieldKind::Chi, variation(&sol.mesh, seed), &sol.mesh);
        let c = poincare_check(&theta, &sol.mesh).unwrap();
        prop_assert!(c.lhs < c.bound, "lhs {} bound {}", c.lhs, c.bound);
    }

    #[test]
    fn solution_does_not_depend_on_initial_guess(seed in any::<u64>()) {
        let profile = BuiltinProfile::Bump { amplitude: 0.4, half_width: 0.5 }.sample(PhysicalParams::case_flat(), 16).unwrap();
        let a = solve(&profile, MeshSpec::new(8, 8), &settings()).unwrap();
        let guess = variation(&a.mesh, seed);
        let b = solve_from(&profile, MeshSpec::new(8, 8), &settings(), Some(&guess)).unwrap();
        let diff = a.psi.values.iter().zip(&b.psi.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-9, "max nodal difference {diff}");
    }

    #[test]
    fn equal_permittivities_scale_out(sigma in 0.1f64..10.0) {
        let unit = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let scaled = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, sigma, sigma).unwrap();
        let shape = BuiltinProfile::Cosine { amplitude: -0.3 };
        let a = solve(&shape.sample(unit, 16).unwrap(), MeshSpec::new(8, 8), &settings()).unwrap();
        let b = solve(&shape.sample(scaled, 16).unwrap(), MeshSpec::new(8, 8), &settings()).unwrap();
        let diff = a.psi.values.iter().zip(&b.psi.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-9);
        prop_assert!((b.report.energy_psi - sigma * a.report.energy_psi).abs() < 1e-9 * sigma);
    }

    #[test]
    fn classification_is_stable_under_refinement(amplitude in -0.9f64..0.9) {
        prop_assume!(amplitude.abs() > 1e-3);
        let params = PhysicalParams::case_flat();
        let shape = BuiltinProfile::Cosine { amplitude };
        let coarse = classify_default(&shape.sample(params, 32).unwrap()).unwrap().class;
        let fine = classify_default(&shape.sample(params, 256).unwrap()).unwrap().class;
        prop_assert_eq!(coarse, fine);
    }
}

// On curved profiles the cross term is the lift interpolation defect, which shrinks with h.
#[test]
fn curved_cross_term_shrinks_under_refinement() {
    let defect = |n: usize| {
        let sol = cosine_solution(-0.5, n);
        let theta = variation(&sol.mesh, 7);
        let perturbed: Vec<f64> = sol.psi.values.iter().zip(&theta).map(|(a, b)| a + b).collect();
        let gain = dirichlet_energy(&perturbed, &sol.mesh).unwrap() - sol.report.energy_psi;
        let quad = dirichlet_energy(&theta, &sol.mesh).unwrap();
        ((gain - quad) / quad).abs()
    };
    let (a, b, c) = (defect(8), defect(16), defect(32));
    assert!(b < a && c < b, "{a} {b} {c}");
}

#[test]
fn zero_perturbation_gives_zero_stability_error() {
    let params = PhysicalParams::case_flat();
    let base = BuiltinProfile::Cosine { amplitude: -0.25 }.sample(params, 16).unwrap();
    let zero = BuiltinProfile::Flat.sample(params, 16).unwrap();
    let table = stability_study(&base, &zero, &[1, 2, 4], MeshSpec::new(8, 8), &settings()).unwrap();
    for r in &table.records {
        assert_eq!(r.e_h1, 0.0);
        assert_eq!(r.energy_gap, 0.0);
    }
}

#[test]
fn inadmissible_schedule_member_is_rejected() {
    let params = PhysicalParams::case_flat();
    let base = BuiltinProfile::ParabolaTouch.sample(params, 16).unwrap();
    let down = BuiltinProfile::Cosine { amplitude: -1.0 }.sample(params, 16).unwrap();
    let err = stability_study(&base, &down, &[1, 2], MeshSpec::new(8, 8), &settings()).unwrap_err();
    assert!(matches!(err, twolayer::Error::Inadmissible(_) | twolayer::Error::InvalidProfile(_)), "{err:?}");
}

#[test]
fn flat_h2_surrogate_vanishes() {
    let profile = BuiltinProfile::Flat.sample(PhysicalParams::case_flat(), 32).unwrap();
    let sol = solve(&profile, MeshSpec::new(32, 32), &settings()).unwrap();
    let spec = MeshSpec::new(32, 32).with_lateral(LateralBoundary::Insulated);
    let insulated = solve(&profile, spec, &settings()).unwrap();
    for layer in [Layer::Lower, Layer::Upper] {
        assert!(h2_surrogate(&insulated.psi, &insulated.mesh, &profile, layer).unwrap().estimate <= 1e-8);
        assert!(h2_surrogate(&sol.psi, &sol.mesh, &profile, layer).unwrap().estimate.is_finite());
    }
}

#[test]
fn profiles_above_kappa_are_excluded() {
    let family = [BuiltinProfile::Flat, BuiltinProfile::Cosine { amplitude: -0.5 }];
    let study =
        kappa_family_study(&family, PhysicalParams::case_flat(), 0.5, &[8, 16], LateralBoundary::Dirichlet, 1.5, &settings())
            .unwrap();
    assert!(study.summaries[0].excluded.is_none());
    assert!(study.summaries[1].excluded.is_some());
}

#[test]
fn parabola_touch_is_admissible_only_for_the_right_jump() {
    let good = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 2.0).unwrap();
    let bad = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 2.0, 1.0).unwrap();
    let shape = BuiltinProfile::ParabolaTouch;
    assert_eq!(classify_default(&shape.sample(good, 64).unwrap()).unwrap().class, AdmissibilityClass::BarSOnly);
    assert_eq!(classify_default(&shape.sample(bad, 64).unwrap()).unwrap().class, AdmissibilityClass::Inadmissible);
}

#[test]
fn curved_refinement_converges_at_second_order() {
    let study = twolayer::diagnostics::refine_study(
        BuiltinProfile::Cosine { amplitude: -0.25 },
        PhysicalParams::case_flat(),
        &[16, 32, 64, 128],
        LateralBoundary::Dirichlet,
        &settings(),
    )
    .unwrap();
    assert!(!study.closed_form);
    assert!(study.order_l2 > 1.8, "L2 order {}", study.order_l2);
    assert!(study.records.iter().all(|r| r.linf_error < 1e-2));
}
