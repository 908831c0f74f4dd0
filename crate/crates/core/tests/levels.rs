mod common;

use common::*;
use fibering::linalg::sign_changes;
use fibering::*;

fn cfg() -> OptimizerConfig {
    OptimizerConfig::default()
}

#[test]
fn plap_levels_match_dirichlet_eigenvalues() {
    let m = 63;
    let triple = make_plap1d(2.0, 2.0, 4.0, m).unwrap();
    let eig = dirichlet_eigenvalues(m);
    let levels = estimate_levels(&triple, 1e-6, 3, Branch::Minus, &cfg()).unwrap();
    for (spec, ev) in levels.iter().zip(&eig) {
        assert!(rel_err(spec.value, *ev) < 1e-3, "n = {}: {} vs {ev}", spec.n, spec.value);
        let pair = spec.pair.as_ref().expect("inner extremizer verifies");
        assert!(pair.residual_grad <= 1e-6);
        assert!(!spec.collapse);
    }
    assert!(levels.windows(2).all(|w| w[0].value < w[1].value));
}

#[test]
fn quotient_levels_are_eigenvalues_and_the_endpoint_limit() {
    let m = 31;
    let triple = make_plap1d(2.0, 2.0, 4.0, m).unwrap();
    let eig = dirichlet_eigenvalues(m);
    for n in 1..=3 {
        let q = quotient_level(&triple, n, &cfg()).unwrap();
        assert!(rel_err(q, eig[n - 1]) < 1e-8, "n = {n}: {q} vs {}", eig[n - 1]);
        let near = estimate_level(&triple, 1e-6, n, Branch::Minus, &cfg()).unwrap();
        assert!(near.value < q && rel_err(near.value, q) < 1e-3);
    }
}

#[test]
fn single_level_is_the_ground_state() {
    let triple = make_plap1d(2.0, 2.0, 4.0, 31).unwrap();
    let ground = minimize_reduced(&triple, 0.5, Branch::Minus, &cfg()).unwrap();
    let spec = estimate_level(&triple, 0.5, 1, Branch::Minus, &cfg()).unwrap();
    assert_eq!(spec.value, ground.mu);
    assert_eq!(spec.pair.unwrap().u, ground.u);
}

#[test]
fn level_two_is_below_every_coordinate_plane_bound() {
    let class = ClassTag::two_term(2.0, 4.0, BSign::Positive).unwrap();
    let triple = make_diag(class, &[1.0, 2.0, 3.5], &[1.0, 1.5, 1.0], &[2.0, 1.0, 0.5]).unwrap();
    let c = 0.3;
    let spec = estimate_level(&triple, c, 2, Branch::Minus, &cfg()).unwrap();
    let mut best = f64::INFINITY;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let on_circle = |th: f64| {
                let mut w = vec![0.0; 3];
                w[i] = th.cos();
                w[j] = th.sin();
                triple.lambda_value(c, &w, Branch::Minus).unwrap()
            };
            let step = std::f64::consts::PI / 4000.0;
            let k = (0..4000).max_by(|a, b| on_circle(*a as f64 * step).total_cmp(&on_circle(*b as f64 * step))).unwrap();
            let circle_max = golden_max(on_circle, (k as f64 - 1.0) * step, (k as f64 + 1.0) * step);
            best = best.min(circle_max);
        }
    }
    assert!(spec.value <= best + 1e-9, "{} > {best}", spec.value);
    let ground = minimize_reduced(&triple, c, Branch::Minus, &cfg()).unwrap();
    assert!(ground.mu <= spec.value);
}

#[test]
fn sup_inf_levels_decrease_and_match_reciprocal_form() {
    let sp = make_sp_surrogate(&[1.0, 2.0, 1.5], &[1.0, 2.0, 1.5], &[1.0, 1.0, 2.0], 2.5).unwrap();
    let levels = estimate_levels(&sp, -1.0, 3, Branch::Minus, &cfg()).unwrap();
    assert!(levels.windows(2).all(|w| w[1].value <= w[0].value + 1e-12));
    for spec in &levels {
        let r = reciprocal_level(&sp, -1.0, spec.n, Branch::Minus, &cfg()).unwrap();
        assert!(rel_err(r, spec.value) < 1e-7, "n = {}: {r} vs {}", spec.n, spec.value);
    }
}

#[test]
fn branch_ordering_on_levels() {
    let cc = make_diag(ClassTag::concave_convex(2.0, 3.0, 4.0).unwrap(), &[1.0, 2.0, 0.5], &[1.0, 1.0, 2.0], &[1.0, 1.5, 1.0])
        .unwrap();
    let cstar = estimate_cstar(&cc, &cfg()).unwrap();
    for frac in [0.9, 0.5, 0.1] {
        for n in 1..=3 {
            let p = estimate_level(&cc, frac * cstar, n, Branch::Plus, &cfg()).unwrap();
            let m = estimate_level(&cc, frac * cstar, n, Branch::Minus, &cfg()).unwrap();
            assert!(p.value + 1e-5 < m.value, "n = {n}, c = {}: {} vs {}", frac * cstar, p.value, m.value);
        }
    }
}

#[test]
fn nodal_bounds_agree_with_subspace_levels() {
    let triple = make_plap1d(2.0, 2.0, 4.0, 63).unwrap();
    let c = 1e-6;
    let one = nodal_level_1d(&triple, c, 1, Branch::Minus, &cfg()).unwrap();
    let ground = minimize_reduced(&triple, c, Branch::Minus, &cfg()).unwrap();
    assert!(rel_err(one.value, ground.mu) < 1e-9);
    // Zero nodes fall on the exact nodal points when n divides m + 1.
    let tri62 = make_plap1d(2.0, 2.0, 4.0, 62).unwrap();
    for (t, n) in [(&triple, 2), (&tri62, 3), (&triple, 3)] {
        let nodal = nodal_level_1d(t, c, n, Branch::Minus, &cfg()).unwrap();
        let sub = estimate_level(t, c, n, Branch::Minus, &cfg()).unwrap();
        assert!(nodal.value >= sub.value * (1.0 - 1e-9));
        if (t.dim() + 1) % n == 0 {
            assert!(rel_err(nodal.value, sub.value) < 1e-2, "n = {n}: {} vs {}", nodal.value, sub.value);
        }
        let sum: Vec<f64> = (0..t.dim()).map(|i| nodal.witness.iter().map(|col| col[i]).sum()).collect();
        assert_eq!(sign_changes(&sum), n - 1);
    }
}

#[test]
fn nodal_bound_needs_a_mesh() {
    let class = ClassTag::two_term(2.0, 4.0, BSign::Positive).unwrap();
    let diag = make_diag(class, &[1.0, 2.0], &[1.0, 1.0], &[1.0, 1.0]).unwrap();
    assert!(matches!(nodal_level_1d(&diag, 1.0, 1, Branch::Minus, &cfg()), Err(Error::UnsupportedClass(_))));
    let plap = make_plap1d(2.0, 2.0, 4.0, 5).unwrap();
    assert!(matches!(nodal_level_1d(&plap, 1.0, 4, Branch::Minus, &cfg()), Err(Error::InvalidInput(_))));
}

#[test]
fn invalid_levels_are_rejected() {
    let plap = make_plap1d(2.0, 2.0, 4.0, 5).unwrap();
    assert!(estimate_level(&plap, 1.0, 0, Branch::Minus, &cfg()).is_err());
    assert!(estimate_level(&plap, 1.0, 6, Branch::Minus, &cfg()).is_err());
    assert!(matches!(estimate_level(&plap, -1.0, 1, Branch::Minus, &cfg()), Err(Error::NoConvergence { .. })));
}
