use fibering::linalg::{dot, norm, orthonormalize, sign_changes};
use fibering::*;
use proptest::prelude::*;

fn cc() -> FunctionalTriple {
    make_diag(ClassTag::concave_convex(2.0, 3.0, 4.0).unwrap(), &[1.0, 2.0, 0.5], &[1.0, 1.0, 2.0], &[1.0, 1.5, 1.0]).unwrap()
}

fn sp() -> FunctionalTriple {
    make_sp_surrogate(&[1.0, 2.0, 1.5], &[1.0, 2.0, 1.5], &[1.0, 1.0, 2.0], 2.5).unwrap()
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 3).prop_filter("nonzero", |u| norm(u) > 1e-3)
}

/// Separator and zero of `P t^eta - Q t^beta`, from the fiber's shape coefficients.
fn landmarks(class: &ClassTag, v: &TermValues) -> (f64, f64) {
    let (eta, beta, a) = (class.eta(), class.beta(), class.deg_a());
    let p = ((eta - a) * v.n / eta).abs();
    let q = ((beta - a) * v.b / beta).abs();
    ((eta * p / (beta * q)).powf(1.0 / (beta - eta)), (p / q).powf(1.0 / (beta - eta)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reduced_functional_is_zero_homogeneous(u in point(), s in 0.01f64..100.0, frac in 0.05f64..0.95) {
        for triple in [cc(), sp()] {
            let c = frac * triple.classify_fiber(0.0, &u).unwrap().c_local.unwrap();
            let su: Vec<f64> = u.iter().map(|x| s * x).collect();
            for b in [Branch::Plus, Branch::Minus] {
                let l1 = triple.lambda_value(c, &u, b).unwrap();
                let l2 = triple.lambda_value(c, &su, b).unwrap();
                prop_assert!((l1 - l2).abs() <= 1e-10 * (1.0 + l1.abs()));
            }
        }
    }

    #[test]
    fn plus_branch_lies_below_minus_branch(u in point(), frac in 0.01f64..0.99) {
        for triple in [cc(), sp()] {
            let c = frac * triple.classify_fiber(0.0, &u).unwrap().c_local.unwrap();
            let lp = triple.lambda_value(c, &u, Branch::Plus).unwrap();
            let lm = triple.lambda_value(c, &u, Branch::Minus).unwrap();
            prop_assert!(lp < lm, "{}: {lp} !< {lm}", triple.class());
        }
    }

    #[test]
    fn critical_scales_are_bracketed_and_typed(u in point(), frac in 0.01f64..0.99) {
        for triple in [cc(), sp()] {
            let class = triple.class();
            let v = triple.values(&u);
            let c = frac * triple.classify_fiber(0.0, &u).unwrap().c_local.unwrap();
            let d = triple.classify_fiber(c, &u).unwrap();
            prop_assert_eq!(d.regime, Regime::TwoCritical);
            let (tp, tm) = (d.t_plus.unwrap(), d.t_minus.unwrap());
            let (t_sep, t_zero) = landmarks(&class, &v);
            prop_assert!(tp < t_sep && t_sep < tm && tm <= t_zero * (1.0 + 1e-12));
            prop_assert!(triple.eval_psi(c, &u, tp, 2).unwrap() > 0.0);
            prop_assert!(triple.eval_psi(c, &u, tm, 2).unwrap() < 0.0);
        }
    }

    #[test]
    fn scale_maps_and_values_are_monotone_in_energy(u in point(), f1 in 0.05f64..0.95, f2 in 0.05f64..0.95) {
        prop_assume!((f1 - f2).abs() > 1e-3);
        for triple in [cc(), sp()] {
            let class = triple.class();
            let cu = triple.classify_fiber(0.0, &u).unwrap().c_local.unwrap();
            let (c1, c2) = if f1 * cu < f2 * cu { (f1 * cu, f2 * cu) } else { (f2 * cu, f1 * cu) };
            let s = class.i2_sign();
            for (b, t_sign) in [(Branch::Plus, -s), (Branch::Minus, s)] {
                let (t1, t2) = (triple.solve_scale(c1, &u, b).unwrap(), triple.solve_scale(c2, &u, b).unwrap());
                prop_assert!(t_sign * (t2 - t1) > 0.0, "{} {b}: t({c1}) = {t1}, t({c2}) = {t2}", class);
                let (l1, l2) = (triple.lambda_value(c1, &u, b).unwrap(), triple.lambda_value(c2, &u, b).unwrap());
                prop_assert!(class.curve_slope_sign() * (l2 - l1) > 0.0);
            }
        }
    }

    #[test]
    fn two_term_value_decreases_in_energy(u in prop::collection::vec(-1.0f64..1.0, 8), c1 in 1e-3f64..10.0, c2 in 1e-3f64..10.0) {
        prop_assume!(norm(&u) > 1e-3 && (c1 - c2).abs() > 1e-6);
        let t = make_plap1d(2.0, 2.0, 4.0, 8).unwrap();
        let (lo, hi) = (c1.min(c2), c1.max(c2));
        prop_assert!(t.lambda_value(lo, &u, Branch::Minus).unwrap() > t.lambda_value(hi, &u, Branch::Minus).unwrap());
        prop_assert!(t.solve_scale(lo, &u, Branch::Minus).unwrap() < t.solve_scale(hi, &u, Branch::Minus).unwrap());
    }

    #[test]
    fn euler_identities_hold(u in prop::collection::vec(-2.0f64..2.0, 9)) {
        prop_assume!(norm(&u) > 1e-3);
        for t in [make_plap1d(2.0, 2.0, 4.0, 9).unwrap(), make_plap1d(2.5, 1.5, 3.5, 9).unwrap()] {
            prop_assert!(t.euler_residuals(&u).max() < 1e-12);
        }
    }

    #[test]
    fn gram_schmidt_is_orthonormal(cols in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 6), 1..4)) {
        let mut q = cols.clone();
        if orthonormalize(&mut q) {
            for i in 0..q.len() {
                prop_assert!((norm(&q[i]) - 1.0).abs() < 1e-12);
                for j in 0..i {
                    prop_assert!(dot(&q[i], &q[j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn alternating_blocks_count_sign_changes(lens in prop::collection::vec(1usize..5, 1..6)) {
        let mut u = Vec::new();
        for (j, len) in lens.iter().enumerate() {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            u.extend(std::iter::repeat_n(s, *len));
            u.push(0.0);
        }
        prop_assert_eq!(sign_changes(&u), lens.len() - 1);
    }
}
