mod common;

use common::*;
use fibering::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Instances with a branch and an energy drawn inside its admissible range
/// for the sampled direction.
fn cases() -> Vec<(FunctionalTriple, Branch)> {
    let cc = make_diag(ClassTag::concave_convex(2.0, 3.0, 4.0).unwrap(), &[1.0, 2.0, 0.5], &[1.0, 1.0, 2.0], &[1.0, 1.5, 1.0])
        .unwrap();
    let sp = make_sp_surrogate(&[1.0, 2.0, 1.5], &[1.0, 2.0, 1.5], &[1.0, 1.0, 2.0], 2.5).unwrap();
    vec![
        (make_plap1d(2.0, 2.0, 4.0, 12).unwrap(), Branch::Minus),
        (make_plap1d(2.5, 2.5, 3.5, 10).unwrap(), Branch::Minus),
        (make_diag(ClassTag::two_term(3.0, 2.0, BSign::Positive).unwrap(), &[1.0, 3.0], &[2.0, 1.0], &[1.0, 0.5]).unwrap(), Branch::Plus),
        (make_plap1d(2.0, 1.5, 3.0, 10).unwrap(), Branch::Plus),
        (cc.clone(), Branch::Plus),
        (cc, Branch::Minus),
        (sp.clone(), Branch::Plus),
        (sp, Branch::Minus),
    ]
}

fn energy_for(triple: &FunctionalTriple, u: &[f64], branch: Branch, rng: &mut ChaCha8Rng) -> f64 {
    let class = triple.class();
    let frac: f64 = rng.gen_range(0.1..0.9);
    match class.family() {
        Family::TwoTerm => {
            let s = if ClassTag::two_term_branch(1.0) == branch { 1.0 } else { -1.0 };
            s * 10f64.powf(rng.gen_range(-2.0..1.0))
        }
        _ => frac * triple.classify_fiber(0.0, u).unwrap().c_local.unwrap(),
    }
}

fn rel_vec_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let size: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / size.max(1e-300)
}

#[test]
fn reduced_derivatives_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for (triple, branch) in cases() {
        for _ in 0..50 {
            let u: Vec<f64> = (0..triple.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c = energy_for(&triple, &u, branch, &mut rng);
            let r = triple.eval_lambda(c, &u, branch).unwrap();
            let lam = |x: &[f64]| triple.lambda_value(c, x, branch).unwrap();

            // The tangential part carries the information; the radial part
            // vanishes by 0-homogeneity.
            let fd = fd_gradient(lam, &u, 1e-6);
            assert!(rel_vec_err(&r.grad, &fd) < 1e-5, "{} {branch}: grad", triple.class());
            assert!(r.radial_component.abs() <= 1e-10 * r.grad.iter().map(|g| g.abs()).sum::<f64>().max(1e-300));

            let hc = 1e-4 * c.abs();
            let dl = (triple.lambda_value(c + hc, &u, branch).unwrap() - triple.lambda_value(c - hc, &u, branch).unwrap())
                / (2.0 * hc);
            assert!(rel_err(r.dlambda_dc, dl) < 1e-5, "{} {branch}: dLambda/dc {} vs {dl}", triple.class(), r.dlambda_dc);

            let dt = (triple.solve_scale(c + hc, &u, branch).unwrap() - triple.solve_scale(c - hc, &u, branch).unwrap())
                / (2.0 * hc);
            assert!(rel_err(r.dt_dc, dt) < 1e-5, "{} {branch}: dt/dc {} vs {dt}", triple.class(), r.dt_dc);
        }
    }
}

#[test]
fn term_gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for (triple, _) in cases() {
        let u: Vec<f64> = (0..triple.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = triple.gradients(&u);
        let picks: [(&dyn Fn(TermValues) -> f64, &Vec<f64>); 3] =
            [(&|v| v.n, &g.n), (&|v| v.a, &g.a), (&|v| v.b, &g.b)];
        for (pick, grad) in picks {
            let fd = fd_gradient(|x| pick(triple.values(x)), &u, 1e-6);
            assert!(rel_vec_err(grad, &fd) < 1e-6, "{}", triple.class());
        }
        assert!(triple.euler_residuals(&u).max() < 1e-12);
    }
}
