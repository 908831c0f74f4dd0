//! Independent reference computations for tests. Nothing here calls the
//! crate's fiber, reduction or optimizer code; only raw `N`, `A`, `B`
//! values and class exponents are taken from it.
#![allow(dead_code)]

use fibering::{ClassTag, Family, FunctionalTriple, TermValues};

/// `mu(c, t u) = (N t^eta/eta - B t^beta/beta - c) / (s A t^a / a)`.
pub fn psi_raw(class: &ClassTag, v: &TermValues, c: f64, t: f64) -> f64 {
    let (eta, beta, a) = (class.eta(), class.beta(), class.deg_a());
    let s = if class.family() == Family::SpLike { -1.0 } else { 1.0 };
    (v.n * t.powf(eta) / eta - v.b * t.powf(beta) / beta - c) / (s * v.a * t.powf(a) / a)
}

/// A function with the same zeros as `d psi / dt`:
/// `(t F'(t)) / a - F(t)` with `F` the numerator of `psi_raw`.
pub fn psi_prime_numerator(class: &ClassTag, v: &TermValues, c: f64) -> impl Fn(f64) -> f64 {
    let (eta, beta, a) = (class.eta(), class.beta(), class.deg_a());
    let (n, b) = (v.n, v.b);
    move |t: f64| n * t.powf(eta) * (1.0 / a - 1.0 / eta) - b * t.powf(beta) * (1.0 / a - 1.0 / beta) + c
}

/// Plain bisection to adjacent floating-point numbers.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "bisection needs a sign change on [{lo}, {hi}]");
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All sign changes of `f` on a log-spaced grid over `[lo, hi]`, refined by bisection.
pub fn scan_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let grid: Vec<f64> = (0..=points).map(|k| lo * (hi / lo).powf(k as f64 / points as f64)).collect();
    let mut roots = Vec::new();
    for w in grid.windows(2) {
        if f(w[0]) * f(w[1]) < 0.0 {
            roots.push(bisect(&f, w[0], w[1]));
        }
    }
    roots
}

/// Critical scales of the fiber classified by the shape of `psi_raw`:
/// `(local minima, local maxima)`.
pub fn fiber_extrema(class: &ClassTag, v: &TermValues, c: f64) -> (Vec<f64>, Vec<f64>) {
    let roots = scan_roots(psi_prime_numerator(class, v, c), 1e-8, 1e8, 20_000);
    let (mut mins, mut maxs) = (Vec::new(), Vec::new());
    for t in roots {
        let h = 1e-4 * t;
        let (l, m, r) = (psi_raw(class, v, c, t - h), psi_raw(class, v, c, t), psi_raw(class, v, c, t + h));
        if l > m && r > m {
            mins.push(t);
        } else if l < m && r < m {
            maxs.push(t);
        }
    }
    (mins, maxs)
}

/// Degeneracy energy from the double-root conditions `f = f' = 0` of
/// [`psi_prime_numerator`], solved by hand for `t` and then `c`.
pub fn c_local_oracle(class: &ClassTag, v: &TermValues) -> f64 {
    let (eta, beta, a) = (class.eta(), class.beta(), class.deg_a());
    let (kn, kb) = (1.0 / a - 1.0 / eta, 1.0 / a - 1.0 / beta);
    let t = (eta * v.n * kn / (beta * v.b * kb)).powf(1.0 / (beta - eta));
    -(v.n * t.powf(eta) * kn - v.b * t.powf(beta) * kb)
}

/// Extremal degeneracy energy over `points` equally spaced angles of the
/// unit circle (2D instances only): the maximum for concave-convex
/// classes, the minimum for SP-like classes.
pub fn angle_grid_cstar(triple: &FunctionalTriple, points: usize) -> f64 {
    assert_eq!(triple.dim(), 2);
    let class = triple.class();
    let values = (0..points).map(|k| {
        let th = std::f64::consts::PI * k as f64 / points as f64;
        c_local_oracle(&class, &triple.values(&[th.cos(), th.sin()]))
    });
    match class.family() {
        Family::ConcaveConvex => values.fold(f64::NEG_INFINITY, f64::max),
        _ => values.fold(f64::INFINITY, f64::min),
    }
}

/// Central-difference gradient.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            (f(&xp) - f(&xm)) / (2.0 * h)
        })
        .collect()
}

/// Dirichlet eigenvalues of the three-point Laplacian on `m` interior
/// nodes of `(0, 1)`, by dense symmetric eigensolve.
pub fn dirichlet_eigenvalues(m: usize) -> Vec<f64> {
    let h = 1.0 / (m as f64 + 1.0);
    let mat = nalgebra::DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            2.0 / (h * h)
        } else if i.abs_diff(j) == 1 {
            -1.0 / (h * h)
        } else {
            0.0
        }
    });
    let mut ev: Vec<f64> = mat.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Golden-section maximization of a unimodal `f` on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - r * (hi - lo), lo + r * (hi - lo));
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 < f2 {
            lo = x1;
            (x1, f1) = (x2, f2);
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            (x2, f2) = (x1, f1);
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}
