//! Concrete instances: the 1D Dirichlet p-Laplacian mesh, diagonal
//! surrogates for every class, and a quartic SP-like surrogate.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::class::{BSign, ClassTag, ClassVariant, Family};
use crate::error::{Error, Result};
use crate::linalg::{abs_pow, normalized, signed_pow};
use crate::triple::{AssumptionFlags, FunctionalTriple, TermGradients, TermValues, Terms};

/// Uniform-mesh discretization on `(0, 1)` with zero boundary values.
///
/// `N(u) = sum_{i=0..m} |u_{i+1} - u_i|^p / h^{p-1}`, `A(u) = h sum |u_i|^q`,
/// `B(u) = +-h sum |u_i|^r`, where `h = 1/(m+1)` unless a block of a finer
/// problem is being represented.
#[derive(Clone, Debug, PartialEq)]
pub struct PLap1D {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub m: usize,
    pub h: f64,
    pub b_factor: f64,
}

impl PLap1D {
    /// Same exponents and mesh width on a sub-interval of `len` interior nodes.
    pub fn block(&self, len: usize) -> PLap1D {
        PLap1D { m: len, ..self.clone() }
    }
}

impl Terms for PLap1D {
    fn dim(&self) -> usize {
        self.m
    }

    fn values(&self, u: &[f64]) -> TermValues {
        let hp = self.h.powf(self.p - 1.0);
        let mut n = 0.0;
        let mut prev = 0.0;
        for &x in u.iter().chain(std::iter::once(&0.0)) {
            n += abs_pow(x - prev, self.p);
            prev = x;
        }
        let a: f64 = u.iter().map(|&x| abs_pow(x, self.q)).sum();
        let b: f64 = u.iter().map(|&x| abs_pow(x, self.r)).sum();
        TermValues { n: n / hp, a: self.h * a, b: self.b_factor * self.h * b }
    }

    fn gradients(&self, u: &[f64]) -> TermGradients {
        let m = self.m;
        let c = self.p / self.h.powf(self.p - 1.0);
        let mut gn = vec![0.0; m];
        // Edge e joins node e-1 and node e (1-based interior nodes, zeros outside).
        for e in 0..=m {
            let left = if e == 0 { 0.0 } else { u[e - 1] };
            let right = if e == m { 0.0 } else { u[e] };
            let flux = c * signed_pow(right - left, self.p);
            if e < m {
                gn[e] += flux;
            }
            if e > 0 {
                gn[e - 1] -= flux;
            }
        }
        let ga = u.iter().map(|&x| self.h * self.q * signed_pow(x, self.q)).collect();
        let gb = u.iter().map(|&x| self.b_factor * self.h * self.r * signed_pow(x, self.r)).collect();
        TermGradients { n: gn, a: ga, b: gb }
    }

    fn as_plap1d(&self) -> Option<&PLap1D> {
        Some(self)
    }
}

/// Class rule for the mesh exponents.
pub fn plap1d_class(p: f64, q: f64, r: f64, b_sign: BSign) -> Result<ClassTag> {
    if q == p && r != p {
        ClassTag::two_term(p, r, b_sign)
    } else if q < p && p < r {
        if b_sign == BSign::Negative {
            return Err(Error::BadExponents("negative B requires q = p".into()));
        }
        ClassTag::concave_convex(q, p, r)
    } else {
        Err(Error::BadExponents(format!(
            "no class matches (p, q, r) = ({p}, {q}, {r}); need q = p != r or q < p < r"
        )))
    }
}

/// 1D p-Laplacian instance with `m` interior nodes and positive `B`.
pub fn make_plap1d(p: f64, q: f64, r: f64, m: usize) -> Result<FunctionalTriple> {
    make_plap1d_signed(p, q, r, m, BSign::Positive)
}

/// As [`make_plap1d`] with an explicit sign for `B` (two-term classes only).
pub fn make_plap1d_signed(p: f64, q: f64, r: f64, m: usize, b_sign: BSign) -> Result<FunctionalTriple> {
    if m < 3 {
        return Err(Error::InvalidInput(format!("mesh needs m >= 3 interior nodes, got {m}")));
    }
    let class = plap1d_class(p, q, r, b_sign)?;
    let inst = PLap1D { p, q, r, m, h: 1.0 / (m as f64 + 1.0), b_factor: b_sign.factor() };
    Ok(FunctionalTriple::from_parts(class, Arc::new(inst)))
}

/// Separable instance `N = sum n_i |u_i|^eta`, `A = sum a_i |u_i|^deg(A)`,
/// `B = +-sum b_i |u_i|^beta`.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagonal {
    pub eta: f64,
    pub deg_a: f64,
    pub beta: f64,
    pub n: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub b_factor: f64,
}

impl Terms for Diagonal {
    fn dim(&self) -> usize {
        self.n.len()
    }

    fn values(&self, u: &[f64]) -> TermValues {
        let mut v = TermValues { n: 0.0, a: 0.0, b: 0.0 };
        for (i, &x) in u.iter().enumerate() {
            v.n += self.n[i] * abs_pow(x, self.eta);
            v.a += self.a[i] * abs_pow(x, self.deg_a);
            v.b += self.b[i] * abs_pow(x, self.beta);
        }
        v.b *= self.b_factor;
        v
    }

    fn gradients(&self, u: &[f64]) -> TermGradients {
        let d = u.len();
        let mut g = TermGradients { n: vec![0.0; d], a: vec![0.0; d], b: vec![0.0; d] };
        for (i, &x) in u.iter().enumerate() {
            g.n[i] = self.n[i] * self.eta * signed_pow(x, self.eta);
            g.a[i] = self.a[i] * self.deg_a * signed_pow(x, self.deg_a);
            g.b[i] = self.b_factor * self.b[i] * self.beta * signed_pow(x, self.beta);
        }
        g
    }
}

fn check_weights(n: &[f64], a: &[f64], b: &[f64]) -> Result<()> {
    if n.is_empty() || n.len() != a.len() || n.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "weight vectors must be non-empty with equal lengths, got {}, {}, {}",
            n.len(),
            a.len(),
            b.len()
        )));
    }
    if !n.iter().chain(a).chain(b).all(|w| w.is_finite() && *w > 0.0) {
        return Err(Error::InvalidInput("weights must be finite and positive".into()));
    }
    Ok(())
}

/// Diagonal surrogate for any class.
pub fn make_diag(class: ClassTag, n: &[f64], a: &[f64], b: &[f64]) -> Result<FunctionalTriple> {
    class.validate()?;
    check_weights(n, a, b)?;
    let inst = Diagonal {
        eta: class.eta(),
        deg_a: class.deg_a(),
        beta: class.beta(),
        n: n.to_vec(),
        a: a.to_vec(),
        b: b.to_vec(),
        b_factor: class.b_sign.factor(),
    };
    Ok(FunctionalTriple::from_parts(class, Arc::new(inst)))
}

/// Quartic SP-like surrogate: `N = sum n_i u_i^2`, `A = (sum a_i u_i^2)^2`,
/// `B = sum b_i |u_i|^p` with `2 < p < 3`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpSurrogate {
    pub p: f64,
    pub n: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Terms for SpSurrogate {
    fn dim(&self) -> usize {
        self.n.len()
    }

    fn values(&self, u: &[f64]) -> TermValues {
        let mut v = TermValues { n: 0.0, a: 0.0, b: 0.0 };
        for (i, &x) in u.iter().enumerate() {
            v.n += self.n[i] * x * x;
            v.a += self.a[i] * x * x;
            v.b += self.b[i] * abs_pow(x, self.p);
        }
        v.a *= v.a;
        v
    }

    fn gradients(&self, u: &[f64]) -> TermGradients {
        let s: f64 = u.iter().zip(&self.a).map(|(x, w)| w * x * x).sum();
        TermGradients {
            n: u.iter().zip(&self.n).map(|(x, w)| 2.0 * w * x).collect(),
            a: u.iter().zip(&self.a).map(|(x, w)| 4.0 * s * w * x).collect(),
            b: u.iter().zip(&self.b).map(|(x, w)| self.p * w * signed_pow(*x, self.p)).collect(),
        }
    }
}

/// SP-like surrogate with degrees `(eta, beta, alpha) = (2, p, 4)`.
///
/// The returned triple carries the outcome of [`coercivity_probe`] in its
/// flags; a failed probe is a warning, not an error.
pub fn make_sp_surrogate(n: &[f64], a: &[f64], b: &[f64], p: f64) -> Result<FunctionalTriple> {
    if !(p > 2.0 && p < 3.0) {
        return Err(Error::BadExponents(format!("SP surrogate exponent must lie in (2, 3), got {p}")));
    }
    check_weights(n, a, b)?;
    let class = ClassTag::sp_like(2.0, p, 4.0)?;
    let inst = SpSurrogate { p, n: n.to_vec(), a: a.to_vec(), b: b.to_vec() };
    let ratio = a[0] / n[0];
    let proportional = n.iter().zip(a).all(|(ni, ai)| ((ai / ni) - ratio).abs() <= 1e-12 * ratio);
    let triple = FunctionalTriple::from_parts(class, Arc::new(inst));
    let coercive = coercivity_probe(&triple, 64, 42);
    Ok(triple.with_flags(AssumptionFlags { coercive: Some(coercive), a_power_of_n: Some(proportional) }))
}

/// Empirical check that the sublevel sets `{Phi_mu <= c}` with `mu >= a`
/// stay bounded, for `c` in `{0.1, 1, 10}` and `a` in `{0.1, 1}`.
///
/// Along each sampled ray the norm grid `2^k`, `k = -10..=30`, must leave the
/// sublevel set before its last eight points. Only meaningful for SP-like
/// classes, where `Phi_mu` increases with `mu`.
pub fn coercivity_probe(triple: &FunctionalTriple, rays: usize, seed: u64) -> bool {
    let class = triple.class();
    if class.family() != Family::SpLike {
        return true;
    }
    let (eta, beta, alpha) = (class.eta(), class.beta(), class.deg_a());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid: Vec<f64> = (-10..=30).map(|k| 2f64.powi(k)).collect();
    for _ in 0..rays {
        let w = random_unit(triple.dim(), &mut rng);
        let v = triple.values(&w);
        for &c in &[0.1, 1.0, 10.0] {
            for &a in &[0.1, 1.0] {
                let phi = |t: f64| {
                    v.n * t.powf(eta) / eta + a * v.a * t.powf(alpha) / alpha - v.b * t.powf(beta) / beta
                };
                let last_inside = grid.iter().rposition(|&t| phi(t) <= c);
                if matches!(last_inside, Some(k) if k + 8 >= grid.len()) {
                    return false;
                }
            }
        }
    }
    true
}

/// Sampled estimate of the constant `C` in `N(u) >= C^{-1} |u|^eta`:
/// the largest `1 / N(w)` over `samples` random unit vectors.
pub fn estimate_n_lower_constant(triple: &FunctionalTriple, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| 1.0 / triple.values(&random_unit(triple.dim(), &mut rng)).n)
        .fold(0.0, f64::max)
}

/// Uniform random point on the unit sphere.
pub fn random_unit(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        if let Some(u) = normalized(&g) {
            return u;
        }
    }
}

/// Exponent tuple of a variant, in the order used by its constructor.
pub fn variant_exponents(v: &ClassVariant) -> Vec<f64> {
    match *v {
        ClassVariant::TwoTermSuper { eta, beta } | ClassVariant::TwoTermSub { eta, beta } => vec![eta, beta],
        ClassVariant::ConcaveConvex { alpha, eta, beta } => vec![alpha, eta, beta],
        ClassVariant::SpLike { eta, beta, alpha } => vec![eta, beta, alpha],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;

    fn fd_grad(t: &FunctionalTriple, u: &[f64], pick: impl Fn(TermValues) -> f64) -> Vec<f64> {
        (0..u.len())
            .map(|i| {
                let h = 1e-6 * (1.0 + u[i].abs());
                let mut up = u.to_vec();
                let mut dn = u.to_vec();
                up[i] += h;
                dn[i] -= h;
                (pick(t.values(&up)) - pick(t.values(&dn))) / (2.0 * h)
            })
            .collect()
    }

    fn assert_grads_match(t: &FunctionalTriple, u: &[f64]) {
        let g = t.gradients(u);
        let pairs: [(&Vec<f64>, fn(TermValues) -> f64); 3] =
            [(&g.n, |v| v.n), (&g.a, |v| v.a), (&g.b, |v| v.b)];
        for (an, pick) in pairs {
            let fd = fd_grad(t, u, pick);
            let scale = an.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-12);
            for (x, y) in an.iter().zip(&fd) {
                assert!((x - y).abs() <= 1e-6 * scale, "analytic {x} vs fd {y}");
            }
        }
    }

    #[test]
    fn plap_class_rules() {
        assert_eq!(make_plap1d(2.0, 2.0, 4.0, 199).unwrap().class().name(), "two_term_super");
        assert_eq!(make_plap1d(2.0, 2.0, 1.5, 99).unwrap().class().name(), "two_term_sub");
        assert_eq!(make_plap1d(3.0, 2.0, 4.0, 99).unwrap().class().name(), "concave_convex");
        assert!(matches!(make_plap1d(2.0, 3.0, 4.0, 99), Err(Error::BadExponents(_))));
        assert!(make_plap1d(2.0, 2.0, 4.0, 2).is_err());
    }

    #[test]
    fn plap_gradients_and_euler() {
        let t = make_plap1d(3.0, 2.0, 4.0, 99).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let u = random_unit(99, &mut rng);
            assert!(t.euler_residuals(&u).max() <= 1e-10);
            assert_grads_match(&t, &u);
        }
        let sub = make_plap1d(2.0, 1.5, 3.0, 20).unwrap();
        let u: Vec<f64> = (0..20).map(|i| 0.3 + (i as f64 * 0.7).sin()).collect();
        assert_grads_match(&sub, &u);
    }

    #[test]
    fn plap_values_by_hand() {
        let t = make_plap1d(2.0, 2.0, 4.0, 3).unwrap();
        let v = t.values(&[1.0, 2.0, 1.0]);
        // Differences 1, 1, -1, -1 over h = 1/4.
        assert!((v.n - 4.0 / 0.25).abs() < 1e-12);
        assert!((v.a - 0.25 * 6.0).abs() < 1e-12);
        assert!((v.b - 0.25 * 18.0).abs() < 1e-12);
    }

    #[test]
    fn diag_axis_values() {
        let class = ClassTag::two_term(2.0, 4.0, BSign::Positive).unwrap();
        let t = make_diag(class, &[1.0, 4.0], &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        let e1 = t.values(&[1.0, 0.0]);
        let e2 = t.values(&[0.0, 1.0]);
        assert_eq!(e1.n / e1.a, 1.0);
        assert_eq!(e2.n / e2.a, 4.0);
        assert!(make_diag(class, &[1.0], &[1.0, 2.0], &[1.0]).is_err());
        assert!(make_diag(class, &[1.0], &[-1.0], &[1.0]).is_err());
    }

    #[test]
    fn diag_scaling_and_negative_b() {
        let class = ClassTag::two_term(2.0, 3.5, BSign::Negative).unwrap();
        let t = make_diag(class, &[1.0, 2.0, 3.0], &[2.0, 1.0, 1.0], &[1.0, 1.0, 0.5]).unwrap();
        let u = [0.3, -0.7, 0.2];
        let s = 1.7;
        let us: Vec<f64> = u.iter().map(|x| s * x).collect();
        let (v, vs) = (t.values(&u), t.values(&us));
        assert!(v.b < 0.0);
        assert!((vs.n - s.powf(2.0) * v.n).abs() < 1e-12);
        assert!((vs.b - s.powf(3.5) * v.b).abs() < 1e-12);
        assert_grads_match(&t, &u);
    }

    #[test]
    fn sp_surrogate_rules() {
        assert!(matches!(make_sp_surrogate(&[1.0], &[1.0], &[1.0], 3.0), Err(Error::BadExponents(_))));
        let t = make_sp_surrogate(&[1.0, 2.0], &[1.0, 2.0], &[1.0, 1.0], 2.5).unwrap();
        assert_eq!(t.flags().coercive, Some(true));
        assert_eq!(t.flags().a_power_of_n, Some(true));
        let u = [0.4, -1.1];
        let g = t.gradients(&u);
        assert!((dot(&g.a, &u) - 4.0 * t.values(&u).a).abs() < 1e-12);
        assert_grads_match(&t, &u);
    }

    #[test]
    fn n_lower_constant_is_positive() {
        let t = make_plap1d(2.0, 2.0, 4.0, 15).unwrap();
        let c = estimate_n_lower_constant(&t, 32, 1);
        assert!(c.is_finite() && c > 0.0);
    }
}
