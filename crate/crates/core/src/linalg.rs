//! Small dense vector helpers.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += s * x`
pub fn axpy(s: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn scale(s: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= s;
    }
}

/// Returns `x / |x|`, or `None` for a zero or non-finite vector.
pub fn normalized(x: &[f64]) -> Option<Vec<f64>> {
    let n = norm(x);
    if !(n > 0.0) || !n.is_finite() {
        return None;
    }
    Some(x.iter().map(|v| v / n).collect())
}

/// Removes the component of `v` along the unit vector `u`.
pub fn project_out(u: &[f64], v: &mut [f64]) {
    let s = dot(u, v);
    axpy(-s, u, v);
}

/// `|x|^p` with fast paths for the common integer exponents.
#[inline]
pub fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 2.0 {
        a * a
    } else if p == 3.0 {
        a * a * a
    } else if p == 4.0 {
        let s = a * a;
        s * s
    } else if a == 0.0 {
        0.0
    } else {
        a.powf(p)
    }
}

/// `sign(x) |x|^{p-1}`, the derivative of `|x|^p / p`.
#[inline]
pub fn signed_pow(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x
    } else if x == 0.0 {
        0.0
    } else {
        x.signum() * abs_pow(x, p - 1.0)
    }
}

/// Orthonormalizes the columns in place by two passes of modified
/// Gram-Schmidt. Returns `false` if a column becomes numerically dependent.
pub fn orthonormalize(cols: &mut [Vec<f64>]) -> bool {
    for j in 0..cols.len() {
        for _pass in 0..2 {
            for i in 0..j {
                let (head, tail) = cols.split_at_mut(j);
                let s = dot(&head[i], &tail[0]);
                axpy(-s, &head[i], &mut tail[0]);
            }
        }
        let n = norm(&cols[j]);
        if !(n > 1e-300) || !n.is_finite() {
            return false;
        }
        scale(1.0 / n, &mut cols[j]);
    }
    true
}

/// Combination `sum_j y_j * cols[j]`.
pub fn combine(cols: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; cols.first().map_or(0, Vec::len)];
    for (c, &w) in cols.iter().zip(y) {
        axpy(w, c, &mut out);
    }
    out
}

/// Number of sign changes in `u`, ignoring entries below `1e-12 * max|u|`.
pub fn sign_changes(u: &[f64]) -> usize {
    let floor = 1e-12 * u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut last = 0.0f64;
    let mut count = 0;
    for &v in u {
        if v.abs() <= floor {
            continue;
        }
        if last != 0.0 && v.signum() != last {
            count += 1;
        }
        last = v.signum();
    }
    count
}
