//! Small dense helpers over row-major `f64` slices.

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `|a - b|^p` evaluated as `exp(p/2 * ln |a - b|^2)`, zero for equal points.
#[inline]
pub fn dist_pow(a: &[f64], b: &[f64], p: f64) -> f64 {
    let d2 = dist2(a, b);
    if d2 == 0.0 {
        0.0
    } else {
        (0.5 * p * d2.ln()).exp()
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add_into(acc: &mut [f64], x: &[f64]) {
    for (a, v) in acc.iter_mut().zip(x) {
        *a += v;
    }
}

pub fn axpy(acc: &mut [f64], s: f64, x: &[f64]) {
    for (a, v) in acc.iter_mut().zip(x) {
        *a += s * v;
    }
}

pub fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `a ⊗ b` as a row-major `a.len() x b.len()` matrix.
pub fn outer(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut m = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            m.push(x * y);
        }
    }
    m
}

/// `a ⊗ b - b ⊗ a`.
pub fn bracket(a: &[f64], b: &[f64]) -> Vec<f64> {
    let d = a.len();
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            m[i * d + j] = a[i] * b[j] - a[j] * b[i];
        }
    }
    m
}

/// Adds `s * (a ⊗ b - b ⊗ a)` into `acc`.
pub fn bracket_into(acc: &mut [f64], s: f64, a: &[f64], b: &[f64]) {
    let d = a.len();
    for i in 0..d {
        for j in 0..d {
            acc[i * d + j] += s * (a[i] * b[j] - a[j] * b[i]);
        }
    }
}

/// Norm of an antisymmetric matrix seen as a bivector: `|A^{12}|` in the plane,
/// and `|a ∧ b| <= |a| |b|` in general.
pub fn bivector_norm(m: &[f64]) -> f64 {
    norm(m) / std::f64::consts::SQRT_2
}

/// `m x` for row-major `m` with `x.len()` columns.
pub fn matvec(m: &[f64], x: &[f64]) -> Vec<f64> {
    m.chunks(x.len()).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub fn transpose(m: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut t = vec![0.0; m.len()];
    for i in 0..rows {
        for j in 0..cols {
            t[j * rows + i] = m[i * cols + j];
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dist_pow_matches_powf() {
        let a = [0.3, -1.2];
        let b = [1.0, 0.5];
        let d = norm(&sub(&a, &b));
        assert!((dist_pow(&a, &b, 2.7) - d.powf(2.7)).abs() < 1e-14);
        assert_eq!(dist_pow(&a, &a, 1.5), 0.0);
    }

    #[test]
    fn bracket_is_antisymmetric_and_bounded() {
        let a = [1.0, 2.0, -0.5];
        let b = [0.2, -1.0, 3.0];
        let m = bracket(&a, &b);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m[i * 3 + j], -m[j * 3 + i]);
            }
        }
        assert!(bivector_norm(&m) <= norm(&a) * norm(&b) + 1e-12);
    }
}
