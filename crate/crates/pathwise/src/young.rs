//! Young integrals `∫ f dg` of discrete paths by left-point sums on dyadic
//! coarsenings of a shared grid.

use crate::error::{Error, Result};
use crate::path::SamplePath;
use crate::pvar::pvar_exact;
use crate::special::zeta;

#[derive(Clone, Debug, PartialEq)]
pub struct YoungEstimate {
    /// row-major `f.dim() x g.dim()`: entry `(i, j)` is `∫ f^i dg^j`
    pub value: Vec<f64>,
    /// `(mesh, partial value)`, coarsest first; the last entry is `value`
    pub mesh_levels: Vec<(f64, Vec<f64>)>,
    pub error_bound: f64,
}

/// `2^θ ζ(θ)` with `θ = 1/p + 1/q`.
pub fn young_loeve_constant(p: f64, q: f64) -> f64 {
    let theta = 1.0 / p + 1.0 / q;
    2f64.powf(theta) * zeta(theta)
}

/// Left-point sum over the listed grid indices.
pub fn left_point_sum(f: &SamplePath, g: &SamplePath, indices: &[usize]) -> Vec<f64> {
    let (nf, ng) = (f.dim(), g.dim());
    let mut acc = vec![0.0; nf * ng];
    for w in indices.windows(2) {
        let (a, b) = (w[0], w[1]);
        let fv = f.value(a);
        let (g0, g1) = (g.value(a), g.value(b));
        for i in 0..nf {
            for j in 0..ng {
                acc[i * ng + j] += fv[i] * (g1[j] - g0[j]);
            }
        }
    }
    acc
}

fn check(f: &SamplePath, g: &SamplePath, p: f64, q: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    if !(q >= 1.0) {
        return Err(Error::InvalidExponent(q));
    }
    let theta = 1.0 / p + 1.0 / q;
    if theta <= 1.0 {
        return Err(Error::YoungCondition(theta));
    }
    if f.times() != g.times() {
        return Err(Error::GridMismatch);
    }
    for (_, j) in f.chronological() {
        if g.jump_at(j.index).is_some() {
            return Err(Error::CommonDiscontinuity(f.time(j.index)));
        }
    }
    Ok(())
}

pub fn young_integral(f: &SamplePath, g: &SamplePath, p: f64, q: f64) -> Result<YoungEstimate> {
    check(f, g, p, q)?;
    let n = f.len();
    let h = if n > 1 { f.horizon() / (n - 1) as f64 } else { 0.0 };
    let mut strides = Vec::new();
    let mut s = 1usize;
    loop {
        strides.push(s);
        if s + 1 >= n {
            break;
        }
        s *= 2;
    }
    let mut mesh_levels = Vec::with_capacity(strides.len());
    for &s in strides.iter().rev() {
        let mut idx: Vec<usize> = (0..n).step_by(s).collect();
        if *idx.last().unwrap() != n - 1 {
            idx.push(n - 1);
        }
        mesh_levels.push((h * s as f64, left_point_sum(f, g, &idx)));
    }
    let value = mesh_levels.last().unwrap().1.clone();
    let error_bound = young_loeve_constant(p, q) * pvar_exact(f, p)?.value * pvar_exact(g, q)?.value;
    Ok(YoungEstimate { value, mesh_levels, error_bound })
}

/// `∫_{t_i}^{t_j} f dg` on the finest grid.
pub fn young_integral_between(f: &SamplePath, g: &SamplePath, i: usize, j: usize, p: f64, q: f64) -> Result<Vec<f64>> {
    check(f, g, p, q)?;
    if i > j || j >= f.len() {
        return Err(Error::EmptyInterval(i as f64, j as f64));
    }
    Ok(left_point_sum(f, g, &(i..=j).collect::<Vec<_>>()))
}
