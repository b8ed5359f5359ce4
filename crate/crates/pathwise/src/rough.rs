//! Degree-2 multiplicative functionals, their control bounds, the
//! compensated rough integral of one-forms, and the area-corrected solver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::area::{polygon_area, DyadicAreas};
use crate::error::{Error, Result};
use crate::field::{OneForm, VectorField};
use crate::path::SamplePath;
use crate::pvar::ControlFunction;
use crate::solver::{check_setup, geometric_impl, skeleton_impl, DriverRef, Solution, SolutionKind, SolverOptions};
use crate::special::gamma;
use crate::tensor::{norm, outer, sub};

/// Chen residual allowed when importing a table of increments.
pub const CHEN_TOL: f64 = 1e-10;
const STABLE_ABS: f64 = 1e-9;
const STABLE_REL: f64 = 1e-7;

/// Level-1 and level-2 increments on a grid, stored as per-step data with
/// prefix sums so that any `(i, j)` increment is recovered by Chen's relation.
#[derive(Clone, Debug)]
pub struct MultiplicativeFunctional2 {
    dim: usize,
    p: f64,
    times: Vec<f64>,
    origin: Vec<f64>,
    step1: Vec<f64>,
    step2: Vec<f64>,
    prefix1: Vec<f64>,
    prefix2: Vec<f64>,
    control: ControlFunction,
    control_scale: f64,
}

impl MultiplicativeFunctional2 {
    /// `step1[k]`, `step2[k]` are the increments over `times[k]..times[k+1]`.
    /// The control defaults to the p-variation control of the level-1 points.
    pub fn from_steps(
        times: Vec<f64>,
        origin: Vec<f64>,
        step1: Vec<f64>,
        step2: Vec<f64>,
        p: f64,
        control: Option<ControlFunction>,
    ) -> Result<Self> {
        let d = origin.len();
        let n = times.len();
        if d == 0 || n == 0 || step1.len() != (n - 1) * d || step2.len() != (n - 1) * d * d {
            return Err(Error::Dimension(format!("{n} grid points do not match step data of dimension {d}")));
        }
        let mut prefix1 = vec![0.0; n * d];
        let mut prefix2 = vec![0.0; n * d * d];
        for k in 0..n - 1 {
            let (p1, rest1) = prefix1.split_at_mut((k + 1) * d);
            let prev1 = &p1[k * d..];
            let l1 = &step1[k * d..(k + 1) * d];
            let (p2, rest2) = prefix2.split_at_mut((k + 1) * d * d);
            let prev2 = &p2[k * d * d..];
            for a in 0..d {
                rest1[a] = prev1[a] + l1[a];
                for b in 0..d {
                    rest2[a * d + b] = prev2[a * d + b] + step2[(k * d + a) * d + b] + prev1[a] * l1[b];
                }
            }
        }
        let control = match control {
            Some(c) if c.len() == n => c,
            Some(c) => return Err(Error::Dimension(format!("control has {} points, grid has {n}", c.len()))),
            None => {
                let pts: Vec<f64> = (0..n * d).map(|k| origin[k % d] + prefix1[k]).collect();
                ControlFunction::from_points(times.clone(), d, pts, p)?
            }
        };
        Ok(MultiplicativeFunctional2 { dim: d, p, times, origin, step1, step2, prefix1, prefix2, control, control_scale: 1.0 })
    }

    /// Builds from a table of pair increments, keeping consecutive steps and
    /// rejecting the table if any pair disagrees with their Chen composition.
    pub fn from_table(
        times: Vec<f64>,
        origin: Vec<f64>,
        p: f64,
        table: impl Fn(usize, usize) -> (Vec<f64>, Vec<f64>),
    ) -> Result<Self> {
        let n = times.len();
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        for k in 0..n.saturating_sub(1) {
            let (a, b) = table(k, k + 1);
            s1.extend(a);
            s2.extend(b);
        }
        let mf = Self::from_steps(times, origin, s1, s2, p, None)?;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 2..n {
                let (a, b) = table(i, j);
                let (c, e) = mf.increment(i, j);
                worst = worst.max(norm(&sub(&a, &c))).max(norm(&sub(&b, &e)));
            }
        }
        if worst > CHEN_TOL {
            return Err(Error::NotMultiplicative(worst));
        }
        Ok(mf)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn control(&self) -> &ControlFunction {
        &self.control
    }

    /// Underlying path value at grid point `k`.
    pub fn point(&self, k: usize) -> Vec<f64> {
        (0..self.dim).map(|a| self.origin[a] + self.prefix1[k * self.dim + a]).collect()
    }

    pub fn step(&self, k: usize) -> (&[f64], &[f64]) {
        let d = self.dim;
        (&self.step1[k * d..(k + 1) * d], &self.step2[k * d * d..(k + 1) * d * d])
    }

    /// `(level1, level2)` over `times[i]..times[j]`.
    pub fn increment(&self, i: usize, j: usize) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim;
        let pi = &self.prefix1[i * d..(i + 1) * d];
        let l1 = sub(&self.prefix1[j * d..(j + 1) * d], pi);
        let mut l2 = sub(&self.prefix2[j * d * d..(j + 1) * d * d], &self.prefix2[i * d * d..(i + 1) * d * d]);
        for a in 0..d {
            for b in 0..d {
                l2[a * d + b] -= pi[a] * l1[b];
            }
        }
        (l1, l2)
    }

    /// Largest deviation from Chen's relation over `i <= j <= k`.
    pub fn chen_residual(&self, i: usize, j: usize, k: usize) -> f64 {
        let (a1, a2) = self.increment(i, j);
        let (b1, b2) = self.increment(j, k);
        let (c1, c2) = self.increment(i, k);
        let sum1: Vec<f64> = a1.iter().zip(&b1).map(|(x, y)| x + y).collect();
        let cross = outer(&a1, &b1);
        let sum2: Vec<f64> = (0..c2.len()).map(|q| a2[q] + b2[q] + cross[q]).collect();
        norm(&sub(&sum1, &c1)).max(norm(&sub(&sum2, &c2)))
    }

    /// `max |sym(level2) - ½ level1⊗level1|` over steps.
    pub fn geometric_residual(&self) -> f64 {
        let d = self.dim;
        (0..self.len() - 1)
            .map(|k| {
                let (l1, l2) = self.step(k);
                let mut worst = 0.0f64;
                for a in 0..d {
                    for b in 0..d {
                        let sym = 0.5 * (l2[a * d + b] + l2[b * d + a]);
                        worst = worst.max((sym - 0.5 * l1[a] * l1[b]).abs());
                    }
                }
                worst
            })
            .fold(0.0, f64::max)
    }

    /// Functional on `self` followed by `other`, whose grid is shifted to start
    /// at this horizon.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::Dimension("concatenating functionals of different dimension".into()));
        }
        let t0 = *self.times.last().unwrap();
        let mut times = self.times.clone();
        times.extend(other.times[1..].iter().map(|t| t + t0));
        let mut s1 = self.step1.clone();
        s1.extend_from_slice(&other.step1);
        let mut s2 = self.step2.clone();
        s2.extend_from_slice(&other.step2);
        Self::from_steps(times, self.origin.clone(), s1, s2, self.p, None)
    }

    /// Restriction to increasing grid indices.
    pub fn restrict(&self, indices: &[usize]) -> Result<Self> {
        let times = indices.iter().map(|&i| self.times[i] - self.times[indices[0]]).collect();
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        for w in indices.windows(2) {
            let (a, b) = self.increment(w[0], w[1]);
            s1.extend(a);
            s2.extend(b);
        }
        Self::from_steps(times, self.point(indices[0]), s1, s2, self.p, None)
    }

    /// Level 1 scaled by `phi`, level 2 by `phi²`; the control is kept.
    pub fn scaled(&self, phi: f64) -> Self {
        let mut out = self.clone();
        let s1: Vec<f64> = self.step1.iter().map(|v| phi * v).collect();
        let s2: Vec<f64> = self.step2.iter().map(|v| phi * phi * v).collect();
        let rebuilt = Self::from_steps(self.times.clone(), self.origin.clone(), s1, s2, self.p, Some(self.control.clone()))
            .expect("same shape");
        out.step1 = rebuilt.step1;
        out.step2 = rebuilt.step2;
        out.prefix1 = rebuilt.prefix1;
        out.prefix2 = rebuilt.prefix2;
        out
    }

    /// Uses `scale · ω` as the control.
    pub fn with_control_scale(mut self, scale: f64) -> Self {
        self.control_scale = scale;
        self
    }
}

/// Signature up to level 2 of a continuous piecewise-linear path.
pub fn signature2_linear(path: &SamplePath, p: f64) -> Result<MultiplicativeFunctional2> {
    if path.has_jumps() {
        return Err(Error::HasJumps);
    }
    let d = path.dim();
    let mut s1 = Vec::with_capacity((path.len() - 1) * d);
    let mut s2 = Vec::with_capacity((path.len() - 1) * d * d);
    for k in 0..path.len() - 1 {
        let dx = sub(path.value(k + 1), path.value(k));
        s2.extend(outer(&dx, &dx).into_iter().map(|v| 0.5 * v));
        s1.extend(dx);
    }
    MultiplicativeFunctional2::from_steps(path.times().to_vec(), path.value(0).to_vec(), s1, s2, p, None)
}

/// Geometric enhancement of a sampled path: each grid step carries
/// `½Δ⊗Δ` plus the polygon area through any left limit.
pub fn enhance(path: &SamplePath, p: f64) -> Result<MultiplicativeFunctional2> {
    let d = path.dim();
    let sk = path.skeleton();
    let mut s1 = Vec::with_capacity((path.len() - 1) * d);
    let mut s2 = Vec::with_capacity((path.len() - 1) * d * d);
    for k in 0..path.len() - 1 {
        let dx = sub(path.value(k + 1), path.value(k));
        let area = polygon_area(&sk.values, d, sk.position[k], sk.position[k + 1]);
        s2.extend(outer(&dx, &dx).iter().zip(&area).map(|(o, a)| 0.5 * o + a));
        s1.extend(dx);
    }
    MultiplicativeFunctional2::from_steps(path.times().to_vec(), path.value(0).to_vec(), s1, s2, p, None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level2Entry {
    pub level: usize,
    pub index: usize,
    pub level2: Vec<f64>,
}

/// Level-2 increments of every dyadic interval down to `max_level`.
pub fn dyadic_level2(path: &SamplePath, max_level: usize) -> Result<Vec<Level2Entry>> {
    let da = DyadicAreas::new(path, max_level)?;
    let d = path.dim();
    let mut out = Vec::new();
    for (level, areas) in da.levels.iter().enumerate() {
        let stride = 1usize << (max_level - level);
        for (index, area) in areas.iter().enumerate() {
            let dx = sub(&da.points[(index + 1) * stride * d..((index + 1) * stride + 1) * d], &da.points[index * stride * d..(index * stride + 1) * d]);
            let level2 = outer(&dx, &dx).iter().zip(area).map(|(o, a)| 0.5 * o + a).collect();
            out.push(Level2Entry { level, index, level2 });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PVarBoundReport {
    /// smallest `K` with `|X^(i)_{st}| <= K ω(s,t)^{i/p} / (i/p)!` on all pairs
    pub infimum: f64,
    /// `(i, j, level)` attaining the infimum
    pub worst: (usize, usize, usize),
    pub beta: f64,
    /// whether `beta >= infimum`
    pub holds: bool,
    pub pairs: usize,
}

pub fn check_pvar_bound(mf: &MultiplicativeFunctional2, beta: f64) -> PVarBoundReport {
    let n = mf.len();
    let p = mf.p;
    let g1 = gamma(1.0 / p + 1.0);
    let g2 = gamma(2.0 / p + 1.0);
    let scale = mf.control_scale;
    let rows: Vec<(f64, (usize, usize, usize))> = (0..n)
        .into_par_iter()
        .map(|i| {
            let omega = mf.control.row(i);
            let mut best = (0.0f64, (i, i, 1));
            for j in i + 1..n {
                let w = scale * omega[j - i];
                let (l1, l2) = mf.increment(i, j);
                for (level, size, g) in [(1usize, norm(&l1), g1), (2, norm(&l2), g2)] {
                    let ratio = if size == 0.0 { 0.0 } else { size * g / w.powf(level as f64 / p) };
                    if ratio > best.0 || ratio.is_nan() {
                        best = (if ratio.is_nan() { f64::INFINITY } else { ratio }, (i, j, level));
                    }
                }
            }
            best
        })
        .collect();
    let (infimum, worst) = rows.into_iter().fold((0.0, (0, 0, 1)), |acc, r| if r.0 > acc.0 { r } else { acc });
    PVarBoundReport { infimum, worst, beta, holds: beta >= infimum, pairs: n * (n - 1) / 2 }
}

/// `∫ θ(X) dX` over grid points `s..=t` as a functional on that grid.
///
/// Each step contributes `θ(X_u) X¹ + Dθ(X_u) : X²`; the total over `[s, t]`
/// must be stable under the last dyadic refinement of the grid.
pub fn rough_integral_deg2(theta: &dyn OneForm, x: &MultiplicativeFunctional2, s: usize, t: usize) -> Result<MultiplicativeFunctional2> {
    let d = x.dim;
    if theta.in_dim() != d {
        return Err(Error::Dimension(format!("one-form on R^{} applied to a functional in R^{d}", theta.in_dim())));
    }
    if s >= t || t >= x.len() {
        return Err(Error::EmptyInterval(s as f64, t as f64));
    }
    if !(x.p >= 1.0 && x.p < 3.0) {
        return Err(Error::InvalidExponent(x.p));
    }
    let e = theta.out_dim();
    let local = |i: usize, j: usize| -> (Vec<f64>, Vec<f64>) {
        let (l1, l2) = x.increment(i, j);
        let pt = x.point(i);
        let th = theta.value(&pt);
        let dth = theta.derivative(&pt);
        let mut z1 = vec![0.0; e];
        for (r, z) in z1.iter_mut().enumerate() {
            for a in 0..d {
                *z += th[r * d + a] * l1[a];
                for k in 0..d {
                    *z += dth[(r * d + a) * d + k] * l2[k * d + a];
                }
            }
        }
        // geometric level 2: symmetric part from z1, antisymmetric part pushed through θ
        let mut z2: Vec<f64> = outer(&z1, &z1).into_iter().map(|v| 0.5 * v).collect();
        for r in 0..e {
            for c in 0..e {
                let mut acc = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        acc += th[r * d + a] * th[c * d + b] * 0.5 * (l2[a * d + b] - l2[b * d + a]);
                    }
                }
                z2[r * e + c] += acc;
            }
        }
        (z1, z2)
    };
    let total = |stride: usize| -> Vec<f64> {
        let mut idx: Vec<usize> = (s..=t).step_by(stride).collect();
        if *idx.last().unwrap() != t {
            idx.push(t);
        }
        let mut acc = vec![0.0; e];
        for w in idx.windows(2) {
            for (a, v) in acc.iter_mut().zip(local(w[0], w[1]).0) {
                *a += v;
            }
        }
        acc
    };
    let span = t - s;
    if span > 1 {
        // the last refinement available on the grid must already be stable
        let (coarse, fine) = (total(2), total(1));
        let gap = norm(&sub(&fine, &coarse));
        if !(gap < STABLE_ABS || gap < STABLE_REL * norm(&fine)) {
            return Err(Error::DivergentRoughSum(gap));
        }
    }
    let mut s1 = Vec::with_capacity(span * e);
    let mut s2 = Vec::with_capacity(span * e * e);
    for k in s..t {
        let (a, b) = local(k, k + 1);
        s1.extend(a);
        s2.extend(b);
    }
    let times = x.times[s..=t].iter().map(|u| u - x.times[s]).collect();
    MultiplicativeFunctional2::from_steps(times, vec![0.0; e], s1, s2, x.p, None)
}

/// `g(x, y) = ∫₀¹ Df(y + θ(x - y)) dθ`, so that `f(x) - f(y) = g(x, y)(x - y)`.
/// Row-major with index `(i * d + a) * n + k`, matching the field Jacobian.
pub fn difference_form(field: &VectorField, x: &[f64], y: &[f64]) -> Vec<f64> {
    const PANELS: usize = 64;
    let dir = sub(x, y);
    let mut acc = vec![0.0; field.dim_state() * field.dim_driver() * field.dim_state()];
    let h = 1.0 / PANELS as f64;
    for k in 0..=2 * PANELS {
        let w = if k == 0 || k == 2 * PANELS { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        let s = k as f64 * 0.5 * h;
        let pt: Vec<f64> = y.iter().zip(&dir).map(|(a, b)| a + s * b).collect();
        for (a, v) in acc.iter_mut().zip(field.jacobian(&pt)) {
            *a += w * h / 6.0 * v;
        }
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoughOptions {
    /// keep every `stride`-th driver point (plus jump times and the end)
    pub stride: usize,
    /// drop the area correction (degeneracy check)
    pub zero_area: bool,
    /// grid points used for the factorial-bound constant
    pub beta_points: usize,
    pub solver: SolverOptions,
}

impl Default for RoughOptions {
    fn default() -> Self {
        RoughOptions { stride: 16, zero_area: false, beta_points: 257, solver: SolverOptions::default() }
    }
}

/// Coarse driver and, per coarse step, the polygon area from the right value
/// at the step start to the left limit at its end.
pub fn coarsen(driver: &SamplePath, stride: usize) -> Result<(SamplePath, Vec<f64>)> {
    if stride == 0 {
        return Err(Error::InvalidParameter("stride must be positive".into()));
    }
    let n = driver.len();
    let mut keep = vec![false; n];
    for i in (0..n).step_by(stride) {
        keep[i] = true;
    }
    keep[n - 1] = true;
    for (_, j) in driver.chronological() {
        keep[j.index] = true;
    }
    let idx: Vec<usize> = (0..n).filter(|&i| keep[i]).collect();
    let coarse = driver.subsample(&idx)?;
    let sk = driver.skeleton();
    let d = driver.dim();
    let areas = idx
        .windows(2)
        .flat_map(|w| {
            let end = sk.position[w[1]] - usize::from(driver.jump_at(w[1]).is_some());
            polygon_area(&sk.values, d, sk.position[w[0]], end)
        })
        .collect();
    Ok((coarse, areas))
}

fn rough_setup(field: &VectorField, driver: &SamplePath, a: &[f64], p: f64, opts: &RoughOptions) -> Result<(SamplePath, Vec<f64>, DriverRef)> {
    check_setup(field, driver, a, p)?;
    if !(2.0..3.0).contains(&p) {
        return Err(Error::InvalidExponent(p));
    }
    let (coarse, mut areas) = coarsen(driver, opts.stride)?;
    if opts.zero_area {
        areas.fill(0.0);
    }
    let m = coarse.len();
    let step = m.div_ceil(opts.beta_points.max(2) - 1).max(1);
    let mut idx: Vec<usize> = (0..m).step_by(step).collect();
    if *idx.last().unwrap() != m - 1 {
        idx.push(m - 1);
    }
    let k = check_pvar_bound(&enhance(&coarse, p)?.restrict(&idx)?, 0.0).infimum;
    let driver_ref = DriverRef {
        truncation_radius: field.truncation_radius(),
        beta: Some(2.0 * k),
        stride: Some(opts.stride),
        ..Default::default()
    };
    Ok((coarse, areas, driver_ref))
}

/// Geometric solution for `2 <= p < 3`, reported on the coarse driver grid.
pub fn solve_geometric_rough(field: &VectorField, driver: &SamplePath, a: &[f64], p: f64, delta: f64) -> Result<Solution> {
    solve_geometric_rough_with(field, driver, a, p, delta, &RoughOptions::default())
}

pub fn solve_geometric_rough_with(
    field: &VectorField,
    driver: &SamplePath,
    a: &[f64],
    p: f64,
    delta: f64,
    opts: &RoughOptions,
) -> Result<Solution> {
    let (coarse, areas, driver_ref) = rough_setup(field, driver, a, p, opts)?;
    let mut sol = geometric_impl(field, &coarse, a, p, delta, Some(&areas), opts.solver)?;
    sol.driver_ref = DriverRef { delta: Some(delta), ..driver_ref };
    Ok(sol)
}

/// Forward counterpart: every jump applied as `f(Y_{t-}) Δx`.
pub fn solve_forward_rough(field: &VectorField, driver: &SamplePath, a: &[f64], p: f64) -> Result<Solution> {
    solve_forward_rough_with(field, driver, a, p, &RoughOptions::default())
}

pub fn solve_forward_rough_with(field: &VectorField, driver: &SamplePath, a: &[f64], p: f64, opts: &RoughOptions) -> Result<Solution> {
    let (coarse, areas, driver_ref) = rough_setup(field, driver, a, p, opts)?;
    let (path, picard_iterations, residual) = skeleton_impl(field, &coarse, a, p, Some(&areas), |_| true, opts.solver)?;
    Ok(Solution { path, kind: SolutionKind::Forward, driver_ref, picard_iterations, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::AffineForm;
    use crate::levy::{sample_path, LevyModel};
    use crate::solver::solve_geometric;
    use crate::tensor::sup_dist;

    fn square() -> SamplePath {
        let rows = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![0.0, 0.0]];
        SamplePath::from_rows((0..5).map(|i| i as f64).collect(), &rows).unwrap()
    }

    fn smooth(n: usize) -> SamplePath {
        let times: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let rows: Vec<Vec<f64>> = times.iter().map(|t| vec![(2.0 * t).sin(), t * t - 0.5 * t]).collect();
        SamplePath::from_rows(times, &rows).unwrap()
    }

    #[test]
    fn single_segment_and_square_loop() {
        let seg = SamplePath::from_rows(vec![0.0, 1.0], &[vec![0.0, 0.0], vec![2.0, -1.0]]).unwrap();
        let (l1, l2) = signature2_linear(&seg, 2.5).unwrap().increment(0, 1);
        assert_eq!(l1, vec![2.0, -1.0]);
        assert_eq!(l2, vec![2.0, -1.0, -1.0, 0.5]);
        let sq = signature2_linear(&square(), 2.5).unwrap();
        let (l1, l2) = sq.increment(0, 4);
        assert!(norm(&l1) < 1e-15);
        assert!((0.5 * (l2[1] - l2[2]) - 1.0).abs() < 1e-14);
        assert!((l2[0]).abs() < 1e-14 && l2[3].abs() < 1e-14);
        assert!(sq.chen_residual(0, 2, 4) < 1e-14);
    }

    #[test]
    fn rejects_jumps_and_bad_tables() {
        let j = SamplePath::new(vec![0.0, 1.0], 1, vec![0.0, 1.0], vec![(1, vec![0.5])]).unwrap();
        assert!(matches!(signature2_linear(&j, 2.5), Err(Error::HasJumps)));
        let bad = MultiplicativeFunctional2::from_table(vec![0.0, 1.0, 2.0], vec![0.0], 2.5, |i, j| {
            let dx = (j - i) as f64;
            (vec![dx], vec![0.5 * dx * dx + if j - i == 2 { 0.1 } else { 0.0 }])
        });
        assert!(matches!(bad, Err(Error::NotMultiplicative(_))));
        let good = MultiplicativeFunctional2::from_table(vec![0.0, 1.0, 2.0], vec![0.0], 2.5, |i, j| {
            let dx = (j - i) as f64;
            (vec![dx], vec![0.5 * dx * dx])
        });
        assert!(good.is_ok());
    }

    #[test]
    fn reversal_composes_to_identity() {
        let x = smooth(65);
        let fwd = signature2_linear(&x, 2.5).unwrap();
        let back = signature2_linear(&crate::solver::reversed(&x).unwrap(), 2.5).unwrap();
        let both = fwd.concat(&back).unwrap();
        let (l1, l2) = both.increment(0, both.len() - 1);
        assert!(norm(&l1) < 1e-12 && norm(&l2) < 1e-12);
    }

    #[test]
    fn concat_is_associative() {
        let x = signature2_linear(&smooth(9), 2.5).unwrap();
        let y = signature2_linear(&square(), 2.5).unwrap();
        let z = signature2_linear(&smooth(5), 2.5).unwrap();
        let left = x.concat(&y).unwrap().concat(&z).unwrap();
        let right = x.concat(&y.concat(&z).unwrap()).unwrap();
        let n = left.len() - 1;
        let (a1, a2) = left.increment(0, n);
        let (b1, b2) = right.increment(0, n);
        assert!(sup_dist(&a1, &b1) < 1e-12 && sup_dist(&a2, &b2) < 1e-12);
    }

    #[test]
    fn bound_report() {
        let zero = SamplePath::from_rows(vec![0.0, 1.0, 2.0], &[vec![0.0], vec![0.0], vec![0.0]]).unwrap();
        assert_eq!(check_pvar_bound(&signature2_linear(&zero, 2.5).unwrap(), 1.0).infimum, 0.0);
        // on a line the ratios do not depend on the grid
        let line = |n: usize| {
            let t: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            SamplePath::scalar(t.clone(), t.iter().map(|s| 3.0 * s).collect()).unwrap()
        };
        let a = check_pvar_bound(&signature2_linear(&line(9), 2.5).unwrap(), 1.0).infimum;
        let b = check_pvar_bound(&signature2_linear(&line(33), 2.5).unwrap(), 1.0).infimum;
        assert!((a - b).abs() < 0.1 * a);
        assert!((a - gamma(1.4)).abs() < 1e-12);
    }

    #[test]
    fn rescaling_moves_control() {
        let x = sample_path(&LevyModel::brownian(2), 1.0, 129, 1e-9, 3).unwrap();
        let mf = enhance(&x, 2.5).unwrap();
        assert!(mf.geometric_residual() < 1e-14);
        let k = 4.0;
        let controlled = check_pvar_bound(&mf.clone().with_control_scale(k), 0.0).infimum;
        let phi = k.powf(-2.0 / 2.5);
        let scaled = check_pvar_bound(&mf.scaled(phi), 0.0).infimum;
        assert!(scaled <= controlled * (1.0 + 1e-12));
    }

    #[test]
    fn integral_oracles() {
        let x = smooth(257);
        let mf = signature2_linear(&x, 2.5).unwrap();
        let c = AffineForm::constant(1, 2, vec![2.0, -1.0]);
        let z = rough_integral_deg2(&c, &mf, 0, 256).unwrap();
        let (l1, _) = mf.increment(0, 256);
        assert!((z.increment(0, 256).0[0] - (2.0 * l1[0] - l1[1])).abs() < 1e-14);
        // θ(x) = x on the first coordinate
        let id = AffineForm::linear(1, 2, |i, a, k| if i == 0 && a == 0 && k == 0 { 1.0 } else { 0.0 });
        let z = rough_integral_deg2(&id, &mf, 10, 200).unwrap();
        let exact = 0.5 * (x.value(200)[0].powi(2) - x.value(10)[0].powi(2));
        assert!((z.increment(0, 190).0[0] - exact).abs() < 1e-8);
        assert!(check_pvar_bound(&z, 0.0).infimum.is_finite());
    }

    #[test]
    fn product_rule_on_brownian() {
        let x = sample_path(&LevyModel::brownian(2), 1.0, 1025, 1e-9, 11).unwrap();
        let mf = enhance(&x, 2.5).unwrap();
        // θ(x) = (x2, x1): ∫ x2 dx1 + x1 dx2
        let form = AffineForm::linear(1, 2, |i, a, k| if i == 0 && a != k { 1.0 } else { 0.0 });
        let z = rough_integral_deg2(&form, &mf, 0, 1024).unwrap();
        let prod = |k: usize| x.value(k)[0] * x.value(k)[1];
        assert!((z.increment(0, 1024).0[0] - (prod(1024) - prod(0))).abs() < 1e-10);
        // additivity over abutting pieces
        let left = rough_integral_deg2(&form, &mf, 0, 300).unwrap();
        let right = rough_integral_deg2(&form, &mf, 300, 1024).unwrap();
        let sum = left.increment(0, 300).0[0] + right.increment(0, 724).0[0];
        assert!((sum - z.increment(0, 1024).0[0]).abs() < 1e-10);
    }

    #[test]
    fn nonlinear_form_on_rough_data_diverges() {
        let x = sample_path(&LevyModel::brownian(2), 1.0, 257, 1e-9, 5).unwrap();
        let mf = enhance(&x, 2.5).unwrap();
        let f = VectorField::rotation(2, 0.3).unwrap();
        let res = rough_integral_deg2(&f, &mf, 0, 256);
        assert!(matches!(res, Err(Error::DivergentRoughSum(_))), "{:?}", res.map(|z| z.increment(0, 256)));
    }

    #[test]
    fn difference_form_identity() {
        let f = VectorField::rotation(2, 1.0).unwrap();
        let (x, y) = ([0.4, 0.7], [-0.2, 0.9]);
        let g = difference_form(&f, &x, &y);
        let (fx, fy) = (f.eval(&x), f.eval(&y));
        for i in 0..2 {
            for a in 0..2 {
                let lin: f64 = (0..2).map(|k| g[(i * 2 + a) * 2 + k] * (x[k] - y[k])).sum();
                assert!((fx[i * 2 + a] - fy[i * 2 + a] - lin).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_area_matches_young_on_coarse_driver() {
        let f = VectorField::rotation(2, 10.0).unwrap();
        let x = smooth(513);
        let opts = RoughOptions { zero_area: true, ..Default::default() };
        let r = solve_geometric_rough_with(&f, &x, &[1.0, 0.0], 2.5, 1.0, &opts).unwrap();
        let (coarse, _) = coarsen(&x, opts.stride).unwrap();
        let y = solve_geometric(&f, &coarse, &[1.0, 0.0], 1.5, 1.0).unwrap();
        assert!(sup_dist(r.path.values(), y.path.values()) < 1e-6);
    }

    #[test]
    fn constant_field_ignores_area() {
        let f = VectorField::constant(vec![vec![1.0, 2.0]]).unwrap();
        let x = sample_path(&LevyModel::brownian(2), 1.0, 257, 1e-9, 8).unwrap();
        let sol = solve_geometric_rough(&f, &x, &[0.5], 2.5, 1.0).unwrap();
        let end = x.value(x.len() - 1);
        assert!((sol.path.value(sol.path.len() - 1)[0] - (0.5 + end[0] + 2.0 * end[1])).abs() < 1e-12);
        assert!(sol.driver_ref.beta.unwrap().is_finite());
    }

    #[test]
    fn area_correction_matches_fine_solution() {
        // the coarse area scheme should track the fine-grid polygon solution better
        // than the same coarse scheme without areas
        let f = VectorField::linear_truncated(vec![vec![vec![0.0, 1.0], vec![0.0, 0.0]], vec![vec![0.0, 0.0], vec![1.0, 0.0]]], 100.0).unwrap();
        let mut with = 0.0;
        let mut without = 0.0;
        for seed in 0..8 {
            let x = sample_path(&LevyModel::brownian(2), 1.0, 4097, 1e-9, seed).unwrap();
            let fine = solve_geometric(&f, &x, &[1.0, 0.5], 1.5, 1.0).unwrap();
            let target = fine.path.value(x.len() - 1);
            let opts = RoughOptions { stride: 64, ..Default::default() };
            let r = solve_geometric_rough_with(&f, &x, &[1.0, 0.5], 2.5, 1.0, &opts).unwrap();
            let z = solve_geometric_rough_with(&f, &x, &[1.0, 0.5], 2.5, 1.0, &RoughOptions { zero_area: true, ..opts }).unwrap();
            with += norm(&sub(r.path.value(r.path.len() - 1), target));
            without += norm(&sub(z.path.value(z.path.len() - 1), target));
        }
        assert!(with < 0.5 * without, "with {with} without {without}");
    }

    #[test]
    fn coarse_jumps_follow_the_flow() {
        let f = VectorField::scalar_linear(100.0);
        let times: Vec<f64> = (0..5).map(|i| i as f64 * 0.25).collect();
        let x = SamplePath::new(times, 1, vec![0.0, 0.1, 0.6, 0.5, 0.4], vec![(2, vec![0.2])]).unwrap();
        let sol = solve_geometric_rough_with(&f, &x, &[1.0], 2.5, 1.0, &RoughOptions { stride: 4, ..Default::default() }).unwrap();
        assert_eq!(sol.path.len(), 3);
        let j = sol.path.jump_at(1).unwrap();
        assert!((j.right[0] - j.left[0] * 0.4f64.exp()).abs() < 1e-10);
    }
}
