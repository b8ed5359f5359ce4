//! Lévy area of sampled paths: dyadic triangle sums, the algebraic
//! composition rule, dyadic covers and the (p/2)-variation bound.
//!
//! Dyadic sums sample the path at dyadic times (right values). Polygon areas
//! follow the point skeleton, so a jump contributes its chord from the left
//! limit.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::levy::{sample_path_with, stream_rng, LevyModel, MeasureKind};
use crate::path::SamplePath;
use crate::tensor::{bivector_norm, bracket_into, dist_pow, sub};

#[derive(Clone, Debug, PartialEq)]
pub struct AreaMatrix {
    pub interval: (f64, f64),
    pub dim: usize,
    /// row-major antisymmetric `dim x dim`
    pub matrix: Vec<f64>,
    pub levels_used: usize,
}

impl AreaMatrix {
    pub fn zero(interval: (f64, f64), dim: usize) -> Self {
        AreaMatrix { interval, dim, matrix: vec![0.0; dim * dim], levels_used: 0 }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.dim + j]
    }

    pub fn norm(&self) -> f64 {
        bivector_norm(&self.matrix)
    }

    /// `max |A + Aᵀ|`
    pub fn asymmetry(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((self.matrix[i * d + j] + self.matrix[j * d + i]).abs());
            }
        }
        worst
    }
}

fn lookup(path: &SamplePath, t: f64, tol: f64) -> Result<usize> {
    path.index_of_time(t, tol)
        .ok_or_else(|| Error::InsufficientResolution(format!("time {t} is not on the path grid")))
}

/// Grid indices of the `2^levels + 1` dyadic points of `[s, t]`.
pub fn dyadic_indices(path: &SamplePath, s: f64, t: f64, levels: usize) -> Result<Vec<usize>> {
    if !(s < t) {
        return Err(Error::EmptyInterval(s, t));
    }
    if levels > 40 {
        return Err(Error::InsufficientResolution(format!("level {levels} too deep")));
    }
    let count = 1usize << levels;
    if count + 1 > path.len() {
        return Err(Error::InsufficientResolution(format!(
            "{count} subintervals but only {} grid points",
            path.len()
        )));
    }
    let h = (t - s) / count as f64;
    let tol = 1e-9 * h;
    (0..=count).map(|k| lookup(path, s + k as f64 * h, tol)).collect()
}

/// `A_{s,t}(n) = ½ Σ_k (X(u_k) - X(s)) ∧ (X(u_{k+1}) - X(u_k))` over the level-`n` dyadic points.
pub fn area_dyadic(path: &SamplePath, s: f64, t: f64, levels: usize) -> Result<AreaMatrix> {
    let idx = dyadic_indices(path, s, t, levels)?;
    let d = path.dim();
    let x0 = path.value(idx[0]);
    let mut m = vec![0.0; d * d];
    let mut rel = vec![0.0; d];
    let mut inc = vec![0.0; d];
    for w in idx.windows(2) {
        let (a, b) = (path.value(w[0]), path.value(w[1]));
        for k in 0..d {
            rel[k] = a[k] - x0[k];
            inc[k] = b[k] - a[k];
        }
        bracket_into(&mut m, 0.5, &rel, &inc);
    }
    Ok(AreaMatrix { interval: (s, t), dim: d, matrix: m, levels_used: levels })
}

/// `Σ_{k odd} U₁ ∧ U₂` over the triangles added at each level `m = 1..=levels`.
pub fn dyadic_triangles(path: &SamplePath, s: f64, t: f64, levels: usize) -> Result<Vec<Vec<f64>>> {
    let idx = dyadic_indices(path, s, t, levels)?;
    let d = path.dim();
    let count = 1usize << levels;
    let mut out = Vec::with_capacity(levels);
    for m in 1..=levels {
        let step = count >> m;
        let mut acc = vec![0.0; d * d];
        for k in (1..(1usize << m)).step_by(2) {
            let (a, c, b) = (idx[(k - 1) * step], idx[k * step], idx[(k + 1) * step]);
            let u1 = sub(path.value(c), path.value(a));
            let u2 = sub(path.value(b), path.value(c));
            bracket_into(&mut acc, 1.0, &u1, &u2);
        }
        out.push(acc);
    }
    Ok(out)
}

/// Signed polygon area along skeleton positions `from..=to`.
pub fn polygon_area(points: &[f64], dim: usize, from: usize, to: usize) -> Vec<f64> {
    let mut m = vec![0.0; dim * dim];
    let x0 = &points[from * dim..(from + 1) * dim];
    let mut rel = vec![0.0; dim];
    let mut inc = vec![0.0; dim];
    for k in from..to {
        for a in 0..dim {
            rel[a] = points[k * dim + a] - x0[a];
            inc[a] = points[(k + 1) * dim + a] - points[k * dim + a];
        }
        bracket_into(&mut m, 0.5, &rel, &inc);
    }
    m
}

/// Polygon area of the path between grid indices `i <= j`, including a jump at `j`.
pub fn area_between(path: &SamplePath, i: usize, j: usize) -> Result<AreaMatrix> {
    if i > j || j >= path.len() {
        return Err(Error::EmptyInterval(i as f64, j as f64));
    }
    let sk = path.skeleton();
    let m = polygon_area(&sk.values, sk.dim, sk.position[i], sk.position[j]);
    Ok(AreaMatrix { interval: (path.time(i), path.time(j)), dim: path.dim(), matrix: m, levels_used: 0 })
}

/// `A_{s,u} = A_{s,t} + A_{t,u} + ½[X_{s,t}, X_{t,u}]`
pub fn chen_compose(a_st: &AreaMatrix, a_tu: &AreaMatrix, x_st: &[f64], x_tu: &[f64]) -> Result<AreaMatrix> {
    let (t1, t2) = (a_st.interval.1, a_tu.interval.0);
    if (t1 - t2).abs() > 1e-12 * t1.abs().max(t2.abs()).max(1.0) {
        return Err(Error::NotAbutting(t1, t2));
    }
    if a_st.dim != a_tu.dim || x_st.len() != a_st.dim || x_tu.len() != a_st.dim {
        return Err(Error::Dimension("area/increment dimensions differ".into()));
    }
    let mut m: Vec<f64> = a_st.matrix.iter().zip(&a_tu.matrix).map(|(a, b)| a + b).collect();
    bracket_into(&mut m, 0.5, x_st, x_tu);
    Ok(AreaMatrix {
        interval: (a_st.interval.0, a_tu.interval.1),
        dim: a_st.dim,
        matrix: m,
        levels_used: a_st.levels_used.max(a_tu.levels_used),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DyadicCover {
    pub interval: (f64, f64),
    /// `(level, index)`: the piece `[index T 2^-level, (index+1) T 2^-level]`
    pub pieces: Vec<(usize, usize)>,
}

impl DyadicCover {
    pub fn bounds(&self, horizon: f64, level: usize, index: usize) -> (f64, f64) {
        let w = horizon / (1u64 << level) as f64;
        (index as f64 * w, (index + 1) as f64 * w)
    }
}

/// Greedy decomposition of `[u, v]` into maximal dyadic intervals of `[0, T]`
/// at resolution `T 2^-max_level`; endpoints are rounded to that grid.
pub fn dyadic_cover(u: f64, v: f64, horizon: f64, max_level: usize) -> Result<DyadicCover> {
    if !(0.0 <= u && u < v && v <= horizon * (1.0 + 1e-12)) {
        return Err(Error::EmptyInterval(u, v));
    }
    if max_level > 62 {
        return Err(Error::InsufficientResolution(format!("level {max_level} too deep")));
    }
    let cells = (1u64 << max_level) as f64;
    let (lo, hi) = ((u / horizon * cells).round() as u64, (v / horizon * cells).round() as u64);
    if lo >= hi {
        return Err(Error::InsufficientResolution(format!("[{u}, {v}] is below one grid cell")));
    }
    let mut pieces = Vec::new();
    let mut pos = lo;
    while pos < hi {
        let mut size_log = if pos == 0 { max_level as u32 } else { pos.trailing_zeros().min(max_level as u32) };
        while pos + (1u64 << size_log) > hi {
            size_log -= 1;
        }
        let level = max_level - size_log as usize;
        pieces.push((level, (pos >> size_log) as usize));
        pos += 1u64 << size_log;
    }
    Ok(DyadicCover { interval: (u, v), pieces })
}

/// `∫x₁²ν · ∫x₂²ν − (∫x₁x₂ν)²` over `|x| <= 1`.
pub fn area_c0(spec: &crate::levy::LevyMeasureSpec) -> Result<f64> {
    if spec.dim < 2 {
        return Err(Error::Dimension("area needs at least two dimensions".into()));
    }
    let m = spec.second_moments()?;
    let d = spec.dim;
    Ok((m[0] * m[d + 1] - m[1] * m[d]).max(0.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AreaBound {
    pub p: f64,
    pub gamma: f64,
    pub max_level: usize,
    pub c1: f64,
    pub c2: f64,
    /// per level `n = 1..=max_level`: `(n^γ Σ|A|^{p/2}, n^γ Σ|ΔX|^p)`
    pub per_level: Vec<(f64, f64)>,
    pub area_term: f64,
    pub increment_term: f64,
    pub bound: f64,
    /// best `Σ|A|^{p/2}` found over partitions of the dyadic grid
    pub lower: f64,
    pub lower_partition: Vec<usize>,
}

/// Areas of every dyadic interval by composing finest-level polygon areas.
pub struct DyadicAreas {
    pub dim: usize,
    pub max_level: usize,
    /// path values at the `2^max_level + 1` dyadic points
    pub points: Vec<f64>,
    /// `levels[n][k]`: area of the k-th level-n interval
    pub levels: Vec<Vec<Vec<f64>>>,
    /// prefix polygon areas from 0 to each dyadic point
    pub prefix: Vec<Vec<f64>>,
}

impl DyadicAreas {
    pub fn new(path: &SamplePath, max_level: usize) -> Result<Self> {
        let idx = dyadic_indices(path, 0.0, path.horizon(), max_level)?;
        let d = path.dim();
        let sk = path.skeleton();
        let points: Vec<f64> = idx.iter().flat_map(|&i| path.value(i).to_vec()).collect();
        let finest: Vec<Vec<f64>> = idx
            .windows(2)
            .map(|w| polygon_area(&sk.values, d, sk.position[w[0]], sk.position[w[1]]))
            .collect();
        let mut levels = vec![Vec::new(); max_level + 1];
        levels[max_level] = finest;
        for n in (0..max_level).rev() {
            let stride = 1usize << (max_level - n - 1);
            let below = &levels[n + 1];
            let composed = (0..(1usize << n))
                .map(|k| {
                    let (a, b) = (2 * k, 2 * k + 1);
                    let x = |j: usize| &points[j * d..(j + 1) * d];
                    let x_l = sub(x(b * stride), x(a * stride));
                    let x_r = sub(x((b + 1) * stride), x(b * stride));
                    let mut m: Vec<f64> = below[a].iter().zip(&below[b]).map(|(p, q)| p + q).collect();
                    bracket_into(&mut m, 0.5, &x_l, &x_r);
                    m
                })
                .collect();
            levels[n] = composed;
        }
        let mut prefix = Vec::with_capacity(idx.len());
        let mut acc = vec![0.0; d * d];
        prefix.push(acc.clone());
        for k in 0..idx.len() - 1 {
            let x0 = &points[..d];
            let rel = sub(&points[k * d..(k + 1) * d], x0);
            let inc = sub(&points[(k + 1) * d..(k + 2) * d], &points[k * d..(k + 1) * d]);
            for (a, v) in acc.iter_mut().zip(&levels[max_level][k]) {
                *a += v;
            }
            bracket_into(&mut acc, 0.5, &rel, &inc);
            prefix.push(acc.clone());
        }
        Ok(DyadicAreas { dim: d, max_level, points, levels, prefix })
    }

    fn x(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    /// Area between dyadic points `a < b` from prefix areas.
    pub fn between(&self, a: usize, b: usize) -> Vec<f64> {
        let x0a = sub(self.x(a), self.x(0));
        let xab = sub(self.x(b), self.x(a));
        let mut m: Vec<f64> = self.prefix[b].iter().zip(&self.prefix[a]).map(|(p, q)| p - q).collect();
        bracket_into(&mut m, -0.5, &x0a, &xab);
        m
    }
}

fn partition_area_sum(areas: &DyadicAreas, part: &[usize], q: f64) -> f64 {
    part.windows(2).map(|w| bivector_norm(&areas.between(w[0], w[1])).powf(q)).sum()
}

/// Simulated-annealing search for partitions maximising `Σ|A|^q`; moves
/// insert, delete or shift a single cut and are scored locally.
fn anneal(areas: &DyadicAreas, q: f64, proposals: usize, seed: u64) -> (f64, Vec<usize>) {
    let last = areas.points.len() / areas.dim - 1;
    let term = |a: usize, b: usize| bivector_norm(&areas.between(a, b)).powf(q);
    let mut best = (partition_area_sum(areas, &[0, last], q), vec![0, last]);
    for n in 1..=areas.max_level {
        let part: Vec<usize> = (0..=(1usize << n)).map(|k| k << (areas.max_level - n)).collect();
        let s = partition_area_sum(areas, &part, q);
        if s > best.0 {
            best = (s, part);
        }
    }
    if last < 2 {
        return best;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cuts: BTreeSet<usize> = best.1.iter().copied().collect();
    let mut cur = best.0;
    let temp0 = 0.05 * best.0.max(1e-300);
    let neighbours = |cuts: &BTreeSet<usize>, k: usize| {
        let a = *cuts.range(..k).next_back().unwrap();
        let b = *cuts.range(k + 1..).next().unwrap();
        (a, b)
    };
    for step in 0..proposals {
        let temp = temp0 * (1.0 - step as f64 / proposals as f64);
        let k = rng.random_range(1..last);
        let (remove, insert, delta) = if rng.random::<bool>() {
            let (a, b) = neighbours(&cuts, k);
            if cuts.contains(&k) {
                (Some(k), None, term(a, b) - term(a, k) - term(k, b))
            } else {
                (None, Some(k), term(a, k) + term(k, b) - term(a, b))
            }
        } else {
            // shift the first cut at or after k within its gap
            let Some(&j) = cuts.range(k..last).next() else { continue };
            let (a, b) = neighbours(&cuts, j);
            if b - a < 3 {
                continue;
            }
            let m = rng.random_range(a + 1..b);
            if m == j {
                continue;
            }
            (Some(j), Some(m), term(a, m) + term(m, b) - term(a, j) - term(j, b))
        };
        let accept = delta >= 0.0 || (temp > 0.0 && rng.random::<f64>() < (delta / temp).exp());
        if accept {
            if let Some(j) = remove {
                cuts.remove(&j);
            }
            if let Some(m) = insert {
                cuts.insert(m);
            }
            cur += delta;
            if cur > best.0 {
                let part: Vec<usize> = cuts.iter().copied().collect();
                // rescore to keep accumulated rounding out of the result
                best = (partition_area_sum(areas, &part, q), part);
                cur = best.0;
            }
        }
    }
    best
}

pub fn area_pvar_bound(path: &SamplePath, p: f64, gamma: f64, max_level: usize) -> Result<AreaBound> {
    area_pvar_bound_with(path, p, gamma, max_level, 10_000, 0)
}

pub fn area_pvar_bound_with(
    path: &SamplePath,
    p: f64,
    gamma: f64,
    max_level: usize,
    proposals: usize,
    seed: u64,
) -> Result<AreaBound> {
    if !(p > 2.0) {
        return Err(Error::InvalidExponent(p));
    }
    if !(gamma > p - 1.0) {
        return Err(Error::InvalidGamma { gamma, p });
    }
    let areas = DyadicAreas::new(path, max_level)?;
    let q = p / 2.0;
    let series = |e: f64| crate::special::zeta(e);
    let c1 = 2f64.powf(q - 1.0) * series(gamma / (q - 1.0)).powf(q - 1.0);
    let c2 = 2f64.powf(q - 2.0) * series(gamma / (p - 1.0)).powf(p - 1.0);
    let d = areas.dim;
    let per_level: Vec<(f64, f64)> = (1..=max_level)
        .map(|n| {
            let w = (n as f64).powf(gamma);
            let stride = 1usize << (max_level - n);
            let a: f64 = areas.levels[n].iter().map(|m| bivector_norm(m).powf(q)).sum();
            let x: f64 = (0..(1usize << n))
                .map(|k| dist_pow(&areas.points[k * stride * d..(k * stride + 1) * d], &areas.points[(k + 1) * stride * d..((k + 1) * stride + 1) * d], p))
                .sum();
            (w * a, w * x)
        })
        .collect();
    let area_term: f64 = per_level.iter().map(|l| l.0).sum();
    let increment_term: f64 = per_level.iter().map(|l| l.1).sum();
    let (lower, lower_partition) = anneal(&areas, q, proposals, seed);
    Ok(AreaBound {
        p,
        gamma,
        max_level,
        c1,
        c2,
        per_level,
        area_term,
        increment_term,
        bound: c1 * area_term + c2 * increment_term,
        lower,
        lower_partition,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AreaMomentReport {
    pub interval: (f64, f64),
    pub trials: usize,
    pub levels: usize,
    /// `E[A¹²]` estimate and standard error
    pub mean_area: f64,
    pub se_area: f64,
    /// `E[(A¹²)²]` estimate and standard error
    pub mean: f64,
    pub se: f64,
    /// determinant of the increment covariance per unit time in the (1,2) plane
    pub c0: f64,
    /// `C(ν)(t-s)^2` with `C(ν) = c0`; for purely Gaussian models the exact second moment
    pub bound: f64,
    /// exact second moment of the level-`n` sum, `c0 (t-s)^2 (1 - 2^-n) / 4`
    pub predicted: f64,
    pub pass: bool,
}

/// Monte Carlo check of `E[(A¹²_{s,t})²] <= C(ν)(t-s)²` on a model without
/// drift or jumps above 1.
pub fn area_moment_check(model: &LevyModel, s: f64, t: f64, trials: usize, seed: u64, levels: usize) -> Result<AreaMomentReport> {
    model.validate()?;
    if model.dim() < 2 {
        return Err(Error::Dimension("area needs at least two dimensions".into()));
    }
    if !(0.0 <= s && s < t) {
        return Err(Error::EmptyInterval(s, t));
    }
    if model.drift.iter().any(|&v| v != 0.0) {
        return Err(Error::InvalidModel("area moment check needs a driftless model".into()));
    }
    if trials < 2 {
        return Err(Error::InvalidParameter("need at least two trials".into()));
    }
    let d = model.dim();
    let m = model.measure.second_moments()?;
    let k11 = model.gaussian_cov[0] + m[0];
    let k22 = model.gaussian_cov[d + 1] + m[d + 1];
    let k12 = model.gaussian_cov[1] + m[1];
    let c0 = (k11 * k22 - k12 * k12).max(0.0);
    let pure_gaussian = matches!(model.measure.kind, MeasureKind::Zero);
    let h = (t - s) / (1usize << levels) as f64;
    let offset = s / h;
    if (offset - offset.round()).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("s = {s} is not a multiple of (t - s) 2^-{levels}")));
    }
    let n = (t / h).round() as usize + 1;
    let eps = 1e-9;
    let samples: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<(f64, f64)> {
            let mut rng = stream_rng(seed, trial as u64);
            let path = sample_path_with(model, t, n, eps, &mut rng)?;
            let v = area_dyadic(&path, s, t, levels)?.get(0, 1);
            Ok((v, v * v))
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_of = |f: &dyn Fn(&(f64, f64)) -> f64| {
        let m = samples.iter().map(f).sum::<f64>() / trials as f64;
        let var = samples.iter().map(|x| (f(x) - m).powi(2)).sum::<f64>() / (trials - 1) as f64;
        (m, (var / trials as f64).sqrt())
    };
    let (mean_area, se_area) = mean_of(&|x| x.0);
    let (mean, se) = mean_of(&|x| x.1);
    let span2 = (t - s).powi(2);
    let predicted = c0 * span2 * (1.0 - 0.5f64.powi(levels as i32)) / 4.0;
    let (bound, pass) = if pure_gaussian {
        (predicted, (mean - predicted).abs() <= 3.0 * se)
    } else {
        let b = c0 * span2;
        (b, mean <= b + 3.0 * se)
    };
    Ok(AreaMomentReport {
        interval: (s, t),
        trials,
        levels,
        mean_area,
        se_area,
        mean,
        se,
        c0,
        bound,
        predicted,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{JumpDist, LevyMeasureSpec};
    use proptest::prelude::*;

    fn grid_path(rows: &[[f64; 2]]) -> SamplePath {
        let n = rows.len();
        let times = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        SamplePath::from_rows(times, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn linear_path_has_no_area() {
        let rows: Vec<[f64; 2]> = (0..17).map(|i| [i as f64 * 0.3, -(i as f64) * 0.1]).collect();
        let p = grid_path(&rows);
        for n in 0..=4 {
            assert!(area_dyadic(&p, 0.0, 1.0, n).unwrap().norm() < 1e-14);
        }
    }

    #[test]
    fn unit_square_loop() {
        let p = grid_path(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]);
        let a = area_dyadic(&p, 0.0, 1.0, 2).unwrap();
        assert_eq!(a.get(0, 1), 1.0);
        assert_eq!(a.get(1, 0), -1.0);
        let rev = grid_path(&[[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0], [0.0, 0.0]]);
        assert_eq!(area_dyadic(&rev, 0.0, 1.0, 2).unwrap().get(0, 1), -1.0);
    }

    #[test]
    fn per_level_triangles_sum_to_total() {
        let rows: Vec<[f64; 2]> = (0..33).map(|i| [(i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()]).collect();
        let p = grid_path(&rows);
        let tri = dyadic_triangles(&p, 0.0, 1.0, 5).unwrap();
        for n in 1..=5 {
            let direct = area_dyadic(&p, 0.0, 1.0, n).unwrap();
            let summed: Vec<f64> = (0..4).map(|k| 0.5 * tri[..n].iter().map(|m| m[k]).sum::<f64>()).collect();
            for k in 0..4 {
                assert!((direct.matrix[k] - summed[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn insufficient_resolution_is_rejected() {
        let p = grid_path(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]);
        assert!(matches!(area_dyadic(&p, 0.0, 1.0, 2), Err(Error::InsufficientResolution(_))));
        let q = SamplePath::from_rows(vec![0.0, 0.3, 1.0], &[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(area_dyadic(&q, 0.0, 1.0, 1), Err(Error::InsufficientResolution(_))));
    }

    #[test]
    fn chen_identity_and_reversal() {
        let rows: Vec<[f64; 2]> = (0..9).map(|i| [(i as f64).sqrt(), (i as f64 * 0.9).sin()]).collect();
        let p = grid_path(&rows);
        let st = area_between(&p, 0, 3).unwrap();
        let tu = area_between(&p, 3, 8).unwrap();
        let su = area_between(&p, 0, 8).unwrap();
        let x = |a: usize, b: usize| sub(p.value(b), p.value(a));
        let c = chen_compose(&st, &tu, &x(0, 3), &x(3, 8)).unwrap();
        for k in 0..4 {
            assert!((c.matrix[k] - su.matrix[k]).abs() < 1e-12);
        }
        let zero = AreaMatrix::zero((p.time(8), p.time(8)), 2);
        assert_eq!(chen_compose(&su, &zero, &x(0, 8), &[0.0, 0.0]).unwrap().matrix, su.matrix);
        assert!(matches!(chen_compose(&st, &su, &x(0, 3), &x(0, 8)), Err(Error::NotAbutting(..))));
        // reversed traversal negates the area
        let rev: Vec<[f64; 2]> = rows.iter().rev().copied().collect();
        let r = area_between(&grid_path(&rev), 0, 8).unwrap();
        for k in 0..4 {
            assert!((r.matrix[k] + su.matrix[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn cover_examples() {
        let c = dyadic_cover(0.25, 0.5, 1.0, 10).unwrap();
        assert_eq!(c.pieces, vec![(2, 1)]);
        assert_eq!(dyadic_cover(0.0, 1.0, 1.0, 10).unwrap().pieces, vec![(0, 0)]);
        for k in 3..10 {
            let u = 0.25 - 0.5f64.powi(k);
            let c = dyadic_cover(u, 0.75, 1.0, 10).unwrap();
            let mut per = [0usize; 11];
            for (l, _) in &c.pieces {
                per[*l] += 1;
            }
            assert!(per.iter().all(|&n| n <= 2));
        }
        assert!(dyadic_cover(0.5, 0.5, 1.0, 4).is_err());
    }

    #[test]
    fn cover_areas_compose_to_direct() {
        let n = 65;
        let times: Vec<f64> = (0..n).map(|i| i as f64 / 64.0).collect();
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos() * i as f64 * 0.1]).collect();
        let p = SamplePath::from_rows(times, &rows).unwrap();
        let (u, v) = (5.0 / 64.0, 47.0 / 64.0);
        let cover = dyadic_cover(u, v, 1.0, 6).unwrap();
        let mut acc: Option<(AreaMatrix, Vec<f64>)> = None;
        for &(l, k) in &cover.pieces {
            let (a, b) = cover.bounds(1.0, l, k);
            let piece = area_dyadic(&p, a, b, 6 - l).unwrap();
            let (ia, ib) = (p.index_of_time(a, 1e-12).unwrap(), p.index_of_time(b, 1e-12).unwrap());
            let inc = sub(p.value(ib), p.value(ia));
            acc = Some(match acc {
                None => (piece, inc),
                Some((prev, pinc)) => {
                    let c = chen_compose(&prev, &piece, &pinc, &inc).unwrap();
                    let total: Vec<f64> = pinc.iter().zip(&inc).map(|(x, y)| x + y).collect();
                    (c, total)
                }
            });
        }
        let direct = area_between(&p, 5, 47).unwrap();
        let (composed, _) = acc.unwrap();
        for k in 0..4 {
            assert!((composed.matrix[k] - direct.matrix[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn c0_examples() {
        let product = LevyMeasureSpec {
            kind: MeasureKind::CompoundPoisson { rate: 2.0, jumps: JumpDist::UniformCube { half_width: 0.5 } },
            dim: 2,
        };
        let m2 = 2.0 * 0.25 / 3.0;
        assert!((area_c0(&product).unwrap() - m2 * m2).abs() < 1e-15);
        let diag = LevyMeasureSpec {
            kind: MeasureKind::CompoundPoisson {
                rate: 1.0,
                jumps: JumpDist::Segment { direction: vec![1.0, 1.0], half_length: 0.3 },
            },
            dim: 2,
        };
        assert!(area_c0(&diag).unwrap().abs() < 1e-15);
    }

    #[test]
    fn eta_c0_stable_under_refinement() {
        let eta = LevyMeasureSpec { kind: MeasureKind::EtaExample { m_max: 5 }, dim: 2 };
        let coarse = eta.second_moments_with_tol(1e-9).unwrap();
        let fine = eta.second_moments_with_tol(1e-12).unwrap();
        let c = |m: &[f64]| m[0] * m[3] - m[1] * m[2];
        assert!((c(&coarse) - c(&fine)).abs() <= 1e-6 * c(&fine));
        assert!((area_c0(&eta).unwrap() - c(&fine)).abs() <= 1e-6 * c(&fine));
    }

    #[test]
    fn bound_on_linear_path_is_increment_term() {
        let n = 257;
        let times: Vec<f64> = (0..n).map(|i| i as f64 / 256.0).collect();
        let rows: Vec<Vec<f64>> = times.iter().map(|t| vec![*t, -2.0 * t]).collect();
        let p = SamplePath::from_rows(times, &rows).unwrap();
        let b = area_pvar_bound_with(&p, 2.5, 2.0, 8, 200, 1).unwrap();
        assert!(b.area_term < 1e-20);
        assert!((b.bound - b.c2 * b.increment_term).abs() < 1e-12 * b.bound);
        assert!(b.lower <= b.bound);
        assert!(matches!(area_pvar_bound(&p, 2.5, 1.5, 8), Err(Error::InvalidGamma { .. })));
    }

    #[test]
    fn dyadic_table_matches_direct_polygons() {
        let rows: Vec<Vec<f64>> = (0..17).map(|i| vec![(i as f64 * 0.5).sin(), (i as f64 * 0.8).cos()]).collect();
        let times: Vec<f64> = (0..17).map(|i| i as f64 / 16.0).collect();
        let p = SamplePath::from_rows(times, &rows).unwrap();
        let areas = DyadicAreas::new(&p, 4).unwrap();
        for n in 0..=4 {
            let w = 1usize << (4 - n);
            for k in 0..(1usize << n) {
                let direct = area_between(&p, k * w, (k + 1) * w).unwrap();
                for e in 0..4 {
                    assert!((areas.levels[n][k][e] - direct.matrix[e]).abs() < 1e-12);
                }
            }
        }
        for (a, b) in [(0, 16), (3, 11), (5, 6)] {
            let direct = area_between(&p, a, b).unwrap();
            let via = areas.between(a, b);
            for e in 0..4 {
                assert!((via[e] - direct.matrix[e]).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn areas_antisymmetric(xs in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0), 9)) {
            let times: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
            let rows: Vec<Vec<f64>> = xs.iter().map(|x| vec![x.0, x.1, x.2]).collect();
            let p = SamplePath::from_rows(times, &rows).unwrap();
            for n in 0..=3 {
                prop_assert!(area_dyadic(&p, 0.0, 1.0, n).unwrap().asymmetry() < 1e-12);
            }
        }

        #[test]
        fn cover_tiles(a in 0u32..1024, b in 0u32..1024) {
            prop_assume!(a != b);
            let (u, v) = (a.min(b) as f64 / 1024.0, a.max(b) as f64 / 1024.0);
            let c = dyadic_cover(u, v, 1.0, 10).unwrap();
            let mut pos = u;
            let mut per = [0usize; 11];
            for &(l, k) in &c.pieces {
                let (s, t) = c.bounds(1.0, l, k);
                prop_assert!((s - pos).abs() < 1e-12);
                pos = t;
                per[l] += 1;
            }
            prop_assert!((pos - v).abs() < 1e-12);
            prop_assert!(per.iter().all(|&n| n <= 2));
        }
    }
}
