//! Strong p-variation of discrete paths.
//!
//! The p-variation of a sampled path is the supremum over all partitions of
//! its own skeleton points (left limits included). A continuum path can have
//! strictly larger variation between samples; that gap is not estimated.

use crate::error::{Error, Result};
use crate::path::SamplePath;
use crate::tensor::dist_pow;

pub const BRUTE_MAX_POINTS: usize = 14;

#[derive(Clone, Debug, PartialEq)]
pub struct PVarResult {
    pub value: f64,
    /// Skeleton positions of the optimal partition, from 0 to the last point.
    pub witness_partition: Vec<usize>,
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// Sum of `|x_{k} - x_{k-1}|^p` along `partition`, accumulated left to right.
pub fn partition_sum(points: &[f64], dim: usize, partition: &[usize], p: f64) -> f64 {
    let pt = |k: usize| &points[k * dim..(k + 1) * dim];
    partition.windows(2).fold(0.0, |acc, w| acc + dist_pow(pt(w[0]), pt(w[1]), p))
}

/// DP over a flat point list. Returns `M` and the predecessor table.
pub(crate) fn pvar_dp(points: &[f64], dim: usize, p: f64) -> (Vec<f64>, Vec<usize>) {
    let n = points.len() / dim;
    let mut m = vec![0.0; n];
    let mut pred = vec![0; n];
    for j in 1..n {
        let xj = &points[j * dim..(j + 1) * dim];
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for i in 0..j {
            let cand = m[i] + dist_pow(&points[i * dim..(i + 1) * dim], xj, p);
            if cand > best {
                best = cand;
                arg = i;
            }
        }
        m[j] = best;
        pred[j] = arg;
    }
    (m, pred)
}

pub fn pvar_points(points: &[f64], dim: usize, p: f64) -> Result<PVarResult> {
    check_p(p)?;
    let n = points.len() / dim;
    if n == 0 {
        return Err(Error::InvalidPath("no points".into()));
    }
    let (m, pred) = pvar_dp(points, dim, p);
    let mut witness = vec![n - 1];
    let mut j = n - 1;
    while j > 0 {
        j = pred[j];
        witness.push(j);
    }
    witness.reverse();
    Ok(PVarResult { value: m[n - 1].powf(1.0 / p), witness_partition: witness })
}

/// Exact p-variation by dynamic programming, `O(n^2)` in the skeleton size.
pub fn pvar_exact(path: &SamplePath, p: f64) -> Result<PVarResult> {
    let sk = path.skeleton();
    pvar_points(&sk.values, sk.dim, p)
}

/// Exhaustive search over every partition containing both endpoints.
pub fn pvar_brute(path: &SamplePath, p: f64) -> Result<PVarResult> {
    check_p(p)?;
    let sk = path.skeleton();
    let n = sk.len();
    if n > BRUTE_MAX_POINTS {
        return Err(Error::OracleScale(n));
    }
    if n == 1 {
        return Ok(PVarResult { value: 0.0, witness_partition: vec![0] });
    }
    let interior = n - 2;
    let mut best = f64::NEG_INFINITY;
    let mut best_part = Vec::new();
    let mut part = Vec::with_capacity(n);
    for mask in 0u32..(1u32 << interior) {
        part.clear();
        part.push(0);
        part.extend((0..interior).filter(|b| mask & (1 << b) != 0).map(|b| b + 1));
        part.push(n - 1);
        let s = partition_sum(&sk.values, sk.dim, &part, p);
        if s > best {
            best = s;
            best_part.clone_from(&part);
        }
    }
    Ok(PVarResult { value: best.powf(1.0 / p), witness_partition: best_part })
}

/// `ω(s, t) = ‖x‖_{p,[s,t]}^p` over skeleton positions.
#[derive(Clone, Debug)]
pub struct ControlFunction {
    pub p: f64,
    dim: usize,
    times: Vec<f64>,
    points: Vec<f64>,
}

impl ControlFunction {
    pub fn from_points(times: Vec<f64>, dim: usize, points: Vec<f64>, p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(ControlFunction { p, dim, times, points })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    fn slice(&self, i: usize, j: usize) -> &[f64] {
        &self.points[i * self.dim..(j + 1) * self.dim]
    }

    pub fn omega(&self, i: usize, j: usize) -> f64 {
        if j <= i {
            return 0.0;
        }
        let (m, _) = pvar_dp(self.slice(i, j), self.dim, self.p);
        m[m.len() - 1]
    }

    /// `ω(i, j)` for every `j >= i` in one pass.
    pub fn row(&self, i: usize) -> Vec<f64> {
        pvar_dp(self.slice(i, self.len() - 1), self.dim, self.p).0
    }

    /// Greedy cut points on `[start, end]` keeping `scale^p ω <= 1` per piece
    /// (a single step is always admitted).
    pub fn partition(&self, start: usize, end: usize, scale: f64) -> Vec<usize> {
        let limit = scale.powf(-self.p);
        let mut cuts = vec![start];
        let mut s = start;
        let mut m: Vec<f64> = vec![0.0];
        let mut j = s + 1;
        while j <= end {
            let xj = &self.points[j * self.dim..(j + 1) * self.dim];
            let mj = (s..j)
                .map(|i| m[i - s] + dist_pow(&self.points[i * self.dim..(i + 1) * self.dim], xj, self.p))
                .fold(f64::NEG_INFINITY, f64::max);
            if mj > limit && j > s + 1 {
                s = j - 1;
                cuts.push(s);
                m.clear();
                m.push(0.0);
                j = s + 1;
                continue;
            }
            m.push(mj);
            j += 1;
        }
        if *cuts.last().unwrap() != end {
            cuts.push(end);
        }
        cuts
    }
}

pub fn pvar_control(path: &SamplePath, p: f64) -> Result<ControlFunction> {
    let sk = path.skeleton();
    ControlFunction::from_points(sk.times, sk.dim, sk.values, p)
}
