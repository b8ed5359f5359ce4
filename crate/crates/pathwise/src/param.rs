//! Fictitious-time parametrisation: every registered jump becomes a straight
//! segment of duration `δ |Δx|^p`, giving a continuous path on a longer horizon.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::SamplePath;
use crate::tensor::norm;

/// Upper bound on points per fictitious segment, so huge `δ` stays tractable.
pub const MAX_SEGMENT_POINTS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub ext_start: f64,
    pub ext_end: f64,
    /// `δ |Δx|^p`, exact rather than `ext_end - ext_start`
    pub length: f64,
    /// position in the jump registry
    pub jump: usize,
    /// index of the jump in the original path
    pub index: usize,
    /// extended-path indices of the segment endpoints
    pub ext_first: usize,
    pub ext_last: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parametrisation {
    pub delta: f64,
    pub p: f64,
    /// `(t, τ(t))` for every original grid time
    pub tau: Vec<(f64, f64)>,
    pub segments: Vec<Segment>,
    /// extended-path index of each original index
    pub ext_index: Vec<usize>,
    pub ext_len: usize,
}

impl Parametrisation {
    pub fn horizon(&self) -> f64 {
        self.tau.last().map(|t| t.0).unwrap_or(0.0)
    }

    pub fn ext_horizon(&self) -> f64 {
        self.tau.last().map(|t| t.1).unwrap_or(0.0)
    }

    /// `δ Σ |Δx|^p`
    pub fn fictitious_time(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    /// The segment covering extended-path step `k -> k+1`, if any.
    pub fn segment_of_step(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.ext_len.saturating_sub(1)];
        for (n, s) in self.segments.iter().enumerate() {
            for slot in &mut out[s.ext_first..s.ext_last] {
                *slot = Some(n);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("parametrisation serialises")
    }
}

pub fn parametrise(path: &SamplePath, delta: f64, p: f64) -> Result<(SamplePath, Parametrisation)> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidDelta(delta));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    let n = path.len();
    let d = path.dim();
    let h = if n > 1 { path.horizon() / (n - 1) as f64 } else { 1.0 };
    let mut times = Vec::with_capacity(n + 2 * path.jumps().len());
    let mut values = Vec::with_capacity(times.capacity() * d);
    let mut tau = Vec::with_capacity(n);
    let mut ext_index = Vec::with_capacity(n);
    let mut segments = Vec::new();
    let mut offset = 0.0;
    let mut chrono = path.chronological().peekable();
    for i in 0..n {
        let t = path.time(i);
        if let Some((pos, jump)) = chrono.next_if(|(_, j)| j.index == i) {
            let size = jump.size();
            let length = delta * norm(&size).powf(p);
            let start = t + offset;
            let count = ((length / h).ceil() as usize).clamp(2, MAX_SEGMENT_POINTS);
            let first = times.len();
            times.push(start);
            values.extend_from_slice(&jump.left);
            for k in 1..count - 1 {
                let w = k as f64 / (count - 1) as f64;
                times.push(start + w * length);
                values.extend(jump.left.iter().zip(&size).map(|(l, s)| l + w * s));
            }
            offset += length;
            segments.push(Segment {
                ext_start: start,
                ext_end: t + offset,
                length,
                jump: pos,
                index: i,
                ext_first: first,
                ext_last: first + count - 1,
            });
        }
        ext_index.push(times.len());
        tau.push((t, t + offset));
        times.push(t + offset);
        values.extend_from_slice(path.value(i));
    }
    let ext_len = times.len();
    let ext = SamplePath::continuous(times, d, values)?;
    Ok((ext, Parametrisation { delta, p, tau, segments, ext_index, ext_len }))
}

/// Cadlag path on the original times from a path on the extended times.
/// Values inside segments are discarded; jumps come from segment endpoints.
pub fn deparametrise(extended: &SamplePath, par: &Parametrisation) -> Result<SamplePath> {
    let expected = par.ext_horizon();
    if extended.len() != par.ext_len || (extended.horizon() - expected).abs() > 1e-12 * expected.max(1.0) {
        return Err(Error::HorizonMismatch { expected, found: extended.horizon() });
    }
    let d = extended.dim();
    let times: Vec<f64> = par.tau.iter().map(|t| t.0).collect();
    let mut values = Vec::with_capacity(times.len() * d);
    for &k in &par.ext_index {
        values.extend_from_slice(extended.value(k));
    }
    let lefts = par
        .segments
        .iter()
        .filter(|s| extended.value(s.ext_first) != extended.value(s.ext_last))
        .map(|s| (s.index, extended.value(s.ext_first).to_vec()))
        .collect();
    SamplePath::new(times, d, values, lefts)
}
