//! Discrete cadlag paths with an explicit jump registry.
//!
//! `values[i]` is always the right limit at `times[i]`. A registered jump at
//! index `i` additionally stores the left limit, so the path's point
//! skeleton visits `left` and then `right` at the same timestamp.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::norm;

#[derive(Clone, Debug, PartialEq)]
pub struct Jump {
    pub index: usize,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl Jump {
    pub fn size(&self) -> Vec<f64> {
        self.right.iter().zip(&self.left).map(|(r, l)| r - l).collect()
    }

    pub fn magnitude(&self) -> f64 {
        norm(&self.size())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplePath {
    times: Vec<f64>,
    values: Vec<f64>,
    dim: usize,
    // sorted by magnitude descending, ties to the earlier time
    jumps: Vec<Jump>,
    // registry positions ordered by path index
    chrono: Vec<usize>,
}

/// Point sequence of a path with left limits inserted before each jump.
#[derive(Clone, Debug)]
pub struct Skeleton {
    pub dim: usize,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `jump_step[k]` is the registry position when step k -> k+1 is a jump.
    pub jump_step: Vec<Option<usize>>,
    /// skeleton position of the right value at each path index
    pub position: Vec<usize>,
}

impl Skeleton {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }
}

impl SamplePath {
    /// Builds a path; `lefts` lists `(index, left_value)` for every jump.
    pub fn new(times: Vec<f64>, dim: usize, values: Vec<f64>, lefts: Vec<(usize, Vec<f64>)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidPath("dimension must be positive".into()));
        }
        if times.is_empty() {
            return Err(Error::InvalidPath("no points".into()));
        }
        if values.len() != times.len() * dim {
            return Err(Error::InvalidPath(format!(
                "{} values for {} points of dimension {dim}",
                values.len(),
                times.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidPath(format!("first time is {}, expected 0", times[0])));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::InvalidPath(format!("times not strictly increasing at {}", w[1])));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPath("non-finite value".into()));
        }
        let mut jumps = Vec::with_capacity(lefts.len());
        for (index, left) in lefts {
            if index == 0 || index >= times.len() {
                return Err(Error::InvalidPath(format!("jump index {index} out of range")));
            }
            if left.len() != dim || left.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidPath(format!("bad left value at jump index {index}")));
            }
            let right = values[index * dim..(index + 1) * dim].to_vec();
            if left == right {
                return Err(Error::InvalidPath(format!("zero jump registered at index {index}")));
            }
            jumps.push(Jump { index, left, right });
        }
        let mut path = SamplePath { times, values, dim, jumps, chrono: Vec::new() };
        path.sort_registry()?;
        Ok(path)
    }

    pub fn continuous(times: Vec<f64>, dim: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(times, dim, values, Vec::new())
    }

    pub fn from_rows(times: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidPath("ragged rows".into()));
        }
        Self::continuous(times, dim, rows.concat())
    }

    pub fn scalar(times: Vec<f64>, xs: Vec<f64>) -> Result<Self> {
        Self::continuous(times, 1, xs)
    }

    /// Scalar path on the integer grid 0, 1, ..., n-1.
    pub fn scalar_steps(xs: &[f64]) -> Result<Self> {
        Self::scalar((0..xs.len()).map(|i| i as f64).collect(), xs.to_vec())
    }

    fn sort_registry(&mut self) -> Result<()> {
        self.jumps.sort_by(|a, b| {
            b.magnitude().total_cmp(&a.magnitude()).then(a.index.cmp(&b.index))
        });
        let mut chrono: Vec<usize> = (0..self.jumps.len()).collect();
        chrono.sort_by_key(|&k| self.jumps[k].index);
        if chrono.windows(2).any(|w| self.jumps[w[0]].index == self.jumps[w[1]].index) {
            return Err(Error::InvalidPath("two jumps registered at one index".into()));
        }
        self.chrono = chrono;
        Ok(())
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

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Jump registry, largest first.
    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn has_jumps(&self) -> bool {
        !self.jumps.is_empty()
    }

    /// Registry positions in time order.
    pub fn chronological(&self) -> impl Iterator<Item = (usize, &Jump)> {
        self.chrono.iter().map(move |&k| (k, &self.jumps[k]))
    }

    pub fn jump_at(&self, index: usize) -> Option<&Jump> {
        self.chrono
            .binary_search_by_key(&index, |&k| self.jumps[k].index)
            .ok()
            .map(|pos| &self.jumps[self.chrono[pos]])
    }

    pub fn left_value(&self, i: usize) -> &[f64] {
        match self.jump_at(i) {
            Some(j) => &j.left,
            None => self.value(i),
        }
    }

    /// Index whose time matches `t` up to `tol`.
    pub fn index_of_time(&self, t: f64, tol: f64) -> Option<usize> {
        let pos = self.times.partition_point(|&s| s < t - tol);
        (pos < self.times.len() && (self.times[pos] - t).abs() <= tol).then_some(pos)
    }

    pub fn skeleton(&self) -> Skeleton {
        let n = self.len();
        let extra = self.jumps.len();
        let mut times = Vec::with_capacity(n + extra);
        let mut values = Vec::with_capacity((n + extra) * self.dim);
        let mut jump_step = Vec::with_capacity(n + extra);
        let mut position = Vec::with_capacity(n);
        let mut next = self.chrono.iter().peekable();
        for i in 0..n {
            if let Some(&&k) = next.peek() {
                if self.jumps[k].index == i {
                    next.next();
                    times.push(self.times[i]);
                    values.extend_from_slice(&self.jumps[k].left);
                    jump_step.push(Some(k));
                }
            }
            position.push(times.len());
            times.push(self.times[i]);
            values.extend_from_slice(self.value(i));
            jump_step.push(None);
        }
        jump_step.pop();
        Skeleton { dim: self.dim, times, values, jump_step, position }
    }

    /// Sub-path on indices `i..=j`, times shifted to start at 0.
    ///
    /// A jump at `i` is dropped because the sub-path starts from its right limit.
    pub fn slice(&self, i: usize, j: usize) -> Result<Self> {
        if i > j || j >= self.len() {
            return Err(Error::InvalidPath(format!("bad slice {i}..={j}")));
        }
        let t0 = self.times[i];
        let times = self.times[i..=j].iter().map(|t| t - t0).collect();
        let values = self.values[i * self.dim..(j + 1) * self.dim].to_vec();
        let lefts = self
            .chronological()
            .filter(|(_, jp)| jp.index > i && jp.index <= j)
            .map(|(_, jp)| (jp.index - i, jp.left.clone()))
            .collect();
        Self::new(times, self.dim, values, lefts)
    }

    /// Path restricted to increasing `indices` (must start at 0). Jumps at
    /// kept indices are kept; jumps elsewhere are absorbed into the steps.
    pub fn subsample(&self, indices: &[usize]) -> Result<Self> {
        if indices.first() != Some(&0) || indices.windows(2).any(|w| w[1] <= w[0]) || *indices.last().unwrap() >= self.len() {
            return Err(Error::InvalidPath("subsample indices must increase from 0".into()));
        }
        let times = indices.iter().map(|&i| self.times[i]).collect();
        let values = indices.iter().flat_map(|&i| self.value(i).to_vec()).collect();
        let lefts = indices
            .iter()
            .enumerate()
            .filter_map(|(k, &i)| self.jump_at(i).map(|j| (k, j.left.clone())))
            .collect();
        Self::new(times, self.dim, values, lefts)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for k in 1..=self.dim {
            let _ = write!(out, ",x{k}");
        }
        let with_jumps = self.has_jumps();
        if with_jumps {
            for k in 1..=self.dim {
                let _ = write!(out, ",jump_left_{k}");
            }
        }
        out.push('\n');
        for i in 0..self.len() {
            let _ = write!(out, "{:.16e}", self.times[i]);
            for v in self.value(i) {
                let _ = write!(out, ",{v:.16e}");
            }
            if with_jumps {
                match self.jump_at(i) {
                    Some(j) => {
                        for v in &j.left {
                            let _ = write!(out, ",{v:.16e}");
                        }
                    }
                    None => out.push_str(&",".repeat(self.dim)),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| Error::Csv("empty input".into()))?
            .split(',')
            .map(str::trim)
            .collect();
        if header.first() != Some(&"t") {
            return Err(Error::Csv("header must start with t".into()));
        }
        let dim = header.iter().filter(|h| h.starts_with('x')).count();
        let jump_cols = header.iter().filter(|h| h.starts_with("jump_left_")).count();
        if dim == 0 || (jump_cols != 0 && jump_cols != dim) || header.len() != 1 + dim + jump_cols {
            return Err(Error::Csv(format!("malformed header {header:?}")));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        let mut lefts = Vec::new();
        for (row, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != header.len() {
                return Err(Error::Csv(format!("row {row}: expected {} fields", header.len())));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Csv(format!("row {row}: bad number {s:?}")))
            };
            let t = parse(fields[0])?;
            if let Some(&prev) = times.last() {
                if !(t > prev) {
                    return Err(Error::Csv(format!("row {row}: time {t} not after {prev}")));
                }
            }
            times.push(t);
            for f in &fields[1..=dim] {
                values.push(parse(f)?);
            }
            if jump_cols > 0 {
                let jl = &fields[1 + dim..];
                if jl.iter().all(|f| f.is_empty()) {
                    continue;
                }
                let left = jl.iter().map(|f| parse(f)).collect::<Result<Vec<_>>>()?;
                lefts.push((row, left));
            }
        }
        Self::new(times, dim, values, lefts)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}
