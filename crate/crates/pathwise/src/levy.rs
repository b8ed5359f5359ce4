//! Levy driving paths and Levy-measure analysis.
//!
//! A path is drift + Gaussian part + jumps larger than a cutoff `ε`. Jumps in
//! `(ε, 1]` are compensated by `-t ∫_{ε<|x|<=1} x ν(dx)`; jumps above 1 are not.
//! Jumps at or below `ε` are dropped.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::path::SamplePath;
use crate::special::{gamma, integrate, integrate_log};
use crate::tensor::norm;

pub const BIG_JUMP_THRESHOLD: f64 = 1.0;

/// Truncated integrals above this count as divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

const ETA_MAX_LEVEL: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpDist {
    /// iid uniform coordinates on `[-half_width, half_width]`
    UniformCube { half_width: f64 },
    /// iid centred normal coordinates
    Normal { std: f64 },
    /// `U * direction` with `U` uniform on `[-half_length, half_length]`
    Segment { direction: Vec<f64>, half_length: f64 },
    /// finitely many atoms with probabilities proportional to `weights`
    Atoms { atoms: Vec<Vec<f64>>, weights: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureKind {
    Zero,
    /// symmetric stable, independent coordinates: `E e^{iuX_1} = e^{-(scale |u|)^alpha}`
    AlphaStable { alpha: f64, scale: f64 },
    CompoundPoisson { rate: f64, jumps: JumpDist },
    /// `Σ_{k<=m_max} |x|^{-3+1/k} dx` on `((k+1)^{-3(k+1)}, k^{-3k}]`, isotropic
    EtaExample { m_max: usize },
    /// isotropic radial density, linear between nodes, power law below the first node
    Tabulated { radii: Vec<f64>, density: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevyMeasureSpec {
    pub kind: MeasureKind,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevyModel {
    pub drift: Vec<f64>,
    /// row-major `dim x dim`
    pub gaussian_cov: Vec<f64>,
    pub measure: LevyMeasureSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub size: Vec<f64>,
}

/// Independent generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidModel(msg.into())
}

/// Band `k` of the eta example: `(lo, hi]`.
pub fn eta_band(k: usize) -> (f64, f64) {
    let k = k as f64;
    ((k + 1.0).powf(-3.0 * (k + 1.0)), k.powf(-3.0 * k))
}

/// Lévy density constant `c` of a symmetric stable coordinate, `ν(dx) = c |x|^{-1-α} dx`.
pub fn stable_density_constant(alpha: f64, scale: f64) -> f64 {
    scale.powf(alpha) * gamma(1.0 + alpha) * (std::f64::consts::PI * alpha / 2.0).sin() / std::f64::consts::PI
}

/// Radial density of a tabulated measure, including the power-law extension.
struct Radial<'a> {
    radii: &'a [f64],
    density: &'a [f64],
    slope: f64,
}

impl<'a> Radial<'a> {
    fn new(radii: &'a [f64], density: &'a [f64]) -> Self {
        let slope = if density[0] > 0.0 && density[1] > 0.0 {
            (density[1] / density[0]).ln() / (radii[1] / radii[0]).ln()
        } else {
            0.0
        };
        Radial { radii, density, slope }
    }

    fn eval(&self, r: f64) -> f64 {
        let (r0, rk) = (self.radii[0], *self.radii.last().unwrap());
        if r <= 0.0 || r > rk {
            0.0
        } else if r < r0 {
            self.density[0] * (r / r0).powf(self.slope)
        } else {
            let i = self.radii.partition_point(|&x| x <= r).min(self.radii.len() - 1).max(1);
            let (a, b) = (self.radii[i - 1], self.radii[i]);
            let w = (r - a) / (b - a);
            self.density[i - 1] * (1.0 - w) + self.density[i] * w
        }
    }

    /// `∫_lo^hi r^q ρ(r) dr` over the power-law part `lo < hi <= r0`.
    fn tail_moment(&self, q: f64, lo: f64, hi: f64) -> f64 {
        let r0 = self.radii[0];
        let c = self.density[0] * r0.powf(-self.slope);
        let e = q + self.slope + 1.0;
        if e.abs() < 1e-14 {
            c * (hi / lo).ln()
        } else {
            c * (hi.powf(e) - lo.powf(e)) / e
        }
    }

    /// `∫_lo^hi r^q ρ(r) dr` over the whole support.
    fn moment(&self, q: f64, lo: f64, hi: f64, tol: f64) -> f64 {
        let r0 = self.radii[0];
        let mut total = 0.0;
        if lo < r0 {
            total += self.tail_moment(q, lo, hi.min(r0));
        }
        for w in self.radii.windows(2) {
            let (a, b) = (w[0].max(lo), w[1].min(hi));
            if a < b {
                total += integrate(&|r: f64| r.powf(q) * self.eval(r), a, b, tol);
            }
        }
        total
    }
}

impl JumpDist {
    fn dim(&self) -> Option<usize> {
        match self {
            JumpDist::Segment { direction, .. } => Some(direction.len()),
            JumpDist::Atoms { atoms, .. } => atoms.first().map(Vec::len),
            _ => None,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            JumpDist::UniformCube { half_width } if !(*half_width > 0.0) => Err(invalid("half_width must be positive")),
            JumpDist::Normal { std } if !(*std > 0.0) => Err(invalid("std must be positive")),
            JumpDist::Segment { direction, half_length } => {
                if !(*half_length > 0.0) || norm(direction) == 0.0 {
                    return Err(invalid("segment needs a nonzero direction and positive half_length"));
                }
                Ok(())
            }
            JumpDist::Atoms { atoms, weights } => {
                if atoms.is_empty() || atoms.len() != weights.len() || weights.iter().any(|w| !(*w >= 0.0)) {
                    return Err(invalid("atoms need matching nonnegative weights"));
                }
                if weights.iter().sum::<f64>() <= 0.0 {
                    return Err(invalid("atom weights sum to zero"));
                }
                if atoms.iter().any(|a| a.len() != dim) {
                    return Err(invalid("atom dimension mismatch"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
        .and_then(|_| match self.dim() {
            Some(d) if d != dim => Err(invalid("jump distribution dimension mismatch")),
            _ => Ok(()),
        })
    }

    fn sample<R: Rng>(&self, dim: usize, rng: &mut R) -> Vec<f64> {
        match self {
            JumpDist::UniformCube { half_width } => {
                (0..dim).map(|_| rng.random_range(-*half_width..*half_width)).collect()
            }
            JumpDist::Normal { std } => (0..dim).map(|_| std * rng.sample::<f64, _>(StandardNormal)).collect(),
            JumpDist::Segment { direction, half_length } => {
                let u = rng.random_range(-*half_length..*half_length);
                direction.iter().map(|d| u * d).collect()
            }
            JumpDist::Atoms { atoms, weights } => {
                let total: f64 = weights.iter().sum();
                let mut u = rng.random::<f64>() * total;
                for (a, w) in atoms.iter().zip(weights) {
                    if u < *w {
                        return a.clone();
                    }
                    u -= w;
                }
                atoms.last().unwrap().clone()
            }
        }
    }

    /// `E[x_i x_j 1{|x| <= 1}]`, row-major.
    fn truncated_second_moment(&self, dim: usize) -> Result<Vec<f64>> {
        let mut m = vec![0.0; dim * dim];
        match self {
            JumpDist::UniformCube { half_width: w } => {
                let v = cube_ball_moment(*w, dim)?;
                for i in 0..dim {
                    m[i * dim + i] = v;
                }
            }
            JumpDist::Normal { std } => {
                let chi = ChiSquared::new((dim + 2) as f64).map_err(|e| invalid(e.to_string()))?;
                let v = std * std * chi.cdf(1.0 / (std * std));
                for i in 0..dim {
                    m[i * dim + i] = v;
                }
            }
            JumpDist::Segment { direction, half_length } => {
                let len = norm(direction);
                let c = half_length.min(1.0 / len);
                let eu2 = c.powi(3) / (3.0 * half_length);
                for i in 0..dim {
                    for j in 0..dim {
                        m[i * dim + j] = direction[i] * direction[j] * eu2;
                    }
                }
            }
            JumpDist::Atoms { atoms, weights } => {
                let total: f64 = weights.iter().sum();
                for (a, w) in atoms.iter().zip(weights) {
                    if norm(a) <= 1.0 {
                        for i in 0..dim {
                            for j in 0..dim {
                                m[i * dim + j] += w / total * a[i] * a[j];
                            }
                        }
                    }
                }
            }
        }
        Ok(m)
    }

    /// `E[x 1{ε < |x| <= 1}]`
    fn truncated_mean(&self, dim: usize, eps: f64) -> Vec<f64> {
        match self {
            JumpDist::Atoms { atoms, weights } => {
                let total: f64 = weights.iter().sum();
                let mut m = vec![0.0; dim];
                for (a, w) in atoms.iter().zip(weights) {
                    let r = norm(a);
                    if r > eps && r <= 1.0 {
                        for i in 0..dim {
                            m[i] += w / total * a[i];
                        }
                    }
                }
                m
            }
            // symmetric distributions
            _ => vec![0.0; dim],
        }
    }
}

/// `E[x_1^2 1{|x| <= 1}]` for `x` uniform on `[-w, w]^d`, `d <= 3`.
fn cube_ball_moment(w: f64, dim: usize) -> Result<f64> {
    let vol = (2.0 * w).powi(dim as i32);
    if w * (dim as f64).sqrt() <= 1.0 {
        return Ok(w * w / 3.0);
    }
    // area of {|y| <= r} inside [-w, w]^k
    let slab = |r: f64| -> f64 {
        match dim - 1 {
            0 => 1.0,
            1 => 2.0 * r.min(w),
            _ => {
                if r <= w {
                    std::f64::consts::PI * r * r
                } else if r >= w * std::f64::consts::SQRT_2 {
                    4.0 * w * w
                } else {
                    std::f64::consts::PI * r * r - 4.0 * (r * r * (w / r).acos() - w * (r * r - w * w).sqrt())
                }
            }
        }
    };
    if dim > 3 {
        return Err(invalid("truncated cube moments are implemented for dim <= 3"));
    }
    let c = w.min(1.0);
    let f = |x: f64| x * x * slab((1.0 - x * x).max(0.0).sqrt());
    Ok(integrate(&f, -c, c, 1e-14) / vol)
}

impl LevyMeasureSpec {
    pub fn zero(dim: usize) -> Self {
        LevyMeasureSpec { kind: MeasureKind::Zero, dim }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        match &self.kind {
            MeasureKind::Zero => Ok(()),
            MeasureKind::AlphaStable { alpha, scale } => {
                if !(*alpha > 0.0 && *alpha < 2.0) {
                    return Err(invalid(format!("stable index {alpha} outside (0, 2)")));
                }
                if !(*scale > 0.0) {
                    return Err(invalid("stable scale must be positive"));
                }
                Ok(())
            }
            MeasureKind::CompoundPoisson { rate, jumps } => {
                if !(*rate > 0.0 && rate.is_finite()) {
                    return Err(invalid("rate must be positive"));
                }
                jumps.validate(self.dim)
            }
            MeasureKind::EtaExample { m_max } => {
                if *m_max == 0 {
                    return Err(invalid("m_max must be at least 1"));
                }
                Ok(())
            }
            MeasureKind::Tabulated { radii, density } => {
                if radii.len() < 2 || radii.len() != density.len() {
                    return Err(invalid("tabulated density needs at least two matching nodes"));
                }
                if !(radii[0] > 0.0) || radii.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(invalid("radii must be positive and increasing"));
                }
                if density.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
                    return Err(invalid("density must be finite and nonnegative"));
                }
                let rad = Radial::new(radii, density);
                if rad.density[0] > 0.0 && rad.slope <= -3.0 {
                    return Err(invalid("tabulated density violates ∫(|x|^2 ∧ 1) ν < ∞ near zero"));
                }
                Ok(())
            }
        }
    }

    /// `∫_{|x|<=1} x_i x_j ν(dx)`, row-major.
    pub fn second_moments(&self) -> Result<Vec<f64>> {
        self.second_moments_with_tol(1e-13)
    }

    /// As [`second_moments`](Self::second_moments) with an explicit quadrature tolerance.
    pub fn second_moments_with_tol(&self, tol: f64) -> Result<Vec<f64>> {
        self.validate()?;
        let d = self.dim;
        let diag = |v: f64| {
            let mut m = vec![0.0; d * d];
            for i in 0..d {
                m[i * d + i] = v;
            }
            m
        };
        Ok(match &self.kind {
            MeasureKind::Zero => vec![0.0; d * d],
            MeasureKind::AlphaStable { alpha, scale } => {
                diag(2.0 * stable_density_constant(*alpha, *scale) / (2.0 - alpha))
            }
            MeasureKind::CompoundPoisson { rate, jumps } => {
                jumps.truncated_second_moment(d)?.into_iter().map(|v| rate * v).collect()
            }
            MeasureKind::EtaExample { m_max } => {
                let r2: f64 = (1..=*m_max)
                    .map(|k| {
                        let (lo, hi) = eta_band(k);
                        let e = -3.0 + 1.0 / k as f64;
                        integrate_log(&|r: f64| 2.0 * r * r * r.powf(e), lo, hi, tol)
                    })
                    .sum();
                diag(r2 / d as f64)
            }
            MeasureKind::Tabulated { radii, density } => {
                let rad = Radial::new(radii, density);
                diag(rad.moment(2.0, 1e-300, 1.0, tol) / d as f64)
            }
        })
    }

    /// `∫_{ε<|x|<=1} x ν(dx)`
    pub fn compensator(&self, eps: f64) -> Vec<f64> {
        match &self.kind {
            MeasureKind::CompoundPoisson { rate, jumps } => {
                jumps.truncated_mean(self.dim, eps).into_iter().map(|v| rate * v).collect()
            }
            _ => vec![0.0; self.dim],
        }
    }

    /// All jumps of magnitude above `eps` on `(0, horizon]`, in time order.
    pub fn sample_jumps<R: Rng>(&self, horizon: f64, eps: f64, rng: &mut R) -> Result<Vec<JumpEvent>> {
        self.validate()?;
        let d = self.dim;
        let mut events = Vec::new();
        let poisson = |mean: f64, rng: &mut R| -> Result<usize> {
            if mean <= 0.0 {
                return Ok(0);
            }
            let p = Poisson::new(mean).map_err(|e| invalid(e.to_string()))?;
            Ok(p.sample(rng) as usize)
        };
        let time = |rng: &mut R| horizon * (1.0 - rng.random::<f64>());
        let direction = |rng: &mut R| -> Vec<f64> {
            if d == 1 {
                return vec![if rng.random::<bool>() { 1.0 } else { -1.0 }];
            }
            loop {
                let g: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let n = norm(&g);
                if n > 1e-12 {
                    return g.into_iter().map(|v| v / n).collect();
                }
            }
        };
        match &self.kind {
            MeasureKind::Zero => {}
            MeasureKind::AlphaStable { alpha, scale } => {
                let c = stable_density_constant(*alpha, *scale);
                let rate = 2.0 * c * eps.powf(-alpha) / alpha;
                for axis in 0..d {
                    let count = poisson(rate * horizon, rng)?;
                    for _ in 0..count {
                        let u: f64 = 1.0 - rng.random::<f64>();
                        let r = eps * u.powf(-1.0 / alpha);
                        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                        let mut size = vec![0.0; d];
                        size[axis] = sign * r;
                        events.push(JumpEvent { time: time(rng), size });
                    }
                }
            }
            MeasureKind::CompoundPoisson { rate, jumps } => {
                let count = poisson(rate * horizon, rng)?;
                for _ in 0..count {
                    let t = time(rng);
                    let size = jumps.sample(d, rng);
                    if norm(&size) > eps {
                        events.push(JumpEvent { time: t, size });
                    }
                }
            }
            MeasureKind::EtaExample { m_max } => {
                for k in 1..=*m_max {
                    let (lo, hi) = eta_band(k);
                    if hi <= eps {
                        break;
                    }
                    let lo = lo.max(eps);
                    // radial density 2 r^g on (lo, hi], g + 1 = -2 + 1/k < 0
                    let g1 = -2.0 + 1.0 / k as f64;
                    let (a, b) = (lo.powf(g1), hi.powf(g1));
                    let mass = 2.0 * (b - a) / g1;
                    let count = poisson(mass * horizon, rng)?;
                    for _ in 0..count {
                        let u: f64 = rng.random();
                        let r = (a + u * (b - a)).powf(1.0 / g1).clamp(lo, hi);
                        let dir = direction(rng);
                        events.push(JumpEvent { time: time(rng), size: dir.into_iter().map(|v| v * r).collect() });
                    }
                }
            }
            MeasureKind::Tabulated { radii, density } => {
                let rad = Radial::new(radii, density);
                // pieces: power-law part then linear cells
                let mut pieces: Vec<(f64, f64, f64)> = Vec::new();
                if eps < radii[0] {
                    pieces.push((eps, radii[0], rad.tail_moment(0.0, eps, radii[0])));
                }
                for w in radii.windows(2) {
                    let (a, b) = (w[0].max(eps), w[1]);
                    if a < b {
                        pieces.push((a, b, 0.5 * (rad.eval(a) + rad.eval(b)) * (b - a)));
                    }
                }
                let total: f64 = pieces.iter().map(|p| p.2).sum();
                let count = poisson(total * horizon, rng)?;
                for _ in 0..count {
                    let mut u = rng.random::<f64>() * total;
                    let mut chosen = *pieces.last().unwrap();
                    for p in &pieces {
                        if u < p.2 {
                            chosen = *p;
                            break;
                        }
                        u -= p.2;
                    }
                    let (a, b, m) = chosen;
                    let v: f64 = rng.random::<f64>() * m;
                    let r = if b <= radii[0] {
                        // invert ∫_a^r c s^slope ds = v
                        let e = rad.slope + 1.0;
                        let c = rad.density[0] * radii[0].powf(-rad.slope);
                        if e.abs() < 1e-14 {
                            a * (v / c).exp()
                        } else {
                            (a.powf(e) + v * e / c).powf(1.0 / e)
                        }
                    } else {
                        // linear density on [a, b]: solve fa x + (fb - fa) x^2 / (2h) = v
                        let (fa, fb, h) = (rad.eval(a), rad.eval(b), b - a);
                        let q = (fb - fa) / (2.0 * h);
                        let x = if q.abs() < 1e-300 { v / fa } else { (-fa + (fa * fa + 4.0 * q * v).sqrt()) / (2.0 * q) };
                        a + x
                    }
                    .clamp(a, b);
                    let dir = direction(rng);
                    events.push(JumpEvent { time: time(rng), size: dir.into_iter().map(|v| v * r).collect() });
                }
            }
        }
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        Ok(events)
    }
}

/// Sum of `∫|x|^α ν_k(dx)` over bands `k <= m` of the eta example (one-dimensional
/// density on both signs), in closed form. May return `+inf` on overflow.
pub fn eta_partial_integrals(m: usize, alpha: f64) -> f64 {
    (1..=m).map(|k| eta_band_integral(k, alpha)).sum()
}

fn eta_band_integral(k: usize, alpha: f64) -> f64 {
    let kf = k as f64;
    let ln_lo = -3.0 * (kf + 1.0) * (kf + 1.0).ln();
    let ln_hi = -3.0 * kf * kf.ln();
    let e = alpha - 2.0 + 1.0 / kf;
    if e.abs() < 1e-12 {
        return 2.0 * (ln_hi - ln_lo);
    }
    let (x, y) = (e * ln_hi, e * ln_lo);
    if x.max(y) > 700.0 {
        return f64::INFINITY;
    }
    2.0 * (x.exp() - y.exp()) / e
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Growth {
    Converges,
    Diverges,
    Undecided,
}

fn classify_eta(alpha: f64) -> Growth {
    let mut sum = 0.0;
    let mut checkpoint = 64;
    let mut prev = 0.0;
    for k in 1..=ETA_MAX_LEVEL {
        sum += eta_band_integral(k, alpha);
        if !(sum <= DIVERGENCE_THRESHOLD) {
            return Growth::Diverges;
        }
        if k == checkpoint {
            if sum - prev <= 1e-9 * sum {
                return Growth::Converges;
            }
            prev = sum;
            checkpoint *= 2;
        }
    }
    if sum - prev <= 1e-6 * sum {
        Growth::Converges
    } else {
        Growth::Undecided
    }
}

/// Blumenthal-Getoor index `inf{α > 0 : ∫_{|y|<=1} |y|^α ν(dy) < ∞}`.
///
/// Analytic for stable, finite and tabulated measures. The eta example reports the index
/// of the limiting measure (every finite truncation is a finite measure).
pub fn bg_index(spec: &LevyMeasureSpec) -> Result<f64> {
    spec.validate()?;
    let classify = match &spec.kind {
        MeasureKind::Zero | MeasureKind::CompoundPoisson { .. } => return Ok(0.0),
        MeasureKind::AlphaStable { alpha, .. } => return Ok(*alpha),
        MeasureKind::EtaExample { .. } => classify_eta,
        MeasureKind::Tabulated { radii, density } => {
            // only the power-law part near zero matters
            let rad = Radial::new(radii, density);
            if rad.density[0] == 0.0 {
                return Ok(0.0);
            }
            return Ok((-1.0 - rad.slope).max(0.0));
        }
    };
    let (mut lo, mut hi) = (0.0, 2.0);
    match classify(lo) {
        Growth::Converges => return Ok(0.0),
        Growth::Undecided => return Err(Error::Indeterminate { lo, hi }),
        Growth::Diverges => {}
    }
    if classify(hi) != Growth::Converges {
        return Err(invalid("∫_{|x|<=1} |x|^2 ν(dx) does not converge"));
    }
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        match classify(mid) {
            Growth::Converges => hi = mid,
            Growth::Diverges => lo = mid,
            Growth::Undecided if hi - lo > 0.05 => return Err(Error::Indeterminate { lo, hi }),
            Growth::Undecided => break,
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Symmetric stable increments by the Chambers-Mallows-Stuck transform, one
/// per coordinate; each has law `S_α(scale · dt^{1/α})`.
pub fn stable_increments<R: Rng>(alpha: f64, scale: f64, dt: f64, count: usize, rng: &mut R) -> Vec<f64> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let s = scale * dt.powf(1.0 / alpha);
    (0..count)
        .map(|_| {
            let v = rng.random_range(-half_pi..half_pi);
            let w: f64 = rng.sample(Exp1);
            let x = if (alpha - 1.0).abs() < 1e-12 {
                v.tan()
            } else {
                (alpha * v).sin() / v.cos().powf(1.0 / alpha)
                    * ((v - alpha * v).cos() / w).powf((1.0 - alpha) / alpha)
            };
            s * x
        })
        .collect()
}

impl LevyModel {
    pub fn new(drift: Vec<f64>, gaussian_cov: Vec<f64>, measure: LevyMeasureSpec) -> Result<Self> {
        let m = LevyModel { drift, gaussian_cov, measure };
        m.validate()?;
        Ok(m)
    }

    /// Standard Brownian motion in `dim` dimensions.
    pub fn brownian(dim: usize) -> Self {
        let mut cov = vec![0.0; dim * dim];
        for i in 0..dim {
            cov[i * dim + i] = 1.0;
        }
        LevyModel { drift: vec![0.0; dim], gaussian_cov: cov, measure: LevyMeasureSpec::zero(dim) }
    }

    /// Pure-jump model without drift.
    pub fn pure_jump(measure: LevyMeasureSpec) -> Self {
        let d = measure.dim;
        LevyModel { drift: vec![0.0; d], gaussian_cov: vec![0.0; d * d], measure }
    }

    pub fn dim(&self) -> usize {
        self.measure.dim
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.measure.dim;
        if self.drift.len() != d || self.gaussian_cov.len() != d * d {
            return Err(Error::Dimension("drift/covariance do not match measure dimension".into()));
        }
        self.measure.validate()?;
        self.cov_root().map(|_| ())
    }

    /// `L` with `L Lᵀ = cov`, via the symmetric eigendecomposition.
    pub fn cov_root(&self) -> Result<Vec<f64>> {
        let d = self.measure.dim;
        let c = &self.gaussian_cov;
        let scale = c.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for i in 0..d {
            for j in 0..i {
                if (c[i * d + j] - c[j * d + i]).abs() > 1e-12 * scale {
                    return Err(Error::NotPsd);
                }
            }
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotPsd);
        }
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(d, d, c));
        if eig.eigenvalues.iter().any(|&l| l < -1e-12 * scale) {
            return Err(Error::NotPsd);
        }
        let mut root = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                root[i * d + k] = eig.eigenvectors[(i, k)] * eig.eigenvalues[k].max(0.0).sqrt();
            }
        }
        Ok(root)
    }
}

/// Samples a path on `n` uniform grid points of `[0, horizon]`, merging exact
/// jump times into the grid. Generator stream 0 of `seed`.
pub fn sample_path(model: &LevyModel, horizon: f64, n: usize, eps: f64, seed: u64) -> Result<SamplePath> {
    sample_path_with(model, horizon, n, eps, &mut stream_rng(seed, 0))
}

pub fn sample_path_with<R: Rng>(model: &LevyModel, horizon: f64, n: usize, eps: f64, rng: &mut R) -> Result<SamplePath> {
    check_sampling(model, horizon, n, eps)?;
    let d = model.dim();
    let root = model.cov_root()?;
    let grid: Vec<f64> = (0..n).map(|i| horizon * i as f64 / (n - 1) as f64).collect();
    let mut gauss = vec![0.0; n * d];
    let mut z = vec![0.0; d];
    for i in 1..n {
        let sd = (grid[i] - grid[i - 1]).sqrt();
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        for a in 0..d {
            let inc: f64 = (0..d).map(|b| root[a * d + b] * z[b]).sum();
            gauss[i * d + a] = gauss[(i - 1) * d + a] + sd * inc;
        }
    }
    let events = model.measure.sample_jumps(horizon, eps, rng)?;
    assemble(model, &grid, &gauss, &root, &events, eps, rng)
}

/// Builds a path from pre-sampled jump events with no Gaussian part, so paths
/// at different cutoffs can share their large jumps.
pub fn path_from_events(model: &LevyModel, horizon: f64, n: usize, eps: f64, events: &[JumpEvent]) -> Result<SamplePath> {
    check_sampling(model, horizon, n, eps)?;
    if model.gaussian_cov.iter().any(|&v| v != 0.0) {
        return Err(invalid("path_from_events needs a model without Gaussian part"));
    }
    let d = model.dim();
    let grid: Vec<f64> = (0..n).map(|i| horizon * i as f64 / (n - 1) as f64).collect();
    let kept: Vec<JumpEvent> = events.iter().filter(|e| norm(&e.size) > eps).cloned().collect();
    let mut rng = stream_rng(0, 0);
    assemble(model, &grid, &vec![0.0; n * d], &vec![0.0; d * d], &kept, eps, &mut rng)
}

fn check_sampling(model: &LevyModel, horizon: f64, n: usize, eps: f64) -> Result<()> {
    model.validate()?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidCutoff(eps));
    }
    if n < 2 {
        return Err(Error::InvalidPath("need at least two grid points".into()));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidPath(format!("horizon {horizon} must be positive")));
    }
    Ok(())
}

fn assemble<R: Rng>(
    model: &LevyModel,
    grid: &[f64],
    gauss: &[f64],
    root: &[f64],
    events: &[JumpEvent],
    eps: f64,
    rng: &mut R,
) -> Result<SamplePath> {
    let d = model.dim();
    let comp = model.measure.compensator(eps);
    let mut times: Vec<f64> = Vec::with_capacity(grid.len() + events.len());
    let mut bm: Vec<f64> = Vec::with_capacity((grid.len() + events.len()) * d);
    let mut jump_here: Vec<Option<Vec<f64>>> = Vec::with_capacity(grid.len() + events.len());
    let mut ev = events.iter().peekable();
    let mut z = vec![0.0; d];
    for i in 0..grid.len() {
        if i > 0 {
            // Brownian bridge through event times strictly inside the cell
            let (mut t0, t1) = (grid[i - 1], grid[i]);
            let end = &gauss[i * d..(i + 1) * d];
            while let Some(e) = ev.peek() {
                if e.time >= t1 {
                    break;
                }
                let e = ev.next().unwrap();
                if e.time == *times.last().unwrap() {
                    add_jump(jump_here.last_mut().unwrap(), &e.size);
                    continue;
                }
                let start = bm[bm.len() - d..].to_vec();
                let w = (e.time - t0) / (t1 - t0);
                let sd = ((e.time - t0) * (t1 - e.time) / (t1 - t0)).sqrt();
                for v in z.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                for a in 0..d {
                    let noise: f64 = (0..d).map(|b| root[a * d + b] * z[b]).sum();
                    bm.push(start[a] + w * (end[a] - start[a]) + sd * noise);
                }
                times.push(e.time);
                jump_here.push(Some(e.size.clone()));
                t0 = e.time;
            }
        }
        times.push(grid[i]);
        bm.extend_from_slice(&gauss[i * d..(i + 1) * d]);
        jump_here.push(None);
        while let Some(e) = ev.peek() {
            if e.time != grid[i] {
                break;
            }
            add_jump(jump_here.last_mut().unwrap(), &ev.next().unwrap().size);
        }
    }
    let n = times.len();
    let mut values = vec![0.0; n * d];
    let mut cum = vec![0.0; d];
    let mut lefts = Vec::new();
    for k in 0..n {
        let t = times[k];
        let base: Vec<f64> = (0..d).map(|a| (model.drift[a] - comp[a]) * t + bm[k * d + a] + cum[a]).collect();
        match &jump_here[k] {
            Some(size) if norm(size) > 0.0 && k > 0 => {
                for a in 0..d {
                    cum[a] += size[a];
                    values[k * d + a] = base[a] + size[a];
                }
                lefts.push((k, base));
            }
            _ => values[k * d..(k + 1) * d].copy_from_slice(&base),
        }
    }
    SamplePath::new(times, d, values, lefts)
}

fn add_jump(slot: &mut Option<Vec<f64>>, size: &[f64]) {
    match slot {
        Some(s) => {
            for (a, b) in s.iter_mut().zip(size) {
                *a += b;
            }
        }
        None => *slot = Some(size.to_vec()),
    }
}
