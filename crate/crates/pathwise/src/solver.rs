//! Solutions of `dY = f(Y) dX` for cadlag drivers.
//!
//! Continuous stretches are solved by Picard iteration of trapezoidal sums
//! (with an optional second-order area correction for rough drivers). Jumps are
//! either flowed across with an adaptive RK4 integrator (geometric) or applied
//! as `f(Y_{t-}) Δx` (forward).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::param::{deparametrise, parametrise};
use crate::path::SamplePath;
use crate::pvar::ControlFunction;
use crate::tensor::{norm, sub, sup_dist};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Picard stopping threshold on the sup-norm update (relative to `max(1, |Y|)`)
    pub tol: f64,
    pub max_iter: usize,
    /// local error per unit fictitious time in jump flows
    pub ode_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, max_iter: 50, ode_tol: 1e-12 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    Geometric,
    Forward,
    Corrective,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DriverRef {
    pub model: Option<String>,
    pub seed: Option<u64>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub truncation_radius: Option<f64>,
    pub corrected_jumps: Option<usize>,
    pub beta: Option<f64>,
    pub stride: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub path: SamplePath,
    pub kind: SolutionKind,
    pub driver_ref: DriverRef,
    pub picard_iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Continuous,
    Flow,
    Forward,
}

fn rk4(field: &VectorField, y: &[f64], dx: &[f64], h: f64) -> Vec<f64> {
    let k1 = field.apply(y, dx);
    let at = |k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let k2 = field.apply(&at(&k1, 0.5 * h), dx);
    let k3 = field.apply(&at(&k2, 0.5 * h), dx);
    let k4 = field.apply(&at(&k3, h), dx);
    (0..y.len()).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

/// Time-1 flow of `ẏ = f(y) dx` by step-doubling RK4 with Richardson extrapolation.
pub fn ode_flow(field: &VectorField, y0: &[f64], dx: &[f64], tol: f64) -> Vec<f64> {
    if dx.iter().all(|&v| v == 0.0) {
        return y0.to_vec();
    }
    let mut y = y0.to_vec();
    let mut t = 0.0;
    let mut h: f64 = 0.25;
    while t < 1.0 {
        h = h.min(1.0 - t);
        let full = rk4(field, &y, dx, h);
        let mid = rk4(field, &y, dx, 0.5 * h);
        let two = rk4(field, &mid, dx, 0.5 * h);
        let err = sup_dist(&two, &full) / 15.0;
        let scale = y.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let target = tol * scale * h;
        if err <= target || h < 1e-9 {
            y = two.iter().zip(&full).map(|(a, b)| a + (a - b) / 15.0).collect();
            t += h;
        }
        let factor = if err == 0.0 { 4.0 } else { (0.9 * (target / err).powf(0.25)).clamp(0.2, 4.0) };
        h *= factor;
    }
    y
}

#[derive(Clone, Debug, PartialEq)]
pub struct JumpGap {
    pub geometric: Vec<f64>,
    pub forward: Vec<f64>,
    /// `½ ‖f‖²_Lip |Δx|²`
    pub bound: f64,
}

impl JumpGap {
    pub fn gap(&self) -> f64 {
        norm(&sub(&self.geometric, &self.forward))
    }
}

pub fn jump_gap(field: &VectorField, state: &[f64], jump: &[f64]) -> JumpGap {
    let flowed = ode_flow(field, state, jump, SolverOptions::default().ode_tol);
    let l = field.lip_norm();
    JumpGap {
        geometric: sub(&flowed, state),
        forward: field.apply(state, jump),
        bound: 0.5 * l * l * norm(jump).powi(2),
    }
}

/// Step engine over a point sequence with per-step kinds.
pub(crate) struct Engine<'a> {
    pub field: &'a VectorField,
    pub opts: SolverOptions,
    pub p: f64,
}

struct Stats {
    iterations: usize,
    residual: f64,
}

impl<'a> Engine<'a> {
    /// Solution values at every point; `areas` holds one `d x d` matrix per step.
    pub fn run(&self, points: &[f64], kinds: &[StepKind], areas: Option<&[f64]>, y0: &[f64]) -> Result<(Vec<f64>, usize, f64)> {
        let n = self.field.dim_state();
        let d = self.field.dim_driver();
        let m = points.len() / d;
        let mut y = vec![0.0; m * n];
        y[..n].copy_from_slice(y0);
        let mut stats = Stats { iterations: 0, residual: 0.0 };
        let mut k = 0;
        while k + 1 < m {
            match kinds[k] {
                StepKind::Continuous => {
                    let mut e = k + 1;
                    while e + 1 < m && kinds[e] == StepKind::Continuous {
                        e += 1;
                    }
                    self.stretch(points, areas, k, e, &mut y, &mut stats)?;
                    k = e;
                }
                kind => {
                    let dx = sub(&points[(k + 1) * d..(k + 2) * d], &points[k * d..(k + 1) * d]);
                    let cur = y[k * n..(k + 1) * n].to_vec();
                    let next = if kind == StepKind::Flow {
                        ode_flow(self.field, &cur, &dx, self.opts.ode_tol)
                    } else {
                        let f = self.field.apply(&cur, &dx);
                        cur.iter().zip(&f).map(|(a, b)| a + b).collect()
                    };
                    y[(k + 1) * n..(k + 2) * n].copy_from_slice(&next);
                    k += 1;
                }
            }
        }
        Ok((y, stats.iterations, stats.residual))
    }

    fn stretch(&self, points: &[f64], areas: Option<&[f64]>, s: usize, e: usize, y: &mut [f64], stats: &mut Stats) -> Result<()> {
        if self.picard(points, areas, s, e, y, stats) {
            return Ok(());
        }
        let d = self.field.dim_driver();
        let cf = ControlFunction::from_points((s..=e).map(|i| i as f64).collect(), d, points[s * d..(e + 1) * d].to_vec(), self.p)?;
        let cuts = cf.partition(0, e - s, self.field.bounds().1.max(1e-300));
        for w in cuts.windows(2) {
            self.piece(points, areas, s + w[0], s + w[1], y, stats)?;
        }
        Ok(())
    }

    fn piece(&self, points: &[f64], areas: Option<&[f64]>, s: usize, e: usize, y: &mut [f64], stats: &mut Stats) -> Result<()> {
        if self.picard(points, areas, s, e, y, stats) {
            return Ok(());
        }
        if e - s < 2 {
            return Err(Error::NoContraction { iterations: self.opts.max_iter, residual: stats.residual });
        }
        let mid = s + (e - s) / 2;
        self.piece(points, areas, s, mid, y, stats)?;
        self.piece(points, areas, mid, e, y, stats)
    }

    /// Picard iteration on points `s..=e` from `y[s]`; writes on success.
    fn picard(&self, points: &[f64], areas: Option<&[f64]>, s: usize, e: usize, y: &mut [f64], stats: &mut Stats) -> bool {
        let f = self.field;
        let (n, d) = (f.dim_state(), f.dim_driver());
        let m = e - s + 1;
        let y0 = y[s * n..(s + 1) * n].to_vec();
        let mut cur: Vec<f64> = y0.iter().copied().cycle().take(m * n).collect();
        let mut next = cur.clone();
        let mut fv = vec![0.0; m * n * d];
        let mut corr = vec![0.0; (m - 1) * n];
        let dx: Vec<f64> = (s..e).flat_map(|k| sub(&points[(k + 1) * d..(k + 2) * d], &points[k * d..(k + 1) * d])).collect();
        for it in 1..=self.opts.max_iter {
            for k in 0..m {
                f.eval_into(&cur[k * n..(k + 1) * n], &mut fv[k * n * d..(k + 1) * n * d]);
            }
            if let Some(areas) = areas {
                for k in 0..m - 1 {
                    let a = &areas[(s + k) * d * d..(s + k + 1) * d * d];
                    if a.iter().all(|&v| v == 0.0) {
                        corr[k * n..(k + 1) * n].fill(0.0);
                        continue;
                    }
                    let so = f.second_order(&cur[k * n..(k + 1) * n]);
                    for i in 0..n {
                        let mut acc = 0.0;
                        for ai in 0..d {
                            for b in 0..d {
                                acc += so[(i * d + ai) * d + b] * a[b * d + ai];
                            }
                        }
                        corr[k * n + i] = acc;
                    }
                }
            }
            next[..n].copy_from_slice(&y0);
            for k in 0..m - 1 {
                let step = &dx[k * d..(k + 1) * d];
                for i in 0..n {
                    let mut inc = 0.0;
                    for j in 0..d {
                        inc += 0.5 * (fv[(k * n + i) * d + j] + fv[((k + 1) * n + i) * d + j]) * step[j];
                    }
                    next[(k + 1) * n + i] = next[k * n + i] + inc + corr[k * n + i];
                }
            }
            let scale = next.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            let residual = sup_dist(&next, &cur) / scale;
            std::mem::swap(&mut cur, &mut next);
            stats.iterations += 1;
            if !residual.is_finite() {
                return false;
            }
            if residual < self.opts.tol {
                y[s * n..(e + 1) * n].copy_from_slice(&cur);
                stats.residual = stats.residual.max(residual);
                return true;
            }
            if it == self.opts.max_iter {
                stats.residual = residual;
            }
        }
        false
    }
}

pub(crate) fn check_setup(field: &VectorField, driver: &SamplePath, a: &[f64], p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    if !(field.lip_alpha() > p) {
        return Err(Error::Regularity { alpha: field.lip_alpha(), p });
    }
    field.check_dims(a, driver.dim())
}

/// Geometric solve with optional per-original-step areas.
pub(crate) fn geometric_impl(
    field: &VectorField,
    driver: &SamplePath,
    a: &[f64],
    p: f64,
    delta: f64,
    step_areas: Option<&[f64]>,
    opts: SolverOptions,
) -> Result<Solution> {
    let (ext, par) = parametrise(driver, delta, p)?;
    let kinds: Vec<StepKind> = par
        .segment_of_step()
        .into_iter()
        .map(|s| if s.is_some() { StepKind::Flow } else { StepKind::Continuous })
        .collect();
    let d = driver.dim();
    let ext_areas = step_areas.map(|areas| {
        let mut out = vec![0.0; ext.len().saturating_sub(1) * d * d];
        for i in 0..driver.len() - 1 {
            let k = par.ext_index[i];
            out[k * d * d..(k + 1) * d * d].copy_from_slice(&areas[i * d * d..(i + 1) * d * d]);
        }
        out
    });
    let engine = Engine { field, opts, p };
    let (y, iterations, residual) = engine.run(ext.values(), &kinds, ext_areas.as_deref(), a)?;
    let ext_sol = SamplePath::continuous(ext.times().to_vec(), field.dim_state(), y)?;
    let path = deparametrise(&ext_sol, &par)?;
    Ok(Solution {
        path,
        kind: SolutionKind::Geometric,
        driver_ref: DriverRef { delta: Some(delta), truncation_radius: field.truncation_radius(), ..Default::default() },
        picard_iterations: iterations,
        residual,
    })
}

/// Solve on the point skeleton; jumps with `forward(registry position)` true
/// are applied as forward increments, the others flowed.
pub(crate) fn skeleton_impl(
    field: &VectorField,
    driver: &SamplePath,
    a: &[f64],
    p: f64,
    step_areas: Option<&[f64]>,
    forward: impl Fn(usize) -> bool,
    opts: SolverOptions,
) -> Result<(SamplePath, usize, f64)> {
    let sk = driver.skeleton();
    let kinds: Vec<StepKind> = sk
        .jump_step
        .iter()
        .map(|s| match s {
            None => StepKind::Continuous,
            Some(r) if forward(*r) => StepKind::Forward,
            Some(_) => StepKind::Flow,
        })
        .collect();
    let d = driver.dim();
    let sk_areas = step_areas.map(|areas| {
        let mut out = vec![0.0; sk.len().saturating_sub(1) * d * d];
        for i in 0..driver.len() - 1 {
            let k = sk.position[i];
            out[k * d * d..(k + 1) * d * d].copy_from_slice(&areas[i * d * d..(i + 1) * d * d]);
        }
        out
    });
    let engine = Engine { field, opts, p };
    let (y, iterations, residual) = engine.run(&sk.values, &kinds, sk_areas.as_deref(), a)?;
    let n = field.dim_state();
    let mut values = Vec::with_capacity(driver.len() * n);
    let mut lefts = Vec::new();
    for i in 0..driver.len() {
        let pos = sk.position[i];
        values.extend_from_slice(&y[pos * n..(pos + 1) * n]);
        if driver.jump_at(i).is_some() && y[(pos - 1) * n..pos * n] != y[pos * n..(pos + 1) * n] {
            lefts.push((i, y[(pos - 1) * n..pos * n].to_vec()));
        }
    }
    Ok((SamplePath::new(driver.times().to_vec(), n, values, lefts)?, iterations, residual))
}

fn young_only(p: f64) -> Result<()> {
    if p >= 2.0 {
        return Err(Error::YoungCondition(2.0 / p));
    }
    Ok(())
}

pub fn solve_geometric(field: &VectorField, driver: &SamplePath, a: &[f64], p: f64, delta: f64) -> Result<Solution> {
    solve_geometric_with(field, driver, a, p, delta, SolverOptions::default())
}

pub fn solve_geometric_with(
    field: &VectorField,
    driver: &SamplePath,
    a: &[f64],
    p: f64,
    delta: f64,
    opts: SolverOptions,
) -> Result<Solution> {
    check_setup(field, driver, a, p)?;
    young_only(p)?;
    geometric_impl(field, driver, a, p, delta, None, opts)
}

pub fn solve_forward(field: &VectorField, driver: &SamplePath, a: &[f64], p: f64) -> Result<Solution> {
    solve_forward_with(field, driver, a, p, SolverOptions::default())
}

pub fn solve_forward_with(field: &VectorField, driver: &SamplePath, a: &[f64], p: f64, opts: SolverOptions) -> Result<Solution> {
    check_setup(field, driver, a, p)?;
    young_only(p)?;
    let (path, picard_iterations, residual) = skeleton_impl(field, driver, a, p, None, |_| true, opts)?;
    Ok(Solution {
        path,
        kind: SolutionKind::Forward,
        driver_ref: DriverRef { truncation_radius: field.truncation_radius(), ..Default::default() },
        picard_iterations,
        residual,
    })
}

/// `z^n`: the geometric solution with its `n` largest jumps applied forward.
pub fn solve_corrective(field: &VectorField, driver: &SamplePath, a: &[f64], p: f64, corrected: usize) -> Result<Solution> {
    solve_corrective_with(field, driver, a, p, corrected, SolverOptions::default())
}

pub fn solve_corrective_with(
    field: &VectorField,
    driver: &SamplePath,
    a: &[f64],
    p: f64,
    corrected: usize,
    opts: SolverOptions,
) -> Result<Solution> {
    check_setup(field, driver, a, p)?;
    young_only(p)?;
    let (path, picard_iterations, residual) = skeleton_impl(field, driver, a, p, None, |r| r < corrected, opts)?;
    Ok(Solution {
        path,
        kind: SolutionKind::Corrective,
        driver_ref: DriverRef {
            truncation_radius: field.truncation_radius(),
            corrected_jumps: Some(corrected),
            ..Default::default()
        },
        picard_iterations,
        residual,
    })
}

#[derive(Clone, Debug)]
pub struct FlowMap {
    pub solutions: Vec<Solution>,
    /// `max sup_t |Y^a_t - Y^b_t| / |a - b|` over distinct pairs
    pub lipschitz: f64,
}

/// Largest `sup_t |Y^a_t - Y^b_t| / |a - b|` over pairs with distinct starts.
pub fn lipschitz_ratio(initials: &[Vec<f64>], paths: &[&SamplePath]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            let gap = norm(&sub(&initials[i], &initials[j]));
            if gap == 0.0 {
                continue;
            }
            let sup = (0..paths[i].len())
                .map(|k| norm(&sub(paths[i].value(k), paths[j].value(k))))
                .fold(0.0f64, f64::max);
            worst = worst.max(sup / gap);
        }
    }
    worst
}

/// Solutions from several starting points; `p >= 2` uses the rough solver.
pub fn flow_map(field: &VectorField, driver: &SamplePath, initials: &[Vec<f64>], p: f64) -> Result<FlowMap> {
    let solutions = initials
        .par_iter()
        .map(|a| {
            if p < 2.0 {
                solve_geometric(field, driver, a, p, 1.0)
            } else {
                crate::rough::solve_geometric_rough(field, driver, a, p, 1.0)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let paths: Vec<&SamplePath> = solutions.iter().map(|s| &s.path).collect();
    let lipschitz = lipschitz_ratio(initials, &paths);
    Ok(FlowMap { solutions, lipschitz })
}

/// `t -> X_{T-t}` for a continuous path.
pub fn reversed(path: &SamplePath) -> Result<SamplePath> {
    if path.has_jumps() {
        return Err(Error::HasJumps);
    }
    let t = path.horizon();
    let n = path.len();
    let times: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { t - path.time(n - 1 - i) }).collect();
    let values: Vec<f64> = (0..n).rev().flat_map(|i| path.value(i).to_vec()).collect();
    SamplePath::continuous(times, path.dim(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pure_jumps(hs: &[f64]) -> SamplePath {
        let mut xs = vec![0.0];
        let mut lefts = Vec::new();
        for (i, h) in hs.iter().enumerate() {
            let last = *xs.last().unwrap();
            lefts.push((i + 1, vec![last]));
            xs.push(last + h);
        }
        SamplePath::new((0..xs.len()).map(|i| i as f64).collect(), 1, xs, lefts).unwrap()
    }

    fn sine_driver(n: usize) -> SamplePath {
        let times: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let rows: Vec<Vec<f64>> = times.iter().map(|t| vec![(3.0 * t).sin(), (2.0 * t).cos() - 1.0]).collect();
        SamplePath::from_rows(times, &rows).unwrap()
    }

    #[test]
    fn ode_flow_exponential() {
        let f = VectorField::scalar_linear(1000.0);
        for h in [0.1, -0.5, 0.5, 2.0] {
            let y = ode_flow(&f, &[1.3], &[h], 1e-12)[0];
            assert!((y - 1.3 * f64::exp(h)).abs() < 1e-10 * y.abs());
        }
    }

    #[test]
    fn constant_field_telescopes() {
        let f = VectorField::constant(vec![vec![1.0, 2.0], vec![0.5, -1.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let times: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let mut values = vec![0.0; 80];
        for i in 1..40 {
            for k in 0..2 {
                values[2 * i + k] = values[2 * (i - 1) + k] + rng.random_range(-1.0..1.0);
            }
        }
        let x = SamplePath::new(times, 2, values.clone(), vec![(7, vec![values[14] - 0.3, values[15]]), (20, vec![0.0, 0.0])]).unwrap();
        let a = [0.2, -0.4];
        for sol in [solve_geometric(&f, &x, &a, 1.5, 1.0).unwrap(), solve_forward(&f, &x, &a, 1.5).unwrap()] {
            for i in 0..x.len() {
                let dx = sub(x.value(i), x.value(0));
                let expect = [a[0] + dx[0] + 2.0 * dx[1], a[1] + 0.5 * dx[0] - dx[1]];
                assert!(sup_dist(sol.path.value(i), &expect) < 1e-12);
            }
        }
    }

    #[test]
    fn jump_products() {
        let f = VectorField::scalar_linear(1000.0);
        let hs = [0.3, -0.45, 0.1, 0.5, -0.2];
        let x = pure_jumps(&hs);
        let geo = solve_geometric(&f, &x, &[1.5], 1.5, 1.0).unwrap();
        let fwd = solve_forward(&f, &x, &[1.5], 1.5).unwrap();
        let pe: f64 = 1.5 * hs.iter().map(|h| h.exp()).product::<f64>();
        let pf: f64 = 1.5 * hs.iter().map(|h| 1.0 + h).product::<f64>();
        let last = x.len() - 1;
        assert!((geo.path.value(last)[0] - pe).abs() < 1e-10 * pe);
        assert!((fwd.path.value(last)[0] - pf).abs() < 1e-12 * pf);
        for (_, j) in x.chronological() {
            let left = fwd.path.left_value(j.index)[0];
            let gap = fwd.path.value(j.index)[0] - left - left * j.size()[0];
            assert!(gap.abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_driver_matches_reference_ode() {
        let f = VectorField::linear_truncated(vec![vec![vec![0.0, 1.0], vec![0.0, 0.0]], vec![vec![0.0, 0.0], vec![1.0, 0.0]]], 100.0).unwrap();
        let x = sine_driver(1 << 12);
        let a = [1.0, 0.5];
        let sol = solve_geometric(&f, &x, &a, 1.5, 1.0).unwrap();
        // reference: fine RK4 in real time on the analytic driver derivative
        let steps = 20000;
        let mut y = a.to_vec();
        let rhs = |t: f64, y: &[f64]| f.apply(y, &[3.0 * (3.0 * t).cos(), -2.0 * (2.0 * t).sin()]);
        let h = 1.0 / steps as f64;
        for s in 0..steps {
            let t = s as f64 * h;
            let k1 = rhs(t, &y);
            let y2: Vec<f64> = (0..2).map(|i| y[i] + 0.5 * h * k1[i]).collect();
            let k2 = rhs(t + 0.5 * h, &y2);
            let y3: Vec<f64> = (0..2).map(|i| y[i] + 0.5 * h * k2[i]).collect();
            let k3 = rhs(t + 0.5 * h, &y3);
            let y4: Vec<f64> = (0..2).map(|i| y[i] + h * k3[i]).collect();
            let k4 = rhs(t + h, &y4);
            for i in 0..2 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        assert!(sup_dist(sol.path.value(x.len() - 1), &y) < 1e-6);
    }

    #[test]
    fn forward_equals_geometric_without_jumps() {
        let f = VectorField::rotation(2, 100.0).unwrap();
        let x = sine_driver(513);
        let g = solve_geometric(&f, &x, &[0.3, 0.1], 1.5, 1.0).unwrap();
        let w = solve_forward(&f, &x, &[0.3, 0.1], 1.5).unwrap();
        assert!(sup_dist(g.path.values(), w.path.values()) < 1e-9);
    }

    #[test]
    fn jump_gap_examples() {
        let f = VectorField::scalar_linear(1000.0);
        let zero = jump_gap(&f, &[1.0], &[0.0]);
        assert_eq!((zero.geometric[0], zero.forward[0]), (0.0, 0.0));
        let g = jump_gap(&f, &[1.0], &[0.1]);
        assert!((g.geometric[0] - (0.1f64.exp() - 1.0)).abs() < 1e-12);
        assert_eq!(g.forward[0], 0.1);
        assert!(g.gap() <= g.bound);
    }

    #[test]
    fn rejects_rough_or_irregular_setups() {
        let f = VectorField::scalar_linear(10.0);
        let x = pure_jumps(&[0.1]);
        assert!(matches!(solve_geometric(&f, &x, &[1.0], 2.5, 1.0), Err(Error::YoungCondition(_))));
        let tab = VectorField::from_spec(crate::field::FieldSpec::Tabulated { nodes: vec![0.0, 1.0], values: vec![vec![1.0], vec![2.0]] }).unwrap();
        assert!(matches!(solve_forward(&tab, &x, &[1.0], 2.1), Err(Error::Regularity { .. })));
        assert!(matches!(solve_forward(&f, &x, &[1.0, 2.0], 1.5), Err(Error::Dimension(_))));
    }

    #[test]
    fn corrective_endpoints() {
        let f = VectorField::scalar_linear(1000.0);
        let x = pure_jumps(&[0.3, -0.2, 0.4]);
        let geo = solve_geometric(&f, &x, &[1.0], 1.5, 1.0).unwrap();
        let fwd = solve_forward(&f, &x, &[1.0], 1.5).unwrap();
        let z0 = solve_corrective(&f, &x, &[1.0], 1.5, 0).unwrap();
        let z3 = solve_corrective(&f, &x, &[1.0], 1.5, 3).unwrap();
        assert!(sup_dist(z0.path.values(), geo.path.values()) < 1e-10);
        assert!(sup_dist(z3.path.values(), fwd.path.values()) < 1e-14);
    }

    #[test]
    fn flow_map_translation_and_identity() {
        let f = VectorField::constant(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let x = sine_driver(65);
        let fm = flow_map(&f, &x, &[vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0]], 1.5).unwrap();
        assert_eq!(fm.solutions[0].path, fm.solutions[1].path);
        assert!((fm.lipschitz - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_path_undoes_flow() {
        let f = VectorField::rotation(2, 100.0).unwrap();
        let x = sine_driver(1025);
        let fwd = solve_geometric(&f, &x, &[1.0, 0.0], 1.5, 1.0).unwrap();
        let end = fwd.path.value(x.len() - 1).to_vec();
        let back = solve_geometric(&f, &reversed(&x).unwrap(), &end, 1.5, 1.0).unwrap();
        assert!(sup_dist(back.path.value(x.len() - 1), &[1.0, 0.0]) < 1e-9);
    }
}
