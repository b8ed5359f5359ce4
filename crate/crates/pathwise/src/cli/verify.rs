//! Invariant suites behind `pathwise verify`. Each suite returns checks with
//! the observed statistic and the limit it was held to; trials run in
//! parallel on independent generator streams and are reduced in order.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::Numeric;
use crate::area::{area_c0, area_moment_check, area_pvar_bound, chen_compose, polygon_area, AreaMatrix};
use crate::error::Result;
use crate::field::VectorField;
use crate::levy::{bg_index, eta_partial_integrals, sample_path, stream_rng, JumpDist, LevyMeasureSpec, LevyModel, MeasureKind};
use crate::param::{deparametrise, parametrise};
use crate::path::SamplePath;
use crate::pvar::{pvar_brute, pvar_exact};
use crate::rough::{coarsen, solve_geometric_rough_with, RoughOptions};
use crate::solver::{jump_gap, lipschitz_ratio, solve_corrective, solve_forward, solve_geometric};
use crate::tensor::{norm, sub, sup_dist};

pub const SUITES: [&str; 12] = [
    "pvar-oracle",
    "param-invariance",
    "jump-dichotomy",
    "jump-gap",
    "corrective-cauchy",
    "chen",
    "brownian-area",
    "levy-area",
    "area-bound",
    "flow",
    "degeneracy",
    "eta-index",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub pass: bool,
    pub statistic: f64,
    pub limit: f64,
    pub detail: String,
}

impl Check {
    fn new(suite: &str, name: &str, pass: bool, statistic: f64, limit: f64, detail: String) -> Self {
        Check { suite: suite.into(), name: name.into(), pass, statistic, limit, detail }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}/{}: statistic {:.6e}, limit {:.6e}; {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.statistic,
            self.limit,
            self.detail
        )
    }
}

pub fn run_suite(name: &str, seed: u64, num: &Numeric) -> Result<Vec<Check>> {
    match name {
        "pvar-oracle" => pvar_oracle(seed, 200),
        "param-invariance" => param_invariance(seed, 30),
        "jump-dichotomy" => jump_dichotomy(seed, 50),
        "jump-gap" => jump_gap_suite(seed, 300),
        "corrective-cauchy" => corrective_cauchy(seed, 5),
        "chen" => chen(seed, 5, 1 << 6),
        "brownian-area" => brownian_area(seed, num.trials, num.max_level),
        "levy-area" => levy_area(seed, num.trials, num.max_level),
        "area-bound" => area_bound(seed, 5, num.max_level),
        "flow" => flow(seed),
        "degeneracy" => degeneracy(seed, 5),
        "eta-index" => eta_index(),
        other => Err(crate::Error::InvalidParameter(format!("unknown suite {other}"))),
    }
}

/// Random walk with iid uniform steps; each step is a registered jump with
/// probability `jump_prob` (its left limit part-way along the step).
pub fn random_path<R: Rng>(rng: &mut R, n: usize, d: usize, jump_prob: f64) -> SamplePath {
    let times: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1).max(1) as f64).collect();
    let mut values = vec![0.0; n * d];
    let mut lefts = Vec::new();
    for i in 1..n {
        let w: f64 = rng.random_range(0.0..1.0);
        let mut left = vec![0.0; d];
        for k in 0..d {
            let step: f64 = rng.random_range(-1.0..1.0);
            values[i * d + k] = values[(i - 1) * d + k] + step;
            left[k] = values[(i - 1) * d + k] + w * step;
        }
        if rng.random_bool(jump_prob) && left != values[i * d..(i + 1) * d] {
            lefts.push((i, left));
        }
    }
    SamplePath::new(times, d, values, lefts).expect("valid random path")
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn pvar_oracle(seed: u64, count: usize) -> Result<Vec<Check>> {
    let errs = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k);
            let d = rng.random_range(1..=3);
            let p = [1.0, 1.5, 2.0, 2.7][rng.random_range(0..4)];
            // skeleton stays within the brute-force limit
            let n = rng.random_range(2..=7);
            let x = random_path(&mut rng, n, d, 0.5);
            Ok(rel(pvar_exact(&x, p)?.value, pvar_brute(&x, p)?.value))
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = errs.iter().copied().fold(0.0, f64::max);
    Ok(vec![Check::new("pvar-oracle", "exact-vs-brute", worst <= 1e-12, worst, 1e-12, format!("{count} random paths"))])
}

pub fn param_invariance(seed: u64, count: usize) -> Result<Vec<Check>> {
    let rows = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k);
            let d = rng.random_range(1..=3);
            let p = rng.random_range(1.0..3.0);
            let n = rng.random_range(3..30);
            let x = random_path(&mut rng, n, d, 0.6);
            let base = pvar_exact(&x, p)?.value;
            let mut worst = 0.0f64;
            let mut round_trip = true;
            for delta in [0.1, 1.0, 10.0] {
                let (e, par) = parametrise(&x, delta, p)?;
                worst = worst.max(rel(base, pvar_exact(&e, p)?.value));
                round_trip &= deparametrise(&e, &par)? == x;
            }
            Ok((worst, round_trip))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let trips = rows.iter().filter(|r| r.1).count();
    Ok(vec![
        Check::new("param-invariance", "pvar-preserved", worst <= 1e-10, worst, 1e-10, format!("{count} paths x 3 deltas")),
        Check::new("param-invariance", "round-trip", trips == count, (count - trips) as f64, 0.0, "deparametrise(parametrise(x)) == x".into()),
    ])
}

/// Scalar pure-jump path with the given jump sizes on an integer-spaced grid.
pub fn jump_path(hs: &[f64]) -> SamplePath {
    let mut xs = vec![0.0];
    let mut lefts = Vec::new();
    for (i, h) in hs.iter().enumerate() {
        let last = *xs.last().unwrap();
        lefts.push((i + 1, vec![last]));
        xs.push(last + h);
    }
    SamplePath::new((0..xs.len()).map(|i| i as f64).collect(), 1, xs, lefts).expect("valid jump path")
}

pub fn jump_dichotomy(seed: u64, count: usize) -> Result<Vec<Check>> {
    let field = VectorField::scalar_linear(1e6);
    let rows = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k);
            let m = rng.random_range(1..=12);
            let hs: Vec<f64> = (0..m).map(|_| rng.random_range(-0.5..0.5)).filter(|h: &f64| *h != 0.0).collect();
            let x = jump_path(&hs);
            let a = rng.random_range(0.5..2.0);
            let last = x.len() - 1;
            let fwd = solve_forward(&field, &x, &[a], 1.5)?.path.value(last)[0];
            let geo = solve_geometric(&field, &x, &[a], 1.5, 1.0)?.path.value(last)[0];
            let pf = a * hs.iter().map(|h| 1.0 + h).product::<f64>();
            let pe = a * hs.iter().map(|h| h.exp()).product::<f64>();
            Ok((rel(fwd, pf), rel(geo, pe)))
        })
        .collect::<Result<Vec<_>>>()?;
    let wf = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let wg = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(vec![
        Check::new("jump-dichotomy", "forward-product", wf <= 1e-8, wf, 1e-8, format!("{count} jump sets, |h| <= 0.5")),
        Check::new("jump-dichotomy", "geometric-exponential", wg <= 1e-8, wg, 1e-8, format!("{count} jump sets, |h| <= 0.5")),
    ])
}

/// Random field from the three presets, with a state inside its truncation radius.
pub fn random_field<R: Rng>(rng: &mut R, d: usize) -> VectorField {
    let n = 2;
    match rng.random_range(0..3) {
        0 => VectorField::constant((0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()).unwrap(),
        1 => VectorField::linear_truncated(
            (0..d).map(|_| (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()).collect(),
            rng.random_range(1.0..4.0),
        )
        .unwrap(),
        _ => VectorField::rotation(d, rng.random_range(1.0..4.0)).unwrap(),
    }
}

pub fn jump_gap_suite(seed: u64, count: usize) -> Result<Vec<Check>> {
    let rows: Vec<(bool, Option<f64>)> = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k);
            let d = rng.random_range(1..=3);
            let f = random_field(&mut rng, d);
            let y: Vec<f64> = (0..2).map(|_| rng.random_range(-1.5..1.5)).collect();
            let scale = rng.random_range(0.01..1.0);
            let dx: Vec<f64> = (0..d).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
            let g = jump_gap(&f, &y, &dx);
            let ok = g.gap() <= g.bound * (1.0 + 1e-12);
            // halving ratio on a small jump
            let small: Vec<f64> = dx.iter().map(|v| v * 0.004 / scale).collect();
            let half: Vec<f64> = small.iter().map(|v| 0.5 * v).collect();
            let (g1, g2) = (jump_gap(&f, &y, &small).gap(), jump_gap(&f, &y, &half).gap());
            let ratio = (g1 > 1e-9).then(|| g2 / g1);
            (ok, ratio)
        })
        .collect();
    let violations = rows.iter().filter(|r| !r.0).count();
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.1).collect();
    let worst = ratios.iter().map(|r| (r / 0.25 - 1.0).abs()).fold(0.0, f64::max);
    Ok(vec![
        Check::new("jump-gap", "taylor-bound", violations == 0, violations as f64, 0.0, format!("{count} (field, state, jump) triples")),
        Check::new("jump-gap", "quarter-scaling", !ratios.is_empty() && worst <= 0.1, worst, 0.1, format!("{} non-degenerate gaps", ratios.len())),
    ])
}

/// Compound-Poisson drivers for the corrective scheme and their field.
pub fn corrective_setup(seed: u64, k: u64) -> Result<(VectorField, SamplePath)> {
    let model = LevyModel::pure_jump(LevyMeasureSpec {
        kind: MeasureKind::CompoundPoisson { rate: 40.0, jumps: JumpDist::UniformCube { half_width: 0.3 } },
        dim: 2,
    });
    let x = sample_path(&model, 1.0, 65, 1e-3, seed.wrapping_mul(1000).wrapping_add(k))?;
    let f = VectorField::linear_truncated(vec![vec![vec![0.3, 0.5], vec![-0.4, 0.2]], vec![vec![-0.2, 0.1], vec![0.6, -0.3]]], 3.0)?;
    Ok((f, x))
}

/// `(max ratio, reference constant, ratios)` for one driver over `m = 1..=20`.
pub fn corrective_ratios(f: &VectorField, x: &SamplePath) -> Result<(Vec<f64>, f64)> {
    let a = [0.7, -0.4];
    let tv: f64 = pvar_exact(x, 1.0)?.value;
    let l = 0.5 * f.lip_norm().powi(2) * (f.bounds().1 * tv).exp();
    let sq: Vec<f64> = x.jumps().iter().map(|j| j.magnitude().powi(2)).collect();
    let total = x.jumps().len();
    let sols: Vec<SamplePath> = (0..=total.min(25))
        .map(|m| solve_corrective(f, x, &a, 1.5, m).map(|s| s.path))
        .collect::<Result<_>>()?;
    let dist = |u: &SamplePath, v: &SamplePath| {
        (0..u.len()).map(|i| norm(&sub(u.value(i), v.value(i))).max(norm(&sub(u.left_value(i), v.left_value(i))))).fold(0.0, f64::max)
    };
    let mut ratios = Vec::new();
    for m in 1..=20.min(total.saturating_sub(1)) {
        let tail: f64 = sq[m..].iter().sum();
        for r in [1usize, 2, 5] {
            if m + r < sols.len() {
                ratios.push(dist(&sols[m], &sols[m + r]) / tail);
            }
        }
    }
    Ok((ratios, l))
}

pub fn corrective_cauchy(seed: u64, count: usize) -> Result<Vec<Check>> {
    let rows = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let (f, x) = corrective_setup(seed, k)?;
            corrective_ratios(&f, &x)
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = rows.iter().flat_map(|r| r.0.iter().copied()).fold(0.0, f64::max);
    let l = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let n: usize = rows.iter().map(|r| r.0.len()).sum();
    Ok(vec![Check::new(
        "corrective-cauchy",
        "tail-ratio-bounded",
        n > 0 && worst <= l,
        worst,
        l,
        format!("{n} (m, r) pairs on {count} drivers; limit is 0.5 |f|_Lip^2 exp(|Df| TV)"),
    )])
}

/// Largest Chen residual over all grid triples, with areas summed directly.
pub fn chen_residual(x: &SamplePath) -> f64 {
    let n = x.len();
    let d = x.dim();
    let pts = x.values();
    let direct: Vec<Vec<Vec<f64>>> = (0..n).map(|i| (i..n).map(|j| polygon_area(pts, d, i, j)).collect()).collect();
    let area = |i: usize, j: usize| AreaMatrix { interval: (x.time(i), x.time(j)), dim: d, matrix: direct[i][j - i].clone(), levels_used: 0 };
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let xij = sub(x.value(j), x.value(i));
                let xjk = sub(x.value(k), x.value(j));
                let c = chen_compose(&area(i, j), &area(j, k), &xij, &xjk).expect("abutting");
                worst = worst.max(sup_dist(&c.matrix, &direct[i][k - i]));
            }
        }
    }
    worst
}

pub fn chen(seed: u64, count: usize, n: usize) -> Result<Vec<Check>> {
    let worst = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k);
            let d = rng.random_range(2..=3);
            chen_residual(&random_path(&mut rng, n, d, 0.0))
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);
    Ok(vec![Check::new("chen", "triple-residual", worst <= 1e-12, worst, 1e-12, format!("{count} piecewise-linear paths, {n} points, all triples"))])
}

pub fn brownian_area(seed: u64, trials: usize, levels: usize) -> Result<Vec<Check>> {
    let r = area_moment_check(&LevyModel::brownian(2), 0.0, 1.0, trials, seed, levels)?;
    let z = (r.mean - 0.25).abs() / r.se;
    Ok(vec![Check::new(
        "brownian-area",
        "variance-quarter",
        z <= 3.0,
        r.mean,
        0.25,
        format!("E[A^2] = {:.5} +- {:.5} ({z:.2} SE from 1/4), {trials} trials, {levels} levels", r.mean, r.se),
    )])
}

pub fn levy_area_model() -> LevyModel {
    LevyModel::pure_jump(LevyMeasureSpec {
        kind: MeasureKind::CompoundPoisson { rate: 20.0, jumps: JumpDist::UniformCube { half_width: 0.5 } },
        dim: 2,
    })
}

pub fn levy_area(seed: u64, trials: usize, levels: usize) -> Result<Vec<Check>> {
    let model = levy_area_model();
    let c0 = area_c0(&model.measure)?;
    let mut checks = Vec::new();
    let mut reports = Vec::new();
    for (k, len) in [1.0, 0.5, 0.25].into_iter().enumerate() {
        let r = area_moment_check(&model, 0.0, len, trials, seed.wrapping_add(k as u64), levels)?;
        let limit = c0 * len * len + 3.0 * r.se;
        checks.push(Check::new(
            "levy-area",
            &format!("moment-bound-{len}"),
            r.mean <= limit,
            r.mean,
            limit,
            format!("C(nu) = C0 = {c0:.5}; mean +- SE = {:.5e} +- {:.2e}; predicted {:.5e}", r.mean, r.se, r.predicted),
        ));
        reports.push(r);
    }
    for w in reports.windows(2) {
        let ratio = w[0].mean / w[1].mean;
        let se = ratio * ((w[0].se / w[0].mean).powi(2) + (w[1].se / w[1].mean).powi(2)).sqrt();
        checks.push(Check::new(
            "levy-area",
            &format!("halving-{}-{}", w[0].interval.1, w[1].interval.1),
            (ratio - 4.0).abs() <= 3.0 * se,
            ratio,
            4.0,
            format!("ratio {ratio:.3} +- {se:.3}"),
        ));
    }
    Ok(checks)
}

pub fn area_bound(seed: u64, count: usize, max_level: usize) -> Result<Vec<Check>> {
    let rows = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let x = sample_path(&LevyModel::brownian(2), 1.0, (1 << max_level) + 1, 1e-9, seed.wrapping_add(k))?;
            let b = area_pvar_bound(&x, 2.5, 2.0, max_level)?;
            Ok(b.lower / b.bound)
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = rows.iter().copied().fold(0.0, f64::max);
    let violations = rows.iter().filter(|&&r| r > 1.0).count();
    Ok(vec![Check::new(
        "area-bound",
        "lower-below-bound",
        violations == 0,
        worst,
        1.0,
        format!("max lower/bound over {count} Brownian paths (p = 2.5, gamma = 2, {max_level} levels)"),
    )])
}

/// Ratios `sup|Y^a - Y^b| / |a - b|` for `|a - b| = r0, r0/2, r0/4, r0/8`.
pub fn flow_ratios(field: &VectorField, x: &SamplePath, p: f64, a: &[f64]) -> Result<Vec<f64>> {
    let u = [0.6, 0.8];
    let solve = |s: &[f64]| -> Result<SamplePath> {
        if p < 2.0 {
            Ok(solve_geometric(field, x, s, p, 1.0)?.path)
        } else {
            Ok(solve_geometric_rough_with(field, x, s, p, 1.0, &RoughOptions::default())?.path)
        }
    };
    let base = solve(a)?;
    (0..4)
        .map(|k| {
            let r = 0.1 / f64::powi(2.0, k);
            let b: Vec<f64> = a.iter().zip(u).map(|(v, w)| v + r * w).collect();
            let other = solve(&b)?;
            Ok(lipschitz_ratio(&[a.to_vec(), b], &[&base, &other]))
        })
        .collect()
}

pub fn flow_presets(d: usize) -> Vec<(&'static str, VectorField)> {
    vec![
        ("constant", VectorField::constant(vec![(0..d).map(|j| 1.0 / (j + 1) as f64).collect(), vec![0.5; d]]).unwrap()),
        (
            "linear",
            VectorField::linear_truncated((0..d).map(|j| vec![vec![0.2, 0.6 / (j + 1) as f64], vec![-0.5, 0.1]]).collect(), 5.0).unwrap(),
        ),
        ("rotation", VectorField::rotation(d, 5.0).unwrap()),
    ]
}

pub fn flow(seed: u64) -> Result<Vec<Check>> {
    let young = sample_path(
        &LevyModel::pure_jump(LevyMeasureSpec {
            kind: MeasureKind::CompoundPoisson { rate: 10.0, jumps: JumpDist::UniformCube { half_width: 0.4 } },
            dim: 2,
        }),
        1.0,
        257,
        1e-3,
        seed,
    )?;
    let rough_model = LevyModel::new(
        vec![0.0, 0.0],
        vec![0.5, 0.0, 0.0, 0.5],
        LevyMeasureSpec { kind: MeasureKind::CompoundPoisson { rate: 5.0, jumps: JumpDist::Normal { std: 0.3 } }, dim: 2 },
    )?;
    let rough = sample_path(&rough_model, 1.0, 1025, 1e-3, seed.wrapping_add(1))?;
    let mut checks = Vec::new();
    for (label, x, p) in [("young", &young, 1.5), ("rough", &rough, 2.5)] {
        for (name, f) in flow_presets(2) {
            let r = flow_ratios(&f, x, p, &[0.8, -0.3])?;
            let (lo, hi) = r.iter().fold((f64::INFINITY, 0.0f64), |a, &v| (a.0.min(v), a.1.max(v)));
            let spread = hi / lo - 1.0;
            checks.push(Check::new(
                "flow",
                &format!("{label}-{name}"),
                spread <= 0.2,
                spread,
                0.2,
                format!("ratios {:?} over 3 halvings of |a - b|", r.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>()),
            ));
        }
    }
    Ok(checks)
}

pub fn smooth_driver<R: Rng>(rng: &mut R, n: usize) -> SamplePath {
    let (w1, w2, p1, p2) = (rng.random_range(1.0..6.0), rng.random_range(1.0..6.0), rng.random_range(0.0..6.0), rng.random_range(0.0..6.0));
    let times: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let rows: Vec<Vec<f64>> = times.iter().map(|t| vec![(w1 * t + p1).sin() - p1.sin(), 0.5 * ((w2 * t + p2).cos() - p2.cos())]).collect();
    SamplePath::from_rows(times, &rows).expect("valid smooth path")
}

/// Rough solver with zeroed area against the Young solver on the same coarse driver.
pub fn degeneracy_gap(seed: u64, k: u64) -> Result<f64> {
    let mut rng = stream_rng(seed, k);
    let x = smooth_driver(&mut rng, 513);
    let presets = flow_presets(2);
    let f = &presets[(k % 3) as usize].1;
    let a = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    let opts = RoughOptions { zero_area: true, ..Default::default() };
    let r = solve_geometric_rough_with(f, &x, &a, 2.5, 1.0, &opts)?;
    let (coarse, _) = coarsen(&x, opts.stride)?;
    let y = solve_geometric(f, &coarse, &a, 1.5, 1.0)?;
    Ok(sup_dist(r.path.values(), y.path.values()))
}

pub fn degeneracy(seed: u64, count: usize) -> Result<Vec<Check>> {
    let gaps = (0..count as u64).into_par_iter().map(|k| degeneracy_gap(seed, k)).collect::<Result<Vec<f64>>>()?;
    let worst = gaps.iter().copied().fold(0.0, f64::max);
    Ok(vec![Check::new("degeneracy", "zero-area-vs-young", worst <= 1e-6, worst, 1e-6, format!("{count} smooth drivers"))])
}

pub fn eta_index() -> Result<Vec<Check>> {
    let idx = bg_index(&LevyMeasureSpec { kind: MeasureKind::EtaExample { m_max: 6 }, dim: 2 })?;
    let at_two = eta_partial_integrals(1 << 16, 2.0);
    let below = eta_partial_integrals(1 << 16, 1.9);
    Ok(vec![
        Check::new("eta-index", "index-near-two", (1.95..=2.0).contains(&idx), idx, 2.0, "bisection on partial-integral growth".into()),
        Check::new("eta-index", "alpha-2-bounded", at_two < 1e6, at_two, 1e6, "partial integrals up to band 2^16".into()),
        Check::new("eta-index", "alpha-1.9-diverges", below > 1e6, below, 1e6, "partial integrals up to band 2^16".into()),
    ])
}
