use std::fs;

use serde::Serialize;
use serde_json::json;

use super::config::{ConfigError, Format, RunConfig, SolutionChoice};
use super::verify;
use crate::area::area_moment_check;
use crate::field::FieldSpec;
use crate::levy::sample_path;
use crate::param::parametrise;
use crate::path::SamplePath;
use crate::pvar::pvar_exact;
use crate::rough::{dyadic_level2, solve_forward_rough_with, solve_geometric_rough_with, RoughOptions};
use crate::solver::{solve_corrective_with, solve_forward_with, solve_geometric_with, Solution, SolverOptions};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Lib(#[from] crate::Error),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Collects artifacts; written to `out` with a provenance record, or the
/// primary artifact printed to stdout.
struct Sink<'a> {
    cfg: &'a RunConfig,
    files: Vec<(String, String)>,
}

impl<'a> Sink<'a> {
    fn new(cfg: &'a RunConfig) -> Self {
        Sink { cfg, files: Vec::new() }
    }

    fn add(&mut self, name: impl Into<String>, body: String) {
        self.files.push((name.into(), body));
    }

    fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut body = serde_json::to_string_pretty(value).expect("serialisable");
        body.push('\n');
        self.add(name, body);
    }

    fn add_path(&mut self, stem: &str, path: &SamplePath) {
        match self.cfg.format {
            Format::Csv => self.add(format!("{stem}.csv"), path.to_csv()),
            Format::Json => self.add_json(&format!("{stem}.json"), &path_json(path)),
        }
    }

    fn finish(self) -> Result<(), RunError> {
        match &self.cfg.out {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                let names: Vec<&str> = self.files.iter().map(|f| f.0.as_str()).collect();
                let prov = json!({
                    "command": self.cfg.command,
                    "suite": self.cfg.suite,
                    "config_hash": self.cfg.hash(),
                    "seed": self.cfg.seed,
                    "version": VERSION,
                    "artifacts": names,
                });
                for (name, body) in &self.files {
                    fs::write(dir.join(name), body)?;
                }
                fs::write(dir.join("provenance.json"), serde_json::to_string_pretty(&prov).expect("json") + "\n")?;
            }
            None => {
                if let Some((_, body)) = self.files.first() {
                    print!("{body}");
                }
            }
        }
        Ok(())
    }
}

pub fn path_json(path: &SamplePath) -> serde_json::Value {
    let rows: Vec<&[f64]> = (0..path.len()).map(|i| path.value(i)).collect();
    let mut jumps: Vec<_> = path.chronological().map(|(_, j)| json!({"index": j.index, "left": j.left})).collect();
    jumps.sort_by_key(|j| j["index"].as_u64());
    json!({"dim": path.dim(), "times": path.times(), "values": rows, "jumps": jumps})
}

fn driver(cfg: &RunConfig) -> Result<SamplePath, RunError> {
    match &cfg.input {
        Some(p) => SamplePath::read_csv(p).map_err(|e| ConfigError(format!("cannot load driver {}: {e}", p.display())).into()),
        None => {
            let seed = cfg.require_seed()?;
            let n = &cfg.numeric;
            Ok(sample_path(&cfg.model()?, n.horizon, n.points, n.eps, seed)?)
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<bool, RunError> {
    match cfg.command.as_str() {
        "simulate" => simulate(cfg),
        "solve" => solve(cfg),
        "area" => area(cfg),
        "pvar" => pvar(cfg),
        "verify" => run_verify(cfg),
        other => Err(ConfigError(format!("unknown command {other}")).into()),
    }
}

fn simulate(cfg: &RunConfig) -> Result<bool, RunError> {
    cfg.require_seed()?;
    let path = driver(&RunConfig { input: None, ..cfg.clone() })?;
    let mut sink = Sink::new(cfg);
    sink.add_path("path", &path);
    sink.finish()?;
    Ok(true)
}

fn initial_state(cfg: &RunConfig, n: usize) -> Result<Vec<f64>, ConfigError> {
    match &cfg.numeric.initial {
        Some(a) if a.len() == n => Ok(a.clone()),
        Some(a) => Err(ConfigError(format!("numeric.initial has length {}, state dimension is {n}", a.len()))),
        None => Ok((0..n).map(|i| if i == 0 { 1.0 } else { 0.5 }).collect()),
    }
}

fn solve(cfg: &RunConfig) -> Result<bool, RunError> {
    let x = driver(cfg)?;
    let field = cfg.field(x.dim())?;
    let a = initial_state(cfg, field.dim_state())?;
    let num = &cfg.numeric;
    let opts = SolverOptions { tol: num.tol, ..Default::default() };
    let p = num.p;
    let sol: Solution = if p < 2.0 {
        match num.solution {
            SolutionChoice::Geometric => solve_geometric_with(&field, &x, &a, p, num.delta, opts)?,
            SolutionChoice::Forward => solve_forward_with(&field, &x, &a, p, opts)?,
            SolutionChoice::Corrective => solve_corrective_with(&field, &x, &a, p, num.corrected, opts)?,
        }
    } else {
        let ropts = RoughOptions { stride: num.stride, solver: opts, ..Default::default() };
        match num.solution {
            SolutionChoice::Geometric => solve_geometric_rough_with(&field, &x, &a, p, num.delta, &ropts)?,
            SolutionChoice::Forward => solve_forward_rough_with(&field, &x, &a, p, &ropts)?,
            SolutionChoice::Corrective => {
                return Err(ConfigError("the corrective scheme needs p < 2".into()).into());
            }
        }
    };
    let mut driver_ref = sol.driver_ref.clone();
    if cfg.input.is_none() {
        driver_ref.model = cfg.model.preset.clone().or(Some("custom".into()));
        driver_ref.seed = cfg.seed;
        driver_ref.eps = Some(num.eps);
    }
    let mut ok = true;
    if let FieldSpec::Constant { matrix } = field.spec() {
        // translation along the driver: Y_t = a + C (x_t - x_0)
        let mut worst = 0.0f64;
        for i in 0..sol.path.len() {
            let k = x.index_of_time(sol.path.time(i), 0.0).expect("solution grid is a driver subgrid");
            for (r, row) in matrix.iter().enumerate() {
                let expect = a[r] + row.iter().enumerate().map(|(j, c)| c * (x.value(k)[j] - x.value(0)[j])).sum::<f64>();
                worst = worst.max((sol.path.value(i)[r] - expect).abs());
            }
        }
        ok = worst <= 1e-9;
        eprintln!("{} constant-field check: max deviation {worst:.3e}", if ok { "PASS" } else { "FAIL" });
    }
    let mut sink = Sink::new(cfg);
    sink.add_path("solution", &sol.path);
    sink.add_json(
        "solution_meta.json",
        &json!({
            "kind": sol.kind,
            "driver_ref": driver_ref,
            "picard_iterations": sol.picard_iterations,
            "residual": sol.residual,
            "p": p,
            "initial": a,
        }),
    );
    if p < 2.0 && num.solution == SolutionChoice::Geometric {
        let (_, par) = parametrise(&x, num.delta, p)?;
        sink.add_json("parametrisation.json", &par);
    }
    sink.finish()?;
    Ok(ok)
}

fn area(cfg: &RunConfig) -> Result<bool, RunError> {
    let num = &cfg.numeric;
    let mut sink = Sink::new(cfg);
    if cfg.input.is_some() {
        let x = driver(cfg)?;
        let entries = dyadic_level2(&x, num.max_level)?;
        let total = crate::area::area_dyadic(&x, 0.0, x.horizon(), num.max_level)?;
        sink.add_json("area.json", &json!({"interval": total.interval, "dim": total.dim, "matrix": total.matrix, "levels": total.levels_used}));
        sink.add_json("level2.json", &entries);
        sink.finish()?;
        return Ok(true);
    }
    let seed = cfg.require_seed()?;
    let r = area_moment_check(&cfg.model()?, num.s, num.t, num.trials, seed, num.max_level)?;
    let line = format!(
        "{} area moment on [{}, {}]: E[A^2] = {:.6e} +- {:.3e}; predicted {:.6e}; bound C0 (t-s)^2 = {:.6e}; {} trials, {} levels\n",
        if r.pass { "PASS" } else { "FAIL" },
        r.interval.0,
        r.interval.1,
        r.mean,
        r.se,
        r.predicted,
        r.bound,
        r.trials,
        r.levels
    );
    sink.add("area_report.txt", line);
    sink.add_json(
        "area_report.json",
        &json!({
            "interval": r.interval, "trials": r.trials, "levels": r.levels,
            "mean_area": r.mean_area, "se_area": r.se_area, "mean": r.mean, "se": r.se,
            "c0": r.c0, "bound": r.bound, "predicted": r.predicted, "pass": r.pass,
        }),
    );
    sink.finish()?;
    Ok(r.pass)
}

fn pvar(cfg: &RunConfig) -> Result<bool, RunError> {
    let x = driver(cfg)?;
    let r = pvar_exact(&x, cfg.numeric.p)?;
    let mut sink = Sink::new(cfg);
    sink.add_json("pvar.json", &json!({"p": cfg.numeric.p, "value": r.value, "witness_partition": r.witness_partition}));
    sink.finish()?;
    Ok(true)
}

fn run_verify(cfg: &RunConfig) -> Result<bool, RunError> {
    let seed = cfg.require_seed()?;
    let suite = cfg.suite.clone().unwrap_or_else(|| "all".into());
    let names: Vec<&str> = if suite == "all" { verify::SUITES.to_vec() } else { vec![suite.as_str()] };
    let mut text = String::new();
    let mut checks = Vec::new();
    for name in names {
        for c in verify::run_suite(name, seed, &cfg.numeric)? {
            text.push_str(&c.line());
            text.push('\n');
            checks.push(c);
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    text.push_str(&format!("RESULT {} ({} checks, seed {seed})\n", if pass { "PASS" } else { "FAIL" }, checks.len()));
    let mut sink = Sink::new(cfg);
    sink.add("report.txt", text);
    sink.add_json("report.json", &checks);
    sink.finish()?;
    Ok(pass)
}
