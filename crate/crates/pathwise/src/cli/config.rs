//! Run configuration: TOML file keys overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::field::{FieldSpec, VectorField};
use crate::levy::{JumpDist, LevyMeasureSpec, LevyModel, MeasureKind};

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SolutionChoice {
    #[default]
    Geometric,
    Forward,
    Corrective,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// `brownian`, `compound_poisson`, `brownian_jumps`, `stable`, `eta`
    pub preset: Option<String>,
    pub dim: Option<usize>,
    pub drift: Option<Vec<f64>>,
    pub gaussian_cov: Option<Vec<f64>>,
    pub measure: Option<MeasureKind>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    /// `constant`, `linear`, `rotation`, `tabulated`
    pub preset: Option<String>,
    pub radius: Option<f64>,
    pub spec: Option<FieldSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericConfig {
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub tol: Option<f64>,
    pub max_level: Option<usize>,
    pub trials: Option<usize>,
    pub points: Option<usize>,
    pub horizon: Option<f64>,
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub gamma: Option<f64>,
    pub corrected: Option<usize>,
    pub stride: Option<usize>,
    pub initial: Option<Vec<f64>>,
    pub solution: Option<SolutionChoice>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub input: Option<PathBuf>,
    pub model: Option<ModelConfig>,
    pub field: Option<FieldConfig>,
    pub numeric: Option<NumericConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| bad(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Numeric {
    pub p: f64,
    pub q: f64,
    pub delta: f64,
    pub eps: f64,
    pub tol: f64,
    pub max_level: usize,
    pub trials: usize,
    pub points: usize,
    pub horizon: f64,
    pub s: f64,
    pub t: f64,
    pub gamma: f64,
    pub corrected: usize,
    pub stride: usize,
    pub initial: Option<Vec<f64>>,
    pub solution: SolutionChoice,
}

/// Fully resolved configuration; its JSON form is what gets hashed.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub suite: Option<String>,
    pub seed: Option<u64>,
    pub format: Format,
    pub input: Option<PathBuf>,
    pub model: ModelConfig,
    pub field: FieldConfig,
    pub numeric: Numeric,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn require_seed(&self) -> Result<u64, ConfigError> {
        self.seed.ok_or_else(|| bad(format!("`{}` is stochastic and needs --seed", self.command)))
    }

    pub fn model(&self) -> Result<LevyModel, ConfigError> {
        build_model(&self.model)
    }

    pub fn field(&self, driver_dim: usize) -> Result<VectorField, ConfigError> {
        build_field(&self.field, driver_dim)
    }
}

pub fn resolve_numeric(n: &NumericConfig) -> Result<Numeric, ConfigError> {
    let p = n.p.unwrap_or(1.5);
    let out = Numeric {
        p,
        q: n.q.unwrap_or(p),
        delta: n.delta.unwrap_or(1.0),
        eps: n.eps.unwrap_or(1e-3),
        tol: n.tol.unwrap_or(1e-10),
        max_level: n.max_level.unwrap_or(10),
        trials: n.trials.unwrap_or(1000),
        points: n.points.unwrap_or(1025),
        horizon: n.horizon.unwrap_or(1.0),
        s: n.s.unwrap_or(0.0),
        t: n.t.unwrap_or(1.0),
        gamma: n.gamma.unwrap_or(2.0),
        corrected: n.corrected.unwrap_or(0),
        stride: n.stride.unwrap_or(16),
        initial: n.initial.clone(),
        solution: n.solution.unwrap_or_default(),
    };
    let check = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(bad(msg.to_string())) };
    check(out.p >= 1.0 && out.p < 3.0, "numeric.p must lie in [1, 3)")?;
    check(out.q >= 1.0 && out.q.is_finite(), "numeric.q must be at least 1")?;
    check(out.delta > 0.0 && out.delta.is_finite(), "numeric.delta must be positive")?;
    check(out.eps > 0.0 && out.eps <= 1.0, "numeric.eps must lie in (0, 1]")?;
    check(out.tol > 0.0 && out.tol < 1.0, "numeric.tol must lie in (0, 1)")?;
    check((1..=20).contains(&out.max_level), "numeric.max_level must lie in 1..=20")?;
    check(out.trials >= 2, "numeric.trials must be at least 2")?;
    check(out.points >= 2 && out.points <= 1 << 22, "numeric.points must lie in 2..=4194304")?;
    check(out.horizon > 0.0 && out.horizon.is_finite(), "numeric.horizon must be positive")?;
    check(0.0 <= out.s && out.s < out.t && out.t <= out.horizon, "need 0 <= numeric.s < numeric.t <= horizon")?;
    check(out.gamma > 0.0 && out.gamma.is_finite(), "numeric.gamma must be positive")?;
    check(out.stride >= 1, "numeric.stride must be positive")?;
    Ok(out)
}

fn identity(d: usize, scale: f64) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = scale;
    }
    m
}

pub fn build_model(cfg: &ModelConfig) -> Result<LevyModel, ConfigError> {
    let dim = cfg.dim.unwrap_or(2);
    if dim == 0 {
        return Err(bad("model.dim must be positive"));
    }
    let (mut drift, mut cov, mut kind) = match cfg.preset.as_deref() {
        None | Some("brownian") => (vec![0.0; dim], identity(dim, 1.0), MeasureKind::Zero),
        Some("compound_poisson") => (
            vec![0.0; dim],
            vec![0.0; dim * dim],
            MeasureKind::CompoundPoisson { rate: 20.0, jumps: JumpDist::UniformCube { half_width: 0.5 } },
        ),
        Some("brownian_jumps") => (
            vec![0.0; dim],
            identity(dim, 0.25),
            MeasureKind::CompoundPoisson { rate: 5.0, jumps: JumpDist::Normal { std: 0.3 } },
        ),
        Some("stable") => (vec![0.0; dim], vec![0.0; dim * dim], MeasureKind::AlphaStable { alpha: 1.5, scale: 0.2 }),
        Some("eta") => (vec![0.0; dim], vec![0.0; dim * dim], MeasureKind::EtaExample { m_max: 6 }),
        Some(other) => return Err(bad(format!("unknown model preset `{other}`"))),
    };
    if let Some(d) = &cfg.drift {
        drift.clone_from(d);
    }
    if let Some(c) = &cfg.gaussian_cov {
        cov.clone_from(c);
    }
    if let Some(m) = &cfg.measure {
        kind = m.clone();
    }
    LevyModel::new(drift, cov, LevyMeasureSpec { kind, dim }).map_err(|e| bad(format!("invalid model: {e}")))
}

pub fn build_field(cfg: &FieldConfig, d: usize) -> Result<VectorField, ConfigError> {
    let radius = cfg.radius.unwrap_or(10.0);
    let spec = match (&cfg.spec, cfg.preset.as_deref()) {
        (Some(spec), None) => spec.clone(),
        (Some(_), Some(_)) => return Err(bad("give either field.preset or field.spec, not both")),
        (None, None) | (None, Some("linear")) => FieldSpec::LinearTruncated {
            matrices: (0..d)
                .map(|j| {
                    let a = 1.0 / (j + 1) as f64;
                    vec![vec![0.5 * a, a], vec![-a, 0.25 * a]]
                })
                .collect(),
            radius,
        },
        (None, Some("constant")) => FieldSpec::Constant {
            matrix: vec![(0..d).map(|j| 1.0 / (j + 1) as f64).collect(), (0..d).map(|j| if j % 2 == 0 { 0.5 } else { -1.0 }).collect()],
        },
        (None, Some("rotation")) => FieldSpec::Rotation { driver_dim: d, radius },
        (None, Some("tabulated")) => FieldSpec::Tabulated {
            nodes: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            values: [0.5, 1.0, 0.8, 1.2, 0.6].iter().map(|v| (0..d).map(|j| v / (j + 1) as f64).collect()).collect(),
        },
        (None, Some(other)) => return Err(bad(format!("unknown field preset `{other}`"))),
    };
    let field = VectorField::from_spec(spec).map_err(|e| bad(format!("invalid field: {e}")))?;
    if field.dim_driver() != d {
        return Err(bad(format!("field expects a {}-dimensional driver, driver has dimension {d}", field.dim_driver())));
    }
    Ok(field)
}
