//! Python bindings: sampled paths, vector fields, p-variation, the solvers and
//! dyadic Levy areas. Arrays cross the boundary as nested lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use pathwise::field::VectorField;
use pathwise::levy::{self, JumpDist, LevyMeasureSpec, LevyModel, MeasureKind};
use pathwise::rough::{self, RoughOptions};
use pathwise::{area, param, pvar, solver, SamplePath};

fn err(e: pathwise::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A sampled cadlag path with registered jumps.
#[pyclass(name = "Path", module = "pypathwise", frozen)]
struct PyPath {
    inner: SamplePath,
}

#[pymethods]
impl PyPath {
    /// `values` has one row per time; `jumps` lists `(index, left_limit)`.
    #[new]
    #[pyo3(signature = (times, values, jumps = Vec::new()))]
    fn new(times: Vec<f64>, values: Vec<Vec<f64>>, jumps: Vec<(usize, Vec<f64>)>) -> PyResult<Self> {
        let dim = values.first().map_or(0, Vec::len);
        if values.iter().any(|r| r.len() != dim) {
            return Err(PyValueError::new_err("rows of `values` differ in length"));
        }
        let flat = values.concat();
        SamplePath::new(times, dim, flat, jumps).map(|inner| PyPath { inner }).map_err(err)
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        SamplePath::from_csv(text).map(|inner| PyPath { inner }).map_err(err)
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<Vec<f64>> {
        (0..self.inner.len()).map(|i| self.inner.value(i).to_vec()).collect()
    }

    /// `(index, left_limit)` in time order.
    #[getter]
    fn jumps(&self) -> Vec<(usize, Vec<f64>)> {
        self.inner.chronological().map(|(_, j)| (j.index, j.left.clone())).collect()
    }

    fn __repr__(&self) -> String {
        format!("Path(len={}, dim={}, jumps={})", self.inner.len(), self.inner.dim(), self.inner.jumps().len())
    }
}

/// Vector field `f: R^n -> L(R^d, R^n)` from one of the presets.
#[pyclass(name = "Field", module = "pypathwise", frozen)]
struct PyField {
    inner: VectorField,
}

#[pymethods]
impl PyField {
    /// `matrix[r][j]`: constant field, state row `r`, driver column `j`.
    #[staticmethod]
    fn constant(matrix: Vec<Vec<f64>>) -> PyResult<Self> {
        VectorField::constant(matrix).map(|inner| PyField { inner }).map_err(err)
    }

    /// `y -> M_j y` per driver coordinate `j`, smoothly cut off beyond `radius`.
    #[staticmethod]
    fn linear(matrices: Vec<Vec<Vec<f64>>>, radius: f64) -> PyResult<Self> {
        VectorField::linear_truncated(matrices, radius).map(|inner| PyField { inner }).map_err(err)
    }

    #[staticmethod]
    fn rotation(driver_dim: usize, radius: f64) -> PyResult<Self> {
        VectorField::rotation(driver_dim, radius).map(|inner| PyField { inner }).map_err(err)
    }

    #[staticmethod]
    fn scalar_linear(radius: f64) -> Self {
        PyField { inner: VectorField::scalar_linear(radius) }
    }

    #[getter]
    fn dim_state(&self) -> usize {
        self.inner.dim_state()
    }

    #[getter]
    fn dim_driver(&self) -> usize {
        self.inner.dim_driver()
    }

    fn eval(&self, y: Vec<f64>) -> Vec<f64> {
        self.inner.eval(&y)
    }

    /// `(geometric, forward, bound)` jump updates from state `y`.
    fn jump_gap(&self, y: Vec<f64>, dx: Vec<f64>) -> (Vec<f64>, Vec<f64>, f64) {
        let g = solver::jump_gap(&self.inner, &y, &dx);
        (g.geometric, g.forward, g.bound)
    }
}

fn model(name: &str, dim: usize) -> PyResult<LevyModel> {
    let cp = |rate, jumps| LevyMeasureSpec { kind: MeasureKind::CompoundPoisson { rate, jumps }, dim };
    Ok(match name {
        "brownian" => LevyModel::brownian(dim),
        "compound_poisson" => LevyModel::pure_jump(cp(20.0, JumpDist::UniformCube { half_width: 0.5 })),
        "brownian_jumps" => {
            let mut cov = vec![0.0; dim * dim];
            (0..dim).for_each(|i| cov[i * dim + i] = 0.25);
            LevyModel::new(vec![0.0; dim], cov, cp(5.0, JumpDist::Normal { std: 0.3 })).map_err(err)?
        }
        "stable" => LevyModel::pure_jump(LevyMeasureSpec { kind: MeasureKind::AlphaStable { alpha: 1.5, scale: 0.2 }, dim }),
        other => return Err(PyValueError::new_err(format!("unknown model `{other}`"))),
    })
}

/// Sample a path of `points` grid values on `[0, horizon]` from a model preset.
#[pyfunction]
#[pyo3(signature = (model_name, seed, dim = 2, horizon = 1.0, points = 1025, eps = 1e-3))]
fn simulate(model_name: &str, seed: u64, dim: usize, horizon: f64, points: usize, eps: f64) -> PyResult<PyPath> {
    let m = model(model_name, dim)?;
    levy::sample_path(&m, horizon, points, eps, seed).map(|inner| PyPath { inner }).map_err(err)
}

/// Exact p-variation and the skeleton positions of an optimal partition.
#[pyfunction]
fn pvar_exact(path: &PyPath, p: f64) -> PyResult<(f64, Vec<usize>)> {
    pvar::pvar_exact(&path.inner, p).map(|r| (r.value, r.witness_partition)).map_err(err)
}

#[pyfunction]
fn pvar_brute(path: &PyPath, p: f64) -> PyResult<(f64, Vec<usize>)> {
    pvar::pvar_brute(&path.inner, p).map(|r| (r.value, r.witness_partition)).map_err(err)
}

/// Continuous path with each jump replaced by a straight fictitious segment.
#[pyfunction]
fn parametrise(path: &PyPath, delta: f64, p: f64) -> PyResult<PyPath> {
    param::parametrise(&path.inner, delta, p).map(|(inner, _)| PyPath { inner }).map_err(err)
}

/// Solve along `path`. `scheme` is `geometric`, `forward` or `corrective`;
/// `p >= 2` switches to the area-corrected rough solver.
#[pyfunction]
#[pyo3(signature = (field, path, initial, p, scheme = "geometric", delta = 1.0, corrected = 0))]
fn solve(field: &PyField, path: &PyPath, initial: Vec<f64>, p: f64, scheme: &str, delta: f64, corrected: usize) -> PyResult<PyPath> {
    let (f, x, a) = (&field.inner, &path.inner, &initial);
    let sol = match (scheme, p < 2.0) {
        ("geometric", true) => solver::solve_geometric(f, x, a, p, delta),
        ("forward", true) => solver::solve_forward(f, x, a, p),
        ("corrective", true) => solver::solve_corrective(f, x, a, p, corrected),
        ("geometric", false) => rough::solve_geometric_rough_with(f, x, a, p, delta, &RoughOptions::default()),
        ("forward", false) => rough::solve_forward_rough_with(f, x, a, p, &RoughOptions::default()),
        _ => return Err(PyValueError::new_err(format!("scheme `{scheme}` is not available for p = {p}"))),
    };
    sol.map(|s| PyPath { inner: s.path }).map_err(err)
}

/// Dyadic Levy area matrix of `path` over `[s, t]`.
#[pyfunction]
fn area_dyadic(path: &PyPath, s: f64, t: f64, levels: usize) -> PyResult<Vec<Vec<f64>>> {
    let a = area::area_dyadic(&path.inner, s, t, levels).map_err(err)?;
    Ok(a.matrix.chunks(a.dim).map(<[f64]>::to_vec).collect())
}

/// `(mean, standard error, predicted)` of the squared (1, 2) area by Monte Carlo.
#[pyfunction]
#[pyo3(signature = (model_name, seed, trials = 1000, s = 0.0, t = 1.0, levels = 10))]
fn area_moment(model_name: &str, seed: u64, trials: usize, s: f64, t: f64, levels: usize) -> PyResult<(f64, f64, f64)> {
    let r = area::area_moment_check(&model(model_name, 2)?, s, t, trials, seed, levels).map_err(err)?;
    Ok((r.mean, r.se, r.predicted))
}

/// Blumenthal-Getoor index of the eta example measure.
#[pyfunction]
fn eta_index() -> PyResult<f64> {
    levy::bg_index(&LevyMeasureSpec { kind: MeasureKind::EtaExample { m_max: 6 }, dim: 1 }).map_err(err)
}

#[pymodule]
fn pypathwise(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPath>()?;
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(pvar_exact, m)?)?;
    m.add_function(wrap_pyfunction!(pvar_brute, m)?)?;
    m.add_function(wrap_pyfunction!(parametrise, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(area_dyadic, m)?)?;
    m.add_function(wrap_pyfunction!(area_moment, m)?)?;
    m.add_function(wrap_pyfunction!(eta_index, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
