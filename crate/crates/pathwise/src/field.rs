//! Vector fields `f: R^n -> L(R^d, R^n)` with declared Lipschitz data, and
//! one-forms for rough integration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::norm;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    /// `f(y) = C`, `C` given as `n` rows of length `d`
    Constant { matrix: Vec<Vec<f64>> },
    /// column `j` is `M_j y χ(|y|)`; `matrices[j]` is `n x n`
    LinearTruncated { matrices: Vec<Vec<Vec<f64>>>, radius: f64 },
    /// planar rotation `J y χ(|y|)` on every driver column
    Rotation { driver_dim: usize, radius: f64 },
    /// scalar state, cubic Hermite through `values[k]` (length `d`) at `nodes[k]`
    Tabulated { nodes: Vec<f64>, values: Vec<Vec<f64>> },
}

#[derive(Clone, Debug)]
enum Repr {
    Constant(Vec<f64>),
    Linear { mats: Vec<f64>, radius: f64 },
    Table { nodes: Vec<f64>, values: Vec<f64>, slopes: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct VectorField {
    spec: FieldSpec,
    repr: Repr,
    n: usize,
    d: usize,
    lip_alpha: f64,
    sup: f64,
    grad: f64,
}

fn bump_phi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step from 0 on `(-∞, 0]` to 1 on `[1, ∞)`, with derivative.
pub fn smooth_step(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0);
    }
    let (a, b) = (bump_phi(x), bump_phi(1.0 - x));
    let (da, db) = (a / (x * x), b / ((1.0 - x) * (1.0 - x)));
    let s = a + b;
    (a / s, (da * b + a * db) / (s * s))
}

/// `χ(r)` equal to 1 on `[0, R]`, 0 beyond `2R`, and its derivative.
pub fn cutoff(r: f64, radius: f64) -> (f64, f64) {
    let (s, ds) = smooth_step((r - radius) / radius);
    (1.0 - s, -ds / radius)
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidModel(msg.into())
}

impl VectorField {
    pub fn from_spec(spec: FieldSpec) -> Result<Self> {
        match &spec {
            FieldSpec::Constant { matrix } => {
                let n = matrix.len();
                let d = matrix.first().map(Vec::len).unwrap_or(0);
                if n == 0 || d == 0 || matrix.iter().any(|r| r.len() != d) {
                    return Err(invalid("constant field needs a non-empty rectangular matrix"));
                }
                let flat: Vec<f64> = matrix.concat();
                let sup = norm(&flat);
                Ok(VectorField { spec, repr: Repr::Constant(flat), n, d, lip_alpha: 16.0, sup, grad: 0.0 })
            }
            FieldSpec::LinearTruncated { matrices, radius } => {
                let d = matrices.len();
                let n = matrices.first().map(Vec::len).unwrap_or(0);
                if d == 0 || n == 0 || matrices.iter().any(|m| m.len() != n || m.iter().any(|r| r.len() != n)) {
                    return Err(invalid("linear field needs d square n x n matrices"));
                }
                Self::linear(spec.clone(), matrices.iter().map(|m| m.concat()).collect::<Vec<_>>().concat(), n, d, *radius)
            }
            FieldSpec::Rotation { driver_dim, radius } => {
                if *driver_dim == 0 {
                    return Err(invalid("driver dimension must be positive"));
                }
                let j = [0.0, -1.0, 1.0, 0.0];
                let mats = (0..*driver_dim).flat_map(|_| j).collect();
                Self::linear(spec.clone(), mats, 2, *driver_dim, *radius)
            }
            FieldSpec::Tabulated { nodes, values } => {
                let d = values.first().map(Vec::len).unwrap_or(0);
                if nodes.len() < 2 || nodes.len() != values.len() || d == 0 || values.iter().any(|v| v.len() != d) {
                    return Err(invalid("tabulated field needs at least two nodes with equal-length values"));
                }
                if nodes.windows(2).any(|w| !(w[1] > w[0])) || values.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(invalid("tabulated nodes must increase and values be finite"));
                }
                let k = nodes.len();
                let flat: Vec<f64> = values.concat();
                let mut slopes = vec![0.0; k * d];
                for i in 1..k - 1 {
                    for j in 0..d {
                        slopes[i * d + j] = (flat[(i + 1) * d + j] - flat[(i - 1) * d + j]) / (nodes[i + 1] - nodes[i - 1]);
                    }
                }
                let mut f = VectorField {
                    spec: spec.clone(),
                    repr: Repr::Table { nodes: nodes.clone(), values: flat, slopes },
                    n: 1,
                    d,
                    lip_alpha: 2.0,
                    sup: 0.0,
                    grad: 0.0,
                };
                let (mut sup, mut grad) = (0.0f64, 0.0f64);
                for w in nodes.windows(2) {
                    for s in 0..=256 {
                        let y = w[0] + (w[1] - w[0]) * s as f64 / 256.0;
                        sup = sup.max(norm(&f.eval(&[y])));
                        grad = grad.max(norm(&f.jacobian(&[y])));
                    }
                }
                f.sup = sup * 1.05 + 1e-12;
                f.grad = grad * 1.05 + 1e-12;
                Ok(f)
            }
        }
    }

    fn linear(spec: FieldSpec, mats: Vec<f64>, n: usize, d: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("truncation radius must be positive"));
        }
        if mats.iter().any(|v| !v.is_finite()) {
            return Err(invalid("matrix entries must be finite"));
        }
        let m = norm(&mats);
        Ok(VectorField {
            spec,
            repr: Repr::Linear { mats, radius },
            n,
            d,
            lip_alpha: 4.0,
            sup: 2.0 * radius * m,
            grad: 5.0 * m,
        })
    }

    pub fn constant(matrix: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_spec(FieldSpec::Constant { matrix })
    }

    pub fn linear_truncated(matrices: Vec<Vec<Vec<f64>>>, radius: f64) -> Result<Self> {
        Self::from_spec(FieldSpec::LinearTruncated { matrices, radius })
    }

    /// `f(y) = y` on the real line, truncated beyond `radius`.
    pub fn scalar_linear(radius: f64) -> Self {
        Self::linear_truncated(vec![vec![vec![1.0]]], radius).expect("valid preset")
    }

    pub fn rotation(driver_dim: usize, radius: f64) -> Result<Self> {
        Self::from_spec(FieldSpec::Rotation { driver_dim, radius })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn dim_state(&self) -> usize {
        self.n
    }

    pub fn dim_driver(&self) -> usize {
        self.d
    }

    pub fn lip_alpha(&self) -> f64 {
        self.lip_alpha
    }

    /// Declared `(‖f‖_∞, ‖∇f‖_∞)`.
    pub fn bounds(&self) -> (f64, f64) {
        (self.sup, self.grad)
    }

    pub fn lip_norm(&self) -> f64 {
        self.sup.max(self.grad)
    }

    pub fn truncation_radius(&self) -> Option<f64> {
        match self.repr {
            Repr::Linear { radius, .. } => Some(radius),
            _ => None,
        }
    }

    /// `f(y)` as a row-major `n x d` matrix.
    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n * self.d];
        self.eval_into(y, &mut out);
        out
    }

    pub fn eval_into(&self, y: &[f64], out: &mut [f64]) {
        let (n, d) = (self.n, self.d);
        match &self.repr {
            Repr::Constant(c) => out.copy_from_slice(c),
            Repr::Linear { mats, radius } => {
                let (chi, _) = cutoff(norm(y), *radius);
                for j in 0..d {
                    let m = &mats[j * n * n..(j + 1) * n * n];
                    for i in 0..n {
                        out[i * d + j] = chi * (0..n).map(|k| m[i * n + k] * y[k]).sum::<f64>();
                    }
                }
            }
            Repr::Table { nodes, values, slopes } => {
                let (w, h, i) = locate(nodes, y[0]);
                let Some(i) = i else {
                    let k = if y[0] <= nodes[0] { 0 } else { nodes.len() - 1 };
                    out.copy_from_slice(&values[k * d..(k + 1) * d]);
                    return;
                };
                let (h00, h10, h01, h11) = hermite(w);
                for j in 0..d {
                    out[j] = h00 * values[i * d + j]
                        + h10 * h * slopes[i * d + j]
                        + h01 * values[(i + 1) * d + j]
                        + h11 * h * slopes[(i + 1) * d + j];
                }
            }
        }
    }

    /// `∂_k f_{ij}(y)` at flat index `(i * d + j) * n + k`.
    pub fn jacobian(&self, y: &[f64]) -> Vec<f64> {
        let (n, d) = (self.n, self.d);
        let mut out = vec![0.0; n * d * n];
        match &self.repr {
            Repr::Constant(_) => {}
            Repr::Linear { mats, radius } => {
                let r = norm(y);
                let (chi, dchi) = cutoff(r, *radius);
                for j in 0..d {
                    let m = &mats[j * n * n..(j + 1) * n * n];
                    for i in 0..n {
                        let my: f64 = (0..n).map(|k| m[i * n + k] * y[k]).sum();
                        for k in 0..n {
                            let radial = if r > 0.0 { my * dchi * y[k] / r } else { 0.0 };
                            out[(i * d + j) * n + k] = chi * m[i * n + k] + radial;
                        }
                    }
                }
            }
            Repr::Table { nodes, values, slopes } => {
                let (w, h, i) = locate(nodes, y[0]);
                if let Some(i) = i {
                    let (d00, d10, d01, d11) = (6.0 * w * w - 6.0 * w, 3.0 * w * w - 4.0 * w + 1.0, -6.0 * w * w + 6.0 * w, 3.0 * w * w - 2.0 * w);
                    for j in 0..d {
                        out[j] = (d00 * values[i * d + j] + d01 * values[(i + 1) * d + j]) / h
                            + d10 * slopes[i * d + j]
                            + d11 * slopes[(i + 1) * d + j];
                    }
                }
            }
        }
        out
    }

    /// `f(y) dx`
    pub fn apply(&self, y: &[f64], dx: &[f64]) -> Vec<f64> {
        let f = self.eval(y);
        (0..self.n).map(|i| (0..self.d).map(|j| f[i * self.d + j] * dx[j]).sum()).collect()
    }

    /// `(Df·f)_{i,a,b} = Σ_k ∂_k f_{ia} f_{kb}` at flat index `(i * d + a) * d + b`.
    pub fn second_order(&self, y: &[f64]) -> Vec<f64> {
        let (n, d) = (self.n, self.d);
        let f = self.eval(y);
        let jac = self.jacobian(y);
        let mut out = vec![0.0; n * d * d];
        for i in 0..n {
            for a in 0..d {
                for b in 0..d {
                    out[(i * d + a) * d + b] = (0..n).map(|k| jac[(i * d + a) * n + k] * f[k * d + b]).sum();
                }
            }
        }
        out
    }

    pub fn check_dims(&self, state: &[f64], driver_dim: usize) -> Result<()> {
        if state.len() != self.n || driver_dim != self.d {
            return Err(Error::Dimension(format!(
                "field maps R^{} -> L(R^{}, R^{}); got state of length {} and driver of dimension {}",
                self.n,
                self.d,
                self.n,
                state.len(),
                driver_dim
            )));
        }
        Ok(())
    }
}

fn locate(nodes: &[f64], y: f64) -> (f64, f64, Option<usize>) {
    if y <= nodes[0] || y >= nodes[nodes.len() - 1] {
        return (0.0, 1.0, None);
    }
    let i = nodes.partition_point(|&x| x <= y) - 1;
    let h = nodes[i + 1] - nodes[i];
    ((y - nodes[i]) / h, h, Some(i))
}

fn hermite(t: f64) -> (f64, f64, f64, f64) {
    let (t2, t3) = (t * t, t * t * t);
    (2.0 * t3 - 3.0 * t2 + 1.0, t3 - 2.0 * t2 + t, -2.0 * t3 + 3.0 * t2, t3 - t2)
}

/// A map `θ: R^d -> L(R^d, R^e)` with derivative.
pub trait OneForm {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;
    /// row-major `e x d`
    fn value(&self, x: &[f64]) -> Vec<f64>;
    /// `∂_k θ_{ia}` at flat index `(i * d + a) * d + k`
    fn derivative(&self, x: &[f64]) -> Vec<f64>;
}

impl OneForm for VectorField {
    fn in_dim(&self) -> usize {
        self.n
    }

    fn out_dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> Vec<f64> {
        self.eval(x)
    }

    fn derivative(&self, x: &[f64]) -> Vec<f64> {
        self.jacobian(x)
    }
}

/// `θ(x) = base + Σ_k x_k linear[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineForm {
    pub d: usize,
    pub e: usize,
    /// `e x d`
    pub base: Vec<f64>,
    /// `d` blocks of `e x d`
    pub linear: Vec<f64>,
}

impl AffineForm {
    pub fn constant(e: usize, d: usize, base: Vec<f64>) -> Self {
        AffineForm { d, e, base, linear: vec![0.0; e * d * d] }
    }

    /// `θ(x) v = x ⋅ v` style forms: entry `(i, a)` of `θ(x)` is `Σ_k coeff[(i,a,k)] x_k`.
    pub fn linear(e: usize, d: usize, coeff: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut linear = vec![0.0; e * d * d];
        for k in 0..d {
            for i in 0..e {
                for a in 0..d {
                    linear[k * e * d + i * d + a] = coeff(i, a, k);
                }
            }
        }
        AffineForm { d, e, base: vec![0.0; e * d], linear }
    }
}

impl OneForm for AffineForm {
    fn in_dim(&self) -> usize {
        self.d
    }

    fn out_dim(&self) -> usize {
        self.e
    }

    fn value(&self, x: &[f64]) -> Vec<f64> {
        let mut v = self.base.clone();
        let block = self.e * self.d;
        for (k, xk) in x.iter().enumerate() {
            for (o, l) in v.iter_mut().zip(&self.linear[k * block..(k + 1) * block]) {
                *o += xk * l;
            }
        }
        v
    }

    fn derivative(&self, _x: &[f64]) -> Vec<f64> {
        let (e, d) = (self.e, self.d);
        let mut out = vec![0.0; e * d * d];
        for k in 0..d {
            for ia in 0..e * d {
                out[ia * d + k] = self.linear[k * e * d + ia];
            }
        }
        out
    }
}
