//! Smooth convex objectives with analytic gradients.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};

/// A differentiable function `f: Rⁿ → R` with a known smoothness constant.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &DVector<f64>) -> Result<f64>;

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>>;

    /// Lipschitz constant `L` of the gradient.
    fn smoothness(&self) -> f64;
}

/// `½‖x − target‖²`.
#[derive(Debug, Clone)]
pub struct QuadraticDistance {
    target: DVector<f64>,
}

impl QuadraticDistance {
    pub fn new(target: DVector<f64>) -> Self {
        QuadraticDistance { target }
    }

    pub fn target(&self) -> &DVector<f64> {
        &self.target
    }
}

impl Objective for QuadraticDistance {
    fn dim(&self) -> usize {
        self.target.len()
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(0.5 * (x - &self.target).norm_squared())
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(x - &self.target)
    }

    fn smoothness(&self) -> f64 {
        1.0
    }
}

/// Scalar Huber function: `x²/2` for `|x| < ε`, `ε|x| − ε²/2` beyond.
#[derive(Debug, Clone, Copy)]
pub struct ScalarHuber {
    eps: f64,
}

impl ScalarHuber {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::invalid("huber epsilon", format!("{eps} must be > 0")));
        }
        Ok(ScalarHuber { eps })
    }
}

fn huber(r: f64, delta: f64) -> f64 {
    if r.abs() < delta {
        0.5 * r * r
    } else {
        delta * r.abs() - 0.5 * delta * delta
    }
}

fn huber_slope(r: f64, delta: f64) -> f64 {
    r.clamp(-delta, delta)
}

impl Objective for ScalarHuber {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(1, x.len())?;
        Ok(huber(x[0], self.eps))
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(1, x.len())?;
        Ok(DVector::from_element(1, huber_slope(x[0], self.eps)))
    }

    fn smoothness(&self) -> f64 {
        1.0
    }
}

/// `½‖Ax − b‖²`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    design: DMatrix<f64>,
    response: DVector<f64>,
    lipschitz: f64,
}

impl LeastSquares {
    pub fn new(design: DMatrix<f64>, response: DVector<f64>) -> Result<Self> {
        check_dim(design.nrows(), response.len())?;
        let lipschitz = spectral_norm(&design).powi(2);
        Ok(LeastSquares {
            design,
            response,
            lipschitz,
        })
    }
}

impl Objective for LeastSquares {
    fn dim(&self) -> usize {
        self.design.ncols()
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(0.5 * (&self.design * x - &self.response).norm_squared())
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), x.len())?;
        let r = &self.design * x - &self.response;
        Ok(self.design.tr_mul(&r))
    }

    fn smoothness(&self) -> f64 {
        self.lipschitz
    }
}

/// Mean logistic loss `(1/m) Σ log(1 + exp(−yᵢ aᵢᵀx))` with labels in `{−1, +1}`.
#[derive(Debug, Clone)]
pub struct LogisticLoss {
    features: DMatrix<f64>,
    labels: DVector<f64>,
    lipschitz: f64,
}

impl LogisticLoss {
    pub fn new(features: DMatrix<f64>, labels: DVector<f64>) -> Result<Self> {
        check_dim(features.nrows(), labels.len())?;
        if features.nrows() == 0 {
            return Err(Error::invalid("logistic loss", "no samples"));
        }
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::invalid("logistic loss", "labels must be -1 or +1"));
        }
        let lipschitz = spectral_norm(&features).powi(2) / (4.0 * features.nrows() as f64);
        Ok(LogisticLoss {
            features,
            labels,
            lipschitz,
        })
    }

    fn margins(&self, x: &DVector<f64>) -> DVector<f64> {
        (&self.features * x).component_mul(&self.labels)
    }
}

/// `log(1 + exp(−z))` without overflow.
fn softplus_neg(z: f64) -> f64 {
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

/// `1 / (1 + exp(z))`.
fn sigmoid_neg(z: f64) -> f64 {
    if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

impl Objective for LogisticLoss {
    fn dim(&self) -> usize {
        self.features.ncols()
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let m = self.features.nrows() as f64;
        Ok(self.margins(x).iter().map(|&z| softplus_neg(z)).sum::<f64>() / m)
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), x.len())?;
        let m = self.features.nrows() as f64;
        let weights = self
            .margins(x)
            .zip_map(&self.labels, |z, y| -y * sigmoid_neg(z) / m);
        Ok(self.features.tr_mul(&weights))
    }

    fn smoothness(&self) -> f64 {
        self.lipschitz
    }
}

/// Sum of Huber losses on the observed entries of a `rows × cols` matrix,
/// flattened row-major.
#[derive(Debug, Clone)]
pub struct MatrixHuber {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
    delta: f64,
}

impl MatrixHuber {
    pub const DEFAULT_DELTA: f64 = 1.0;

    pub fn new(rows: usize, cols: usize, entries: Vec<(usize, usize, f64)>, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::invalid("huber delta", format!("{delta} must be > 0")));
        }
        if let Some(&(i, j, _)) = entries.iter().find(|(i, j, _)| *i >= rows || *j >= cols) {
            return Err(Error::invalid(
                "matrix entry",
                format!("({i}, {j}) outside {rows}x{cols}"),
            ));
        }
        Ok(MatrixHuber {
            rows,
            cols,
            entries,
            delta,
        })
    }
}

impl Objective for MatrixHuber {
    fn dim(&self) -> usize {
        self.rows * self.cols
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self
            .entries
            .iter()
            .map(|&(i, j, v)| huber(x[i * self.cols + j] - v, self.delta))
            .sum())
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), x.len())?;
        let mut g = DVector::zeros(self.dim());
        for &(i, j, v) in &self.entries {
            let idx = i * self.cols + j;
            g[idx] += huber_slope(x[idx] - v, self.delta);
        }
        Ok(g)
    }

    fn smoothness(&self) -> f64 {
        1.0
    }
}

/// Largest singular value by power iteration on `AᵀA`.
pub(crate) fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let ata = a.tr_mul(a);
    let n = ata.nrows();
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618_033_988_75).fract());
    v.normalize_mut();
    let mut lambda = 0.0;
    for _ in 0..1000 {
        let w = &ata * &v;
        let next = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        if (next - lambda).abs() <= 1e-12 * next.abs() {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.max(0.0).sqrt()
}

/// Largest relative deviation between the analytic gradient and a central
/// finite difference with step `h`.
///
/// Each coordinate's error is scaled by `max(1, |analytic|, |numeric|)`, so
/// tiny gradient entries are compared absolutely.
pub fn check_gradient(obj: &dyn Objective, x: &DVector<f64>, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::invalid("finite-difference step", format!("{h} must be > 0")));
    }
    let g = obj.gradient(x)?;
    let mut worst: f64 = 0.0;
    let mut probe = x.clone();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = obj.value(&probe)?;
        probe[i] = x[i] - h;
        let down = obj.value(&probe)?;
        probe[i] = x[i];
        let numeric = (up - down) / (2.0 * h);
        let scale = 1.0_f64.max(g[i].abs()).max(numeric.abs());
        worst = worst.max((g[i] - numeric).abs() / scale);
    }
    Ok(worst)
}
