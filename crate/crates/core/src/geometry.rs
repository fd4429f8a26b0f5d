//! Compact convex feasible sets and their linear minimization oracles.
//!
//! Every set answers three questions: which point minimizes a linear
//! function over it ([`FeasibleSet::lmo`]), how far a point lies outside of
//! it ([`FeasibleSet::violation`]), and how large it is
//! ([`FeasibleSet::diameter`]).
//!
//! Ties in the oracle are broken deterministically: lowest vertex index for
//! hulls, lowest coordinate for the ℓ1 ball, and `sign(0) = +1` for boxes.
//! Nuclear-norm balls act on matrices flattened in row-major order.

use std::io::BufRead;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};

/// Above this `min(rows, cols)` the nuclear LMO switches from a full SVD to
/// power iteration.
const FULL_SVD_MAX_SIDE: usize = 8;
const POWER_MAX_ITER: usize = 1000;
const POWER_TOL: f64 = 1e-10;
const POWER_SEED: u64 = 0x5eed;

/// A compact convex set.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    /// Convex hull of finitely many points.
    Hull(VertexHull),
    /// The cube `[lower, upper]^dim`.
    Box(BoxSet),
    /// `{x : ‖x‖₁ ≤ radius}`.
    L1Ball(L1Ball),
    /// `{X : ‖X‖_* ≤ radius}` over `rows × cols` matrices.
    NuclearBall(NuclearBall),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexHull {
    vertices: Vec<DVector<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSet {
    lower: f64,
    upper: f64,
    dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Ball {
    radius: f64,
    dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuclearBall {
    radius: f64,
    rows: usize,
    cols: usize,
}

impl FeasibleSet {
    pub fn vertex_hull(vertices: Vec<DVector<f64>>) -> Result<Self> {
        let first = vertices
            .first()
            .ok_or_else(|| Error::invalid("vertex hull", "needs at least one vertex"))?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::invalid("vertex hull", "vertices must be non-empty"));
        }
        for v in &vertices {
            check_dim(dim, v.len())?;
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite("vertex"));
            }
        }
        Ok(FeasibleSet::Hull(VertexHull { vertices }))
    }

    /// Builds a hull from rows of plain coordinates.
    pub fn vertex_hull_from_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::vertex_hull(rows.iter().map(|r| DVector::from_row_slice(r)).collect())
    }

    /// Reads one vertex per line, comma-separated decimals. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn vertex_hull_from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut vertices = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let coords = line
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: i + 1,
                        msg: format!("bad coordinate {:?}: {e}", tok.trim()),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            vertices.push(DVector::from_vec(coords));
        }
        Self::vertex_hull(vertices)
    }

    pub fn vertex_hull_from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::vertex_hull_from_csv(std::io::BufReader::new(file))
    }

    pub fn unit_box(lower: f64, upper: f64, dim: usize) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) {
            return Err(Error::NonFinite("box bounds"));
        }
        if lower >= upper {
            return Err(Error::invalid("box", format!("lower {lower} >= upper {upper}")));
        }
        if dim == 0 {
            return Err(Error::invalid("box", "dimension must be positive"));
        }
        Ok(FeasibleSet::Box(BoxSet { lower, upper, dim }))
    }

    pub fn l1_ball(radius: f64, dim: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid("l1 ball", format!("radius {radius} must be > 0")));
        }
        if dim == 0 {
            return Err(Error::invalid("l1 ball", "dimension must be positive"));
        }
        Ok(FeasibleSet::L1Ball(L1Ball { radius, dim }))
    }

    pub fn nuclear_ball(radius: f64, rows: usize, cols: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(
                "nuclear ball",
                format!("radius {radius} must be > 0"),
            ));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("nuclear ball", "shape must be positive"));
        }
        Ok(FeasibleSet::NuclearBall(NuclearBall { radius, rows, cols }))
    }

    /// Ambient dimension (`rows * cols` for matrix sets).
    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Hull(h) => h.vertices[0].len(),
            FeasibleSet::Box(b) => b.dim,
            FeasibleSet::L1Ball(b) => b.dim,
            FeasibleSet::NuclearBall(b) => b.rows * b.cols,
        }
    }

    pub fn vertices(&self) -> Option<&[DVector<f64>]> {
        match self {
            FeasibleSet::Hull(h) => Some(&h.vertices),
            _ => None,
        }
    }

    /// Linear minimization oracle: `argmin_{s ∈ set} gradientᵀ s`.
    pub fn lmo(&self, gradient: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), gradient.len())?;
        if gradient.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }
        Ok(match self {
            FeasibleSet::Hull(h) => h.vertices[h.argmin(gradient)].clone(),
            FeasibleSet::Box(b) => gradient.map(|g| if g >= 0.0 { b.lower } else { b.upper }),
            FeasibleSet::L1Ball(b) => {
                let mut j = 0;
                for (i, g) in gradient.iter().enumerate() {
                    if g.abs() > gradient[j].abs() {
                        j = i;
                    }
                }
                let mut s = DVector::zeros(b.dim);
                s[j] = if gradient[j] >= 0.0 { -b.radius } else { b.radius };
                s
            }
            FeasibleSet::NuclearBall(b) => b.lmo(gradient),
        })
    }

    /// How far `point` lies outside the set; zero inside.
    ///
    /// Hulls and boxes report Euclidean distance. The norm balls report
    /// constraint slack (`‖x‖ − radius`).
    pub fn violation(&self, point: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), point.len())?;
        if point.iter().any(|p| !p.is_finite()) {
            return Ok(f64::INFINITY);
        }
        Ok(match self {
            FeasibleSet::Hull(h) => min_norm_point(&h.vertices, point),
            FeasibleSet::Box(b) => point
                .iter()
                .map(|&p| {
                    let d = (b.lower - p).max(p - b.upper).max(0.0);
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
            FeasibleSet::L1Ball(b) => (point.lp_norm(1) - b.radius).max(0.0),
            FeasibleSet::NuclearBall(b) => {
                let m = b.as_matrix(point);
                (m.singular_values().sum() - b.radius).max(0.0)
            }
        })
    }

    pub fn contains(&self, point: &DVector<f64>, tol: f64) -> Result<bool> {
        if !(tol >= 0.0) {
            return Err(Error::invalid("tolerance", format!("{tol} must be >= 0")));
        }
        Ok(self.violation(point)? <= tol)
    }

    /// Largest Euclidean (Frobenius) distance between two points of the set.
    pub fn diameter(&self) -> f64 {
        match self {
            FeasibleSet::Hull(h) => {
                let mut best: f64 = 0.0;
                for (i, a) in h.vertices.iter().enumerate() {
                    for b in &h.vertices[i + 1..] {
                        best = best.max((a - b).norm());
                    }
                }
                best
            }
            FeasibleSet::Box(b) => (b.upper - b.lower) * (b.dim as f64).sqrt(),
            FeasibleSet::L1Ball(b) => 2.0 * b.radius,
            FeasibleSet::NuclearBall(b) => 2.0 * b.radius,
        }
    }
}

impl VertexHull {
    fn argmin(&self, g: &DVector<f64>) -> usize {
        let mut best = 0;
        let mut best_val = g.dot(&self.vertices[0]);
        for (i, v) in self.vertices.iter().enumerate().skip(1) {
            let val = g.dot(v);
            if val < best_val {
                best = i;
                best_val = val;
            }
        }
        best
    }
}

impl BoxSet {
    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }
}

impl L1Ball {
    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl NuclearBall {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn as_matrix(&self, flat: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, flat.as_slice())
    }

    fn lmo(&self, gradient: &DVector<f64>) -> DVector<f64> {
        let g = self.as_matrix(gradient);
        let (u, v) = if g.iter().all(|&x| x == 0.0) {
            (unit(self.rows, 0), unit(self.cols, 0))
        } else if self.rows.min(self.cols) <= FULL_SVD_MAX_SIDE {
            top_singular_pair_svd(&g)
        } else {
            top_singular_pair_power(&g)
        };
        let s = (u * v.transpose()) * (-self.radius);
        DVector::from_iterator(
            self.rows * self.cols,
            (0..self.rows).flat_map(|i| (0..self.cols).map(move |j| (i, j))).map(|(i, j)| s[(i, j)]),
        )
    }
}

fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut e = DVector::zeros(n);
    e[i] = 1.0;
    e
}

fn top_singular_pair_svd(g: &DMatrix<f64>) -> (DVector<f64>, DVector<f64>) {
    let svd = g.clone().svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut best = 0;
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s > svd.singular_values[best] {
            best = i;
        }
    }
    (u.column(best).into_owned(), vt.row(best).transpose())
}

/// Power iteration on `GᵀG` from a fixed pseudo-random start.
fn top_singular_pair_power(g: &DMatrix<f64>) -> (DVector<f64>, DVector<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut v = DVector::from_fn(g.ncols(), |_, _| rng.random::<f64>() - 0.5);
    v.normalize_mut();
    let gtg = g.transpose() * g;
    for _ in 0..POWER_MAX_ITER {
        let w = &gtg * &v;
        let norm = w.norm();
        if norm == 0.0 {
            break;
        }
        let next = w / norm;
        // GᵀG is positive semidefinite, so the iterate never flips sign
        let moved = (&next - &v).norm();
        v = next;
        if moved <= POWER_TOL {
            break;
        }
    }
    let gv = g * &v;
    let sigma = gv.norm();
    let u = if sigma > 0.0 { gv / sigma } else { unit(g.nrows(), 0) };
    (u, v)
}

/// Euclidean distance from `p` to the convex hull of `vertices`, by Wolfe's
/// minimum-norm-point algorithm on the shifted points `v - p`.
fn min_norm_point(vertices: &[DVector<f64>], p: &DVector<f64>) -> f64 {
    let pts: Vec<DVector<f64>> = vertices.iter().map(|v| v - p).collect();
    let scale = pts.iter().map(|q| q.norm_squared()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let eps = 1e-12 * scale;

    let start = (0..pts.len())
        .min_by(|&a, &b| pts[a].norm_squared().total_cmp(&pts[b].norm_squared()))
        .unwrap();
    let mut corral = vec![start];
    let mut weights = vec![1.0];
    let mut x = pts[start].clone();

    for _ in 0..(100 * pts.len() + 100) {
        let xx = x.norm_squared();
        if xx <= eps {
            return 0.0;
        }
        let j = (0..pts.len())
            .min_by(|&a, &b| x.dot(&pts[a]).total_cmp(&x.dot(&pts[b])))
            .unwrap();
        if xx - x.dot(&pts[j]) <= eps || corral.contains(&j) {
            break;
        }
        corral.push(j);
        weights.push(0.0);

        loop {
            let alpha = match affine_minimizer(&pts, &corral) {
                Some(a) => a,
                None => {
                    // Affinely dependent corral: drop the newcomer and stop.
                    corral.pop();
                    weights.pop();
                    return x.norm();
                }
            };
            if alpha.iter().all(|&a| a > 0.0) {
                weights = alpha;
                break;
            }
            let mut theta = 1.0_f64;
            for (w, a) in weights.iter().zip(&alpha) {
                if *a <= 0.0 && w - a > 0.0 {
                    theta = theta.min(w / (w - a));
                }
            }
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w = theta * a + (1.0 - theta) * *w;
            }
            let mut i = 0;
            while i < corral.len() {
                if weights[i] <= 1e-15 {
                    corral.remove(i);
                    weights.remove(i);
                } else {
                    i += 1;
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
        }
        x = corral
            .iter()
            .zip(&weights)
            .fold(DVector::zeros(p.len()), |acc, (&i, &w)| acc + &pts[i] * w);
    }
    x.norm()
}

/// Minimizes `‖Σ αᵢ pᵢ‖` subject to `Σ αᵢ = 1` over the corral points.
fn affine_minimizer(pts: &[DVector<f64>], corral: &[usize]) -> Option<Vec<f64>> {
    let m = corral.len();
    let mut kkt = DMatrix::zeros(m + 1, m + 1);
    for (a, &i) in corral.iter().enumerate() {
        for (b, &j) in corral.iter().enumerate() {
            kkt[(a, b)] = pts[i].dot(&pts[j]);
        }
        kkt[(a, m)] = 1.0;
        kkt[(m, a)] = 1.0;
    }
    let mut rhs = DVector::zeros(m + 1);
    rhs[m] = 1.0;
    let sol = kkt.lu().solve(&rhs)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(sol.iter().take(m).copied().collect())
}
