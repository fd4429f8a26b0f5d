//! Ready-made problem instances: objective, domain, start point and, where
//! known, the optimal value.

use nalgebra::DVector;

use crate::data::{gen_lowrank, gen_sensing, DenseDataset};
use crate::error::{check_dim, Result};
use crate::geometry::FeasibleSet;
use crate::objectives::{LeastSquares, LogisticLoss, MatrixHuber, Objective, QuadraticDistance, ScalarHuber};

pub const TRIANGLE: [[f64; 2]; 3] = [[-1.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
pub const TRIANGLE_TARGET: [f64; 2] = [0.2, 0.0];
pub const TRIANGLE_START: [f64; 2] = [-0.5, 0.5];
/// ℓ1 radius of the compressed-sensing experiments.
pub const SENSING_RADIUS: f64 = 1000.0;

pub struct Problem {
    pub name: String,
    pub objective: Box<dyn Objective>,
    pub set: FeasibleSet,
    pub x0: DVector<f64>,
    pub f_star: Option<f64>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim", &self.set.dim())
            .field("f_star", &self.f_star)
            .finish()
    }
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        objective: Box<dyn Objective>,
        set: FeasibleSet,
        x0: DVector<f64>,
        f_star: Option<f64>,
    ) -> Result<Self> {
        check_dim(set.dim(), objective.dim())?;
        check_dim(set.dim(), x0.len())?;
        Ok(Self { name: name.into(), objective, set, x0, f_star })
    }

    /// `f(x) − f*`, or `f(x)` when `f*` is unknown.
    pub fn suboptimality(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.objective.value(x)? - self.f_star.unwrap_or(0.0))
    }
}

pub fn triangle_set() -> FeasibleSet {
    let rows: Vec<&[f64]> = TRIANGLE.iter().map(|v| v.as_slice()).collect();
    FeasibleSet::vertex_hull_from_rows(&rows).expect("fixed triangle is valid")
}

/// `½‖x − x*‖²` over the triangle `co{(−1,0), (1,0), (0,1)}`.
///
/// `f* = ½ dist(x*, triangle)²`, which is zero for targets inside.
pub fn triangle(target: DVector<f64>, x0: DVector<f64>) -> Result<Problem> {
    let set = triangle_set();
    let dist = set.violation(&target)?;
    Problem::new(
        "triangle",
        Box::new(QuadraticDistance::new(target)),
        set,
        x0,
        Some(0.5 * dist * dist),
    )
}

pub fn triangle_default() -> Problem {
    triangle(DVector::from_row_slice(&TRIANGLE_TARGET), DVector::from_row_slice(&TRIANGLE_START))
        .expect("default triangle is valid")
}

/// `x²/2` on `[−1, 1]` from `x0 = 1`.
pub fn scalar_box() -> Problem {
    Problem::new(
        "scalar_box",
        Box::new(QuadraticDistance::new(DVector::zeros(1))),
        FeasibleSet::unit_box(-1.0, 1.0, 1).expect("valid box"),
        DVector::from_element(1, 1.0),
        Some(0.0),
    )
    .expect("dimensions agree")
}

/// Scalar Huber on `[−1, 1]` from `x0 = 1`.
pub fn scalar_huber(eps: f64) -> Result<Problem> {
    Problem::new(
        "scalar_huber",
        Box::new(ScalarHuber::new(eps)?),
        FeasibleSet::unit_box(-1.0, 1.0, 1)?,
        DVector::from_element(1, 1.0),
        Some(0.0),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingParams {
    pub samples: usize,
    pub features: usize,
    pub sparsity: f64,
    pub noise_sd: f64,
    pub seed: u64,
    pub radius: f64,
}

impl Default for SensingParams {
    fn default() -> Self {
        Self { samples: 500, features: 100, sparsity: 0.1, noise_sd: 0.1, seed: 0, radius: SENSING_RADIUS }
    }
}

/// Least squares `½‖Ax − b‖²` on an ℓ1 ball, starting from the origin.
pub fn sensing(p: &SensingParams) -> Result<Problem> {
    let (data, _) = gen_sensing(p.samples, p.features, p.sparsity, p.noise_sd, p.seed)?;
    Problem::new(
        "sensing",
        Box::new(LeastSquares::new(data.features().clone(), data.targets().clone())?),
        FeasibleSet::l1_ball(p.radius, p.features)?,
        DVector::zeros(p.features),
        None,
    )
}

/// Mean logistic loss on an ℓ1 ball, starting from the origin. Regression
/// targets are turned into labels by their sign.
pub fn logistic(data: &DenseDataset, radius: f64) -> Result<Problem> {
    let data = data.to_classification();
    Problem::new(
        "logistic",
        Box::new(LogisticLoss::new(data.features().clone(), data.targets().clone())?),
        FeasibleSet::l1_ball(radius, data.dim())?,
        DVector::zeros(data.dim()),
        None,
    )
}

/// Logistic regression on sign labels of a synthetic sensing dataset.
pub fn logistic_synthetic(p: &SensingParams) -> Result<Problem> {
    let (data, _) = gen_sensing(p.samples, p.features, p.sparsity, p.noise_sd, p.seed)?;
    logistic(&data, p.radius)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowRankParams {
    pub users: usize,
    pub items: usize,
    pub rank: usize,
    pub observed_fraction: f64,
    pub noise_sd: f64,
    pub seed: u64,
    pub radius: f64,
    pub delta: f64,
}

impl Default for LowRankParams {
    fn default() -> Self {
        Self {
            users: 40,
            items: 30,
            rank: 3,
            observed_fraction: 0.3,
            noise_sd: 0.1,
            seed: 0,
            radius: 50.0,
            delta: MatrixHuber::DEFAULT_DELTA,
        }
    }
}

/// Huber matrix completion on a nuclear-norm ball, starting from zero.
pub fn lowrank(p: &LowRankParams) -> Result<Problem> {
    let data = gen_lowrank(p.users, p.items, p.rank, p.observed_fraction, p.noise_sd, p.seed)?;
    Problem::new(
        "lowrank",
        Box::new(MatrixHuber::new(p.users, p.items, data.entries, p.delta)?),
        FeasibleSet::nuclear_ball(p.radius, p.users, p.items)?,
        DVector::zeros(p.users * p.items),
        None,
    )
}
