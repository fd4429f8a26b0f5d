//! Frank-Wolfe, its continuous-time flow, and Runge-Kutta multistep variants.
//!
//! ```
//! use mfw_core::{problems, run, Method, RunOptions, StepSchedule};
//!
//! let p = problems::triangle_default();
//! let sched = StepSchedule::with_c(2.0).unwrap();
//! let traj = run(p.objective.as_ref(), &p.set, &p.x0, &Method::Fw, &sched, &RunOptions::iterations(100)).unwrap();
//! assert!(traj.last().unwrap().f < 1e-3);
//! ```

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod objectives;
pub mod problems;
pub mod solvers;
pub mod tableau;

pub use data::{DatasetKind, DenseDataset, RatingsDataset};
pub use diagnostics::ZigzagReport;
pub use error::{Error, Result};
pub use geometry::FeasibleSet;
pub use objectives::Objective;
pub use problems::Problem;
pub use solvers::{run, Method, Record, RunOptions, StepSchedule, Trajectory};
pub use tableau::{Certificate, RateConstants, Tableau};

pub use nalgebra::{DMatrix, DVector};
