//! Iteration schemes: vanilla Frank-Wolfe, the Euler-discretized flow,
//! generalized Runge-Kutta Frank-Wolfe, and the line-search and momentum
//! variants, plus the driver loop that records a [`Trajectory`].
//!
//! Every scheme moves along `s − x` where `s` is an LMO output, with mixing
//! coefficient `c / (c + k)` (or `c / (c + t)` in continuous time). Updates
//! are written as `x + γ (s − x)` everywhere so that the Euler tableau, plain
//! Frank-Wolfe and the unit-step flow produce bit-identical iterates.

use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::FeasibleSet;
use crate::objectives::Objective;
use crate::tableau::Tableau;

/// Input feasibility tolerance for single steps and run starts.
pub const FEASIBILITY_TOL: f64 = 1e-9;

const LINE_SEARCH_SLACK: f64 = 1e-14;
const LINE_SEARCH_BISECTIONS: usize = 60;

/// Mixing-coefficient family `c / (c + k)` with discretization unit `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    c: f64,
    delta: f64,
}

impl StepSchedule {
    pub fn new(c: f64, delta: f64) -> Result<Self> {
        if !(c >= 1.0 && c.is_finite()) {
            return Err(Error::invalid("schedule constant", format!("c = {c} must be >= 1")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::invalid("delta", format!("{delta} must be in (0, 1]")));
        }
        Ok(StepSchedule { c, delta })
    }

    /// Unit-step schedule (plain Frank-Wolfe).
    pub fn with_c(c: f64) -> Result<Self> {
        Self::new(c, 1.0)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `c / (c + k)`.
    pub fn gamma_discrete(&self, k: usize) -> f64 {
        self.c / (self.c + k as f64)
    }

    /// `c / (c + t)`.
    pub fn gamma_time(&self, t: f64) -> f64 {
        self.c / (self.c + t)
    }
}

/// `x + γ (s − x)`.
fn mix(x: &DVector<f64>, s: &DVector<f64>, gamma: f64) -> DVector<f64> {
    x.zip_map(s, |xi, si| xi + (si - xi) * gamma)
}

fn check_point(set: &FeasibleSet, x: &DVector<f64>) -> Result<()> {
    check_dim(set.dim(), x.len())?;
    let v = set.violation(x)?;
    if v > FEASIBILITY_TOL {
        return Err(Error::Infeasible(v));
    }
    Ok(())
}

fn lmo_at(obj: &dyn Objective, set: &FeasibleSet, x: &DVector<f64>) -> Result<DVector<f64>> {
    set.lmo(&obj.gradient(x)?)
}

/// One Frank-Wolfe step with `γ = c / (c + k)`.
pub fn fw_step(
    obj: &dyn Objective,
    set: &FeasibleSet,
    x: &DVector<f64>,
    k: usize,
    sched: &StepSchedule,
) -> Result<DVector<f64>> {
    check_point(set, x)?;
    fw_step_unchecked(obj, set, x, k, sched)
}

fn fw_step_unchecked(
    obj: &dyn Objective,
    set: &FeasibleSet,
    x: &DVector<f64>,
    k: usize,
    sched: &StepSchedule,
) -> Result<DVector<f64>> {
    let s = lmo_at(obj, set, x)?;
    Ok(mix(x, &s, sched.gamma_discrete(k)))
}

/// One Euler step of the flow: `x + Δ γ(t) (s − x)`.
pub fn flow_step(
    obj: &dyn Objective,
    set: &FeasibleSet,
    x: &DVector<f64>,
    t: f64,
    sched: &StepSchedule,
) -> Result<DVector<f64>> {
    check_point(set, x)?;
    flow_step_unchecked(obj, set, x, t, sched)
}

fn flow_step_unchecked(
    obj: &dyn Objective,
    set: &FeasibleSet,
    x: &DVector<f64>,
    t: f64,
    sched: &StepSchedule,
) -> Result<DVector<f64>> {
    let s = lmo_at(obj, set, x)?;
    Ok(mix(x, &s, sched.delta * sched.gamma_time(t)))
}

/// Intermediate quantities of one Runge-Kutta step.
#[derive(Debug, Clone, PartialEq)]
pub struct RkStageState {
    /// Stage slopes `ξᵢ = γ̃ᵢ (s̄ᵢ − x̄ᵢ)`.
    pub xi: Vec<DVector<f64>>,
    /// Stage points `x̄ᵢ = x + Σⱼ Aᵢⱼ ξⱼ`.
    pub xbar: Vec<DVector<f64>>,
    /// LMO outputs at the stage points.
    pub sbar: Vec<DVector<f64>>,
    /// `γ̃ᵢ = c / (c + k + ωᵢ)`.
    pub gamma_tilde: DVector<f64>,
}

/// One generalized Runge-Kutta Frank-Wolfe step. `k` starts at 1.
pub fn rk_step(
    obj: &dyn Objective,
    set: &FeasibleSet,
    x: &DVector<f64>,
    k: usize,
    sched: &StepSchedule,
    tableau: &Tableau,
) -> Result<(DVector<f64>, RkStageState)> {
    tableau.validate()?;
    if k < 1 {
        return Err(Error::invalid("iteration", "Runge-Kutta steps start at k = 1"));
    }
    check_dim(set.dim(), x.len())?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("iterate"));
    }
    rk_step_unchecked(obj, set, x, k, sched, tableau)
}

fn rk_step_unchecked(
    obj: &dyn Objective,
    set: &FeasibleSet,
    x: &DVector<f64>,
    k: usize,
    sched: &StepSchedule,
    tableau: &Tableau,
) -> Result<(DVector<f64>, RkStageState)> {
    let q = tableau.stages();
    let a = tableau.a();
    let gamma_tilde = tableau.stage_gammas(sched.c, k);
    let mut xi: Vec<DVector<f64>> = Vec::with_capacity(q);
    let mut xbar = Vec::with_capacity(q);
    let mut sbar = Vec::with_capacity(q);
    for i in 0..q {
        let mut point = x.clone();
        for (j, slope) in xi.iter().enumerate() {
            let aij = a[(i, j)];
            if aij != 0.0 {
                point.axpy(aij, slope, 1.0);
            }
        }
        let s = lmo_at(obj, set, &point)?;
        let g = gamma_tilde[i];
        xi.push(s.zip_map(&point, |si, pi| (si - pi) * g));
        xbar.push(point);
        sbar.push(s);
    }
    let mut next = x.clone();
    for (b, slope) in tableau.beta().iter().zip(&xi) {
        if *b != 0.0 {
            next.zip_apply(slope, |n, s| *n += s * *b);
        }
    }
    Ok((
        next,
        RkStageState {
            xi,
            xbar,
            sbar,
            gamma_tilde,
        },
    ))
}

/// Frank-Wolfe gap `∇f(x)ᵀ(x − s)`.
pub fn fw_gap(obj: &dyn Objective, set: &FeasibleSet, x: &DVector<f64>) -> Result<f64> {
    let g = obj.gradient(x)?;
    let s = set.lmo(&g)?;
    Ok(g.dot(&(x - s)))
}

/// Step length `max{2/(2+k), γ̄}` where `γ̄` is the largest `γ ∈ [0, 1]`
/// with `f(x + γd) ≤ f(x)`.
///
/// The boundary is bracketed by doubling from `2/(2+k)` and refined with 60
/// bisection steps. Assumes `f` is convex along `d`, so the accepted set is an
/// interval starting at zero.
pub fn line_search_gamma(obj: &dyn Objective, x: &DVector<f64>, d: &DVector<f64>, k: usize) -> Result<f64> {
    check_dim(x.len(), d.len())?;
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("search direction"));
    }
    let fallback = 2.0 / (2.0 + k as f64);
    let fx = obj.value(x)?;
    let accept = |gamma: f64| -> Result<bool> {
        let trial = x + d * gamma;
        Ok(obj.value(&trial)? <= fx + LINE_SEARCH_SLACK)
    };
    if accept(1.0)? {
        return Ok(1.0);
    }
    if !accept(fallback)? {
        return Ok(fallback);
    }
    let (mut lo, mut hi) = (fallback, 1.0);
    let mut probe = fallback;
    while probe < 1.0 {
        let next = (2.0 * probe).min(1.0);
        if accept(next)? {
            lo = next;
            probe = next;
        } else {
            hi = next;
            break;
        }
    }
    for _ in 0..LINE_SEARCH_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if accept(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo.max(fallback))
}

/// Momentum Frank-Wolfe step: the LMO is queried at an exponential average
/// of gradients, `m = (1 − δ) m_prev + δ ∇f(x)` with `δ = 2/(k+2)`.
/// Returns `(x⁺, m)`.
pub fn momentum_step(
    obj: &dyn Objective,
    set: &FeasibleSet,
    x: &DVector<f64>,
    m_prev: &DVector<f64>,
    k: usize,
    sched: &StepSchedule,
) -> Result<(DVector<f64>, DVector<f64>)> {
    check_dim(x.len(), m_prev.len())?;
    let g = obj.gradient(x)?;
    let delta = 2.0 / (k as f64 + 2.0);
    let m = m_prev.zip_map(&g, |mp, gi| (1.0 - delta) * mp + delta * gi);
    let s = set.lmo(&m)?;
    Ok((mix(x, &s, sched.gamma_discrete(k)), m))
}

/// Iteration scheme selected for [`run`].
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Fw,
    /// Euler discretization of the flow with the schedule's `delta`.
    Flow,
    Rk(Tableau),
    RkLineSearch(Tableau),
    FwMomentum,
    FwLineSearch,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Fw => "fw",
            Method::Flow => "flow",
            Method::Rk(_) => "rk",
            Method::RkLineSearch(_) => "rk+linesearch",
            Method::FwMomentum => "fw+momentum",
            Method::FwLineSearch => "fw+linesearch",
        }
    }

    fn stage_count(&self) -> usize {
        match self {
            Method::Rk(t) | Method::RkLineSearch(t) => t.stages(),
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub max_iter: usize,
    /// Stop once the Frank-Wolfe gap drops to this value; zero disables.
    pub stop_gap: f64,
}

impl RunOptions {
    pub fn iterations(max_iter: usize) -> Self {
        RunOptions {
            max_iter,
            stop_gap: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub k: usize,
    pub t: f64,
    pub x: DVector<f64>,
    pub f: f64,
    pub gap: f64,
    pub feasibility_violation: f64,
    pub stage_count: usize,
}

/// Iterates of one run, starting from `k = 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub records: Vec<Record>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    pub fn f_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.f).collect()
    }

    pub fn points(&self) -> Vec<&DVector<f64>> {
        self.records.iter().map(|r| &r.x).collect()
    }

    /// Time advanced per record.
    pub fn delta(&self) -> f64 {
        match self.records.as_slice() {
            [a, b, ..] => b.t - a.t,
            _ => 1.0,
        }
    }

    pub fn max_violation(&self) -> f64 {
        self.records.iter().map(|r| r.feasibility_violation).fold(0.0, f64::max)
    }

    /// CSV with header `iter,t,f,gap,feas_violation`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iter,t,f,gap,feas_violation")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.k, r.t, r.f, r.gap, r.feasibility_violation
            )?;
        }
        Ok(())
    }
}

/// Runs `method` from `x0` for up to `opts.max_iter` steps.
///
/// Runge-Kutta methods index their schedule from `k = 1`; all others from
/// `k = 0`. Feasibility is recorded for every iterate but enforced only on
/// `x0`.
pub fn run(
    obj: &dyn Objective,
    set: &FeasibleSet,
    x0: &DVector<f64>,
    method: &Method,
    sched: &StepSchedule,
    opts: &RunOptions,
) -> Result<Trajectory> {
    if opts.max_iter < 1 {
        return Err(Error::invalid("max_iter", "must be >= 1"));
    }
    check_dim(obj.dim(), set.dim())?;
    check_point(set, x0)?;
    if let Method::Rk(t) | Method::RkLineSearch(t) = method {
        t.validate()?;
    }
    let dt = if matches!(method, Method::Flow) { sched.delta } else { 1.0 };
    let stage_count = method.stage_count();
    let record = |k: usize, x: DVector<f64>| -> Result<Record> {
        Ok(Record {
            k,
            t: k as f64 * dt,
            f: obj.value(&x)?,
            gap: fw_gap(obj, set, &x)?,
            feasibility_violation: set.violation(&x)?,
            x,
            stage_count,
        })
    };

    let mut records = Vec::with_capacity(opts.max_iter + 1);
    records.push(record(0, x0.clone())?);
    let mut momentum = DVector::zeros(x0.len());
    for i in 0..opts.max_iter {
        let last = records.last().unwrap();
        if opts.stop_gap > 0.0 && last.gap <= opts.stop_gap {
            break;
        }
        let x = &last.x;
        let next = match method {
            Method::Fw => fw_step_unchecked(obj, set, x, i, sched)?,
            Method::Flow => flow_step_unchecked(obj, set, x, last.t, sched)?,
            Method::Rk(t) => rk_step_unchecked(obj, set, x, i + 1, sched, t)?.0,
            Method::RkLineSearch(t) => {
                let k = i + 1;
                let (plain, _) = rk_step_unchecked(obj, set, x, k, sched, t)?;
                // direction normalized so that γ = c/(c+k) reproduces the plain step
                let d = (plain - x) / sched.gamma_discrete(k);
                let gamma = line_search_gamma(obj, x, &d, k)?;
                x + d * gamma
            }
            Method::FwMomentum => {
                let (next, m) = momentum_step(obj, set, x, &momentum, i, sched)?;
                momentum = m;
                next
            }
            Method::FwLineSearch => {
                let d = lmo_at(obj, set, x)? - x;
                let gamma = line_search_gamma(obj, x, &d, i)?;
                x + d * gamma
            }
        };
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("iterate"));
        }
        records.push(record(i + 1, next)?);
    }
    Ok(Trajectory { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::QuadraticDistance;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    fn scalar_box() -> (QuadraticDistance, FeasibleSet) {
        (
            QuadraticDistance::new(v(&[0.0])),
            FeasibleSet::unit_box(-1.0, 1.0, 1).unwrap(),
        )
    }

    fn triangle() -> (QuadraticDistance, FeasibleSet) {
        (
            QuadraticDistance::new(v(&[0.2, 0.0])),
            FeasibleSet::vertex_hull_from_rows(&[&[-1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]).unwrap(),
        )
    }

    #[test]
    fn gamma_examples() {
        let s = StepSchedule::with_c(2.0).unwrap();
        assert_eq!(s.gamma_discrete(0), 1.0);
        assert_eq!(s.gamma_discrete(2), 0.5);
        assert_eq!(StepSchedule::with_c(1.0).unwrap().gamma_discrete(9), 0.1);
        assert!(StepSchedule::new(0.5, 1.0).is_err());
        assert!(StepSchedule::new(2.0, 0.0).is_err());
        assert!(StepSchedule::new(2.0, 1.5).is_err());
    }

    #[test]
    fn fw_step_on_box() {
        let (f, set) = scalar_box();
        let s = StepSchedule::with_c(2.0).unwrap();
        let x = fw_step(&f, &set, &v(&[0.3]), 1, &s).unwrap();
        assert_abs_diff_eq!(x[0], 0.3 / 3.0 - 2.0 / 3.0, epsilon = 1e-15);
        assert!(matches!(
            fw_step(&f, &set, &v(&[1.5]), 1, &s),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn fw_step_fixed_point_and_vanishing_step() {
        // at a vertex whose own LMO answer is itself, the step does nothing
        let target = v(&[-3.0]);
        let f = QuadraticDistance::new(target);
        let set = FeasibleSet::unit_box(-1.0, 1.0, 1).unwrap();
        let s = StepSchedule::with_c(2.0).unwrap();
        for k in [0, 1, 7] {
            assert_eq!(fw_step(&f, &set, &v(&[-1.0]), k, &s).unwrap(), v(&[-1.0]));
        }
        let (f, set) = scalar_box();
        let far = fw_step(&f, &set, &v(&[0.3]), 1_000_000_000, &s).unwrap();
        assert_abs_diff_eq!(far[0], 0.3, epsilon = 1e-8);
    }

    #[test]
    fn flow_step_examples() {
        let (f, set) = scalar_box();
        let s = StepSchedule::new(2.0, 0.1).unwrap();
        let x = flow_step(&f, &set, &v(&[0.3]), 1.0, &s).unwrap();
        assert_abs_diff_eq!(x[0], 0.3 + 0.1 * (2.0 / 3.0) * (-1.3), epsilon = 1e-15);
        assert_abs_diff_eq!(x[0], 0.2133, epsilon = 1e-4);
        let tiny = StepSchedule::new(2.0, 1e-300).unwrap();
        assert_eq!(flow_step(&f, &set, &v(&[0.3]), 1.0, &tiny).unwrap(), v(&[0.3]));
    }

    #[test]
    fn unit_flow_euler_and_fw_agree_bitwise() {
        let euler = Tableau::builtin("euler").unwrap();
        let s = StepSchedule::with_c(2.0).unwrap();
        for (f, set) in [triangle(), scalar_box()] {
            let x = set.lmo(&DVector::from_element(set.dim(), 1.0)).unwrap();
            for k in 1..50 {
                let a = fw_step(&f, &set, &x, k, &s).unwrap();
                let b = flow_step(&f, &set, &x, k as f64, &s).unwrap();
                let (c, _) = rk_step(&f, &set, &x, k, &s, &euler).unwrap();
                assert_eq!(a, b);
                assert_eq!(a, c);
            }
        }
    }

    #[test]
    fn midpoint_stage_recursion() {
        let (f, set) = scalar_box();
        let s = StepSchedule::with_c(2.0).unwrap();
        let mid = Tableau::builtin("midpoint").unwrap();
        let (x, st) = rk_step(&f, &set, &v(&[0.3]), 1, &s, &mid).unwrap();
        let xi1 = (2.0 / 3.0) * (-1.0 - 0.3);
        let xbar2 = 0.3 + 0.5 * xi1;
        let xi2 = (2.0 / 3.5) * (1.0 - xbar2);
        assert_abs_diff_eq!(st.xi[0][0], xi1, epsilon = 1e-15);
        assert_abs_diff_eq!(st.xbar[1][0], xbar2, epsilon = 1e-15);
        assert_abs_diff_eq!(st.xi[1][0], xi2, epsilon = 1e-15);
        assert_abs_diff_eq!(x[0], 0.3 + xi2, epsilon = 1e-15);
        assert_abs_diff_eq!(x[0], 0.9476, epsilon = 1e-4);
        assert_eq!(st.sbar, vec![v(&[-1.0]), v(&[1.0])]);
        assert!(rk_step(&f, &set, &v(&[0.3]), 0, &s, &mid).is_err());
    }

    #[test]
    fn rk_stages_bounded_at_stationary_point() {
        // interior minimizer: gradient zero, LMO falls back to the tie-break
        let f = QuadraticDistance::new(v(&[0.0, 0.25]));
        let (_, set) = triangle();
        let s = StepSchedule::with_c(2.0).unwrap();
        for name in crate::tableau::BUILTIN_NAMES {
            let t = Tableau::builtin(name).unwrap();
            let (_, st) = rk_step(&f, &set, &v(&[0.0, 0.25]), 1, &s, &t).unwrap();
            let rc = t.rate_constants(2.0, 1.0, set.diameter(), 0.0).unwrap();
            for (xi, g) in st.xi.iter().zip(st.gamma_tilde.iter()) {
                assert!(xi.norm() <= g * rc.d2 + 1e-12);
            }
        }
    }

    #[test]
    fn gap_examples() {
        let (f, set) = scalar_box();
        assert_abs_diff_eq!(fw_gap(&f, &set, &v(&[0.3])).unwrap(), 0.39, epsilon = 1e-15);
        assert_eq!(fw_gap(&f, &set, &v(&[0.0])).unwrap(), 0.0);
        let (f, set) = triangle();
        assert_eq!(fw_gap(&f, &set, &v(&[0.2, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn line_search_examples() {
        let f = QuadraticDistance::new(v(&[0.2]));
        assert_eq!(line_search_gamma(&f, &v(&[1.0]), &v(&[-1.0]), 1000).unwrap(), 1.0);
        assert_eq!(line_search_gamma(&f, &v(&[1.0]), &v(&[1.0]), 3).unwrap(), 0.4);
        assert_eq!(line_search_gamma(&f, &v(&[1.0]), &v(&[0.0]), 3).unwrap(), 1.0);
        // sublevel boundary at γ = 0.8 for f(2 − 2γ) ≤ f(2), d = −2... bisection oracle
        let g = line_search_gamma(&f, &v(&[1.0]), &v(&[-2.0]), 1000).unwrap();
        assert_abs_diff_eq!(g, 0.8, epsilon = 1e-12);
    }

    #[test]
    fn momentum_examples() {
        let (f, set) = triangle();
        let s = StepSchedule::with_c(2.0).unwrap();
        let x = v(&[-0.5, 0.5]);
        let junk = v(&[123.0, -4.0]);
        let (xm, m) = momentum_step(&f, &set, &x, &junk, 0, &s).unwrap();
        assert_eq!(m, f.gradient(&x).unwrap());
        assert_eq!(xm, fw_step(&f, &set, &x, 0, &s).unwrap());
        let g = f.gradient(&x).unwrap();
        let (_, m2) = momentum_step(&f, &set, &x, &g, 5, &s).unwrap();
        assert!((m2 - g).amax() < 1e-15);
    }

    #[test]
    fn run_records_every_iterate() {
        let (f, set) = triangle();
        let s = StepSchedule::with_c(2.0).unwrap();
        let traj = run(&f, &set, &v(&[-0.5, 0.5]), &Method::Fw, &s, &RunOptions::iterations(10)).unwrap();
        assert_eq!(traj.len(), 11);
        for (i, r) in traj.records.iter().enumerate() {
            assert_eq!(r.k, i);
            assert_eq!(r.t, i as f64);
            assert!(r.gap >= 0.0);
            assert!(r.gap >= r.f - 1e-15);
        }
        assert!(run(&f, &set, &v(&[-0.5, 0.5]), &Method::Fw, &s, &RunOptions::iterations(0)).is_err());
        assert!(run(&f, &set, &v(&[2.0, 0.5]), &Method::Fw, &s, &RunOptions::iterations(5)).is_err());
    }

    #[test]
    fn run_stops_on_gap() {
        let (f, set) = scalar_box();
        let s = StepSchedule::with_c(2.0).unwrap();
        let opts = RunOptions {
            max_iter: 10_000,
            stop_gap: 1e-3,
        };
        let traj = run(&f, &set, &v(&[1.0]), &Method::Fw, &s, &opts).unwrap();
        assert!(traj.len() < 10_001);
        assert!(traj.last().unwrap().gap <= 1e-3);
    }

    #[test]
    fn flow_times_follow_delta() {
        let (f, set) = triangle();
        let s = StepSchedule::new(2.0, 0.25).unwrap();
        let traj = run(&f, &set, &v(&[-0.5, 0.5]), &Method::Flow, &s, &RunOptions::iterations(8)).unwrap();
        assert_eq!(traj.last().unwrap().t, 2.0);
        assert_eq!(traj.delta(), 0.25);
    }

    #[test]
    fn csv_layout() {
        let (f, set) = scalar_box();
        let s = StepSchedule::with_c(2.0).unwrap();
        let traj = run(&f, &set, &v(&[1.0]), &Method::Fw, &s, &RunOptions::iterations(2)).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "iter,t,f,gap,feas_violation");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "0,0.0000000000000000e0,5.0000000000000000e-1,2.0000000000000000e0,0.0000000000000000e0");
    }
}
