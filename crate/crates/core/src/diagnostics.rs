//! Trajectory diagnostics: zig-zag energy, convergence slopes, the
//! continuous-time rate bound, and the `Ω(1/k)` lower-bound probe.

use std::io::Write;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::solvers::Trajectory;

const QUAD_TOL: f64 = 1e-10;
const QUAD_MAX_DEPTH: usize = 60;

/// Windowed zig-zag energy of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZigzagReport {
    pub window: usize,
    /// Uniform mean of `per_window`.
    pub energy: f64,
    pub per_window: Vec<f64>,
    /// Time span covered by the measured steps.
    pub horizon: f64,
    pub delta: f64,
}

/// Mean deviation of the step directions inside a window from the window's
/// net direction.
///
/// `points` holds the `W + 1` iterates `x⁽ᵏ⁾ … x⁽ᵏ⁺ᵂ⁾`. The net direction is
/// `d̄ = x⁽ᵏ⁺ᵂ⁾ − x⁽ᵏ⁾`; the steps `d⁽ⁱ⁾ = x⁽ⁱ⁺¹⁾ − x⁽ⁱ⁾` for
/// `i = k+1 … k+W−1` are projected onto the orthogonal complement of `d̄`
/// and their norms averaged. A window with `d̄ = 0` scores zero.
pub fn zigzag_energy(points: &[&DVector<f64>]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::invalid(
            "zig-zag window",
            format!("need at least 3 points (W >= 2), got {}", points.len()),
        ));
    }
    let w = points.len() - 1;
    let net = points[w] - points[0];
    let net_sq = net.norm_squared();
    if net_sq == 0.0 {
        return Ok(0.0);
    }
    let total: f64 = (1..w)
        .map(|i| {
            let d = points[i + 1] - points[i];
            let along = net.dot(&d) / net_sq;
            (d - &net * along).norm()
        })
        .sum();
    Ok(total / (w - 1) as f64)
}

/// Splits the first `horizon / Δ` steps of `traj` into consecutive
/// non-overlapping windows of `window` steps and averages their energies.
///
/// A trajectory shorter than `horizon` is measured over the steps it has.
pub fn zigzag_protocol(traj: &Trajectory, window: usize, horizon: f64) -> Result<ZigzagReport> {
    zigzag_protocol_points(&traj.points(), traj.delta(), window, horizon)
}

/// [`zigzag_protocol`] on bare iterates spaced `delta` apart in time.
pub fn zigzag_protocol_points(
    points: &[&DVector<f64>],
    delta: f64,
    window: usize,
    horizon: f64,
) -> Result<ZigzagReport> {
    if window < 2 {
        return Err(Error::invalid("zig-zag window", format!("W = {window} must be >= 2")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid("delta", format!("{delta} must be positive")));
    }
    let available = points.len().saturating_sub(1);
    let wanted = (horizon / delta).round();
    let steps = if wanted.is_finite() && wanted >= 0.0 {
        available.min(wanted as usize)
    } else {
        available
    };
    let windows = steps / window;
    if windows == 0 {
        return Err(Error::invalid(
            "trajectory",
            format!("{steps} steps do not fill one window of {window}"),
        ));
    }
    let per_window = (0..windows)
        .map(|j| zigzag_energy(&points[j * window..=(j + 1) * window]))
        .collect::<Result<Vec<_>>>()?;
    let energy = per_window.iter().sum::<f64>() / windows as f64;
    Ok(ZigzagReport {
        window,
        energy,
        per_window,
        horizon: steps as f64 * delta,
        delta,
    })
}

/// Writes `method,delta,W,energy` rows.
pub fn write_zigzag_csv<W: Write>(rows: &[(String, ZigzagReport)], mut out: W) -> std::io::Result<()> {
    writeln!(out, "method,delta,W,energy")?;
    for (method, r) in rows {
        writeln!(out, "{},{},{},{:.16e}", method, r.delta, r.window, r.energy)?;
    }
    Ok(())
}

/// `(c / (c + t))^c`, the relative suboptimality bound of the flow.
pub fn continuous_bound(c: f64, t: f64) -> f64 {
    (c / (c + t)).powf(c)
}

/// `exp(−∫₀ᵗ γ(τ) dτ)` by adaptive Simpson quadrature.
pub fn schedule_bound<F: Fn(f64) -> f64>(gamma: F, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("time", format!("{t} must be finite and >= 0")));
    }
    Ok((-integrate(&gamma, 0.0, t, QUAD_TOL)?).exp())
}

fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite("integrand"))
        }
    };
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (eval(a)?, eval(m)?, eval(b)?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&eval, a, b, fa, fm, fb, whole, tol, QUAD_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson<E: Fn(f64) -> Result<f64>>(
    eval: &E,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (eval(lm)?, eval(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return Ok(left + right + diff / 15.0);
    }
    Ok(simpson(eval, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson(eval, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Least-squares slope of `ln h` against `ln k` over pairs with `k ≥ 1`
/// and `h > 0`.
pub fn slope_fit_series(points: &[(f64, f64)]) -> Result<f64> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(k, h)| *k >= 1.0 && *h > 0.0 && h.is_finite())
        .map(|(k, h)| (k.ln(), h.ln()))
        .collect();
    if usable.len() < 10 {
        return Err(Error::invalid(
            "slope fit",
            format!("{} usable points, need at least 10", usable.len()),
        ));
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in &usable {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    Ok(sxy / sxx)
}

/// Slope of `ln(f(x⁽ᵏ⁾) − f*)` against `ln k` for `k ≥ k_min`.
pub fn slope_fit(traj: &Trajectory, f_star: f64, k_min: usize) -> Result<f64> {
    let pts: Vec<(f64, f64)> = traj
        .records
        .iter()
        .filter(|r| r.k >= k_min.max(1))
        .map(|r| (r.k as f64, r.f - f_star))
        .collect();
    slope_fit_series(&pts)
}

/// `k · sup_{k' ≥ k} |x_{k'}|` for each anchor, over a scalar sequence.
pub fn lower_bound_probe_series(values: &[f64], anchors: &[usize]) -> Result<Vec<f64>> {
    // suffix maxima of |x|
    let mut tail = vec![0.0; values.len()];
    let mut running: f64 = 0.0;
    for (i, v) in values.iter().enumerate().rev() {
        running = running.max(v.abs());
        tail[i] = running;
    }
    anchors
        .iter()
        .map(|&k| {
            tail.get(k)
                .map(|sup| k as f64 * sup)
                .ok_or_else(|| Error::invalid("anchor", format!("{k} beyond {} iterates", values.len())))
        })
        .collect()
}

/// [`lower_bound_probe_series`] on a one-dimensional trajectory.
pub fn lower_bound_probe(traj: &Trajectory, anchors: &[usize]) -> Result<Vec<f64>> {
    if let Some(r) = traj.records.iter().find(|r| r.x.len() != 1) {
        return Err(Error::invalid(
            "lower-bound probe",
            format!("needs a scalar trajectory, got dimension {}", r.x.len()),
        ));
    }
    let xs: Vec<f64> = traj.records.iter().map(|r| r.x[0]).collect();
    lower_bound_probe_series(&xs, anchors)
}
