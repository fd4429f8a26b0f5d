//! Runs configs and writes their CSV outputs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use mfw_core::diagnostics::{self, write_zigzag_csv};
use mfw_core::{Method, Problem, RunOptions, Tableau, Trajectory, ZigzagReport};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Sweep};
use crate::error::CliError;

/// Per-run numbers collected into a sweep's `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub name: String,
    pub method: String,
    pub c: f64,
    pub delta: f64,
    pub iterations: usize,
    pub f_final: f64,
    pub gap_final: f64,
    pub max_violation: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: Summary,
    pub files: Vec<PathBuf>,
    /// `(method label, report)` for each requested window.
    pub zigzag: Vec<(String, ZigzagReport)>,
    pub slope: Option<f64>,
    pub lower_bound: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub dir: PathBuf,
    pub runs: Vec<RunOutcome>,
    pub files: Vec<PathBuf>,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Runs one validated config and writes `<name>.csv` plus one CSV per
/// requested diagnostic into `dir`.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    let problem = cfg.problem.build(cfg.seed)?;
    let method = cfg.resolve_method()?;
    let sched = cfg.schedule()?;
    let opts = RunOptions { max_iter: cfg.max_iter, stop_gap: cfg.stop_gap };
    let traj = mfw_core::run(problem.objective.as_ref(), &problem.set, &problem.x0, &method, &sched, &opts)?;

    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut write = |suffix: &str, body: &dyn Fn(&mut BufWriter<File>) -> Result<(), CliError>| -> Result<(), CliError> {
        let path = dir.join(format!("{}{suffix}.csv", cfg.name));
        let mut out = create(&path)?;
        body(&mut out)?;
        out.flush()?;
        files.push(path);
        Ok(())
    };

    write("", &|out| Ok(traj.write_csv(out)?))?;
    if cfg.save_points {
        write("_points", &|out| write_points(&traj, out))?;
    }

    let label = cfg.method_label();
    let d = &cfg.diagnostics;
    let mut zigzag = Vec::new();
    if let Some(z) = &d.zigzag {
        for &w in &z.windows {
            zigzag.push((label.clone(), diagnostics::zigzag_protocol(&traj, w, z.horizon)?));
        }
        write("_zigzag", &|out| Ok(write_zigzag_csv(&zigzag, out)?))?;
    }
    let f_star = problem.f_star.unwrap_or(0.0);
    let slope = match &d.slope {
        Some(s) => {
            let v = diagnostics::slope_fit(&traj, f_star, s.k_min)?;
            write("_slope", &|out| {
                writeln!(out, "k_min,slope")?;
                writeln!(out, "{},{}", s.k_min, num(v))?;
                Ok(())
            })?;
            Some(v)
        }
        None => None,
    };
    if d.bound_compare {
        let rate = rate_bounds(cfg, &problem, &method, &traj)?;
        write("_bound", &|out| write_bound(&traj, f_star, cfg.c, rate.as_deref(), out))?;
    }
    let lower_bound = match &d.lower_bound {
        Some(lb) => {
            let probe = diagnostics::lower_bound_probe(&traj, &lb.anchors)?;
            write("_lower_bound", &|out| {
                writeln!(out, "anchor,probe")?;
                for (a, p) in lb.anchors.iter().zip(&probe) {
                    writeln!(out, "{a},{}", num(*p))?;
                }
                Ok(())
            })?;
            Some(probe)
        }
        None => None,
    };

    let last = traj.last().expect("run records x0");
    Ok(RunOutcome {
        summary: Summary {
            name: cfg.name.clone(),
            method: label,
            c: cfg.c,
            delta: cfg.delta,
            iterations: traj.len() - 1,
            f_final: last.f,
            gap_final: last.gap,
            max_violation: traj.max_violation(),
        },
        files,
        zigzag,
        slope,
        lower_bound,
    })
}

/// `h₀/(k+1)` per record for Frank-Wolfe and Runge-Kutta runs with `c > 1`.
fn rate_bounds(
    cfg: &ExperimentConfig,
    problem: &Problem,
    method: &Method,
    traj: &Trajectory,
) -> Result<Option<Vec<f64>>, CliError> {
    let tableau = match method {
        Method::Fw => Tableau::builtin("euler")?,
        Method::Rk(t) => t.clone(),
        _ => return Ok(None),
    };
    if cfg.c <= 1.0 {
        return Ok(None);
    }
    let h_x0 = problem.suboptimality(&problem.x0)?;
    let rc = tableau.rate_constants(cfg.c, problem.objective.smoothness(), problem.set.diameter(), h_x0)?;
    Ok(Some(traj.records.iter().map(|r| rc.bound(r.k)).collect()))
}

fn write_bound<W: Write>(traj: &Trajectory, f_star: f64, c: f64, rate: Option<&[f64]>, out: &mut W) -> Result<(), CliError> {
    let h0 = traj.records[0].f - f_star;
    write!(out, "iter,t,suboptimality,normalized_error,continuous_bound")?;
    if rate.is_some() {
        write!(out, ",rate_bound")?;
    }
    writeln!(out)?;
    for (i, r) in traj.records.iter().enumerate() {
        let h = r.f - f_star;
        let normalized = if h0 > 0.0 { h / h0 } else { 0.0 };
        write!(out, "{},{},{},{},{}", r.k, num(r.t), num(h), num(normalized), num(diagnostics::continuous_bound(c, r.t)))?;
        if let Some(rate) = rate {
            write!(out, ",{}", num(rate[i]))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn write_points<W: Write>(traj: &Trajectory, out: &mut W) -> Result<(), CliError> {
    let dim = traj.records.first().map_or(0, |r| r.x.len());
    let header: Vec<String> = (1..=dim).map(|j| format!("x{j}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for r in &traj.records {
        let row: Vec<String> = r.x.iter().map(|v| num(*v)).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Runs every config of the sweep in parallel into `dir`, then writes
/// `summary.csv` and, if any run measured zig-zag, `zigzag.csv`.
pub fn run_sweep(sweep: &Sweep, dir: &Path) -> Result<SweepOutcome, CliError> {
    sweep.validate()?;
    std::fs::create_dir_all(dir)?;
    let runs = sweep
        .configs
        .par_iter()
        .map(|cfg| run_experiment(cfg, dir))
        .collect::<Result<Vec<_>, _>>()?;

    let mut files: Vec<PathBuf> = runs.iter().flat_map(|r| r.files.iter().cloned()).collect();
    let summary = dir.join("summary.csv");
    let mut out = create(&summary)?;
    writeln!(out, "name,method,c,delta,iterations,f_final,gap_final,max_violation")?;
    for r in &runs {
        let s = &r.summary;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.name,
            s.method,
            s.c,
            s.delta,
            s.iterations,
            num(s.f_final),
            num(s.gap_final),
            num(s.max_violation)
        )?;
    }
    out.flush()?;
    files.push(summary);

    let rows: Vec<(String, ZigzagReport)> = runs.iter().flat_map(|r| r.zigzag.iter().cloned()).collect();
    if !rows.is_empty() {
        let path = dir.join("zigzag.csv");
        let mut out = create(&path)?;
        write_zigzag_csv(&rows, &mut out)?;
        out.flush()?;
        files.push(path);
    }
    Ok(SweepOutcome { dir: dir.to_path_buf(), runs, files })
}
