use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mfw_cli::config::{
    Diagnostics, ExperimentConfig, HuberSpec, LogisticSpec, LowRankSpec, LowerBoundSpec, MethodName, ProblemSpec,
    SensingSpec, SlopeSpec, TriangleSpec, ZigzagSpec,
};
use mfw_cli::{presets, run_experiment, run_sweep, CliError, Sweep, OUTPUT_DIR_ENV};
use mfw_core::diagnostics::{continuous_bound, schedule_bound, write_zigzag_csv, zigzag_protocol_points};
use mfw_core::{DVector, Tableau};

#[derive(Parser)]
#[command(name = "mfw", version, about = "Frank-Wolfe and multistep Frank-Wolfe experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config and/or flags.
    Run(Box<RunArgs>),
    /// Run a JSON sweep (a named list of configs) in parallel.
    Sweep {
        file: PathBuf,
        #[arg(long, env = OUTPUT_DIR_ENV)]
        output: Option<PathBuf>,
    },
    /// Run a shipped preset into `<output>/<preset>`.
    Preset {
        #[arg(required_unless_present = "list")]
        name: Option<String>,
        #[arg(long, env = OUTPUT_DIR_ENV, default_value = "out")]
        output: PathBuf,
        /// Print the preset names and exit.
        #[arg(long)]
        list: bool,
        /// Print the preset JSON instead of running it.
        #[arg(long)]
        show: bool,
    },
    /// Print the feasibility certificate z^(k) and its sup-norm for k = 1..k_max.
    Certify {
        /// Builtin name or path to a tableau JSON file.
        tableau: String,
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        #[arg(long, default_value_t = 10)]
        k_max: usize,
    },
    /// Tabulate the continuous-time bound, or the discrete rate constants
    /// when a tableau is given.
    Bound(BoundArgs),
    /// Zig-zag energy of iterates stored one per row in a CSV file.
    Zigzag {
        #[arg(long)]
        points: PathBuf,
        #[arg(long = "window", default_values_t = [5usize, 20])]
        windows: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, default_value_t = 100.0)]
        horizon: f64,
        #[arg(long, default_value = "run")]
        method: String,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Base JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
    /// triangle, scalar_box, scalar_huber, sensing, logistic or lowrank,
    /// with default parameters.
    #[arg(long)]
    problem: Option<String>,
    /// svmlight file for the logistic problem.
    #[arg(long)]
    data_file: Option<PathBuf>,
    #[arg(long)]
    method: Option<MethodName>,
    #[arg(long)]
    tableau: Option<String>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    stop_gap: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    zigzag_windows: Option<Vec<usize>>,
    #[arg(long)]
    zigzag_horizon: Option<f64>,
    #[arg(long)]
    slope_kmin: Option<usize>,
    #[arg(long)]
    bound_compare: bool,
    #[arg(long, value_delimiter = ',')]
    lower_bound: Option<Vec<usize>>,
    #[arg(long)]
    save_points: bool,
    #[arg(long, env = OUTPUT_DIR_ENV)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    #[arg(long, default_value_t = 100.0)]
    t_max: f64,
    #[arg(long, default_value_t = 11)]
    points: usize,
    #[arg(long)]
    tableau: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    smoothness: f64,
    #[arg(long, default_value_t = 2.0)]
    diameter: f64,
    /// Initial suboptimality h(x0).
    #[arg(long, default_value_t = 0.0)]
    h0: f64,
    #[arg(long, default_value_t = 10)]
    k_max: usize,
}

fn problem_by_name(name: &str) -> Result<ProblemSpec, CliError> {
    Ok(match name {
        "triangle" => ProblemSpec::Triangle(TriangleSpec::default()),
        "scalar_box" => ProblemSpec::ScalarBox,
        "scalar_huber" => ProblemSpec::ScalarHuber(HuberSpec::default()),
        "sensing" => ProblemSpec::Sensing(SensingSpec::default()),
        "logistic" => ProblemSpec::Logistic(LogisticSpec::default()),
        "lowrank" => ProblemSpec::Lowrank(LowRankSpec::default()),
        other => return Err(CliError::Config(format!("unknown problem {other:?}"))),
    })
}

fn build_config(a: RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => {
            let problem = problem_by_name(a.problem.as_deref().unwrap_or("triangle"))?;
            ExperimentConfig::new("run", problem, a.method.unwrap_or(MethodName::Fw))
        }
    };
    if a.config.is_some() {
        if let Some(p) = &a.problem {
            cfg.problem = problem_by_name(p)?;
        }
        if let Some(m) = a.method {
            cfg.method = m;
        }
    }
    if let Some(file) = a.data_file {
        match &mut cfg.problem {
            ProblemSpec::Logistic(l) => l.file = Some(file),
            _ => return Err(CliError::Config("--data-file applies to the logistic problem".into())),
        }
    }
    macro_rules! set {
        ($($field:ident),*) => { $(if let Some(v) = a.$field { cfg.$field = v; })* };
    }
    set!(name, c, delta, max_iter, stop_gap, seed, output);
    if a.tableau.is_some() {
        cfg.tableau = a.tableau;
    }
    let d: &mut Diagnostics = &mut cfg.diagnostics;
    if let Some(windows) = a.zigzag_windows {
        let horizon = a.zigzag_horizon.or(d.zigzag.as_ref().map(|z| z.horizon)).unwrap_or(100.0);
        d.zigzag = Some(ZigzagSpec { windows, horizon });
    } else if let (Some(h), Some(z)) = (a.zigzag_horizon, d.zigzag.as_mut()) {
        z.horizon = h;
    }
    if let Some(k_min) = a.slope_kmin {
        d.slope = Some(SlopeSpec { k_min });
    }
    d.bound_compare |= a.bound_compare;
    if let Some(anchors) = a.lower_bound {
        d.lower_bound = Some(LowerBoundSpec { anchors });
    }
    cfg.save_points |= a.save_points;
    Ok(cfg)
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn read_points(path: &Path) -> Result<Vec<DVector<f64>>, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) => points.push(DVector::from_vec(v)),
            // a leading header row is allowed
            Err(_) if points.is_empty() && i == 0 => continue,
            Err(_) => return Err(CliError::Config(format!("{}:{}: not a numeric row", path.display(), i + 1))),
        }
    }
    if let Some(p) = points.iter().find(|p| p.len() != points[0].len()) {
        return Err(CliError::Config(format!("rows of different length ({} and {})", points[0].len(), p.len())));
    }
    Ok(points)
}

fn certify(name: &str, c: f64, k_max: usize) -> Result<(), CliError> {
    let t = Tableau::resolve(name).map_err(|e| CliError::Config(format!("tableau {name:?}: {e}")))?;
    if !(c >= 1.0) || k_max < 1 {
        return Err(CliError::Config(format!("need c >= 1 and k_max >= 1, got c = {c}, k_max = {k_max}")));
    }
    let mut out = std::io::stdout().lock();
    let header: Vec<String> = (1..=t.stages()).map(|i| format!("z{i}")).collect();
    writeln!(out, "k,{},z_inf,in_unit_interval", header.join(","))?;
    for k in 1..=k_max {
        let cert = t.certificate(c, k)?;
        let z: Vec<String> = cert.z.iter().map(|v| format!("{v:.6}")).collect();
        let sup = cert.z.amax();
        writeln!(out, "{k},{},{sup:.6},{}", z.join(","), cert.in_unit_interval)?;
    }
    Ok(())
}

fn bound(a: BoundArgs) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match &a.tableau {
        None => {
            if !(a.c >= 1.0) || !(a.t_max >= 0.0) || a.points < 2 {
                return Err(CliError::Config("need c >= 1, t_max >= 0 and points >= 2".into()));
            }
            writeln!(out, "t,continuous_bound,schedule_bound")?;
            for i in 0..a.points {
                let t = a.t_max * i as f64 / (a.points - 1) as f64;
                let q = schedule_bound(|s| a.c / (a.c + s), t)?;
                writeln!(out, "{t},{:.10e},{q:.10e}", continuous_bound(a.c, t))?;
            }
        }
        Some(name) => {
            let t = Tableau::resolve(name).map_err(|e| CliError::Config(format!("tableau {name:?}: {e}")))?;
            let rc = t
                .rate_constants(a.c, a.smoothness, a.diameter, a.h0)
                .map_err(|e| CliError::Config(e.to_string()))?;
            writeln!(out, "# p_max = {:.10e}", rc.p_max)?;
            writeln!(out, "# D2 = {:.10e}", rc.d2)?;
            writeln!(out, "# D3 = {:.10e}", rc.d3)?;
            writeln!(out, "# D4 = {:.10e}", rc.d4)?;
            writeln!(out, "# h0 = {:.10e}", rc.h0)?;
            writeln!(out, "k,rate_bound")?;
            for k in 0..=a.k_max {
                writeln!(out, "{k},{:.10e}", rc.bound(k))?;
            }
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = build_config(*args)?;
            let out = run_experiment(&cfg, &cfg.output)?;
            let s = &out.summary;
            println!(
                "{}: {} iterations, f = {:.10e}, gap = {:.10e}, max violation = {:.3e}",
                s.name, s.iterations, s.f_final, s.gap_final, s.max_violation
            );
            print_files(&out.files);
        }
        Command::Sweep { file, output } => {
            let sweep = Sweep::from_path(&file)?;
            let dir = output.unwrap_or_else(|| PathBuf::from("out")).join(&sweep.name);
            print_files(&run_sweep(&sweep, &dir)?.files);
        }
        Command::Preset { name, output, list, show } => {
            if list {
                for n in presets::names() {
                    println!("{n}");
                }
                return Ok(());
            }
            let name = name.expect("clap requires a name without --list");
            let sweep = presets::get(&name)?;
            if show {
                println!("{}", serde_json::to_string_pretty(&sweep).expect("serializable"));
                return Ok(());
            }
            print_files(&run_sweep(&sweep, &output.join(&name))?.files);
        }
        Command::Certify { tableau, c, k_max } => certify(&tableau, c, k_max)?,
        Command::Bound(args) => bound(args)?,
        Command::Zigzag { points, windows, delta, horizon, method } => {
            let pts = read_points(&points)?;
            let refs: Vec<&DVector<f64>> = pts.iter().collect();
            let rows = windows
                .iter()
                .map(|&w| Ok((method.clone(), zigzag_protocol_points(&refs, delta, w, horizon)?)))
                .collect::<Result<Vec<_>, CliError>>()?;
            write_zigzag_csv(&rows, std::io::stdout().lock())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
