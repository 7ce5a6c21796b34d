use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use boussinesq_core::harness::config::{MethodKind, RunConfig};
use boussinesq_core::harness::field::{export_field, field_to_string, read_snapshots};
use boussinesq_core::harness::report::{to_csv, with_rates};
use boussinesq_core::harness::run::{write_run_outputs, write_sweep_outputs};
use boussinesq_core::harness::selftest::selftest;
use boussinesq_core::harness::{convergence_sweep, run};
use boussinesq_core::{Error, ProblemKind};

#[derive(Parser)]
#[command(name = "boussinesq", version, about = "Energy-conserving integration of the good Boussinesq equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write its report.
    Run(RunArgs),
    /// Run a configuration for several step counts and tabulate rates.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated, increasing step counts.
        #[arg(long = "n-list", value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
    },
    /// Write `x t 1/2-u` triples from a snapshot file.
    ExportField {
        /// snapshots.txt written by `run`.
        #[arg(long)]
        snapshots: PathBuf,
        /// Comma-separated times; the nearest stored snapshot is used.
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        points: usize,
        /// Output file (default: field.txt in the output directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run quick internal consistency checks.
    Selftest,
}

/// Every flag overrides the matching config key.
#[derive(Args)]
struct RunArgs {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// problem.name
    #[arg(long)]
    problem: Option<ProblemKind>,
    /// problem.A
    #[arg(long = "A", alias = "amplitude")]
    amplitude: Option<f64>,
    /// problem.T
    #[arg(long = "T", alias = "t-final")]
    t_final: Option<f64>,
    /// method.kind (gauss, hbvm, shbvm)
    #[arg(long)]
    method: Option<MethodKind>,
    /// method.k
    #[arg(long)]
    k: Option<usize>,
    /// method.s
    #[arg(long)]
    s: Option<usize>,
    /// method.tol
    #[arg(long)]
    tol: Option<f64>,
    /// method.s_max
    #[arg(long = "s-max")]
    s_max: Option<usize>,
    /// method.iter_tol
    #[arg(long = "iter-tol")]
    iter_tol: Option<f64>,
    /// method.max_iters
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
    /// grid.N
    #[arg(long = "N", alias = "modes")]
    n_modes: Option<usize>,
    /// time.n
    #[arg(long)]
    n: Option<usize>,
    /// output.dir
    #[arg(long = "output-dir")]
    output_dir: Option<PathBuf>,
    /// output.field_stride
    #[arg(long = "field-stride")]
    field_stride: Option<usize>,
    /// output.metric_stride
    #[arg(long = "metric-stride")]
    metric_stride: Option<usize>,
    /// output.eval_points
    #[arg(long = "eval-points")]
    eval_points: Option<usize>,
    /// output.timing = false
    #[arg(long = "no-timing")]
    no_timing: bool,
    /// reference.n
    #[arg(long = "ref-n")]
    ref_n: Option<usize>,
    /// reference.tol
    #[arg(long = "ref-tol")]
    ref_tol: Option<f64>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::new(
                self.problem.unwrap_or(ProblemKind::Solitary),
                self.method.unwrap_or(MethodKind::Hbvm),
                self.n.unwrap_or(80),
            ),
        };
        if let Some(v) = self.problem {
            cfg.problem.name = v;
        }
        if self.amplitude.is_some() {
            cfg.problem.amplitude = self.amplitude;
        }
        if self.t_final.is_some() {
            cfg.problem.t_final = self.t_final;
        }
        if let Some(v) = self.method {
            cfg.method.kind = v;
        }
        macro_rules! set {
            ($($flag:ident => $dst:expr),*) => {$(
                if self.$flag.is_some() { $dst = self.$flag; }
            )*};
        }
        set!(k => cfg.method.k, s => cfg.method.s, tol => cfg.method.tol,
             s_max => cfg.method.s_max, iter_tol => cfg.method.iter_tol,
             max_iters => cfg.method.max_iters, n_modes => cfg.grid.n_modes,
             ref_n => cfg.reference.n, ref_tol => cfg.reference.tol);
        if let Some(v) = self.n {
            cfg.time.n = v;
        }
        if let Some(v) = &self.output_dir {
            cfg.output.dir = Some(v.clone());
        }
        if let Some(v) = self.field_stride {
            cfg.output.field_stride = v;
        }
        if let Some(v) = self.metric_stride {
            cfg.output.metric_stride = v;
        }
        if let Some(v) = self.eval_points {
            cfg.output.eval_points = v;
        }
        if self.no_timing {
            cfg.output.timing = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir().unwrap_or_else(|| PathBuf::from("output"))
}

fn cmd_run(args: &RunArgs) -> Result<bool, Error> {
    let cfg = args.resolve()?;
    let out = run(&cfg)?;
    let dir = out_dir(&cfg);
    write_run_outputs(&dir, &cfg, &out)?;
    print!("{}", to_csv(&with_rates(vec![out.report.clone()]), false, cfg.output.timing));
    if let (Some(s), Some(k)) = (out.report.selected_s, out.report.selected_k) {
        println!("# SHBVM selected s = {s}, k = {k}");
    }
    if let Some(f) = &out.report.failure {
        eprintln!("run failed: {f}");
        return Ok(false);
    }
    log::info!("outputs written to {}", dir.display());
    Ok(true)
}

fn cmd_sweep(args: &RunArgs, n_list: &[usize]) -> Result<bool, Error> {
    let cfg = args.resolve()?;
    let rows = convergence_sweep(&cfg, n_list)?;
    let dir = out_dir(&cfg);
    write_sweep_outputs(&dir, &cfg, &rows)?;
    print!("{}", to_csv(&rows, false, cfg.output.timing));
    Ok(rows.iter().all(|r| !r.report.failed()))
}

fn cmd_export(snapshots: &Path, t: &[f64], points: usize, out: Option<&Path>) -> Result<bool, Error> {
    let traj = read_snapshots(snapshots)?;
    let slices = export_field(&traj, t, points)?;
    let path = match out {
        Some(p) => p.to_path_buf(),
        None => {
            let dir = std::env::var_os(boussinesq_core::harness::config::OUTPUT_DIR_ENV)
                .map(PathBuf::from)
                .or_else(|| snapshots.parent().map(Path::to_path_buf))
                .unwrap_or_default();
            std::fs::create_dir_all(&dir)?;
            dir.join("field.txt")
        }
    };
    std::fs::write(&path, field_to_string(&slices))?;
    for s in &slices {
        println!("t = {} -> stored t = {}", s.requested, s.t);
    }
    println!("wrote {}", path.display());
    Ok(true)
}

fn cmd_selftest() -> bool {
    let checks = selftest();
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    checks.iter().all(|c| c.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep { run, n_list } => cmd_sweep(run, n_list),
        Command::ExportField { snapshots, t, points, out } => {
            cmd_export(snapshots, t, *points, out.as_deref())
        }
        Command::Selftest => Ok(cmd_selftest()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
