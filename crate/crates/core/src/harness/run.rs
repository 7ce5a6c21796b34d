use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{MethodKind, ResolvedMethod, RunConfig};
use super::field::write_snapshots;
use super::report::{to_csv, with_rates, IterationSummary, RunReport, SweepRow};
use crate::error::{Error, Result};
use crate::hbvm::HbvmMethod;
use crate::integrator::{shbvm_select, Stepper, StepperConfig};
use crate::problems::{MetricsAccumulator, Reference, Trajectory};
use crate::system::Dynamics;

/// Invariant drifts after one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantSample {
    pub t: f64,
    pub e_h: f64,
    pub e_m: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    /// Field snapshots every `output.field_stride` steps, plus `t = 0` and
    /// the final time.
    pub snapshots: Trajectory,
    pub invariants: Vec<InvariantSample>,
}

/// Default selection tolerance of reference runs.
pub const REFERENCE_TOL: f64 = 1e-12;

/// SHBVM run on the reference mesh, every step stored.
pub fn reference_run(cfg: &RunConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let spec = cfg.problem_spec()?;
    let n = cfg.reference_steps();
    let tol = cfg.reference.tol.unwrap_or(REFERENCE_TOL);
    let y0 = spec.initial_state()?;
    let h = spec.t_final / n as f64;
    let choice = shbvm_select(&y0, h, tol, super::config::DEFAULT_S_MAX, Dynamics::Full)?;
    let method = Arc::new(HbvmMethod::new(choice.k, choice.s)?);
    let mut scfg = StepperConfig::new(h, method);
    scfg.max_iters = 1000;
    let stepper = Stepper::new(scfg, &y0.grid)?;
    let mut traj = Trajectory::default();
    traj.push(0.0, y0.clone());
    let mut y = y0;
    for i in 1..=n {
        y = stepper.step(&y)?.state;
        traj.push(spec.t_final * i as f64 / n as f64, y.clone());
    }
    log::info!("reference run: {} steps with HBVM({},{})", n, choice.k, choice.s);
    Ok(traj)
}

/// Runs one configuration; a reference trajectory is computed when the
/// problem has no closed form.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let spec = cfg.problem_spec()?;
    if spec.exact.is_none() {
        let reference = reference_run(cfg)?;
        run_with_reference(cfg, Some(&reference))
    } else {
        run_with_reference(cfg, None)
    }
}

/// Runs one configuration against a given reference (or the closed form
/// when `reference` is `None`).
pub fn run_with_reference(cfg: &RunConfig, reference: Option<&Trajectory>) -> Result<RunOutput> {
    cfg.validate()?;
    let spec = cfg.problem_spec()?;
    let reference = match (reference, &spec.exact) {
        (Some(r), _) => Reference::Run(r),
        (None, Some(f)) => Reference::Exact(f),
        (None, None) => {
            return Err(Error::MissingReference(format!(
                "problem '{}' needs a reference run",
                spec.kind.name()
            )))
        }
    };
    let start = Instant::now();
    let n = cfg.time.n;
    let h = spec.t_final / n as f64;
    let y0 = spec.initial_state()?;

    let (method_name, k, s, selected) = match cfg.resolved_method()? {
        ResolvedMethod::Fixed { kind, k, s } => (kind, k, s, None),
        ResolvedMethod::Spectral { tol, s_max } => {
            let choice = shbvm_select(&y0, h, tol, s_max, Dynamics::Full)?;
            if choice.capped {
                log::warn!("SHBVM selection capped at s = {}", choice.s);
            }
            (MethodKind::Shbvm, choice.k, choice.s, Some((choice.s, choice.k)))
        }
    };
    let method = Arc::new(HbvmMethod::new(k, s)?);
    let mut scfg = StepperConfig::new(h, method);
    if let Some(t) = cfg.method.iter_tol {
        scfg.iter_tol = t;
    }
    scfg.max_iters = cfg.method.max_iters.unwrap_or(if s > 4 { 1000 } else { 100 });
    let stepper = Stepper::new(scfg, &y0.grid)?;

    let mut acc = MetricsAccumulator::new(&spec, &y0, reference, cfg.output.eval_points);
    let mut snapshots = Trajectory::default();
    snapshots.push(0.0, y0.clone());
    let mut invariants = Vec::with_capacity(n);
    let mut iterations = IterationSummary::default();
    let (h0, m0) = (y0.hamiltonian(), y0.momentum());
    let mut failure = None;
    let mut y = y0;
    for i in 1..=n {
        let out = match stepper.step(&y) {
            Ok(o) => o,
            Err(e) => {
                failure = Some(format!("step {i} (t = {:.6}): {e}", (i - 1) as f64 * h));
                break;
            }
        };
        iterations.record(out.stats.iterations, out.stats.residual);
        y = out.state;
        let t = spec.t_final * i as f64 / n as f64;
        let measure = i % cfg.output.metric_stride == 0 || i == n;
        acc.observe(t, &y, measure);
        invariants.push(InvariantSample {
            t,
            e_h: (y.hamiltonian() - h0).abs(),
            e_m: (y.momentum() - m0).abs(),
        });
        let stride = cfg.output.field_stride;
        if (stride > 0 && i % stride == 0) || i == n {
            snapshots.push(t, y.clone());
        }
    }
    let metrics = acc.finish();
    let report = RunReport {
        problem: spec.kind.name().to_string(),
        method: method_name.name().to_string(),
        k,
        s,
        n_modes: spec.n_modes,
        n_steps: n,
        h,
        e_u: metrics.e_u,
        e_h: metrics.e_h,
        e_m: metrics.e_m,
        e_0: metrics.e_0,
        wall_time_seconds: start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE),
        iterations,
        selected_s: selected.map(|x| x.0),
        selected_k: selected.map(|x| x.1),
        failure,
    };
    Ok(RunOutput { report, snapshots, invariants })
}

/// Runs `base` for every step count in `n_list` (in parallel) and attaches
/// convergence rates.
pub fn convergence_sweep(base: &RunConfig, n_list: &[usize]) -> Result<Vec<SweepRow>> {
    if n_list.len() < 2 {
        return Err(Error::Config("a sweep needs at least two step counts".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("sweep step counts must be strictly increasing".into()));
    }
    base.validate()?;
    let spec = base.problem_spec()?;
    let reference = if spec.exact.is_none() { Some(reference_run(base)?) } else { None };
    let reports: Vec<Result<RunReport>> = n_list
        .par_iter()
        .map(|&n| {
            let mut cfg = base.clone();
            cfg.time.n = n;
            cfg.output.field_stride = 0;
            run_with_reference(&cfg, reference.as_ref()).map(|o| o.report)
        })
        .collect();
    let reports = reports.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(with_rates(reports))
}

/// Writes the config echo, the report in both precisions, the JSON record,
/// the snapshots and the invariant series into `dir`.
pub fn write_run_outputs(dir: &Path, cfg: &RunConfig, out: &RunOutput) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml_string())?;
    let rows = with_rates(vec![out.report.clone()]);
    std::fs::write(dir.join("report.csv"), to_csv(&rows, false, cfg.output.timing))?;
    std::fs::write(dir.join("report_full.csv"), to_csv(&rows, true, cfg.output.timing))?;
    let mut record = out.report.clone();
    if !cfg.output.timing {
        record.wall_time_seconds = 0.0;
    }
    let json = serde_json::to_string_pretty(&record).expect("report serializes");
    std::fs::write(dir.join("report.json"), json)?;
    if !out.snapshots.is_empty() {
        write_snapshots(&dir.join("snapshots.txt"), &out.snapshots)?;
    }
    let mut inv = String::from("# t e_H e_M\n");
    for s in &out.invariants {
        inv.push_str(&format!("{:e} {:e} {:e}\n", s.t, s.e_h, s.e_m));
    }
    std::fs::write(dir.join("invariants.txt"), inv)?;
    Ok(())
}

pub fn write_sweep_outputs(dir: &Path, base: &RunConfig, rows: &[SweepRow]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.toml"), base.to_toml_string())?;
    std::fs::write(dir.join("sweep.csv"), to_csv(rows, false, base.output.timing))?;
    std::fs::write(dir.join("sweep_full.csv"), to_csv(rows, true, base.output.timing))?;
    let json = serde_json::to_string_pretty(rows).expect("rows serialize");
    std::fs::write(dir.join("sweep.json"), json)?;
    Ok(())
}
