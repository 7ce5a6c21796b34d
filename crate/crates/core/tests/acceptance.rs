//! Acceptance gate. Runs every criterion at full problem size and prints one
//! PASS/FAIL line per criterion; exits nonzero if any criterion fails.

mod common;

use std::sync::Arc;
use std::time::Instant;

use boussinesq_core::harness::config::{MethodKind, RunConfig};
use boussinesq_core::harness::run::{reference_run, run_with_reference, RunOutput};
use boussinesq_core::harness::{convergence_sweep, run, SweepRow};
use boussinesq_core::hbvm::rho;
use boussinesq_core::integrator::stage_values;
use boussinesq_core::problems::{default_problem, solitary_wave, MetricsAccumulator, Reference, Trajectory};
use boussinesq_core::system::Dynamics;
use boussinesq_core::{BlendedWorkspace, HbvmMethod, ProblemKind, SpectralGrid, SpectralState, Stepper, StepperConfig};
use common::*;
use nalgebra::DVector;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use ProblemKind::{Collision, Solitary, Spread};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Job {
    kind: ProblemKind,
    method: MethodKind,
    k: usize,
    s: usize,
    n: usize,
}

const fn job(kind: ProblemKind, method: MethodKind, k: usize, s: usize, n: usize) -> Job {
    Job { kind, method, k, s, n }
}

fn job_config(j: &Job) -> RunConfig {
    let mut cfg = match j.method {
        MethodKind::Gauss => RunConfig::gauss(j.kind, j.s, j.n),
        MethodKind::Hbvm => RunConfig::hbvm(j.kind, j.k, j.s, j.n),
        MethodKind::Shbvm => RunConfig::shbvm(j.kind, 1e-11, j.n),
    };
    cfg.output.field_stride = 0;
    cfg
}

struct References {
    spread: Trajectory,
    collision: Trajectory,
}

impl References {
    fn get(&self, kind: ProblemKind) -> Option<&Trajectory> {
        match kind {
            Solitary => None,
            Spread => Some(&self.spread),
            Collision => Some(&self.collision),
        }
    }
}

struct Runs {
    done: Vec<(Job, RunOutput)>,
}

impl Runs {
    fn get(&self, j: &Job) -> &RunOutput {
        &self.done.iter().find(|(k, _)| k == j).expect("job was scheduled").1
    }
}

const H21: MethodKind = MethodKind::Hbvm;

// smallest tabulated n per problem for HBVM(2,1) and HBVM(3,2)
const ENERGY_JOBS: [Job; 6] = [
    job(Solitary, H21, 2, 1, 8000),
    job(Solitary, H21, 3, 2, 1600),
    job(Spread, H21, 2, 1, 5000),
    job(Spread, H21, 3, 2, 1000),
    job(Collision, H21, 2, 1, 1200),
    job(Collision, H21, 3, 2, 1200),
];
const MOMENTUM_JOBS: [Job; 2] = [
    job(Spread, MethodKind::Gauss, 1, 1, 5000),
    job(Spread, MethodKind::Gauss, 2, 2, 1000),
];
const SHBVM_JOBS: [Job; 2] = [
    job(Solitary, MethodKind::Shbvm, 0, 0, 80),
    job(Collision, MethodKind::Shbvm, 0, 0, 60),
];
const STRESS_GAUSS: Job = job(Collision, MethodKind::Gauss, 1, 1, 1200);
const STRESS_HBVM: Job = job(Collision, H21, 2, 1, 1200);

fn c1_projection() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for kind in [Solitary, Spread, Collision] {
        let spec = default_problem(kind, None).unwrap();
        let y0 = spec.initial_state().unwrap();
        let dummy = Trajectory::default();
        let e0 = MetricsAccumulator::new(&spec, &y0, Reference::Run(&dummy), 2048).finish().e_0;
        ok &= e0 < 1e-12;
        parts.push(format!("{} e0={e0:.2e}", kind.name()));
    }
    verdict(ok, format!("{} (< 1e-12)", parts.join(", ")))
}

fn c2_energy(runs: &Runs) -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for j in &ENERGY_JOBS {
        let r = &runs.get(j).report;
        ok &= !r.failed() && r.e_h < 5e-13;
        parts.push(format!("{} ({},{}) n={} e_H={:.2e}", j.kind.name(), j.k, j.s, j.n, r.e_h));
    }
    // desk-scale variant: N = 100, T/4, a quarter of the steps
    let start = Instant::now();
    let reduced: Vec<_> = ENERGY_JOBS
        .par_iter()
        .map(|j| {
            let spec = default_problem(j.kind, None).unwrap();
            let mut cfg = job_config(&job(j.kind, j.method, j.k, j.s, j.n / 4)).with_modes(100);
            cfg.problem.t_final = Some(spec.t_final / 4.0);
            cfg.output.eval_points = 512;
            run(&cfg).unwrap().report
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let worst = reduced.iter().map(|r| r.e_h).fold(0.0, f64::max);
    ok &= reduced.iter().all(|r| !r.failed()) && worst < 5e-13 && secs < 10.0;
    parts.push(format!("reduced N=100,T/4: max e_H={worst:.2e} in {secs:.1}s"));
    verdict(ok, format!("{} (< 5e-13)", parts.join("; ")))
}

fn c3_momentum(runs: &Runs) -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for j in &MOMENTUM_JOBS {
        let r = &runs.get(j).report;
        ok &= !r.failed() && r.e_m < 1e-13;
        parts.push(format!("gauss-{} n={} e_M={:.2e}", j.s, j.n, r.e_m));
    }
    verdict(ok, format!("spread: {} (< 1e-13)", parts.join(", ")))
}

fn ladder(from: usize, step: usize, to: usize) -> Vec<usize> {
    (from..=to).step_by(step).collect()
}

fn c4_rates(sweeps: &[(&str, f64, Vec<SweepRow>)]) -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, order, rows) in sweeps {
        let rates: Vec<_> = rows.iter().filter_map(|r| r.rate_u).filter(|r| !r.saturated).collect();
        let fine = !rates.is_empty()
            && rows.iter().all(|r| !r.report.failed())
            && rates.iter().all(|r| (r.value - order).abs() <= 0.2);
        ok &= fine;
        let vals: Vec<String> = rates.iter().map(|r| format!("{:.2}", r.value)).collect();
        parts.push(format!("{name} [{}] vs {order}", vals.join(" ")));
    }
    verdict(ok, format!("{} (±0.2)", parts.join("; ")))
}

fn c5_anchors(runs: &Runs, gauss1_8000: f64) -> Verdict {
    let anchors = [
        ("gauss-1 solitary n=8000", gauss1_8000, 3.87e-6),
        ("gauss-2 spread n=1000", runs.get(&MOMENTUM_JOBS[1]).report.e_u, 1.81e-11),
        ("hbvm(3,2) collision n=1200", runs.get(&ENERGY_JOBS[5]).report.e_u, 3.13e-8),
    ];
    let mut ok = true;
    let parts: Vec<String> = anchors
        .iter()
        .map(|(name, got, want)| {
            let ratio = got / want;
            ok &= (0.5..=2.0).contains(&ratio);
            format!("{name} e_u={got:.3e} (target {want:.2e}, ratio {ratio:.2})")
        })
        .collect();
    verdict(ok, parts.join("; "))
}

fn c6_shbvm(runs: &Runs) -> Verdict {
    let targets = [(10usize, 15usize, [9, 10, 11]), (12, 18, [11, 12, 13])];
    let mut ok = true;
    let mut parts = Vec::new();
    for (j, (s_target, k_target, accepted)) in SHBVM_JOBS.iter().zip(targets) {
        let r = &runs.get(j).report;
        let s = r.selected_s.unwrap_or(0);
        let k = r.selected_k.unwrap_or(0);
        let fine = !r.failed()
            && accepted.contains(&s)
            && k == s.div_ceil(2) + s
            && r.e_u < 1e-12
            && r.e_h < 1e-12
            && r.e_m < 1e-12;
        ok &= fine;
        parts.push(format!(
            "{} h={}: s={s},k={k} (target {s_target},{k_target}) e_u={:.2e} e_H={:.2e} e_M={:.2e}",
            j.kind.name(),
            default_problem(j.kind, None).unwrap().t_final / j.n as f64,
            r.e_u,
            r.e_h,
            r.e_m
        ));
    }
    verdict(ok, parts.join("; "))
}

fn c7_sigma() -> Verdict {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for n in [4usize, 32, 300] {
        let grid = SpectralGrid::new(-120.0, 80.0, n).unwrap();
        let ws = BlendedWorkspace::new(&grid, rho(10), 1.0);
        let dense = (n <= 32).then(|| dense_sigma(&grid, ws.tau()).lu());
        for _ in 0..100 {
            let r: Vec<f64> = (0..4 * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let z = ws.sigma_inverse_apply(&r).unwrap();
            let rel = match &dense {
                Some(lu) => {
                    let want = lu.solve(&DVector::from_vec(r.clone())).unwrap();
                    max_abs_diff(&z, want.as_slice()) / max_abs(want.as_slice())
                }
                None => {
                    let mut jz = vec![0.0; 4 * n];
                    grid.rhs_into(&z, 0.0, Dynamics::Linear, &mut jz);
                    let back: Vec<f64> = z.iter().zip(&jz).map(|(a, b)| a - ws.tau() * b).collect();
                    max_abs_diff(&back, &r) / max_abs(&r)
                }
            };
            worst = worst.max(rel);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(worst < 1e-12 && secs < 5.0, format!("N=4,32,300 x100: max rel err {worst:.2e} (< 1e-12) in {secs:.2}s"))
}

fn c8_gradient() -> Verdict {
    let start = Instant::now();
    let grid = SpectralGrid::new(-6.0, 6.0, 8).unwrap();
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let q: Vec<f64> = (0..16).map(|_| rng.random_range(-0.5..0.5)).collect();
        let p: Vec<f64> = (0..16).map(|_| rng.random_range(-0.5..0.5)).collect();
        let y = SpectralState::new(grid.clone(), q, p, 0.2, 0.0).unwrap();
        let flat = y.to_flat();
        let eps = 1e-4;
        let grad: Vec<f64> = (0..32)
            .map(|i| {
                let at = |d: f64| {
                    let mut v = flat.clone();
                    v[i] += d;
                    y.with_flat(&v).hamiltonian()
                };
                (8.0 * (at(eps) - at(-eps)) - (at(2.0 * eps) - at(-2.0 * eps))) / (12.0 * eps)
            })
            .collect();
        let mut want = vec![0.0; 32];
        // q' = (D⊗J₂ᵀ) ∂H/∂p, p' = (D⊗J₂ᵀ) ∂H/∂q
        grid.apply_dj2t(&grad[16..], &mut want[..16]);
        grid.apply_dj2t(&grad[..16], &mut want[16..]);
        let (dq, dp) = y.rhs();
        let got: Vec<f64> = dq.into_iter().chain(dp).collect();
        worst = worst.max(max_abs_diff(&got, &want));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(worst < 1e-5 && secs < 1.0, format!("N=8, 20 states: max err {worst:.2e} (< 1e-5) in {secs:.2}s"))
}

fn c9_gauss_identity() -> Verdict {
    let spec = solitary_wave(0.375, 0.0, 1.0).unwrap().with_modes(16);
    let y0 = spec.initial_state().unwrap();
    let h = 1.0;
    let mut worst: f64 = 0.0;
    for s in 1..=3 {
        let (a, b, _) = gauss_tableau(s);
        let (ys, y1) = rk_step(&a, &b, &y0, h);
        let method = Arc::new(HbvmMethod::new(s, s).unwrap());
        let mut cfg = StepperConfig::new(h, method.clone());
        cfg.max_iters = 500;
        let out = Stepper::new(cfg, &y0.grid).unwrap().step(&y0).unwrap();
        worst = worst.max(max_abs_diff(&out.state.to_flat(), &y1));
        for (mine, theirs) in stage_values(&method, &y0.to_flat(), h, &out.gamma).iter().zip(&ys) {
            worst = worst.max(max_abs_diff(mine, theirs));
        }
    }
    verdict(worst < 1e-12, format!("N=16, h=1, s=1,2,3: max stage/update diff {worst:.2e} (< 1e-12)"))
}

fn c10_stress(runs: &Runs) -> Verdict {
    let g = runs.get(&STRESS_GAUSS);
    let hb = runs.get(&STRESS_HBVM);
    let window_max = |o: &RunOutput, lo: f64, hi: f64| {
        o.invariants.iter().filter(|s| s.t >= lo && s.t <= hi).map(|s| s.e_h).fold(0.0, f64::max)
    };
    let plateau = window_max(g, 0.0, 40.0);
    let after = window_max(g, 55.0, 120.0);
    let hb_max = window_max(hb, 0.0, 120.0);
    let ratio = after / plateau;
    verdict(
        ratio > 10.0 && hb_max < 5e-13,
        format!(
            "h=0.1: gauss-1 e_H plateau(t<=40)={plateau:.2e}, max(t>=55)={after:.2e}, ratio {ratio:.0} (> 10); hbvm(2,1) max e_H={hb_max:.2e} (< 5e-13)"
        ),
    )
}

fn main() {
    let t0 = Instant::now();
    let spread_cfg = RunConfig::shbvm(Spread, 1e-12, 1);
    let collision_cfg = RunConfig::shbvm(Collision, 1e-12, 1);
    let (spread, collision) = rayon::join(
        || reference_run(&spread_cfg).expect("spread reference"),
        || reference_run(&collision_cfg).expect("collision reference"),
    );
    let refs = References { spread, collision };

    let jobs: Vec<Job> = ENERGY_JOBS
        .iter()
        .chain(&MOMENTUM_JOBS)
        .chain(&SHBVM_JOBS)
        .chain(std::iter::once(&STRESS_GAUSS))
        .cloned()
        .collect();
    let done: Vec<(Job, RunOutput)> = jobs
        .par_iter()
        .map(|j| (*j, run_with_reference(&job_config(j), refs.get(j.kind)).expect("run")))
        .collect();
    let runs = Runs { done };

    let ladders = [
        ("gauss-1", MethodKind::Gauss, 1, 1, 2.0, ladder(8000, 1600, 16000)),
        ("gauss-2", MethodKind::Gauss, 2, 2, 4.0, ladder(1600, 800, 4000)),
        ("hbvm(2,1)", H21, 2, 1, 2.0, ladder(8000, 1600, 16000)),
        ("hbvm(3,2)", H21, 3, 2, 4.0, ladder(1600, 800, 4000)),
    ];
    let sweeps: Vec<(&str, f64, Vec<SweepRow>)> = ladders
        .iter()
        .map(|(name, m, k, s, order, ns)| {
            let cfg = job_config(&job(Solitary, *m, *k, *s, ns[0]));
            (*name, *order, convergence_sweep(&cfg, ns).expect("sweep"))
        })
        .collect();
    let gauss1_8000 = sweeps[0].2[0].report.e_u;

    let results = [
        ("spatial spectral accuracy", c1_projection()),
        ("HBVM energy conservation", c2_energy(&runs)),
        ("Gauss momentum conservation", c3_momentum(&runs)),
        ("convergence orders", c4_rates(&sweeps)),
        ("absolute-error anchors", c5_anchors(&runs, gauss1_8000)),
        ("SHBVM end-to-end", c6_shbvm(&runs)),
        ("structured sigma inverse", c7_sigma()),
        ("Hamiltonian-ODE consistency", c8_gradient()),
        ("HBVM(s,s) = Gauss", c9_gauss_identity()),
        ("collision stress", c10_stress(&runs)),
    ];
    let mut failed = 0;
    for (i, (name, v)) in results.iter().enumerate() {
        println!("{} [{}] {name}: {}", if v.passed { "PASS" } else { "FAIL" }, i + 1, v.detail);
        failed += usize::from(!v.passed);
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        results.len() - failed,
        results.len(),
        t0.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
