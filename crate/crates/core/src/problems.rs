//! Benchmark initial-value problems and the error metrics used to compare
//! integrators on them.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::system::{default_quad_points, project_initial, SpectralGrid, SpectralState};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type FieldFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Solitary,
    Spread,
    Collision,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Solitary => "solitary",
            ProblemKind::Spread => "spread",
            ProblemKind::Collision => "collision",
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "solitary" => Ok(ProblemKind::Solitary),
            "spread" => Ok(ProblemKind::Spread),
            "collision" => Ok(ProblemKind::Collision),
            other => Err(Error::Config(format!("unknown problem '{other}'"))),
        }
    }
}

/// An initial-value problem on a periodic interval.
#[derive(Clone)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub amplitude: f64,
    pub a: f64,
    pub b: f64,
    pub t_final: f64,
    pub n_modes: usize,
    pub u0: ScalarFn,
    pub v0: ScalarFn,
    /// Closed-form `u(x, t)` when one is known.
    pub exact: Option<FieldFn>,
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("kind", &self.kind)
            .field("amplitude", &self.amplitude)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("t_final", &self.t_final)
            .field("n_modes", &self.n_modes)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

fn sech2(z: f64) -> f64 {
    let c = z.cosh();
    1.0 / (c * c)
}

/// Wave speed `sqrt(1 - 2A/3)`.
pub fn wave_speed(amplitude: f64) -> f64 {
    (1.0 - 2.0 / 3.0 * amplitude).sqrt()
}

impl ProblemSpec {
    pub fn grid(&self) -> Result<Arc<SpectralGrid>> {
        SpectralGrid::new(self.a, self.b, self.n_modes)
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Projected initial state with the default number of projection nodes.
    pub fn initial_state(&self) -> Result<SpectralState> {
        let grid = self.grid()?;
        let (u0, v0) = (self.u0.clone(), self.v0.clone());
        project_initial(&grid, |x| u0(x), |x| v0(x), default_quad_points(self.n_modes))
    }

    /// `(H₀, M₀)` of the projected initial state.
    pub fn invariant_refs(&self) -> Result<(f64, f64)> {
        let st = self.initial_state()?;
        Ok((st.hamiltonian(), st.momentum()))
    }

    /// Overrides the truncation index.
    pub fn with_modes(mut self, n_modes: usize) -> Self {
        self.n_modes = n_modes;
        self
    }

    pub fn with_final_time(mut self, t_final: f64) -> Self {
        self.t_final = t_final;
        self
    }
}

/// `u = 1/2 - A sech²(sqrt(A/6)(x + ct - ξ₀))`, `c = ±sqrt(1 - 2A/3)`, on
/// `[-120, 80]` up to `T = 80` with `N = 300`.
///
/// The closed form is summed over the two nearest periodic images on each
/// side, so it is the reference for the periodic problem rather than for the
/// whole line.
pub fn solitary_wave(amplitude: f64, xi0: f64, speed_sign: f64) -> Result<ProblemSpec> {
    if !(amplitude > 0.0 && amplitude < 1.5) {
        return invalid(format!("solitary-wave amplitude {amplitude} must lie in (0, 3/2)"));
    }
    if speed_sign != 1.0 && speed_sign != -1.0 {
        return invalid("speed sign must be +1 or -1");
    }
    let (a, b) = (-120.0, 80.0);
    let len = b - a;
    let kappa = (amplitude / 6.0).sqrt();
    let c = speed_sign * wave_speed(amplitude);
    let u0: ScalarFn = Arc::new(move |x| 0.5 - amplitude * sech2(kappa * (x - xi0)));
    let v0: ScalarFn = Arc::new(move |x| -c * amplitude * sech2(kappa * (x - xi0)));
    let exact: FieldFn = Arc::new(move |x, t| {
        let mut w = 0.0;
        for image in -2..=2 {
            w += sech2(kappa * (x + image as f64 * len + c * t - xi0));
        }
        0.5 - amplitude * w
    });
    Ok(ProblemSpec {
        kind: ProblemKind::Solitary,
        amplitude,
        a,
        b,
        t_final: 80.0,
        n_modes: 300,
        u0,
        v0,
        exact: Some(exact),
    })
}

/// A single resting hump, `u₀ = 1/2 - A sech²(sqrt(A/6) x)`, `v₀ = 0`, that
/// splits into two counter-propagating waves. `[-150, 150]`, `T = 50`.
pub fn wave_spread(amplitude: f64) -> Result<ProblemSpec> {
    if !(amplitude > 0.0) {
        return invalid(format!("amplitude {amplitude} must be positive"));
    }
    let kappa = (amplitude / 6.0).sqrt();
    Ok(ProblemSpec {
        kind: ProblemKind::Spread,
        amplitude,
        a: -150.0,
        b: 150.0,
        t_final: 50.0,
        n_modes: 300,
        u0: Arc::new(move |x| 0.5 - amplitude * sech2(kappa * x)),
        v0: Arc::new(|_| 0.0),
        exact: None,
    })
}

/// Two humps, the one at `ξ₂` moving right and the one at `ξ₁` moving left;
/// they meet head-on when `ξ₂ < ξ₁`. `[-150, 150]`, `T = 120`. The default
/// problem uses `ξ₁ = 50`, `ξ₂ = -50`, which collide near `t = 58`.
pub fn wave_collision(amplitude: f64, xi1: f64, xi2: f64) -> Result<ProblemSpec> {
    if !(amplitude > 0.0 && amplitude < 1.5) {
        return invalid(format!("collision amplitude {amplitude} must lie in (0, 3/2)"));
    }
    if xi1 == xi2 {
        return invalid("the two wave centres must differ");
    }
    let kappa = (amplitude / 6.0).sqrt();
    let c = wave_speed(amplitude);
    let bump = move |x: f64, xi: f64| amplitude * sech2(kappa * (x - xi));
    Ok(ProblemSpec {
        kind: ProblemKind::Collision,
        amplitude,
        a: -150.0,
        b: 150.0,
        t_final: 120.0,
        n_modes: 300,
        u0: Arc::new(move |x| 0.5 - bump(x, xi2) - bump(x, xi1)),
        v0: Arc::new(move |x| c * (bump(x, xi2) - bump(x, xi1))),
        exact: None,
    })
}

/// The default-parameter problem of the given kind.
pub fn default_problem(kind: ProblemKind, amplitude: Option<f64>) -> Result<ProblemSpec> {
    match kind {
        ProblemKind::Solitary => solitary_wave(amplitude.unwrap_or(0.375), 0.0, 1.0),
        ProblemKind::Spread => wave_spread(amplitude.unwrap_or(3.0 / 32.0)),
        ProblemKind::Collision => wave_collision(amplitude.unwrap_or(0.369), 50.0, -50.0),
    }
}

/// Default number of evaluation points for the error metrics.
pub const EVAL_POINTS: usize = 2048;

/// `(e_u, e_H, e_M, e_0)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct ErrorMetrics {
    pub e_u: f64,
    pub e_h: f64,
    pub e_m: f64,
    pub e_0: f64,
}

/// States stored at selected times.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralState>,
}

impl Trajectory {
    pub fn push(&mut self, t: f64, state: SpectralState) {
        self.times.push(t);
        self.states.push(state);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Stored state whose time matches `t` up to `1e-9 (1 + |t|)`.
    pub fn at_time(&self, t: f64) -> Option<&SpectralState> {
        let tol = 1e-9 * (1.0 + t.abs());
        // times are increasing
        let idx = self.times.partition_point(|&s| s < t - tol);
        match self.times.get(idx) {
            Some(&s) if (s - t).abs() <= tol => Some(&self.states[idx]),
            _ => None,
        }
    }
}

/// What the numerical `u` is compared against.
#[derive(Clone, Copy)]
pub enum Reference<'a> {
    Exact(&'a FieldFn),
    Run(&'a Trajectory),
}

/// Streaming computation of the error metrics: states are fed one at a time
/// so long runs need not be stored.
pub struct MetricsAccumulator<'a> {
    reference: Reference<'a>,
    eval_points: usize,
    xs: Vec<f64>,
    h0: f64,
    m0: f64,
    metrics: ErrorMetrics,
}

impl<'a> MetricsAccumulator<'a> {
    /// `initial` is the projected state at `t = 0`.
    pub fn new(
        spec: &ProblemSpec,
        initial: &SpectralState,
        reference: Reference<'a>,
        eval_points: usize,
    ) -> Self {
        let xs = initial.grid.quad_points(eval_points)[..eval_points].to_vec();
        let (u, v) = initial.reconstruct_uniform(eval_points);
        let e_0 = xs
            .iter()
            .zip(u.iter().zip(&v))
            .map(|(&x, (uu, vv))| ((spec.u0)(x) - uu).abs().max(((spec.v0)(x) - vv).abs()))
            .fold(0.0, f64::max);
        Self {
            reference,
            eval_points,
            xs,
            h0: initial.hamiltonian(),
            m0: initial.momentum(),
            metrics: ErrorMetrics { e_0, ..Default::default() },
        }
    }

    /// Solution error at time `t`, or `None` when the reference has no
    /// sample there.
    pub fn solution_error(&self, t: f64, state: &SpectralState) -> Option<f64> {
        match self.reference {
            Reference::Exact(f) => {
                let (u, _) = state.reconstruct_uniform(self.eval_points);
                Some(
                self.xs
                    .iter()
                    .zip(&u)
                    .map(|(&x, uu)| (f(x, t) - uu).abs())
                    .fold(0.0, f64::max),
                )
            }
            Reference::Run(traj) => {
                let r = traj.at_time(t)?;
                let (u, _) = state.reconstruct_uniform(self.eval_points);
                let (ur, _) = r.reconstruct_uniform(self.eval_points);
                Some(u.iter().zip(&ur).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            }
        }
    }

    /// Records the invariant drifts, and the solution error when
    /// `with_solution` is set.
    pub fn observe(&mut self, t: f64, state: &SpectralState, with_solution: bool) {
        let e_h = (state.hamiltonian() - self.h0).abs();
        let e_m = (state.momentum() - self.m0).abs();
        self.metrics.e_h = self.metrics.e_h.max(e_h);
        self.metrics.e_m = self.metrics.e_m.max(e_m);
        if with_solution {
            if let Some(e) = self.solution_error(t, state) {
                self.metrics.e_u = self.metrics.e_u.max(e);
            }
        }
    }

    pub fn finish(self) -> ErrorMetrics {
        self.metrics
    }
}

/// Error metrics of a stored trajectory, whose first entry is the state at
/// `t = 0`.
pub fn error_metrics(
    run: &Trajectory,
    spec: &ProblemSpec,
    reference: Option<&Trajectory>,
    eval_points: usize,
) -> Result<ErrorMetrics> {
    let first = run
        .states
        .first()
        .ok_or_else(|| Error::NoSnapshots("empty trajectory".into()))?;
    let reference = match (&spec.exact, reference) {
        (_, Some(r)) => Reference::Run(r),
        (Some(f), None) => Reference::Exact(f),
        (None, None) => {
            return Err(Error::MissingReference(format!(
                "problem '{}' has no closed form and no reference run was supplied",
                spec.kind.name()
            )))
        }
    };
    let mut acc = MetricsAccumulator::new(spec, first, reference, eval_points);
    for (t, st) in run.times.iter().zip(&run.states) {
        acc.observe(*t, st, true);
    }
    Ok(acc.finish())
}
