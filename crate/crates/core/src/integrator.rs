//! HBVM time stepping in Legendre-coefficient (γ) form, solved by the blended
//! iteration with the structured inverse of `Σ = I - hρ_s J_lin`.
//!
//! A step solves `F(γ) = γ - (P_sᵀΩ ⊗ I) f(e⊗y₀ + h(I_s ⊗ I)γ) = 0` for the
//! s blocks of γ and returns `y₁ = y₀ + hγ₀`.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::hbvm::HbvmMethod;
use crate::system::{Dynamics, SpectralGrid, SpectralState};

/// Block vector: `s` blocks of length `4N`.
pub type Blocks = Vec<Vec<f64>>;

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn blocks_max_norm(b: &[Vec<f64>]) -> f64 {
    b.iter().map(|v| max_norm(v)).fold(0.0, f64::max)
}

/// Diagonal factors of `Σ⁻¹` for one step size.
#[derive(Debug, Clone)]
pub struct BlendedWorkspace {
    tau: f64,
    /// `1/(1 + τ²D_j⁴)`
    d1: Vec<f64>,
    /// `τD_j/(1 + τ²D_j⁴)`
    d1d: Vec<f64>,
    /// `τD_j³/(1 + τ²D_j⁴)`
    d1d3: Vec<f64>,
}

impl BlendedWorkspace {
    pub fn new(grid: &SpectralGrid, rho_s: f64, h: f64) -> Self {
        let tau = rho_s * h;
        let mut d1 = Vec::with_capacity(grid.n_modes());
        let mut d1d = Vec::with_capacity(grid.n_modes());
        let mut d1d3 = Vec::with_capacity(grid.n_modes());
        for &d in grid.freq_diag() {
            let t2 = tau * d * d;
            let inv = 1.0 / (1.0 + t2 * t2);
            d1.push(inv);
            d1d.push(tau * d * inv);
            d1d3.push(tau * d * d * d * inv);
        }
        Self { tau, d1, d1d, d1d3 }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn d1_diag(&self) -> &[f64] {
        &self.d1
    }

    pub fn d1d_diag(&self) -> &[f64] {
        &self.d1d
    }

    pub fn d1d3_diag(&self) -> &[f64] {
        &self.d1d3
    }

    fn n_modes(&self) -> usize {
        self.d1.len()
    }

    /// `Σ⁻¹ r` in `O(N)`:
    /// `out_q = D₁ r_q + τD₁D J₂ᵀ r_p`, `out_p = τD₁D³ J₂ᵀ r_q + D₁ r_p`.
    pub fn sigma_inverse_apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        let n = self.n_modes();
        if r.len() != 4 * n {
            return invalid(format!("expected a vector of length {}, got {}", 4 * n, r.len()));
        }
        let mut out = vec![0.0; 4 * n];
        self.sigma_inverse_into(r, &mut out);
        Ok(out)
    }

    fn sigma_inverse_into(&self, r: &[f64], out: &mut [f64]) {
        let n2 = 2 * self.n_modes();
        let (rq, rp) = r.split_at(n2);
        let (oq, op) = out.split_at_mut(n2);
        for j in 0..self.n_modes() {
            let (qb, qa) = (rq[2 * j], rq[2 * j + 1]);
            let (pb, pa) = (rp[2 * j], rp[2 * j + 1]);
            // J₂ᵀ (β, α) = (-α, β)
            oq[2 * j] = self.d1[j] * qb - self.d1d[j] * pa;
            oq[2 * j + 1] = self.d1[j] * qa + self.d1d[j] * pb;
            op[2 * j] = -self.d1d3[j] * qa + self.d1[j] * pb;
            op[2 * j + 1] = self.d1d3[j] * qb + self.d1[j] * pa;
        }
    }

    /// `Σ r` applied matrix-free, with `Σ = [[I, -τ D⊗J₂ᵀ], [-τ D³⊗J₂ᵀ, I]]`.
    pub fn sigma_apply(&self, grid: &SpectralGrid, r: &[f64]) -> Vec<f64> {
        let n2 = grid.dim();
        let (rq, rp) = r.split_at(n2);
        let mut out = r.to_vec();
        let mut tmp = vec![0.0; n2];
        grid.apply_dj2t(rp, &mut tmp);
        for (o, t) in out[..n2].iter_mut().zip(&tmp) {
            *o -= self.tau * t;
        }
        let d3: Vec<f64> = rq
            .iter()
            .enumerate()
            .map(|(i, v)| grid.freq_diag()[i / 2].powi(2) * v)
            .collect();
        grid.apply_dj2t(&d3, &mut tmp);
        for (o, t) in out[n2..].iter_mut().zip(&tmp) {
            *o -= self.tau * t;
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct StepperConfig {
    pub h: f64,
    pub method: Arc<HbvmMethod>,
    /// Relative residual tolerance, `‖F‖∞ ≤ tol (1 + ‖γ‖∞)`.
    pub iter_tol: f64,
    pub max_iters: usize,
    pub dynamics: Dynamics,
}

impl StepperConfig {
    pub fn new(h: f64, method: Arc<HbvmMethod>) -> Self {
        Self { h, method, iter_tol: 1e-14, max_iters: 100, dynamics: Dynamics::Full }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h.is_finite() && self.h != 0.0) {
            return invalid(format!("time step {} must be finite and nonzero", self.h));
        }
        if !(self.iter_tol > 0.0) {
            return invalid("iteration tolerance must be positive");
        }
        if self.max_iters == 0 {
            return invalid("max_iters must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStats {
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: SpectralState,
    pub gamma: Blocks,
    pub stats: IterationStats,
}

/// Reusable HBVM stepper for one grid, method and step size.
#[derive(Debug, Clone)]
pub struct Stepper {
    cfg: StepperConfig,
    ws: BlendedWorkspace,
}

impl Stepper {
    pub fn new(cfg: StepperConfig, grid: &SpectralGrid) -> Result<Self> {
        cfg.validate()?;
        let ws = BlendedWorkspace::new(grid, cfg.method.rho_s(), cfg.h);
        Ok(Self { cfg, ws })
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    pub fn workspace(&self) -> &BlendedWorkspace {
        &self.ws
    }

    /// `F(γ)`.
    pub fn residual(&self, y0: &SpectralState, gamma: &[Vec<f64>]) -> Blocks {
        residual(&self.cfg.method, y0, self.cfg.h, gamma, self.cfg.dynamics)
    }

    /// One blended sweep from `gamma` given `F(gamma)`.
    pub fn blended_sweep(&self, gamma: &[Vec<f64>], f_val: &[Vec<f64>]) -> Blocks {
        blended_sweep(&self.ws, &self.cfg.method, gamma, f_val)
    }

    /// Advances `y0` by one step.
    pub fn step(&self, y0: &SpectralState) -> Result<StepOutcome> {
        let method = &self.cfg.method;
        let dim = 2 * y0.grid.dim();
        let mut gamma: Blocks = vec![vec![0.0; dim]; method.s()];
        let mut f_val = self.residual(y0, &gamma);
        let mut res = blocks_max_norm(&f_val);
        let mut best = res;
        let mut stalled = 0;
        let mut iterations = 0;
        loop {
            let scale = 1.0 + blocks_max_norm(&gamma);
            if res <= self.cfg.iter_tol * scale {
                break;
            }
            // round-off floor: no progress over three sweeps, already tiny
            if stalled >= 3 && res <= 1e3 * self.cfg.iter_tol * scale {
                break;
            }
            if iterations >= self.cfg.max_iters || !res.is_finite() {
                return Err(Error::NotConverged { iterations, residual: res });
            }
            gamma = self.blended_sweep(&gamma, &f_val);
            f_val = self.residual(y0, &gamma);
            res = blocks_max_norm(&f_val);
            iterations += 1;
            if res < 0.9 * best {
                best = res;
                stalled = 0;
            } else {
                stalled += 1;
            }
        }
        let h = self.cfg.h;
        let y1: Vec<f64> = y0
            .to_flat()
            .iter()
            .zip(&gamma[0])
            .map(|(y, g)| y + h * g)
            .collect();
        Ok(StepOutcome {
            state: y0.with_flat(&y1),
            gamma,
            stats: IterationStats { iterations, residual: res },
        })
    }
}

/// Stage values `Y_i = y₀ + h Σ_j (I_s)_{ij} γ_j`.
pub fn stage_values(method: &HbvmMethod, y0: &[f64], h: f64, gamma: &[Vec<f64>]) -> Blocks {
    let is = method.mat_is();
    (0..method.k())
        .map(|i| {
            let mut y = y0.to_vec();
            for (j, g) in gamma.iter().enumerate() {
                let c = h * is[(i, j)];
                for (yv, gv) in y.iter_mut().zip(g) {
                    *yv += c * gv;
                }
            }
            y
        })
        .collect()
}

/// `F(γ) = γ - (P_sᵀΩ ⊗ I) f(Y)`.
pub fn residual(
    method: &HbvmMethod,
    y0: &SpectralState,
    h: f64,
    gamma: &[Vec<f64>],
    dynamics: Dynamics,
) -> Blocks {
    let grid = &y0.grid;
    let stages = stage_values(method, &y0.to_flat(), h, gamma);
    let proj = method.proj();
    let mut out: Blocks = gamma.to_vec();
    let mut f = vec![0.0; 2 * grid.dim()];
    for (i, y) in stages.iter().enumerate() {
        grid.rhs_into(y, y0.uhat0, dynamics, &mut f);
        for (j, block) in out.iter_mut().enumerate() {
            let w = proj[(i, j)];
            for (o, fv) in block.iter_mut().zip(&f) {
                *o -= w * fv;
            }
        }
    }
    out
}

/// `η = -F`, `η₁ = (ρ_s X_s⁻¹ ⊗ I) η`,
/// `γ ← γ + (I ⊗ Σ⁻¹)[η₁ + (I ⊗ Σ⁻¹)(η - η₁)]`.
pub fn blended_sweep(
    ws: &BlendedWorkspace,
    method: &HbvmMethod,
    gamma: &[Vec<f64>],
    f_val: &[Vec<f64>],
) -> Blocks {
    let s = method.s();
    let xinv = method.xs_inv_scaled();
    let dim = gamma[0].len();
    let mut out = gamma.to_vec();
    let mut diff = vec![0.0; dim];
    let mut inner = vec![0.0; dim];
    let mut corr = vec![0.0; dim];
    for i in 0..s {
        // η₁ block i
        let mut eta1 = vec![0.0; dim];
        for (j, fj) in f_val.iter().enumerate() {
            let c = -xinv[(i, j)];
            if c != 0.0 {
                for (e, fv) in eta1.iter_mut().zip(fj) {
                    *e += c * fv;
                }
            }
        }
        for ((d, e1), fv) in diff.iter_mut().zip(&eta1).zip(&f_val[i]) {
            *d = -fv - e1;
        }
        ws.sigma_inverse_into(&diff, &mut inner);
        for (e1, v) in eta1.iter_mut().zip(&inner) {
            *e1 += v;
        }
        ws.sigma_inverse_into(&eta1, &mut corr);
        for (g, c) in out[i].iter_mut().zip(&corr) {
            *g += c;
        }
    }
    out
}

/// Outcome of the SHBVM order selection.
#[derive(Debug, Clone, PartialEq)]
pub struct ShbvmChoice {
    pub s: usize,
    pub k: usize,
    /// `‖γ_j‖∞` from the accepted trial step.
    pub gamma_norms: Vec<f64>,
    /// The selection stopped on a norm plateau rather than on the tolerance.
    pub stagnated: bool,
    /// `s_max` was reached without meeting either rule.
    pub capped: bool,
}

/// `k = ⌈1.5 s⌉`.
pub fn shbvm_k(s: usize) -> usize {
    (3 * s).div_ceil(2)
}

/// Index at which three consecutive norms sit within a factor 2 of each
/// other, i.e. the coefficients have stopped decaying.
fn plateau_start(norms: &[f64]) -> Option<usize> {
    norms.windows(3).position(|w| {
        let hi = w.iter().cloned().fold(0.0, f64::max);
        let lo = w.iter().cloned().fold(f64::INFINITY, f64::min);
        hi <= 2.0 * lo
    })
}

/// Spectral HBVM: increase s (with `k = ⌈1.5s⌉`) until a trial step from
/// `y0` gives `‖γ_{s-1}‖ ≤ tol · max_j ‖γ_j‖`.
///
/// When the trailing norms stagnate (three in a row within a factor 2) the
/// degree is truncated at the start of the plateau.
pub fn shbvm_select(
    y0: &SpectralState,
    h: f64,
    tol: f64,
    s_max: usize,
    dynamics: Dynamics,
) -> Result<ShbvmChoice> {
    if !(tol > 0.0 && tol < 1.0) {
        return invalid(format!("SHBVM tolerance {tol} must lie in (0, 1)"));
    }
    if s_max < 2 {
        return invalid("SHBVM needs s_max >= 2");
    }
    let mut last = Vec::new();
    for s in 2..=s_max {
        let k = shbvm_k(s);
        let method = Arc::new(HbvmMethod::new(k, s)?);
        let mut cfg = StepperConfig::new(h, method);
        cfg.dynamics = dynamics;
        cfg.max_iters = 500;
        let out = Stepper::new(cfg, &y0.grid)?.step(y0)?;
        let norms: Vec<f64> = out.gamma.iter().map(|g| max_norm(g)).collect();
        let top = norms.iter().cloned().fold(0.0, f64::max);
        if norms[s - 1] <= tol * top {
            return Ok(ShbvmChoice { s, k, gamma_norms: norms, stagnated: false, capped: false });
        }
        if let Some(p) = plateau_start(&norms[1..]) {
            let p = p + 1;
            if norms[p] <= 1e-6 * top {
                let s_cut = p.max(2);
                return Ok(ShbvmChoice {
                    s: s_cut,
                    k: shbvm_k(s_cut),
                    gamma_norms: norms,
                    stagnated: true,
                    capped: false,
                });
            }
        }
        last = norms;
    }
    log::warn!("SHBVM selection reached s_max = {s_max} without meeting tol = {tol:e}");
    Ok(ShbvmChoice { s: s_max, k: shbvm_k(s_max), gamma_norms: last, stagnated: false, capped: true })
}
