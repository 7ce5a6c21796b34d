//! Fourier-Galerkin semi-discretization of the good Boussinesq equation in
//! Hamiltonian form.
//!
//! With `u = û₀ + ω(x)ᵀq` and `v = v̂₀ + ω(x)ᵀp`, where
//! `ω = (s₁, c₁, …, s_N, c_N)` is the orthonormal real Fourier basis on
//! `[a, b]`, the coefficients obey
//!
//! ```text
//! q' = (D⊗J₂ᵀ) p
//! p' = (D⊗J₂ᵀ) [ (D²⊗I₂) q + ∫ ω (û₀ + ωᵀq)² dx ]
//! ```
//!
//! which is the skew-gradient flow of
//! `H(q, p) = ½ [pᵀp + qᵀ(D²⊗I₂)q + ⅔ ∫ (û₀ + ωᵀq)³ dx]`.
//! Both integrals are trigonometric polynomials of degree ≤ 3N, so the
//! trapezoidal rule on any `m ≥ 3N + 1` evenly spaced nodes evaluates them
//! exactly.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{invalid, Result};

/// How the trapezoidal sums are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadraturePath {
    /// Explicit sums over the nodes, `O(N m)`.
    Direct,
    /// FFT of length `m`, `O(m log m)`.
    #[default]
    Fft,
}

/// Which part of the vector field is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dynamics {
    #[default]
    Full,
    /// Drops the quadratic term: `u_tt = -u_xxxx`.
    Linear,
}

type Plan = Arc<dyn Fft<f64>>;

/// Truncated Fourier basis on a periodic interval.
pub struct SpectralGrid {
    a: f64,
    b: f64,
    n_modes: usize,
    freq: Vec<f64>,
    /// FFT length used for the exact quadratic/cubic sums.
    m_exact: usize,
    plans: Mutex<HashMap<(usize, bool), Plan>>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("n_modes", &self.n_modes)
            .finish()
    }
}

/// Smallest integer ≥ n whose only prime factors are 2, 3 and 5.
pub fn next_smooth(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Default number of projection nodes: `max(4N, 1024)` rounded up to a power
/// of two.
pub fn default_quad_points(n_modes: usize) -> usize {
    (4 * n_modes).max(1024).next_power_of_two()
}

impl SpectralGrid {
    pub fn new(a: f64, b: f64, n_modes: usize) -> Result<Arc<Self>> {
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return invalid(format!("domain [{a}, {b}] is empty or not finite"));
        }
        if n_modes == 0 {
            return invalid("truncation index N must be >= 1");
        }
        let scale = 2.0 * PI / (b - a);
        let freq = (1..=n_modes).map(|j| j as f64 * scale).collect();
        Ok(Arc::new(Self {
            a,
            b,
            n_modes,
            freq,
            m_exact: next_smooth(3 * n_modes + 1),
            plans: Mutex::new(HashMap::new()),
        }))
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Truncation index N.
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Length of `q` (and of `p`), `2N`.
    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    /// Diagonal of `D`: `2πj/(b - a)`, `j = 1..N`.
    pub fn freq_diag(&self) -> &[f64] {
        &self.freq
    }

    fn norm(&self) -> f64 {
        (2.0 / self.length()).sqrt()
    }

    /// `x_i = a + i(b - a)/m`, `i = 0..=m`.
    pub fn quad_points(&self, m: usize) -> Vec<f64> {
        let h = self.length() / m as f64;
        (0..=m).map(|i| self.a + i as f64 * h).collect()
    }

    /// The `m = 2N + 1` nodes.
    pub fn quad_points_rhs(&self) -> Vec<f64> {
        self.quad_points(2 * self.n_modes + 1)
    }

    /// The `m = 3N + 1` nodes.
    pub fn quad_points_ham(&self) -> Vec<f64> {
        self.quad_points(3 * self.n_modes + 1)
    }

    fn plan(&self, m: usize, inverse: bool) -> Plan {
        let mut plans = self.plans.lock().unwrap();
        plans
            .entry((m, inverse))
            .or_insert_with(|| {
                let dir = if inverse {
                    FftDirection::Inverse
                } else {
                    FftDirection::Forward
                };
                FftPlanner::new().plan_fft(m, dir)
            })
            .clone()
    }

    /// `ω(x) = (s₁(x), c₁(x), …, s_N(x), c_N(x))`. Points outside `[a, b]`
    /// are wrapped periodically.
    pub fn basis_eval(&self, x: f64) -> Vec<f64> {
        let theta = 2.0 * PI * (x - self.a) / self.length();
        let nrm = self.norm();
        let mut out = Vec::with_capacity(self.dim());
        for j in 1..=self.n_modes {
            let (s, c) = (j as f64 * theta).sin_cos();
            out.push(nrm * s);
            out.push(nrm * c);
        }
        out
    }

    /// `out = (D⊗J₂) v`: per mode `(β, α) → D_j (α, -β)`.
    pub fn apply_dj2(&self, v: &[f64], out: &mut [f64]) {
        for (j, &d) in self.freq.iter().enumerate() {
            let (b, a) = (v[2 * j], v[2 * j + 1]);
            out[2 * j] = d * a;
            out[2 * j + 1] = -d * b;
        }
    }

    /// `out = (D⊗J₂ᵀ) v`: per mode `(β, α) → D_j (-α, β)`.
    pub fn apply_dj2t(&self, v: &[f64], out: &mut [f64]) {
        for (j, &d) in self.freq.iter().enumerate() {
            let (b, a) = (v[2 * j], v[2 * j + 1]);
            out[2 * j] = -d * a;
            out[2 * j + 1] = d * b;
        }
    }

    /// Values of `mean + ω(x)ᵀcoeffs` at `x_i = a + i(b-a)/m`, `i < m`.
    pub fn synthesize(&self, coeffs: &[f64], mean: f64, m: usize, path: QuadraturePath) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.dim());
        assert!(m > self.n_modes, "synthesis needs m > N");
        let nrm = self.norm();
        match path {
            QuadraturePath::Fft => {
                let mut buf = vec![Complex64::new(0.0, 0.0); m];
                for j in 1..=self.n_modes {
                    let (b, a) = (coeffs[2 * j - 2], coeffs[2 * j - 1]);
                    buf[j] = Complex64::new(nrm * a, -nrm * b);
                }
                self.plan(m, true).process(&mut buf);
                buf.iter().map(|z| mean + z.re).collect()
            }
            QuadraturePath::Direct => {
                let table = trig_table(m);
                (0..m)
                    .map(|i| {
                        let mut acc = 0.0;
                        for j in 1..=self.n_modes {
                            let (s, c) = table[(j * i) % m];
                            acc += coeffs[2 * j - 2] * s + coeffs[2 * j - 1] * c;
                        }
                        mean + nrm * acc
                    })
                    .collect()
            }
        }
    }

    /// Trapezoidal projection `∫ ω g dx` from periodic samples
    /// `g(x_i)`, `i < m`.
    pub fn analyze(&self, values: &[f64], path: QuadraturePath) -> Vec<f64> {
        let m = values.len();
        assert!(m > self.n_modes, "projection needs m > N");
        let scale = self.norm() * self.length() / m as f64;
        let mut out = vec![0.0; self.dim()];
        match path {
            QuadraturePath::Fft => {
                let mut buf: Vec<Complex64> =
                    values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                self.plan(m, false).process(&mut buf);
                for j in 1..=self.n_modes {
                    out[2 * j - 2] = -scale * buf[j].im;
                    out[2 * j - 1] = scale * buf[j].re;
                }
            }
            QuadraturePath::Direct => {
                let table = trig_table(m);
                for j in 1..=self.n_modes {
                    let (mut ss, mut cc) = (0.0, 0.0);
                    for (i, &g) in values.iter().enumerate() {
                        let (s, c) = table[(j * i) % m];
                        ss += g * s;
                        cc += g * c;
                    }
                    out[2 * j - 2] = scale * ss;
                    out[2 * j - 1] = scale * cc;
                }
            }
        }
        out
    }

    /// `∫ ω (û₀ + ωᵀq)² dx`, exact.
    pub fn nonlinear_term(&self, q: &[f64], uhat0: f64) -> Vec<f64> {
        self.nonlinear_term_with(q, uhat0, QuadraturePath::Fft)
    }

    /// As [`nonlinear_term`](Self::nonlinear_term); the direct path uses
    /// exactly `m = 3N + 1` nodes.
    pub fn nonlinear_term_with(&self, q: &[f64], uhat0: f64, path: QuadraturePath) -> Vec<f64> {
        let m = self.exact_nodes(path);
        let mut u = self.synthesize(q, uhat0, m, path);
        for v in &mut u {
            *v *= *v;
        }
        self.analyze(&u, path)
    }

    /// `∫ (û₀ + ωᵀq)³ dx`, exact.
    pub fn cubic_integral(&self, q: &[f64], uhat0: f64, path: QuadraturePath) -> f64 {
        let m = self.exact_nodes(path);
        let u = self.synthesize(q, uhat0, m, path);
        u.iter().map(|v| v * v * v).sum::<f64>() * self.length() / m as f64
    }

    fn exact_nodes(&self, path: QuadraturePath) -> usize {
        match path {
            QuadraturePath::Fft => self.m_exact,
            QuadraturePath::Direct => 3 * self.n_modes + 1,
        }
    }

    /// Right-hand side on the flat phase-space vector `y = (q, p)`.
    pub fn rhs_into(&self, y: &[f64], uhat0: f64, dynamics: Dynamics, out: &mut [f64]) {
        let n2 = self.dim();
        let (q, p) = y.split_at(n2);
        let (dq, dp) = out.split_at_mut(n2);
        self.apply_dj2t(p, dq);
        let mut grad_q: Vec<f64> = q
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let d = self.freq[i / 2];
                d * d * v
            })
            .collect();
        if dynamics == Dynamics::Full {
            let nl = self.nonlinear_term(q, uhat0);
            for (g, n) in grad_q.iter_mut().zip(nl) {
                *g += n;
            }
        }
        self.apply_dj2t(&grad_q, dp);
    }
}

fn trig_table(m: usize) -> Vec<(f64, f64)> {
    (0..m)
        .map(|r| (2.0 * PI * r as f64 / m as f64).sin_cos())
        .collect()
}

/// A point of the semi-discrete phase space, with the two conserved means.
#[derive(Debug, Clone)]
pub struct SpectralState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub uhat0: f64,
    pub vhat0: f64,
    pub grid: Arc<SpectralGrid>,
}

impl SpectralState {
    pub fn new(grid: Arc<SpectralGrid>, q: Vec<f64>, p: Vec<f64>, uhat0: f64, vhat0: f64) -> Result<Self> {
        let n2 = grid.dim();
        if q.len() != n2 || p.len() != n2 {
            return invalid(format!(
                "coefficient vectors must have length {n2} (got {} and {})",
                q.len(),
                p.len()
            ));
        }
        if q.iter().chain(&p).any(|v| !v.is_finite()) || !uhat0.is_finite() || !vhat0.is_finite() {
            return invalid("state has non-finite entries");
        }
        Ok(Self { q, p, uhat0, vhat0, grid })
    }

    pub fn zeros(grid: Arc<SpectralGrid>, uhat0: f64, vhat0: f64) -> Self {
        let n2 = grid.dim();
        Self { q: vec![0.0; n2], p: vec![0.0; n2], uhat0, vhat0, grid }
    }

    /// `(q, p)` concatenated.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut y = self.q.clone();
        y.extend_from_slice(&self.p);
        y
    }

    /// Same grid and means, new coefficients.
    pub fn with_flat(&self, y: &[f64]) -> Self {
        let n2 = self.grid.dim();
        Self {
            q: y[..n2].to_vec(),
            p: y[n2..].to_vec(),
            uhat0: self.uhat0,
            vhat0: self.vhat0,
            grid: self.grid.clone(),
        }
    }

    /// `(q', p')`.
    pub fn rhs(&self) -> (Vec<f64>, Vec<f64>) {
        self.rhs_with(Dynamics::Full)
    }

    pub fn rhs_with(&self, dynamics: Dynamics) -> (Vec<f64>, Vec<f64>) {
        let y = self.to_flat();
        let mut out = vec![0.0; y.len()];
        self.grid.rhs_into(&y, self.uhat0, dynamics, &mut out);
        let p = out.split_off(self.grid.dim());
        (out, p)
    }

    /// Discrete Hamiltonian `H(q, p)`.
    pub fn hamiltonian(&self) -> f64 {
        self.hamiltonian_with(QuadraturePath::Fft)
    }

    pub fn hamiltonian_with(&self, path: QuadraturePath) -> f64 {
        let freq = self.grid.freq_diag();
        let pp: f64 = self.p.iter().map(|v| v * v).sum();
        let qdq: f64 = self
            .q
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let d = freq[i / 2];
                d * d * v * v
            })
            .sum();
        let cubic = self.grid.cubic_integral(&self.q, self.uhat0, path);
        0.5 * (pp + qdq + 2.0 / 3.0 * cubic)
    }

    /// Discrete momentum `qᵀp`.
    pub fn momentum(&self) -> f64 {
        self.q.iter().zip(&self.p).map(|(a, b)| a * b).sum()
    }

    /// Pointwise `u = û₀ + ωᵀq` and `v = v̂₀ + ωᵀp`.
    pub fn reconstruct(&self, xs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut u = Vec::with_capacity(xs.len());
        let mut v = Vec::with_capacity(xs.len());
        for &x in xs {
            let w = self.grid.basis_eval(x);
            u.push(self.uhat0 + dot(&w, &self.q));
            v.push(self.vhat0 + dot(&w, &self.p));
        }
        (u, v)
    }

    /// `u` and `v` at the m evenly spaced points `a + i(b-a)/m`, `i < m`.
    pub fn reconstruct_uniform(&self, m: usize) -> (Vec<f64>, Vec<f64>) {
        (
            self.grid.synthesize(&self.q, self.uhat0, m, QuadraturePath::Fft),
            self.grid.synthesize(&self.p, self.vhat0, m, QuadraturePath::Fft),
        )
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// L² projection of `(u0, v0)` onto the basis by the composite trapezoidal
/// rule on `quad_points` intervals.
pub fn project_initial(
    grid: &Arc<SpectralGrid>,
    u0: impl Fn(f64) -> f64,
    v0: impl Fn(f64) -> f64,
    quad_points: usize,
) -> Result<SpectralState> {
    let min = 2 * grid.n_modes() + 1;
    if quad_points < min {
        return invalid(format!("projection needs at least {min} quadrature points, got {quad_points}"));
    }
    let xs = grid.quad_points(quad_points);
    let sample = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
        let mut vals: Vec<f64> = xs[..quad_points].iter().map(|&x| f(x)).collect();
        // composite trapezoid: the two end nodes share one periodic slot
        vals[0] = 0.5 * (vals[0] + f(xs[quad_points]));
        vals
    };
    let us = sample(&u0);
    let vs = sample(&v0);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let q = grid.analyze(&us, QuadraturePath::Fft);
    let p = grid.analyze(&vs, QuadraturePath::Fft);
    SpectralState::new(grid.clone(), q, p, mean(&us), mean(&vs))
}
