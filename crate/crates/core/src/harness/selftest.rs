//! Fast consistency checks run by the `selftest` subcommand.

use std::sync::Arc;

use crate::hbvm::{rho, HbvmMethod};
use crate::integrator::{BlendedWorkspace, Stepper, StepperConfig};
use crate::legendre::gauss_rule;
use crate::problems::solitary_wave;
use crate::system::{QuadraturePath, SpectralGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, value: f64, limit: f64) -> Self {
        Self {
            name,
            passed: value.is_finite() && value <= limit,
            detail: format!("{value:.3e} (limit {limit:.1e})"),
        }
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn quadrature_check() -> f64 {
    let rule = gauss_rule(5).expect("k = 5 is valid");
    (0..10)
        .map(|j| (rule.integrate(0.0, 1.0, |x| x.powi(j)) - 1.0 / (j as f64 + 1.0)).abs())
        .fold(0.0, f64::max)
}

fn sigma_check() -> f64 {
    let grid = SpectralGrid::new(-10.0, 10.0, 32).expect("valid grid");
    let ws = BlendedWorkspace::new(&grid, rho(2), 0.3);
    let r: Vec<f64> = (0..2 * grid.dim()).map(|i| ((i * 37 % 101) as f64 / 50.0) - 1.0).collect();
    let z = ws.sigma_inverse_apply(&r).expect("length matches");
    max_abs_diff(&ws.sigma_apply(&grid, &z), &r)
}

fn fft_check() -> f64 {
    let grid = SpectralGrid::new(-5.0, 7.0, 24).expect("valid grid");
    let q: Vec<f64> = (0..grid.dim()).map(|i| 0.1 / (1.0 + i as f64)).collect();
    let a = grid.nonlinear_term_with(&q, 0.2, QuadraturePath::Direct);
    let b = grid.nonlinear_term_with(&q, 0.2, QuadraturePath::Fft);
    max_abs_diff(&a, &b)
}

fn energy_check() -> f64 {
    let spec = match solitary_wave(0.375, 0.0, 1.0) {
        Ok(s) => s.with_modes(64).with_final_time(2.0),
        Err(_) => return f64::NAN,
    };
    let Ok(y0) = spec.initial_state() else { return f64::NAN };
    let Ok(method) = HbvmMethod::new(2, 1) else { return f64::NAN };
    let Ok(stepper) = Stepper::new(StepperConfig::new(0.1, Arc::new(method)), &y0.grid) else {
        return f64::NAN;
    };
    let h0 = y0.hamiltonian();
    let mut y = y0;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        match stepper.step(&y) {
            Ok(out) => y = out.state,
            Err(_) => return f64::NAN,
        }
        worst = worst.max((y.hamiltonian() - h0).abs());
    }
    worst
}

pub fn selftest() -> Vec<Check> {
    vec![
        Check::new("gauss rule integrates x^j, j < 10", quadrature_check(), 1e-14),
        Check::new("rho_2 = 1/sqrt(12)", (rho(2) - (1.0f64 / 12.0).sqrt()).abs(), 1e-14),
        Check::new("sigma * sigma^-1 r = r", sigma_check(), 1e-12),
        Check::new("fft and direct quadrature agree", fft_check(), 1e-13),
        Check::new("HBVM(2,1) energy drift over 20 steps", energy_check(), 5e-13),
    ]
}
