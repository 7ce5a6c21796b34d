//! HBVM(k, s) methods: k-stage Runge-Kutta methods whose stage polynomial has
//! degree s, described through the Legendre coefficient matrices
//! `I_s` (integrals) and `P_s` (values) at the k Gauss nodes.

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::legendre::{gauss_rule, legendre_integral, legendre_values, xi, QuadratureRule};

#[derive(Debug, Clone)]
pub struct HbvmMethod {
    k: usize,
    s: usize,
    rule: QuadratureRule,
    /// k×s, `∫₀^{c_i} P_j`.
    mat_is: DMatrix<f64>,
    /// k×s, `P_j(c_i)`.
    mat_ps: DMatrix<f64>,
    mat_xs: DMatrix<f64>,
    /// `ρ_s X_s⁻¹`, used by the blended iteration.
    xs_inv_scaled: DMatrix<f64>,
    rho_s: f64,
    /// `b_i P_j(c_i)`, the rows of `P_sᵀ Ω` stored transposed (k×s).
    proj: DMatrix<f64>,
}

/// The analytic `X_s`: `ξ₀` in the corner, `ξ_i` below and `-ξ_i` above the
/// diagonal.
pub fn xs_matrix(s: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(s, s);
    if s == 0 {
        return x;
    }
    x[(0, 0)] = xi(0);
    for i in 1..s {
        x[(i, i - 1)] = xi(i);
        x[(i - 1, i)] = -xi(i);
    }
    x
}

/// `min |λ|` over the spectrum of `X_s`.
pub fn rho(s: usize) -> f64 {
    xs_matrix(s)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min)
}

impl HbvmMethod {
    /// Builds HBVM(k, s); `k = s` is the s-stage Gauss method.
    pub fn new(k: usize, s: usize) -> Result<Self> {
        if s == 0 {
            return invalid("HBVM needs s >= 1");
        }
        if s > k {
            return invalid(format!("HBVM({k},{s}) requires k >= s"));
        }
        let rule = gauss_rule(k)?;
        let mut mat_is = DMatrix::zeros(k, s);
        let mut mat_ps = DMatrix::zeros(k, s);
        for (i, &c) in rule.nodes.iter().enumerate() {
            let vals = legendre_values(s, c);
            for j in 0..s {
                mat_ps[(i, j)] = vals[j];
                mat_is[(i, j)] = legendre_integral(j, c)?;
            }
        }
        let mut proj = mat_ps.clone();
        for i in 0..k {
            for j in 0..s {
                proj[(i, j)] *= rule.weights[i];
            }
        }
        let mat_xs = xs_matrix(s);
        let rho_s = rho(s);
        let xs_inv = mat_xs
            .clone()
            .try_inverse()
            .ok_or_else(|| crate::Error::InvalidArgument("X_s is singular".into()))?;
        Ok(Self {
            k,
            s,
            rule,
            mat_is,
            mat_ps,
            mat_xs,
            xs_inv_scaled: xs_inv * rho_s,
            rho_s,
            proj,
        })
    }

    /// The s-stage Gauss collocation method, HBVM(s, s).
    pub fn gauss(s: usize) -> Result<Self> {
        Self::new(s, s)
    }

    /// HBVM(⌈3s/2⌉, s), the smallest member that conserves the cubic
    /// Hamiltonian exactly.
    pub fn energy_conserving(s: usize) -> Result<Self> {
        Self::new((3 * s).div_ceil(2), s)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn mat_is(&self) -> &DMatrix<f64> {
        &self.mat_is
    }

    pub fn mat_ps(&self) -> &DMatrix<f64> {
        &self.mat_ps
    }

    pub fn mat_xs(&self) -> &DMatrix<f64> {
        &self.mat_xs
    }

    pub fn xs_inv_scaled(&self) -> &DMatrix<f64> {
        &self.xs_inv_scaled
    }

    pub fn rho_s(&self) -> f64 {
        self.rho_s
    }

    /// `b_i P_j(c_i)`.
    pub(crate) fn proj(&self) -> &DMatrix<f64> {
        &self.proj
    }

    /// `Ω` as a dense diagonal matrix.
    pub fn weights_diag(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.rule.weights))
    }

    /// Butcher matrix `I_s P_sᵀ Ω`. Only for inspection; the stepper never
    /// forms it.
    pub fn butcher_a(&self) -> DMatrix<f64> {
        &self.mat_is * self.mat_ps.transpose() * self.weights_diag()
    }
}
