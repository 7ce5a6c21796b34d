//! Shifted orthonormal Legendre polynomials on `[0, 1]` and Gauss-Legendre
//! quadrature.
//!
//! `P_j(x) = sqrt(2j + 1) L_j(2x - 1)`, so that `∫₀¹ P_i P_j = δ_ij`.

use crate::error::{invalid, Result};

/// A k-point Gauss-Legendre rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// Abscissae, strictly increasing inside `(0, 1)`.
    pub nodes: Vec<f64>,
    /// Positive weights summing to one.
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to `f` on `[lo, hi]`.
    pub fn integrate(&self, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        let w = hi - lo;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&c, &b)| b * f(lo + w * c))
            .sum::<f64>()
            * w
    }
}

/// `ξ_i = (2 sqrt|4i² - 1|)⁻¹`.
pub fn xi(i: usize) -> f64 {
    let i = i as f64;
    1.0 / (2.0 * (4.0 * i * i - 1.0).abs().sqrt())
}

/// Standard Legendre `L_n(t)` and its derivative on `[-1, 1]`.
fn legendre_std(n: usize, t: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut prev, mut cur) = (1.0, t);
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * t * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    let nf = n as f64;
    // derivative from n (t L_n - L_{n-1}) / (t² - 1); only used away from ±1
    let dcur = nf * (t * cur - prev) / (t * t - 1.0);
    (cur, dcur)
}

/// Values `P_0(x), …, P_{n-1}(x)` via the three-term recurrence.
pub fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let t = 2.0 * x - 1.0;
    let mut out = Vec::with_capacity(n);
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..n {
        out.push(cur * ((2 * j + 1) as f64).sqrt());
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * t * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    out
}

fn check_unit(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return invalid(format!("argument {x} outside [0, 1]"));
    }
    Ok(())
}

/// Orthonormal shifted Legendre polynomial `P_j(x)`.
pub fn legendre_eval(j: usize, x: f64) -> Result<f64> {
    check_unit(x)?;
    Ok(legendre_values(j + 1, x)[j])
}

/// `∫₀^c P_j(x) dx`, from `∫₀^x P_j = ξ_{j+1} P_{j+1}(x) - ξ_j P_{j-1}(x)` for
/// `j ≥ 1` (the lower limit contributes nothing) and `x` itself for `j = 0`.
pub fn legendre_integral(j: usize, c: f64) -> Result<f64> {
    check_unit(c)?;
    if j == 0 {
        return Ok(c);
    }
    let p = legendre_values(j + 2, c);
    Ok(xi(j + 1) * p[j + 1] - xi(j) * p[j - 1])
}

/// k-point Gauss-Legendre rule on `[0, 1]`.
///
/// Roots of `L_k` by Newton iteration from Chebyshev-like initial guesses;
/// only the upper half is computed and mirrored so the nodes are exactly
/// symmetric about 1/2.
pub fn gauss_rule(k: usize) -> Result<QuadratureRule> {
    if k == 0 {
        return invalid("Gauss rule needs at least one node");
    }
    let kf = k as f64;
    let half = k.div_ceil(2);
    // (t, w) on [-1, 1] with t ≥ 0, largest first
    let mut upper = Vec::with_capacity(half);
    for i in 0..half {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (kf + 0.5)).cos();
        if k % 2 == 1 && i == half - 1 {
            t = 0.0;
        } else {
            for _ in 0..100 {
                let (l, dl) = legendre_std(k, t);
                let dt = l / dl;
                t -= dt;
                if dt.abs() <= 1e-16 {
                    break;
                }
            }
        }
        let (_, dl) = legendre_std(k, t);
        let w = 2.0 / ((1.0 - t * t) * dl * dl);
        upper.push((t, w));
    }

    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    for (i, &(t, w)) in upper.iter().enumerate() {
        nodes[i] = 0.5 * (1.0 - t);
        nodes[k - 1 - i] = 0.5 * (1.0 + t);
        weights[i] = 0.5 * w;
        weights[k - 1 - i] = 0.5 * w;
    }
    if k % 2 == 1 {
        nodes[k / 2] = 0.5;
    }
    Ok(QuadratureRule { nodes, weights })
}
