//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use boussinesq_core::system::Dynamics;
use boussinesq_core::{SpectralGrid, SpectralState};
use nalgebra::{DMatrix, DVector};

/// Jacobian of the linear part of the vector field, column by column.
pub fn linear_jacobian(grid: &SpectralGrid) -> DMatrix<f64> {
    let dim = 2 * grid.dim();
    let mut jac = DMatrix::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    let mut col = vec![0.0; dim];
    for j in 0..dim {
        e[j] = 1.0;
        grid.rhs_into(&e, 0.0, Dynamics::Linear, &mut col);
        jac.set_column(j, &DVector::from_column_slice(&col));
        e[j] = 0.0;
    }
    jac
}

/// `Σ = I - τ J_lin` as a dense matrix.
pub fn dense_sigma(grid: &SpectralGrid, tau: f64) -> DMatrix<f64> {
    let jac = linear_jacobian(grid);
    DMatrix::identity(jac.nrows(), jac.ncols()) - jac * tau
}

/// Classical Gauss collocation tableaux for s = 1, 2, 3.
pub fn gauss_tableau(s: usize) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
    match s {
        1 => (DMatrix::from_element(1, 1, 0.5), vec![1.0], vec![0.5]),
        2 => {
            let r = 3f64.sqrt() / 6.0;
            (
                DMatrix::from_row_slice(2, 2, &[0.25, 0.25 - r, 0.25 + r, 0.25]),
                vec![0.5, 0.5],
                vec![0.5 - r, 0.5 + r],
            )
        }
        3 => {
            let r = 15f64.sqrt();
            (
                DMatrix::from_row_slice(
                    3,
                    3,
                    &[
                        5.0 / 36.0,
                        2.0 / 9.0 - r / 15.0,
                        5.0 / 36.0 - r / 30.0,
                        5.0 / 36.0 + r / 24.0,
                        2.0 / 9.0,
                        5.0 / 36.0 - r / 24.0,
                        5.0 / 36.0 + r / 30.0,
                        2.0 / 9.0 + r / 15.0,
                        5.0 / 36.0,
                    ],
                ),
                vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
                vec![0.5 - r / 10.0, 0.5, 0.5 + r / 10.0],
            )
        }
        _ => panic!("no tableau for s = {s}"),
    }
}

/// One implicit Runge-Kutta step solved by fixed-point iteration on the
/// stage slopes. Returns the stage values and `y₁`.
pub fn rk_step(
    a: &DMatrix<f64>,
    b: &[f64],
    y0: &SpectralState,
    h: f64,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let s = b.len();
    let grid = &y0.grid;
    let yv = y0.to_flat();
    let dim = yv.len();
    let mut k = vec![vec![0.0; dim]; s];
    let stages = |k: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..s)
            .map(|i| {
                let mut y = yv.clone();
                for (j, kj) in k.iter().enumerate() {
                    for (yy, kk) in y.iter_mut().zip(kj) {
                        *yy += h * a[(i, j)] * kk;
                    }
                }
                y
            })
            .collect()
    };
    for _ in 0..200 {
        let ys = stages(&k);
        let mut change: f64 = 0.0;
        for (i, y) in ys.iter().enumerate() {
            let mut f = vec![0.0; dim];
            grid.rhs_into(y, y0.uhat0, Dynamics::Full, &mut f);
            for (old, new) in k[i].iter().zip(&f) {
                change = change.max((old - new).abs());
            }
            k[i] = f;
        }
        if change < 1e-16 {
            break;
        }
    }
    let ys = stages(&k);
    let mut y1 = yv.clone();
    for (bi, ki) in b.iter().zip(&k) {
        for (yy, kk) in y1.iter_mut().zip(ki) {
            *yy += h * bi * kk;
        }
    }
    (ys, y1)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}
