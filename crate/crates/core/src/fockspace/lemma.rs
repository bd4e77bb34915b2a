// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    gauss_legendre, hermitian_eigen, hermitian_eigenvalues, hermiticity_defect, max_abs, C64,
};

const QUADRATURE_TOL: f64 = 1e-12;
const MAX_DEPTH: usize = 40;

/// Compares a central-difference derivative of `log A(t)` at `t0` with the
/// integral representation `∫₀¹ ds M(s)⁻¹ A'(t0) M(s)⁻¹`, `M(s) = sA + (1-s)I`.
///
/// Returns the largest entrywise discrepancy.
pub fn matrix_log_derivative_check<F>(family: F, t0: f64, step: f64) -> Result<f64>
where
    F: Fn(f64) -> DMatrix<C64>,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid("step", step, "finite-difference step must be positive"));
    }
    let a0 = family(t0);
    let plus = family(t0 + step);
    let minus = family(t0 - step);
    let dim = a0.nrows();
    for m in [&a0, &plus, &minus] {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: m.nrows(),
            });
        }
        check_positive_definite(m)?;
    }

    let log = |m: &DMatrix<C64>| hermitian_eigen(m).map(f64::ln);
    let numeric = (log(&plus) - log(&minus)).unscale(2.0 * step);
    let derivative = (&plus - &minus).unscale(2.0 * step);

    let nodes = gauss_legendre(64);
    let integrand = |s: f64| -> DMatrix<C64> {
        let m = &a0 * C64::new(s, 0.0) + DMatrix::identity(dim, dim) * C64::new(1.0 - s, 0.0);
        let lu = m.lu();
        let x = lu.solve(&derivative).expect("positive definite pencil");
        lu.solve(&x.adjoint()).expect("positive definite pencil").adjoint()
    };
    let panel = |lo: f64, hi: f64| -> DMatrix<C64> {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut acc = DMatrix::zeros(dim, dim);
        for (&x, &w) in nodes.0.iter().zip(&nodes.1) {
            acc += integrand(mid + half * x) * C64::new(w * half, 0.0);
        }
        acc
    };

    let mut total = DMatrix::zeros(dim, dim);
    let mut stack = vec![(0.0, 1.0, panel(0.0, 1.0), 0usize)];
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(lo, mid);
        let right = panel(mid, hi);
        let refined = &left + &right;
        if depth >= MAX_DEPTH || max_abs(&(&refined - &whole)) < QUADRATURE_TOL {
            total += refined;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(max_abs(&(numeric - total)))
}

fn check_positive_definite(m: &DMatrix<C64>) -> Result<()> {
    if hermiticity_defect(m) > 1e-12 {
        return Err(Error::InvalidParameter {
            name: "family",
            value: hermiticity_defect(m),
            reason: "matrix family must be Hermitian",
        });
    }
    let smallest = hermitian_eigenvalues(m).first().copied().unwrap_or(0.0);
    if smallest <= 0.0 {
        return Err(invalid("family", smallest, "matrix family must be positive definite"));
    }
    Ok(())
}
