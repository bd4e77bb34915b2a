// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{to_complex, C64};

/// A linear operator on a single truncated bosonic mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeOperator {
    entries: DMatrix<C64>,
}

impl ModeOperator {
    pub fn from_matrix(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::InvalidDimension {
                dim: entries.nrows(),
                reason: "mode operators are square and non-empty",
            });
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
        }
    }

    /// Largest deviation of `[a, a†]` from the identity, ignoring the last
    /// Fock level where truncation breaks the canonical commutator.
    pub fn commutator_defect(&self) -> f64 {
        let a = &self.entries;
        let comm = a * a.adjoint() - a.adjoint() * a;
        let n = self.dim() - 1;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((comm[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Real annihilation matrix with `sqrt(k)` at `(k-1, k)`.
pub(crate) fn annihilation_real(dim: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(dim, dim);
    for k in 1..dim {
        a[(k - 1, k)] = (k as f64).sqrt();
    }
    a
}

/// Truncated annihilation operator `â` on `dim` Fock levels.
pub fn build_annihilation(dim: usize) -> Result<ModeOperator> {
    if dim < 2 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "the annihilation operator needs at least two levels",
        });
    }
    Ok(ModeOperator {
        entries: to_complex(&annihilation_real(dim)),
    })
}

/// Number operator `â†â`, diagonal `(0, 1, …, dim-1)`.
pub fn number_operator(dim: usize) -> Result<ModeOperator> {
    if dim == 0 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "empty Fock space",
        });
    }
    Ok(ModeOperator {
        entries: DMatrix::from_fn(dim, dim, |i, j| {
            C64::new(if i == j { i as f64 } else { 0.0 }, 0.0)
        }),
    })
}

/// Smallest dimension accepted for a displacement of modulus `alpha`.
pub fn min_displacement_dim(alpha: f64) -> usize {
    (alpha * alpha + 6.0 * alpha + 10.0).ceil() as usize
}

pub(crate) fn check_displacement_dim(alpha: f64, dim: usize) -> Result<()> {
    let required = min_displacement_dim(alpha);
    if dim < required {
        return Err(Error::InsufficientDimension {
            dim,
            alpha,
            required,
        });
    }
    Ok(())
}

/// Displacement operator `D(α) = exp(α â† − α* â)` on `dim` levels.
///
/// Evaluated with a scaled-and-squared Padé exponential. The result is unitary
/// up to leakage through the top of the truncated basis.
pub fn displacement_operator(alpha: C64, dim: usize) -> Result<ModeOperator> {
    check_displacement_dim(alpha.norm(), dim)?;
    let a = build_annihilation(dim)?.into_matrix();
    let generator = a.adjoint() * alpha - a * alpha.conj();
    Ok(ModeOperator {
        entries: generator.exp(),
    })
}

/// Real displacement `D(r)` for real `r`.
pub(crate) fn displacement_real(r: f64, dim: usize) -> DMatrix<f64> {
    let a = annihilation_real(dim);
    let generator = (a.transpose() - a) * r;
    generator.exp()
}
