// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error(
        "truncation overflow: more than max_dim={max_dim} Fock levels needed \
         (nbar={nbar}, |alpha|^2={alpha_sq})"
    )]
    TruncationOverflow {
        max_dim: usize,
        nbar: f64,
        alpha_sq: f64,
    },

    #[error("dimension {dim} too small for displacement |alpha|={alpha} (need at least {required})")]
    InsufficientDimension {
        dim: usize,
        alpha: f64,
        required: usize,
    },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error(
        "relative entropy diverges: reference eigenvalue {eigenvalue:e} \
         carries state weight {weight:e}"
    )]
    DivergenceInfinite { eigenvalue: f64, weight: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("unstable coefficient fit: {0}")]
    UnstableFit(String),

    #[error(
        "bracket [{lo:e}, {hi:e}] does not enclose the target {target:e} \
         (f(lo)={f_lo:e}, f(hi)={f_hi:e})"
    )]
    InvalidBracket {
        lo: f64,
        hi: f64,
        target: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("sparsification fraction tau={tau} exceeds 1; the operating point is already inside the covert budget")]
    BudgetNotBinding { tau: f64 },

    #[error("configuration rejected: {0}")]
    ConfigRejected(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Shorthand for parameter range failures.
pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}
