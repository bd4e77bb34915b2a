// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

use std::sync::OnceLock;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::operators::{displacement_real, min_displacement_dim};
use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermitian_part, hermiticity_defect, C64};

const HERMITICITY_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-12;
/// Largest trace deficit a truncated state may carry.
const MAX_TRACE_DEFICIT: f64 = 1e-6;

/// How the Fock basis is truncated when a constructor picks its own dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub target_trace_deficit: f64,
    pub max_dim: usize,
    pub growth_factor: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            target_trace_deficit: 1e-10,
            max_dim: 4096,
            growth_factor: 1.5,
        }
    }
}

impl TruncationPolicy {
    pub fn new(target_trace_deficit: f64, max_dim: usize, growth_factor: f64) -> Result<Self> {
        let policy = Self {
            target_trace_deficit,
            max_dim,
            growth_factor,
        };
        policy.validate()?;
        Ok(policy)
    }

    /// Default policy with a different deficit target.
    pub fn with_target(target_trace_deficit: f64) -> Result<Self> {
        Self::new(target_trace_deficit, 4096, 1.5)
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.target_trace_deficit;
        if !(t > 0.0 && t <= MAX_TRACE_DEFICIT) {
            return Err(invalid("target_trace_deficit", t, "must lie in (0, 1e-6]"));
        }
        if self.max_dim < 2 {
            return Err(invalid("max_dim", self.max_dim as f64, "must be at least 2"));
        }
        if !(self.growth_factor > 1.0) {
            return Err(invalid("growth_factor", self.growth_factor, "must exceed 1"));
        }
        Ok(())
    }

    /// First dimension tried for a state with the given photon scales.
    pub fn initial_dim(&self, nbar: f64, alpha_sq: f64) -> usize {
        let guess = (8.0 * (nbar + alpha_sq + 1.0)).ceil() as usize;
        guess.max(32)
    }

    /// Next dimension after `dim`, or `None` once `max_dim` has been tried.
    pub fn grow(&self, dim: usize) -> Option<usize> {
        if dim >= self.max_dim {
            return None;
        }
        let next = ((dim as f64) * self.growth_factor).ceil() as usize;
        Some(next.max(dim + 1).min(self.max_dim))
    }

    /// Tolerance on the mean photon number of an auto-truncated state.
    pub(crate) fn mean_photon_tolerance(&self, expected: f64) -> f64 {
        (100.0 * self.target_trace_deficit).max(1e-12) * (1.0 + expected)
    }
}

/// A trace-one (up to recorded truncation loss) positive Hermitian matrix on a
/// truncated Fock space.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
    trace_deficit: f64,
    spectrum: OnceLock<Vec<f64>>,
}

/// Row-major JSON debug dump of a density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDump {
    pub dim: usize,
    pub trace_deficit: f64,
    /// `[re, im]` pairs, row-major.
    pub entries: Vec<[f64; 2]>,
}

impl DensityMatrix {
    /// Validates `matrix`, recording `1 - tr` as the trace deficit.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let trace = matrix.trace().re;
        Self::with_trace_deficit(matrix, (1.0 - trace).max(0.0))
    }

    /// Validates `matrix` against a known truncation loss.
    pub fn with_trace_deficit(matrix: DMatrix<C64>, trace_deficit: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidDimension {
                dim: matrix.nrows(),
                reason: "density matrices are square and non-empty",
            });
        }
        if !(0.0..=MAX_TRACE_DEFICIT).contains(&trace_deficit) {
            return Err(Error::InvalidState(format!(
                "trace deficit {trace_deficit:e} outside [0, {MAX_TRACE_DEFICIT:e}]"
            )));
        }
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:e})")));
        }
        let trace = matrix.trace().re;
        if trace < 1.0 - trace_deficit - TRACE_TOL || trace > 1.0 + TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace {trace} outside [1 - {trace_deficit:e}, 1]"
            )));
        }
        let rho = Self {
            matrix: hermitian_part(&matrix),
            trace_deficit,
            spectrum: OnceLock::new(),
        };
        let smallest = rho.eigenvalues().first().copied().unwrap_or(0.0);
        if smallest < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {smallest:e}"
            )));
        }
        Ok(rho)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    /// Eigenvalues in ascending order, computed once.
    pub fn eigenvalues(&self) -> &[f64] {
        self.spectrum.get_or_init(|| hermitian_eigenvalues(&self.matrix))
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `ρ ⊗ σ` on the product space.
    pub fn kron(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let deficit = 1.0 - (1.0 - self.trace_deficit) * (1.0 - other.trace_deficit);
        Self::with_trace_deficit(self.matrix.kronecker(&other.matrix), deficit.max(0.0))
    }

    /// Embeds the state into a larger Fock space by zero padding.
    pub fn padded(&self, dim: usize) -> Result<DensityMatrix> {
        if dim < self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: dim,
            });
        }
        let mut m = DMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (self.dim(), self.dim())).copy_from(&self.matrix);
        Ok(Self {
            matrix: m,
            trace_deficit: self.trace_deficit,
            spectrum: OnceLock::new(),
        })
    }

    pub fn dump(&self) -> MatrixDump {
        let n = self.dim();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = self.matrix[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixDump {
            dim: n,
            trace_deficit: self.trace_deficit,
            entries,
        }
    }

    pub fn from_dump(dump: &MatrixDump) -> Result<Self> {
        if dump.entries.len() != dump.dim * dump.dim {
            return Err(Error::InvalidInput(format!(
                "dump holds {} entries for dim {}",
                dump.entries.len(),
                dump.dim
            )));
        }
        let m = DMatrix::from_fn(dump.dim, dump.dim, |i, j| {
            let [re, im] = dump.entries[i * dump.dim + j];
            C64::new(re, im)
        });
        Self::with_trace_deficit(m, dump.trace_deficit)
    }
}

/// Thermal populations `t_k = nbar^k / (1 + nbar)^(k+1)` for `k < dim`.
pub fn thermal_diagonal(nbar: f64, dim: usize) -> Vec<f64> {
    let ratio = nbar / (1.0 + nbar);
    let mut t = Vec::with_capacity(dim);
    let mut current = 1.0 / (1.0 + nbar);
    for _ in 0..dim {
        t.push(current);
        current *= ratio;
    }
    t
}

/// Probability mass of a thermal state beyond the first `dim` levels.
pub fn thermal_tail(nbar: f64, dim: usize) -> f64 {
    if nbar == 0.0 {
        return if dim == 0 { 1.0 } else { 0.0 };
    }
    let ratio = nbar / (1.0 + nbar);
    (dim as f64 * ratio.ln()).exp()
}

fn check_nbar(nbar: f64) -> Result<()> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(invalid("nbar", nbar, "mean photon number must be finite and >= 0"));
    }
    Ok(())
}

fn diagonal_matrix(d: &[f64]) -> DMatrix<C64> {
    let n = d.len();
    let mut m = DMatrix::zeros(n, n);
    for (k, &v) in d.iter().enumerate() {
        m[(k, k)] = C64::new(v, 0.0);
    }
    m
}

/// Thermal state on exactly `dim` levels (no renormalisation).
pub fn thermal_state_in(nbar: f64, dim: usize) -> Result<DensityMatrix> {
    check_nbar(nbar)?;
    if dim == 0 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "empty Fock space",
        });
    }
    let tail = thermal_tail(nbar, dim);
    if tail > MAX_TRACE_DEFICIT {
        return Err(Error::InvalidDimension {
            dim,
            reason: "thermal tail beyond the cutoff exceeds 1e-6",
        });
    }
    DensityMatrix::with_trace_deficit(diagonal_matrix(&thermal_diagonal(nbar, dim)), tail)
}

/// Zero-mean thermal state with automatically chosen truncation.
pub fn thermal_state(nbar: f64, policy: &TruncationPolicy) -> Result<DensityMatrix> {
    check_nbar(nbar)?;
    policy.validate()?;
    let mut dim = policy.initial_dim(nbar, 0.0).min(policy.max_dim);
    loop {
        if thermal_tail(nbar, dim) < policy.target_trace_deficit {
            return thermal_state_in(nbar, dim);
        }
        dim = policy.grow(dim).ok_or(Error::TruncationOverflow {
            max_dim: policy.max_dim,
            nbar,
            alpha_sq: 0.0,
        })?;
    }
}

/// Raw displaced-thermal matrix `D(α) ρ_nbar D(α)†` on `dim` levels.
///
/// The real displacement `D(|α|)` is exponentiated once and the phase of `α`
/// is applied as `e^{iφ(j-k)}` on entry `(j, k)`, which is exact because the
/// thermal state commutes with phase rotations.
pub(crate) fn displaced_thermal_matrix(alpha: C64, nbar: f64, dim: usize) -> DMatrix<C64> {
    let t = thermal_diagonal(nbar, dim);
    let r = alpha.norm();
    if r == 0.0 {
        return diagonal_matrix(&t);
    }
    let real = displaced_thermal_real(r, &t);
    let phi = alpha.arg();
    DMatrix::from_fn(dim, dim, |j, k| {
        let phase = C64::from_polar(1.0, phi * (j as f64 - k as f64));
        phase * real[(j, k)]
    })
}

/// `D(r) diag(t) D(r)ᵀ` for real `r`, symmetrised.
pub(crate) fn displaced_thermal_real(r: f64, t: &[f64]) -> DMatrix<f64> {
    let dim = t.len();
    let d = displacement_real(r, dim);
    let mut scaled = d.clone();
    for (k, &tk) in t.iter().enumerate() {
        scaled.column_mut(k).scale_mut(tk);
    }
    let rho = &scaled * d.transpose();
    (&rho + rho.transpose()) * 0.5
}

/// Displaced thermal state on exactly `dim` levels.
pub fn displaced_thermal_in(alpha: C64, nbar: f64, dim: usize) -> Result<DensityMatrix> {
    check_nbar(nbar)?;
    super::operators::check_displacement_dim(alpha.norm(), dim)?;
    let m = displaced_thermal_matrix(alpha, nbar, dim);
    DensityMatrix::new(m)
}

/// Grows the dimension until a state built by `build` passes the truncation
/// checks: thermal weight in the top quarter below target, trace deficit below
/// target, and mean photon number within tolerance of `expected_mean`.
pub(crate) fn grow_until<F>(
    policy: &TruncationPolicy,
    nbar: f64,
    alpha: f64,
    expected_mean: f64,
    build: F,
) -> Result<DensityMatrix>
where
    F: Fn(usize) -> Result<DensityMatrix>,
{
    policy.validate()?;
    let overflow = Error::TruncationOverflow {
        max_dim: policy.max_dim,
        nbar,
        alpha_sq: alpha * alpha,
    };
    let mut dim = policy
        .initial_dim(nbar, alpha * alpha)
        .max(min_displacement_dim(alpha));
    if dim > policy.max_dim {
        return Err(overflow);
    }
    let tolerance = policy.mean_photon_tolerance(expected_mean);
    loop {
        let lower = dim - dim / 4;
        if thermal_tail(nbar, lower) < policy.target_trace_deficit {
            let rho = build(dim)?;
            let mean_error = (super::mean_photon(&rho) - expected_mean).abs();
            if rho.trace_deficit() < policy.target_trace_deficit && mean_error <= tolerance {
                return Ok(rho);
            }
        }
        dim = policy.grow(dim).ok_or_else(|| overflow.clone())?;
    }
}

/// Displaced thermal state `D(α) ρ_nbar D(α)†` with automatic truncation.
pub fn displaced_thermal(alpha: C64, nbar: f64, policy: &TruncationPolicy) -> Result<DensityMatrix> {
    check_nbar(nbar)?;
    let r = alpha.norm();
    grow_until(policy, nbar, r, r * r + nbar, |dim| {
        DensityMatrix::new(displaced_thermal_matrix(alpha, nbar, dim))
    })
}

/// Random full-rank state from the Ginibre ensemble.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "empty Fock space",
        });
    }
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m = &g * g.adjoint();
    let trace = m.trace().re;
    DensityMatrix::with_trace_deficit(m.unscale(trace), 0.0)
}
