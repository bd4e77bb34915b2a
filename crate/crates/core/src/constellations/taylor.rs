// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mixture::{exact_qre_with_dim, mixture_matrix, willie_mixture_in};
use super::{ConstellationKind, WillieSpec};
use crate::covertlimits::g_nats;
use crate::error::{invalid, Error, Result};
use crate::fockspace::{
    annihilation_real, min_displacement_dim, qre_vs_thermal, thermal_diagonal, thermal_state,
    TruncationPolicy,
};
use crate::linalg::{max_abs, to_complex, C64};

/// Result of a quartic-coefficient extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarticFit {
    pub c4: f64,
    pub stderr: f64,
    /// Grid points that cleared the noise floor.
    pub points_used: usize,
    /// Largest truncation dimension over the grid.
    pub dim: usize,
    /// `(u, D(u))` for every grid point.
    pub samples: Vec<(f64, f64)>,
}

/// Comparison of a closed-form derivative with finite differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub order: u32,
    pub residual: f64,
    /// Smallest step entering the best estimate.
    pub step: f64,
    pub dim: usize,
    /// Largest entry of the closed form, for scale.
    pub closed_form_max: f64,
}

const GRID_FACTORS: [f64; 12] = [
    0.3, 0.2, 0.14, 0.1, 0.07, 0.05, 0.035, 0.025, 0.018, 0.0125, 0.009, 0.006,
];

/// Decreasing grid of warden-side displacements for [`quartic_coefficient_fit`].
pub fn default_u_grid(nt: f64) -> Vec<f64> {
    GRID_FACTORS.iter().map(|f| f * nt.sqrt()).collect()
}

/// Extracts `c4 = lim D(u)/u⁴` for the template's shape, `u` being the largest
/// warden-side displacement.
///
/// Points whose QRE is within `1e4` of the numerical noise floor are dropped.
/// The two smallest remaining points are combined assuming a `u⁶` correction.
pub fn quartic_coefficient_fit(spec_template: &WillieSpec, u_grid: &[f64]) -> Result<QuarticFit> {
    spec_template.validate()?;
    let nt = spec_template.channel.nt();
    let root = nt.sqrt();
    if u_grid.len() < 4 {
        return Err(Error::InvalidInput("u_grid needs at least 4 points".into()));
    }
    for w in u_grid.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidInput("u_grid must be strictly decreasing".into()));
        }
    }
    let (lo, hi) = (1e-3 * root * (1.0 - 1e-12), 0.3 * root * (1.0 + 1e-12));
    if let Some(&u) = u_grid.iter().find(|&&u| u < lo || u > hi) {
        return Err(invalid("u", u, "grid must lie within [1e-3, 0.3]·sqrt(nT)"));
    }

    let evaluated: Vec<(f64, f64, usize)> = u_grid
        .par_iter()
        .map(|&u| {
            let (d, dim) = exact_qre_with_dim(&spec_template.with_willie_amplitude(u)?)?;
            Ok((u, d, dim))
        })
        .collect::<Result<_>>()?;
    let dim = evaluated.iter().map(|e| e.2).max().unwrap_or(0);

    let zero = spec_template.with_constellation(spec_template.constellation.scaled(0.0));
    let d0 = qre_vs_thermal(&willie_mixture_in(&zero, dim)?, nt)?;
    let noise = 100.0 * d0.abs().max(f64::EPSILON * dim as f64 * (1.0 + g_nats(nt)));

    let stable: Vec<(f64, f64)> = evaluated
        .iter()
        .filter(|(_, d, _)| *d >= 1e4 * noise)
        .map(|&(u, d, _)| (u, d / u.powi(4)))
        .collect();
    if stable.len() < 2 {
        return Err(Error::UnstableFit(format!(
            "only {} grid points clear the noise floor {noise:e}; increase the truncation",
            stable.len()
        )));
    }
    let estimates: Vec<f64> = stable
        .windows(2)
        .map(|w| {
            let ((ua, ra), (ub, rb)) = (w[0], w[1]);
            (rb * ua * ua - ra * ub * ub) / (ua * ua - ub * ub)
        })
        .collect();
    let c4 = *estimates.last().expect("at least one pair");
    let stderr = if estimates.len() >= 2 {
        (c4 - estimates[estimates.len() - 2]).abs()
    } else {
        (c4 - stable.last().expect("nonempty").1).abs()
    };
    if !(c4 > 0.0) || stderr > 1e-2 * c4 {
        return Err(Error::UnstableFit(format!(
            "refinement not converging (c4 = {c4:e}, spread = {stderr:e}); increase the truncation"
        )));
    }
    Ok(QuarticFit {
        c4,
        stderr,
        points_used: stable.len(),
        dim,
        samples: evaluated.iter().map(|&(u, d, _)| (u, d)).collect(),
    })
}

/// `dᵏρ/duᵏ` at `u = 0` for the preset mixture with warden-side amplitude `u`.
pub fn closed_form_derivative(
    kind: ConstellationKind,
    order: u32,
    nt: f64,
    dim: usize,
) -> Result<DMatrix<C64>> {
    check_order(order)?;
    if !(nt > 0.0 && nt.is_finite()) {
        return Err(invalid("nT", nt, "must be positive"));
    }
    if dim < 2 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "derivative operators need at least two levels",
        });
    }
    if order % 2 == 1 {
        return Ok(DMatrix::zeros(dim, dim));
    }
    let a = annihilation_real(dim);
    let ad = a.transpose();
    let rho = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(thermal_diagonal(nt, dim)));
    let pow = |m: &DMatrix<f64>, k: u32| (0..k).fold(DMatrix::identity(dim, dim), |acc, _| acc * m);
    // Terms a^j ρ a†^k.
    let term = |j: u32, k: u32| pow(&a, j) * &rho * pow(&ad, k);

    let out = match (kind, order) {
        (ConstellationKind::Qpsk, 2) => term(1, 1) * (2.0 / (nt * nt)) - &rho * (2.0 / nt),
        (ConstellationKind::Qpsk, _) => {
            &rho * (12.0 / nt.powi(2)) - term(1, 1) * (24.0 / nt.powi(3))
                + (term(4, 0) + term(2, 2) * 6.0 + term(0, 4)) / nt.powi(4)
        }
        (ConstellationKind::Bpsk, 2) => {
            (term(2, 0) + term(1, 1) * 2.0 + term(0, 2)) / (nt * nt) - &rho * (2.0 / nt)
        }
        (ConstellationKind::Bpsk, _) => {
            &rho * (12.0 / nt.powi(2))
                - (term(2, 0) + term(1, 1) * 2.0 + term(0, 2)) * (12.0 / nt.powi(3))
                + (term(4, 0) + term(3, 1) * 4.0 + term(2, 2) * 6.0 + term(1, 3) * 4.0 + term(0, 4))
                    / nt.powi(4)
        }
    };
    Ok(to_complex(&out))
}

fn check_order(order: u32) -> Result<()> {
    if !(1..=4).contains(&order) {
        return Err(invalid("order", order as f64, "derivative order must be 1 to 4"));
    }
    Ok(())
}

/// Central stencil: offsets, weights and the constant `c` in `Σ w f(x+mh)/(c·hᵏ)`.
fn stencil(order: u32) -> (&'static [i32], &'static [f64], f64) {
    match order {
        1 => (&[-2, -1, 0, 1, 2], &[1.0, -8.0, 0.0, 8.0, -1.0], 12.0),
        2 => (&[-2, -1, 0, 1, 2], &[-1.0, 16.0, -30.0, 16.0, -1.0], 12.0),
        3 => (
            &[-3, -2, -1, 0, 1, 2, 3],
            &[1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0],
            8.0,
        ),
        _ => (
            &[-3, -2, -1, 0, 1, 2, 3],
            &[-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0],
            6.0,
        ),
    }
}

/// Checks [`closed_form_derivative`] against finite differences of the mixture.
///
/// Differences are taken at `h`, `h/2` and `h/4` with one Richardson step on
/// each consecutive pair; the best of the five estimates is reported.
pub fn derivative_check(
    kind: ConstellationKind,
    order: u32,
    nt: f64,
    policy: &TruncationPolicy,
) -> Result<DerivativeReport> {
    derivative_check_scaled(kind, order, nt, policy, 1.0)
}

/// As [`derivative_check`], comparing against `scale` times the closed form.
pub(crate) fn derivative_check_scaled(
    kind: ConstellationKind,
    order: u32,
    nt: f64,
    policy: &TruncationPolicy,
    scale: f64,
) -> Result<DerivativeReport> {
    check_order(order)?;
    if !(nt > 0.0 && nt.is_finite()) {
        return Err(invalid("nT", nt, "must be positive"));
    }
    let h = if order <= 2 { 1e-2 } else { 5e-2 } * nt.sqrt();
    let (offsets, weights, c) = stencil(order);
    let reach = h * *offsets.last().expect("nonempty stencil") as f64;
    let dim = thermal_state(nt, policy)?
        .dim()
        .max(min_displacement_dim(reach));

    let closed = closed_form_derivative(kind, order, nt, dim)? * C64::new(scale, 0.0);
    let unit = kind.preset(1.0);
    let estimate = |step: f64| -> DMatrix<C64> {
        let mut acc = DMatrix::<C64>::zeros(dim, dim);
        for (&m, &w) in offsets.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            let u = m as f64 * step;
            let points: Vec<(C64, f64)> = unit
                .amplitudes()
                .iter()
                .zip(unit.priors())
                .map(|(a, &p)| (a * u, p))
                .collect();
            acc += mixture_matrix(&points, 1.0, nt, dim) * C64::new(w, 0.0);
        }
        acc.unscale(c * step.powi(order as i32))
    };

    let steps = [h, h / 2.0, h / 4.0];
    let raw: Vec<DMatrix<C64>> = steps.par_iter().map(|&s| estimate(s)).collect();
    let mut candidates: Vec<(f64, f64)> = raw
        .iter()
        .zip(steps)
        .map(|(d, s)| (max_abs(&(d - &closed)), s))
        .collect();
    for i in 0..2 {
        let rich = (&raw[i + 1] * C64::new(16.0, 0.0) - &raw[i]).unscale(15.0);
        candidates.push((max_abs(&(rich - &closed)), steps[i + 1]));
    }
    let (residual, step) = candidates
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("five candidates");
    Ok(DerivativeReport {
        order,
        residual,
        step,
        dim,
        closed_form_max: max_abs(&closed),
    })
}
