// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form square-root-law constants, budgets and bounds.
//!
//! Everything is in nats except [`srl_throughput`], which reports bits.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Lossy thermal-noise bosonic channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel")]
pub struct ChannelParams {
    eta: f64,
    nbar_b: f64,
}

#[derive(Deserialize)]
struct RawChannel {
    eta: f64,
    nbar_b: f64,
}

impl TryFrom<RawChannel> for ChannelParams {
    type Error = Error;

    fn try_from(raw: RawChannel) -> Result<Self> {
        ChannelParams::new(raw.eta, raw.nbar_b)
    }
}

impl ChannelParams {
    pub fn new(eta: f64, nbar_b: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(invalid("eta", eta, "transmissivity must lie strictly inside (0, 1)"));
        }
        if !(nbar_b > 0.0 && nbar_b.is_finite()) {
            return Err(invalid("nbar_B", nbar_b, "environment photon number must be positive"));
        }
        Ok(Self { eta, nbar_b })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn nbar_b(&self) -> f64 {
        self.nbar_b
    }

    /// Thermal photon number seen by the warden, `η·n̄_B`.
    pub fn nt(&self) -> f64 {
        self.eta * self.nbar_b
    }

    /// Noise photon number reaching the receiver, `(1−η)·n̄_B`.
    pub fn bob_noise(&self) -> f64 {
        (1.0 - self.eta) * self.nbar_b
    }

    /// Warden-side amplitude factor `√(1−η)`.
    pub fn willie_gain(&self) -> f64 {
        (1.0 - self.eta).sqrt()
    }
}

/// Covertness levels and the per-mode photon budget they allow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovertBudget {
    pub delta_qre: f64,
    pub n_modes: u64,
    pub nbar_s: f64,
    pub delta_p: f64,
}

/// The three reliability constants, in nats per photon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBounds {
    /// `η/((1−η)n̄_B)`, thermal noise only.
    pub lower_thermal: f64,
    /// `η/((1−η)n̄_B + 1)`, with heterodyne shot noise.
    pub lower_shotnoise: f64,
    pub upper_chi: f64,
}

fn check_nonneg(name: &'static str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(invalid(name, v, "must be finite and nonnegative"));
    }
    Ok(())
}

fn check_modes(n: u64) -> Result<()> {
    if n == 0 {
        return Err(invalid("n", 0.0, "mode count must be at least 1"));
    }
    Ok(())
}

/// `c_cov` for arbitrary `n̄_B ≥ 0`; zero without environment noise.
pub fn covertness_constant(eta: f64, nbar_b: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid("eta", eta, "transmissivity must lie strictly inside (0, 1)"));
    }
    check_nonneg("nbar_B", nbar_b)?;
    let nt = eta * nbar_b;
    Ok((2.0 * nt * (1.0 + nt)).sqrt() / (1.0 - eta))
}

/// Square-root-law constant `c_cov`.
pub fn c_cov(params: &ChannelParams) -> f64 {
    let nt = params.nt();
    (2.0 * nt * (1.0 + nt)).sqrt() / (1.0 - params.eta)
}

/// Largest per-mode mean photon number meeting `δ_QRE` over `n` modes.
pub fn covert_budget_ns(params: &ChannelParams, n: u64, delta_qre: f64) -> Result<CovertBudget> {
    check_modes(n)?;
    check_nonneg("delta_qre", delta_qre)?;
    Ok(CovertBudget {
        delta_qre,
        n_modes: n,
        nbar_s: c_cov(params) * (delta_qre / n as f64).sqrt(),
        delta_p: (delta_qre / 2.0).sqrt(),
    })
}

/// `(1+y)ln(1+y) − y`, accurate for small `y`.
fn h(y: f64) -> f64 {
    if y.abs() < 1e-3 {
        let mut term = y * y;
        let mut sum = 0.0;
        for k in 2..12 {
            let kf = k as f64;
            sum += term / (kf * (kf - 1.0));
            term *= -y;
        }
        sum
    } else {
        (1.0 + y) * y.ln_1p() - y
    }
}

/// Exact lower bound on the total QRE of any `n`-mode code at photon number `n̄_S`.
pub fn converse_qre_lower_exact(nbar_s: f64, params: &ChannelParams, n: u64) -> Result<f64> {
    check_nonneg("nbar_S", nbar_s)?;
    check_modes(n)?;
    let x = (1.0 - params.eta) * nbar_s;
    let m = params.nt();
    let per_mode = m * h(x / m) - (1.0 + m) * h(x / (1.0 + m));
    Ok(n as f64 * per_mode.max(0.0))
}

fn quadratic_coefficient(params: &ChannelParams) -> f64 {
    let nt = params.nt();
    (1.0 - params.eta).powi(2) / (2.0 * nt * (1.0 + nt))
}

/// Leading-order term of the converse.
pub fn converse_qre_leading(nbar_s: f64, params: &ChannelParams, n: u64) -> Result<f64> {
    check_nonneg("nbar_S", nbar_s)?;
    check_modes(n)?;
    Ok(n as f64 * quadratic_coefficient(params) * nbar_s * nbar_s)
}

/// Per-mode QRE of QPSK to leading order.
pub fn qpsk_qre_leading(nbar_s: f64, params: &ChannelParams) -> Result<f64> {
    check_nonneg("nbar_S", nbar_s)?;
    Ok(quadratic_coefficient(params) * nbar_s * nbar_s)
}

/// Per-mode QRE of BPSK to leading order.
pub fn bpsk_qre_leading(nbar_s: f64, params: &ChannelParams) -> Result<f64> {
    check_nonneg("nbar_S", nbar_s)?;
    let nt = params.nt();
    let coeff = 1.0 / (2.0 * nt * (1.0 + nt)) + (1.0 / nt).ln_1p() / (1.0 + 2.0 * nt);
    Ok((1.0 - params.eta).powi(2) * nbar_s * nbar_s * coeff)
}

/// QRE-per-`u⁴` coefficient of QPSK at warden noise `nT`.
pub fn qpsk_quartic(nt: f64) -> f64 {
    1.0 / (2.0 * nt * (1.0 + nt))
}

/// QRE-per-`u⁴` coefficient of BPSK at warden noise `nT`.
pub fn bpsk_quartic(nt: f64) -> f64 {
    qpsk_quartic(nt) + (1.0 / nt).ln_1p() / (1.0 + 2.0 * nt)
}

fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(invalid("tau", tau, "sparsification fraction must lie in [0, 1]"));
    }
    Ok(())
}

/// Per-mode QRE of QPSK used on a random fraction `τ` of modes.
pub fn sparsified_qre_leading(nbar_s: f64, tau: f64, params: &ChannelParams) -> Result<f64> {
    check_tau(tau)?;
    Ok(tau * tau * qpsk_qre_leading(nbar_s, params)?)
}

/// Fraction of modes that may carry `n̄_S` photons each under the budget.
pub fn sparsification_tau(nbar_s: f64, params: &ChannelParams, delta_qre: f64, n: u64) -> Result<f64> {
    if !(nbar_s > 0.0 && nbar_s.is_finite()) {
        return Err(invalid("nbar_S", nbar_s, "must be positive"));
    }
    check_nonneg("delta_qre", delta_qre)?;
    check_modes(n)?;
    let tau = c_cov(params) / nbar_s * (delta_qre / n as f64).sqrt();
    if tau > 1.0 + 1e-12 {
        return Err(Error::BudgetNotBinding { tau });
    }
    Ok(tau.min(1.0))
}

pub fn c_rel_bounds(params: &ChannelParams) -> ReliabilityBounds {
    let eta = params.eta;
    let noise = params.bob_noise();
    ReliabilityBounds {
        lower_thermal: eta / noise,
        lower_shotnoise: eta / (noise + 1.0),
        upper_chi: eta * (1.0 / noise).ln_1p(),
    }
}

/// Entropy of a thermal state with mean photon number `x`, in nats.
pub fn g_nats(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x.ln_1p() + x * (1.0 / x).ln_1p()
    }
}

/// Holevo information of the lossy thermal channel at input photon number `n̄_S`.
pub fn holevo_chi(nbar_s: f64, params: &ChannelParams) -> Result<f64> {
    check_nonneg("nbar_S", nbar_s)?;
    let noise = params.bob_noise();
    Ok(g_nats(params.eta * nbar_s + noise) - g_nats(noise))
}

/// Covert bits over `n` modes, `√n·δ·c_cov·c_rel` converted from nats.
pub fn srl_throughput(n: f64, delta: f64, c_cov_val: f64, c_rel_val: f64) -> Result<f64> {
    for (name, v) in [("n", n), ("delta", delta), ("c_cov", c_cov_val), ("c_rel", c_rel_val)] {
        check_nonneg(name, v)?;
    }
    Ok(n.sqrt() * delta * c_cov_val * c_rel_val / std::f64::consts::LN_2)
}

/// Error-probability floor any detector obeys at total QRE `δ_QRE`.
pub fn pinsker_pe_floor(delta_qre_total: f64) -> Result<f64> {
    check_nonneg("delta_qre_total", delta_qre_total)?;
    Ok((0.5 - (2.0 * delta_qre_total).sqrt() / 4.0).clamp(0.0, 0.5))
}
