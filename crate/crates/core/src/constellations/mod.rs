// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

//! Coherent-state constellations and the warden's view of them.

mod mixture;
mod taylor;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::covertlimits::ChannelParams;
use crate::error::{invalid, Error, Result};
use crate::fockspace::TruncationPolicy;
use crate::linalg::C64;

pub use mixture::{
    amplitude_for_budget, exact_qre_per_mode, exact_qre_with_dim, qre_sweep, willie_mixture,
    willie_mixture_in, SweepRow,
};
pub use taylor::{
    closed_form_derivative, default_u_grid, derivative_check, quartic_coefficient_fit,
    DerivativeReport, QuarticFit,
};

pub(crate) use taylor::derivative_check_scaled;

const PRIOR_TOL: f64 = 1e-12;
const MAX_POINTS: usize = 8;

/// The two preset alphabets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstellationKind {
    Qpsk,
    Bpsk,
}

impl ConstellationKind {
    /// Preset with every point at amplitude `a`.
    pub fn preset(self, a: f64) -> Constellation {
        match self {
            Self::Qpsk => Constellation::qpsk(a),
            Self::Bpsk => Constellation::bpsk(a),
        }
    }

    /// Leading QRE coefficient per `u⁴`, `u` the warden-side displacement.
    pub fn quartic(self, nt: f64) -> f64 {
        match self {
            Self::Qpsk => crate::covertlimits::qpsk_quartic(nt),
            Self::Bpsk => crate::covertlimits::bpsk_quartic(nt),
        }
    }
}

impl fmt::Display for ConstellationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Qpsk => "qpsk",
            Self::Bpsk => "bpsk",
        })
    }
}

impl FromStr for ConstellationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Self::Qpsk),
            "bpsk" => Ok(Self::Bpsk),
            other => Err(Error::InvalidInput(format!("unknown constellation `{other}`"))),
        }
    }
}

/// Alice-side coherent-state amplitudes with their priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConstellationRepr", into = "ConstellationRepr")]
pub struct Constellation {
    amplitudes: Vec<C64>,
    priors: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ConstellationRepr {
    amplitudes: Vec<[f64; 2]>,
    priors: Vec<f64>,
}

impl TryFrom<ConstellationRepr> for Constellation {
    type Error = Error;

    fn try_from(r: ConstellationRepr) -> Result<Self> {
        let amps = r.amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect();
        Constellation::new(amps, r.priors)
    }
}

impl From<Constellation> for ConstellationRepr {
    fn from(c: Constellation) -> Self {
        Self {
            amplitudes: c.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
            priors: c.priors,
        }
    }
}

impl Constellation {
    pub fn new(amplitudes: Vec<C64>, priors: Vec<f64>) -> Result<Self> {
        if amplitudes.is_empty() || amplitudes.len() > MAX_POINTS {
            return Err(Error::InvalidInput(format!(
                "constellation needs 1 to {MAX_POINTS} points, got {}",
                amplitudes.len()
            )));
        }
        if amplitudes.len() != priors.len() {
            return Err(Error::InvalidInput(format!(
                "{} amplitudes but {} priors",
                amplitudes.len(),
                priors.len()
            )));
        }
        if amplitudes.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput("non-finite amplitude".into()));
        }
        if let Some(&p) = priors.iter().find(|p| !(**p >= 0.0)) {
            return Err(invalid("prior", p, "priors must be nonnegative"));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > PRIOR_TOL {
            return Err(invalid("priors", total, "priors must sum to 1"));
        }
        Ok(Self { amplitudes, priors })
    }

    /// Equiprobable alphabet.
    pub fn uniform(amplitudes: Vec<C64>) -> Result<Self> {
        let p = 1.0 / amplitudes.len().max(1) as f64;
        let priors = vec![p; amplitudes.len()];
        Self::new(amplitudes, priors)
    }

    /// `{a, ja, −a, −ja}`, uniform.
    pub fn qpsk(a: f64) -> Self {
        let amplitudes = vec![
            C64::new(a, 0.0),
            C64::new(0.0, a),
            C64::new(-a, 0.0),
            C64::new(0.0, -a),
        ];
        Self {
            amplitudes,
            priors: vec![0.25; 4],
        }
    }

    /// `{a, −a}`, uniform.
    pub fn bpsk(a: f64) -> Self {
        Self {
            amplitudes: vec![C64::new(a, 0.0), C64::new(-a, 0.0)],
            priors: vec![0.5; 2],
        }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// `Σ p_l |a_l|²`.
    pub fn mean_photon(&self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&self.priors)
            .map(|(a, p)| p * a.norm_sqr())
            .sum()
    }

    pub fn max_amplitude(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn is_uniform(&self) -> bool {
        let p = 1.0 / self.len() as f64;
        self.priors.iter().all(|q| (q - p).abs() <= PRIOR_TOL)
    }

    /// Every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
            priors: self.priors.clone(),
        }
    }

    /// Every amplitude rotated by `phi` radians.
    pub fn rotated(&self, phi: f64) -> Self {
        let w = C64::from_polar(1.0, phi);
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * w).collect(),
            priors: self.priors.clone(),
        }
    }

    /// Rescaled so the largest amplitude is `a`.
    pub fn with_max_amplitude(&self, a: f64) -> Result<Self> {
        let m = self.max_amplitude();
        if m == 0.0 {
            return Err(Error::InvalidInput(
                "cannot rescale an all-zero constellation".into(),
            ));
        }
        Ok(self.scaled(a / m))
    }
}

/// What the warden sees on one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WillieSpec {
    pub channel: ChannelParams,
    pub constellation: Constellation,
    pub tau: f64,
    #[serde(default)]
    pub policy: TruncationPolicy,
}

impl WillieSpec {
    pub fn new(
        channel: ChannelParams,
        constellation: Constellation,
        tau: f64,
        policy: TruncationPolicy,
    ) -> Result<Self> {
        let spec = Self {
            channel,
            constellation,
            tau,
            policy,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(invalid("tau", self.tau, "sparsification fraction must lie in [0, 1]"));
        }
        self.policy.validate()
    }

    /// Same spec with the constellation replaced.
    pub fn with_constellation(&self, constellation: Constellation) -> Self {
        Self {
            constellation,
            ..self.clone()
        }
    }

    /// Same spec rescaled so the largest warden-side displacement is `u`.
    pub fn with_willie_amplitude(&self, u: f64) -> Result<Self> {
        let c = self
            .constellation
            .with_max_amplitude(u / self.channel.willie_gain())?;
        Ok(self.with_constellation(c))
    }

    /// Warden-side amplitudes `√(1−η)·a_l` paired with their priors.
    pub(crate) fn willie_points(&self) -> Vec<(C64, f64)> {
        let gain = self.channel.willie_gain();
        self.constellation
            .amplitudes()
            .iter()
            .zip(self.constellation.priors())
            .map(|(a, &p)| (a * gain, p))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn priors_are_validated() {
        let a = vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
        assert!(Constellation::new(a.clone(), vec![0.5, 0.6]).is_err());
        assert!(Constellation::new(a.clone(), vec![1.5, -0.5]).is_err());
        assert!(Constellation::new(a, vec![0.3, 0.7]).is_ok());
        assert!(Constellation::new(vec![], vec![]).is_err());
    }

    #[test]
    fn presets() {
        let q = Constellation::qpsk(0.2);
        assert_eq!(q.len(), 4);
        assert!((q.mean_photon() - 0.04).abs() < 1e-16);
        let b = Constellation::bpsk(0.2);
        assert_eq!(b.amplitudes()[1], C64::new(-0.2, 0.0));
        assert!(b.is_uniform());
    }

    #[test]
    fn json_round_trip() {
        let c = Constellation::new(
            vec![C64::new(0.1, 0.2), C64::new(-0.3, 0.0)],
            vec![0.25, 0.75],
        )
        .unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<Constellation>(&text).unwrap(), c);
        let bad = r#"{"amplitudes": [[1.0, 0.0]], "priors": [0.5]}"#;
        assert!(serde_json::from_str::<Constellation>(bad).is_err());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("QPSK".parse::<ConstellationKind>().unwrap(), ConstellationKind::Qpsk);
        assert!("8psk".parse::<ConstellationKind>().is_err());
    }

    #[test]
    fn tau_is_validated() {
        let ch = ChannelParams::new(0.5, 1.0).unwrap();
        let c = Constellation::qpsk(0.1);
        assert!(WillieSpec::new(ch, c.clone(), 1.2, TruncationPolicy::default()).is_err());
        assert!(WillieSpec::new(ch, c, 0.4, TruncationPolicy::default()).is_ok());
    }
}
