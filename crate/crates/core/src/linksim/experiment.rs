// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coding::{decode, encode, gen_secret_sequence, select_modes};
use super::receivers::{bob_heterodyne_sample, bob_ml_decode, thermal_count_sum, willie_photon_sample};
use super::streams::{derive_streams, StreamRole};
use crate::constellations::Constellation;
use crate::covertlimits::{holevo_chi, pinsker_pe_floor, sparsification_tau, ChannelParams};
use crate::error::{invalid, Error, Result};
use crate::linalg::C64;

/// A seeded Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub channel: ChannelParams,
    pub n_modes: u64,
    pub delta_qre: f64,
    /// Shape and priors; rescaled to `nbar_s_per_selected_mode` mean photons.
    pub constellation: Constellation,
    pub nbar_s_per_selected_mode: f64,
    pub trials: u64,
    pub master_seed: u64,
}

impl SimConfig {
    /// Rejects malformed configurations; `τ` is checked separately.
    pub fn validate(&self) -> Result<()> {
        if self.n_modes == 0 {
            return Err(invalid("n_modes", 0.0, "must be at least 1"));
        }
        if usize::try_from(self.n_modes).is_err() {
            return Err(invalid("n_modes", self.n_modes as f64, "exceeds the address space"));
        }
        if self.trials == 0 {
            return Err(invalid("trials", 0.0, "must be at least 1"));
        }
        if !(self.delta_qre > 0.0 && self.delta_qre.is_finite()) {
            return Err(invalid("delta_qre", self.delta_qre, "must be positive"));
        }
        let nbar = self.nbar_s_per_selected_mode;
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(invalid("nbar_s_per_selected_mode", nbar, "must be finite and nonnegative"));
        }
        if self.constellation.len() < 2 {
            return Err(Error::ConfigRejected("the link needs at least two symbols".into()));
        }
        if !self.constellation.is_uniform() {
            return Err(Error::ConfigRejected(
                "the one-time pad requires uniform priors".into(),
            ));
        }
        if nbar > 0.0 && self.constellation.mean_photon() == 0.0 {
            return Err(Error::ConfigRejected(
                "constellation shape has no energy to rescale".into(),
            ));
        }
        Ok(())
    }

    /// Fraction of modes that carry signal under the covert budget.
    pub fn derived_tau(&self) -> Result<f64> {
        self.validate()?;
        if !(self.nbar_s_per_selected_mode > 0.0) {
            return Err(Error::ConfigRejected("nbar_s_per_selected_mode must be positive".into()));
        }
        sparsification_tau(
            self.nbar_s_per_selected_mode,
            &self.channel,
            self.delta_qre,
            self.n_modes,
        )
        .map_err(|e| match e {
            Error::BudgetNotBinding { tau } => Error::ConfigRejected(format!(
                "derived tau = {tau} exceeds 1: the per-mode photon number is below the covert budget"
            )),
            other => other,
        })
    }

    /// Alice-side amplitudes with mean photon number `nbar_s_per_selected_mode`.
    pub fn scaled_amplitudes(&self) -> Vec<C64> {
        let energy = self.constellation.mean_photon();
        let factor = if energy > 0.0 {
            (self.nbar_s_per_selected_mode / energy).sqrt()
        } else {
            0.0
        };
        self.constellation.amplitudes().iter().map(|a| a * factor).collect()
    }
}

/// Per-trial measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub selected_mode_count: u64,
    pub bob_symbol_errors: u64,
    /// Plug-in mutual information of this trial alone, nats per selected mode.
    pub bob_mi_estimate: f64,
    pub willie_total_count_h0: u64,
    pub willie_total_count_h1: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: u64,
    pub p_fa: f64,
    pub p_md: f64,
    pub p_e: f64,
}

/// Empirical ROC of the photon-count radiometer, which declares H1 when the
/// total count reaches the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub min_pe: f64,
    pub min_pe_stderr: f64,
    pub best_threshold: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub tau: f64,
    pub trials: u64,
    pub n_modes: u64,
    pub mean_selected: f64,
    pub expected_photons: f64,
    pub ser: f64,
    pub ser_stderr: f64,
    /// Pooled plug-in mutual information per selected mode.
    pub mi_nats: f64,
    pub holevo_chi_nats: f64,
    /// `E|S|·MI`, converted to bits.
    pub m_bits: f64,
    pub willie: RocCurve,
    pub pinsker_floor: f64,
    pub trial_results: Vec<TrialResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: u64,
    pub tau: f64,
    pub e_selected: f64,
    pub ser: f64,
    pub mi_nats: f64,
    pub m_bits: f64,
    pub willie_min_pe: f64,
    pub willie_pe_stderr: f64,
    pub expected_photons: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of `ln m_bits` against `ln n`.
    pub slope: f64,
    pub pinsker_floor: f64,
}

struct TrialOutcome {
    result: TrialResult,
    joint: Vec<u64>,
}

fn plug_in_mi(joint: &[u64], l: usize) -> f64 {
    let total: u64 = joint.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let mut px = vec![0.0; l];
    let mut py = vec![0.0; l];
    for x in 0..l {
        for y in 0..l {
            let p = joint[x * l + y] as f64 / n;
            px[x] += p;
            py[y] += p;
        }
    }
    let mut mi = 0.0;
    for x in 0..l {
        for y in 0..l {
            let p = joint[x * l + y] as f64 / n;
            if p > 0.0 {
                mi += p * (p / (px[x] * py[y])).ln();
            }
        }
    }
    mi.max(0.0)
}

fn run_trial(config: &SimConfig, tau: f64, amps: &[C64], trial: u64) -> Result<TrialOutcome> {
    let seed = config.master_seed;
    let l = amps.len();
    let n = config.n_modes as usize;
    let nt = config.channel.nt();
    let gain_bob = config.channel.eta().sqrt();
    let gain_willie = config.channel.willie_gain();
    let scaled: Vec<C64> = amps.iter().map(|a| a * gain_bob).collect();

    let selected = select_modes(n, tau, &mut derive_streams(seed, trial, StreamRole::ModeSelect))?;
    let m = selected.len();
    let message = gen_secret_sequence(m, l, &mut derive_streams(seed, trial, StreamRole::Message))?;
    let secret = gen_secret_sequence(m, l, &mut derive_streams(seed, trial, StreamRole::AliceKey))?;
    let sent = encode(&message, &secret, l)?;

    let mut bob_rng = derive_streams(seed, trial, StreamRole::ChannelNoise);
    let received: Vec<usize> = sent
        .iter()
        .map(|&s| bob_ml_decode(bob_heterodyne_sample(amps[s], &config.channel, &mut bob_rng), &scaled))
        .collect();
    let decoded = decode(&received, &secret, l)?;
    let mut joint = vec![0u64; l * l];
    let mut errors = 0;
    for (&c, &d) in message.iter().zip(&decoded) {
        joint[c * l + d] += 1;
        if c != d {
            errors += 1;
        }
    }

    let mut willie_rng = derive_streams(seed, trial, StreamRole::WillieNoise);
    let h0 = thermal_count_sum(n as u64, nt, &mut willie_rng)?;
    let mut h1 = thermal_count_sum((n - m) as u64, nt, &mut willie_rng)?;
    for &s in &sent {
        h1 += willie_photon_sample(amps[s] * gain_willie, nt, &mut willie_rng)?;
    }

    Ok(TrialOutcome {
        result: TrialResult {
            selected_mode_count: m as u64,
            bob_symbol_errors: errors,
            bob_mi_estimate: plug_in_mi(&joint, l),
            willie_total_count_h0: h0,
            willie_total_count_h1: h1,
        },
        joint,
    })
}

/// Radiometer ROC from per-trial counts under each hypothesis.
pub fn radiometer_roc(h0: &[u64], h1: &[u64]) -> Result<RocCurve> {
    if h0.is_empty() || h1.is_empty() {
        return Err(Error::InvalidInput("ROC needs samples under both hypotheses".into()));
    }
    let mut a = h0.to_vec();
    let mut b = h1.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    let mut thresholds: Vec<u64> = a.iter().chain(&b).copied().collect();
    thresholds.push(a.last().copied().max(b.last().copied()).unwrap_or(0) + 1);
    thresholds.sort_unstable();
    thresholds.dedup();

    let (n0, n1) = (a.len() as f64, b.len() as f64);
    let points: Vec<RocPoint> = thresholds
        .iter()
        .map(|&t| {
            let below0 = a.partition_point(|&c| c < t);
            let below1 = b.partition_point(|&c| c < t);
            let p_fa = (a.len() - below0) as f64 / n0;
            let p_md = below1 as f64 / n1;
            RocPoint {
                threshold: t,
                p_fa,
                p_md,
                p_e: 0.5 * (p_fa + p_md),
            }
        })
        .collect();
    let best = points
        .iter()
        .min_by(|x, y| x.p_e.total_cmp(&y.p_e).then(x.threshold.cmp(&y.threshold)))
        .copied()
        .expect("at least one threshold");
    let stderr = 0.5 * (best.p_fa * (1.0 - best.p_fa) / n0 + best.p_md * (1.0 - best.p_md) / n1).sqrt();
    Ok(RocCurve {
        points,
        min_pe: best.p_e,
        min_pe_stderr: stderr,
        best_threshold: best.threshold,
    })
}

/// Runs the experiment with `τ` derived from the covert budget.
pub fn run_experiment(config: &SimConfig) -> Result<ExperimentReport> {
    let tau = config.derived_tau()?;
    run_experiment_with_tau(config, tau)
}

/// Runs the experiment with an explicit selection fraction.
pub fn run_experiment_with_tau(config: &SimConfig, tau: f64) -> Result<ExperimentReport> {
    config.validate()?;
    if !(0.0..=1.0).contains(&tau) {
        return Err(invalid("tau", tau, "selection probability must lie in [0, 1]"));
    }
    let amps = config.scaled_amplitudes();
    let l = amps.len();
    let outcomes: Vec<TrialOutcome> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, tau, &amps, t))
        .collect::<Result<_>>()?;

    let trials = outcomes.len() as f64;
    let mut joint = vec![0u64; l * l];
    let mut selected = 0u64;
    let mut errors = 0u64;
    for o in &outcomes {
        for (acc, v) in joint.iter_mut().zip(&o.joint) {
            *acc += v;
        }
        selected += o.result.selected_mode_count;
        errors += o.result.bob_symbol_errors;
    }
    let mean_selected = selected as f64 / trials;
    let (ser, ser_stderr) = if selected > 0 {
        let p = errors as f64 / selected as f64;
        (p, (p * (1.0 - p) / selected as f64).sqrt())
    } else {
        (0.0, 0.0)
    };
    let mi_nats = plug_in_mi(&joint, l);
    let h0: Vec<u64> = outcomes.iter().map(|o| o.result.willie_total_count_h0).collect();
    let h1: Vec<u64> = outcomes.iter().map(|o| o.result.willie_total_count_h1).collect();

    Ok(ExperimentReport {
        tau,
        trials: config.trials,
        n_modes: config.n_modes,
        mean_selected,
        expected_photons: tau * config.nbar_s_per_selected_mode * config.n_modes as f64,
        ser,
        ser_stderr,
        mi_nats,
        holevo_chi_nats: holevo_chi(config.nbar_s_per_selected_mode, &config.channel)?,
        m_bits: mean_selected * mi_nats / std::f64::consts::LN_2,
        willie: radiometer_roc(&h0, &h1)?,
        pinsker_floor: pinsker_pe_floor(config.delta_qre)?,
        trial_results: outcomes.into_iter().map(|o| o.result).collect(),
    })
}

/// One experiment per block length, `τ` re-derived for each.
pub fn srl_scaling_sweep(base_config: &SimConfig, n_grid: &[u64]) -> Result<ScalingReport> {
    if n_grid.is_empty() {
        return Err(Error::InvalidInput("n grid is empty".into()));
    }
    if n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("n grid must be strictly ascending".into()));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let config = SimConfig {
            n_modes: n,
            ..base_config.clone()
        };
        let r = run_experiment(&config)?;
        rows.push(ScalingRow {
            n,
            tau: r.tau,
            e_selected: r.mean_selected,
            ser: r.ser,
            mi_nats: r.mi_nats,
            m_bits: r.m_bits,
            willie_min_pe: r.willie.min_pe,
            willie_pe_stderr: r.willie.min_pe_stderr,
            expected_photons: r.expected_photons,
        });
    }
    Ok(ScalingReport {
        slope: log_log_slope(&rows),
        pinsker_floor: pinsker_pe_floor(base_config.delta_qre)?,
        rows,
    })
}

fn log_log_slope(rows: &[ScalingRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.m_bits > 0.0)
        .map(|r| ((r.n as f64).ln(), r.m_bits.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: u64, trials: u64) -> SimConfig {
        SimConfig {
            channel: ChannelParams::new(0.5, 1.0).unwrap(),
            n_modes: n,
            delta_qre: 0.04,
            constellation: Constellation::qpsk(1.0),
            nbar_s_per_selected_mode: 0.1,
            trials,
            master_seed: 42,
        }
    }

    #[test]
    fn plug_in_mi_extremes() {
        assert_eq!(plug_in_mi(&[5, 5, 5, 5], 2), 0.0);
        assert!((plug_in_mi(&[7, 0, 0, 7], 2) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn roc_of_identical_samples_is_blind() {
        let h = vec![3, 1, 4, 1, 5, 9, 2, 6];
        let roc = radiometer_roc(&h, &h).unwrap();
        assert!((roc.min_pe - 0.5).abs() < 1e-15);
        assert!(roc.points.iter().all(|p| (0.0..=1.0).contains(&p.p_fa)));
    }

    #[test]
    fn roc_of_separated_samples_is_perfect() {
        let roc = radiometer_roc(&[0, 1, 2], &[10, 11, 12]).unwrap();
        assert_eq!(roc.min_pe, 0.0);
        assert_eq!(roc.best_threshold, 10);
    }

    #[test]
    fn rejects_nonuniform_priors_and_unbound_budget() {
        let mut c = config(10_000, 2);
        c.constellation = Constellation::new(
            vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)],
            vec![0.3, 0.7],
        )
        .unwrap();
        assert!(matches!(run_experiment(&c), Err(Error::ConfigRejected(_))));
        let mut c = config(10_000, 2);
        c.nbar_s_per_selected_mode = 1e-4;
        assert!(matches!(run_experiment(&c), Err(Error::ConfigRejected(_))));
    }

    #[test]
    fn deterministic() {
        let a = run_experiment(&config(20_000, 16)).unwrap();
        let b = run_experiment(&config(20_000, 16)).unwrap();
        assert_eq!(a, b);
        let mut other = config(20_000, 16);
        other.master_seed = 43;
        assert_ne!(a, run_experiment(&other).unwrap());
    }

    #[test]
    fn tau_zero_transmits_nothing() {
        let r = run_experiment_with_tau(&config(10_000, 400), 0.0).unwrap();
        assert_eq!(r.mean_selected, 0.0);
        assert_eq!(r.m_bits, 0.0);
        assert!(r.willie.min_pe >= 0.5 - 4.0 * 0.5 / (400f64).sqrt());
    }

    #[test]
    fn mi_respects_capacity() {
        let r = run_experiment(&config(100_000, 200)).unwrap();
        let l = 4f64.ln();
        assert!(r.mi_nats >= 0.0 && r.mi_nats <= l);
        assert!(r.mi_nats <= r.holevo_chi_nats);
        let h = |p: f64| if p <= 0.0 || p >= 1.0 { 0.0 } else { -p * p.ln() - (1.0 - p) * (1.0 - p).ln() };
        // Fano: the error rate limits how much information can be lost.
        assert!(r.mi_nats + 1e-12 >= l - h(r.ser) - r.ser * 3f64.ln());
    }

    #[test]
    fn tenfold_signal_is_detectable() {
        let c = config(100_000, 2000);
        let tau = c.derived_tau().unwrap();
        let r = run_experiment_with_tau(&c, 10.0 * tau).unwrap();
        // Tenfold signal power is a hundredfold QRE; even the tenfold floor is beaten.
        let floor = pinsker_pe_floor(10.0 * c.delta_qre).unwrap();
        assert!(r.willie.min_pe + 4.0 * r.willie.min_pe_stderr < floor);
    }
}
