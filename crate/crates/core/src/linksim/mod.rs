// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded Monte Carlo simulation of the covert link.

mod coding;
mod experiment;
mod receivers;
mod streams;

pub use coding::{decode, encode, gen_secret_sequence, select_modes};
pub use experiment::{
    radiometer_roc, run_experiment, run_experiment_with_tau, srl_scaling_sweep, ExperimentReport,
    RocCurve, RocPoint, ScalingReport, ScalingRow, SimConfig, TrialResult,
};
pub use receivers::{bob_heterodyne_sample, bob_ml_decode, thermal_count_sum, willie_photon_sample};
pub use streams::{derive_streams, StreamRole};
