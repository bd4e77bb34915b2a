// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

//! Truncated Fock-space states and the entropic quantities built on them.

mod lemma;
mod measures;
mod operators;
mod state;

pub use lemma::matrix_log_derivative_check;
pub use measures::{
    detection_error_min, mean_photon, qre, qre_vs_thermal, trace_distance, von_neumann_entropy,
    EIGEN_FLOOR,
};
pub use operators::{
    build_annihilation, displacement_operator, min_displacement_dim, number_operator, ModeOperator,
};
pub use state::{
    displaced_thermal, displaced_thermal_in, random_state, thermal_diagonal, thermal_state,
    thermal_state_in, thermal_tail, DensityMatrix, MatrixDump, TruncationPolicy,
};

pub(crate) use operators::{annihilation_real, check_displacement_dim};
pub(crate) use state::{displaced_thermal_real, grow_until};
