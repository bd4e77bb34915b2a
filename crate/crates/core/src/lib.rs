// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

pub mod cli;
pub mod constellations;
pub mod covertlimits;
pub mod error;
pub mod fockspace;
pub mod linalg;
pub mod linksim;
pub mod selfcheck;

pub use error::{Error, Result};
