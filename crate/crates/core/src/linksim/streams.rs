// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Independent random streams used within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamRole {
    AliceKey,
    ModeSelect,
    ChannelNoise,
    WillieNoise,
    Message,
}

impl StreamRole {
    pub const ALL: [StreamRole; 5] = [
        StreamRole::AliceKey,
        StreamRole::ModeSelect,
        StreamRole::ChannelNoise,
        StreamRole::WillieNoise,
        StreamRole::Message,
    ];

    fn index(self) -> u64 {
        self as u64
    }
}

/// ChaCha20 keyed by `master_seed` on stream `trial_index·5 + role`.
///
/// Distinct `(trial_index, role)` pairs never share a stream for
/// `trial_index < 2^64 / 5`.
pub fn derive_streams(master_seed: u64, trial_index: u64, role: StreamRole) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    let count = StreamRole::ALL.len() as u64;
    rng.set_stream(trial_index.wrapping_mul(count).wrapping_add(role.index()));
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn draws(seed: u64, trial: u64, role: StreamRole) -> Vec<u64> {
        let mut rng = derive_streams(seed, trial, role);
        (0..100).map(|_| rng.random()).collect()
    }

    #[test]
    fn reproducible() {
        assert_eq!(draws(9, 3, StreamRole::AliceKey), draws(9, 3, StreamRole::AliceKey));
    }

    #[test]
    fn roles_and_trials_differ() {
        let base = draws(9, 3, StreamRole::AliceKey);
        for role in StreamRole::ALL.into_iter().skip(1) {
            assert_ne!(base, draws(9, 3, role));
        }
        assert_ne!(base, draws(9, 4, StreamRole::AliceKey));
        assert_ne!(base, draws(10, 3, StreamRole::AliceKey));
    }
}
