// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};

use crate::covertlimits::ChannelParams;
use crate::error::{invalid, Result};
use crate::linalg::C64;

/// Circularly-symmetric complex Gaussian with `E|z|² = variance`.
fn complex_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}

fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive finite rate").sample(rng) as u64
}

/// Heterodyne outcome `√η·a + z`, `E|z|² = (1−η)n̄_B + 1`.
pub fn bob_heterodyne_sample<R: Rng + ?Sized>(amplitude: C64, channel: &ChannelParams, rng: &mut R) -> C64 {
    amplitude * channel.eta().sqrt() + complex_gaussian(channel.bob_noise() + 1.0, rng)
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Nearest constellation point to `sample`.
///
/// Exact ties go to the tied index with the smallest key
/// `splitmix(hash(sample) ^ index)`, then to the lowest index.
pub fn bob_ml_decode(sample: C64, constellation_scaled: &[C64]) -> usize {
    let distances: Vec<f64> = constellation_scaled.iter().map(|p| (sample - p).norm_sqr()).collect();
    let best = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let tied: Vec<usize> = (0..distances.len()).filter(|&i| distances[i] == best).collect();
    if tied.len() <= 1 {
        return tied.first().copied().unwrap_or(0);
    }
    let seed = splitmix(sample.re.to_bits() ^ splitmix(sample.im.to_bits()));
    *tied
        .iter()
        .min_by_key(|&&i| (splitmix(seed ^ i as u64), i))
        .expect("nonempty")
}

/// Photon count of a displaced thermal mode, sampled through its Glauber mixture.
pub fn willie_photon_sample<R: Rng + ?Sized>(amplitude_willie_side: C64, nt: f64, rng: &mut R) -> Result<u64> {
    if !(nt >= 0.0 && nt.is_finite()) {
        return Err(invalid("nT", nt, "must be finite and nonnegative"));
    }
    let beta = if nt > 0.0 {
        amplitude_willie_side + complex_gaussian(nt, rng)
    } else {
        amplitude_willie_side
    };
    Ok(poisson(beta.norm_sqr(), rng))
}

/// Total photon count of `modes` independent thermal modes.
///
/// The summed Glauber intensity is Gamma(`modes`, `nT`), so the count is an
/// exact negative binomial draw.
pub fn thermal_count_sum<R: Rng + ?Sized>(modes: u64, nt: f64, rng: &mut R) -> Result<u64> {
    if !(nt >= 0.0 && nt.is_finite()) {
        return Err(invalid("nT", nt, "must be finite and nonnegative"));
    }
    if modes == 0 || nt == 0.0 {
        return Ok(0);
    }
    let intensity = Gamma::new(modes as f64, nt).expect("positive shape and scale").sample(rng);
    Ok(poisson(intensity, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{displaced_thermal_in, mean_photon};
    use crate::linksim::{derive_streams, StreamRole};

    fn channel() -> ChannelParams {
        ChannelParams::new(0.5, 1.0).unwrap()
    }

    #[test]
    fn heterodyne_noise_statistics() {
        let mut rng = derive_streams(1, 0, StreamRole::ChannelNoise);
        let n = 1_000_000;
        let mut sum = C64::new(0.0, 0.0);
        let mut power = 0.0;
        for _ in 0..n {
            let z = bob_heterodyne_sample(C64::new(0.0, 0.0), &channel(), &mut rng);
            sum += z;
            power += z.norm_sqr();
        }
        let expected = 1.5;
        assert!((power / n as f64 / expected - 1.0).abs() < 0.01);
        assert!((sum / n as f64).norm() < 4.0 * (expected / n as f64).sqrt());
    }

    #[test]
    fn heterodyne_mean_and_variance_with_signal() {
        let mut rng = derive_streams(2, 0, StreamRole::ChannelNoise);
        let n = 200_000;
        let a = C64::new(3.0, -2.0);
        let samples: Vec<C64> = (0..n).map(|_| bob_heterodyne_sample(a, &channel(), &mut rng)).collect();
        let mean = samples.iter().sum::<C64>() / n as f64;
        let target = a * 0.5f64.sqrt();
        let sigma = (1.5 / n as f64).sqrt();
        assert!((mean - target).norm() < 4.0 * sigma);
        let var: f64 = samples.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / n as f64;
        // Relative standard error of a variance estimate from n complex samples is about 1/sqrt(n).
        assert!((var / 1.5 - 1.0).abs() < 4.0 / (n as f64).sqrt() * 1.5);
    }

    #[test]
    fn decode_noiseless_points() {
        let points = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];
        for (i, p) in points.iter().enumerate() {
            assert_eq!(bob_ml_decode(*p, &points), i);
        }
    }

    #[test]
    fn decode_ties_are_deterministic_and_spread() {
        let zero = [C64::new(0.0, 0.0); 4];
        let s = C64::new(0.3, -0.2);
        assert_eq!(bob_ml_decode(s, &zero), bob_ml_decode(s, &zero));
        let mut seen = [false; 4];
        let mut rng = derive_streams(5, 0, StreamRole::ChannelNoise);
        for _ in 0..200 {
            let z = bob_heterodyne_sample(C64::new(0.0, 0.0), &channel(), &mut rng);
            seen[bob_ml_decode(z, &zero)] = true;
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn zero_amplitude_qpsk_error_rate() {
        let zero = [C64::new(0.0, 0.0); 4];
        let mut rng = derive_streams(6, 0, StreamRole::ChannelNoise);
        let mut key = derive_streams(6, 0, StreamRole::AliceKey);
        let n = 100_000;
        let mut errors = 0;
        for _ in 0..n {
            let sent = key.random_range(0..4);
            let z = bob_heterodyne_sample(C64::new(0.0, 0.0), &channel(), &mut rng);
            if bob_ml_decode(z, &zero) != sent {
                errors += 1;
            }
        }
        let sigma = (0.75 * 0.25 / n as f64).sqrt();
        assert!((errors as f64 / n as f64 - 0.75).abs() < 4.0 * sigma);
    }

    #[test]
    fn error_rate_decreases_with_amplitude() {
        let mut last = 1.0;
        for a in [0.5, 1.0, 2.0, 4.0] {
            let points: Vec<C64> = [C64::new(a, 0.0), C64::new(0.0, a), C64::new(-a, 0.0), C64::new(0.0, -a)].to_vec();
            let scaled: Vec<C64> = points.iter().map(|p| p * 0.5f64.sqrt()).collect();
            let mut rng = derive_streams(7, 0, StreamRole::ChannelNoise);
            let n = 50_000;
            let errors = (0..n)
                .filter(|i| {
                    let k = i % 4;
                    bob_ml_decode(bob_heterodyne_sample(points[k], &channel(), &mut rng), &scaled) != k
                })
                .count();
            let ser = errors as f64 / n as f64;
            assert!(ser < last);
            last = ser;
        }
    }

    #[test]
    fn thermal_counts_are_geometric() {
        let mut rng = derive_streams(8, 0, StreamRole::WillieNoise);
        let n = 1_000_000;
        let total: u64 = (0..n).map(|_| willie_photon_sample(C64::new(0.0, 0.0), 1.0, &mut rng).unwrap()).sum();
        assert!((total as f64 / n as f64 - 1.0).abs() < 0.01);
    }

    #[test]
    fn zero_temperature_is_poisson() {
        let mut rng = derive_streams(9, 0, StreamRole::WillieNoise);
        let n = 200_000;
        let a = C64::new(1.2, 0.5);
        let counts: Vec<f64> = (0..n).map(|_| willie_photon_sample(a, 0.0, &mut rng).unwrap() as f64).collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n as f64;
        let lambda = a.norm_sqr();
        assert!((mean - lambda).abs() < 4.0 * (lambda / n as f64).sqrt());
        assert!((var / lambda - 1.0).abs() < 0.02);
    }

    #[test]
    fn counts_match_displaced_thermal_diagonal() {
        let a = C64::new(0.5f64.sqrt(), 0.0);
        let rho = displaced_thermal_in(a, 1.0, 96).unwrap();
        assert!((mean_photon(&rho) - 1.5).abs() < 1e-10);
        let mut rng = derive_streams(10, 0, StreamRole::WillieNoise);
        let n = 400_000usize;
        let mut hist = vec![0usize; 31];
        for _ in 0..n {
            let c = willie_photon_sample(a, 1.0, &mut rng).unwrap() as usize;
            hist[c.min(30)] += 1;
        }
        let mut chi2 = 0.0;
        let mut bins = 0;
        let mut tail = 1.0;
        for (k, &h) in hist.iter().enumerate().take(30) {
            let p = rho.matrix()[(k, k)].re;
            tail -= p;
            let e = p * n as f64;
            if e >= 5.0 {
                chi2 += (h as f64 - e).powi(2) / e;
                bins += 1;
            }
        }
        let e = tail * n as f64;
        if e >= 5.0 {
            chi2 += (hist[30] as f64 - e).powi(2) / e;
            bins += 1;
        }
        let dof = (bins - 1) as f64;
        assert!(chi2 < dof + 4.0 * (2.0 * dof).sqrt(), "chi2 {chi2} over {dof} dof");
    }

    #[test]
    fn aggregated_thermal_counts() {
        let mut rng = derive_streams(11, 0, StreamRole::WillieNoise);
        let trials = 20_000;
        let modes = 1000u64;
        let nt = 0.5;
        let counts: Vec<f64> = (0..trials)
            .map(|_| thermal_count_sum(modes, nt, &mut rng).unwrap() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / trials as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / trials as f64;
        let m = modes as f64;
        // Negative binomial: mean m·nT, variance m·nT(1+nT).
        let target_var = m * nt * (1.0 + nt);
        assert!((mean - m * nt).abs() < 4.0 * (target_var / trials as f64).sqrt());
        assert!((var / target_var - 1.0).abs() < 0.05);
        assert_eq!(thermal_count_sum(0, nt, &mut rng).unwrap(), 0);
    }
}
