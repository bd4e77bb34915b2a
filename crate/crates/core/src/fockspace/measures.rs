// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

use super::state::DensityMatrix;
use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues};

/// Eigenvalues at or below this are treated as zero.
pub const EIGEN_FLOOR: f64 = 1e-14;

/// Weight of `ρ` on a null direction of `σ` that counts as support.
const SUPPORT_WEIGHT: f64 = 1e-10;

fn xlnx(x: f64) -> f64 {
    if x <= EIGEN_FLOOR {
        0.0
    } else {
        x * x.ln()
    }
}

fn same_dim(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    Ok(())
}

/// `tr(ρ â†â)`.
pub fn mean_photon(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    (0..rho.dim()).map(|k| k as f64 * m[(k, k)].re).sum::<f64>().max(0.0)
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    -rho.eigenvalues().iter().map(|&l| xlnx(l)).sum::<f64>()
}

/// Quantum relative entropy `D(ρ‖σ)` in nats.
pub fn qre(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let eig = hermitian_eigen(sigma.matrix());
    let weights = eig.weights_of(rho.matrix());
    let mut cross = 0.0;
    for (&lambda, &w) in eig.values.iter().zip(&weights) {
        if lambda <= EIGEN_FLOOR && w > SUPPORT_WEIGHT {
            return Err(Error::DivergenceInfinite {
                eigenvalue: lambda,
                weight: w,
            });
        }
        if lambda > 0.0 && w > 0.0 {
            cross += w * lambda.ln();
        }
    }
    Ok(-von_neumann_entropy(rho) - cross)
}

/// `D(ρ‖ρ_nT)` through the thermal-log identity, without building `ρ_nT`.
///
/// The `ln(1+nT)` term is weighted by `tr ρ`, so a truncated thermal state
/// gives exactly zero.
pub fn qre_vs_thermal(rho: &DensityMatrix, nt: f64) -> Result<f64> {
    if !(nt > 0.0 && nt.is_finite()) {
        return Err(invalid("nT", nt, "thermal reference needs nT > 0"));
    }
    let ratio = (nt / (1.0 + nt)).ln();
    let log_norm = nt.ln_1p();
    let eig = hermitian_eigen(rho.matrix());
    let dim = rho.dim();
    // Summed per eigenvector so the entropy and cross terms cancel locally.
    let mut total = 0.0;
    for (c, &lambda) in eig.values.iter().enumerate() {
        if lambda <= EIGEN_FLOOR {
            continue;
        }
        let n_mean: f64 = (0..dim).map(|k| k as f64 * eig.vectors[(k, c)].norm_sqr()).sum();
        total += xlnx(lambda) + lambda * (log_norm - n_mean * ratio);
    }
    Ok(total)
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let diff = rho.matrix() - sigma.matrix();
    Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>())
}

/// Minimum average error of a single-shot test between two equiprobable states.
pub fn detection_error_min(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<f64> {
    let td = trace_distance(rho0, rho1)?;
    Ok((0.5 - td / 2.0).clamp(0.0, 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{displaced_thermal, random_state, thermal_state, thermal_state_in, TruncationPolicy};
    use crate::linalg::C64;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fock(k: usize, dim: usize) -> DensityMatrix {
        let mut m = DMatrix::zeros(dim, dim);
        m[(k, k)] = C64::new(1.0, 0.0);
        DensityMatrix::new(m).unwrap()
    }

    #[test]
    fn vacuum_has_no_photons() {
        assert_eq!(mean_photon(&fock(0, 8)), 0.0);
    }

    #[test]
    fn displaced_thermal_mean() {
        let rho = displaced_thermal(C64::new(1.0, 0.0), 1.0, &TruncationPolicy::default()).unwrap();
        assert!((mean_photon(&rho) - 2.0).abs() < 1e-8);
    }

    #[test]
    fn entropy_of_pure_and_thermal() {
        assert!(von_neumann_entropy(&fock(3, 6)).abs() < 1e-10);
        let t = thermal_state(1.0, &TruncationPolicy::default()).unwrap();
        assert!((von_neumann_entropy(&t) - 2.0 * 2f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn qre_of_identical_states_vanishes() {
        let rho = displaced_thermal(C64::new(0.3, 0.4), 0.5, &TruncationPolicy::default()).unwrap();
        assert!(qre(&rho, &rho).unwrap().abs() < 1e-10);
    }

    #[test]
    fn qre_vacuum_against_thermal() {
        let t = thermal_state(1.0, &TruncationPolicy::default()).unwrap();
        let v = fock(0, t.dim());
        assert!((qre(&v, &t).unwrap() - 2f64.ln()).abs() < 1e-8);
        assert!((qre_vs_thermal(&v, 1.0).unwrap() - 2f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn qre_detects_support_mismatch() {
        let err = qre(&fock(0, 4), &fock(1, 4)).unwrap_err();
        assert!(matches!(err, Error::DivergenceInfinite { .. }));
    }

    #[test]
    fn qre_is_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rho = random_state(4, &mut rng).unwrap();
        let sigma = random_state(4, &mut rng).unwrap();
        let single = qre(&rho, &sigma).unwrap();
        let double = qre(&rho.kron(&rho).unwrap(), &sigma.kron(&sigma).unwrap()).unwrap();
        assert!((double - 2.0 * single).abs() < 1e-8);
    }

    #[test]
    fn thermal_reference_of_itself_is_zero() {
        let t = thermal_state(0.7, &TruncationPolicy::default()).unwrap();
        assert!(qre_vs_thermal(&t, 0.7).unwrap().abs() < 1e-10);
        // Cutoff deep enough that the top levels sit below the eigenvalue floor.
        let deep = thermal_state_in(1.0, 64).unwrap();
        assert!(qre_vs_thermal(&deep, 1.0).unwrap().abs() < 1e-18);
    }

    #[test]
    fn thermal_identity_matches_generic_qre() {
        let rho = displaced_thermal(C64::new(0.2, 0.0), 0.5, &TruncationPolicy::default()).unwrap();
        let sigma = thermal_state_in(0.5, rho.dim()).unwrap();
        let generic = qre(&rho, &sigma).expect("generic qre");
        let fast = qre_vs_thermal(&rho, 0.5).unwrap();
        assert!((generic - fast).abs() < 1e-8);
    }

    #[test]
    fn qre_vs_thermal_rejects_zero_temperature() {
        assert!(matches!(
            qre_vs_thermal(&fock(0, 3), 0.0),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn trace_distance_extremes() {
        assert!(trace_distance(&fock(0, 4), &fock(0, 4)).unwrap().abs() < 1e-15);
        assert!((trace_distance(&fock(0, 4), &fock(1, 4)).unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(detection_error_min(&fock(2, 4), &fock(2, 4)).unwrap(), 0.5);
        assert!(detection_error_min(&fock(0, 4), &fock(1, 4)).unwrap().abs() < 1e-10);
    }

    #[test]
    fn detection_error_decreases_with_amplitude() {
        let policy = TruncationPolicy::default();
        let mut last = 0.5;
        for a in [0.1, 0.2, 0.4] {
            let rho1 = displaced_thermal(C64::new(a, 0.0), 1.0, &policy).unwrap();
            let rho0 = thermal_state_in(1.0, rho1.dim()).unwrap();
            let pe = detection_error_min(&rho0, &rho1).unwrap();
            assert!(pe > 0.0 && pe < last);
            last = pe;
        }
    }
}
