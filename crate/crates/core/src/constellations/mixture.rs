// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ConstellationKind, WillieSpec};
use crate::covertlimits::{bpsk_qre_leading, covert_budget_ns, qpsk_qre_leading, ChannelParams};
use crate::error::{invalid, Error, Result};
use crate::fockspace::{
    check_displacement_dim, displaced_thermal_real, grow_until, qre_vs_thermal, thermal_diagonal,
    DensityMatrix, TruncationPolicy,
};
use crate::linalg::C64;

/// Phase-factor components below this are set to exactly zero.
const PHASE_ZERO: f64 = 1e-13;

/// `(1−τ)ρ_nT + τ Σ_l p_l D(u_l) ρ_nT D(u_l)†` on `dim` levels.
///
/// Points sharing a magnitude share one real displacement; their phases enter
/// through `F(d) = Σ p_l e^{iφ_l d}` on the `d`-th off-diagonal.
pub(crate) fn mixture_matrix(points: &[(C64, f64)], tau: f64, nt: f64, dim: usize) -> DMatrix<C64> {
    let t = thermal_diagonal(nt, dim);
    let mut re = DMatrix::<f64>::zeros(dim, dim);
    let mut im = DMatrix::<f64>::zeros(dim, dim);

    let mut sorted: Vec<(C64, f64)> = points.iter().copied().filter(|(_, p)| *p > 0.0).collect();
    sorted.sort_by(|a, b| a.0.norm().total_cmp(&b.0.norm()));

    let mut diagonal_weight = 1.0 - tau;
    let mut start = 0;
    while start < sorted.len() {
        let r = sorted[start].0.norm();
        let mut end = start + 1;
        while end < sorted.len() && (sorted[end].0.norm() - r).abs() <= 1e-15 * r.max(1.0) {
            end += 1;
        }
        let group = &sorted[start..end];
        start = end;
        if r == 0.0 {
            diagonal_weight += tau * group.iter().map(|(_, p)| p).sum::<f64>();
            continue;
        }
        let factors = phase_factors(group, dim);
        let rho = displaced_thermal_real(r, &t);
        for j in 0..dim {
            for k in 0..dim {
                let f = if j >= k {
                    factors[j - k]
                } else {
                    factors[k - j].conj()
                };
                re[(j, k)] += tau * f.re * rho[(j, k)];
                im[(j, k)] += tau * f.im * rho[(j, k)];
            }
        }
    }
    for (k, tk) in t.iter().enumerate() {
        re[(k, k)] += diagonal_weight * tk;
    }
    DMatrix::from_fn(dim, dim, |j, k| C64::new(re[(j, k)], im[(j, k)]))
}

fn phase_factors(group: &[(C64, f64)], dim: usize) -> Vec<C64> {
    (0..dim)
        .map(|d| {
            let mut f = C64::new(0.0, 0.0);
            for (u, p) in group {
                f += C64::from_polar(*p, u.arg() * d as f64);
            }
            if f.re.abs() < PHASE_ZERO {
                f.re = 0.0;
            }
            if f.im.abs() < PHASE_ZERO {
                f.im = 0.0;
            }
            f
        })
        .collect()
}

/// The warden's per-mode state on exactly `dim` levels.
pub fn willie_mixture_in(spec: &WillieSpec, dim: usize) -> Result<DensityMatrix> {
    spec.validate()?;
    let points = spec.willie_points();
    let umax = points.iter().map(|(u, _)| u.norm()).fold(0.0, f64::max);
    check_displacement_dim(umax, dim)?;
    DensityMatrix::new(mixture_matrix(&points, spec.tau, spec.channel.nt(), dim))
}

/// The warden's per-mode state with automatic truncation.
pub fn willie_mixture(spec: &WillieSpec) -> Result<DensityMatrix> {
    spec.validate()?;
    let points = spec.willie_points();
    let nt = spec.channel.nt();
    let umax = points.iter().map(|(u, _)| u.norm()).fold(0.0, f64::max);
    let signal: f64 = points.iter().map(|(u, p)| p * u.norm_sqr()).sum();
    let expected = nt + spec.tau * signal;
    grow_until(&spec.policy, nt, umax, expected, |dim| {
        DensityMatrix::new(mixture_matrix(&points, spec.tau, nt, dim))
    })
}

/// Exact per-mode QRE against the warden's thermal background, with the
/// dimension used.
pub fn exact_qre_with_dim(spec: &WillieSpec) -> Result<(f64, usize)> {
    let rho = willie_mixture(spec)?;
    let d = qre_vs_thermal(&rho, spec.channel.nt())?;
    Ok((d, rho.dim()))
}

/// Exact per-mode QRE against the warden's thermal background.
pub fn exact_qre_per_mode(spec: &WillieSpec) -> Result<f64> {
    exact_qre_with_dim(spec).map(|(d, _)| d)
}

/// One row of a QRE sweep; `u` is the warden-side displacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub u: f64,
    pub qre_exact_nats: f64,
    pub qre_leading_nats: f64,
    pub ratio: f64,
    pub dim_used: usize,
}

/// Exact and leading-order QRE over `points` displacements from `u_max` down
/// to `u_min`, geometrically spaced when `u_min > 0`.
pub fn qre_sweep(
    kind: ConstellationKind,
    channel: ChannelParams,
    u_min: f64,
    u_max: f64,
    points: usize,
    tau: f64,
    policy: TruncationPolicy,
) -> Result<Vec<SweepRow>> {
    if !(u_min >= 0.0 && u_min.is_finite()) {
        return Err(invalid("u_min", u_min, "must be finite and nonnegative"));
    }
    if !(u_max >= u_min && u_max.is_finite()) {
        return Err(invalid("u_max", u_max, "must be finite and at least u_min"));
    }
    if points == 0 {
        return Err(invalid("points", 0.0, "need at least one point"));
    }
    let template = WillieSpec::new(channel, kind.preset(1.0), tau, policy)?;
    let grid: Vec<f64> = (0..points)
        .map(|i| {
            if points == 1 {
                return u_min;
            }
            let s = i as f64 / (points - 1) as f64;
            if u_min > 0.0 {
                u_max * (u_min / u_max).powf(s)
            } else {
                u_max - s * (u_max - u_min)
            }
        })
        .collect();
    grid.into_par_iter()
        .map(|u| {
            let nbar_s = u * u / (1.0 - channel.eta());
            let leading = tau
                * tau
                * match kind {
                    ConstellationKind::Qpsk => qpsk_qre_leading(nbar_s, &channel)?,
                    ConstellationKind::Bpsk => bpsk_qre_leading(nbar_s, &channel)?,
                };
            let (exact, dim) = if u == 0.0 {
                exact_qre_with_dim(&template.with_constellation(kind.preset(0.0)))?
            } else {
                exact_qre_with_dim(&template.with_willie_amplitude(u)?)?
            };
            let ratio = if leading > 0.0 { exact / leading } else { f64::NAN };
            Ok(SweepRow {
                u,
                qre_exact_nats: exact,
                qre_leading_nats: leading,
                ratio,
                dim_used: dim,
            })
        })
        .collect()
}

/// Per-mode Alice-side amplitude whose exact QRE equals `δ_QRE/n`.
///
/// The template's shape and priors are kept; its largest amplitude is solved
/// for by bisection.
pub fn amplitude_for_budget(spec_template: &WillieSpec, delta_qre: f64, n: u64) -> Result<f64> {
    if !(delta_qre > 0.0 && delta_qre.is_finite()) {
        return Err(invalid("delta_qre", delta_qre, "must be positive"));
    }
    if n == 0 {
        return Err(invalid("n", 0.0, "mode count must be at least 1"));
    }
    spec_template.validate()?;
    let target = delta_qre / n as f64;
    let f = |a: f64| -> Result<f64> {
        let spec = spec_template.with_constellation(spec_template.constellation.with_max_amplitude(a)?);
        Ok(exact_qre_per_mode(&spec)? - target)
    };

    let guess = covert_budget_ns(&spec_template.channel, n, delta_qre)?.nbar_s.sqrt();
    let mut lo = 0.0;
    let mut hi = guess.max(1e-6) * 2.0;
    let mut f_hi = f(hi)?;
    let mut expansions = 0;
    while f_hi <= 0.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        f_hi = match f(hi) {
            Ok(v) if expansions < 40 => v,
            _ => {
                return Err(Error::InvalidBracket {
                    lo,
                    hi,
                    target,
                    f_lo: f(lo).map(|v| v + target).unwrap_or(f64::NAN),
                    f_hi: f_hi + target,
                })
            }
        };
    }
    let f_lo = if lo == 0.0 { -target } else { f(lo)? };
    if f_lo > 0.0 {
        return Err(Error::InvalidBracket {
            lo,
            hi,
            target,
            f_lo: f_lo + target,
            f_hi: f_hi + target,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellations::Constellation;
    use crate::covertlimits::converse_qre_lower_exact;
    use crate::fockspace::{mean_photon, thermal_state_in};
    use crate::linalg::max_abs;

    fn spec(c: Constellation, tau: f64) -> WillieSpec {
        WillieSpec::new(
            ChannelParams::new(0.5, 2.0).unwrap(),
            c,
            tau,
            TruncationPolicy::default(),
        )
        .unwrap()
    }

    #[test]
    fn tau_zero_is_thermal() {
        let rho = willie_mixture(&spec(Constellation::qpsk(0.4), 0.0)).unwrap();
        let t = thermal_state_in(1.0, rho.dim()).unwrap();
        assert!(max_abs(&(rho.matrix() - t.matrix())) < 1e-12);
    }

    #[test]
    fn qpsk_is_rotation_invariant() {
        let s = spec(Constellation::qpsk(0.4), 1.0);
        let a = willie_mixture_in(&s, 64).unwrap();
        let rotated = s.with_constellation(s.constellation.rotated(std::f64::consts::FRAC_PI_2));
        let b = willie_mixture_in(&rotated, 64).unwrap();
        assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-10);
    }

    #[test]
    fn mixture_mean_photon() {
        let c = Constellation::new(
            vec![C64::new(0.3, 0.1), C64::new(-0.5, 0.2), C64::new(0.0, 0.0)],
            vec![0.5, 0.3, 0.2],
        )
        .unwrap();
        let s = spec(c.clone(), 0.6);
        let rho = willie_mixture(&s).unwrap();
        let expected = 1.0 + 0.6 * 0.5 * c.mean_photon();
        assert!((mean_photon(&rho) - expected).abs() < 1e-8);
    }

    #[test]
    fn mixture_matches_direct_sum() {
        let c = Constellation::new(
            vec![C64::new(0.3, 0.1), C64::new(-0.1, 0.3), C64::new(0.2, -0.4)],
            vec![0.2, 0.5, 0.3],
        )
        .unwrap();
        let s = spec(c, 0.7);
        let dim = 40;
        let fast = willie_mixture_in(&s, dim).unwrap();
        let t = thermal_state_in(1.0, dim).unwrap();
        let mut direct = t.matrix() * C64::new(0.3, 0.0);
        for (u, p) in s.willie_points() {
            let d = crate::fockspace::displacement_operator(u, dim).unwrap().into_matrix();
            direct += (&d * t.matrix() * d.adjoint()) * C64::new(0.7 * p, 0.0);
        }
        assert!(max_abs(&(fast.matrix() - direct)) < 1e-12);
    }

    #[test]
    fn zero_amplitudes_give_zero_qre() {
        assert!(exact_qre_per_mode(&spec(Constellation::qpsk(0.0), 1.0)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn qpsk_beats_bpsk() {
        let a = 1e-3f64.sqrt();
        let q = exact_qre_per_mode(&spec(Constellation::qpsk(a), 1.0)).unwrap();
        let b = exact_qre_per_mode(&spec(Constellation::bpsk(a), 1.0)).unwrap();
        assert!(q > 0.0 && q < b);
    }

    #[test]
    fn qpsk_symmetries() {
        let base = exact_qre_per_mode(&spec(Constellation::qpsk(0.3), 1.0)).unwrap();
        let neg = exact_qre_per_mode(&spec(Constellation::qpsk(-0.3), 1.0)).unwrap();
        let rot = spec(Constellation::qpsk(0.3).rotated(std::f64::consts::FRAC_PI_2), 1.0);
        let rot = exact_qre_per_mode(&rot).unwrap();
        assert!((base - neg).abs() < 1e-14);
        assert!((base - rot).abs() < 1e-14);
    }

    #[test]
    fn exact_qpsk_dominates_converse() {
        let s = spec(Constellation::qpsk(1.0), 1.0);
        for nbar_s in [1e-3, 1e-2, 0.1, 0.5] {
            let q = exact_qre_per_mode(&s.with_constellation(Constellation::qpsk(f64::sqrt(nbar_s)))).unwrap();
            let lower = converse_qre_lower_exact(nbar_s, &s.channel, 1).unwrap();
            assert!(q >= lower - 1e-10, "{nbar_s}: {q} < {lower}");
        }
    }

    #[test]
    fn sweep_rows() {
        let rows = qre_sweep(
            ConstellationKind::Qpsk,
            ChannelParams::new(0.5, 2.0).unwrap(),
            0.01,
            0.1,
            4,
            1.0,
            TruncationPolicy::default(),
        )
        .unwrap();
        assert_eq!(rows.len(), 4);
        assert!((rows[0].u - 0.1).abs() < 1e-15 && (rows[3].u - 0.01).abs() < 1e-15);
        assert!((rows[3].ratio - 1.0).abs() < 1e-3);
        assert!(rows.iter().all(|r| r.dim_used >= 32));
    }

    #[test]
    fn amplitude_matches_budget() {
        let s = WillieSpec::new(
            ChannelParams::new(0.5, 1.0).unwrap(),
            Constellation::qpsk(1.0),
            1.0,
            TruncationPolicy::default(),
        )
        .unwrap();
        let a = amplitude_for_budget(&s, 0.01, 1_000_000).unwrap();
        let budget = covert_budget_ns(&s.channel, 1_000_000, 0.01).unwrap().nbar_s;
        assert!((a * a / budget - 1.0).abs() < 0.05);
        let at = exact_qre_per_mode(&s.with_constellation(Constellation::qpsk(a))).unwrap();
        assert!((at - 1e-8).abs() < 1e-10);
        let tiny = amplitude_for_budget(&s, 1e-12, 1_000_000).unwrap();
        assert!(tiny < a * 1e-2);
    }
}
