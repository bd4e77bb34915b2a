// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

use rand::Rng;

use crate::error::{invalid, Error, Result};

/// `n` i.i.d. uniform symbols from `{0, …, L−1}`.
pub fn gen_secret_sequence<R: Rng + ?Sized>(n: usize, l: usize, rng: &mut R) -> Result<Vec<usize>> {
    if l < 2 {
        return Err(invalid("L", l as f64, "alphabet needs at least 2 symbols"));
    }
    Ok((0..n).map(|_| rng.random_range(0..l)).collect())
}

fn check_lengths(a: &[usize], b: &[usize]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "sequence lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Elementwise `(c + r) mod L`.
pub fn encode(codeword: &[usize], secret: &[usize], l: usize) -> Result<Vec<usize>> {
    check_lengths(codeword, secret)?;
    if l == 0 {
        return Err(invalid("L", 0.0, "alphabet must be nonempty"));
    }
    Ok(codeword.iter().zip(secret).map(|(c, r)| (c + r) % l).collect())
}

/// Elementwise `(s − r) mod L`.
pub fn decode(received: &[usize], secret: &[usize], l: usize) -> Result<Vec<usize>> {
    check_lengths(received, secret)?;
    if l == 0 {
        return Err(invalid("L", 0.0, "alphabet must be nonempty"));
    }
    Ok(received
        .iter()
        .zip(secret)
        .map(|(s, r)| (s % l + l - r % l) % l)
        .collect())
}

/// Indices in `0..n`, each kept independently with probability `tau`.
///
/// Gaps between kept indices are drawn geometrically, which is equivalent to
/// one coin per index.
pub fn select_modes<R: Rng + ?Sized>(n: usize, tau: f64, rng: &mut R) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(invalid("tau", tau, "selection probability must lie in [0, 1]"));
    }
    if tau == 0.0 {
        return Ok(Vec::new());
    }
    if tau == 1.0 {
        return Ok((0..n).collect());
    }
    let log_q = (-tau).ln_1p();
    let mut out = Vec::with_capacity((n as f64 * tau * 1.2) as usize + 16);
    let mut next = 0usize;
    loop {
        // 1 − U lies in (0, 1], so the log is finite.
        let u: f64 = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / log_q).floor();
        if skip >= (n - next) as f64 {
            break;
        }
        next += skip as usize;
        out.push(next);
        next += 1;
        if next >= n {
            break;
        }
    }
    Ok(out)
}
