// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense Hermitian helpers shared by the Fock-space numerics.
//!
//! Truncated Fock-space states built from phase-symmetric constellations are
//! block diagonal once the basis is permuted by photon number modulo the
//! constellation order. [`hermitian_eigen`] detects that structure from the
//! exact zero pattern and diagonalises each block independently, falling back
//! to a real symmetric solver whenever a block carries no imaginary part.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

pub type C64 = Complex<f64>;

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues, in block order (not sorted).
    pub values: Vec<f64>,
    /// Eigenvectors as columns, aligned with `values`.
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    /// Rebuilds `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let fj = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    /// Diagonal of `V† ρ V`, i.e. the weight of `rho` on each eigenvector.
    pub fn weights_of(&self, rho: &DMatrix<C64>) -> Vec<f64> {
        let projected = rho * &self.vectors;
        (0..self.values.len())
            .map(|j| {
                let mut acc = 0.0;
                for i in 0..projected.nrows() {
                    acc += (self.vectors[(i, j)].conj() * projected[(i, j)]).re;
                }
                acc
            })
            .collect()
    }
}

/// Connected components of the non-zero pattern of a square matrix.
pub fn blocks(m: &DMatrix<C64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for j in 0..n {
        for i in (j + 1)..n {
            let z = m[(i, j)];
            if z.re != 0.0 || z.im != 0.0 || m[(j, i)] != C64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

fn sub_block(m: &DMatrix<C64>, idx: &[usize]) -> DMatrix<C64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

fn is_real(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows());
    for idx in blocks(m) {
        if idx.len() == 1 {
            out.push(m[(idx[0], idx[0])].re);
            continue;
        }
        let sub = sub_block(m, &idx);
        if is_real(&sub) {
            let real = sub.map(|z| z.re);
            out.extend(real.symmetric_eigenvalues().iter().copied());
        } else {
            out.extend(sub.symmetric_eigenvalues().iter().copied());
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Full eigen-decomposition of a Hermitian matrix.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> HermitianEigen {
    let n = m.nrows();
    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    let mut col = 0;
    for idx in blocks(m) {
        let sub = sub_block(m, &idx);
        let (vals, vecs): (Vec<f64>, DMatrix<C64>) = if is_real(&sub) {
            let eig = SymmetricEigen::new(sub.map(|z| z.re));
            (
                eig.eigenvalues.iter().copied().collect(),
                eig.eigenvectors.map(|x| C64::new(x, 0.0)),
            )
        } else {
            let eig = SymmetricEigen::new(sub);
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        };
        for (k, &v) in vals.iter().enumerate() {
            values.push(v);
            for (r, &row) in idx.iter().enumerate() {
                vectors[(row, col)] = vecs[(r, k)];
            }
            col += 1;
        }
    }
    HermitianEigen { values, vectors }
}

/// Largest entrywise modulus.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |M - M†|` entrywise.
pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(M + M†) / 2`.
pub fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).scale(0.5)
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(64);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
        // ∫ x^126 over [-1, 1] = 2/127, degree 2n-2 is within reach.
        let moment: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(126)).sum();
        assert!((moment - 2.0 / 127.0).abs() < 1e-13);
    }

    #[test]
    fn block_split_matches_dense_solver() {
        let n = 9;
        let m = DMatrix::from_fn(n, n, |i, j| {
            if (i + j) % 3 == 0 || i == j {
                C64::new(1.0 / (1.0 + i as f64 + j as f64), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let mut dense: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
        dense.sort_by(f64::total_cmp);
        let split = hermitian_eigenvalues(&m);
        for (a, b) in dense.iter().zip(&split) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(blocks(&m).len() > 1);
    }

    #[test]
    fn eigen_reconstructs_complex_matrix() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(2.0, 0.0), C64::new(0.5, 0.5), C64::new(0.5, -0.5), C64::new(1.0, 0.0)],
        );
        let eig = hermitian_eigen(&m);
        let back = eig.map(|x| x);
        assert!(max_abs(&(back - &m)) < 1e-12);
    }
}
