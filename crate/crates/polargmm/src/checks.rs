//! Empirical structure checks on the basis and the encoded representation:
//! discrete unitarity of the per-frequency basis blocks, and the low-rank
//! structure of per-frequency covariances on clean data.

use num_complex::Complex;
use rayon::prelude::*;

use crate::basis::BasisGrid;
use crate::fbspca::PolarCoeff;
use crate::linalg::hermitian_eig;
use crate::scalar::Scalar;

/// Deviation of one frequency block's discrete Gram matrix from the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct GramReport<T> {
    pub k: i64,
    pub max_offdiag: T,
    pub max_diag_dev: T,
}

/// Discrete Gram of the `k`-block Fourier-domain bases, with each column
/// renormalized to unit discrete norm first. The diagonal deviation then only
/// measures rounding; the off-diagonal magnitudes measure how far the grid
/// quadrature is from the continuum orthogonality.
pub fn gram_check<T: Scalar>(basis: &BasisGrid<T>, k: i64) -> GramReport<T> {
    let block: Vec<_> = basis.elements.iter().filter(|e| e.k == k).collect();
    let mut max_offdiag = T::zero();
    let mut max_diag_dev = T::zero();
    let norms: Vec<T> = block.iter().map(|e| e.fourier.norm()).collect();
    for i in 0..block.len() {
        for j in i..block.len() {
            let g = block[i].fourier.inner(&block[j].fourier);
            let g = g / Complex::new(norms[i] * norms[j], T::zero());
            if i == j {
                max_diag_dev = max_diag_dev.max((g.re - T::one()).abs().max(g.im.abs()));
            } else {
                max_offdiag = max_offdiag.max(g.norm_sqr().sqrt());
            }
        }
    }
    GramReport {
        k,
        max_offdiag,
        max_diag_dev,
    }
}

/// Runs [`gram_check`] for every frequency block present in the basis,
/// ascending in `k`.
pub fn gram_check_all<T: Scalar>(basis: &BasisGrid<T>) -> Vec<GramReport<T>> {
    let mut ks: Vec<i64> = basis.elements.iter().map(|e| e.k).collect();
    ks.sort_unstable();
    ks.dedup();
    ks.par_iter().map(|&k| gram_check(basis, k)).collect()
}

/// Component indices belonging to angular frequency `k`.
pub fn block_indices(omega: &[i64], k: i64) -> Vec<usize> {
    omega
        .iter()
        .enumerate()
        .filter(|(_, &w)| w == k)
        .map(|(i, _)| i)
        .collect()
}

/// Eigenvalues (descending) of the `k`-block second-moment matrix of encoded
/// samples.
///
/// The uncentered second moment is used rather than the centered covariance:
/// on rotation-only data with uniformly distributed angles the per-block mean
/// vanishes for `k != 0`, and the uncentered moment obeys the clean rank
/// bound (at most one direction per distinct cluster center) for every block
/// including `k = 0`.
pub fn covariance_rank_check<T: Scalar>(
    samples: &[PolarCoeff<T>],
    omega: &[i64],
    k: i64,
) -> Vec<T> {
    let idx = block_indices(omega, k);
    let p = idx.len();
    if p == 0 || samples.is_empty() {
        return Vec::new();
    }
    let n = T::from_usize(samples.len()).unwrap();
    let mut scatter = vec![Complex::new(T::zero(), T::zero()); p * p];
    for s in samples {
        let z = s.to_complex();
        for (a, &ia) in idx.iter().enumerate() {
            for (b, &ib) in idx.iter().enumerate() {
                scatter[a * p + b] += z[ia] * z[ib].conj();
            }
        }
    }
    for v in &mut scatter {
        *v = *v / Complex::new(n, T::zero());
    }
    let (vals, _) = hermitian_eig(p, &scatter);
    vals
}
