//! Small dense linear-algebra helpers: eigendecomposition of complex
//! Hermitian matrices via the real symmetric embedding.
//!
//! A Hermitian `C = X + iY` embeds as the real symmetric `[[X, -Y], [Y, X]]`,
//! whose spectrum is that of `C` with every eigenvalue duplicated; real
//! eigenvectors `(x; y)` map back to complex eigenvectors `x + iy`. The
//! duplicates are collapsed by keeping only vectors with a substantial
//! residual against the span already kept.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::scalar::Scalar;

/// Eigenvalues (descending) and orthonormal eigenvectors of a Hermitian
/// matrix given in row-major order.
pub fn hermitian_eig<T: Scalar>(p: usize, a: &[Complex<T>]) -> (Vec<T>, Vec<Vec<Complex<T>>>) {
    assert_eq!(a.len(), p * p, "matrix shape");
    if p == 0 {
        return (Vec::new(), Vec::new());
    }
    let mut emb = DMatrix::<T>::zeros(2 * p, 2 * p);
    for i in 0..p {
        for j in 0..p {
            let c = a[i * p + j];
            emb[(i, j)] = c.re;
            emb[(i + p, j + p)] = c.re;
            emb[(i, j + p)] = -c.im;
            emb[(i + p, j)] = c.im;
        }
    }
    let eig = emb.symmetric_eigen();
    let mut order: Vec<usize> = (0..2 * p).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap()
    });

    let mut vals = Vec::with_capacity(p);
    let mut vecs: Vec<Vec<Complex<T>>> = Vec::with_capacity(p);
    for &idx in &order {
        if vecs.len() == p {
            break;
        }
        let col: DVector<T> = eig.eigenvectors.column(idx).into();
        let mut v: Vec<Complex<T>> = (0..p)
            .map(|i| Complex::new(col[i], col[i + p]))
            .collect();
        // project out everything already kept; duplicates collapse to ~0
        for kept in &vecs {
            let dot = kept
                .iter()
                .zip(&v)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (k, x)| {
                    acc + k.conj() * x
                });
            for (x, k) in v.iter_mut().zip(kept) {
                *x -= k * dot;
            }
        }
        let norm = v
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<T>()
            .sqrt();
        if norm < T::lit(0.5) {
            continue;
        }
        // renormalize and fix the phase: largest-magnitude entry real positive
        let inv = T::one() / norm;
        for x in v.iter_mut() {
            *x = *x * inv;
        }
        let lead = v
            .iter()
            .cloned()
            .max_by(|a, b| a.norm_sqr().partial_cmp(&b.norm_sqr()).unwrap())
            .unwrap();
        let mag = lead.norm_sqr().sqrt();
        if mag > T::zero() {
            let phase = lead.conj() / mag;
            for x in v.iter_mut() {
                *x = *x * phase;
            }
        }
        vals.push(eig.eigenvalues[idx]);
        vecs.push(v);
    }
    (vals, vecs)
}
