//! Bessel functions of the first kind (integer order) and their positive
//! roots.
//!
//! Evaluation uses the integral representation
//! `J_n(x) = (1/pi) * int_0^pi cos(n t - x sin t) dt`
//! with the trapezoid rule, which converges spectrally for periodic smooth
//! integrands; node count grows with `x + n` to keep 1e-12-level absolute
//! accuracy over the range the basis construction needs. Internals run in
//! `f64` regardless of the crate scalar.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn bessel_j_f64(order: i64, x: f64) -> f64 {
    if order < 0 {
        let v = bessel_j_f64(-order, x);
        return if order % 2 == 0 { v } else { -v };
    }
    if x < 0.0 {
        let v = bessel_j_f64(order, -x);
        return if order % 2 == 0 { v } else { -v };
    }
    if x == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    let n = order as f64;
    let nodes = 64 + (1.3 * (x + n)).ceil() as usize;
    let h = std::f64::consts::PI / nodes as f64;
    // trapezoid over [0, pi]; endpoints carry weight 1/2
    let mut acc = 0.5 * (1.0 + (n * std::f64::consts::PI).cos());
    for i in 1..nodes {
        let t = i as f64 * h;
        acc += (n * t - x * t.sin()).cos();
    }
    acc * h / std::f64::consts::PI
}

/// `J_k(x)` for integer order `k` (negative orders via `J_{-k} = (-1)^k J_k`).
pub fn bessel_j<T: Scalar>(order: i64, x: T) -> Result<T> {
    let xf = x.as_f64();
    if !xf.is_finite() {
        return Err(Error::invalid(format!("bessel_j: non-finite argument {xf}")));
    }
    Ok(T::lit(bessel_j_f64(order, xf)))
}

/// `J_k'(x) = (J_{k-1}(x) - J_{k+1}(x)) / 2`.
pub fn bessel_j_deriv<T: Scalar>(order: i64, x: T) -> Result<T> {
    let xf = x.as_f64();
    if !xf.is_finite() {
        return Err(Error::invalid(format!(
            "bessel_j_deriv: non-finite argument {xf}"
        )));
    }
    Ok(T::lit(
        0.5 * (bessel_j_f64(order - 1, xf) - bessel_j_f64(order + 1, xf)),
    ))
}

fn bisect_root(order: i64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = bessel_j_f64(order, lo);
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-12 {
            return mid;
        }
        let fm = bessel_j_f64(order, mid);
        if (flo <= 0.0) == (fm <= 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
}

/// The first `count` positive roots of `J_k`, in increasing order.
///
/// Brackets by scanning in steps of `pi/4` starting just past the origin
/// (the first root of `J_k` lies above `k`), then bisects to 1e-12.
pub fn bessel_roots(order: i64, count: usize) -> Vec<f64> {
    let k = order.unsigned_abs() as f64;
    let mut roots = Vec::with_capacity(count);
    let step = std::f64::consts::FRAC_PI_4;
    let mut x = if order == 0 { 1e-6 } else { k.max(1e-6) };
    let mut fx = bessel_j_f64(order, x);
    while roots.len() < count {
        let x2 = x + step;
        let fx2 = bessel_j_f64(order, x2);
        if (fx <= 0.0) != (fx2 <= 0.0) {
            roots.push(bisect_root(order, x, x2));
        }
        x = x2;
        fx = fx2;
    }
    roots
}

/// The `q`-th positive root `R_{k,q}` (`q >= 1`).
pub fn bessel_root(order: i64, q: usize) -> Result<f64> {
    if q == 0 {
        return Err(Error::invalid("bessel_root: q must be >= 1"));
    }
    Ok(bessel_roots(order, q)[q - 1])
}

/// All positive roots of `J_k` not exceeding `bound`.
pub fn bessel_roots_below(order: i64, bound: f64) -> Vec<f64> {
    let k = order.unsigned_abs() as f64;
    let mut roots = Vec::new();
    if bound <= k.max(0.0) {
        // first root exceeds the order; nothing can be admitted
        if bound <= 0.0 {
            return roots;
        }
    }
    let step = std::f64::consts::FRAC_PI_4;
    let mut x = if order == 0 { 1e-6 } else { k.max(1e-6) };
    let mut fx = bessel_j_f64(order, x);
    while x < bound {
        let x2 = x + step;
        let fx2 = bessel_j_f64(order, x2);
        if (fx <= 0.0) != (fx2 <= 0.0) {
            let r = bisect_root(order, x, x2);
            if r <= bound {
                roots.push(r);
            }
        }
        x = x2;
        fx = fx2;
    }
    roots
}
