//! Coarse translational pre-centering by a two-component EM fit.
//!
//! Each pixel is a sample `p = (x, y, c)` of row, column, and intensity. A
//! signal component is a full 3D Gaussian over `p` (the particle: a dark,
//! localized blob), the background component is a Gaussian over intensity
//! alone, uniform over position. Equal mixing weights. The positional mean of
//! the signal component is the estimated particle center.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Image;
use crate::scalar::Scalar;

/// Parameters of the two-component pixel mixture.
#[derive(Debug, Clone)]
pub struct CenteringParams<T: Scalar> {
    /// Signal mean: (row, col, intensity).
    pub mu_s: Vector3<T>,
    /// Signal covariance (regularized each M-step).
    pub sigma_s: Matrix3<T>,
    /// Background intensity mean.
    pub mu_b: T,
    /// Background intensity standard deviation.
    pub sigma_b: T,
}

/// Result of a per-image centering fit.
#[derive(Debug, Clone)]
pub struct CenterFit<T: Scalar> {
    /// Estimated particle center, (row, col) in pixels.
    pub center: [T; 2],
    /// Final mixture parameters.
    pub params: CenteringParams<T>,
    /// Set when the image carries no usable signal (constant input); the
    /// center falls back to the geometric frame center.
    pub degenerate: bool,
    /// Observed-data log-likelihood after each EM iteration.
    pub loglik: Vec<T>,
}

fn min_max_normalize<T: Scalar>(image: &Image<T>) -> Option<Image<T>> {
    let (lo, hi) = image.min_max();
    let span = hi - lo;
    if span <= T::lit(1e-12) {
        return None;
    }
    Some(image.map(|v| (*v - lo) / span))
}

/// Deterministic starting point: positional mean at the intensity-weighted
/// centroid of `max - I` (particles are darker than background), signal
/// intensity below the median, background at the median.
fn init_params<T: Scalar>(norm: &Image<T>) -> CenteringParams<T> {
    let side = norm.side();
    let mut vals: Vec<T> = norm.as_slice().to_vec();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = vals[vals.len() / 2];

    let mut wsum = T::zero();
    let mut cx = T::zero();
    let mut cy = T::zero();
    for x in 0..side {
        for y in 0..side {
            let w = T::one() - *norm.at(x, y);
            wsum += w;
            cx += w * T::from_usize(x).unwrap();
            cy += w * T::from_usize(y).unwrap();
        }
    }
    if wsum > T::zero() {
        cx /= wsum;
        cy /= wsum;
    } else {
        cx = T::from_usize(side).unwrap() / T::lit(2.0);
        cy = cx;
    }

    let var_c = norm.variance() + T::lit(1e-4);
    let pos_var = {
        let q = T::from_usize(side).unwrap() / T::lit(4.0);
        q * q
    };
    let mut sigma_s = Matrix3::zeros();
    sigma_s[(0, 0)] = pos_var;
    sigma_s[(1, 1)] = pos_var;
    sigma_s[(2, 2)] = var_c;

    CenteringParams {
        mu_s: Vector3::new(cx, cy, median * T::lit(0.5)),
        sigma_s,
        mu_b: median,
        sigma_b: var_c.sqrt(),
    }
}

/// Log-density helpers; the background is uniform over the frame in position,
/// so both components are proper densities over (x, y, c).
fn signal_logpdf<T: Scalar>(p: &CenteringParams<T>, inv: &Matrix3<T>, log_norm: T, v: &Vector3<T>) -> T {
    let d = v - p.mu_s;
    let q = (inv * d).dot(&d);
    -T::lit(0.5) * q + log_norm
}

fn background_logpdf<T: Scalar>(p: &CenteringParams<T>, area: T, c: T) -> T {
    let d = (c - p.mu_b) / p.sigma_b;
    -T::lit(0.5) * d * d
        - p.sigma_b.ln()
        - T::lit(0.5) * T::lit(std::f64::consts::TAU).ln()
        - area.ln()
}

fn logaddexp<T: Scalar>(a: T, b: T) -> T {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (T::one() + (lo - hi).exp()).ln()
}

/// Fits the two-component mixture for `n_citer` EM rounds and returns the
/// estimated particle center.
pub fn fit_center<T: Scalar>(image: &Image<T>, n_citer: usize) -> Result<CenterFit<T>> {
    if n_citer == 0 {
        return Err(Error::invalid("n_citer must be at least 1"));
    }
    let side = image.side();
    let half = T::from_usize(side).unwrap() / T::lit(2.0);
    let norm = match min_max_normalize(image) {
        Some(n) => n,
        None => {
            let mut params = init_params(&Image::zeros(side));
            params.mu_s[0] = half;
            params.mu_s[1] = half;
            return Ok(CenterFit {
                center: [half, half],
                params,
                degenerate: true,
                loglik: Vec::new(),
            });
        }
    };

    let samples: Vec<Vector3<T>> = (0..side * side)
        .map(|i| {
            Vector3::new(
                T::from_usize(i / side).unwrap(),
                T::from_usize(i % side).unwrap(),
                norm.as_slice()[i],
            )
        })
        .collect();
    let area = T::from_usize(side * side).unwrap();
    let half_log_tau = T::lit(0.5) * T::lit(std::f64::consts::TAU).ln();

    let mut params = init_params(&norm);
    let mut loglik = Vec::with_capacity(n_citer);
    let mut gamma = vec![T::lit(0.5); samples.len()];

    for _ in 0..n_citer {
        // E-step: responsibilities of the signal component
        let inv = match params.sigma_s.try_inverse() {
            Some(i) => i,
            None => break,
        };
        let det = params.sigma_s.determinant();
        if det <= T::zero() {
            break;
        }
        let log_norm = -T::lit(0.5) * det.ln() - T::lit(3.0) * half_log_tau;
        let mut total = T::zero();
        for (g, v) in gamma.iter_mut().zip(&samples) {
            let ls = signal_logpdf(&params, &inv, log_norm, v);
            let lb = background_logpdf(&params, area, v[2]);
            let tot = logaddexp(ls, lb);
            *g = (ls - tot).exp();
            // equal weights: the common log(1/2) cancels in gamma and only
            // offsets the likelihood by a constant
            total += tot + T::lit(0.5f64.ln());
        }
        loglik.push(total);

        // M-step
        let mut ws = T::zero();
        let mut mean = Vector3::zeros();
        for (g, v) in gamma.iter().zip(&samples) {
            ws += *g;
            mean += v * *g;
        }
        if ws < T::lit(1e-10) {
            break;
        }
        mean /= ws;
        let mut cov = Matrix3::zeros();
        for (g, v) in gamma.iter().zip(&samples) {
            let d = v - mean;
            cov += d * d.transpose() * *g;
        }
        cov /= ws;
        let reg = T::lit(1e-6) * cov.trace() / T::lit(3.0);
        for i in 0..3 {
            cov[(i, i)] += reg;
        }
        params.mu_s = mean;
        params.sigma_s = cov;

        let mut wb = T::zero();
        let mut mb = T::zero();
        for (g, v) in gamma.iter().zip(&samples) {
            let w = T::one() - *g;
            wb += w;
            mb += w * v[2];
        }
        if wb >= T::lit(1e-10) {
            mb /= wb;
            let mut vb = T::zero();
            for (g, v) in gamma.iter().zip(&samples) {
                let d = v[2] - mb;
                vb += (T::one() - *g) * d * d;
            }
            params.mu_b = mb;
            params.sigma_b = (vb / wb).sqrt().max(T::lit(1e-6));
        }
    }

    Ok(CenterFit {
        center: [params.mu_s[0], params.mu_s[1]],
        params,
        degenerate: false,
        loglik,
    })
}

/// Shifts every image so its estimated particle center lands on the frame
/// center; returns the shifted stack and the applied shifts.
pub fn center_stack<T: Scalar>(
    images: &[Image<T>],
    n_citer: usize,
) -> Result<(Vec<Image<T>>, Vec<[T; 2]>)> {
    if images.is_empty() {
        return Err(Error::invalid("empty image stack"));
    }
    let results: Vec<Result<(Image<T>, [T; 2])>> = images
        .par_iter()
        .map(|img| {
            let fit = fit_center(img, n_citer)?;
            let half = T::from_usize(img.side()).unwrap() / T::lit(2.0);
            let shift = if fit.degenerate {
                [T::zero(), T::zero()]
            } else {
                [half - fit.center[0], half - fit.center[1]]
            };
            // shift around the image mean so exposed borders blend into the
            // background instead of reading as dark (signal-like) bands
            let mean = img.mean();
            let shifted = img.map(|v| *v - mean).shift(shift).map(|v| *v + mean);
            Ok((shifted, shift))
        })
        .collect();
    let mut stack = Vec::with_capacity(images.len());
    let mut shifts = Vec::with_capacity(images.len());
    for r in results {
        let (img, s) = r?;
        stack.push(img);
        shifts.push(s);
    }
    Ok((stack, shifts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Dark Gaussian dip at (bx, by) on a bright background.
    fn dark_blob(side: usize, bx: f64, by: f64, sigma: f64) -> Image<f64> {
        let mut img = Image::zeros(side);
        for x in 0..side {
            for y in 0..side {
                let dx = x as f64 - bx;
                let dy = y as f64 - by;
                *img.at_mut(x, y) = 1.0 - (-0.5 * (dx * dx + dy * dy) / (sigma * sigma)).exp();
            }
        }
        img
    }

    #[test]
    fn recovers_centered_blob() {
        let img = dark_blob(64, 32.0, 32.0, 4.0);
        let fit = fit_center(&img, 10).unwrap();
        assert!(!fit.degenerate);
        assert!((fit.center[0] - 32.0).abs() < 0.5, "{:?}", fit.center);
        assert!((fit.center[1] - 32.0).abs() < 0.5, "{:?}", fit.center);
    }

    #[test]
    fn shift_equivariance() {
        let base = fit_center(&dark_blob(64, 32.0, 32.0, 4.0), 10).unwrap();
        let moved = fit_center(&dark_blob(64, 39.0, 27.0, 4.0), 10).unwrap();
        assert!((moved.center[0] - base.center[0] - 7.0).abs() < 1.0);
        assert!((moved.center[1] - base.center[1] + 5.0).abs() < 1.0);
    }

    #[test]
    fn constant_image_is_degenerate() {
        let img = Image::from_vec(16, vec![0.7; 256]);
        let fit = fit_center(&img, 5).unwrap();
        assert!(fit.degenerate);
        assert_eq!(fit.center, [8.0, 8.0]);
        let (stack, shifts) = center_stack(&[img.clone()], 5).unwrap();
        assert_eq!(shifts[0], [0.0, 0.0]);
        assert_eq!(stack[0].as_slice(), img.as_slice());
    }

    #[test]
    fn loglik_monotone_on_noisy_blob() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut img = dark_blob(64, 28.0, 36.0, 5.0);
        for v in 0..64 * 64 {
            let (x, y) = (v / 64, v % 64);
            *img.at_mut(x, y) += 0.3 * (rng.gen::<f64>() - 0.5);
        }
        let fit = fit_center(&img, 10).unwrap();
        assert_eq!(fit.loglik.len(), 10);
        for w in fit.loglik.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn center_stack_undoes_uniform_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let imgs: Vec<Image<f64>> = (0..8)
            .map(|_| {
                let jx = 0.4 * (rng.gen::<f64>() - 0.5);
                let jy = 0.4 * (rng.gen::<f64>() - 0.5);
                dark_blob(64, 42.0 + jx, 32.0 + jy, 4.0)
            })
            .collect();
        let (_, shifts) = center_stack(&imgs, 10).unwrap();
        let n = shifts.len() as f64;
        let mx: f64 = shifts.iter().map(|s| s[0]).sum::<f64>() / n;
        let my: f64 = shifts.iter().map(|s| s[1]).sum::<f64>() / n;
        // content sits 10 px below frame center in rows; the applied shift
        // moves it back up
        assert!((mx + 10.0).abs() < 1.0, "mean shift {mx},{my}");
        assert!(my.abs() < 1.0, "mean shift {mx},{my}");
    }

    #[test]
    fn centered_stack_has_small_shifts() {
        let imgs: Vec<Image<f64>> = (0..4)
            .map(|i| dark_blob(64, 32.0 + 0.2 * i as f64, 32.0, 4.0))
            .collect();
        let (_, shifts) = center_stack(&imgs, 10).unwrap();
        for s in &shifts {
            assert!(s[0].hypot(s[1]) <= 1.0, "{s:?}");
        }
    }

    #[test]
    fn idempotent_up_to_a_pixel() {
        let imgs = vec![dark_blob(64, 40.0, 26.0, 4.0)];
        let (once, _) = center_stack(&imgs, 10).unwrap();
        let (_, again) = center_stack(&once, 10).unwrap();
        assert!(again[0][0].hypot(again[0][1]) <= 1.0, "{:?}", again[0]);
    }

    #[test]
    fn zero_iterations_rejected() {
        assert!(fit_center(&dark_blob(32, 16.0, 16.0, 3.0), 0).is_err());
    }
}
