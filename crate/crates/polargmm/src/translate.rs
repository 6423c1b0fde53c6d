//! Translation operators on coefficient vectors and the rotation/translation
//! search grids.
//!
//! Translation does not commute with the steerable basis, so shifting a
//! coefficient vector is done either the slow exact way (complex decode,
//! bilinear pixel shift, re-encode: `O(m L^2)`) or through a precomputed
//! affine operator `T_t(z) = Psi_t z + mu_t` (`O(m^2)`), where
//! `Psi_t[j][j'] = <Psi_j, T_t Psi_j'>` and `mu_t[j] = <Psi_j, T_t mu - mu>`.
//! The two are algebraically identical because the shift is linear on pixel
//! planes.

use num_complex::Complex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fbspca::{FbModel, PolarCoeff};
use crate::grid::CGrid;
use crate::scalar::Scalar;

/// Precomputed affine form of the translation by a fixed `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CachedTranslation<T: Scalar> {
    pub t: [T; 2],
    /// Row-major `m x m`.
    pub psi_t: Vec<Complex<T>>,
    pub mu_t: Vec<Complex<T>>,
}

/// Ring-structured translation search grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationGrid<T: Scalar> {
    pub radius: T,
    pub n_r: usize,
    /// Origin first, then ring points (rounded to pixels, deduplicated).
    pub points: Vec<[T; 2]>,
    /// Point count of each ring before deduplication.
    pub ring_sizes: Vec<usize>,
}

/// Equally spaced rotation search grid with a random common offset.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationGrid<T: Scalar> {
    pub n_alpha: usize,
    pub alpha0: T,
    pub angles: Vec<T>,
}

/// Exact translation: complex decode, bilinear shift with zero fill,
/// re-encode against the image-space components.
pub fn translate_vanilla<T: Scalar>(
    model: &FbModel<T>,
    z: &PolarCoeff<T>,
    t: [T; 2],
) -> Result<PolarCoeff<T>> {
    Ok(PolarCoeff::from_complex(&translate_vanilla_complex(
        model,
        &z.to_complex(),
        t,
    )?))
}

/// Complex-vector version of [`translate_vanilla`].
pub fn translate_vanilla_complex<T: Scalar>(
    model: &FbModel<T>,
    z: &[Complex<T>],
    t: [T; 2],
) -> Result<Vec<Complex<T>>> {
    let plane = model.decode_complex(z)?;
    let shifted = plane.shift(t);
    // subtract the (unshifted) mean and re-encode in image space
    let mut centered = shifted;
    for (p, &mu) in centered
        .as_mut_slice()
        .iter_mut()
        .zip(model.mean_image.as_slice())
    {
        *p -= Complex::new(mu, T::zero());
    }
    Ok(model
        .psi_image
        .iter()
        .map(|psi| psi.inner(&centered))
        .collect())
}

/// Precompute the affine operator for a fixed shift.
pub fn build_cache<T: Scalar>(model: &FbModel<T>, t: [T; 2]) -> CachedTranslation<T> {
    let m = model.m;
    let shifted: Vec<CGrid<T>> = model
        .psi_image
        .par_iter()
        .map(|psi| psi.shift(t))
        .collect();
    let mut psi_t = vec![Complex::new(T::zero(), T::zero()); m * m];
    let rows: Vec<Vec<Complex<T>>> = model
        .psi_image
        .par_iter()
        .map(|psi_j| shifted.iter().map(|s| psi_j.inner(s)).collect())
        .collect();
    for (j, row) in rows.into_iter().enumerate() {
        psi_t[j * m..(j + 1) * m].copy_from_slice(&row);
    }
    let mu_shift = model.mean_image.shift(t);
    let mut mu_diff = CGrid::<T>::zeros(model.spec.image_side);
    for ((d, &s), &mu) in mu_diff
        .as_mut_slice()
        .iter_mut()
        .zip(mu_shift.as_slice())
        .zip(model.mean_image.as_slice())
    {
        *d = Complex::new(s - mu, T::zero());
    }
    let mu_t = model
        .psi_image
        .iter()
        .map(|psi| psi.inner(&mu_diff))
        .collect();
    CachedTranslation { t, psi_t, mu_t }
}

/// Apply a cached translation: `z' = Psi_t z + mu_t`.
pub fn translate_cached<T: Scalar>(
    cache: &CachedTranslation<T>,
    z: &PolarCoeff<T>,
) -> Result<PolarCoeff<T>> {
    Ok(PolarCoeff::from_complex(&translate_cached_complex(
        cache,
        &z.to_complex(),
    )?))
}

/// Complex-vector version of [`translate_cached`].
pub fn translate_cached_complex<T: Scalar>(
    cache: &CachedTranslation<T>,
    z: &[Complex<T>],
) -> Result<Vec<Complex<T>>> {
    let m = cache.mu_t.len();
    if z.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: z.len(),
        });
    }
    let mut out = cache.mu_t.clone();
    for j in 0..m {
        let row = &cache.psi_t[j * m..(j + 1) * m];
        let mut acc = Complex::new(T::zero(), T::zero());
        for (a, b) in row.iter().zip(z) {
            acc += a * b;
        }
        out[j] += acc;
    }
    Ok(out)
}

/// Point count of translation ring `i` (1-based): `floor(pi / asin(0.5/i))`.
///
/// The exact-integer case `i = 1` (`pi / asin(1/2) = 6`) lands just below 6
/// in double precision, so the value is nudged up before the floor.
pub fn ring_point_count(i: usize) -> usize {
    let x = std::f64::consts::PI / (0.5 / i as f64).asin();
    (x + 1e-9).floor() as usize
}

/// Round to the nearest pixel among candidates whose norm stays within
/// `bound`; truncation toward zero is always admissible, so this never
/// fails. Plain nearest-pixel rounding can inflate the norm by up to
/// `sqrt(2)/2`, which would push outer-ring points past the radius limit.
fn round_within<T: Scalar>(exact: [T; 2], bound: T) -> [T; 2] {
    let mut best: Option<([T; 2], T)> = None;
    for cx in [exact[0].floor(), exact[0].ceil()] {
        for cy in [exact[1].floor(), exact[1].ceil()] {
            if cx.hypot(cy) > bound {
                continue;
            }
            let d = (cx - exact[0]).hypot(cy - exact[1]);
            let better = match &best {
                None => true,
                Some((_, bd)) => d < *bd,
            };
            if better {
                best = Some(([cx, cy], d));
            }
        }
    }
    best.map(|(p, _)| p)
        .unwrap_or([exact[0].trunc(), exact[1].trunc()])
}

/// Build the ring translation grid: origin plus `n_r` rings of radius
/// `R * i / n_r`, points rounded to the nearest pixel and deduplicated.
pub fn make_translation_grid<T: Scalar>(radius: T, n_r: usize) -> TranslationGrid<T> {
    let mut points: Vec<[T; 2]> = vec![[T::zero(), T::zero()]];
    let mut ring_sizes = Vec::with_capacity(n_r);
    if radius > T::zero() && n_r > 0 {
        for i in 1..=n_r {
            let count = ring_point_count(i);
            ring_sizes.push(count);
            let rad = radius * T::from_usize(i).unwrap() / T::from_usize(n_r).unwrap();
            for j in 0..count {
                let th = T::two_pi() * T::from_usize(j).unwrap() / T::from_usize(count).unwrap();
                let exact = [rad * th.cos(), rad * th.sin()];
                let p = round_within(exact, radius + T::lit(0.5));
                if !points.contains(&p) {
                    points.push(p);
                }
            }
        }
    }
    TranslationGrid {
        radius,
        n_r,
        points,
        ring_sizes,
    }
}

/// Equally spaced rotation grid with a seeded uniform offset.
pub fn make_rotation_grid<T: Scalar>(n_alpha: usize, rng_seed: u64) -> RotationGrid<T> {
    assert!(n_alpha >= 1, "n_alpha must be >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let alpha0 = T::lit(rng.gen::<f64>()) * T::two_pi();
    rotation_grid_with_offset(n_alpha, alpha0)
}

/// Rotation grid at an explicit offset (the pipeline draws the offset from
/// its own iteration stream).
pub fn rotation_grid_with_offset<T: Scalar>(n_alpha: usize, alpha0: T) -> RotationGrid<T> {
    let angles = (0..n_alpha)
        .map(|k| T::two_pi() * T::from_usize(k).unwrap() / T::from_usize(n_alpha).unwrap() + alpha0)
        .collect();
    RotationGrid {
        n_alpha,
        alpha0,
        angles,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{bump_image, small_model, small_model_with_mean};
    use approx::assert_relative_eq;

    fn random_z(m: usize, seed: u64) -> Vec<Complex<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m)
            .map(|_| Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect()
    }

    #[test]
    fn vanilla_zero_shift_is_identity() {
        let model = small_model_with_mean(32, 20, 1);
        let z = random_z(20, 5);
        let out = translate_vanilla_complex(&model, &z, [0.0, 0.0]).unwrap();
        for (a, b) in out.iter().zip(&z) {
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn vanilla_integer_shift_matches_pixel_shift() {
        let model = small_model(32, 20, 2);
        // in-span image: decode of a hermitian-symmetric z
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut z = vec![Complex::new(0.0, 0.0); model.m];
        let mut i = 0;
        while i < model.m {
            let c = Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            if model.omega[i] == 0 {
                z[i] = Complex::new(c.re, 0.0);
                i += 1;
            } else {
                z[i] = c;
                z[i + 1] = c.conj();
                i += 2;
            }
        }
        let img = model.decode(&PolarCoeff::from_complex(&z)).unwrap();
        let t = [3.0, -2.0];
        let via_pixels = model.encode_complex(&img.shift(t)).unwrap();
        let via_op = translate_vanilla_complex(&model, &z, t).unwrap();
        for (a, b) in via_pixels.iter().zip(&via_op) {
            assert!((a - b).norm() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn vanilla_round_trip() {
        // natural-spectrum z: band-edge components would be attenuated tens
        // of percent by bilinear resampling, in-span smooth content is not
        let model = small_model(64, 20, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let img = bump_image(64, &mut rng);
        let z = model.encode_complex(&img).unwrap();
        let fwd = translate_vanilla_complex(&model, &z, [1.3, -0.8]).unwrap();
        let back = translate_vanilla_complex(&model, &fwd, [-1.3, 0.8]).unwrap();
        let num: f64 = back
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den: f64 = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        // two fractional bilinear passes each shave a percent or so off the
        // high end of the spectrum; exactness is not expected
        assert!(num / den < 5e-2, "relative round-trip error {}", num / den);
    }

    #[test]
    fn cache_at_origin_is_identity() {
        let model = small_model_with_mean(32, 16, 4);
        let cache = build_cache(&model, [0.0, 0.0]);
        let m = model.m;
        for j in 0..m {
            for jp in 0..m {
                let want = if j == jp { 1.0 } else { 0.0 };
                let got = cache.psi_t[j * m + jp];
                assert!((got.re - want).abs() < 1e-6 && got.im.abs() < 1e-6);
            }
            assert!(cache.mu_t[j].norm() < 1e-6);
        }
    }

    #[test]
    fn cache_is_deterministic() {
        let model = small_model(32, 12, 5);
        let a = build_cache(&model, [2.0, 1.0]);
        let b = build_cache(&model, [2.0, 1.0]);
        assert_eq!(a, b);
    }

    #[test]
    fn cached_matches_vanilla() {
        let model = small_model_with_mean(32, 20, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut worst: f64 = 0.0;
        for trial in 0..100 {
            let z = random_z(model.m, 1000 + trial);
            let ang = rng.gen::<f64>() * std::f64::consts::TAU;
            let rad = rng.gen::<f64>() * 8.0;
            let t = [rad * ang.cos(), rad * ang.sin()];
            let cache = build_cache(&model, t);
            let a = translate_cached_complex(&cache, &z).unwrap();
            let b = translate_vanilla_complex(&model, &z, t).unwrap();
            for (x, y) in a.iter().zip(&b) {
                worst = worst.max((x - y).norm());
            }
        }
        assert!(worst < 1e-6, "max coefficient difference {worst}");
    }

    #[test]
    fn cached_is_affine() {
        let model = small_model(32, 16, 7);
        let cache = build_cache(&model, [2.0, -3.0]);
        let z1 = random_z(model.m, 31);
        let z2 = random_z(model.m, 32);
        let a = 0.3;
        let mix: Vec<Complex<f64>> = z1
            .iter()
            .zip(&z2)
            .map(|(x, y)| x * a + y * (1.0 - a))
            .collect();
        let t_mix = translate_cached_complex(&cache, &mix).unwrap();
        let t1 = translate_cached_complex(&cache, &z1).unwrap();
        let t2 = translate_cached_complex(&cache, &z2).unwrap();
        for i in 0..model.m {
            let want = t1[i] * a + t2[i] * (1.0 - a);
            assert!((t_mix[i] - want).norm() < 1e-10);
        }
    }

    #[test]
    fn operator_deviation_grows_along_ray() {
        // needs a frame large enough that a 12 px shift keeps the disk
        // mostly inside, otherwise the deviation saturates
        let model = small_model(64, 16, 8);
        let m = model.m;
        let fro_dev = |t: [f64; 2]| {
            let cache = build_cache(&model, t);
            let mut acc = 0.0;
            for j in 0..m {
                for jp in 0..m {
                    let idm = if j == jp { 1.0 } else { 0.0 };
                    let d = cache.psi_t[j * m + jp] - Complex::new(idm, 0.0);
                    acc += d.norm_sqr();
                }
            }
            acc.sqrt()
        };
        let d2 = fro_dev([2.0, 0.0]);
        let d6 = fro_dev([6.0, 0.0]);
        let d12 = fro_dev([12.0, 0.0]);
        assert!(d2 < d6 && d6 < d12, "{d2} {d6} {d12}");
    }

    #[test]
    fn deviation_bound_inequality() {
        let model = small_model_with_mean(32, 16, 9);
        let m = model.m;
        for (seed, t) in [(40, [1.0, 2.0]), (41, [-3.0, 0.5]), (42, [5.0, -4.0])] {
            let cache = build_cache(&model, t);
            let z = random_z(m, seed);
            let tz = translate_cached_complex(&cache, &z).unwrap();
            let lhs: f64 = tz
                .iter()
                .zip(&z)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let mut op = 0.0;
            for j in 0..m {
                for jp in 0..m {
                    let idm = if j == jp { 1.0 } else { 0.0 };
                    op += (cache.psi_t[j * m + jp] - Complex::new(idm, 0.0)).norm_sqr();
                }
            }
            let znorm: f64 = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let munorm: f64 = cache.mu_t.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let rhs = op.sqrt() * znorm + munorm;
            assert!(lhs <= rhs + 1e-9, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn ring_counts() {
        assert_eq!(
            (1..=4).map(ring_point_count).collect::<Vec<_>>(),
            vec![6, 12, 18, 25]
        );
    }

    #[test]
    fn grid_structure() {
        let g = make_translation_grid(15.0f64, 4);
        assert_eq!(g.ring_sizes, vec![6, 12, 18, 25]);
        assert_eq!(g.points[0], [0.0, 0.0]);
        // origin + 61 ring points, minus rounding collisions (none at R=15)
        assert_eq!(g.points.len(), 62);
        for p in &g.points {
            assert!(p[0].hypot(p[1]) <= 15.0 + 0.5);
            assert_eq!(p[0], p[0].round());
            assert_eq!(p[1], p[1].round());
        }
    }

    #[test]
    fn degenerate_grids() {
        let g0 = make_translation_grid(0.0f64, 4);
        assert_eq!(g0.points, vec![[0.0, 0.0]]);
        let gn = make_translation_grid(8.0f64, 0);
        assert_eq!(gn.points, vec![[0.0, 0.0]]);
    }

    #[test]
    fn grid_points_unique() {
        for radius in [4.0f64, 8.0, 15.0] {
            let g = make_translation_grid(radius, 4);
            for (i, p) in g.points.iter().enumerate() {
                for q in &g.points[i + 1..] {
                    assert_ne!(p, q);
                }
            }
        }
    }

    #[test]
    fn rotation_grid_spacing() {
        let g = rotation_grid_with_offset(4, 0.0f64);
        let want = [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI, 3.0 * std::f64::consts::FRAC_PI_2];
        for (a, b) in g.angles.iter().zip(want) {
            assert_relative_eq!(a, &b, epsilon = 1e-15);
        }
        let g = make_rotation_grid::<f64>(60, 12);
        let mut sorted: Vec<f64> = g
            .angles
            .iter()
            .map(|a| a.rem_euclid(std::f64::consts::TAU))
            .collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in sorted.windows(2) {
            assert_relative_eq!(w[1] - w[0], std::f64::consts::TAU / 60.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn rotation_grid_coverage_and_reproducibility() {
        let g1 = make_rotation_grid::<f64>(60, 7);
        let g2 = make_rotation_grid::<f64>(60, 7);
        assert_eq!(g1.alpha0, g2.alpha0);
        // any target angle is within pi/n_alpha of some grid angle
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let target = rng.gen::<f64>() * std::f64::consts::TAU;
            let best = g1
                .angles
                .iter()
                .map(|a| {
                    let mut d = (a - target).rem_euclid(std::f64::consts::TAU);
                    if d > std::f64::consts::PI {
                        d = std::f64::consts::TAU - d;
                    }
                    d
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best <= std::f64::consts::PI / 60.0 + 1e-12);
        }
    }

    #[test]
    fn cached_rejects_dimension_mismatch() {
        let model = small_model(32, 12, 10);
        let cache = build_cache(&model, [1.0, 1.0]);
        let z = random_z(5, 50);
        assert!(matches!(
            translate_cached_complex(&cache, &z),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bump_helper_is_smooth_enough_to_encode() {
        // sanity anchor for the shared helper: most bump energy is in-span
        let model = small_model(32, 30, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        let img = bump_image(32, &mut rng);
        let z = model.encode(&img).unwrap();
        let rec = model.decode(&z).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        let mean = img.mean();
        for (a, b) in rec.as_slice().iter().zip(img.as_slice()) {
            num += (a - b) * (a - b);
            den += (b - mean) * (b - mean);
        }
        assert!(num.sqrt() / den.sqrt() < 0.6);
    }
}
