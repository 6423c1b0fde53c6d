//! Labeled synthetic datasets: procedural band-limited templates (or
//! orthographic projections of voxel phantoms), random in-plane rotation,
//! random disk translation, and i.i.d. Gaussian pixel noise at a prescribed
//! SNR, with full ground truth.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::{fhat, ifhat_real};
use crate::grid::Image;
use crate::scalar::Scalar;

/// How clean templates are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateKind {
    /// Sums of 4-8 dark anisotropic Gaussian bumps inside the particle disk.
    ProceduralBlobs,
    /// Orthographic z-projection of a random 3D Gaussian-blob voxel phantom.
    VoxelPhantom,
}

/// Full description of a synthetic dataset.
#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub image_side: usize,
    pub n_clusters: usize,
    pub per_cluster: usize,
    /// Clean-frame pixel variance over noise variance; `f64::INFINITY`
    /// disables noise.
    pub snr: f64,
    /// Uniform-disk translation radius in pixels; 0 disables translation.
    pub max_shift: f64,
    pub seed: u64,
    pub template_kind: TemplateKind,
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.image_side < 8 {
            return Err(Error::invalid("image side must be at least 8"));
        }
        if self.n_clusters == 0 || self.per_cluster == 0 {
            return Err(Error::invalid("need at least one cluster and one image"));
        }
        if !(self.snr > 0.0) {
            return Err(Error::invalid("snr must be positive"));
        }
        if self.max_shift < 0.0 || self.max_shift >= self.image_side as f64 / 4.0 {
            return Err(Error::invalid("max_shift must lie in [0, L/4)"));
        }
        Ok(())
    }
}

/// Per-image ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth<T: Scalar> {
    pub label: usize,
    /// Planted rotation, radians in [-pi, pi).
    pub alpha_true: T,
    /// Planted translation, pixels, norm <= max_shift.
    pub t_true: [T; 2],
}

const PARTICLE_RADIUS_RATIO: f64 = 0.6;
const BAND_LIMIT: f64 = PARTICLE_RADIUS_RATIO * 0.5;
const MAX_TEMPLATE_CORRELATION: f64 = 0.97;
const TEMPLATE_RETRIES: u64 = 10;

fn band_limit_and_normalize<T: Scalar>(img: &Image<T>) -> Image<T> {
    let side = img.side();
    let mut g = fhat(img);
    let c = side as f64 / 2.0;
    for x in 0..side {
        for y in 0..side {
            let fx = (x as f64 - c.floor()) / side as f64;
            let fy = (y as f64 - c.floor()) / side as f64;
            if (fx * fx + fy * fy).sqrt() > BAND_LIMIT {
                *g.at_mut(x, y) = num_complex::Complex::new(T::zero(), T::zero());
            }
        }
    }
    let img = ifhat_real(&g);
    let mean = img.mean();
    let std = img.variance().sqrt();
    img.map(|v| (*v - mean) / std)
}

fn procedural_template<T: Scalar>(side: usize, rng: &mut ChaCha8Rng) -> Image<T> {
    let c0 = side as f64 / 2.0;
    let mut img = Image::<T>::zeros(side);
    let n_bumps = rng.gen_range(4..9);
    for _ in 0..n_bumps {
        let ang = rng.gen::<f64>() * std::f64::consts::TAU;
        let rad = rng.gen::<f64>() * 0.7 * PARTICLE_RADIUS_RATIO * c0;
        let (bx, by) = (c0 + rad * ang.cos(), c0 + rad * ang.sin());
        let sx = 1.5 + 3.5 * rng.gen::<f64>();
        let sy = 1.5 + 3.5 * rng.gen::<f64>();
        let th = rng.gen::<f64>() * std::f64::consts::PI;
        let amp = -(0.5 + 0.5 * rng.gen::<f64>()); // dark bumps
        let (sin_t, cos_t) = th.sin_cos();
        for x in 0..side {
            for y in 0..side {
                let dx = x as f64 - bx;
                let dy = y as f64 - by;
                let xr = (cos_t * dx + sin_t * dy) / sx;
                let yr = (-sin_t * dx + cos_t * dy) / sy;
                let v = amp * (-0.5 * (xr * xr + yr * yr)).exp();
                *img.at_mut(x, y) += T::lit(v);
            }
        }
    }
    img
}

fn voxel_phantom_template<T: Scalar>(side: usize, rng: &mut ChaCha8Rng) -> Image<T> {
    // coarse voxel grid, filled with dark 3D blobs, projected along z
    let vox = side / 2;
    let c0 = vox as f64 / 2.0;
    let mut volume = vec![0.0f64; vox * vox * vox];
    let n_blobs = rng.gen_range(4..9);
    for _ in 0..n_blobs {
        let mut pos = [0.0f64; 3];
        for p in pos.iter_mut() {
            *p = c0 + (rng.gen::<f64>() - 0.5) * 0.7 * PARTICLE_RADIUS_RATIO * vox as f64;
        }
        let s: Vec<f64> = (0..3).map(|_| 1.0 + 2.0 * rng.gen::<f64>()).collect();
        let amp = -(0.5 + 0.5 * rng.gen::<f64>());
        for x in 0..vox {
            for y in 0..vox {
                for z in 0..vox {
                    let dx = (x as f64 - pos[0]) / s[0];
                    let dy = (y as f64 - pos[1]) / s[1];
                    let dz = (z as f64 - pos[2]) / s[2];
                    volume[(x * vox + y) * vox + z] +=
                        amp * (-0.5 * (dx * dx + dy * dy + dz * dz)).exp();
                }
            }
        }
    }
    // orthographic projection, upsampled to the image frame bilinearly
    let mut proj = Image::<T>::zeros(vox);
    for x in 0..vox {
        for y in 0..vox {
            let s: f64 = (0..vox).map(|z| volume[(x * vox + y) * vox + z]).sum();
            *proj.at_mut(x, y) = T::lit(s);
        }
    }
    let scale = vox as f64 / side as f64;
    let mut img = Image::<T>::zeros(side);
    for x in 0..side {
        for y in 0..side {
            *img.at_mut(x, y) = proj.sample_bilinear(
                T::lit(x as f64 * scale),
                T::lit(y as f64 * scale),
            );
        }
    }
    img
}

/// Shifts a raw template (zero background, negative blobs) so the centroid
/// of its dark mass sits on the rotation center `side / 2`.
///
/// Uncentered templates make the translation error ill-posed: the content
/// offset re-enters every rendered image rotated by that image's angle, so
/// even a perfect aligner reports rotation-dependent translations.
fn center_template<T: Scalar>(img: &Image<T>) -> Image<T> {
    let side = img.side();
    let mut wsum = T::zero();
    let mut cx = T::zero();
    let mut cy = T::zero();
    for x in 0..side {
        for y in 0..side {
            let w = -*img.at(x, y);
            wsum += w;
            cx += w * T::from_usize(x).unwrap();
            cy += w * T::from_usize(y).unwrap();
        }
    }
    if wsum <= T::lit(1e-12) {
        return img.clone();
    }
    let c = T::from_usize(side).unwrap() / T::lit(2.0);
    img.shift([c - cx / wsum, c - cy / wsum])
}

/// Highest normalized cross-correlation between `a` and any rotation of `b`,
/// scanned at `step_deg` degree increments.
pub fn max_rotation_correlation<T: Scalar>(a: &Image<T>, b: &Image<T>, step_deg: f64) -> T {
    let norm_a = a.as_slice().iter().map(|&v| v * v).sum::<T>().sqrt();
    let steps = (360.0 / step_deg).round() as usize;
    let mut best = T::lit(-2.0);
    for k in 0..steps {
        let alpha = T::lit(k as f64 * step_deg * std::f64::consts::PI / 180.0);
        let rb = b.rotate(alpha);
        let norm_b = rb.as_slice().iter().map(|&v| v * v).sum::<T>().sqrt();
        let dot = a
            .as_slice()
            .iter()
            .zip(rb.as_slice())
            .map(|(&x, &y)| x * y)
            .sum::<T>();
        let corr = dot / (norm_a * norm_b);
        if corr > best {
            best = corr;
        }
    }
    best
}

/// Builds `n_clusters` distinct, asymmetric, band-limited, unit-variance
/// templates; the seed advances on a failed distinctness check, up to 10
/// times.
pub fn make_templates<T: Scalar>(spec: &DatasetSpec) -> Result<Vec<Image<T>>> {
    spec.validate()?;
    'attempt: for attempt in 0..TEMPLATE_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(attempt));
        let temps: Vec<Image<T>> = (0..spec.n_clusters)
            .map(|_| {
                let raw = match spec.template_kind {
                    TemplateKind::ProceduralBlobs => procedural_template(spec.image_side, &mut rng),
                    TemplateKind::VoxelPhantom => voxel_phantom_template(spec.image_side, &mut rng),
                };
                band_limit_and_normalize(&center_template(&raw))
            })
            .collect();
        for i in 0..temps.len() {
            for j in i + 1..temps.len() {
                let corr = max_rotation_correlation(&temps[i], &temps[j], 2.0);
                if corr.as_f64() > MAX_TEMPLATE_CORRELATION {
                    continue 'attempt;
                }
            }
        }
        return Ok(temps);
    }
    Err(Error::invalid(
        "could not build sufficiently distinct templates in 10 attempts",
    ))
}

/// Independent per-image random stream: one keyed ChaCha8 generator per
/// (dataset seed, image index), so parallel and serial renders agree bitwise.
fn image_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + index as u64);
    rng
}

/// Renders the full stack: exactly `per_cluster` images per label, each a
/// rotated/translated template (single composed bilinear warp) plus Gaussian
/// noise with variance `1/snr`.
pub fn render_dataset<T: Scalar>(
    spec: &DatasetSpec,
) -> Result<(Vec<Image<T>>, Vec<GroundTruth<T>>)> {
    let templates = make_templates::<T>(spec)?;
    let n = spec.n_clusters * spec.per_cluster;
    let noise_sigma = if spec.snr.is_finite() {
        (1.0 / spec.snr).sqrt()
    } else {
        0.0
    };
    let rendered: Vec<(Image<T>, GroundTruth<T>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let label = i / spec.per_cluster;
            let mut rng = image_rng(spec.seed, i);
            let alpha = std::f64::consts::PI * (2.0 * rng.gen::<f64>() - 1.0);
            let t = if spec.max_shift > 0.0 {
                loop {
                    let tx = spec.max_shift * (2.0 * rng.gen::<f64>() - 1.0);
                    let ty = spec.max_shift * (2.0 * rng.gen::<f64>() - 1.0);
                    if tx.hypot(ty) <= spec.max_shift {
                        break [tx, ty];
                    }
                }
            } else {
                [0.0, 0.0]
            };
            let mut img = templates[label].warp(T::lit(alpha), [T::lit(t[0]), T::lit(t[1])]);
            if noise_sigma > 0.0 {
                for v in img.data_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *v += T::lit(noise_sigma * z);
                }
            }
            (
                img,
                GroundTruth {
                    label,
                    alpha_true: T::lit(alpha),
                    t_true: [T::lit(t[0]), T::lit(t[1])],
                },
            )
        })
        .collect();
    let mut stack = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    for (img, gt) in rendered {
        stack.push(img);
        truth.push(gt);
    }
    Ok((stack, truth))
}
