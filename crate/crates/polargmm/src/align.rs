//! Per-sample search for the best rotation and translation over the random
//! rotation grid and the cached translation grid.
//!
//! The search direction follows the mixture geometry rather than the sample:
//! for a pose hypothesis (alpha, t) the cluster centers are carried to the
//! sample by `nu = T_{-t} R_{-alpha} mu_c` and the sample is scored against
//! `nu` under the cluster's deviations. Scoring fixed samples against moving
//! centers keeps the (dominant) noise term of the sample identical across
//! all hypotheses; shifting the sample instead re-attenuates its noise
//! differently per candidate translation, which at low SNR lets the argmax
//! lock onto noise. The chosen pose is then applied sample-side
//! (`R_alpha T_t z`) when samples are materialized for the EM update.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::Result;
use crate::fbspca::{rotate, FbModel, PolarCoeff};
use crate::gmm::{cluster_logpdf, logsumexp, MixtureParams};
use crate::scalar::{wrap_angle, Scalar};
use crate::translate::{
    build_cache, translate_cached, CachedTranslation, RotationGrid, TranslationGrid,
};

/// Best pose found for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseEstimate<T: Scalar> {
    /// Aligning rotation, radians in [0, 2pi).
    pub alpha: T,
    /// Aligning translation: a grid point (pixels).
    pub t: [T; 2],
    /// Index of `t` in the translation grid.
    pub t_index: usize,
    /// Log mixture density of the aligned sample at the chosen pose.
    pub score: T,
    /// Argmax cluster at the chosen pose.
    pub cluster_hint: usize,
}

/// Cached operators for every grid translation, in both directions: forward
/// (`T_{+t}`, applied to samples) and backward (`T_{-t}`, applied to cluster
/// centers during the search).
pub struct TranslationSearch<T: Scalar> {
    pub grid: TranslationGrid<T>,
    pub forward: Vec<CachedTranslation<T>>,
    pub backward: Vec<CachedTranslation<T>>,
}

/// Precomputes both cache families for a grid.
pub fn build_search<T: Scalar>(model: &FbModel<T>, grid: TranslationGrid<T>) -> TranslationSearch<T> {
    let forward: Vec<CachedTranslation<T>> = grid
        .points
        .par_iter()
        .map(|&t| build_cache(model, t))
        .collect();
    let backward: Vec<CachedTranslation<T>> = grid
        .points
        .par_iter()
        .map(|&t| build_cache(model, [-t[0], -t[1]]))
        .collect();
    TranslationSearch {
        grid,
        forward,
        backward,
    }
}

/// Centers carried to every pose hypothesis: `centers[ti][ai][c]` is
/// `T_{-t} R_{-alpha} mu_c` in polar form.
pub(crate) struct PoseCandidates<T: Scalar> {
    pub centers: Vec<Vec<Vec<PolarCoeff<T>>>>,
    pub angles: Vec<T>,
}

pub(crate) fn build_candidates<T: Scalar>(
    theta: &MixtureParams<T>,
    search: &TranslationSearch<T>,
    rot: &RotationGrid<T>,
    omega: &[i64],
) -> Result<PoseCandidates<T>> {
    let mu_complex: Vec<Vec<Complex<T>>> = theta
        .clusters
        .iter()
        .map(|c| c.center().to_complex())
        .collect();
    let centers: Vec<Vec<Vec<PolarCoeff<T>>>> = search
        .backward
        .par_iter()
        .map(|cache| {
            rot.angles
                .iter()
                .map(|&a| {
                    mu_complex
                        .iter()
                        .map(|mu| {
                            let rotated: Vec<Complex<T>> = mu
                                .iter()
                                .zip(omega)
                                .map(|(&z, &w)| {
                                    let phase = -a * T::from_i64(w).unwrap();
                                    z * Complex::new(phase.cos(), phase.sin())
                                })
                                .collect();
                            let moved =
                                crate::translate::translate_cached_complex(cache, &rotated)?;
                            Ok(PolarCoeff::from_complex(&moved))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PoseCandidates {
        centers,
        angles: rot.angles.clone(),
    })
}

/// Mixture log density of `sample` against one pose's carried centers, using
/// each cluster's own deviations and weight.
///
/// The pose-independent parts (weights, normalizers, inverse deviations) are
/// hoisted into [`ClusterConsts`] since the search revisits every cluster
/// thousands of times per sample.
pub(crate) struct ClusterConsts<T> {
    /// `ln pi_c` plus the cluster's log normalizer.
    log_const: Vec<T>,
    inv_sigma_r: Vec<Vec<T>>,
    inv_sigma_phi: Vec<Vec<T>>,
}

pub(crate) fn cluster_consts<T: Scalar>(theta: &MixtureParams<T>) -> ClusterConsts<T> {
    let log_const = theta
        .pi
        .iter()
        .zip(&theta.clusters)
        .map(|(&pi, cl)| {
            let log_norm: T = cl
                .sigma_r
                .iter()
                .zip(&cl.sigma_phi)
                .map(|(&sr, &sp)| sr.ln() + sp.ln())
                .sum();
            let m = T::from_usize(cl.dim()).unwrap();
            pi.ln() - log_norm - m * T::lit(std::f64::consts::TAU).ln()
        })
        .collect();
    let inv = |v: &[T]| v.iter().map(|&s| T::one() / s).collect::<Vec<T>>();
    ClusterConsts {
        log_const,
        inv_sigma_r: theta.clusters.iter().map(|c| inv(&c.sigma_r)).collect(),
        inv_sigma_phi: theta.clusters.iter().map(|c| inv(&c.sigma_phi)).collect(),
    }
}

fn pose_objective_with<T: Scalar>(
    sample: &PolarCoeff<T>,
    consts: &ClusterConsts<T>,
    centers: &[PolarCoeff<T>],
    scratch: &mut Vec<T>,
) -> (T, usize) {
    scratch.clear();
    for (c, nu) in centers.iter().enumerate() {
        let inv_r = &consts.inv_sigma_r[c];
        let inv_phi = &consts.inv_sigma_phi[c];
        let mut quad = T::zero();
        for j in 0..sample.len() {
            let dr = (sample.r[j] - nu.r[j]) * inv_r[j];
            let dp = wrap_angle(sample.phi[j] - nu.phi[j]) * inv_phi[j];
            quad += dr * dr + dp * dp;
        }
        scratch.push(consts.log_const[c] - T::lit(0.5) * quad);
    }
    let total = logsumexp(scratch);
    let hint = scratch
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map_or(0, |(i, _)| i);
    (total, hint)
}

/// Mixture log-density of `sample` against one pose's candidate centers,
/// plus the index of the best-explaining cluster.
#[cfg(test)]
pub(crate) fn pose_objective<T: Scalar>(
    sample: &PolarCoeff<T>,
    theta: &MixtureParams<T>,
    centers: &[PolarCoeff<T>],
) -> (T, usize) {
    pose_objective_with(sample, &cluster_consts(theta), centers, &mut Vec::new())
}

fn norm_sq<T: Scalar>(t: [T; 2]) -> T {
    t[0] * t[0] + t[1] * t[1]
}

fn align_one<T: Scalar>(
    z: &PolarCoeff<T>,
    theta: &MixtureParams<T>,
    consts: &ClusterConsts<T>,
    search: &TranslationSearch<T>,
    cands: &PoseCandidates<T>,
    omega: &[i64],
) -> Result<PoseEstimate<T>> {
    let mut best_obj = T::lit(f64::NEG_INFINITY);
    let mut best = (0usize, 0usize); // (t index, angle index)
    let mut scratch = Vec::new();
    for (ti, per_angle) in cands.centers.iter().enumerate() {
        for (ai, centers) in per_angle.iter().enumerate() {
            let (obj, _) = pose_objective_with(z, consts, centers, &mut scratch);
            let better = if obj > best_obj {
                true
            } else if obj == best_obj {
                // ties prefer the smallest motion, then the smallest angle
                let t_new = norm_sq(search.grid.points[ti]);
                let t_old = norm_sq(search.grid.points[best.0]);
                t_new < t_old || (t_new == t_old && ai < best.1)
            } else {
                false
            };
            if better {
                best_obj = obj;
                best = (ti, ai);
            }
        }
    }
    let (ti, ai) = best;
    let alpha = {
        let a = cands.angles[ai];
        // report in [0, 2pi)
        let tau = T::lit(std::f64::consts::TAU);
        let mut a = a % tau;
        if a < T::zero() {
            a += tau;
        }
        a
    };
    // the reported score is the mixture density of the sample actually moved
    // to the chosen pose
    let shifted = translate_cached(&search.forward[ti], z)?;
    let aligned = rotate(&shifted, alpha, omega)?;
    let scores: Vec<T> = theta
        .pi
        .iter()
        .zip(&theta.clusters)
        .map(|(&pi, cl)| pi.ln() + cluster_logpdf(&aligned, cl))
        .collect();
    let score = logsumexp(&scores);
    let cluster_hint = scores
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map_or(0, |(i, _)| i);
    Ok(PoseEstimate {
        alpha,
        t: search.grid.points[ti],
        t_index: ti,
        score,
        cluster_hint,
    })
}

/// Searches the full product grid for one sample.
pub fn align_sample<T: Scalar>(
    z: &PolarCoeff<T>,
    theta: &MixtureParams<T>,
    rot: &RotationGrid<T>,
    search: &TranslationSearch<T>,
    omega: &[i64],
) -> Result<PoseEstimate<T>> {
    let cands = build_candidates(theta, search, rot, omega)?;
    align_one(z, theta, &cluster_consts(theta), search, &cands, omega)
}

/// Aligns a batch against a shared rotation grid; the pose candidates are
/// built once and the per-sample searches run in parallel.
pub fn align_batch<T: Scalar>(
    samples: &[PolarCoeff<T>],
    theta: &MixtureParams<T>,
    rot: &RotationGrid<T>,
    search: &TranslationSearch<T>,
    omega: &[i64],
) -> Result<Vec<PoseEstimate<T>>> {
    let cands = build_candidates(theta, search, rot, omega)?;
    let consts = cluster_consts(theta);
    samples
        .par_iter()
        .map(|z| align_one(z, theta, &consts, search, &cands, omega))
        .collect()
}

/// Applies an estimated pose to a sample: `R_alpha T_t z`.
pub fn apply_pose<T: Scalar>(
    z: &PolarCoeff<T>,
    pose: &PoseEstimate<T>,
    search: &TranslationSearch<T>,
    omega: &[i64],
) -> Result<PolarCoeff<T>> {
    let shifted = translate_cached(&search.forward[pose.t_index], z)?;
    rotate(&shifted, pose.alpha, omega)
}
