//! Polar-coordinate Gaussian mixture over coefficient magnitudes and phases,
//! fit by EM: linear statistics on `r`, circular statistics on `phi`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fbspca::PolarCoeff;
use crate::scalar::{wrap_angle, Scalar};

/// Per-cluster polar Gaussian parameters, one entry per coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterParams<T: Scalar> {
    pub mu_r: Vec<T>,
    pub mu_phi: Vec<T>,
    pub sigma_r: Vec<T>,
    pub sigma_phi: Vec<T>,
}

impl<T: Scalar> ClusterParams<T> {
    pub fn dim(&self) -> usize {
        self.mu_r.len()
    }

    /// The cluster center as a complex coefficient vector.
    pub fn center(&self) -> PolarCoeff<T> {
        PolarCoeff {
            r: self.mu_r.clone(),
            phi: self.mu_phi.clone(),
        }
    }
}

/// Full mixture: simplex weights plus cluster parameter blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams<T: Scalar> {
    pub pi: Vec<T>,
    pub clusters: Vec<ClusterParams<T>>,
}

impl<T: Scalar> MixtureParams<T> {
    pub fn n_clusters(&self) -> usize {
        self.pi.len()
    }

    pub fn dim(&self) -> usize {
        self.clusters.first().map_or(0, ClusterParams::dim)
    }
}

/// Row-stochastic responsibility matrix (samples x clusters).
#[derive(Debug, Clone)]
pub struct Responsibilities<T: Scalar> {
    pub w: Vec<T>,
    pub n_samples: usize,
    pub n_clusters: usize,
    /// Rows whose every cluster density underflowed; such rows fall back to
    /// a uniform assignment.
    pub underflow_rows: usize,
}

impl<T: Scalar> Responsibilities<T> {
    pub fn row(&self, i: usize) -> &[T] {
        &self.w[i * self.n_clusters..(i + 1) * self.n_clusters]
    }
}

/// Lower bounds keeping cluster deviations away from zero.
#[derive(Debug, Clone, Copy)]
pub struct SigmaFloors<T: Scalar> {
    pub r: T,
    pub phi: T,
}

/// Floors derived from the data scale: `1e-4 * median(r)` on magnitudes and
/// a fixed `1e-3` radian on phases.
pub fn sigma_floors<T: Scalar>(samples: &[PolarCoeff<T>]) -> SigmaFloors<T> {
    let mut all_r: Vec<T> = samples.iter().flat_map(|s| s.r.iter().copied()).collect();
    let median = if all_r.is_empty() {
        T::one()
    } else {
        all_r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all_r[all_r.len() / 2]
    };
    SigmaFloors {
        r: T::lit(1e-4) * median,
        phi: T::lit(1e-3),
    }
}

/// Log density of one sample under one cluster, with the full product of 1D
/// Gaussian normalizers (the phase coordinate's wrapped-Gaussian correction
/// is negligible at small `sigma_phi` and deliberately omitted).
pub fn cluster_logpdf<T: Scalar>(sample: &PolarCoeff<T>, m: &ClusterParams<T>) -> T {
    debug_assert_eq!(sample.len(), m.dim());
    let mut quad = T::zero();
    let mut log_norm = T::zero();
    for j in 0..m.dim() {
        let dr = (sample.r[j] - m.mu_r[j]) / m.sigma_r[j];
        let dp = wrap_angle(sample.phi[j] - m.mu_phi[j]) / m.sigma_phi[j];
        quad += dr * dr + dp * dp;
        log_norm += m.sigma_r[j].ln() + m.sigma_phi[j].ln();
    }
    let m_count = T::from_usize(m.dim()).unwrap();
    -T::lit(0.5) * quad - log_norm - m_count * T::lit(std::f64::consts::TAU).ln()
}

fn weighted_logpdfs<T: Scalar>(sample: &PolarCoeff<T>, theta: &MixtureParams<T>) -> Vec<T> {
    theta
        .pi
        .iter()
        .zip(&theta.clusters)
        .map(|(&pi, c)| pi.ln() + cluster_logpdf(sample, c))
        .collect()
}

/// Log of the mixture density at one sample.
pub fn mixture_logpdf<T: Scalar>(sample: &PolarCoeff<T>, theta: &MixtureParams<T>) -> T {
    logsumexp(&weighted_logpdfs(sample, theta))
}

pub(crate) fn logsumexp<T: Scalar>(vals: &[T]) -> T {
    let hi = vals
        .iter()
        .copied()
        .fold(T::lit(f64::NEG_INFINITY), |a, b| if b > a { b } else { a });
    if !hi.is_finite() {
        return hi;
    }
    let sum: T = vals.iter().map(|&v| (v - hi).exp()).sum();
    hi + sum.ln()
}

/// Total observed-data log-likelihood of a batch.
pub fn batch_loglik<T: Scalar>(samples: &[PolarCoeff<T>], theta: &MixtureParams<T>) -> T {
    samples
        .par_iter()
        .map(|s| mixture_logpdf(s, theta))
        .sum::<T>()
}

/// E-step: posterior cluster responsibilities, computed in log space with
/// max-subtraction.
pub fn e_step<T: Scalar>(
    samples: &[PolarCoeff<T>],
    theta: &MixtureParams<T>,
) -> Result<Responsibilities<T>> {
    if samples.is_empty() {
        return Err(Error::invalid("empty sample batch"));
    }
    let c = theta.n_clusters();
    let rows: Vec<(Vec<T>, bool)> = samples
        .par_iter()
        .map(|s| {
            let mut lp = weighted_logpdfs(s, theta);
            let hi = lp
                .iter()
                .copied()
                .fold(T::lit(f64::NEG_INFINITY), |a, b| if b > a { b } else { a });
            if !hi.is_finite() {
                return (vec![T::one() / T::from_usize(c).unwrap(); c], true);
            }
            let mut sum = T::zero();
            for v in lp.iter_mut() {
                *v = (*v - hi).exp();
                sum += *v;
            }
            for v in lp.iter_mut() {
                *v /= sum;
            }
            (lp, false)
        })
        .collect();
    let underflow_rows = rows.iter().filter(|(_, u)| *u).count();
    let w = rows.into_iter().flat_map(|(r, _)| r).collect();
    Ok(Responsibilities {
        w,
        n_samples: samples.len(),
        n_clusters: c,
        underflow_rows,
    })
}

/// M-step: weighted linear statistics on magnitudes and weighted circular
/// statistics (atan2 of sin/cos sums) on phases; clusters with vanishing
/// total responsibility are reseeded on the worst-explained sample.
pub fn m_step<T: Scalar>(
    samples: &[PolarCoeff<T>],
    w: &Responsibilities<T>,
    floors: SigmaFloors<T>,
) -> Result<MixtureParams<T>> {
    let n = samples.len();
    if n != w.n_samples {
        return Err(Error::DimensionMismatch {
            expected: w.n_samples,
            got: n,
        });
    }
    let c = w.n_clusters;
    let m = samples[0].len();
    let inv_n = T::one() / T::from_usize(n).unwrap();

    let mut pi = Vec::with_capacity(c);
    let mut clusters = Vec::with_capacity(c);
    let mut reseed: Vec<usize> = Vec::new();
    for k in 0..c {
        let total: T = (0..n).map(|i| w.row(i)[k]).sum();
        pi.push(total * inv_n);
        if total < T::lit(1e-8) {
            reseed.push(k);
            clusters.push(ClusterParams {
                mu_r: vec![T::zero(); m],
                mu_phi: vec![T::zero(); m],
                sigma_r: vec![floors.r; m],
                sigma_phi: vec![floors.phi; m],
            });
            continue;
        }
        let inv = T::one() / total;
        let mut mu_r = vec![T::zero(); m];
        let mut sin_sum = vec![T::zero(); m];
        let mut cos_sum = vec![T::zero(); m];
        for (i, s) in samples.iter().enumerate() {
            let wk = w.row(i)[k];
            for j in 0..m {
                mu_r[j] += wk * s.r[j];
                sin_sum[j] += wk * s.phi[j].sin();
                cos_sum[j] += wk * s.phi[j].cos();
            }
        }
        for v in mu_r.iter_mut() {
            *v *= inv;
        }
        let mu_phi: Vec<T> = sin_sum
            .iter()
            .zip(&cos_sum)
            .map(|(&s, &co)| s.atan2(co))
            .collect();
        let mut var_r = vec![T::zero(); m];
        let mut var_phi = vec![T::zero(); m];
        for (i, s) in samples.iter().enumerate() {
            let wk = w.row(i)[k];
            for j in 0..m {
                let dr = s.r[j] - mu_r[j];
                let dp = wrap_angle(s.phi[j] - mu_phi[j]);
                var_r[j] += wk * dr * dr;
                var_phi[j] += wk * dp * dp;
            }
        }
        let sigma_r: Vec<T> = var_r.iter().map(|&v| (v * inv).sqrt().max(floors.r)).collect();
        let sigma_phi: Vec<T> = var_phi
            .iter()
            .map(|&v| (v * inv).sqrt().max(floors.phi))
            .collect();
        clusters.push(ClusterParams {
            mu_r,
            mu_phi,
            sigma_r,
            sigma_phi,
        });
    }

    if !reseed.is_empty() {
        // deterministic rescue: plant each empty cluster on the sample whose
        // best responsibility is lowest (the worst-explained one)
        let mut worst: Vec<(T, usize)> = (0..n)
            .map(|i| {
                let best = w
                    .row(i)
                    .iter()
                    .copied()
                    .fold(T::lit(f64::NEG_INFINITY), |a, b| if b > a { b } else { a });
                (best, i)
            })
            .collect();
        worst.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        // global per-coordinate spread gives the reseeded cluster a wide,
        // data-scaled deviation
        let mut grand_r = vec![T::zero(); m];
        for s in samples {
            for j in 0..m {
                grand_r[j] += s.r[j] * inv_n;
            }
        }
        let mut spread = vec![T::zero(); m];
        for s in samples {
            for j in 0..m {
                let d = s.r[j] - grand_r[j];
                spread[j] += d * d * inv_n;
            }
        }
        for (rank, &k) in reseed.iter().enumerate() {
            let src = &samples[worst[rank.min(n - 1)].1];
            clusters[k].mu_r = src.r.clone();
            clusters[k].mu_phi = src.phi.clone();
            clusters[k].sigma_r = spread.iter().map(|&v| v.sqrt().max(floors.r)).collect();
            clusters[k].sigma_phi = vec![T::lit(0.5); m];
            pi[k] = inv_n;
        }
        let total: T = pi.iter().copied().sum();
        for p in pi.iter_mut() {
            *p /= total;
        }
    }

    Ok(MixtureParams { pi, clusters })
}

/// Alternates E- and M-steps `n_inner` times starting from `theta0`.
pub fn fit_batch<T: Scalar>(
    samples: &[PolarCoeff<T>],
    theta0: &MixtureParams<T>,
    n_inner: usize,
    floors: SigmaFloors<T>,
) -> Result<MixtureParams<T>> {
    let mut theta = theta0.clone();
    for _ in 0..n_inner {
        let w = e_step(samples, &theta)?;
        theta = m_step(samples, &w, floors)?;
    }
    Ok(theta)
}

/// Farthest-point initialization on the embedded features
/// `(r, r cos phi, r sin phi)`: the first center is drawn with the seeded
/// RNG, the rest maximize the distance to all previous centers; samples are
/// then hard-assigned and one M-step produces the starting parameters.
pub fn init_mixture<T: Scalar>(
    samples: &[PolarCoeff<T>],
    n_clusters: usize,
    seed: u64,
    floors: SigmaFloors<T>,
) -> Result<MixtureParams<T>> {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    let n = samples.len();
    if n_clusters == 0 || n < n_clusters {
        return Err(Error::invalid("need at least one sample per cluster"));
    }
    let m = samples[0].len();
    let feats: Vec<Vec<T>> = samples
        .iter()
        .map(|s| {
            let mut f = Vec::with_capacity(3 * m);
            f.extend_from_slice(&s.r);
            f.extend((0..m).map(|j| s.r[j] * s.phi[j].cos()));
            f.extend((0..m).map(|j| s.r[j] * s.phi[j].sin()));
            f
        })
        .collect();
    let dist = |a: &[T], b: &[T]| -> T {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (x - y) * (x - y))
            .sum::<T>()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = vec![rng.gen_range(0..n)];
    let mut best = vec![T::lit(f64::INFINITY); n];
    while centers.len() < n_clusters {
        let last = &feats[*centers.last().unwrap()];
        let mut far = (T::lit(f64::NEG_INFINITY), 0);
        for i in 0..n {
            let d = dist(&feats[i], last);
            if d < best[i] {
                best[i] = d;
            }
            if best[i] > far.0 {
                far = (best[i], i);
            }
        }
        centers.push(far.1);
    }

    let mut w = vec![T::zero(); n * n_clusters];
    for i in 0..n {
        let k = (0..n_clusters)
            .min_by(|&a, &b| {
                dist(&feats[i], &feats[centers[a]])
                    .partial_cmp(&dist(&feats[i], &feats[centers[b]]))
                    .unwrap()
            })
            .unwrap();
        w[i * n_clusters + k] = T::one();
    }
    m_step(
        samples,
        &Responsibilities {
            w,
            n_samples: n,
            n_clusters,
            underflow_rows: 0,
        },
        floors,
    )
}
