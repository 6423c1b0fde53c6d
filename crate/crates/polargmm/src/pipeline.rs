//! End-to-end orchestration: dataset simulation, the centering / FBsPCA /
//! align+EM classification loop, and standalone scoring of result files.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

use crate::align::{align_batch, apply_pose, build_search, PoseEstimate, TranslationSearch};
use crate::basis::BandLimitSpec;
use crate::center::center_stack;
use crate::error::{Error, Result};
use crate::fbspca::{fit, FbModel, PolarCoeff};
use crate::gmm::{batch_loglik, e_step, fit_batch, init_mixture, sigma_floors, MixtureParams};
use crate::grid::Image;
use crate::io::{
    self, write_labels_csv, write_mixture, write_model, write_pgm, write_pose_csv, write_report,
    write_stack, PoseRow, ReportValue,
};
use crate::metrics::{
    accuracy, adjusted_mutual_information, homogeneity_completeness, relative_alignment_errors,
    AlignmentRecord, ClusteringPair,
};
use crate::scalar::wrap_angle;
use crate::simulate::{render_dataset, DatasetSpec, TemplateKind};
use crate::translate::{make_rotation_grid, make_translation_grid, translate_vanilla};

/// Classification stage parameters with the standard defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub radius_ratio: f64,
    pub truncation: f64,
    /// Number of principal components retained.
    pub m: usize,
    /// Number of mixture clusters.
    pub c: usize,
    /// Mini-batch size per outer iteration.
    pub b: usize,
    pub n_alpha: usize,
    pub n_r: usize,
    /// Translation search radius in pixels.
    pub max_shift: f64,
    pub n_citer: usize,
    pub n_iter: usize,
    pub seed: u64,
    pub enable_translation: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            radius_ratio: 0.6,
            truncation: 10.0,
            m: 50,
            c: 10,
            b: 5000,
            n_alpha: 60,
            n_r: 4,
            max_shift: 15.0,
            n_citer: 10,
            n_iter: 10,
            seed: 0,
            enable_translation: true,
        }
    }
}

/// Simulation stage parameters with the desk-scale defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub image_side: usize,
    pub n_clusters: usize,
    pub per_cluster: usize,
    pub snr: f64,
    /// Maximum planted shift magnitude in pixels (0 disables translation).
    pub shift_max: f64,
    pub seed: u64,
    pub template_kind: TemplateKind,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            image_side: 64,
            n_clusters: 5,
            per_cluster: 300,
            snr: 0.2,
            shift_max: 0.0,
            seed: 0,
            template_kind: TemplateKind::ProceduralBlobs,
        }
    }
}

/// Combined configuration addressable by `key=value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub pipeline: PipelineConfig,
    pub simulate: SimulateConfig,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("bad value for {key}: {value:?}")))
}

impl Config {
    /// Applies one configuration assignment; unknown keys are errors so that
    /// typos do not silently fall back to defaults.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.pipeline;
        let s = &mut self.simulate;
        match key {
            "radius_ratio" => p.radius_ratio = parse_value(key, value)?,
            "truncation" => p.truncation = parse_value(key, value)?,
            "m" => p.m = parse_value(key, value)?,
            "c" => p.c = parse_value(key, value)?,
            "b" => p.b = parse_value(key, value)?,
            "n_alpha" => p.n_alpha = parse_value(key, value)?,
            "n_r" => p.n_r = parse_value(key, value)?,
            "max_shift" => p.max_shift = parse_value(key, value)?,
            "n_citer" => p.n_citer = parse_value(key, value)?,
            "n_iter" => p.n_iter = parse_value(key, value)?,
            "enable_translation" => p.enable_translation = parse_value(key, value)?,
            "seed" => {
                p.seed = parse_value(key, value)?;
                s.seed = p.seed;
            }
            "image_side" => s.image_side = parse_value(key, value)?,
            "n_clusters" => s.n_clusters = parse_value(key, value)?,
            "per_cluster" => s.per_cluster = parse_value(key, value)?,
            "snr" => s.snr = parse_value(key, value)?,
            "shift_max" => s.shift_max = parse_value(key, value)?,
            "template" => {
                s.template_kind = match value.trim() {
                    "procedural" => TemplateKind::ProceduralBlobs,
                    "phantom" => TemplateKind::VoxelPhantom,
                    other => {
                        return Err(Error::invalid(format!("unknown template kind {other:?}")))
                    }
                }
            }
            other => return Err(Error::invalid(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Loads a `key=value` file (one assignment per line, `#` comments).
    pub fn load(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::MalformedRow {
                path: path.display().to_string(),
                line: i + 1,
                reason: "expected key=value".into(),
            })?;
            self.set(key.trim(), value).map_err(|e| Error::MalformedRow {
                path: path.display().to_string(),
                line: i + 1,
                reason: e.to_string(),
            })?;
        }
        Ok(())
    }
}

/// Behavior switches for [`classify`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ClassifyOptions {
    pub no_center: bool,
    pub freeze_align: bool,
    pub trace: bool,
}

/// Everything a classification run produces.
pub struct RunResult {
    pub labels: Vec<usize>,
    /// Aligning pose chosen per image (the inverse of the estimated
    /// generative pose).
    pub poses: Vec<PoseEstimate<f64>>,
    /// Total aligning shift per image (centering shift plus grid shift).
    pub shifts: Vec<[f64; 2]>,
    pub averages: Vec<Image<f64>>,
    pub model: FbModel<f64>,
    pub theta: MixtureParams<f64>,
    pub report: Vec<(String, ReportValue)>,
    /// Per-outer-iteration batch log-likelihood when tracing.
    pub trace: Vec<f64>,
}

impl RunResult {
    /// Predicted generative pose of one image, comparable to ground truth:
    /// the negation of the aligning transform.
    pub fn predicted_pose(&self, i: usize) -> (f64, [f64; 2]) {
        let alpha = wrap_angle(-self.poses[i].alpha);
        let t = self.shifts[i];
        (alpha, [-t[0], -t[1]])
    }
}

fn identity_pose() -> PoseEstimate<f64> {
    PoseEstimate {
        alpha: 0.0,
        t: [0.0, 0.0],
        t_index: 0,
        score: 0.0,
        cluster_hint: 0,
    }
}

fn batch_indices(n: usize, b: usize, seed: u64, iteration: u64) -> Vec<usize> {
    if b >= n {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0x4241_5443_4800 + iteration); // distinct stream per pass
    rand::seq::index::sample(&mut rng, n, b).into_vec()
}

fn align_or_freeze(
    samples: &[PolarCoeff<f64>],
    theta: &MixtureParams<f64>,
    search: &TranslationSearch<f64>,
    model: &FbModel<f64>,
    cfg: &PipelineConfig,
    rot_seed: u64,
    freeze: bool,
) -> Result<(Vec<PoseEstimate<f64>>, Vec<PolarCoeff<f64>>)> {
    if freeze {
        let poses = vec![identity_pose(); samples.len()];
        return Ok((poses, samples.to_vec()));
    }
    let rot = make_rotation_grid(cfg.n_alpha, rot_seed);
    let poses = align_batch(samples, theta, &rot, search, &model.omega)?;
    let aligned: Result<Vec<PolarCoeff<f64>>> = samples
        .iter()
        .zip(&poses)
        .map(|(z, p)| apply_pose(z, p, search, &model.omega))
        .collect();
    Ok((poses, aligned?))
}

/// Centroid of the below-mean (dark) mass of an image, in pixels.
fn dark_mass_center(img: &Image<f64>) -> Option<[f64; 2]> {
    let side = img.side();
    let mean = img.mean();
    let mut wsum = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for x in 0..side {
        for y in 0..side {
            let w = (mean - *img.at(x, y)).max(0.0);
            wsum += w;
            cx += w * x as f64;
            cy += w * y as f64;
        }
    }
    if wsum <= 1e-12 {
        return None;
    }
    Some([cx / wsum, cy / wsum])
}

/// Removes any translational offset the cluster means accumulate during EM.
///
/// A mean that drifts off-center by `u` makes every member's recovered
/// translation pick up a rotation-dependent term `R_{-a} u`, which inflates
/// the pairwise translation error without hurting the likelihood. Decoding
/// each mean, re-estimating its content center, and shifting it back onto
/// the frame center keeps the reported translations consistent. The dark-mass
/// centroid is used rather than the EM centering fit: on the clean, blob-like
/// decoded means it is nearly exact, while the EM fit overshoots the offset
/// and makes the correction oscillate instead of converge.
fn recenter_mixture(theta: &mut MixtureParams<f64>, model: &FbModel<f64>) -> Result<()> {
    let half = model.spec.image_side as f64 / 2.0;
    for cluster in &mut theta.clusters {
        let z = cluster.center();
        let img = model.decode(&z)?;
        let Some(center) = dark_mass_center(&img) else {
            continue;
        };
        let mut s = [half - center[0], half - center[1]];
        let norm = s[0].hypot(s[1]);
        if norm < 0.05 {
            continue;
        }
        // bound the per-iteration correction: a misread center on a noisy,
        // half-converged mean must not be able to throw the cluster away
        let cap = half / 2.0;
        if norm > cap {
            s[0] *= cap / norm;
            s[1] *= cap / norm;
        }
        let moved = translate_vanilla(model, &z, s)?;
        cluster.mu_r = moved.r;
        cluster.mu_phi = moved.phi;
    }
    Ok(())
}

/// Full classification pass over an in-memory stack, optionally scored
/// against ground truth.
pub fn classify(
    images: &[Image<f64>],
    cfg: &PipelineConfig,
    opts: ClassifyOptions,
    truth: Option<&[PoseRow]>,
) -> Result<RunResult> {
    let n = images.len();
    if n == 0 {
        return Err(Error::invalid("empty image stack"));
    }
    if cfg.c > n {
        return Err(Error::invalid(format!(
            "{} clusters requested but only {n} images available",
            cfg.c
        )));
    }
    if let Some(t) = truth {
        if t.len() != n {
            return Err(Error::RowCountMismatch {
                left: "stack".into(),
                left_n: n,
                right: "ground truth".into(),
                right_n: t.len(),
            });
        }
    }
    let side = images[0].side();

    // stage 1: translational centering
    let do_center = cfg.enable_translation && !opts.no_center;
    let (centered, center_shifts) = if do_center {
        center_stack(images, cfg.n_citer)?
    } else {
        (images.to_vec(), vec![[0.0, 0.0]; n])
    };

    // stage 2: representation
    let bspec = BandLimitSpec::new(side, cfg.radius_ratio, cfg.truncation)?;
    let model = fit(&centered, &bspec, cfg.m)?;
    let coeffs: Result<Vec<PolarCoeff<f64>>> =
        centered.iter().map(|im| model.encode(im)).collect();
    let coeffs = coeffs?;
    let floors = sigma_floors(&coeffs);

    // stage 3: alignment search operators
    let grid = if cfg.enable_translation {
        make_translation_grid(cfg.max_shift, cfg.n_r)
    } else {
        make_translation_grid(0.0, 0)
    };
    let search = build_search(&model, grid);

    // stage 4: mixture initialization on the first batch
    let first_batch = batch_indices(n, cfg.b, cfg.seed, 0);
    let first_samples: Vec<PolarCoeff<f64>> =
        first_batch.iter().map(|&i| coeffs[i].clone()).collect();
    let mut theta = init_mixture(&first_samples, cfg.c, cfg.seed, floors)?;

    // stage 5: alternating align / EM-update passes on fresh batches
    let mut trace = Vec::new();
    for it in 0..cfg.n_iter {
        let idx = batch_indices(n, cfg.b, cfg.seed, it as u64);
        let batch: Vec<PolarCoeff<f64>> = idx.iter().map(|&i| coeffs[i].clone()).collect();
        let (_, aligned) = align_or_freeze(
            &batch,
            &theta,
            &search,
            &model,
            cfg,
            cfg.seed.wrapping_add(1000 + it as u64),
            opts.freeze_align,
        )?;
        theta = fit_batch(&aligned, &theta, 1, floors)?;
        if cfg.enable_translation && !opts.freeze_align {
            recenter_mixture(&mut theta, &model)?;
        }
        if opts.trace {
            trace.push(batch_loglik(&aligned, &theta));
        }
    }

    // stage 6: final full-dataset alignment and hard assignment
    let (poses, aligned) = align_or_freeze(
        &coeffs,
        &theta,
        &search,
        &model,
        cfg,
        cfg.seed.wrapping_add(1000 + cfg.n_iter as u64),
        opts.freeze_align,
    )?;
    let resp = e_step(&aligned, &theta)?;
    let labels: Vec<usize> = (0..n)
        .map(|i| {
            resp.row(i)
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map_or(0, |(c, _)| c)
        })
        .collect();

    let shifts: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            [
                center_shifts[i][0] + poses[i].t[0],
                center_shifts[i][1] + poses[i].t[1],
            ]
        })
        .collect();

    // stage 7: class averages from raw images warped by the aligning pose
    let mut averages = vec![Image::<f64>::zeros(side); cfg.c];
    let mut counts = vec![0usize; cfg.c];
    for i in 0..n {
        let aligned_img = images[i].shift(shifts[i]).rotate(poses[i].alpha);
        let acc = &mut averages[labels[i]];
        for (a, &v) in acc.as_mut_slice().iter_mut().zip(aligned_img.as_slice()) {
            *a += v;
        }
        counts[labels[i]] += 1;
    }
    for (avg, &cnt) in averages.iter_mut().zip(&counts) {
        if cnt > 0 {
            let inv = 1.0 / cnt as f64;
            for v in avg.as_mut_slice() {
                *v *= inv;
            }
        }
    }

    let mut result = RunResult {
        labels,
        poses,
        shifts,
        averages,
        model,
        theta,
        report: Vec::new(),
        trace,
    };
    if let Some(truth) = truth {
        result.report = score_against_truth(&result, truth, cfg.enable_translation)?;
    }
    Ok(result)
}

fn score_against_truth(
    result: &RunResult,
    truth: &[PoseRow],
    translation_enabled: bool,
) -> Result<Vec<(String, ReportValue)>> {
    let true_labels: Vec<usize> = truth.iter().map(|r| r.label).collect();
    let pair = ClusteringPair::new(true_labels, result.labels.clone())?;
    let acc = accuracy(&pair);
    let ami = adjusted_mutual_information(&pair);
    let (h, c) = homogeneity_completeness(&pair);
    let records: Vec<AlignmentRecord<f64>> = truth
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let (alpha_pred, t_pred) = result.predicted_pose(i);
            AlignmentRecord {
                alpha_true: row.alpha_rad,
                alpha_pred,
                t_true: [row.tx, row.ty],
                t_pred,
            }
        })
        .collect();
    let (ae2, te2, n_pairs) = relative_alignment_errors(&records, &pair)?;
    let mut entries = vec![
        ("ACC".to_string(), ReportValue::Float(acc)),
        ("AMI".to_string(), ReportValue::Float(ami)),
        ("H".to_string(), ReportValue::Float(h)),
        ("C".to_string(), ReportValue::Float(c)),
        ("AE2".to_string(), ReportValue::Float(ae2)),
    ];
    if translation_enabled {
        entries.push(("TE2".to_string(), ReportValue::Float(te2)));
    } else {
        // no translation was predicted, so a translation error is meaningless
        entries.push(("TE2".to_string(), ReportValue::Text("undefined".into())));
    }
    entries.push(("N_PAIRS".to_string(), ReportValue::Int(n_pairs as i64)));
    Ok(entries)
}

/// Renders a dataset to a stack and ground-truth CSV; returns summary
/// entries (echoing the noise variance among them).
pub fn cmd_simulate(
    cfg: &SimulateConfig,
    stack_path: &Path,
    truth_path: &Path,
) -> Result<Vec<(String, ReportValue)>> {
    let spec = DatasetSpec {
        image_side: cfg.image_side,
        n_clusters: cfg.n_clusters,
        per_cluster: cfg.per_cluster,
        snr: cfg.snr,
        max_shift: cfg.shift_max,
        seed: cfg.seed,
        template_kind: cfg.template_kind,
    };
    let (images, truth) = render_dataset::<f64>(&spec)?;
    write_stack(stack_path, &images)?;
    let rows: Vec<PoseRow> = truth
        .iter()
        .enumerate()
        .map(|(i, g)| PoseRow {
            index: i,
            label: g.label,
            alpha_rad: g.alpha_true,
            tx: g.t_true[0],
            ty: g.t_true[1],
        })
        .collect();
    write_pose_csv(truth_path, &rows)?;
    Ok(vec![
        ("N_IMAGES".to_string(), ReportValue::Int(images.len() as i64)),
        ("SIDE".to_string(), ReportValue::Int(cfg.image_side as i64)),
        (
            "NOISE_VAR".to_string(),
            if cfg.snr.is_finite() {
                ReportValue::Float(1.0 / cfg.snr)
            } else {
                ReportValue::Float(0.0)
            },
        ),
    ])
}

/// Runs classification on a stack file and writes every artifact into
/// `out_dir`.
pub fn cmd_classify(
    cfg: &PipelineConfig,
    opts: ClassifyOptions,
    stack_path: &Path,
    truth_path: Option<&Path>,
    out_dir: &Path,
) -> Result<RunResult> {
    let images = io::read_stack(stack_path)?;
    let truth = truth_path.map(io::read_pose_csv).transpose()?;
    let result = classify(&images, cfg, opts, truth.as_deref())?;

    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    write_labels_csv(&out_dir.join("labels.csv"), &result.labels)?;
    let pose_rows: Vec<PoseRow> = (0..result.labels.len())
        .map(|i| {
            let (alpha, t) = result.predicted_pose(i);
            PoseRow {
                index: i,
                label: result.labels[i],
                alpha_rad: alpha,
                tx: t[0],
                ty: t[1],
            }
        })
        .collect();
    write_pose_csv(&out_dir.join("poses.csv"), &pose_rows)?;
    write_stack(&out_dir.join("averages.stk"), &result.averages)?;
    for (ci, avg) in result.averages.iter().enumerate() {
        write_pgm(&out_dir.join(format!("average_{ci:02}.pgm")), avg)?;
    }
    write_model(&out_dir.join("model.fbs"), &result.model)?;
    write_mixture(&out_dir.join("mixture.pgmmth"), &result.theta)?;
    if !result.report.is_empty() {
        write_report(&out_dir.join("report.txt"), &result.report)?;
    }
    if opts.trace {
        let entries: Vec<(String, ReportValue)> = result
            .trace
            .iter()
            .enumerate()
            .map(|(i, &v)| (format!("LOGLIK_ITER_{i:02}"), ReportValue::Float(v)))
            .collect();
        write_report(&out_dir.join("trace.txt"), &entries)?;
    }
    Ok(result)
}

/// Scores any tool's labels/poses against a ground-truth CSV.
pub fn cmd_report(
    truth_path: &Path,
    labels_path: &Path,
    poses_path: Option<&Path>,
) -> Result<Vec<(String, ReportValue)>> {
    let truth = io::read_pose_csv(truth_path)?;
    let labels = io::read_labels_csv(labels_path)?;
    if truth.len() != labels.len() {
        return Err(Error::RowCountMismatch {
            left: truth_path.display().to_string(),
            left_n: truth.len(),
            right: labels_path.display().to_string(),
            right_n: labels.len(),
        });
    }
    let true_labels: Vec<usize> = truth.iter().map(|r| r.label).collect();
    let pair = ClusteringPair::new(true_labels, labels)?;
    let acc = accuracy(&pair);
    let ami = adjusted_mutual_information(&pair);
    let (h, c) = homogeneity_completeness(&pair);
    let mut entries = vec![
        ("ACC".to_string(), ReportValue::Float(acc)),
        ("AMI".to_string(), ReportValue::Float(ami)),
        ("H".to_string(), ReportValue::Float(h)),
        ("C".to_string(), ReportValue::Float(c)),
    ];
    if let Some(poses_path) = poses_path {
        let poses = io::read_pose_csv(poses_path)?;
        if poses.len() != truth.len() {
            return Err(Error::RowCountMismatch {
                left: truth_path.display().to_string(),
                left_n: truth.len(),
                right: poses_path.display().to_string(),
                right_n: poses.len(),
            });
        }
        let records: Vec<AlignmentRecord<f64>> = truth
            .iter()
            .zip(&poses)
            .map(|(t, p)| AlignmentRecord {
                alpha_true: t.alpha_rad,
                alpha_pred: p.alpha_rad,
                t_true: [t.tx, t.ty],
                t_pred: [p.tx, p.ty],
            })
            .collect();
        let (ae2, te2, n_pairs) = relative_alignment_errors(&records, &pair)?;
        entries.push(("AE2".to_string(), ReportValue::Float(ae2)));
        entries.push(("TE2".to_string(), ReportValue::Float(te2)));
        entries.push(("N_PAIRS".to_string(), ReportValue::Int(n_pairs as i64)));
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn planted_dataset(
        n_clusters: usize,
        per: usize,
        snr: f64,
        shift: f64,
    ) -> (Vec<Image<f64>>, Vec<PoseRow>) {
        let spec = DatasetSpec {
            image_side: 64,
            n_clusters,
            per_cluster: per,
            snr,
            max_shift: shift,
            seed: 7,
            template_kind: TemplateKind::ProceduralBlobs,
        };
        let (images, truth) = render_dataset::<f64>(&spec).unwrap();
        let rows = truth
            .iter()
            .enumerate()
            .map(|(i, g)| PoseRow {
                index: i,
                label: g.label,
                alpha_rad: g.alpha_true,
                tx: g.t_true[0],
                ty: g.t_true[1],
            })
            .collect();
        (images, rows)
    }

    fn quick_config(c: usize, n: usize) -> PipelineConfig {
        PipelineConfig {
            m: 30,
            c,
            b: n,
            n_alpha: 60,
            n_iter: 4,
            enable_translation: false,
            ..PipelineConfig::default()
        }
    }

    fn report_float(report: &[(String, ReportValue)], name: &str) -> f64 {
        match report.iter().find(|(n, _)| n == name) {
            Some((_, ReportValue::Float(v))) => *v,
            other => panic!("{name} missing or non-float: {other:?}"),
        }
    }

    #[test]
    fn zero_noise_planted_run_is_perfect() {
        // separable planted case: distinct templates, no noise, no shifts
        let (images, truth) = planted_dataset(3, 40, f64::INFINITY, 0.0);
        let cfg = quick_config(3, images.len());
        let result = classify(&images, &cfg, ClassifyOptions::default(), Some(&truth)).unwrap();
        let acc = report_float(&result.report, "ACC");
        let ae2 = report_float(&result.report, "AE2");
        assert_eq!(acc, 1.0);
        assert!(
            ae2 <= 2.0 * std::f64::consts::PI / 60.0 + 1e-9,
            "AE2 {ae2}"
        );
        assert_eq!(result.averages.len(), 3);
    }

    #[test]
    fn no_translation_reports_undefined_te2() {
        let (images, truth) = planted_dataset(2, 20, f64::INFINITY, 0.0);
        let cfg = quick_config(2, images.len());
        let result = classify(&images, &cfg, ClassifyOptions::default(), Some(&truth)).unwrap();
        let te2 = result
            .report
            .iter()
            .find(|(n, _)| n == "TE2")
            .map(|(_, v)| v.clone());
        assert_eq!(te2, Some(ReportValue::Text("undefined".into())));
    }

    #[test]
    fn frozen_alignment_trace_is_monotone() {
        let (images, _) = planted_dataset(3, 30, 1.0, 0.0);
        let mut cfg = quick_config(3, images.len());
        cfg.n_iter = 8;
        let opts = ClassifyOptions {
            freeze_align: true,
            trace: true,
            ..Default::default()
        };
        let result = classify(&images, &cfg, opts, None).unwrap();
        assert_eq!(result.trace.len(), 8);
        for w in result.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "trace decreased: {w:?}");
        }
    }

    #[test]
    fn too_many_clusters_is_an_error() {
        let (images, _) = planted_dataset(2, 3, 1.0, 0.0);
        let cfg = quick_config(10, images.len());
        assert!(classify(&images, &cfg, ClassifyOptions::default(), None).is_err());
    }

    #[test]
    fn cmd_round_trip_and_determinism() {
        let dir = tempdir().unwrap();
        let stack = dir.path().join("data.stk");
        let truth = dir.path().join("truth.csv");
        let sim = SimulateConfig {
            n_clusters: 2,
            per_cluster: 20,
            snr: 1.0,
            seed: 7,
            ..SimulateConfig::default()
        };
        let summary = cmd_simulate(&sim, &stack, &truth).unwrap();
        assert!(summary
            .iter()
            .any(|(n, v)| n == "NOISE_VAR" && *v == ReportValue::Float(1.0)));

        // same seed, same bytes
        let stack2 = dir.path().join("data2.stk");
        let truth2 = dir.path().join("truth2.csv");
        cmd_simulate(&sim, &stack2, &truth2).unwrap();
        assert_eq!(std::fs::read(&stack).unwrap(), std::fs::read(&stack2).unwrap());
        assert_eq!(std::fs::read(&truth).unwrap(), std::fs::read(&truth2).unwrap());

        let cfg = quick_config(2, 40);
        let out_a = dir.path().join("out_a");
        let out_b = dir.path().join("out_b");
        cmd_classify(&cfg, ClassifyOptions::default(), &stack, Some(&truth), &out_a).unwrap();
        cmd_classify(&cfg, ClassifyOptions::default(), &stack, Some(&truth), &out_b).unwrap();
        for file in ["labels.csv", "poses.csv", "averages.stk", "report.txt"] {
            assert_eq!(
                std::fs::read(out_a.join(file)).unwrap(),
                std::fs::read(out_b.join(file)).unwrap(),
                "{file} differs between identical runs"
            );
        }

        // standalone scorer agrees with the in-run report
        let scored = cmd_report(
            &truth,
            &out_a.join("labels.csv"),
            Some(&out_a.join("poses.csv")),
        )
        .unwrap();
        let run_report = io::read_report(&out_a.join("report.txt")).unwrap();
        let find = |entries: &[(String, String)], name: &str| {
            entries
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, v)| v.clone())
                .unwrap()
        };
        let acc_run: f64 = find(&run_report, "ACC").parse().unwrap();
        assert!((report_float(&scored, "ACC") - acc_run).abs() < 1e-9);
    }

    #[test]
    fn report_flags_row_count_mismatch() {
        let dir = tempdir().unwrap();
        let truth = dir.path().join("t.csv");
        let labels = dir.path().join("l.csv");
        write_pose_csv(
            &truth,
            &[PoseRow {
                index: 0,
                label: 0,
                alpha_rad: 0.0,
                tx: 0.0,
                ty: 0.0,
            }],
        )
        .unwrap();
        write_labels_csv(&labels, &[0, 1]).unwrap();
        match cmd_report(&truth, &labels, None).unwrap_err() {
            Error::RowCountMismatch { left_n, right_n, .. } => {
                assert_eq!((left_n, right_n), (1, 2));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn config_parsing_applies_and_rejects_unknowns() {
        let mut cfg = Config::default();
        cfg.set("c", "4").unwrap();
        cfg.set("seed", "99").unwrap();
        cfg.set("enable_translation", "false").unwrap();
        assert_eq!(cfg.pipeline.c, 4);
        assert_eq!(cfg.pipeline.seed, 99);
        assert_eq!(cfg.simulate.seed, 99);
        assert!(!cfg.pipeline.enable_translation);
        assert!(cfg.set("definitely_not_a_key", "1").is_err());

        let dir = tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# comment\nm=12\n\nn_alpha = 24\n").unwrap();
        cfg.load(&path).unwrap();
        assert_eq!(cfg.pipeline.m, 12);
        assert_eq!(cfg.pipeline.n_alpha, 24);
        std::fs::write(&path, "m 12\n").unwrap();
        assert!(matches!(
            cfg.load(&path).unwrap_err(),
            Error::MalformedRow { line: 1, .. }
        ));
    }
}
