//! On-disk formats: image stacks, model and mixture checkpoints, ground
//! truth / label / pose CSVs, metric reports and PGM previews.
//!
//! All binary payloads are little-endian. All text outputs use UTF-8 with LF
//! line endings and render floats with 9 significant digits.

use num_complex::Complex;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::basis::BandLimitSpec;
use crate::error::{Error, Result};
use crate::fbspca::FbModel;
use crate::fft::fhat;
use crate::gmm::{ClusterParams, MixtureParams};
use crate::grid::{CGrid, Image};

const STACK_MAGIC: &[u8; 8] = b"PGMMSTK1";
const MODEL_MAGIC: &[u8; 8] = b"FBSPCA1\0";
const MIXTURE_MAGIC: &[u8; 8] = b"PGMMTH1\0";

/// Ground-truth or predicted pose row: cluster label plus rigid pose.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseRow {
    pub index: usize,
    pub label: usize,
    pub alpha_rad: f64,
    pub tx: f64,
    pub ty: f64,
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

fn open_reader(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path_str(path), e))
}

fn open_writer(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path_str(path), e))
}

/// 9 significant digits, locale-independent.
pub fn fmt9(v: f64) -> String {
    format!("{v:.8e}")
}

// --- little-endian primitives -------------------------------------------------

fn w_u32(w: &mut impl Write, v: u32, path: &Path) -> Result<()> {
    w.write_all(&v.to_le_bytes())
        .map_err(|e| Error::io(path_str(path), e))
}

fn w_i32(w: &mut impl Write, v: i32, path: &Path) -> Result<()> {
    w.write_all(&v.to_le_bytes())
        .map_err(|e| Error::io(path_str(path), e))
}

fn w_f32(w: &mut impl Write, v: f32, path: &Path) -> Result<()> {
    w.write_all(&v.to_le_bytes())
        .map_err(|e| Error::io(path_str(path), e))
}

fn w_f64(w: &mut impl Write, v: f64, path: &Path) -> Result<()> {
    w.write_all(&v.to_le_bytes())
        .map_err(|e| Error::io(path_str(path), e))
}

fn r_exact(r: &mut impl Read, buf: &mut [u8], path: &Path) -> Result<()> {
    r.read_exact(buf).map_err(|e| Error::io(path_str(path), e))
}

fn r_u32(r: &mut impl Read, path: &Path) -> Result<u32> {
    let mut b = [0u8; 4];
    r_exact(r, &mut b, path)?;
    Ok(u32::from_le_bytes(b))
}

fn r_i32(r: &mut impl Read, path: &Path) -> Result<i32> {
    let mut b = [0u8; 4];
    r_exact(r, &mut b, path)?;
    Ok(i32::from_le_bytes(b))
}


fn r_f64(r: &mut impl Read, path: &Path) -> Result<f64> {
    let mut b = [0u8; 8];
    r_exact(r, &mut b, path)?;
    Ok(f64::from_le_bytes(b))
}

fn check_magic(r: &mut impl Read, expected: &[u8; 8], path: &Path) -> Result<()> {
    let mut got = [0u8; 8];
    r_exact(r, &mut got, path)?;
    if &got != expected {
        return Err(Error::BadFormat {
            path: path_str(path),
            reason: format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(&got),
                String::from_utf8_lossy(expected)
            ),
        });
    }
    Ok(())
}

// --- image stacks -------------------------------------------------------------

/// Writes an image stack: magic, u32 count, u32 side, then f32 pixels
/// row-major, image-major.
pub fn write_stack(path: &Path, images: &[Image<f64>]) -> Result<()> {
    let side = images.first().map_or(0, |im| im.side());
    for im in images {
        if im.side() != side {
            return Err(Error::ImageSideMismatch {
                expected: side,
                got: im.side(),
            });
        }
    }
    let mut w = open_writer(path)?;
    w.write_all(STACK_MAGIC)
        .map_err(|e| Error::io(path_str(path), e))?;
    w_u32(&mut w, images.len() as u32, path)?;
    w_u32(&mut w, side as u32, path)?;
    for im in images {
        for &v in im.as_slice() {
            w_f32(&mut w, v as f32, path)?;
        }
    }
    w.flush().map_err(|e| Error::io(path_str(path), e))
}

pub fn read_stack(path: &Path) -> Result<Vec<Image<f64>>> {
    let mut r = open_reader(path)?;
    check_magic(&mut r, STACK_MAGIC, path)?;
    let n = r_u32(&mut r, path)? as usize;
    let side = r_u32(&mut r, path)? as usize;
    let mut images = Vec::with_capacity(n);
    let mut raw = vec![0u8; side * side * 4];
    for _ in 0..n {
        r_exact(&mut r, &mut raw, path)?;
        let data: Vec<f64> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        images.push(Image::from_vec(side, data));
    }
    // trailing bytes mean the header lied
    let mut probe = [0u8; 1];
    if r.read(&mut probe).map_err(|e| Error::io(path_str(path), e))? != 0 {
        return Err(Error::BadFormat {
            path: path_str(path),
            reason: "trailing data after declared image count".into(),
        });
    }
    Ok(images)
}

// --- model checkpoint ---------------------------------------------------------

fn w_cgrid(w: &mut impl Write, g: &CGrid<f64>, path: &Path) -> Result<()> {
    for v in g.as_slice() {
        w_f64(w, v.re, path)?;
    }
    for v in g.as_slice() {
        w_f64(w, v.im, path)?;
    }
    Ok(())
}

fn r_cgrid(r: &mut impl Read, side: usize, path: &Path) -> Result<CGrid<f64>> {
    let n = side * side;
    let mut re = Vec::with_capacity(n);
    for _ in 0..n {
        re.push(r_f64(r, path)?);
    }
    let mut data = Vec::with_capacity(n);
    for re in re {
        data.push(Complex::new(re, r_f64(r, path)?));
    }
    Ok(CGrid::from_vec(side, data))
}

/// Serializes a fitted model: header (L, m, k_max, band-limit parameters),
/// angular frequencies, eigenvalues, mean image, then the principal
/// components as real-then-imaginary planes (image domain followed by
/// Fourier domain).
pub fn write_model(path: &Path, model: &FbModel<f64>) -> Result<()> {
    let mut w = open_writer(path)?;
    w.write_all(MODEL_MAGIC)
        .map_err(|e| Error::io(path_str(path), e))?;
    let k_max = model.omega.iter().map(|w| w.abs()).max().unwrap_or(0);
    w_u32(&mut w, model.spec.image_side as u32, path)?;
    w_u32(&mut w, model.m as u32, path)?;
    w_u32(&mut w, k_max as u32, path)?;
    w_f64(&mut w, model.spec.radius_ratio, path)?;
    w_f64(&mut w, model.spec.truncation, path)?;
    for &o in &model.omega {
        w_i32(&mut w, o as i32, path)?;
    }
    for &e in &model.eigvals {
        w_f64(&mut w, e, path)?;
    }
    for &v in model.mean_image.as_slice() {
        w_f64(&mut w, v, path)?;
    }
    for g in &model.psi_image {
        w_cgrid(&mut w, g, path)?;
    }
    for g in &model.psi_fourier {
        w_cgrid(&mut w, g, path)?;
    }
    w.flush().map_err(|e| Error::io(path_str(path), e))
}

pub fn read_model(path: &Path) -> Result<FbModel<f64>> {
    let mut r = open_reader(path)?;
    check_magic(&mut r, MODEL_MAGIC, path)?;
    let side = r_u32(&mut r, path)? as usize;
    let m = r_u32(&mut r, path)? as usize;
    let _k_max = r_u32(&mut r, path)?;
    let radius_ratio = r_f64(&mut r, path)?;
    let truncation = r_f64(&mut r, path)?;
    let spec = BandLimitSpec::new(side, radius_ratio, truncation)?;
    let mut omega = Vec::with_capacity(m);
    for _ in 0..m {
        omega.push(r_i32(&mut r, path)? as i64);
    }
    let mut eigvals = Vec::with_capacity(m);
    for _ in 0..m {
        eigvals.push(r_f64(&mut r, path)?);
    }
    let mut mean = Vec::with_capacity(side * side);
    for _ in 0..side * side {
        mean.push(r_f64(&mut r, path)?);
    }
    let mean_image = Image::from_vec(side, mean);
    let mut psi_image = Vec::with_capacity(m);
    for _ in 0..m {
        psi_image.push(r_cgrid(&mut r, side, path)?);
    }
    let mut psi_fourier = Vec::with_capacity(m);
    for _ in 0..m {
        psi_fourier.push(r_cgrid(&mut r, side, path)?);
    }
    let mean_fourier = fhat(&mean_image);
    Ok(FbModel {
        spec,
        m,
        omega,
        eigvals,
        mean_image,
        psi_image,
        psi_fourier,
        mean_fourier,
    })
}

// --- mixture checkpoint -------------------------------------------------------

/// Serializes mixture parameters: header (C, m), then per cluster the weight
/// followed by the mu_r, mu_phi, sigma_r, sigma_phi vectors.
pub fn write_mixture(path: &Path, theta: &MixtureParams<f64>) -> Result<()> {
    let mut w = open_writer(path)?;
    w.write_all(MIXTURE_MAGIC)
        .map_err(|e| Error::io(path_str(path), e))?;
    let m = theta.clusters.first().map_or(0, |c| c.dim());
    w_u32(&mut w, theta.clusters.len() as u32, path)?;
    w_u32(&mut w, m as u32, path)?;
    for (c, &pi) in theta.clusters.iter().zip(&theta.pi) {
        w_f64(&mut w, pi, path)?;
        for vec in [&c.mu_r, &c.mu_phi, &c.sigma_r, &c.sigma_phi] {
            for &v in vec.iter() {
                w_f64(&mut w, v, path)?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path_str(path), e))
}

pub fn read_mixture(path: &Path) -> Result<MixtureParams<f64>> {
    let mut r = open_reader(path)?;
    check_magic(&mut r, MIXTURE_MAGIC, path)?;
    let n_c = r_u32(&mut r, path)? as usize;
    let m = r_u32(&mut r, path)? as usize;
    let mut pi = Vec::with_capacity(n_c);
    let mut clusters = Vec::with_capacity(n_c);
    for _ in 0..n_c {
        pi.push(r_f64(&mut r, path)?);
        let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(4);
        for _ in 0..4 {
            let mut v = Vec::with_capacity(m);
            for _ in 0..m {
                v.push(r_f64(&mut r, path)?);
            }
            vecs.push(v);
        }
        let sigma_phi = vecs.pop().unwrap();
        let sigma_r = vecs.pop().unwrap();
        let mu_phi = vecs.pop().unwrap();
        let mu_r = vecs.pop().unwrap();
        clusters.push(ClusterParams {
            mu_r,
            mu_phi,
            sigma_r,
            sigma_phi,
        });
    }
    Ok(MixtureParams { pi, clusters })
}

// --- CSVs ---------------------------------------------------------------------

const POSE_HEADER: &str = "index,label,alpha_rad,tx,ty";
const LABEL_HEADER: &str = "index,label";

/// Ground truth and predicted poses share one schema.
pub fn write_pose_csv(path: &Path, rows: &[PoseRow]) -> Result<()> {
    let mut w = open_writer(path)?;
    let mut text = String::from(POSE_HEADER);
    text.push('\n');
    for r in rows {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            r.index,
            r.label,
            fmt9(r.alpha_rad),
            fmt9(r.tx),
            fmt9(r.ty)
        ));
    }
    w.write_all(text.as_bytes())
        .map_err(|e| Error::io(path_str(path), e))?;
    w.flush().map_err(|e| Error::io(path_str(path), e))
}

fn malformed(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::MalformedRow {
        path: path_str(path),
        line,
        reason: reason.into(),
    }
}

fn parse_field<T: std::str::FromStr>(
    field: &str,
    name: &str,
    path: &Path,
    line: usize,
) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| malformed(path, line, format!("bad {name}: {field:?}")))
}

pub fn read_pose_csv(path: &Path) -> Result<Vec<PoseRow>> {
    let r = open_reader(path)?;
    let mut rows = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path_str(path), e))?;
        let lineno = i + 1;
        if i == 0 {
            if line.trim() != POSE_HEADER {
                return Err(malformed(path, lineno, format!("expected header {POSE_HEADER:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(malformed(path, lineno, format!("expected 5 fields, got {}", f.len())));
        }
        rows.push(PoseRow {
            index: parse_field(f[0], "index", path, lineno)?,
            label: parse_field(f[1], "label", path, lineno)?,
            alpha_rad: parse_field(f[2], "alpha_rad", path, lineno)?,
            tx: parse_field(f[3], "tx", path, lineno)?,
            ty: parse_field(f[4], "ty", path, lineno)?,
        });
    }
    Ok(rows)
}

pub fn write_labels_csv(path: &Path, labels: &[usize]) -> Result<()> {
    let mut w = open_writer(path)?;
    let mut text = String::from(LABEL_HEADER);
    text.push('\n');
    for (i, &l) in labels.iter().enumerate() {
        text.push_str(&format!("{i},{l}\n"));
    }
    w.write_all(text.as_bytes())
        .map_err(|e| Error::io(path_str(path), e))?;
    w.flush().map_err(|e| Error::io(path_str(path), e))
}

pub fn read_labels_csv(path: &Path) -> Result<Vec<usize>> {
    let r = open_reader(path)?;
    let mut labels = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path_str(path), e))?;
        let lineno = i + 1;
        if i == 0 {
            if line.trim() != LABEL_HEADER {
                return Err(malformed(path, lineno, format!("expected header {LABEL_HEADER:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 2 {
            return Err(malformed(path, lineno, format!("expected 2 fields, got {}", f.len())));
        }
        let index: usize = parse_field(f[0], "index", path, lineno)?;
        if index != labels.len() {
            return Err(malformed(path, lineno, format!("out-of-order index {index}")));
        }
        labels.push(parse_field(f[1], "label", path, lineno)?);
    }
    Ok(labels)
}

// --- metric report ------------------------------------------------------------

/// One metric report entry; floats are rendered with 9 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub enum ReportValue {
    Float(f64),
    Int(i64),
    Text(String),
}

impl ReportValue {
    pub fn render(&self) -> String {
        match self {
            ReportValue::Float(v) => fmt9(*v),
            ReportValue::Int(v) => v.to_string(),
            ReportValue::Text(s) => s.clone(),
        }
    }
}

pub fn write_report(path: &Path, entries: &[(String, ReportValue)]) -> Result<()> {
    let mut w = open_writer(path)?;
    let mut text = String::new();
    for (name, value) in entries {
        text.push_str(&format!("{name}\t{}\n", value.render()));
    }
    w.write_all(text.as_bytes())
        .map_err(|e| Error::io(path_str(path), e))?;
    w.flush().map_err(|e| Error::io(path_str(path), e))
}

pub fn read_report(path: &Path) -> Result<Vec<(String, String)>> {
    let r = open_reader(path)?;
    let mut entries = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path_str(path), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (name, value) = line
            .split_once('\t')
            .ok_or_else(|| malformed(path, i + 1, "expected NAME<TAB>value"))?;
        entries.push((name.to_string(), value.to_string()));
    }
    Ok(entries)
}

// --- PGM preview --------------------------------------------------------------

/// Binary PGM (P5, maxval 255), min-max scaled per image.
pub fn write_pgm(path: &Path, image: &Image<f64>) -> Result<()> {
    let mut w = open_writer(path)?;
    let side = image.side();
    let (lo, hi) = image.min_max();
    let span = if hi > lo { hi - lo } else { 1.0 };
    let header = format!("P5\n{side} {side}\n255\n");
    w.write_all(header.as_bytes())
        .map_err(|e| Error::io(path_str(path), e))?;
    let bytes: Vec<u8> = image
        .as_slice()
        .iter()
        .map(|&v| (255.0 * (v - lo) / span).round().clamp(0.0, 255.0) as u8)
        .collect();
    w.write_all(&bytes)
        .map_err(|e| Error::io(path_str(path), e))?;
    w.flush().map_err(|e| Error::io(path_str(path), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BandLimitSpec;
    use crate::fbspca::fit;
    use crate::simulate::{render_dataset, DatasetSpec, TemplateKind};
    use tempfile::tempdir;

    fn small_images(n: usize, side: usize) -> Vec<Image<f64>> {
        (0..n)
            .map(|i| {
                let mut im = Image::zeros(side);
                for x in 0..side {
                    for y in 0..side {
                        *im.at_mut(x, y) = (i * side * side + x * side + y) as f64 * 0.01 - 1.0;
                    }
                }
                im
            })
            .collect()
    }

    #[test]
    fn stack_round_trip_and_size() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("s.stk");
        let images = small_images(3, 8);
        write_stack(&path, &images).unwrap();
        let bytes = std::fs::metadata(&path).unwrap().len();
        assert_eq!(bytes, 8 + 4 + 4 + 3 * 8 * 8 * 4);
        let back = read_stack(&path).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in images.iter().zip(&back) {
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                assert!((x - y).abs() <= f32::EPSILON as f64 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn stack_rejects_bad_magic() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("junk.stk");
        std::fs::write(&path, b"NOTMAGIC____________").unwrap();
        let err = read_stack(&path).unwrap_err();
        assert!(matches!(err, Error::BadFormat { .. }), "{err}");
    }

    #[test]
    fn model_round_trip_encodes_identically() {
        let spec = DatasetSpec {
            image_side: 32,
            n_clusters: 1,
            per_cluster: 20,
            snr: 1.0,
            max_shift: 0.0,
            seed: 3,
            template_kind: TemplateKind::ProceduralBlobs,
        };
        let (images, _) = render_dataset::<f64>(&spec).unwrap();
        let bspec = BandLimitSpec::new(32, 0.6, 10.0).unwrap();
        let model = fit(&images, &bspec, 12).unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.fbs");
        write_model(&path, &model).unwrap();
        let back = read_model(&path).unwrap();
        assert_eq!(back.m, model.m);
        assert_eq!(back.omega, model.omega);
        let a = model.encode(&images[0]).unwrap();
        let b = back.encode(&images[0]).unwrap();
        for (x, y) in a.r.iter().zip(&b.r) {
            assert!((x - y).abs() < 1e-12);
        }
        for (x, y) in a.phi.iter().zip(&b.phi) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn mixture_round_trip_is_exact() {
        let theta = MixtureParams {
            pi: vec![0.25, 0.75],
            clusters: (0..2)
                .map(|c| ClusterParams {
                    mu_r: vec![1.0 + c as f64, 2.0],
                    mu_phi: vec![-0.5, 0.25 * c as f64],
                    sigma_r: vec![0.1, 0.2],
                    sigma_phi: vec![0.3, 0.4],
                })
                .collect(),
        };
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.pgmmth");
        write_mixture(&path, &theta).unwrap();
        let back = read_mixture(&path).unwrap();
        assert_eq!(back.pi, theta.pi);
        for (a, b) in back.clusters.iter().zip(&theta.clusters) {
            assert_eq!(a.mu_r, b.mu_r);
            assert_eq!(a.mu_phi, b.mu_phi);
            assert_eq!(a.sigma_r, b.sigma_r);
            assert_eq!(a.sigma_phi, b.sigma_phi);
        }
    }

    #[test]
    fn pose_csv_round_trip() {
        let rows = vec![
            PoseRow {
                index: 0,
                label: 2,
                alpha_rad: 1.234567891,
                tx: -3.0,
                ty: 0.5,
            },
            PoseRow {
                index: 1,
                label: 0,
                alpha_rad: -0.1,
                tx: 0.0,
                ty: 8.0,
            },
        ];
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_pose_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("index,label,alpha_rad,tx,ty\n"));
        assert!(!text.contains('\r'));
        let back = read_pose_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in back.iter().zip(&rows) {
            assert_eq!(a.index, b.index);
            assert_eq!(a.label, b.label);
            assert!((a.alpha_rad - b.alpha_rad).abs() < 1e-8 * b.alpha_rad.abs().max(1.0));
        }
    }

    #[test]
    fn pose_csv_reports_line_number_on_garbage() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "index,label,alpha_rad,tx,ty\n0,1,0.5,0.0,0.0\n1,oops,0,0,0\n")
            .unwrap();
        match read_pose_csv(&path).unwrap_err() {
            Error::MalformedRow { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn labels_csv_round_trip_and_order_check() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("l.csv");
        write_labels_csv(&path, &[3, 1, 4, 1]).unwrap();
        assert_eq!(read_labels_csv(&path).unwrap(), vec![3, 1, 4, 1]);
        std::fs::write(&path, "index,label\n0,3\n2,1\n").unwrap();
        match read_labels_csv(&path).unwrap_err() {
            Error::MalformedRow { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn report_is_tab_separated_with_nine_digits() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("r.txt");
        write_report(
            &path,
            &[
                ("ACC".to_string(), ReportValue::Float(0.8612345678)),
                ("N_PAIRS".to_string(), ReportValue::Int(123)),
                ("TE2".to_string(), ReportValue::Text("undefined".into())),
            ],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "ACC\t8.61234568e-1\nN_PAIRS\t123\nTE2\tundefined\n");
        let back = read_report(&path).unwrap();
        assert_eq!(back[1], ("N_PAIRS".to_string(), "123".to_string()));
    }

    #[test]
    fn pgm_has_correct_header_and_range() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("a.pgm");
        let images = small_images(1, 8);
        write_pgm(&path, &images[0]).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let header = b"P5\n8 8\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(bytes.len(), header.len() + 64);
        assert!(bytes[header.len()..].contains(&0u8));
        assert!(bytes[header.len()..].contains(&255u8));
    }
}
