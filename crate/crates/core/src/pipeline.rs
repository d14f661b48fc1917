//! End-to-end pseudo-mask generation: configuration, the per-image pass,
//! manifest-driven batches and directory evaluation.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;

use crate::cam::{compute_cams, CamStack, entropy_gate, pixel_entropy, pixel_probabilities, DEFAULT_EPS_GATE};
use crate::clustering::{
    fuse_memberships, kmeans_soft, select_class_pixels, spectral_soft_with, MembershipTensor,
    SigmaRule, SpectralOptions,
};
use crate::error::{Error, Result};
use crate::image::{read_mask_pgm, read_saliency_pgm, write_mask_pgm, write_saliency_pgm, BinaryMask, SaliencyImage};
use crate::io::{read_feature_file, read_weight_file, ClassifierWeights, FeatureField};
use crate::losses::consistency_loss;
use crate::masks::{binarize_at, foreground_map, otsu_threshold, INFERENCE_THRESHOLD};
use crate::metrics::{f_beta, iou, mae, DEFAULT_BETA_SQ};
use crate::prototypes::{compute_prototypes, prototype_cams, reweight_and_aggregate, update_prototypes, update_prototypes_within, PrototypeSet};
use crate::transport::{
    confidence_weights, cost_matrix, hard_assignment, prototype_marginals, sinkhorn, SinkhornParams,
};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// CAM selection threshold, in `[0, 1)`.
    pub tau: f64,
    /// Prototypes per category.
    pub k: usize,
    pub eps_gate: f64,
    /// Gibbs temperature of the soft cluster weights.
    pub t_soft: f64,
    pub sigma: SigmaRule,
    /// Spectral clustering point cap per category.
    pub n_spec: usize,
    pub sinkhorn: SinkhornParams,
    pub marginal_temperature: f64,
    /// Upper bound on transport/update rounds.
    pub rounds: usize,
    /// Stop early once the consistency loss moves less than this.
    pub stop_tol: f64,
    pub seed: u64,
    /// Update a category's prototypes only from pixels that category's CAM
    /// selected, rather than from every pixel transported onto them.
    pub conditioned_update: bool,
    /// A prototype that receives no pixels in a round keeps its previous
    /// vector instead of dropping out.
    pub keep_empty_prototypes: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            tau: 0.3,
            k: 4,
            eps_gate: DEFAULT_EPS_GATE,
            t_soft: 0.1,
            sigma: SigmaRule::Median,
            n_spec: 2048,
            sinkhorn: SinkhornParams::default(),
            marginal_temperature: 1.0,
            rounds: 3,
            stop_tol: 1e-4,
            seed: 0,
            conditioned_update: true,
            keep_empty_prototypes: true,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

fn out_of_range(key: &str, bound: &str) -> Error {
    Error::ValueOutOfRange {
        key: key.to_string(),
        bound: bound.to_string(),
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(out_of_range(key, "(0, inf)"))
    }
}

fn at_least(key: &str, v: usize, min: usize) -> Result<usize> {
    if v >= min {
        Ok(v)
    } else {
        Err(out_of_range(key, &format!("[{min}, inf)")))
    }
}

impl PipelineConfig {
    /// Every key accepted by [`PipelineConfig::set`].
    pub const KEYS: &'static [&'static str] = &[
        "tau",
        "k",
        "eps_gate",
        "t_soft",
        "sigma",
        "n_spec",
        "sinkhorn_eps",
        "sinkhorn_max_iter",
        "tol_marg",
        "marginal_temperature",
        "rounds",
        "stop_tol",
        "seed",
        "conditioned_update",
        "keep_empty_prototypes",
    ];

    /// Sets one knob from its textual value, checking its range.
    /// `eps` is accepted as a short form of `sinkhorn_eps`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "tau" => {
                let v: f64 = parse_num(key, value)?;
                if !(0.0..1.0).contains(&v) {
                    return Err(out_of_range(key, "[0, 1)"));
                }
                self.tau = v;
            }
            "k" => self.k = at_least(key, parse_num(key, value)?, 1)?,
            "eps_gate" => self.eps_gate = positive(key, parse_num(key, value)?)?,
            "t_soft" => self.t_soft = positive(key, parse_num(key, value)?)?,
            "sigma" => {
                self.sigma = if value.trim() == "median" {
                    SigmaRule::Median
                } else {
                    SigmaRule::Fixed(positive(key, parse_num(key, value)?)?)
                }
            }
            "n_spec" => self.n_spec = at_least(key, parse_num(key, value)?, 1)?,
            "sinkhorn_eps" | "eps" => self.sinkhorn.epsilon = positive(key, parse_num(key, value)?)?,
            "sinkhorn_max_iter" => self.sinkhorn.max_iter = at_least(key, parse_num(key, value)?, 1)?,
            "tol_marg" => self.sinkhorn.tol_marg = positive(key, parse_num(key, value)?)?,
            "marginal_temperature" => {
                self.marginal_temperature = positive(key, parse_num(key, value)?)?
            }
            "rounds" => self.rounds = at_least(key, parse_num(key, value)?, 1)?,
            "stop_tol" => {
                let v: f64 = parse_num(key, value)?;
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(out_of_range(key, "[0, inf)"));
                }
                self.stop_tol = v;
            }
            "seed" => self.seed = parse_num(key, value)?,
            "conditioned_update" => self.conditioned_update = parse_num(key, value)?,
            "keep_empty_prototypes" => self.keep_empty_prototypes = parse_num(key, value)?,
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies `key=value` lines. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ManifestParse {
                line: n + 1,
                message: format!("expected key=value, got {line:?}"),
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }
}

/// Defaults, then the config file (if it exists), then `overrides` in order.
pub fn parse_config(path: Option<&Path>, overrides: &[(String, String)]) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = path {
        match fs::read_to_string(path) {
            Ok(text) => cfg.apply_text(&text)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(Error::io(path, e)),
        }
    }
    for (key, value) in overrides {
        cfg.set(key, value)?;
    }
    Ok(cfg)
}

/// Diagnostics for one processed image.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ImageReport {
    /// Consistency loss after each executed round.
    pub loss_trajectory: Vec<f64>,
    pub sinkhorn_iterations: usize,
    pub sinkhorn_converged: bool,
    pub row_residual: f64,
    pub col_residual: f64,
    /// Valid prototypes per category after the last update.
    pub prototype_counts: Vec<usize>,
    pub otsu_threshold: f64,
    pub warning: Option<String>,
}

impl ImageReport {
    pub fn rounds(&self) -> usize {
        self.loss_trajectory.len()
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.loss_trajectory.last().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageOutput {
    pub mask: BinaryMask,
    pub map: SaliencyImage,
    pub report: ImageReport,
}

fn empty_output(features: &FeatureField, warning: String) -> ImageOutput {
    warn!("{warning}");
    let (h, w) = (features.height(), features.width());
    ImageOutput {
        mask: BinaryMask::zeros(h, w),
        map: SaliencyImage::zeros(h, w),
        report: ImageReport {
            warning: Some(warning),
            ..Default::default()
        },
    }
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.into_iter().map(|x| x / n).collect()
    } else {
        v
    }
}

/// Hybrid clustering of every category's selected pixels into the
/// membership tensor, plus which pixels each category selected.
pub fn cluster_memberships(
    features: &FeatureField,
    cams: &CamStack,
    cfg: &PipelineConfig,
) -> Result<(MembershipTensor, Vec<Vec<bool>>)> {
    let eta = pixel_entropy(&pixel_probabilities(cams));
    let mut memberships = MembershipTensor::zeros(features.num_pixels(), cams.num_categories(), cfg.k);
    let opts = SpectralOptions {
        sigma: cfg.sigma,
        max_points: cfg.n_spec,
    };
    let mut eligible = vec![vec![false; features.num_pixels()]; cams.num_categories()];
    for c in 0..cams.num_categories() {
        let pixels = select_class_pixels(cams, c, cfg.tau);
        for &i in &pixels {
            eligible[c][i] = true;
        }
        if pixels.is_empty() {
            continue;
        }
        let points: Vec<Vec<f64>> = pixels.iter().map(|&i| unit(features.pixel(i))).collect();
        let k = cfg.k.min(pixels.len());
        let seed = cfg.seed.wrapping_add(c as u64);
        let km = kmeans_soft(&points, k, cfg.t_soft, seed)?
            .assignment
            .with_pixel_ids(pixels.clone())?;
        let spc = spectral_soft_with(&points, k, cfg.t_soft, seed, &opts)?
            .assignment
            .with_pixel_ids(pixels.clone())?
            .aligned_to(&km)?;
        let gate = entropy_gate(&eta, &pixels, cfg.eps_gate)?;
        memberships.set_category(c, &fuse_memberships(&km, &spc, &gate)?)?;
    }
    Ok((memberships, eligible))
}

fn has_foreground(protos: &PrototypeSet) -> bool {
    let layout = protos.layout();
    (0..layout.background()).any(|c| protos.valid_in_category(c) > 0)
}

/// The full pass for one image: CAMs, hybrid clustering, prototypes, then
/// up to `cfg.rounds` rounds of transport and prototype update, and
/// finally Otsu on the foreground map.
pub fn run_image(features: &FeatureField, weights: &ClassifierWeights, cfg: &PipelineConfig) -> Result<ImageOutput> {
    if weights.dim() != features.channels() {
        return Err(Error::DimensionMismatch(format!(
            "classifier dimension {} vs feature channels {}",
            weights.dim(),
            features.channels()
        )));
    }
    let cams = compute_cams(features, weights)?;
    let (memberships, eligible) = cluster_memberships(features, &cams, cfg)?;
    let mut protos = compute_prototypes(features, &memberships)?;
    if !has_foreground(&protos) {
        return Ok(empty_output(
            features,
            "no valid foreground prototypes; emitting an empty mask".into(),
        ));
    }

    let layout = protos.layout();
    let n = features.num_pixels();
    let mut report = ImageReport::default();
    let mut stack = None;
    for round in 0..cfg.rounds {
        let cost = cost_matrix(features, &protos)?;
        let similarity = cost.similarity();
        let marg = prototype_marginals(&protos, weights, cfg.marginal_temperature, n)?;
        let plan = sinkhorn(&similarity, &marg, &cfg.sinkhorn)?;
        if !plan.converged {
            warn!(
                "transport did not converge in round {round}: residuals {:.3e} / {:.3e}",
                plan.row_residual, plan.col_residual
            );
        }
        let hard = hard_assignment(&plan);
        let updated = if cfg.conditioned_update {
            update_prototypes_within(features, &hard, cost.columns(), layout, &eligible)?
        } else {
            update_prototypes(features, &hard, cost.columns(), layout)?
        };
        let updated = if cfg.keep_empty_prototypes {
            updated.filled_from(&protos)?
        } else {
            updated
        };
        let raw = prototype_cams(&updated, features)?;
        let reweighted = reweight_and_aggregate(&raw, &plan, cost.columns())?;
        let omega = confidence_weights(&plan)?;
        let loss = consistency_loss(&reweighted, &cams, &omega)?;

        report.sinkhorn_iterations = plan.iterations;
        report.sinkhorn_converged = plan.converged;
        report.row_residual = plan.row_residual;
        report.col_residual = plan.col_residual;
        report.prototype_counts = (0..layout.categories).map(|c| updated.valid_in_category(c)).collect();
        let previous = report.final_loss();
        report.loss_trajectory.push(loss);
        protos = updated;
        stack = Some(reweighted);
        if previous.is_some_and(|p| (loss - p).abs() < cfg.stop_tol) {
            break;
        }
    }

    let stack = stack.expect("at least one round");
    let map = foreground_map(&stack)?;
    let threshold = otsu_threshold(&map);
    report.otsu_threshold = threshold;
    Ok(ImageOutput {
        mask: binarize_at(&map, threshold),
        map,
        report,
    })
}

/// One manifest line. Relative paths are taken from the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub features: PathBuf,
    pub weights: PathBuf,
    pub out_prefix: PathBuf,
    /// Optional ground-truth mask (PGM) for metric columns.
    pub ground_truth: Option<PathBuf>,
}

impl ManifestEntry {
    pub fn id(&self) -> String {
        self.out_prefix.display().to_string()
    }

    pub fn mask_path(&self) -> PathBuf {
        suffixed(&self.out_prefix, "_mask.pgm")
    }

    pub fn map_path(&self) -> PathBuf {
        suffixed(&self.out_prefix, "_map.pgm")
    }
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Parses `features weights out_prefix [ground_truth]` lines; blank lines
/// and `#` comments are skipped.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>> {
    let resolve = |p: &str| {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    let mut entries = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(Error::ManifestParse {
                line: n + 1,
                message: format!("expected 3 or 4 fields, got {}", fields.len()),
            });
        }
        entries.push(ManifestEntry {
            features: resolve(fields[0]),
            weights: resolve(fields[1]),
            out_prefix: resolve(fields[2]),
            ground_truth: fields.get(3).map(|p| resolve(p)),
        });
    }
    Ok(entries)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub mae: f64,
    pub f_beta: f64,
    pub iou: f64,
}

/// MAE on the map, F-beta and IoU on the mask.
pub fn score(map: &SaliencyImage, mask: &BinaryMask, gt: &BinaryMask) -> Result<Scores> {
    Ok(Scores {
        mae: mae(map, gt)?,
        f_beta: f_beta(mask, gt, DEFAULT_BETA_SQ)?,
        iou: iou(mask, gt)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchRow {
    pub id: String,
    pub outcome: std::result::Result<(ImageReport, Option<Scores>), String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BatchReport {
    pub rows: Vec<BatchRow>,
}

impl BatchReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }

    /// Header plus one row per entry, in manifest order.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = [
            "image_id",
            "status",
            "rounds",
            "final_l_con",
            "sinkhorn_iterations",
            "otsu_threshold",
            "mae",
            "f_beta",
            "iou",
        ];
        let csv_err = |e: csv::Error| Error::InvalidValue {
            key: "report".into(),
            value: e.to_string(),
        };
        w.write_record(header).map_err(csv_err)?;
        for row in &self.rows {
            let record: Vec<String> = match &row.outcome {
                Ok((report, scores)) => {
                    let m = |f: fn(&Scores) -> f64| scores.as_ref().map_or(String::new(), |s| f(s).to_string());
                    vec![
                        row.id.clone(),
                        "ok".into(),
                        report.rounds().to_string(),
                        report.final_loss().map_or(String::new(), |l| l.to_string()),
                        report.sinkhorn_iterations.to_string(),
                        report.otsu_threshold.to_string(),
                        m(|s| s.mae),
                        m(|s| s.f_beta),
                        m(|s| s.iou),
                    ]
                }
                Err(e) => {
                    let mut r = vec![row.id.clone(), format!("failed: {e}")];
                    r.resize(header.len(), String::new());
                    r
                }
            };
            w.write_record(&record).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidValue {
            key: "report".into(),
            value: e.to_string(),
        })?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn process_entry(entry: &ManifestEntry, cfg: &PipelineConfig) -> Result<(ImageReport, Option<Scores>)> {
    let features = read_feature_file(&entry.features)?;
    let weights = read_weight_file(&entry.weights)?;
    let out = run_image(&features, &weights, cfg)?;
    write_mask_pgm(&out.mask, entry.mask_path())?;
    write_saliency_pgm(&out.map, entry.map_path())?;
    let scores = match &entry.ground_truth {
        Some(p) => Some(score(&out.map, &out.mask, &read_mask_pgm(p)?)?),
        None => None,
    };
    Ok((out.report, scores))
}

/// Runs every manifest entry in order. A failing entry is recorded in the
/// report and does not stop the batch; only an unreadable or malformed
/// manifest is an error.
pub fn run_batch(manifest: &Path, cfg: &PipelineConfig) -> Result<BatchReport> {
    let text = fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let entries = parse_manifest(&text, base)?;
    let rows = entries
        .iter()
        .map(|entry| {
            let outcome = process_entry(entry, cfg).map_err(|e| {
                warn!("{}: {e}", entry.id());
                e.to_string()
            });
            BatchRow {
                id: entry.id(),
                outcome,
            }
        })
        .collect();
    Ok(BatchReport { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub id: String,
    pub scores: std::result::Result<Scores, String>,
}

impl fmt::Display for EvalRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.scores {
            Ok(s) => write!(f, "{}: mae={:.4} f_beta={:.4} iou={:.4}", self.id, s.mae, s.f_beta, s.iou),
            Err(e) => write!(f, "{}: failed: {e}", self.id),
        }
    }
}

/// Scores every `*.pgm` in `pred_dir` against the same-named file in
/// `gt_dir`. Predictions are binarized at 0.5 for F-beta and IoU.
pub fn evaluate_dirs(pred_dir: &Path, gt_dir: &Path) -> Result<Vec<EvalRow>> {
    let mut names: Vec<_> = fs::read_dir(pred_dir)
        .map_err(|e| Error::io(pred_dir, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "pgm"))
        .collect();
    names.sort();
    Ok(names
        .iter()
        .map(|pred_path| {
            let name = pred_path.file_name().expect("listed file");
            let scores = (|| {
                let pred = read_saliency_pgm(pred_path)?;
                let gt = read_mask_pgm(gt_dir.join(name))?;
                score(&pred, &binarize_at(&pred, INFERENCE_THRESHOLD), &gt)
            })()
            .map_err(|e| e.to_string());
            EvalRow {
                id: name.to_string_lossy().into_owned(),
                scores,
            }
        })
        .collect())
}

/// CSV with columns `image_id,status,mae,f_beta,iou`.
pub fn eval_csv(rows: &[EvalRow]) -> String {
    let mut out = String::from("image_id,status,mae,f_beta,iou\n");
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for row in rows {
        let record = match &row.scores {
            Ok(s) => vec![
                row.id.clone(),
                "ok".into(),
                s.mae.to_string(),
                s.f_beta.to_string(),
                s.iou.to_string(),
            ],
            Err(e) => vec![row.id.clone(), format!("failed: {e}"), String::new(), String::new(), String::new()],
        };
        w.write_record(&record).expect("writing to memory");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{disk_image, DiskParams};

    #[test]
    fn config_examples() {
        let mut cfg = PipelineConfig::default();
        cfg.apply_text("tau=0.4\n").unwrap();
        assert_eq!(cfg.tau, 0.4);
        assert_eq!(PipelineConfig { tau: 0.3, ..cfg.clone() }, PipelineConfig::default());
        let err = PipelineConfig::default().apply_text("tau=1.5").unwrap_err();
        assert!(matches!(err, Error::ValueOutOfRange { ref key, ref bound } if key == "tau" && bound == "[0, 1)"));
        assert!(matches!(
            PipelineConfig::default().apply_text("alpha=1"),
            Err(Error::UnknownKey(k)) if k == "alpha"
        ));
        let mut c = PipelineConfig::default();
        c.apply_text("# comment\n\n  k = 2  # trailing\nsigma=median\n").unwrap();
        assert_eq!(c.k, 2);
        assert!(c.apply_text("k=0").is_err());
        assert!(c.apply_text("k=two").is_err());
        assert!(c.apply_text("no equals sign").is_err());
    }

    #[test]
    fn overrides_win() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.txt");
        fs::write(&path, "tau=0.4\nrounds=5\n").unwrap();
        let cfg = parse_config(Some(&path), &[("tau".into(), "0.2".into())]).unwrap();
        assert_eq!((cfg.tau, cfg.rounds), (0.2, 5));
        let missing = parse_config(Some(&dir.path().join("nope")), &[]).unwrap();
        assert_eq!(missing, PipelineConfig::default());
    }

    #[test]
    fn manifest_parsing() {
        let base = Path::new("/data");
        let m = parse_manifest("# header\na.potf a.potw out/a\n\n/x.potf b.potw out/b gt/b.pgm\n", base).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].features, Path::new("/data/a.potf"));
        assert_eq!(m[1].features, Path::new("/x.potf"));
        assert_eq!(m[1].ground_truth.as_deref(), Some(Path::new("/data/gt/b.pgm")));
        assert_eq!(m[0].mask_path(), Path::new("/data/out/a_mask.pgm"));
        assert!(parse_manifest("", base).unwrap().is_empty());
        assert!(matches!(
            parse_manifest("a b c\nonly two\n", base),
            Err(Error::ManifestParse { line: 2, .. })
        ));
    }

    #[test]
    fn zero_features_give_empty_mask() {
        let f = FeatureField::new(3, 4, 4, vec![0.0; 48]).unwrap();
        let w = ClassifierWeights::from_rows(&[vec![1.0, 0.0, 0.0]]).unwrap();
        let out = run_image(&f, &w, &PipelineConfig::default()).unwrap();
        assert_eq!(out.mask.count_ones(), 0);
        assert_eq!(out.mask.shape(), (4, 4));
        assert!(out.report.warning.is_some());
    }

    #[test]
    fn synthetic_disk_is_recovered() {
        let img = disk_image(&DiskParams::default());
        let out = run_image(&img.features, &img.weights, &PipelineConfig::default()).unwrap();
        let score = iou(&out.mask, &img.truth).unwrap();
        assert!(score >= 0.95, "iou {score}, report {:?}", out.report);
        assert!(out.report.rounds() >= 1 && out.report.rounds() <= 3);
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let f = FeatureField::new(2, 1, 1, vec![1.0, 0.0]).unwrap();
        let w = ClassifierWeights::from_rows(&[vec![1.0, 0.0, 0.0]]).unwrap();
        assert!(run_image(&f, &w, &PipelineConfig::default()).is_err());
    }
}
