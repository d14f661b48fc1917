//! Class activation maps, pixel class probabilities, entropy, and the
//! entropy gate that blends spectral and k-means memberships.
//!
//! Category indices run `0..C` for the foreground classes; index `C` is
//! the background.

use crate::error::{Error, Result};
use crate::io::{ClassifierWeights, FeatureField};

pub const DEFAULT_EPS_GATE: f64 = 1e-8;

/// Per-class activation maps plus the background map, all over `N` pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct CamStack {
    height: usize,
    width: usize,
    foreground: Vec<Vec<f64>>,
    background: Vec<f64>,
}

impl CamStack {
    /// Assembles a stack from already-normalized foreground maps; the
    /// background is derived as `1 - max_c S_c`.
    pub fn from_foreground(height: usize, width: usize, foreground: Vec<Vec<f64>>) -> Result<Self> {
        let n = height * width;
        if foreground.is_empty() {
            return Err(Error::NoForegroundClasses);
        }
        if foreground.iter().any(|m| m.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "foreground maps must have {n} pixels"
            )));
        }
        let background = (0..n)
            .map(|i| 1.0 - foreground.iter().map(|m| m[i]).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        Ok(Self {
            height,
            width,
            foreground,
            background,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn num_classes(&self) -> usize {
        self.foreground.len()
    }

    /// `|C| + 1`.
    pub fn num_categories(&self) -> usize {
        self.foreground.len() + 1
    }

    pub fn background(&self) -> &[f64] {
        &self.background
    }

    pub fn foreground(&self, class: usize) -> &[f64] {
        &self.foreground[class]
    }

    /// Map for any category, background included at index `C`.
    pub fn category(&self, c: usize) -> &[f64] {
        if c == self.foreground.len() {
            &self.background
        } else {
            &self.foreground[c]
        }
    }
}

/// `S_c = ReLU(w_c . f_i)`, min-max normalized per class, and
/// `S_bg = 1 - max_c S_c`.
pub fn compute_cams(features: &FeatureField, weights: &ClassifierWeights) -> Result<CamStack> {
    if features.channels() != weights.dim() {
        return Err(Error::DimensionMismatch(format!(
            "features have {} channels, weights have dimension {}",
            features.channels(),
            weights.dim()
        )));
    }
    let n = features.num_pixels();
    let data = features.data();
    let maps = (0..weights.num_classes())
        .map(|c| {
            let w = weights.row(c);
            let mut raw = vec![0.0; n];
            for (d, &wd) in w.iter().enumerate() {
                let plane = &data[d * n..(d + 1) * n];
                for (r, &f) in raw.iter_mut().zip(plane) {
                    *r += wd * f64::from(f);
                }
            }
            raw.iter_mut().for_each(|v| *v = v.max(0.0));
            min_max_normalize(&mut raw);
            raw
        })
        .collect();
    CamStack::from_foreground(features.height(), features.width(), maps)
}

/// Rescales to `[0, 1]`; a constant slice becomes all zeros.
pub fn min_max_normalize(values: &mut [f64]) {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if !(range > 0.0) {
        values.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    values
        .iter_mut()
        .for_each(|v| *v = ((*v - lo) / range).clamp(0.0, 1.0));
}

/// Per-pixel class distribution `P_{i,c}` over foreground classes and background.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassProbabilities {
    categories: usize,
    probs: Vec<f64>,
}

impl ClassProbabilities {
    pub fn num_categories(&self) -> usize {
        self.categories
    }

    pub fn num_pixels(&self) -> usize {
        self.probs.len() / self.categories
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.probs[i * self.categories..(i + 1) * self.categories]
    }
}

pub fn pixel_probabilities(cams: &CamStack) -> ClassProbabilities {
    let cats = cams.num_categories();
    let n = cams.num_pixels();
    let mut probs = Vec::with_capacity(n * cats);
    for i in 0..n {
        let total: f64 = (0..cats).map(|c| cams.category(c)[i]).sum();
        if total > 0.0 {
            probs.extend((0..cats).map(|c| cams.category(c)[i] / total));
        } else {
            // no category claims this pixel: maximally ambiguous
            probs.extend(std::iter::repeat(1.0 / cats as f64).take(cats));
        }
    }
    ClassProbabilities {
        categories: cats,
        probs,
    }
}

/// Shannon entropy (nats) of one distribution, with `0 ln 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.ln())
        .sum::<f64>()
}

/// Per-pixel entropy `eta_i` in nats.
pub fn pixel_entropy(probs: &ClassProbabilities) -> Vec<f64> {
    (0..probs.num_pixels())
        .map(|i| shannon_entropy(probs.row(i)).max(0.0))
        .collect()
}

/// `gamma_i = (eta_i - eta_min) / (eta_max - eta_min + eps)` over `pixels`,
/// clamped to `[0, 1]`. Output follows the order of `pixels`.
pub fn entropy_gate(eta: &[f64], pixels: &[usize], eps_gate: f64) -> Result<Vec<f64>> {
    if pixels.is_empty() {
        return Err(Error::EmptyPixelSet);
    }
    let (lo, hi) = pixels
        .iter()
        .map(|&i| eta[i])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let denom = hi - lo + eps_gate;
    Ok(pixels
        .iter()
        .map(|&i| ((eta[i] - lo) / denom).clamp(0.0, 1.0))
        .collect())
}
