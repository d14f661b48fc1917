//! Per-class pixel selection, soft k-means, soft spectral clustering, and
//! the entropy-gated fusion that produces the membership tensor.

pub mod eigen;
pub mod kmeans;
pub mod matching;
pub mod spectral;

pub use kmeans::{kmeans_soft, kmeans_soft_with, KMeans, KMeansOptions};
pub use spectral::{spectral_soft, spectral_soft_with, SigmaRule, Spectral, SpectralOptions};

use crate::cam::CamStack;
use crate::error::{Error, Result};

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Soft cluster weights for an ordered set of pixels; each row sums to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftAssignment {
    pixel_ids: Vec<usize>,
    k: usize,
    weights: Vec<f64>,
}

impl SoftAssignment {
    pub fn new(pixel_ids: Vec<usize>, k: usize, weights: Vec<f64>) -> Result<Self> {
        if k == 0 || weights.len() != pixel_ids.len() * k {
            return Err(Error::InvalidDimensions(format!(
                "{} pixels x {k} clusters needs {} weights, got {}",
                pixel_ids.len(),
                pixel_ids.len() * k,
                weights.len()
            )));
        }
        Ok(Self {
            pixel_ids,
            k,
            weights,
        })
    }

    /// Same weights, relabelled to the given pixel ids.
    pub fn with_pixel_ids(mut self, pixel_ids: Vec<usize>) -> Result<Self> {
        if pixel_ids.len() != self.pixel_ids.len() {
            return Err(Error::PixelSetMismatch);
        }
        self.pixel_ids = pixel_ids;
        Ok(self)
    }

    pub fn pixel_ids(&self) -> &[usize] {
        &self.pixel_ids
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.pixel_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixel_ids.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.k..(i + 1) * self.k]
    }

    /// Hard label per row (first maximum).
    pub fn dominant(&self) -> Vec<usize> {
        (0..self.len())
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |b, (j, &w)| if w > b.1 { (j, w) } else { b })
                    .0
            })
            .collect()
    }

    /// Permutes columns so that column `a` of the result overlaps column `a`
    /// of `reference` as much as possible (exact matching on the soft
    /// overlap `sum_i ref[i][a] * self[i][b]`).
    pub fn aligned_to(&self, reference: &SoftAssignment) -> Result<SoftAssignment> {
        if reference.pixel_ids != self.pixel_ids || reference.k != self.k {
            return Err(Error::PixelSetMismatch);
        }
        let k = self.k;
        let mut overlap = vec![vec![0.0; k]; k];
        for i in 0..self.len() {
            let (r, s) = (reference.row(i), self.row(i));
            for a in 0..k {
                for b in 0..k {
                    overlap[a][b] += r[a] * s[b];
                }
            }
        }
        let perm = matching::max_weight_matching(&overlap);
        let weights = (0..self.len())
            .flat_map(|i| perm.iter().map(move |&b| self.row(i)[b]))
            .collect();
        SoftAssignment::new(self.pixel_ids.clone(), k, weights)
    }
}

/// `{ i : S_c(i) > tau }` in ascending pixel order.
pub fn select_class_pixels(cams: &CamStack, category: usize, tau: f64) -> Vec<usize> {
    cams.category(category)
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > tau)
        .map(|(i, _)| i)
        .collect()
}

/// `M_i = gamma_i * C_spc_i + (1 - gamma_i) * C_km_i`, row by row.
///
/// `gate[r]` belongs to row `r` of both assignments, which must cover the
/// same pixels with the same cluster count and be index-aligned already.
pub fn fuse_memberships(
    km: &SoftAssignment,
    spc: &SoftAssignment,
    gate: &[f64],
) -> Result<SoftAssignment> {
    if km.pixel_ids != spc.pixel_ids || km.k != spc.k || gate.len() != km.len() {
        return Err(Error::PixelSetMismatch);
    }
    let weights = km
        .weights
        .chunks(km.k)
        .zip(spc.weights.chunks(spc.k))
        .zip(gate)
        .flat_map(|((k_row, s_row), &g)| {
            k_row
                .iter()
                .zip(s_row)
                .map(move |(&kw, &sw)| g * sw + (1.0 - g) * kw)
        })
        .collect();
    SoftAssignment::new(km.pixel_ids.clone(), km.k, weights)
}

/// Dense `N x (|C|+1) x K` membership weights, zero outside each
/// category's selected pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipTensor {
    pixels: usize,
    categories: usize,
    k: usize,
    data: Vec<f64>,
}

impl MembershipTensor {
    pub fn zeros(pixels: usize, categories: usize, k: usize) -> Self {
        Self {
            pixels,
            categories,
            k,
            data: vec![0.0; pixels * categories * k],
        }
    }

    pub fn num_pixels(&self) -> usize {
        self.pixels
    }

    pub fn num_categories(&self) -> usize {
        self.categories
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, pixel: usize, category: usize, slot: usize) -> f64 {
        self.data[(pixel * self.categories + category) * self.k + slot]
    }

    pub fn set(&mut self, pixel: usize, category: usize, slot: usize, value: f64) {
        self.data[(pixel * self.categories + category) * self.k + slot] = value;
    }

    /// Writes one category's assignment; slots beyond `assignment.k()` stay 0.
    pub fn set_category(&mut self, category: usize, assignment: &SoftAssignment) -> Result<()> {
        if assignment.k() > self.k || category >= self.categories {
            return Err(Error::DimensionMismatch(format!(
                "category {category} with {} clusters does not fit {} x {}",
                assignment.k(),
                self.categories,
                self.k
            )));
        }
        for (r, &pixel) in assignment.pixel_ids().iter().enumerate() {
            if pixel >= self.pixels {
                return Err(Error::DimensionMismatch(format!("pixel {pixel} out of range")));
            }
            for (slot, &w) in assignment.row(r).iter().enumerate() {
                self.set(pixel, category, slot, w);
            }
        }
        Ok(())
    }
}
