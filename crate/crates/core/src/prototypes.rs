//! Prototype vectors per (category, slot), their cosine activation maps,
//! and re-weighting of those maps by transported mass.

use crate::clustering::MembershipTensor;
use crate::error::{Error, Result};
use crate::io::FeatureField;
use crate::transport::{HardAssignment, TransportPlan};

/// Shape of a prototype set: `categories` (foreground classes plus
/// background) times `k` slots. Prototype ids are `category * k + slot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrototypeLayout {
    pub categories: usize,
    pub k: usize,
}

impl PrototypeLayout {
    pub fn len(&self) -> usize {
        self.categories * self.k
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn id(&self, category: usize, slot: usize) -> usize {
        category * self.k + slot
    }

    pub fn category_of(&self, id: usize) -> usize {
        id / self.k
    }

    /// Index of the background category.
    pub fn background(&self) -> usize {
        self.categories - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeSet {
    layout: PrototypeLayout,
    dim: usize,
    vectors: Vec<f64>,
    valid: Vec<bool>,
}

impl PrototypeSet {
    /// Builds a set from per-id optional vectors; `None`, zero-norm, or
    /// non-finite vectors are marked invalid.
    pub fn from_vectors(layout: PrototypeLayout, dim: usize, vectors: Vec<Option<Vec<f64>>>) -> Result<Self> {
        if vectors.len() != layout.len() {
            return Err(Error::DimensionMismatch(format!(
                "layout has {} prototypes, got {}",
                layout.len(),
                vectors.len()
            )));
        }
        let mut flat = vec![0.0; layout.len() * dim];
        let mut valid = vec![false; layout.len()];
        for (id, v) in vectors.into_iter().enumerate() {
            let Some(v) = v else { continue };
            if v.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "prototype {id} has dimension {}, expected {dim}",
                    v.len()
                )));
            }
            let usable = v.iter().all(|x| x.is_finite()) && norm(&v) > 0.0;
            if usable {
                flat[id * dim..(id + 1) * dim].copy_from_slice(&v);
                valid[id] = true;
            }
        }
        Ok(Self {
            layout,
            dim,
            vectors: flat,
            valid,
        })
    }

    pub fn layout(&self) -> PrototypeLayout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, id: usize) -> &[f64] {
        &self.vectors[id * self.dim..(id + 1) * self.dim]
    }

    pub fn is_valid(&self, id: usize) -> bool {
        self.valid[id]
    }

    /// Ids of valid prototypes in ascending order; these index the columns
    /// of every cost matrix and transport plan built from this set.
    pub fn valid_ids(&self) -> Vec<usize> {
        (0..self.layout.len()).filter(|&id| self.valid[id]).collect()
    }

    pub fn num_valid(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Valid prototypes belonging to `category`.
    pub fn valid_in_category(&self, category: usize) -> usize {
        (0..self.layout.k)
            .filter(|&s| self.valid[self.layout.id(category, s)])
            .count()
    }

    /// Fills this set's invalid slots with `previous`'s vectors where
    /// those are valid.
    pub fn filled_from(&self, previous: &PrototypeSet) -> Result<PrototypeSet> {
        if previous.layout != self.layout || previous.dim != self.dim {
            return Err(Error::DimensionMismatch(
                "prototype sets differ in layout or dimension".into(),
            ));
        }
        let mut out = self.clone();
        for id in 0..self.layout.len() {
            if !self.valid[id] && previous.valid[id] {
                out.vectors[id * self.dim..(id + 1) * self.dim].copy_from_slice(previous.vector(id));
                out.valid[id] = true;
            }
        }
        Ok(out)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// `Z_{c,k} = sum_i M_{i,c,k} f_i / sum_i M_{i,c,k}`; zero total weight
/// leaves the prototype invalid.
pub fn compute_prototypes(features: &FeatureField, memberships: &MembershipTensor) -> Result<PrototypeSet> {
    let n = features.num_pixels();
    if memberships.num_pixels() != n {
        return Err(Error::DimensionMismatch(format!(
            "memberships cover {} pixels, features have {n}",
            memberships.num_pixels()
        )));
    }
    let layout = PrototypeLayout {
        categories: memberships.num_categories(),
        k: memberships.k(),
    };
    let dim = features.channels();
    let mut sums = vec![vec![0.0; dim]; layout.len()];
    let mut mass = vec![0.0; layout.len()];
    for i in 0..n {
        let f = features.pixel(i);
        for c in 0..layout.categories {
            for s in 0..layout.k {
                let w = memberships.get(i, c, s);
                if w == 0.0 {
                    continue;
                }
                let id = layout.id(c, s);
                mass[id] += w;
                for (acc, x) in sums[id].iter_mut().zip(&f) {
                    *acc += w * x;
                }
            }
        }
    }
    let vectors = sums
        .into_iter()
        .zip(mass)
        .map(|(s, m)| (m > 0.0).then(|| s.into_iter().map(|x| x / m).collect()))
        .collect();
    PrototypeSet::from_vectors(layout, dim, vectors)
}

/// `Z+_{c,k}` = mean of the features whose hard assignment is `(c, k)`.
///
/// `columns[j]` is the prototype id of plan column `j`.
pub fn update_prototypes(
    features: &FeatureField,
    hard: &HardAssignment,
    columns: &[usize],
    layout: PrototypeLayout,
) -> Result<PrototypeSet> {
    update_inner(features, hard, columns, layout, None)
}

/// Like [`update_prototypes`], but a pixel only counts towards a
/// prototype of category `c` if `eligible[c][pixel]` holds (typically: the
/// category's CAM selected that pixel). Prototypes left without eligible
/// pixels become invalid.
pub fn update_prototypes_within(
    features: &FeatureField,
    hard: &HardAssignment,
    columns: &[usize],
    layout: PrototypeLayout,
    eligible: &[Vec<bool>],
) -> Result<PrototypeSet> {
    let n = features.num_pixels();
    if eligible.len() != layout.categories || eligible.iter().any(|e| e.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "eligibility must be {} categories x {n} pixels",
            layout.categories
        )));
    }
    update_inner(features, hard, columns, layout, Some(eligible))
}

fn update_inner(
    features: &FeatureField,
    hard: &HardAssignment,
    columns: &[usize],
    layout: PrototypeLayout,
    eligible: Option<&[Vec<bool>]>,
) -> Result<PrototypeSet> {
    let n = features.num_pixels();
    if hard.len() != n {
        return Err(Error::IndexMismatch(format!(
            "hard assignment covers {} pixels, features have {n}",
            hard.len()
        )));
    }
    if columns.len() != hard.num_columns() || columns.iter().any(|&id| id >= layout.len()) {
        return Err(Error::IndexMismatch(
            "column ids do not fit the prototype layout".into(),
        ));
    }
    let dim = features.channels();
    let mut sums = vec![vec![0.0; dim]; layout.len()];
    let mut counts = vec![0usize; layout.len()];
    for (i, &j) in hard.columns().iter().enumerate() {
        let id = columns[j];
        if eligible.is_some_and(|e| !e[layout.category_of(id)][i]) {
            continue;
        }
        counts[id] += 1;
        for (acc, x) in sums[id].iter_mut().zip(features.pixel(i)) {
            *acc += x;
        }
    }
    let vectors = sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| (c > 0).then(|| s.into_iter().map(|x| x / c as f64).collect()))
        .collect();
    PrototypeSet::from_vectors(layout, dim, vectors)
}

/// Prototype activation maps, their transported masses, and class-level
/// aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeCamStack {
    height: usize,
    width: usize,
    layout: PrototypeLayout,
    raw: Vec<Option<Vec<f64>>>,
    masses: Vec<f64>,
    reweighted: Vec<Option<Vec<f64>>>,
    class_maps: Vec<Vec<f64>>,
}

impl PrototypeCamStack {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn layout(&self) -> PrototypeLayout {
        self.layout
    }

    /// Cosine map `M_{c,k}` in `[-1, 1]`, if the prototype is valid.
    pub fn raw(&self, id: usize) -> Option<&[f64]> {
        self.raw[id].as_deref()
    }

    /// Transported mass `gamma_{c,k}`; 0 before re-weighting.
    pub fn mass(&self, id: usize) -> f64 {
        self.masses[id]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn reweighted(&self, id: usize) -> Option<&[f64]> {
        self.reweighted[id].as_deref()
    }

    /// `sum_k gamma_{c,k} M_{c,k}`.
    pub fn class_map(&self, category: usize) -> &[f64] {
        &self.class_maps[category]
    }

    /// The class map with each cosine map shifted to `[0, 1]` as
    /// `(M + 1) / 2` before weighting, for comparison against classifier CAMs.
    pub fn aligned_class_map(&self, category: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.num_pixels()];
        for slot in 0..self.layout.k {
            let id = self.layout.id(category, slot);
            if let Some(m) = &self.raw[id] {
                let g = self.masses[id];
                for (o, &x) in out.iter_mut().zip(m) {
                    *o += g * (x + 1.0) / 2.0;
                }
            }
        }
        out
    }
}

/// `M_{c,k}(i) = cos(Z+_{c,k}, f_i)` for every valid prototype.
pub fn prototype_cams(protos: &PrototypeSet, features: &FeatureField) -> Result<PrototypeCamStack> {
    if protos.num_valid() == 0 {
        return Err(Error::NoValidPrototypes);
    }
    if protos.dim() != features.channels() {
        return Err(Error::DimensionMismatch(format!(
            "prototypes have dimension {}, features {}",
            protos.dim(),
            features.channels()
        )));
    }
    let layout = protos.layout();
    let pixels = features.pixel_vectors();
    let raw = (0..layout.len())
        .map(|id| {
            protos
                .is_valid(id)
                .then(|| pixels.iter().map(|f| cosine(f, protos.vector(id))).collect())
        })
        .collect();
    let n = features.num_pixels();
    Ok(PrototypeCamStack {
        height: features.height(),
        width: features.width(),
        layout,
        raw,
        masses: vec![0.0; layout.len()],
        reweighted: vec![None; layout.len()],
        class_maps: vec![vec![0.0; n]; layout.categories],
    })
}

/// `gamma_{c,k} = (1/N) sum_i T_{i,(c,k)}`, `M~_{c,k} = gamma M_{c,k}`,
/// `M~_c = sum_k M~_{c,k}`.
///
/// Columns whose prototype has no map (it received no pixels in the
/// update) keep their mass but contribute nothing to the class map.
pub fn reweight_and_aggregate(
    raw: &PrototypeCamStack,
    plan: &TransportPlan,
    columns: &[usize],
) -> Result<PrototypeCamStack> {
    let n = raw.num_pixels();
    if plan.rows() != n {
        return Err(Error::IndexMismatch(format!(
            "plan has {} rows, image has {n} pixels",
            plan.rows()
        )));
    }
    if columns.len() != plan.cols() {
        return Err(Error::IndexMismatch(format!(
            "{} column ids for {} plan columns",
            columns.len(),
            plan.cols()
        )));
    }
    let layout = raw.layout;
    let mut seen = vec![false; layout.len()];
    for &id in columns {
        if id >= layout.len() || std::mem::replace(&mut seen[id], true) {
            return Err(Error::IndexMismatch(format!("bad or repeated prototype id {id}")));
        }
    }

    let col_mass = plan.column_sums();
    let mut masses = vec![0.0; layout.len()];
    for (j, &id) in columns.iter().enumerate() {
        masses[id] = col_mass[j] / n as f64;
    }
    let reweighted: Vec<Option<Vec<f64>>> = (0..layout.len())
        .map(|id| {
            raw.raw[id]
                .as_ref()
                .map(|m| m.iter().map(|&x| masses[id] * x).collect())
        })
        .collect();
    let class_maps = (0..layout.categories)
        .map(|c| {
            let mut acc = vec![0.0; n];
            for s in 0..layout.k {
                if let Some(m) = &reweighted[layout.id(c, s)] {
                    for (a, &x) in acc.iter_mut().zip(m) {
                        *a += x;
                    }
                }
            }
            acc
        })
        .collect();
    Ok(PrototypeCamStack {
        height: raw.height,
        width: raw.width,
        layout,
        raw: raw.raw.clone(),
        masses,
        reweighted,
        class_maps,
    })
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn cosine_maps_scale_invariant(
            pixels in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 2..20),
            proto in prop::collection::vec(0.1f64..2.0, 3),
            scale in 0.01f32..100.0,
        ) {
            let f = FeatureField::from_pixel_vectors(1, pixels.len(), &pixels).unwrap();
            let g = f.scaled(scale).unwrap();
            let layout = PrototypeLayout { categories: 1, k: 1 };
            let p = PrototypeSet::from_vectors(layout, 3, vec![Some(proto)]).unwrap();
            let a = prototype_cams(&p, &f).unwrap();
            let b = prototype_cams(&p, &g).unwrap();
            for (x, y) in a.raw(0).unwrap().iter().zip(b.raw(0).unwrap()) {
                // features are stored as f32, so scaling rounds each coordinate
                prop_assert!((x - y).abs() < 1e-6);
            }
        }

        #[test]
        fn weighted_mean_within_feature_range(
            pixels in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 1..20),
            raw_w in prop::collection::vec(0.0f64..1.0, 20),
        ) {
            let n = pixels.len();
            let f = FeatureField::from_pixel_vectors(1, n, &pixels).unwrap();
            let ids: Vec<usize> = (0..n).collect();
            let mut w: Vec<f64> = raw_w[..n].to_vec();
            w[0] += 0.1;
            let mut m = MembershipTensor::zeros(n, 1, 1);
            m.set_category(0, &crate::clustering::SoftAssignment::new(ids, 1, w).unwrap()).unwrap();
            let p = compute_prototypes(&f, &m).unwrap();
            if p.is_valid(0) {
                for d in 0..2 {
                    let col: Vec<f64> = (0..n).map(|i| f.pixel(i)[d]).collect();
                    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    prop_assert!(p.vector(0)[d] >= lo - 1e-12 && p.vector(0)[d] <= hi + 1e-12);
                }
            }
        }
    }
}
