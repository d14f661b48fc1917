//! Feature-to-prototype optimal transport.
//!
//! Rows are pixels (uniform mass `1/N`), columns are the valid prototypes
//! of a [`PrototypeSet`] (mass `v` from classifier-aligned softmax). The
//! plan maximizes total similarity `<T, S>` under both marginal
//! constraints, solved either with entropic Sinkhorn iterations or exactly
//! for small instances.

mod exact;
mod sinkhorn;

pub use exact::{lp_oracle, ExactPlan, EXACT_SIZE_LIMIT};
pub use sinkhorn::{sinkhorn, SinkhornParams};

use crate::cam::shannon_entropy;
use crate::error::{Error, Result};
use crate::io::{ClassifierWeights, FeatureField};
use crate::prototypes::{cosine, norm, PrototypeSet};

/// Marginal sums must match 1 within this.
pub const MARGINAL_SUM_TOL: f64 = 1e-12;

/// `C_ij = 1 - cos(f_i, Z_j)`, in `[0, 2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    columns: Vec<usize>,
    cost: Vec<f64>,
}

impl CostMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Prototype id of each column.
    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.cols + j]
    }

    /// `S = 1 - C`, row-major.
    pub fn similarity(&self) -> Vec<f64> {
        self.cost.iter().map(|c| 1.0 - c).collect()
    }
}

/// Builds the cost matrix over all valid prototypes. Pixels with zero-norm
/// features cost 1 against every prototype.
pub fn cost_matrix(features: &FeatureField, protos: &PrototypeSet) -> Result<CostMatrix> {
    let columns = protos.valid_ids();
    if columns.is_empty() {
        return Err(Error::NoValidPrototypes);
    }
    if protos.dim() != features.channels() {
        return Err(Error::DimensionMismatch(format!(
            "prototypes have dimension {}, features {}",
            protos.dim(),
            features.channels()
        )));
    }
    let n = features.num_pixels();
    let mut cost = Vec::with_capacity(n * columns.len());
    for i in 0..n {
        let f = features.pixel(i);
        cost.extend(
            columns
                .iter()
                .map(|&id| (1.0 - cosine(&f, protos.vector(id))).clamp(0.0, 2.0)),
        );
    }
    Ok(CostMatrix {
        rows: n,
        cols: columns.len(),
        columns,
        cost,
    })
}

/// Row and column masses of the transport problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    row: Vec<f64>,
    col: Vec<f64>,
}

impl Marginals {
    pub fn new(row: Vec<f64>, col: Vec<f64>) -> Result<Self> {
        for (name, m) in [("row", &row), ("column", &col)] {
            if m.is_empty() {
                return Err(Error::InvalidMarginals(format!("{name} marginal is empty")));
            }
            if m.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::InvalidMarginals(format!(
                    "{name} marginal has a negative or non-finite entry"
                )));
            }
            let s: f64 = m.iter().sum();
            if (s - 1.0).abs() > MARGINAL_SUM_TOL * m.len().max(1) as f64 {
                return Err(Error::InvalidMarginals(format!("{name} marginal sums to {s}")));
            }
        }
        Ok(Self { row, col })
    }

    /// Uniform `1/N` rows against the given column masses.
    pub fn uniform_rows(n: usize, col: Vec<f64>) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n], col)
    }

    pub fn row(&self) -> &[f64] {
        &self.row
    }

    pub fn col(&self) -> &[f64] {
        &self.col
    }
}

/// `softmax(x / temperature)`, max-shifted.
pub fn softmax(x: &[f64], temperature: f64) -> Vec<f64> {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|v| ((v - max) / temperature).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

/// Classifier direction used for background prototypes:
/// the normalized negative mean foreground weight, or `None` if that mean
/// vanishes.
pub fn background_weight(weights: &ClassifierWeights) -> Option<Vec<f64>> {
    let c = weights.num_classes();
    let mut mean = vec![0.0; weights.dim()];
    for class in 0..c {
        for (m, w) in mean.iter_mut().zip(weights.row(class)) {
            *m -= w / c as f64;
        }
    }
    let n = norm(&mean);
    (n > 0.0).then(|| mean.into_iter().map(|x| x / n).collect())
}

/// `s_{c,k} = cos(Z_{c,k}, w_c)`, `v = softmax(s / temperature)` over valid
/// prototypes (in `valid_ids` order), rows uniform `1/N`.
pub fn prototype_marginals(
    protos: &PrototypeSet,
    weights: &ClassifierWeights,
    temperature: f64,
    num_pixels: usize,
) -> Result<Marginals> {
    if !(temperature > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "marginal temperature must be > 0, got {temperature}"
        )));
    }
    let layout = protos.layout();
    if layout.categories != weights.num_classes() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "{} prototype categories for {} classifier classes",
            layout.categories,
            weights.num_classes()
        )));
    }
    let ids = protos.valid_ids();
    if ids.is_empty() {
        return Err(Error::NoValidPrototypes);
    }
    let bg = background_weight(weights);
    let scores: Vec<f64> = ids
        .iter()
        .map(|&id| {
            let c = layout.category_of(id);
            if c == layout.background() {
                bg.as_deref().map_or(0.0, |w| cosine(protos.vector(id), w))
            } else {
                cosine(protos.vector(id), &weights.row(c))
            }
        })
        .collect();
    Marginals::uniform_rows(num_pixels, softmax(&scores, temperature))
}

/// A nonnegative `rows x cols` coupling with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    /// `<T, S>` for the similarity the plan was solved against.
    pub objective: f64,
    pub iterations: usize,
    /// `||T 1 - row||_1`.
    pub row_residual: f64,
    /// `||T^T 1 - col||_1`.
    pub col_residual: f64,
    pub converged: bool,
}

impl TransportPlan {
    /// Wraps a dense plan; diagnostics are left empty.
    pub fn from_dense(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::InvalidDimensions(format!(
                "{rows}x{cols} plan needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidDimensions(
                "plan entries must be finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            rows,
            cols,
            data,
            objective: 0.0,
            iterations: 0,
            row_residual: 0.0,
            col_residual: 0.0,
            converged: true,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.data.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for r in self.data.chunks(self.cols) {
            for (o, x) in out.iter_mut().zip(r) {
                *o += x;
            }
        }
        out
    }

    pub fn total_mass(&self) -> f64 {
        self.data.iter().sum()
    }

    /// `<T, S>`.
    pub fn inner(&self, similarity: &[f64]) -> f64 {
        self.data.iter().zip(similarity).map(|(t, s)| t * s).sum()
    }

    /// L1 residuals of both marginal constraints.
    pub fn residuals(&self, marg: &Marginals) -> (f64, f64) {
        let l1 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();
        (
            l1(&self.row_sums(), marg.row()),
            l1(&self.column_sums(), marg.col()),
        )
    }
}

/// Per-pixel winning column `j*(i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardAssignment {
    columns: Vec<usize>,
    num_columns: usize,
}

impl HardAssignment {
    pub fn new(columns: Vec<usize>, num_columns: usize) -> Result<Self> {
        if columns.iter().any(|&j| j >= num_columns) {
            return Err(Error::IndexMismatch(format!(
                "column index out of range 0..{num_columns}"
            )));
        }
        Ok(Self {
            columns,
            num_columns,
        })
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn num_columns(&self) -> usize {
        self.num_columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// `M^_{i,j} = 1{j = j*(i)}`.
    pub fn indicator(&self, i: usize, j: usize) -> u8 {
        u8::from(self.columns[i] == j)
    }
}

/// `j*(i) = argmax_j T_ij`, lowest index on ties.
pub fn hard_assignment(plan: &TransportPlan) -> HardAssignment {
    let columns = (0..plan.rows())
        .map(|i| {
            plan.row(i)
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |b, (j, &t)| if t > b.1 { (j, t) } else { b })
                .0
        })
        .collect();
    HardAssignment {
        columns,
        num_columns: plan.cols(),
    }
}

/// `omega_i = 1 - H(T_i / sum T_i) / ln P`; a single column gives 1.
pub fn confidence_weights(plan: &TransportPlan) -> Result<Vec<f64>> {
    let p = plan.cols();
    (0..plan.rows())
        .map(|i| {
            let row = plan.row(i);
            let mass: f64 = row.iter().sum();
            if !(mass > 0.0) {
                return Err(Error::ZeroMassRow(i));
            }
            if p == 1 {
                return Ok(1.0);
            }
            let dist: Vec<f64> = row.iter().map(|t| t / mass).collect();
            Ok((1.0 - shannon_entropy(&dist) / (p as f64).ln()).clamp(0.0, 1.0))
        })
        .collect()
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn confidence_bounded_and_scale_invariant(
            (rows, cols, data) in (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
                (Just(r), Just(c), prop::collection::vec(0.001f64..1.0, r * c))
            }),
            scale in 0.001f64..1000.0,
        ) {
            let a = TransportPlan::from_dense(rows, cols, data.clone()).unwrap();
            let b = TransportPlan::from_dense(rows, cols, data.iter().map(|x| x * scale).collect()).unwrap();
            let wa = confidence_weights(&a).unwrap();
            let wb = confidence_weights(&b).unwrap();
            for (x, y) in wa.iter().zip(&wb) {
                prop_assert!((0.0..=1.0).contains(x));
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
