use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{sq_dist, SoftAssignment};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_CENTER_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub max_iter: usize,
    /// Converged once no center moves farther than this.
    pub center_tol: f64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            max_iter: DEFAULT_MAX_ITER,
            center_tol: DEFAULT_CENTER_TOL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeans {
    pub assignment: SoftAssignment,
    pub centers: Vec<Vec<f64>>,
    /// Hard labels from the final Lloyd assignment step.
    pub labels: Vec<usize>,
    /// Within-cluster sum of squares after each update step.
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Lloyd's k-means with soft Gibbs weights `exp(-|f - c|^2 / temperature)`.
pub fn kmeans_soft(points: &[Vec<f64>], k: usize, temperature: f64, seed: u64) -> Result<KMeans> {
    kmeans_soft_with(points, k, temperature, seed, &KMeansOptions::default())
}

pub fn kmeans_soft_with(
    points: &[Vec<f64>],
    k: usize,
    temperature: f64,
    seed: u64,
    opts: &KMeansOptions,
) -> Result<KMeans> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if !(temperature > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be > 0, got {temperature}"
        )));
    }
    if points.len() < k {
        return Err(Error::TooFewPoints {
            points: points.len(),
            k,
        });
    }
    let mut centers = farthest_point_seeds(points, k, seed);
    let mut labels = vec![0; points.len()];
    let mut objective = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        assign_nearest(points, &centers, &mut labels);
        repair_empty_clusters(points, &centers, &mut labels, k);
        let updated = cluster_means(points, &labels, k);
        objective.push(wcss(points, &updated, &labels));
        let shift = centers
            .iter()
            .zip(&updated)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centers = updated;
        if shift < opts.center_tol {
            converged = true;
            break;
        }
    }

    let weights = points
        .iter()
        .flat_map(|p| gibbs_row(p, &centers, temperature))
        .collect();
    Ok(KMeans {
        assignment: SoftAssignment::new((0..points.len()).collect(), k, weights)?,
        centers,
        labels,
        objective,
        iterations,
        converged,
    })
}

/// First seed drawn from `seed`; each further seed is the point farthest
/// from all chosen seeds (lowest index on ties).
fn farthest_point_seeds(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.random_range(0..points.len());
    let mut centers = vec![points[first].clone()];
    let mut nearest: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[first])).collect();
    while centers.len() < k {
        let (next, _) = nearest
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &d)| if d > best.1 { (i, d) } else { best });
        centers.push(points[next].clone());
        for (d, p) in nearest.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[next]));
        }
    }
    centers
}

fn nearest_center(p: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centers.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

fn assign_nearest(points: &[Vec<f64>], centers: &[Vec<f64>], labels: &mut [usize]) {
    for (l, p) in labels.iter_mut().zip(points) {
        *l = nearest_center(p, centers);
    }
}

/// Moves, for each empty cluster, the point farthest from its own center
/// (taken from a cluster with more than one member) into that cluster.
fn repair_empty_clusters(points: &[Vec<f64>], centers: &[Vec<f64>], labels: &mut [usize], k: usize) {
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let donor = (0..points.len())
            .filter(|&i| sizes[labels[i]] > 1)
            .fold(None, |best: Option<(usize, f64)>, i| {
                let d = sq_dist(&points[i], &centers[labels[i]]);
                match best {
                    Some((_, bd)) if bd >= d => best,
                    _ => Some((i, d)),
                }
            });
        if let Some((i, _)) = donor {
            sizes[labels[i]] -= 1;
            labels[i] = empty;
            sizes[empty] = 1;
        }
    }
}

fn cluster_means(points: &[Vec<f64>], labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(p) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            s.iter_mut().for_each(|x| *x /= c as f64);
        }
    }
    sums
}

/// Within-cluster sum of squares of a hard labelling.
pub fn wcss(points: &[Vec<f64>], centers: &[Vec<f64>], labels: &[usize]) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| sq_dist(p, &centers[l]))
        .sum()
}

fn gibbs_row(p: &[f64], centers: &[Vec<f64>], temperature: f64) -> Vec<f64> {
    let logits: Vec<f64> = centers.iter().map(|c| -sq_dist(p, c) / temperature).collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn objective_non_increasing_and_deterministic(
            pts in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 4..40),
            k in 1usize..5,
            seed in 0u64..1000,
        ) {
            let a = kmeans_soft(&pts, k, 0.1, seed).unwrap();
            for w in a.objective.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0));
            }
            for i in 0..pts.len() {
                let s: f64 = a.assignment.row(i).iter().sum();
                prop_assert!((s - 1.0).abs() < 1e-9);
            }
            let b = kmeans_soft(&pts, k, 0.1, seed).unwrap();
            prop_assert_eq!(a.assignment.weights(), b.assignment.weights());
            prop_assert_eq!(a.centers, b.centers);
        }
    }
}
