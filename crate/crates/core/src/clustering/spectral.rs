//! Normalized spectral clustering (Ng-Jordan-Weiss embedding) with a soft
//! k-means readout.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::eigen::smallest_eigenpairs;
use super::kmeans::kmeans_soft;
use super::{sq_dist, SoftAssignment};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_POINTS: usize = 2048;

/// Gaussian affinity bandwidth rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaRule {
    /// Median of all pairwise distances.
    Median,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    pub sigma: SigmaRule,
    /// Larger point sets are uniformly subsampled; the rest inherit the
    /// assignment of their nearest sampled neighbour.
    pub max_points: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            sigma: SigmaRule::Median,
            max_points: DEFAULT_MAX_POINTS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spectral {
    pub assignment: SoftAssignment,
    /// The `k` smallest eigenvalues of `L_sym` on the sampled points.
    pub eigenvalues: Vec<f64>,
    pub sigma: f64,
    /// Indices (into the input) of the points the eigenproblem ran on.
    pub sampled: Vec<usize>,
}

pub fn spectral_soft(points: &[Vec<f64>], k: usize, temperature: f64, seed: u64) -> Result<Spectral> {
    spectral_soft_with(points, k, temperature, seed, &SpectralOptions::default())
}

pub fn spectral_soft_with(
    points: &[Vec<f64>],
    k: usize,
    temperature: f64,
    seed: u64,
    opts: &SpectralOptions,
) -> Result<Spectral> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if points.len() < k {
        return Err(Error::TooFewPoints {
            points: points.len(),
            k,
        });
    }
    let sampled = subsample(points.len(), opts.max_points.max(k), seed);
    let sample: Vec<Vec<f64>> = sampled.iter().map(|&i| points[i].clone()).collect();

    let sigma = match opts.sigma {
        SigmaRule::Fixed(s) if s > 0.0 => s,
        SigmaRule::Fixed(s) => {
            return Err(Error::InvalidParameter(format!("sigma must be > 0, got {s}")))
        }
        SigmaRule::Median => median_distance(&sample),
    };
    let laplacian = normalized_laplacian(&sample, sigma);
    let m = sample.len();
    let eig = smallest_eigenpairs(&laplacian, m, k, seed)?;

    let embedding: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let row: Vec<f64> = eig.vectors[..k].iter().map(|v| v[i]).collect();
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.into_iter().map(|x| x / norm).collect()
            } else {
                row
            }
        })
        .collect();
    let km = kmeans_soft(&embedding, k, temperature, seed)?;

    let weights = if sampled.len() == points.len() {
        km.assignment.weights().to_vec()
    } else {
        propagate(points, &sample, &sampled, &km.assignment)
    };
    Ok(Spectral {
        assignment: SoftAssignment::new((0..points.len()).collect(), k, weights)?,
        eigenvalues: eig.values[..k].to_vec(),
        sigma,
        sampled,
    })
}

/// `L_sym = I - D^{-1/2} A D^{-1/2}` with `A_ij = exp(-|f_i - f_j|^2 / (2 sigma^2))`
/// and zero self-affinity. Isolated points keep an identity row.
pub fn normalized_laplacian(points: &[Vec<f64>], sigma: f64) -> Vec<f64> {
    let n = points.len();
    let two_sigma_sq = 2.0 * sigma * sigma;
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let w = (-sq_dist(&points[i], &points[j]) / two_sigma_sq).exp();
            a[i * n + j] = w;
            a[j * n + i] = w;
        }
    }
    let inv_sqrt_deg: Vec<f64> = (0..n)
        .map(|i| {
            let d: f64 = a[i * n..(i + 1) * n].iter().sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    for i in 0..n {
        for j in 0..n {
            let off = a[i * n + j] * inv_sqrt_deg[i] * inv_sqrt_deg[j];
            a[i * n + j] = if i == j { 1.0 - off } else { -off };
        }
    }
    a
}

/// Median pairwise Euclidean distance; falls back to the largest distance
/// when the median is zero, and to 1 for a set of identical points.
pub fn median_distance(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    let mut d: Vec<f64> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            d.push(sq_dist(&points[i], &points[j]).sqrt());
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    let mid = d.len() / 2;
    let (_, &mut median, _) = d.select_nth_unstable_by(mid, f64::total_cmp);
    if median > 0.0 {
        return median;
    }
    let max = d.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        max
    } else {
        1.0
    }
}

fn subsample(n: usize, cap: usize, seed: u64) -> Vec<usize> {
    if n <= cap {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5bd1_e995);
    let mut idx = rand::seq::index::sample(&mut rng, n, cap).into_vec();
    idx.sort_unstable();
    idx
}

fn propagate(
    points: &[Vec<f64>],
    sample: &[Vec<f64>],
    sampled: &[usize],
    sample_assignment: &SoftAssignment,
) -> Vec<f64> {
    let k = sample_assignment.k();
    let mut slot = vec![usize::MAX; points.len()];
    for (s, &i) in sampled.iter().enumerate() {
        slot[i] = s;
    }
    let mut out = Vec::with_capacity(points.len() * k);
    for (i, p) in points.iter().enumerate() {
        let src = if slot[i] != usize::MAX {
            slot[i]
        } else {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (s, q) in sample.iter().enumerate() {
                let d = sq_dist(p, q);
                if d < best_d {
                    best = s;
                    best_d = d;
                }
            }
            best
        };
        out.extend_from_slice(sample_assignment.row(src));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::eigen::symmetric_eigen;

    fn blobs() -> Vec<Vec<f64>> {
        let mut pts = Vec::new();
        for i in 0..6 {
            let t = i as f64 * 0.05;
            pts.push(vec![t, -t]);
            pts.push(vec![20.0 + t, 20.0 + t]);
        }
        pts
    }

    #[test]
    fn separated_blobs_split_exactly() {
        let pts = blobs();
        let opts = SpectralOptions {
            sigma: SigmaRule::Fixed(1.0),
            ..Default::default()
        };
        let sp = spectral_soft_with(&pts, 2, 0.1, 3, &opts).unwrap();
        let dominant: Vec<usize> = (0..pts.len())
            .map(|i| {
                let r = sp.assignment.row(i);
                assert!(r[0].max(r[1]) > 0.99);
                usize::from(r[1] > r[0])
            })
            .collect();
        for i in (0..pts.len()).step_by(2) {
            assert_eq!(dominant[i], dominant[0]);
            assert_eq!(dominant[i + 1], 1 - dominant[0]);
        }
        // disconnected graph: two zero eigenvalues
        assert!(sp.eigenvalues.iter().all(|l| l.abs() < 1e-8));
    }

    #[test]
    fn single_cluster() {
        let sp = spectral_soft(&blobs(), 1, 0.1, 0).unwrap();
        assert!(sp.assignment.weights().iter().all(|&w| w == 1.0));
    }

    #[test]
    fn laplacian_spectrum_in_range() {
        let pts: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.91).cos()])
            .collect();
        let l = normalized_laplacian(&pts, median_distance(&pts));
        let e = symmetric_eigen(&l, pts.len()).unwrap();
        assert!(e.values.iter().all(|&v| (-1e-8..=2.0 + 1e-8).contains(&v)));
        // connected graph
        assert!(e.values[0].abs() < 1e-8);
        assert!(e.values[1] > 1e-6);
    }

    #[test]
    fn capped_sample_propagates_to_all_points() {
        let pts = blobs();
        let opts = SpectralOptions {
            sigma: SigmaRule::Fixed(1.0),
            max_points: 6,
        };
        let sp = spectral_soft_with(&pts, 2, 0.1, 9, &opts).unwrap();
        assert_eq!(sp.sampled.len(), 6);
        assert_eq!(sp.assignment.len(), pts.len());
        for i in 0..pts.len() {
            let s: f64 = sp.assignment.row(i).iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_points_have_unit_sigma() {
        assert_eq!(median_distance(&[vec![1.0], vec![1.0], vec![1.0]]), 1.0);
        assert_eq!(median_distance(&[vec![0.0], vec![0.0], vec![0.0], vec![0.0], vec![3.0]]), 3.0);
    }
}
