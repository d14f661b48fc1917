//! Small generated inputs with known answers, for tests and the demo.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::image::BinaryMask;
use crate::io::{ClassifierWeights, FeatureField};

/// A feature field with its classifier and the mask it was built from.
#[derive(Debug, Clone)]
pub struct SyntheticImage {
    pub features: FeatureField,
    pub weights: ClassifierWeights,
    pub truth: BinaryMask,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskParams {
    pub size: usize,
    pub channels: usize,
    pub radius: f64,
    pub noise: f64,
    pub seed: u64,
}

impl Default for DiskParams {
    fn default() -> Self {
        Self {
            size: 32,
            channels: 8,
            radius: 8.0,
            noise: 0.05,
            seed: 7,
        }
    }
}

/// A centered disk on a square grid. Disk pixels sit near axis 0, the rest
/// near axis 1, each coordinate perturbed by Gaussian noise; the single
/// classifier row is axis 0.
pub fn disk_image(params: &DiskParams) -> SyntheticImage {
    assert!(params.channels >= 2 && params.size >= 1);
    let (n, d) = (params.size, params.channels);
    let center = (n as f64 - 1.0) / 2.0;
    let truth = BinaryMask::from_fn(n, n, |y, x| {
        let (dy, dx) = (y as f64 - center, x as f64 - center);
        dy * dy + dx * dx <= params.radius * params.radius
    });
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let noise = Normal::new(0.0, params.noise).expect("noise must be finite and >= 0");
    let pixels: Vec<Vec<f64>> = truth
        .values()
        .iter()
        .map(|&inside| {
            let axis = if inside == 1 { 0 } else { 1 };
            (0..d)
                .map(|c| f64::from(u8::from(c == axis)) + noise.sample(&mut rng))
                .collect()
        })
        .collect();
    let features = FeatureField::from_pixel_vectors(n, n, &pixels).expect("finite by construction");
    let mut w = vec![0.0; d];
    w[0] = 1.0;
    let weights = ClassifierWeights::from_rows(&[w]).expect("unit row");
    SyntheticImage {
        features,
        weights,
        truth,
    }
}

/// Two concentric circles of `per_ring` evenly spaced points, radii 1 and
/// 5. Returns the points and each point's ring (0 inner, 1 outer).
pub fn concentric_rings(per_ring: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut points = Vec::with_capacity(2 * per_ring);
    let mut labels = Vec::with_capacity(2 * per_ring);
    for (ring, radius) in [1.0f64, 5.0].into_iter().enumerate() {
        for t in 0..per_ring {
            let angle = std::f64::consts::TAU * t as f64 / per_ring as f64;
            points.push(vec![radius * angle.cos(), radius * angle.sin()]);
            labels.push(ring);
        }
    }
    (points, labels)
}
