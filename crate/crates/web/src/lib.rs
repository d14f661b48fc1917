//! WebAssembly bindings for the demo page in `www/`.
//!
//! Every export is an ordinary Rust function too, so the native test suite
//! exercises the same code the page calls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

use potmask_core::clustering::{kmeans_soft, spectral_soft_with, SigmaRule, SpectralOptions};
use potmask_core::metrics::iou;
use potmask_core::pipeline::{run_image, PipelineConfig};
use potmask_core::synthetic::{concentric_rings, disk_image, DiskParams};
use potmask_core::transport::{lp_oracle, sinkhorn, softmax, Marginals, SinkhornParams, EXACT_SIZE_LIMIT};

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Result of segmenting a synthetic disk.
#[wasm_bindgen]
pub struct DiskRun {
    size: usize,
    image: Vec<u8>,
    map: Vec<u8>,
    mask: Vec<u8>,
    truth: Vec<u8>,
    iou: f64,
    threshold: f64,
    losses: Vec<f64>,
}

#[wasm_bindgen]
impl DiskRun {
    #[wasm_bindgen(getter)]
    pub fn size(&self) -> usize {
        self.size
    }

    /// Grey levels of the classifier response, for display.
    #[wasm_bindgen(getter)]
    pub fn image(&self) -> Vec<u8> {
        self.image.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn map(&self) -> Vec<u8> {
        self.map.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn mask(&self) -> Vec<u8> {
        self.mask.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn truth(&self) -> Vec<u8> {
        self.truth.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn iou(&self) -> f64 {
        self.iou
    }

    #[wasm_bindgen(getter)]
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Consistency loss after each round.
    #[wasm_bindgen(getter)]
    pub fn losses(&self) -> Vec<f64> {
        self.losses.clone()
    }
}

/// Builds a noisy disk and runs the whole pipeline on it.
#[wasm_bindgen]
pub fn segment_disk(size: usize, radius: f64, noise: f64, seed: u64, rounds: usize) -> Result<DiskRun, JsError> {
    if !(4..=64).contains(&size) || !(noise >= 0.0 && noise.is_finite()) {
        return Err(JsError::new("size must be in 4..=64 and noise finite and >= 0"));
    }
    let img = disk_image(&DiskParams {
        size,
        channels: 8,
        radius,
        noise,
        seed,
    });
    let cfg = PipelineConfig {
        rounds: rounds.max(1),
        ..PipelineConfig::default()
    };
    let out = run_image(&img.features, &img.weights, &cfg).map_err(js_err)?;
    let response: Vec<f64> = img.features.pixel_vectors().iter().map(|f| f[0]).collect();
    let (lo, hi) = response.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let image = response
        .iter()
        .map(|&x| if hi > lo { (255.0 * (x - lo) / (hi - lo)).round() as u8 } else { 0 })
        .collect();
    Ok(DiskRun {
        size,
        image,
        map: out.map.to_bytes(),
        mask: out.mask.values().iter().map(|&b| b * 255).collect(),
        truth: img.truth.values().iter().map(|&b| b * 255).collect(),
        iou: iou(&out.mask, &img.truth).map_err(js_err)?,
        threshold: out.report.otsu_threshold,
        losses: out.report.loss_trajectory,
    })
}

/// An entropic plan next to the exact one for the same random instance.
#[wasm_bindgen]
pub struct TransportComparison {
    rows: usize,
    cols: usize,
    plan: Vec<f64>,
    exact: Vec<f64>,
    objective: f64,
    exact_objective: f64,
    iterations: usize,
    converged: bool,
}

#[wasm_bindgen]
impl TransportComparison {
    #[wasm_bindgen(getter)]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[wasm_bindgen(getter)]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major entropic plan.
    #[wasm_bindgen(getter)]
    pub fn plan(&self) -> Vec<f64> {
        self.plan.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn exact(&self) -> Vec<f64> {
        self.exact.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn objective(&self) -> f64 {
        self.objective
    }

    #[wasm_bindgen(getter)]
    pub fn exact_objective(&self) -> f64 {
        self.exact_objective
    }

    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    #[wasm_bindgen(getter)]
    pub fn converged(&self) -> bool {
        self.converged
    }
}

#[wasm_bindgen]
pub fn compare_transport(rows: usize, cols: usize, epsilon: f64, seed: u64) -> Result<TransportComparison, JsError> {
    if rows == 0 || cols == 0 || rows * cols > EXACT_SIZE_LIMIT {
        return Err(JsError::new(&format!("need 1 <= rows * cols <= {EXACT_SIZE_LIMIT}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let logits: Vec<f64> = (0..cols).map(|_| rng.random_range(-2.0..2.0)).collect();
    let marg = Marginals::uniform_rows(rows, softmax(&logits, 1.0)).map_err(js_err)?;
    let exact = lp_oracle(&s, &marg).map_err(js_err)?;
    let params = SinkhornParams {
        epsilon,
        max_iter: 20_000,
        ..SinkhornParams::default()
    };
    let plan = sinkhorn(&s, &marg, &params).map_err(js_err)?;
    Ok(TransportComparison {
        rows,
        cols,
        objective: plan.objective,
        iterations: plan.iterations,
        converged: plan.converged,
        plan: plan.data().to_vec(),
        exact: exact.plan.data().to_vec(),
        exact_objective: exact.objective,
    })
}

/// Two concentric rings labelled by both clusterings.
#[wasm_bindgen]
pub struct RingsClustering {
    points: Vec<f64>,
    truth: Vec<u32>,
    spectral: Vec<u32>,
    kmeans: Vec<u32>,
}

#[wasm_bindgen]
impl RingsClustering {
    /// Interleaved `x, y` coordinates.
    #[wasm_bindgen(getter)]
    pub fn points(&self) -> Vec<f64> {
        self.points.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn truth(&self) -> Vec<u32> {
        self.truth.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn spectral(&self) -> Vec<u32> {
        self.spectral.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn kmeans(&self) -> Vec<u32> {
        self.kmeans.clone()
    }
}

#[wasm_bindgen]
pub fn cluster_rings(per_ring: usize, sigma: f64, seed: u64) -> Result<RingsClustering, JsError> {
    if !(2..=256).contains(&per_ring) {
        return Err(JsError::new("per_ring must be in 2..=256"));
    }
    let (points, truth) = concentric_rings(per_ring);
    let opts = SpectralOptions {
        sigma: SigmaRule::Fixed(sigma),
        ..SpectralOptions::default()
    };
    let spc = spectral_soft_with(&points, 2, 0.1, seed, &opts).map_err(js_err)?;
    let km = kmeans_soft(&points, 2, 0.1, seed).map_err(js_err)?;
    let labels = |v: Vec<usize>| v.into_iter().map(|l| l as u32).collect();
    Ok(RingsClustering {
        points: points.concat(),
        truth: labels(truth),
        spectral: labels(spc.assignment.dominant()),
        kmeans: labels(km.labels),
    })
}
