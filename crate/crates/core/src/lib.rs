//! Annotation-free pseudo-saliency masks from precomputed pixel features.
//!
//! Class activation maps select pixels per category, a hybrid of spectral
//! and k-means clustering (blended by CAM entropy) forms prototypes, and
//! entropic optimal transport between pixels and prototypes refines them.
//! Transported mass re-weights prototype activation maps, and Otsu's
//! threshold on the resulting foreground map gives the mask.
//!
//! ```
//! use potmask_core::pipeline::{run_image, PipelineConfig};
//! use potmask_core::synthetic::{disk_image, DiskParams};
//!
//! let img = disk_image(&DiskParams::default());
//! let out = run_image(&img.features, &img.weights, &PipelineConfig::default()).unwrap();
//! assert_eq!(out.mask.shape(), (32, 32));
//! ```

pub mod cam;
pub mod clustering;
pub mod error;
pub mod image;
pub mod io;
pub mod losses;
pub mod masks;
pub mod metrics;
pub mod pipeline;
pub mod prototypes;
pub mod synthetic;
pub mod transport;

pub use error::{Error, Result};
