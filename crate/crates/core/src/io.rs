//! Binary feature (`POTF`) and classifier-weight (`POTW`) files.
//!
//! Both formats share a 5-byte preamble: a 4-byte magic and a 1-byte
//! version (currently 1). Integers are little-endian `u32`, payloads are
//! little-endian IEEE-754 `f32`.
//!
//! ```text
//! POTF | ver | D | H | W | D*H*W f32, channel-major planes of H*W
//! POTW | ver | C | D     | C*D f32, row-major (one row per class)
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const FEATURE_MAGIC: [u8; 4] = *b"POTF";
pub const WEIGHT_MAGIC: [u8; 4] = *b"POTW";
pub const FORMAT_VERSION: u8 = 1;

const FEATURE_HEADER_LEN: usize = 4 + 1 + 3 * 4;
const WEIGHT_HEADER_LEN: usize = 4 + 1 + 2 * 4;

/// A `D`-channel feature tensor over an `H x W` pixel grid.
///
/// Values are kept as `f32` exactly as stored on disk; accessors widen to
/// `f64` for computation.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureField {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl FeatureField {
    /// Builds a field from channel-major data, rejecting empty grids and
    /// non-finite values.
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::InvalidDimensions(format!(
                "D={channels}, H={height}, W={width}; all must be >= 1"
            )));
        }
        let expected = channels * height * width;
        if data.len() != expected {
            return Err(Error::InvalidDimensions(format!(
                "expected {expected} values, got {}",
                data.len()
            )));
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(idx));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    /// Builds a field from one feature vector per pixel (row-major pixel order).
    pub fn from_pixel_vectors(height: usize, width: usize, pixels: &[Vec<f64>]) -> Result<Self> {
        let n = height * width;
        if pixels.len() != n {
            return Err(Error::InvalidDimensions(format!(
                "expected {n} pixel vectors, got {}",
                pixels.len()
            )));
        }
        let channels = pixels.first().map_or(0, Vec::len);
        if pixels.iter().any(|p| p.len() != channels) {
            return Err(Error::InvalidDimensions(
                "pixel vectors differ in length".into(),
            ));
        }
        let mut data = vec![0f32; channels * n];
        for (i, p) in pixels.iter().enumerate() {
            for (c, &v) in p.iter().enumerate() {
                data[c * n + i] = v as f32;
            }
        }
        Self::new(channels, height, width, data)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `N = H * W`.
    pub fn num_pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Feature vector at pixel `i` (row-major pixel index).
    pub fn pixel(&self, i: usize) -> Vec<f64> {
        let n = self.num_pixels();
        (0..self.channels)
            .map(|c| f64::from(self.data[c * n + i]))
            .collect()
    }

    /// All pixel vectors, in pixel order.
    pub fn pixel_vectors(&self) -> Vec<Vec<f64>> {
        (0..self.num_pixels()).map(|i| self.pixel(i)).collect()
    }

    /// Multiplies every value by `s`.
    pub fn scaled(&self, s: f32) -> Result<Self> {
        let data = self.data.iter().map(|v| v * s).collect();
        Self::new(self.channels, self.height, self.width, data)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(FEATURE_HEADER_LEN + 4 * self.data.len());
        out.extend_from_slice(&FEATURE_MAGIC);
        out.push(FORMAT_VERSION);
        for dim in [self.channels, self.height, self.width] {
            out.extend_from_slice(&(dim as u32).to_le_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        check_preamble(bytes, FEATURE_MAGIC, FEATURE_HEADER_LEN)?;
        let d = read_u32(bytes, 5);
        let h = read_u32(bytes, 9);
        let w = read_u32(bytes, 13);
        let count = d
            .checked_mul(h)
            .and_then(|x| x.checked_mul(w))
            .ok_or_else(|| Error::InvalidDimensions(format!("D={d}, H={h}, W={w} overflows")))?;
        let data = read_payload(bytes, FEATURE_HEADER_LEN, count)?;
        Self::new(d, h, w, data)
    }
}

/// Linear classifier weights, one `D`-vector per foreground class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierWeights {
    num_classes: usize,
    dim: usize,
    rows: Vec<f32>,
}

impl ClassifierWeights {
    pub fn new(num_classes: usize, dim: usize, rows: Vec<f32>) -> Result<Self> {
        if num_classes == 0 || dim == 0 {
            return Err(Error::InvalidDimensions(format!(
                "C={num_classes}, D={dim}; both must be >= 1"
            )));
        }
        if rows.len() != num_classes * dim {
            return Err(Error::InvalidDimensions(format!(
                "expected {} weights, got {}",
                num_classes * dim,
                rows.len()
            )));
        }
        if let Some(idx) = rows.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(idx));
        }
        for (c, row) in rows.chunks(dim).enumerate() {
            if row.iter().all(|&v| v == 0.0) {
                return Err(Error::ZeroNormRow(c));
            }
        }
        Ok(Self {
            num_classes,
            dim,
            rows,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidDimensions("weight rows differ in length".into()));
        }
        let flat = rows.iter().flatten().map(|&v| v as f32).collect();
        Self::new(rows.len(), dim, flat)
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, class: usize) -> Vec<f64> {
        self.rows[class * self.dim..(class + 1) * self.dim]
            .iter()
            .map(|&v| f64::from(v))
            .collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(WEIGHT_HEADER_LEN + 4 * self.rows.len());
        out.extend_from_slice(&WEIGHT_MAGIC);
        out.push(FORMAT_VERSION);
        out.extend_from_slice(&(self.num_classes as u32).to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        for v in &self.rows {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        check_preamble(bytes, WEIGHT_MAGIC, WEIGHT_HEADER_LEN)?;
        let c = read_u32(bytes, 5);
        let d = read_u32(bytes, 9);
        let count = c
            .checked_mul(d)
            .ok_or_else(|| Error::InvalidDimensions(format!("C={c}, D={d} overflows")))?;
        let rows = read_payload(bytes, WEIGHT_HEADER_LEN, count)?;
        Self::new(c, d, rows)
    }
}

pub fn read_feature_file(path: impl AsRef<Path>) -> Result<FeatureField> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    FeatureField::from_bytes(&bytes)
}

pub fn write_feature_file(field: &FeatureField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, field.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_weight_file(path: impl AsRef<Path>) -> Result<ClassifierWeights> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    ClassifierWeights::from_bytes(&bytes)
}

pub fn write_weight_file(weights: &ClassifierWeights, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, weights.to_bytes()).map_err(|e| Error::io(path, e))
}

fn check_preamble(bytes: &[u8], magic: [u8; 4], header_len: usize) -> Result<()> {
    if bytes.len() < 4 {
        return Err(Error::TruncatedFile {
            expected: header_len,
            actual: bytes.len(),
        });
    }
    let found: [u8; 4] = bytes[..4].try_into().expect("4-byte slice");
    if found != magic {
        return Err(Error::MagicMismatch {
            expected: magic,
            found,
        });
    }
    if bytes.len() < header_len {
        return Err(Error::TruncatedFile {
            expected: header_len,
            actual: bytes.len(),
        });
    }
    if bytes[4] != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(bytes[4]));
    }
    Ok(())
}

fn read_u32(bytes: &[u8], offset: usize) -> usize {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("4-byte slice")) as usize
}

fn read_payload(bytes: &[u8], offset: usize, count: usize) -> Result<Vec<f32>> {
    let expected = count
        .checked_mul(4)
        .and_then(|x| x.checked_add(offset))
        .ok_or_else(|| Error::InvalidDimensions("payload size overflows".into()))?;
    if bytes.len() < expected {
        return Err(Error::TruncatedFile {
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::InvalidDimensions(format!(
            "{} trailing bytes after payload",
            bytes.len() - expected
        )));
    }
    let data: Vec<f32> = bytes[offset..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().expect("4-byte chunk")))
        .collect();
    if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue(idx));
    }
    Ok(data)
}
