//! Saliency maps, binary masks, and their binary-PGM (`P5`) encoding.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// A real-valued map with every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyImage {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl SaliencyImage {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != height * width {
            return Err(Error::InvalidDimensions(format!(
                "{height}x{width} image needs {} values, got {}",
                height * width,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidDimensions(format!(
                "saliency value {} at pixel {i} outside [0, 1]",
                values[i]
            )));
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            values: vec![0.0; height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `round(255 * v)` with halves rounded up.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.values
            .iter()
            .map(|&v| (255.0 * v + 0.5).floor().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        encode_pgm(self.width, self.height, &self.to_bytes())
    }
}

/// A strictly binary `{0, 1}` mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    values: Vec<u8>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, values: Vec<u8>) -> Result<Self> {
        if values.len() != height * width {
            return Err(Error::InvalidDimensions(format!(
                "{height}x{width} mask needs {} values, got {}",
                height * width,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|&v| v > 1) {
            return Err(Error::InvalidDimensions(format!(
                "mask value {} at pixel {i} is not binary",
                values[i]
            )));
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let values = (0..height)
            .flat_map(|y| (0..width).map(move |x| (y, x)))
            .map(|(y, x)| u8::from(f(y, x)))
            .collect();
        Self {
            height,
            width,
            values,
        }
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            values: vec![0; height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1).count()
    }

    /// The mask viewed as a `{0.0, 1.0}` saliency map.
    pub fn to_saliency(&self) -> SaliencyImage {
        SaliencyImage {
            height: self.height,
            width: self.width,
            values: self.values.iter().map(|&v| f64::from(v)).collect(),
        }
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        let bytes: Vec<u8> = self.values.iter().map(|&v| v * 255).collect();
        encode_pgm(self.width, self.height, &bytes)
    }
}

fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

pub fn write_mask_pgm(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, mask.to_pgm()).map_err(|e| Error::io(path, e))
}

pub fn write_saliency_pgm(map: &SaliencyImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, map.to_pgm()).map_err(|e| Error::io(path, e))
}

/// Decodes an 8-bit binary PGM into `(width, height, pixels)`.
pub fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        // whitespace and '#' comments between header tokens
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::MalformedPgm("incomplete header".into()));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).unwrap_or("").to_string());
    }
    if fields[0] != "P5" {
        return Err(Error::MalformedPgm(format!("unsupported magic {:?}", fields[0])));
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::MalformedPgm(format!("bad header number {s:?}")))
    };
    let (width, height, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(Error::MalformedPgm(format!("unsupported maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let n = width * height;
    if bytes.len() < pos + n {
        return Err(Error::TruncatedFile {
            expected: pos + n,
            actual: bytes.len(),
        });
    }
    let scale = 255.0 / maxval as f64;
    let pixels = bytes[pos..pos + n]
        .iter()
        .map(|&b| (f64::from(b) * scale).round().min(255.0) as u8)
        .collect();
    Ok((width, height, pixels))
}

/// Reads a PGM as a saliency map (`byte / 255`).
pub fn read_saliency_pgm(path: impl AsRef<Path>) -> Result<SaliencyImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (w, h, px) = decode_pgm(&bytes)?;
    SaliencyImage::new(h, w, px.iter().map(|&b| f64::from(b) / 255.0).collect())
}

/// Reads a PGM as a binary mask; bytes above 127 are foreground.
pub fn read_mask_pgm(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (w, h, px) = decode_pgm(&bytes)?;
    BinaryMask::new(h, w, px.iter().map(|&b| u8::from(b > 127)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_pgm_bytes() {
        let m = BinaryMask::new(1, 2, vec![1, 0]).unwrap();
        let mut expected = b"P5\n2 1\n255\n".to_vec();
        expected.extend_from_slice(&[255, 0]);
        assert_eq!(m.to_pgm(), expected);
    }

    #[test]
    fn saliency_rounds_half_up() {
        let s = SaliencyImage::new(1, 3, vec![0.5, 1.0, 0.0]).unwrap();
        assert_eq!(s.to_bytes(), vec![128, 255, 0]);
    }

    #[test]
    fn payload_length() {
        let s = SaliencyImage::zeros(3, 5);
        let header = b"P5\n5 3\n255\n".len();
        assert_eq!(s.to_pgm().len(), header + 15);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(SaliencyImage::new(1, 1, vec![1.5]).is_err());
        assert!(SaliencyImage::new(1, 1, vec![f64::NAN]).is_err());
        assert!(BinaryMask::new(1, 1, vec![2]).is_err());
    }

    #[test]
    fn pgm_decode_round_trip() {
        let m = BinaryMask::new(2, 3, vec![1, 0, 1, 1, 0, 0]).unwrap();
        let (w, h, px) = decode_pgm(&m.to_pgm()).unwrap();
        assert_eq!((w, h), (3, 2));
        assert_eq!(px, vec![255, 0, 255, 255, 0, 0]);
    }

    #[test]
    fn pgm_header_comment() {
        let bytes = b"P5\n# made by hand\n2 1\n255\n\x07\x08";
        assert_eq!(decode_pgm(bytes).unwrap(), (2, 1, vec![7, 8]));
    }

    #[test]
    fn pgm_rejects_ascii_variant() {
        assert!(matches!(decode_pgm(b"P2\n1 1\n255\n0"), Err(Error::MalformedPgm(_))));
    }
}
