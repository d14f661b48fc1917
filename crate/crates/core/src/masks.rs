//! Foreground map construction and binarization (Otsu or fixed threshold).

use crate::cam::min_max_normalize;
use crate::error::{Error, Result};
use crate::image::{BinaryMask, SaliencyImage};
use crate::prototypes::PrototypeCamStack;

pub const HISTOGRAM_BINS: usize = 256;

/// Fixed inference threshold for predicted maps.
pub const INFERENCE_THRESHOLD: f64 = 0.5;

/// Per-pixel max over foreground class maps, min-max normalized.
pub fn foreground_map(stack: &PrototypeCamStack) -> Result<SaliencyImage> {
    let fg = stack.layout().background();
    if stack.layout().categories < 2 {
        return Err(Error::NoForegroundClasses);
    }
    let mut values = stack.class_map(0).to_vec();
    for c in 1..fg {
        for (v, &x) in values.iter_mut().zip(stack.class_map(c)) {
            *v = v.max(x);
        }
    }
    min_max_normalize(&mut values);
    SaliencyImage::new(stack.height(), stack.width(), values)
}

/// Histogram bin of `v`: the smallest `b` with `v <= b / 255`.
///
/// Thresholding at `b / 255` with a strict `>` therefore keeps exactly the
/// pixels whose bin exceeds `b`.
pub fn histogram_bin(v: f64) -> usize {
    let top = (HISTOGRAM_BINS - 1) as f64;
    let mut b = (v * top).ceil().clamp(0.0, top) as usize;
    while b > 0 && v <= (b - 1) as f64 / top {
        b -= 1;
    }
    while b < HISTOGRAM_BINS - 1 && v > b as f64 / top {
        b += 1;
    }
    b
}

/// Otsu threshold over a 256-bin histogram. Candidates are `b / 255` for
/// `b` in `0..=254`; the first candidate with maximal between-class
/// variance wins, and a constant map gives 0.
pub fn otsu_threshold(map: &SaliencyImage) -> f64 {
    let mut hist = [0u64; HISTOGRAM_BINS];
    for &v in map.values() {
        hist[histogram_bin(v)] += 1;
    }
    let n: u64 = hist.iter().sum();
    let total: u64 = hist.iter().enumerate().map(|(b, &h)| b as u64 * h).sum();

    let (mut best_b, mut best) = (0, 0.0);
    let (mut n0, mut s0) = (0u64, 0u64);
    for (b, &h) in hist.iter().enumerate().take(HISTOGRAM_BINS - 1) {
        n0 += h;
        s0 += b as u64 * h;
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        // n^2 times the between-class variance, from exact integer sums
        let diff = (n as i128 * s0 as i128 - n0 as i128 * total as i128) as f64;
        let score = diff * diff / (n0 as f64 * n1 as f64);
        if score > best {
            best = score;
            best_b = b;
        }
    }
    best_b as f64 / (HISTOGRAM_BINS - 1) as f64
}

/// Pixels strictly above `threshold`.
pub fn binarize_at(map: &SaliencyImage, threshold: f64) -> BinaryMask {
    let values = map.values().iter().map(|&v| u8::from(v > threshold)).collect();
    BinaryMask::new(map.height(), map.width(), values).expect("shape taken from a valid map")
}

pub fn extract_pseudo_mask(map: &SaliencyImage) -> BinaryMask {
    binarize_at(map, otsu_threshold(map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prototypes::{prototype_cams, reweight_and_aggregate, PrototypeLayout, PrototypeSet};
    use crate::io::FeatureField;
    use crate::transport::TransportPlan;

    fn img(values: Vec<f64>) -> SaliencyImage {
        SaliencyImage::new(1, values.len(), values).unwrap()
    }

    #[test]
    fn bins_respect_boundaries() {
        assert_eq!(histogram_bin(0.0), 0);
        assert_eq!(histogram_bin(1.0), 255);
        assert_eq!(histogram_bin(0.1), 26);
        for b in 0..256 {
            let edge = b as f64 / 255.0;
            assert_eq!(histogram_bin(edge), b);
            if b < 255 {
                assert_eq!(histogram_bin(f64::from_bits(edge.to_bits() + 1)), b + 1);
            }
        }
    }

    #[test]
    fn bimodal_split() {
        let map = img([vec![0.1; 50], vec![0.9; 50]].concat());
        let t = otsu_threshold(&map);
        assert!(t > 0.1 && t < 0.9);
        assert_eq!(t, 26.0 / 255.0);
        let mask = extract_pseudo_mask(&map);
        assert_eq!(mask.values(), [vec![0; 50], vec![1; 50]].concat());
    }

    #[test]
    fn constant_and_two_point_maps() {
        assert_eq!(otsu_threshold(&img(vec![0.4; 10])), 0.0);
        assert_eq!(extract_pseudo_mask(&img(vec![0.0; 10])).count_ones(), 0);
        assert_eq!(extract_pseudo_mask(&img(vec![1.0; 10])).count_ones(), 10);
        let two = img(vec![0.0, 1.0, 0.0, 1.0]);
        assert_eq!(extract_pseudo_mask(&two).values(), &[0, 1, 0, 1]);
    }

    #[test]
    fn fixed_threshold_is_strict() {
        let map = img(vec![0.5, 0.51, 0.4]);
        assert_eq!(binarize_at(&map, INFERENCE_THRESHOLD).values(), &[0, 1, 0]);
        assert_eq!(binarize_at(&img(vec![0.4; 5]), 0.5).count_ones(), 0);
    }

    /// One axis-aligned prototype per category, all with equal mass, so
    /// class map `c` is proportional to `f_i[c] / |f_i|`.
    fn stack_from_pixels(categories: usize, pixels: &[Vec<f64>]) -> PrototypeCamStack {
        let n = pixels.len();
        let dim = pixels[0].len();
        let layout = PrototypeLayout { categories, k: 1 };
        let vectors = (0..categories)
            .map(|c| Some((0..dim).map(|d| f64::from(u8::from(d == c))).collect()))
            .collect();
        let protos = PrototypeSet::from_vectors(layout, dim, vectors).unwrap();
        let features = FeatureField::from_pixel_vectors(1, n, pixels).unwrap();
        let raw = prototype_cams(&protos, &features).unwrap();
        let mass = 1.0 / (n * categories) as f64;
        let plan = TransportPlan::from_dense(n, categories, vec![mass; n * categories]).unwrap();
        let columns: Vec<usize> = (0..categories).collect();
        reweight_and_aggregate(&raw, &plan, &columns).unwrap()
    }

    #[test]
    fn foreground_map_examples() {
        // one foreground class: cosines 0.2 and 0.8 normalize to 0 and 1
        let s = stack_from_pixels(2, &[vec![0.2, 0.0, 0.96f64.sqrt()], vec![0.8, 0.0, 0.6]]);
        assert_eq!(foreground_map(&s).unwrap().values(), &[0.0, 1.0]);
        // two crossing classes whose max is constant
        let s = stack_from_pixels(3, &[vec![0.5, 0.25, 0.0, 0.5], vec![0.25, 0.5, 0.0, 0.5]]);
        assert_eq!(foreground_map(&s).unwrap().values(), &[0.0, 0.0]);
        let bg_only = stack_from_pixels(1, &[vec![0.3], vec![0.1]]);
        assert!(matches!(foreground_map(&bg_only), Err(Error::NoForegroundClasses)));
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustive rescan with exact rational comparison of
    /// `(n S0 - n0 S)^2 / (n0 n1)`.
    fn oracle(values: &[f64]) -> f64 {
        let bins: Vec<i128> = values
            .iter()
            .map(|&v| (0..256).find(|&b| v <= b as f64 / 255.0).unwrap() as i128)
            .collect();
        let n = bins.len() as i128;
        let s: i128 = bins.iter().sum();
        let mut best: Option<(i128, i128, usize)> = None;
        for b in 0..255 {
            let n0 = bins.iter().filter(|&&x| x <= b as i128).count() as i128;
            let s0: i128 = bins.iter().filter(|&&x| x <= b as i128).sum();
            let n1 = n - n0;
            if n0 == 0 || n1 == 0 {
                continue;
            }
            let d = n * s0 - n0 * s;
            let (num, den) = (d * d, n0 * n1);
            match best {
                Some((bn, bd, _)) if num * bd <= bn * den => {}
                _ if num == 0 => {}
                _ => best = Some((num, den, b)),
            }
        }
        best.map_or(0.0, |(_, _, b)| b as f64 / 255.0)
    }

    proptest! {
        #[test]
        fn otsu_matches_exhaustive_scan(values in prop::collection::vec(0.0f64..=1.0, 1..300)) {
            let map = SaliencyImage::new(1, values.len(), values.clone()).unwrap();
            prop_assert_eq!(otsu_threshold(&map), oracle(&values));
        }

        #[test]
        fn raising_threshold_shrinks_mask(values in prop::collection::vec(0.0f64..=1.0, 1..100), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let map = SaliencyImage::new(1, values.len(), values).unwrap();
            let (lo, hi) = (a.min(b), a.max(b));
            let big = binarize_at(&map, lo);
            let small = binarize_at(&map, hi);
            for (s, l) in small.values().iter().zip(big.values()) {
                prop_assert!(s <= l);
            }
        }

        #[test]
        fn binary_maps_are_fixed_points(bits in prop::collection::vec(0u8..2, 1..100)) {
            let mask = BinaryMask::new(1, bits.len(), bits).unwrap();
            prop_assert_eq!(extract_pseudo_mask(&mask.to_saliency()), mask);
        }
    }
}
