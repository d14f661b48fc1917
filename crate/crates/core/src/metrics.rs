//! Saliency evaluation: MAE, F-beta and IoU.

use crate::error::{Error, Result};
use crate::image::{BinaryMask, SaliencyImage};

pub const DEFAULT_BETA_SQ: f64 = 0.3;

fn check(left: (usize, usize), right: (usize, usize)) -> Result<()> {
    if left != right {
        return Err(Error::ShapeMismatch { left, right });
    }
    Ok(())
}

/// Mean absolute error against a binary ground truth.
pub fn mae(pred: &SaliencyImage, gt: &BinaryMask) -> Result<f64> {
    check(pred.shape(), gt.shape())?;
    if pred.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = pred
        .values()
        .iter()
        .zip(gt.values())
        .map(|(&p, &g)| (p - f64::from(g)).abs())
        .sum();
    Ok(sum / pred.len() as f64)
}

/// True positives, false positives, false negatives.
pub fn confusion(pred: &BinaryMask, gt: &BinaryMask) -> Result<(usize, usize, usize)> {
    check(pred.shape(), gt.shape())?;
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (&p, &g) in pred.values().iter().zip(gt.values()) {
        match (p, g) {
            (1, 1) => tp += 1,
            (1, 0) => fp += 1,
            (0, 1) => fn_ += 1,
            _ => {}
        }
    }
    Ok((tp, fp, fn_))
}

/// `(1 + b2) P R / (b2 P + R)`. Both masks empty scores 1; any other case
/// without true positives scores 0.
pub fn f_beta(pred: &BinaryMask, gt: &BinaryMask, beta_sq: f64) -> Result<f64> {
    let (tp, fp, fn_) = confusion(pred, gt)?;
    if tp + fp + fn_ == 0 {
        return Ok(1.0);
    }
    if tp == 0 {
        return Ok(0.0);
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fn_) as f64;
    Ok((1.0 + beta_sq) * precision * recall / (beta_sq * precision + recall))
}

/// Intersection over union; both masks empty scores 1.
pub fn iou(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    let (tp, fp, fn_) = confusion(pred, gt)?;
    let union = tp + fp + fn_;
    if union == 0 {
        return Ok(1.0);
    }
    Ok(tp as f64 / union as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mask(v: &[u8]) -> BinaryMask {
        BinaryMask::new(1, v.len(), v.to_vec()).unwrap()
    }

    #[test]
    fn mae_examples() {
        let gt = mask(&[0, 1, 1, 0]);
        assert_eq!(mae(&gt.to_saliency(), &gt).unwrap(), 0.0);
        let ones = SaliencyImage::new(1, 4, vec![1.0; 4]).unwrap();
        assert_eq!(mae(&ones, &mask(&[0; 4])).unwrap(), 1.0);
        let p = SaliencyImage::new(1, 4, vec![0.0, 0.8, 0.6, 0.2]).unwrap();
        assert_abs_diff_eq!(mae(&p, &gt).unwrap(), 0.2, epsilon = 1e-15);
        assert!(mae(&p, &mask(&[0; 3])).is_err());
    }

    #[test]
    fn f_beta_examples() {
        let a = mask(&[1, 1, 0, 0]);
        assert_eq!(f_beta(&a, &a, DEFAULT_BETA_SQ).unwrap(), 1.0);
        assert_eq!(f_beta(&a, &mask(&[0, 0, 1, 1]), DEFAULT_BETA_SQ).unwrap(), 0.0);
        // TP=3, FP=1, FN=1
        let p = mask(&[1, 1, 1, 1, 0]);
        let g = mask(&[1, 1, 1, 0, 1]);
        assert_abs_diff_eq!(f_beta(&p, &g, 0.3).unwrap(), 0.75, epsilon = 1e-15);
        let empty = mask(&[0; 4]);
        assert_eq!(f_beta(&empty, &empty, 0.3).unwrap(), 1.0);
        assert_eq!(f_beta(&empty, &a, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn iou_examples() {
        let a = mask(&[1, 0, 1]);
        assert_eq!(iou(&a, &a).unwrap(), 1.0);
        assert_eq!(iou(&a, &mask(&[0, 1, 0])).unwrap(), 0.0);
        let p = mask(&[1, 1, 1, 1, 1, 0, 0, 0]);
        let g = mask(&[0, 0, 0, 1, 1, 1, 1, 1]);
        assert_eq!(iou(&p, &g).unwrap(), 0.25);
        assert_eq!(iou(&mask(&[0, 0]), &mask(&[0, 0])).unwrap(), 1.0);
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn pair() -> impl Strategy<Value = (BinaryMask, BinaryMask)> {
        prop::collection::vec((0u8..2, 0u8..2), 1..200).prop_map(|bits| {
            let n = bits.len();
            (
                BinaryMask::new(1, n, bits.iter().map(|b| b.0).collect()).unwrap(),
                BinaryMask::new(1, n, bits.iter().map(|b| b.1).collect()).unwrap(),
            )
        })
    }

    proptest! {
        #[test]
        fn f1_iou_relation((p, g) in pair()) {
            let j = iou(&p, &g).unwrap();
            let f1 = f_beta(&p, &g, 1.0).unwrap();
            prop_assert!((f1 - 2.0 * j / (1.0 + j)).abs() <= 1e-12);
            prop_assert!(j <= f1 + 1e-15);
        }

        #[test]
        fn precision_recall_duality((p, g) in pair(), beta_sq in 0.05f64..5.0) {
            prop_assume!(p.count_ones() > 0 && g.count_ones() > 0);
            let a = f_beta(&p, &g, beta_sq).unwrap();
            let b = f_beta(&g, &p, 1.0 / beta_sq).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn mae_symmetric_for_binary((p, g) in pair()) {
            let a = mae(&p.to_saliency(), &g).unwrap();
            let b = mae(&g.to_saliency(), &p).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
