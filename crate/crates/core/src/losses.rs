//! Loss values: confidence-weighted consistency, Dice, hinge ranking and
//! their combination. Plain functions of their inputs, no gradients.

use crate::cam::CamStack;
use crate::error::{Error, Result};
use crate::image::{BinaryMask, SaliencyImage};
use crate::prototypes::PrototypeCamStack;

pub const DEFAULT_DICE_SMOOTHING: f64 = 1.0;
pub const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport {
    pub consistency: f64,
    pub dice: f64,
    pub rank: f64,
    pub total: f64,
    pub lambda: f64,
}

impl LossReport {
    pub fn new(consistency: f64, dice: f64, rank: f64, lambda: f64) -> Self {
        Self {
            consistency,
            dice,
            rank,
            total: total_loss(dice, rank, lambda),
            lambda,
        }
    }
}

/// `(1/N) sum_i omega_i sum_c |pred_c(i) - target_c(i)|` over per-channel maps.
pub fn weighted_l1_gap(pred: &[Vec<f64>], target: &[Vec<f64>], omega: &[f64]) -> Result<f64> {
    let n = omega.len();
    if pred.len() != target.len() || pred.iter().chain(target).any(|m| m.len() != n) {
        return Err(Error::ShapeMismatch {
            left: (pred.len(), pred.first().map_or(0, Vec::len)),
            right: (target.len(), target.first().map_or(0, Vec::len)),
        });
    }
    if n == 0 {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for (i, &w) in omega.iter().enumerate() {
        let gap: f64 = pred.iter().zip(target).map(|(p, t)| (p[i] - t[i]).abs()).sum();
        acc += w * gap;
    }
    Ok(acc / n as f64)
}

/// Consistency between the re-weighted prototype maps and the classifier
/// CAMs over every category, background included. Prototype maps are
/// brought to `[0, 1]` by [`PrototypeCamStack::aligned_class_map`].
pub fn consistency_loss(stack: &PrototypeCamStack, cams: &CamStack, omega: &[f64]) -> Result<f64> {
    let shape = (stack.height(), stack.width());
    if shape != (cams.height(), cams.width())
        || stack.layout().categories != cams.num_categories()
        || omega.len() != stack.num_pixels()
    {
        return Err(Error::ShapeMismatch {
            left: shape,
            right: (cams.height(), cams.width()),
        });
    }
    let pred: Vec<Vec<f64>> = (0..cams.num_categories())
        .map(|c| stack.aligned_class_map(c))
        .collect();
    let target: Vec<Vec<f64>> = (0..cams.num_categories())
        .map(|c| cams.category(c).to_vec())
        .collect();
    weighted_l1_gap(&pred, &target, omega)
}

/// `1 - (2 sum p t + s) / (sum p + sum t + s)` with smoothing `s = 1`.
pub fn dice_loss(pred: &SaliencyImage, target: &BinaryMask) -> Result<f64> {
    dice_loss_smoothed(pred, target, DEFAULT_DICE_SMOOTHING)
}

pub fn dice_loss_smoothed(pred: &SaliencyImage, target: &BinaryMask, smoothing: f64) -> Result<f64> {
    if pred.shape() != target.shape() {
        return Err(Error::ShapeMismatch {
            left: pred.shape(),
            right: target.shape(),
        });
    }
    let (mut inter, mut sp, mut st) = (0.0, 0.0, 0.0);
    for (&p, &t) in pred.values().iter().zip(target.values()) {
        let t = f64::from(t);
        inter += p * t;
        sp += p;
        st += t;
    }
    Ok(1.0 - (2.0 * inter + smoothing) / (sp + st + smoothing))
}

/// `sum_{i<j} max(0, o_j - o_i)` for scores already sorted by ascending mask loss.
pub fn ranking_loss(scores: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (i, &oi) in scores.iter().enumerate() {
        for &oj in &scores[i + 1..] {
            acc += (oj - oi).max(0.0);
        }
    }
    acc
}

pub fn total_loss(mask_loss: f64, rank_loss: f64, lambda: f64) -> f64 {
    mask_loss + lambda * rank_loss
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gap_examples() {
        let m = vec![vec![0.3, 0.7]];
        assert_eq!(weighted_l1_gap(&m, &m, &[1.0, 1.0]).unwrap(), 0.0);
        let t = vec![vec![0.5, 0.3]];
        assert_eq!(weighted_l1_gap(&m, &t, &[0.0, 0.0]).unwrap(), 0.0);
        let g = weighted_l1_gap(&m, &t, &[1.0, 0.5]).unwrap();
        assert_abs_diff_eq!(g, 0.2, epsilon = 1e-15);
        assert!(weighted_l1_gap(&m, &t, &[1.0]).is_err());
    }

    #[test]
    fn dice_examples() {
        let n = 1000;
        let ones = BinaryMask::new(1, 2 * n, [vec![1; n], vec![0; n]].concat()).unwrap();
        let same = dice_loss(&ones.to_saliency(), &ones).unwrap();
        assert!(same <= 5e-4 && same >= 0.0);
        let other = BinaryMask::new(1, 2 * n, [vec![0; n], vec![1; n]].concat()).unwrap();
        let disjoint = dice_loss(&ones.to_saliency(), &other).unwrap();
        assert_abs_diff_eq!(disjoint, 1.0 - 1.0 / 2001.0, epsilon = 1e-15);
        let empty = BinaryMask::zeros(10, 10);
        assert_eq!(dice_loss(&empty.to_saliency(), &empty).unwrap(), 0.0);
        assert!(dice_loss(&SaliencyImage::zeros(2, 3), &BinaryMask::zeros(3, 2)).is_err());
    }

    #[test]
    fn ranking_examples() {
        assert_eq!(ranking_loss(&[0.9, 0.5, 0.1]), 0.0);
        assert_abs_diff_eq!(ranking_loss(&[0.1, 0.9]), 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(ranking_loss(&[0.2, 0.5, 0.4]), 0.5, epsilon = 1e-15);
        assert_eq!(ranking_loss(&[0.3]), 0.0);
    }

    #[test]
    fn total_examples() {
        assert_eq!(total_loss(0.3, 0.2, 1.0), 0.3 + 0.2);
        assert_eq!(total_loss(0.3, 0.2, 0.0), 0.3);
        assert_eq!(total_loss(0.0, 0.0, 7.0), 0.0);
        let r = LossReport::new(0.1, 0.3, 0.2, DEFAULT_LAMBDA);
        assert_eq!(r.total, 0.3 + 0.2);
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn maps(channels: usize, n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(0.0f64..=1.0, n), channels)
    }

    proptest! {
        #[test]
        fn gap_nonnegative_and_monotone_in_omega(
            (a, b, omega, bump, at) in (1usize..4, 1usize..30).prop_flat_map(|(c, n)| {
                (maps(c, n), maps(c, n), prop::collection::vec(0.0f64..=1.0, n), 0.0f64..1.0, 0..n)
            })
        ) {
            let base = weighted_l1_gap(&a, &b, &omega).unwrap();
            prop_assert!(base >= 0.0);
            let mut more = omega.clone();
            more[at] += bump;
            prop_assert!(weighted_l1_gap(&a, &b, &more).unwrap() >= base);
        }

        #[test]
        fn dice_bounded_and_symmetric(bits in prop::collection::vec((0u8..2, 0u8..2), 1..200)) {
            let n = bits.len();
            let p = BinaryMask::new(1, n, bits.iter().map(|b| b.0).collect()).unwrap();
            let t = BinaryMask::new(1, n, bits.iter().map(|b| b.1).collect()).unwrap();
            let pt = dice_loss(&p.to_saliency(), &t).unwrap();
            let tp = dice_loss(&t.to_saliency(), &p).unwrap();
            prop_assert!((0.0..1.0).contains(&pt));
            prop_assert_eq!(pt, tp);
        }

        #[test]
        fn ranking_shift_invariant(scores in prop::collection::vec(-1.0f64..1.0, 1..12), shift in -5.0f64..5.0) {
            let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
            prop_assert!((ranking_loss(&scores) - ranking_loss(&shifted)).abs() < 1e-9);
            let mut desc = scores.clone();
            desc.sort_by(|a, b| b.total_cmp(a));
            prop_assert_eq!(ranking_loss(&desc), 0.0);
        }

        #[test]
        fn total_linear(m in -10.0f64..10.0, r in -10.0f64..10.0, l in 0.0f64..5.0) {
            prop_assert!((total_loss(m, r, l) - total_loss(0.0, r, l) - m).abs() <= 1e-12);
            prop_assert!((total_loss(m, 2.0 * r, l) - total_loss(m, r, l) - l * r).abs() <= 1e-12);
        }
    }
}
