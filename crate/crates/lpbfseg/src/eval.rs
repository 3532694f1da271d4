//! Scoring of segmenter output against reference labels, plus the composite
//! images used for spatter analysis.
//!
//! Accuracy aggregates confusion counts over all frames first and derives one
//! precision/recall/F1 triple from the sums (micro-averaging). Per-frame
//! scores are reported alongside for diagnostics but never mixed into the
//! aggregate. Pixels labeled `Excluded` contribute to no count.

use crate::error::{Error, Result};
use crate::frame::{mask_or, Frame, Mask};
use crate::gt::{GroundTruth, GtLabel, Rect};
use crate::segment::Segmenter;

/// Pixel-level confusion counts; excluded pixels contribute to none.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub false_pos: u64,
    pub true_neg: u64,
    pub false_neg: u64,
}

impl ConfusionCounts {
    pub fn new(true_pos: u64, false_pos: u64, true_neg: u64, false_neg: u64) -> Self {
        ConfusionCounts {
            true_pos,
            false_pos,
            true_neg,
            false_neg,
        }
    }

    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }

    pub fn merge(&mut self, other: &ConfusionCounts) {
        self.true_pos += other.true_pos;
        self.false_pos += other.false_pos;
        self.true_neg += other.true_neg;
        self.false_neg += other.false_neg;
    }
}

/// Precision, recall and their harmonic mean, all in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Score {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Compares a predicted mask pixel-wise to the reference labeling.
pub fn confusion(pred: &Mask, gt: &GroundTruth) -> Result<ConfusionCounts> {
    if pred.dims() != gt.dims() {
        return Err(Error::shape(gt.dims(), pred.dims()));
    }
    let mut counts = ConfusionCounts::default();
    for (bit, label) in pred.bits().iter().zip(gt.labels()) {
        match (label, bit) {
            (GtLabel::Excluded, _) => {}
            (GtLabel::Foreground, true) => counts.true_pos += 1,
            (GtLabel::Foreground, false) => counts.false_neg += 1,
            (GtLabel::Background, true) => counts.false_pos += 1,
            (GtLabel::Background, false) => counts.true_neg += 1,
        }
    }
    Ok(counts)
}

/// Precision, recall and F1 with the 0/0 -> 0 convention.
pub fn f1(counts: &ConfusionCounts) -> Score {
    let ratio = |num: u64, denom: u64| -> f64 {
        if denom == 0 {
            0.0
        } else {
            num as f64 / denom as f64
        }
    };
    let precision = ratio(counts.true_pos, counts.true_pos + counts.false_pos);
    let recall = ratio(counts.true_pos, counts.true_pos + counts.false_neg);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Score {
        precision,
        recall,
        f1,
    }
}

/// Pixel-wise OR over all masks: nonzero wherever a pixel was foreground at
/// least once. An empty list yields an all-false mask of the given size.
pub fn composite(masks: &[Mask], width: usize, height: usize) -> Result<Mask> {
    let mut acc = Mask::new_false(width, height);
    for m in masks {
        acc = mask_or(&acc, m)?;
    }
    Ok(acc)
}

/// Fraction of foreground pixels that fall outside `region` dilated by
/// `overflow` pixels on each side. Zero means every detection stayed within
/// the expected cross-section (no spatter picked up); an empty composite also
/// counts as zero.
pub fn spatter_outside_fraction(comp: &Mask, region: Rect, overflow: usize) -> f64 {
    let mut total = 0u64;
    let mut outside = 0u64;
    for (x, y) in comp.true_positions() {
        total += 1;
        if region.distance(x, y) > overflow {
            outside += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        outside as f64 / total as f64
    }
}

/// Aggregate and per-frame accuracy of one segmenter over one sequence.
#[derive(Debug, Clone)]
pub struct SequenceEvaluation {
    pub counts: ConfusionCounts,
    /// One score derived from the summed counts (micro-average).
    pub micro: Score,
    /// Diagnostic per-frame scores, index-aligned with the sequence.
    pub per_frame: Vec<Score>,
    /// Unweighted mean of the per-frame F1 values (diagnostic only).
    pub macro_f1: f64,
}

/// Feeds frames to the segmenter in order and scores every mask against the
/// aligned reference labels.
pub fn evaluate_stream(
    segmenter: &mut Segmenter,
    pairs: impl Iterator<Item = (Frame, GroundTruth)>,
) -> Result<SequenceEvaluation> {
    let mut counts = ConfusionCounts::default();
    let mut per_frame = Vec::new();
    for (frame, gt) in pairs {
        let mask = segmenter.step(&frame)?;
        let c = confusion(&mask, &gt)?;
        per_frame.push(f1(&c));
        counts.merge(&c);
    }
    let macro_f1 = if per_frame.is_empty() {
        0.0
    } else {
        per_frame.iter().map(|s| s.f1).sum::<f64>() / per_frame.len() as f64
    };
    Ok(SequenceEvaluation {
        counts,
        micro: f1(&counts),
        per_frame,
        macro_f1,
    })
}

/// Convenience wrapper over in-memory frame/label slices.
pub fn evaluate_sequence(
    segmenter: &mut Segmenter,
    frames: &[Frame],
    gts: &[GroundTruth],
) -> Result<SequenceEvaluation> {
    if frames.len() != gts.len() {
        return Err(Error::Input(format!(
            "{} frames but {} ground-truth labelings",
            frames.len(),
            gts.len()
        )));
    }
    evaluate_stream(
        segmenter,
        frames.iter().cloned().zip(gts.iter().cloned()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gt::GroundTruth;

    fn gt_from_labels(width: usize, labels: Vec<GtLabel>) -> GroundTruth {
        let height = labels.len() / width;
        GroundTruth::from_parts(width, height, labels, None)
    }

    fn mask_from(width: usize, bits: Vec<bool>) -> Mask {
        let height = bits.len() / width;
        Mask::from_bits(width, height, bits).unwrap()
    }

    #[test]
    fn confusion_three_pixel_example() {
        // Labels [FG, Excl, BG] with an all-true prediction.
        let gt = gt_from_labels(
            3,
            vec![GtLabel::Foreground, GtLabel::Excluded, GtLabel::Background],
        );
        let pred = mask_from(3, vec![true, true, true]);
        let c = confusion(&pred, &gt).unwrap();
        assert_eq!(c, ConfusionCounts::new(1, 1, 0, 0));
    }

    #[test]
    fn confusion_perfect_prediction() {
        let gt = gt_from_labels(
            2,
            vec![
                GtLabel::Foreground,
                GtLabel::Background,
                GtLabel::Foreground,
                GtLabel::Background,
            ],
        );
        let pred = mask_from(2, vec![true, false, true, false]);
        let c = confusion(&pred, &gt).unwrap();
        assert_eq!(c.false_pos, 0);
        assert_eq!(c.false_neg, 0);
        assert_eq!(c.true_pos, 2);
    }

    #[test]
    fn confusion_all_false_prediction_counts_misses() {
        let gt = gt_from_labels(
            4,
            vec![
                GtLabel::Foreground,
                GtLabel::Foreground,
                GtLabel::Foreground,
                GtLabel::Background,
            ],
        );
        let pred = mask_from(4, vec![false; 4]);
        let c = confusion(&pred, &gt).unwrap();
        assert_eq!(c.false_neg, 3);
        assert_eq!(c.true_pos, 0);
    }

    #[test]
    fn confusion_ignores_excluded_perturbations() {
        // Flipping predictions inside excluded zones leaves the score unchanged.
        let gt = gt_from_labels(
            3,
            vec![
                GtLabel::Foreground,
                GtLabel::Excluded,
                GtLabel::Background,
                GtLabel::Excluded,
                GtLabel::Excluded,
                GtLabel::Background,
            ],
        );
        let a = mask_from(3, vec![true, false, false, false, false, false]);
        let b = mask_from(3, vec![true, true, false, true, true, false]);
        assert_eq!(confusion(&a, &gt).unwrap(), confusion(&b, &gt).unwrap());
    }

    #[test]
    fn f1_direct_arithmetic() {
        let s = f1(&ConfusionCounts::new(8, 2, 0, 2));
        assert_eq!(s.precision, 0.8);
        assert_eq!(s.recall, 0.8);
        assert!((s.f1 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn f1_zero_conventions() {
        let s = f1(&ConfusionCounts::new(0, 0, 10, 0));
        assert_eq!(s.precision, 0.0);
        assert_eq!(s.recall, 0.0);
        assert_eq!(s.f1, 0.0);

        let s = f1(&ConfusionCounts::new(5, 0, 0, 0));
        assert_eq!(s.f1, 1.0);
    }

    #[test]
    fn f1_symmetric_under_fp_fn_swap() {
        let a = f1(&ConfusionCounts::new(10, 3, 100, 7));
        let b = f1(&ConfusionCounts::new(10, 7, 100, 3));
        assert!((a.f1 - b.f1).abs() < 1e-12);
        assert_eq!(a.precision, b.recall);
    }

    #[test]
    fn composite_is_fold_of_mask_or() {
        let masks = vec![
            mask_from(3, vec![true, false, false]),
            mask_from(3, vec![false, true, false]),
            mask_from(3, vec![false, true, true]),
        ];
        let comp = composite(&masks, 3, 1).unwrap();
        let mut acc = Mask::new_false(3, 1);
        for m in &masks {
            acc = mask_or(&acc, m).unwrap();
        }
        assert_eq!(comp, acc);
        assert_eq!(comp.count_true(), 3);
    }

    #[test]
    fn composite_empty_list_is_all_false() {
        let comp = composite(&[], 5, 4).unwrap();
        assert_eq!(comp.dims(), (5, 4));
        assert!(!comp.any());
    }

    #[test]
    fn composite_single_mask_is_identity() {
        let m = mask_from(2, vec![true, false, false, true]);
        assert_eq!(composite(std::slice::from_ref(&m), 2, 2).unwrap(), m);
    }

    #[test]
    fn outside_fraction_counting() {
        let region = Rect::new(2, 2, 5, 5).unwrap();
        // 10 true pixels, 3 of them beyond the dilated region.
        let mut bits = vec![false; 10 * 10];
        for x in 2..=5 {
            bits[2 * 10 + x] = true;
        }
        for x in 2..=4 {
            bits[3 * 10 + x] = true;
        }
        bits[9 * 10 + 9] = true;
        bits[0] = true;
        bits[9] = true;
        let comp = mask_from(10, bits);
        let frac = spatter_outside_fraction(&comp, region, 1);
        assert!((frac - 0.3).abs() < 1e-12, "frac = {frac}");
    }

    #[test]
    fn outside_fraction_edge_cases() {
        let region = Rect::new(0, 0, 9, 9).unwrap();
        let all_in = mask_from(10, {
            let mut b = vec![false; 100];
            b[55] = true;
            b
        });
        assert_eq!(spatter_outside_fraction(&all_in, region, 0), 0.0);

        let small = Rect::new(0, 0, 1, 1).unwrap();
        let far = mask_from(10, {
            let mut b = vec![false; 100];
            b[99] = true;
            b
        });
        assert_eq!(spatter_outside_fraction(&far, small, 2), 1.0);

        let empty = Mask::new_false(10, 10);
        assert_eq!(spatter_outside_fraction(&empty, small, 0), 0.0);
    }

    #[test]
    fn outside_fraction_monotone_in_overflow() {
        let region = Rect::new(3, 3, 6, 6).unwrap();
        let mut bits = vec![false; 12 * 12];
        for i in [0usize, 20, 50, 90, 100, 140] {
            bits[i] = true;
        }
        let comp = mask_from(12, bits);
        let mut prev = f64::INFINITY;
        for overflow in 0..6 {
            let frac = spatter_outside_fraction(&comp, region, overflow);
            assert!(frac <= prev);
            prev = frac;
        }
    }
}
