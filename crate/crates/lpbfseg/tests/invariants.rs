//! Property tests for the algebraic invariants that hold across modules.

use lpbfseg::eval::{confusion, f1, ConfusionCounts};
use lpbfseg::frame::{mask_apply, mask_or, Frame, Mask};
use lpbfseg::gt::{GroundTruth, GtLabel};
use lpbfseg::segment::{frame_difference, threshold_fixed, Algorithm, Segmenter, SegmenterSpec};
use lpbfseg::sparse::{decode, encode};
use proptest::prelude::*;

const W: usize = 16;
const H: usize = 12;

fn arb_mask() -> impl Strategy<Value = Mask> {
    prop::collection::vec(any::<bool>(), W * H)
        .prop_map(|bits| Mask::from_bits(W, H, bits).unwrap())
}

fn arb_frame(max: f32) -> impl Strategy<Value = Frame> {
    prop::collection::vec(0.0f32..max, W * H).prop_map(|px| Frame::new(W, H, px).unwrap())
}

fn arb_positive_frame() -> impl Strategy<Value = Frame> {
    prop::collection::vec(0.5f32..600.0, W * H).prop_map(|px| Frame::new(W, H, px).unwrap())
}

proptest! {
    #[test]
    fn mask_or_idempotent_commutative_associative(a in arb_mask(), b in arb_mask(), c in arb_mask()) {
        prop_assert_eq!(mask_or(&a, &a).unwrap(), a.clone());
        prop_assert_eq!(mask_or(&a, &b).unwrap(), mask_or(&b, &a).unwrap());
        let left = mask_or(&mask_or(&a, &b).unwrap(), &c).unwrap();
        let right = mask_or(&a, &mask_or(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn apply_distributes_over_or(f in arb_positive_frame(), a in arb_mask(), b in arb_mask()) {
        // For strictly positive frames, nonzero pixels of apply(f, a|b) are
        // exactly the union of nonzero pixels of apply(f, a) and apply(f, b).
        let union = mask_apply(&f, &mask_or(&a, &b).unwrap()).unwrap();
        let fa = mask_apply(&f, &a).unwrap();
        let fb = mask_apply(&f, &b).unwrap();
        for i in 0..W * H {
            let nz = union.pixels()[i] != 0.0;
            let expected = fa.pixels()[i] != 0.0 || fb.pixels()[i] != 0.0;
            prop_assert_eq!(nz, expected);
        }
    }

    #[test]
    fn threshold_monotone_in_lambda(f in arb_frame(500.0), lo in 0.0f32..200.0, delta in 0.0f32..200.0) {
        let low = threshold_fixed(&f, lo);
        let high = threshold_fixed(&f, lo + delta);
        for (l, h) in low.bits().iter().zip(high.bits()) {
            prop_assert!(*l || !*h);
        }
    }

    #[test]
    fn fd_thresh_pipeline_equivalence(
        frames in prop::collection::vec(prop::collection::vec(0.0f32..40.0, W * H), 2..6),
        lambda in 0.0f64..10.0,
    ) {
        // Streaming FD+Thresh equals threshold_fixed(diff, max(lambda, 1)).
        let spec = SegmenterSpec::new(Algorithm::Thresh, true).with_param("lambda", lambda);
        let mut seg = Segmenter::new(spec).unwrap();
        let mut prev: Option<Frame> = None;
        for px in frames {
            let f = Frame::new(W, H, px).unwrap();
            let got = seg.step(&f).unwrap();
            match &prev {
                None => prop_assert_eq!(got.count_true(), 0),
                Some(p) => {
                    let diff = frame_difference(&f, p).unwrap();
                    let want = threshold_fixed(&diff, (lambda as f32).max(1.0));
                    prop_assert_eq!(got, want);
                }
            }
            prev = Some(f);
        }
    }

    #[test]
    fn sparse_roundtrip_is_mask_apply(f in arb_frame(650.0), m in arb_mask()) {
        let decoded = decode(&encode(&f, &m).unwrap(), W, H).unwrap();
        prop_assert_eq!(decoded.pixels(), mask_apply(&f, &m).unwrap().pixels());
    }

    #[test]
    fn sparse_runs_sorted_and_nonempty(f in arb_frame(650.0), m in arb_mask()) {
        let sf = encode(&f, &m).unwrap();
        let mut last = None;
        for run in &sf.runs {
            prop_assert!(!run.values.is_empty());
            let key = (run.y, run.x_start);
            if let Some(prev) = last {
                prop_assert!(key > prev);
            }
            last = Some(key);
        }
        prop_assert_eq!(sf.foreground_pixels(), m.count_true());
    }

    #[test]
    fn f1_swap_symmetry(tp in 0u64..200, fp in 0u64..200, tn in 0u64..200, fneg in 0u64..200) {
        let a = f1(&ConfusionCounts::new(tp, fp, tn, fneg));
        let b = f1(&ConfusionCounts::new(tp, fneg, tn, fp));
        prop_assert!((a.f1 - b.f1).abs() < 1e-12);
        prop_assert_eq!(a.precision, b.recall);
        prop_assert_eq!(a.recall, b.precision);
    }

    #[test]
    fn excluded_pixels_never_counted(
        pred in arb_mask(),
        labels in prop::collection::vec(0u8..3, W * H),
        flips in prop::collection::vec(any::<bool>(), W * H),
    ) {
        let gt_labels: Vec<GtLabel> = labels
            .iter()
            .map(|l| match l {
                0 => GtLabel::Background,
                1 => GtLabel::Foreground,
                _ => GtLabel::Excluded,
            })
            .collect();
        let gt = GroundTruth::from_parts(W, H, gt_labels.clone(), None);
        let base = confusion(&pred, &gt).unwrap();
        prop_assert_eq!(
            base.total(),
            gt_labels.iter().filter(|l| **l != GtLabel::Excluded).count() as u64
        );

        // Perturbing predictions inside excluded zones changes nothing.
        let perturbed_bits: Vec<bool> = pred
            .bits()
            .iter()
            .zip(&gt_labels)
            .zip(&flips)
            .map(|((b, l), flip)| if *l == GtLabel::Excluded && *flip { !*b } else { *b })
            .collect();
        let perturbed = Mask::from_bits(W, H, perturbed_bits).unwrap();
        prop_assert_eq!(confusion(&perturbed, &gt).unwrap(), base);
    }
}
