use std::collections::BTreeMap;

use proptest::prelude::*;

use jfs_core::dataio::{decode_mask_png, encode_mask_png, CandidateBank};
use jfs_core::fss::{predict, PrototypeBackend, PrototypeConfig, SupportPair};
use jfs_core::judge::{judge, JudgeCase, JudgeSupport};
use jfs_core::maskcore::{dilate, erode, iou, masked_iou, Rle};
use jfs_core::refine::{assign_candidates, refine, RefineConfig};
use jfs_core::{BinaryMask, RgbImage};

fn mask(max: u32) -> impl Strategy<Value = BinaryMask> {
    (1..=max, 1..=max).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<bool>(), (w * h) as usize)
            .prop_map(move |bits| BinaryMask::from_bools(w, h, &bits).unwrap())
    })
}

fn mask_pair(max: u32) -> impl Strategy<Value = (BinaryMask, BinaryMask)> {
    (1..=max, 1..=max).prop_flat_map(|(w, h)| {
        let n = (w * h) as usize;
        (prop::collection::vec(any::<bool>(), n), prop::collection::vec(any::<bool>(), n)).prop_map(
            move |(a, b)| {
                (
                    BinaryMask::from_bools(w, h, &a).unwrap(),
                    BinaryMask::from_bools(w, h, &b).unwrap(),
                )
            },
        )
    })
}

fn image(w: u32, h: u32) -> impl Strategy<Value = RgbImage> {
    prop::collection::vec(any::<u8>(), (w * h * 3) as usize).prop_map(move |d| RgbImage::new(w, h, d).unwrap())
}

/// Disjoint candidates: a random labelling of the frame into up to `k` parts.
fn partition_bank(w: u32, h: u32, k: u8) -> impl Strategy<Value = Vec<BinaryMask>> {
    prop::collection::vec(0..k, (w * h) as usize).prop_map(move |labels| {
        (0..k)
            .map(|p| {
                let bits: Vec<bool> = labels.iter().map(|&l| l == p).collect();
                BinaryMask::from_bools(w, h, &bits).unwrap()
            })
            .filter(|m| !m.is_empty())
            .collect()
    })
}

proptest! {
    #[test]
    fn iou_is_symmetric_and_bounded((a, b) in mask_pair(12)) {
        let x = iou(&a, &b).unwrap();
        prop_assert_eq!(x, iou(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&x));
        prop_assert_eq!(iou(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn all_valid_masked_iou_equals_iou((a, b) in mask_pair(10)) {
        let valid = BinaryMask::full(a.width(), a.height());
        prop_assert_eq!(masked_iou(&a, &b, &valid).unwrap(), iou(&a, &b).unwrap());
    }

    #[test]
    fn rle_and_png_round_trip(m in mask(40)) {
        let rle = Rle::encode(&m);
        prop_assert_eq!(rle.area(), m.count());
        prop_assert_eq!(&Rle::from_bytes(&rle.to_bytes()).unwrap().decode().unwrap(), &m);
        prop_assert_eq!(&decode_mask_png(&encode_mask_png(&m)).unwrap(), &m);
    }

    #[test]
    fn dilation_and_erosion_bracket_the_mask(m in mask(16), r in 1u32..4) {
        let d = dilate(&m, r);
        let e = erode(&m, r);
        prop_assert_eq!(m.and_not(&d).unwrap().count(), 0);
        prop_assert_eq!(e.and_not(&m).unwrap().count(), 0);
    }

    #[test]
    fn refined_masks_are_unions_of_assigned_candidates(
        bank in partition_bank(8, 8, 6),
        coarse_bits in prop::collection::vec(0u8..4, 64),
        tau in 0.0f64..=1.0,
    ) {
        let mut coarse = BTreeMap::new();
        for k in 1..=3u8 {
            let bits: Vec<bool> = coarse_bits.iter().map(|&c| c == k).collect();
            coarse.insert(k, BinaryMask::from_bools(8, 8, &bits).unwrap());
        }
        let bank = CandidateBank::new("p", bank);
        let assignments = assign_candidates(&coarse, &bank).unwrap();
        let refined = refine(&coarse, &bank, &RefineConfig::new(tau).unwrap()).unwrap();
        prop_assert_eq!(refined.len(), coarse.len());
        for (k, r) in &refined {
            if r == &coarse[k] {
                continue;
            }
            // otherwise r is exactly a union of candidates assigned to k
            let mut union = BinaryMask::empty(8, 8);
            for a in assignments.iter().filter(|a| a.assigned_class == Some(*k)) {
                let c = &bank.candidates[a.candidate_index];
                if c.and(r).unwrap().count() > 0 {
                    prop_assert_eq!(c.and_not(r).unwrap().count(), 0);
                    union.or_assign(c).unwrap();
                }
            }
            prop_assert_eq!(&union, r);
        }
    }

    #[test]
    fn raising_tau_shrinks_classes_that_keep_survivors(
        bank in partition_bank(8, 8, 8),
        coarse_bits in prop::collection::vec(0u8..3, 64),
        lo in 0.0f64..=1.0,
        hi in 0.0f64..=1.0,
    ) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let mut coarse = BTreeMap::new();
        for k in 1..=2u8 {
            let bits: Vec<bool> = coarse_bits.iter().map(|&c| c == k).collect();
            coarse.insert(k, BinaryMask::from_bools(8, 8, &bits).unwrap());
        }
        let bank = CandidateBank::new("p", bank);
        let low = refine(&coarse, &bank, &RefineConfig::new(lo).unwrap()).unwrap();
        let high = refine(&coarse, &bank, &RefineConfig::new(hi).unwrap()).unwrap();
        // a class that still has survivors at the higher threshold keeps a
        // subset of the lower threshold's survivors; fallback classes are exempt
        for k in coarse.keys() {
            if high[k] != coarse[k] {
                prop_assert_eq!(high[k].and_not(&low[k]).unwrap().count(), 0);
            }
        }
    }

    #[test]
    fn judge_swap_symmetry(
        q in image(6, 5),
        s in image(7, 4),
        (c, r) in (mask_pair(1), Just(())).prop_flat_map(|_| (
            prop::collection::vec(any::<bool>(), 30),
            prop::collection::vec(any::<bool>(), 30),
        )),
        gt_bits in prop::collection::vec(any::<bool>(), 28),
        lambda in 0.0f64..2.0,
    ) {
        let coarse = BinaryMask::from_bools(6, 5, &c).unwrap();
        let refined = BinaryMask::from_bools(6, 5, &r).unwrap();
        let gt = BinaryMask::from_bools(7, 4, &gt_bits).unwrap();
        let backend = PrototypeBackend::new(PrototypeConfig::new(lambda).unwrap()).unwrap();
        let case = JudgeCase {
            query_image: &q,
            coarse: &coarse,
            refined: &refined,
            supports: vec![JudgeSupport { image: &s, mask: &gt }],
            class_id: 1,
        };
        let swapped = JudgeCase { coarse: &refined, refined: &coarse, ..case.clone() };
        let a = judge(&backend, &case).unwrap();
        let b = judge(&backend, &swapped).unwrap();
        prop_assert_eq!(a.verdict.flipped(), b.verdict);
        prop_assert_eq!((a.e_coarse, a.e_refined), (b.e_refined, b.e_coarse));
    }

    #[test]
    fn prototype_prediction_is_deterministic(q in image(5, 5), s in image(4, 6), bits in prop::collection::vec(any::<bool>(), 24)) {
        let m = BinaryMask::from_bools(4, 6, &bits).unwrap();
        let backend = PrototypeBackend::default();
        let pair = SupportPair::new(&s, &m).unwrap();
        let a = predict(&backend, &q, &[pair]).unwrap();
        let b = predict(&backend, &q, &[pair]).unwrap();
        prop_assert_eq!(a.dims(), (5, 5));
        prop_assert_eq!(a, b);
    }
}
