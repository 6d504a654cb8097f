//! Property tests for the contract invariants of the grid, codec,
//! morphology and metric layers.

use proptest::prelude::*;

use gliovox_core::grid::{Dims3, Grid3, Spacing3};
use gliovox_core::metrics::dice;
use gliovox_core::morphology::{
    connected_components, dilate, distance_transform, surface_voxels, Connectivity,
    StructuringElement,
};
use gliovox_core::regions::{
    fuse_ensemble, labels_to_regions, postprocess_enhancing, regions_to_labels, DecodeConfig,
    PostprocessConfig,
};
use gliovox_core::stats::paired_ttest;
use gliovox_core::{BinaryMask, LabelVolume, Region};

fn small_dims() -> impl Strategy<Value = Dims3> {
    (1usize..=6, 1usize..=6, 1usize..=6).prop_map(|(d, h, w)| Dims3::new(d, h, w))
}

fn label_volume() -> impl Strategy<Value = LabelVolume> {
    small_dims().prop_flat_map(|dims| {
        proptest::collection::vec(0u8..=3, dims.len())
            .prop_map(move |data| Grid3::new(dims, Spacing3::unit(), data).unwrap())
    })
}

fn mask() -> impl Strategy<Value = BinaryMask> {
    small_dims().prop_flat_map(|dims| {
        proptest::collection::vec(any::<bool>(), dims.len())
            .prop_map(move |data| Grid3::new(dims, Spacing3::unit(), data).unwrap())
    })
}

fn mask_pair() -> impl Strategy<Value = (BinaryMask, BinaryMask)> {
    small_dims().prop_flat_map(|dims| {
        (
            proptest::collection::vec(any::<bool>(), dims.len()),
            proptest::collection::vec(any::<bool>(), dims.len()),
        )
            .prop_map(move |(a, b)| {
                (
                    Grid3::new(dims, Spacing3::unit(), a).unwrap(),
                    Grid3::new(dims, Spacing3::unit(), b).unwrap(),
                )
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn codec_roundtrip_identity(labels in label_volume()) {
        let stack = labels_to_regions(&labels).unwrap();
        let back = regions_to_labels(&stack, &DecodeConfig::default()).unwrap();
        prop_assert_eq!(back.data(), labels.data());
    }

    #[test]
    fn decoded_labels_always_nest(labels in label_volume()) {
        // Any decode output re-encodes into nested region masks.
        let stack = labels_to_regions(&labels).unwrap();
        let decoded = regions_to_labels(&stack, &DecodeConfig::default()).unwrap();
        let regions = labels_to_regions(&decoded).unwrap();
        let wt = regions.channel(Region::Wt).data();
        let tc = regions.channel(Region::Tc).data();
        let et = regions.channel(Region::Et).data();
        for i in 0..wt.len() {
            prop_assert!(wt[i] >= tc[i], "WT must contain TC at {}", i);
            prop_assert!(tc[i] >= et[i], "TC must contain ET at {}", i);
        }
    }

    #[test]
    fn fusing_copies_is_identity(labels in label_volume(), k in 1usize..=5) {
        let stack = labels_to_regions(&labels).unwrap();
        let copies: Vec<_> = (0..k).map(|_| stack.clone()).collect();
        let fused = fuse_ensemble(&copies, None).unwrap();
        for r in Region::ALL {
            let a: Vec<u32> = stack.channel(r).data().iter().map(|v| v.to_bits()).collect();
            let b: Vec<u32> = fused.channel(r).data().iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn fusion_stays_in_unit_interval(pair in mask_pair()) {
        let (a, b) = pair;
        let to_stack = |m: &BinaryMask| {
            let ch = m.with_data(m.data().iter().map(|&v| if v { 1.0f32 } else { 0.0 }).collect()).unwrap();
            gliovox_core::grid::ProbabilityStack::new(ch.clone(), ch.clone(), ch).unwrap()
        };
        let fused = fuse_ensemble(&[to_stack(&a), to_stack(&b)], Some(&[0.3, 0.7])).unwrap();
        for r in Region::ALL {
            for v in fused.channel(r).data() {
                prop_assert!((0.0..=1.0).contains(v));
            }
        }
    }

    #[test]
    fn postprocess_is_idempotent(labels in label_volume(), total_min in 0usize..20, comp_min in 0usize..6) {
        let cfg = PostprocessConfig {
            et_total_min: total_min,
            et_component_min: comp_min,
            ..Default::default()
        };
        let once = postprocess_enhancing(&labels, &cfg).unwrap();
        let twice = postprocess_enhancing(&once, &cfg).unwrap();
        prop_assert_eq!(once.data(), twice.data());
    }

    #[test]
    fn postprocess_only_touches_et(labels in label_volume()) {
        let cfg = PostprocessConfig::default();
        let out = postprocess_enhancing(&labels, &cfg).unwrap();
        for (before, after) in labels.data().iter().zip(out.data().iter()) {
            if *before != 3 {
                prop_assert_eq!(before, after);
            }
        }
    }

    #[test]
    fn dice_is_symmetric_and_reflexive(pair in mask_pair()) {
        let (a, b) = pair;
        prop_assert_eq!(dice(&a, &b).unwrap(), dice(&b, &a).unwrap());
        prop_assert_eq!(dice(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn components_partition_the_mask(m in mask()) {
        let set = connected_components(&m, Connectivity::TwentySix);
        let mut covered = vec![false; m.len()];
        for c in set.components() {
            for &i in &c.voxels {
                prop_assert!(!covered[i]);
                covered[i] = true;
            }
        }
        for (i, v) in m.data().iter().enumerate() {
            prop_assert_eq!(covered[i], *v);
        }
        // ids are consecutive, volumes descending
        for (k, c) in set.components().iter().enumerate() {
            prop_assert_eq!(c.id, k + 1);
            if k > 0 {
                prop_assert!(set.components()[k - 1].volume_voxels() >= c.volume_voxels());
            }
        }
    }

    #[test]
    fn dilation_is_extensive_and_monotone(m in mask(), r in 0usize..=2) {
        let d = dilate(&m, StructuringElement::ball(r));
        for i in 0..m.len() {
            prop_assert!(!m.data()[i] || d.data()[i]);
        }
        let d2 = dilate(&m, StructuringElement::ball(r + 1));
        for i in 0..m.len() {
            prop_assert!(!d.data()[i] || d2.data()[i]);
        }
    }

    #[test]
    fn surface_is_subset_of_mask(m in mask()) {
        let surf = surface_voxels(&m);
        for &i in &surf {
            prop_assert!(m.data()[i]);
        }
    }

    #[test]
    fn removing_a_surface_voxel_changes_the_surface(m in mask()) {
        let surf = surface_voxels(&m);
        for &i in surf.iter().take(4) {
            let mut data = m.data().to_vec();
            data[i] = false;
            let smaller = Grid3::new(m.dims(), m.spacing(), data).unwrap();
            prop_assert_ne!(surface_voxels(&smaller), surf.clone());
        }
    }

    #[test]
    fn hd95_is_symmetric(pair in mask_pair()) {
        let (a, b) = pair;
        prop_assume!(a.any() && b.any());
        let ab = gliovox_core::metrics::hd95(&a, &b).unwrap();
        let ba = gliovox_core::metrics::hd95(&b, &a).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(gliovox_core::metrics::hd95(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn distance_transform_zero_exactly_on_mask(m in mask()) {
        prop_assume!(m.any());
        let dt = distance_transform::<f64>(&m).unwrap();
        for (i, v) in m.data().iter().enumerate() {
            if *v {
                prop_assert_eq!(dt.data()[i], 0.0);
            } else {
                prop_assert!(dt.data()[i] > 0.0);
            }
        }
    }

    #[test]
    fn ttest_antisymmetric(d in proptest::collection::vec(-10.0f64..10.0, 3..12)) {
        let zeros = vec![0.0; d.len()];
        let ab = paired_ttest(&d, &zeros);
        let ba = paired_ttest(&zeros, &d);
        match (ab, ba) {
            (Ok(x), Ok(y)) => {
                prop_assert!((x.t + y.t).abs() < 1e-12);
                prop_assert!((x.p_two_sided - y.p_two_sided).abs() < 1e-12);
            }
            (Err(_), Err(_)) => {} // degenerate both ways
            _ => prop_assert!(false, "asymmetric error behavior"),
        }
    }
}
