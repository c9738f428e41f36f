use dynocc::boundary::{
    box_blur, detect_boundaries, fuse_confidence, percentile_normalize, thin, BoundaryParams,
};
use dynocc::imaging::{
    estimate_flow_block_matching, flow_gradient_magnitude, gradient_direction, read_flo, write_flo,
    BinaryMask, FlowField, Frame, PixelPoint, ScalarMap,
};
use dynocc::metrics::{query_loss, query_loss_grad, ranking_loss, whdr, DepthMap, Query, QuerySet};
use dynocc::order::{
    classify_counts, classify_segment, matched_side, split_segments, warp_match_count,
    DirectionCounts, OrderParams, Side,
};
use dynocc::pipeline::{FrameAnnotation, FrameStats};
use dynocc::sampling::{frame_rng, random_drop, DepthPair, Ordinal};
use proptest::prelude::*;

fn finite_f32() -> impl Strategy<Value = f32> {
    any::<u32>()
        .prop_map(f32::from_bits)
        .prop_filter("finite", |v| v.is_finite())
}

fn field_of(w: usize, h: usize) -> impl Strategy<Value = FlowField> {
    (
        prop::collection::vec(-20.0f32..20.0, w * h),
        prop::collection::vec(-20.0f32..20.0, w * h),
    )
        .prop_map(move |(u, v)| FlowField::new(w, h, u, v).unwrap())
}

fn flow_field(max: usize) -> impl Strategy<Value = FlowField> {
    (1..=max, 1..=max).prop_flat_map(|(w, h)| field_of(w, h))
}

fn random_frame(w: usize, h: usize) -> impl Strategy<Value = Frame> {
    prop::collection::vec(0u8..=255, w * h).prop_map(move |v| {
        Frame::new(w, h, 1, v.into_iter().map(|b| b as f32 / 255.0).collect()).unwrap()
    })
}

/// Union of random discs and rectangles.
fn blob_mask() -> impl Strategy<Value = BinaryMask> {
    prop::collection::vec((0i32..48, 0i32..48, 1i32..9, any::<bool>()), 1..7).prop_map(|shapes| {
        BinaryMask::from_fn(48, 48, |x, y| {
            let (x, y) = (x as i32, y as i32);
            shapes.iter().any(|&(cx, cy, r, disc)| {
                if disc {
                    (x - cx).pow(2) + (y - cy).pow(2) <= r * r
                } else {
                    (x - cx).abs() <= r && (y - cy).abs() <= r / 2
                }
            })
        })
        .unwrap()
    })
}

fn ordinal() -> impl Strategy<Value = Ordinal> {
    prop_oneof![
        Just(Ordinal::Further),
        Just(Ordinal::Same),
        Just(Ordinal::Closer)
    ]
}

fn point(w: i32, h: i32) -> impl Strategy<Value = PixelPoint> {
    (0..w, 0..h).prop_map(|(x, y)| PixelPoint::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flo_round_trip_is_bit_exact(
        (w, h, vals) in (1usize..12, 1usize..12)
            .prop_flat_map(|(w, h)| (Just(w), Just(h), prop::collection::vec(finite_f32(), 2 * w * h)))
    ) {
        let f = FlowField::new(w, h, vals[..w * h].to_vec(), vals[w * h..].to_vec()).unwrap();
        let back = read_flo(&write_flo(&f)).unwrap();
        let bits = |s: &[f32]| s.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(back.u()), bits(f.u()));
        prop_assert_eq!(bits(back.v()), bits(f.v()));
    }

    #[test]
    fn gradient_magnitude_non_negative_and_shift_invariant(f in flow_field(16), du in -5i32..5, dv in -5i32..5) {
        let g = flow_gradient_magnitude(&f);
        prop_assert!(g.values().iter().all(|&v| v >= 0.0));
        let shifted = FlowField::from_fn(f.width(), f.height(), |x, y| {
            let (u, v) = f.at(x, y);
            (u + du as f32, v + dv as f32)
        }).unwrap();
        let gs = flow_gradient_magnitude(&shifted);
        for (a, b) in g.values().iter().zip(gs.values()) {
            prop_assert!((a - b).abs() <= 1e-4 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn constant_field_has_zero_gradient(w in 1usize..20, h in 1usize..20, u in -9.0f32..9.0, v in -9.0f32..9.0) {
        let g = flow_gradient_magnitude(&FlowField::constant(w, h, u, v).unwrap());
        prop_assert!(g.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn gradient_direction_is_unit(vals in prop::collection::vec(0.0f64..10.0, 100), x in 0i32..10, y in 0i32..10) {
        let map = ScalarMap::new(10, 10, vals).unwrap();
        if let Some(d) = gradient_direction(&map, PixelPoint::new(x, y)) {
            prop_assert!(((d.x * d.x + d.y * d.y).sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn block_matching_self_is_zero(a in random_frame(14, 11)) {
        let f = estimate_flow_block_matching(&a, &a, 5, 3).unwrap();
        prop_assert!(f.u().iter().chain(f.v()).all(|&c| c == 0.0));
    }

    #[test]
    fn fused_confidence_picks_one_input(
        (a, b) in (1usize..14, 1usize..14).prop_flat_map(|(w, h)| (field_of(w, h), field_of(w, h)))
    ) {
        let fused = fuse_confidence(&a, &b).unwrap();
        let (ga, gb) = (flow_gradient_magnitude(&a), flow_gradient_magnitude(&b));
        for i in 0..fused.map.values().len() {
            let v = fused.map.values()[i];
            prop_assert!(v == ga.values()[i] || v == gb.values()[i]);
        }
    }

    #[test]
    fn box_blur_non_negative_and_mean_preserving(vals in prop::collection::vec(0.0f64..4.0, 6 * 6), k in prop::sample::select(vec![1usize, 3, 5])) {
        // support kept 2k from every border so every window touching it is whole
        let (w, h, off) = (6 + 4 * k, 6 + 4 * k, 2 * k);
        let map = ScalarMap::from_fn(w, h, |x, y| {
            if (off..off + 6).contains(&x) && (off..off + 6).contains(&y) { vals[(y - off) * 6 + x - off] } else { 0.0 }
        }).unwrap();
        let blurred = box_blur(&map, k).unwrap();
        prop_assert!(blurred.values().iter().all(|&v| v >= 0.0));
        let (s0, s1): (f64, f64) = (map.values().iter().sum(), blurred.values().iter().sum());
        prop_assert!((s0 - s1).abs() <= 1e-9 * (1.0 + s0));
    }

    #[test]
    fn percentile_normalize_scale_invariant(vals in prop::collection::vec(0.0f64..100.0, 1..80), scale in 0.01f64..100.0) {
        let n = vals.len();
        let a = ScalarMap::new(n, 1, vals.clone()).unwrap();
        let b = ScalarMap::new(n, 1, vals.iter().map(|v| v * scale).collect()).unwrap();
        let (na, nb) = (percentile_normalize(&a, 90.0), percentile_normalize(&b, 90.0));
        for (x, y) in na.values().iter().zip(nb.values()) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn thinning_is_idempotent_subset_and_keeps_components(m in blob_mask()) {
        let t = thin(&m);
        prop_assert_eq!(thin(&t), t.clone());
        prop_assert!(t.is_subset_of(&m));
        prop_assert_eq!(t.count_components(), m.count_components());
    }

    #[test]
    fn eq4_antisymmetric_and_exclusive(c1 in 0usize..30, c2 in 0usize..30, d1 in 0usize..30, d2 in 0usize..30, delta in 0.0f64..1.0) {
        let c = 30;
        let prev = DirectionCounts { c1, c2, c };
        let next = DirectionCounts { c1: d1, c2: d2, c };
        let v = classify_counts(prev, next, delta);
        let s = classify_counts(prev.swapped(), next.swapped(), delta);
        prop_assert_eq!(v.map(Side::other), s);
        let one = (c1 as f64 - c2 as f64) / c as f64 > delta;
        let two = (c2 as f64 - c1 as f64) / c as f64 > delta;
        prop_assert!(!(one && two));
        prop_assert_eq!(matched_side(prev, delta), if one { Some(Side::One) } else if two { Some(Side::Two) } else { None });
    }

    #[test]
    fn warp_count_monotone_in_tolerance(len in 8usize..30, u in -6.0f32..6.0, v in -6.0f32..6.0, edge_pts in prop::collection::vec(point(40, 20), 0..40)) {
        let line = BinaryMask::from_fn(40, 20, |x, y| y == 10 && (4..4 + len).contains(&x)).unwrap();
        let seg = &split_segments(&line, len)[0];
        let edges = BinaryMask::from_fn(40, 20, |x, y| edge_pts.contains(&PixelPoint::new(x as i32, y as i32))).unwrap();
        let flow = FlowField::constant(40, 20, u, v).unwrap();
        let mut last = 0;
        for tol in 0..5 {
            let params = OrderParams { align_tolerance: tol, ..OrderParams::default() };
            let n = warp_match_count(seg, Side::One, &flow, &edges, &params);
            prop_assert!(n >= last);
            last = n;
        }
    }

    #[test]
    fn empty_neighbor_edges_classify_nothing(len in 8usize..30, u in -6.0f32..6.0) {
        let line = BinaryMask::from_fn(40, 20, |x, y| y == 10 && (4..4 + len).contains(&x)).unwrap();
        let empty = BinaryMask::empty(40, 20).unwrap();
        let flow = FlowField::from_fn(40, 20, |_, y| if y < 10 { (u, 0.0) } else { (0.0, 0.0) }).unwrap();
        for seg in split_segments(&line, 20) {
            prop_assert!(classify_segment(&seg, &flow, &flow, &empty, &empty, &OrderParams::default()).is_none());
        }
    }

    #[test]
    fn random_drop_is_exact_floor_subset(n in 0usize..300, rate in 0.01f64..=1.0, seed in any::<u64>()) {
        let pairs: Vec<DepthPair> = (0..n as i32)
            .map(|k| DepthPair { i: PixelPoint::new(k, 0), j: PixelPoint::new(k, 1), o: Ordinal::Closer })
            .collect();
        let kept = random_drop(&pairs, rate, &mut frame_rng(seed, 0));
        prop_assert_eq!(kept.len(), (rate * n as f64 + 1e-9).floor() as usize);
        let mut last = None;
        for p in &kept {
            prop_assert!(last < Some(p.i.x));
            prop_assert!(pairs.contains(p));
            last = Some(p.i.x);
        }
    }

    #[test]
    fn loss_case_symmetry(zi in -50.0f64..50.0, zj in -50.0f64..50.0) {
        prop_assert_eq!(query_loss(zi, zj, Ordinal::Closer), query_loss(zj, zi, Ordinal::Further));
    }

    #[test]
    fn loss_monotone_in_difference(a in -30.0f64..30.0, step in 0.01f64..5.0) {
        let b = a + step;
        prop_assert!(query_loss(b, 0.0, Ordinal::Closer) < query_loss(a, 0.0, Ordinal::Closer));
        prop_assert!(query_loss(b, 0.0, Ordinal::Further) > query_loss(a, 0.0, Ordinal::Further));
        prop_assert!(query_loss(a, a, Ordinal::Same) == 0.0);
        prop_assert!(query_loss(a, 0.0, Ordinal::Same) >= 0.0);
    }

    #[test]
    fn ranking_loss_shift_invariant(z in prop::collection::vec(-5.0f64..5.0, 64), qs in prop::collection::vec((point(8, 8), point(8, 8), ordinal()), 1..40), c in -100.0f64..100.0) {
        let set = QuerySet::new(qs.into_iter().map(|(i, j, o)| Query { i, j, o, weight: 1.0 }).collect());
        let a = DepthMap::new(8, 8, z.clone()).unwrap();
        let b = DepthMap::new(8, 8, z.iter().map(|v| v + c).collect()).unwrap();
        let (la, lb) = (ranking_loss(&a, &set).unwrap(), ranking_loss(&b, &set).unwrap());
        prop_assert!((la - lb).abs() <= 1e-9 * (1.0 + la.abs()));
    }

    #[test]
    fn gradient_matches_central_difference(zi in -8.0f64..8.0, zj in -8.0f64..8.0, o in ordinal()) {
        let h = 1e-5;
        let fd = (query_loss(zi + h, zj, o) - query_loss(zi - h, zj, o)) / (2.0 * h);
        prop_assert!((fd - query_loss_grad(zi, zj, o)).abs() < 1e-6);
    }

    #[test]
    fn whdr_bounds(items in prop::collection::vec((ordinal(), ordinal(), 0.0f64..3.0), 1..60)) {
        prop_assume!(items.iter().any(|t| t.2 > 0.0));
        let gt = QuerySet::new(items.iter().map(|&(o, _, weight)| Query { i: PixelPoint::new(0, 0), j: PixelPoint::new(1, 0), o, weight }).collect());
        let pred: Vec<_> = items.iter().map(|t| t.1).collect();
        let w = whdr(&pred, &gt).unwrap();
        prop_assert!((0.0..=1.0).contains(&w));
        let all_match = items.iter().all(|&(a, b, wt)| a == b || wt == 0.0);
        prop_assert_eq!(w == 0.0, all_match);
        let exact: Vec<_> = items.iter().map(|t| t.0).collect();
        prop_assert_eq!(whdr(&exact, &gt).unwrap(), 0.0);
    }

    #[test]
    fn annotation_json_round_trip(
        frame in "[a-z0-9_]{1,12}",
        pairs in prop::collection::vec((point(500, 500), point(500, 500), ordinal()), 0..20),
        stats in (0usize..1000, 0usize..50, 0usize..500, 0usize..50),
    ) {
        let a = FrameAnnotation {
            image: format!("{frame}.png"),
            frame,
            pairs: pairs.into_iter().map(|(i, j, o)| DepthPair { i, j, o }).collect(),
            stats: FrameStats { boundary_pixels: stats.0, classified_segments: stats.1, pairs_before_drop: stats.2, pairs_after_drop: stats.3 },
        };
        let text = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(serde_json::from_str::<FrameAnnotation>(&text).unwrap(), a);
    }
}

#[test]
fn zero_flow_has_no_boundaries() {
    let z = FlowField::zeros(40, 30).unwrap();
    assert!(detect_boundaries(&z, &z, &BoundaryParams::default())
        .unwrap()
        .is_empty());
}
