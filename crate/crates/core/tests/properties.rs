use proptest::prelude::*;

use hsk_core::add1d::{BinTree, BinTreeConfig};
use hsk_core::add2d::{QuadTree, QuadTreeConfig};
use hsk_core::dyn1d::DynSketch1D;
use hsk_core::io::{read_points, write_points, Format, IngestOptions};
use hsk_core::mult1d::{MultOptions, MultStream1D, OfflineSketch1D};
use hsk_core::objective::{hinge_objective, left_sum};
use hsk_core::optimize::{median, Backend};
use hsk_core::sketch::{AnySketch, BuildSpec, SketchBuilder};
use hsk_core::{HyperplaneQuery, Label, LabeledPoint, Power, SketchParams};

fn power() -> impl Strategy<Value = Power> {
    prop_oneof![Just(Power::Linear), Just(Power::Squared)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn offline_brackets_every_query(
        mut xs in prop::collection::vec(1u32..=65_536, 1..300),
        eps in 0.05f64..1.0,
        qs in prop::collection::vec(0.0f64..70_000.0, 1..40),
    ) {
        let mut xs: Vec<f64> = xs.drain(..).map(f64::from).collect();
        xs.sort_by(f64::total_cmp);
        let sk = OfflineSketch1D::build(&xs, eps).unwrap();
        for q in qs {
            let (t, exact) = (sk.query(q), left_sum(&xs, q, Power::Linear));
            prop_assert!(t <= exact * (1.0 + 1e-12) + 1e-9);
            prop_assert!(exact <= (1.0 + eps) * t * (1.0 + 1e-12) + 1e-9);
        }
    }

    #[test]
    fn add1d_error_within_epsilon(
        xs in prop::collection::vec(-1.0f64..=1.0, 1..2000),
        eps in 0.02f64..0.5,
        p in power(),
        qs in prop::collection::vec(-1.5f64..1.5, 1..30),
    ) {
        let mut t = BinTree::new(BinTreeConfig::new(eps, xs.len() as u64, p)).unwrap();
        for &x in &xs {
            t.update(x).unwrap();
        }
        t.freeze();
        prop_assert!(t.check_invariants().is_ok());
        prop_assert_eq!(t.total_count(), xs.len() as u64);
        for q in qs {
            let exact = left_sum(&xs, q, p) / xs.len() as f64;
            prop_assert!((t.query(q).unwrap() - exact).abs() <= eps);
        }
    }

    #[test]
    fn add2d_conserves_and_is_exact_off_the_data(
        pts in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..1500),
        eps in 0.05f64..0.5,
        p in power(),
        angle in 0.0f64..std::f64::consts::TAU,
        seed in any::<u64>(),
    ) {
        let mut t = QuadTree::new(QuadTreeConfig::new(eps, pts.len() as u64, p, seed)).unwrap();
        for &(x, y) in &pts {
            t.update(x, y).unwrap();
        }
        t.freeze();
        prop_assert!(t.check_invariants().is_ok());
        prop_assert_eq!(t.total_count(), pts.len() as u64);
        let th = [angle.cos(), angle.sin()];
        for b in [-2.0, 2.0] {
            prop_assert_eq!(t.crossing_cells(th, b), 0);
            let exact = pts.iter().map(|&(x, y)| p.apply((b - th[0] * x - th[1] * y).max(0.0))).sum::<f64>()
                / pts.len() as f64;
            prop_assert!((t.query(th, b).unwrap() - exact).abs() <= 1e-9 * exact.max(1.0));
        }
    }

    #[test]
    fn mult1d_respects_space_and_exact_prefix(
        xs in prop::collection::vec(1u64..=4096, 1..3000),
        seed in any::<u64>(),
        qs in prop::collection::vec(1u64..=4096, 1..20),
    ) {
        let params = SketchParams { epsilon: 0.5, w: 4096, n_hint: xs.len() as u64, seed, ..SketchParams::default() };
        let bound = MultStream1D::retained_bound(&params);
        let mut sk = MultStream1D::new(params, MultOptions::default()).unwrap();
        for &x in &xs {
            sk.update(x as f64).unwrap();
            prop_assert!(sk.retained() <= bound);
        }
        sk.freeze();
        let fx: Vec<f64> = xs.iter().map(|&x| x as f64).collect();
        for q in qs {
            let (est, br) = sk.query_breakdown(q as f64).unwrap();
            prop_assert!(est >= 0.0);
            if (q as f64) <= br.p {
                let exact = left_sum(&fx, q as f64, Power::Linear);
                prop_assert!((est - exact).abs() <= 1e-9 * exact.max(1.0));
            }
        }
    }

    #[test]
    fn dyn1d_properties_hold_after_every_update(
        xs in prop::collection::vec(0.0f64..1.0, 1..2500),
        seed in any::<u64>(),
    ) {
        let params = SketchParams { epsilon: 0.5, n_hint: xs.len() as u64, seed, ..SketchParams::default() };
        let mut sk = DynSketch1D::new(params).unwrap();
        for &x in &xs {
            sk.update(x).unwrap();
            prop_assert!(sk.check_property2().is_ok());
            prop_assert!(sk.check_property1().is_ok());
        }
        prop_assert!(sk.check_structure().is_ok());
        prop_assert_eq!(sk.len(), xs.len() as u64);
    }

    #[test]
    fn sketch_files_reload_bit_identically(
        backend in prop::sample::select(Backend::ALL.to_vec()),
        xs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..800),
        seed in any::<u64>(),
        qs in prop::collection::vec((0.0f64..2.0, -1.0f64..2.0), 1..10),
    ) {
        let mut b = SketchBuilder::new(&BuildSpec::new(backend, 0.2, xs.len() as u64, seed)).unwrap();
        for &(x, y) in &xs {
            if backend == Backend::Add2d { b.update(&[x, y]).unwrap() } else { b.update(&[x]).unwrap() }
        }
        let s = b.finish().unwrap();
        let bytes = s.to_bytes().unwrap();
        let back = AnySketch::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back.to_bytes().unwrap(), bytes);
        for (a, c) in qs {
            let q = if backend == Backend::Add2d {
                HyperplaneQuery::new(vec![a.cos(), a.sin()], c)
            } else {
                HyperplaneQuery::new(vec![a], c)
            };
            prop_assert_eq!(s.query(&q).unwrap().to_bits(), back.query(&q).unwrap().to_bits());
        }
    }

    #[test]
    fn corrupted_sketch_files_error_without_panicking(
        backend in prop::sample::select(Backend::ALL.to_vec()),
        cut in any::<prop::sample::Index>(),
        flip in any::<prop::sample::Index>(),
        mask in 1u8..=255,
    ) {
        let mut b = SketchBuilder::new(&BuildSpec::new(backend, 0.3, 200, 1)).unwrap();
        for i in 0..200 {
            let v = i as f64 / 200.0;
            if backend == Backend::Add2d { b.update(&[v, 1.0 - v]).unwrap() } else { b.update(&[v]).unwrap() }
        }
        let bytes = b.finish().unwrap().to_bytes().unwrap();
        let truncated = &bytes[..cut.index(bytes.len())];
        prop_assert!(AnySketch::from_bytes(truncated).is_err());
        let mut flipped = bytes.clone();
        let i = flip.index(flipped.len());
        flipped[i] ^= mask;
        let _ = AnySketch::from_bytes(&flipped);
    }

    #[test]
    fn stream_formats_round_trip(
        rows in prop::collection::vec((prop::collection::vec(-0.5f64..0.5, 2), any::<bool>()), 0..200),
        bin in any::<bool>(),
    ) {
        let pts: Vec<LabeledPoint> = rows
            .into_iter()
            .map(|(x, pos)| LabeledPoint::new(x, if pos { Label::Pos } else { Label::Neg }).unwrap())
            .collect();
        let format = if bin { Format::Bin } else { Format::Csv };
        let mut buf = Vec::new();
        write_points(&mut buf, format, &pts).unwrap();
        let got = read_points(&buf[..], format, IngestOptions::default()).unwrap();
        prop_assert!(got.errors.is_empty());
        prop_assert_eq!(got.points, pts);
    }

    #[test]
    fn objective_dominates_regularizer(
        rows in prop::collection::vec((-1.0f64..1.0, any::<bool>()), 1..100),
        theta in -5.0f64..5.0,
        b in -5.0f64..5.0,
        lambda in 0.001f64..10.0,
    ) {
        let pts: Vec<LabeledPoint> = rows
            .into_iter()
            .map(|(x, pos)| LabeledPoint::new(vec![x], if pos { Label::Pos } else { Label::Neg }).unwrap())
            .collect();
        let f = hinge_objective(&pts, &HyperplaneQuery::new(vec![theta], b), lambda).unwrap();
        prop_assert!(f >= 0.5 * lambda * (theta * theta + b * b) - 1e-12);
        let origin = hinge_objective(&pts, &HyperplaneQuery::new(vec![0.0], 0.0), lambda).unwrap();
        prop_assert!((origin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn median_lies_between_extremes(mut v in prop::collection::vec(-1e6f64..1e6, 1..51)) {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let m = median(&mut v);
        prop_assert!(lo <= m && m <= hi);
        let below = v.iter().filter(|&&x| x < m).count();
        prop_assert!(below <= v.len() / 2);
    }
}
