use dcext::counterexamples::strip_eval;
use dcext::dc_calculus::ConvexFn;
use dcext::extension_ops::lipschitz_convex_extend;
use dcext::geometry::{Ball, ConvexSet, GeneratorSet};
use dcext::sampling;
use dcext::subspace_ext::{hartman_majorant, HartmanOptions, SetSequence, SubspacePair};
use dcext::Vector;
use proptest::prelude::*;

fn vec2() -> impl Strategy<Value = Vector> {
    (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(a, b)| Vector::from_slice(&[a, b]))
}

/// A hull of two to four points and one ball in the plane.
fn hull() -> impl Strategy<Value = GeneratorSet> {
    (prop::collection::vec(vec2(), 2..5), vec2(), 0.1..2.0f64)
        .prop_map(|(pts, c, r)| GeneratorSet::new(pts, vec![Ball::new(c, r).unwrap()]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projection_is_idempotent_and_nonexpansive(g in hull(), x in vec2(), y in vec2()) {
        let s = ConvexSet::Generator(g);
        let px = s.project(&x, 1e-10).unwrap();
        let py = s.project(&y, 1e-10).unwrap();
        prop_assert!((px.point.dist(&x) - px.dist).abs() <= 1e-8);
        prop_assert!(s.project(&px.point, 1e-10).unwrap().dist <= 1e-7);
        prop_assert!(px.point.dist(&py.point) <= x.dist(&y) + 1e-6);
    }

    #[test]
    fn projection_beats_samples(g in hull(), x in vec2(), seed in 0u64..1000) {
        let s = ConvexSet::Generator(g);
        let d = s.project(&x, 1e-10).unwrap().dist;
        let mut rng = sampling::rng(seed);
        for _ in 0..50 {
            let q = s.sample(&mut rng, 10.0).unwrap();
            prop_assert!(d <= q.dist(&x) + 1e-7);
        }
    }

    #[test]
    fn support_bounds_samples(g in hull(), u in vec2(), seed in 0u64..1000) {
        prop_assume!(u.norm() > 1e-3);
        let (h, w) = g.support(&u).unwrap();
        prop_assert!((u.dot(&w) - h).abs() <= 1e-9 * (1.0 + h.abs()));
        let s = ConvexSet::Generator(g);
        let mut rng = sampling::rng(seed);
        for _ in 0..50 {
            let q = s.sample(&mut rng, 10.0).unwrap();
            prop_assert!(u.dot(&q) <= h + 1e-9 * (1.0 + h.abs()));
        }
    }

    #[test]
    fn gauge_is_positively_homogeneous(r in 0.5..3.0f64, x in vec2(), t in 0.1..4.0f64) {
        prop_assume!(x.norm() > 1e-3);
        let c = Vector::from_slice(&[0.3, -0.2]);
        let s = ConvexSet::Generator(GeneratorSet::new(
            vec![Vector::from_slice(&[4.0, 0.0]), Vector::from_slice(&[0.0, 4.0])],
            vec![Ball::new(Vector::zeros(2), r).unwrap()],
        ).unwrap());
        let g1 = s.gauge(&c, &c.axpy(1.0, &x)).unwrap();
        let gt = s.gauge(&c, &c.axpy(t, &x)).unwrap();
        prop_assert!((gt - t * g1).abs() <= 1e-6 * (1.0 + gt));
    }

    #[test]
    fn strip_matches_quadratic_over_linear(x in -20.0..20.0f64, y in -1.0..=0.0f64) {
        let f = strip_eval(x, y).unwrap();
        let want = x * x / (1.0 - y);
        prop_assert!((f - want).abs() <= 1e-12 * (1.0 + want));
    }

    #[test]
    fn inf_conv_extension_agrees_and_is_lipschitz(x in vec2(), y in vec2()) {
        let ball = ConvexSet::ball(Vector::zeros(2), 1.0).unwrap();
        let f = ConvexFn::squared_norm_from(Vector::zeros(2));
        let (ext, _) = lipschitz_convex_extend(&f, &ball, 2.0, 200, 3).unwrap();
        let (ex, ey) = (ext.eval(&x).unwrap(), ext.eval(&y).unwrap());
        prop_assert!((ex - ey).abs() <= 2.0 * x.dist(&y) + 1e-5);
        // |x|² on the ball extends as 2|x| - 1 outside
        let want = |p: &Vector| if p.norm() <= 1.0 { p.norm_sq() } else { 2.0 * p.norm() - 1.0 };
        prop_assert!((ex - want(&x)).abs() <= 1e-5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn hartman_dominates_on_the_subspace(angle in 0.0..3.1f64, c in 0.1..3.0f64, seed in 0u64..100) {
        let pair = SubspacePair::new(2, &[Vector::from_slice(&[angle.cos(), angle.sin()])]).unwrap();
        let f = ConvexFn::squared_norm_from(Vector::from_slice(&[c]));
        let d = SetSequence::balls(&Vector::zeros(2), 6, |n| n as f64).unwrap();
        let res = hartman_majorant(&f, &pair, &d, &HartmanOptions { samples: 500, seed, ..Default::default() }).unwrap();
        prop_assert!(res.certificate.passed());
        for i in 0..=100 {
            let t = -5.9 + 11.8 * i as f64 / 100.0;
            let x = pair.lift(&Vector::from_slice(&[t]));
            prop_assert!(res.g.eval(&x).unwrap() >= (t - c) * (t - c));
        }
    }
}
