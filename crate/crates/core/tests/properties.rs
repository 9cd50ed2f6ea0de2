mod common;

use proptest::prelude::*;
use rand::SeedableRng;

use varmeas::certificate::Decay;
use varmeas::convex::{hausdorff, radstrom_embed, DirectionGrid, Polytope};
use varmeas::harness::{build_instance, family_rng, FamilySpec};
use varmeas::integrability::worst_set_integral;
use varmeas::mcshane::{
    graded_gauge, integral, ms_integral, random_subordinate_partition, riemann_sum, subordinate_partition,
    DensityMeasure, Gauge, IntervalSet, StepFn,
};
use varmeas::measure::{subsets, sup_set_gap, total_variation_distance, AtomFunction, MeasurableSet, SignedMeasure};
use varmeas::report::{AuxCheck, TheoremReport, Verdict};

use common::*;

fn weights(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 1..=max)
}

fn points2() -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec(prop::array::uniform2(-3.0f64..3.0), 1..8)
}

fn body(pts: &[[f64; 2]]) -> Polytope {
    let rows: Vec<Vec<f64>> = pts.iter().map(|p| p.to_vec()).collect();
    Polytope::new(2, &rows).unwrap()
}

fn dyadic_step(max_cuts: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    prop::collection::btree_set(1u32..32, 0..=max_cuts).prop_flat_map(|cuts| {
        let mut b = vec![0.0];
        b.extend(cuts.iter().map(|&c| c as f64 / 32.0));
        b.push(1.0);
        let cells = b.len() - 1;
        (Just(b), prop::collection::vec((-16i32..=16).prop_map(|k| k as f64 / 8.0), cells))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn jordan_parts_are_minimal(w in weights(16)) {
        let m = SignedMeasure::new(w.clone()).unwrap();
        let j = m.jordan();
        prop_assert_eq!(j.reconstruct(), m.clone());
        for i in 0..w.len() {
            prop_assert!(j.pos.weight(i) >= 0.0 && j.neg.weight(i) >= 0.0);
            prop_assert!(j.pos.weight(i) == 0.0 || j.neg.weight(i) == 0.0);
        }
        prop_assert_eq!(j.variation(), m.abs());
    }

    #[test]
    fn set_gap_against_total_variation(a in weights(10), b in weights(10)) {
        let n = a.len().min(b.len());
        let (a, b) = (&a[..n], &b[..n]);
        let ma = SignedMeasure::new(a.to_vec()).unwrap();
        let mb = SignedMeasure::new(b.to_vec()).unwrap();
        let gap = sup_set_gap(&ma, &mb).unwrap();
        let tv = total_variation_distance(&ma, &mb).unwrap();
        prop_assert!(gap <= tv + 1e-12 && tv <= 2.0 * gap + 1e-12);
        prop_assert!((gap - brute_sup_gap(a, b)).abs() <= 1e-12);
    }

    #[test]
    fn set_algebra_laws(mask_a in 0u64..1 << 12, mask_b in 0u64..1 << 12) {
        let a = MeasurableSet::from_mask(12, mask_a);
        let b = MeasurableSet::from_mask(12, mask_b);
        let u = a.union(&b).unwrap();
        let i = a.intersection(&b).unwrap();
        prop_assert_eq!(u.len() + i.len(), a.len() + b.len());
        prop_assert_eq!(a.complement().complement(), a.clone());
        prop_assert!(a.difference(&b).unwrap().is_disjoint(&b));
        prop_assert!(i.is_subset(&u));
    }

    #[test]
    fn worst_set_matches_enumeration(
        absf in prop::collection::vec(0.0f64..5.0, 1..=9),
        seed in any::<u64>(),
        delta in 0.01f64..1.5,
    ) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = absf.len();
        let w: Vec<f64> = (0..n).map(|_| rand::Rng::gen_range(&mut rng, 0.0..1.0)).collect();
        let f = AtomFunction::scalar(absf.clone()).unwrap();
        let m = SignedMeasure::new(w.clone()).unwrap();
        let got = worst_set_integral(&f, &m, delta).unwrap();
        let mut best = 0.0f64;
        for s in subsets(n).unwrap() {
            let mass: f64 = s.iter().map(|i| w[i]).sum();
            if mass < delta {
                best = best.max(s.iter().map(|i| absf[i] * w[i]).sum());
            }
        }
        prop_assert!(got.value >= best - 1e-12, "value {} below the exact {}", got.value, best);
        if let Some(set) = got.set {
            let mass: f64 = set.iter().map(|i| w[i]).sum();
            prop_assert!(mass < delta);
            prop_assert!((got.value - best).abs() <= 1e-12);
        }
    }

    #[test]
    fn hausdorff_grid_bounds(a in points2(), b in points2()) {
        let grid = DirectionGrid::default_for(2).unwrap();
        let (p, q) = (body(&a), body(&b));
        let hb = hausdorff(&p, &q, &grid).unwrap();
        let back = hausdorff(&q, &p, &grid).unwrap();
        prop_assert_eq!(hb, back);
        let exact = polygon_hausdorff(&a, &b);
        prop_assert!(hb.lower <= exact + 1e-12 && exact <= hb.upper + 1e-12);
        let dirs = 20_000;
        let dense = dense_circle(dirs)
            .into_iter()
            .map(|u| (support2(&a, u) - support2(&b, u)).abs())
            .fold(0.0, f64::max);
        let radius = a.iter().chain(&b).map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
        prop_assert!(dense <= exact + 1e-12);
        prop_assert!(exact <= dense + 2.0 * radius * std::f64::consts::PI / dirs as f64 + 1e-12);
    }

    #[test]
    fn minkowski_sum_adds_supports(a in points2(), b in points2(), theta in 0.0f64..6.3) {
        let (p, q) = (body(&a), body(&b));
        let u = [theta.cos(), theta.sin()];
        let s = p.minkowski_sum(&q).unwrap().support(&u);
        prop_assert!((s - p.support(&u) - q.support(&u)).abs() <= 1e-12);
        let grid = DirectionGrid::default_for(2).unwrap();
        let e = radstrom_embed(&p, &grid).unwrap();
        prop_assert!(e.sublinearity_defect() <= 1e-12);
    }

    #[test]
    fn random_partitions_are_subordinate(
        jumps in prop::collection::vec(0.0f64..1.0, 0..6),
        log_eta in -30.0f64..-1.0,
        seed in any::<u64>(),
    ) {
        let gauge = graded_gauge(&jumps, log_eta.exp2()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let p = random_subordinate_partition(&mut rng, &gauge);
            prop_assert!(p.verify(&gauge).is_ok(), "{:?}", p.verify(&gauge));
        }
        prop_assert!(subordinate_partition(&gauge, 2).verify(&gauge).is_ok());
    }

    #[test]
    fn gauge_minimum(r1 in 1e-6f64..1.0, r2 in 1e-6f64..1.0, cut in 0.01f64..0.99, t in 0.0f64..1.0) {
        let a = Gauge::new(vec![0.0, cut, 1.0], vec![r1, r2]).unwrap();
        let b = Gauge::constant(0.5 * (r1 + r2)).unwrap();
        let m = a.min(&b);
        prop_assert_eq!(m.radius(t), a.radius(t).min(b.radius(t)));
    }

    #[test]
    fn step_integral_is_exact_and_additive((fb, fv) in dyadic_step(6), (db, dv) in dyadic_step(4), k in 1u32..32) {
        let dv: Vec<f64> = dv.iter().map(|x| x.abs() + 0.125).collect();
        let f = StepFn::scalar(fb.clone(), fv.clone()).unwrap();
        let m = DensityMeasure::new(db.clone(), dv.clone()).unwrap();
        let whole = ms_integral(&f, &m).value[0];
        prop_assert_eq!(whole, step_integral(&fb, &fv, &db, &dv, 0.0, 1.0));
        let c = k as f64 / 32.0;
        let left = integral(&f, &m, &IntervalSet::interval(0.0, c).unwrap())[0];
        let right = integral(&f, &m, &IntervalSet::interval(c, 1.0).unwrap())[0];
        prop_assert_eq!(left + right, whole);
    }

    #[test]
    fn riemann_sums_respect_the_gauge((fb, fv) in dyadic_step(5), seed in any::<u64>(), log_eps in -20.0f64..-2.0) {
        let f = StepFn::scalar(fb, fv).unwrap();
        let m = DensityMeasure::new(vec![0.0, 0.5, 1.0], vec![0.5, 1.5]).unwrap();
        let ms = ms_integral(&f, &m);
        let eps = log_eps.exp2();
        let gauge = ms.gauge_for(eps).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let p = random_subordinate_partition(&mut rng, &gauge);
            let s = riemann_sum(&f, &m, &p).unwrap()[0];
            prop_assert!((s - ms.value[0]).abs() <= eps);
        }
    }

    #[test]
    fn decay_index_below(c in 0.1f64..10.0, p in 0.2f64..3.0, target in 1e-6f64..1.0) {
        let d = Decay::power(c, p).unwrap();
        if let Some(n) = d.index_below(target, 1 << 20) {
            prop_assert!(d.eval(n) <= target);
            prop_assert!(n == 1 || d.eval(n - 1) > target);
        } else {
            prop_assert!(d.eval(1 << 20) > target);
        }
    }

    #[test]
    fn family_construction_is_seeded(seed in any::<u64>(), index in 0usize..100) {
        for kind in ["bounded_pair", "multi_scaled", "step_perturbed", "step_multi_scaled"] {
            let spec: FamilySpec = serde_json::from_str(&format!(r#"{{"kind": "{kind}"}}"#)).unwrap();
            let a = format!("{:?}", build_instance(&spec, &mut family_rng(seed, index)).unwrap());
            let b = format!("{:?}", build_instance(&spec, &mut family_rng(seed, index)).unwrap());
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn reports_round_trip_through_json(curve in prop::collection::vec(0.0f64..1.0, 0..20), value in prop::num::f64::ANY) {
        let mut r = TheoremReport::new("th1", "f", curve.len(), 0.1);
        r.curve = curve.iter().copied().enumerate().map(|(i, g)| (i + 1, g)).collect();
        r.auxiliary.push(AuxCheck { label: "x".into(), verdict: Verdict::Holds, value, detail: String::new() });
        r.conclude();
        let back: TheoremReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        prop_assert_eq!(&back.curve, &r.curve);
        prop_assert_eq!(back.verdict, r.verdict);
        if value.is_finite() {
            prop_assert_eq!(back.auxiliary[0].value, value);
        } else {
            prop_assert!(back.auxiliary[0].value.is_nan());
        }
    }
}
