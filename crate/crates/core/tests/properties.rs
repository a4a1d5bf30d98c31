use std::f64::consts::TAU;

use geocurrents::currents::{bonahon_residual, uniform_discrepancy, Current, IsometrySampler};
use geocurrents::earthquakes::earthquake_path_map;
use geocurrents::laminations::{
    discretize_family, lamination_box_mass, thurston_norm_estimate_seeded, AffineCurve, DensityStep, FamilySpec,
};
use geocurrents::liouville::{complementary_box, liouville_box, solve_fourth_point, Arc, BoundaryMode, GeodesicBox};
use geocurrents::mobius::{is_ccw, mobius_from_three_pairs, BoundaryPoint, MobiusMap};
use geocurrents::random::{random_isometry, random_lamination, substream};
use num_complex::Complex64;
use proptest::prelude::*;

/// Four corners from positive gaps of at least `0.02` radians each.
fn any_box() -> impl Strategy<Value = GeodesicBox> {
    (0.0..TAU, prop::array::uniform4(0.02f64..1.0)).prop_map(|(start, w)| {
        let total: f64 = w.iter().sum();
        let mut acc = start;
        let mut corners = [0.0; 4];
        for k in 0..4 {
            corners[k] = acc;
            acc += w[k] / total * TAU;
        }
        GeodesicBox::from_angles(corners[0], corners[1], corners[2], corners[3]).unwrap()
    })
}

/// Translation along a random axis composed with a rotation.
fn any_isometry() -> impl Strategy<Value = MobiusMap> {
    (0.0..TAU, 0.0..TAU, 0.0f64..3.0, 0.2f64..6.0).prop_map(|(a, b, len, gap)| {
        let u = Complex64::new(len.cosh() * 0.5f64.cos(), len.cosh() * 0.5f64.sin());
        let v = Complex64::from_polar(len.sinh(), a);
        let m = MobiusMap::from_uv(u, v).unwrap();
        m.compose(&MobiusMap::rotation(b + gap))
    })
}

fn nearly(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn liouville_is_mobius_invariant(q in any_box(), g in any_isometry()) {
        let (a, b) = (liouville_box(&q), liouville_box(&q.image(&g)));
        prop_assert!(nearly(a, b, 1e-9), "{a} vs {b}");
    }

    #[test]
    fn liouville_is_additive_under_splits(q in any_box(), s in 0.01f64..0.99) {
        let m = q.first.at(s);
        let [a, b, c, d] = q.corners();
        let left = GeodesicBox::new(a, m, c, d).unwrap();
        let right = GeodesicBox::new(m, b, c, d).unwrap();
        let sum = liouville_box(&left) + liouville_box(&right);
        prop_assert!(nearly(sum, liouville_box(&q), 1e-10));
    }

    #[test]
    fn liouville_flip_symmetry(q in any_box()) {
        prop_assert!(nearly(liouville_box(&q), liouville_box(&q.flipped()), 1e-12));
    }

    #[test]
    fn liouville_cocycle(q in any_box()) {
        let s = (-liouville_box(&q)).exp() + (-liouville_box(&complementary_box(&q))).exp();
        prop_assert!(nearly(s, 1.0, 1e-10));
    }

    #[test]
    fn equal_values_are_mobius_equivalent(q1 in any_box(), q2 in any_box()) {
        let target = liouville_box(&q1);
        let [a, b, c, _] = q2.corners();
        let arc = Arc::new(c, a).unwrap();
        if let Ok(d2) = solve_fourth_point(a, b, c, target, &arc) {
            let [a1, b1, c1, d1] = q1.corners();
            let g = mobius_from_three_pairs([a1, b1, c1], [a, b, c]).unwrap();
            prop_assert!(g.apply(d1).distance(d2) <= 1e-8);
        }
    }

    #[test]
    fn lamination_mass_flip_symmetry(seed in any::<u64>(), q in any_box()) {
        let lam = random_lamination(&mut substream(seed, "lam"), 10, 0.1, 3.0);
        for mode in [BoundaryMode::Include, BoundaryMode::Exclude] {
            let (a, b) = (lamination_box_mass(&lam, &q, mode), lamination_box_mass(&lam, &q.flipped(), mode));
            prop_assert!(nearly(a, b, 1e-12));
        }
    }

    #[test]
    fn lamination_mass_is_bounded_by_total(seed in any::<u64>(), q in any_box()) {
        let lam = random_lamination(&mut substream(seed, "lam"), 10, 0.1, 3.0);
        prop_assert!(lamination_box_mass(&lam, &q, BoundaryMode::Include) <= lam.total_mass() + 1e-12);
    }

    #[test]
    fn discretization_conserves_mass(n in 1usize..200, w1 in 0.1f64..3.0, w2 in 0.0f64..3.0) {
        let spec = FamilySpec {
            start: 0.1,
            end: 1.4,
            p: AffineCurve { offset: 0.0, slope: -1.0 },
            q: AffineCurve { offset: 0.0, slope: 1.0 },
            density: vec![DensityStep { until: 0.6, value: w1 }, DensityStep { until: 2.0, value: w2 }],
        };
        let lam = discretize_family(&spec, n).unwrap();
        let exact = 0.5 * w1 + 0.8 * w2;
        prop_assert!(nearly(lam.total_mass(), exact, 1e-12));
    }

    #[test]
    fn earthquakes_preserve_cyclic_order(seed in any::<u64>(), x in 0.0..TAU, y in 0.0..TAU, z in 0.0..TAU) {
        let lam = random_lamination(&mut substream(seed, "lam"), 6, 0.1, 2.0);
        let h = earthquake_path_map(&lam, 1.0).unwrap();
        let [a, b, c] = [x, y, z].map(BoundaryPoint::from_angle);
        if a != b && b != c && a != c {
            prop_assert_eq!(is_ccw(a, b, c), is_ccw(h.eval(a), h.eval(b), h.eval(c)));
        }
    }

    #[test]
    fn pullbacks_are_additive_flip_symmetric_and_satisfy_bonahon(
        seed in any::<u64>(),
        q in any_box(),
        s in 0.01f64..0.99,
    ) {
        let lam = random_lamination(&mut substream(seed, "lam"), 5, 0.1, 2.0);
        let alpha = Current::pullback(earthquake_path_map(&lam, 1.0).unwrap());
        let [a, b, c, d] = q.corners();
        let m = q.first.at(s);
        let split = alpha.value(&GeodesicBox::new(a, m, c, d).unwrap()) + alpha.value(&GeodesicBox::new(m, b, c, d).unwrap());
        prop_assert!(nearly(split, alpha.value(&q), 1e-9));
        prop_assert!(nearly(alpha.value(&q), alpha.value(&q.flipped()), 1e-12));
        prop_assert!(bonahon_residual(&alpha, &q) <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn thurston_lower_bound_grows_with_samples(seed in any::<u64>()) {
        let lam = random_lamination(&mut substream(seed, "lam"), 6, 0.1, 2.0);
        let mut prev = 0.0;
        for n in [8, 32, 128] {
            let b = thurston_norm_estimate_seeded(&lam, n, seed);
            prop_assert!(b.lower >= prev && b.lower <= b.upper + 1e-12);
            prev = b.lower;
        }
    }

    #[test]
    fn uniform_discrepancy_is_symmetric(seed in any::<u64>()) {
        let mut rng = substream(seed, "boxes");
        let lam = random_lamination(&mut rng, 4, 0.1, 1.0);
        let a = Current::pullback(earthquake_path_map(&lam, 1.0).unwrap());
        let b = Current::Liouville;
        let boxes: Vec<GeodesicBox> =
            (0..5).map(|_| geocurrents::liouville::q_star().image(&random_isometry(&mut rng, 1.0))).collect();
        let s = IsometrySampler { seed, count: 6, ..Default::default() };
        let (ab, ba) = (uniform_discrepancy(&a, &b, &s, &boxes), uniform_discrepancy(&b, &a, &s, &boxes));
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(uniform_discrepancy(&a, &a, &s, &boxes), 0.0);
    }
}
