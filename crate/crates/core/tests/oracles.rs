//! Library results checked against independent computations done here from scratch.

use std::f64::consts::{PI, TAU};

use geocurrents::currents::{mcg_pushforward, sup_norm_estimate, weak_discrepancy, Current, IsometrySampler};
use geocurrents::earthquakes::{earthquake_path_map, qs_constant_estimate, teich_convergence_gauge};
use geocurrents::laminations::{
    family_box_mass, generic_box, lamination_box_mass, thurston_norm_estimate, FamilySpec, FiniteLamination, Leaf,
};
use geocurrents::liouville::{liouville_box, liouville_quad, q_star, solve_fourth_point, Arc, BoundaryMode, GeodesicBox};
use geocurrents::mobius::{
    cayley, geodesic_distance, hyperbolic_translation, BoundaryPoint, Endpoint, Geodesic, MobiusMap, PT_EPS,
};
use geocurrents::random::{random_box, random_isometry, random_lamination, substream};
use num_complex::Complex64;
use rand::Rng;

type C = Complex64;

fn ccw(from: f64, to: f64) -> f64 {
    (to - from).rem_euclid(TAU)
}

// ---------- half-plane minimization ----------

/// Point at arclength `s` on the half-plane semicircle over `[x1, x2]`.
fn on_semicircle(x1: f64, x2: f64, s: f64) -> C {
    let (c, r) = (0.5 * (x1 + x2), 0.5 * (x2 - x1).abs());
    // arclength s ↔ angle φ with tan(φ/2) = e^s
    let phi = 2.0 * s.exp().atan();
    C::new(c + r * phi.cos(), r * phi.sin())
}

fn hyp_dist(z: C, w: C) -> f64 {
    (1.0 + (z - w).norm_sqr() / (2.0 * z.im * w.im)).acosh()
}

fn ternary(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..120 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) <= f(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let s = 0.5 * (a + b);
    (s, f(s))
}

/// Jointly convex in the two arclengths, so nested ternary search finds the minimum.
fn brute_distance(g: (f64, f64), h: (f64, f64)) -> f64 {
    let inner = |s: f64| ternary(-40.0, 40.0, |t| hyp_dist(on_semicircle(g.0, g.1, s), on_semicircle(h.0, h.1, t))).1;
    ternary(-40.0, 40.0, inner).1
}

fn real_of(theta: f64) -> f64 {
    -1.0 / (0.5 * theta).tan()
}

#[test]
fn geodesic_distance_matches_minimization() {
    let mut rng = substream(21, "distance");
    for _ in 0..100 {
        let mut v: Vec<f64> = (0..4).map(|_| 0.05 + (TAU - 0.1) * rng.random::<f64>()).collect();
        v.sort_by(f64::total_cmp);
        if v.windows(2).any(|w| w[1] - w[0] < 0.02) {
            continue;
        }
        let g = Geodesic::from_angles(v[0], v[1]).unwrap();
        let h = Geodesic::from_angles(v[2], v[3]).unwrap();
        let lib = geodesic_distance(g, h).unwrap();
        let oracle = brute_distance((real_of(v[0]), real_of(v[1])), (real_of(v[2]), real_of(v[3])));
        assert!((lib - oracle).abs() <= 1e-6 * oracle.max(1.0), "{lib} vs {oracle} for {v:?}");
    }
}

#[test]
fn distance_from_imaginary_axis_to_unit_interval() {
    let axis = Geodesic::new(cayley(0.0), BoundaryPoint::from_angle(0.0)).unwrap();
    let g = Geodesic::new(cayley(1.0), cayley(2.0)).unwrap();
    let d = geodesic_distance(axis, g).unwrap();
    assert!((d - 3f64.acosh()).abs() < 1e-10);
    let mut prev = 0.0;
    for ratio in [0.9, 0.99, 0.999] {
        let d = geodesic_distance(axis, Geodesic::new(cayley(ratio), cayley(1.0)).unwrap()).unwrap();
        assert!(d > prev);
        prev = d;
    }
}

// ---------- matrices by hand ----------

fn apply(m: [[C; 2]; 2], z: C) -> C {
    (m[0][0] * z + m[0][1]) / (m[1][0] * z + m[1][1])
}

fn mul(a: [[C; 2]; 2], b: [[C; 2]; 2]) -> [[C; 2]; 2] {
    let mut out = [[C::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `S·diag(e^{m/2}, e^{−m/2})·S⁻¹` with `S` sending `∞ ↦ q`, `0 ↦ p`.
fn hand_translation(p: f64, q: f64, m: f64) -> [[C; 2]; 2] {
    let (p, q) = (C::from_polar(1.0, p), C::from_polar(1.0, q));
    let one = C::new(1.0, 0.0);
    let s = [[q, p], [one, one]];
    let det = q - p;
    let s_inv = [[one / det, -p / det], [-one / det, q / det]];
    let d = [[C::new((0.5 * m).exp(), 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), C::new((-0.5 * m).exp(), 0.0)]];
    mul(mul(s, d), s_inv)
}

#[test]
fn translation_eigenvalues() {
    for m in [0.01, 0.1, 0.5, 1.0, 5.0] {
        let t = hyperbolic_translation(Geodesic::from_angles(0.4, 2.9).unwrap(), m, Endpoint::Q).unwrap();
        let tr = C::new(2.0 * t.u().re, 0.0);
        let disc = (tr * tr - 4.0).sqrt();
        let lam = ((tr + disc) / 2.0).norm().max(((tr - disc) / 2.0).norm());
        assert!((lam - (0.5 * m).exp()).abs() < 1e-10, "{m}");
        assert!((t.trace().abs() - 2.0 * (0.5 * m).cosh()).abs() < 1e-10);
    }
}

#[test]
fn nested_leaves_compose_nearest_first() {
    let (m1, m2) = (0.8, 1.7);
    let lam = FiniteLamination::new(vec![
        Leaf::new(PI + 0.2, TAU - 0.2, m1).unwrap(),
        Leaf::new(PI + 0.6, TAU - 0.6, m2).unwrap(),
    ])
    .unwrap();
    let h = earthquake_path_map(&lam, 1.0).unwrap();
    // base at π/2; both leaves are met first at their smaller angle going counterclockwise
    let t1 = hand_translation(PI + 0.2, TAU - 0.2, m1);
    let t2 = hand_translation(PI + 0.6, TAU - 0.6, m2);
    let far = mul(t1, t2);
    for x in [1.3 * PI, 1.5 * PI, 1.7 * PI] {
        let want = apply(far, C::from_polar(1.0, x)).arg().rem_euclid(TAU);
        let got = h.eval(BoundaryPoint::from_angle(x)).angle();
        assert!(BoundaryPoint::from_angle(want).distance(BoundaryPoint::from_angle(got)) < 1e-10);
    }
    for x in [PI + 0.3, PI + 0.5] {
        let want = apply(t1, C::from_polar(1.0, x)).arg().rem_euclid(TAU);
        assert!(BoundaryPoint::from_angle(want).distance(h.eval(BoundaryPoint::from_angle(x))) < 1e-10);
    }
    for x in [0.0, 0.5 * PI, 3.0] {
        assert!(h.eval(BoundaryPoint::from_angle(x)).distance(BoundaryPoint::from_angle(x)) < 1e-15);
    }
}

// ---------- cross-ratios ----------

#[test]
fn q_star_cross_ratio_by_complex_arithmetic() {
    let z = [0.0, 0.5 * PI, PI, 1.5 * PI].map(|t| C::from_polar(1.0, t));
    let cr = ((z[0] - z[2]) * (z[1] - z[3]) / ((z[0] - z[3]) * (z[1] - z[2]))).norm();
    assert!((cr - 2.0).abs() < 1e-15);
    assert!((liouville_box(&q_star()) - cr.ln()).abs() < 1e-15);
    let half_plane = GeodesicBox::new(cayley(0.0), cayley(1.0), BoundaryPoint::from_angle(0.0), cayley(-1.0)).unwrap();
    assert!((liouville_box(&half_plane) - 2f64.ln()).abs() < 1e-14);
}

#[test]
fn random_boxes_match_complex_cross_ratio() {
    let mut rng = substream(4, "boxes");
    for _ in 0..1000 {
        let q = random_box(&mut rng, 1e-3);
        let z = q.angles().map(|t| C::from_polar(1.0, t));
        let cr = ((z[0] - z[2]) * (z[1] - z[3]) / ((z[0] - z[3]) * (z[1] - z[2]))).norm();
        let l = liouville_box(&q);
        assert!((l - cr.ln()).abs() <= 1e-9 * l.max(1.0), "{l} vs {}", cr.ln());
    }
}

#[test]
fn fourth_point_round_trips() {
    let mut rng = substream(5, "round-trip");
    let d = solve_fourth_point(
        BoundaryPoint::from_angle(0.0),
        BoundaryPoint::from_angle(0.5 * PI),
        BoundaryPoint::from_angle(PI),
        2f64.ln(),
        &Arc::new(BoundaryPoint::from_angle(PI), BoundaryPoint::from_angle(0.0)).unwrap(),
    )
    .unwrap();
    assert!(d.distance(BoundaryPoint::from_angle(1.5 * PI)) < 1e-12);
    for _ in 0..1000 {
        let q = random_box(&mut rng, 1e-2);
        let [a, b, c, d] = q.corners();
        let got = solve_fourth_point(a, b, c, liouville_box(&q), &Arc::new(c, a).unwrap()).unwrap();
        assert!(got.distance(d) < 1e-9, "{} vs {}", got.angle(), d.angle());
    }
}

#[test]
fn quadrature_agrees_with_closed_form() {
    assert!((liouville_quad(&q_star(), 1e-8).unwrap() - 2f64.ln()).abs() <= 1e-8);
    let thin = GeodesicBox::from_angles(0.0, 1e-3, 2.0, 2.0 + 1e-3).unwrap();
    assert!((liouville_quad(&thin, 1e-10).unwrap() - liouville_box(&thin)).abs() <= 1e-10);
    let mut rng = substream(6, "quad");
    for _ in 0..20 {
        let q = random_box(&mut rng, 0.05);
        let tol = 1e-8;
        let got = liouville_quad(&q, tol).unwrap();
        assert!((got - liouville_box(&q)).abs() <= tol, "{:?}", q.angles());
    }
}

// ---------- families ----------

/// Midpoint sum of the density over parameters whose geodesic `(−s, s)` has an endpoint in each arc.
fn riemann_family_mass(start: f64, end: f64, q: [f64; 4], n: usize) -> f64 {
    let inside = |x: f64, a: f64, b: f64| ccw(a, x) <= ccw(a, b);
    let h = (end - start) / n as f64;
    (0..n)
        .map(|k| start + (k as f64 + 0.5) * h)
        .filter(|&s| {
            let (p, r) = (-s, s);
            (inside(p, q[0], q[1]) && inside(r, q[2], q[3])) || (inside(r, q[0], q[1]) && inside(p, q[2], q[3]))
        })
        .count() as f64
        * h
}

#[test]
fn family_mass_matches_direct_integration() {
    let spec = FamilySpec::nested(0.1, 1.0);
    let capture = GeodesicBox::from_angles(0.3, 0.8, TAU - 0.8, TAU - 0.3).unwrap();
    assert!((family_box_mass(&spec, &capture) - 0.5).abs() < 1e-12);
    let mut rng = substream(8, "family");
    for _ in 0..200 {
        let q = random_box(&mut rng, 0.01);
        let exact = family_box_mass(&spec, &q);
        let oracle = riemann_family_mass(0.1, 1.0, q.angles(), 200_000);
        assert!((exact - oracle).abs() < 1e-4, "{exact} vs {oracle} on {:?}", q.angles());
    }
}

#[test]
fn generic_boxes_keep_endpoints_off_the_boundary() {
    let mut rng = substream(9, "generic");
    for _ in 0..1000 {
        let lam = random_lamination(&mut rng, 8, 0.1, 2.0);
        // Put a corner on a leaf endpoint about half the time.
        let mut q = random_box(&mut rng, 0.05);
        if rng.random_bool(0.5) {
            let e = lam.endpoints()[0];
            let [_, b, c, d] = q.corners();
            if let Ok(moved) = GeodesicBox::new(e, b, c, d) {
                q = moved;
            }
        }
        let g = generic_box(&q, &lam, 1e-3).unwrap();
        for corner in g.corners() {
            for e in lam.endpoints() {
                assert!(corner.distance(e) > PT_EPS);
            }
        }
        assert_eq!(
            lamination_box_mass(&lam, &g, BoundaryMode::Include),
            lamination_box_mass(&lam, &g, BoundaryMode::Exclude)
        );
    }
}

// ---------- Thurston norm by arc sampling ----------

/// Side of the orthogonal circle through `e^{ia}`, `e^{ib}` that contains `z`.
fn side(a: f64, b: f64, z: C) -> bool {
    let (e1, e2) = (C::from_polar(1.0, a), C::from_polar(1.0, b));
    let center = (e1 + e2) * 2.0 / (e1 + e2).norm_sqr();
    let r = (0.5 * ccw(a, b)).tan().abs();
    (z - center).norm() < r
}

/// Counts sampled unit arcs crossing both leaves `(±φ)` and `(π ± φ)`.
fn arcs_crossing_both(phi: f64, n: usize, seed: u64) -> usize {
    let mut rng = substream(seed, "arcs");
    let reach = (0.5f64).tanh();
    let mut hits = 0;
    for _ in 0..n {
        let z = C::from_polar(0.6 * rng.random::<f64>().sqrt(), TAU * rng.random::<f64>());
        let w0 = C::from_polar(reach, TAU * rng.random::<f64>());
        let w = (w0 + z) / (C::new(1.0, 0.0) + z.conj() * w0);
        let crosses = |a: f64, b: f64| side(a, b, z) != side(a, b, w);
        if crosses(-phi, phi) && crosses(PI - phi, PI + phi) {
            hits += 1;
        }
    }
    hits
}

/// Endpoint angle `φ` of the leaf `(−φ, φ)` at distance `d/2` from the origin.
fn leaf_angle(d: f64) -> f64 {
    let x = (0.25 * d).tanh();
    0.5 * PI - 2.0 * x.atan()
}

#[test]
fn thurston_lower_bound_against_sampled_arcs() {
    let (m1, m2) = (1.3, 0.7);
    for (dist, expect_both) in [(3.0, false), (0.1, true)] {
        let phi = leaf_angle(dist);
        let lam = FiniteLamination::new(vec![
            Leaf::new(-phi, phi, m1).unwrap(),
            Leaf::new(PI - phi, PI + phi, m2).unwrap(),
        ])
        .unwrap();
        let d = geodesic_distance(lam.leaves()[0].geodesic, lam.leaves()[1].geodesic).unwrap();
        assert!((d - dist).abs() < 1e-9);
        let hits = arcs_crossing_both(phi, 1_000_000, 12);
        assert_eq!(hits > 0, expect_both, "distance {dist}: {hits} arcs cross both");
        let b = thurston_norm_estimate(&lam, 4000);
        let want = if expect_both { m1 + m2 } else { m1.max(m2) };
        assert!((b.lower - want).abs() < 1e-12, "{dist}: {b:?}");
        assert!(b.upper >= b.lower);
    }
}

// ---------- earthquake maps ----------

#[test]
fn normalized_maps_fix_three_points() {
    let lam = random_lamination(&mut substream(13, "lam"), 5, 0.2, 1.5);
    for t in [1.0, 2.0, 4.0] {
        let h = earthquake_path_map(&lam, t).unwrap().normalize_fix_three().unwrap();
        for a in [0.0, 0.5 * PI, PI] {
            let p = BoundaryPoint::from_angle(a);
            assert!(h.eval(p).distance(p) < 1e-10);
        }
        h.check_invariants(1000, 1e-9).unwrap();
    }
}

#[test]
fn qs_estimates_grow_along_paths_and_gauges_shrink() {
    let lam = FiniteLamination::new(vec![Leaf::new(0.5, 2.5, 1.0).unwrap(), Leaf::new(3.5, 5.5, 0.6).unwrap()]).unwrap();
    let mut prev = 1.0;
    for t in [1.0, 2.0, 4.0, 8.0] {
        let k = qs_constant_estimate(&earthquake_path_map(&lam, t).unwrap(), 2000);
        assert!(k >= prev, "t = {t}: {k} < {prev}");
        prev = k;
    }
    let h = earthquake_path_map(&lam, 1.0).unwrap();
    let mut prev = f64::INFINITY;
    for n in 1..=16 {
        let hn = earthquake_path_map(&lam, 1.0 + 1.0 / n as f64).unwrap();
        let g = teich_convergence_gauge(&hn, &h, 500).unwrap();
        assert!(g < prev, "n = {n}");
        prev = g;
    }
    let rotated = h.compose(&geocurrents::CircleMap::from_mobius(MobiusMap::rotation(0.3))).unwrap();
    assert!(teich_convergence_gauge(&rotated, &h, 500).unwrap() > 0.05);
}

// ---------- currents ----------

#[test]
fn weak_discrepancy_scales_linearly_for_small_weights() {
    let mut rng = substream(14, "boxes");
    let boxes: Vec<GeodesicBox> = (0..50).map(|_| random_box(&mut rng, 0.05)).collect();
    let d: Vec<f64> = [1e-4, 2e-4, 4e-4]
        .iter()
        .map(|&m| {
            let lam = FiniteLamination::new(vec![Leaf::new(0.7, 3.9, m).unwrap()]).unwrap();
            weak_discrepancy(&Current::Liouville, &Current::pullback(earthquake_path_map(&lam, 1.0).unwrap()), &boxes)
        })
        .collect();
    assert!(d[0] > 0.0);
    assert!((d[1] / d[0] - 2.0).abs() < 0.01 && (d[2] / d[1] - 2.0).abs() < 0.01, "{d:?}");
}

#[test]
fn single_atom_never_exceeds_its_weight() {
    let m = 1.7;
    let lam = FiniteLamination::new(vec![Leaf::new(0.2, 2.9, m).unwrap()]).unwrap();
    let alpha = Current::lamination(lam);
    let mut rng = substream(15, "atoms");
    for _ in 0..10_000 {
        assert!(alpha.value(&random_box(&mut rng, 1e-4)) <= m);
    }
    let s = sup_norm_estimate(&alpha, &IsometrySampler { seed: 2, count: 500, ..Default::default() });
    assert_eq!(s, m);
}

#[test]
fn pushforward_matches_direct_composite() {
    let g = earthquake_path_map(
        &FiniteLamination::new(vec![Leaf::new(0.3, 2.0, 0.9).unwrap(), Leaf::new(2.5, 4.0, 0.5).unwrap()]).unwrap(),
        1.0,
    )
    .unwrap();
    let h = earthquake_path_map(&random_lamination(&mut substream(16, "lam"), 4, 0.2, 1.0), 1.0).unwrap();
    let pushed = mcg_pushforward(&g, &Current::pullback(h.clone())).unwrap();
    let ginv = g.inverse().unwrap();
    let mut rng = substream(16, "boxes");
    for _ in 0..50 {
        let q = random_box(&mut rng, 0.02);
        // Pull back by hand: map corners by g⁻¹ then h, evaluate the image box.
        let corners = q.corners().map(|p| h.eval(ginv.eval(p)));
        let z = corners.map(|p| p.to_complex());
        let direct = ((z[0] - z[2]) * (z[1] - z[3]) / ((z[0] - z[3]) * (z[1] - z[2]))).norm().ln();
        let got = pushed.value(&q);
        assert!((got - direct).abs() <= 1e-9 * direct.max(1.0), "{got} vs {direct}");
    }
    let moved = random_isometry(&mut rng, 1.0);
    let liou = mcg_pushforward(&geocurrents::CircleMap::from_mobius(moved), &Current::Liouville).unwrap();
    assert!((liou.value(&q_star()) - 2f64.ln()).abs() < 1e-12);
}
