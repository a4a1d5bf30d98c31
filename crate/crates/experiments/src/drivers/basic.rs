use std::f64::consts::{PI, TAU};
use std::path::Path;

use anyhow::Result;
use geocurrents::currents::Current;
use geocurrents::earthquakes::{build_earthquake, default_base, earthquake_path_map};
use geocurrents::liouville::{complementary_box, liouville_box, liouville_quad, q_star, solve_fourth_point, Arc, GeodesicBox};
use geocurrents::mobius::BoundaryPoint;
use geocurrents::CircleMap;
use geocurrents::random::{random_box, random_isometry, random_lamination, substream};
use rand::Rng;
use rayon::prelude::*;

use super::corner_cells;
use crate::config::{LiouvilleSpec, QuakeEvalSpec};
use crate::report::{num, Report, Table, Verdict};

/// Closed form, invariance, additivity, quadrature and inversion of box values.
pub fn run_liouville(spec: &LiouvilleSpec, seed: u64) -> Result<Report> {
    let mut report = Report::new("liouville");
    let mut checks = Table::new("checks", &["check", "trials", "max_error"]);

    let star = (liouville_box(&q_star()) - 2f64.ln()).abs();
    checks.push(vec!["q_star".into(), "1".into(), num(star)]);
    report.verdicts.push(Verdict::at_most("L(Q*) = log 2", star, 1e-12));

    let mut rng = substream(seed, "invariance");
    let (mut inv, mut inv_img, mut add, mut flip, mut cocycle) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..spec.invariance_trials {
        let q = random_box(&mut rng, 1e-3);
        let g = random_isometry(&mut rng, 1.0);
        let l = liouville_box(&q);
        // L(gQ) through the map itself; rounding the corners of gQ to f64 angles first loses accuracy when g
        // squeezes them together, so that route is only tabulated.
        inv = inv.max((CircleMap::from_mobius(g).box_value(&q) - l).abs());
        inv_img = inv_img.max((liouville_box(&q.image(&g)) - l).abs());
        let m = q.first.at(0.01 + 0.98 * rng.random::<f64>());
        let [a, b, c, d] = q.corners();
        let split = liouville_box(&GeodesicBox::new(a, m, c, d)?) + liouville_box(&GeodesicBox::new(m, b, c, d)?);
        add = add.max((split - l).abs());
        flip = flip.max((liouville_box(&q.flipped()) - l).abs());
        cocycle = cocycle.max(((-l).exp() + (-liouville_box(&complementary_box(&q))).exp() - 1.0).abs());
    }
    let n = spec.invariance_trials.to_string();
    for (name, v) in [("mobius_invariance", inv), ("mobius_invariance_rounded_image", inv_img), ("additivity", add), ("flip", flip), ("cocycle", cocycle)] {
        checks.push(vec![name.into(), n.clone(), num(v)]);
    }
    report.verdicts.push(Verdict::at_most("Mobius invariance", inv, 1e-9));
    report.verdicts.push(Verdict::at_most("additivity under arc splits", add, 1e-10));
    report.verdicts.push(Verdict::at_most("flip symmetry", flip, 1e-12));
    report.verdicts.push(Verdict::at_most("cocycle identity", cocycle, 1e-10));

    let boxes = spec.quad_boxes.boxes(seed);
    let quads: Vec<Result<f64, geocurrents::Error>> =
        boxes.par_iter().map(|q| liouville_quad(q, spec.quad_tol)).collect();
    let mut quad_table = Table::new("quadrature", &["box_id", "a", "b", "c", "d", "closed_form", "quadrature", "abs_diff"]);
    let mut worst = 0.0f64;
    for (i, (q, v)) in boxes.iter().zip(quads).enumerate() {
        let closed = liouville_box(q);
        let v = v?;
        worst = worst.max((v - closed).abs());
        let mut row = vec![i.to_string()];
        row.extend(corner_cells(q));
        row.extend([num(closed), num(v), num((v - closed).abs())]);
        quad_table.push(row);
    }
    report.verdicts.push(Verdict::at_most("quadrature matches closed form", worst, spec.quad_tol));

    let mut rng = substream(seed, "round-trip");
    let mut trip = 0.0f64;
    for _ in 0..spec.round_trips {
        let q = random_box(&mut rng, 1e-2);
        let [a, b, c, d] = q.corners();
        let got = solve_fourth_point(a, b, c, liouville_box(&q), &Arc::new(c, a)?)?;
        trip = trip.max(got.distance(d));
    }
    checks.push(vec!["fourth_point_round_trip".into(), spec.round_trips.to_string(), num(trip)]);
    report.verdicts.push(Verdict::at_most("fourth corner recovered from the box value", trip, 1e-9));

    // A normalized h is determined by α(Q_x), Q_x = [1, i] × [−1, x], for x between −1 and 1.
    let mut rec = Table::new("reconstruction", &["map", "x", "h_x", "reconstructed", "error"]);
    let mut rng = substream(seed, "reconstruction");
    let (one, i, minus_one) = (BoundaryPoint::from_angle(0.0), BoundaryPoint::from_angle(0.5 * PI), BoundaryPoint::from_angle(PI));
    let lower = Arc::new(minus_one, one)?;
    let mut rec_err = 0.0f64;
    for k in 0..spec.reconstructions {
        let lam = random_lamination(&mut rng, 5, 0.1, 1.5);
        let h = earthquake_path_map(&lam, 1.0)?.normalize_fix_three()?;
        let alpha = Current::pullback(h.clone());
        for _ in 0..spec.points_per_map {
            let x = BoundaryPoint::from_angle(PI * (1.0 + 0.002 + 0.996 * rng.random::<f64>()));
            let value = alpha.value(&GeodesicBox::new(one, i, minus_one, x)?);
            let hx = h.eval(x);
            let got = solve_fourth_point(one, i, minus_one, value, &lower)?;
            let err = got.distance(hx);
            rec_err = rec_err.max(err);
            rec.push(vec![k.to_string(), num(x.angle()), num(hx.angle()), num(got.angle()), num(err)]);
        }
    }
    report.verdicts.push(Verdict::at_most("h(x) reconstructed from current values", rec_err, 1e-8));

    report.tables.extend([checks, quad_table, rec]);
    Ok(report)
}

/// Boundary values of one earthquake plus a structural sweep over seeded laminations.
pub fn run_quake_eval(spec: &QuakeEvalSpec, seed: u64, base: &Path) -> Result<Report> {
    let mut report = Report::new("quake-eval");
    let lam = spec.lamination.load(base)?.scaled(spec.t)?;
    let base_pt = spec.base_angle.map(BoundaryPoint::from_angle).unwrap_or_else(default_base);
    let quake = build_earthquake(&lam, base_pt)?;
    let h = quake.boundary_map();

    let xs: Vec<f64> = if spec.points.is_empty() {
        (0..spec.grid).map(|k| TAU * k as f64 / spec.grid.max(1) as f64).collect()
    } else {
        spec.points.clone()
    };
    let mut pts = Table::new("points", &["x", "h_x"]);
    for &x in &xs {
        pts.push(vec![num(x), num(h.eval(BoundaryPoint::from_angle(x)).angle())]);
    }

    let mut boxes = Table::new("boxes", &["box_id", "a", "b", "c", "d", "liouville", "pullback"]);
    for (i, q) in spec.boxes.boxes(seed).iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(corner_cells(q));
        row.extend([num(liouville_box(q)), num(h.box_value(q))]);
        boxes.push(row);
    }

    let mut gaps = Table::new("gaps", &["gap", "start", "end", "separating_leaves", "trace"]);
    for (i, g) in quake.gaps().iter().enumerate() {
        gaps.push(vec![
            i.to_string(),
            num(g.start.angle()),
            num(g.end.angle()),
            g.separating.len().to_string(),
            num(quake.gap_map(i).trace().abs()),
        ]);
    }

    let mut failures = Vec::new();
    let mut check = |label: String, lam: &geocurrents::FiniteLamination, base_pt: BoundaryPoint| {
        let result = build_earthquake(lam, base_pt)
            .map_err(|e| e.to_string())
            .and_then(|e| e.check_comparison_maps(1e-10, 1e-9).map(|_| e))
            .and_then(|e| e.boundary_map().check_invariants(1000, 1e-10));
        if let Err(e) = result {
            failures.push(format!("{label}: {e}"));
        }
    };
    check("configured".into(), &lam, base_pt);
    let mut rng = substream(seed, "lamination");
    for k in 0..spec.random_laminations {
        let l = random_lamination(&mut rng, spec.max_leaves, 0.05, 2.0);
        check(format!("random {k}"), &l, default_base());
    }
    let mut structure = Table::new("structure", &["checked", "failures"]);
    structure.push(vec![(spec.random_laminations + 1).to_string(), failures.len().to_string()]);
    report.verdicts.push(
        Verdict::none("comparison maps, continuity and cyclic order", failures.len()).with_detail(failures.join("; ")),
    );
    report.tables.extend([pts, boxes, gaps, structure]);
    Ok(report)
}
