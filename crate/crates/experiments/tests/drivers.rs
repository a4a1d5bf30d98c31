use std::path::Path;

use geocurrents::laminations::{discretize_family, FamilySpec};
use geocurrents::mobius::{cayley, cayley_to_disk, ExtendedReal};
use geocurrents::GeodesicBox;
use geocurrents_experiments::config::{
    BoxSource, Lemma61Spec, Lemma92Spec, LaminationRef, MapDescriptor, McgSpec, Theorem71Spec,
};
use geocurrents_experiments::drivers::{run_lemma61, run_lemma92, run_mcg, run_theorem71};
use geocurrents_experiments::report::Table;

fn column(t: &Table, name: &str) -> Vec<String> {
    let i = t.header.iter().position(|h| h == name).unwrap();
    t.rows.iter().map(|r| r[i].clone()).collect()
}

fn cayley_box() -> GeodesicBox {
    GeodesicBox::new(cayley(0.0), cayley(1.0), cayley_to_disk(ExtendedReal::Infinity), cayley(-1.0)).unwrap()
}

#[test]
fn single_leaf_at_t_ten() {
    let spec = Theorem71Spec {
        lamination: LaminationRef::inline(&[(cayley(0.0).angle(), 0.0, 1.0)]),
        t_grid: vec![10.0],
        boxes: BoxSource::Explicit(vec![cayley_box()]),
        generic: false,
        uniform: None,
        ..Theorem71Spec::default()
    };
    let r = run_theorem71(&spec, 0, Path::new(".")).unwrap();
    let rows = r.table("rows").unwrap();
    let scaled: f64 = column(rows, "scaled_value")[0].parse().unwrap();
    assert!((scaled - (10f64.exp() + 1.0).ln() / 10.0).abs() < 1e-12);
    assert!((scaled - 1.0).abs() < 1e-5);
    // Both leaf endpoints are corners, so the row is flagged.
    assert_eq!(column(rows, "flagged")[0], "true");
}

#[test]
fn zero_in_t_grid_is_an_error() {
    let spec = Theorem71Spec { t_grid: vec![0.0, 1.0], ..Theorem71Spec::default() };
    assert!(run_theorem71(&spec, 0, Path::new(".")).is_err());
}

#[test]
fn single_atom_family_runs() {
    let spec = Lemma61Spec { n_grid: vec![1], ..Lemma61Spec::default() };
    let r = run_lemma61(&spec, 0).unwrap();
    assert_eq!(r.table("rows").unwrap().rows.len(), 6);
}

#[test]
fn boundary_atom_is_flagged_and_excluded() {
    let family = FamilySpec::nested(0.1, 1.0);
    let leaf = discretize_family(&family, 4).unwrap().leaves()[1];
    let (p, q) = (leaf.geodesic.p.angle(), leaf.geodesic.q.angle());
    let (lo, hi) = if p < q { (p, q) } else { (q, p) };
    // The corner sits exactly on the leaf endpoint `lo`.
    let on_boundary = GeodesicBox::from_angles(lo, lo + 0.5, hi - 0.5, hi + 0.1).unwrap();
    let spec = Lemma61Spec {
        family,
        n_grid: vec![4],
        boxes: BoxSource::Explicit(vec![on_boundary]),
        generic: false,
        ..Lemma61Spec::default()
    };
    let r = run_lemma61(&spec, 0).unwrap();
    assert!(column(r.table("rows").unwrap(), "flagged").iter().all(|f| f == "true"));
    assert!(r.plots.is_empty());
    assert!(r.passed());
}

#[test]
fn zero_weight_leaves_box_unchanged() {
    let spec = Lemma92Spec { m_values: vec![0.0], points: 12, ..Lemma92Spec::default() };
    let r = run_lemma92(&spec).unwrap();
    let v = r.verdict("zero weight leaves the box value unchanged").unwrap();
    assert!(v.pass && v.measured == 0.0);
}

#[test]
fn identity_pushforward_reproduces_base_rows() {
    let mcg = McgSpec { g: MapDescriptor::Identity, generic: false, uniform: None, ..McgSpec::default() };
    let base = Theorem71Spec {
        lamination: mcg.lamination.clone(),
        t_grid: mcg.t_grid.clone(),
        boxes: mcg.boxes.clone(),
        generic: false,
        uniform: None,
        ..Theorem71Spec::default()
    };
    let a = run_mcg(&mcg, 0, Path::new(".")).unwrap();
    let b = run_theorem71(&base, 0, Path::new(".")).unwrap();
    let (ra, rb) = (a.table("rows").unwrap(), b.table("rows").unwrap());
    for name in ["t", "box_id", "scaled_value", "target"] {
        let (x, y) = (column(ra, name), column(rb, name));
        for (u, v) in x.iter().zip(&y) {
            let (u, v): (f64, f64) = (u.parse().unwrap(), v.parse().unwrap());
            assert!((u - v).abs() < 1e-12, "{name}: {u} vs {v}");
        }
    }
}
