use anyhow::Result;
use geocurrents::currents::Current;
use geocurrents::earthquakes::{build_earthquake, earthquake_path_map};
use geocurrents::laminations::{FiniteLamination, Leaf};
use geocurrents::liouville::{liouville_box, GeodesicBox};
use geocurrents::mobius::{cayley, cayley_to_disk, geodesic_distance, hyperbolic_translation, BoundaryPoint, Endpoint, ExtendedReal, Geodesic};
use geocurrents::random::{random_box, random_nested_in_box, substream};
use rand::Rng;
use rayon::prelude::*;

use crate::config::{Lemma92Spec, Lemma94Spec, Prop93Spec};
use crate::report::{num, PlotSeries, Report, Table, Verdict};

fn pullback_value(lam: &FiniteLamination, q: &GeodesicBox) -> Result<f64> {
    Ok(Current::pullback(earthquake_path_map(lam, 1.0)?).value(q))
}

/// Translation along `rep → att` by `m`.
fn translation(rep: BoundaryPoint, att: BoundaryPoint, m: f64) -> Result<geocurrents::MobiusMap> {
    Ok(hyperbolic_translation(Geodesic::new(rep, att)?, m, Endpoint::Q)?)
}

struct Prop93Instance {
    beta_leaves: usize,
    beta_mass: f64,
    lhs1: f64,
    rhs1: f64,
    gamma_leaves: usize,
    gamma_mass: f64,
    lhs2: f64,
    rhs2: f64,
}

/// `[a₁,b₁] ⊆ [a,b]` and `[c₁,d₁] ⊆ [c,d]` at random fractions of each arc.
fn nested_box<R: Rng>(rng: &mut R, q: &GeodesicBox) -> Result<GeodesicBox> {
    let mut pick = |arc: &geocurrents::liouville::Arc| {
        let mut u = [0.02 + 0.96 * rng.random::<f64>(), 0.02 + 0.96 * rng.random::<f64>()];
        u.sort_by(f64::total_cmp);
        if u[1] - u[0] < 0.05 {
            u[1] = (u[0] + 0.05).min(0.99);
        }
        (arc.at(u[0]), arc.at(u[1]))
    };
    let (a1, b1) = pick(&q.first);
    let (c1, d1) = pick(&q.second);
    Ok(GeodesicBox::new(a1, b1, c1, d1)?)
}

/// Both sides of the two comparison inequalities for measures `beta` on the inner box and `gamma` on the outer one.
fn prop93_sides(q: &GeodesicBox, inner: &GeodesicBox, beta: &FiniteLamination, gamma: &FiniteLamination) -> Result<Prop93Instance> {
    let [a, b, c, d] = q.corners();
    let [a1, b1, c1, d1] = inner.corners();
    let m = beta.total_mass();
    let t2 = translation(b1, d1, m)?;
    let lhs1 = liouville_box(&GeodesicBox::new(a, t2.apply(b), t2.apply(c), d)?);
    let rhs1 = pullback_value(beta, q)?;
    let mg = gamma.total_mass();
    let t1 = translation(a1, c1, mg)?;
    let lhs2 = pullback_value(gamma, inner)?;
    let rhs2 = liouville_box(&GeodesicBox::new(a1, t1.apply(b1), c1, d1)?);
    Ok(Prop93Instance {
        beta_leaves: beta.len(),
        beta_mass: m,
        lhs1,
        rhs1,
        gamma_leaves: gamma.len(),
        gamma_mass: mg,
        lhs2,
        rhs2,
    })
}

pub fn run_prop93(spec: &Prop93Spec, seed: u64) -> Result<Report> {
    let mut report = Report::new("prop93");
    let instances: Vec<Prop93Instance> = (0..spec.instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, &format!("prop93/{i}"));
            let q = random_box(&mut rng, 0.2);
            let inner = nested_box(&mut rng, &q)?;
            let kb = rng.random_range(1..=spec.max_leaves);
            let kg = rng.random_range(1..=spec.max_leaves);
            let beta = random_nested_in_box(&mut rng, &inner, kb, spec.min_weight, spec.max_weight);
            let gamma = random_nested_in_box(&mut rng, &q, kg, spec.min_weight, spec.max_weight);
            prop93_sides(&q, &inner, &beta, &gamma)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new(
        "instances",
        &["instance", "beta_leaves", "beta_mass", "lhs1", "rhs1", "gamma_leaves", "gamma_mass", "lhs2", "rhs2"],
    );
    let (mut v1, mut v2) = (0, 0);
    let (mut s1, mut s2) = (f64::INFINITY, f64::INFINITY);
    for (i, r) in instances.iter().enumerate() {
        v1 += (r.lhs1 > r.rhs1 + spec.slack) as usize;
        v2 += (r.lhs2 > r.rhs2 + spec.slack) as usize;
        s1 = s1.min(r.rhs1 - r.lhs1);
        s2 = s2.min(r.rhs2 - r.lhs2);
        table.push(vec![
            i.to_string(),
            r.beta_leaves.to_string(),
            num(r.beta_mass),
            num(r.lhs1),
            num(r.rhs1),
            r.gamma_leaves.to_string(),
            num(r.gamma_mass),
            num(r.lhs2),
            num(r.rhs2),
        ]);
    }
    report.verdicts.push(Verdict::none("first inequality (measure on the inner box)", v1).with_detail(format!("min slack {}", num(s1))));
    report.verdicts.push(Verdict::none("second inequality (measure on the outer box)", v2).with_detail(format!("min slack {}", num(s2))));

    // A single leaf along the translation axis makes each side exact.
    let mut tight = Table::new("tightness", &["case", "weight", "lhs1", "rhs1", "lhs2", "rhs2"]);
    let mut gap = 0.0f64;
    for i in 0..spec.tightness_cases {
        let mut rng = substream(seed, &format!("prop93-tight/{i}"));
        let q = random_box(&mut rng, 0.2);
        let inner = nested_box(&mut rng, &q)?;
        let m = spec.min_weight + (spec.max_weight - spec.min_weight) * rng.random::<f64>();
        let [a1, b1, c1, d1] = inner.corners();
        let beta = FiniteLamination::new(vec![Leaf { geodesic: Geodesic::new(b1, d1)?.canonical(), weight: m }])?;
        let gamma = FiniteLamination::new(vec![Leaf { geodesic: Geodesic::new(a1, c1)?.canonical(), weight: m }])?;
        let r = prop93_sides(&q, &inner, &beta, &gamma)?;
        gap = gap.max((r.lhs1 - r.rhs1).abs()).max((r.lhs2 - r.rhs2).abs());
        tight.push(vec![i.to_string(), num(m), num(r.lhs1), num(r.rhs1), num(r.lhs2), num(r.rhs2)]);
    }
    report.verdicts.push(Verdict::at_most("corner leaves give equality", gap, spec.slack));
    report.tables.extend([table, tight]);
    Ok(report)
}

/// Points strictly inside the arc from `from` to `to`.
fn open_grid(from: BoundaryPoint, to: BoundaryPoint, n: usize) -> Vec<BoundaryPoint> {
    let len = from.ccw_to(to);
    (0..n).map(|k| from.rotated(len * (k as f64 + 0.5) / n as f64)).collect()
}

/// `L(E(Q))` for the single-leaf earthquake along `(x, y)` with weight `m`.
fn single_leaf_value(x: BoundaryPoint, y: BoundaryPoint, m: f64, q: &GeodesicBox) -> Result<f64> {
    if m == 0.0 {
        return Ok(liouville_box(q));
    }
    let lam = FiniteLamination::new(vec![Leaf { geodesic: Geodesic::new(x, y)?.canonical(), weight: m }])?;
    // Any base off the leaf gives the same box value.
    Ok(build_earthquake(&lam, x.ccw_midpoint(y))?.boundary_map().box_value(q))
}

pub fn run_lemma92(spec: &Lemma92Spec) -> Result<Report> {
    let mut report = Report::new("lemma92");
    let q = spec.quad;
    let [a, b, c, d] = q.corners();
    // (label, moving endpoint is x, arc of the moving endpoint, fixed positions of the other, claimed sign)
    let cases = [
        ("x in [d,a]", true, (d, a), [b.ccw_midpoint(c), c.ccw_midpoint(d)], 1.0),
        ("x in [a,b]", true, (a, b), [b.ccw_midpoint(c), c.ccw_midpoint(d)], -1.0),
        ("y in [b,c]", false, (b, c), [d.ccw_midpoint(a), a.ccw_midpoint(b)], 1.0),
        ("y in [c,d]", false, (c, d), [d.ccw_midpoint(a), a.ccw_midpoint(b)], -1.0),
    ];
    let mut table = Table::new("grid", &["case", "fixed", "m", "k", "x", "y", "f"]);
    let mut summary = Table::new("summary", &["case", "fixed", "m", "wrong_sign_steps", "nonstrict_steps", "min_signed_step"]);
    let (mut wrong, mut nonstrict) = (0usize, 0usize);
    let mut flat = 0.0f64;
    for &m in &spec.m_values {
        for (label, moving_x, (from, to), fixed, sign) in cases {
            for (fi, other) in fixed.iter().enumerate() {
                let grid = open_grid(from, to, spec.points);
                let pairs: Vec<(BoundaryPoint, BoundaryPoint)> =
                    grid.iter().map(|&p| if moving_x { (p, *other) } else { (*other, p) }).collect();
                let f = pairs.par_iter().map(|&(x, y)| single_leaf_value(x, y, m, &q)).collect::<Result<Vec<_>>>()?;
                for (k, ((x, y), v)) in pairs.iter().zip(&f).enumerate() {
                    table.push(vec![label.into(), fi.to_string(), num(m), k.to_string(), num(x.angle()), num(y.angle()), num(*v)]);
                }
                let steps: Vec<f64> = f.windows(2).map(|w| sign * (w[1] - w[0])).collect();
                if m == 0.0 {
                    flat = flat.max(f.iter().map(|v| (v - liouville_box(&q)).abs()).fold(0.0, f64::max));
                } else {
                    let w = steps.iter().filter(|s| **s < -spec.slack).count();
                    let ns = steps.iter().filter(|s| **s <= 0.0).count();
                    wrong += w;
                    nonstrict += ns;
                    let min_step = steps.iter().copied().fold(f64::INFINITY, f64::min);
                    summary.push(vec![label.into(), fi.to_string(), num(m), w.to_string(), ns.to_string(), num(min_step)]);
                }
                report.plots.push(PlotSeries {
                    name: format!("{label} fixed {fi} m={}", num(m)),
                    points: grid.iter().map(|p| p.angle()).zip(f.iter().copied()).collect(),
                });
            }
        }
    }
    report.verdicts.push(Verdict::none("monotone in the claimed direction", wrong));
    report.verdicts.push(Verdict::none("strictly monotone", nonstrict));
    if spec.m_values.contains(&0.0) {
        report.verdicts.push(Verdict::at_most("zero weight leaves the box value unchanged", flat, spec.slack));
    }
    report.tables.extend([table, summary]);
    Ok(report)
}

pub fn run_lemma94(spec: &Lemma94Spec, seed: u64) -> Result<Report> {
    let mut report = Report::new("lemma94");
    let (a, c, d) = (cayley(0.0), cayley_to_disk(ExtendedReal::Infinity), cayley(-1.0));
    let q = GeodesicBox::new(a, cayley(spec.b), c, d)?;
    let mut exact = Table::new("exact", &["m", "b", "value", "closed_form", "abs_diff"]);
    let mut worst = 0.0f64;
    for &m in &spec.m_values {
        let lam = FiniteLamination::new(vec![Leaf { geodesic: Geodesic::new(a, c)?.canonical(), weight: m }])?;
        let v = pullback_value(&lam, &q)?;
        let closed = (m.exp() * spec.b).ln_1p();
        worst = worst.max((v - closed).abs());
        exact.push(vec![num(m), num(spec.b), num(v), num(closed), num((v - closed).abs())]);
    }
    report.verdicts.push(Verdict::at_most("value equals log(e^m b + 1)", worst, spec.exact_tol));

    let rows: Vec<(f64, f64, f64, f64, f64)> = (0..spec.instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, &format!("lemma94/{i}"));
            let q = random_box(&mut rng, 0.02);
            let m = 0.01 + (spec.max_weight - 0.01) * rng.random::<f64>();
            let [a, b, c, d] = q.corners();
            let lam = FiniteLamination::new(vec![Leaf { geodesic: Geodesic::new(a, c)?.canonical(), weight: m }])?;
            let v = pullback_value(&lam, &q)?;
            let dist = geodesic_distance(Geodesic::new(a, d)?, Geodesic::new(b, c)?)?;
            let lower = m + (dist * dist / 4.0).ln();
            let upper = m + liouville_box(&q);
            let closed = (m.exp() * liouville_box(&q).exp_m1()).ln_1p();
            Ok((m, v, lower, upper, closed))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new("bounds", &["instance", "m", "value", "lower", "upper", "closed_form"]);
    let (mut viol, mut slack_lo, mut slack_hi, mut cf) = (0usize, f64::INFINITY, f64::INFINITY, 0.0f64);
    for (i, &(m, v, lo, hi, closed)) in rows.iter().enumerate() {
        viol += (lo > v + spec.slack) as usize + (v > hi + spec.slack) as usize;
        slack_lo = slack_lo.min(v - lo);
        slack_hi = slack_hi.min(hi - v);
        cf = cf.max((v - closed).abs() / v.max(1.0));
        table.push(vec![i.to_string(), num(m), num(v), num(lo), num(hi), num(closed)]);
    }
    report.verdicts.push(
        Verdict::none("m + log(D^2/4) <= value <= m + L(Q)", viol)
            .with_detail(format!("min lower slack {}, min upper slack {}", num(slack_lo), num(slack_hi))),
    );
    report.verdicts.push(Verdict::at_most("random instances match the closed form (relative)", cf, 1e-9));
    report.tables.extend([exact, table]);
    Ok(report)
}
