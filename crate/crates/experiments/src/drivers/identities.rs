use std::f64::consts::LN_2;
use std::path::Path;

use anyhow::Result;
use geocurrents::currents::{bonahon_residual, sup_norm_estimate, Current};
use geocurrents::earthquakes::{build_earthquake, default_base, earthquake_path_map};
use geocurrents::laminations::{FiniteLamination, Leaf};
use geocurrents::liouville::{complementary_box, q_star, GeodesicBox};
use geocurrents::mobius::{cayley, cayley_to_disk, ExtendedReal, Geodesic};
use geocurrents::random::{random_box, random_isometry, random_lamination, substream};
use rayon::prelude::*;

use super::reseeded;
use crate::config::{BonahonSpec, SupnormSpec};
use crate::report::{num, strictly_decreasing, Report, Table, Verdict};

/// Largest residual of `e^{−α(Q)} + e^{−α(Q')} = 1` over seeded boxes.
fn max_residual(alpha: &Current, boxes: &[GeodesicBox]) -> f64 {
    boxes.par_iter().map(|q| bonahon_residual(alpha, q)).collect::<Vec<_>>().into_iter().fold(0.0, f64::max)
}

/// The cocycle identity for Liouville and earthquake pullbacks, its failure for laminations, and sup norms.
pub fn run_bonahon_and_supnorm(spec: &BonahonSpec, seed: u64) -> Result<Report> {
    let mut report = Report::new("bonahon");
    let mut rng = substream(seed, "bonahon-boxes");
    let boxes: Vec<GeodesicBox> =
        (0..spec.pairs).map(|_| random_box(&mut rng, 1e-3).image(&random_isometry(&mut rng, 1.0))).collect();

    let mut residuals = Table::new("residuals", &["current", "leaves", "max_residual"]);
    let lio = max_residual(&Current::Liouville, &boxes);
    residuals.push(vec!["liouville".into(), "0".into(), num(lio)]);
    let mut worst = lio;
    let mut rng = substream(seed, "bonahon-laminations");
    for k in 0..spec.earthquakes {
        let lam = random_lamination(&mut rng, spec.max_leaves, 0.05, spec.max_weight);
        let r = max_residual(&Current::pullback(earthquake_path_map(&lam, 1.0)?), &boxes);
        worst = worst.max(r);
        residuals.push(vec![format!("earthquake {k}"), lam.len().to_string(), num(r)]);
    }
    report.verdicts.push(Verdict::at_most("cocycle identity for Liouville and earthquake pullbacks", worst, spec.tol));

    // A leaf across Q* that misses the complementary box.
    let q = q_star();
    let atom = FiniteLamination::new(vec![Leaf {
        geodesic: Geodesic::new(q.first.at(0.5), q.second.at(0.5))?.canonical(),
        weight: spec.atom_weight,
    }])?;
    let atom_residual = bonahon_residual(&Current::lamination(atom), &q);
    residuals.push(vec!["atom".into(), "1".into(), num(atom_residual)]);
    report.verdicts.push(Verdict::at_least("a weighted leaf violates the identity", atom_residual, spec.counterexample_min));

    let sampler = reseeded(&spec.sup_sampler, seed);
    let s1 = sup_norm_estimate(&Current::Liouville, &sampler);
    let s2 = sup_norm_estimate(&Current::scaled(2.0, Current::Liouville)?, &sampler);
    let mut sup = Table::new("sup_norm", &["current", "estimate", "expected"]);
    sup.push(vec!["liouville".into(), num(s1), num(LN_2)]);
    sup.push(vec!["2 liouville".into(), num(s2), num(2.0 * LN_2)]);
    report.verdicts.push(Verdict::at_most("Liouville sup norm is log 2", (s1 - LN_2).abs(), 1e-12));
    report.verdicts.push(Verdict::at_most("sup norm is homogeneous", (s2 - 2.0 * LN_2).abs(), 1e-12));

    // Single leaf joining a and c of the box (0, 1, ∞, −1): the complementary value decays like e^{−t}.
    let (a, c) = (cayley(0.0), cayley_to_disk(ExtendedReal::Infinity));
    let qb = GeodesicBox::new(a, cayley(1.0), c, cayley(-1.0))?;
    let qc = complementary_box(&qb);
    let mut dich = Table::new("dichotomy", &["t", "value", "ratio", "complementary", "closed_form"]);
    let (mut comps, mut gaps) = (Vec::new(), Vec::new());
    let mut cf = 0.0f64;
    for &t in &spec.dichotomy_t {
        let lam = FiniteLamination::new(vec![Leaf { geodesic: Geodesic::new(a, c)?.canonical(), weight: t }])?;
        let h = build_earthquake(&lam, default_base())?.boundary_map();
        let (v, w) = (h.box_value(&qb), h.box_value(&qc));
        let exact = (-t).exp().ln_1p();
        cf = cf.max((w - exact).abs());
        comps.push(w);
        gaps.push((v / t - 1.0).abs());
        dich.push(vec![num(t), num(v), num(v / t), num(w), num(exact)]);
    }
    report.verdicts.push(Verdict::none("complementary value strictly decreasing", (!strictly_decreasing(&comps)) as usize));
    report.verdicts.push(Verdict::at_most("complementary value is log(1 + e^-t)", cf, 1e-10));
    report.verdicts.push(
        Verdict::none("value/t approaches the leaf weight", (!strictly_decreasing(&gaps)) as usize)
            .with_detail(gaps.iter().map(|g| num(*g)).collect::<Vec<_>>().join(" ")),
    );
    report.tables.extend([residuals, sup, dich]);
    Ok(report)
}

/// `α(γQ*)` for every sampled `γ`, and the maximum.
pub fn run_supnorm(spec: &SupnormSpec, seed: u64, base: &Path) -> Result<Report> {
    let mut report = Report::new("supnorm");
    let alpha = spec.current.build(base)?;
    let sampler = reseeded(&spec.sampler, seed);
    let values: Vec<f64> = sampler.isometries().par_iter().map(|g| alpha.value_on_image(g, &q_star())).collect();
    let mut rows = Table::new("rows", &["gamma_index", "value"]);
    for (i, v) in values.iter().enumerate() {
        rows.push(vec![i.to_string(), num(*v)]);
    }
    let est = sup_norm_estimate(&alpha, &sampler);
    let again = sup_norm_estimate(&alpha, &sampler);
    let mut summary = Table::new("summary", &["isometries", "estimate"]);
    summary.push(vec![values.len().to_string(), num(est)]);
    let bad = (!est.is_finite()) as usize + (est.to_bits() != again.to_bits()) as usize;
    report.verdicts.push(Verdict::none("estimate is finite and reproducible", bad).with_detail(num(est)));
    report.tables.extend([rows, summary]);
    Ok(report)
}
