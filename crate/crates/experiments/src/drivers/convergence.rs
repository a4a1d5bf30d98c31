use std::path::Path;

use anyhow::Result;
use geocurrents::currents::{mcg_pushforward, push_lamination, sup_norm_estimate, Current};
use geocurrents::earthquakes::{build_earthquake, default_base};
use geocurrents::laminations::{discretize_family, family_box_mass, lamination_box_mass, FiniteLamination, Leaf};
use geocurrents::liouville::{liouville_box, BoundaryMode, GeodesicBox};
use geocurrents::mobius::{BoundaryPoint, MobiusMap};
use geocurrents::CircleMap;
use rayon::prelude::*;
use serde::Serialize;

use super::{prepare_box, reseeded, PreparedBox};
use crate::config::{check_t_grid, Lemma61Spec, McgSpec, Theorem71Spec};
use crate::report::{fit_inverse_t, num, strictly_decreasing, PlotSeries, Report, Table, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub t: f64,
    pub gamma_index: usize,
    pub box_id: usize,
    /// `(1/t)·α_t(Q)`.
    pub scaled_value: f64,
    pub target: f64,
    pub abs_error: f64,
    pub flagged: bool,
}

const ROW_HEADER: [&str; 7] = ["t", "gamma_index", "box_id", "scaled_value", "target", "abs_error", "flagged"];

fn row_cells(r: &ConvergenceRow) -> Vec<String> {
    vec![
        num(r.t),
        r.gamma_index.to_string(),
        r.box_id.to_string(),
        num(r.scaled_value),
        num(r.target),
        num(r.abs_error),
        r.flagged.to_string(),
    ]
}

fn quake_map(lam: &FiniteLamination, t: f64, base: BoundaryPoint) -> Result<CircleMap> {
    Ok(build_earthquake(&lam.scaled(t)?, base)?.boundary_map())
}

/// Largest unflagged error at each `t`, in grid order.
fn max_errors(rows: &[ConvergenceRow], t_grid: &[f64]) -> Vec<f64> {
    t_grid
        .iter()
        .map(|&t| rows.iter().filter(|r| r.t == t && !r.flagged).map(|r| r.abs_error).fold(0.0, f64::max))
        .collect()
}

/// `X = e^{L(Q)} − 1` when the single leaf joins the corners `a` and `c`.
fn closed_form_config(lam: &FiniteLamination, q: &GeodesicBox) -> Option<(f64, f64)> {
    let [leaf] = lam.leaves() else { return None };
    let g = leaf.geodesic;
    let (a, c) = (q.first.start, q.second.start);
    (g.has_endpoint(a) && g.has_endpoint(c)).then(|| (leaf.weight, liouville_box(q).exp_m1()))
}

fn convergence_verdicts(
    report: &mut Report,
    label: &str,
    rows: &[ConvergenceRow],
    t_grid: &[f64],
    threshold: f64,
) -> Vec<f64> {
    let errs = max_errors(rows, t_grid);
    if rows.iter().all(|r| r.flagged) {
        report.warnings.push(format!("{label}: every box is flagged; no convergence verdict"));
        return errs;
    }
    report.verdicts.push(
        Verdict::at_most(&format!("{label} max error strictly decreasing in t"), (!strictly_decreasing(&errs)) as u8 as f64, 0.0)
            .with_detail(errs.iter().map(|e| num(*e)).collect::<Vec<_>>().join(" ")),
    );
    let last = *errs.last().expect("nonempty t grid");
    report.verdicts.push(Verdict::at_most(&format!("{label} final max error"), last, threshold));
    let fit: Vec<(f64, f64)> = t_grid.iter().copied().zip(errs.iter().copied()).collect();
    report.plots.push(PlotSeries { name: label.to_string(), points: fit.clone() });
    report.tables.push({
        let mut t = Table::new(&format!("{}_fit", label.replace(' ', "_")), &["c", "max_residual"]);
        let c = fit_inverse_t(&fit);
        let resid = fit.iter().map(|&(t, e)| (e - c / t).abs()).fold(0.0, f64::max);
        t.push(vec![num(c), num(resid)]);
        t
    });
    errs
}

/// `(1/t)·L(E^{tβ}(Q))` against `β(Q)` over the t grid; optionally also over isometric images of the boxes.
pub fn run_theorem71(spec: &Theorem71Spec, seed: u64, base: &Path) -> Result<Report> {
    check_t_grid(&spec.t_grid)?;
    let mut report = Report::new("theorem71");
    let beta = spec.lamination.load(base)?;
    let base_pt = spec.base_angle.map(BoundaryPoint::from_angle).unwrap_or_else(default_base);
    let target = Current::lamination(beta.clone());

    let gammas: Vec<MobiusMap> = match &spec.uniform {
        Some(s) => reseeded(s, seed).isometries(),
        None => vec![MobiusMap::identity()],
    };
    let raw = spec.boxes.boxes(seed);
    let mut warnings = Vec::new();
    // (gamma index, box id, prepared box); gamma 0 is the identity when the sampler includes it.
    let mut cells: Vec<(usize, usize, PreparedBox)> = Vec::new();
    for (gi, g) in gammas.iter().enumerate() {
        for (bi, q) in raw.iter().enumerate() {
            let label = format!("gamma {gi} box {bi}");
            cells.push((gi, bi, prepare_box(&q.image(g), &beta, spec.generic, spec.max_shift, &mut warnings, &label)));
        }
    }
    report.warnings.extend(warnings);
    let base_gamma = spec.uniform.is_none_or(|s| s.include_identity);

    let maps = spec.t_grid.iter().map(|&t| quake_map(&beta, t, base_pt)).collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..maps.len()).flat_map(|ti| (0..cells.len()).map(move |ci| (ti, ci))).collect();
    let rows: Vec<ConvergenceRow> = jobs
        .par_iter()
        .map(|&(ti, ci)| {
            let (gi, bi, p) = &cells[ci];
            let t = spec.t_grid[ti];
            let scaled = maps[ti].box_value(&p.quad) / t;
            let tv = target.value(&p.quad);
            ConvergenceRow {
                t,
                gamma_index: *gi,
                box_id: *bi,
                scaled_value: scaled,
                target: tv,
                abs_error: (scaled - tv).abs(),
                flagged: p.flagged,
            }
        })
        .collect();

    let mut table = Table::new("rows", &ROW_HEADER);
    rows.iter().for_each(|r| table.push(row_cells(r)));
    report.tables.push(table);

    let sup = sup_norm_estimate(&target, &reseeded(&spec.sup_sampler, seed));
    let threshold = spec.rel_tol * sup;
    let base_rows: Vec<ConvergenceRow> =
        rows.iter().filter(|r| base_gamma && r.gamma_index == 0).copied().collect();
    if !base_rows.is_empty() {
        convergence_verdicts(&mut report, "boxes", &base_rows, &spec.t_grid, threshold);
    }
    if spec.uniform.is_some() {
        convergence_verdicts(&mut report, "uniform", &rows, &spec.t_grid, threshold);
    }

    // Rows in the single-leaf corner configuration have an exact value.
    let mut cf = Table::new("closed_form", &["t", "gamma_index", "box_id", "scaled_value", "closed_form", "abs_diff"]);
    let mut worst = 0.0f64;
    for (r, &(_, ci)) in rows.iter().zip(&jobs) {
        if let Some((m, x)) = closed_form_config(&beta, &cells[ci].2.quad) {
            let exact = ((r.t * m).exp() * x).ln_1p() / r.t;
            let diff = (r.scaled_value - exact).abs();
            worst = worst.max(diff);
            cf.push(vec![num(r.t), r.gamma_index.to_string(), r.box_id.to_string(), num(r.scaled_value), num(exact), num(diff)]);
        }
    }
    if !cf.rows.is_empty() {
        report.verdicts.push(Verdict::at_most("single-leaf rows match the closed form", worst, spec.closed_form_tol));
        report.tables.push(cf);
    }
    let mut summary = Table::new("summary", &["sup_norm_estimate", "threshold", "boxes", "isometries"]);
    summary.push(vec![num(sup), num(threshold), raw.len().to_string(), gammas.len().to_string()]);
    report.tables.push(summary);
    Ok(report)
}

/// Every leaf of every lamination once, for choosing boxes generic for all of them.
fn union_lamination(lams: &[FiniteLamination]) -> Option<FiniteLamination> {
    let mut leaves: Vec<Leaf> = Vec::new();
    for l in lams.iter().flat_map(|l| l.leaves()) {
        if !leaves.iter().any(|k| k.geodesic.canonical() == l.geodesic.canonical()) {
            leaves.push(*l);
        }
    }
    FiniteLamination::new(leaves).ok()
}

/// `(1/t_n)·L(E^{t_n β_n}(Q))` for discretizations `β_n` of a family, against the family's mass.
pub fn run_lemma61(spec: &Lemma61Spec, seed: u64) -> Result<Report> {
    let mut report = Report::new("lemma61");
    let betas = spec.n_grid.iter().map(|&n| discretize_family(&spec.family, n)).collect::<Result<Vec<_>, _>>()?;
    let raw = spec.boxes.boxes(seed);
    let mut warnings = Vec::new();
    let prepared: Vec<PreparedBox> = match union_lamination(&betas) {
        Some(all) => raw
            .iter()
            .enumerate()
            .map(|(i, q)| prepare_box(q, &all, spec.generic, spec.max_shift, &mut warnings, &format!("box {i}")))
            .collect(),
        None => {
            warnings.push("discretizations share leaves; boxes checked against each one separately".into());
            raw.iter()
                .enumerate()
                .map(|(i, q)| {
                    let mut p = PreparedBox { quad: *q, flagged: false };
                    for b in &betas {
                        let next = prepare_box(&p.quad, b, spec.generic, spec.max_shift, &mut warnings, &format!("box {i}"));
                        p = PreparedBox { quad: next.quad, flagged: p.flagged || next.flagged };
                    }
                    p
                })
                .collect()
        }
    };
    report.warnings.extend(warnings);

    let maps = spec
        .n_grid
        .iter()
        .zip(&betas)
        .map(|(&n, b)| quake_map(b, spec.t_scale * n as f64, default_base()))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..maps.len()).flat_map(|k| (0..prepared.len()).map(move |b| (k, b))).collect();
    let values: Vec<f64> = jobs.par_iter().map(|&(k, b)| maps[k].box_value(&prepared[b].quad)).collect();

    let mut table = Table::new("rows", &["n", "t_n", "box_id", "scaled_value", "target", "abs_error", "discrete_mass", "flagged"]);
    let mut errors = vec![Vec::new(); prepared.len()];
    for (&(k, b), v) in jobs.iter().zip(&values) {
        let n = spec.n_grid[k];
        let t = spec.t_scale * n as f64;
        let q = &prepared[b].quad;
        let target = family_box_mass(&spec.family, q);
        let scaled = v / t;
        let err = (scaled - target).abs();
        errors[b].push(err);
        table.push(vec![
            n.to_string(),
            num(t),
            b.to_string(),
            num(scaled),
            num(target),
            num(err),
            num(lamination_box_mass(&betas[k], q, BoundaryMode::Include)),
            prepared[b].flagged.to_string(),
        ]);
    }
    report.tables.push(table);

    let mut not_decreasing = Vec::new();
    let mut worst_ratio = 0.0f64;
    for (b, errs) in errors.iter().enumerate() {
        if prepared[b].flagged {
            continue;
        }
        if !strictly_decreasing(errs) {
            not_decreasing.push(b.to_string());
        }
        let target = family_box_mass(&spec.family, &prepared[b].quad);
        if target >= spec.min_target {
            worst_ratio = worst_ratio.max(errs.last().copied().unwrap_or(0.0) / target);
        }
        report.plots.push(PlotSeries {
            name: format!("box {b}"),
            points: spec.n_grid.iter().map(|&n| n as f64).zip(errs.iter().copied()).collect(),
        });
    }
    report.verdicts.push(
        Verdict::none("per-box error strictly decreasing in n", not_decreasing.len())
            .with_detail(if not_decreasing.is_empty() { String::new() } else { format!("boxes {}", not_decreasing.join(",")) }),
    );
    report.verdicts.push(Verdict::at_most("final relative error for boxes with target >= min_target", worst_ratio, spec.rel_tol));
    Ok(report)
}

/// `(1/t)·(α_t ∘ g⁻¹)` against the pushed lamination `g(β)`.
pub fn run_mcg(spec: &McgSpec, seed: u64, base: &Path) -> Result<Report> {
    check_t_grid(&spec.t_grid)?;
    let mut report = Report::new("mcg");
    let beta = spec.lamination.load(base)?;
    let g = spec.g.build(base)?;
    let ginv = g.inverse()?;
    let pushed_beta = push_lamination(&g, &beta)?;
    let target = Current::lamination(pushed_beta.clone());

    let gammas: Vec<MobiusMap> = match &spec.uniform {
        Some(s) => reseeded(s, seed).isometries(),
        None => vec![MobiusMap::identity()],
    };
    let raw = spec.boxes.boxes(seed);
    let mut warnings = Vec::new();
    let mut cells: Vec<(usize, usize, PreparedBox)> = Vec::new();
    for (gi, gm) in gammas.iter().enumerate() {
        for (bi, q) in raw.iter().enumerate() {
            let label = format!("gamma {gi} box {bi}");
            cells.push((gi, bi, prepare_box(&q.image(gm), &pushed_beta, spec.generic, spec.max_shift, &mut warnings, &label)));
        }
    }
    report.warnings.extend(warnings);

    let mut pushed = Vec::new();
    let mut direct = Vec::new();
    for &t in &spec.t_grid {
        let h = quake_map(&beta, t, default_base())?;
        pushed.push(mcg_pushforward(&g, &Current::pullback(h.clone()))?);
        // Unnormalized h ∘ g⁻¹; normalizing by a Möbius map must not change any box value.
        direct.push(h.compose(&ginv)?);
    }
    let jobs: Vec<(usize, usize)> = (0..spec.t_grid.len()).flat_map(|ti| (0..cells.len()).map(move |ci| (ti, ci))).collect();
    let evaluated: Vec<(ConvergenceRow, f64)> = jobs
        .par_iter()
        .map(|&(ti, ci)| {
            let (gi, bi, p) = &cells[ci];
            let t = spec.t_grid[ti];
            let scaled = pushed[ti].value(&p.quad) / t;
            let composite = direct[ti].box_value(&p.quad) / t;
            let tv = target.value(&p.quad);
            let row = ConvergenceRow {
                t,
                gamma_index: *gi,
                box_id: *bi,
                scaled_value: scaled,
                target: tv,
                abs_error: (scaled - tv).abs(),
                flagged: p.flagged,
            };
            (row, (scaled - composite).abs())
        })
        .collect();

    let mut table = Table::new("rows", &[&ROW_HEADER[..], &["composite_diff"]].concat());
    for (r, diff) in &evaluated {
        let mut cells = row_cells(r);
        cells.push(num(*diff));
        table.push(cells);
    }
    report.tables.push(table);
    let rows: Vec<ConvergenceRow> = evaluated.iter().map(|e| e.0).collect();
    let consistency = evaluated.iter().map(|e| e.1).fold(0.0, |m: f64, d| if d.is_nan() { f64::INFINITY } else { m.max(d) });
    let consistency_tol = if spec.g.is_mobius() { spec.consistency_tol.min(1e-10) } else { spec.consistency_tol };
    report.verdicts.push(Verdict::at_most("pushforward agrees with the composite map", consistency, consistency_tol));

    let sup = sup_norm_estimate(&target, &reseeded(&spec.sup_sampler, seed));
    convergence_verdicts(&mut report, "pushforward", &rows, &spec.t_grid, spec.rel_tol * sup);
    let mut summary = Table::new("summary", &["sup_norm_estimate", "threshold", "pieces_of_g"]);
    summary.push(vec![num(sup), num(spec.rel_tol * sup), g.pieces().len().to_string()]);
    report.tables.push(summary);
    Ok(report)
}
