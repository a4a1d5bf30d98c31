//! Experiment drivers. Each returns a [`Report`] whose tables and verdicts depend only on the experiment config and seed.

mod basic;
mod convergence;
mod identities;
mod inequalities;

use std::path::Path;

use anyhow::Result;
use geocurrents::currents::IsometrySampler;
use geocurrents::laminations::{generic_box, lamination_box_mass, FiniteLamination};
use geocurrents::liouville::{BoundaryMode, GeodesicBox};

use crate::config::ExperimentSpec;
use crate::report::{num, Report};

pub use basic::{run_liouville, run_quake_eval};
pub use convergence::{run_lemma61, run_mcg, run_theorem71, ConvergenceRow};
pub use identities::{run_bonahon_and_supnorm, run_supnorm};
pub use inequalities::{run_lemma92, run_lemma94, run_prop93};

/// Runs any experiment; relative lamination paths resolve against `base`.
pub fn run(spec: &ExperimentSpec, seed: u64, base: &Path) -> Result<Report> {
    match spec {
        ExperimentSpec::Liouville(s) => run_liouville(s, seed),
        ExperimentSpec::QuakeEval(s) => run_quake_eval(s, seed, base),
        ExperimentSpec::Theorem71(s) => run_theorem71(s, seed, base),
        ExperimentSpec::Lemma61(s) => run_lemma61(s, seed),
        ExperimentSpec::Prop93(s) => run_prop93(s, seed),
        ExperimentSpec::Lemma92(s) => run_lemma92(s),
        ExperimentSpec::Lemma94(s) => run_lemma94(s, seed),
        ExperimentSpec::Bonahon(s) => run_bonahon_and_supnorm(s, seed),
        ExperimentSpec::Mcg(s) => run_mcg(s, seed, base),
        ExperimentSpec::Supnorm(s) => run_supnorm(s, seed, base),
    }
}

/// The sampler's own seed mixed with the run seed.
pub(crate) fn reseeded(s: &IsometrySampler, seed: u64) -> IsometrySampler {
    IsometrySampler { seed: s.seed ^ seed, ..*s }
}

/// Box after preprocessing and whether any leaf endpoint may still sit on its boundary.
pub(crate) struct PreparedBox {
    pub quad: GeodesicBox,
    pub flagged: bool,
}

pub(crate) fn prepare_box(
    q: &GeodesicBox,
    lam: &FiniteLamination,
    generic: bool,
    max_shift: f64,
    warnings: &mut Vec<String>,
    label: &str,
) -> PreparedBox {
    if generic {
        match generic_box(q, lam, max_shift) {
            Ok(g) => PreparedBox { quad: g, flagged: false },
            Err(e) => {
                warnings.push(format!("{label}: kept unperturbed ({e})"));
                PreparedBox { quad: *q, flagged: true }
            }
        }
    } else {
        let on_boundary =
            lamination_box_mass(lam, q, BoundaryMode::Include) != lamination_box_mass(lam, q, BoundaryMode::Exclude);
        PreparedBox { quad: *q, flagged: on_boundary }
    }
}

pub(crate) fn corner_cells(q: &GeodesicBox) -> Vec<String> {
    q.angles().iter().map(|&a| num(a)).collect()
}
