//! Seeded experiment drivers for `geocurrents`, with CSV/JSON reporting and the command-line front end.

pub mod cli;
pub mod config;
pub mod drivers;
pub mod report;

use config::{
    BonahonSpec, ExperimentSpec, Lemma61Spec, Lemma92Spec, Lemma94Spec, LiouvilleSpec, McgSpec, Prop93Spec, QuakeEvalSpec,
    SupnormSpec, Theorem71Spec,
};

/// Every experiment with its default settings, in a fixed order.
pub fn default_suite() -> Vec<ExperimentSpec> {
    vec![
        ExperimentSpec::Liouville(LiouvilleSpec::default()),
        ExperimentSpec::QuakeEval(QuakeEvalSpec::default()),
        ExperimentSpec::Theorem71(Theorem71Spec::default()),
        ExperimentSpec::Lemma61(Lemma61Spec::default()),
        ExperimentSpec::Prop93(Prop93Spec::default()),
        ExperimentSpec::Lemma92(Lemma92Spec::default()),
        ExperimentSpec::Lemma94(Lemma94Spec::default()),
        ExperimentSpec::Bonahon(BonahonSpec::default()),
        ExperimentSpec::Mcg(McgSpec::default()),
        ExperimentSpec::Supnorm(SupnormSpec::default()),
    ]
}
