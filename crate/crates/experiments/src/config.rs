//! Experiment descriptions read from JSON.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use geocurrents::currents::{default_base_boxes, Current, IsometrySampler};
use geocurrents::earthquakes::{build_earthquake, default_base};
use geocurrents::laminations::{FamilySpec, FiniteLamination, Leaf};
use geocurrents::liouville::{BoundaryMode, GeodesicBox};
use geocurrents::mobius::{BoundaryPoint, MobiusMap};
use geocurrents::random::{random_box, substream};
use geocurrents::CircleMap;
use serde::{Deserialize, Serialize};

/// Top-level config file: an optional seed next to the experiment fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub spec: ExperimentSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExperimentSpec {
    Liouville(LiouvilleSpec),
    #[serde(rename = "quake-eval")]
    QuakeEval(QuakeEvalSpec),
    Theorem71(Theorem71Spec),
    Lemma61(Lemma61Spec),
    Prop93(Prop93Spec),
    Lemma92(Lemma92Spec),
    Lemma94(Lemma94Spec),
    Bonahon(BonahonSpec),
    Mcg(McgSpec),
    Supnorm(SupnormSpec),
}

impl ExperimentSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentSpec::Liouville(_) => "liouville",
            ExperimentSpec::QuakeEval(_) => "quake-eval",
            ExperimentSpec::Theorem71(_) => "theorem71",
            ExperimentSpec::Lemma61(_) => "lemma61",
            ExperimentSpec::Prop93(_) => "prop93",
            ExperimentSpec::Lemma92(_) => "lemma92",
            ExperimentSpec::Lemma94(_) => "lemma94",
            ExperimentSpec::Bonahon(_) => "bonahon",
            ExperimentSpec::Mcg(_) => "mcg",
            ExperimentSpec::Supnorm(_) => "supnorm",
        }
    }

    pub fn validate(&self, base: &Path) -> Result<()> {
        match self {
            ExperimentSpec::Theorem71(s) => {
                check_t_grid(&s.t_grid)?;
                s.lamination.load(base)?;
            }
            ExperimentSpec::Lemma61(s) => {
                s.family.validate()?;
                if s.n_grid.is_empty() || s.n_grid.windows(2).any(|w| w[1] <= w[0]) || s.n_grid[0] == 0 {
                    bail!("n grid must be strictly increasing and positive");
                }
                if !(s.t_scale > 0.0) {
                    bail!("t scale must be positive");
                }
            }
            ExperimentSpec::Mcg(s) => {
                check_t_grid(&s.t_grid)?;
                s.lamination.load(base)?;
                s.g.build(base)?;
            }
            ExperimentSpec::QuakeEval(s) => {
                s.lamination.load(base)?;
                if !(s.t > 0.0) {
                    bail!("t must be positive");
                }
            }
            ExperimentSpec::Lemma92(s) => {
                if s.m_values.iter().any(|m| !(*m >= 0.0)) || s.points < 2 {
                    bail!("weights must be nonnegative and grids need at least two points");
                }
            }
            ExperimentSpec::Supnorm(s) => {
                s.current.build(base)?;
            }
            ExperimentSpec::Bonahon(s) => check_t_grid(&s.dichotomy_t)?,
            ExperimentSpec::Liouville(_) | ExperimentSpec::Prop93(_) | ExperimentSpec::Lemma94(_) => {}
        }
        Ok(())
    }
}

pub fn check_t_grid(t: &[f64]) -> Result<()> {
    if t.is_empty() {
        bail!("t grid is empty");
    }
    if t.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        bail!("t grid must be positive");
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        bail!("t grid must be strictly increasing");
    }
    Ok(())
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: ExperimentConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    cfg.spec.validate(path.parent().unwrap_or(Path::new(".")))?;
    Ok(cfg)
}

/// `{1, 2, 4, …, 64}`.
pub fn geometric_t_grid() -> Vec<f64> {
    (0..7).map(|k| (1u32 << k) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafRecord {
    pub p: f64,
    pub q: f64,
    pub weight: f64,
}

/// A lamination given inline or as a CSV file relative to the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LaminationRef {
    Path { path: PathBuf },
    Inline { leaves: Vec<LeafRecord> },
}

impl LaminationRef {
    pub fn inline(leaves: &[(f64, f64, f64)]) -> Self {
        LaminationRef::Inline { leaves: leaves.iter().map(|&(p, q, weight)| LeafRecord { p, q, weight }).collect() }
    }

    pub fn load(&self, base: &Path) -> Result<FiniteLamination> {
        match self {
            LaminationRef::Path { path } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                Ok(FiniteLamination::load(&full)?)
            }
            LaminationRef::Inline { leaves } => {
                let v = leaves.iter().map(|l| Leaf::new(l.p, l.q, l.weight)).collect::<Result<Vec<_>, _>>()?;
                Ok(FiniteLamination::new(v)?)
            }
        }
    }
}

/// Explicit corner lists, the fixed default family, or seeded random boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoxSource {
    Named(NamedBoxes),
    Explicit(Vec<GeodesicBox>),
    Random { random: usize, min_gap: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedBoxes {
    Default,
}

impl Default for BoxSource {
    fn default() -> Self {
        BoxSource::Named(NamedBoxes::Default)
    }
}

impl BoxSource {
    pub fn boxes(&self, seed: u64) -> Vec<GeodesicBox> {
        match self {
            BoxSource::Named(NamedBoxes::Default) => default_base_boxes(),
            BoxSource::Explicit(v) => v.clone(),
            BoxSource::Random { random, min_gap } => {
                let mut rng = substream(seed, "boxes");
                (0..*random).map(|_| random_box(&mut rng, *min_gap)).collect()
            }
        }
    }
}

/// Serializable description of a current.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CurrentDescriptor {
    Liouville,
    /// Pullback by the earthquake of `t·λ`, based at `base_angle`.
    Pullback {
        lamination: LaminationRef,
        #[serde(default = "one")]
        t: f64,
        #[serde(default)]
        base_angle: Option<f64>,
    },
    Lamination {
        lamination: LaminationRef,
        #[serde(default)]
        boundary: BoundaryMode,
    },
    Scaled {
        factor: f64,
        inner: Box<CurrentDescriptor>,
    },
}

fn one() -> f64 {
    1.0
}

impl CurrentDescriptor {
    pub fn build(&self, base: &Path) -> Result<Current> {
        Ok(match self {
            CurrentDescriptor::Liouville => Current::Liouville,
            CurrentDescriptor::Pullback { lamination, t, base_angle } => {
                let lam = lamination.load(base)?.scaled(*t)?;
                let b = base_angle.map(BoundaryPoint::from_angle).unwrap_or_else(default_base);
                Current::pullback(build_earthquake(&lam, b)?.boundary_map())
            }
            CurrentDescriptor::Lamination { lamination, boundary } => {
                Current::Lamination { lamination: lamination.load(base)?, boundary: *boundary }
            }
            CurrentDescriptor::Scaled { factor, inner } => Current::scaled(*factor, inner.build(base)?)?,
        })
    }
}

/// The circle map acting in the mapping class group experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MapDescriptor {
    Identity,
    Mobius { map: MobiusMap },
    Earthquake {
        lamination: LaminationRef,
        #[serde(default = "one")]
        t: f64,
    },
}

impl MapDescriptor {
    pub fn build(&self, base: &Path) -> Result<CircleMap> {
        Ok(match self {
            MapDescriptor::Identity => CircleMap::identity(),
            MapDescriptor::Mobius { map } => CircleMap::from_mobius(*map),
            MapDescriptor::Earthquake { lamination, t } => {
                geocurrents::earthquakes::earthquake_path_map(&lamination.load(base)?, *t)?
            }
        })
    }

    pub fn is_mobius(&self) -> bool {
        !matches!(self, MapDescriptor::Earthquake { .. })
    }
}

// ---------- per-experiment specs ----------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LiouvilleSpec {
    /// Regression boxes for the quadrature comparison.
    pub quad_boxes: BoxSource,
    pub quad_tol: f64,
    pub invariance_trials: usize,
    pub round_trips: usize,
    /// Earthquake maps whose values are inverted back to boundary points.
    pub reconstructions: usize,
    pub points_per_map: usize,
}

impl Default for LiouvilleSpec {
    fn default() -> Self {
        LiouvilleSpec {
            quad_boxes: BoxSource::Random { random: 20, min_gap: 0.05 },
            quad_tol: 1e-8,
            invariance_trials: 1000,
            round_trips: 1000,
            reconstructions: 10,
            points_per_map: 20,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct QuakeEvalSpec {
    pub lamination: LaminationRef,
    pub t: f64,
    pub base_angle: Option<f64>,
    /// Evaluation points; a uniform grid of `grid` points when empty.
    pub points: Vec<f64>,
    pub grid: usize,
    pub boxes: BoxSource,
    /// Extra seeded laminations swept through the structural checks.
    pub random_laminations: usize,
    pub max_leaves: usize,
}

impl Default for QuakeEvalSpec {
    fn default() -> Self {
        QuakeEvalSpec {
            lamination: LaminationRef::inline(&[(0.0, PI, 1.0)]),
            t: 1.0,
            base_angle: None,
            points: Vec::new(),
            grid: 16,
            boxes: BoxSource::default(),
            random_laminations: 100,
            max_leaves: 8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Theorem71Spec {
    pub lamination: LaminationRef,
    pub t_grid: Vec<f64>,
    pub boxes: BoxSource,
    /// Perturb boxes so no leaf endpoint sits on a corner.
    pub generic: bool,
    pub max_shift: f64,
    pub base_angle: Option<f64>,
    /// Maximizes additionally over these isometries when present.
    pub uniform: Option<IsometrySampler>,
    pub sup_sampler: IsometrySampler,
    /// Final max error must be below `rel_tol · sup_norm_estimate(β)`.
    pub rel_tol: f64,
    pub closed_form_tol: f64,
}

impl Default for Theorem71Spec {
    fn default() -> Self {
        Theorem71Spec {
            lamination: LaminationRef::inline(&[(0.4, 2.9, 1.0), (0.7, 2.6, 0.8), (1.0, 2.3, 0.6)]),
            t_grid: geometric_t_grid(),
            boxes: BoxSource::default(),
            generic: true,
            max_shift: 0.05,
            base_angle: None,
            uniform: Some(IsometrySampler { seed: 0, count: 64, mean_length: 1.0, include_identity: true }),
            sup_sampler: IsometrySampler { seed: 0, count: 256, mean_length: 1.0, include_identity: true },
            rel_tol: 0.02,
            closed_form_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Lemma61Spec {
    pub family: FamilySpec,
    pub n_grid: Vec<usize>,
    /// `t_n = t_scale · n`.
    pub t_scale: f64,
    pub boxes: BoxSource,
    pub generic: bool,
    pub max_shift: f64,
    pub min_target: f64,
    pub rel_tol: f64,
}

impl Default for Lemma61Spec {
    fn default() -> Self {
        let capture = |s1: f64, s2: f64| GeodesicBox::from_angles(s1, s2, -s2, -s1).expect("valid capture box");
        Lemma61Spec {
            family: FamilySpec::nested(0.1, 1.0),
            n_grid: vec![4, 8, 16, 32],
            t_scale: 1.0,
            boxes: BoxSource::Explicit(vec![
                capture(0.3, 0.8),
                capture(0.2, 0.55),
                capture(0.15, 0.95),
                capture(0.45, 0.9),
                GeodesicBox::from_angles(0.4, 2.0, 4.0, -0.2).expect("valid box"),
                GeodesicBox::from_angles(0.25, 1.5, 5.0, -0.5).expect("valid box"),
            ]),
            generic: true,
            max_shift: 0.01,
            min_target: 0.1,
            rel_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Prop93Spec {
    pub instances: usize,
    pub max_leaves: usize,
    pub min_weight: f64,
    pub max_weight: f64,
    pub slack: f64,
    pub tightness_cases: usize,
}

impl Default for Prop93Spec {
    fn default() -> Self {
        Prop93Spec { instances: 1000, max_leaves: 5, min_weight: 0.05, max_weight: 2.0, slack: 1e-9, tightness_cases: 20 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Lemma92Spec {
    /// Corners `a, b, c, d` of the fixed box.
    #[serde(rename = "box")]
    pub quad: GeodesicBox,
    pub m_values: Vec<f64>,
    pub points: usize,
    pub slack: f64,
}

impl Default for Lemma92Spec {
    fn default() -> Self {
        Lemma92Spec {
            quad: GeodesicBox::from_angles(0.5, 1.6, 3.3, 4.6).expect("valid box"),
            m_values: vec![0.5, 2.0],
            points: 100,
            slack: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Lemma94Spec {
    pub m_values: Vec<f64>,
    /// Half-plane coordinate of `b` in the normalization `a = 0, c = ∞, d = −1`.
    pub b: f64,
    pub exact_tol: f64,
    pub instances: usize,
    pub max_weight: f64,
    pub slack: f64,
}

impl Default for Lemma94Spec {
    fn default() -> Self {
        Lemma94Spec { m_values: vec![0.25, 1.0, 4.0], b: 1.0, exact_tol: 1e-10, instances: 1000, max_weight: 6.0, slack: 1e-9 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BonahonSpec {
    pub pairs: usize,
    pub earthquakes: usize,
    pub max_leaves: usize,
    pub max_weight: f64,
    pub tol: f64,
    pub atom_weight: f64,
    pub counterexample_min: f64,
    pub dichotomy_t: Vec<f64>,
    pub sup_sampler: IsometrySampler,
}

impl Default for BonahonSpec {
    fn default() -> Self {
        BonahonSpec {
            pairs: 1000,
            earthquakes: 10,
            max_leaves: 6,
            max_weight: 1.5,
            tol: 1e-9,
            atom_weight: 3.0,
            counterexample_min: 0.04,
            dichotomy_t: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            sup_sampler: IsometrySampler { seed: 0, count: 128, mean_length: 1.0, include_identity: true },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct McgSpec {
    pub lamination: LaminationRef,
    pub g: MapDescriptor,
    pub t_grid: Vec<f64>,
    pub boxes: BoxSource,
    pub generic: bool,
    pub max_shift: f64,
    pub uniform: Option<IsometrySampler>,
    pub sup_sampler: IsometrySampler,
    pub rel_tol: f64,
    pub consistency_tol: f64,
}

impl Default for McgSpec {
    fn default() -> Self {
        McgSpec {
            lamination: LaminationRef::inline(&[(0.9, 3.4, 1.0)]),
            g: MapDescriptor::Earthquake { lamination: LaminationRef::inline(&[(0.3, 2.0, 0.9), (3.6, 5.4, 0.5)]), t: 1.0 },
            t_grid: vec![4.0, 8.0, 16.0, 32.0],
            boxes: BoxSource::default(),
            generic: true,
            max_shift: 0.05,
            uniform: Some(IsometrySampler { seed: 0, count: 16, mean_length: 1.0, include_identity: true }),
            sup_sampler: IsometrySampler { seed: 0, count: 256, mean_length: 1.0, include_identity: true },
            rel_tol: 0.1,
            consistency_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SupnormSpec {
    pub current: CurrentDescriptor,
    pub sampler: IsometrySampler,
}

impl Default for SupnormSpec {
    fn default() -> Self {
        SupnormSpec { current: CurrentDescriptor::Liouville, sampler: IsometrySampler::default() }
    }
}
