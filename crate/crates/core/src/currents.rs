//! Geodesic currents evaluated on boxes, and the discrepancies between them.

use std::f64::consts::TAU;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle_map::CircleMap;
use crate::error::{Error, Result};
use crate::laminations::{lamination_box_mass, FiniteLamination};
use crate::liouville::{complementary_box, liouville_box, q_star, BoundaryMode, GeodesicBox};
use crate::mobius::{translation_towards, BoundaryPoint, MobiusMap};
use crate::random::{random_isometry, substream};

#[derive(Debug, Clone)]
pub enum Current {
    /// The Liouville current itself, i.e. the pullback by the identity.
    Liouville,
    Pullback(Arc<CircleMap>),
    Lamination { lamination: FiniteLamination, boundary: BoundaryMode },
    Scaled { factor: f64, inner: Box<Current> },
}

impl Current {
    pub fn pullback(h: CircleMap) -> Self {
        Current::Pullback(Arc::new(h))
    }

    pub fn lamination(lamination: FiniteLamination) -> Self {
        Current::Lamination { lamination, boundary: BoundaryMode::Include }
    }

    pub fn scaled(factor: f64, inner: Current) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidInput(format!("scale factor {factor} must be positive")));
        }
        Ok(Current::Scaled { factor, inner: Box::new(inner) })
    }

    pub fn value(&self, q: &GeodesicBox) -> f64 {
        match self {
            Current::Liouville => liouville_box(q),
            Current::Pullback(h) => h.box_value(q),
            Current::Lamination { lamination, boundary } => lamination_box_mass(lamination, q, *boundary),
            Current::Scaled { factor, inner } => factor * inner.value(q),
        }
    }
}

impl Current {
    /// `α(g(Q))` without rounding the corners of `g(Q)` to angles where the current allows it.
    pub fn value_on_image(&self, g: &MobiusMap, q: &GeodesicBox) -> f64 {
        match self {
            Current::Liouville => CircleMap::from_mobius(*g).box_value(q),
            Current::Pullback(h) => match h.compose(&CircleMap::from_mobius(*g)) {
                Ok(hg) => hg.box_value(q),
                Err(_) => h.box_value(&q.image(g)),
            },
            Current::Lamination { .. } => self.value(&q.image(g)),
            Current::Scaled { factor, inner } => factor * inner.value_on_image(g, q),
        }
    }
}

pub fn current_value(alpha: &Current, q: &GeodesicBox) -> Result<f64> {
    let v = alpha.value(q);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::DegenerateConfiguration(format!("box value {v} on {:?}", q.angles())))
    }
}

/// Seeded list of isometries: translations along uniform axes with exponential lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IsometrySampler {
    pub seed: u64,
    pub count: usize,
    pub mean_length: f64,
    /// Puts the identity first in the list.
    pub include_identity: bool,
}

impl Default for IsometrySampler {
    fn default() -> Self {
        IsometrySampler { seed: 0, count: 64, mean_length: 1.0, include_identity: true }
    }
}

impl IsometrySampler {
    pub fn isometries(&self) -> Vec<MobiusMap> {
        let mut rng = substream(self.seed, "isometry-sampler");
        let mut out = Vec::with_capacity(self.count + 1);
        if self.include_identity {
            out.push(MobiusMap::identity());
        }
        out.extend((0..self.count).map(|_| random_isometry(&mut rng, self.mean_length)));
        out
    }
}

/// `max α(γQ*)` over the sampled `γ`.
pub fn sup_norm_estimate(alpha: &Current, sampler: &IsometrySampler) -> f64 {
    let q = q_star();
    let gs = sampler.isometries();
    gs.par_iter().map(|g| alpha.value_on_image(g, &q)).collect::<Vec<_>>().into_iter().fold(0.0, f64::max)
}

pub fn weak_discrepancy(alpha: &Current, beta: &Current, boxes: &[GeodesicBox]) -> f64 {
    boxes
        .par_iter()
        .map(|q| (alpha.value(q) - beta.value(q)).abs())
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyRow {
    pub gamma_index: usize,
    pub box_index: usize,
    pub value_alpha: f64,
    pub value_beta: f64,
    pub abs_diff: f64,
}

/// All `(γ, Q)` evaluations, gamma-major.
pub fn discrepancy_rows(
    alpha: &Current,
    beta: &Current,
    isometries: &[MobiusMap],
    base_boxes: &[GeodesicBox],
) -> Vec<DiscrepancyRow> {
    let grid: Vec<(usize, usize)> =
        (0..isometries.len()).flat_map(|g| (0..base_boxes.len()).map(move |b| (g, b))).collect();
    grid.par_iter()
        .map(|&(g, b)| {
            let q = base_boxes[b].image(&isometries[g]);
            let (va, vb) = (alpha.value(&q), beta.value(&q));
            DiscrepancyRow { gamma_index: g, box_index: b, value_alpha: va, value_beta: vb, abs_diff: (va - vb).abs() }
        })
        .collect()
}

pub fn uniform_discrepancy(
    alpha: &Current,
    beta: &Current,
    sampler: &IsometrySampler,
    base_boxes: &[GeodesicBox],
) -> f64 {
    discrepancy_rows(alpha, beta, &sampler.isometries(), base_boxes).iter().map(|r| r.abs_diff).fold(0.0, f64::max)
}

/// `|e^{−α(Q)} + e^{−α(Q')} − 1|` with `Q'` the complementary box.
pub fn bonahon_residual(alpha: &Current, q: &GeodesicBox) -> f64 {
    let a = alpha.value(q);
    let b = alpha.value(&complementary_box(q));
    ((-a).exp() + (-b).exp() - 1.0).abs()
}

/// `α ∘ g⁻¹`, renormalized to fix `1, i, −1`.
pub fn mcg_pushforward(g: &CircleMap, alpha: &Current) -> Result<Current> {
    match alpha {
        Current::Liouville => Ok(Current::pullback(g.inverse()?.normalize_fix_three()?)),
        Current::Pullback(h) => Ok(Current::pullback(h.compose(&g.inverse()?)?.normalize_fix_three()?)),
        Current::Scaled { factor, inner } => Current::scaled(*factor, mcg_pushforward(g, inner)?),
        Current::Lamination { .. } => Err(Error::UnsupportedVariant("lamination pushforward under a circle map")),
    }
}

/// Moves every leaf endpoint by `g`.
pub fn push_lamination(g: &CircleMap, lam: &FiniteLamination) -> Result<FiniteLamination> {
    lam.map_endpoints(|p| g.eval(p))
}

/// `Q*` and 24 fixed isometric images of it, from nearly square to very thin.
pub fn default_base_boxes() -> Vec<GeodesicBox> {
    const LENGTHS: [f64; 4] = [0.4, 1.2, 2.5, 4.0];
    let mut out = vec![q_star()];
    for k in 0..24 {
        let kf = k as f64;
        let p = BoundaryPoint::from_angle(TAU * kf / 24.0 + 0.1);
        let q = p.rotated(0.6 + 0.2 * (k % 13) as f64);
        let g = translation_towards(p, q, LENGTHS[k % 4]).compose(&MobiusMap::rotation(0.37 * kf));
        out.push(q_star().image(&g));
    }
    out
}
