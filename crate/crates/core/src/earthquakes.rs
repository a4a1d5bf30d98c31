//! Left earthquakes of finite laminations and their boundary maps.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circle_map::{CircleMap, MobiusWord};
use crate::error::{Error, Result};
use crate::laminations::FiniteLamination;
use crate::mobius::{hyperbolic_translation, BoundaryPoint, Endpoint, Geodesic, MobiusMap};

/// `Cayley(−1) = i`.
pub const DEFAULT_BASE_ANGLE: f64 = 0.5 * PI;

pub fn default_base() -> BoundaryPoint {
    BoundaryPoint::from_angle(DEFAULT_BASE_ANGLE)
}

/// Complementary arc of the circle between consecutive leaf endpoints.
#[derive(Clone, Debug)]
pub struct Gap {
    pub start: BoundaryPoint,
    pub end: BoundaryPoint,
    /// Leaves separating this gap from the base gap, nearest to the base first.
    pub separating: Vec<usize>,
    word: MobiusWord,
}

impl Gap {
    pub fn word(&self) -> &MobiusWord {
        &self.word
    }
}

#[derive(Clone, Debug)]
pub struct EarthquakeMap {
    lamination: FiniteLamination,
    base_ref: BoundaryPoint,
    breakpoints: Vec<BoundaryPoint>,
    gaps: Vec<Gap>,
}

/// Endpoints of `g` in the order met going counterclockwise from `from`.
fn ccw_order(g: Geodesic, from: BoundaryPoint) -> (BoundaryPoint, BoundaryPoint) {
    if from.ccw_to(g.p) < from.ccw_to(g.q) {
        (g.p, g.q)
    } else {
        (g.q, g.p)
    }
}

/// Identity on the gap of `base_ref`; each leaf crossed on the way to a gap adds a left translation by its weight.
pub fn build_earthquake(lam: &FiniteLamination, base_ref: BoundaryPoint) -> Result<EarthquakeMap> {
    let breakpoints = lam.endpoints();
    if breakpoints.contains(&base_ref) {
        return Err(Error::BaseOnLeaf);
    }
    let n = breakpoints.len();
    let spans: Vec<(BoundaryPoint, BoundaryPoint)> = if n == 0 {
        vec![(base_ref, base_ref)]
    } else {
        (0..n).map(|i| (breakpoints[i], breakpoints[(i + 1) % n])).collect()
    };
    let gaps = spans
        .into_iter()
        .map(|(start, end)| {
            let mid = if n == 0 {
                base_ref
            } else if n == 1 {
                start.rotated(PI)
            } else {
                start.ccw_midpoint(end)
            };
            let mut sep: Vec<(f64, usize)> = Vec::new();
            for (k, leaf) in lam.leaves().iter().enumerate() {
                let g = leaf.geodesic;
                let base_inside = g.left_of(base_ref);
                if g.left_of(mid) != base_inside {
                    let span = g.p.ccw_to(g.q);
                    let far = if base_inside { std::f64::consts::TAU - span } else { span };
                    sep.push((far, k));
                }
            }
            sep.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let factors = sep
                .iter()
                .map(|&(_, k)| {
                    let leaf = lam.leaves()[k];
                    let (first, second) = ccw_order(leaf.geodesic, base_ref);
                    crate::circle_map::Factor::Translation { repelling: first, attracting: second, length: leaf.weight }
                })
                .collect();
            Gap { start, end, separating: sep.into_iter().map(|x| x.1).collect(), word: MobiusWord::from_factors(factors) }
        })
        .collect();
    Ok(EarthquakeMap { lamination: lam.clone(), base_ref, breakpoints, gaps })
}

impl EarthquakeMap {
    pub fn lamination(&self) -> &FiniteLamination {
        &self.lamination
    }

    pub fn base_ref(&self) -> BoundaryPoint {
        self.base_ref
    }

    pub fn breakpoints(&self) -> &[BoundaryPoint] {
        &self.breakpoints
    }

    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    /// The gap's map collapsed to one f64 isometry.
    pub fn gap_map(&self, i: usize) -> MobiusMap {
        self.gaps[i].word.to_mobius()
    }

    pub fn boundary_map(&self) -> CircleMap {
        if self.breakpoints.is_empty() {
            return CircleMap::identity();
        }
        CircleMap::from_pieces(self.breakpoints.clone(), self.gaps.iter().map(|g| g.word.clone()).collect())
            .expect("leaf endpoints are sorted and distinct")
    }

    /// `map_{i−1}⁻¹ ∘ map_i` across the breakpoint at the start of gap `i`.
    pub fn comparison_map(&self, i: usize) -> MobiusMap {
        let n = self.gaps.len();
        let prev = &self.gaps[(i + n - 1) % n].word;
        prev.inverse().compose(&self.gaps[i].word).to_mobius()
    }

    /// Verifies the defining comparison-map property across every leaf endpoint shared by no other leaf.
    pub fn check_comparison_maps(&self, trace_tol: f64, fixed_tol: f64) -> std::result::Result<(), String> {
        if let Some(g) = self.gaps.iter().find(|g| g.start == self.base_ref || crate::mobius::is_ccw(g.start, self.base_ref, g.end)) {
            if !g.separating.is_empty() {
                return Err("base gap is not fixed".into());
            }
        }
        let n = self.gaps.len();
        if n < 2 {
            return Ok(());
        }
        for i in 0..n {
            let e = self.breakpoints[i];
            let at: Vec<usize> =
                (0..self.lamination.len()).filter(|&k| self.lamination.leaves()[k].geodesic.has_endpoint(e)).collect();
            if at.len() != 1 {
                continue;
            }
            let leaf = self.lamination.leaves()[at[0]];
            let c = self.comparison_map(i);
            let prev = &self.gaps[(i + n - 1) % n];
            let from = if n == 2 && prev.start == prev.end { prev.start.rotated(PI) } else { prev.start.ccw_midpoint(prev.end) };
            let (_, att) = ccw_order(leaf.geodesic, from);
            let sel = if att == leaf.geodesic.p { Endpoint::P } else { Endpoint::Q };
            let expect = hyperbolic_translation(leaf.geodesic, leaf.weight, sel).map_err(|e| e.to_string())?;
            let tr = c.trace().abs() - 2.0 * (0.5 * leaf.weight).cosh();
            if tr.abs() > trace_tol * (0.5 * leaf.weight).cosh().max(1.0) {
                return Err(format!("trace mismatch {tr:e} at breakpoint {i}"));
            }
            for p in [leaf.geodesic.p, leaf.geodesic.q] {
                let moved = c.apply(p).distance(p);
                if moved > fixed_tol {
                    return Err(format!("axis endpoint moved by {moved:e} at breakpoint {i}"));
                }
            }
            let diff = c.distance_up_to_sign(&expect);
            if diff > fixed_tol * c.u().norm().max(1.0) {
                return Err(format!("comparison map is not the left translation (entry gap {diff:e}) at breakpoint {i}"));
            }
        }
        Ok(())
    }
}

pub fn earthquake_boundary_map(e: &EarthquakeMap) -> CircleMap {
    e.boundary_map()
}

/// Boundary map of the earthquake of `t·λ` with the default base point.
pub fn earthquake_path_map(lam: &FiniteLamination, t: f64) -> Result<CircleMap> {
    Ok(build_earthquake(&lam.scaled(t)?, default_base())?.boundary_map())
}

pub fn normalize_fix_three(h: &CircleMap) -> Result<CircleMap> {
    h.normalize_fix_three()
}

/// Largest symmetrized ratio over a deterministic low-discrepancy set of `(x, t)`.
pub fn qs_constant_estimate(h: &CircleMap, n_samples: usize) -> f64 {
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let root2 = 2f64.sqrt();
    (1..=n_samples.max(1))
        .map(|k| {
            let kf = k as f64;
            let x = std::f64::consts::TAU * (kf * golden).fract();
            let t = PI * (kf * root2).fract();
            let r = h.symmetric_ratio(x, t);
            r.max(1.0 / r)
        })
        .fold(1.0, f64::max)
}

/// `qs_constant_estimate(h_n ∘ h⁻¹) − 1`.
pub fn teich_convergence_gauge(h_n: &CircleMap, h: &CircleMap, n_samples: usize) -> Result<f64> {
    let composite = h_n.compose(&h.inverse()?)?;
    Ok(qs_constant_estimate(&composite, n_samples) - 1.0)
}

/// Closed forms from the half-plane normalizations, used as oracles.
pub mod closed_form {
    /// Box `(0, b, ∞, −1)` after the earthquake along `(0, ∞)` of weight `m`, identity on the side of `−1`.
    pub fn single_leaf_value(m: f64, b: f64) -> f64 {
        (m.exp() * b).ln_1p()
    }

    /// Leaf `(x, ∞)` with `c < d = 0 ≤ x ≤ a < b`: the first arc is dilated about `x`.
    pub fn leaf_right_of_d(m: f64, x: f64, a: f64, b: f64, c: f64) -> f64 {
        let ta = m.exp() * (a - x) + x;
        let tb = m.exp() * (b - x) + x;
        ((ta - c) * tb / (ta * (tb - c))).ln()
    }

    /// Leaf `(x, ∞)` with `d = 0 ≤ x ≤ a < b < c`: `d` is contracted towards `x`.
    pub fn leaf_left_of_a(m: f64, x: f64, a: f64, b: f64, c: f64) -> f64 {
        let td = (1.0 - (-m).exp()) * x;
        ((c - a) * (b - td) / ((c - b) * (a - td))).ln()
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EarthquakeStep {
    pub t: f64,
    pub qs_estimate: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laminations::Leaf;
    use crate::liouville::GeodesicBox;
    use crate::mobius::{cayley, cayley_to_disk, ExtendedReal};

    fn half_plane_leaf(m: f64) -> FiniteLamination {
        let g = Geodesic::new(cayley(0.0), cayley_to_disk(ExtendedReal::Infinity)).unwrap();
        FiniteLamination::new(vec![Leaf { geodesic: g, weight: m }]).unwrap()
    }

    #[test]
    fn empty_lamination_gives_identity() {
        let e = build_earthquake(&FiniteLamination::empty(), default_base()).unwrap();
        let h = e.boundary_map();
        assert_eq!(h.breakpoints().len(), 0);
        assert!(h.pieces()[0].is_identity());
    }

    #[test]
    fn far_side_is_dilated() {
        let e = build_earthquake(&half_plane_leaf(1.0), cayley(-1.0)).unwrap();
        let h = e.boundary_map();
        assert_eq!(h.pieces().len(), 2);
        assert!(h.eval(cayley(1.0)).distance(cayley(1f64.exp())) < 1e-14);
        assert!(h.eval(cayley(-3.0)).distance(cayley(-3.0)) < 1e-15);
        h.check_invariants(1000, 1e-10).unwrap();
        e.check_comparison_maps(1e-10, 1e-9).unwrap();
    }

    #[test]
    fn single_leaf_box_value_discriminates_direction() {
        let q = GeodesicBox::new(cayley(0.0), cayley(1.0), cayley_to_disk(ExtendedReal::Infinity), cayley(-1.0)).unwrap();
        for m in [0.25, 1.0, 4.0, 40.0] {
            let h = build_earthquake(&half_plane_leaf(m), default_base()).unwrap().boundary_map();
            let v = h.box_value(&q);
            assert!((v - closed_form::single_leaf_value(m, 1.0)).abs() < 1e-10, "m={m}: {v}");
        }
    }

    #[test]
    fn nested_gap_composes_nearest_leaf_first() {
        // Leaves (−s, s) for s = 0.5, 1.0: the base at π sees the outer leaf first.
        let lam = FiniteLamination::new(vec![Leaf::new(-0.5, 0.5, 0.7).unwrap(), Leaf::new(-1.0, 1.0, 1.1).unwrap()]).unwrap();
        let e = build_earthquake(&lam, BoundaryPoint::from_angle(PI)).unwrap();
        let inner_gap = e.gaps().iter().position(|g| g.separating.len() == 2).unwrap();
        let outer = lam.leaves().iter().position(|l| (l.weight - 1.1).abs() < 1e-15).unwrap();
        assert_eq!(e.gaps()[inner_gap].separating[0], outer);
        // Hand-composed: from π counterclockwise both leaves are met at −s first, so +s attracts.
        let t_out = hyperbolic_translation(Geodesic::from_angles(-1.0, 1.0).unwrap(), 1.1, Endpoint::Q).unwrap();
        let t_in = hyperbolic_translation(Geodesic::from_angles(-0.5, 0.5).unwrap(), 0.7, Endpoint::Q).unwrap();
        let expect = t_out.compose(&t_in);
        assert!(e.gap_map(inner_gap).distance_up_to_sign(&expect) < 1e-12);
        e.check_comparison_maps(1e-10, 1e-9).unwrap();
    }

    #[test]
    fn base_on_leaf_is_rejected() {
        let err = build_earthquake(&half_plane_leaf(1.0), cayley(0.0)).unwrap_err();
        assert_eq!(err, Error::BaseOnLeaf);
    }

    #[test]
    fn half_plane_monotonicity_closed_forms() {
        // c = −2, d = 0, a = 1, b = 2, leaf (x, ∞) with x ∈ (0, 1).
        let (a, b, c, d) = (1.0, 2.0, -2.0, 0.0);
        let q = GeodesicBox::new(cayley(a), cayley(b), cayley(c), cayley(d)).unwrap();
        for x in [0.1, 0.4, 0.9] {
            let g = Geodesic::new(cayley(x), cayley_to_disk(ExtendedReal::Infinity)).unwrap();
            let lam = FiniteLamination::new(vec![Leaf { geodesic: g, weight: 1.0 }]).unwrap();
            let h = build_earthquake(&lam, cayley(-1.0)).unwrap().boundary_map();
            let v = h.box_value(&q);
            assert!((v - closed_form::leaf_right_of_d(1.0, x, a, b, c)).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn qs_estimates() {
        assert_eq!(qs_constant_estimate(&CircleMap::identity(), 100), 1.0);
        let h = earthquake_path_map(&half_plane_leaf(1.0), 2.0).unwrap();
        let q = qs_constant_estimate(&h, 200);
        assert!(q > 1.0 && q.is_finite());
        assert_eq!(teich_convergence_gauge(&h, &h, 100).unwrap(), 0.0);
    }
}
