//! Boxes of geodesics and their Liouville measure.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mobius::{chord, BoundaryPoint, Geodesic, MobiusMap, PT_EPS};

/// Whether points within `PT_EPS` of an arc's ends count as inside.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    #[default]
    Include,
    Exclude,
}

/// Closed counterclockwise arc from `start` to `end`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: BoundaryPoint,
    pub end: BoundaryPoint,
}

impl Arc {
    pub fn new(start: BoundaryPoint, end: BoundaryPoint) -> Result<Self> {
        if start == end {
            return Err(Error::InvalidArc("arc endpoints coincide".into()));
        }
        Ok(Arc { start, end })
    }

    pub fn length(&self) -> f64 {
        self.start.ccw_to(self.end)
    }

    pub fn contains(&self, p: BoundaryPoint, mode: BoundaryMode) -> bool {
        let d = self.start.ccw_to(p);
        let len = self.length();
        match mode {
            BoundaryMode::Include => d <= len + PT_EPS || d >= TAU - PT_EPS,
            BoundaryMode::Exclude => d > PT_EPS && d < len - PT_EPS,
        }
    }

    /// Point at fraction `s` of the way along the arc.
    pub fn at(&self, s: f64) -> BoundaryPoint {
        self.start.rotated(s * self.length())
    }
}

/// The box `[a,b]×[c,d]`: geodesics from the first arc to the second.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct GeodesicBox {
    pub first: Arc,
    pub second: Arc,
}

impl GeodesicBox {
    /// Corners must be distinct and met in the order `a, b, c, d` going counterclockwise.
    pub fn new(a: BoundaryPoint, b: BoundaryPoint, c: BoundaryPoint, d: BoundaryPoint) -> Result<Self> {
        if a == b || b == c || c == d || d == a || a == c || b == d {
            return Err(Error::InvalidBox("corners are not distinct".into()));
        }
        let (ab, ac, ad) = (a.ccw_to(b), a.ccw_to(c), a.ccw_to(d));
        if !(ab < ac && ac < ad) {
            return Err(Error::InvalidBox("corners are not in counterclockwise order".into()));
        }
        Ok(GeodesicBox { first: Arc { start: a, end: b }, second: Arc { start: c, end: d } })
    }

    pub fn from_angles(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(
            BoundaryPoint::from_angle(a),
            BoundaryPoint::from_angle(b),
            BoundaryPoint::from_angle(c),
            BoundaryPoint::from_angle(d),
        )
    }

    pub fn corners(&self) -> [BoundaryPoint; 4] {
        [self.first.start, self.first.end, self.second.start, self.second.end]
    }

    pub fn angles(&self) -> [f64; 4] {
        self.corners().map(BoundaryPoint::angle)
    }

    /// `[c,d]×[a,b]`.
    pub fn flipped(&self) -> Self {
        GeodesicBox { first: self.second, second: self.first }
    }

    pub fn image(&self, m: &MobiusMap) -> Self {
        let [a, b, c, d] = self.corners().map(|p| m.apply(p));
        GeodesicBox { first: Arc { start: a, end: b }, second: Arc { start: c, end: d } }
    }

    pub fn contains(&self, g: Geodesic, mode: BoundaryMode) -> bool {
        self.first.contains(g.p, mode) && self.second.contains(g.q, mode)
    }

    /// Smaller of the two gaps separating the arcs.
    pub fn separation(&self) -> f64 {
        self.first.end.ccw_to(self.second.start).min(self.second.end.ccw_to(self.first.start))
    }
}

impl TryFrom<[f64; 4]> for GeodesicBox {
    type Error = Error;
    fn try_from(a: [f64; 4]) -> Result<Self> {
        GeodesicBox::from_angles(a[0], a[1], a[2], a[3])
    }
}

impl From<GeodesicBox> for [f64; 4] {
    fn from(q: GeodesicBox) -> [f64; 4] {
        q.angles()
    }
}

/// `Q* = [1, i] × [−1, −i]`.
pub fn q_star() -> GeodesicBox {
    GeodesicBox::from_angles(0.0, 0.5 * PI, PI, 1.5 * PI).expect("valid box")
}

/// `log` of the cross-ratio, as `log(1 + X)` with `X = |a−b||c−d| / (|a−d||b−c|)`.
pub fn liouville_box(q: &GeodesicBox) -> f64 {
    let [a, b, c, d] = q.corners();
    let x = chord(a, b) * chord(c, d) / (chord(a, d) * chord(b, c));
    x.norm().ln_1p()
}

/// `[b,c]×[d,a]`.
pub fn complementary_box(q: &GeodesicBox) -> GeodesicBox {
    let [a, b, c, d] = q.corners();
    GeodesicBox { first: Arc { start: b, end: c }, second: Arc { start: d, end: a } }
}

pub fn random_log2_box(gamma: &MobiusMap) -> GeodesicBox {
    q_star().image(gamma)
}

/// Corner `d` of the box `[a,b]×[c,d]` with Liouville value `target`, lying in `arc`.
pub fn solve_fourth_point(
    a: BoundaryPoint,
    b: BoundaryPoint,
    c: BoundaryPoint,
    target: f64,
    arc: &Arc,
) -> Result<BoundaryPoint> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::InvalidInput(format!("target value {target} must be positive")));
    }
    // cr = 1 + X with X = e^L − 1:  d = [c(b−a) − X·a(c−b)] / [(b−a) − X(c−b)]
    let x = target.exp_m1();
    let (za, zc) = (a.to_complex(), c.to_complex());
    let ba = chord(b, a);
    let cb = chord(c, b);
    let num: Complex64 = zc * ba - za * cb * x;
    let den: Complex64 = ba - cb * x;
    if den.norm() == 0.0 {
        return Err(Error::NoSolutionInArc);
    }
    let d = BoundaryPoint::from_complex(num / den);
    if !arc.contains(d, BoundaryMode::Exclude) {
        return Err(Error::NoSolutionInArc);
    }
    let q = GeodesicBox::new(a, b, c, d).map_err(|_| Error::NoSolutionInArc)?;
    let got = liouville_box(&q);
    if (got - target).abs() > 1e-9 * target.max(1.0) {
        return Err(Error::NoSolutionInArc);
    }
    Ok(d)
}

pub const QUAD_MIN_SEPARATION: f64 = 1e-6;

#[derive(Clone, Copy, Debug)]
pub struct QuadratureOptions {
    pub tol: f64,
    pub max_evaluations: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { tol: 1e-8, max_evaluations: 1_000_000 }
    }
}

pub fn liouville_quad(q: &GeodesicBox, tol: f64) -> Result<f64> {
    liouville_quad_with(q, &QuadratureOptions { tol, ..Default::default() })
}

#[derive(Clone, Copy)]
struct Cell {
    t0: f64,
    t1: f64,
    s0: f64,
    s1: f64,
    value: f64,
    error: f64,
}

struct Queued {
    error: f64,
    index: usize,
}

impl PartialEq for Queued {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Queued {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error).then(o.index.cmp(&self.index))
    }
}

fn kernel(t: f64, s: f64) -> f64 {
    let h = (0.5 * (t - s)).sin();
    0.25 / (h * h)
}

/// Midpoint sum of the kernel on an `n×n` split of the cell.
fn midpoint_sum(t0: f64, t1: f64, s0: f64, s1: f64, n: usize) -> f64 {
    let (ht, hs) = ((t1 - t0) / n as f64, (s1 - s0) / n as f64);
    let mut acc = 0.0;
    for i in 0..n {
        let t = t0 + (i as f64 + 0.5) * ht;
        for j in 0..n {
            acc += kernel(t, s0 + (j as f64 + 0.5) * hs);
        }
    }
    acc * ht * hs
}

const EVALS_PER_CELL: usize = 1 + 4 + 16;

fn make_cell(t0: f64, t1: f64, s0: f64, s1: f64) -> Cell {
    let m1 = midpoint_sum(t0, t1, s0, s1, 1);
    let m2 = midpoint_sum(t0, t1, s0, s1, 2);
    let m4 = midpoint_sum(t0, t1, s0, s1, 4);
    // Two Richardson steps on the h² error expansion of the midpoint rule.
    let r1 = (4.0 * m2 - m1) / 3.0;
    let r2 = (4.0 * m4 - m2) / 3.0;
    let value = r2 + (r2 - r1) / 15.0;
    Cell { t0, t1, s0, s1, value, error: (r2 - r1).abs() / 15.0 }
}

/// Adaptive cubature of `∫∫ dt ds / |e^{it} − e^{is}|²` over the box's angle rectangle.
pub fn liouville_quad_with(q: &GeodesicBox, opts: &QuadratureOptions) -> Result<f64> {
    let sep = q.separation();
    if sep < QUAD_MIN_SEPARATION {
        return Err(Error::ArcsTooClose { separation: sep, minimum: QUAD_MIN_SEPARATION });
    }
    let t0 = q.first.start.angle();
    let t1 = t0 + q.first.length();
    let mut s0 = q.second.start.angle();
    if s0 < t1 {
        s0 += TAU;
    }
    let s1 = s0 + q.second.length();

    let mut cells = vec![Some(make_cell(t0, t1, s0, s1))];
    let mut heap = BinaryHeap::new();
    heap.push(Queued { error: cells[0].unwrap().error, index: 0 });
    let mut total_error = cells[0].unwrap().error;
    let mut evaluations = EVALS_PER_CELL;
    // Stop with a margin since the per-cell estimates are themselves approximate.
    let target = 0.25 * opts.tol;
    while total_error > target {
        if evaluations + 4 * EVALS_PER_CELL > opts.max_evaluations {
            return Err(Error::NoConvergence { evaluations, estimate: total_error });
        }
        let Queued { index, .. } = heap.pop().expect("nonempty queue");
        let c = cells[index].take().expect("live cell");
        total_error -= c.error;
        let (tm, sm) = (0.5 * (c.t0 + c.t1), 0.5 * (c.s0 + c.s1));
        for (a, b, x, y) in [(c.t0, tm, c.s0, sm), (tm, c.t1, c.s0, sm), (c.t0, tm, sm, c.s1), (tm, c.t1, sm, c.s1)] {
            let child = make_cell(a, b, x, y);
            total_error += child.error;
            heap.push(Queued { error: child.error, index: cells.len() });
            cells.push(Some(child));
        }
        evaluations += 4 * EVALS_PER_CELL;
    }
    // Fixed summation order keeps the result independent of heap tie-breaking.
    let mut sum = 0.0;
    let mut comp = 0.0;
    for c in cells.iter().flatten() {
        let y = c.value - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(sum)
}
