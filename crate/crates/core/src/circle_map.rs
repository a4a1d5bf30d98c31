//! Piecewise-Möbius circle homeomorphisms.
//!
//! Each piece is a [`MobiusWord`]: a product of isometries, translations given
//! by axis and length, and exact extended-precision matrices. Short words are
//! collapsed to an f64 matrix; long words are evaluated through homogeneous
//! determinants at a precision derived from their translation budget.

use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouville::GeodesicBox;
use crate::mobius::{chord, mobius_from_three_pairs, translation_towards, BoundaryPoint, MobiusMap};
use crate::precise::{bits_for, det, PComplex, PMat, PVec};

/// Words with at most this much total translation are evaluated in f64.
const FAST_BUDGET: f64 = 4.0;

#[derive(Clone, Debug)]
pub struct ExactMatrix {
    mat: PMat,
    budget: f64,
}

/// Bits of cancellation an f64 product with `m` can cost, in units of translation length.
fn norm_budget(m: &MobiusMap) -> f64 {
    2.0 * (m.u().norm() + m.v().norm()).ln().max(0.0)
}

#[derive(Clone, Debug)]
pub enum Factor {
    Isometry(MobiusMap),
    Translation { repelling: BoundaryPoint, attracting: BoundaryPoint, length: f64 },
    Exact(Arc<ExactMatrix>),
}

impl Factor {
    fn budget(&self) -> f64 {
        match self {
            Factor::Isometry(m) => norm_budget(m),
            // Thin axes have entries far larger than e^{length/2}.
            Factor::Translation { repelling, attracting, length } => {
                norm_budget(&translation_towards(*repelling, *attracting, *length)).max(length.abs())
            }
            Factor::Exact(e) => e.budget,
        }
    }

    fn inverse(&self) -> Factor {
        match self {
            Factor::Isometry(m) => Factor::Isometry(m.inverse()),
            Factor::Translation { repelling, attracting, length } => {
                Factor::Translation { repelling: *attracting, attracting: *repelling, length: *length }
            }
            Factor::Exact(e) => Factor::Exact(Arc::new(ExactMatrix { mat: e.mat.adjugate(), budget: e.budget })),
        }
    }

    fn to_f64(&self) -> Option<MobiusMap> {
        match self {
            Factor::Isometry(m) => Some(*m),
            Factor::Translation { repelling, attracting, length } => {
                Some(translation_towards(*repelling, *attracting, *length))
            }
            Factor::Exact(_) => None,
        }
    }

    fn matrix(&self, bits: usize) -> PMat {
        match self {
            Factor::Isometry(m) => PMat::from_mobius(m, bits),
            Factor::Translation { repelling, attracting, length } => {
                PMat::translation(*repelling, *attracting, *length, bits)
            }
            Factor::Exact(e) => e.mat.clone(),
        }
    }
}

/// Product `f₀ ∘ f₁ ∘ … ∘ f_k` of Möbius factors.
pub struct MobiusWord {
    factors: Vec<Factor>,
    budget: f64,
    fast: OnceLock<Option<MobiusMap>>,
    exact: RwLock<Option<Arc<(usize, PMat)>>>,
}

impl Clone for MobiusWord {
    fn clone(&self) -> Self {
        MobiusWord {
            factors: self.factors.clone(),
            budget: self.budget,
            fast: self.fast.clone(),
            exact: RwLock::new(self.exact.read().expect("cache lock").clone()),
        }
    }
}

impl fmt::Debug for MobiusWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MobiusWord").field("factors", &self.factors).field("budget", &self.budget).finish()
    }
}

impl MobiusWord {
    pub fn identity() -> Self {
        Self::from_factors(Vec::new())
    }

    pub fn from_factors(factors: Vec<Factor>) -> Self {
        let mut merged: Vec<Factor> = Vec::with_capacity(factors.len());
        for f in factors {
            match (merged.last(), &f) {
                (Some(Factor::Isometry(prev)), Factor::Isometry(m))
                    if prev.translation_length() + m.translation_length() <= FAST_BUDGET =>
                {
                    let prod = prev.compose(m);
                    merged.pop();
                    if !(prod.v() == Complex64::new(0.0, 0.0) && prod.u().im == 0.0) {
                        merged.push(Factor::Isometry(prod));
                    }
                }
                (
                    Some(Factor::Translation { repelling: r0, attracting: a0, length: l0 }),
                    Factor::Translation { repelling: r1, attracting: a1, length: l1 },
                ) if l0 == l1 && r0.angle() == a1.angle() && a0.angle() == r1.angle() => {
                    merged.pop();
                }
                (_, Factor::Isometry(m)) if m.v() == Complex64::new(0.0, 0.0) && m.u() == Complex64::new(1.0, 0.0) => {}
                _ => merged.push(f),
            }
        }
        let budget = merged.iter().map(Factor::budget).sum();
        MobiusWord { factors: merged, budget, fast: OnceLock::new(), exact: RwLock::new(None) }
    }

    pub fn from_mobius(m: MobiusMap) -> Self {
        Self::from_factors(vec![Factor::Isometry(m)])
    }

    pub fn translation(repelling: BoundaryPoint, attracting: BoundaryPoint, length: f64) -> Self {
        Self::from_factors(vec![Factor::Translation { repelling, attracting, length }])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Sum of the translation lengths of the factors; controls working precision.
    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &MobiusWord) -> MobiusWord {
        let mut f = self.factors.clone();
        f.extend(inner.factors.iter().cloned());
        Self::from_factors(f)
    }

    pub fn inverse(&self) -> MobiusWord {
        Self::from_factors(self.factors.iter().rev().map(Factor::inverse).collect())
    }

    fn fast(&self) -> Option<&MobiusMap> {
        self.fast
            .get_or_init(|| {
                if self.budget > FAST_BUDGET {
                    return None;
                }
                let mut acc = MobiusMap::identity();
                for f in &self.factors {
                    acc = acc.compose(&f.to_f64()?);
                }
                Some(acc)
            })
            .as_ref()
    }

    fn bits(&self) -> usize {
        bits_for(self.budget)
    }

    fn matrix(&self, bits: usize) -> Arc<(usize, PMat)> {
        if let Some(m) = self.exact.read().expect("cache lock").as_ref() {
            if m.0 >= bits {
                return m.clone();
            }
        }
        let mut acc = PMat::identity(bits);
        for f in &self.factors {
            acc = acc.mul(&f.matrix(bits));
        }
        let m = Arc::new((bits, acc));
        *self.exact.write().expect("cache lock") = Some(m.clone());
        m
    }

    /// The word collapsed to a single f64 isometry (lossy for long words).
    pub fn to_mobius(&self) -> MobiusMap {
        if let Some(m) = self.fast() {
            return *m;
        }
        self.matrix(self.bits()).1.to_mobius().unwrap_or_else(MobiusMap::identity)
    }

    pub fn apply(&self, p: BoundaryPoint) -> BoundaryPoint {
        if let Some(m) = self.fast() {
            return m.apply(p);
        }
        let bits = self.bits();
        self.matrix(bits).1.apply(&PVec::from_point(p, bits)).to_point()
    }
}

/// Orientation-preserving circle homeomorphism, Möbius on each arc `[bᵢ, bᵢ₊₁)`.
#[derive(Clone, Debug)]
pub struct CircleMap {
    breakpoints: Vec<BoundaryPoint>,
    pieces: Vec<MobiusWord>,
}

/// One record of the serialized form: a breakpoint and the map on the arc that starts there.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PieceRecord {
    pub breakpoint: BoundaryPoint,
    pub map: MobiusMap,
}

impl CircleMap {
    pub fn identity() -> Self {
        Self::from_word(MobiusWord::identity())
    }

    pub fn from_mobius(m: MobiusMap) -> Self {
        Self::from_word(MobiusWord::from_mobius(m))
    }

    pub fn from_word(w: MobiusWord) -> Self {
        CircleMap { breakpoints: Vec::new(), pieces: vec![w] }
    }

    /// `pieces[i]` acts on the counterclockwise arc from `breakpoints[i]` to the next breakpoint.
    pub fn from_pieces(breakpoints: Vec<BoundaryPoint>, pieces: Vec<MobiusWord>) -> Result<Self> {
        if breakpoints.is_empty() {
            if pieces.len() != 1 {
                return Err(Error::InvalidInput("a map without breakpoints has exactly one piece".into()));
            }
        } else if pieces.len() != breakpoints.len() {
            return Err(Error::InvalidInput("one piece per breakpoint required".into()));
        }
        for w in breakpoints.windows(2) {
            if !(w[0].angle() < w[1].angle()) || w[0] == w[1] {
                return Err(Error::InvalidInput("breakpoints must be strictly increasing".into()));
            }
        }
        if breakpoints.len() > 1 && breakpoints[0] == breakpoints[breakpoints.len() - 1] {
            return Err(Error::InvalidInput("breakpoints must be distinct".into()));
        }
        Ok(CircleMap { breakpoints, pieces })
    }

    pub fn from_records(records: &[PieceRecord]) -> Result<Self> {
        let bps = records.iter().map(|r| r.breakpoint).collect();
        let words = records.iter().map(|r| MobiusWord::from_mobius(r.map)).collect();
        Self::from_pieces(bps, words)
    }

    pub fn records(&self) -> Vec<PieceRecord> {
        if self.breakpoints.is_empty() {
            return vec![PieceRecord { breakpoint: BoundaryPoint::from_angle(0.0), map: self.pieces[0].to_mobius() }];
        }
        self.breakpoints
            .iter()
            .zip(&self.pieces)
            .map(|(b, w)| PieceRecord { breakpoint: *b, map: w.to_mobius() })
            .collect()
    }

    pub fn breakpoints(&self) -> &[BoundaryPoint] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[MobiusWord] {
        &self.pieces
    }

    pub fn piece_map(&self, i: usize) -> MobiusMap {
        self.pieces[i].to_mobius()
    }

    pub fn max_budget(&self) -> f64 {
        self.pieces.iter().map(MobiusWord::budget).fold(0.0, f64::max)
    }

    /// Index of the piece acting at `p`; a point on a breakpoint uses the arc starting there.
    pub fn piece_index(&self, p: BoundaryPoint) -> usize {
        let n = self.breakpoints.len();
        if n == 0 {
            return 0;
        }
        let k = self.breakpoints.partition_point(|b| b.angle() <= p.angle());
        if k < n && self.breakpoints[k] == p {
            return k;
        }
        if k == n && self.breakpoints[0] == p {
            return 0;
        }
        if k == 0 {
            n - 1
        } else {
            k - 1
        }
    }

    pub fn eval(&self, p: BoundaryPoint) -> BoundaryPoint {
        self.pieces[self.piece_index(p)].apply(p)
    }

    /// Images of each breakpoint under the piece starting there.
    fn breakpoint_images(&self) -> Vec<BoundaryPoint> {
        self.breakpoints.iter().zip(&self.pieces).map(|(b, w)| w.apply(*b)).collect()
    }

    /// Preimage of `s`.
    pub fn preimage(&self, s: BoundaryPoint) -> BoundaryPoint {
        let n = self.breakpoints.len();
        if n == 0 {
            return self.pieces[0].inverse().apply(s);
        }
        let imgs = self.breakpoint_images();
        // The images partition the circle into the same cyclic arcs.
        let mut j = n - 1;
        for k in 0..n {
            let start = imgs[k];
            let end = imgs[(k + 1) % n];
            let len = start.ccw_to(end);
            let d = start.ccw_to(s);
            if d < len || n == 1 {
                j = k;
                break;
            }
        }
        self.pieces[j].inverse().apply(s)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &CircleMap) -> Result<CircleMap> {
        let mut bps: Vec<BoundaryPoint> = inner.breakpoints.clone();
        for b in &self.breakpoints {
            bps.push(inner.preimage(*b));
        }
        bps.sort_by(|a, b| a.angle().total_cmp(&b.angle()));
        let mut dedup: Vec<BoundaryPoint> = Vec::with_capacity(bps.len());
        for b in bps {
            if dedup.last() != Some(&b) {
                dedup.push(b);
            }
        }
        if dedup.len() > 1 && dedup[0] == dedup[dedup.len() - 1] {
            dedup.pop();
        }
        if dedup.is_empty() {
            return Ok(CircleMap::from_word(self.pieces[0].compose(&inner.pieces[0])));
        }
        let n = dedup.len();
        let mut pieces = Vec::with_capacity(n);
        for i in 0..n {
            let mid = dedup[i].ccw_midpoint(dedup[(i + 1) % n]);
            let mid = if n == 1 { dedup[0].rotated(std::f64::consts::PI) } else { mid };
            let j = inner.piece_index(mid);
            let k = self.piece_index(inner.pieces[j].apply(mid));
            pieces.push(self.pieces[k].compose(&inner.pieces[j]));
        }
        CircleMap::from_pieces(dedup, pieces)
    }

    pub fn inverse(&self) -> Result<CircleMap> {
        let n = self.breakpoints.len();
        if n == 0 {
            return Ok(CircleMap::from_word(self.pieces[0].inverse()));
        }
        let imgs = self.breakpoint_images();
        for k in 0..n {
            if n > 1 && imgs[k] == imgs[(k + 1) % n] {
                return Err(Error::CollapsedBreakpoints);
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| imgs[a].angle().total_cmp(&imgs[b].angle()));
        let bps = order.iter().map(|&k| imgs[k]).collect();
        let pieces = order.iter().map(|&k| self.pieces[k].inverse()).collect();
        CircleMap::from_pieces(bps, pieces)
    }

    /// `γ ∘ self`.
    pub fn post_compose(&self, gamma: &MobiusWord) -> CircleMap {
        CircleMap {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|w| gamma.compose(w)).collect(),
        }
    }

    /// Post-composes with the isometry sending the images of `1, i, −1` back to themselves.
    pub fn normalize_fix_three(&self) -> Result<CircleMap> {
        let targets = [0.0, 0.5 * std::f64::consts::PI, std::f64::consts::PI].map(BoundaryPoint::from_angle);
        let imgs = ImageSet::new(self, &targets);
        let gamma = match &imgs.kind {
            Kind::Fast(v) => {
                let src = [0, 1, 2].map(|k| BoundaryPoint::from_complex(v[k].0 / v[k].1));
                MobiusWord::from_mobius(mobius_from_three_pairs(src, targets)?)
            }
            Kind::Precise { vecs, bits, .. } => {
                let a = three_point_pmat(&vecs[0], &vecs[1], &vecs[2]);
                let t = targets.map(|p| PVec::from_point(p, *bits));
                let b = three_point_pmat(&t[0], &t[1], &t[2]);
                let budget = imgs.idx.iter().map(|&k| self.pieces[k].budget()).fold(0.0, f64::max);
                let mat = b.adjugate().mul(&a);
                MobiusWord::from_factors(vec![Factor::Exact(Arc::new(ExactMatrix { mat, budget }))])
            }
        };
        Ok(self.post_compose(&gamma))
    }

    /// Liouville value of the box spanned by the images of the corners of `q`.
    pub fn box_value(&self, q: &GeodesicBox) -> f64 {
        let [a, b, c, d] = q.corners();
        let imgs = ImageSet::new(self, &[a, b, c, d]);
        imgs.liouville_value()
    }

    /// Ratio `|h(x+t) − h(x)| / |h(x) − h(x−t)|` of chordal image distances.
    pub fn symmetric_ratio(&self, x: f64, t: f64) -> f64 {
        let pts = [x + t, x, x - t].map(BoundaryPoint::from_angle);
        let imgs = ImageSet::new(self, &pts);
        // e^{i(x+t)} − e^{ix} = 2i·sin(t/2)·e^{i(x+t/2)}, and symmetrically below.
        let s = (0.5 * t).sin();
        let up = Complex64::from_polar(2.0 * s, x + 0.5 * t + 0.5 * std::f64::consts::PI);
        let down = Complex64::from_polar(2.0 * s, x - 0.5 * t + 0.5 * std::f64::consts::PI);
        imgs.chord_ratio((0, 1, up), (1, 2, down), 2.0 * s.abs())
    }

    /// Checks continuity at breakpoints and preservation of cyclic order on `grid` points.
    pub fn check_invariants(&self, grid: usize, tol: f64) -> std::result::Result<(), String> {
        let n = self.breakpoints.len();
        for i in 0..n {
            let b = self.breakpoints[i];
            let prev = (i + n - 1) % n;
            let left = self.pieces[prev].apply(b);
            let right = self.pieces[i].apply(b);
            let gap = left.distance(right);
            if gap > tol {
                return Err(format!("discontinuity {gap:e} at breakpoint {}", b.angle()));
            }
        }
        let winding = self.winding(grid);
        if (winding - std::f64::consts::TAU).abs() > 1e-6 {
            return Err(format!("cyclic order broken: images wind {winding} radians"));
        }
        Ok(())
    }

    /// Total counterclockwise turning of the images of a uniform grid.
    fn winding(&self, grid: usize) -> f64 {
        let imgs: Vec<BoundaryPoint> = (0..grid)
            .map(|k| self.eval(BoundaryPoint::from_angle(std::f64::consts::TAU * (k as f64 + 0.5) / grid as f64)))
            .collect();
        (0..grid).map(|k| imgs[k].ccw_to(imgs[(k + 1) % grid])).sum()
    }
}

fn three_point_pmat(v1: &PVec, v2: &PVec, v3: &PVec) -> PMat {
    // v1 ↦ 0, v2 ↦ 1, v3 ↦ ∞
    let k0 = det(v2, v3);
    let k1 = det(v2, v1);
    PMat { a: &k0 * &v1.y, b: -&(&k0 * &v1.x), c: &k1 * &v3.y, d: -&(&k1 * &v3.x) }
}

enum Kind {
    Fast(Vec<(Complex64, Complex64)>),
    Precise { vecs: Vec<PVec>, dets: Vec<PComplex>, bits: usize },
}

/// Homogeneous images of a few points, with per-piece determinants for same-piece pairs.
struct ImageSet {
    pts: Vec<BoundaryPoint>,
    idx: Vec<usize>,
    /// Piece indices, with all identity pieces mapped to one key.
    pieces: Vec<usize>,
    kind: Kind,
}

impl ImageSet {
    fn new(h: &CircleMap, pts: &[BoundaryPoint]) -> ImageSet {
        // Identity pieces share one key so differences across them stay exact.
        let idx: Vec<usize> = pts.iter().map(|p| h.piece_index(*p)).collect();
        let pieces: Vec<usize> =
            idx.iter().map(|&k| if h.pieces[k].is_identity() { usize::MAX } else { k }).collect();
        let fast: Option<Vec<MobiusMap>> = idx.iter().map(|&k| h.pieces[k].fast().copied()).collect();
        let kind = match fast {
            Some(maps) => Kind::Fast(
                pts.iter()
                    .zip(&maps)
                    .map(|(p, m)| {
                        let z = p.to_complex();
                        (m.u() * z + m.v(), m.v().conj() * z + m.u().conj())
                    })
                    .collect(),
            ),
            None => {
                let bits = idx.iter().map(|&k| h.pieces[k].bits()).max().unwrap_or(128);
                let mats: Vec<Arc<(usize, PMat)>> = idx.iter().map(|&k| h.pieces[k].matrix(bits)).collect();
                let vecs = pts.iter().zip(&mats).map(|(p, m)| m.1.apply(&PVec::from_point(*p, bits))).collect();
                let dets = mats.iter().map(|m| m.1.det()).collect();
                Kind::Precise { vecs, dets, bits }
            }
        };
        ImageSet { pts: pts.to_vec(), idx, pieces, kind }
    }

    fn liouville_value(&self) -> f64 {
        let (a, b, c, d) = (0, 1, 2, 3);
        match &self.kind {
            Kind::Fast(v) => {
                let dt = |i: usize, j: usize| self.fast_det(v, i, j, None);
                let x = dt(a, b) * dt(c, d) / (dt(a, d) * dt(b, c));
                x.norm().ln_1p()
            }
            Kind::Precise { .. } => {
                let dt = |i: usize, j: usize| self.precise_det(i, j, None);
                let x = (&dt(a, b) * &dt(c, d)).div(&(&dt(a, d) * &dt(b, c)));
                x.abs_f64().ln_1p()
            }
        }
    }

    /// `|w_i − w_j| / |w_k − w_l|` for `(i, j, diff_ij)` and `(k, l, diff_kl)`, both domain
    /// differences having modulus `len`.
    fn chord_ratio(&self, num: (usize, usize, Complex64), den: (usize, usize, Complex64), len: f64) -> f64 {
        match &self.kind {
            Kind::Fast(v) => {
                let size = |(i, j, diff): (usize, usize, Complex64)| {
                    let top = if self.pieces[i] == self.pieces[j] { len } else { self.fast_det(v, i, j, Some(diff)).norm() };
                    top / (v[i].1.norm() * v[j].1.norm())
                };
                size(num) / size(den)
            }
            Kind::Precise { vecs, .. } => {
                let n = &self.precise_det(num.0, num.1, Some(num.2)) * &(&vecs[den.0].y * &vecs[den.1].y);
                let d = &self.precise_det(den.0, den.1, Some(den.2)) * &(&vecs[num.0].y * &vecs[num.1].y);
                n.div(&d).abs_f64()
            }
        }
    }

    fn fast_det(&self, v: &[(Complex64, Complex64)], i: usize, j: usize, diff: Option<Complex64>) -> Complex64 {
        if self.pieces[i] == self.pieces[j] {
            // det(M z̃ᵢ, M z̃ⱼ) = det(M)·(zᵢ − zⱼ); the f64 maps have unit determinant.
            diff.unwrap_or_else(|| chord(self.pts[i], self.pts[j]))
        } else {
            v[i].0 * v[j].1 - v[j].0 * v[i].1
        }
    }

    fn precise_det(&self, i: usize, j: usize, diff: Option<Complex64>) -> PComplex {
        let Kind::Precise { vecs, dets, bits } = &self.kind else { unreachable!() };
        if self.pieces[i] == self.pieces[j] {
            let d = diff.unwrap_or_else(|| chord(self.pts[i], self.pts[j]));
            &dets[i] * &PComplex::from_c64(d, *bits)
        } else {
            det(&vecs[i], &vecs[j])
        }
    }
}
