//! Finite measured laminations and continuous families of leaves.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouville::{BoundaryMode, GeodesicBox};
use crate::mobius::{
    cayley_from_disk, diameter_to, endpoints_interleave, geodesic_distance, BoundaryPoint, ExtendedReal, Geodesic,
    MobiusMap, PT_EPS,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub geodesic: Geodesic,
    pub weight: f64,
}

impl Leaf {
    pub fn new(p: f64, q: f64, weight: f64) -> Result<Self> {
        Ok(Leaf { geodesic: Geodesic::from_angles(p, q)?.canonical(), weight })
    }
}

/// Pairwise non-crossing weighted geodesics with positive weights.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Leaf>", into = "Vec<Leaf>")]
pub struct FiniteLamination {
    leaves: Vec<Leaf>,
}

impl TryFrom<Vec<Leaf>> for FiniteLamination {
    type Error = Error;
    fn try_from(v: Vec<Leaf>) -> Result<Self> {
        FiniteLamination::new(v)
    }
}

impl From<FiniteLamination> for Vec<Leaf> {
    fn from(l: FiniteLamination) -> Vec<Leaf> {
        l.leaves
    }
}

/// Transverse intersection test; shared endpoints do not count as crossing.
pub fn geodesics_cross(g1: Geodesic, g2: Geodesic) -> bool {
    endpoints_interleave(g1, g2)
}

/// Checks weights, then crossings, then duplicates, reporting every offending index.
pub fn validate_lamination(leaves: &[Leaf]) -> Result<()> {
    let bad: Vec<usize> = (0..leaves.len()).filter(|&i| !(leaves[i].weight > 0.0 && leaves[i].weight.is_finite())).collect();
    if !bad.is_empty() {
        return Err(Error::NonpositiveWeight { indices: bad });
    }
    let mut crossing = Vec::new();
    let mut duplicate = Vec::new();
    for i in 0..leaves.len() {
        for j in i + 1..leaves.len() {
            let (g, h) = (leaves[i].geodesic, leaves[j].geodesic);
            if geodesics_cross(g, h) {
                crossing.push((i, j));
            } else if g.has_endpoint(h.p) && g.has_endpoint(h.q) {
                duplicate.push((i, j));
            }
        }
    }
    if !crossing.is_empty() {
        return Err(Error::CrossingLeaves { pairs: crossing });
    }
    if !duplicate.is_empty() {
        return Err(Error::DuplicateLeaves { pairs: duplicate });
    }
    Ok(())
}

impl FiniteLamination {
    pub fn new(leaves: Vec<Leaf>) -> Result<Self> {
        let leaves: Vec<Leaf> =
            leaves.into_iter().map(|l| Leaf { geodesic: l.geodesic.canonical(), weight: l.weight }).collect();
        validate_lamination(&leaves)?;
        Ok(FiniteLamination { leaves })
    }

    pub fn empty() -> Self {
        FiniteLamination { leaves: Vec::new() }
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.leaves.iter().map(|l| l.weight).sum()
    }

    /// All weights multiplied by `t > 0`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::InvalidInput(format!("scale factor {t} must be positive")));
        }
        Ok(FiniteLamination {
            leaves: self.leaves.iter().map(|l| Leaf { geodesic: l.geodesic, weight: l.weight * t }).collect(),
        })
    }

    /// Distinct leaf endpoints sorted by angle.
    pub fn endpoints(&self) -> Vec<BoundaryPoint> {
        let mut e: Vec<BoundaryPoint> = self.leaves.iter().flat_map(|l| [l.geodesic.p, l.geodesic.q]).collect();
        e.sort_by(|a, b| a.angle().total_cmp(&b.angle()));
        e.dedup_by(|a, b| a == b);
        if e.len() > 1 && e[0] == e[e.len() - 1] {
            e.pop();
        }
        e
    }

    /// Leaves with endpoints moved by a circle homeomorphism `f`.
    pub fn map_endpoints(&self, f: impl Fn(BoundaryPoint) -> BoundaryPoint) -> Result<Self> {
        let leaves = self
            .leaves
            .iter()
            .map(|l| Ok(Leaf { geodesic: Geodesic::new(f(l.geodesic.p), f(l.geodesic.q))?, weight: l.weight }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(leaves)
    }

    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            p: f64,
            q: f64,
            weight: f64,
        }
        let mut leaves = Vec::new();
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        for (k, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| Error::InvalidInput(format!("record {}: {e}", k + 1)))?;
            if !(row.p < row.q) {
                return Err(Error::InvalidInput(format!("record {}: endpoints must satisfy p < q", k + 1)));
            }
            leaves.push(Leaf { geodesic: Geodesic::from_angles(row.p, row.q)?, weight: row.weight });
        }
        Self::new(leaves)
    }

    /// Reads `p,q,weight` records (angles in radians, `p < q`) and validates them.
    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)
            .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_csv_reader(f).map_err(|e| match e {
            Error::InvalidInput(m) => Error::Io { path: path.display().to_string(), message: m },
            other => other,
        })
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("p,q,weight\n");
        for l in &self.leaves {
            s.push_str(&format!("{},{},{}\n", l.geodesic.p.angle(), l.geodesic.q.angle(), l.weight));
        }
        s
    }
}

/// Mass of oriented atoms `(p, q)` with `p` in the first arc and `q` in the second.
pub fn lamination_box_mass(lam: &FiniteLamination, q: &GeodesicBox, mode: BoundaryMode) -> f64 {
    lam.leaves
        .iter()
        .filter(|l| q.contains(l.geodesic, mode) || q.contains(l.geodesic.reversed(), mode))
        .map(|l| l.weight)
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThurstonBounds {
    pub lower: f64,
    pub upper: f64,
}

pub const DEFAULT_NORM_SEED: u64 = 0x0074_7572_7374_6f6e;

pub fn thurston_norm_estimate(lam: &FiniteLamination, n_samples: usize) -> ThurstonBounds {
    thurston_norm_estimate_seeded(lam, n_samples, DEFAULT_NORM_SEED)
}

/// Unit arc starting on leaf `leaf` at arclength `s` along it, heading in direction `phi`.
#[derive(Clone, Copy, Debug)]
struct ArcSample {
    leaf: usize,
    s: f64,
    phi: f64,
}

fn arc_samples(lam: &FiniteLamination, normalizers: &[MobiusMap], n: usize, seed: u64) -> Vec<ArcSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = lam.len();
    (0..n)
        .map(|_| {
            let leaf = rng.random_range(0..k);
            let other = rng.random_range(0..k);
            let towards = rng.random_bool(0.5);
            let (u, v): (f64, f64) = (rng.random(), rng.random());
            if towards && other != leaf {
                if let Some((foot, dir)) = perpendicular_foot(normalizers[leaf], lam.leaves[other].geodesic) {
                    return ArcSample { leaf, s: foot + 0.2 * (u - 0.5), phi: dir + 0.6 * (v - 0.5) };
                }
            }
            ArcSample { leaf, s: 8.0 * u - 4.0, phi: TAU * v }
        })
        .collect()
}

/// Arclength of the foot of the common perpendicular from the normalized leaf to `g`, with the heading towards `g`.
fn perpendicular_foot(normalizer: MobiusMap, g: Geodesic) -> Option<(f64, f64)> {
    let inv = normalizer.inverse();
    let x = |p: BoundaryPoint| match cayley_from_disk(inv.apply(p)) {
        ExtendedReal::Finite(x) if x != 0.0 => Some(x),
        _ => None,
    };
    let (u, v) = (x(g.p)?, x(g.q)?);
    if u * v <= 0.0 {
        return None;
    }
    // Half-plane leaf (0, ∞) is the disk diameter; g sits on the side of the sign of u.
    let s = 0.5 * (u.abs() * v.abs()).ln();
    // Cayley sends positive reals to the lower half of the disk.
    let dir = if u > 0.0 { 1.5 * PI } else { 0.5 * PI };
    Some((s, dir))
}

fn sample_endpoints(normalizer: &MobiusMap, a: ArcSample) -> (Complex64, Complex64) {
    let r = 0.5f64.tanh();
    let (ch, sh) = ((0.5 * a.s).cosh(), (0.5 * a.s).sinh());
    let along = |z: Complex64| (z * ch + sh) / (z * sh + ch);
    let start = normalizer.apply_complex(along(Complex64::new(0.0, 0.0)));
    let end = normalizer.apply_complex(along(Complex64::from_polar(r, a.phi)));
    (start, end)
}

/// Sampled lower bound and chain-bound upper bound for the Thurston norm.
pub fn thurston_norm_estimate_seeded(lam: &FiniteLamination, n_samples: usize, seed: u64) -> ThurstonBounds {
    if lam.is_empty() {
        return ThurstonBounds { lower: 0.0, upper: 0.0 };
    }
    let normalizers: Vec<MobiusMap> =
        lam.leaves.iter().map(|l| diameter_to(l.geodesic).expect("valid leaf")).collect();
    let sides: Vec<MobiusMap> = normalizers.iter().map(MobiusMap::inverse).collect();
    let samples = arc_samples(lam, &normalizers, n_samples, seed);
    let best = samples
        .par_iter()
        .map(|a| {
            let (z0, z1) = sample_endpoints(&normalizers[a.leaf], *a);
            let mut mass = lam.leaves[a.leaf].weight;
            for (k, side) in sides.iter().enumerate() {
                if k == a.leaf {
                    continue;
                }
                let (y0, y1) = (side.apply_complex(z0).im, side.apply_complex(z1).im);
                if y0 * y1 < 0.0 {
                    mass += lam.leaves[k].weight;
                }
            }
            mass
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);
    ThurstonBounds { lower: best, upper: chain_upper_bound(lam).max(best) }
}

/// Leaf `k` separates leaves `i` and `j` when they lie on opposite sides of it.
fn separates(k: Geodesic, i: Geodesic, j: Geodesic) -> bool {
    let side = |g: Geodesic| {
        let p = if k.has_endpoint(g.p) { g.q } else { g.p };
        k.left_of(p)
    };
    !(k.has_endpoint(i.p) && k.has_endpoint(i.q)) && side(i) != side(j)
}

/// Any unit arc crosses a chain between two leaves at distance at most one.
fn chain_upper_bound(lam: &FiniteLamination) -> f64 {
    let l = &lam.leaves;
    let mut best = l.iter().map(|x| x.weight).fold(0.0, f64::max);
    for i in 0..l.len() {
        for j in i + 1..l.len() {
            let (gi, gj) = (l[i].geodesic, l[j].geodesic);
            let d = geodesic_distance(gi, gj).unwrap_or(0.0);
            if d > 1.0 {
                continue;
            }
            let between: f64 = (0..l.len())
                .filter(|&k| k != i && k != j && separates(l[k].geodesic, gi, gj))
                .map(|k| l[k].weight)
                .sum();
            best = best.max(l[i].weight + l[j].weight + between);
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineCurve {
    pub offset: f64,
    pub slope: f64,
}

impl AffineCurve {
    pub fn at(&self, s: f64) -> f64 {
        self.offset + self.slope * s
    }
}

/// Density value on parameters up to `until`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityStep {
    pub until: f64,
    pub value: f64,
}

/// Geodesics `s ↦ (p(s), q(s))` on `[start, end]` with a piecewise-constant density (uniform when empty).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub start: f64,
    pub end: f64,
    pub p: AffineCurve,
    pub q: AffineCurve,
    #[serde(default)]
    pub density: Vec<DensityStep>,
}

impl FamilySpec {
    /// Geodesics `(−s, s)` for `s ∈ [start, end]` with unit density.
    pub fn nested(start: f64, end: f64) -> Self {
        FamilySpec {
            start,
            end,
            p: AffineCurve { offset: 0.0, slope: -1.0 },
            q: AffineCurve { offset: 0.0, slope: 1.0 },
            density: Vec::new(),
        }
    }

    pub fn geodesic_at(&self, s: f64) -> Result<Geodesic> {
        Ok(Geodesic::from_angles(self.p.at(s), self.q.at(s))?.canonical())
    }

    /// Breakpoints of the density restricted to `[start, end]`, with the value on each piece.
    fn pieces(&self) -> Vec<(f64, f64, f64)> {
        if self.density.is_empty() {
            return vec![(self.start, self.end, 1.0)];
        }
        let mut out = Vec::new();
        let mut lo = self.start;
        for step in &self.density {
            let hi = step.until.min(self.end);
            if hi > lo {
                out.push((lo, hi, step.value));
                lo = hi;
            }
        }
        out
    }

    /// `∫ w` over `[a, b] ∩ [start, end]`.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        self.pieces().iter().map(|&(lo, hi, w)| w * (b.min(hi) - a.max(lo)).max(0.0)).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass_between(self.start, self.end)
    }

    /// Smallest parameter whose cumulative mass reaches `y`.
    pub fn inverse_mass(&self, y: f64) -> f64 {
        let mut acc = 0.0;
        for (lo, hi, w) in self.pieces() {
            let m = w * (hi - lo);
            if w > 0.0 && acc + m >= y {
                return lo + (y - acc) / w;
            }
            acc += m;
        }
        self.end
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start < self.end) || !self.start.is_finite() || !self.end.is_finite() {
            return Err(Error::InvalidFamily("parameter interval must satisfy start < end".into()));
        }
        let mut prev = f64::NEG_INFINITY;
        for s in &self.density {
            if !(s.value >= 0.0) || !(s.until > prev) {
                return Err(Error::InvalidFamily("density steps must be increasing with nonnegative values".into()));
            }
            prev = s.until;
        }
        if !self.density.is_empty() && prev < self.end {
            return Err(Error::InvalidFamily("density does not cover the parameter interval".into()));
        }
        if !(self.total_mass() > 0.0) {
            return Err(Error::InvalidFamily("family has zero mass".into()));
        }
        // 46 parameters give 1035 pairs.
        let grid: Vec<f64> = (0..46).map(|k| self.start + (self.end - self.start) * k as f64 / 45.0).collect();
        let geos = grid
            .iter()
            .map(|&s| self.geodesic_at(s).map_err(|_| Error::CrossingFamily(s, s)))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..geos.len() {
            for j in i + 1..geos.len() {
                let (g, h) = (geos[i], geos[j]);
                if geodesics_cross(g, h) || (g.has_endpoint(h.p) && g.has_endpoint(h.q)) {
                    return Err(Error::CrossingFamily(grid[i], grid[j]));
                }
            }
        }
        Ok(())
    }
}

/// `n` leaves at the mass-medians of equal-mass parameter bins, each carrying its bin's mass.
pub fn discretize_family(spec: &FamilySpec, n: usize) -> Result<FiniteLamination> {
    if n == 0 {
        return Err(Error::InvalidInput("at least one bin is required".into()));
    }
    spec.validate()?;
    let total = spec.total_mass();
    let w = total / n as f64;
    let leaves = (0..n)
        .map(|k| {
            let s = spec.inverse_mass((k as f64 + 0.5) * w);
            Ok(Leaf { geodesic: spec.geodesic_at(s)?, weight: w })
        })
        .collect::<Result<Vec<_>>>()?;
    FiniteLamination::new(leaves).map_err(|_| Error::CrossingFamily(spec.start, spec.end))
}

/// Exact mass of the family's geodesics inside `q`, integrating the density between critical parameters.
pub fn family_box_mass(spec: &FamilySpec, q: &GeodesicBox) -> f64 {
    let mut cuts = vec![spec.start, spec.end];
    for curve in [spec.p, spec.q] {
        if curve.slope == 0.0 {
            continue;
        }
        let (v0, v1) = (curve.at(spec.start), curve.at(spec.end));
        let (lo, hi) = (v0.min(v1), v0.max(v1));
        for corner in q.angles() {
            let k0 = ((lo - corner) / TAU).floor() as i64;
            let k1 = ((hi - corner) / TAU).ceil() as i64;
            for k in k0..=k1 {
                let s = (corner + TAU * k as f64 - curve.offset) / curve.slope;
                if s > spec.start && s < spec.end {
                    cuts.push(s);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    let mut mass = 0.0;
    for w in cuts.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        if let Ok(g) = spec.geodesic_at(mid) {
            if q.contains(g, BoundaryMode::Include) || q.contains(g.reversed(), BoundaryMode::Include) {
                mass += spec.mass_between(w[0], w[1]);
            }
        }
    }
    mass
}

/// Which way corners move when they have to leave a leaf endpoint.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenericDirection {
    #[default]
    Shrink,
    Grow,
}

const GENERIC_STEPS: usize = 16;

pub fn generic_box(q: &GeodesicBox, lam: &FiniteLamination, max_shift: f64) -> Result<GeodesicBox> {
    generic_box_with(q, lam, max_shift, GenericDirection::Shrink)
}

/// Moves corners lying near leaf endpoints by at most `max_shift` so that no endpoint sits on the boundary.
pub fn generic_box_with(
    q: &GeodesicBox,
    lam: &FiniteLamination,
    max_shift: f64,
    direction: GenericDirection,
) -> Result<GeodesicBox> {
    if !(max_shift > 0.0) {
        return Err(Error::InvalidInput("max_shift must be positive".into()));
    }
    let ends = lam.endpoints();
    let clearance = (max_shift / (4.0 * GENERIC_STEPS as f64)).max(2.0 * PT_EPS);
    let clear = |p: BoundaryPoint| ends.iter().all(|e| e.distance(p) >= clearance);
    let mut corners = q.corners();
    for (k, corner) in corners.iter_mut().enumerate() {
        if clear(*corner) {
            continue;
        }
        // Starts of arcs move counterclockwise to shrink, ends move clockwise.
        let inward = if k % 2 == 0 { 1.0 } else { -1.0 };
        let sign = match direction {
            GenericDirection::Shrink => inward,
            GenericDirection::Grow => -inward,
        };
        let moved = (1..=GENERIC_STEPS)
            .map(|j| corner.rotated(sign * max_shift * j as f64 / GENERIC_STEPS as f64))
            .find(|p| clear(*p))
            .ok_or(Error::CannotSeparate { corner: k, max_shift })?;
        *corner = moved;
    }
    let [a, b, c, d] = corners;
    GeodesicBox::new(a, b, c, d)
}
