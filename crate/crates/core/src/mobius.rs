//! Disk isometries acting on the boundary circle.
//!
//! Everything lives in the unit disk. The upper half-plane only enters through
//! the fixed Cayley convention `C(z) = (z - i)/(z + i)`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angular resolution below which two boundary points are the same point.
pub const PT_EPS: f64 = 1e-12;

/// A point `e^{iθ}` of the circle at infinity, stored as `θ ∈ [0, 2π)`.
#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct BoundaryPoint {
    angle: f64,
}

impl BoundaryPoint {
    pub fn from_angle(theta: f64) -> Self {
        assert!(theta.is_finite(), "boundary angle must be finite");
        let mut angle = theta.rem_euclid(TAU);
        if angle >= TAU {
            angle = 0.0;
        }
        BoundaryPoint { angle }
    }

    /// Projects a nonzero complex number radially onto the circle.
    pub fn from_complex(z: Complex64) -> Self {
        Self::from_angle(z.im.atan2(z.re))
    }

    pub fn angle(self) -> f64 {
        self.angle
    }

    pub fn to_complex(self) -> Complex64 {
        let (s, c) = self.angle.sin_cos();
        Complex64::new(c, s)
    }

    /// Counterclockwise angular distance from `self` to `to`, in `[0, 2π)`.
    pub fn ccw_to(self, to: BoundaryPoint) -> f64 {
        let d = to.angle - self.angle;
        if d < 0.0 {
            d + TAU
        } else {
            d
        }
    }

    pub fn distance(self, other: BoundaryPoint) -> f64 {
        let d = self.ccw_to(other);
        d.min(TAU - d)
    }

    /// Point reached after turning counterclockwise by `delta` radians.
    pub fn rotated(self, delta: f64) -> Self {
        Self::from_angle(self.angle + delta)
    }

    /// Midpoint of the counterclockwise arc from `self` to `to`.
    pub fn ccw_midpoint(self, to: BoundaryPoint) -> Self {
        self.rotated(0.5 * self.ccw_to(to))
    }
}

impl PartialEq for BoundaryPoint {
    fn eq(&self, other: &Self) -> bool {
        self.distance(*other) < PT_EPS
    }
}

impl fmt::Debug for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "θ={}", self.angle)
    }
}

impl From<f64> for BoundaryPoint {
    fn from(theta: f64) -> Self {
        Self::from_angle(theta)
    }
}

impl From<BoundaryPoint> for f64 {
    fn from(p: BoundaryPoint) -> f64 {
        p.angle
    }
}

/// `e^{iα} − e^{iβ}` without cancellation: `2i·sin((α−β)/2)·e^{i(α+β)/2}`.
pub fn chord(p: BoundaryPoint, q: BoundaryPoint) -> Complex64 {
    chord_angles(p.angle, q.angle)
}

pub(crate) fn chord_angles(alpha: f64, beta: f64) -> Complex64 {
    let s = (0.5 * (alpha - beta)).sin();
    let (ms, mc) = (0.5 * (alpha + beta)).sin_cos();
    // 2i·s·(mc + i·ms)
    Complex64::new(-2.0 * s * ms, 2.0 * s * mc)
}

/// True when `a, b, c` are distinct and met in this order going counterclockwise from `a`.
pub fn is_ccw(a: BoundaryPoint, b: BoundaryPoint, c: BoundaryPoint) -> bool {
    let ab = a.ccw_to(b);
    let ac = a.ccw_to(c);
    a != b && b != c && a != c && ab < ac
}

/// Oriented geodesic given by its ideal endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geodesic {
    pub p: BoundaryPoint,
    pub q: BoundaryPoint,
}

impl Geodesic {
    pub fn new(p: BoundaryPoint, q: BoundaryPoint) -> Result<Self> {
        if p == q {
            return Err(Error::InvalidAxis);
        }
        Ok(Geodesic { p, q })
    }

    pub fn from_angles(p: f64, q: f64) -> Result<Self> {
        Self::new(BoundaryPoint::from_angle(p), BoundaryPoint::from_angle(q))
    }

    pub fn reversed(self) -> Self {
        Geodesic { p: self.q, q: self.p }
    }

    /// Unoriented form with `p.angle < q.angle`.
    pub fn canonical(self) -> Self {
        if self.p.angle <= self.q.angle {
            self
        } else {
            self.reversed()
        }
    }

    pub fn has_endpoint(self, x: BoundaryPoint) -> bool {
        self.p == x || self.q == x
    }

    /// Whether `x` lies strictly inside the counterclockwise arc from `p` to `q`.
    pub fn left_of(self, x: BoundaryPoint) -> bool {
        let span = self.p.ccw_to(self.q);
        let d = self.p.ccw_to(x);
        d > 0.0 && d < span
    }

    pub fn image(self, m: &MobiusMap) -> Self {
        Geodesic { p: m.apply(self.p), q: m.apply(self.q) }
    }
}

/// A point of `ℝ ∪ {∞}`, the boundary of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinity,
}

/// `C(z) = (z − i)/(z + i)`, so `C(0) = −1`, `C(∞) = 1`, `C(1) = −i`, `C(−1) = i`.
pub fn cayley_to_disk(z: ExtendedReal) -> BoundaryPoint {
    match z {
        ExtendedReal::Infinity => BoundaryPoint::from_angle(0.0),
        // arg((x − i)/(x + i)) = −2·atan2(1, x)
        ExtendedReal::Finite(x) => BoundaryPoint::from_angle(TAU - 2.0 * 1f64.atan2(x)),
    }
}

pub fn cayley_from_disk(p: BoundaryPoint) -> ExtendedReal {
    if p.angle == 0.0 {
        return ExtendedReal::Infinity;
    }
    let (s, c) = (0.5 * p.angle).sin_cos();
    ExtendedReal::Finite(-c / s)
}

pub fn cayley(x: f64) -> BoundaryPoint {
    cayley_to_disk(ExtendedReal::Finite(x))
}

/// Orientation-preserving isometry `z ↦ (uz + v)/(v̄z + ū)` with `|u|² − |v|² = 1`.
#[derive(Clone, Copy, Debug)]
pub struct MobiusMap {
    u: Complex64,
    v: Complex64,
}

impl MobiusMap {
    pub fn identity() -> Self {
        MobiusMap { u: Complex64::new(1.0, 0.0), v: Complex64::new(0.0, 0.0) }
    }

    /// Rotation by `phi` radians.
    pub fn rotation(phi: f64) -> Self {
        MobiusMap { u: Complex64::from_polar(1.0, 0.5 * phi), v: Complex64::new(0.0, 0.0) }
    }

    /// Builds from `(u, v)` after rescaling to unit determinant.
    pub fn from_uv(u: Complex64, v: Complex64) -> Result<Self> {
        let det = u.norm_sqr() - v.norm_sqr();
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::DegenerateConfiguration(format!(
                "matrix with |u|^2-|v|^2 = {det} does not preserve the disk"
            )));
        }
        let s = det.sqrt();
        Ok(MobiusMap { u: u / s, v: v / s })
    }

    /// For `(u, v)` already of unit determinant up to rounding. Rescaling by the computed `|u|² − |v|²`
    /// would cost `|u|²·ε` of relative accuracy for maps that move the origin far.
    pub(crate) fn from_unit_uv(u: Complex64, v: Complex64) -> Result<Self> {
        let det = u.norm_sqr() - v.norm_sqr();
        if !det.is_finite() || (det - 1.0).abs() > 1e-6 * u.norm_sqr().max(1.0) {
            return Self::from_uv(u, v);
        }
        Ok(MobiusMap { u, v })
    }

    /// Projects a matrix already scaled to unit determinant onto the `SU(1,1)` form.
    pub(crate) fn from_unit_matrix(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        Self::from_unit_uv(0.5 * (a + d.conj()), 0.5 * (b + c.conj()))
    }

    /// Projects an `SL(2,ℂ)` matrix that preserves the disk onto the `SU(1,1)` form.
    pub(crate) fn from_matrix(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        let s = det.sqrt();
        if s.norm() == 0.0 || !s.is_finite() {
            return Err(Error::DegenerateConfiguration("singular matrix".into()));
        }
        let (a, b, c, d) = (a / s, b / s, c / s, d / s);
        Self::from_unit_uv(0.5 * (a + d.conj()), 0.5 * (b + c.conj()))
    }

    pub fn u(&self) -> Complex64 {
        self.u
    }

    pub fn v(&self) -> Complex64 {
        self.v
    }

    pub fn det(&self) -> f64 {
        self.u.norm_sqr() - self.v.norm_sqr()
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.u.re
    }

    /// Hyperbolic translation length, zero for elliptic or parabolic maps.
    pub fn translation_length(&self) -> f64 {
        let t = self.u.re.abs();
        if t <= 1.0 {
            0.0
        } else {
            2.0 * t.acosh()
        }
    }

    pub fn apply_complex(&self, z: Complex64) -> Complex64 {
        (self.u * z + self.v) / (self.v.conj() * z + self.u.conj())
    }

    pub fn apply(&self, p: BoundaryPoint) -> BoundaryPoint {
        BoundaryPoint::from_complex(self.apply_complex(p.to_complex()))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusMap) -> MobiusMap {
        MobiusMap {
            u: self.u * other.u + self.v * other.v.conj(),
            v: self.u * other.v + self.v * other.u.conj(),
        }
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap { u: self.u.conj(), v: -self.v }
    }

    /// Matrix entries `[[u, v], [v̄, ū]]` with the sign fixed so the first nonzero entry has positive real part.
    pub fn normalized_entries(&self) -> [Complex64; 4] {
        let flip = self.u.re < 0.0 || (self.u.re == 0.0 && self.u.im < 0.0);
        let s = if flip { -1.0 } else { 1.0 };
        let (u, v) = (self.u * s, self.v * s);
        [u, v, v.conj(), u.conj()]
    }

    /// Largest entrywise distance to `other`, minimized over the global sign.
    pub fn distance_up_to_sign(&self, other: &MobiusMap) -> f64 {
        let d = |s: f64| (self.u - other.u * s).norm().max((self.v - other.v * s).norm());
        d(1.0).min(d(-1.0))
    }
}

impl Serialize for MobiusMap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let e = self.normalized_entries();
        let flat = [e[0].re, e[0].im, e[1].re, e[1].im, e[2].re, e[2].im, e[3].re, e[3].im];
        flat.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MobiusMap {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let f = <[f64; 8]>::deserialize(deserializer)?;
        let a = Complex64::new(f[0], f[1]);
        let b = Complex64::new(f[2], f[3]);
        let c = Complex64::new(f[4], f[5]);
        let d = Complex64::new(f[6], f[7]);
        if (c - b.conj()).norm() > 1e-9 || (d - a.conj()).norm() > 1e-9 {
            return Err(serde::de::Error::custom("matrix is not of the form [[u, v], [conj v, conj u]]"));
        }
        let det = a.norm_sqr() - b.norm_sqr();
        if (det - 1.0).abs() > 1e-9 {
            return Err(serde::de::Error::custom(format!("determinant {det} is not 1")));
        }
        MobiusMap::from_uv(a, b).map_err(serde::de::Error::custom)
    }
}

/// Cross-ratio `(c−a)(d−b) / ((d−a)(c−b))` of four boundary points.
pub fn cross_ratio(a: BoundaryPoint, b: BoundaryPoint, c: BoundaryPoint, d: BoundaryPoint) -> Result<f64> {
    let den1 = chord(d, a);
    let den2 = chord(c, b);
    if den1.norm() < PT_EPS || den2.norm() < PT_EPS {
        return Err(Error::DegenerateConfiguration("cross-ratio denominator vanishes".into()));
    }
    let z = chord(c, a) * chord(d, b) / (den1 * den2);
    debug_assert!(z.im.abs() <= 1e-10 * z.norm().max(1.0), "cross-ratio residue {}", z.im);
    Ok(z.re)
}

/// Which endpoint of an axis is attracting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Endpoint {
    P,
    Q,
}

/// Translation of length `m` along `axis` towards the selected endpoint.
pub fn hyperbolic_translation(axis: Geodesic, length: f64, attracting: Endpoint) -> Result<MobiusMap> {
    if axis.p == axis.q {
        return Err(Error::InvalidAxis);
    }
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidInput(format!("translation length {length} must be positive")));
    }
    let (rep, att) = match attracting {
        Endpoint::Q => (axis.p, axis.q),
        Endpoint::P => (axis.q, axis.p),
    };
    Ok(translation_towards(rep, att, length))
}

/// Eigen-decomposition form with eigenvector `q` for `e^{m/2}` and `p` for `e^{-m/2}`.
pub(crate) fn translation_towards(rep: BoundaryPoint, att: BoundaryPoint, length: f64) -> MobiusMap {
    let p = rep.to_complex();
    let q = att.to_complex();
    let lam = (0.5 * length).exp();
    let inv = 1.0 / lam;
    let qp = chord(att, rep);
    let u = (q * lam - p * inv) / qp;
    let v = p * q * (inv - lam) / qp;
    MobiusMap::from_unit_uv(u, v).expect("translation matrix preserves the disk")
}

fn three_point_matrix(z: [Complex64; 3]) -> [Complex64; 4] {
    // z0 ↦ 0, z1 ↦ 1, z2 ↦ ∞
    let k0 = z[1] - z[2];
    let k1 = z[1] - z[0];
    [k0, -z[0] * k0, k1, -z[2] * k1]
}

/// The unique isometry with `src[k] ↦ dst[k]`.
pub fn mobius_from_three_pairs(src: [BoundaryPoint; 3], dst: [BoundaryPoint; 3]) -> Result<MobiusMap> {
    for t in [&src, &dst] {
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(Error::DegenerateConfiguration("repeated point in triple".into()));
        }
    }
    if is_ccw(src[0], src[1], src[2]) != is_ccw(dst[0], dst[1], dst[2]) {
        return Err(Error::OrientationMismatch);
    }
    let a = three_point_matrix(src.map(|p| p.to_complex()));
    let b = three_point_matrix(dst.map(|p| p.to_complex()));
    // B⁻¹ ∘ A with B⁻¹ ∝ adj(B)
    let (ba, bb, bc, bd) = (b[3], -b[1], -b[2], b[0]);
    MobiusMap::from_matrix(
        ba * a[0] + bb * a[2],
        ba * a[1] + bb * a[3],
        bc * a[0] + bd * a[2],
        bc * a[1] + bd * a[3],
    )
}

/// Isometry taking the diameter from `−1` to `1` onto `(g.p, g.q)`.
pub fn diameter_to(g: Geodesic) -> Result<MobiusMap> {
    let src = [BoundaryPoint::from_angle(PI), BoundaryPoint::from_angle(1.5 * PI), BoundaryPoint::from_angle(0.0)];
    mobius_from_three_pairs(src, [g.p, g.p.ccw_midpoint(g.q), g.q])
}

/// Whether the endpoints of `g1` and `g2` interleave.
pub fn endpoints_interleave(g1: Geodesic, g2: Geodesic) -> bool {
    if g1.has_endpoint(g2.p) || g1.has_endpoint(g2.q) {
        return false;
    }
    g1.left_of(g2.p) != g1.left_of(g2.q)
}

/// Hyperbolic distance between two disjoint geodesics.
pub fn geodesic_distance(g1: Geodesic, g2: Geodesic) -> Result<f64> {
    if g1.has_endpoint(g2.p) || g1.has_endpoint(g2.q) {
        return Err(Error::SharedEndpoint);
    }
    if endpoints_interleave(g1, g2) {
        return Err(Error::GeodesicsCross);
    }
    // Send g1 to the half-plane geodesic (0, ∞), i.e. the disk diameter from −1 to 1.
    let n = diameter_to(g1)?.inverse();
    let to_real = |p: BoundaryPoint| match cayley_from_disk(n.apply(p)) {
        ExtendedReal::Finite(x) => Ok(x.abs()),
        ExtendedReal::Infinity => Err(Error::SharedEndpoint),
    };
    let (x, y) = (to_real(g2.p)?, to_real(g2.q)?);
    let (u, v) = if x < y { (x, y) } else { (y, x) };
    if !(u > 0.0) || v - u <= 0.0 {
        return Err(Error::SharedEndpoint);
    }
    Ok(((v + u) / (v - u)).acosh())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bp(t: f64) -> BoundaryPoint {
        BoundaryPoint::from_angle(t)
    }

    #[test]
    fn angles_are_reduced() {
        assert_eq!(bp(-0.5).angle(), TAU - 0.5);
        assert!((bp(7.0).angle() - (7.0 - TAU)).abs() < 1e-15);
        assert_eq!(bp(TAU).angle(), 0.0);
        assert!(bp(0.0) == bp(TAU - 1e-13));
        assert!(bp(0.0) != bp(1e-11));
    }

    #[test]
    fn chord_matches_direct_difference() {
        for &(a, b) in &[(0.3, 2.0), (5.9, 0.1), (1.0, 1.0 + 1e-9)] {
            let direct = bp(a).to_complex() - bp(b).to_complex();
            assert!((chord(bp(a), bp(b)) - direct).norm() < 1e-15);
        }
    }

    #[test]
    fn cross_ratio_of_quarter_points_is_two() {
        let cr = cross_ratio(bp(0.0), bp(PI / 2.0), bp(PI), bp(1.5 * PI)).unwrap();
        // (−1−1)(−i−i)/((−i−1)(−1−i)) = 4i/(2i) = 2
        assert!((cr - 2.0).abs() < 1e-15);
        assert_eq!(cross_ratio(bp(0.3), bp(0.3), bp(2.0), bp(4.0)).unwrap(), 1.0);
        assert!(cross_ratio(bp(0.3), bp(1.0), bp(2.0), bp(0.3)).is_err());
    }

    #[test]
    fn cayley_convention() {
        assert!((cayley(0.0).angle() - PI).abs() < 1e-15);
        assert_eq!(cayley_to_disk(ExtendedReal::Infinity).angle(), 0.0);
        assert!((cayley(1.0).angle() - 1.5 * PI).abs() < 1e-15);
        assert!((cayley(-1.0).angle() - 0.5 * PI).abs() < 1e-15);
        let z = Complex64::new(2.5, 0.0);
        let direct = (z - Complex64::i()) / (z + Complex64::i());
        assert!((cayley(2.5).to_complex() - direct).norm() < 1e-15);
        match cayley_from_disk(cayley(-3.25)) {
            ExtendedReal::Finite(x) => assert!((x + 3.25).abs() < 1e-13),
            ExtendedReal::Infinity => panic!(),
        }
    }

    #[test]
    fn translation_along_half_plane_axis_is_dilation() {
        let axis = Geodesic::new(cayley(0.0), cayley_to_disk(ExtendedReal::Infinity)).unwrap();
        let m = 1.3;
        let t = hyperbolic_translation(axis, m, Endpoint::Q).unwrap();
        for x in [-2.0, -0.5, 0.7, 3.0] {
            let expect = cayley(m.exp() * x);
            assert!(t.apply(cayley(x)).distance(expect) < 1e-13);
        }
        assert!((t.trace().abs() - 2.0 * (m / 2.0).cosh()).abs() < 1e-12);
        assert!((t.translation_length() - m).abs() < 1e-12);
        assert!(t.apply(axis.p) == axis.p);
    }

    #[test]
    fn translation_trace_for_half_length() {
        let axis = Geodesic::from_angles(0.4, 2.9).unwrap();
        let t = hyperbolic_translation(axis, 0.5, Endpoint::P).unwrap();
        assert!((t.trace().abs() - 2.062_826_199_759_146_3).abs() < 1e-10);
    }

    #[test]
    fn tiny_translation_is_near_identity() {
        let t = hyperbolic_translation(Geodesic::from_angles(1.0, 4.0).unwrap(), 1e-9, Endpoint::Q).unwrap();
        assert!(t.distance_up_to_sign(&MobiusMap::identity()) < 1e-8);
    }

    #[test]
    fn three_pairs_identity_and_errors() {
        let t = [bp(0.0), bp(PI / 2.0), bp(PI)];
        let m = mobius_from_three_pairs(t, t).unwrap();
        assert!(m.distance_up_to_sign(&MobiusMap::identity()) < 1e-14);
        let rev = [bp(PI), bp(PI / 2.0), bp(0.0)];
        assert_eq!(mobius_from_three_pairs(t, rev).unwrap_err(), Error::OrientationMismatch);
    }

    #[test]
    fn distance_to_unit_interval_geodesic() {
        let g1 = Geodesic::new(cayley(0.0), cayley_to_disk(ExtendedReal::Infinity)).unwrap();
        let g2 = Geodesic::new(cayley(1.0), cayley(2.0)).unwrap();
        assert!((geodesic_distance(g1, g2).unwrap() - 3f64.acosh()).abs() < 1e-12);
        assert_eq!(
            geodesic_distance(g1, Geodesic::new(cayley(-1.0), cayley(2.0)).unwrap()),
            Err(Error::GeodesicsCross)
        );
        assert_eq!(geodesic_distance(g1, Geodesic::new(cayley(0.0), cayley(2.0)).unwrap()), Err(Error::SharedEndpoint));
    }

    #[test]
    fn serialization_round_trip_fixes_sign() {
        let m = hyperbolic_translation(Geodesic::from_angles(1.0, 4.0).unwrap(), 2.0, Endpoint::Q)
            .unwrap()
            .compose(&MobiusMap::rotation(2.5));
        let neg = MobiusMap { u: -m.u, v: -m.v };
        let s1 = serde_json::to_string(&m).unwrap();
        let s2 = serde_json::to_string(&neg).unwrap();
        assert_eq!(s1, s2);
        let back: MobiusMap = serde_json::from_str(&s1).unwrap();
        assert!(back.distance_up_to_sign(&m) < 1e-14);
        assert_eq!(serde_json::to_string(&bp(1.25)).unwrap(), "1.25");
    }

    #[test]
    fn thin_axis_translation_keeps_its_trace() {
        // Entries near 10³ while the trace stays near 2.4.
        let t = translation_towards(bp(5.017908174987888), bp(5.019362631571602), 1.3393691940394614);
        assert!(t.u().norm() > 500.0);
        assert!((t.trace() - 2.0 * (0.5 * 1.3393691940394614f64).cosh()).abs() < 1e-12);
        let back = t.compose(&t.inverse());
        assert!(back.distance_up_to_sign(&MobiusMap::identity()) < 1e-9);
    }
}
