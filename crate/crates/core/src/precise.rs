//! Extended-precision complex arithmetic on homogeneous coordinates.
//!
//! Long earthquake words push boundary images within `e^{-t·m}` of leaf
//! endpoints, far below f64 resolution. Values are therefore computed from
//! 2×2 determinants of homogeneous vectors carried at a precision chosen from
//! the word's translation budget.

use std::ops::{Add, Mul, Neg, Sub};

use dashu_float::{round::mode::HalfEven, FBig};
use num_complex::Complex64;

use crate::mobius::{BoundaryPoint, MobiusMap};

pub(crate) type Real = FBig<HalfEven, 2>;

/// Bits needed to resolve a word whose matrix entries grow like `e^{budget/2}`.
pub(crate) fn bits_for(budget: f64) -> usize {
    let extra = (2.0 * budget.max(0.0) / std::f64::consts::LN_2).ceil();
    (128.0 + extra).min(16384.0) as usize
}

pub(crate) fn lift(x: f64, bits: usize) -> Real {
    Real::try_from(x).expect("finite f64").with_precision(bits).value()
}

fn magnitude(x: &Real) -> isize {
    let r = x.repr();
    if r.is_zero() {
        isize::MIN
    } else {
        r.exponent() + r.digits() as isize
    }
}

/// Converts `(a, b)` to f64 after a common power-of-two rescaling, preserving their ratio.
fn scaled_pair(a: &Real, b: &Real) -> (f64, f64) {
    let m = magnitude(a).max(magnitude(b));
    if m == isize::MIN {
        return (0.0, 0.0);
    }
    let s = -m;
    ((a.clone() << s).to_f64().value(), (b.clone() << s).to_f64().value())
}

#[derive(Clone, Debug)]
pub(crate) struct PComplex {
    pub re: Real,
    pub im: Real,
}

impl PComplex {
    pub fn from_c64(z: Complex64, bits: usize) -> Self {
        PComplex { re: lift(z.re, bits), im: lift(z.im, bits) }
    }

    pub fn from_real(re: Real, bits: usize) -> Self {
        PComplex { re, im: lift(0.0, bits) }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().value(), self.im.to_f64().value())
    }

    pub fn conj(&self) -> Self {
        PComplex { re: self.re.clone(), im: -&self.im }
    }

    pub fn norm_sqr(&self) -> Real {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn scale(&self, r: &Real) -> Self {
        PComplex { re: &self.re * r, im: &self.im * r }
    }

    pub fn div(&self, o: &PComplex) -> Self {
        let n = o.norm_sqr();
        let p = self * &o.conj();
        PComplex { re: p.re / &n, im: p.im / &n }
    }

    /// `|self|` as f64 even when the value over- or underflows f64.
    pub fn abs_f64(&self) -> f64 {
        let (a, b) = scaled_pair(&self.re, &self.im);
        let m = magnitude(&self.re).max(magnitude(&self.im));
        if m == isize::MIN {
            return 0.0;
        }
        a.hypot(b) * 2f64.powi(m as i32)
    }

    /// Argument of the complex number.
    pub fn arg(&self) -> f64 {
        let (a, b) = scaled_pair(&self.re, &self.im);
        b.atan2(a)
    }
}

impl Add for &PComplex {
    type Output = PComplex;
    fn add(self, o: &PComplex) -> PComplex {
        PComplex { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &PComplex {
    type Output = PComplex;
    fn sub(self, o: &PComplex) -> PComplex {
        PComplex { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &PComplex {
    type Output = PComplex;
    fn mul(self, o: &PComplex) -> PComplex {
        PComplex {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for &PComplex {
    type Output = PComplex;
    fn neg(self) -> PComplex {
        PComplex { re: -&self.re, im: -&self.im }
    }
}

/// Homogeneous coordinates `(x : y)` of the point `x / y`.
#[derive(Clone, Debug)]
pub(crate) struct PVec {
    pub x: PComplex,
    pub y: PComplex,
}

impl PVec {
    pub fn from_point(p: BoundaryPoint, bits: usize) -> Self {
        PVec { x: PComplex::from_c64(p.to_complex(), bits), y: PComplex::from_c64(Complex64::new(1.0, 0.0), bits) }
    }

    pub fn to_point(&self) -> BoundaryPoint {
        BoundaryPoint::from_angle((&self.x * &self.y.conj()).arg())
    }
}

pub(crate) fn det(v: &PVec, w: &PVec) -> PComplex {
    &(&v.x * &w.y) - &(&w.x * &v.y)
}

/// Projective 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, Debug)]
pub(crate) struct PMat {
    pub a: PComplex,
    pub b: PComplex,
    pub c: PComplex,
    pub d: PComplex,
}

impl PMat {
    pub fn identity(bits: usize) -> Self {
        let one = PComplex::from_c64(Complex64::new(1.0, 0.0), bits);
        let zero = PComplex::from_c64(Complex64::new(0.0, 0.0), bits);
        PMat { a: one.clone(), b: zero.clone(), c: zero, d: one }
    }

    pub fn from_mobius(m: &MobiusMap, bits: usize) -> Self {
        let (u, v) = (m.u(), m.v());
        PMat {
            a: PComplex::from_c64(u, bits),
            b: PComplex::from_c64(v, bits),
            c: PComplex::from_c64(v.conj(), bits),
            d: PComplex::from_c64(u.conj(), bits),
        }
    }

    /// Translation fixing `rep` (eigenvalue `e^{-m/2}`) and `att` (eigenvalue `e^{m/2}`), scaled by `att − rep`.
    pub fn translation(rep: BoundaryPoint, att: BoundaryPoint, length: f64, bits: usize) -> Self {
        let p = PComplex::from_c64(rep.to_complex(), bits);
        let q = PComplex::from_c64(att.to_complex(), bits);
        let lam = (lift(length, bits) >> 1).exp();
        let inv = lift(1.0, bits) / &lam;
        let diff = &lam - &inv;
        let pq = &p * &q;
        PMat {
            a: &q.scale(&lam) - &p.scale(&inv),
            b: (-&pq).scale(&diff),
            c: PComplex::from_real(diff.clone(), bits),
            d: &q.scale(&inv) - &p.scale(&lam),
        }
    }

    pub fn mul(&self, o: &PMat) -> PMat {
        PMat {
            a: &(&self.a * &o.a) + &(&self.b * &o.c),
            b: &(&self.a * &o.b) + &(&self.b * &o.d),
            c: &(&self.c * &o.a) + &(&self.d * &o.c),
            d: &(&self.c * &o.b) + &(&self.d * &o.d),
        }
    }

    pub fn adjugate(&self) -> PMat {
        PMat { a: self.d.clone(), b: -&self.b, c: -&self.c, d: self.a.clone() }
    }

    pub fn det(&self) -> PComplex {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    pub fn apply(&self, v: &PVec) -> PVec {
        PVec { x: &(&self.a * &v.x) + &(&self.b * &v.y), y: &(&self.c * &v.x) + &(&self.d * &v.y) }
    }

    /// Nearest f64 isometry; only meaningful when the entries fit in f64.
    pub fn to_mobius(&self) -> Option<MobiusMap> {
        let d = self.det();
        let s = d.to_c64().sqrt();
        if !(s.norm() > 0.0) || !s.is_finite() {
            return None;
        }
        let sc = PComplex::from_c64(s, self.a.re.precision().max(64));
        let e = |z: &PComplex| z.div(&sc).to_c64();
        MobiusMap::from_unit_matrix(e(&self.a), e(&self.b), e(&self.c), e(&self.d)).ok()
    }
}
