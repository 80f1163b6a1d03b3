//! Real scalar abstraction (double / double-double) and the complex scalar built on it.
//!
//! Everything downstream is generic over [`Real`] so the whole pipeline can be
//! re-run with an extended significand when block-Hankel conditioning bites.
//! The extended type [`Dd`] is an unevaluated sum of two doubles (~31 decimal
//! digits), with error-free transforms for +/× and a three-step accurate
//! division; elementary functions are built on argument reduction + Taylor so
//! their accuracy matches the representation.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Minimal real-field interface needed by the library.
pub trait Real:
    Copy
    + PartialOrd
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn cosh(self) -> Self;
    fn sinh(self) -> Self;
    fn pi() -> Self;
    /// Unit roundoff of the representation.
    fn epsilon() -> Self;
    /// Condition-estimate ceiling beyond which a Hankel block is declared numerically singular.
    fn regularity_threshold() -> f64;
    fn is_finite(self) -> bool;
    const NAME: &'static str;
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
    fn regularity_threshold() -> f64 {
        1e12
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    const NAME: &'static str = "double";
}

/// Double-double: value = hi + lo with |lo| ≤ ulp(hi)/2.
/// Lexicographic ordering on (hi, lo) is the numeric order for normalized values.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    // requires |a| ≥ |b|
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = f64::mul_add(a, b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    // split constants from the QD library
    pub const PI: Dd = Dd {
        hi: 3.141592653589793116e+00,
        lo: 1.224646799147353207e-16,
    };
    pub const LN2: Dd = Dd {
        hi: 6.931471805599452862e-01,
        lo: 2.319046813846299558e-17,
    };
    pub const E: Dd = Dd {
        hi: 2.718281828459045091e+00,
        lo: 1.445646891729250158e-16,
    };
    /// 2^-104, roundoff of the format.
    pub const EPS: f64 = 4.93038065763132e-32;

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn from(v: f64) -> Dd {
        Dd { hi: v, lo: 0.0 }
    }

    #[inline]
    fn add_dd(self, o: Dd) -> Dd {
        let (s1, e1) = two_sum(self.hi, o.hi);
        let (s2, e2) = two_sum(self.lo, o.lo);
        let (s1, e1) = quick_two_sum(s1, e1 + s2);
        let (s1, e1) = quick_two_sum(s1, e1 + e2);
        Dd { hi: s1, lo: e1 }
    }

    #[inline]
    fn mul_dd(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (s, err) = quick_two_sum(p, e);
        Dd { hi: s, lo: err }
    }

    fn div_dd(self, o: Dd) -> Dd {
        // long division with two refinements (accurate variant)
        let q1 = self.hi / o.hi;
        let r = self.add_dd((o.mul_dd(Dd::from(q1))).neg_dd());
        let q2 = r.hi / o.hi;
        let r = r.add_dd((o.mul_dd(Dd::from(q2))).neg_dd());
        let q3 = r.hi / o.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd { hi: s, lo: e }.add_dd(Dd::from(q3))
    }

    #[inline]
    fn neg_dd(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    /// Exact multiplication by a power of two.
    #[inline]
    fn mul_pwr2(self, k: f64) -> Dd {
        Dd {
            hi: self.hi * k,
            lo: self.lo * k,
        }
    }

    fn sqrt_dd(self) -> Dd {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ZERO;
        }
        // one Karp-style Newton step from the double estimate gives full precision
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let axd = Dd::from(ax);
        let err = self.add_dd(axd.mul_dd(axd).neg_dd());
        axd.add_dd(Dd::from(err.hi * (x * 0.5)))
    }

    fn exp_dd(self) -> Dd {
        // exp(x) = 2^m · (exp(r))^512, r = (x − m·ln2)/512
        if self.hi > 709.0 {
            return Dd::from(f64::INFINITY);
        }
        if self.hi < -709.0 {
            return Dd::ZERO;
        }
        let m = (self.hi / Dd::LN2.hi + 0.5).floor();
        let r = self
            .add_dd(Dd::LN2.mul_dd(Dd::from(m)).neg_dd())
            .mul_pwr2(1.0 / 512.0);
        // Taylor for exp(r) − 1 with |r| ≤ ln2/1024
        let mut p = r;
        let mut term = r;
        let mut fact = 1.0f64;
        for k in 2..24 {
            fact *= k as f64;
            term = term.mul_dd(r);
            let t = term.mul_dd(Dd::from(1.0).div_dd(Dd::from(fact)));
            p = p.add_dd(t);
            if t.hi.abs() < 1e-40 {
                break;
            }
        }
        // (1+p)^512 − via s ← s² + 2s on the "−1" representation
        let mut s = p;
        for _ in 0..9 {
            s = s.mul_dd(s).add_dd(s.mul_pwr2(2.0));
        }
        let result = s.add_dd(Dd::ONE);
        let scale = f64::powi(2.0, m as i32);
        result.mul_pwr2(scale)
    }

    fn ln_dd(self) -> Dd {
        // Newton: y ← y + x·e^{−y} − 1, from the double estimate
        if self.hi <= 0.0 {
            return Dd::from(f64::NAN);
        }
        let mut y = Dd::from(self.hi.ln());
        for _ in 0..3 {
            let corr = self.mul_dd(y.neg_dd().exp_dd()).add_dd(Dd::from(-1.0));
            y = y.add_dd(corr);
        }
        y
    }

    fn sinh_dd(self) -> Dd {
        let a = self.hi.abs();
        if a < 0.5 {
            // Taylor avoids cancellation near 0
            let x2 = self.mul_dd(self);
            let mut term = self;
            let mut sum = self;
            for k in 1..16 {
                let denom = ((2 * k) * (2 * k + 1)) as f64;
                term = term.mul_dd(x2).div_dd(Dd::from(denom));
                sum = sum.add_dd(term);
                if term.hi.abs() < 1e-40 {
                    break;
                }
            }
            sum
        } else {
            let e = self.exp_dd();
            e.add_dd(Dd::ONE.div_dd(e).neg_dd()).mul_pwr2(0.5)
        }
    }

    fn cosh_dd(self) -> Dd {
        let e = self.exp_dd();
        e.add_dd(Dd::ONE.div_dd(e)).mul_pwr2(0.5)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        self.add_dd(o)
    }
}
impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self.add_dd(o.neg_dd())
    }
}
impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        self.mul_dd(o)
    }
}
impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        self.div_dd(o)
    }
}
impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        self.neg_dd()
    }
}

impl Real for Dd {
    fn from_f64(v: f64) -> Self {
        Dd::from(v)
    }
    fn to_f64(self) -> f64 {
        self.hi
    }
    fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg_dd()
        } else {
            self
        }
    }
    fn sqrt(self) -> Self {
        self.sqrt_dd()
    }
    fn exp(self) -> Self {
        self.exp_dd()
    }
    fn ln(self) -> Self {
        self.ln_dd()
    }
    fn cosh(self) -> Self {
        self.cosh_dd()
    }
    fn sinh(self) -> Self {
        self.sinh_dd()
    }
    fn pi() -> Self {
        Dd::PI
    }
    fn epsilon() -> Self {
        Dd::from(Dd::EPS)
    }
    fn regularity_threshold() -> f64 {
        1e28
    }
    fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
    const NAME: &'static str = "extended";
}

/// Complex number over a generic real scalar.
#[derive(Clone, Copy, Debug)]
pub struct Cplx<R: Real> {
    pub re: R,
    pub im: R,
}

impl<R: Real> Cplx<R> {
    pub fn new(re: R, im: R) -> Self {
        Cplx { re, im }
    }
    pub fn from_f64(re: f64, im: f64) -> Self {
        Cplx::new(R::from_f64(re), R::from_f64(im))
    }
    pub fn real(re: R) -> Self {
        Cplx::new(re, R::zero())
    }
    pub fn zero() -> Self {
        Cplx::from_f64(0.0, 0.0)
    }
    pub fn one() -> Self {
        Cplx::from_f64(1.0, 0.0)
    }
    pub fn i() -> Self {
        Cplx::from_f64(0.0, 1.0)
    }
    pub fn conj(self) -> Self {
        Cplx::new(self.re, -self.im)
    }
    pub fn norm_sqr(self) -> R {
        self.re * self.re + self.im * self.im
    }
    pub fn abs(self) -> R {
        self.norm_sqr().sqrt()
    }
    pub fn inv(self) -> Self {
        let d = self.norm_sqr();
        Cplx::new(self.re / d, -self.im / d)
    }
    pub fn scale(self, s: R) -> Self {
        Cplx::new(self.re * s, self.im * s)
    }
    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    pub fn to_f64_pair(self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl<R: Real> Add for Cplx<R> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Cplx::new(self.re + o.re, self.im + o.im)
    }
}
impl<R: Real> Sub for Cplx<R> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Cplx::new(self.re - o.re, self.im - o.im)
    }
}
impl<R: Real> Mul for Cplx<R> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Cplx::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}
impl<R: Real> Div for Cplx<R> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.inv()
    }
}
impl<R: Real> Neg for Cplx<R> {
    type Output = Self;
    fn neg(self) -> Self {
        Cplx::new(-self.re, -self.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_field_ops() {
        let a = Cplx::<f64>::from_f64(1.0, 2.0);
        let b = Cplx::<f64>::from_f64(-3.0, 0.5);
        let p = a * b;
        assert!((p.re - (-4.0)).abs() < 1e-15);
        assert!((p.im - (-5.5)).abs() < 1e-15);
        let q = p / b;
        assert!((q.re - a.re).abs() < 1e-14 && (q.im - a.im).abs() < 1e-14);
    }

    #[test]
    fn dd_field_arithmetic_keeps_low_word() {
        let third = Dd::ONE / Dd::from(3.0);
        let back = third * Dd::from(3.0) - Dd::ONE;
        assert!(back.hi.abs() < 1e-31, "1/3*3-1 = {:e}", back.hi);
        let s = Dd::from(1.0) + Dd::from(1e-25);
        assert!(((s - Dd::ONE).hi - 1e-25).abs() < 1e-40);
    }

    #[test]
    fn dd_sqrt_full_precision() {
        let s = Dd::from(2.0).sqrt();
        let r = s * s - Dd::from(2.0);
        assert!(r.hi.abs() < 1e-31, "sqrt2 residual {:e}", r.hi);
    }

    #[test]
    fn dd_exp_matches_reference() {
        let e = Dd::ONE.exp();
        let d = e - Dd::E;
        assert!(d.hi.abs() < 1e-30, "exp(1) err {:e}", d.hi);
        // exp(−36) relative accuracy
        let g = Dd::from(-36.0).exp();
        let back = g.ln() + Dd::from(36.0);
        assert!(back.hi.abs() < 1e-29, "ln(exp(-36)) err {:e}", back.hi);
    }

    #[test]
    fn dd_ln_matches_reference() {
        let l2 = Dd::from(2.0).ln();
        let d = l2 - Dd::LN2;
        assert!(d.hi.abs() < 1e-31, "ln2 err {:e}", d.hi);
        let x = Dd::from(0.7);
        let rt = x.exp().ln() - x;
        assert!(rt.hi.abs() < 1e-31, "roundtrip err {:e}", rt.hi);
    }

    #[test]
    fn dd_hyperbolic_identity() {
        for t in [0.05, 0.3, 1.2, 2.5] {
            let x = Dd::from(t);
            let id = x.cosh() * x.cosh() - x.sinh() * x.sinh() - Dd::ONE;
            assert!(id.hi.abs() < 1e-29, "cosh²−sinh²−1 at {t}: {:e}", id.hi);
        }
    }

    #[test]
    fn dd_ordering_is_numeric() {
        let a = Dd::ONE - Dd::from(1e-25);
        assert!(a < Dd::ONE && Dd::ONE > a);
        assert!(Dd::from(-2.0) < Dd::from(-1.0));
    }
}
