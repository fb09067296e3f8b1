//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64`
//! carrying roughly 106 bits of mantissa.
//!
//! Only what the rank fallback needs is here: the four field operations,
//! square root, and `sin`/`cos` of rational multiples of π.

use core::cmp::Ordering;
use core::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, Default)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

/// π to double-double precision.
pub const PI: DoubleDouble = DoubleDouble { hi: core::f64::consts::PI, lo: 1.224_646_799_147_353_2e-16 };

/// Unit roundoff of the format, 2^-104.
pub const EPSILON: f64 = 4.930_380_657_631_324e-32;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    // Dekker split; inputs here never approach the overflow threshold
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let err = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, err)
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn from_parts(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn is_sign_negative(self) -> bool {
        self.hi < 0.0
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::ZERO;
        }
        // one Newton step from the f64 root doubles the correct bits
        let x = libm::sqrt(self.hi);
        let (p, e) = two_prod(x, x);
        let resid = (self.hi - p - e + self.lo) * (0.5 / x);
        Self::from_parts(x, resid)
    }

    /// Multiplies by `2^e` exactly.
    pub fn ldexp(self, e: i32) -> Self {
        Self { hi: libm::scalbn(self.hi, e), lo: libm::scalbn(self.lo, e) }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl PartialEq for DoubleDouble {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        // long division, three quotient digits
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self { hi: q1, lo: q2 } + Self::from_f64(q3)
    }
}

/// Taylor series for |x| <= π/4; terms drop below 2^-110 by n = 27.
fn sin_taylor(x: DoubleDouble) -> DoubleDouble {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 1.0;
    while k < 40.0 {
        term = -(term * x2) / DoubleDouble::from_f64((k + 1.0) * (k + 2.0));
        sum = sum + term;
        if libm::fabs(term.hi) < EPSILON * 1e-3 * libm::fabs(sum.hi) {
            break;
        }
        k += 2.0;
    }
    sum
}

fn cos_taylor(x: DoubleDouble) -> DoubleDouble {
    let x2 = x * x;
    let mut term = DoubleDouble::ONE;
    let mut sum = DoubleDouble::ONE;
    let mut k = 0.0;
    while k < 40.0 {
        term = -(term * x2) / DoubleDouble::from_f64((k + 1.0) * (k + 2.0));
        sum = sum + term;
        if libm::fabs(term.hi) < EPSILON * 1e-3 {
            break;
        }
        k += 2.0;
    }
    sum
}

/// Reduced form of the angle `π·p/q`: an octant-sized angle `π·num/den`
/// in `[0, π/4]`, whether to use cosine instead of sine, and the sign.
pub(crate) struct ReducedAngle {
    pub num: u64,
    pub den: u64,
    pub use_cos: bool,
    pub negative: bool,
}

/// Reduces `sin(π·p/q)` to `±sin` or `±cos` of an angle in `[0, π/4]`
/// using exact integer arithmetic on the ratio.
pub(crate) fn reduce_sin_pi(p: i64, q: u64) -> ReducedAngle {
    assert!(q > 0, "zero denominator");
    let period = 2 * q as i128;
    let mut a = (p as i128).rem_euclid(period) as u64;
    let mut negative = false;
    if a >= q {
        // sin(x + π) = -sin x
        a -= q;
        negative = true;
    }
    if 2 * a > q {
        // sin(π - x) = sin x
        a = q - a;
    }
    // now the angle π·a/q lies in [0, π/2]
    if 4 * a > q {
        // sin x = cos(π/2 - x), with π/2 - x = π·(q - 2a)/(2q) in [0, π/4)
        ReducedAngle { num: q - 2 * a, den: 2 * q, use_cos: true, negative }
    } else {
        ReducedAngle { num: a, den: q, use_cos: false, negative }
    }
}

/// `sin(π·p/q)` to double-double accuracy.
pub fn sin_pi_ratio(p: i64, q: u64) -> DoubleDouble {
    let red = reduce_sin_pi(p, q);
    let x = PI * DoubleDouble::from_f64(red.num as f64) / DoubleDouble::from_f64(red.den as f64);
    let v = if red.use_cos { cos_taylor(x) } else { sin_taylor(x) };
    if red.negative {
        -v
    } else {
        v
    }
}

/// `cos(π·p/q)` to double-double accuracy.
pub fn cos_pi_ratio(p: i64, q: u64) -> DoubleDouble {
    // cos(πp/q) = sin(π(q + 2p)/(2q))
    sin_pi_ratio(q as i64 + 2 * p, 2 * q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: DoubleDouble, b: DoubleDouble, tol: f64) -> bool {
        libm::fabs((a - b).to_f64()) <= tol
    }

    #[test]
    fn arithmetic_recovers_lost_bits() {
        let third = DoubleDouble::ONE / DoubleDouble::from_f64(3.0);
        let back = third * DoubleDouble::from_f64(3.0);
        assert!(close(back, DoubleDouble::ONE, 1e-31));
        // 1 + 2^-70 is not representable in f64
        let tiny = DoubleDouble::from_f64(libm::scalbn(1.0, -70));
        let sum = DoubleDouble::ONE + tiny;
        assert_eq!((sum - DoubleDouble::ONE).to_f64(), libm::scalbn(1.0, -70));
    }

    #[test]
    fn sqrt_two_squared() {
        let s = DoubleDouble::from_f64(2.0).sqrt();
        assert!(close(s * s, DoubleDouble::from_f64(2.0), 1e-31));
        assert_eq!(DoubleDouble::ZERO.sqrt(), DoubleDouble::ZERO);
    }

    #[test]
    fn special_angles() {
        assert!(close(sin_pi_ratio(1, 6), DoubleDouble::from_f64(0.5), 1e-31));
        assert!(close(sin_pi_ratio(-1, 2), -DoubleDouble::ONE, 1e-31));
        assert!(close(sin_pi_ratio(7, 6), DoubleDouble::from_f64(-0.5), 1e-31));
        assert_eq!(sin_pi_ratio(3, 3).to_f64(), 0.0);
        let half_sqrt2 = DoubleDouble::from_f64(2.0).sqrt() / DoubleDouble::from_f64(2.0);
        assert!(close(sin_pi_ratio(1, 4), half_sqrt2, 1e-31));
        assert!(close(cos_pi_ratio(1, 3), DoubleDouble::from_f64(0.5), 1e-31));
        assert!(close(cos_pi_ratio(0, 7), DoubleDouble::ONE, 1e-31));
    }

    #[test]
    fn pythagorean_identity_holds_to_double_double_precision() {
        for q in [5u64, 7, 16, 33, 64] {
            for p in -(2 * q as i64)..=(2 * q as i64) {
                let s = sin_pi_ratio(p, q);
                let c = cos_pi_ratio(p, q);
                assert!(close(s * s + c * c, DoubleDouble::ONE, 1e-30), "p={p} q={q}");
            }
        }
    }

    #[test]
    fn agrees_with_f64_sine() {
        for p in -40i64..40 {
            let want = libm::sin(core::f64::consts::PI * p as f64 / 17.0);
            assert!(libm::fabs(sin_pi_ratio(p, 17).to_f64() - want) < 1e-15);
        }
    }
}
