//! Double-double extended precision.
//!
//! A [`DoubleDouble`] holds an unevaluated sum `hi + lo` of two `f64` values
//! with `|lo| <= ulp(hi) / 2`, giving a 106-bit significand (about 31
//! decimal digits). It stands in for IEEE binary128 in the solver and
//! factorization code paths; the 7 bits it lacks relative to binary128 do not
//! matter for the convergence studies run with it.
//!
//! The arithmetic follows the classic error-free transformations
//! ([`two_sum`], [`two_prod`]) and the "accurate" add/div variants, so that
//! add/sub/mul are within `4 * 2^-106` relative error and div/sqrt within
//! `8 * 2^-106`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum XprecError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of negative value {0:e}")]
    NegativeSqrt(f64),
    #[error("result overflowed or underflowed the representable range")]
    Overflow,
    #[error("cannot parse `{0}` as an extended-precision number")]
    Parse(String),
}

/// `s = fl(a + b)` and `e` such that `s + e == a + b` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// [`two_sum`] under the precondition `|a| >= |b|` (or `a == 0`).
#[inline]
pub fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Exact product via fused multiply-add.
#[inline]
pub fn two_prod_fma(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    // 2^27 + 1
    const SPLITTER: f64 = 134_217_729.0;
    const THRESH: f64 = 6.696_928_794_914_17e299;
    if a > THRESH || a < -THRESH {
        let a = a * 3.725_290_298_461_914e-9; // 2^-28
        let t = SPLITTER * a;
        let hi = t - (t - a);
        let lo = a - hi;
        (hi * 268_435_456.0, lo * 268_435_456.0)
    } else {
        let t = SPLITTER * a;
        let hi = t - (t - a);
        (hi, a - hi)
    }
}

/// Exact product via Dekker splitting, for targets without hardware FMA.
#[inline]
pub fn two_prod_dekker(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, e)
}

/// `p = fl(a * b)` and `e` such that `p + e == a * b` exactly.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    #[cfg(target_feature = "fma")]
    {
        two_prod_fma(a, b)
    }
    #[cfg(not(target_feature = "fma"))]
    {
        two_prod_dekker(a, b)
    }
}

/// Extended-precision scalar represented as the unevaluated sum `hi + lo`.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    /// 2^-104: half the spacing of the 106-bit significand at 1.
    pub const EPSILON: f64 = 4.930_380_657_631_324e-32;

    /// Builds a normalized value from two arbitrary doubles.
    #[inline]
    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self::from_parts_unchecked(hi, lo)
    }

    #[inline]
    fn from_parts_unchecked(hi: f64, lo: f64) -> Self {
        let v = Self { hi, lo };
        debug_assert!(v.is_normalized(), "unnormalized double-double {hi:e} + {lo:e}");
        v
    }

    /// Exact conversion from `f64`.
    #[inline]
    pub const fn promote(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Round to the nearest `f64`.
    #[inline]
    pub fn demote(self) -> f64 {
        // for a normalized value hi is already fl(hi + lo)
        self.hi
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    /// `hi == fl(hi + lo)`; non-finite parts are allowed only as an overflow
    /// signal, never as a normalized value.
    pub fn is_normalized(self) -> bool {
        if !self.is_finite() {
            return true;
        }
        self.hi + self.lo == self.hi
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    /// Sum with a plain double; cheaper than a full double-double add.
    #[inline]
    pub fn add_f64(self, b: f64) -> Self {
        let (s, e) = two_sum(self.hi, b);
        let e = e + self.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Self::from_parts_unchecked(hi, lo)
    }

    /// Product with a plain double.
    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Self::from_parts_unchecked(hi, lo)
    }

    #[inline]
    fn add_dd(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let e = e + t;
        let (s, e) = quick_two_sum(s, e);
        let e = e + f;
        let (hi, lo) = quick_two_sum(s, e);
        Self::from_parts_unchecked(hi, lo)
    }

    #[inline]
    fn mul_dd(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self::from_parts_unchecked(hi, lo)
    }

    #[inline]
    fn div_dd(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return Self { hi: q1, lo: 0.0 };
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self::from_parts_unchecked(hi, lo).add_f64(q3)
    }

    /// Square root by one Newton correction of the double-precision root.
    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Self::ZERO
            } else {
                Self { hi: f64::NAN, lo: 0.0 }
            };
        }
        let s = Self::promote(self.hi.sqrt());
        let corr = (self - s * s) / s.mul_f64(2.0);
        s + corr
    }

    pub fn checked_div(self, b: Self) -> Result<Self, XprecError> {
        if b.hi == 0.0 {
            return Err(XprecError::DivisionByZero);
        }
        let q = self.div_dd(b);
        if q.is_finite() {
            Ok(q)
        } else {
            Err(XprecError::Overflow)
        }
    }

    pub fn checked_sqrt(self) -> Result<Self, XprecError> {
        if self.hi < 0.0 {
            return Err(XprecError::NegativeSqrt(self.hi));
        }
        Ok(self.sqrt())
    }

    pub fn checked_add(self, b: Self) -> Result<Self, XprecError> {
        finite_or_overflow(self + b)
    }

    pub fn checked_mul(self, b: Self) -> Result<Self, XprecError> {
        finite_or_overflow(self * b)
    }

    /// Integer power by repeated squaring.
    pub fn powi(self, n: i32) -> Self {
        let mut base = self;
        let mut k = n.unsigned_abs();
        let mut acc = Self::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base *= base;
            k >>= 1;
        }
        if n < 0 {
            Self::ONE / acc
        } else {
            acc
        }
    }

    fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (hi, lo) = quick_two_sum(hi, self.lo.floor());
            Self::from_parts_unchecked(hi, lo)
        } else {
            Self::promote(hi)
        }
    }

    /// Scientific notation with `digits` significant digits.
    pub fn to_scientific(self, digits: usize) -> String {
        let digits = digits.max(1);
        if !self.is_finite() {
            return format!("{}", self.hi);
        }
        if self.hi == 0.0 {
            return format!("{}0.{}e0", if self.hi.is_sign_negative() { "-" } else { "" }, "0".repeat(digits - 1));
        }
        let neg = self.hi < 0.0;
        let mut r = self.abs();
        let mut e = r.hi.log10().floor() as i32;
        r = scale_pow10(r, -e);
        if r.hi >= 10.0 {
            r = r / Self::promote(10.0);
            e += 1;
        } else if r.hi < 1.0 {
            r *= Self::promote(10.0);
            e -= 1;
        }
        let mut d: Vec<i32> = Vec::with_capacity(digits + 1);
        for _ in 0..=digits {
            let q = r.floor();
            d.push(q.hi as i32);
            r = (r - q) * Self::promote(10.0);
        }
        // round on the guard digit
        if d[digits] >= 5 {
            d[digits - 1] += 1;
        }
        d.truncate(digits);
        for i in (1..digits).rev() {
            if d[i] < 0 {
                d[i] += 10;
                d[i - 1] -= 1;
            } else if d[i] > 9 {
                d[i] -= 10;
                d[i - 1] += 1;
            }
        }
        if d[0] > 9 {
            d[0] -= 10;
            d.insert(0, 1);
            d.truncate(digits);
            e += 1;
        }
        let mut s = String::with_capacity(digits + 8);
        if neg {
            s.push('-');
        }
        s.push(char::from(b'0' + d[0] as u8));
        if digits > 1 {
            s.push('.');
            for &di in &d[1..] {
                s.push(char::from(b'0' + di as u8));
            }
        }
        s.push('e');
        s.push_str(&e.to_string());
        s
    }
}

fn finite_or_overflow(v: DoubleDouble) -> Result<DoubleDouble, XprecError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(XprecError::Overflow)
    }
}

fn scale_pow10(x: DoubleDouble, e: i32) -> DoubleDouble {
    let p = DoubleDouble::promote(10.0).powi(e.abs());
    if e >= 0 {
        x * p
    } else {
        x / p
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleDouble({:e}, {:e})", self.hi, self.lo)
    }
}

/// 32 significant digits unless a precision is given (`{:.40}`).
impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(32);
        f.write_str(&self.to_scientific(digits))
    }
}

impl FromStr for DoubleDouble {
    type Err = XprecError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = || XprecError::Parse(text.to_string());
        let t = text.trim();
        let (neg, body) = match t.as_bytes().first() {
            Some(b'-') => (true, &t[1..]),
            Some(b'+') => (false, &t[1..]),
            _ => (false, t),
        };
        let (mantissa, exp) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], body[i + 1..].parse::<i32>().map_err(|_| err())?),
            None => (body, 0),
        };
        if mantissa.is_empty() {
            return Err(err());
        }
        let ten = Self::promote(10.0);
        let mut acc = Self::ZERO;
        let mut frac_digits = 0i32;
        let mut seen_point = false;
        let mut seen_digit = false;
        for c in mantissa.chars() {
            match c {
                '0'..='9' => {
                    acc = acc * ten + Self::promote(f64::from(c as u8 - b'0'));
                    seen_digit = true;
                    if seen_point {
                        frac_digits += 1;
                    }
                }
                '.' if !seen_point => seen_point = true,
                _ => return Err(err()),
            }
        }
        if !seen_digit {
            return Err(err());
        }
        let v = scale_pow10(acc, exp - frac_digits);
        Ok(if neg { -v } else { v })
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::promote(x)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        self.add_dd(rhs)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self.add_dd(-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        self.mul_dd(rhs)
    }
}

/// Division by zero yields a non-finite value; use
/// [`DoubleDouble::checked_div`] to get an error instead.
impl Div for DoubleDouble {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        self.div_dd(rhs)
    }
}

macro_rules! assign_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for DoubleDouble {
            #[inline]
            fn $m(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    };
}
assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);

impl Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}
