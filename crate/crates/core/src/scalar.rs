//! The scalar abstraction shared by the factorizations and Krylov solvers.

use std::fmt::{self, Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use crate::xprec::DoubleDouble;

/// Which arithmetic a computation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarKind {
    Double,
    Extended,
}

impl ScalarKind {
    pub fn name(self) -> &'static str {
        match self {
            ScalarKind::Double => "double",
            ScalarKind::Extended => "extended",
        }
    }
}

impl Display for ScalarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScalarKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "double" => Ok(ScalarKind::Double),
            "extended" | "quad" => Ok(ScalarKind::Extended),
            other => Err(format!("unknown precision `{other}` (expected double|extended)")),
        }
    }
}

pub trait Scalar:
    Copy
    + Default
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
{
    const KIND: ScalarKind;
    /// Unit roundoff of the arithmetic.
    const EPSILON: f64;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;

    #[inline]
    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    #[inline]
    fn one() -> Self {
        Self::from_f64(1.0)
    }

    /// `self * rhs` for a double-precision factor (matrix entries).
    #[inline]
    fn mul_f64(self, rhs: f64) -> Self {
        self * Self::from_f64(rhs)
    }
}

impl Scalar for f64 {
    const KIND: ScalarKind = ScalarKind::Double;
    const EPSILON: f64 = f64::EPSILON / 2.0;

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn mul_f64(self, rhs: f64) -> Self {
        self * rhs
    }
}

impl Scalar for DoubleDouble {
    const KIND: ScalarKind = ScalarKind::Extended;
    const EPSILON: f64 = DoubleDouble::EPSILON;

    #[inline]
    fn from_f64(x: f64) -> Self {
        DoubleDouble::promote(x)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self.demote()
    }
    #[inline]
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
    #[inline]
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
    #[inline]
    fn mul_f64(self, rhs: f64) -> Self {
        DoubleDouble::mul_f64(self, rhs)
    }
}

/// Small dense-vector helpers used throughout the solvers.
pub mod vecops {
    use super::Scalar;

    pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
        debug_assert_eq!(a.len(), b.len());
        let mut acc = S::zero();
        for (&x, &y) in a.iter().zip(b) {
            acc += x * y;
        }
        acc
    }

    pub fn norm<S: Scalar>(a: &[S]) -> S {
        dot(a, a).sqrt()
    }

    /// `y += alpha * x`
    pub fn axpy<S: Scalar>(alpha: S, x: &[S], y: &mut [S]) {
        for (yi, &xi) in y.iter_mut().zip(x) {
            *yi += alpha * xi;
        }
    }

    pub fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
        a.iter().zip(b).map(|(&x, &y)| x - y).collect()
    }

    pub fn scale<S: Scalar>(alpha: S, x: &mut [S]) {
        for xi in x {
            *xi *= alpha;
        }
    }

    pub fn promote<S: Scalar>(x: &[f64]) -> Vec<S> {
        x.iter().map(|&v| S::from_f64(v)).collect()
    }

    pub fn demote<S: Scalar>(x: &[S]) -> Vec<f64> {
        x.iter().map(|v| v.to_f64()).collect()
    }

    pub fn norm_f64(a: &[f64]) -> f64 {
        a.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `‖a - b‖ / ‖b‖`, or `‖a‖` when `b` vanishes.
    pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
        let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        let nb = norm_f64(b);
        if nb == 0.0 {
            d
        } else {
            d / nb
        }
    }
}
