//! Exact rational references for double-double arithmetic.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reservoir_inversion::xprec::{two_prod, two_prod_dekker, two_sum};
use reservoir_inversion::DoubleDouble;

pub fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

pub fn qd(x: DoubleDouble) -> BigRational {
    q(x.hi()) + q(x.lo())
}

pub fn rel_err(got: &BigRational, exact: &BigRational) -> f64 {
    if exact.is_zero() {
        return if got.is_zero() { 0.0 } else { f64::INFINITY };
    }
    ((got - exact) / exact).abs().to_f64().expect("representable")
}

/// Random doubles spread over many binades, with both signs.
pub fn sample(rng: &mut ChaCha8Rng) -> f64 {
    let m: f64 = rng.gen_range(-1.0..1.0);
    let e: i32 = rng.gen_range(-40..40);
    m * 2f64.powi(e)
}

pub fn sample_dd(rng: &mut ChaCha8Rng) -> DoubleDouble {
    let hi = sample(rng);
    DoubleDouble::new(hi, hi * rng.gen_range(-1.0..1.0) * 1e-17)
}

/// Summary of [`oracle_suite`].
pub struct SuiteResult {
    /// Whether every `two_sum` / `two_prod` pair was exact.
    pub error_free: bool,
    /// Whether every result was normalized.
    pub normalized: bool,
    /// Largest relative error of add, sub, mul and div, in units of
    /// `DoubleDouble::EPSILON`.
    pub arith_eps: f64,
    /// Largest relative error of `sqrt(x)²` against `x`, same units.
    pub sqrt_eps: f64,
}

pub fn oracle_suite(samples: usize, seed: u64) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = SuiteResult { error_free: true, normalized: true, arith_eps: 0.0, sqrt_eps: 0.0 };
    for _ in 0..samples {
        let (a, b) = (sample(&mut rng), sample(&mut rng));
        let (s, e) = two_sum(a, b);
        r.error_free &= q(s) + q(e) == q(a) + q(b);
        for (p, e) in [two_prod(a, b), two_prod_dekker(a, b)] {
            r.error_free &= q(p) + q(e) == q(a) * q(b);
        }

        let (x, y) = (sample_dd(&mut rng), sample_dd(&mut rng));
        let (qx, qy) = (qd(x), qd(y));
        for (got, exact) in [(x + y, &qx + &qy), (x - y, &qx - &qy), (x * y, &qx * &qy), (x / y, &qx / &qy)] {
            r.normalized &= got.is_normalized();
            r.arith_eps = r.arith_eps.max(rel_err(&qd(got), &exact) / DoubleDouble::EPSILON);
        }
        let root = x.abs().sqrt();
        r.normalized &= root.is_normalized();
        r.sqrt_eps = r.sqrt_eps.max(rel_err(&(qd(root) * qd(root)), &qd(x.abs())) / DoubleDouble::EPSILON);
    }
    r
}
