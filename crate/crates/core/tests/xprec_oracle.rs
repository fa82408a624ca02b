//! Double-double arithmetic against exact rational arithmetic.

mod common;

use common::rational::{oracle_suite, q, qd, rel_err, sample};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reservoir_inversion::xprec::{two_prod, two_prod_dekker, two_sum};
use reservoir_inversion::DoubleDouble;

#[test]
fn two_sum_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let (a, b) = (sample(&mut rng), sample(&mut rng));
        let (s, e) = two_sum(a, b);
        assert_eq!(s, a + b);
        assert_eq!(q(s) + q(e), q(a) + q(b));
    }
}

#[test]
fn two_prod_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let (a, b) = (sample(&mut rng), sample(&mut rng));
        for (p, e) in [two_prod(a, b), two_prod_dekker(a, b)] {
            assert_eq!(p, a * b);
            assert_eq!(q(p) + q(e), q(a) * q(b));
        }
    }
}

#[test]
fn arithmetic_is_accurate_to_double_double_roundoff() {
    let r = oracle_suite(1000, 13);
    assert!(r.error_free && r.normalized);
    assert!(r.arith_eps <= 4.0, "add/sub/mul/div error {} eps", r.arith_eps);
    assert!(r.sqrt_eps <= 8.0, "sqrt squared error {} eps", r.sqrt_eps);
}

#[test]
fn tiny_increment_survives() {
    let one = DoubleDouble::ONE;
    let tiny = DoubleDouble::promote(1e-25);
    let d = (one + tiny) - one;
    assert_eq!(qd(d), q(1e-25));
    assert_eq!((1.0 + 1e-25) - 1.0, 0.0);
}

#[test]
fn million_tenths() {
    let tenth: DoubleDouble = "0.1".parse().unwrap();
    let mut s = DoubleDouble::ZERO;
    let mut d = 0.0f64;
    for _ in 0..1_000_000 {
        s += tenth;
        d += 0.1;
    }
    let exact = BigRational::from_integer(BigInt::from(100_000));
    assert!(rel_err(&qd(s), &exact) < 1e-25);
    assert!(rel_err(&q(d), &exact) > 1e-13);
}
