//! Double-double arithmetic: error-free transformations, parsing, and a sum
//! that double precision gets wrong.
//!
//! ```bash
//! cargo run --example double_double
//! ```

use reservoir_inversion::xprec::{two_prod, two_sum};
use reservoir_inversion::DoubleDouble;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (s, e) = two_sum(1.0, 1e-20);
    println!("two_sum(1, 1e-20) = {s} + {e:e}");
    let (p, e) = two_prod(0.1, 0.1);
    println!("two_prod(0.1, 0.1) = {p} + {e:e}");

    let one = DoubleDouble::ONE;
    let tiny = DoubleDouble::from(1e-25);
    println!("(1 + 1e-25) - 1 = {} in double-double, {:e} in double", (one + tiny) - one, (1.0 + 1e-25) - 1.0);

    let third: DoubleDouble = "0.333333333333333333333333333333333".parse()?;
    println!("1/3 parsed: {}", third.to_scientific(32));
    println!("1/3 divided: {}", (one / DoubleDouble::from(3.0)).to_scientific(32));
    println!("sqrt(2) = {}", DoubleDouble::from(2.0).sqrt().to_scientific(32));

    let tenth: DoubleDouble = "0.1".parse()?;
    let (mut dd, mut d) = (DoubleDouble::ZERO, 0.0f64);
    for _ in 0..1_000_000 {
        dd += tenth;
        d += 0.1;
    }
    println!("10^6 tenths: {} (double-double), {d:.17} (double)", dd.to_scientific(25));
    Ok(())
}
