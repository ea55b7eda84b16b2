//! `prod_{l odd prime} (1 - 1/((l^2 - 1)(l^2 - l)))`, truncated, with a tail bound.

use num_traits::Float;
use serde::Serialize;

use crate::arith::primes_up_to;
use crate::error::{Error, Result};

/// Floating type used for reported constants.
pub type Real = f64;

pub const DEFAULT_EULER_BOUND: u64 = 1_000_000;

/// Largest truncation point accepted (the sieve is linear in it).
pub const MAX_EULER_BOUND: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EulerProduct<F> {
    pub value: F,
    /// `sum_{l > L} 2/l^4 <= 2/(3 L^3)`, which bounds the log of the omitted factors.
    pub tail_bound: F,
}

/// Product over odd primes `l <= bound`, summing logs with Neumaier compensation.
pub fn euler_product<F: Float>(bound: u64) -> Result<EulerProduct<F>> {
    if !(3..=MAX_EULER_BOUND).contains(&bound) {
        return Err(Error::ResourceCap(format!("Euler bound {bound} outside [3, {MAX_EULER_BOUND}]")));
    }
    let c = |x: f64| F::from(x).expect("representable");
    let (mut sum, mut comp) = (F::zero(), F::zero());
    for l in primes_up_to(bound).into_iter().filter(|&l| l > 2) {
        let l = l as f64;
        let term = (-c(1.0) / (c(l * l - 1.0) * c(l * l - l))).ln_1p();
        let t = sum + term;
        comp = comp + if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
    }
    let b = bound as f64;
    Ok(EulerProduct { value: (sum + comp).exp(), tail_bound: c(2.0 / (3.0 * b * b * b)) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncations_agree_within_the_tail() {
        let a = euler_product::<f64>(1000).unwrap();
        let b = euler_product::<f64>(100_000).unwrap();
        assert!(((b.value / a.value).ln()).abs() <= a.tail_bound);
        let s = euler_product::<f32>(1000).unwrap();
        assert!((s.value as f64 - a.value).abs() < 1e-6);
        // first factor alone: 1 - 1/48
        let three = euler_product::<f64>(4).unwrap();
        assert!((three.value - 47.0 / 48.0).abs() < 1e-15);
        assert!(euler_product::<f64>(2).is_err());
    }
}
