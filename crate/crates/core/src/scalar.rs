//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the estimators are generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot represent at all.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal not representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Standard normal density.
pub fn normal_pdf<F: Real>(x: F) -> F {
    let x = x.as_f64();
    F::lit((-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt())
}

/// Standard normal distribution function, computed through `erfc` so both tails stay accurate.
pub fn normal_cdf<F: Real>(x: F) -> F {
    let x = x.as_f64();
    F::lit(0.5 * libm::erfc(-x / std::f64::consts::SQRT_2))
}

/// Sum in a fixed association order: sequential within blocks of `BLOCK`, pairwise across blocks.
///
/// The result depends only on the input sequence, never on how the caller split the work.
pub fn stable_sum<F: Real>(values: &[F]) -> F {
    const BLOCK: usize = 1024;
    if values.len() <= BLOCK {
        return values.iter().fold(F::zero(), |acc, &v| acc + v);
    }
    let blocks: Vec<F> = values
        .chunks(BLOCK)
        .map(|c| c.iter().fold(F::zero(), |acc, &v| acc + v))
        .collect();
    pairwise(&blocks)
}

fn pairwise<F: Real>(values: &[F]) -> F {
    match values.len() {
        0 => F::zero(),
        1 => values[0],
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise(lo) + pairwise(hi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_reference_points() {
        assert!((normal_cdf(0.1_f64) - 0.539_827_837_277_028_9).abs() < 1e-12);
        assert!((normal_cdf(-0.1_f64) - 0.460_172_162_722_971_1).abs() < 1e-12);
        assert!((normal_pdf(0.0_f64) - 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn stable_sum_matches_naive_on_short_input() {
        let v: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(stable_sum(&v), 45.0);
        let long: Vec<f64> = (0..5000).map(|i| i as f64).collect();
        assert_eq!(stable_sum(&long), 4999.0 * 5000.0 / 2.0);
    }
}
