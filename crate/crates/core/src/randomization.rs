//! Randomizing densities `ℓ` placed on the parameter around the query point.
//!
//! Offsets are `L = λ⁰ − Λ`. The truncated exponential density is
//! `ℓ(l) = θ e^{θl} / (e^{θε} − e^{−θε})` on `[−ε, ε]`; `θ = 0` is the uniform density.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Below this `|θε|` the exponential normalization switches to its series expansion.
pub const SMALL_TILT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum RandomizerKind {
    Uniform,
    TruncExp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Randomizer<F> {
    kind: RandomizerKind,
    epsilon: F,
    theta: F,
}

/// A draw `L` from the randomizer together with the parameter value `Λ = λ⁰ − L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetSample<F> {
    pub offset: F,
    pub lambda: F,
}

impl<F: Real> OffsetSample<F> {
    /// Reflection of the offset about zero, i.e. of `Λ` about `λ⁰`.
    pub fn antithetic(&self, lambda0: F) -> Self {
        OffsetSample {
            offset: -self.offset,
            lambda: lambda0 + self.offset,
        }
    }
}

pub fn antithetic_of<F: Real>(sample: OffsetSample<F>, lambda0: F) -> OffsetSample<F> {
    sample.antithetic(lambda0)
}

impl<F: Real> Randomizer<F> {
    pub fn uniform(epsilon: F) -> Result<Self> {
        Self::new(RandomizerKind::Uniform, epsilon, F::zero())
    }

    pub fn truncated_exponential(theta: F, epsilon: F) -> Result<Self> {
        Self::new(RandomizerKind::TruncExp, epsilon, theta)
    }

    pub fn new(kind: RandomizerKind, epsilon: F, theta: F) -> Result<Self> {
        if !(epsilon > F::zero()) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "randomizer radius must be positive, got {epsilon}"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidArgument(format!("tilt must be finite, got {theta}")));
        }
        let theta = match kind {
            RandomizerKind::Uniform => F::zero(),
            RandomizerKind::TruncExp => theta,
        };
        Ok(Randomizer { kind, epsilon, theta })
    }

    pub fn kind(&self) -> RandomizerKind {
        self.kind
    }

    pub fn epsilon(&self) -> F {
        self.epsilon
    }

    pub fn theta(&self) -> F {
        self.theta
    }

    fn is_flat(&self) -> bool {
        self.kind == RandomizerKind::Uniform || self.theta == F::zero()
    }

    fn small_tilt(&self) -> bool {
        (self.theta * self.epsilon).abs() < F::lit(SMALL_TILT)
    }

    /// `(e^{θε} − e^{−θε}) / θ`, the mass of `e^{θl}` over the support.
    fn normalizer(&self) -> F {
        let two = F::lit(2.0);
        if self.is_flat() {
            return two * self.epsilon;
        }
        let a = self.theta * self.epsilon;
        if self.small_tilt() {
            two * self.epsilon * (F::one() + a * a / F::lit(6.0))
        } else {
            two * a.sinh() / self.theta
        }
    }

    pub fn density_at(&self, l: F) -> F {
        if l.abs() > self.epsilon {
            return F::zero();
        }
        if self.is_flat() {
            return F::one() / (F::lit(2.0) * self.epsilon);
        }
        (self.theta * l).exp() / self.normalizer()
    }

    pub fn density_at_zero(&self) -> F {
        if self.is_flat() {
            F::one() / (F::lit(2.0) * self.epsilon)
        } else {
            F::one() / self.normalizer()
        }
    }

    /// `ℓ'/ℓ` at an interior offset: zero for the uniform density, `θ` for the exponential one.
    pub fn grad_log_density(&self, l: F) -> Result<F> {
        if l.abs() > self.epsilon {
            return Err(Error::OutsideSupport {
                offset: l.as_f64(),
                epsilon: self.epsilon.as_f64(),
            });
        }
        Ok(self.theta)
    }

    pub fn cdf(&self, l: F) -> F {
        if l <= -self.epsilon {
            return F::zero();
        }
        if l >= self.epsilon {
            return F::one();
        }
        let two = F::lit(2.0);
        if self.is_flat() {
            return (l + self.epsilon) / (two * self.epsilon);
        }
        if self.small_tilt() {
            let t = (l + self.epsilon) / (two * self.epsilon);
            // first-order tilt correction of the uniform CDF
            return t + self.theta * self.epsilon * t * (t - F::one());
        }
        (self.theta * (l + self.epsilon)).exp_m1() / (two * self.theta * self.epsilon).exp_m1()
    }

    /// Inverse-CDF draw of the offset from `u ∈ [0, 1)`; `lambda = λ⁰ − offset`.
    pub fn sample_offset(&self, u: F, lambda0: F) -> OffsetSample<F> {
        let two = F::lit(2.0);
        let eps = self.epsilon;
        let offset = if self.is_flat() {
            -eps + two * eps * u
        } else if self.small_tilt() {
            -eps + two * eps * u + two * self.theta * eps * eps * u * (F::one() - u)
        } else {
            // (1/θ) ln(e^{−θε} + u(e^{θε} − e^{−θε})) written around the left endpoint
            -eps + (u * (two * self.theta * eps).exp_m1()).ln_1p() / self.theta
        };
        let offset = offset.max(-eps).min(eps);
        OffsetSample {
            offset,
            lambda: lambda0 - offset,
        }
    }
}
