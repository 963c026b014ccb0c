//! Black–Scholes simulation and analytics for the Delta experiments.
//!
//! `Z = x e^Y` with `Y ~ N(m, Σ)`, `m = (r − σ²/2)T`, `Σ = σ²T`. The derivative ratios
//! `∇ₓᵏf / f = (Σᵢ aᵢᵏ dⁱ) / xᵏ` use `d(x, z) = (ln z − ln x − m)/Σ` and the coefficient
//! recursion `aᵢʲ⁺¹ = aᵢ₋₁ʲ − j aᵢʲ − ((i+1)/Σ) aᵢ₊₁ʲ`.

use crate::error::{Error, Result};
use crate::scalar::{normal_cdf, normal_pdf, Real};

/// Largest derivative order served by [`score_coefficients`].
pub const MAX_SCORE_ORDER: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GbmParams<F> {
    pub spot: F,
    pub rate: F,
    pub vol: F,
    pub maturity: F,
}

/// Law of `ln(Z/x)`: mean `m` and variance `Σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LognormalLaw<F> {
    pub m: F,
    pub sigma2: F,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Payoff<F> {
    DigitalCall { strike: F },
    VanillaCall { strike: F },
    Identity,
    Constant(F),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreCoefficients<F> {
    pub k: usize,
    pub a: Vec<F>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum AsianScheme {
    Trapezoid,
    LeftRiemann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct AsianConfig {
    pub steps: usize,
    pub scheme: AsianScheme,
}

impl Default for AsianConfig {
    fn default() -> Self {
        AsianConfig {
            steps: 50,
            scheme: AsianScheme::Trapezoid,
        }
    }
}

impl<F: Real> GbmParams<F> {
    pub fn new(spot: F, rate: F, vol: F, maturity: F) -> Result<Self> {
        if !(spot > F::zero()) {
            return Err(Error::InvalidArgument(format!("spot must be positive, got {spot}")));
        }
        if !(vol > F::zero()) || !(maturity > F::zero()) {
            return Err(Error::InvalidArgument(format!(
                "volatility and maturity must be positive, got {vol} and {maturity}"
            )));
        }
        if !rate.is_finite() {
            return Err(Error::InvalidArgument(format!("rate must be finite, got {rate}")));
        }
        Ok(GbmParams { spot, rate, vol, maturity })
    }

    /// `S0 = 120, r = 0, σ = 0.2, T = 1`.
    pub fn reference_setup() -> Self {
        GbmParams {
            spot: F::lit(120.0),
            rate: F::zero(),
            vol: F::lit(0.2),
            maturity: F::one(),
        }
    }

    /// Same dynamics started from another spot.
    pub fn with_spot(&self, spot: F) -> Self {
        GbmParams { spot, ..*self }
    }

    pub fn law(&self) -> LognormalLaw<F> {
        lognormal_params(self)
    }

    /// `x·exp(m + √Σ·gauss)`.
    #[inline]
    pub fn terminal(&self, gauss: F) -> F {
        let law = self.law();
        self.spot * (law.m + law.sigma2.sqrt() * gauss).exp()
    }

    /// Discretized `∫₀ᵀ S dt` from exact GBM increments on `t_j = jT/M`.
    pub fn asian_average(&self, cfg: &AsianConfig, gauss_path: &[F]) -> Result<F> {
        simulate_asian(self, cfg, gauss_path)
    }
}

pub fn lognormal_params<F: Real>(g: &GbmParams<F>) -> LognormalLaw<F> {
    let half = F::lit(0.5);
    LognormalLaw {
        m: (g.rate - half * g.vol * g.vol) * g.maturity,
        sigma2: g.vol * g.vol * g.maturity,
    }
}

pub fn simulate_terminal<F: Real>(g: &GbmParams<F>, gauss: F) -> F {
    g.terminal(gauss)
}

pub fn simulate_asian<F: Real>(g: &GbmParams<F>, cfg: &AsianConfig, gauss_path: &[F]) -> Result<F> {
    if cfg.steps == 0 {
        return Err(Error::InvalidArgument("Asian discretization needs at least one step".into()));
    }
    if gauss_path.len() != cfg.steps {
        return Err(Error::DimensionMismatch {
            expected: cfg.steps,
            got: gauss_path.len(),
        });
    }
    let dt = g.maturity / F::from_usize_lossy(cfg.steps);
    let drift = (g.rate - F::lit(0.5) * g.vol * g.vol) * dt;
    let diffusion = g.vol * dt.sqrt();
    let mut s = g.spot;
    let mut acc = match cfg.scheme {
        AsianScheme::Trapezoid => F::lit(0.5) * s,
        AsianScheme::LeftRiemann => s,
    };
    let last = cfg.steps - 1;
    for (j, &z) in gauss_path.iter().enumerate() {
        s *= (drift + diffusion * z).exp();
        match cfg.scheme {
            AsianScheme::Trapezoid if j == last => acc += F::lit(0.5) * s,
            AsianScheme::LeftRiemann if j == last => {}
            _ => acc += s,
        }
    }
    Ok(acc * dt)
}

fn check_state<F: Real>(z: F) -> Result<()> {
    if z > F::zero() {
        Ok(())
    } else {
        Err(Error::NonPositiveState(z.as_f64()))
    }
}

/// Lognormal density of `Z^x` at `z`.
pub fn density_f<F: Real>(g: &GbmParams<F>, z: F) -> Result<F> {
    check_state(z)?;
    let law = g.law();
    let y = z.ln() - g.spot.ln() - law.m;
    let two = F::lit(2.0);
    Ok((-(y * y) / (two * law.sigma2)).exp() / (z * (two * F::PI() * law.sigma2).sqrt()))
}

pub fn standardized_d<F: Real>(g: &GbmParams<F>, z: F) -> Result<F> {
    check_state(z)?;
    Ok(standardized_d_with(&g.law(), g.spot, z))
}

#[inline]
fn standardized_d_with<F: Real>(law: &LognormalLaw<F>, x: F, z: F) -> F {
    (z.ln() - x.ln() - law.m) / law.sigma2
}

/// Coefficients `a₀ᵏ … a_kᵏ`; `k = 0` is the seed row `(1)`.
pub fn score_coefficients<F: Real>(law: &LognormalLaw<F>, k: usize) -> Result<ScoreCoefficients<F>> {
    if k > MAX_SCORE_ORDER {
        return Err(Error::InvalidArgument(format!(
            "derivative order {k} exceeds {MAX_SCORE_ORDER}"
        )));
    }
    let mut row = vec![F::one()];
    for j in 0..k {
        let jf = F::from_usize_lossy(j);
        let mut next = vec![F::zero(); j + 2];
        for (i, slot) in next.iter_mut().enumerate() {
            let below = if i >= 1 { row[i - 1] } else { F::zero() };
            let same = row.get(i).copied().unwrap_or_else(F::zero);
            let above = row.get(i + 1).copied().unwrap_or_else(F::zero);
            *slot = below - jf * same - F::from_usize_lossy(i + 1) / law.sigma2 * above;
        }
        row = next;
    }
    Ok(ScoreCoefficients { k, a: row })
}

impl<F: Real> ScoreCoefficients<F> {
    /// `Σᵢ aᵢ dⁱ / xᵏ`.
    #[inline]
    pub fn ratio(&self, d: F, x: F) -> F {
        let poly = self.a.iter().rev().fold(F::zero(), |acc, &c| acc * d + c);
        poly / x.powi(self.k as i32)
    }
}

/// `∇ₓᵏf(x, z) / f(x, z)` under the model's own law.
pub fn density_ratio<F: Real>(g: &GbmParams<F>, z: F, k: usize) -> Result<F> {
    check_state(z)?;
    let law = g.law();
    let coeffs = score_coefficients(&law, k)?;
    Ok(coeffs.ratio(standardized_d_with(&law, g.spot, z), g.spot))
}

/// Score `∂ₓ ln f(x, z) = d(x, z)/x`.
#[inline]
pub fn score<F: Real>(g: &GbmParams<F>, z: F) -> F {
    standardized_d_with(&g.law(), g.spot, z) / g.spot
}

impl<F: Real> Payoff<F> {
    #[inline]
    pub fn eval(&self, z: F) -> F {
        match *self {
            Payoff::DigitalCall { strike } => {
                if z > strike {
                    F::one()
                } else {
                    F::zero()
                }
            }
            Payoff::VanillaCall { strike } => (z - strike).max(F::zero()),
            Payoff::Identity => z,
            Payoff::Constant(c) => c,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Payoff::DigitalCall { .. } => "digital",
            Payoff::VanillaCall { .. } => "vanilla",
            Payoff::Identity => "identity",
            Payoff::Constant(_) => "constant",
        }
    }

    pub fn strike(&self) -> Option<F> {
        match *self {
            Payoff::DigitalCall { strike } | Payoff::VanillaCall { strike } => Some(strike),
            _ => None,
        }
    }
}

pub fn payoff_eval<F: Real>(p: &Payoff<F>, z: F) -> F {
    p.eval(z)
}

/// `e^{−rT} n(d₂) / (xσ√T)`: Delta of the undiscounted-payoff digital `E[1_{Z>K}]` times the discount.
pub fn closed_form_digital_delta<F: Real>(g: &GbmParams<F>, strike: F) -> F {
    if !(strike > F::zero()) {
        return F::zero();
    }
    let vol_t = g.vol * g.maturity.sqrt();
    let d2 = ((g.spot / strike).ln() + (g.rate - F::lit(0.5) * g.vol * g.vol) * g.maturity) / vol_t;
    (-g.rate * g.maturity).exp() * normal_pdf(d2) / (g.spot * vol_t)
}

/// `N(d₁)`.
pub fn closed_form_vanilla_delta<F: Real>(g: &GbmParams<F>, strike: F) -> F {
    if !(strike > F::zero()) {
        return F::one();
    }
    let vol_t = g.vol * g.maturity.sqrt();
    let d1 = ((g.spot / strike).ln() + (g.rate + F::lit(0.5) * g.vol * g.vol) * g.maturity) / vol_t;
    normal_cdf(d1)
}

/// Delta of `E[φ(S_T)]` for the European payoffs, as the estimators target it (no discounting).
///
/// For the digital this is `n(d₂)/(xσ√T)`; for the vanilla call `e^{rT}N(d₁)`.
pub fn european_delta<F: Real>(g: &GbmParams<F>, payoff: &Payoff<F>) -> F {
    let growth = (g.rate * g.maturity).exp();
    match *payoff {
        Payoff::DigitalCall { strike } => closed_form_digital_delta(g, strike) * growth,
        Payoff::VanillaCall { strike } => closed_form_vanilla_delta(g, strike) * growth,
        Payoff::Identity => growth,
        Payoff::Constant(_) => F::zero(),
    }
}
