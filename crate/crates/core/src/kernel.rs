//! Compactly supported polynomial kernels and the integral functionals that enter the
//! bias and variance constants of the kernel Greek estimators.
//!
//! A kernel is stored as a power series `K(u) = Σ c_j u^j` on `[-M, M]` and is zero outside.
//! The three builtins keep their coefficients as exact rationals as well, so their moments
//! and roughness are computed without quadrature error.

use std::sync::OnceLock;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Moments with magnitude above this are treated as nonzero when scanning for the order.
pub const MOMENT_ZERO_THRESHOLD: f64 = 1e-8;

const MAX_MOMENT: u32 = 10;
const QUADRATURE_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum KernelFamily {
    Poly2,
    Poly4,
    Poly6,
    Custom,
}

impl KernelFamily {
    pub fn builtin_order(self) -> Option<u32> {
        match self {
            KernelFamily::Poly2 => Some(2),
            KernelFamily::Poly4 => Some(4),
            KernelFamily::Poly6 => Some(6),
            KernelFamily::Custom => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel<F> {
    family: KernelFamily,
    order: u32,
    support: F,
    coeffs: Vec<F>,
    exact: Option<Vec<Ratio<i64>>>,
}

/// `(∫u^p K, ∫(K')², M)` for a kernel of order `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelFunctionals<F> {
    pub moment_p: F,
    pub roughness: F,
    pub support_radius: F,
}

fn r(n: i64, d: i64) -> Ratio<i64> {
    Ratio::new(n, d)
}

/// Exact power-series coefficients of the builtin kernels on [-1, 1].
fn builtin_coefficients(family: KernelFamily) -> Vec<Ratio<i64>> {
    match family {
        // 3/4 (1 - u²)
        KernelFamily::Poly2 => vec![r(3, 4), r(0, 1), r(-3, 4)],
        // 15/32 (1 - u²)(3 - 7u²) = 15/32 (3 - 10u² + 7u⁴)
        KernelFamily::Poly4 => [3, 0, -10, 0, 7].iter().map(|&c| r(15 * c, 32)).collect(),
        // 105/256 (1 - u²)(33u⁴ - 30u² + 5) = 105/256 (5 - 35u² + 63u⁴ - 33u⁶)
        KernelFamily::Poly6 => [5, 0, -35, 0, 63, 0, -33]
            .iter()
            .map(|&c| r(105 * c, 256))
            .collect(),
        KernelFamily::Custom => unreachable!("custom kernels have no builtin coefficients"),
    }
}

fn ratio_to_f64(q: Ratio<i64>) -> f64 {
    q.to_f64().expect("finite ratio")
}

/// ∫_{-1}^{1} u^n du.
fn exact_power_integral(n: u32) -> Ratio<i64> {
    if n % 2 == 1 {
        Ratio::zero()
    } else {
        r(2, i64::from(n) + 1)
    }
}

fn horner<F: Real>(coeffs: &[F], u: F) -> F {
    coeffs.iter().rev().fold(F::zero(), |acc, &c| acc * u + c)
}

fn derivative_coeffs<F: Real>(coeffs: &[F]) -> Vec<F> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, &c)| c * F::from_usize_lossy(j))
        .collect()
}

impl<F: Real> Kernel<F> {
    pub fn builtin(family: KernelFamily) -> Self {
        let order = family
            .builtin_order()
            .expect("builtin() needs Poly2, Poly4 or Poly6");
        let exact = builtin_coefficients(family);
        let coeffs = exact.iter().map(|&q| F::lit(ratio_to_f64(q))).collect();
        Kernel {
            family,
            order,
            support: F::one(),
            coeffs,
            exact: Some(exact),
        }
    }

    pub fn poly2() -> Self {
        Self::builtin(KernelFamily::Poly2)
    }

    pub fn poly4() -> Self {
        Self::builtin(KernelFamily::Poly4)
    }

    pub fn poly6() -> Self {
        Self::builtin(KernelFamily::Poly6)
    }

    /// Builds a polynomial kernel `Σ c_j u^j` on `[-support, support]`.
    ///
    /// The kernel must integrate to one, vanish at the support edges, and have the declared
    /// order; its functionals are then computed by 64-node Gauss–Legendre quadrature.
    pub fn custom(coeffs: Vec<F>, support: F, order: u32) -> Result<Self> {
        if !(support > F::zero()) || !support.is_finite() {
            return Err(Error::InvalidKernel(format!("support radius {support} must be positive")));
        }
        if order < 2 {
            return Err(Error::InvalidKernel(format!("order {order} must be at least 2")));
        }
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidKernel("coefficients must be finite and non-empty".into()));
        }
        let kernel = Kernel {
            family: KernelFamily::Custom,
            order,
            support,
            coeffs,
            exact: None,
        };
        let mass = kernel.moment(0).as_f64();
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidKernel(format!("integral is {mass}, expected 1")));
        }
        let edge = horner(&kernel.coeffs, support)
            .abs()
            .max(horner(&kernel.coeffs, -support).abs());
        if edge.as_f64() > 1e-10 {
            return Err(Error::InvalidKernel(format!("kernel does not vanish at ±M ({edge})")));
        }
        kernel.verify_order()?;
        Ok(kernel)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn support_radius(&self) -> F {
        self.support
    }

    pub fn coefficients(&self) -> &[F] {
        &self.coeffs
    }

    #[inline]
    pub fn eval(&self, u: F) -> F {
        if u.abs() > self.support {
            F::zero()
        } else {
            horner(&self.coeffs, u)
        }
    }

    /// `dK/du`, zero outside the support. At `|u| = M` the one-sided polynomial derivative is returned.
    #[inline]
    pub fn gradient(&self, u: F) -> F {
        if u.abs() > self.support {
            return F::zero();
        }
        let mut acc = F::zero();
        for (j, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * u + c * F::from_usize_lossy(j);
        }
        acc
    }

    /// `∫u^r K(u) du`. Exact for builtins, Gauss–Legendre otherwise.
    pub fn moment(&self, r: u32) -> F {
        match self.exact_moment(r) {
            Some(q) => F::lit(ratio_to_f64(q)),
            None => self.moment_by_quadrature(r),
        }
    }

    /// `∫(K')² du`. Exact for builtins, Gauss–Legendre otherwise.
    pub fn roughness(&self) -> F {
        match self.exact_roughness() {
            Some(q) => F::lit(ratio_to_f64(q)),
            None => self.roughness_by_quadrature(),
        }
    }

    pub fn moment_by_quadrature(&self, r: u32) -> F {
        let powers = r as i32;
        gauss_legendre(self.support, |u| u.powi(powers) * horner(&self.coeffs, u))
    }

    pub fn roughness_by_quadrature(&self) -> F {
        let d = derivative_coeffs(&self.coeffs);
        gauss_legendre(self.support, |u| {
            let g = horner(&d, u);
            g * g
        })
    }

    /// Rational `∫u^r K` for builtin kernels.
    pub fn exact_moment(&self, r: u32) -> Option<Ratio<i64>> {
        let exact = self.exact.as_ref()?;
        Some(
            exact
                .iter()
                .enumerate()
                .map(|(j, &c)| c * exact_power_integral(r + j as u32))
                .fold(Ratio::zero(), |a, b| a + b),
        )
    }

    /// Rational `∫(K')²` for builtin kernels.
    pub fn exact_roughness(&self) -> Option<Ratio<i64>> {
        let exact = self.exact.as_ref()?;
        let deriv: Vec<Ratio<i64>> = exact
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, &c)| c * Ratio::from_integer(j as i64))
            .collect();
        let mut total = Ratio::zero();
        for (a, &ca) in deriv.iter().enumerate() {
            for (b, &cb) in deriv.iter().enumerate() {
                total += ca * cb * exact_power_integral((a + b) as u32);
            }
        }
        Some(total)
    }

    pub fn functionals(&self) -> KernelFunctionals<F> {
        KernelFunctionals {
            moment_p: self.moment(self.order),
            roughness: self.roughness(),
            support_radius: self.support,
        }
    }

    /// Scans moments `r = 1..=10` for the first one above [`MOMENT_ZERO_THRESHOLD`] and checks
    /// it against the declared order.
    pub fn verify_order(&self) -> Result<u32> {
        let threshold = F::lit(MOMENT_ZERO_THRESHOLD);
        let scanned = (1..=MAX_MOMENT)
            .find(|&r| self.moment(r).abs() > threshold)
            .unwrap_or(MAX_MOMENT + 1);
        if scanned == self.order {
            Ok(scanned)
        } else {
            Err(Error::OrderMismatch {
                declared: self.order,
                scanned,
            })
        }
    }
}

/// Nodes and weights of the 64-point Gauss–Legendre rule on [-1, 1].
fn legendre_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = QUADRATURE_NODES;
        let mut rule = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        rule
    })
}

fn gauss_legendre<F: Real>(half_width: F, f: impl Fn(F) -> F) -> F {
    let sum = legendre_rule()
        .iter()
        .fold(F::zero(), |acc, &(x, w)| acc + F::lit(w) * f(half_width * F::lit(x)));
    sum * half_width
}

impl<F: Real> KernelFunctionals<F> {
    pub fn of(kernel: &Kernel<F>) -> Self {
        kernel.functionals()
    }
}
