//! Monte Carlo Greeks by randomizing the differentiation parameter and smoothing with a kernel.
//!
//! The derivative `∂λ E[φ(Z(λ))]` at `λ⁰` is estimated from draws `(Λᵢ, Zᵢ)` where `Λᵢ` is
//! spread around `λ⁰` by a compactly supported density and `Zᵢ` is simulated at `Λᵢ`.
//! Module overview:
//!
//! - [`kernel`]: polynomial smoothing kernels, their moments and roughness.
//! - [`randomization`]: uniform and truncated exponential randomizers.
//! - [`market`]: Black–Scholes dynamics, payoffs, lognormal score functions, closed forms.
//! - [`estimators`]: the kernel estimators plus likelihood-ratio and finite-difference baselines.
//! - [`bandwidth`]: pilot constants and MSE-optimal bandwidth and tilt.
//! - [`harness`]: replicated experiments, statistics, CSV/JSON export.

pub mod bandwidth;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod kernel;
pub mod market;
pub mod randomization;
pub mod scalar;

pub use bandwidth::{BandwidthChoice, BandwidthMode, PilotEstimates};
pub use error::{Error, Result};
pub use estimators::{Estimate, EstimatorConfig, EstimatorId, FdConfig, SamplePoint, SampleSet, StateKind};
pub use kernel::{Kernel, KernelFamily, KernelFunctionals};
pub use market::{AsianConfig, AsianScheme, GbmParams, LognormalLaw, Payoff};
pub use randomization::{OffsetSample, Randomizer, RandomizerKind};
pub use scalar::Real;

pub type Kernel64 = Kernel<f64>;
pub type Kernel32 = Kernel<f32>;
pub type Randomizer64 = Randomizer<f64>;
pub type GbmParams64 = GbmParams<f64>;
pub type Payoff64 = Payoff<f64>;
pub type SampleSet64 = SampleSet<f64>;
pub type EstimatorConfig64 = EstimatorConfig<f64>;
pub type Estimate64 = Estimate<f64>;
pub type FdConfig64 = FdConfig<f64>;
pub type PilotEstimates64 = PilotEstimates<f64>;
pub type BandwidthChoice64 = BandwidthChoice<f64>;
