//! Exact, asymptotic and Monte Carlo computations for the total population
//! `S_n = X_1 + ... + X_n` of a subcritical branching process with immigration
//! `X_n = θ_n ∘ X_{n-1} + η_n` whose offspring or immigration law is regularly
//! varying.

pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod montecarlo;
pub mod process;
pub mod regvar;
pub mod scalar;

pub use error::{Error, Result};
pub use regvar::{Law, ModelParams, ModelTag};
pub use scalar::Real;
pub use montecarlo::{Estimate, Method};

pub type Pmf64 = exact::Pmf<f64>;
pub type Pmf32 = exact::Pmf<f32>;
pub type Constant64 = asymptotics::AsymptoticConstant<f64>;
pub type Constant32 = asymptotics::AsymptoticConstant<f32>;
