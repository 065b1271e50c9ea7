//! Exact truncated distributions: pmf algebra with tail-mass tracking, random
//! sums, and the laws of `Z_n`, `T_n`, `T`, `X_n`, the stationary `X`, `S_n`
//! and the pieces of its decomposition.

mod fft;
mod kernel;
mod laws;
mod pmf;
pub mod reference;

pub use fft::Multiplier;
pub use kernel::{compound, compound_naive, compound_with, convolve, convolve_power, convolve_with, CompoundMethod};
pub use laws::{
    pmf_sn, pmf_sn1, pmf_sn2, pmf_sn2_limit, pmf_sn2_limit_laws, pmf_stationary, pmf_stationary_laws,
    pmf_t, pmf_tn, pmf_tn_sequence, pmf_xn, pmf_xn_laws, pmf_zn, sandwich, split_centerings,
    strictly_below, Sandwich, SnEngine, DEFAULT_TOL, MAX_ITERATIONS,
};
pub use pmf::{Interval, Pmf, NEGATIVE_MASS_TOLERANCE};
