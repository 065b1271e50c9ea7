//! Threshold sequences `x_n` and centerings `d_n`.

use crate::error::{domain, Result};
use crate::regvar::ModelParams;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `x_n = n^(δ + 1/κ)`, for `κ ≤ 2`.
    Power,
    /// `x_n = √(a n ln n)`, for `κ > 2`.
    SqrtLog,
}

/// Threshold rule. `delta_or_a` is the exponent margin `δ` (not the moment
/// margin of the model) in the power regime and `a` in the square-root one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec<T: Real = f64> {
    kappa: T,
    delta_or_a: T,
    regime: Regime,
}

impl<T: Real> ThresholdSpec<T> {
    /// Picks the regime from `κ` and validates the parameter.
    pub fn new(kappa: T, delta_or_a: T) -> Result<Self> {
        if !kappa.is_finite() || kappa <= T::zero() {
            return Err(domain(format!("tail index must be finite and positive, got {kappa}")));
        }
        let two = T::of(2.0);
        let regime = if kappa <= two { Regime::Power } else { Regime::SqrtLog };
        match regime {
            Regime::Power if !(delta_or_a > T::zero()) => {
                return Err(domain(format!("threshold exponent margin must be > 0, got {delta_or_a}")));
            }
            Regime::SqrtLog if !(delta_or_a > kappa - two) => {
                return Err(domain(format!("need a > κ−2 = {}, got {delta_or_a}", kappa - two)));
            }
            _ => {}
        }
        Ok(Self { kappa, delta_or_a, regime })
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn delta_or_a(&self) -> T {
        self.delta_or_a
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }
}

/// `x_n` under `spec`.
pub fn threshold<T: Real>(spec: &ThresholdSpec<T>, n: usize) -> Result<T> {
    let nf = T::from_usize_lossy(n);
    match spec.regime {
        Regime::Power => {
            if n == 0 {
                return Err(domain("n ≥ 1 required"));
            }
            Ok(nf.powf(spec.delta_or_a + spec.kappa.recip()))
        }
        Regime::SqrtLog => {
            if n < 2 {
                return Err(domain("n ≥ 2 required for the square-root threshold"));
            }
            Ok((spec.delta_or_a * nf * nf.ln()).sqrt())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenteringRule {
    /// `d_n = 0`, for `κ ≤ 1`.
    Zero,
    /// `d_n = E S_n`, for `κ > 1`.
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenteringSpec {
    pub kappa: f64,
    pub rule: CenteringRule,
}

impl CenteringSpec {
    pub fn for_kappa(kappa: f64) -> Self {
        let rule = if kappa <= 1.0 { CenteringRule::Zero } else { CenteringRule::Mean };
        Self { kappa, rule }
    }
}

/// `E S_n = (β/(1−α)) (n − α(1−α^n)/(1−α))`.
pub fn mean_sn<T: Real>(alpha: T, beta: T, n: usize) -> T {
    let q = T::one() - alpha;
    let an = alpha.powf(T::from_usize_lossy(n));
    beta / q * (T::from_usize_lossy(n) - alpha * (T::one() - an) / q)
}

/// `d_n` for the model: zero when `κ ≤ 1`, `E S_n` otherwise.
pub fn centering<T: Real>(params: &ModelParams, n: usize) -> T {
    match CenteringSpec::for_kappa(params.kappa()).rule {
        CenteringRule::Zero => T::zero(),
        CenteringRule::Mean => mean_sn(T::of(params.alpha()), T::of(params.beta()), n),
    }
}

/// Limits for iid sums: `P(S_n − d_n > x) ~ p n P(|X|>x)` and
/// `P(S_n − d_n ≤ −x) ~ q n P(|X|>x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IidReference {
    pub upper: f64,
    pub lower: f64,
    pub regime: Regime,
    pub centering: CenteringSpec,
}

/// Reference limits for iid summands whose tails split as `p : q`.
pub fn iid_ld_reference(kappa: f64, p_pos: f64, q_neg: f64) -> Result<IidReference> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(domain(format!("tail index must be finite and positive, got {kappa}")));
    }
    if p_pos < 0.0 || q_neg < 0.0 || ((p_pos + q_neg) - 1.0).abs() > 1e-12 {
        return Err(domain(format!("tail weights must be nonnegative and sum to 1, got {p_pos} + {q_neg}")));
    }
    Ok(IidReference {
        upper: p_pos,
        lower: q_neg,
        regime: if kappa <= 2.0 { Regime::Power } else { Regime::SqrtLog },
        centering: CenteringSpec::for_kappa(kappa),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regvar::Law;
    use approx::assert_relative_eq;

    #[test]
    fn threshold_examples() {
        let power = ThresholdSpec::new(2.0, 0.1).unwrap();
        assert_relative_eq!(threshold(&power, 100).unwrap(), 100f64.powf(0.6), max_relative = 1e-15);
        assert_relative_eq!(threshold(&power, 100).unwrap(), 15.849, max_relative = 1e-4);
        let sqrt = ThresholdSpec::new(3.0, 1.5).unwrap();
        assert_eq!(sqrt.regime(), Regime::SqrtLog);
        assert_relative_eq!(threshold(&sqrt, 100).unwrap(), 26.28, max_relative = 1e-3);
        assert!(ThresholdSpec::new(3.0, 0.5).is_err());
        assert!(ThresholdSpec::new(2.0, 0.0).is_err());
        assert!(threshold(&sqrt, 1).is_err());
    }

    #[test]
    fn centering_examples() {
        let heavy = ModelParams::new(Law::bernoulli(0.5).unwrap(), Law::discrete_pareto(0.8).unwrap()).unwrap();
        for n in [1, 5, 100] {
            assert_eq!(centering::<f64>(&heavy, n), 0.0);
        }
        let a = ModelParams::new(Law::bernoulli(0.5).unwrap(), Law::point(1)).unwrap();
        assert_relative_eq!(centering::<f64>(&a, 2), 2.5, max_relative = 1e-15);
        let drift = centering::<f64>(&a, 200) - 400.0;
        assert_relative_eq!(drift, -2.0, max_relative = 1e-12);
    }

    #[test]
    fn iid_reference_examples() {
        let nonneg = iid_ld_reference(2.5, 1.0, 0.0).unwrap();
        assert_eq!((nonneg.upper, nonneg.lower), (1.0, 0.0));
        assert_eq!(nonneg.regime, Regime::SqrtLog);
        assert_eq!(nonneg.centering.rule, CenteringRule::Mean);
        let sym = iid_ld_reference(1.5, 0.5, 0.5).unwrap();
        assert_eq!((sym.upper, sym.lower), (0.5, 0.5));
        assert!(iid_ld_reference(2.0, 0.6, 0.6).is_err());
    }
}
