//! Closed-form limit constants, centerings and threshold sequences.
//!
//! Every constant is the limit of `P(· > x) / P(driver > x)` for some
//! quantity built from the process, where the driver is `η` (model A) or
//! `ξ` (model B).

mod threshold;

use std::fmt;

use crate::error::{domain, Result};
use crate::regvar::{ModelParams, ModelTag};
use crate::scalar::{CompensatedSum, Real};

pub use threshold::{centering, mean_sn, iid_ld_reference, threshold, CenteringRule, CenteringSpec, IidReference, Regime, ThresholdSpec};

/// Below this distance from 1 the `Z_n` constant uses its `κ = 1` limit.
pub const KAPPA_ONE_BAND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstantTag {
    Zn,
    Tn,
    TTotal,
    XA,
    XB,
    SnA,
    SnB,
    LdA,
    LdB,
    CompoundHeavyCount,
    CompoundHeavySummand,
    CompoundComparable,
    SinfA,
    SinfB,
}

impl ConstantTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstantTag::Zn => "ZN",
            ConstantTag::Tn => "TN",
            ConstantTag::TTotal => "TTOTAL",
            ConstantTag::XA => "X_A",
            ConstantTag::XB => "X_B",
            ConstantTag::SnA => "SN_A",
            ConstantTag::SnB => "SN_B",
            ConstantTag::LdA => "LD_A",
            ConstantTag::LdB => "LD_B",
            ConstantTag::CompoundHeavyCount => "COMPOUND_HEAVY_COUNT",
            ConstantTag::CompoundHeavySummand => "COMPOUND_HEAVY_SUMMAND",
            ConstantTag::CompoundComparable => "COMPOUND_COMPARABLE",
            ConstantTag::SinfA => "SINF_A",
            ConstantTag::SinfB => "SINF_B",
        }
    }
}

impl fmt::Display for ConstantTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A limit constant together with what it is the limit of.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticConstant<T: Real = f64> {
    pub value: T,
    pub tag: ConstantTag,
    /// Human-readable formula, e.g. `P(T>x)/P(ξ>x) → 1/(1−α)^(κ+1)`.
    pub provenance: &'static str,
}

impl<T: Real> AsymptoticConstant<T> {
    fn new(value: T, tag: ConstantTag, provenance: &'static str) -> Result<Self> {
        if !value.is_finite() || value < T::zero() {
            return Err(domain(format!("{tag} constant evaluates to {value}")));
        }
        Ok(Self { value, tag, provenance })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnderlyingKind {
    /// Generation size `Z_n` of a single-ancestor process.
    Zn,
    /// Progeny `T_n` up to generation `n`.
    Tn,
    /// Total progeny `T`.
    TTotal,
}

/// Which of the three compound-sum regimes applies to `Σ_{i≤N} W_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompoundRegime {
    /// Count heavier than summands: `(EW)^κ`.
    HeavyCount,
    /// Summands heavier than count: `EN`.
    HeavySummand,
    /// Comparable tails with `P(N>x) ~ c P(W>x)`: `EN + c (EW)^κ`.
    Comparable,
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(domain(format!("offspring mean must lie in (0,1), got {alpha}")));
    }
    Ok(())
}

fn check_kappa<T: Real>(kappa: T) -> Result<()> {
    if !kappa.is_finite() || kappa <= T::zero() {
        return Err(domain(format!("tail index must be finite and positive, got {kappa}")));
    }
    Ok(())
}

/// `((1 − α^i)/(1 − α))^κ`, i.e. `(Σ_{m<i} α^m)^κ`.
fn geometric_power<T: Real>(alpha: T, kappa: T, i: usize) -> T {
    let ln_a = alpha.ln();
    let partial = -(T::from_usize_lossy(i) * ln_a).exp_m1() / -ln_a.exp_m1();
    partial.powf(kappa)
}

/// `(α^n − α^{κn})/(α − α^κ)`, cancellation-free.
fn zn_value<T: Real>(alpha: T, kappa: T, n: usize) -> T {
    let ln_a = alpha.ln();
    let nf = T::from_usize_lossy(n);
    let lead = ((nf - T::one()) * ln_a).exp();
    if (kappa - T::one()).abs() < T::of(KAPPA_ONE_BAND) {
        return nf * lead;
    }
    let k1 = kappa - T::one();
    lead * (k1 * nf * ln_a).exp_m1() / (k1 * ln_a).exp_m1()
}

/// Limit constants for the single-ancestor process.
pub fn const_underlying<T: Real>(
    alpha: T,
    kappa: T,
    kind: UnderlyingKind,
    n: Option<usize>,
) -> Result<AsymptoticConstant<T>> {
    check_alpha(alpha)?;
    check_kappa(kappa)?;
    if kappa <= T::one() {
        return Err(domain(format!("underlying-process constants need κ > 1, got {kappa}")));
    }
    let need_n = || match n {
        Some(n) if n >= 1 => Ok(n),
        _ => Err(domain("generation count n ≥ 1 required")),
    };
    match kind {
        UnderlyingKind::Zn => {
            let n = need_n()?;
            AsymptoticConstant::new(
                zn_value(alpha, kappa, n),
                ConstantTag::Zn,
                "P(Z_n>x)/P(ξ>x) → (α^n − α^(κn))/(α − α^κ)",
            )
        }
        UnderlyingKind::Tn => {
            let n = need_n()?;
            let mut acc = CompensatedSum::new();
            for i in 0..n {
                acc.add(alpha.powi(i as i32) * geometric_power(alpha, kappa, n - i));
            }
            AsymptoticConstant::new(
                acc.value(),
                ConstantTag::Tn,
                "P(T_n>x)/P(ξ>x) → Σ_{i<n} α^i ((1−α^(n−i))/(1−α))^κ",
            )
        }
        UnderlyingKind::TTotal => AsymptoticConstant::new(
            (T::one() - alpha).powf(kappa + T::one()).recip(),
            ConstantTag::TTotal,
            "P(T>x)/P(ξ>x) → 1/(1−α)^(κ+1)",
        ),
    }
}

/// The scalars every model constant depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantInputs<T: Real = f64> {
    pub tag: ModelTag,
    pub alpha: T,
    pub kappa: T,
    pub beta: T,
    pub p: T,
}

impl<T: Real> ConstantInputs<T> {
    pub fn new(tag: ModelTag, alpha: T, kappa: T, beta: T, p: T) -> Result<Self> {
        check_alpha(alpha)?;
        check_kappa(kappa)?;
        if !(beta >= T::zero() && beta.is_finite() && p >= T::zero() && p.is_finite()) {
            return Err(domain(format!("need finite β, p ≥ 0, got β={beta}, p={p}")));
        }
        Ok(Self { tag, alpha, kappa, beta, p })
    }

    /// Rejects models whose driver has no finite tail index.
    pub fn from_params(params: &ModelParams) -> Result<Self> {
        let kappa = params.kappa();
        if !kappa.is_finite() {
            return Err(domain("model has no heavy-tailed driver, constants undefined"));
        }
        Self::new(
            params.tag(),
            T::of(params.alpha()),
            T::of(kappa),
            T::of(params.beta()),
            T::of(params.p()),
        )
    }

    /// Tail constant of the stationary law `X`.
    pub fn stationary(&self) -> Result<AsymptoticConstant<T>> {
        let Self { alpha, kappa, beta, p, .. } = *self;
        let denom = T::one() - alpha.powf(kappa);
        match self.tag {
            ModelTag::A => AsymptoticConstant::new(denom.recip(), ConstantTag::XA, "P(X>x)/P(η>x) → 1/(1−α^κ)"),
            ModelTag::B => AsymptoticConstant::new(
                (beta / (T::one() - alpha) + p) / denom,
                ConstantTag::XB,
                "P(X>x)/P(ξ>x) → (β/(1−α) + p)/(1−α^κ)",
            ),
        }
    }

    /// Fixed-`n` constant of `P(S_n > x)/P(driver > x)`.
    ///
    /// Model A sums `g(i) = ((1−α^i)/(1−α))^κ` over `i = 1..=n`. Model B adds
    /// `β c(i−1) + p g(i)` where `c(0) = 0` and `c(i) = α c(i−1) + g(i)` is
    /// the `T_i` constant.
    pub fn sn_fixed(&self, n: usize) -> Result<AsymptoticConstant<T>> {
        if n == 0 {
            return Err(domain("n ≥ 1 required"));
        }
        let Self { alpha, kappa, beta, p, .. } = *self;
        let mut acc = CompensatedSum::new();
        match self.tag {
            ModelTag::A => {
                for i in 1..=n {
                    acc.add(geometric_power(alpha, kappa, i));
                }
                AsymptoticConstant::new(acc.value(), ConstantTag::SnA, "P(S_n>x)/P(η>x) → Σ_{i≤n} ((1−α^i)/(1−α))^κ")
            }
            ModelTag::B => {
                let mut c = T::zero();
                for i in 1..=n {
                    let g = geometric_power(alpha, kappa, i);
                    acc.add(beta * c + p * g);
                    c = alpha * c + g;
                }
                AsymptoticConstant::new(
                    acc.value(),
                    ConstantTag::SnB,
                    "P(S_n>x)/P(ξ>x) → Σ_{i≤n} [β c_T(i−1) + p ((1−α^i)/(1−α))^κ]",
                )
            }
        }
    }

    /// Uniform large-deviation constant of `P(S_n − d_n > x)/(n P(driver > x))`.
    pub fn ld(&self) -> Result<AsymptoticConstant<T>> {
        let Self { alpha, kappa, beta, p, .. } = *self;
        let q = T::one() - alpha;
        match self.tag {
            ModelTag::A => AsymptoticConstant::new(
                q.powf(kappa).recip(),
                ConstantTag::LdA,
                "P(S_n−d_n>x)/(n P(η>x)) → 1/(1−α)^κ",
            ),
            ModelTag::B => AsymptoticConstant::new(
                (beta + p * q) / q.powf(kappa + T::one()),
                ConstantTag::LdB,
                "P(S_n−d_n>x)/(n P(ξ>x)) → (β + p(1−α))/(1−α)^(κ+1)",
            ),
        }
    }

    /// Constant of `P(S^∞ > x)/P(driver > x)` where `S^∞` is the progeny of
    /// the children of a stationary population.
    pub fn sinf(&self) -> Result<AsymptoticConstant<T>> {
        let Self { alpha, kappa, beta, p, .. } = *self;
        let q = T::one() - alpha;
        let ak = alpha.powf(kappa);
        let stationary_children = (q.powf(kappa) * (T::one() - ak)).recip();
        match self.tag {
            ModelTag::A => AsymptoticConstant::new(
                ak * stationary_children,
                ConstantTag::SinfA,
                "P(S^∞>x)/P(η>x) → α^κ/((1−α)^κ (1−α^κ))",
            ),
            ModelTag::B => AsymptoticConstant::new(
                beta * alpha / q.powf(kappa + T::of(2.0)) + stationary_children * (beta / q + p * ak),
                ConstantTag::SinfB,
                "P(S^∞>x)/P(ξ>x) → βα/(1−α)^(κ+2) + (β/(1−α) + pα^κ)/((1−α)^κ (1−α^κ))",
            ),
        }
    }
}

pub fn const_stationary<T: Real>(params: &ModelParams) -> Result<AsymptoticConstant<T>> {
    ConstantInputs::from_params(params)?.stationary()
}

pub fn const_sn_fixed<T: Real>(params: &ModelParams, n: usize) -> Result<AsymptoticConstant<T>> {
    ConstantInputs::from_params(params)?.sn_fixed(n)
}

pub fn const_ld<T: Real>(params: &ModelParams) -> Result<AsymptoticConstant<T>> {
    ConstantInputs::from_params(params)?.ld()
}

pub fn const_sinf<T: Real>(params: &ModelParams) -> Result<AsymptoticConstant<T>> {
    ConstantInputs::from_params(params)?.sinf()
}

/// Constant of `P(Σ_{i≤N} W_i > x)`, relative to the heavier of `N` and `W`.
pub fn compound_tail_constant<T: Real>(
    regime: CompoundRegime,
    mean_summand: T,
    mean_count: T,
    kappa: T,
    c: T,
) -> Result<AsymptoticConstant<T>> {
    check_kappa(kappa)?;
    match regime {
        CompoundRegime::HeavyCount => AsymptoticConstant::new(
            mean_summand.powf(kappa),
            ConstantTag::CompoundHeavyCount,
            "P(ΣW>x)/P(N>x) → (EW)^κ",
        ),
        CompoundRegime::HeavySummand => AsymptoticConstant::new(
            mean_count,
            ConstantTag::CompoundHeavySummand,
            "P(ΣW>x)/P(W>x) → EN",
        ),
        CompoundRegime::Comparable => AsymptoticConstant::new(
            mean_count + c * mean_summand.powf(kappa),
            ConstantTag::CompoundComparable,
            "P(ΣW>x)/P(W>x) → EN + c (EW)^κ",
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regvar::Law;
    use approx::assert_relative_eq;

    fn model_a(kappa: f64) -> ModelParams {
        ModelParams::new(Law::bernoulli(0.5).unwrap(), Law::discrete_pareto(kappa).unwrap()).unwrap()
    }

    /// Model B with offspring mean `alpha`. With `p > 0` the immigration is
    /// comparable to the offspring and `beta` is ignored.
    fn model_b(kappa: f64, alpha: f64, beta: f64, p: f64) -> ModelParams {
        let w = alpha / crate::regvar::series::zeta(kappa);
        let xi = Law::zero_inflated_pareto(w, kappa).unwrap();
        let eta = if p > 0.0 {
            Law::zero_inflated_pareto(p * w, kappa).unwrap()
        } else {
            Law::finite(&[(0, 1.0 - beta / 2.0), (2, beta / 2.0)]).unwrap()
        };
        ModelParams::new(xi, eta).unwrap()
    }

    #[test]
    fn underlying_examples() {
        let zn = |n| const_underlying(0.5, 2.0, UnderlyingKind::Zn, Some(n)).unwrap().value;
        assert_eq!(zn(1), 1.0);
        assert_relative_eq!(zn(2), 0.75, max_relative = 1e-15);
        let tn = const_underlying(0.5, 2.0, UnderlyingKind::Tn, Some(2)).unwrap();
        assert_relative_eq!(tn.value, 2.75, max_relative = 1e-15);
        let t = const_underlying(0.5, 2.0, UnderlyingKind::TTotal, None).unwrap();
        assert_relative_eq!(t.value, 8.0, max_relative = 1e-15);
        assert!(const_underlying(0.5, 1.0, UnderlyingKind::TTotal, None).is_err());
        assert!(const_underlying(0.5, 2.0, UnderlyingKind::Zn, None).is_err());
    }

    #[test]
    fn zn_continuous_at_kappa_one() {
        for (alpha, n) in [(0.5, 3), (0.3, 7), (0.9, 20)] {
            let near = const_underlying(alpha, 1.0 + 1e-9, UnderlyingKind::Zn, Some(n)).unwrap().value;
            let off = const_underlying(alpha, 1.0 + 1e-7, UnderlyingKind::Zn, Some(n)).unwrap().value;
            let limit = n as f64 * f64::powi(alpha, n as i32 - 1);
            assert_relative_eq!(near, limit, max_relative = 1e-12);
            assert_relative_eq!(off, limit, max_relative = 1e-6);
        }
    }

    #[test]
    fn tn_converges_to_total() {
        let t = const_underlying(0.4, 2.5, UnderlyingKind::TTotal, None).unwrap().value;
        let tn = const_underlying(0.4, 2.5, UnderlyingKind::Tn, Some(200)).unwrap().value;
        assert_relative_eq!(tn, t, max_relative = 1e-12);
    }

    #[test]
    fn stationary_examples() {
        assert_relative_eq!(const_stationary::<f64>(&model_a(2.0)).unwrap().value, 4.0 / 3.0, max_relative = 1e-15);
        let b = model_b(2.0, 0.5, 1.0, 0.0);
        assert_relative_eq!(b.beta(), 1.0);
        assert_relative_eq!(const_stationary::<f64>(&b).unwrap().value, 8.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn sn_fixed_examples() {
        let a = model_a(2.0);
        assert_eq!(const_sn_fixed::<f64>(&a, 1).unwrap().value, 1.0);
        assert_relative_eq!(const_sn_fixed::<f64>(&a, 3).unwrap().value, 6.3125, max_relative = 1e-15);
        let b = model_b(2.0, 0.5, 1.0, 0.0);
        assert_relative_eq!(const_sn_fixed::<f64>(&b, 2).unwrap().value, 1.0, max_relative = 1e-12);
        assert_eq!(const_sn_fixed::<f64>(&b, 1).unwrap().value, 0.0);
        assert!(const_sn_fixed::<f64>(&a, 0).is_err());
    }

    #[test]
    fn sn_fixed_model_b_boundary_is_p() {
        let b = model_b(2.0, 0.5, 1.0, 0.5);
        assert_relative_eq!(b.p(), 0.5, max_relative = 1e-12);
        assert_eq!(const_sn_fixed::<f64>(&b, 1).unwrap().value, b.p());
    }

    #[test]
    fn sn_fixed_model_b_matches_double_sum() {
        let b = model_b(2.0, 0.5, 1.0, 0.5);
        let (alpha, kappa) = (b.alpha(), 2.0);
        let g = |i: usize| ((1.0 - alpha.powi(i as i32)) / (1.0 - alpha)).powf(kappa);
        for n in 1..8 {
            let mut want = 0.0;
            for i in 1..=n {
                let c_prev: f64 = (0..i - 1).map(|j| alpha.powi(j as i32) * g(i - 1 - j)).sum();
                want += b.beta() * c_prev + b.p() * g(i);
            }
            assert_relative_eq!(const_sn_fixed::<f64>(&b, n).unwrap().value, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn ld_examples() {
        assert_relative_eq!(const_ld::<f64>(&model_a(2.0)).unwrap().value, 4.0, max_relative = 1e-15);
        assert_relative_eq!(const_ld::<f64>(&model_b(2.0, 0.5, 1.0, 0.0)).unwrap().value, 8.0, max_relative = 1e-12);
    }

    #[test]
    fn cesaro_limits() {
        for kappa in [1.5, 2.0, 3.0] {
            let a = model_a(kappa);
            let c = const_ld::<f64>(&a).unwrap().value;
            let gap = |n| (const_sn_fixed::<f64>(&a, n).unwrap().value / n as f64 - c).abs();
            assert!(gap(10_000) < 0.02 * c);
            assert!(gap(100) > gap(1000) && gap(1000) > gap(10_000));
        }
        let b = model_b(2.0, 0.5, 1.0, 0.5);
        let c = const_ld::<f64>(&b).unwrap().value;
        let gap = |n| (const_sn_fixed::<f64>(&b, n).unwrap().value / n as f64 - c).abs();
        assert!(gap(10_000) < 0.02 * c);
        assert!(gap(100) > gap(1000) && gap(1000) > gap(10_000));
    }

    #[test]
    fn compound_examples() {
        use CompoundRegime::*;
        let v = |r| compound_tail_constant(r, 0.5, 2.0, 2.0, 1.0).unwrap().value;
        assert_relative_eq!(v(HeavyCount), 0.25);
        assert_relative_eq!(v(HeavySummand), 2.0);
        assert_relative_eq!(v(Comparable), 2.25);
        let c0 = compound_tail_constant(Comparable, 0.5, 2.0, 2.0, 0.0).unwrap().value;
        assert_eq!(c0, v(HeavySummand));
        let e0 = compound_tail_constant(Comparable, 0.5, 0.0, 2.0, 1.0).unwrap().value;
        assert_eq!(e0, v(HeavyCount));
    }

    #[test]
    fn sinf_examples() {
        assert_relative_eq!(const_sinf::<f64>(&model_a(2.0)).unwrap().value, 4.0 / 3.0, max_relative = 1e-15);
        let b = model_b(2.0, 0.5, 1.0, 0.0);
        assert_relative_eq!(const_sinf::<f64>(&b).unwrap().value, 8.0 + 32.0 / 3.0, max_relative = 1e-12);
        let tiny = ModelParams::new(Law::bernoulli(1e-6).unwrap(), Law::discrete_pareto(2.0).unwrap()).unwrap();
        assert!(const_sinf::<f64>(&tiny).unwrap().value < 1e-11);
    }

    #[test]
    fn explicit_inputs_cover_beta_and_p_together() {
        let b = ConstantInputs::new(ModelTag::B, 0.5, 2.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(b.ld().unwrap().value, 10.0, max_relative = 1e-15);
        assert_relative_eq!(b.stationary().unwrap().value, 10.0 / 3.0, max_relative = 1e-15);
        assert_eq!(b.sn_fixed(1).unwrap().value, 0.5);
        assert!(ConstantInputs::new(ModelTag::A, 1.0, 2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn light_driver_has_no_constants() {
        let light = ModelParams::new(Law::bernoulli(0.5).unwrap(), Law::bernoulli(0.5).unwrap()).unwrap();
        assert!(const_ld::<f64>(&light).is_err());
    }

    #[test]
    fn generic_in_f32() {
        let c = const_sn_fixed::<f32>(&model_a(2.0), 3).unwrap().value;
        assert!((c - 6.3125).abs() < 1e-5);
    }
}
