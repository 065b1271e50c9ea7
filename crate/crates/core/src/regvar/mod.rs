//! Nonnegative integer-valued laws with regularly varying or light tails.
//!
//! Every law exposes its exact survival function `P(X > x)`, point masses,
//! moments and a deterministic inverse-CDF sampler driven by a single uniform.
//! Heavy-tailed variants also report their tail index `κ` and the asymptotic
//! shape `P(X > x) ~ c · x^{-κ} (ln x)^γ`.

mod checks;
mod grammar;
mod params;
pub mod series;

use std::f64::consts::E;

pub use checks::{log_plus_moment, potter_check, truncated_moment, PotterReport};
pub use params::{ModelParams, ModelTag};

use crate::error::{domain, Error, Result};
use crate::scalar::CompensatedSum;

/// Tails below this value are only meaningful in log space.
pub const LINEAR_TAIL_FLOOR: f64 = 1e-300;

/// Upper end of the integer range searched by bisection samplers.
const SEARCH_LIMIT: u64 = 1 << 62;

/// A nonnegative integer-valued probability law.
#[derive(Debug, Clone, PartialEq)]
pub enum Law {
    /// Support `{1, 2, ...}` with `P(X ≥ k) = k^{-κ}`.
    DiscretePareto { kappa: f64 },
    /// Support `{1, 2, ...}` with
    /// `P(X > x) = (⌊x⌋+1)^{-κ} (ln(e+⌊x⌋+1) / ln(e+1))^γ`.
    LogPareto { kappa: f64, gamma: f64 },
    /// `P(X = 0) = 1 - w`, otherwise `w · DiscretePareto(κ)`.
    ZeroInflatedPareto { w: f64, kappa: f64 },
    Bernoulli { q: f64 },
    /// Failures before the first success: `P(X = k) = q (1-q)^k`.
    Geometric { q: f64 },
    Poisson { lambda: f64 },
    PointMass { k: u64 },
    /// Explicit table of `(value, probability)`, sorted by value.
    Finite { table: Vec<(u64, f64)> },
}

/// Asymptotic shape `P(X > x) ~ scale · x^{-kappa} · (ln x)^gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailShape {
    pub kappa: f64,
    pub gamma: f64,
    pub scale: f64,
}

fn check_probability(name: &str, v: f64, open: bool) -> Result<()> {
    let ok = if open {
        v > 0.0 && v < 1.0
    } else {
        (0.0..=1.0).contains(&v)
    };
    if ok && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidLaw(format!("{name}={v} out of range")))
    }
}

impl Law {
    pub fn discrete_pareto(kappa: f64) -> Result<Self> {
        let law = Law::DiscretePareto { kappa };
        law.validate()?;
        Ok(law)
    }

    pub fn log_pareto(kappa: f64, gamma: f64) -> Result<Self> {
        let law = Law::LogPareto { kappa, gamma };
        law.validate()?;
        Ok(law)
    }

    pub fn zero_inflated_pareto(w: f64, kappa: f64) -> Result<Self> {
        let law = Law::ZeroInflatedPareto { w, kappa };
        law.validate()?;
        Ok(law)
    }

    pub fn bernoulli(q: f64) -> Result<Self> {
        let law = Law::Bernoulli { q };
        law.validate()?;
        Ok(law)
    }

    pub fn geometric(q: f64) -> Result<Self> {
        let law = Law::Geometric { q };
        law.validate()?;
        Ok(law)
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        let law = Law::Poisson { lambda };
        law.validate()?;
        Ok(law)
    }

    pub fn point(k: u64) -> Self {
        Law::PointMass { k }
    }

    /// Builds a finite table; duplicate values are merged and zero entries dropped.
    pub fn finite(entries: &[(u64, f64)]) -> Result<Self> {
        let mut table: Vec<(u64, f64)> = Vec::with_capacity(entries.len());
        let mut sorted = entries.to_vec();
        sorted.sort_by_key(|e| e.0);
        for (k, p) in sorted {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::InvalidLaw(format!("finite: P({k})={p} is not a probability")));
            }
            match table.last_mut() {
                Some(last) if last.0 == k => last.1 += p,
                _ => table.push((k, p)),
            }
        }
        table.retain(|e| e.1 > 0.0);
        let law = Law::Finite { table };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Law::DiscretePareto { kappa } => check_kappa(kappa),
            Law::LogPareto { kappa, gamma } => {
                check_kappa(kappa)?;
                if !(-2.0..=2.0).contains(&gamma) {
                    return Err(Error::InvalidLaw(format!(
                        "logpareto: gamma={gamma} outside [-2, 2]"
                    )));
                }
                if gamma > 3.0 * kappa {
                    return Err(Error::InvalidLaw(format!(
                        "logpareto: gamma={gamma} > 3*kappa makes the survival function increase"
                    )));
                }
                Ok(())
            }
            Law::ZeroInflatedPareto { w, kappa } => {
                check_probability("w", w, true)?;
                if !(kappa > 1.0 && kappa.is_finite()) {
                    return Err(Error::InvalidLaw(format!("zpareto: kappa={kappa} must exceed 1")));
                }
                Ok(())
            }
            Law::Bernoulli { q } => check_probability("q", q, false),
            Law::Geometric { q } => {
                if q > 0.0 && q <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidLaw(format!("geom: q={q} must lie in (0, 1]")))
                }
            }
            Law::Poisson { lambda } => {
                if lambda >= 0.0 && lambda <= 1e6 && lambda.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidLaw(format!("poisson: lambda={lambda} must lie in [0, 1e6]")))
                }
            }
            Law::PointMass { .. } => Ok(()),
            Law::Finite { ref table } => {
                if table.is_empty() {
                    return Err(Error::InvalidLaw("finite: empty table".into()));
                }
                let total: f64 = table.iter().map(|e| e.1).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidLaw(format!(
                        "finite: probabilities sum to {total}, not 1"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Tail index `κ` of the regularly varying variants.
    pub fn tail_index(&self) -> Option<f64> {
        self.tail_shape().map(|s| s.kappa)
    }

    pub fn is_heavy(&self) -> bool {
        self.tail_shape().is_some()
    }

    pub fn tail_shape(&self) -> Option<TailShape> {
        match *self {
            Law::DiscretePareto { kappa } => Some(TailShape {
                kappa,
                gamma: 0.0,
                scale: 1.0,
            }),
            Law::LogPareto { kappa, gamma } => Some(TailShape {
                kappa,
                gamma,
                scale: (1.0 + E).ln().powf(-gamma),
            }),
            Law::ZeroInflatedPareto { w, kappa } => Some(TailShape {
                kappa,
                gamma: 0.0,
                scale: w,
            }),
            _ => None,
        }
    }

    /// Largest support point for laws with bounded support.
    pub fn max_support(&self) -> Option<u64> {
        match self {
            Law::Bernoulli { q } => Some(if *q > 0.0 { 1 } else { 0 }),
            Law::PointMass { k } => Some(*k),
            Law::Finite { table } => table.last().map(|e| e.0),
            Law::Poisson { lambda } if *lambda == 0.0 => Some(0),
            Law::Geometric { q } if *q == 1.0 => Some(0),
            _ => None,
        }
    }

    /// `ln P(X > x)`; `-inf` when the tail is empty.
    pub fn log_tail(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(domain(format!("tail requires x >= 0, got {x}")));
        }
        if x.is_infinite() {
            return Ok(f64::NEG_INFINITY);
        }
        let j = x.floor();
        Ok(match *self {
            Law::DiscretePareto { kappa } => -kappa * (j + 1.0).ln(),
            Law::LogPareto { kappa, gamma } => log_pareto_log_survival(kappa, gamma, j),
            Law::ZeroInflatedPareto { w, kappa } => w.ln() - kappa * (j + 1.0).ln(),
            Law::Geometric { q } => {
                if q == 1.0 {
                    f64::NEG_INFINITY
                } else {
                    (j + 1.0) * (-q).ln_1p()
                }
            }
            Law::Poisson { lambda } => poisson_tail(lambda, j).ln(),
            _ => self.tail(x)?.ln(),
        })
    }

    /// `P(X > x)`. Underflows to 0 below [`LINEAR_TAIL_FLOOR`]; use
    /// [`Law::log_tail`] there.
    pub fn tail(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(domain(format!("tail requires x >= 0, got {x}")));
        }
        let j = x.floor();
        Ok(match *self {
            Law::Bernoulli { q } => {
                if j < 1.0 {
                    q
                } else {
                    0.0
                }
            }
            Law::PointMass { k } => {
                if x < k as f64 {
                    1.0
                } else {
                    0.0
                }
            }
            Law::Finite { ref table } => {
                compensated_tail(table.iter().filter(|e| e.0 as f64 > x).map(|e| e.1))
            }
            Law::Poisson { lambda } => poisson_tail(lambda, j),
            _ => {
                let lt = self.log_tail(x)?;
                let v = lt.exp();
                if v < LINEAR_TAIL_FLOOR {
                    0.0
                } else {
                    v
                }
            }
        })
    }

    /// Survival at a real point with the floor removed; smooth interpolation
    /// used for integral remainders of heavy variants.
    pub(crate) fn smooth_survival(&self, y: f64) -> f64 {
        match *self {
            Law::DiscretePareto { kappa } => (y + 1.0).powf(-kappa),
            Law::ZeroInflatedPareto { w, kappa } => w * (y + 1.0).powf(-kappa),
            Law::LogPareto { kappa, gamma } => log_pareto_log_survival(kappa, gamma, y).exp(),
            _ => self.tail(y.max(0.0)).unwrap_or(0.0),
        }
    }

    /// `P(X = k)`.
    pub fn pmf(&self, k: u64) -> f64 {
        let kf = k as f64;
        match *self {
            Law::DiscretePareto { kappa } => {
                if k == 0 {
                    0.0
                } else {
                    pareto_atom(kappa, kf)
                }
            }
            Law::ZeroInflatedPareto { w, kappa } => {
                if k == 0 {
                    1.0 - w
                } else {
                    w * pareto_atom(kappa, kf)
                }
            }
            Law::LogPareto { kappa, gamma } => {
                if k == 0 {
                    return 0.0;
                }
                let log_prev = log_pareto_log_survival(kappa, gamma, kf - 1.0);
                let diff = -kappa * (1.0 / kf).ln_1p()
                    + gamma * ((1.0 / (E + kf)).ln_1p() / (E + kf).ln()).ln_1p();
                log_prev.exp() * -diff.exp_m1()
            }
            Law::Bernoulli { q } => match k {
                0 => 1.0 - q,
                1 => q,
                _ => 0.0,
            },
            Law::Geometric { q } => {
                if q == 1.0 {
                    return if k == 0 { 1.0 } else { 0.0 };
                }
                (q.ln() + kf * (-q).ln_1p()).exp()
            }
            Law::Poisson { lambda } => poisson_pmf(lambda, k),
            Law::PointMass { k: m } => {
                if k == m {
                    1.0
                } else {
                    0.0
                }
            }
            Law::Finite { ref table } => table
                .binary_search_by_key(&k, |e| e.0)
                .map(|i| table[i].1)
                .unwrap_or(0.0),
        }
    }

    /// `E X`, or `+inf` for Pareto-type laws with `κ ≤ 1`.
    pub fn mean(&self) -> f64 {
        match *self {
            Law::DiscretePareto { kappa } => {
                if kappa <= 1.0 {
                    f64::INFINITY
                } else {
                    series::zeta(kappa)
                }
            }
            Law::ZeroInflatedPareto { w, kappa } => w * series::zeta(kappa),
            Law::LogPareto { kappa, gamma } => {
                if kappa <= 1.0 {
                    return f64::INFINITY;
                }
                // E X = Σ_{k≥0} P(X > k) = Σ_{j≥1} j^{-κ} (ln(e+j)/ln(e+1))^γ
                let norm = (1.0 + E).ln();
                let term = |y: f64| y.powf(-kappa) * ((E + y).ln() / norm).powf(gamma);
                series::heavy_series(term, 1, 1 << 16, |t| {
                    // ∫_{e^t}^{∞} y^{-κ} (ln y / norm)^γ dy, two-term asymptotics.
                    let a = kappa - 1.0;
                    (-a * t).exp() * (t / norm).powf(gamma) / a * (1.0 + gamma / (a * t))
                })
            }
            Law::Bernoulli { q } => q,
            Law::Geometric { q } => (1.0 - q) / q,
            Law::Poisson { lambda } => lambda,
            Law::PointMass { k } => k as f64,
            Law::Finite { ref table } => {
                compensated_tail(table.iter().map(|&(k, p)| k as f64 * p))
            }
        }
    }

    /// Smallest `k ≥ 0` with `ln P(X > k) < log_target`.
    fn inverse_log_survival(&self, log_target: f64) -> Result<u64> {
        match *self {
            Law::DiscretePareto { kappa } => {
                let guess = (-log_target / kappa).exp();
                self.fixup_quantile(guess, log_target)
            }
            Law::ZeroInflatedPareto { w, kappa } => {
                if w.ln() < log_target {
                    return Ok(0);
                }
                let guess = ((w.ln() - log_target) / kappa).exp();
                self.fixup_quantile(guess, log_target)
            }
            Law::Geometric { q } => {
                if q == 1.0 {
                    return Ok(0);
                }
                let guess = log_target / (-q).ln_1p();
                self.fixup_quantile(guess, log_target)
            }
            Law::Bernoulli { q } => Ok(if q.ln() < log_target { 0 } else { 1 }),
            Law::PointMass { k } => Ok(k),
            Law::Finite { ref table } => {
                let mut survival = 1.0;
                for &(k, p) in table {
                    survival -= p;
                    if survival.max(0.0).ln() < log_target || survival <= 1e-15 {
                        return Ok(k);
                    }
                }
                Ok(table.last().map(|e| e.0).unwrap_or(0))
            }
            Law::LogPareto { .. } | Law::Poisson { .. } => self.bisect_quantile(log_target),
        }
    }

    fn satisfies(&self, k: u64, log_target: f64) -> bool {
        self.log_tail(k as f64).map(|lt| lt < log_target).unwrap_or(false)
    }

    /// Corrects a closed-form quantile guess against the exact survival.
    fn fixup_quantile(&self, guess: f64, log_target: f64) -> Result<u64> {
        if !(guess < SEARCH_LIMIT as f64) {
            return Err(Error::Saturation(format!(
                "quantile {guess:e} exceeds the 64-bit sample range"
            )));
        }
        let mut k = guess.floor().max(0.0) as u64;
        while k > 0 && self.satisfies(k - 1, log_target) {
            k -= 1;
        }
        while !self.satisfies(k, log_target) {
            k += 1;
        }
        Ok(k)
    }

    fn bisect_quantile(&self, log_target: f64) -> Result<u64> {
        if self.satisfies(0, log_target) {
            return Ok(0);
        }
        if !self.satisfies(SEARCH_LIMIT, log_target) {
            return Err(Error::Saturation(
                "quantile exceeds the 64-bit sample range".into(),
            ));
        }
        // Invariant: lo fails, hi satisfies.
        let (mut lo, mut hi) = (0u64, SEARCH_LIMIT);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.satisfies(mid, log_target) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Inverse-CDF sample from a uniform `u ∈ (0, 1)`: the smallest `k` with
    /// `P(X > k) < u`.
    pub fn sample(&self, u: f64) -> Result<u64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(domain(format!("sample requires u in (0,1), got {u}")));
        }
        if let Law::DiscretePareto { kappa } = *self {
            return self.fixup_quantile(u.powf(-1.0 / kappa), u.ln());
        }
        self.inverse_log_survival(u.ln())
    }

    /// Sample from the law conditioned on `X > level`, by inversion of the
    /// conditional survival `P(X > k) / P(X > level)`.
    pub fn sample_above(&self, level: f64, u: f64) -> Result<u64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(domain(format!("sample requires u in (0,1), got {u}")));
        }
        let base = self.log_tail(level)?;
        if base == f64::NEG_INFINITY {
            return Err(domain(format!("cannot condition on the null event X > {level}")));
        }
        self.inverse_log_survival(u.ln() + base)
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidLaw(format!("kappa={kappa} must be positive")))
    }
}

/// `k^{-κ} - (k+1)^{-κ}` without cancellation.
fn pareto_atom(kappa: f64, k: f64) -> f64 {
    k.powf(-kappa) * -(-kappa * (1.0 / k).ln_1p()).exp_m1()
}

fn log_pareto_log_survival(kappa: f64, gamma: f64, j: f64) -> f64 {
    -kappa * (j + 1.0).ln() + gamma * ((E + j + 1.0).ln() / (1.0 + E).ln()).ln()
}

fn compensated_tail(values: impl Iterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.extend(values);
    acc.value()
}

fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    (kf * lambda.ln() - lambda - statrs::function::gamma::ln_gamma(kf + 1.0)).exp()
}

/// `P(N > j)` for `N ~ Poisson(λ)`, summing whichever side avoids cancellation.
fn poisson_tail(lambda: f64, j: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let j = j as u64;
    if (j as f64) < lambda {
        let head = compensated_tail((0..=j).map(|k| poisson_pmf(lambda, k)));
        (1.0 - head).max(0.0)
    } else {
        let mut acc = CompensatedSum::new();
        let mut term = poisson_pmf(lambda, j + 1);
        let mut k = j + 1;
        while term > 0.0 {
            acc.add(term);
            k += 1;
            term *= lambda / k as f64;
            if term < 1e-18 * acc.value() {
                break;
            }
        }
        acc.value()
    }
}
