//! Monte Carlo estimates of `P(S_n − d_n > x)`: plain frequencies and a
//! single-big-jump importance sampler with a defensive mixture.
//!
//! Path `i` of a run always reads the stream `(seed, i)`, and paths are
//! grouped into fixed-size blocks whose partial sums are merged in block
//! order, so results do not depend on the number of worker threads.

mod scan;

use std::fmt;

use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::asymptotics::centering;
use crate::error::{domain, Result};
use crate::exact::Interval;
use crate::process::{immigration_draws, simulate_path_with, Draws, Tilt};
use crate::regvar::{ModelParams, ModelTag};
use crate::scalar::CompensatedSum;

pub use scan::{exact_ratio_scan, ld_ratio_scan, lower_deviation_scan, write_scan_csv, ScanRow, XRule, SCAN_CSV_HEADER};

/// Smallest budget accepted by the estimators.
pub const MIN_BUDGET: u64 = 1000;
/// Hit count from which the normal interval replaces the exact one.
pub const NORMAL_CI_HITS: u64 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Plain,
    BigJump,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Plain => "PLAIN",
            Method::BigJump => "BIGJUMP",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PLAIN" => Ok(Method::Plain),
            "BIGJUMP" => Ok(Method::BigJump),
            _ => Err(domain(format!("unknown method `{s}`, expected PLAIN or BIGJUMP"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOptions {
    /// Probability `w` of drawing from the tilted component.
    pub mixture_weight: f64,
    pub block_size: u64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            mixture_weight: 0.5,
            block_size: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub ci95: Interval<f64>,
    pub budget: u64,
    pub seed: u64,
    pub method: Method,
    /// Paths on which the event occurred.
    pub hits: u64,
    /// Set when a plain run saw no hits; `ci95.hi` is then `3/budget`.
    pub low_confidence: bool,
}

/// Event on `S_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    /// `S_n > level`.
    Above(f64),
    /// `S_n ≤ level`.
    AtMost(f64),
}

impl Event {
    /// Both events are decided once `S` exceeds this level.
    fn level(self) -> f64 {
        match self {
            Event::Above(level) | Event::AtMost(level) => level,
        }
    }

    fn holds(self, s: u64) -> bool {
        match self {
            Event::Above(level) => s as f64 > level,
            Event::AtMost(level) => s as f64 <= level,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    hits: u64,
    sum: f64,
    sum_sq: f64,
    min_hit_weight: f64,
    max_hit_weight: f64,
}

impl Moments {
    fn merge(&mut self, other: &Moments) {
        if other.hits > 0 {
            if self.hits == 0 {
                self.min_hit_weight = other.min_hit_weight;
                self.max_hit_weight = other.max_hit_weight;
            } else {
                self.min_hit_weight = self.min_hit_weight.min(other.min_hit_weight);
                self.max_hit_weight = self.max_hit_weight.max(other.max_hit_weight);
            }
        }
        self.hits += other.hits;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }
}

/// The tilted component of the big-jump proposal.
#[derive(Debug, Clone, Copy)]
struct Proposal {
    weight: f64,
    pivot: f64,
    /// `P(tilted law > pivot)`.
    tail: f64,
}

fn proposal(params: &ModelParams, x: f64, weight: f64) -> Result<Option<Proposal>> {
    let (pivot, law) = match params.tag() {
        ModelTag::A => (x * (1.0 - params.alpha()) / 2.0, params.immigration()),
        ModelTag::B => (x / 2.0, params.offspring()),
    };
    let tail = law.tail(pivot)?;
    Ok((tail > 0.0).then_some(Proposal { weight, pivot, tail }))
}

/// Simulates path `index` and returns its weight.
fn weighted_path(
    params: &ModelParams,
    n: u64,
    seed: u64,
    index: u64,
    event: Event,
    proposal: Option<Proposal>,
) -> Result<Option<f64>> {
    let mut draws = Draws::new(seed, index);
    let Some(prop) = proposal else {
        let record = simulate_path_with(params, n, &mut draws, Tilt::None, None, Some(event.level()))?;
        return Ok(event.holds(record.s_value).then_some(1.0));
    };
    draws.seek(0, 0);
    let coin = draws.uniform();
    let pick = draws.uniform();
    let tilted = coin < prop.weight;
    match params.tag() {
        ModelTag::A => {
            let generation = 1 + ((pick * n as f64) as u64).min(n - 1);
            let tilt = if tilted {
                Tilt::Immigration {
                    generation,
                    level: prop.pivot,
                }
            } else {
                Tilt::None
            };
            let record = simulate_path_with(params, n, &mut draws, tilt, Some(prop.pivot), Some(event.level()))?;
            if !event.holds(record.s_value) {
                return Ok(None);
            }
            let share = record.immigration_above as f64 / (n as f64 * prop.tail);
            Ok(Some(1.0 / ((1.0 - prop.weight) + prop.weight * share)))
        }
        ModelTag::B => {
            let etas = immigration_draws(params.immigration(), n, &mut draws)?;
            let slots: u64 = etas[..(n - 1) as usize].iter().sum();
            if slots == 0 {
                let record = simulate_path_with(params, n, &mut draws, Tilt::None, None, Some(event.level()))?;
                return Ok(event.holds(record.s_value).then_some(1.0));
            }
            let tilt = if tilted {
                let mut target = ((pick * slots as f64) as u64).min(slots - 1);
                let mut generation = 1;
                for &eta in &etas {
                    if target < eta {
                        break;
                    }
                    target -= eta;
                    generation += 1;
                }
                Tilt::ImmigrantChild {
                    generation,
                    slot: target + 1,
                    level: prop.pivot,
                }
            } else {
                Tilt::None
            };
            let record = simulate_path_with(params, n, &mut draws, tilt, Some(prop.pivot), Some(event.level()))?;
            if !event.holds(record.s_value) {
                return Ok(None);
            }
            let share = record.immigrant_children_above as f64 / (slots as f64 * prop.tail);
            Ok(Some(1.0 / ((1.0 - prop.weight) + prop.weight * share)))
        }
    }
}

fn clopper_pearson(hits: u64, budget: u64) -> Interval<f64> {
    let (k, m) = (hits as f64, budget as f64);
    let lo = if hits == 0 {
        0.0
    } else {
        Beta::new(k, m - k + 1.0).map_or(0.0, |b| b.inverse_cdf(0.025))
    };
    let hi = if hits == budget {
        1.0
    } else {
        Beta::new(k + 1.0, m - k).map_or(1.0, |b| b.inverse_cdf(0.975))
    };
    Interval { lo, hi }
}

fn summarize(moments: Moments, budget: u64, seed: u64, method: Method) -> Estimate {
    let m = budget as f64;
    let value = (moments.sum / m).clamp(0.0, 1.0);
    let variance = ((moments.sum_sq - m * value * value) / (m - 1.0)).max(0.0);
    let mut stderr = (variance / m).sqrt();
    let mut low_confidence = false;
    let ci95 = if moments.hits >= NORMAL_CI_HITS {
        Interval {
            lo: (value - 1.96 * stderr).max(0.0),
            hi: (value + 1.96 * stderr).min(1.0),
        }
    } else if moments.hits == 0 {
        let upper = 3.0 / m;
        if method == Method::Plain {
            low_confidence = true;
            stderr = (upper * (1.0 - upper) / m).sqrt();
        }
        Interval { lo: 0.0, hi: upper }
    } else {
        let cp = clopper_pearson(moments.hits, budget);
        let lo = (cp.lo * moments.min_hit_weight).min(value);
        let hi = (cp.hi * moments.max_hit_weight).clamp(value, 1.0);
        Interval { lo, hi }
    };
    Estimate {
        value,
        stderr,
        ci95,
        budget,
        seed,
        method,
        hits: moments.hits,
        low_confidence,
    }
}

/// Estimates `P(event)` for `S_n`. The big-jump method is only defined for
/// upper events; its tilt pivot is computed from `x`.
pub fn estimate_event(
    params: &ModelParams,
    n: u64,
    event: Event,
    x: f64,
    budget: u64,
    seed: u64,
    method: Method,
    options: &EstimatorOptions,
) -> Result<Estimate> {
    if budget < MIN_BUDGET {
        return Err(domain(format!("budget must be at least {MIN_BUDGET}, got {budget}")));
    }
    if n == 0 {
        return Err(domain("n ≥ 1 required"));
    }
    if !(options.mixture_weight > 0.0 && options.mixture_weight < 1.0) || options.block_size == 0 {
        return Err(domain("mixture weight must lie in (0,1) and block size be positive"));
    }
    let prop = match (method, event) {
        (Method::Plain, _) => None,
        (Method::BigJump, Event::Above(_)) => proposal(params, x, options.mixture_weight)?,
        (Method::BigJump, Event::AtMost(_)) => {
            return Err(domain("the big-jump sampler only targets upper tails"));
        }
    };
    let block = options.block_size;
    let blocks = budget.div_ceil(block);
    let partial: Vec<Result<Moments>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut m = Moments::default();
            let mut sum = CompensatedSum::new();
            let mut sum_sq = CompensatedSum::new();
            for index in b * block..((b + 1) * block).min(budget) {
                if let Some(w) = weighted_path(params, n, seed, index, event, prop)? {
                    if m.hits == 0 {
                        m.min_hit_weight = w;
                        m.max_hit_weight = w;
                    }
                    m.hits += 1;
                    m.min_hit_weight = m.min_hit_weight.min(w);
                    m.max_hit_weight = m.max_hit_weight.max(w);
                    sum.add(w);
                    sum_sq.add(w * w);
                }
            }
            m.sum = sum.value();
            m.sum_sq = sum_sq.value();
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for m in partial {
        total.merge(&m?);
    }
    Ok(summarize(total, budget, seed, method))
}

/// Estimates `P(S_n − d_n > x)` with `d_n` the model's centering.
pub fn estimate_tail(
    params: &ModelParams,
    n: u64,
    x: f64,
    budget: u64,
    seed: u64,
    method: Method,
) -> Result<Estimate> {
    estimate_tail_with(params, n, x, budget, seed, method, &EstimatorOptions::default())
}

pub fn estimate_tail_with(
    params: &ModelParams,
    n: u64,
    x: f64,
    budget: u64,
    seed: u64,
    method: Method,
    options: &EstimatorOptions,
) -> Result<Estimate> {
    if !(x >= 0.0) {
        return Err(domain(format!("x must be nonnegative, got {x}")));
    }
    let d = centering::<f64>(params, n as usize);
    estimate_event(params, n, Event::Above(x + d), x, budget, seed, method, options)
}
