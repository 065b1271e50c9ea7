//! Ratio scans of `P(S_n − d_n > x)` and `P(S_n − d_n ≤ −x)` against
//! `n P(driver > x)`, as CSV-ready rows.

use std::io::Write;

use super::{estimate_event, estimate_tail_with, EstimatorOptions, Event, Method};
use crate::asymptotics::{centering, const_ld, threshold, CenteringRule, CenteringSpec, ThresholdSpec};
use crate::error::{domain, Result};
use crate::exact::{Pmf, SnEngine};
use crate::regvar::{ModelParams, ModelTag};

pub const SCAN_CSV_HEADER: &str = "model,n,x,method,estimate,stderr,ci_lo,ci_hi,theory_denominator,ratio,const_ld";

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub model: ModelTag,
    pub n: u64,
    pub x: f64,
    /// `PLAIN`, `BIGJUMP`, or `EXACT` for rows computed without sampling.
    pub method: String,
    pub estimate: f64,
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// `n P(driver > x)`.
    pub theory_denominator: f64,
    pub ratio: f64,
    pub const_ld: Option<f64>,
}

/// How the `x` values of a scan are chosen for each `n`.
#[derive(Debug, Clone, PartialEq)]
pub enum XRule {
    Absolute(Vec<f64>),
    /// `x = m x_n` for each multiplier `m`.
    Multipliers { spec: ThresholdSpec, values: Vec<f64> },
}

impl XRule {
    pub fn values(&self, n: u64) -> Result<Vec<f64>> {
        match self {
            XRule::Absolute(xs) => Ok(xs.clone()),
            XRule::Multipliers { spec, values } => {
                let xn = threshold(spec, n as usize)?;
                Ok(values.iter().map(|m| m * xn).collect())
            }
        }
    }
}

fn denominator(params: &ModelParams, n: u64, x: f64) -> Result<f64> {
    Ok(n as f64 * params.driver().tail(x)?)
}

fn row_seed(seed: u64, row: usize) -> u64 {
    seed.wrapping_add((row as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Estimates `P(S_n − d_n > x)/(n P(driver > x))` over `n_list × x_rule`.
pub fn ld_ratio_scan(
    params: &ModelParams,
    n_list: &[u64],
    x_rule: &XRule,
    budget: u64,
    seed: u64,
    method: Method,
) -> Result<Vec<ScanRow>> {
    let c = const_ld::<f64>(params).ok().map(|c| c.value);
    let options = EstimatorOptions::default();
    let mut rows = Vec::new();
    for &n in n_list {
        for x in x_rule.values(n)? {
            let e = estimate_tail_with(params, n, x, budget, row_seed(seed, rows.len()), method, &options)?;
            let denom = denominator(params, n, x)?;
            rows.push(ScanRow {
                model: params.tag(),
                n,
                x,
                method: method.to_string(),
                estimate: e.value,
                stderr: e.stderr,
                ci_lo: e.ci95.lo,
                ci_hi: e.ci95.hi,
                theory_denominator: denom,
                ratio: e.value / denom,
                const_ld: c,
            });
        }
    }
    Ok(rows)
}

/// Estimates `P(S_n − d_n ≤ −x)/(n P(driver > x))`. When `κ ≤ 1` the
/// centering is zero and the event is empty, so rows are exact zeros.
pub fn lower_deviation_scan(
    params: &ModelParams,
    n_list: &[u64],
    x_rule: &XRule,
    budget: u64,
    seed: u64,
) -> Result<Vec<ScanRow>> {
    let vacuous = CenteringSpec::for_kappa(params.kappa()).rule == CenteringRule::Zero;
    let c = const_ld::<f64>(params).ok().map(|c| c.value);
    let options = EstimatorOptions::default();
    let mut rows = Vec::new();
    for &n in n_list {
        for x in x_rule.values(n)? {
            if !(x > 0.0) {
                return Err(domain(format!("lower deviations need x > 0, got {x}")));
            }
            let denom = denominator(params, n, x)?;
            let (method, value, stderr, lo, hi) = if vacuous {
                ("EXACT".to_string(), 0.0, 0.0, 0.0, 0.0)
            } else {
                let d = centering::<f64>(params, n as usize);
                let event = Event::AtMost(d - x);
                let e = estimate_event(params, n, event, x, budget, row_seed(seed, rows.len()), Method::Plain, &options)?;
                (Method::Plain.to_string(), e.value, e.stderr, e.ci95.lo, e.ci95.hi)
            };
            rows.push(ScanRow {
                model: params.tag(),
                n,
                x,
                method,
                estimate: value,
                stderr,
                ci_lo: lo,
                ci_hi: hi,
                theory_denominator: denom,
                ratio: value / denom,
                const_ld: c,
            });
        }
    }
    Ok(rows)
}

/// Exact counterpart of [`ld_ratio_scan`] (`lower = false`) or
/// [`lower_deviation_scan`] (`lower = true`). The estimate is the upper end
/// of the truncation interval, which is exact whenever `x + d_n` lies inside
/// the window; `ci_lo..ci_hi` is the interval itself.
pub fn exact_ratio_scan(
    params: &ModelParams,
    n_list: &[u64],
    x_rule: &XRule,
    cutoff: usize,
    lower: bool,
) -> Result<Vec<ScanRow>> {
    let c = const_ld::<f64>(params).ok().map(|c| c.value);
    let n_max = n_list.iter().copied().max().unwrap_or(0) as usize;
    let mut engine = SnEngine::<f64>::new(params, cutoff);
    let laws: Vec<Pmf<f64>> = engine.prefix(n_max)?;
    let mut rows = Vec::new();
    for &n in n_list {
        if n == 0 {
            return Err(domain("n ≥ 1 required"));
        }
        let pmf = &laws[n as usize - 1];
        let d = centering::<f64>(params, n as usize);
        for x in x_rule.values(n)? {
            let bounds = if lower {
                // S_n ≤ d − x, as an integer event.
                pmf.at_most(d - x)
            } else {
                pmf.tail_of(x + d)
            };
            let denom = denominator(params, n, x)?;
            rows.push(ScanRow {
                model: params.tag(),
                n,
                x,
                method: "EXACT".to_string(),
                estimate: bounds.hi,
                stderr: 0.0,
                ci_lo: bounds.lo,
                ci_hi: bounds.hi,
                theory_denominator: denom,
                ratio: bounds.hi / denom,
                const_ld: c,
            });
        }
    }
    Ok(rows)
}

/// Writes rows with shortest round-trip float formatting.
pub fn write_scan_csv<W: Write>(rows: &[ScanRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SCAN_CSV_HEADER}")?;
    for r in rows {
        let c = r.const_ld.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.model, r.n, r.x, r.method, r.estimate, r.stderr, r.ci_lo, r.ci_hi, r.theory_denominator, r.ratio, c
        )?;
    }
    Ok(())
}
