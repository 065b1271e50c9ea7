//! Subcommand implementations. Each returns the rows of `results.csv` and a
//! JSON report; assertion outcomes decide the exit code.

use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use bpi_core::asymptotics::{
    const_ld, const_sinf, const_sn_fixed, const_stationary, const_underlying, AsymptoticConstant, ThresholdSpec,
    UnderlyingKind,
};
use bpi_core::exact::{reference, Pmf, SnEngine};
use bpi_core::fixtures::{FIXTURES, FIXTURE_CUTOFF};
use bpi_core::montecarlo::{
    estimate_event, estimate_tail, exact_ratio_scan, ld_ratio_scan, lower_deviation_scan, write_scan_csv,
    EstimatorOptions, Event, Method, ScanRow, XRule,
};
use bpi_core::{Law, ModelParams, ModelTag, Pmf64};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Kind};

pub const DEFAULT_CUTOFF: usize = 1 << 12;
pub const DEFAULT_BUDGET: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_THRESHOLD_PARAM: f64 = 0.1;

/// A named pass/fail check recorded in the report.
#[derive(Debug, Clone)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

pub struct Outcome {
    pub csv: String,
    pub report: Value,
    pub assertions: Vec<Assertion>,
}

fn params(cfg: &ExperimentConfig) -> Result<ModelParams> {
    let xi = cfg.offspring.clone().ok_or_else(|| anyhow!("missing `offspring` law"))?;
    let eta = cfg.immigration.clone().ok_or_else(|| anyhow!("missing `immigration` law"))?;
    Ok(ModelParams::new(xi, eta)?)
}

fn n_list(cfg: &ExperimentConfig) -> Result<Vec<u64>> {
    let n = cfg.n.clone().ok_or_else(|| anyhow!("missing `n` list"))?;
    if n.contains(&0) {
        bail!("n values must be at least 1");
    }
    Ok(n)
}

fn x_rule(cfg: &ExperimentConfig, params: &ModelParams) -> Result<XRule> {
    match (&cfg.x, &cfg.x_multipliers) {
        (Some(_), Some(_)) => bail!("give either `x` or `x_multipliers`, not both"),
        (Some(xs), None) => Ok(XRule::Absolute(xs.clone())),
        (None, Some(m)) => {
            let param = cfg.threshold_param.unwrap_or(DEFAULT_THRESHOLD_PARAM);
            let spec = ThresholdSpec::new(params.kappa(), param)
                .context("threshold sequence needs a finite tail index and a valid parameter")?;
            Ok(XRule::Multipliers {
                spec,
                values: m.clone(),
            })
        }
        (None, None) => bail!("missing `x` or `x_multipliers`"),
    }
}

fn constant_json(c: &AsymptoticConstant) -> Value {
    json!({ "value": c.value, "tag": c.tag.as_str(), "provenance": c.provenance })
}

fn params_json(p: &ModelParams) -> Value {
    json!({
        "offspring": p.offspring().to_string(),
        "immigration": p.immigration().to_string(),
        "model": p.tag().to_string(),
        "alpha": p.alpha(),
        "beta": p.beta(),
        "kappa": if p.kappa().is_finite() { json!(p.kappa()) } else { Value::Null },
        "p": p.p(),
        "delta_moment": p.delta_moment(),
        "digest": p.digest(),
    })
}

fn scan_csv(rows: &[ScanRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_scan_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf)?)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn constants(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = params(cfg)?;
    let mut named: Vec<(String, AsymptoticConstant)> = vec![
        ("const_ld".into(), const_ld(&p)?),
        ("const_stationary".into(), const_stationary(&p)?),
        ("const_sinf".into(), const_sinf(&p)?),
    ];
    for n in cfg.n.clone().unwrap_or_default() {
        named.push((format!("const_sn_fixed_{n}"), const_sn_fixed(&p, n as usize)?));
    }
    if p.tag() == ModelTag::B {
        named.push((
            "const_t_total".into(),
            const_underlying(p.alpha(), p.kappa(), UnderlyingKind::TTotal, None)?,
        ));
    }
    let mut csv = String::from("name,tag,value,provenance\n");
    let mut map = serde_json::Map::new();
    for (name, c) in &named {
        let _ = writeln!(csv, "{name},{},{},{}", c.tag, c.value, csv_field(c.provenance));
        map.insert(name.clone(), constant_json(c));
    }
    Ok(Outcome {
        csv,
        report: json!({ "params": params_json(&p), "constants": map }),
        assertions: Vec::new(),
    })
}

pub fn exact_scan(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = params(cfg)?;
    let n = n_list(cfg)?;
    let rule = x_rule(cfg, &p)?;
    let cutoff = cfg.cutoff.unwrap_or(DEFAULT_CUTOFF);
    let rows = exact_ratio_scan(&p, &n, &rule, cutoff, cfg.lower.unwrap_or(false))?;
    let c = const_ld(&p).ok();
    Ok(Outcome {
        csv: scan_csv(&rows)?,
        report: json!({
            "params": params_json(&p),
            "cutoff": cutoff,
            "lower": cfg.lower.unwrap_or(false),
            "constants": { "const_ld": c.as_ref().map(constant_json) },
        }),
        assertions: Vec::new(),
    })
}

pub fn mc_scan(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = params(cfg)?;
    let n = n_list(cfg)?;
    let rule = x_rule(cfg, &p)?;
    let budget = cfg.budget.unwrap_or(DEFAULT_BUDGET);
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let method = cfg.method.unwrap_or(Method::BigJump);
    let lower = cfg.lower.unwrap_or(false);
    let rows = if lower {
        lower_deviation_scan(&p, &n, &rule, budget, seed)?
    } else {
        ld_ratio_scan(&p, &n, &rule, budget, seed, method)?
    };
    let c = const_ld(&p).ok();
    Ok(Outcome {
        csv: scan_csv(&rows)?,
        report: json!({
            "params": params_json(&p),
            "budget": budget,
            "seed": seed,
            "method": if lower { "PLAIN".to_string() } else { method.to_string() },
            "lower": lower,
            "constants": { "const_ld": c.as_ref().map(constant_json) },
        }),
        assertions: Vec::new(),
    })
}

/// Exact value against the Monte Carlo estimate at each `(n, x)`.
pub fn compare(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = params(cfg)?;
    let n = n_list(cfg)?;
    let rule = x_rule(cfg, &p)?;
    let cutoff = cfg.cutoff.unwrap_or(DEFAULT_CUTOFF);
    let budget = cfg.budget.unwrap_or(DEFAULT_BUDGET);
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let method = cfg.method.unwrap_or(Method::Plain);
    let exact = exact_ratio_scan(&p, &n, &rule, cutoff, false)?;
    let mut csv = String::from("model,n,x,method,exact_lo,exact_hi,estimate,stderr,z\n");
    let mut max_abs_z: f64 = 0.0;
    for (i, row) in exact.iter().enumerate() {
        let e = estimate_tail(&p, row.n, row.x, budget, seed.wrapping_add(i as u64), method)?;
        // Distance to the exact interval, in standard errors.
        let gap = if e.value < row.ci_lo {
            e.value - row.ci_lo
        } else if e.value > row.ci_hi {
            e.value - row.ci_hi
        } else {
            0.0
        };
        let z = if gap == 0.0 { 0.0 } else { gap / e.stderr };
        max_abs_z = max_abs_z.max(z.abs());
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            row.model, row.n, row.x, method, row.ci_lo, row.ci_hi, e.value, e.stderr, z
        );
    }
    Ok(Outcome {
        csv,
        report: json!({
            "params": params_json(&p),
            "cutoff": cutoff,
            "budget": budget,
            "seed": seed,
            "method": method.to_string(),
            "max_abs_z": max_abs_z,
        }),
        assertions: vec![Assertion {
            name: "max_abs_z < 4".into(),
            pass: max_abs_z < 4.0,
            detail: format!("max |z| = {max_abs_z}"),
        }],
    })
}

fn check(name: &str, pass: bool, detail: String) -> Assertion {
    Assertion {
        name: name.into(),
        pass,
        detail,
    }
}

fn verify_regvar() -> Result<Vec<Assertion>> {
    let mut out = Vec::new();
    let laws = ["pareto(kappa=2)", "zpareto(w=0.3,kappa=2)", "logpareto(kappa=1.5,gamma=1)", "finite(0:0.6,1:0.2,2:0.2)"];
    let mut round_trip = true;
    for s in laws {
        let law: Law = s.parse()?;
        round_trip &= law.to_string().parse::<Law>()? == law;
    }
    out.push(check("grammar round trip", round_trip, format!("{} laws", laws.len())));
    let law: Law = "pareto(kappa=2)".parse()?;
    let q = law.sample(0.25)?;
    out.push(check("pareto inversion", q == 2, format!("sample(0.25) = {q}, want ⌊0.25^(−1/2)⌋ = 2")));
    Ok(out)
}

fn verify_process() -> Result<Vec<Assertion>> {
    let p = ModelParams::parse("bernoulli(q=0.5)", "pareto(kappa=2)")?;
    let a = bpi_core::process::simulate_path(&p, 20, 5)?;
    let b = bpi_core::process::simulate_path(&p, 20, 5)?;
    let longer = bpi_core::process::simulate_path(&p, 25, 5)?;
    Ok(vec![
        check("path determinism", a == b, "same seed, same path".into()),
        check(
            "prefix stability",
            longer.x_values[..20] == a.x_values[..],
            "extending n keeps X_1..X_n".into(),
        ),
    ])
}

fn verify_exact() -> Result<Vec<Assertion>> {
    let mut worst: f64 = 0.0;
    for f in FIXTURES {
        let sn: Pmf64 = SnEngine::from_laws(&f.offspring_law()?, &f.immigration_law()?, FIXTURE_CUTOFF).sn(f.n)?;
        worst = worst.max(sn.linf_distance(&f.golden()?)?);
    }
    let xi: Law = "finite(0:0.6,1:0.2,2:0.2)".parse()?;
    let t: Pmf<f64> = bpi_core::exact::pmf_t(&xi, 64, 1e-14)?;
    let dwass = reference::dwass_total_progeny(&xi, 50);
    let dw = dwass.iter().enumerate().map(|(k, w)| (t.mass(k) - w).abs()).fold(0.0, f64::max);
    Ok(vec![
        check("fixtures", worst <= 1e-10, format!("max L∞ = {worst:e} over {} fixtures", FIXTURES.len())),
        check("total progeny identity", dw <= 1e-10, format!("max L∞ = {dw:e}")),
    ])
}

fn verify_asymptotics() -> Result<Vec<Assertion>> {
    let a = ModelParams::parse("bernoulli(q=0.5)", "pareto(kappa=2)")?;
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * y.abs().max(1.0);
    let ld = const_ld::<f64>(&a)?.value;
    let st = const_stationary::<f64>(&a)?.value;
    let s3 = const_sn_fixed::<f64>(&a, 3)?.value;
    let s1 = const_sn_fixed::<f64>(&a, 1)?.value;
    let cesaro = (const_sn_fixed::<f64>(&a, 10_000)?.value / 10_000.0 - ld).abs() / ld;
    let zn = const_underlying(0.5, 2.0, UnderlyingKind::Zn, Some(2))?.value;
    Ok(vec![
        check("const_ld", close(ld, 4.0), format!("{ld}")),
        check("const_stationary", close(st, 4.0 / 3.0), format!("{st}")),
        check("const_sn_fixed(3)", close(s3, 6.3125), format!("{s3}")),
        check("const_sn_fixed(1) = 1", s1 == 1.0, format!("{s1}")),
        check("cesaro", cesaro < 0.02, format!("relative gap {cesaro:e} at n = 10^4")),
        check("Z_2 constant", close(zn, 0.75), format!("{zn}")),
    ])
}

fn verify_montecarlo(seed: u64) -> Result<Vec<Assertion>> {
    let p = ModelParams::parse("bernoulli(q=0.5)", "finite(0:0.5,1:0.5)")?;
    let exact: Pmf64 = bpi_core::exact::pmf_sn(&p, 3, 64)?;
    let truth = exact.tail_of(2.0).hi;
    let options = EstimatorOptions::default();
    let mut out = Vec::new();
    for method in [Method::Plain, Method::BigJump] {
        let mut covered = 0;
        for s in 0..100 {
            let e = estimate_event(&p, 3, Event::Above(2.0), 2.0, 5000, seed.wrapping_add(s), method, &options)?;
            covered += u32::from(e.ci95.contains(truth));
        }
        out.push(check(
            &format!("coverage {method}"),
            covered >= 90,
            format!("{covered}/100 intervals contain {truth}"),
        ));
    }
    Ok(out)
}

pub const SUITES: &[&str] = &["all", "regvar", "process", "exact", "asymptotics", "montecarlo"];

pub fn verify(cfg: &ExperimentConfig) -> Result<Outcome> {
    let suite = cfg.suite.clone().unwrap_or_else(|| "all".into()).to_ascii_lowercase();
    if !SUITES.contains(&suite.as_str()) {
        bail!("unknown suite `{suite}`, expected one of {}", SUITES.join(", "));
    }
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let mut assertions = Vec::new();
    let wants = |name: &str| suite == "all" || suite == name;
    if wants("regvar") {
        assertions.extend(verify_regvar()?);
    }
    if wants("process") {
        assertions.extend(verify_process()?);
    }
    if wants("exact") {
        assertions.extend(verify_exact()?);
    }
    if wants("asymptotics") {
        assertions.extend(verify_asymptotics()?);
    }
    if wants("montecarlo") {
        assertions.extend(verify_montecarlo(seed)?);
    }
    let mut csv = String::from("check,pass,detail\n");
    for a in &assertions {
        let _ = writeln!(csv, "{},{},{}", csv_field(&a.name), a.pass, csv_field(&a.detail));
    }
    Ok(Outcome {
        csv,
        report: json!({ "suite": suite, "seed": seed }),
        assertions,
    })
}

pub fn dispatch(kind: Kind, cfg: &ExperimentConfig) -> Result<Outcome> {
    match kind {
        Kind::Constants => constants(cfg),
        Kind::ExactScan => exact_scan(cfg),
        Kind::McScan => mc_scan(cfg),
        Kind::Compare => compare(cfg),
        Kind::Verify => verify(cfg),
    }
}
