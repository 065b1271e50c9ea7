//! Experiment configuration: `[section]` headers and `key = value` lines.
//! Full-line comments start with `#`.
//!
//! ```text
//! [model]
//! offspring = bernoulli(q=0.5)
//! immigration = pareto(kappa=2)
//!
//! [experiment]
//! n = 4,8,16
//! x_multipliers = 4
//! threshold_param = 0.1
//! cutoff = 131072
//!
//! [output]
//! dir = out
//! ```

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use bpi_core::montecarlo::Method;
use bpi_core::Law;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Constants,
    ExactScan,
    McScan,
    Compare,
    Verify,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Constants => "constants",
            Kind::ExactScan => "exact-scan",
            Kind::McScan => "mc-scan",
            Kind::Compare => "compare",
            Kind::Verify => "verify",
        }
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "constants" => Kind::Constants,
            "exact-scan" => Kind::ExactScan,
            "mc-scan" => Kind::McScan,
            "compare" => Kind::Compare,
            "verify" => Kind::Verify,
            _ => return Err(format!("unknown kind `{s}`")),
        })
    }
}

/// Every field is optional; each subcommand checks what it needs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub offspring: Option<Law>,
    pub immigration: Option<Law>,
    pub kind: Option<Kind>,
    pub n: Option<Vec<u64>>,
    pub x: Option<Vec<f64>>,
    pub x_multipliers: Option<Vec<f64>>,
    /// `δ` of `x_n = n^(δ+1/κ)` or `a` of `x_n = √(a n ln n)`.
    pub threshold_param: Option<f64>,
    pub cutoff: Option<usize>,
    pub tol: Option<f64>,
    pub budget: Option<u64>,
    pub seed: Option<u64>,
    pub method: Option<Method>,
    pub lower: Option<bool>,
    pub suite: Option<String>,
    pub out: Option<PathBuf>,
}

const KEYS: &[(&str, &[&str])] = &[
    ("model", &["offspring", "immigration"]),
    (
        "experiment",
        &[
            "kind",
            "n",
            "x",
            "x_multipliers",
            "threshold_param",
            "cutoff",
            "tol",
            "budget",
            "seed",
            "method",
            "lower",
            "suite",
        ],
    ),
    ("output", &["dir"]),
];

fn list<T: FromStr>(s: &str) -> Result<Vec<T>, (usize, String)> {
    let mut out = Vec::new();
    let mut offset = 0;
    for part in s.split(',') {
        let trimmed = part.trim();
        let lead = part.len() - part.trim_start().len();
        let v = trimmed
            .parse()
            .map_err(|_| (offset + lead, format!("cannot parse list entry `{trimmed}`")))?;
        out.push(v);
        offset += part.len() + 1;
    }
    if out.is_empty() {
        return Err((0, "empty list".into()));
    }
    Ok(out)
}

fn scalar<T: FromStr>(s: &str, what: &str) -> Result<T, (usize, String)> {
    s.parse().map_err(|_| (0, format!("expected {what}, found `{s}`")))
}

fn finite(v: f64) -> Result<f64, (usize, String)> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err((0, format!("expected a finite number, found {v}")))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        let mut section: Option<&str> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let indent = raw.len() - raw.trim_start().len();
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |column: usize, message: String| ConfigError {
                line: line_no,
                column,
                message,
            };
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(indent + line.len(), "expected `]`".into()))?
                    .trim();
                let known = KEYS
                    .iter()
                    .find(|(s, _)| *s == name)
                    .ok_or_else(|| err(indent + 2, format!("unknown section `{name}`")))?;
                section = Some(known.0);
                continue;
            }
            let Some(sec) = section else {
                return Err(err(indent + 1, "key outside of any section".into()));
            };
            let Some(eq) = line.find('=') else {
                return Err(err(indent + 1, "expected `key = value`".into()));
            };
            let key = line[..eq].trim();
            let value_part = &line[eq + 1..];
            let mut value = value_part.trim();
            let mut value_column = indent + eq + 2 + (value_part.len() - value_part.trim_start().len());
            if let Some(inner) = value.strip_prefix('"') {
                value = inner
                    .strip_suffix('"')
                    .ok_or_else(|| err(value_column, "unterminated string".into()))?;
                value_column += 1;
            }
            let allowed = KEYS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            if !allowed.contains(&key) {
                return Err(err(indent + 1, format!("unknown key `{key}` in [{sec}]")));
            }
            let at = |(offset, message): (usize, String)| err(value_column + offset, message);
            match key {
                "offspring" | "immigration" => {
                    let law = value.parse::<Law>().map_err(|e| match e {
                        bpi_core::Error::Parse { column, message } => err(value_column + column - 1, message),
                        other => err(value_column, other.to_string()),
                    })?;
                    if key == "offspring" {
                        cfg.offspring = Some(law);
                    } else {
                        cfg.immigration = Some(law);
                    }
                }
                "kind" => cfg.kind = Some(value.parse().map_err(|m| err(value_column, m))?),
                "n" => cfg.n = Some(list(value).map_err(at)?),
                "x" => cfg.x = Some(list::<f64>(value).map_err(at)?.into_iter().map(finite).collect::<Result<_, _>>().map_err(at)?),
                "x_multipliers" => {
                    cfg.x_multipliers = Some(list::<f64>(value).map_err(at)?.into_iter().map(finite).collect::<Result<_, _>>().map_err(at)?)
                }
                "threshold_param" => cfg.threshold_param = Some(scalar(value, "a number").and_then(finite).map_err(at)?),
                "cutoff" => cfg.cutoff = Some(scalar(value, "a nonnegative integer").map_err(at)?),
                "tol" => cfg.tol = Some(scalar(value, "a number").and_then(finite).map_err(at)?),
                "budget" => cfg.budget = Some(scalar(value, "a nonnegative integer").map_err(at)?),
                "seed" => cfg.seed = Some(scalar(value, "a nonnegative integer").map_err(at)?),
                "method" => cfg.method = Some(value.parse().map_err(|e: bpi_core::Error| err(value_column, e.to_string()))?),
                "lower" => cfg.lower = Some(scalar(value, "true or false").map_err(at)?),
                "suite" => cfg.suite = Some(value.to_string()),
                "dir" => cfg.out = Some(PathBuf::from(value)),
                _ => unreachable!("key checked against the table"),
            }
        }
        Ok(cfg)
    }

    /// Values set in `other` replace those in `self`.
    pub fn overlay(&mut self, other: ExperimentConfig) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(offspring, immigration, kind, n, x, x_multipliers, threshold_param, cutoff, tol, budget, seed, method, lower, suite, out);
    }
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for ExperimentConfig {
    /// Canonical text form; parsing it back gives an equal config.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut model = String::new();
        if let Some(l) = &self.offspring {
            let _ = writeln!(model, "offspring = {l}");
        }
        if let Some(l) = &self.immigration {
            let _ = writeln!(model, "immigration = {l}");
        }
        let mut exp = String::new();
        if let Some(k) = self.kind {
            let _ = writeln!(exp, "kind = {}", k.as_str());
        }
        if let Some(v) = &self.n {
            let _ = writeln!(exp, "n = {}", join(v));
        }
        if let Some(v) = &self.x {
            let _ = writeln!(exp, "x = {}", join(v));
        }
        if let Some(v) = &self.x_multipliers {
            let _ = writeln!(exp, "x_multipliers = {}", join(v));
        }
        if let Some(v) = self.threshold_param {
            let _ = writeln!(exp, "threshold_param = {v}");
        }
        if let Some(v) = self.cutoff {
            let _ = writeln!(exp, "cutoff = {v}");
        }
        if let Some(v) = self.tol {
            let _ = writeln!(exp, "tol = {v}");
        }
        if let Some(v) = self.budget {
            let _ = writeln!(exp, "budget = {v}");
        }
        if let Some(v) = self.seed {
            let _ = writeln!(exp, "seed = {v}");
        }
        if let Some(v) = self.method {
            let _ = writeln!(exp, "method = {v}");
        }
        if let Some(v) = self.lower {
            let _ = writeln!(exp, "lower = {v}");
        }
        if let Some(v) = &self.suite {
            let _ = writeln!(exp, "suite = {v}");
        }
        let mut sections = Vec::new();
        if !model.is_empty() {
            sections.push(format!("[model]\n{model}"));
        }
        if !exp.is_empty() {
            sections.push(format!("[experiment]\n{exp}"));
        }
        if let Some(dir) = &self.out {
            sections.push(format!("[output]\ndir = {}\n", dir.display()));
        }
        f.write_str(&sections.join("\n"))
    }
}
