//! Text form of laws: `pareto(kappa=2)`, `zpareto(w=0.3,kappa=2)`,
//! `logpareto(kappa=2,gamma=1)`, `bernoulli(q=0.5)`, `geom(q=0.5)`,
//! `poisson(lambda=0.7)`, `point(3)`, `finite(0:0.6,1:0.2,2:0.2)`.
//!
//! Whitespace is ignored everywhere; names and keys are case-sensitive.

use std::fmt;
use std::str::FromStr;

use super::Law;
use crate::error::{Error, Result};

/// A token with its 1-based column in the original input.
#[derive(Debug, Clone)]
struct Tok {
    text: String,
    column: usize,
}

fn parse_err(column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        column,
        message: message.into(),
    }
}

/// Strips whitespace while remembering the original column of every char.
fn compact(input: &str) -> Vec<(char, usize)> {
    input
        .chars()
        .enumerate()
        .filter(|(_, c)| !c.is_whitespace())
        .map(|(i, c)| (c, i + 1))
        .collect()
}

fn split_args(chars: &[(char, usize)], end_column: usize) -> Vec<Tok> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start = chars.first().map(|c| c.1).unwrap_or(end_column);
    for &(c, col) in chars {
        if c == ',' {
            out.push(Tok {
                text: std::mem::take(&mut current),
                column: start,
            });
            start = col + 1;
        } else {
            if current.is_empty() {
                start = col;
            }
            current.push(c);
        }
    }
    out.push(Tok {
        text: current,
        column: start,
    });
    out
}

fn number(tok: &str, column: usize) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(column, format!("expected a number, found `{tok}`")))
}

fn integer(tok: &str, column: usize) -> Result<u64> {
    tok.parse::<u64>()
        .map_err(|_| parse_err(column, format!("expected a nonnegative integer, found `{tok}`")))
}

/// Parses `key=value` arguments against the expected keys, in any order.
fn keyed(args: &[Tok], keys: &[&str], close_column: usize) -> Result<Vec<f64>> {
    let mut values: Vec<Option<f64>> = vec![None; keys.len()];
    for arg in args {
        let Some((key, value)) = arg.text.split_once('=') else {
            return Err(parse_err(arg.column, format!("expected key=value, found `{}`", arg.text)));
        };
        let Some(slot) = keys.iter().position(|k| *k == key) else {
            return Err(parse_err(
                arg.column,
                format!("unknown key `{key}`, expected one of {}", keys.join(", ")),
            ));
        };
        if values[slot].is_some() {
            return Err(parse_err(arg.column, format!("duplicate key `{key}`")));
        }
        values[slot] = Some(number(value, arg.column + key.chars().count() + 1)?);
    }
    values
        .into_iter()
        .zip(keys)
        .map(|(v, k)| v.ok_or_else(|| parse_err(close_column, format!("missing key `{k}`"))))
        .collect()
}

/// Parses a law specification.
pub fn parse_law(input: &str) -> Result<Law> {
    let chars = compact(input);
    let open = chars
        .iter()
        .position(|c| c.0 == '(')
        .ok_or_else(|| parse_err(chars.first().map(|c| c.1).unwrap_or(1), "expected `name(...)`"))?;
    let name: String = chars[..open].iter().map(|c| c.0).collect();
    let Some(&(last, close_column)) = chars.last() else {
        return Err(parse_err(1, "empty law specification"));
    };
    if last != ')' {
        return Err(parse_err(close_column, "expected closing `)`"));
    }
    let inner = &chars[open + 1..chars.len() - 1];
    if let Some(&(_, col)) = inner.iter().find(|c| c.0 == '(' || c.0 == ')') {
        return Err(parse_err(col, "unexpected parenthesis"));
    }
    let args = split_args(inner, close_column);
    if let Some(empty) = args.iter().find(|a| a.text.is_empty()) {
        if !(args.len() == 1 && name == "point") {
            return Err(parse_err(empty.column, "empty argument"));
        }
    }
    let name_column = chars[0].1;
    let law = match name.as_str() {
        "pareto" => {
            let v = keyed(&args, &["kappa"], close_column)?;
            Law::DiscretePareto { kappa: v[0] }
        }
        "zpareto" => {
            let v = keyed(&args, &["w", "kappa"], close_column)?;
            Law::ZeroInflatedPareto { w: v[0], kappa: v[1] }
        }
        "logpareto" => {
            let v = keyed(&args, &["kappa", "gamma"], close_column)?;
            Law::LogPareto {
                kappa: v[0],
                gamma: v[1],
            }
        }
        "bernoulli" => Law::Bernoulli {
            q: keyed(&args, &["q"], close_column)?[0],
        },
        "geom" => Law::Geometric {
            q: keyed(&args, &["q"], close_column)?[0],
        },
        "poisson" => Law::Poisson {
            lambda: keyed(&args, &["lambda"], close_column)?[0],
        },
        "point" => {
            if args.len() != 1 || args[0].text.is_empty() {
                return Err(parse_err(close_column, "point takes exactly one value"));
            }
            Law::PointMass {
                k: integer(&args[0].text, args[0].column)?,
            }
        }
        "finite" => {
            let mut table = Vec::with_capacity(args.len());
            for arg in &args {
                let Some((k, p)) = arg.text.split_once(':') else {
                    return Err(parse_err(arg.column, format!("expected k:p, found `{}`", arg.text)));
                };
                let k = integer(k, arg.column)?;
                let p = number(p, arg.column)?;
                table.push((k, p));
            }
            return Law::finite(&table).map_err(|e| parse_err(name_column, e.to_string()));
        }
        other => {
            return Err(parse_err(name_column, format!("unknown law `{other}`")));
        }
    };
    law.validate()
        .map_err(|e| parse_err(name_column, e.to_string()))?;
    Ok(law)
}

impl FromStr for Law {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_law(s)
    }
}

impl fmt::Display for Law {
    // `{}` on f64 is the shortest round-trip representation.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Law::DiscretePareto { kappa } => write!(f, "pareto(kappa={kappa})"),
            Law::LogPareto { kappa, gamma } => write!(f, "logpareto(kappa={kappa},gamma={gamma})"),
            Law::ZeroInflatedPareto { w, kappa } => write!(f, "zpareto(w={w},kappa={kappa})"),
            Law::Bernoulli { q } => write!(f, "bernoulli(q={q})"),
            Law::Geometric { q } => write!(f, "geom(q={q})"),
            Law::Poisson { lambda } => write!(f, "poisson(lambda={lambda})"),
            Law::PointMass { k } => write!(f, "point({k})"),
            Law::Finite { table } => {
                f.write_str("finite(")?;
                for (i, (k, p)) in table.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{k}:{p}")?;
                }
                f.write_str(")")
            }
        }
    }
}
