//! Numerical checks of regular-variation properties: truncated moments,
//! Potter-type ratio bounds and the `E log⁺ X` criterion.

use super::{series, Law};
use crate::scalar::CompensatedSum;

/// Beyond this many atoms, sums over heavy laws switch to an integral.
const DIRECT_LIMIT: u64 = 1 << 22;

/// Hard stop for light laws whose tail never underflows within range.
const LIGHT_LIMIT: u64 = 100_000_000;

fn smooth_pmf(law: &Law, y: f64) -> f64 {
    let lo = if y - 1.0 < 0.0 { 1.0 } else { law.smooth_survival(y - 1.0) };
    (lo - law.smooth_survival(y)).max(0.0)
}

/// `E(X^power; X ≤ x)`.
///
/// Atoms up to `2^22` are summed exactly; beyond that the remainder is the
/// integral of `y^power` against the interpolated mass function, which is
/// accurate to the Euler–Maclaurin correction of a smooth summand.
pub fn truncated_moment(law: &Law, power: f64, x: f64) -> f64 {
    if !(x >= 0.0) {
        return 0.0;
    }
    let top = x.floor();
    let mut acc = CompensatedSum::new();
    match law {
        Law::Finite { table } => {
            for &(k, p) in table {
                if (k as f64) <= top {
                    acc.add((k as f64).powf(power) * p);
                }
            }
            return acc.value();
        }
        Law::PointMass { k } => {
            return if (*k as f64) <= top { (*k as f64).powf(power) } else { 0.0 };
        }
        _ => {}
    }
    let direct_top = if top >= DIRECT_LIMIT as f64 { DIRECT_LIMIT } else { top as u64 };
    for k in 1..=direct_top {
        let m = law.pmf(k);
        if m == 0.0 && !law.is_heavy() && law.tail(k as f64).unwrap_or(0.0) == 0.0 {
            break;
        }
        acc.add((k as f64).powf(power) * m);
    }
    if top > DIRECT_LIMIT as f64 && law.is_heavy() {
        let a = DIRECT_LIMIT as f64 + 0.5;
        let b = top + 0.5;
        // Integrate in ln y with unit panels.
        let g = |t: f64| {
            let y = t.exp();
            y.powf(power) * smooth_pmf(law, y) * y
        };
        let (ta, tb) = (a.ln(), b.ln());
        let panels = ((tb - ta).ceil() as usize).max(1) * 4;
        acc.add(series::integrate(g, ta, tb, panels));
    }
    acc.value()
}

/// Outcome of [`potter_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct PotterReport {
    pub pass: bool,
    /// Largest `lhs / bound` over the checked pairs; the bound holds iff ≤ 1.
    pub worst_ratio: f64,
    pub worst_pair: Option<(f64, f64)>,
    pub checked: usize,
}

/// Checks `P(X>y)/P(X>x) ≤ A·max((y/x)^{-κ+δ}, (y/x)^{-κ-δ})` over the grid,
/// skipping pairs with a coordinate below `x0`. `κ` is the law's tail index,
/// or 0 for light laws.
pub fn potter_check(law: &Law, a: f64, delta: f64, x0: f64, grid: &[(f64, f64)]) -> PotterReport {
    let kappa = law.tail_index().unwrap_or(0.0);
    let mut report = PotterReport {
        pass: true,
        worst_ratio: 0.0,
        worst_pair: None,
        checked: 0,
    };
    for &(x, y) in grid {
        if x < x0 || y < x0 || x <= 0.0 {
            continue;
        }
        report.checked += 1;
        let (lx, ly) = match (law.log_tail(x), law.log_tail(y)) {
            (Ok(lx), Ok(ly)) => (lx, ly),
            _ => continue,
        };
        let log_lhs = if ly == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            ly - lx
        };
        let r = (y / x).ln();
        let log_bound = a.ln() + (r * (-kappa + delta)).max(r * (-kappa - delta));
        let ratio = (log_lhs - log_bound).exp();
        if ratio > report.worst_ratio || report.worst_pair.is_none() {
            report.worst_ratio = ratio;
            report.worst_pair = Some((x, y));
        }
    }
    report.pass = report.worst_ratio <= 1.0;
    report
}

/// `E log⁺ X = Σ_{k≥1} P(X > k) ln(1 + 1/k)`.
pub fn log_plus_moment(law: &Law) -> f64 {
    match law {
        Law::Finite { table } => {
            let mut acc = CompensatedSum::new();
            for &(k, p) in table {
                if k > 1 {
                    acc.add((k as f64).ln() * p);
                }
            }
            return acc.value();
        }
        Law::PointMass { k } => return if *k > 1 { (*k as f64).ln() } else { 0.0 },
        _ => {}
    }
    if let Some(shape) = law.tail_shape() {
        let f = |y: f64| law.smooth_survival(y) * (1.0 / y).ln_1p();
        return series::heavy_series(f, 1, 1 << 16, |t| {
            // ∫_{e^t}^∞ scale·y^{-κ-1}·t^γ dy
            shape.scale * (-shape.kappa * t).exp() * t.powf(shape.gamma) / shape.kappa
        });
    }
    let mut acc = CompensatedSum::new();
    let mut k = 1u64;
    while k < LIGHT_LIMIT {
        let t = law.tail(k as f64).unwrap_or(0.0);
        if t == 0.0 {
            break;
        }
        let term = t * (1.0 / k as f64).ln_1p();
        acc.add(term);
        if term < 1e-20 * acc.value() {
            break;
        }
        k += 1;
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_moment_examples() {
        let m = Law::point(2);
        assert_eq!(truncated_moment(&m, 3.0, 1.0), 0.0);
        assert_eq!(truncated_moment(&m, 3.0, 2.0), 8.0);
    }

    #[test]
    fn karamata_ratio_approaches_limit() {
        let law = Law::discrete_pareto(2.0).unwrap();
        let mut last_err = f64::INFINITY;
        for e in [8, 12, 16] {
            let x = 2f64.powi(e);
            let ratio = truncated_moment(&law, 3.0, x) / (x.powi(3) * law.tail(x).unwrap());
            let err = (ratio - 2.0).abs();
            assert!(err < last_err, "x=2^{e}: ratio {ratio}");
            last_err = err;
        }
        assert!(last_err < 1e-3);
    }

    #[test]
    fn truncated_moment_integral_remainder_is_continuous() {
        let law = Law::discrete_pareto(2.5).unwrap();
        let x = (DIRECT_LIMIT as f64) * 4.0;
        let via_integral = truncated_moment(&law, 3.0, x);
        // Karamata: ≈ κ/(p−κ)·x^p·P(X>x) = 5·x^{0.5}.
        let karamata = 5.0 * x.powf(3.0) * law.tail(x).unwrap();
        assert!((via_integral / karamata - 1.0).abs() < 1e-3);
    }

    #[test]
    fn potter_examples() {
        let grid: Vec<(f64, f64)> = {
            let pts: Vec<f64> = (0..=16).map(|i| 10f64.powf(1.0 + i as f64 * 0.25)).collect();
            pts.iter().flat_map(|&x| pts.iter().map(move |&y| (x, y))).collect()
        };
        let p = Law::discrete_pareto(2.0).unwrap();
        assert!(potter_check(&p, 2.0, 0.5, 10.0, &grid).pass);

        let same = potter_check(&Law::poisson(1.0).unwrap(), 1.5, 0.1, 0.0, &[(3.0, 3.0)]);
        assert!(same.pass);
        assert!((same.worst_ratio - 1.0 / 1.5).abs() < 1e-15);

        let lp = Law::log_pareto(2.0, 1.0).unwrap();
        let report = potter_check(&lp, 1.01, 0.01, 10.0, &grid);
        assert!(!report.pass);
        let (x, y) = report.worst_pair.unwrap();
        assert!(x >= 10.0 && y >= 10.0 && x != y);
    }

    #[test]
    fn log_plus_examples() {
        assert_eq!(log_plus_moment(&Law::point(1)), 0.0);
        assert!((log_plus_moment(&Law::point(3)) - 3f64.ln()).abs() < 1e-15);
        // Σ_{k≥2} ln k / (k(k+1)), partial sums to 10^7 plus ∫ ln y / y² tail.
        let m = 10_000_000u64;
        let partial: f64 = (2..=m).map(|k| (k as f64).ln() / (k as f64 * (k as f64 + 1.0))).sum();
        let rest = ((m as f64).ln() + 1.0) / m as f64;
        let v = log_plus_moment(&Law::discrete_pareto(1.0).unwrap());
        assert!((v - partial - rest).abs() < 1e-6, "{v} vs {}", partial + rest);
        assert!((v - 0.788_530_565_911_509).abs() < 1e-9, "{v}");
    }

    #[test]
    fn log_plus_pareto_matches_atom_sum() {
        // Oracle: Σ ln k · P(X=k) with a crude tail bound.
        let law = Law::discrete_pareto(1.5).unwrap();
        let direct: f64 = (2..2_000_000u64).map(|k| (k as f64).ln() * law.pmf(k)).sum();
        let x: f64 = 2_000_000.0;
        // Σ_{k≥x} ln k·P(X=k) ≈ ln x·x^{-κ} + x^{-κ}/κ
        let rest = x.powf(-1.5) * (x.ln() + 1.0 / 1.5);
        let v = log_plus_moment(&law);
        assert!((v - direct - rest).abs() < 1e-8, "{v} vs {}", direct + rest);
    }

    #[test]
    fn log_plus_light_laws_are_finite() {
        for law in [Law::geometric(0.2).unwrap(), Law::poisson(3.0).unwrap()] {
            let v = log_plus_moment(&law);
            let direct: f64 = (2..2000u64).map(|k| (k as f64).ln() * law.pmf(k)).sum();
            assert!((v - direct).abs() < 1e-12, "{law}: {v} vs {direct}");
        }
    }
}
