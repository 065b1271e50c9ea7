//! Forward simulation of `X_n = θ_n ∘ X_{n-1} + η_n` from `X_0 = 0`, its
//! partial sums `S_n`, and the total progeny `T_n` of a Galton–Watson tree.
//!
//! Generation `g` of a path reads its uniforms from block `g` of the path's
//! stream: uniform 0 is the immigration draw `η_g`, uniforms `1..=X_{g-1}`
//! are the offspring draws of generation `g-1`, whose `η_{g-1}` immigrants
//! come first. Block 0 is left for estimator bookkeeping. Extending a path
//! from `n` to `n+1` generations therefore never changes `X_1..X_n`.

mod stream;

pub use stream::{DrawIndex, Draws, GENERATION_CAPACITY};

use crate::error::{Error, Result};
use crate::regvar::{Law, ModelParams};

/// Largest `k` accepted by [`theta_apply`].
pub const MAX_THETA_COUNT: u64 = 1 << 20;

fn saturation(what: &str) -> Error {
    Error::Saturation(format!("{what} overflowed 64 bits"))
}

fn check_count(k: u64) -> Result<()> {
    if k > MAX_THETA_COUNT {
        Err(Error::Saturation(format!(
            "offspring count {k} exceeds the per-generation limit {MAX_THETA_COUNT}"
        )))
    } else {
        Ok(())
    }
}

/// `θ ∘ k`: the sum of `k` offspring draws taken from the current position
/// of `draws`. `k = 0` consumes nothing.
pub fn theta_apply(offspring: &Law, k: u64, draws: &mut Draws) -> Result<u64> {
    check_count(k)?;
    let mut total = 0u64;
    for _ in 0..k {
        let v = offspring.sample(draws.uniform())?;
        total = total.checked_add(v).ok_or_else(|| saturation("offspring sum"))?;
    }
    Ok(total)
}

/// One simulated path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub x_values: Vec<u64>,
    pub s_value: u64,
    pub seed: u64,
    pub path: u64,
    pub params_digest: String,
}

/// A single draw sampled from its law conditioned to exceed `level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tilt {
    None,
    /// Replace `η_generation`.
    Immigration { generation: u64, level: f64 },
    /// Replace the offspring draw of the `slot`-th (1-based) immigrant that
    /// arrived in `generation`; the draw itself happens in `generation + 1`.
    ImmigrantChild { generation: u64, slot: u64, level: f64 },
}

/// Path output plus counts of large draws at a probe level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathRecord {
    pub x_values: Vec<u64>,
    pub eta_values: Vec<u64>,
    pub s_value: u64,
    /// Set when the path stopped early; `x_values` and `s_value` then cover
    /// only the simulated generations and `s_value` is a lower bound.
    pub stopped: bool,
    /// `#{g ≤ n : η_g > level}`.
    pub immigration_above: u64,
    /// Immigrant-child draws of generations `1..n-1` exceeding the level.
    pub immigrant_children_above: u64,
}

/// Immigration draws `η_1..η_n` of a path, without simulating the rest.
pub fn immigration_draws(immigration: &Law, n: u64, draws: &mut Draws) -> Result<Vec<u64>> {
    (1..=n)
        .map(|g| {
            draws.seek(g, 0);
            immigration.sample(draws.uniform())
        })
        .collect()
}

/// Simulates `n` generations with an optional tilted draw and probe level.
///
/// With `stop_above`, population draws end once `S` exceeds that level. The
/// immigration and immigrant-child draws, and so the probe counts, are still
/// taken for all `n` generations from their usual stream positions.
pub fn simulate_path_with(
    params: &ModelParams,
    n: u64,
    draws: &mut Draws,
    tilt: Tilt,
    probe: Option<f64>,
    stop_above: Option<f64>,
) -> Result<PathRecord> {
    if n == 0 {
        return Err(crate::error::domain("path length must be at least 1"));
    }
    let offspring = params.offspring();
    let immigration = params.immigration();
    let mut record = PathRecord {
        x_values: Vec::with_capacity(n as usize),
        eta_values: Vec::with_capacity(n as usize),
        s_value: 0,
        stopped: false,
        immigration_above: 0,
        immigrant_children_above: 0,
    };
    let child = |g: u64, i: u64, u: f64| match tilt {
        Tilt::ImmigrantChild {
            generation,
            slot,
            level,
        } if generation + 1 == g && slot == i => offspring.sample_above(level, u),
        _ => offspring.sample(u),
    };
    let mut prev = 0u64;
    let mut prev_eta = 0u64;
    for g in 1..=n {
        draws.seek(g, 0);
        let u = draws.uniform();
        let eta = match tilt {
            Tilt::Immigration { generation, level } if generation == g => {
                immigration.sample_above(level, u)?
            }
            _ => immigration.sample(u)?,
        };
        if let Some(level) = probe {
            if eta as f64 > level {
                record.immigration_above += 1;
            }
        }
        if record.stopped {
            if let Some(level) = probe {
                for i in 1..=prev_eta {
                    if child(g, i, draws.uniform())? as f64 > level {
                        record.immigrant_children_above += 1;
                    }
                }
            }
            record.eta_values.push(eta);
            prev_eta = eta;
            continue;
        }
        check_count(prev)?;
        let mut x = eta;
        for i in 1..=prev {
            let v = child(g, i, draws.uniform())?;
            if let Some(level) = probe {
                if i <= prev_eta && v as f64 > level {
                    record.immigrant_children_above += 1;
                }
            }
            x = x.checked_add(v).ok_or_else(|| saturation("population"))?;
        }
        record.s_value = record
            .s_value
            .checked_add(x)
            .ok_or_else(|| saturation("total population"))?;
        record.x_values.push(x);
        record.eta_values.push(eta);
        if stop_above.is_some_and(|level| record.s_value as f64 > level) && g < n {
            record.stopped = true;
        }
        prev = x;
        prev_eta = eta;
    }
    Ok(record)
}

/// Path `path` of the family keyed by `seed`.
pub fn simulate_path_indexed(params: &ModelParams, n: u64, seed: u64, path: u64) -> Result<Trajectory> {
    let mut draws = Draws::new(seed, path);
    let record = simulate_path_with(params, n, &mut draws, Tilt::None, None, None)?;
    Ok(Trajectory {
        x_values: record.x_values,
        s_value: record.s_value,
        seed,
        path,
        params_digest: params.digest(),
    })
}

/// `X_1..X_n` and `S_n` for path 0 of `seed`.
pub fn simulate_path(params: &ModelParams, n: u64, seed: u64) -> Result<Trajectory> {
    simulate_path_indexed(params, n, seed, 0)
}

/// `T_n = 1 + Z_1 + ... + Z_n` with `Z_0 = 1`, from path `path` of `seed`.
pub fn simulate_total_progeny_indexed(
    offspring: &Law,
    generations: u64,
    seed: u64,
    path: u64,
) -> Result<u64> {
    let mut draws = Draws::new(seed, path);
    let mut z = 1u64;
    let mut total = 1u64;
    for g in 1..=generations {
        if z == 0 {
            break;
        }
        draws.seek(g, 0);
        z = theta_apply(offspring, z, &mut draws)?;
        total = total.checked_add(z).ok_or_else(|| saturation("total progeny"))?;
    }
    Ok(total)
}

pub fn simulate_total_progeny(offspring: &Law, generations: u64, seed: u64) -> Result<u64> {
    simulate_total_progeny_indexed(offspring, generations, seed, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(xi: &str, eta: &str) -> ModelParams {
        ModelParams::parse(xi, eta).unwrap()
    }

    #[test]
    fn theta_apply_examples() {
        let mut d = Draws::new(1, 0);
        let before = d.position();
        assert_eq!(theta_apply(&Law::bernoulli(0.3).unwrap(), 0, &mut d).unwrap(), 0);
        assert_eq!(d.position(), before);
        assert_eq!(theta_apply(&Law::point(2), 5, &mut d).unwrap(), 10);
        let b = theta_apply(&Law::bernoulli(0.5).unwrap(), 1_000_000, &mut d).unwrap();
        assert!((b as f64 - 5e5).abs() <= 4.0 * (1e6f64 * 0.25).sqrt());
        assert!(matches!(
            theta_apply(&Law::point(1), MAX_THETA_COUNT + 1, &mut d),
            Err(Error::Saturation(_))
        ));
    }

    #[test]
    fn deterministic_recursions() {
        // Offspring point(0) has mean 0, outside the subcritical range, so
        // drive the recursion directly.
        let mut d = Draws::new(0, 0);
        let mut x = 0;
        let mut xs = vec![];
        for _ in 0..3 {
            x = theta_apply(&Law::point(1), x, &mut d).unwrap() + 1;
            xs.push(x);
        }
        assert_eq!(xs, vec![1, 2, 3]);
        let p = params("finite(0:0.5,1:0.5)", "point(1)");
        let t = simulate_path(&p, 3, 9).unwrap();
        assert_eq!(t.x_values[0], 1);
        assert_eq!(t.s_value, t.x_values.iter().sum::<u64>());
    }

    #[test]
    fn reproducible_and_monotone_in_n() {
        let p = params("bernoulli(q=0.5)", "pareto(kappa=2)");
        let a = simulate_path_indexed(&p, 12, 42, 5).unwrap();
        let b = simulate_path_indexed(&p, 12, 42, 5).unwrap();
        assert_eq!(a, b);
        let mut last = 0;
        for n in 1..=12 {
            let t = simulate_path_indexed(&p, n, 42, 5).unwrap();
            assert_eq!(t.x_values[..], a.x_values[..n as usize]);
            assert!(t.s_value >= last);
            last = t.s_value;
        }
    }

    #[test]
    fn tilted_immigration_exceeds_level() {
        let p = params("bernoulli(q=0.5)", "pareto(kappa=2)");
        let mut d = Draws::new(3, 1);
        let tilt = Tilt::Immigration {
            generation: 2,
            level: 1000.0,
        };
        let r = simulate_path_with(&p, 4, &mut d, tilt, Some(1000.0), None).unwrap();
        assert!(r.eta_values[1] > 1000);
        assert!(r.immigration_above >= 1);
    }

    #[test]
    fn tilted_child_exceeds_level() {
        let p = params("zpareto(w=0.3,kappa=2)", "point(2)");
        let mut d = Draws::new(3, 1);
        let tilt = Tilt::ImmigrantChild {
            generation: 1,
            slot: 2,
            level: 500.0,
        };
        let r = simulate_path_with(&p, 2, &mut d, tilt, Some(500.0), None).unwrap();
        assert!(r.x_values[1] > 500);
        assert!(r.immigrant_children_above >= 1);
    }

    #[test]
    fn early_stop_keeps_probe_counts() {
        let p = params("zpareto(w=0.3,kappa=1.5)", "finite(0:0.3,1:0.3,3:0.4)");
        for path in 0..200 {
            let tilt = Tilt::ImmigrantChild {
                generation: 1,
                slot: 1,
                level: 20.0,
            };
            let full = simulate_path_with(&p, 8, &mut Draws::new(9, path), tilt, Some(5.0), None).unwrap();
            let cut = simulate_path_with(&p, 8, &mut Draws::new(9, path), tilt, Some(5.0), Some(30.0)).unwrap();
            assert_eq!(full.eta_values, cut.eta_values);
            assert_eq!(full.immigration_above, cut.immigration_above);
            assert_eq!(full.immigrant_children_above, cut.immigrant_children_above);
            assert_eq!(full.s_value > 30, cut.s_value > 30);
            assert_eq!(cut.x_values[..], full.x_values[..cut.x_values.len()]);
        }
    }

    #[test]
    fn total_progeny_root_only() {
        let t = simulate_total_progeny(&Law::point(0), 10, 1).unwrap();
        assert_eq!(t, 1);
    }
}
