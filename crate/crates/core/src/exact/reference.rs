//! Independent brute-force oracles for the exact engine.

use crate::regvar::Law;

/// Schoolbook convolution of two mass vectors, truncated to `len`.
pub fn naive_convolve(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            if i + j < len {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// `θ ∘ m` for `m = 0..len`: row `m` is the `m`-fold self-convolution of the
/// offspring masses, truncated to `len`.
fn theta_table(offspring: &[f64], len: usize) -> Vec<Vec<f64>> {
    let mut rows = Vec::with_capacity(len);
    let mut row = vec![0.0; len];
    row[0] = 1.0;
    for _ in 0..len {
        let next = naive_convolve(&row, offspring, len);
        rows.push(std::mem::replace(&mut row, next));
    }
    rows
}

/// Law of `S_n` on `{0..=cutoff}` by dynamic programming over the joint
/// state `(X_m, S_m)`, dropping states with `S_m > cutoff`.
pub fn joint_dp_sn(offspring: &Law, immigration: &Law, n: usize, cutoff: usize) -> Vec<f64> {
    let len = cutoff + 1;
    let xi: Vec<f64> = (0..len).map(|k| offspring.pmf(k as u64)).collect();
    let eta: Vec<f64> = (0..len).map(|k| immigration.pmf(k as u64)).collect();
    let theta = theta_table(&xi, len);
    // state[x][s] = P(X_m = x, S_m = s); X_m ≤ S_m always.
    let mut state = vec![vec![0.0; len]; len];
    state[0][0] = 1.0;
    for _ in 0..n {
        let mut next = vec![vec![0.0; len]; len];
        for x in 0..len {
            // Law of θ∘x + η.
            let step = naive_convolve(&theta[x], &eta, len);
            for s in x..len {
                let p = state[x][s];
                if p == 0.0 {
                    continue;
                }
                for (y, &q) in step.iter().enumerate() {
                    if s + y >= len {
                        break;
                    }
                    next[y][s + y] += p * q;
                }
            }
        }
        state = next;
    }
    let mut out = vec![0.0; len];
    for row in &state {
        for (s, &p) in row.iter().enumerate() {
            out[s] += p;
        }
    }
    out
}

/// `P(T = k) = P(ξ_1 + ... + ξ_k = k − 1) / k` for `k = 0..=k_max`.
pub fn dwass_total_progeny(offspring: &Law, k_max: usize) -> Vec<f64> {
    let len = k_max + 1;
    let xi: Vec<f64> = (0..len).map(|k| offspring.pmf(k as u64)).collect();
    let mut out = vec![0.0; len];
    let mut power = vec![0.0; len];
    power[0] = 1.0;
    for k in 1..len {
        power = naive_convolve(&power, &xi, len);
        out[k] = power[k - 1] / k as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joint_dp_pure_immigration() {
        let out = joint_dp_sn(&Law::point(0), &Law::point(1), 4, 10);
        assert_eq!(out[4], 1.0);
    }

    #[test]
    fn dwass_examples() {
        let f: Law = "finite(0:0.6,1:0.2,2:0.2)".parse().unwrap();
        let t = dwass_total_progeny(&f, 4);
        assert!((t[1] - 0.6).abs() < 1e-15);
        assert!((t[2] - 0.12).abs() < 1e-15);
    }
}
