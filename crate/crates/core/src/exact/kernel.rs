//! Independent sums and random sums of truncated pmfs.

use realfft::num_complex::Complex;

use super::fft::{multiply_direct, Multiplier};
use super::pmf::{clip_negatives, Pmf};
use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, CompensatedSum, Real};

/// Count supports up to this size are compounded by Horner's rule.
const HORNER_MAX_COUNT: usize = 24;
/// Summands up to this degree use divide-and-conquer composition.
const SMALL_SUMMAND_DEGREE: usize = 64;
/// Column tile of the dense block products in baby-step/giant-step.
const TILE: usize = 512;
/// Binomial terms below this fraction of the mode are dropped.
const THINNING_CUTOFF: f64 = 1e-40;

fn check_cutoffs<T: Real>(a: &Pmf<T>, b: &Pmf<T>) -> Result<()> {
    if a.cutoff() == b.cutoff() {
        Ok(())
    } else {
        Err(Error::CutoffMismatch {
            left: a.cutoff(),
            right: b.cutoff(),
        })
    }
}

/// Law of `A + B` for independent `A ~ a`, `B ~ b`.
///
/// Mass summing past the window, and any interaction with either tail mass,
/// becomes tail mass.
pub fn convolve<T: Real>(a: &Pmf<T>, b: &Pmf<T>) -> Result<Pmf<T>> {
    convolve_with(&mut Multiplier::new(), a, b)
}

pub fn convolve_with<T: Real>(mul: &mut Multiplier<T>, a: &Pmf<T>, b: &Pmf<T>) -> Result<Pmf<T>> {
    check_cutoffs(a, b)?;
    let n = a.cutoff() + 1;
    let mut masses = mul.multiply(a.masses(), b.masses(), n);
    clip_negatives(&mut masses)?;
    // overflow = Σ_i a_i · Σ_{j > N-i} b_j, exact from suffix sums of b.
    let bm = b.masses();
    let mut suffix = vec![T::zero(); n + 1];
    let mut acc = CompensatedSum::new();
    for j in (0..n).rev() {
        acc.add(bm[j]);
        suffix[j] = acc.value();
    }
    let overflow = compensated_sum(
        a.masses()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &ai)| ai * suffix[n - i]),
    );
    let (ta, tb) = (a.tail_mass(), b.tail_mass());
    let tail = ta + tb - ta * tb + overflow;
    Ok(Pmf::unchecked(masses, tail))
}

/// `k`-fold convolution power by binary powering; `k = 0` gives `δ_0`.
pub fn convolve_power<T: Real>(a: &Pmf<T>, k: usize) -> Result<Pmf<T>> {
    let mut mul = Multiplier::new();
    let mut result = Pmf::point(0, a.cutoff());
    let mut base = a.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            result = convolve_with(&mut mul, &result, &base)?;
        }
        k >>= 1;
        if k > 0 {
            base = convolve_with(&mut mul, &base, &base)?;
        }
    }
    Ok(result)
}

/// Algorithm used by [`compound_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CompoundMethod {
    /// Pick the cheapest exact route from the shapes of the inputs.
    #[default]
    Auto,
    /// Truncated composition `G(S(z)) mod z^{N+1}` by baby-step/giant-step.
    Composition,
    /// Count generating function evaluated at the discrete Fourier transform
    /// of the summand padded to `pad_factor·(N+1)` points. Exact only while
    /// `max count · max summand` stays below the padded length; beyond that
    /// the cyclic wrap folds far mass back into the window.
    Transform { pad_factor: usize },
}

/// Law of `W_1 + ... + W_M` with `M ~ count` independent of the iid
/// `W_i ~ summand`.
pub fn compound<T: Real>(count: &Pmf<T>, summand: &Pmf<T>) -> Result<Pmf<T>> {
    compound_with(count, summand, CompoundMethod::Auto)
}

pub fn compound_with<T: Real>(
    count: &Pmf<T>,
    summand: &Pmf<T>,
    method: CompoundMethod,
) -> Result<Pmf<T>> {
    check_cutoffs(count, summand)?;
    let n = count.cutoff() + 1;
    let c = count.masses();
    let s = summand.masses();
    let valuation = summand.first_nonzero().unwrap_or(n);
    let degree = summand.last_nonzero().unwrap_or(0);
    // Terms c_k S^k with k·valuation ≥ n vanish on the window.
    let mut k_max = count.last_nonzero().unwrap_or(0);
    if valuation > 0 {
        k_max = k_max.min((n - 1) / valuation);
    }
    let c = &c[..=k_max];
    let mut mul = Multiplier::new();
    let masses = match method {
        CompoundMethod::Transform { pad_factor } => transform_route(&mut mul, c, s, n, pad_factor),
        CompoundMethod::Composition => baby_giant(&mut mul, c, s, n, valuation),
        CompoundMethod::Auto => {
            if k_max <= 1 {
                mixture(c, s, n)
            } else if degree <= 1 {
                thinning(c, s[0], if n > 1 { s[1] } else { T::zero() }, n)
            } else if k_max <= HORNER_MAX_COUNT {
                horner(&mut mul, c, s, n)
            } else if degree <= SMALL_SUMMAND_DEGREE {
                divide_and_conquer(&mut mul, c, &s[..=degree], n, valuation)
            } else {
                baby_giant(&mut mul, c, s, n, valuation)
            }
        }
    };
    Pmf::from_window(masses)
}

fn mixture<T: Real>(c: &[T], s: &[T], n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n];
    out[0] = c[0];
    if let Some(&c1) = c.get(1) {
        for (o, &v) in out.iter_mut().zip(s) {
            *o = *o + c1 * v;
        }
    }
    out
}

/// Summand on `{0, 1}` (plus tail): `P(sum = k) = Σ_m c_m C(m,k) s1^k s0^{m-k}`.
fn thinning<T: Real>(c: &[T], s0: T, s1: T, n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n];
    let (s0, s1) = (s0.to_f64_lossy(), s1.to_f64_lossy());
    let (l0, l1) = (s0.ln(), s1.ln());
    for (m, &cm) in c.iter().enumerate() {
        let cm = cm.to_f64_lossy();
        if cm == 0.0 {
            continue;
        }
        if s1 == 0.0 {
            out[0] = out[0] + T::of(cm * s0.powi(m as i32));
            continue;
        }
        if s0 == 0.0 {
            if m < n {
                out[m] = out[m] + T::of(cm * s1.powi(m as i32));
            }
            continue;
        }
        let mf = m as f64;
        let p = s1 / (s0 + s1);
        let mode = (((mf + 1.0) * p).floor() as usize).min(m);
        let log_binom = |k: usize| {
            let kf = k as f64;
            statrs::function::gamma::ln_gamma(mf + 1.0)
                - statrs::function::gamma::ln_gamma(kf + 1.0)
                - statrs::function::gamma::ln_gamma(mf - kf + 1.0)
                + kf * l1
                + (mf - kf) * l0
        };
        let peak = log_binom(mode).exp();
        let ratio = s1 / s0;
        // Walk up from the mode.
        let mut term = peak;
        let mut k = mode;
        while k < n && term > THINNING_CUTOFF * peak {
            out[k] = out[k] + T::of(cm * term);
            if k == m {
                break;
            }
            term *= (mf - k as f64) / (k as f64 + 1.0) * ratio;
            k += 1;
        }
        // Walk down.
        let mut term = peak;
        let mut k = mode;
        while k > 0 {
            term *= k as f64 / (mf - k as f64 + 1.0) / ratio;
            k -= 1;
            if term <= THINNING_CUTOFF * peak {
                break;
            }
            if k < n {
                out[k] = out[k] + T::of(cm * term);
            }
        }
    }
    out
}

/// `c_0 + S(c_1 + S(c_2 + ...))` with a reused spectrum of `S`.
fn horner<T: Real>(mul: &mut Multiplier<T>, c: &[T], s: &[T], n: usize) -> Vec<T> {
    let spec = mul.spectrum(s, n);
    let mut acc = vec![T::zero(); n];
    acc[0] = c[c.len() - 1];
    for &ck in c[..c.len() - 1].iter().rev() {
        acc = mul.multiply_spectrum(&spec, &acc, n);
        acc[0] = acc[0] + ck;
    }
    acc
}

/// `Σ_k c_k S^k` for a low-degree `S` by splitting the coefficient range in
/// halves: `G_lo(S) + S^h · G_hi(S)`.
fn divide_and_conquer<T: Real>(
    mul: &mut Multiplier<T>,
    c: &[T],
    s: &[T],
    n: usize,
    valuation: usize,
) -> Vec<T> {
    let d = s.len() - 1;
    let span = c.len().next_power_of_two();
    // powers[l] = S^{2^l}, truncated to the window.
    let mut powers: Vec<Vec<T>> = vec![s[..s.len().min(n)].to_vec()];
    while (1usize << powers.len()) < span {
        let last = powers.last().expect("nonempty");
        let len = (last.len() * 2 - 1).min(n);
        let sq = mul.multiply(last, last, len);
        powers.push(sq);
    }
    struct Ctx<'a, T: Real> {
        c: &'a [T],
        powers: &'a [Vec<T>],
        d: usize,
        valuation: usize,
    }
    fn rec<T: Real>(ctx: &Ctx<T>, mul: &mut Multiplier<T>, lo: usize, span: usize, need: usize) -> Vec<T> {
        if lo >= ctx.c.len() || need == 0 {
            return Vec::new();
        }
        if span == 1 {
            return vec![ctx.c[lo]];
        }
        let half = span / 2;
        let max_len = ((span - 1) * ctx.d + 1).min(need);
        let mut left = rec(ctx, mul, lo, half, max_len);
        let right_need = max_len.saturating_sub(half * ctx.valuation);
        let right = rec(ctx, mul, lo + half, half, right_need);
        if right.is_empty() {
            return left;
        }
        let level = half.trailing_zeros() as usize;
        let prod = mul.multiply(&ctx.powers[level], &right, max_len);
        if left.len() < prod.len() {
            left.resize(prod.len(), T::zero());
        }
        for (l, p) in left.iter_mut().zip(&prod) {
            *l = *l + *p;
        }
        left
    }
    let ctx = Ctx {
        c,
        powers: &powers,
        d,
        valuation,
    };
    let mut out = rec(&ctx, mul, 0, span, n);
    out.resize(n, T::zero());
    out
}

/// Brent–Kung baby-step/giant-step composition: with `m ≈ √K`,
/// `G(S) = Σ_j B_j(S) · (S^m)^j` where `B_j = Σ_{i<m} c_{jm+i} S^i` are dense
/// block products and the outer sum runs by Horner's rule in `S^m`.
fn baby_giant<T: Real>(mul: &mut Multiplier<T>, c: &[T], s: &[T], n: usize, valuation: usize) -> Vec<T> {
    let k = c.len() - 1;
    if k == 0 {
        let mut out = vec![T::zero(); n];
        out[0] = c[0];
        return out;
    }
    let m = ((k + 1) as f64).sqrt().ceil() as usize;
    let blocks = (k + 1).div_ceil(m);
    let s = &s[..n];
    let mut powers: Vec<Vec<T>> = Vec::with_capacity(m + 1);
    let mut one = vec![T::zero(); n];
    one[0] = T::one();
    powers.push(one);
    for i in 1..=m {
        let next = mul.multiply(&powers[i - 1], s, n);
        powers.push(next);
    }
    let need = |j: usize| n.saturating_sub(j * m * valuation);
    // Dense part: B[j][col] = Σ_i c[j m + i] P_i[col], tiled over columns.
    let mut b: Vec<Vec<T>> = (0..blocks).map(|j| vec![T::zero(); need(j)]).collect();
    let mut col = 0;
    while col < n {
        let end = (col + TILE).min(n);
        for (j, bj) in b.iter_mut().enumerate() {
            let len = bj.len();
            if col >= len {
                continue;
            }
            let hi = end.min(len);
            let out = &mut bj[col..hi];
            for i in 0..m {
                let idx = j * m + i;
                if idx > k {
                    break;
                }
                let ci = c[idx];
                if ci == T::zero() {
                    continue;
                }
                let start = (i * valuation).max(col);
                if start >= hi {
                    continue;
                }
                let src = &powers[i][start..hi];
                for (o, &p) in out[start - col..].iter_mut().zip(src) {
                    *o = *o + ci * p;
                }
            }
        }
        col = end;
    }
    let giant = powers.pop().expect("m ≥ 1 powers");
    drop(powers);
    let mut acc = b.pop().expect("at least one block");
    for j in (0..b.len()).rev() {
        let len = b[j].len();
        let mut next = mul.multiply(&giant, &acc, len);
        for (x, &y) in next.iter_mut().zip(&b[j]) {
            *x = *x + y;
        }
        acc = next;
    }
    acc.resize(n, T::zero());
    acc
}

fn transform_route<T: Real>(
    mul: &mut Multiplier<T>,
    c: &[T],
    s: &[T],
    n: usize,
    pad_factor: usize,
) -> Vec<T> {
    let size = (pad_factor.max(2) * n).next_power_of_two();
    let spectrum = mul.forward_padded(s, size);
    let out: Vec<Complex<T>> = spectrum
        .iter()
        .map(|&z| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for &ck in c.iter().rev() {
                acc = acc * z + Complex::new(ck, T::zero());
            }
            acc
        })
        .collect();
    mul.inverse_padded(out, size, n)
}

/// Reference: `Σ_k c_k s^{*k}` by repeated schoolbook convolution.
pub fn compound_naive<T: Real>(count: &Pmf<T>, summand: &Pmf<T>) -> Result<Pmf<T>> {
    check_cutoffs(count, summand)?;
    let n = count.cutoff() + 1;
    let mut out = vec![T::zero(); n];
    let mut power = vec![T::zero(); n];
    power[0] = T::one();
    for (k, &ck) in count.masses().iter().enumerate() {
        if k > 0 {
            power = multiply_direct(&power, summand.masses(), n);
        }
        for (o, &p) in out.iter_mut().zip(&power) {
            *o = *o + ck * p;
        }
    }
    Pmf::from_window(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regvar::Law;

    fn pmf(m: &[f64], cutoff: usize) -> Pmf<f64> {
        let mut v = m.to_vec();
        v.resize(cutoff + 1, 0.0);
        Pmf::from_window(v).unwrap()
    }

    fn assert_close(a: &Pmf<f64>, b: &Pmf<f64>, tol: f64) {
        let d = a.linf_distance(b).unwrap();
        assert!(d <= tol, "L∞ distance {d:e}");
        assert!((a.tail_mass() - b.tail_mass()).abs() <= tol * 10.0);
    }

    #[test]
    fn convolve_examples() {
        let a = pmf(&[0.5, 0.5], 8);
        let r = convolve(&a, &a).unwrap();
        assert_eq!(&r.masses()[..3], &[0.25, 0.5, 0.25]);
        assert_eq!(convolve(&a, &Pmf::point(0, 8)).unwrap(), a);
        let b = pmf(&[0.6, 0.0, 0.4], 8);
        let r = convolve(&b, &b).unwrap();
        assert!((r.mass(0) - 0.36).abs() < 1e-15);
        assert!((r.mass(2) - 0.48).abs() < 1e-15);
        assert!((r.mass(4) - 0.16).abs() < 1e-15);
        assert!(convolve(&a, &Pmf::point(0, 4)).is_err());
    }

    #[test]
    fn convolve_routes_overflow_to_tail() {
        let a: Pmf<f64> = Pmf::from_parts(vec![0.25, 0.25, 0.25], 0.25).unwrap();
        let r = convolve(&a, &a).unwrap();
        assert!((r.total() - 1.0).abs() < 1e-15);
        // P(sum ≤ 2 with both in window) = 0.0625·6
        assert!((r.tail_mass() - (1.0 - 6.0 * 0.0625)).abs() < 1e-15);
    }

    #[test]
    fn compound_examples() {
        let count = pmf(&[0.5, 0.5], 8);
        let summand = pmf(&[0.6, 0.0, 0.4], 8);
        let r = compound(&count, &summand).unwrap();
        assert!((r.mass(0) - 0.8).abs() < 1e-15 && (r.mass(2) - 0.2).abs() < 1e-15);
        assert_eq!(compound(&Pmf::point(1, 8), &summand).unwrap(), summand);
        let half = pmf(&[0.5, 0.5], 8);
        let r = compound(&Pmf::point(3, 8), &half).unwrap();
        for (k, want) in [0.125, 0.375, 0.375, 0.125].iter().enumerate() {
            assert!((r.mass(k) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn compound_point_count_matches_convolution_power() {
        let s = Pmf::<f64>::from_law(&"pareto(kappa=1.5)".parse().unwrap(), 300);
        for k in 0..=8 {
            let via = compound(&Pmf::point(k, 300), &s).unwrap();
            let conv = convolve_power(&s, k).unwrap();
            assert_close(&via, &conv, 1e-12);
        }
    }

    #[test]
    fn all_routes_agree() {
        let cutoff = 400;
        let laws = ["zpareto(w=0.3,kappa=2)", "poisson(lambda=2)", "geom(q=0.4)", "finite(0:0.2,1:0.5,5:0.3)"];
        for count in laws {
            for summand in laws.iter().chain(["bernoulli(q=0.3)", "finite(1:0.5,2:0.5)"].iter()) {
                let c = Pmf::<f64>::from_law(&count.parse().unwrap(), cutoff);
                let s = Pmf::<f64>::from_law(&summand.parse().unwrap(), cutoff);
                let naive = compound_naive(&c, &s).unwrap();
                let auto = compound(&c, &s).unwrap();
                let bk = compound_with(&c, &s, CompoundMethod::Composition).unwrap();
                assert_close(&auto, &naive, 1e-13);
                assert_close(&bk, &naive, 1e-13);
            }
        }
    }

    #[test]
    fn divide_and_conquer_route_with_valuation() {
        let cutoff = 3000;
        let c = Pmf::<f64>::from_law(&"pareto(kappa=1.2)".parse().unwrap(), cutoff);
        let s = pmf(&[0.0, 0.5, 0.25, 0.125, 0.125], cutoff);
        let auto = compound(&c, &s).unwrap();
        let bk = compound_with(&c, &s, CompoundMethod::Composition).unwrap();
        assert_close(&auto, &bk, 1e-13);
        assert!((auto.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transform_route_exact_without_wrap() {
        let cutoff = 64;
        let c = pmf(&[0.1, 0.2, 0.3, 0.4], cutoff);
        let s = pmf(&[0.3, 0.3, 0.2, 0.2], cutoff);
        let t = compound_with(&c, &s, CompoundMethod::Transform { pad_factor: 2 }).unwrap();
        assert_close(&t, &compound_naive(&c, &s).unwrap(), 1e-14);
    }

    #[test]
    fn thinning_of_heavy_count() {
        let cutoff = 2000;
        let c = Pmf::<f64>::from_law(&Law::discrete_pareto(1.5).unwrap(), cutoff);
        let s = Pmf::<f64>::from_law(&Law::bernoulli(0.5).unwrap(), cutoff);
        let t = compound(&c, &s).unwrap();
        let bk = compound_with(&c, &s, CompoundMethod::Composition).unwrap();
        assert_close(&t, &bk, 1e-13);
    }

    #[test]
    fn works_in_f32() {
        let c = Pmf::<f32>::from_law(&"poisson(lambda=3)".parse().unwrap(), 200);
        let s = Pmf::<f32>::from_law(&"geom(q=0.5)".parse().unwrap(), 200);
        let r = compound(&c, &s).unwrap();
        let naive = compound_naive(&c, &s).unwrap();
        assert!(r.linf_distance(&naive).unwrap() < 1e-5);
    }
}
