//! Exact truncated laws of the process quantities.

use super::fft::Multiplier;
use super::kernel::{compound, convolve_with};
use super::pmf::{Interval, Pmf};
use crate::error::{Error, Result};
use crate::regvar::{Law, ModelParams};
use crate::scalar::Real;

/// Default total-variation tolerance for fixed-point iterations.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Iteration bound for fixed-point iterations.
pub const MAX_ITERATIONS: usize = 10_000;

/// Iterates `step` from `start` until successive iterates are within `tol`
/// in total variation.
///
/// With `leaky`, a step compounds with a summand that has mass at zero, so
/// mass routed past the cutoff never returns: every step moves a little more
/// into the tail and the distance levels off near that leak. The growth of
/// the tail mass is then discounted from the distance.
fn iterate_to_fixed_point<T: Real>(
    start: Pmf<T>,
    tol: f64,
    leaky: bool,
    mut step: impl FnMut(&Pmf<T>) -> Result<Pmf<T>>,
) -> Result<Pmf<T>> {
    let mut current = start;
    let mut last_tv = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let next = step(&current)?;
        let tv = next.tv_distance(&current)?.to_f64_lossy();
        let leak = if leaky {
            (next.tail_mass() - current.tail_mass()).to_f64_lossy().max(0.0)
        } else {
            0.0
        };
        if tv - leak < tol {
            return Ok(next);
        }
        last_tv = tv;
        current = next;
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
        last_tv,
        tol,
    })
}

/// Law of `Z_n` for a Galton–Watson process with `Z_0 = 1`.
pub fn pmf_zn<T: Real>(offspring: &Law, n: usize, cutoff: usize) -> Result<Pmf<T>> {
    let xi = Pmf::from_law(offspring, cutoff);
    let mut z = Pmf::point(1, cutoff);
    for _ in 0..n {
        // Z_j = Σ_{i=1}^{ξ} Z_{j-1}^{(i)}
        z = compound(&xi, &z)?;
    }
    Ok(z)
}

/// `T_{j+1} = 1 + Σ_{i=1}^{ξ} T_j^{(i)}`.
fn next_tn<T: Real>(xi: &Pmf<T>, t: &Pmf<T>) -> Result<Pmf<T>> {
    Ok(compound(xi, t)?.shift(1))
}

/// Laws of `T_0, ..., T_n` where `T_n = 1 + Z_1 + ... + Z_n`.
pub fn pmf_tn_sequence<T: Real>(offspring: &Law, n: usize, cutoff: usize) -> Result<Vec<Pmf<T>>> {
    let xi = Pmf::from_law(offspring, cutoff);
    let mut out = Vec::with_capacity(n + 1);
    out.push(Pmf::point(1, cutoff));
    for j in 0..n {
        let next = next_tn(&xi, &out[j])?;
        out.push(next);
    }
    Ok(out)
}

/// Law of `T_n = 1 + Z_1 + ... + Z_n`.
pub fn pmf_tn<T: Real>(offspring: &Law, n: usize, cutoff: usize) -> Result<Pmf<T>> {
    let xi = Pmf::from_law(offspring, cutoff);
    let mut t = Pmf::point(1, cutoff);
    for _ in 0..n {
        t = next_tn(&xi, &t)?;
    }
    Ok(t)
}

/// Law of the total progeny `T`, iterating `T_n` to total-variation `tol`.
pub fn pmf_t<T: Real>(offspring: &Law, cutoff: usize, tol: f64) -> Result<Pmf<T>> {
    let xi = Pmf::from_law(offspring, cutoff);
    iterate_to_fixed_point(Pmf::point(1, cutoff), tol, false, |t| next_tn(&xi, t))
}

/// Cached laws `Y^{(j)} = Σ_{m=1}^{η} T_j^{(m)}`, from which
/// `S_n = Y^{(0)} + ... + Y^{(n-1)}` (independent terms).
pub struct SnEngine<T: Real> {
    cutoff: usize,
    xi: Pmf<T>,
    eta: Pmf<T>,
    t_last: Pmf<T>,
    ys: Vec<Pmf<T>>,
}

impl<T: Real> SnEngine<T> {
    pub fn new(params: &ModelParams, cutoff: usize) -> Self {
        Self::from_laws(params.offspring(), params.immigration(), cutoff)
    }

    /// Engine for an arbitrary offspring/immigration pair, without the
    /// subcriticality checks of [`ModelParams`].
    pub fn from_laws(offspring: &Law, immigration: &Law, cutoff: usize) -> Self {
        Self {
            cutoff,
            xi: Pmf::from_law(offspring, cutoff),
            eta: Pmf::from_law(immigration, cutoff),
            t_last: Pmf::point(1, cutoff),
            ys: Vec::new(),
        }
    }

    fn ensure(&mut self, count: usize) -> Result<()> {
        while self.ys.len() < count {
            if !self.ys.is_empty() {
                self.t_last = next_tn(&self.xi, &self.t_last)?;
            }
            let y = compound(&self.eta, &self.t_last)?;
            self.ys.push(y);
        }
        Ok(())
    }

    /// Laws of `S_1, ..., S_{n_max}` as prefix convolutions.
    pub fn prefix(&mut self, n_max: usize) -> Result<Vec<Pmf<T>>> {
        self.ensure(n_max)?;
        let mut mul = Multiplier::new();
        let mut out: Vec<Pmf<T>> = Vec::with_capacity(n_max);
        let mut acc = Pmf::point(0, self.cutoff);
        for y in &self.ys[..n_max] {
            acc = convolve_with(&mut mul, &acc, y)?;
            out.push(acc.clone());
        }
        Ok(out)
    }

    pub fn sn(&mut self, n: usize) -> Result<Pmf<T>> {
        if n == 0 {
            return Err(crate::error::domain("S_n needs n ≥ 1"));
        }
        self.ensure(n)?;
        let mut mul = Multiplier::new();
        let mut acc = self.ys[0].clone();
        for y in &self.ys[1..n] {
            acc = convolve_with(&mut mul, &acc, y)?;
        }
        Ok(acc)
    }
}

/// Law of `S_n = X_1 + ... + X_n`.
pub fn pmf_sn<T: Real>(params: &ModelParams, n: usize, cutoff: usize) -> Result<Pmf<T>> {
    SnEngine::new(params, cutoff).sn(n)
}

/// Law of `S_{n,1}`: `n` independent copies of `Σ_{m=1}^{η} T^{(m)}`.
pub fn pmf_sn1<T: Real>(params: &ModelParams, n: usize, cutoff: usize, tol: f64) -> Result<Pmf<T>> {
    let t = pmf_t(params.offspring(), cutoff, tol)?;
    let eta = Pmf::from_law(params.immigration(), cutoff);
    let y = compound(&eta, &t)?;
    super::kernel::convolve_power(&y, n)
}

/// `X_j = θ ∘ X_{j-1} + η`.
fn next_x<T: Real>(mul: &mut Multiplier<T>, xi: &Pmf<T>, eta: &Pmf<T>, x: &Pmf<T>) -> Result<Pmf<T>> {
    convolve_with(mul, &compound(x, xi)?, eta)
}

/// Law of `X_n` from `X_0 = 0`.
pub fn pmf_xn<T: Real>(params: &ModelParams, n: usize, cutoff: usize) -> Result<Pmf<T>> {
    pmf_xn_laws(params.offspring(), params.immigration(), n, cutoff)
}

pub fn pmf_xn_laws<T: Real>(offspring: &Law, immigration: &Law, n: usize, cutoff: usize) -> Result<Pmf<T>> {
    let xi = Pmf::from_law(offspring, cutoff);
    let eta = Pmf::from_law(immigration, cutoff);
    let mut mul = Multiplier::new();
    let mut x = Pmf::point(0, cutoff);
    for _ in 0..n {
        x = next_x(&mut mul, &xi, &eta, &x)?;
    }
    Ok(x)
}

/// Stationary law of `X_n`, iterated to total-variation `tol`.
pub fn pmf_stationary<T: Real>(params: &ModelParams, cutoff: usize, tol: f64) -> Result<Pmf<T>> {
    pmf_stationary_laws(params.offspring(), params.immigration(), cutoff, tol)
}

pub fn pmf_stationary_laws<T: Real>(
    offspring: &Law,
    immigration: &Law,
    cutoff: usize,
    tol: f64,
) -> Result<Pmf<T>> {
    let xi = Pmf::from_law(offspring, cutoff);
    let eta = Pmf::from_law(immigration, cutoff);
    let mut mul = Multiplier::new();
    let leaky = xi.mass(0) > T::zero();
    iterate_to_fixed_point(Pmf::point(0, cutoff), tol, leaky, |x| next_x(&mut mul, &xi, &eta, x))
}

/// `Σ_{m=1}^{θ∘X} T^{(m)}` for a given law of `X`.
fn progeny_of_children<T: Real>(offspring: &Law, x: &Pmf<T>, cutoff: usize, tol: f64) -> Result<Pmf<T>> {
    let xi = Pmf::from_law(offspring, cutoff);
    let t = pmf_t(offspring, cutoff, tol)?;
    compound(&compound(x, &xi)?, &t)
}

/// Law of `S^{(∞)} = T^{(1)} + ... + T^{(θ∘X)}` with `X` stationary.
pub fn pmf_sn2_limit<T: Real>(params: &ModelParams, cutoff: usize, tol: f64) -> Result<Pmf<T>> {
    pmf_sn2_limit_laws(params.offspring(), params.immigration(), cutoff, tol)
}

pub fn pmf_sn2_limit_laws<T: Real>(
    offspring: &Law,
    immigration: &Law,
    cutoff: usize,
    tol: f64,
) -> Result<Pmf<T>> {
    let x = pmf_stationary_laws(offspring, immigration, cutoff, tol)?;
    progeny_of_children(offspring, &x, cutoff, tol)
}

/// Law of `S_{n,2} = T^{(1)} + ... + T^{(θ∘X_n)}`.
pub fn pmf_sn2<T: Real>(params: &ModelParams, n: usize, cutoff: usize, tol: f64) -> Result<Pmf<T>> {
    let x = pmf_xn(params, n, cutoff)?;
    progeny_of_children(params.offspring(), &x, cutoff, tol)
}

/// Centerings `d_{n,1} = E S_{n,1}` and `d_{n,2} = E S_{n,2}` (both 0 when
/// `κ ≤ 1`).
pub fn split_centerings(params: &ModelParams, n: usize) -> (f64, f64) {
    if params.kappa() <= 1.0 {
        return (0.0, 0.0);
    }
    let (a, b) = (params.alpha(), params.beta());
    let nf = n as f64;
    let d1 = nf * b / (1.0 - a);
    let d2 = b * a * (1.0 - a.powf(nf)) / ((1.0 - a) * (1.0 - a));
    (d1, d2)
}

/// The four probabilities bracketing `P(S_n − d_n > x)`:
/// `I1 − I3 ≤ P(S_n − d_n > x) ≤ I2 + I4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich<T> {
    pub i1: Interval<T>,
    pub i2: Interval<T>,
    pub i3: Interval<T>,
    pub i4: Interval<T>,
}

impl<T: Real> Sandwich<T> {
    /// Certified lower bound `I1.lo − I3.hi`.
    pub fn lower(&self) -> T {
        self.i1.lo - self.i3.hi
    }

    /// Certified upper bound `I2.hi + I4.hi`.
    pub fn upper(&self) -> T {
        self.i2.hi + self.i4.hi
    }
}

/// Evaluates the sandwich at `x` from the laws of `S_{n,1}` and `S_{n,2}`.
pub fn sandwich<T: Real>(
    sn1: &Pmf<T>,
    sn2: &Pmf<T>,
    centerings: (f64, f64),
    x: f64,
    eps: f64,
) -> Sandwich<T> {
    let (d1, d2) = centerings;
    Sandwich {
        i1: sn1.tail_of(d1 + (1.0 + eps) * x),
        i2: sn1.tail_of(d1 + (1.0 - eps) * x),
        i3: sn2.tail_of(d2 + eps * x),
        // P(−S_{n,2} + d_{n,2} > εx) = P(S_{n,2} < d_{n,2} − εx)
        i4: strictly_below(sn2, d2 - eps * x),
    }
}

/// Bounds on `P(X < y)`.
pub fn strictly_below<T: Real>(pmf: &Pmf<T>, y: f64) -> Interval<T> {
    if y <= 0.0 {
        return Interval {
            lo: T::zero(),
            hi: T::zero(),
        };
    }
    let c = y.ceil();
    // X < y  ⇔  X ≤ ceil(y) − 1
    pmf.at_most(c - 1.0)
}
