use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::regvar::Law;
use crate::scalar::{compensated_sum, CompensatedSum, Real};

/// Masses below `-NEGATIVE_MASS_TOLERANCE` (scaled to the scalar precision)
/// are treated as bugs rather than round-off.
pub const NEGATIVE_MASS_TOLERANCE: f64 = 1e-14;

/// Probability mass vector on `{0, ..., N}` plus the mass `tail_mass` known
/// only to lie beyond the window.
///
/// Window masses are lower bounds on the true probabilities (exact whenever
/// no probability can re-enter the window from beyond it), so every
/// probability derived from a `Pmf` comes with a certified interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf<T> {
    masses: Vec<T>,
    tail_mass: T,
    mean_lower: T,
}

/// Certified bounds `[lo, hi]` on a probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn contains(&self, v: T) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }
}

fn mean_of<T: Real>(masses: &[T]) -> T {
    compensated_sum(
        masses
            .iter()
            .enumerate()
            .map(|(k, &m)| T::from_usize_lossy(k) * m),
    )
}

/// Clips round-off negatives in place; errors on larger negativity.
pub(crate) fn clip_negatives<T: Real>(masses: &mut [T]) -> Result<()> {
    let tol = T::scaled_tolerance(NEGATIVE_MASS_TOLERANCE);
    for (index, m) in masses.iter_mut().enumerate() {
        if *m < T::zero() {
            if *m < -tol || m.is_nan() {
                return Err(Error::NegativeMass {
                    index,
                    value: m.to_f64_lossy(),
                });
            }
            *m = T::zero();
        } else if m.is_nan() {
            return Err(Error::NegativeMass {
                index,
                value: f64::NAN,
            });
        }
    }
    Ok(())
}

impl<T: Real> Pmf<T> {
    /// Window masses plus an explicit tail mass. Round-off negatives are
    /// clipped; the total must be within `1e-10` of one.
    pub fn from_parts(mut masses: Vec<T>, tail_mass: T) -> Result<Self> {
        if masses.is_empty() {
            return Err(crate::error::domain("pmf needs at least one atom"));
        }
        clip_negatives(&mut masses)?;
        let tail_mass = tail_mass.max(T::zero());
        let total = compensated_sum(masses.iter().copied()) + tail_mass;
        if (total - T::one()).abs().to_f64_lossy() > 1e-10_f64.max(T::epsilon().to_f64_lossy() * 64.0) {
            return Err(crate::error::domain(format!(
                "pmf total mass {total} differs from 1"
            )));
        }
        Ok(Self::unchecked(masses, tail_mass))
    }

    /// Window masses with the tail mass set to whatever is missing from one.
    pub fn from_window(mut masses: Vec<T>) -> Result<Self> {
        if masses.is_empty() {
            return Err(crate::error::domain("pmf needs at least one atom"));
        }
        clip_negatives(&mut masses)?;
        let total = compensated_sum(masses.iter().copied());
        let tail = (T::one() - total).max(T::zero());
        Ok(Self::unchecked(masses, tail))
    }

    pub(crate) fn unchecked(masses: Vec<T>, tail_mass: T) -> Self {
        let mean_lower = mean_of(&masses);
        Self {
            masses,
            tail_mass,
            mean_lower,
        }
    }

    /// Point mass at `k`; all of it is tail mass when `k > cutoff`.
    pub fn point(k: usize, cutoff: usize) -> Self {
        let mut masses = vec![T::zero(); cutoff + 1];
        if k <= cutoff {
            masses[k] = T::one();
            Self::unchecked(masses, T::zero())
        } else {
            Self::unchecked(masses, T::one())
        }
    }

    /// Restriction of a law to `{0..=cutoff}`, with its exact tail.
    pub fn from_law(law: &Law, cutoff: usize) -> Self {
        let masses: Vec<T> = (0..=cutoff).map(|k| T::of(law.pmf(k as u64))).collect();
        let tail = law.tail(cutoff as f64).unwrap_or(0.0);
        Self::unchecked(masses, T::of(tail))
    }

    pub fn cutoff(&self) -> usize {
        self.masses.len() - 1
    }

    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    pub fn mass(&self, k: usize) -> T {
        self.masses.get(k).copied().unwrap_or(T::zero())
    }

    pub fn tail_mass(&self) -> T {
        self.tail_mass
    }

    /// `Σ_k k·p_k` over the window.
    pub fn mean_lower(&self) -> T {
        self.mean_lower
    }

    /// `Σ_k p_k + tail_mass`.
    pub fn total(&self) -> T {
        compensated_sum(self.masses.iter().copied()) + self.tail_mass
    }

    /// Index of the last nonzero window mass.
    pub fn last_nonzero(&self) -> Option<usize> {
        self.masses.iter().rposition(|&m| m != T::zero())
    }

    /// Index of the first nonzero window mass.
    pub fn first_nonzero(&self) -> Option<usize> {
        self.masses.iter().position(|&m| m != T::zero())
    }

    /// Bounds on `P(X > x)`: `[Σ_{x<k≤N} p_k, that + tail_mass]`.
    pub fn tail_of(&self, x: f64) -> Interval<T> {
        if x < 0.0 {
            let total = self.total();
            return Interval { lo: total, hi: total };
        }
        let f = x.floor();
        let start = if f >= self.cutoff() as f64 {
            self.masses.len()
        } else {
            f as usize + 1
        };
        let lo = compensated_sum(self.masses[start.min(self.masses.len())..].iter().copied());
        Interval {
            lo,
            hi: lo + self.tail_mass,
        }
    }

    /// Bounds on `P(X ≤ x)`: `[Σ_{k≤x} p_k, that + tail_mass]`.
    pub fn at_most(&self, x: f64) -> Interval<T> {
        if x < 0.0 {
            return Interval {
                lo: T::zero(),
                hi: T::zero(),
            };
        }
        let end = if x.floor() >= self.cutoff() as f64 {
            self.masses.len()
        } else {
            x.floor() as usize + 1
        };
        let lo = compensated_sum(self.masses[..end].iter().copied());
        // Tail mass is not located; some of it may belong below x.
        Interval {
            lo,
            hi: lo + self.tail_mass,
        }
    }

    /// `Σ_k k^h p_k` over the window.
    pub fn truncated_moment(&self, h: f64) -> T {
        let h = T::of(h);
        compensated_sum(
            self.masses
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &m)| T::from_usize_lossy(k).powf(h) * m),
        )
    }

    /// Total variation distance, counting tail masses as one extra atom.
    pub fn tv_distance(&self, other: &Self) -> Result<T> {
        if self.cutoff() != other.cutoff() {
            return Err(Error::CutoffMismatch {
                left: self.cutoff(),
                right: other.cutoff(),
            });
        }
        let mut acc = CompensatedSum::new();
        for (a, b) in self.masses.iter().zip(&other.masses) {
            acc.add((*a - *b).abs());
        }
        acc.add((self.tail_mass - other.tail_mass).abs());
        Ok(acc.value() * T::of(0.5))
    }

    /// Largest absolute difference between window masses.
    pub fn linf_distance(&self, other: &Self) -> Result<T> {
        if self.cutoff() != other.cutoff() {
            return Err(Error::CutoffMismatch {
                left: self.cutoff(),
                right: other.cutoff(),
            });
        }
        Ok(self
            .masses
            .iter()
            .zip(&other.masses)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max))
    }

    /// Law of `X + k`; mass pushed past the window joins the tail.
    pub fn shift(&self, k: usize) -> Self {
        let n = self.masses.len();
        if k == 0 {
            return self.clone();
        }
        let mut masses = vec![T::zero(); n];
        let keep = n.saturating_sub(k);
        masses[k.min(n)..].copy_from_slice(&self.masses[..keep]);
        let spilled = compensated_sum(self.masses[keep..].iter().copied());
        Self::unchecked(masses, self.tail_mass + spilled)
    }

    /// Same law on a different window: extending pads with zeros (the tail
    /// stays unresolved), shrinking moves mass into the tail.
    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        let n = cutoff + 1;
        if n >= self.masses.len() {
            let mut masses = self.masses.clone();
            masses.resize(n, T::zero());
            Self::unchecked(masses, self.tail_mass)
        } else {
            let spilled = compensated_sum(self.masses[n..].iter().copied());
            Self::unchecked(self.masses[..n].to_vec(), self.tail_mass + spilled)
        }
    }

    /// CSV with header `k,mass`, one row per window index and a trailing
    /// `# tail_mass=<v>` line; numbers use shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.masses.len() * 24 + 32);
        out.push_str("k,mass\n");
        for (k, m) in self.masses.iter().enumerate() {
            let _ = writeln!(out, "{k},{m}");
        }
        let _ = writeln!(out, "# tail_mass={}", self.tail_mass);
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::PmfCsv { line, message };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "k,mass" => {}
            _ => return Err(err(1, "expected header `k,mass`".into())),
        }
        let mut masses = Vec::new();
        let mut tail = None;
        for (i, line) in lines {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let value = rest
                    .trim()
                    .strip_prefix("tail_mass=")
                    .ok_or_else(|| err(line_no, "expected `# tail_mass=<value>`".into()))?;
                tail = Some(
                    value
                        .parse::<T>()
                        .map_err(|_| err(line_no, format!("bad tail mass `{value}`")))?,
                );
                continue;
            }
            if tail.is_some() {
                return Err(err(line_no, "data after the tail_mass line".into()));
            }
            let (k, m) = line
                .split_once(',')
                .ok_or_else(|| err(line_no, "expected `k,mass`".into()))?;
            let k: usize = k
                .trim()
                .parse()
                .map_err(|_| err(line_no, format!("bad index `{k}`")))?;
            if k != masses.len() {
                return Err(err(line_no, format!("index {k} out of sequence")));
            }
            let m = m
                .trim()
                .parse::<T>()
                .map_err(|_| err(line_no, format!("bad mass `{m}`")))?;
            masses.push(m);
        }
        let tail = tail.ok_or_else(|| err(text.lines().count(), "missing tail_mass line".into()))?;
        if masses.is_empty() {
            return Err(err(2, "no masses".into()));
        }
        Ok(Self::unchecked(masses, tail))
    }
}
