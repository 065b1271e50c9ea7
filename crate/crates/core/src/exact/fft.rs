//! Truncated polynomial products, direct or via real FFTs.

use std::sync::Arc;

use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::scalar::Real;

/// Products with `min(len) ≤ DIRECT_MIN` always use the schoolbook loop.
const DIRECT_MIN: usize = 48;

/// Polynomial multiplier with cached FFT plans.
pub struct Multiplier<T: Real> {
    planner: RealFftPlanner<T>,
}

/// Spectrum of a fixed factor, reusable across many products.
pub struct Spectrum<T: Real> {
    size: usize,
    len: usize,
    values: Vec<Complex<T>>,
}

fn trimmed<T: Real>(a: &[T]) -> &[T] {
    let end = a.iter().rposition(|&v| v != T::zero()).map_or(0, |i| i + 1);
    &a[..end]
}

/// `(a * b)` restricted to the first `len` coefficients, schoolbook.
pub fn multiply_direct<T: Real>(a: &[T], b: &[T], len: usize) -> Vec<T> {
    let mut out = vec![T::zero(); len];
    let (a, b) = (trimmed(a), trimmed(b));
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    for (i, &s) in short.iter().enumerate() {
        if i >= len {
            break;
        }
        if s == T::zero() {
            continue;
        }
        let end = long.len().min(len - i);
        for (o, &l) in out[i..i + end].iter_mut().zip(&long[..end]) {
            *o = *o + s * l;
        }
    }
    out
}

impl<T: Real> Default for Multiplier<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Multiplier<T> {
    pub fn new() -> Self {
        Self {
            planner: RealFftPlanner::new(),
        }
    }

    fn forward(&mut self, size: usize) -> Arc<dyn RealToComplex<T>> {
        self.planner.plan_fft_forward(size)
    }

    fn inverse(&mut self, size: usize) -> Arc<dyn ComplexToReal<T>> {
        self.planner.plan_fft_inverse(size)
    }

    fn transform(&mut self, a: &[T], size: usize) -> Vec<Complex<T>> {
        let plan = self.forward(size);
        let mut input = plan.make_input_vec();
        let n = a.len().min(size);
        input[..n].copy_from_slice(&a[..n]);
        let mut output = plan.make_output_vec();
        plan.process(&mut input, &mut output)
            .expect("buffer sizes come from the plan");
        output
    }

    fn inverse_into(&mut self, mut spectrum: Vec<Complex<T>>, size: usize, len: usize) -> Vec<T> {
        let plan = self.inverse(size);
        let mut output = plan.make_output_vec();
        // Real signals have real DC and Nyquist bins; drop round-off there.
        spectrum[0].im = T::zero();
        if let Some(last) = spectrum.last_mut() {
            last.im = T::zero();
        }
        plan.process(&mut spectrum, &mut output)
            .expect("buffer sizes come from the plan");
        let scale = T::one() / T::from_usize_lossy(size);
        output.truncate(len);
        for v in output.iter_mut() {
            *v = *v * scale;
        }
        output.resize(len, T::zero());
        output
    }

    /// `(a * b)` restricted to the first `len` coefficients.
    pub fn multiply(&mut self, a: &[T], b: &[T], len: usize) -> Vec<T> {
        let (a, b) = (trimmed(a), trimmed(b));
        if a.is_empty() || b.is_empty() || len == 0 {
            return vec![T::zero(); len];
        }
        let a = &a[..a.len().min(len)];
        let b = &b[..b.len().min(len)];
        let full = a.len() + b.len() - 1;
        let out_len = full.min(len);
        let size = full.next_power_of_two().max(2);
        let direct_cost = (a.len().min(b.len()) as f64) * (out_len as f64);
        let fft_cost = 6.0 * size as f64 * (size as f64).log2();
        if a.len().min(b.len()) <= DIRECT_MIN || direct_cost <= fft_cost {
            let mut out = multiply_direct(a, b, out_len);
            out.resize(len, T::zero());
            return out;
        }
        let fa = self.transform(a, size);
        let fb = self.transform(b, size);
        let prod: Vec<Complex<T>> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
        let mut out = self.inverse_into(prod, size, out_len);
        out.resize(len, T::zero());
        out
    }

    /// Precomputes the spectrum of `a` for products whose other factor has
    /// at most `other_len` coefficients.
    pub fn spectrum(&mut self, a: &[T], other_len: usize) -> Spectrum<T> {
        let a = trimmed(a);
        let size = (a.len() + other_len).max(2).next_power_of_two();
        Spectrum {
            size,
            len: a.len(),
            values: self.transform(a, size),
        }
    }

    /// `(a * b)` restricted to `len` coefficients, `a` given by its spectrum.
    pub fn multiply_spectrum(&mut self, a: &Spectrum<T>, b: &[T], len: usize) -> Vec<T> {
        let b = trimmed(b);
        if b.is_empty() || a.len == 0 {
            return vec![T::zero(); len];
        }
        assert!(a.len + b.len() <= a.size + 1, "spectrum too short for operand");
        let fb = self.transform(b, a.size);
        let prod: Vec<Complex<T>> = a.values.iter().zip(&fb).map(|(x, y)| x * y).collect();
        let out_len = (a.len + b.len() - 1).min(len);
        let mut out = self.inverse_into(prod, a.size, out_len);
        out.resize(len, T::zero());
        out
    }

    /// Forward transform of `a` zero-padded to `size` (a power of two).
    pub fn forward_padded(&mut self, a: &[T], size: usize) -> Vec<Complex<T>> {
        self.transform(a, size)
    }

    /// Inverse transform returning the first `len` real coefficients.
    pub fn inverse_padded(&mut self, spectrum: Vec<Complex<T>>, size: usize, len: usize) -> Vec<T> {
        self.inverse_into(spectrum, size, len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_matches_direct() {
        let a: Vec<f64> = (0..300).map(|i| ((i * 37 % 101) as f64) / 101.0).collect();
        let b: Vec<f64> = (0..257).map(|i| ((i * 53 % 89) as f64) / 89.0).collect();
        let mut m = Multiplier::new();
        for len in [1, 100, 556, 700] {
            let fast = m.multiply(&a, &b, len);
            let slow = multiply_direct(&a, &b, len);
            assert_eq!(fast.len(), len);
            for (x, y) in fast.iter().zip(&slow) {
                assert!((x - y).abs() < 1e-10, "{x} vs {y}");
            }
        }
        let spec = m.spectrum(&a, 257);
        let via = m.multiply_spectrum(&spec, &b, 556);
        for (x, y) in via.iter().zip(&multiply_direct(&a, &b, 556)) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn handles_zero_operands() {
        let mut m = Multiplier::<f32>::new();
        assert_eq!(m.multiply(&[0.0, 0.0], &[1.0], 3), vec![0.0; 3]);
        assert_eq!(m.multiply(&[1.0, 2.0], &[3.0], 3), vec![3.0, 6.0, 0.0]);
    }
}
