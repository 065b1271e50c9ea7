//! Series evaluation helpers for heavy-tailed laws: Riemann zeta, and sums of
//! slowly decaying terms with an integral remainder.

use crate::scalar::CompensatedSum;

/// Riemann zeta function for real `s > 1` by Euler–Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta requires s > 1");
    const N: usize = 16;
    // B_2j / (2j)!
    const BERNOULLI_OVER_FACTORIAL: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
        1.0 / 74724249600.0,
    ];
    let n = N as f64;
    let mut acc = CompensatedSum::new();
    for k in 1..N {
        acc.add((k as f64).powf(-s));
    }
    acc.add(n.powf(1.0 - s) / (s - 1.0));
    acc.add(0.5 * n.powf(-s));
    // Rising product s(s+1)...(s+2j-2) times N^{-s-2j+1}.
    let mut rising = s;
    let mut power = n.powf(-s - 1.0);
    for (j, coeff) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        acc.add(coeff * rising * power);
        let a = s + (2 * j + 1) as f64;
        rising *= a * (a + 1.0);
        power /= n * n;
    }
    acc.value()
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Integral of `f` over `[a, b]` with a composite Gauss–Legendre rule.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(16);
    let h = (b - a) / panels as f64;
    let mut acc = CompensatedSum::new();
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (x, w) in nodes.iter().zip(&weights) {
            acc.add(0.5 * h * w * f(mid + 0.5 * h * x));
        }
    }
    acc.value()
}

/// Approximates `∫_{y0}^{∞} f(y) dy` for a positive, eventually power-law
/// decaying `f`, integrating in `t = ln y` until the panel contributions
/// become negligible or `t` reaches 700.
///
/// Returns the integral and the last `t` reached, so callers can attach an
/// analytic remainder for very slow decay.
pub fn log_scale_tail_integral(f: impl Fn(f64) -> f64, y0: f64) -> (f64, f64) {
    let g = |t: f64| {
        let y = t.exp();
        f(y) * y
    };
    let mut t = y0.ln();
    let mut total = 0.0;
    let mut quiet_panels = 0;
    while t < 700.0 {
        let step = 1.0f64.min(700.0 - t);
        let part = integrate(&g, t, t + step, 1);
        total += part;
        t += step;
        if part <= 1e-18 * total.abs() {
            quiet_panels += 1;
            if quiet_panels >= 3 {
                break;
            }
        } else {
            quiet_panels = 0;
        }
    }
    (total, t)
}

/// `Σ_{k=first}^{∞} f(k)` for a smooth, eventually power-law decaying `f`:
/// direct compensated summation up to `last`, then a midpoint-corrected
/// integral `∫_{last+1/2}^{∞} f` for the remainder.
///
/// `remainder_beyond` is called with the `t = ln y` at which numerical
/// integration stopped and returns the analytic remainder from there on.
pub fn heavy_series(
    f: impl Fn(f64) -> f64,
    first: u64,
    last: u64,
    remainder_beyond: impl Fn(f64) -> f64,
) -> f64 {
    let mut acc = CompensatedSum::new();
    for k in first..=last {
        acc.add(f(k as f64));
    }
    let (integral, t_end) = log_scale_tail_integral(&f, last as f64 + 0.5);
    acc.add(integral);
    if t_end >= 700.0 {
        acc.add(remainder_beyond(t_end));
    }
    acc.value()
}
