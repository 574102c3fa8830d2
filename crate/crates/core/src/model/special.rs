//! Log-pmfs and the special functions behind them.
//!
//! Counts can be large, so the Poisson term uses the saddle-point form
//! (Stirling error plus deviance) instead of `y ln(lambda) - lambda -
//! lnGamma(y+1)`, which cancels catastrophically for big `y`.

use std::f64::consts::PI;

/// `ln Gamma(x)` for `x > 0` (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection; only reached for 0 < x < 0.5 here.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    if x > 1e7 {
        // Stirling series, accurate to machine precision here.
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        return (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln()
            + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (k, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + k as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// `ln Gamma(a + k) - ln Gamma(a)`; exact products for small `k`.
pub fn ln_rising(a: f64, k: u64) -> f64 {
    if k <= 16 {
        let mut prod = 1.0;
        for j in 0..k {
            prod *= a + j as f64;
        }
        prod.ln()
    } else {
        ln_gamma(a + k as f64) - ln_gamma(a)
    }
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

pub fn ln_choose(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Stirling error `ln(n!) - ln(sqrt(2 pi n) (n/e)^n)`.
fn stirling_error(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        return ln_gamma(n + 1.0) - (n + 0.5) * n.ln() + n - 0.5 * (2.0 * PI).ln();
    }
    let nn = n * n;
    if n > 500.0 {
        return (S0 - S1 / nn) / n;
    }
    if n > 80.0 {
        return (S0 - (S1 - S2 / nn) / nn) / n;
    }
    if n > 35.0 {
        return (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n;
    }
    (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
}

/// Deviance term `x ln(x / m) + m - x`, computed without cancellation.
fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
    }
    x * (x / m).ln() + m - x
}

/// `ln Poisson(y | exp(log_rate))`.
pub fn ln_poisson(y: u64, log_rate: f64) -> f64 {
    let rate = log_rate.exp();
    if y == 0 {
        return -rate;
    }
    if !rate.is_finite() {
        return f64::NEG_INFINITY;
    }
    let x = y as f64;
    -stirling_error(x) - bd0(x, rate) - 0.5 * (2.0 * PI * x).ln()
}

/// Beta-binomial log-pmf without the binomial coefficient:
/// `ln B(k + a, n - k + b) - ln B(a, b)`.
///
/// The coefficient depends only on the counts, so callers that need ratios
/// over `(a, b)` can skip it.
pub fn ln_beta_binomial_kernel(k: u64, n: u64, a: f64, b: f64) -> f64 {
    debug_assert!(k <= n);
    ln_rising(a, k) + ln_rising(b, n - k) - ln_rising(a + b, n)
}

/// Full beta-binomial log-pmf.
pub fn ln_beta_binomial(k: u64, n: u64, a: f64, b: f64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_choose(n, k) + ln_beta_binomial_kernel(k, n, a, b)
}

/// Logistic function; `1 - expit(x)` is `expit(-x)`.
#[inline]
pub fn expit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn logit(p: f64) -> f64 {
    p.ln() - (-p).ln_1p()
}

/// `ln N(x | mean, var)`.
#[inline]
pub fn ln_normal(x: f64, mean: f64, var: f64) -> f64 {
    let r = x - mean;
    -0.5 * ((2.0 * PI * var).ln() + r * r / var)
}

/// `ln InvGamma(x | shape, scale)`.
pub fn ln_inverse_gamma(x: f64, shape: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    shape * scale.ln() - ln_gamma(shape) - (shape + 1.0) * x.ln() - scale / x
}

/// `ln Gamma(x | shape, rate)`.
pub fn ln_gamma_density(x: f64, shape: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}
