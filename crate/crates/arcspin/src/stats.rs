//! Small statistical helpers shared by the verification experiments and the
//! test suites.

use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standard error of the sample mean.
pub fn stderr_of_mean(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Least-squares slope of `ys` against `xs`.
pub fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mx = mean(xs);
    let my = mean(ys);
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Wrap an angle difference into `(-pi, pi]`.
pub fn wrap_to_pi(delta: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut d = delta.rem_euclid(tau);
    if d > std::f64::consts::PI {
        d -= tau;
    }
    d
}

/// One-sample Kolmogorov–Smirnov statistic of sorted samples against a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let c = cdf(x);
        d = d.max((c - i as f64 / n).abs());
        d = d.max(((i as f64 + 1.0) / n - c).abs());
    }
    d
}

/// Asymptotic 1% critical value for the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    // c(alpha) = sqrt(-ln(alpha/2)/2), c(0.01) = 1.62762
    1.6276236115189503 / (n as f64).sqrt()
}

/// Two-sample chi-square statistic over matched histogram bins (equal sample
/// sizes); returns the statistic and the degrees of freedom.
pub fn two_sample_chi2(a: &[usize], b: &[usize]) -> (f64, usize) {
    assert_eq!(a.len(), b.len());
    let mut stat = 0.0;
    let mut used = 0usize;
    for (&na, &nb) in a.iter().zip(b) {
        let tot = (na + nb) as f64;
        if tot == 0.0 {
            continue;
        }
        let diff = na as f64 - nb as f64;
        stat += diff * diff / tot;
        used += 1;
    }
    (stat, used.saturating_sub(1))
}

/// Upper quantile of the chi-square distribution.
pub fn chi2_critical(df: usize, level: f64) -> f64 {
    ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(level)
}

/// Poisson probability mass function, computed iteratively.
pub fn poisson_pmf(k: usize, lambda: f64) -> f64 {
    let mut p = (-lambda).exp();
    for i in 1..=k {
        p *= lambda / i as f64;
    }
    p
}

/// Chi-square goodness-of-fit of observed counts against Poisson cell
/// probabilities; low-expectation tail cells should be merged by the caller.
pub fn chi2_gof(observed: &[f64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&o, &e)| (o - e) * (o - e) / e)
        .sum()
}
