//! Small statistics helpers for Monte Carlo checks.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Two-sided p-value of a standard normal score.
pub fn normal_two_sided(z: f64) -> f64 {
    libm::erfc(z.abs() / core::f64::consts::SQRT_2)
}

/// Kolmogorov–Smirnov statistic of `x` against the standard normal law.
pub fn ks_normal_statistic(x: &[f64]) -> f64 {
    let mut s: Vec<f64> = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let n = s.len() as f64;
    s.iter().enumerate().fold(0.0, |d, (i, &v)| {
        let f = normal_cdf(v);
        d.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f)
    })
}

/// Asymptotic Kolmogorov p-value with the Stephens small-sample correction.
pub fn ks_normal_pvalue(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let d = ks_normal_statistic(x);
    let l = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..200 {
        let k = k as f64;
        let term = 2.0 * (-2.0 * k * k * l * l).exp();
        p += if k as i64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// Score for a binomial proportion: `(p̂ − p0)/√(p0(1−p0)/n)`.
pub fn binomial_score(successes: u64, n: u64, p0: f64) -> f64 {
    let p = successes as f64 / n as f64;
    let se = (p0 * (1.0 - p0) / n as f64).sqrt();
    if se == 0.0 {
        if p == p0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (p - p0) / se
    }
}

/// Pooled two-proportion z statistic.
pub fn two_proportion_z(k1: u64, n1: u64, k2: u64, n2: u64) -> f64 {
    let (p1, p2) = (k1 as f64 / n1 as f64, k2 as f64 / n2 as f64);
    let p = (k1 + k2) as f64 / (n1 + n2) as f64;
    let se = (p * (1.0 - p) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    if se == 0.0 {
        0.0
    } else {
        (p1 - p2) / se
    }
}
