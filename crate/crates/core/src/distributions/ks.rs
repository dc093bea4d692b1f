//! One-sample Kolmogorov–Smirnov statistic.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    /// Asymptotic Kolmogorov p-value (a hint; the samples may be dependent
    /// on the model fit).
    pub p_value: f64,
    pub n: usize,
}

/// `sup |F_n − F|` for sorted samples and the model CDF at those samples.
pub fn ks_statistic(cdf_at_sorted: &[f64]) -> f64 {
    let n = cdf_at_sorted.len() as f64;
    cdf_at_sorted
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            (f - lo).max(hi - f)
        })
        .fold(0.0, f64::max)
}

/// `Q_KS(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}` with the Stephens correction
/// `λ = (√n + 0.12 + 0.11/√n) D`.
pub fn kolmogorov_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub fn ks_result(cdf_at_sorted: &[f64]) -> KsResult {
    let statistic = ks_statistic(cdf_at_sorted);
    KsResult { statistic, p_value: kolmogorov_p_value(statistic, cdf_at_sorted.len()), n: cdf_at_sorted.len() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_grid_is_half_step() {
        let n = 100;
        let f: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!((ks_statistic(&f) - 0.5 / n as f64).abs() < 1e-15);
    }

    #[test]
    fn p_value_reference_points() {
        // Q(1.36) ≈ 0.049, Q(1.0) ≈ 0.270
        let n = 1_000_000;
        let d = |l: f64| l / (n as f64).sqrt();
        assert!((kolmogorov_p_value(d(1.3581), n) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_p_value(d(1.0), n) - 0.27).abs() < 2e-3);
        assert_eq!(kolmogorov_p_value(0.0, 10), 1.0);
    }
}
