//! Gamma function, generalized Laguerre polynomials and modified Bessel
//! functions of the first kind.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
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

/// `ln |Γ(x)|` (Lanczos, g = 7, with reflection below 1/2).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1−x) = π / sin(πx)
        return (PI / (PI * x).sin().abs()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// `Γ(x)`.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Generalized Laguerre polynomial `L_n^{(α)}(x)` by the three-term
/// recurrence `(k+1) L_{k+1} = (2k+1+α−x) L_k − (k+α) L_{k−1}`.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `L_0^{(α)}(x), ..., L_{n_max}^{(α)}(x)`.
pub fn laguerre_all(n_max: usize, alpha: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max == 0 {
        return out;
    }
    out.push(1.0 + alpha - x);
    for k in 1..n_max {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// `d/dx L_n^{(α)} = −L_{n−1}^{(α+1)}`.
pub fn laguerre_derivative(n: usize, alpha: f64, x: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        -laguerre(n - 1, alpha + 1.0, x)
    }
}

/// `d²/dx² L_n^{(α)} = L_{n−2}^{(α+2)}`.
pub fn laguerre_second_derivative(n: usize, alpha: f64, x: f64) -> f64 {
    if n < 2 {
        0.0
    } else {
        laguerre(n - 2, alpha + 2.0, x)
    }
}

/// `ln I_ν(x)` for `x > 0`, `ν > −1`, from the power series
/// `Σ_m (x/2)^{2m+ν} / (m! Γ(m+ν+1))` summed relative to its largest term.
/// All terms are positive, so there is no cancellation at large `x`.
pub fn ln_bessel_i(nu: f64, x: f64) -> f64 {
    debug_assert!(x > 0.0 && nu > -1.0);
    let lh = (0.5 * x).ln();
    // Peak of the terms: m² + νm ≈ x²/4.
    let m_peak = (0.5 * (-nu + (nu * nu + x * x).sqrt())).max(0.0).floor();
    let t_peak = (2.0 * m_peak + nu) * lh - ln_gamma(m_peak + 1.0) - ln_gamma(m_peak + nu + 1.0);
    let mut sum = 1.0;
    // Upward from the peak.
    let mut t = t_peak;
    let mut m = m_peak;
    loop {
        t += 2.0 * lh - (m + 1.0).ln() - (m + nu + 1.0).ln();
        m += 1.0;
        let term = (t - t_peak).exp();
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    // Downward from the peak.
    let mut t = t_peak;
    let mut m = m_peak;
    while m > 0.0 {
        t -= 2.0 * lh - m.ln() - (m + nu).ln();
        m -= 1.0;
        let term = (t - t_peak).exp();
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    t_peak + sum.ln()
}

/// `I_ν(x)`; returns `+∞` on overflow.
pub fn bessel_i(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    ln_bessel_i(nu, x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn gamma_at_integers_and_half_integers() {
        for n in 0..30u32 {
            let f = factorial(n);
            assert!((gamma(n as f64 + 1.0) / f - 1.0).abs() < 1e-12, "n={n}");
            assert!((ln_gamma(n as f64 + 1.0) - f.ln()).abs() < 1e-12 * f.ln().abs().max(1.0));
            // Γ(n+½) = (2n)! √π / (4ⁿ n!)
            let half = factorial(2 * n) * PI.sqrt() / (4f64.powi(n as i32) * f);
            assert!((gamma(n as f64 + 0.5) / half - 1.0).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn ln_gamma_large_arguments() {
        // Stirling with three correction terms is accurate to ~1e-16 at x = 80.
        let x: f64 = 80.0;
        let stirling = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3)) + 1.0 / (1260.0 * x.powi(5));
        assert!((ln_gamma(x) - stirling).abs() < 1e-12 * stirling);
    }

    fn binom(a: f64, k: usize) -> f64 {
        // Generalised binomial C(a, k).
        (0..k).fold(1.0, |acc, i| acc * (a - i as f64) / (i as f64 + 1.0))
    }

    #[test]
    fn laguerre_matches_explicit_sum() {
        for &alpha in &[0.0, 0.5, 1.0, 2.0, -0.5] {
            for n in 0..12 {
                for &x in &[0.0f64, 0.3, 1.7, 5.0, 11.0] {
                    // L_n^{(α)}(x) = Σ_i (−1)^i C(n+α, n−i) x^i / i!
                    let explicit: f64 = (0..=n)
                        .map(|i| (-1f64).powi(i as i32) * binom(n as f64 + alpha, n - i) * x.powi(i as i32) / factorial(i as u32))
                        .sum();
                    let got = laguerre(n, alpha, x);
                    assert!((got - explicit).abs() < 1e-10 * explicit.abs().max(1.0), "n={n} a={alpha} x={x}");
                    assert_eq!(laguerre_all(n, alpha, x)[n], got);
                }
            }
        }
        assert_eq!(laguerre(0, 0.0, 3.3), 1.0);
        assert_eq!(laguerre(1, 0.0, 3.3), 1.0 - 3.3);
    }

    #[test]
    fn laguerre_derivatives_match_finite_differences() {
        let h = 1e-5;
        for n in 0..8 {
            for &x in &[0.4, 2.0, 6.0] {
                let fd = (laguerre(n, 0.5, x + h) - laguerre(n, 0.5, x - h)) / (2.0 * h);
                assert!((fd - laguerre_derivative(n, 0.5, x)).abs() < 1e-6);
                let fd2 = (laguerre(n, 1.0, x + h) - 2.0 * laguerre(n, 1.0, x) + laguerre(n, 1.0, x - h)) / (h * h);
                assert!((fd2 - laguerre_second_derivative(n, 1.0, x)).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn bessel_half_orders_closed_form() {
        for &x in &[1e-3, 0.1, 1.0, 7.5, 40.0, 300.0] {
            let pre = (2.0 / (PI * x)).sqrt();
            let i_half = pre * x.sinh();
            let i_mhalf = pre * x.cosh();
            assert!((bessel_i(0.5, x) / i_half - 1.0).abs() < 1e-12, "x={x}");
            assert!((bessel_i(-0.5, x) / i_mhalf - 1.0).abs() < 1e-12, "x={x}");
        }
        // Beyond overflow, compare logarithms.
        let x: f64 = 2000.0;
        let ln_i_half = 0.5 * (2.0 / (PI * x)).ln() + x + (-(-2.0 * x).exp_m1()).ln() - 2f64.ln();
        assert!((ln_bessel_i(0.5, x) - ln_i_half).abs() < 1e-12 * x);
    }

    #[test]
    fn bessel_integer_reference_values() {
        let rel = |a: f64, b: f64| (a / b - 1.0).abs();
        assert!(rel(bessel_i(0.0, 1.0), 1.266_065_877_752_008_4) < 1e-14);
        assert!(rel(bessel_i(1.0, 1.0), 0.565_159_103_992_485_0) < 1e-14);
        assert!(rel(bessel_i(2.0, 10.0), 2_281.518_967_726_004) < 1e-14);
        assert_eq!(bessel_i(0.0, 0.0), 1.0);
        assert_eq!(bessel_i(3.0, 0.0), 0.0);
    }

    #[test]
    fn bessel_recurrence() {
        // I_{ν−1}(x) − I_{ν+1}(x) = (2ν/x) I_ν(x)
        for &nu in &[1.0, 2.5, 7.0] {
            for &x in &[0.5, 3.0, 25.0] {
                let lhs = bessel_i(nu - 1.0, x) - bessel_i(nu + 1.0, x);
                let rhs = 2.0 * nu / x * bessel_i(nu, x);
                assert!((lhs / rhs - 1.0).abs() < 1e-12);
            }
        }
    }
}
