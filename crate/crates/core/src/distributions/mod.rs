//! Analytic state densities on the deterministic manifolds.
//!
//! Each density is written in its own clock `τ`; simulation time maps to it
//! through a calibrated factor, `τ = κ · t_sim` (see [`calibration`]).
//!
//! - wrapped Gaussian in the azimuth θ (heterodyne `σ_z`),
//! - two-Gaussian mixture in `w = atanh z` (either `σ_z` setup),
//! - Laguerre series in φ (heterodyne `σ_-`), its latitude form for a start
//!   at the excited state, and the α = ½ series in χ (homodyne `σ_-`).
//!
//! The Laguerre series are also available resummed in closed form through
//! the Hille–Hardy formula
//!
//! ```text
//! Σ_n n!/Γ(n+α+1) L_n^{(α)}(x) L_n^{(α)}(y) wⁿ
//!     = (1−w)^{−1} e^{−(x+y)w/(1−w)} (xyw)^{−α/2} I_α(2√(xyw)/(1−w)),
//! ```
//!
//! which stays accurate where the truncated series cancels catastrophically
//! (large argument, small τ).

pub mod calibration;
mod closed_form;
pub mod ks;

pub use closed_form::{compare_mc, compare_samples, coordinate_samples, ClosedFormDistribution, DistributionCase, DistributionParams};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_to_infinity, QuadOptions};
use crate::special::{gamma, laguerre_all, ln_bessel_i, ln_gamma};

pub const DEFAULT_N_MAX: usize = 60;
pub const DEFAULT_K_MAX: usize = 20;
/// Relative size of the last retained series coefficient that triggers a
/// truncation error.
pub const TAIL_RATIO: f64 = 1e-12;
/// Largest tolerated pointwise error estimate on a normalized series density:
/// rounding `ε·Σ|terms|` plus the size of the last retained terms. Both grow
/// with the argument, where `L_n(x)` is large and the terms cancel.
pub const SERIES_TOL: f64 = 1e-10;

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("formula time must be positive, got {tau}")))
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::Efficiency(eta))
    }
}

/// Wrapped Gaussian `(2πητ)^{−½} Σ_{|k|≤k_max} e^{−(θ−θ₀+2πk)²/(2ητ)}`.
pub fn pdf_heh_theta(theta: f64, tau: f64, theta0: f64, eta: f64, k_max: usize) -> Result<f64> {
    check_tau(tau)?;
    check_eta(eta)?;
    if k_max < 1 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let var = eta * tau;
    let d = (theta - theta0).rem_euclid(2.0 * PI);
    let d = if d >= PI { d - 2.0 * PI } else { d };
    let k = k_max as i64;
    let s: f64 = (-k..=k)
        .map(|j| {
            let u = d + 2.0 * PI * j as f64;
            (-u * u / (2.0 * var)).exp()
        })
        .sum();
    Ok(s / (2.0 * PI * var).sqrt())
}

/// Mixture of two Gaussians of variance `ητ` drifting apart at rate `η`,
/// weighted `e^{±w₀}/(2 cosh w₀)`.
pub fn pdf_heh_w(w: f64, tau: f64, w0: f64, eta: f64) -> Result<f64> {
    check_tau(tau)?;
    check_eta(eta)?;
    let var = eta * tau;
    let up = w - w0 - var;
    let dn = w - w0 + var;
    // e^{±w₀}/(2cosh w₀) = 1/(1 + e^{∓2w₀}), evaluated without overflow.
    let p_up = 1.0 / (1.0 + (-2.0 * w0).exp());
    let p_dn = 1.0 / (1.0 + (2.0 * w0).exp());
    let g = |u: f64| (-u * u / (2.0 * var)).exp();
    Ok((p_up * g(up) + p_dn * g(dn)) / (2.0 * PI * var).sqrt())
}

/// `n!/Γ(n+α+1)` for n = 0..=n_max.
fn laguerre_norms(alpha: f64, n_max: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(n_max + 1);
    let mut v = 1.0 / gamma(alpha + 1.0);
    for n in 0..=n_max {
        c.push(v);
        v *= (n as f64 + 1.0) / (n as f64 + alpha + 1.0);
    }
    c
}

/// Truncated series `Σ_{n≤n_max} n!/Γ(n+α+1) L_n(x₀) L_n(x) w^{n+1}`
/// with the truncation monitor applied to its coefficients.
pub fn laguerre_kernel_series(alpha: f64, x: f64, x0: f64, w: f64, n_max: usize) -> Result<f64> {
    Ok(kernel_series_with_error(alpha, x, x0, w, n_max)?.0)
}

/// The series sum and an estimate of its absolute error.
fn kernel_series_with_error(alpha: f64, x: f64, x0: f64, w: f64, n_max: usize) -> Result<(f64, f64)> {
    let norms = laguerre_norms(alpha, n_max);
    let l0 = laguerre_all(n_max, alpha, x0);
    let lx = laguerre_all(n_max, alpha, x);
    let mut sum = 0.0;
    let mut magnitude = 0.0;
    let mut last: f64 = 0.0;
    let mut head: f64 = 0.0;
    let mut tail: f64 = 0.0;
    let mut wp = w;
    for n in 0..=n_max {
        let coef = norms[n] * l0[n] * wp;
        head = head.max(coef.abs());
        if n + 3 > n_max {
            tail = tail.max(coef.abs());
            last = last.max((coef * lx[n]).abs());
        }
        sum += coef * lx[n];
        magnitude += (coef * lx[n]).abs();
        wp *= w;
    }
    if head > 0.0 && tail > TAIL_RATIO * head {
        return Err(Error::Truncation { n_max, tail, head });
    }
    Ok((sum, magnitude * f64::EPSILON + last))
}

/// Divides a series density by its normalization after checking its error
/// estimate against [`SERIES_TOL`].
fn normalized_series(sum: f64, error: f64, scale: f64, norm: f64) -> Result<f64> {
    let estimate = scale.abs() * error / norm;
    if estimate > SERIES_TOL {
        return Err(Error::SeriesAccuracy { estimate });
    }
    Ok(scale * sum / norm)
}

/// `ln` of the Hille–Hardy kernel times `w`, i.e. of the resummed
/// [`laguerre_kernel_series`] with `n_max = ∞`.
pub fn ln_laguerre_kernel(alpha: f64, x: f64, x0: f64, w: f64) -> f64 {
    let om = 1.0 - w;
    let a = w / om;
    let base = w.ln() - om.ln() - (x + x0) * a;
    let p = x * x0 * w;
    if p == 0.0 {
        base - alpha * om.ln() - ln_gamma(alpha + 1.0)
    } else {
        let z = 2.0 * p.sqrt() / om;
        base - 0.5 * alpha * p.ln() + ln_bessel_i(alpha, z)
    }
}

pub fn laguerre_kernel(alpha: f64, x: f64, x0: f64, w: f64) -> f64 {
    ln_laguerre_kernel(alpha, x, x0, w).exp()
}

fn hen_prefactor(phi: f64, c0: f64, eta: f64, w: f64) -> f64 {
    2.0 * c0 - eta + eta * (phi + 1.0) * w
}

fn check_hen(tau: f64, phi: f64, phi0: f64, c0: f64, eta: f64) -> Result<()> {
    check_tau(tau)?;
    check_eta(eta)?;
    if !(phi >= 0.0) || !(phi0 >= 0.0) {
        return Err(Error::InvalidArgument("φ must be non-negative".into()));
    }
    if !(c0 >= 0.5 - 1e-12) {
        return Err(Error::InvalidArgument(format!("c0 = {c0} below 1/2")));
    }
    Ok(())
}

/// Unnormalised `A_k(φ)` from the resummed kernel.
pub(crate) fn hen_ak_unnormalized(phi: f64, tau: f64, phi0: f64, c0: f64, eta: f64, k: usize) -> f64 {
    let w = (-tau).exp();
    let kf = k as f64;
    let pre = hen_prefactor(phi, c0, eta, w);
    if k == 0 {
        return pre * laguerre_kernel(0.0, phi, phi0, w);
    }
    if phi == 0.0 || phi0 == 0.0 {
        return 0.0;
    }
    let ln = ln_laguerre_kernel(kf, phi, phi0, w) + 0.5 * kf * ((phi * w).ln() + phi0.ln());
    pre * ln.exp()
}

/// `N = ∫₀^∞ A₀ dφ`, by quadrature of the resummed kernel.
pub fn hen_phi_normalization(tau: f64, phi0: f64, c0: f64, eta: f64) -> Result<f64> {
    check_hen(tau, 0.0, phi0, c0, eta)?;
    let f = |phi: f64| hen_ak_unnormalized(phi, tau, phi0, c0, eta, 0);
    let width = 10.0 * (1.0 + phi0) / (1.0 - (-tau).exp()).max(1e-3);
    Ok(integrate_to_infinity(f, 0.0, width, 1e-14, QuadOptions::default())?.value)
}

/// Fourier mode `A_k(φ)` of the heterodyne-fluorescence density by the
/// truncated Laguerre series; `k = 0` is the φ marginal.
pub fn pdf_hen_phi(phi: f64, tau: f64, phi0: f64, c0: f64, eta: f64, k: usize, n_max: usize) -> Result<f64> {
    check_hen(tau, phi, phi0, c0, eta)?;
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let w = (-tau).exp();
    let kf = k as f64;
    let (s, error) = kernel_series_with_error(kf, phi, phi0, w, n_max)?;
    let powers = if k == 0 { 1.0 } else { (phi * w).powf(0.5 * kf) * phi0.powf(0.5 * kf) };
    let norm = hen_phi_normalization(tau, phi0, c0, eta)?;
    normalized_series(s, error, hen_prefactor(phi, c0, eta, w) * powers, norm)
}

/// Same as [`pdf_hen_phi`] with the series resummed in closed form.
pub fn pdf_hen_phi_resummed(phi: f64, tau: f64, phi0: f64, c0: f64, eta: f64, k: usize) -> Result<f64> {
    check_hen(tau, phi, phi0, c0, eta)?;
    Ok(hen_ak_unnormalized(phi, tau, phi0, c0, eta, k) / hen_phi_normalization(tau, phi0, c0, eta)?)
}

/// Start at the excited state: `(1−η+η(φ+1)e^{−τ}) d e^{−dφ}`, `d = 1/(e^τ−1)`.
pub fn pdf_hen_phi_from_pole(phi: f64, tau: f64, eta: f64) -> Result<f64> {
    check_tau(tau)?;
    check_eta(eta)?;
    let d = 1.0 / tau.exp_m1();
    Ok((1.0 - eta + eta * (phi + 1.0) * (-tau).exp()) * d * (-d * phi).exp())
}

/// Latitude density at unit efficiency from the excited state:
/// `4cosλ/(1+sinλ)³ · e^{−τ} d e^{−d(1−sinλ)/(1+sinλ)}`.
pub fn pdf_hen_latitude(lambda: f64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    if !(lambda > -PI / 2.0 && lambda < PI / 2.0) {
        return Err(Error::InvalidArgument(format!("latitude {lambda} outside (−π/2, π/2)")));
    }
    let s = lambda.sin();
    let d = 1.0 / tau.exp_m1();
    let u = 1.0 + s;
    Ok(4.0 * lambda.cos() / (u * u * u) * (-tau).exp() * d * (-d * (1.0 - s) / u).exp())
}

/// `φ(λ) = (1 − sinλ)/(1 + sinλ)` on the pure-state sphere at η = 1.
pub fn phi_of_latitude(lambda: f64) -> f64 {
    let s = lambda.sin();
    (1.0 - s) / (1.0 + s)
}

fn hon_prefactor(chi: f64, c0: f64, eta: f64, w: f64) -> f64 {
    c0 - 0.5 * eta + eta * (chi + 0.5) * w
}

fn check_hon(tau: f64, chi: f64, chi0: f64, c0: f64, eta: f64) -> Result<()> {
    check_tau(tau)?;
    check_eta(eta)?;
    if !(chi >= 0.0) || !(chi0 >= 0.0) {
        return Err(Error::InvalidArgument("χ must be non-negative".into()));
    }
    if !(c0 >= 0.5 - 1e-12) {
        return Err(Error::InvalidArgument(format!("c0 = {c0} below 1/2")));
    }
    Ok(())
}

pub(crate) fn hon_chi_unnormalized(chi: f64, tau: f64, chi0: f64, c0: f64, eta: f64) -> f64 {
    let w = (-tau).exp();
    hon_prefactor(chi, c0, eta, w) * laguerre_kernel(0.5, chi, chi0, w)
}

/// Density in χ built on the singular Kummer solution `χ^{−½} M(a−½, ½, χ)`,
/// i.e. Laguerre polynomials of order −½.
pub(crate) fn hon_chi_singular_unnormalized(chi: f64, tau: f64, chi0: f64, c0: f64, eta: f64) -> f64 {
    if chi == 0.0 {
        return f64::INFINITY;
    }
    let w = (-tau).exp();
    hon_prefactor(chi, c0, eta, w) * (ln_laguerre_kernel(-0.5, chi, chi0, w) - 0.5 * chi.ln()).exp()
}

fn normalize(f: impl Fn(f64) -> f64, x0: f64, tau: f64) -> Result<f64> {
    let width = 10.0 * (1.0 + x0) / (1.0 - (-tau).exp()).max(1e-3);
    Ok(integrate_to_infinity(f, 0.0, width, 1e-14, QuadOptions { max_intervals: 20_000, ..QuadOptions::default() })?.value)
}

pub fn hon_chi_normalization(tau: f64, chi0: f64, c0: f64, eta: f64) -> Result<f64> {
    check_hon(tau, 0.0, chi0, c0, eta)?;
    normalize(|x| hon_chi_unnormalized(x, tau, chi0, c0, eta), chi0, tau)
}

pub fn hon_chi_singular_normalization(tau: f64, chi0: f64, c0: f64, eta: f64) -> Result<f64> {
    check_hon(tau, 0.0, chi0, c0, eta)?;
    normalize(|x| hon_chi_singular_unnormalized(x, tau, chi0, c0, eta), chi0, tau)
}

/// Homodyne-fluorescence density in χ: the α = ½ Laguerre series with
/// `a_n = L_n^{(½)}(χ₀) n!/Γ(n+3/2)`.
pub fn pdf_hon_chi(chi: f64, tau: f64, chi0: f64, c0: f64, eta: f64, n_max: usize) -> Result<f64> {
    check_hon(tau, chi, chi0, c0, eta)?;
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let w = (-tau).exp();
    let (s, error) = kernel_series_with_error(0.5, chi, chi0, w, n_max)?;
    let norm = hon_chi_normalization(tau, chi0, c0, eta)?;
    normalized_series(s, error, hon_prefactor(chi, c0, eta, w), norm)
}

/// [`pdf_hon_chi`] resummed in closed form.
pub fn pdf_hon_chi_resummed(chi: f64, tau: f64, chi0: f64, c0: f64, eta: f64) -> Result<f64> {
    check_hon(tau, chi, chi0, c0, eta)?;
    Ok(hon_chi_unnormalized(chi, tau, chi0, c0, eta) / hon_chi_normalization(tau, chi0, c0, eta)?)
}

/// χ density on the singular Kummer branch, which carries the `χ^{−½}`
/// behaviour at the origin that the χ diffusion `√(2χ) dW + (χ + ½ + …) dt`
/// produces (a squared Bessel process of dimension one near χ = 0).
pub fn pdf_hon_chi_singular(chi: f64, tau: f64, chi0: f64, c0: f64, eta: f64) -> Result<f64> {
    check_hon(tau, chi, chi0, c0, eta)?;
    Ok(hon_chi_singular_unnormalized(chi, tau, chi0, c0, eta) / hon_chi_singular_normalization(tau, chi0, c0, eta)?)
}
