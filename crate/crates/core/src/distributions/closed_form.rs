use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ks::{ks_result, KsResult};
use super::*;
use crate::error::{Error, Result};
use crate::invariants::{eval_invariant, Coordinate, InvariantKind};
use crate::qubit::BlochVector;
use crate::quadrature::integrate;
use crate::sde::{preset, Ensemble, Preset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionCase {
    /// Wrapped Gaussian in θ, heterodyne `σ_z`.
    HehTheta,
    /// Gaussian mixture in w, either `σ_z` setup.
    HehW,
    /// φ marginal (`A_0`), heterodyne `σ_-`.
    HenPhi,
    /// Latitude form of the φ marginal from the excited state at η = 1.
    #[serde(rename = "hen-latitude")]
    HenLatitudeSpecial,
    /// α = ½ Laguerre series in χ, homodyne `σ_-`.
    HonChi,
    /// χ density on the singular Kummer branch (order −½ Laguerre).
    HonChiSingular,
}

impl DistributionCase {
    pub const ALL: [DistributionCase; 6] = [
        DistributionCase::HehTheta,
        DistributionCase::HehW,
        DistributionCase::HenPhi,
        DistributionCase::HenLatitudeSpecial,
        DistributionCase::HonChi,
        DistributionCase::HonChiSingular,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistributionCase::HehTheta => "heh-theta",
            DistributionCase::HehW => "heh-w",
            DistributionCase::HenPhi => "hen-phi",
            DistributionCase::HenLatitudeSpecial => "hen-latitude",
            DistributionCase::HonChi => "hon-chi",
            DistributionCase::HonChiSingular => "hon-chi-singular",
        }
    }

    pub fn coordinate(self) -> Coordinate {
        match self {
            DistributionCase::HehTheta => Coordinate::Theta,
            DistributionCase::HehW => Coordinate::W,
            DistributionCase::HenPhi => Coordinate::Phi,
            DistributionCase::HenLatitudeSpecial => Coordinate::Latitude,
            DistributionCase::HonChi | DistributionCase::HonChiSingular => Coordinate::Chi,
        }
    }

    /// Presets whose ensembles the density describes.
    pub fn presets(self) -> &'static [Preset] {
        match self {
            DistributionCase::HehTheta => &[Preset::HeH],
            DistributionCase::HehW => &[Preset::HeH, Preset::HoH],
            DistributionCase::HenPhi | DistributionCase::HenLatitudeSpecial => &[Preset::HeN],
            DistributionCase::HonChi | DistributionCase::HonChiSingular => &[Preset::HoN],
        }
    }
}

impl fmt::Display for DistributionCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistributionCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase().replace('_', "-");
        DistributionCase::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown distribution case {s:?}")))
    }
}

/// Initial-condition constants of a density. Fields irrelevant to a case
/// are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionParams {
    pub eta: f64,
    pub theta0: f64,
    pub w0: f64,
    pub phi0: f64,
    pub c0: f64,
    pub chi0: f64,
    pub k_max: usize,
    pub n_max: usize,
}

impl Default for DistributionParams {
    fn default() -> Self {
        Self { eta: 1.0, theta0: 0.0, w0: 0.0, phi0: 0.0, c0: 0.5, chi0: 0.0, k_max: 10, n_max: DEFAULT_N_MAX }
    }
}

impl DistributionParams {
    /// Constants of the manifold through a start state.
    pub fn from_start(case: DistributionCase, v0: BlochVector, eta: f64) -> Result<Self> {
        let mut p = DistributionParams { eta, theta0: v0.theta(), ..Default::default() };
        match case {
            DistributionCase::HehTheta => {}
            DistributionCase::HehW => p.w0 = eval_invariant(InvariantKind::W, v0, eta)?,
            DistributionCase::HenPhi | DistributionCase::HenLatitudeSpecial => {
                p.phi0 = eval_invariant(InvariantKind::Phi, v0, eta)?;
                p.c0 = eval_invariant(InvariantKind::CHen, v0, eta)?;
            }
            DistributionCase::HonChi | DistributionCase::HonChiSingular => {
                p.chi0 = eval_invariant(InvariantKind::Chi, v0, eta)?;
                p.c0 = eval_invariant(InvariantKind::CHon, v0, eta)?;
            }
        }
        Ok(p)
    }
}

/// A normalised analytic density at formula time `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormDistribution {
    pub case: DistributionCase,
    pub params: DistributionParams,
    pub tau: f64,
    /// Integral of the unnormalised Laguerre form (1 for the Gaussian cases).
    pub normalization: f64,
}

impl ClosedFormDistribution {
    pub fn new(case: DistributionCase, params: DistributionParams, tau: f64) -> Result<Self> {
        let p = params;
        let normalization = match case {
            DistributionCase::HehTheta => {
                pdf_heh_theta(p.theta0, tau, p.theta0, p.eta, p.k_max)?;
                1.0
            }
            DistributionCase::HehW => {
                pdf_heh_w(p.w0, tau, p.w0, p.eta)?;
                1.0
            }
            DistributionCase::HenPhi => hen_phi_normalization(tau, p.phi0, p.c0, p.eta)?,
            DistributionCase::HenLatitudeSpecial => {
                if p.eta != 1.0 || p.phi0 != 0.0 {
                    return Err(Error::InvalidArgument("latitude form needs η = 1 and a start at z = +1".into()));
                }
                pdf_hen_latitude(0.0, tau)?;
                1.0
            }
            DistributionCase::HonChi => hon_chi_normalization(tau, p.chi0, p.c0, p.eta)?,
            DistributionCase::HonChiSingular => hon_chi_singular_normalization(tau, p.chi0, p.c0, p.eta)?,
        };
        Ok(Self { case, params, tau, normalization })
    }

    /// Density seen `t_sim` after the start, under clock factor `kappa`.
    pub fn at_sim_time(case: DistributionCase, params: DistributionParams, t_sim: f64, kappa: f64) -> Result<Self> {
        Self::new(case, params, kappa * t_sim)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let p = &self.params;
        let tau = self.tau;
        match self.case {
            DistributionCase::HehTheta => pdf_heh_theta(x, tau, p.theta0, p.eta, p.k_max).unwrap_or(0.0),
            DistributionCase::HehW => pdf_heh_w(x, tau, p.w0, p.eta).unwrap_or(0.0),
            DistributionCase::HenPhi => {
                if x < 0.0 {
                    0.0
                } else {
                    hen_ak_unnormalized(x, tau, p.phi0, p.c0, p.eta, 0) / self.normalization
                }
            }
            DistributionCase::HenLatitudeSpecial => pdf_hen_latitude(x, tau).unwrap_or(0.0),
            DistributionCase::HonChi => {
                if x < 0.0 {
                    0.0
                } else {
                    hon_chi_unnormalized(x, tau, p.chi0, p.c0, p.eta) / self.normalization
                }
            }
            DistributionCase::HonChiSingular => {
                if x <= 0.0 {
                    0.0
                } else {
                    hon_chi_singular_unnormalized(x, tau, p.chi0, p.c0, p.eta) / self.normalization
                }
            }
        }
    }

    /// Lower end of the support (or of its numerically relevant part).
    pub fn lower(&self) -> f64 {
        match self.case {
            DistributionCase::HehTheta => -PI,
            DistributionCase::HehW => {
                let v = self.params.eta * self.tau;
                self.params.w0 - v - 40.0 * v.sqrt() - 1.0
            }
            DistributionCase::HenLatitudeSpecial => -PI / 2.0,
            _ => 0.0,
        }
    }

    /// Upper end of the support; `∞` for the half-line cases.
    pub fn upper(&self) -> f64 {
        match self.case {
            DistributionCase::HehTheta => PI,
            DistributionCase::HehW => {
                let v = self.params.eta * self.tau;
                self.params.w0 + v + 40.0 * v.sqrt() + 1.0
            }
            DistributionCase::HenLatitudeSpecial => PI / 2.0,
            _ => f64::INFINITY,
        }
    }

    fn segment(&self, a: f64, b: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-11, max_intervals: 20_000 };
        Ok(integrate(|x| self.pdf(x), a, b, opts)?.value)
    }

    /// CDF at ascending points, by accumulating quadrature between them.
    pub fn cdf_sorted(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let lo = self.lower();
        let hi = self.upper();
        let mut out = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        let mut prev = lo;
        for &x in xs {
            if x.is_nan() {
                return Err(Error::NonFinite("sample"));
            }
            let x = x.clamp(lo, hi);
            if x == f64::INFINITY {
                out.push(1.0);
                continue;
            }
            if x > prev {
                acc += self.segment(prev, x)?;
                prev = x;
            }
            out.push(acc.clamp(0.0, 1.0));
        }
        Ok(out)
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.cdf_sorted(&[x])?[0])
    }

    /// Inverse CDF by bisection.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::InvalidArgument(format!("probability {u} outside [0, 1]")));
        }
        let mut lo = self.lower();
        let mut hi = self.upper();
        if hi.is_infinite() {
            hi = lo + 1.0;
            while self.cdf(hi)? < u {
                hi = lo + 2.0 * (hi - lo);
                if hi > 1e12 {
                    return Err(Error::Quadrature("quantile bracket".into()));
                }
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid)? < u {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 * (1.0 + hi.abs()) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Coordinate values of Bloch states; states on a pole of the coordinate
/// map to the corresponding end of the real line.
pub fn coordinate_samples(states: &[BlochVector], coordinate: Coordinate, eta: f64) -> Result<Vec<f64>> {
    states
        .iter()
        .map(|&v| match coordinate.eval(v, eta) {
            Ok(x) => Ok(x),
            Err(Error::Pole { pole, .. }) => match coordinate {
                Coordinate::W => Ok(if pole > 0 { f64::INFINITY } else { f64::NEG_INFINITY }),
                _ => Ok(f64::INFINITY),
            },
            Err(e) => Err(e),
        })
        .collect()
}

/// One-sample KS statistic of raw coordinate samples against a density.
pub fn compare_samples(dist: &ClosedFormDistribution, samples: &[f64]) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    Ok(ks_result(&dist.cdf_sorted(&xs)?))
}

/// KS statistic of an ensemble's final states, mapped through
/// `coordinate`, against a density.
pub fn compare_mc(dist: &ClosedFormDistribution, ensemble: &Ensemble, coordinate: Coordinate) -> Result<KsResult> {
    if ensemble.trajectories.is_empty() {
        return Err(Error::InvalidArgument("empty ensemble".into()));
    }
    if coordinate != dist.case.coordinate() {
        return Err(Error::Mismatch(format!("{} is described in {:?}, not {:?}", dist.case, dist.case.coordinate(), coordinate)));
    }
    let eta = dist.params.eta;
    let matches = dist
        .case
        .presets()
        .iter()
        .any(|&p| preset(p, eta).map(|m| m == ensemble.model).unwrap_or(false));
    if !matches {
        return Err(Error::Mismatch(format!("ensemble model is not one of {:?} at η = {eta}", dist.case.presets())));
    }
    let samples = coordinate_samples(&ensemble.final_states(), coordinate, eta)?;
    compare_samples(dist, &samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn self_consistency(dist: &ClosedFormDistribution) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 400;
        let samples: Vec<f64> = (0..n).map(|_| dist.quantile(rng.random::<f64>()).unwrap()).collect();
        let ks = compare_samples(dist, &samples).unwrap();
        // 1.63/√n is the 1% critical value.
        assert!(ks.statistic < 1.63 / (n as f64).sqrt(), "{:?}: {}", dist.case, ks.statistic);
    }

    #[test]
    fn inverse_cdf_samples_pass_ks() {
        let mut p = DistributionParams { eta: 0.8, theta0: 0.3, w0: 0.4, phi0: 0.7, c0: 0.9, chi0: 0.2, ..Default::default() };
        for case in [DistributionCase::HehTheta, DistributionCase::HehW, DistributionCase::HenPhi, DistributionCase::HonChi, DistributionCase::HonChiSingular] {
            self_consistency(&ClosedFormDistribution::new(case, p, 0.8).unwrap());
        }
        p.eta = 1.0;
        p.phi0 = 0.0;
        p.c0 = 0.5;
        self_consistency(&ClosedFormDistribution::new(DistributionCase::HenLatitudeSpecial, p, 0.8).unwrap());
    }

    #[test]
    fn cdf_reaches_one() {
        let p = DistributionParams { eta: 0.5, chi0: 0.3, c0: 0.7, phi0: 0.3, ..Default::default() };
        for case in [DistributionCase::HenPhi, DistributionCase::HonChi, DistributionCase::HonChiSingular, DistributionCase::HehW] {
            let d = ClosedFormDistribution::new(case, p, 0.6).unwrap();
            let c = d.cdf_sorted(&[0.1, 1.0, 5.0, 400.0]).unwrap();
            assert!(c.windows(2).all(|w| w[0] <= w[1]));
            assert!((c[3] - 1.0).abs() < 1e-8, "{case}: {}", c[3]);
        }
    }

    #[test]
    fn latitude_requires_pole_start() {
        let p = DistributionParams { eta: 0.5, ..Default::default() };
        assert!(ClosedFormDistribution::new(DistributionCase::HenLatitudeSpecial, p, 1.0).is_err());
    }

    #[test]
    fn case_names_round_trip() {
        for c in DistributionCase::ALL {
            assert_eq!(c.name().parse::<DistributionCase>().unwrap(), c);
            let j = serde_json::to_string(&c).unwrap();
            assert_eq!(j, format!("\"{}\"", c.name()));
        }
    }
}
