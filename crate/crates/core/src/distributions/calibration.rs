//! Clock factors between simulation time and each density's own time
//! argument.
//!
//! The densities carry rescaled time arguments, so each case owns a factor
//! `κ` with `τ = κ · t_sim`. `κ` is chosen from [`CLOCK_CANDIDATES`] by the
//! smallest KS statistic against a Monte Carlo ensemble and frozen in
//! `data/clock_calibration.json`.

use serde::{Deserialize, Serialize};

use super::closed_form::coordinate_samples;
use super::{compare_samples, ClosedFormDistribution, DistributionCase, DistributionParams};
use crate::error::{Error, Result};
use crate::qubit::{BlochVector, DensityMatrix};
use crate::sde::{preset, simulate_ensemble_with, Preset, SimOptions};

pub const CLOCK_CANDIDATES: [f64; 5] = [1.0, 2.0, 4.0, 0.5, 0.25];

const COMMITTED: &str = include_str!("../../data/clock_calibration.json");

/// Monte Carlo setting used to calibrate one case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSetting {
    pub case: DistributionCase,
    pub preset: Preset,
    pub eta: f64,
    pub start: BlochVector,
    pub t_sim: f64,
    pub dt: f64,
    pub n: usize,
    pub seed: u64,
}

impl CalibrationSetting {
    /// Reference setting per case: dt = 1e-5, 10⁴ trajectories.
    pub fn standard(case: DistributionCase) -> Self {
        let lambda0: f64 = 0.2;
        let equator_start = BlochVector::from_latitude(lambda0, 0.0, 1.0);
        let (preset, eta, start, t_sim) = match case {
            DistributionCase::HehW => (Preset::HoH, 1.0, equator_start, 0.25),
            DistributionCase::HehTheta => (Preset::HeH, 0.5, equator_start, 0.25),
            DistributionCase::HenPhi | DistributionCase::HenLatitudeSpecial => (Preset::HeN, 1.0, BlochVector::EXCITED, 0.5),
            DistributionCase::HonChi | DistributionCase::HonChiSingular => (Preset::HoN, 0.5, BlochVector::EXCITED, 0.5),
        };
        Self { case, preset, eta, start, t_sim, dt: 1e-5, n: 10_000, seed: 20_240_601 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateKs {
    pub kappa: f64,
    pub ks: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockEntry {
    pub case: DistributionCase,
    pub kappa: f64,
    pub candidates: Vec<CandidateKs>,
    pub setting: CalibrationSetting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockCalibration {
    pub entries: Vec<ClockEntry>,
}

impl ClockCalibration {
    /// The calibration shipped with the crate.
    pub fn committed() -> Self {
        serde_json::from_str(COMMITTED).expect("committed clock calibration parses")
    }

    pub fn entry(&self, case: DistributionCase) -> Result<&ClockEntry> {
        self.entries
            .iter()
            .find(|e| e.case == case)
            .ok_or_else(|| Error::InvalidArgument(format!("no clock calibration for {case}")))
    }

    pub fn kappa(&self, case: DistributionCase) -> Result<f64> {
        Ok(self.entry(case)?.kappa)
    }

    /// Replaces or appends the entry of `e.case`.
    pub fn upsert(&mut self, e: ClockEntry) {
        match self.entries.iter_mut().find(|x| x.case == e.case) {
            Some(slot) => *slot = e,
            None => self.entries.push(e),
        }
    }
}

/// Committed `κ` for a case.
pub fn default_clock(case: DistributionCase) -> Result<f64> {
    ClockCalibration::committed().kappa(case)
}

/// Coordinate samples of an ensemble's final states for a setting.
pub fn setting_samples(s: &CalibrationSetting) -> Result<Vec<f64>> {
    let model = preset(s.preset, s.eta)?;
    let rho0 = DensityMatrix::from_bloch(s.start)?;
    let ens = simulate_ensemble_with(&model, &rho0, s.dt, s.t_sim, s.n, s.seed, SimOptions::endpoints())?;
    coordinate_samples(&ens.final_states(), s.case.coordinate(), s.eta)
}

/// KS of every candidate against the same samples; `κ` minimises it.
pub fn calibrate_from_samples(s: &CalibrationSetting, samples: &[f64]) -> Result<ClockEntry> {
    if !s.case.presets().contains(&s.preset) {
        return Err(Error::Mismatch(format!("{} is not described by {}", s.preset, s.case)));
    }
    let params = DistributionParams::from_start(s.case, s.start, s.eta)?;
    let mut candidates = Vec::with_capacity(CLOCK_CANDIDATES.len());
    for &kappa in &CLOCK_CANDIDATES {
        let dist = ClosedFormDistribution::at_sim_time(s.case, params, s.t_sim, kappa)?;
        candidates.push(CandidateKs { kappa, ks: compare_samples(&dist, samples)?.statistic });
    }
    let best = candidates
        .iter()
        .min_by(|a, b| a.ks.total_cmp(&b.ks))
        .expect("non-empty candidate list");
    Ok(ClockEntry { case: s.case, kappa: best.kappa, candidates: candidates.clone(), setting: *s })
}

pub fn calibrate_clock(s: &CalibrationSetting) -> Result<ClockEntry> {
    let samples = setting_samples(s)?;
    calibrate_from_samples(s, &samples)
}
