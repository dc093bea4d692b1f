//! Euler–Maruyama integration of the stochastic master equation
//!
//! ```text
//! dρ = −i[H, ρ] dt + Σ_k F_{L_k}(ρ) dt + Σ_k √η_k G_{L_k}(ρ) dW^k
//! dy^k = √η_k tr(L_k ρ + ρ L_k†) dt + dW^k
//! ```
//!
//! in the Itô sense, on the density matrix. After each step the state is
//! re-read through its Bloch vector, which restores exact Hermiticity and
//! unit trace; a vector that left the unit ball is rescaled onto the sphere
//! and the event is counted.

mod preset;

pub use preset::{preset, Preset};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubit::{f_raw, g_raw, BlochVector, ComplexMatrix2, DensityMatrix, ModelSpec};
use crate::rng::{derive_seed, CounterNoise, NoiseSource};

pub const DEFAULT_DT: f64 = 1e-4;
pub const DEFAULT_HORIZON: f64 = 2.0;

/// Wiener increments of one step, one per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDraw {
    pub increments: Vec<f64>,
}

impl NoiseDraw {
    pub fn new(increments: Vec<f64>) -> Self {
        Self { increments }
    }

    pub fn zeros(channels: usize) -> Self {
        Self { increments: vec![0.0; channels] }
    }
}

/// Result of one integration step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub rho: DensityMatrix,
    pub records: Vec<f64>,
    pub projected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub time: f64,
    pub state: BlochVector,
    /// Record increments `dy^k` accumulated since the previous point.
    pub records: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub seed: u64,
    /// Integration step.
    pub dt: f64,
    /// Integration steps between stored points.
    pub record_stride: usize,
    /// Steps whose raw update left the Bloch ball.
    pub projections: usize,
}

impl Trajectory {
    pub fn initial(&self) -> &TrajectoryPoint {
        &self.points[0]
    }

    pub fn last(&self) -> &TrajectoryPoint {
        self.points.last().expect("trajectory has at least one point")
    }

    pub fn horizon(&self) -> f64 {
        self.last().time
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub trajectories: Vec<Trajectory>,
    pub model: ModelSpec,
    pub dt: f64,
    pub horizon: f64,
    pub base_seed: u64,
}

impl Ensemble {
    /// State of every trajectory at its last stored point.
    pub fn final_states(&self) -> Vec<BlochVector> {
        self.trajectories.iter().map(|t| t.last().state).collect()
    }

    pub fn total_projections(&self) -> usize {
        self.trajectories.iter().map(|t| t.projections).sum()
    }
}

/// Storage and noise options for trajectory runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    /// Store every `record_stride`-th state (the final state is always kept).
    pub record_stride: usize,
    /// Each increment is built from this many finer Philox increments.
    pub substeps: u32,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { record_stride: 1, substeps: 1 }
    }
}

impl SimOptions {
    /// Keep only the initial and final states.
    pub fn endpoints() -> Self {
        Self { record_stride: usize::MAX, substeps: 1 }
    }
}

struct ChannelData {
    l: ComplexMatrix2,
    sqrt_eta: f64,
}

/// Precomputed model data for repeated steps.
pub struct Stepper {
    h: ComplexMatrix2,
    has_h: bool,
    channels: Vec<ChannelData>,
}

impl Stepper {
    pub fn new(model: &ModelSpec) -> Self {
        Self {
            h: model.hamiltonian,
            has_h: model.hamiltonian != ComplexMatrix2::zero(),
            channels: model
                .channels
                .iter()
                .map(|c| ChannelData { l: c.operator, sqrt_eta: c.efficiency.sqrt() })
                .collect(),
        }
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// One Euler–Maruyama step; `records` receives `dy^k`. Returns the new
    /// Bloch vector and whether it was projected.
    pub fn step(&self, rho: &ComplexMatrix2, dt: f64, dw: &[f64], records: &mut [f64]) -> ([f64; 3], bool) {
        let mut drho = ComplexMatrix2::zero();
        if self.has_h {
            drho += self.h.commutator(rho).scale(Complex64::new(0.0, -dt));
        }
        for (k, c) in self.channels.iter().enumerate() {
            drho += f_raw(&c.l, rho) * dt;
            let a = c.l * *rho;
            let mean = 2.0 * a.trace().re;
            if c.sqrt_eta > 0.0 {
                drho += g_raw(&c.l, rho) * (c.sqrt_eta * dw[k]);
            }
            records[k] = c.sqrt_eta * mean * dt + dw[k];
        }
        let v = (*rho + drho).bloch_components();
        let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        if n2 > 1.0 {
            let s = n2.sqrt().recip();
            ([v[0] * s, v[1] * s, v[2] * s], true)
        } else {
            (v, false)
        }
    }
}

/// One Itô step of the master equation with explicit increments.
pub fn step_ito(model: &ModelSpec, rho: &DensityMatrix, dt: f64, noise: &NoiseDraw) -> Result<StepOutput> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if noise.increments.len() != model.channels.len() {
        return Err(Error::NoiseLength { expected: model.channels.len(), got: noise.increments.len() });
    }
    if noise.increments.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("noise increment"));
    }
    let stepper = Stepper::new(model);
    let mut records = vec![0.0; model.channels.len()];
    let (v, projected) = stepper.step(rho.matrix(), dt, &noise.increments, &mut records);
    Ok(StepOutput { rho: DensityMatrix::from_bloch_unchecked(v), records, projected })
}

/// Number of steps covering `horizon`.
pub fn step_count(dt: f64, horizon: f64) -> Result<u64> {
    if !(dt > 0.0) || !dt.is_finite() || !horizon.is_finite() || !(horizon >= dt) {
        return Err(Error::InvalidArgument(format!("need horizon >= dt > 0, got dt={dt}, horizon={horizon}")));
    }
    Ok((horizon / dt).round() as u64)
}

/// Integrates from `rho0` over `steps` steps with an arbitrary noise source.
pub fn integrate(
    model: &ModelSpec,
    rho0: &DensityMatrix,
    dt: f64,
    steps: u64,
    noise: &impl NoiseSource,
    seed: u64,
    record_stride: usize,
) -> Trajectory {
    let stepper = Stepper::new(model);
    let m = stepper.channel_count();
    let stride = record_stride.max(1);
    let mut rho = *rho0.matrix();
    let mut dw = vec![0.0; m];
    let mut dy = vec![0.0; m];
    let mut acc = vec![0.0; m];
    let mut projections = 0usize;
    let capacity = (steps as usize / stride).saturating_add(2).min(1 << 24);
    let mut points = Vec::with_capacity(capacity);
    points.push(TrajectoryPoint { time: 0.0, state: rho0.bloch(), records: vec![0.0; m] });
    let mut since = 0usize;
    for s in 0..steps {
        noise.increments(s, dt, &mut dw);
        let (v, projected) = stepper.step(&rho, dt, &dw, &mut dy);
        projections += projected as usize;
        rho = ComplexMatrix2::from_bloch_components(v);
        for (a, d) in acc.iter_mut().zip(&dy) {
            *a += d;
        }
        since += 1;
        if since == stride || s + 1 == steps {
            points.push(TrajectoryPoint {
                time: (s + 1) as f64 * dt,
                state: BlochVector::from_array(v),
                records: std::mem::replace(&mut acc, vec![0.0; m]),
            });
            since = 0;
        }
    }
    Trajectory { points, seed, dt, record_stride: stride, projections }
}

/// Deterministic in `(model, rho0, dt, horizon, seed)`.
pub fn simulate_trajectory(model: &ModelSpec, rho0: &DensityMatrix, dt: f64, horizon: f64, seed: u64) -> Result<Trajectory> {
    simulate_trajectory_with(model, rho0, dt, horizon, seed, SimOptions::default())
}

pub fn simulate_trajectory_with(
    model: &ModelSpec,
    rho0: &DensityMatrix,
    dt: f64,
    horizon: f64,
    seed: u64,
    opts: SimOptions,
) -> Result<Trajectory> {
    let steps = step_count(dt, horizon)?;
    let noise = CounterNoise::with_substeps(seed, opts.substeps);
    Ok(integrate(model, rho0, dt, steps, &noise, seed, opts.record_stride))
}

/// Trajectory `i` uses `derive_seed(base_seed, i)`; output order is by index
/// regardless of scheduling.
pub fn simulate_ensemble(
    model: &ModelSpec,
    rho0: &DensityMatrix,
    dt: f64,
    horizon: f64,
    n: usize,
    base_seed: u64,
) -> Result<Ensemble> {
    simulate_ensemble_with(model, rho0, dt, horizon, n, base_seed, SimOptions::default())
}

pub fn simulate_ensemble_with(
    model: &ModelSpec,
    rho0: &DensityMatrix,
    dt: f64,
    horizon: f64,
    n: usize,
    base_seed: u64,
    opts: SimOptions,
) -> Result<Ensemble> {
    if n == 0 {
        return Err(Error::InvalidArgument("ensemble size must be at least 1".into()));
    }
    let steps = step_count(dt, horizon)?;
    let trajectories = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(base_seed, i);
            let noise = CounterNoise::with_substeps(seed, opts.substeps);
            integrate(model, rho0, dt, steps, &noise, seed, opts.record_stride)
        })
        .collect();
    Ok(Ensemble { trajectories, model: model.clone(), dt, horizon: steps as f64 * dt, base_seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::LindbladChannel;

    #[test]
    fn excited_state_fixed_under_qnd_heterodyne() {
        let model = preset(Preset::HeH, 0.7).unwrap();
        let rho = DensityMatrix::excited();
        for w in [[0.3, -1.2], [5.0, 2.0], [0.0, 0.0]] {
            let out = step_ito(&model, &rho, 1e-3, &NoiseDraw::new(w.to_vec())).unwrap();
            assert_eq!(out.rho.bloch(), BlochVector::EXCITED);
        }
    }

    #[test]
    fn decay_step_matches_drift() {
        let model = ModelSpec::from_pairs(&[(ComplexMatrix2::sigma_minus(), 0.0)]).unwrap();
        let rho = DensityMatrix::from_bloch(BlochVector::new(0.3, -0.2, 0.4).unwrap()).unwrap();
        let dt = 1e-4;
        let out = step_ito(&model, &rho, dt, &NoiseDraw::zeros(1)).unwrap();
        let v = out.rho.bloch();
        assert!((v.z - 0.4 + 1.4 * dt).abs() < 1e-15);
        assert!((v.x - 0.3 * (1.0 - dt / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn empty_dynamics_is_identity() {
        let model = ModelSpec::from_channels(vec![]);
        let rho = DensityMatrix::from_bloch(BlochVector::new(0.1, 0.2, 0.3).unwrap()).unwrap();
        let out = step_ito(&model, &rho, 0.01, &NoiseDraw::zeros(0)).unwrap();
        assert_eq!(out.rho, rho);
    }

    #[test]
    fn step_validation() {
        let model = preset(Preset::HoH, 1.0).unwrap();
        let rho = DensityMatrix::maximally_mixed();
        assert!(step_ito(&model, &rho, 0.0, &NoiseDraw::zeros(1)).is_err());
        assert!(step_ito(&model, &rho, 1e-3, &NoiseDraw::zeros(2)).is_err());
        assert!(step_ito(&model, &rho, 1e-3, &NoiseDraw::new(vec![f64::NAN])).is_err());
    }

    #[test]
    fn records_carry_signal() {
        let model = ModelSpec::new(
            ComplexMatrix2::zero(),
            vec![LindbladChannel::new(ComplexMatrix2::sigma_z(), 0.25).unwrap()],
        )
        .unwrap();
        let rho = DensityMatrix::from_bloch(BlochVector::new(0.0, 0.0, 0.5).unwrap()).unwrap();
        let out = step_ito(&model, &rho, 0.1, &NoiseDraw::new(vec![0.2])).unwrap();
        // √η · tr(σ_zρ + ρσ_z) dt + dW = 0.5 · 1.0 · 0.1 + 0.2
        assert!((out.records[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_rotates() {
        let h = ComplexMatrix2::sigma_z() * 0.5;
        let model = ModelSpec::new(h, vec![]).unwrap();
        let rho = DensityMatrix::from_bloch(BlochVector::new(0.5, 0.0, 0.0).unwrap()).unwrap();
        let out = step_ito(&model, &rho, 1e-3, &NoiseDraw::zeros(0)).unwrap();
        // H = σ_z/2 rotates about z at unit angular speed: dy = x dt.
        assert!((out.rho.bloch().y - 0.5e-3).abs() < 1e-15);
    }

    #[test]
    fn stride_keeps_endpoints_and_sums_records() {
        let model = preset(Preset::HoN, 0.5).unwrap();
        let rho = DensityMatrix::maximally_mixed();
        let full = simulate_trajectory(&model, &rho, 1e-3, 0.1, 4).unwrap();
        let strided = simulate_trajectory_with(&model, &rho, 1e-3, 0.1, 4, SimOptions { record_stride: 30, substeps: 1 }).unwrap();
        assert_eq!(full.points.len(), 101);
        assert_eq!(strided.points.len(), 5);
        assert_eq!(strided.last().state, full.last().state);
        let sum: f64 = full.points[1..=30].iter().map(|p| p.records[0]).sum();
        assert!((strided.points[1].records[0] - sum).abs() < 1e-13);
    }
}
