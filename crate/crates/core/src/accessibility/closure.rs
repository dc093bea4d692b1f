//! Lie closure of a model and the resulting dimension verdict.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fields::{d_field, f_field, g_field, h_field};
use super::{pointwise_rank, sample_interior_points};
use crate::error::{Error, Result};
use crate::poly::{lie_bracket_capped, PolyVectorField, DEFAULT_DEGREE_CAP};
use crate::qubit::{BlochVector, ComplexMatrix2, DensityMatrix, LindbladChannel, ModelSpec};
use crate::rng::derive_seed;
use crate::sde::{simulate_ensemble_with, SimOptions};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosureOptions {
    pub degree_cap: usize,
    /// Maximum number of bracketing rounds.
    pub depth: usize,
    /// Points at which a candidate must raise the rank to be admitted.
    pub admission_points: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        Self { degree_cap: DEFAULT_DEGREE_CAP, depth: 6, admission_points: 16, seed: 0x11e, tolerances: Tolerances::DEFAULT }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRank {
    pub point: BlochVector,
    pub rank: usize,
}

/// Fields spanning the drift-preserved algebra at generic points.
///
/// A bracket joins the basis only if it raises the pointwise rank; a
/// bracket that does not is a combination of basis fields with
/// state-dependent coefficients, and so are all its further brackets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LieBasis {
    pub fields: Vec<PolyVectorField>,
    pub provenance: Vec<String>,
    pub pointwise_ranks: Vec<PointRank>,
    /// False when the last permitted round still admitted a field.
    pub converged: bool,
    pub rounds: usize,
}

impl LieBasis {
    pub fn rank_at(&self, v: BlochVector, rel: f64) -> usize {
        let vecs: Vec<[f64; 3]> = self.fields.iter().map(|f| f.eval(v.to_array())).collect();
        pointwise_rank(&vecs, rel)
    }

    pub fn max_rank(&self) -> usize {
        self.pointwise_ranks.iter().map(|p| p.rank).max().unwrap_or(0)
    }
}

/// Drift generators, one per channel part: `F` where the channel has an
/// unobserved share, `F + D` where it has an observed one, and the
/// Hamiltonian on its own.
fn drift_generators(model: &ModelSpec) -> Vec<(String, PolyVectorField)> {
    let mut out = Vec::new();
    if model.hamiltonian.frobenius_norm() > 0.0 {
        out.push(("H".to_string(), h_field(&model.hamiltonian)));
    }
    for (j, ch) in model.channels.iter().enumerate() {
        let f = f_field(&ch.operator);
        if ch.efficiency < 1.0 {
            out.push((format!("F{j}"), f.clone()));
        }
        if ch.efficiency > 0.0 {
            out.push((format!("S{j}"), &f + &d_field(&ch.operator)));
        }
    }
    out
}

struct Builder<'a> {
    opts: &'a ClosureOptions,
    points: Vec<BlochVector>,
    fields: Vec<PolyVectorField>,
    provenance: Vec<String>,
    rank: usize,
}

impl Builder<'_> {
    fn rank_with(&self, extra: Option<&PolyVectorField>) -> usize {
        self.points
            .iter()
            .map(|p| {
                let mut vecs: Vec<[f64; 3]> = self.fields.iter().map(|f| f.eval(p.to_array())).collect();
                if let Some(e) = extra {
                    vecs.push(e.eval(p.to_array()));
                }
                pointwise_rank(&vecs, self.opts.tolerances.rank)
            })
            .max()
            .unwrap_or(0)
    }

    fn offer(&mut self, field: PolyVectorField, name: String) -> bool {
        if field.is_zero() || self.rank >= 3 {
            return false;
        }
        let r = self.rank_with(Some(&field));
        if r > self.rank {
            self.fields.push(field);
            self.provenance.push(name);
            self.rank = r;
            true
        } else {
            false
        }
    }

    fn bracket(&self, a: &PolyVectorField, b: &PolyVectorField, name: &str) -> Result<PolyVectorField> {
        lie_bracket_capped(a, b, self.opts.degree_cap, self.opts.tolerances.coefficient, name)
    }
}

pub fn lie_closure(model: &ModelSpec) -> Result<LieBasis> {
    lie_closure_with(model, &ClosureOptions::default())
}

pub fn lie_closure_with(model: &ModelSpec, opts: &ClosureOptions) -> Result<LieBasis> {
    if model.channels.is_empty() {
        return Err(Error::InvalidArgument("model has no channels".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut b = Builder {
        opts,
        points: sample_interior_points(&mut rng, opts.admission_points.max(1)),
        fields: Vec::new(),
        provenance: Vec::new(),
        rank: 0,
    };
    for (j, ch) in model.channels.iter().enumerate() {
        if ch.efficiency > 0.0 {
            b.offer(g_field(&ch.operator).cleaned(opts.tolerances.coefficient), format!("G{j}"));
        }
    }
    let drifts = drift_generators(model);
    let mut converged = b.fields.is_empty();
    let mut rounds = 0;
    while !converged && rounds < opts.depth && b.rank < 3 {
        rounds += 1;
        let snapshot: Vec<(PolyVectorField, String)> =
            b.fields.iter().cloned().zip(b.provenance.iter().cloned()).collect();
        let mut admitted = false;
        for i in 0..snapshot.len() {
            for j in i + 1..snapshot.len() {
                let name = format!("[{},{}]", snapshot[i].1, snapshot[j].1);
                let f = b.bracket(&snapshot[i].0, &snapshot[j].0, &name)?;
                admitted |= b.offer(f, name);
            }
        }
        for (dn, d) in &drifts {
            for (f, fname) in &snapshot {
                let name = format!("[{dn},{fname}]");
                let br = b.bracket(d, f, &name)?;
                admitted |= b.offer(br, name);
            }
        }
        converged = !admitted || b.rank >= 3;
    }
    let tol = opts.tolerances.rank;
    let pointwise_ranks = b
        .points
        .iter()
        .map(|&p| {
            let vecs: Vec<[f64; 3]> = b.fields.iter().map(|f| f.eval(p.to_array())).collect();
            PointRank { point: p, rank: pointwise_rank(&vecs, tol) }
        })
        .collect();
    Ok(LieBasis { fields: b.fields, provenance: b.provenance, pointwise_ranks, converged, rounds })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    ExactRank,
    McCorroborated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionOptions {
    /// Independent parameter draws; the verdict is the largest rank.
    pub draws: usize,
    /// Run the Monte Carlo cloud check even when the closure converged.
    pub always_corroborate: bool,
    pub closure: ClosureOptions,
}

impl Default for DimensionOptions {
    fn default() -> Self {
        Self { draws: 3, always_corroborate: false, closure: ClosureOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionVerdict {
    pub dimension: usize,
    pub confidence: Confidence,
    pub sample_points: Vec<BlochVector>,
    /// Basis provenance of the first draw.
    pub provenance: Vec<String>,
    /// Largest pointwise rank in each draw.
    pub draw_ranks: Vec<usize>,
    pub converged: bool,
    pub monte_carlo: Option<McDimension>,
    /// Set when draws or the Monte Carlo check disagree.
    pub discrepancy: Option<String>,
}

/// Rescales each channel operator by a random positive factor; efficiencies
/// strictly inside (0, 1) are redrawn there as well.
fn perturbed(model: &ModelSpec, rng: &mut impl Rng) -> Result<ModelSpec> {
    let channels = model
        .channels
        .iter()
        .map(|ch| {
            let w: f64 = rng.random_range(0.5..2.0);
            let eta = if ch.efficiency > 0.0 && ch.efficiency < 1.0 { rng.random_range(0.05..0.95) } else { ch.efficiency };
            LindbladChannel::new(ch.operator.scale_re(w.sqrt()), eta)
        })
        .collect::<Result<Vec<_>>>()?;
    ModelSpec::new(model.hamiltonian.scale_re(rng.random_range(0.5..2.0)), channels)
}

pub fn dimension(model: &ModelSpec, sample_count: usize, seed: u64) -> Result<DimensionVerdict> {
    dimension_with(model, sample_count, seed, &DimensionOptions::default())
}

pub fn dimension_with(model: &ModelSpec, sample_count: usize, seed: u64, opts: &DimensionOptions) -> Result<DimensionVerdict> {
    if sample_count < 10 {
        return Err(Error::InvalidArgument(format!("sample_count must be at least 10, got {sample_count}")));
    }
    let draws = opts.draws.max(1);
    let per_draw = (0..draws)
        .into_par_iter()
        .map(|d| -> Result<(usize, Vec<BlochVector>, LieBasis)> {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, d as u64));
            let m = if d == 0 { model.clone() } else { perturbed(model, &mut rng)? };
            let closure = ClosureOptions { seed: rng.random(), ..opts.closure };
            let basis = lie_closure_with(&m, &closure)?;
            let points = sample_interior_points(&mut rng, sample_count);
            let rank = points.iter().map(|&p| basis.rank_at(p, closure.tolerances.rank)).max().unwrap_or(0);
            Ok((rank, points, basis))
        })
        .collect::<Result<Vec<_>>>()?;

    let draw_ranks: Vec<usize> = per_draw.iter().map(|d| d.0).collect();
    let converged = per_draw.iter().all(|d| d.2.converged);
    let mut dimension = draw_ranks.iter().copied().max().unwrap_or(0);
    let mut discrepancy = (draw_ranks.iter().any(|&r| r != dimension))
        .then(|| format!("draws disagree: ranks {draw_ranks:?}"));
    let (_, points0, basis0) = per_draw.into_iter().next().expect("at least one draw");

    let mut monte_carlo = None;
    let mut confidence = Confidence::ExactRank;
    if !converged || opts.always_corroborate {
        let mc = mc_dimension(model, points0[0], derive_seed(seed, 0x4d43))?;
        if mc.dimension != dimension {
            let note = format!("Monte Carlo cloud suggests dimension {} against rank {}", mc.dimension, dimension);
            discrepancy = Some(match discrepancy {
                Some(d) => format!("{d}; {note}"),
                None => note,
            });
        }
        if !converged {
            dimension = dimension.max(mc.dimension);
            confidence = Confidence::McCorroborated;
        }
        monte_carlo = Some(mc);
    }
    Ok(DimensionVerdict {
        dimension,
        confidence,
        sample_points: points0,
        provenance: basis0.provenance,
        draw_ranks,
        converged,
        monte_carlo,
        discrepancy,
    })
}

/// Dimension estimate from a short Monte Carlo cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McDimension {
    pub dimension: usize,
    pub start: BlochVector,
    /// Principal variances of the fine cloud, largest first.
    pub variances: [f64; 3],
    /// Residual rms of the fine cloud off a cubic graph over the first `k`
    /// principal coordinates, relative to the cloud rms, for `k = 0, 1, 2`.
    pub relative_residuals: [f64; 3],
    /// The same residuals for the coarse cloud driven by the same Brownian
    /// paths.
    pub coarse_residuals: [f64; 3],
    /// A residual counts as noise when refining shrinks it below this
    /// fraction of its coarse value.
    pub refine_ratio: f64,
    pub n: usize,
    /// Horizon and steps in model time, after rescaling to the reference
    /// rate.
    pub dt: f64,
    pub coarse_dt: f64,
    pub horizon: f64,
}

/// Speed of a model: `Σ ‖L₀‖² + |c|‖L₀‖` over channels `L = L₀ + cI`
/// with `L₀` traceless, plus `‖H₀‖`. Scaling `L → sL`, `H → s²H` scales it
/// by `s²`, the same factor by which time runs faster.
fn model_rate(model: &ModelSpec) -> f64 {
    let traceless = |m: &ComplexMatrix2| {
        let c = m.trace() * 0.5;
        (*m - ComplexMatrix2::identity() * c, c.norm())
    };
    let (h0, _) = traceless(&model.hamiltonian);
    let mut rate = h0.frobenius_norm();
    for ch in &model.channels {
        let (l0, c) = traceless(&ch.operator);
        let n = l0.frobenius_norm();
        rate += n * n + c * n;
    }
    rate
}

const MC_N: usize = 2000;
const MC_DT: f64 = 1e-5;
const MC_COARSEN: u32 = 8;
const MC_HORIZON: f64 = 0.01;
/// Rate of σ_z, the model the horizon is quoted for.
const MC_REFERENCE_RATE: f64 = 2.0;
/// Scheme error off the support scales like `√dt`, giving 0.35 for an
/// eightfold refinement; spread the model itself produces stays near 1.
const MC_REFINE_RATIO: f64 = 0.6;
const MC_ZERO: f64 = 1e-9;

struct Cloud {
    variances: [f64; 3],
    residuals: [f64; 3],
}

fn cloud(model: &ModelSpec, rho0: &DensityMatrix, dt: f64, horizon: f64, substeps: u32, seed: u64) -> Result<Cloud> {
    let opts = SimOptions { substeps, ..SimOptions::endpoints() };
    let ens = simulate_ensemble_with(model, rho0, dt, horizon, MC_N, seed, opts)?;
    let pts: Vec<[f64; 3]> = ens.final_states().iter().map(|v| v.to_array()).collect();
    let n = pts.len() as f64;
    let mut mean = [0.0; 3];
    for p in &pts {
        for k in 0..3 {
            mean[k] += p[k] / n;
        }
    }
    let mut cov = nalgebra::Matrix3::<f64>::zeros();
    for p in &pts {
        let d = nalgebra::Vector3::new(p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]);
        cov += d * d.transpose() / n;
    }
    let eig = cov.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let variances = order.map(|i| eig.eigenvalues[i].max(0.0));
    let total: f64 = variances.iter().sum();
    let coords: Vec<[f64; 3]> = pts
        .iter()
        .map(|p| {
            let d = nalgebra::Vector3::new(p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]);
            order.map(|i| eig.eigenvectors.column(i).dot(&d))
        })
        .collect();
    let mut residuals = [0.0; 3];
    if total > 0.0 {
        for (k, slot) in residuals.iter_mut().enumerate() {
            *slot = (graph_residual(&coords, k) / total).sqrt();
        }
    }
    Ok(Cloud { variances, residuals })
}

/// Counts the directions a short-horizon cloud spreads into.
///
/// The cloud is rotated to principal axes and the coordinates past the
/// first `k` are fitted as cubic functions of those `k`. The fit residual
/// mixes genuine spread with the scheme's drift off the support, so the
/// cloud is recomputed at a coarser step from the same Brownian paths: the
/// dimension is the smallest `k` whose residual vanishes or shrinks under
/// refinement.
///
/// The horizon and step are quoted for the rate of σ_z and stretched by
/// the model's own rate, so large operators do not spread the cloud over a
/// patch too wide for the fit.
///
/// Directions reached only through brackets open up like `t^{3/2}` and can
/// stay below the scheme error at this horizon, so the count is a lower
/// bound on the support dimension.
pub fn mc_dimension(model: &ModelSpec, start: BlochVector, seed: u64) -> Result<McDimension> {
    let rho0 = DensityMatrix::from_bloch(start)?;
    let rate = model_rate(model);
    let stretch = if rate > 0.0 { MC_REFERENCE_RATE / rate } else { 1.0 };
    let (dt, horizon) = (MC_DT * stretch, MC_HORIZON * stretch);
    let coarse_dt = dt * MC_COARSEN as f64;
    let fine = cloud(model, &rho0, dt, horizon, 1, seed)?;
    let coarse = cloud(model, &rho0, coarse_dt, horizon, MC_COARSEN, seed)?;
    let dimension = (0..3)
        .position(|k| {
            let (f, c) = (fine.residuals[k], coarse.residuals[k]);
            f <= MC_ZERO || f <= MC_REFINE_RATIO * c
        })
        .unwrap_or(3);
    Ok(McDimension {
        dimension,
        start,
        variances: fine.variances,
        relative_residuals: fine.residuals,
        coarse_residuals: coarse.residuals,
        refine_ratio: MC_REFINE_RATIO,
        n: MC_N,
        dt,
        coarse_dt,
        horizon,
    })
}

/// Mean squared residual of coordinates `k..3` fitted by cubic polynomials
/// in coordinates `0..k`.
fn graph_residual(coords: &[[f64; 3]], k: usize) -> f64 {
    let n = coords.len();
    let features = |c: &[f64; 3]| -> Vec<f64> {
        let mut f = vec![1.0];
        match k {
            0 => {}
            1 => f.extend([c[0], c[0] * c[0], c[0].powi(3)]),
            _ => {
                let (a, b) = (c[0], c[1]);
                f.extend([a, b, a * a, a * b, b * b, a.powi(3), a * a * b, a * b * b, b.powi(3)]);
            }
        }
        f
    };
    let p = features(&coords[0]).len();
    let a = nalgebra::DMatrix::from_fn(n, p, |i, j| features(&coords[i])[j]);
    let svd = a.clone().svd(true, true);
    let mut sse = 0.0;
    for target in k..3 {
        let b = nalgebra::DVector::from_fn(n, |i, _| coords[i][target]);
        let x = svd.solve(&b, 1e-12).expect("SVD with vectors");
        sse += (&a * x - b).norm_squared();
    }
    sse / n as f64
}

/// `U L U†`.
pub(crate) fn rotate_operator(l: &ComplexMatrix2, u: &ComplexMatrix2) -> ComplexMatrix2 {
    *u * *l * u.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::ComplexMatrix2;
    use crate::sde::{preset, Preset};

    fn start() -> BlochVector {
        BlochVector::from_array([0.3, -0.2, 0.5])
    }

    #[test]
    fn monte_carlo_dimension_of_known_models() {
        let cases = [
            (preset(Preset::HoH, 1.0).unwrap(), 1),
            (preset(Preset::HoN, 0.5).unwrap(), 1),
            (preset(Preset::HeN, 1.0).unwrap(), 2),
            (preset(Preset::HeH, 0.5).unwrap(), 2),
        ];
        for (i, (model, expected)) in cases.into_iter().enumerate() {
            let mc = mc_dimension(&model, start(), 40 + i as u64).unwrap();
            assert_eq!(mc.dimension, expected, "case {i}: {mc:?}");
        }
    }

    #[test]
    fn monte_carlo_misses_bracket_directions() {
        // Rank 2 and 3, but the bracket direction stays under the scheme
        // error at the short horizon.
        let l = ComplexMatrix2::sigma_z() + ComplexMatrix2::sigma_minus();
        for eta in [1.0, 0.5] {
            let m = ModelSpec::from_pairs(&[(l, eta)]).unwrap();
            let mc = mc_dimension(&m, start(), 3).unwrap();
            assert_eq!(mc.dimension, 1, "{mc:?}");
            assert!(mc.relative_residuals[1] < MC_REFINE_RATIO * mc.coarse_residuals[1]);
        }
    }

    #[test]
    fn horizon_follows_operator_scale() {
        let small = preset(Preset::HoH, 1.0).unwrap();
        let big = ModelSpec::from_pairs(&[(ComplexMatrix2::sigma_z() * 3.0, 1.0)]).unwrap();
        let (a, b) = (mc_dimension(&small, start(), 1).unwrap(), mc_dimension(&big, start(), 1).unwrap());
        assert!((a.horizon / b.horizon - 9.0).abs() < 1e-12);
        assert!((a.variances[0] - b.variances[0]).abs() < 1e-12);
        assert_eq!(b.dimension, 1);
    }

    #[test]
    fn closure_is_deterministic() {
        let m = preset(Preset::HeH, 0.4).unwrap();
        assert_eq!(lie_closure(&m).unwrap(), lie_closure(&m).unwrap());
        assert_eq!(dimension(&m, 12, 9).unwrap(), dimension(&m, 12, 9).unwrap());
    }

    #[test]
    fn corroboration_attaches_monte_carlo() {
        let m = preset(Preset::HoH, 1.0).unwrap();
        let opts = DimensionOptions { always_corroborate: true, ..DimensionOptions::default() };
        let v = dimension_with(&m, 12, 5, &opts).unwrap();
        assert_eq!(v.dimension, 1);
        assert_eq!(v.monte_carlo.as_ref().map(|mc| mc.dimension), Some(1));
        // A converged closure keeps its exact verdict.
        assert_eq!(v.confidence, Confidence::ExactRank);
        assert!(v.discrepancy.is_none());
    }

    #[test]
    fn unitary_rotation_leaves_dimension_unchanged() {
        let u = crate::accessibility::euler_unitary(0.4, 1.1, -0.7);
        let l = ComplexMatrix2::sigma_z() + ComplexMatrix2::sigma_minus();
        let m = ModelSpec::from_pairs(&[(rotate_operator(&l, &u), 1.0)]).unwrap();
        assert_eq!(dimension(&m, 12, 1).unwrap().dimension, 2);
    }

    #[test]
    fn empty_model_is_rejected() {
        let m = ModelSpec { channels: vec![], hamiltonian: ComplexMatrix2::zero() };
        assert!(lie_closure(&m).is_err());
    }
}
