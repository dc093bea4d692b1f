//! Fixture table of channel sets with known support dimension.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::closure::rotate_operator;
use super::{curve_criterion, dimension, euler_unitary, mc_dimension, DimensionVerdict, McDimension};
use crate::error::Result;
use crate::qubit::{BlochVector, ComplexMatrix2, DensityMatrix, ModelSpec};
use crate::sde::{simulate_ensemble_with, SimOptions};

/// Seed behind every random draw of the catalog run.
pub const CATALOG_SEED: u64 = 0xca7a_1095;
const SAMPLES: usize = 30;

/// Quantity expected to carry no noise along simulated paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Conserved {
    /// `x² + y² + z²`.
    Purity,
    /// `(1 − |v|²)/(y + β)²`.
    SurfaceRatio { beta: f64 },
}

impl Conserved {
    pub fn eval(&self, v: [f64; 3]) -> f64 {
        let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        match *self {
            Conserved::Purity => r2,
            Conserved::SurfaceRatio { beta } => (1.0 - r2) / (v[1] + beta).powi(2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub id: String,
    pub description: String,
    pub draw: usize,
    pub model: ModelSpec,
    pub expected: usize,
    /// For single-channel rows: whether the curve condition should hold.
    pub expected_curve: Option<bool>,
    pub conserved: Option<(Conserved, BlochVector)>,
}

/// Quadratic variation of a conserved quantity against that of `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationCheck {
    pub quantity: Conserved,
    pub start: BlochVector,
    pub qv_quantity: f64,
    pub qv_reference: f64,
    /// Ratio at the coarse step.
    pub coarse_ratio: f64,
    /// Ratio at the refined step.
    pub ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogRow {
    pub id: String,
    pub description: String,
    pub draw: usize,
    pub expected: usize,
    pub observed: usize,
    pub curve: Option<bool>,
    pub expected_curve: Option<bool>,
    pub simulation: Option<SimulationCheck>,
    /// Cloud check for rows below full dimension without a named invariant:
    /// the cloud must not spread into more directions than predicted.
    pub monte_carlo: Option<McDimension>,
    pub verdict: DimensionVerdict,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogReport {
    pub rows: Vec<CatalogRow>,
    pub passed: usize,
    pub failed: usize,
    pub all_pass: bool,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sx() -> ComplexMatrix2 {
    ComplexMatrix2::sigma_x()
}
fn sy() -> ComplexMatrix2 {
    ComplexMatrix2::sigma_y()
}
fn sz() -> ComplexMatrix2 {
    ComplexMatrix2::sigma_z()
}
fn sm() -> ComplexMatrix2 {
    ComplexMatrix2::sigma_minus()
}
fn id(a: Complex64) -> ComplexMatrix2 {
    ComplexMatrix2::identity() * a
}
fn i() -> Complex64 {
    c(0.0, 1.0)
}

struct Table {
    rng: ChaCha8Rng,
    rows: Vec<Fixture>,
}

impl Table {
    fn angle(&mut self) -> f64 {
        self.rng.random_range(0.1..PI - 0.1)
    }

    fn real(&mut self) -> f64 {
        self.rng.random_range(-1.0..1.0)
    }

    fn complex(&mut self) -> Complex64 {
        c(self.real(), self.real())
    }

    fn unitary(&mut self, draw: usize) -> ComplexMatrix2 {
        if draw == 0 {
            return ComplexMatrix2::identity();
        }
        let (a, b, cc) = (self.rng.random_range(0.0..2.0 * PI), self.rng.random_range(0.0..PI), self.rng.random_range(0.0..4.0 * PI));
        euler_unitary(a, b, cc)
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        id: &str,
        description: &str,
        draw: usize,
        pairs: &[(ComplexMatrix2, f64)],
        expected: usize,
        conserved: Option<(Conserved, BlochVector)>,
    ) -> Result<()> {
        let u = self.unitary(if conserved.is_some() { 0 } else { draw });
        let pairs: Vec<(ComplexMatrix2, f64)> = pairs.iter().map(|(l, e)| (rotate_operator(l, &u), *e)).collect();
        let expected_curve = (pairs.len() == 1).then_some(expected <= 1);
        self.rows.push(Fixture {
            id: id.to_string(),
            description: description.to_string(),
            draw,
            model: ModelSpec::from_pairs(&pairs)?,
            expected,
            expected_curve,
            conserved,
        });
        Ok(())
    }
}

fn pick_beta(t: &mut Table) -> f64 {
    // Away from 0 and ±1, where the operator is normal or a ladder operator.
    let b = if t.rng.random_bool(0.5) { t.rng.random_range(0.2..0.8) } else { t.rng.random_range(1.3..2.0) };
    if t.rng.random_bool(0.5) {
        b
    } else {
        -b
    }
}

/// All fixtures, deterministic.
pub fn catalog_fixtures() -> Result<Vec<Fixture>> {
    let mut t = Table { rng: ChaCha8Rng::seed_from_u64(CATALOG_SEED), rows: Vec::new() };

    // Single channels on a curve.
    t.push("single-lowering", "σ_−, η = 0.5", 0, &[(sm(), 0.5)], 1, None)?;
    t.push("single-lowering-observed", "σ_−, η = 1", 0, &[(sm(), 1.0)], 1, None)?;
    t.push("single-dephasing", "σ_z, η = 0.5", 0, &[(sz(), 0.5)], 1, None)?;
    t.push("single-shifted-dephasing", "3σ_z + (2+i)I, η = 0.7", 0, &[(sz() * 3.0 + id(c(2.0, 1.0)), 0.7)], 1, None)?;
    for d in 0..3 {
        let (c0, c1, c2, c3) = (t.complex(), t.complex(), t.complex(), t.complex());
        t.push(
            "shared-dephasing-axis",
            "c₀σ_z + c_jI for three channels",
            d,
            &[(sz() * c0 + id(c1), 0.3), (sz() * c0 + id(c2), 0.8), (sz() * c0 + id(c3), 1.0)],
            1,
            None,
        )?;
    }

    // Single channels reaching two dimensions only when fully observed.
    for d in 0..3 {
        let (s, beta, r) = (t.rng.random_range(0.5..2.0), pick_beta(&mut t), t.real());
        let l = (sx() + sy() * (i() * beta) + id(c(r, 0.0))) * s;
        t.push("real-shift-observed", "s(σ_x + iβσ_y + rI), η = 1", d, &[(l, 1.0)], 2, None)?;
        t.push("real-shift-partial", "s(σ_x + iβσ_y + rI), η = 0.5", d, &[(l, 0.5)], 3, None)?;
        let (s, r): (f64, f64) = (t.rng.random_range(0.5..2.0), t.rng.random_range(0.2..1.5) * if t.rng.random_bool(0.5) { 1.0 } else { -1.0 });
        let l = (sx() + sy() * (i() * (1.0 + r * r).sqrt()) + id(c(0.0, r))) * s;
        t.push("imaginary-shift-observed", "s(σ_x + i√(1+r²)σ_y + irI), η = 1", d, &[(l, 1.0)], 2, None)?;
        t.push("imaginary-shift-partial", "s(σ_x + i√(1+r²)σ_y + irI), η = 0.5", d, &[(l, 0.5)], 3, None)?;
    }
    let l = sz() + sm();
    t.push("dephasing-plus-lowering-partial", "σ_z + σ_−, η = 0.5", 0, &[(l, 0.5)], 3, None)?;
    t.push(
        "dephasing-plus-lowering-observed",
        "σ_z + σ_−, η = 1",
        0,
        &[(l, 1.0)],
        2,
        Some((Conserved::SurfaceRatio { beta: 0.0 }, BlochVector::from_array([0.2, 0.4, 0.1]))),
    )?;
    t.push("lowering-plus-skew-x", "σ_− + iσ_x, η = 1", 0, &[(sm() + sx() * i(), 1.0)], 3, None)?;

    // Heterodyne pairs {L, iL}.
    t.push("heterodyne-lowering", "{σ_−, iσ_−}, η = 0.5", 0, &[(sm(), 0.5), (sm() * i(), 0.5)], 2, None)?;
    t.push("heterodyne-dephasing", "{σ_z, iσ_z}, η = 0.5", 0, &[(sz(), 0.5), (sz() * i(), 0.5)], 2, None)?;
    for d in 0..3 {
        let (s, beta, r) = (t.rng.random_range(0.5..2.0), pick_beta(&mut t), t.real());
        let l = (sx() + sy() * (i() * beta) + id(c(r, 0.0))) * s;
        t.push("heterodyne-real-shift", "{L, iL} with L = s(σ_x + iβσ_y + rI), η = 1", d, &[(l, 1.0), (l * i(), 1.0)], 3, None)?;
    }

    // Several partially observed channels.
    for (d, eta) in [0.3, 0.7].into_iter().enumerate() {
        let (b1, b2, a1, a2) = (t.complex(), t.complex(), t.complex(), t.complex());
        t.push("common-dephasing-axis", "β_kσ_z + α_kI, two channels", d, &[(sz() * b1 + id(a1), eta), (sz() * b2 + id(a2), eta)], 2, None)?;
        let (b1, b2) = (t.complex(), t.complex());
        t.push("common-lowering", "β_kσ_−, two channels", d, &[(sm() * b1, eta), (sm() * b2, eta)], 2, None)?;
    }
    let th = PI / 3.0;
    t.push(
        "hermitian-axes-partial",
        "σ_z and cos θσ_z + sin θσ_x, θ = π/3, η = 0.5",
        0,
        &[(sz(), 0.5), (sz() * th.cos() + sx() * th.sin(), 0.5)],
        3,
        None,
    )?;
    t.push("dephasing-and-lowering-partial", "σ_z and σ_−, η = 0.5", 0, &[(sz(), 0.5), (sm(), 0.5)], 3, None)?;

    // Unobserved dephasing next to observed emission.
    for (d, eta) in [0.3, 0.7].into_iter().enumerate() {
        t.push("dephasing-unobserved-homodyne", "σ_z (η = 0) and σ_−", d, &[(sz(), 0.0), (sm(), eta)], 2, None)?;
        t.push(
            "dephasing-unobserved-heterodyne",
            "σ_z (η = 0), σ_− and iσ_−",
            d,
            &[(sz(), 0.0), (sm(), eta), (sm() * i(), eta)],
            3,
            None,
        )?;
    }

    // Fully observed pairs confined to surfaces.
    for d in 0..3 {
        let (th, r1, r2) = (t.angle(), t.real(), t.real());
        t.push(
            "pair-hermitian-axes",
            "σ_z + r₁I and cos θσ_z + sin θσ_x + r₂I",
            d,
            &[(sz() + id(c(r1, 0.0)), 1.0), (sz() * th.cos() + sx() * th.sin() + id(c(r2, 0.0)), 1.0)],
            2,
            None,
        )?;
        let (c1, r2) = (t.complex(), t.real());
        t.push(
            "pair-skew-and-hermitian",
            "iσ_z + c₁I and σ_x + r₂I",
            d,
            &[(sz() * i() + id(c1), 1.0), (sx() + id(c(r2, 0.0)), 1.0)],
            2,
            None,
        )?;
        let (th, c1, c2) = (t.angle(), t.complex(), t.complex());
        let start = BlochVector::from_array([0.3, -0.2, 0.5]);
        t.push(
            "pair-skew-axes",
            "iσ_z + c₁I and i(cos θσ_z + sin θσ_x) + c₂I",
            d,
            &[(sz() * i() + id(c1), 1.0), ((sz() * th.cos() + sx() * th.sin()) * i() + id(c2), 1.0)],
            2,
            (d == 0).then_some((Conserved::Purity, start)),
        )?;
        let (t1, t2, r1, r2) = (t.angle(), t.angle(), t.real(), t.real());
        t.push(
            "pair-shift-and-hermitian",
            "cos θ₁σ_x + i sin θ₁σ_y + r₁I and cos θ₂σ_x + sin θ₂σ_z + r₂I",
            d,
            &[
                (sx() * t1.cos() + sy() * (i() * t1.sin()) + id(c(r1, 0.0)), 1.0),
                (sx() * t2.cos() + sz() * t2.sin() + id(c(r2, 0.0)), 1.0),
            ],
            2,
            None,
        )?;
        let (th, r1, c2) = (t.angle(), t.real(), t.complex());
        t.push(
            "pair-shift-and-skew",
            "cos θσ_x + i sin θσ_y + r₁I and iσ_y + c₂I",
            d,
            &[(sx() * th.cos() + sy() * (i() * th.sin()) + id(c(r1, 0.0)), 1.0), (sy() * i() + id(c2), 1.0)],
            2,
            None,
        )?;
        let (th, b1, b2, r1, r2) = (t.angle(), t.real(), t.real(), t.real(), t.real());
        t.push(
            "pair-common-skew-axis",
            "σ_x + iβ₁σ_y + r₁I and cos θσ_x + sin θσ_z + iβ₂σ_y + r₂I",
            d,
            &[
                (sx() + sy() * (i() * b1) + id(c(r1, 0.0)), 1.0),
                (sx() * th.cos() + sz() * th.sin() + sy() * (i() * b2) + id(c(r2, 0.0)), 1.0),
            ],
            2,
            None,
        )?;
        let (t1, t2) = (t.angle(), t.angle());
        let phi = t1 - t2;
        t.push(
            "pair-tilted-skew",
            "cos θ₁σ_x + iσ_y + i sin θ₁I and cos θ₂σ_x + i(cos φσ_y + sin φσ_z) + i sin θ₂I, φ = θ₁ − θ₂",
            d,
            &[
                (sx() * t1.cos() + sy() * i() + id(c(0.0, t1.sin())), 1.0),
                (sx() * t2.cos() + (sy() * phi.cos() + sz() * phi.sin()) * i() + id(c(0.0, t2.sin())), 1.0),
            ],
            2,
            None,
        )?;
    }
    Ok(t.rows)
}

const SIM_N: usize = 20;
const SIM_DT: f64 = 1e-4;
const SIM_REFINE: f64 = 10.0;
const SIM_HORIZON: f64 = 0.2;
const SIM_THRESHOLD: f64 = 1e-2;
/// A conserved quantity only varies through the O(dt) error of the scheme,
/// so refining dt tenfold must cut the ratio at least this much.
const SIM_DECAY: f64 = 0.3;

fn qv_ratio(model: &ModelSpec, q: Conserved, rho0: &DensityMatrix, dt: f64, seed: u64) -> Result<(f64, f64, f64)> {
    let ens = simulate_ensemble_with(model, rho0, dt, SIM_HORIZON, SIM_N, seed, SimOptions::default())?;
    let (mut qv_q, mut qv_z) = (0.0, 0.0);
    for tr in &ens.trajectories {
        for w in tr.points.windows(2) {
            let (a, b) = (w[0].state.to_array(), w[1].state.to_array());
            qv_q += (q.eval(b) - q.eval(a)).powi(2);
            qv_z += (b[2] - a[2]).powi(2);
        }
    }
    // Normalise the quantity's variation by its size.
    let scale = q.eval(rho0.bloch().to_array()).abs().max(1e-12);
    Ok((qv_q, qv_z, (qv_q / scale.powi(2)) / qv_z.max(1e-300)))
}

/// Quadratic variation of `q` against that of `z` over a small ensemble, at
/// two step sizes.
fn simulation_check(model: &ModelSpec, q: Conserved, start: BlochVector, seed: u64) -> Result<SimulationCheck> {
    let rho0 = DensityMatrix::from_bloch(start)?;
    let (_, _, coarse) = qv_ratio(model, q, &rho0, SIM_DT, seed)?;
    let (qv_q, qv_z, ratio) = qv_ratio(model, q, &rho0, SIM_DT / SIM_REFINE, seed)?;
    Ok(SimulationCheck {
        quantity: q,
        start,
        qv_quantity: qv_q,
        qv_reference: qv_z,
        coarse_ratio: coarse,
        ratio,
        threshold: SIM_THRESHOLD,
        pass: ratio <= SIM_THRESHOLD || ratio <= SIM_DECAY * coarse,
    })
}

fn run_fixture(f: &Fixture, index: usize) -> Result<CatalogRow> {
    let seed = CATALOG_SEED ^ (index as u64).wrapping_mul(0x9e37_79b9);
    let verdict = dimension(&f.model, SAMPLES, seed)?;
    let curve = match f.model.channels.as_slice() {
        [one] => Some(curve_criterion(&one.operator)?.curve),
        _ => None,
    };
    let simulation = match f.conserved {
        Some((q, start)) => Some(simulation_check(&f.model, q, start, seed)?),
        None => None,
    };
    let monte_carlo = match (f.conserved, f.expected) {
        (None, d) if d < 3 => Some(mc_dimension(&f.model, verdict.sample_points[0], seed)?),
        _ => None,
    };
    let pass = verdict.dimension == f.expected
        && curve == f.expected_curve
        && simulation.as_ref().is_none_or(|s| s.pass)
        && monte_carlo.as_ref().is_none_or(|mc| mc.dimension <= f.expected);
    Ok(CatalogRow {
        id: f.id.clone(),
        description: f.description.clone(),
        draw: f.draw,
        expected: f.expected,
        observed: verdict.dimension,
        curve,
        expected_curve: f.expected_curve,
        simulation,
        monte_carlo,
        verdict,
        pass,
    })
}

/// Runs `dimension` on every fixture.
pub fn catalog_check() -> Result<CatalogReport> {
    let fixtures = catalog_fixtures()?;
    let rows = fixtures
        .par_iter()
        .enumerate()
        .map(|(k, f)| run_fixture(f, k))
        .collect::<Result<Vec<_>>>()?;
    let passed = rows.iter().filter(|r| r.pass).count();
    let failed = rows.len() - passed;
    Ok(CatalogReport { rows, passed, failed, all_pass: failed == 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_deterministic_and_well_formed() {
        let (a, b) = (catalog_fixtures().unwrap(), catalog_fixtures().unwrap());
        assert_eq!(a, b);
        for f in &a {
            assert!((1..=3).contains(&f.expected), "{}", f.id);
            assert_eq!(f.expected_curve.is_some(), f.model.channels.len() == 1, "{}", f.id);
        }
    }

    #[test]
    fn purity_check_flags_a_noisy_quantity() {
        let model = ModelSpec::from_pairs(&[(sm(), 1.0)]).unwrap();
        let start = BlochVector::from_array([0.3, -0.2, 0.5]);
        let s = simulation_check(&model, Conserved::Purity, start, 7).unwrap();
        assert!(!s.pass, "{s:?}");
        assert!(s.ratio > 0.1);
    }

    #[test]
    fn purity_check_accepts_rotation_noise() {
        let model = ModelSpec::from_pairs(&[(sz() * i(), 1.0)]).unwrap();
        let start = BlochVector::from_array([0.3, -0.2, 0.5]);
        let s = simulation_check(&model, Conserved::Purity, start, 7).unwrap();
        assert!(s.pass, "{s:?}");
        assert!(s.ratio < s.coarse_ratio);
    }
}
