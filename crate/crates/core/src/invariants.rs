//! Deterministically evolving coordinates of the four standard setups.
//!
//! | kind     | expression                    | law                          |
//! |----------|-------------------------------|------------------------------|
//! | `BHeh`   | r²/(1−z²)                     | b₀ e^{−8(1−η)t}              |
//! | `CHen`   | (1+z−r²/2)/(1+z)²             | (c₀−η/2)e^{2t} + η/2         |
//! | `BHoh`   | r²/(1−z²)                     | b₀ e^{−4(1−η)t}              |
//! | `CHon`   | (1+z−x²/2)/(1+z)²             | (c₀−η/2)e^{t} + η/2          |
//! | `FHon`   | y/(1+z)                       | f₀ e^{t/2}                   |
//!
//! plus the auxiliary coordinates φ, χ, w and the surface quantity
//! `(1−|v|²)/(y+β)²`, which have no evolution law of their own.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubit::BlochVector;
use crate::sde::{Preset, Trajectory};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InvariantKind {
    BHeh,
    CHen,
    BHoh,
    CHon,
    FHon,
    Phi,
    Chi,
    W,
    StrSurfC { beta: f64 },
}

impl InvariantKind {
    pub fn name(&self) -> String {
        match self {
            InvariantKind::BHeh => "B_heh".into(),
            InvariantKind::CHen => "C_hen".into(),
            InvariantKind::BHoh => "B_hoh".into(),
            InvariantKind::CHon => "C_hon".into(),
            InvariantKind::FHon => "F_hon".into(),
            InvariantKind::Phi => "Phi".into(),
            InvariantKind::Chi => "Chi".into(),
            InvariantKind::W => "W".into(),
            InvariantKind::StrSurfC { beta } => format!("StrSurfC({beta})"),
        }
    }

    /// Parses `B_heh`, `c_hen`, ..., `strsurf:0.5`.
    pub fn parse(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if let Some(b) = lower.strip_prefix("strsurf").map(|r| r.trim_start_matches(['c', ':', '='])) {
            let beta: f64 = if b.is_empty() { 0.0 } else { b.parse().map_err(|_| Error::InvalidArgument(format!("bad beta in {s:?}")))? };
            if !beta.is_finite() {
                return Err(Error::InvalidArgument("beta must be finite".into()));
            }
            return Ok(InvariantKind::StrSurfC { beta });
        }
        Ok(match lower.replace('-', "_").as_str() {
            "b_heh" => InvariantKind::BHeh,
            "c_hen" => InvariantKind::CHen,
            "b_hoh" => InvariantKind::BHoh,
            "c_hon" => InvariantKind::CHon,
            "f_hon" => InvariantKind::FHon,
            "phi" => InvariantKind::Phi,
            "chi" => InvariantKind::Chi,
            "w" => InvariantKind::W,
            _ => return Err(Error::InvalidArgument(format!("unknown invariant {s:?}"))),
        })
    }

    /// The invariant with an evolution law under a preset.
    pub fn for_preset(p: Preset) -> Self {
        match p {
            Preset::HeH => InvariantKind::BHeh,
            Preset::HeN => InvariantKind::CHen,
            Preset::HoH => InvariantKind::BHoh,
            Preset::HoN => InvariantKind::CHon,
        }
    }

    pub fn has_law(&self) -> bool {
        matches!(self, InvariantKind::BHeh | InvariantKind::CHen | InvariantKind::BHoh | InvariantKind::CHon | InvariantKind::FHon)
    }
}

fn guard(d: f64, pole: i8, what: &'static str) -> Result<()> {
    if d.abs() < Tolerances::DEFAULT.pole_guard {
        Err(Error::Pole { pole, what })
    } else {
        Ok(())
    }
}

fn need_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::Efficiency(eta))
    }
}

/// Value of an invariant at a Bloch vector.
pub fn eval_invariant(kind: InvariantKind, v: BlochVector, eta: f64) -> Result<f64> {
    v.validate(1e-9)?;
    let BlochVector { x, y, z } = v;
    let r2 = x * x + y * y;
    let zp = 1.0 + z;
    let one_m_z2 = (1.0 - z) * zp;
    match kind {
        InvariantKind::BHeh | InvariantKind::BHoh => {
            guard(one_m_z2, if z > 0.0 { 1 } else { -1 }, "b = r²/(1−z²)")?;
            Ok(r2 / one_m_z2)
        }
        InvariantKind::CHen => {
            guard(zp, -1, "c")?;
            Ok((zp - 0.5 * r2) / (zp * zp))
        }
        InvariantKind::CHon => {
            guard(zp, -1, "c")?;
            Ok((zp - 0.5 * x * x) / (zp * zp))
        }
        InvariantKind::FHon => {
            guard(zp, -1, "f = y/(1+z)")?;
            Ok(y / zp)
        }
        InvariantKind::Phi => {
            need_eta(eta)?;
            guard(zp, -1, "φ")?;
            Ok(r2 / (eta * zp * zp))
        }
        InvariantKind::Chi => {
            need_eta(eta)?;
            guard(zp, -1, "χ")?;
            Ok(x * x / (2.0 * eta * zp * zp))
        }
        InvariantKind::W => {
            guard(one_m_z2, if z > 0.0 { 1 } else { -1 }, "w")?;
            Ok((z / one_m_z2.sqrt()).asinh())
        }
        InvariantKind::StrSurfC { beta } => {
            let d = y + beta;
            if d.abs() < Tolerances::DEFAULT.pole_guard {
                return Err(Error::Singular("(1−|v|²)/(y+β)²"));
            }
            Ok((1.0 - (r2 + z * z)) / (d * d))
        }
    }
}

/// Closed-form value at time `t` of an invariant started at `value0`.
pub fn predict_invariant(kind: InvariantKind, value0: f64, eta: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be non-negative, got {t}")));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Efficiency(eta));
    }
    const SLACK: f64 = 1e-9;
    let range_err = |what: &str| Err(Error::InvalidArgument(format!("{} = {value0} outside admissible range {what}", kind.name())));
    match kind {
        InvariantKind::BHeh | InvariantKind::BHoh => {
            if !(-SLACK..=1.0 + SLACK).contains(&value0) {
                return range_err("[0, 1]");
            }
            let rate = if kind == InvariantKind::BHeh { 8.0 } else { 4.0 };
            Ok(value0 * (-rate * (1.0 - eta) * t).exp())
        }
        InvariantKind::CHen | InvariantKind::CHon => {
            if !(value0 >= 0.5 - SLACK) {
                return range_err("[1/2, ∞)");
            }
            let rate = if kind == InvariantKind::CHen { 2.0 } else { 1.0 };
            Ok((value0 - 0.5 * eta) * (rate * t).exp() + 0.5 * eta)
        }
        InvariantKind::FHon => {
            if !value0.is_finite() {
                return range_err("finite");
            }
            Ok(value0 * (0.5 * t).exp())
        }
        other => Err(Error::NoEvolutionLaw(other.name())),
    }
}

/// `φ = (2/η)(1/(1+z) − c)` on the fluorescence heterodyne manifold.
pub fn phi_from_c(z: f64, c: f64, eta: f64) -> Result<f64> {
    need_eta(eta)?;
    guard(1.0 + z, -1, "φ")?;
    Ok(2.0 / eta * (1.0 / (1.0 + z) - c))
}

/// `z = tanh w`, the inverse of the w coordinate.
pub fn z_from_w(w: f64) -> f64 {
    w.tanh()
}

/// Comparison report of an invariant along a trajectory against its law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfinementReport {
    pub kind: InvariantKind,
    pub eta: f64,
    pub max_residual: f64,
    pub rms_residual: f64,
    /// Normalisation: max(range of the predicted path, |value at t=0|).
    pub scale: f64,
    pub normalized_max: f64,
    pub normalized_rms: f64,
    /// A pole was met; the window ends at the last admissible point.
    pub pole_hit: bool,
    pub predicted_path: Vec<(f64, f64)>,
    pub observed_path: Vec<(f64, f64)>,
}

/// Residuals `|I(v_t) − law(I(v_0), t)|` along a trajectory.
pub fn confinement_check(traj: &Trajectory, kind: InvariantKind, eta: f64) -> Result<ConfinementReport> {
    if !kind.has_law() {
        return Err(Error::NoEvolutionLaw(kind.name()));
    }
    let p0 = traj.initial();
    let value0 = eval_invariant(kind, p0.state, eta)?;
    let t0 = p0.time;
    let mut predicted_path = Vec::with_capacity(traj.points.len());
    let mut observed_path = Vec::with_capacity(traj.points.len());
    let mut pole_hit = false;
    for p in &traj.points {
        let obs = match eval_invariant(kind, p.state, eta) {
            Ok(v) => v,
            Err(Error::Pole { .. }) => {
                pole_hit = true;
                break;
            }
            Err(e) => return Err(e),
        };
        predicted_path.push((p.time, predict_invariant(kind, value0, eta, p.time - t0)?));
        observed_path.push((p.time, obs));
    }
    let (mut max, mut sq) = (0.0f64, 0.0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (&(_, pred), &(_, obs)) in predicted_path.iter().zip(&observed_path) {
        let r = (obs - pred).abs();
        max = max.max(r);
        sq += r * r;
        lo = lo.min(pred);
        hi = hi.max(pred);
    }
    let n = observed_path.len().max(1) as f64;
    let rms = (sq / n).sqrt();
    let scale = (hi - lo).max(value0.abs()).max(f64::MIN_POSITIVE);
    Ok(ConfinementReport {
        kind,
        eta,
        max_residual: max,
        rms_residual: rms,
        scale,
        normalized_max: max / scale,
        normalized_rms: rms / scale,
        pole_hit,
        predicted_path,
        observed_path,
    })
}

/// Sum of squared increments of an invariant along a trajectory.
pub fn quadratic_variation(traj: &Trajectory, kind: InvariantKind, eta: f64) -> Result<f64> {
    let mut prev = eval_invariant(kind, traj.initial().state, eta)?;
    let mut qv = 0.0;
    for p in &traj.points[1..] {
        let v = eval_invariant(kind, p.state, eta)?;
        qv += (v - prev) * (v - prev);
        prev = v;
    }
    Ok(qv)
}

/// Scalar coordinates used to compare ensembles with analytic densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinate {
    /// `w = atanh z` (equivalently asinh(z/√(1−z²))).
    W,
    /// Azimuth θ = atan2(y, x).
    Theta,
    Phi,
    Chi,
    /// Latitude λ = asin(z/|v|).
    Latitude,
}

impl Coordinate {
    pub fn eval(self, v: BlochVector, eta: f64) -> Result<f64> {
        match self {
            Coordinate::W => eval_invariant(InvariantKind::W, v, eta),
            Coordinate::Phi => eval_invariant(InvariantKind::Phi, v, eta),
            Coordinate::Chi => eval_invariant(InvariantKind::Chi, v, eta),
            Coordinate::Theta => Ok(v.theta()),
            Coordinate::Latitude => Ok(v.latitude()),
        }
    }
}
