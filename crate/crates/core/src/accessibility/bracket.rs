//! Brackets between Stratonovich drifts and noise fields, assembled from
//! operator algebra.
//!
//! The operator formula is written for the Lie-derivative ordering, so it
//! equals `lie_bracket(G_k, F_j + η_j D_j)`, the negative of
//! `lie_bracket(F_j + η_j D_j, G_k)`. Spans do not care about the sign.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fields::{d_field, f_field, g_field, g_field_poly, MatPoly};
use super::lie_bracket;
use crate::error::{Error, Result};
use crate::poly::{Polynomial, PolyVectorField};
use crate::qubit::ComplexMatrix2;

/// Pieces of the drift bracket for channel `j` against noise `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftBracket {
    /// `[L_j, L_k]ρL_j† − tr(·)ρ + h.c.`
    pub sandwich: PolyVectorField,
    /// `½[L_k, L_j†L_j]`.
    pub q1: ComplexMatrix2,
    /// `½[L_k, (L_j† + L_j)L_j]`.
    pub q2: ComplexMatrix2,
    pub g_q1: PolyVectorField,
    pub g_q2: PolyVectorField,
    /// Terms along `G_{[L_k, L_j]}` and `G_{L_j}` with state-dependent
    /// real weights.
    pub unimportant: PolyVectorField,
    /// `(1−η)(sandwich + G_{Q1}) + η(unimportant + G_{Q2})`.
    pub total: PolyVectorField,
}

fn re_tr(m: &MatPoly) -> Polynomial {
    m.trace().re
}

pub fn drift_bracket_parts(lj: &ComplexMatrix2, eta_j: f64, lk: &ComplexMatrix2) -> Result<DriftBracket> {
    if !(0.0..=1.0).contains(&eta_j) {
        return Err(Error::Efficiency(eta_j));
    }
    let rho = MatPoly::density();
    let half = Complex64::new(0.5, 0.0);
    let ljd = lj.adjoint();
    let comm = lj.commutator(lk);

    let c = MatPoly::from_matrix(&comm);
    let ljd_m = MatPoly::from_matrix(&ljd);
    let t = c.mul(&rho).mul(&ljd_m);
    // tr(T) is complex; adding the h.c. leaves only its real part.
    let t = t.sub(&rho.scale_re(&re_tr(&t)));
    let sandwich = t.add(&t.adjoint()).bloch();

    let q1 = lk.commutator(&(ljd * *lj)) * half;
    let q2 = lk.commutator(&((ljd + *lj) * *lj)) * half;
    let g_q1 = g_field(&q1);
    let g_q2 = g_field(&q2);

    let lk_m = MatPoly::from_matrix(lk);
    let lj_m = MatPoly::from_matrix(lj);
    let a_j = lj_m.mul(&rho).add(&rho.mul(&lj_m.adjoint()));
    let a_k = lk_m.mul(&rho).add(&rho.mul(&lk_m.adjoint()));
    let tr_j = re_tr(&a_j);
    let tr_k = re_tr(&a_k);
    let herm_j = MatPoly::from_matrix(&(*lj + ljd));
    let g = &re_tr(&herm_j.mul(&a_k)) - &(&tr_j * &tr_k);
    let unimportant =
        &g_field(&lk.commutator(lj)).scale_by(&tr_j).scale(-1.0) + &g_field(lj).scale_by(&g);

    let total = &(&(&sandwich + &g_q1) * (1.0 - eta_j)) + &(&(&unimportant + &g_q2) * eta_j);
    Ok(DriftBracket { sandwich, q1, q2, g_q1, g_q2, unimportant, total: total.cleaned(1e-13) })
}

/// Operator-level bracket of the Stratonovich drift of `(L_j, η_j)` with
/// `G_{L_k}`.
pub fn drift_bracket(lj: &ComplexMatrix2, eta_j: f64, lk: &ComplexMatrix2) -> Result<PolyVectorField> {
    Ok(drift_bracket_parts(lj, eta_j, lk)?.total)
}

/// The same bracket from the polynomial fields directly.
pub fn direct_drift_bracket(lj: &ComplexMatrix2, eta_j: f64, lk: &ComplexMatrix2) -> Result<PolyVectorField> {
    if !(0.0..=1.0).contains(&eta_j) {
        return Err(Error::Efficiency(eta_j));
    }
    let drift = &f_field(lj) + &d_field(lj).scale(eta_j);
    lie_bracket(&g_field(lk), &drift)
}

/// `G_{Q(ρ)}` with the full state-dependent `Q(ρ)` of the unit-efficiency
/// drift; used to cross-check the split into `Q_2` and the dropped terms.
pub fn full_q_field(lj: &ComplexMatrix2, lk: &ComplexMatrix2) -> PolyVectorField {
    let rho = MatPoly::density();
    let lj_m = MatPoly::from_matrix(lj);
    let lk_m = MatPoly::from_matrix(lk);
    let a_j = lj_m.mul(&rho).add(&rho.mul(&lj_m.adjoint()));
    let a_k = lk_m.mul(&rho).add(&rho.mul(&lk_m.adjoint()));
    let tr_j = re_tr(&a_j);
    let herm = MatPoly::from_matrix(&((lj.adjoint() + *lj) * Complex64::new(0.5, 0.0)));
    let inner = herm.sub(&MatPoly::from_matrix(&ComplexMatrix2::identity()).scale_re(&tr_j)).mul(&lj_m);
    let comm = lk_m.mul(&inner).sub(&inner.mul(&lk_m));
    let herm2 = MatPoly::from_matrix(&(*lj + lj.adjoint()));
    let g = &re_tr(&herm2.mul(&a_k)) - &(&tr_j * &re_tr(&a_k));
    let q = comm.add(&lj_m.scale_re(&g));
    g_field_poly(&q)
}
