//! Operator-level shortcuts: the single-channel curve condition, linear
//! dependence of noise fields, and a search over unitary basis changes.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fields::{g_field, OperatorDecomposition};
use super::{pointwise_rank, sample_interior_points};
use crate::error::{Error, Result};
use crate::qubit::ComplexMatrix2;

const FIT_TOL: f64 = 1e-10;
const NORMALIZER_TOL: f64 = 1e-8;
const NORMALIZER_RESTARTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalForm {
    SigmaMinusLike,
    SigmaZLike,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveVerdict {
    pub curve: bool,
    pub canonical_form: CanonicalForm,
    /// Least-squares residual of `[L, L†]L = rL + cI` for `L/‖L‖`.
    pub residual: f64,
    pub r: f64,
    pub c: Complex64,
}

fn frobenius(m: &ComplexMatrix2) -> f64 {
    m.frobenius_norm()
}

/// Fits `k ≈ r·l + c·I` with `r` real and `c` complex; returns
/// `(residual, r, c)`.
fn fit_real_plus_identity(k: &ComplexMatrix2, l: &ComplexMatrix2) -> (f64, f64, Complex64) {
    let mut a = DMatrix::<f64>::zeros(8, 3);
    let mut b = DVector::<f64>::zeros(8);
    for i in 0..2 {
        for j in 0..2 {
            let row = 2 * (2 * i + j);
            let id = if i == j { 1.0 } else { 0.0 };
            a[(row, 0)] = l.m[i][j].re;
            a[(row + 1, 0)] = l.m[i][j].im;
            a[(row, 1)] = id;
            a[(row + 1, 2)] = id;
            b[row] = k.m[i][j].re;
            b[row + 1] = k.m[i][j].im;
        }
    }
    let sol = a.clone().svd(true, true).solve(&b, 1e-14).expect("SVD with vectors");
    let resid = (&a * &sol - &b).norm();
    (resid, sol[0], Complex64::new(sol[1], sol[2]))
}

/// Residual of the curve condition, in the ordering `[L, L†]L` or, with
/// `proof_ordering`, `[L†, L]L`. The two differ by a sign that `r` and `c`
/// absorb.
pub fn curve_residual(l: &ComplexMatrix2, proof_ordering: bool) -> Result<f64> {
    let n = frobenius(l);
    if n < 1e-300 || !n.is_finite() {
        return Err(Error::InvalidArgument("operator must be nonzero".into()));
    }
    let ln = l.scale_re(1.0 / n);
    let ld = ln.adjoint();
    let comm = if proof_ordering { ld.commutator(&ln) } else { ln.commutator(&ld) };
    Ok(fit_real_plus_identity(&(comm * ln), &ln).0)
}

/// Whether a single channel keeps the state on a curve.
pub fn curve_criterion(l: &ComplexMatrix2) -> Result<CurveVerdict> {
    let n = frobenius(l);
    if n < 1e-300 || !n.is_finite() {
        return Err(Error::InvalidArgument("operator must be nonzero".into()));
    }
    let ln = l.scale_re(1.0 / n);
    let comm = ln.commutator(&ln.adjoint());
    let (residual, r, c) = fit_real_plus_identity(&(comm * ln), &ln);
    let curve = residual < FIT_TOL;
    let canonical_form = if frobenius(&comm) < FIT_TOL {
        CanonicalForm::SigmaZLike
    } else if curve && normalize(&ln, CanonicalFamily::SigmaMinus, 0).matched {
        CanonicalForm::SigmaMinusLike
    } else {
        CanonicalForm::None
    };
    Ok(CurveVerdict { curve, canonical_form, residual, r, c })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DependenceOption {
    Linear,
    AllSkew,
    RotatedProjection,
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependenceVerdict {
    pub dependent: bool,
    pub option: DependenceOption,
    /// `β` of the rotated-projection option.
    pub beta: Option<f64>,
    /// Largest rank of the noise fields over 20 interior points.
    pub numeric_rank: usize,
    /// Whether the algebraic verdict agrees with `numeric_rank`.
    pub consistent: bool,
}

fn matrix_rank(cols: &[Vec<f64>], rel: f64) -> usize {
    let rows = cols[0].len();
    let m = DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i]);
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel * max).count()
}

/// Linear dependence of `G_{L_k}` at every state, for two or three
/// operators (trace parts removed).
pub fn g_dependence(operators: &[ComplexMatrix2]) -> Result<DependenceVerdict> {
    if !(2..=3).contains(&operators.len()) {
        return Err(Error::InvalidArgument(format!("need 2 or 3 operators, got {}", operators.len())));
    }
    let decs: Vec<OperatorDecomposition> = operators.iter().map(|l| OperatorDecomposition::of(l).traceless()).collect();
    let n = decs.len();
    let scale = decs.iter().flat_map(|d| d.v()).fold(0.0f64, |m, a| m.max(a.abs()));
    let tol = FIT_TOL * scale.max(1e-300);
    let vs: Vec<Vec<f64>> = decs.iter().map(|d| d.v().to_vec()).collect();

    let (option, beta) = if matrix_rank(&vs, FIT_TOL) < n {
        (DependenceOption::Linear, None)
    } else if n == 2 {
        (DependenceOption::Independent, None)
    } else if decs.iter().all(|d| d.v_r.iter().all(|a| a.abs() <= tol)) {
        (DependenceOption::AllSkew, None)
    } else {
        match rotated_projection_beta(&decs, tol) {
            Some(b) => (DependenceOption::RotatedProjection, Some(b)),
            None => (DependenceOption::Independent, None),
        }
    };
    let dependent = option != DependenceOption::Independent;

    let fields: Vec<_> = operators.iter().map(g_field).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x9d);
    let numeric_rank = sample_interior_points(&mut rng, 20)
        .iter()
        .map(|p| {
            let cols: Vec<[f64; 3]> = fields.iter().map(|f| f.eval(p.to_array())).collect();
            pointwise_rank(&cols, 1e-8)
        })
        .max()
        .unwrap_or(0);
    let consistent = dependent == (numeric_rank < n);
    Ok(DependenceVerdict { dependent, option, beta, numeric_rank, consistent })
}

/// Common `β` with `P_S(v_i) = β n × v_r` where `S` is the plane of the
/// `v_r` and `n` its normal.
fn rotated_projection_beta(decs: &[OperatorDecomposition], tol: f64) -> Option<f64> {
    let m = Matrix3::from_fn(|i, j| decs[j].v_r[i]);
    let svd = m.svd(true, false);
    let u = svd.u?;
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let s = svd.singular_values;
    if s[idx[1]] <= tol || s[idx[2]] > tol {
        return None;
    }
    let normal: Vector3<f64> = u.column(idx[2]).into();
    let mut num = 0.0;
    let mut den = 0.0;
    let pairs: Vec<(Vector3<f64>, Vector3<f64>)> = decs
        .iter()
        .map(|d| {
            let vi = Vector3::from(d.v_i);
            let proj = vi - normal * normal.dot(&vi);
            (proj, normal.cross(&Vector3::from(d.v_r)))
        })
        .collect();
    for (p, r) in &pairs {
        num += p.dot(r);
        den += r.dot(r);
    }
    let beta = num / den;
    let resid = pairs.iter().map(|(p, r)| (p - r * beta).norm()).fold(0.0, f64::max);
    (resid <= tol.max(FIT_TOL)).then_some(beta)
}

/// Canonical families matched up to a unitary basis change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalFamily {
    /// `c σ_−`, `c` complex.
    SigmaMinus,
    /// `a σ_z + b I`, `a, b` complex.
    SigmaZ,
    /// `s(σ_x + iβσ_y + rI)`, `s, β, r` real.
    RealShift,
    /// `s(σ_x + i√(1+r²)σ_y + irI)`, `s, r` real.
    ImaginaryShift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerMatch {
    pub family: CanonicalFamily,
    pub matched: bool,
    /// Frobenius residual relative to `‖L‖`.
    pub residual: f64,
    /// Family parameters, in the order of the family's description.
    pub params: Vec<f64>,
    /// Euler angles `(a, b, c)` of `U = R_z(a) R_y(b) R_z(c)`.
    pub euler: [f64; 3],
}

/// `R_z(a) R_y(b) R_z(c)`.
pub fn euler_unitary(a: f64, b: f64, c: f64) -> ComplexMatrix2 {
    let rz = |t: f64| {
        ComplexMatrix2::new([
            [Complex64::from_polar(1.0, -t / 2.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, t / 2.0)],
        ])
    };
    let (s, co) = (b / 2.0).sin_cos();
    let ry = ComplexMatrix2::from_parts([[co, -s], [s, co]], [[0.0; 2]; 2]);
    rz(a) * ry * rz(c)
}

fn shift_basis(r: f64) -> ComplexMatrix2 {
    let q = (1.0 + r * r).sqrt();
    ComplexMatrix2::new([
        [Complex64::new(0.0, r), Complex64::new(1.0 + q, 0.0)],
        [Complex64::new(1.0 - q, 0.0), Complex64::new(0.0, r)],
    ])
}

/// Squared residual of the best member of `family` for `m`, with its
/// parameters; `r` is the nonlinear parameter of `ImaginaryShift`.
fn family_fit(family: CanonicalFamily, m: &ComplexMatrix2, r: f64) -> (f64, Vec<f64>) {
    let e = &m.m;
    match family {
        CanonicalFamily::SigmaMinus => {
            let c = e[1][0];
            (e[0][0].norm_sqr() + e[0][1].norm_sqr() + e[1][1].norm_sqr(), vec![c.re, c.im])
        }
        CanonicalFamily::SigmaZ => {
            let a = (e[0][0] - e[1][1]) / 2.0;
            let b = (e[0][0] + e[1][1]) / 2.0;
            (e[0][1].norm_sqr() + e[1][0].norm_sqr(), vec![a.re, a.im, b.re, b.im])
        }
        CanonicalFamily::RealShift => {
            // a σ_x + b iσ_y + c I = [[c, a+b], [a−b, c]], all real.
            let c = (e[0][0].re + e[1][1].re) / 2.0;
            let a = (e[0][1].re + e[1][0].re) / 2.0;
            let b = (e[0][1].re - e[1][0].re) / 2.0;
            let fit = ComplexMatrix2::from_parts([[c, a + b], [a - b, c]], [[0.0; 2]; 2]);
            let res = (*m - fit).frobenius_norm().powi(2);
            let params = if a.abs() > 1e-300 { vec![a, b / a, c / a] } else { vec![a, f64::NAN, f64::NAN] };
            (res, params)
        }
        CanonicalFamily::ImaginaryShift => {
            let basis = shift_basis(r);
            let mut dot = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    dot += (basis.m[i][j].conj() * e[i][j]).re;
                }
            }
            let s = dot / basis.frobenius_norm().powi(2);
            ((*m - basis.scale_re(s)).frobenius_norm().powi(2), vec![s, r])
        }
    }
}

struct NormalizerCost {
    target: ComplexMatrix2,
    family: CanonicalFamily,
}

impl NormalizerCost {
    fn conj(&self, p: &[f64]) -> ComplexMatrix2 {
        let u = euler_unitary(p[0], p[1], p[2]);
        u * self.target * u.adjoint()
    }
}

impl CostFunction for NormalizerCost {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let r = p.get(3).copied().unwrap_or(0.0);
        Ok(family_fit(self.family, &self.conj(p), r).0)
    }
}

fn nelder_mead(cost: NormalizerCost, start: Vec<f64>, step: f64) -> (Vec<f64>, f64) {
    let mut simplex = vec![start.clone()];
    for k in 0..start.len() {
        let mut p = start.clone();
        p[k] += step;
        simplex.push(p);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(1e-30).expect("valid tolerance");
    let res = Executor::new(cost, solver).configure(|s| s.max_iters(3000)).run().expect("Nelder-Mead runs");
    let state = res.state();
    (state.get_best_param().cloned().unwrap_or(start), state.get_best_cost())
}

/// Searches `U L U†` over `SU(2)` for a member of `family`.
pub fn normalize(l: &ComplexMatrix2, family: CanonicalFamily, seed: u64) -> NormalizerMatch {
    let norm = l.frobenius_norm();
    let target = l.scale_re(1.0 / norm.max(1e-300));
    let dim = if family == CanonicalFamily::ImaginaryShift { 4 } else { 3 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_u64);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..NORMALIZER_RESTARTS {
        let mut p = vec![
            rng.random_range(0.0..std::f64::consts::TAU),
            rng.random_range(0.0..std::f64::consts::PI),
            rng.random_range(0.0..2.0 * std::f64::consts::TAU),
        ];
        if dim == 4 {
            p.push(rng.random_range(-2.0..2.0));
        }
        let (p, c) = nelder_mead(NormalizerCost { target, family }, p, 0.4);
        let (p, c) = if c < 1e-6 { nelder_mead(NormalizerCost { target, family }, p, 1e-4) } else { (p, c) };
        if best.as_ref().is_none_or(|b| c < b.1) {
            best = Some((p, c));
        }
        if c.sqrt() < NORMALIZER_TOL * 1e-2 {
            break;
        }
    }
    let (p, c) = best.expect("at least one restart");
    let cost = NormalizerCost { target, family };
    let r = p.get(3).copied().unwrap_or(0.0);
    let (_, mut params) = family_fit(family, &cost.conj(&p), r);
    let scale_param = match family {
        CanonicalFamily::SigmaMinus | CanonicalFamily::SigmaZ => params.len(),
        CanonicalFamily::RealShift | CanonicalFamily::ImaginaryShift => 1,
    };
    for q in params.iter_mut().take(scale_param) {
        *q *= norm;
    }
    let residual = c.max(0.0).sqrt();
    NormalizerMatch { family, matched: residual < NORMALIZER_TOL, residual, params, euler: [p[0], p[1], p[2]] }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn curve_examples() {
        let v = curve_criterion(&ComplexMatrix2::sigma_minus()).unwrap();
        assert!(v.curve);
        assert_eq!(v.canonical_form, CanonicalForm::SigmaMinusLike);

        let v = curve_criterion(&(ComplexMatrix2::sigma_z() + ComplexMatrix2::sigma_minus())).unwrap();
        assert!(!v.curve);
        assert_eq!(v.canonical_form, CanonicalForm::None);

        let l = ComplexMatrix2::sigma_z() * 3.0 + ComplexMatrix2::identity() * c(2.0, 1.0);
        let v = curve_criterion(&l).unwrap();
        assert!(v.curve);
        assert_eq!(v.canonical_form, CanonicalForm::SigmaZLike);

        assert!(curve_criterion(&ComplexMatrix2::zero()).is_err());
    }

    #[test]
    fn rotated_lowering_operator_is_recognised() {
        let u = euler_unitary(0.7, 1.9, -0.4);
        let l = u * ComplexMatrix2::sigma_minus() * u.adjoint() * c(0.3, -1.2);
        let v = curve_criterion(&l).unwrap();
        assert!(v.curve);
        assert_eq!(v.canonical_form, CanonicalForm::SigmaMinusLike);
    }

    #[test]
    fn both_commutator_orderings_agree() {
        let ops = [
            ComplexMatrix2::sigma_minus(),
            ComplexMatrix2::sigma_z() + ComplexMatrix2::sigma_minus(),
            ComplexMatrix2::sigma_x() + ComplexMatrix2::sigma_y() * c(0.0, 0.3),
            ComplexMatrix2::sigma_z() * c(1.0, 2.0),
        ];
        for l in ops {
            let a = curve_residual(&l, false).unwrap() < FIT_TOL;
            let b = curve_residual(&l, true).unwrap() < FIT_TOL;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn linear_dependence() {
        let v = g_dependence(&[ComplexMatrix2::sigma_z(), ComplexMatrix2::sigma_z() * 2.0]).unwrap();
        assert!(v.dependent && v.option == DependenceOption::Linear && v.consistent);
        let v = g_dependence(&[ComplexMatrix2::sigma_z(), ComplexMatrix2::sigma_z() * c(0.0, 1.0)]).unwrap();
        assert!(!v.dependent && v.consistent);
    }

    #[test]
    fn all_skew_dependence() {
        let i = c(0.0, 1.0);
        let ops = [ComplexMatrix2::sigma_x() * i, ComplexMatrix2::sigma_y() * i, ComplexMatrix2::sigma_z() * i];
        let v = g_dependence(&ops).unwrap();
        assert_eq!(v.option, DependenceOption::AllSkew);
        assert!(v.dependent && v.consistent, "{v:?}");
    }

    #[test]
    fn rotated_projection_dependence() {
        let i = c(0.0, 1.0);
        for beta in [0.3, 1.0, 2.0] {
            let ops = [
                ComplexMatrix2::sigma_x() + ComplexMatrix2::sigma_z() * (i * beta),
                ComplexMatrix2::sigma_z() - ComplexMatrix2::sigma_x() * (i * beta),
                ComplexMatrix2::sigma_y() * i,
            ];
            let v = g_dependence(&ops).unwrap();
            assert_eq!(v.option, DependenceOption::RotatedProjection, "β = {beta}");
            assert!(v.dependent && v.consistent);
            assert!((v.beta.unwrap().abs() - beta).abs() < 1e-10);
        }
    }

    #[test]
    fn generic_triple_is_independent() {
        let ops = [
            ComplexMatrix2::sigma_x(),
            ComplexMatrix2::sigma_y(),
            ComplexMatrix2::sigma_z(),
        ];
        let v = g_dependence(&ops).unwrap();
        assert!(!v.dependent && v.consistent, "{v:?}");
        assert!(g_dependence(&ops[..1]).is_err());
    }

    #[test]
    fn normalizer_finds_lowering_family_of_ex1b() {
        // σ_z + σ_− = √(5/4)·(unit vector in the xz plane)·σ − iσ_y/2.
        let l = ComplexMatrix2::sigma_z() + ComplexMatrix2::sigma_minus();
        let m = normalize(&l, CanonicalFamily::RealShift, 1);
        assert!(m.matched, "{m:?}");
        assert!((m.params[0].abs() - 1.25f64.sqrt()).abs() < 1e-7);
        assert!(m.params[2].abs() < 1e-7);
        assert!(!normalize(&l, CanonicalFamily::SigmaMinus, 1).matched);
    }

    #[test]
    fn normalizer_recovers_rotated_families() {
        let u = euler_unitary(1.1, 0.6, 2.3);
        let r: f64 = 0.8;
        let fam = shift_basis(r).scale_re(1.7);
        let m = normalize(&(u * fam * u.adjoint()), CanonicalFamily::ImaginaryShift, 3);
        assert!(m.matched, "{m:?}");
        assert!((m.params[1].abs() - r).abs() < 1e-6);
        let z = u * (ComplexMatrix2::sigma_z() * c(0.4, 0.2)) * u.adjoint();
        assert!(normalize(&z, CanonicalFamily::SigmaZ, 0).matched);
    }
}
