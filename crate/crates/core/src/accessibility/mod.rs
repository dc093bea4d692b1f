//! Dimension of the support of the state distribution from the Lie algebra
//! of the noise fields closed under brackets with the drift.
//!
//! Everything is done on exact polynomial fields in Bloch coordinates;
//! numerics enter only through the pointwise rank at sampled states.

mod bracket;
mod catalog;
mod closure;
mod criteria;
mod fields;

pub use bracket::{direct_drift_bracket, drift_bracket, drift_bracket_parts, full_q_field, DriftBracket};
pub use catalog::{catalog_check, catalog_fixtures, CATALOG_SEED, CatalogReport, CatalogRow, Fixture, SimulationCheck};
pub use closure::{
    dimension, dimension_with, lie_closure, lie_closure_with, mc_dimension, ClosureOptions, Confidence,
    DimensionOptions, DimensionVerdict, LieBasis, McDimension, PointRank,
};
pub use criteria::{
    curve_criterion, curve_residual, euler_unitary, g_dependence, normalize, CanonicalFamily, CanonicalForm,
    CurveVerdict, DependenceOption, DependenceVerdict, NormalizerMatch,
};
pub use fields::{d_field, f_field, g_field, h_field, stratonovich_drift, OperatorDecomposition};

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::Result;
use crate::poly::{lie_bracket_capped, PolyVectorField, DEFAULT_DEGREE_CAP};
use crate::qubit::BlochVector;
use crate::tolerance::Tolerances;

/// `[V, W] = (DW)·V − (DV)·W` under the default degree cap.
pub fn lie_bracket(v: &PolyVectorField, w: &PolyVectorField) -> Result<PolyVectorField> {
    lie_bracket_capped(v, w, DEFAULT_DEGREE_CAP, Tolerances::DEFAULT.coefficient, "[V, W]")
}

/// Rank of vectors at one point after normalising each to unit length;
/// singular values below `rel` times the largest count as zero.
pub fn pointwise_rank(vectors: &[[f64; 3]], rel: f64) -> usize {
    let cols: Vec<[f64; 3]> = vectors
        .iter()
        .filter_map(|v| {
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            (n > 1e-12).then(|| [v[0] / n, v[1] / n, v[2] / n])
        })
        .collect();
    if cols.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(3, cols.len(), |i, j| cols[j][i]);
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rel * max).count()
}

/// Uniform points with `‖v‖ ≤ 0.9`, kept away from the poles.
pub fn sample_interior_points(rng: &mut impl Rng, n: usize) -> Vec<BlochVector> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v = [rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9)];
        let r2: f64 = v.iter().map(|a| a * a).sum();
        if r2 <= 0.81 && (1.0 - v[2].abs()) >= 1e-3 {
            out.push(BlochVector::from_array(v));
        }
    }
    out
}
