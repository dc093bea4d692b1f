//! Bloch-coordinate vector fields of the master equation terms.
//!
//! All fields use the components `tr(σ_i ·)` of the matrix-valued term,
//! which is what `ρ = (I + v·σ)/2` turns into `dv`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::poly::{Polynomial, PolyVectorField};
use crate::qubit::{ComplexMatrix2, LindbladChannel};

/// `re + i·im` with real polynomial parts.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct CPoly {
    pub re: Polynomial,
    pub im: Polynomial,
}

impl CPoly {
    pub fn constant(c: Complex64) -> Self {
        Self { re: Polynomial::constant(c.re), im: Polynomial::constant(c.im) }
    }

    pub fn real(p: Polynomial) -> Self {
        Self { re: p, im: Polynomial::zero() }
    }

    fn add(&self, o: &Self) -> Self {
        Self { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    fn sub(&self, o: &Self) -> Self {
        Self { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    fn mul(&self, o: &Self) -> Self {
        Self { re: &(&self.re * &o.re) - &(&self.im * &o.im), im: &(&self.re * &o.im) + &(&self.im * &o.re) }
    }

    fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -&self.im }
    }

    fn scale_re(&self, p: &Polynomial) -> Self {
        Self { re: &self.re * p, im: &self.im * p }
    }
}

/// 2×2 matrix whose entries are complex polynomials in `(x, y, z)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct MatPoly {
    pub m: [[CPoly; 2]; 2],
}

impl MatPoly {
    pub fn from_matrix(a: &ComplexMatrix2) -> Self {
        let e = |i: usize, j: usize| CPoly::constant(a.m[i][j]);
        Self { m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] }
    }

    /// `ρ(v) = (I + xσ_x + yσ_y + zσ_z)/2`.
    pub fn density() -> Self {
        let (x, y, z) = (Polynomial::var(0), Polynomial::var(1), Polynomial::var(2));
        let half = |p: Polynomial| p.scale(0.5);
        let one = Polynomial::constant(1.0);
        Self {
            m: [
                [CPoly::real(half(&one + &z)), CPoly { re: half(x.clone()), im: half(-&y) }],
                [CPoly { re: half(x), im: half(y) }, CPoly::real(half(&one - &z))],
            ],
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let e = |i: usize, j: usize| self.m[i][j].add(&o.m[i][j]);
        Self { m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let e = |i: usize, j: usize| self.m[i][j].sub(&o.m[i][j]);
        Self { m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let e = |i: usize, j: usize| self.m[i][0].mul(&o.m[0][j]).add(&self.m[i][1].mul(&o.m[1][j]));
        Self { m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] }
    }

    pub fn adjoint(&self) -> Self {
        let e = |i: usize, j: usize| self.m[j][i].conj();
        Self { m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] }
    }

    pub fn trace(&self) -> CPoly {
        self.m[0][0].add(&self.m[1][1])
    }

    /// Multiplies by a real scalar polynomial.
    pub fn scale_re(&self, p: &Polynomial) -> Self {
        let e = |i: usize, j: usize| self.m[i][j].scale_re(p);
        Self { m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] }
    }

    /// Bloch components `Re tr(σ_i M)`.
    pub fn bloch(&self) -> PolyVectorField {
        let [[a, b], [c, d]] = &self.m;
        let x = &b.re + &c.re;
        let y = &c.im - &b.im;
        let z = &a.re - &d.re;
        PolyVectorField::new([x, y, z])
    }

    /// `Mρ + ρM† − tr(Mρ + ρM†)ρ` with `ρ = ρ(v)`.
    pub fn g_of(&self, rho: &Self) -> Self {
        let a = self.mul(rho).add(&rho.mul(&self.adjoint()));
        let t = a.trace();
        a.sub(&rho.scale_re(&t.re))
    }
}

/// Pauli decomposition `L = v_r·σ + i v_i·σ + trace_part·I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorDecomposition {
    pub v_r: [f64; 3],
    pub v_i: [f64; 3],
    pub trace_part: Complex64,
}

impl OperatorDecomposition {
    pub fn of(l: &ComplexMatrix2) -> Self {
        let t = l.pauli_traces();
        Self {
            v_r: [t[0].re / 2.0, t[1].re / 2.0, t[2].re / 2.0],
            v_i: [t[0].im / 2.0, t[1].im / 2.0, t[2].im / 2.0],
            trace_part: l.trace() / 2.0,
        }
    }

    pub fn reconstruct(&self) -> ComplexMatrix2 {
        let [sx, sy, sz] = ComplexMatrix2::paulis();
        let c = |k: usize| Complex64::new(self.v_r[k], self.v_i[k]);
        sx * c(0) + sy * c(1) + sz * c(2) + ComplexMatrix2::identity() * self.trace_part
    }

    /// `(v_r, v_i)` as one vector of ℝ⁶.
    pub fn v(&self) -> [f64; 6] {
        [self.v_r[0], self.v_r[1], self.v_r[2], self.v_i[0], self.v_i[1], self.v_i[2]]
    }

    pub fn traceless(&self) -> Self {
        Self { trace_part: Complex64::new(0.0, 0.0), ..*self }
    }
}

/// Noise field of `G_L`, quadratic in `(x, y, z)`.
///
/// With `(α, β, γ) = v_r` and `(α̃, β̃, γ̃) = v_i`, the x component is
/// `2[α − β̃z + γ̃y − (αx + βy + γz)x]`, the others cyclic. The trace part
/// of `L` drops out.
pub fn g_field(l: &ComplexMatrix2) -> PolyVectorField {
    let d = OperatorDecomposition::of(l);
    let (r, i) = (d.v_r, d.v_i);
    let proj = Polynomial::affine(0.0, r);
    let comp = |k: usize| {
        let (k1, k2) = ((k + 1) % 3, (k + 2) % 3);
        // Rotation part (v × v_i)_k.
        let mut rot = [0.0; 3];
        rot[k1] += i[k2];
        rot[k2] -= i[k1];
        let lin = Polynomial::affine(r[k], rot);
        (&lin - &(&proj * &Polynomial::var(k))).scale(2.0)
    };
    PolyVectorField::new([comp(0), comp(1), comp(2)])
}

/// Noise field of `G_M` for an operator polynomial `M`.
pub(crate) fn g_field_poly(m: &MatPoly) -> PolyVectorField {
    m.g_of(&MatPoly::density()).bloch()
}

/// Lindblad drift `F_L(ρ) = LρL† − ½{L†L, ρ}`, affine.
pub fn f_field(l: &ComplexMatrix2) -> PolyVectorField {
    let rho = MatPoly::density();
    let lm = MatPoly::from_matrix(l);
    let ldl = MatPoly::from_matrix(&(l.adjoint() * *l));
    let half = Polynomial::constant(0.5);
    let out = lm.mul(&rho).mul(&lm.adjoint()).sub(&ldl.mul(&rho).add(&rho.mul(&ldl)).scale_re(&half));
    out.bloch()
}

/// Hamiltonian drift `−i[H, ρ]`, linear.
pub fn h_field(h: &ComplexMatrix2) -> PolyVectorField {
    let rho = MatPoly::density();
    let hm = MatPoly::from_matrix(&(*h * Complex64::new(0.0, -1.0)));
    hm.mul(&rho).sub(&rho.mul(&hm)).bloch()
}

/// Itô-to-Stratonovich correction `D = −½ (DG)·G` for unit efficiency;
/// a channel with efficiency `η` contributes `η·D`.
pub fn d_field(l: &ComplexMatrix2) -> PolyVectorField {
    let g = g_field(l);
    g.derivative_along(&g).scale(-0.5)
}

/// Stratonovich drift of one channel, `F_L + η D_L`.
pub fn stratonovich_drift(channel: &LindbladChannel) -> PolyVectorField {
    let f = f_field(&channel.operator);
    if channel.efficiency == 0.0 {
        return f;
    }
    &f + &d_field(&channel.operator).scale(channel.efficiency)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{superop_f, superop_g, BlochVector, DensityMatrix};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_operator(rng: &mut impl Rng) -> ComplexMatrix2 {
        let mut m = ComplexMatrix2::zero();
        for row in &mut m.m {
            for e in row.iter_mut() {
                *e = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        m
    }

    fn random_state(rng: &mut impl Rng) -> BlochVector {
        loop {
            let v = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            if v.iter().map(|a| a * a).sum::<f64>() <= 1.0 {
                return BlochVector::from_array(v);
            }
        }
    }

    #[test]
    fn decomposition_reconstructs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let l = random_operator(&mut rng);
            assert!(OperatorDecomposition::of(&l).reconstruct().approx_eq(&l, 1e-12));
        }
    }

    #[test]
    fn fields_match_superoperators() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let l = random_operator(&mut rng);
            let (g, f) = (g_field(&l), f_field(&l));
            for _ in 0..20 {
                let v = random_state(&mut rng);
                let rho = DensityMatrix::from_bloch(v).unwrap();
                let (ge, fe) = (superop_g(&l, &rho).bloch_components(), superop_f(&l, &rho).bloch_components());
                let (gp, fp) = (g.eval(v.to_array()), f.eval(v.to_array()));
                for k in 0..3 {
                    assert!((ge[k] - gp[k]).abs() < 1e-12);
                    assert!((fe[k] - fp[k]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn closed_form_noise_field_matches_operator_algebra() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let l = random_operator(&mut rng);
            let direct = g_field_poly(&MatPoly::from_matrix(&l));
            assert!(g_field(&l).max_abs_diff(&direct) < 1e-12);
        }
    }

    #[test]
    fn named_fields() {
        let z = |p: [f64; 3]| p;
        let sz = g_field(&ComplexMatrix2::sigma_z());
        let sm = g_field(&ComplexMatrix2::sigma_minus());
        for v in [[0.1, 0.2, 0.3], [-0.5, 0.4, -0.2]] {
            let [x, y, zz] = z(v);
            let a = sz.eval(v);
            assert!((a[0] + 2.0 * x * zz).abs() < 1e-15 && (a[1] + 2.0 * y * zz).abs() < 1e-15);
            assert!((a[2] - 2.0 * (1.0 - zz * zz)).abs() < 1e-15);
            // Homodyne fluorescence noise column: dz ∝ −x(1+z).
            let b = sm.eval(v);
            assert!((b[0] - (1.0 + zz - x * x)).abs() < 1e-15);
            assert!((b[1] + x * y).abs() < 1e-15);
            assert!((b[2] + x * (1.0 + zz)).abs() < 1e-15);
        }
        assert!(g_field(&ComplexMatrix2::identity()).is_zero());
        let fz = f_field(&ComplexMatrix2::sigma_z());
        assert!(fz.max_abs_diff(&PolyVectorField::new([
            Polynomial::var(0).scale(-2.0),
            Polynomial::var(1).scale(-2.0),
            Polynomial::zero()
        ])) < 1e-15);
        let fm = f_field(&ComplexMatrix2::sigma_minus());
        assert!(fm.components[2].max_abs_diff(&Polynomial::affine(-1.0, [0.0, 0.0, -1.0])) < 1e-15);
        assert!(f_field(&ComplexMatrix2::sigma_z()).degree() <= 1);
    }

    #[test]
    fn constant_noise_field_has_no_correction() {
        let g = PolyVectorField::constant([1.0, -2.0, 0.5]);
        assert!(g.derivative_along(&g).is_zero());
        assert!(d_field(&ComplexMatrix2::identity()).is_zero());
        assert!(d_field(&ComplexMatrix2::sigma_minus()).degree() <= 3);
    }

    #[test]
    fn hamiltonian_rotates() {
        // H = σ_z/2 precesses about z: dx = −y, dy = x.
        let h = h_field(&ComplexMatrix2::sigma_z().scale_re(0.5));
        let a = h.eval([0.3, 0.4, 0.5]);
        assert!((a[0] + 0.4).abs() < 1e-15 && (a[1] - 0.3).abs() < 1e-15 && a[2].abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn trace_part_never_changes_noise(re in -2.0f64..2.0, im in -2.0f64..2.0, s in 0usize..4) {
            let l = [ComplexMatrix2::sigma_x(), ComplexMatrix2::sigma_y(), ComplexMatrix2::sigma_z(), ComplexMatrix2::sigma_minus()][s];
            let shifted = l + ComplexMatrix2::identity() * c(re, im);
            prop_assert!(g_field(&shifted).max_abs_diff(&g_field(&l)) < 1e-13);
        }
    }
}
