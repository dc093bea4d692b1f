use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix2 {
    pub m: [[Complex64; 2]; 2],
}

impl ComplexMatrix2 {
    pub const fn new(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    /// Builds from real and imaginary parts given row-major.
    pub const fn from_parts(re: [[f64; 2]; 2], im: [[f64; 2]; 2]) -> Self {
        Self {
            m: [
                [Complex64::new(re[0][0], im[0][0]), Complex64::new(re[0][1], im[0][1])],
                [Complex64::new(re[1][0], im[1][0]), Complex64::new(re[1][1], im[1][1])],
            ],
        }
    }

    pub const fn zero() -> Self {
        Self { m: [[ZERO, ZERO], [ZERO, ZERO]] }
    }

    pub const fn identity() -> Self {
        Self { m: [[ONE, ZERO], [ZERO, ONE]] }
    }

    pub const fn sigma_x() -> Self {
        Self { m: [[ZERO, ONE], [ONE, ZERO]] }
    }

    pub const fn sigma_y() -> Self {
        Self { m: [[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]] }
    }

    pub const fn sigma_z() -> Self {
        Self { m: [[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]] }
    }

    /// Lowering operator `|g⟩⟨e|`.
    pub const fn sigma_minus() -> Self {
        Self { m: [[ZERO, ZERO], [ONE, ZERO]] }
    }

    /// Raising operator `|e⟩⟨g|`.
    pub const fn sigma_plus() -> Self {
        Self { m: [[ZERO, ONE], [ZERO, ZERO]] }
    }

    /// `[σ_x, σ_y, σ_z]`.
    pub const fn paulis() -> [Self; 3] {
        [Self::sigma_x(), Self::sigma_y(), Self::sigma_z()]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self {
            m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.m;
        Self { m: [[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]] }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        d
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `tr(self · σ_j)` for j = x, y, z. Real parts are the Bloch components
    /// of a Hermitian matrix.
    pub fn pauli_traces(&self) -> [Complex64; 3] {
        let m = &self.m;
        [
            m[0][1] + m[1][0],
            I * (m[0][1] - m[1][0]),
            m[0][0] - m[1][1],
        ]
    }

    /// Real parts of [`Self::pauli_traces`].
    pub fn bloch_components(&self) -> [f64; 3] {
        let t = self.pauli_traces();
        [t[0].re, t[1].re, t[2].re]
    }

    /// `(I + x σ_x + y σ_y + z σ_z) / 2`.
    pub fn from_bloch_components(v: [f64; 3]) -> Self {
        let [x, y, z] = v;
        Self::from_parts([[0.5 * (1.0 + z), 0.5 * x], [0.5 * x, 0.5 * (1.0 - z)]], [[0.0, -0.5 * y], [0.5 * y, 0.0]])
    }

    fn to_array(self) -> [[[f64; 2]; 2]; 2] {
        let e = |z: Complex64| [z.re, z.im];
        [[e(self.m[0][0]), e(self.m[0][1])], [e(self.m[1][0]), e(self.m[1][1])]]
    }

    fn from_array(a: [[[f64; 2]; 2]; 2]) -> Result<Self> {
        let c = |p: [f64; 2]| Complex64::new(p[0], p[1]);
        let out = Self { m: [[c(a[0][0]), c(a[0][1])], [c(a[1][0]), c(a[1][1])]] };
        if !out.is_finite() {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(out)
    }
}

impl Default for ComplexMatrix2 {
    fn default() -> Self {
        Self::zero()
    }
}

impl Add for ComplexMatrix2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (a, b) = (&self.m, &o.m);
        Self { m: [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]] }
    }
}

impl AddAssign for ComplexMatrix2 {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for ComplexMatrix2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let (a, b) = (&self.m, &o.m);
        Self { m: [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]] }
    }
}

impl Neg for ComplexMatrix2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_re(-1.0)
    }
}

impl Mul for ComplexMatrix2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (&self.m, &o.m);
        Self {
            m: [
                [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
                [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
            ],
        }
    }
}

impl Mul<Complex64> for ComplexMatrix2 {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        self.scale(s)
    }
}

impl Mul<ComplexMatrix2> for Complex64 {
    type Output = ComplexMatrix2;
    fn mul(self, m: ComplexMatrix2) -> ComplexMatrix2 {
        m.scale(self)
    }
}

impl Mul<f64> for ComplexMatrix2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale_re(s)
    }
}

impl Mul<ComplexMatrix2> for f64 {
    type Output = ComplexMatrix2;
    fn mul(self, m: ComplexMatrix2) -> ComplexMatrix2 {
        m.scale_re(self)
    }
}

impl Serialize for ComplexMatrix2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let a = <[[[f64; 2]; 2]; 2]>::deserialize(d)?;
        Self::from_array(a).map_err(serde::de::Error::custom)
    }
}
