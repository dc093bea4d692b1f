use serde::{Deserialize, Serialize};

use super::ComplexMatrix2;
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Bloch-ball coordinates `(x, y, z)` with `ρ = (I + xσ_x + yσ_y + zσ_z)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const EXCITED: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 1.0 };
    pub const GROUND: BlochVector = BlochVector { x: 0.0, y: 0.0, z: -1.0 };
    pub const MIXED: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 0.0 };

    /// Checked constructor: finite and inside the closed unit ball up to the
    /// algebraic tolerance.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Self { x, y, z };
        v.validate(Tolerances::DEFAULT.algebraic)?;
        Ok(v)
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        if !(self.x.is_finite() && self.y.is_finite() && self.z.is_finite()) {
            return Err(Error::NonFinite("Bloch vector"));
        }
        let n = self.norm();
        if n > 1.0 + tol {
            return Err(Error::OutsideBall(n));
        }
        Ok(())
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self { x: a[0], y: a[1], z: a[2] }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Cylindrical radius `r = √(x² + y²)`.
    pub fn r(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Azimuth `θ = atan2(y, x)` in `(-π, π]`.
    pub fn theta(&self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Latitude `λ = asin(z / |v|)`; zero at the centre.
    pub fn latitude(&self) -> f64 {
        let n = self.norm();
        if n == 0.0 {
            0.0
        } else {
            (self.z / n).clamp(-1.0, 1.0).asin()
        }
    }

    /// `(cos θ · sin ϑ, sin θ · sin ϑ, cos ϑ)` scaled to norm `radius`, with
    /// the latitude `λ = π/2 - ϑ`.
    pub fn from_latitude(latitude: f64, theta: f64, radius: f64) -> Self {
        let (sl, cl) = latitude.sin_cos();
        Self { x: radius * cl * theta.cos(), y: radius * cl * theta.sin(), z: radius * sl }
    }

    /// Cylindrical constructor.
    pub fn from_cylindrical(r: f64, theta: f64, z: f64) -> Self {
        Self { x: r * theta.cos(), y: r * theta.sin(), z }
    }
}

/// A qubit density matrix. Construction enforces Hermiticity, unit trace
/// and positivity (through the Bloch norm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityMatrix {
    matrix: ComplexMatrix2,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix2) -> Result<Self> {
        Self::with_tolerance(matrix, Tolerances::DEFAULT.algebraic)
    }

    pub fn with_tolerance(matrix: ComplexMatrix2, tol: f64) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite("density matrix"));
        }
        let h = matrix.hermiticity_defect();
        if h > tol {
            return Err(Error::NotHermitian(h));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::WrongTrace(tr.re));
        }
        BlochVector::from_array(matrix.bloch_components()).validate(tol)?;
        Ok(Self { matrix })
    }

    pub fn from_bloch(v: BlochVector) -> Result<Self> {
        v.validate(Tolerances::DEFAULT.algebraic)?;
        Ok(Self { matrix: ComplexMatrix2::from_bloch_components(v.to_array()) })
    }

    pub fn excited() -> Self {
        Self { matrix: ComplexMatrix2::from_bloch_components([0.0, 0.0, 1.0]) }
    }

    pub fn ground() -> Self {
        Self { matrix: ComplexMatrix2::from_bloch_components([0.0, 0.0, -1.0]) }
    }

    pub fn maximally_mixed() -> Self {
        Self { matrix: ComplexMatrix2::from_bloch_components([0.0; 3]) }
    }

    pub fn matrix(&self) -> &ComplexMatrix2 {
        &self.matrix
    }

    pub fn bloch(&self) -> BlochVector {
        BlochVector::from_array(self.matrix.bloch_components())
    }

    /// `tr(ρ²) = (1 + |v|²)/2`.
    pub fn purity(&self) -> f64 {
        0.5 * (1.0 + self.bloch().norm_sqr())
    }

    /// Builds from a Bloch vector already known to lie in the ball.
    pub(crate) fn from_bloch_unchecked(v: [f64; 3]) -> Self {
        Self { matrix: ComplexMatrix2::from_bloch_components(v) }
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            matrix: ComplexMatrix2,
        }
        let raw = Raw::deserialize(d)?;
        DensityMatrix::new(raw.matrix).map_err(serde::de::Error::custom)
    }
}

/// `x = tr(ρσ_x)`, `y = tr(ρσ_y)`, `z = tr(ρσ_z)`.
pub fn bloch_from_density(rho: &DensityMatrix) -> BlochVector {
    rho.bloch()
}

/// Inverse of [`bloch_from_density`].
pub fn density_from_bloch(v: BlochVector) -> Result<DensityMatrix> {
    DensityMatrix::from_bloch(v)
}
