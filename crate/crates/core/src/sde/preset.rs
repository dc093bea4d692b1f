use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubit::{ComplexMatrix2, ModelSpec};

/// The four standard measurement setups: heterodyne or homodyne detection
/// of either `σ_z` (QND) or `σ_-` (fluorescence).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "HeH")]
    HeH,
    #[serde(rename = "HeN")]
    HeN,
    #[serde(rename = "HoH")]
    HoH,
    #[serde(rename = "HoN")]
    HoN,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::HeH, Preset::HeN, Preset::HoH, Preset::HoN];

    pub fn name(self) -> &'static str {
        match self {
            Preset::HeH => "HeH",
            Preset::HeN => "HeN",
            Preset::HoH => "HoH",
            Preset::HoN => "HoN",
        }
    }

    pub fn is_heterodyne(self) -> bool {
        matches!(self, Preset::HeH | Preset::HeN)
    }

    /// `σ_z` for the Hermitian presets, `σ_-` for the fluorescence ones.
    pub fn operator(self) -> ComplexMatrix2 {
        match self {
            Preset::HeH | Preset::HoH => ComplexMatrix2::sigma_z(),
            Preset::HeN | Preset::HoN => ComplexMatrix2::sigma_minus(),
        }
    }

    pub fn model(self, eta: f64) -> Result<ModelSpec> {
        preset(self, eta)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "heh" => Ok(Preset::HeH),
            "hen" => Ok(Preset::HeN),
            "hoh" => Ok(Preset::HoH),
            "hon" => Ok(Preset::HoN),
            _ => Err(Error::InvalidArgument(format!("unknown preset {s:?}"))),
        }
    }
}

/// Heterodyne presets use the pair `(L, iL)`, homodyne presets `L` alone;
/// the Hamiltonian is zero in all four.
pub fn preset(name: Preset, eta: f64) -> Result<ModelSpec> {
    let l = name.operator();
    let mut pairs = vec![(l, eta)];
    if name.is_heterodyne() {
        pairs.push((l.scale(Complex64::new(0.0, 1.0)), eta));
    }
    ModelSpec::from_pairs(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{superop_f, BlochVector, DensityMatrix};

    #[test]
    fn channel_lists() {
        let m = preset(Preset::HoH, 0.3).unwrap();
        assert_eq!(m.channels.len(), 1);
        assert_eq!(m.channels[0].operator, ComplexMatrix2::sigma_z());
        assert_eq!(m.channels[0].efficiency, 0.3);
        let m = preset(Preset::HeN, 1.0).unwrap();
        assert_eq!(m.channels.len(), 2);
        assert_eq!(m.channels[0].operator, ComplexMatrix2::sigma_minus());
        assert_eq!(m.channels[1].operator, ComplexMatrix2::sigma_minus().scale(Complex64::new(0.0, 1.0)));
        assert!(m.channels.iter().all(|c| c.efficiency == 1.0));
        assert!(preset(Preset::HoN, 1.5).is_err());
        assert!("xyz".parse::<Preset>().is_err());
        assert_eq!("hen".parse::<Preset>().unwrap(), Preset::HeN);
    }

    #[test]
    fn rotated_channel_has_same_dissipator() {
        let i = Complex64::new(0.0, 1.0);
        let rho = DensityMatrix::from_bloch(BlochVector::new(0.3, 0.5, -0.4).unwrap()).unwrap();
        for l in [ComplexMatrix2::sigma_z(), ComplexMatrix2::sigma_minus()] {
            let sum = superop_f(&l, &rho) + superop_f(&l.scale(i), &rho);
            assert!(sum.approx_eq(&(superop_f(&l, &rho) * 2.0), 1e-15));
        }
    }
}
