use serde::{Deserialize, Serialize};

use super::ComplexMatrix2;
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// One measurement or decoherence channel: Lindblad operator `L` monitored
/// with efficiency `η ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LindbladChannel {
    pub operator: ComplexMatrix2,
    pub efficiency: f64,
}

impl LindbladChannel {
    pub fn new(operator: ComplexMatrix2, efficiency: f64) -> Result<Self> {
        if !efficiency.is_finite() || !(0.0..=1.0).contains(&efficiency) {
            return Err(Error::Efficiency(efficiency));
        }
        if !operator.is_finite() {
            return Err(Error::NonFinite("Lindblad operator"));
        }
        Ok(Self { operator, efficiency })
    }
}

impl<'de> Deserialize<'de> for LindbladChannel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            operator: ComplexMatrix2,
            efficiency: f64,
        }
        let r = Raw::deserialize(d)?;
        LindbladChannel::new(r.operator, r.efficiency).map_err(serde::de::Error::custom)
    }
}

/// Hamiltonian plus an ordered list of channels, each driven by its own
/// Wiener process.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    pub hamiltonian: ComplexMatrix2,
    pub channels: Vec<LindbladChannel>,
}

impl ModelSpec {
    pub fn new(hamiltonian: ComplexMatrix2, channels: Vec<LindbladChannel>) -> Result<Self> {
        if !hamiltonian.is_finite() {
            return Err(Error::NonFinite("Hamiltonian"));
        }
        let h = hamiltonian.hermiticity_defect();
        if h > Tolerances::DEFAULT.algebraic {
            return Err(Error::NotHermitian(h));
        }
        Ok(Self { hamiltonian, channels })
    }

    /// No Hamiltonian.
    pub fn from_channels(channels: Vec<LindbladChannel>) -> Self {
        Self { hamiltonian: ComplexMatrix2::zero(), channels }
    }

    /// Convenience: `(operator, efficiency)` pairs with `H = 0`.
    pub fn from_pairs(pairs: &[(ComplexMatrix2, f64)]) -> Result<Self> {
        let channels = pairs
            .iter()
            .map(|&(l, e)| LindbladChannel::new(l, e))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_channels(channels))
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidArgument(format!("model JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialises")
    }
}

impl<'de> Deserialize<'de> for ModelSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            #[serde(default)]
            hamiltonian: ComplexMatrix2,
            channels: Vec<LindbladChannel>,
        }
        let r = Raw::deserialize(d)?;
        ModelSpec::new(r.hamiltonian, r.channels).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let m = ModelSpec::from_pairs(&[(ComplexMatrix2::sigma_minus(), 0.24)]).unwrap();
        let s = m.to_json();
        assert_eq!(ModelSpec::from_json(&s).unwrap(), m);
    }

    #[test]
    fn rejects_bad_efficiency_and_hamiltonian() {
        assert!(LindbladChannel::new(ComplexMatrix2::sigma_z(), 1.2).is_err());
        assert!(LindbladChannel::new(ComplexMatrix2::sigma_z(), f64::NAN).is_err());
        let bad = r#"{"hamiltonian": [[[0,0],[1,0]],[[0,0],[0,0]]], "channels": []}"#;
        assert!(ModelSpec::from_json(bad).is_err());
        let bad_eta = r#"{"channels": [{"operator": [[[1,0],[0,0]],[[0,0],[-1,0]]], "efficiency": -0.1}]}"#;
        assert!(ModelSpec::from_json(bad_eta).is_err());
    }
}
