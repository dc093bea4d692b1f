//! Artifact files: CSV with a `# provenance:` first line, or JSON objects
//! with a `provenance` member.

use std::fs;
use std::path::{Path, PathBuf};

use monitored_qubit::rng::derive_seed;
use monitored_qubit::sde::{Ensemble, Trajectory, TrajectoryPoint};
use monitored_qubit::{BlochVector, ModelSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::Command;

pub const TOOL: &str = "mqubit";
const CSV_PREFIX: &str = "# provenance: ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(path: &Path, bytes: &[u8]) -> Self {
        Self { path: path.to_path_buf(), sha256: sha256_hex(bytes) }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Everything needed to regenerate an artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub library_version: String,
    pub command: Command,
    /// Base seeds of every random stream the run used.
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<InputDigest>,
}

impl Provenance {
    pub fn new(command: Command) -> Self {
        Self {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            library_version: monitored_qubit::VERSION.into(),
            command,
            seeds: Vec::new(),
            model: None,
            inputs: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    /// CSV text after the provenance line; may include further `#` lines.
    Csv(String),
    Json(serde_json::Value),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub provenance: Provenance,
    pub body: Body,
}

impl Artifact {
    pub fn json(provenance: Provenance, payload: &impl Serialize) -> Result<Self> {
        let value = serde_json::to_value(payload).map_err(|e| CliError::invalid(format!("serialising output: {e}")))?;
        Ok(Self { provenance, body: Body::Json(value) })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        match &self.body {
            Body::Csv(text) => {
                let head = serde_json::to_string(&self.provenance).expect("provenance serialises");
                format!("{CSV_PREFIX}{head}\n{text}").into_bytes()
            }
            Body::Json(value) => {
                let mut obj = match value {
                    serde_json::Value::Object(m) => m.clone(),
                    other => {
                        let mut m = serde_json::Map::new();
                        m.insert("result".into(), other.clone());
                        m
                    }
                };
                obj.insert("provenance".into(), serde_json::to_value(&self.provenance).expect("provenance serialises"));
                let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(obj)).expect("json serialises");
                s.push('\n');
                s.into_bytes()
            }
        }
    }
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn provenance_from_bytes(bytes: &[u8], path: &Path) -> Result<Provenance> {
    let text = std::str::from_utf8(bytes).map_err(|_| CliError::invalid(format!("{} is not UTF-8", path.display())))?;
    let bad = |e: serde_json::Error| CliError::invalid(format!("{}: unreadable provenance: {e}", path.display()));
    if let Some(rest) = text.strip_prefix(CSV_PREFIX) {
        let line = rest.lines().next().unwrap_or("");
        return serde_json::from_str(line).map_err(bad);
    }
    let value: serde_json::Value = serde_json::from_str(text).map_err(bad)?;
    match value.get("provenance") {
        Some(p) => serde_json::from_value(p.clone()).map_err(bad),
        None => Err(CliError::invalid(format!("{} carries no provenance", path.display()))),
    }
}

pub fn read_provenance(path: &Path) -> Result<Provenance> {
    provenance_from_bytes(&read_file(path)?, path)
}

/// Recorded trajectories of a `simulate` artifact, with its provenance.
pub fn read_ensemble(path: &Path) -> Result<(Provenance, Ensemble, InputDigest)> {
    let bytes = read_file(path)?;
    let prov = provenance_from_bytes(&bytes, path)?;
    let Command::Simulate(args) = &prov.command else {
        return Err(CliError::invalid(format!("{} is not a simulate artifact", path.display())));
    };
    let model = prov.model.clone().ok_or_else(|| CliError::invalid(format!("{} records no model", path.display())))?;
    let bad = |msg: String| CliError::invalid(format!("{}: {msg}", path.display()));

    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes.as_slice());
    let width = 5 + model.channel_count();
    let mut trajectories: Vec<Trajectory> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() != width {
            return Err(bad(format!("row {} has {} fields, expected {width}", line + 1, record.len())));
        }
        let id: usize = record[0].parse().map_err(|_| bad(format!("row {}: bad trajectory id", line + 1)))?;
        let nums = record
            .iter()
            .skip(1)
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|_| bad(format!("row {}: bad number", line + 1)))?;
        let state = BlochVector::new(nums[1], nums[2], nums[3])?;
        let point = TrajectoryPoint { time: nums[0], state, records: nums[4..].to_vec() };
        if id == trajectories.len() {
            trajectories.push(Trajectory {
                points: Vec::new(),
                seed: derive_seed(args.run.seed, id as u64),
                dt: args.run.dt,
                record_stride: args.run.stride,
                projections: 0,
            });
        } else if id + 1 != trajectories.len() {
            return Err(bad(format!("row {}: trajectory ids must be contiguous", line + 1)));
        }
        trajectories.last_mut().expect("pushed above").points.push(point);
    }
    if trajectories.is_empty() {
        return Err(bad("no trajectories".into()));
    }
    let ensemble = Ensemble { trajectories, model, dt: args.run.dt, horizon: args.run.horizon, base_seed: args.run.seed };
    Ok((prov, ensemble, InputDigest::of(path, &bytes)))
}

/// CSV body of an ensemble: `traj_id,t,x,y,z,dy_1..dy_m`.
pub fn ensemble_csv(ens: &Ensemble) -> Result<String> {
    let m = ens.model.channel_count();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["traj_id".to_string(), "t".into(), "x".into(), "y".into(), "z".into()];
    header.extend((1..=m).map(|k| format!("dy_{k}")));
    let csv_err = |e: csv::Error| CliError::invalid(format!("writing CSV: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for (id, t) in ens.trajectories.iter().enumerate() {
        for p in &t.points {
            let mut row = vec![id.to_string(), p.time.to_string(), p.state.x.to_string(), p.state.y.to_string(), p.state.z.to_string()];
            row.extend(p.records.iter().map(|r| r.to_string()));
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::invalid(format!("writing CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV of numbers is UTF-8"))
}
