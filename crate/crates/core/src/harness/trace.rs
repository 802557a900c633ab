//! Run traces: one JSON header line, then one JSON record per step.
//!
//! Identical configurations produce byte-identical traces except for the
//! `wall_time_ms` fields; [`Trace::canonical_without_timing`] strips those
//! for comparison.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::RunConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceHeader {
    pub version: String,
    pub algorithm: String,
    pub config: RunConfig,
}

/// Per-step record. Fields that only exist for some algorithms (or only
/// on checked steps) are optional and serialized as `null`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    /// Chosen row/column index; absent on the initial record.
    pub t: Option<usize>,
    /// Normalization constant: `μ_k` (row action) or `k+1` (column
    /// action); absent on classical-only runs.
    pub mu: Option<f64>,
    pub classical_residual_norm: Option<f64>,
    /// Max entrywise block-equality deviation, when checked this step.
    pub block_fidelity: Option<f64>,
    /// Weight of the all-zeros ancilla pattern, when checked this step.
    pub success_probability: Option<f64>,
    pub state_amplitudes: usize,
    pub oracle_calls: u64,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = serde_json::to_string(&self.header)?;
        out.push('\n');
        for record in &self.records {
            out.push_str(&serde_json::to_string(record)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write_to_path(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_jsonl()?)?;
        Ok(())
    }

    pub fn from_jsonl(text: &str) -> Result<Trace> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header_line = lines
            .next()
            .ok_or_else(|| Error::Parse("empty trace".into()))?;
        let header: TraceHeader = serde_json::from_str(header_line)?;
        let records = lines
            .map(|l| serde_json::from_str(l).map_err(Error::from))
            .collect::<Result<Vec<TraceRecord>>>()?;
        Ok(Trace { header, records })
    }

    /// JSONL with every `wall_time_ms` removed, for byte comparison.
    pub fn canonical_without_timing(text: &str) -> Result<String> {
        let mut out = String::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let mut value: serde_json::Value = serde_json::from_str(line)?;
            if let Some(map) = value.as_object_mut() {
                map.remove("wall_time_ms");
            }
            out.push_str(&serde_json::to_string(&value)?);
            out.push('\n');
        }
        Ok(out)
    }

    /// Largest checked block deviation across the run.
    pub fn worst_block_fidelity(&self) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.block_fidelity)
            .fold(None, |acc, f| Some(acc.map_or(f, |a: f64| a.max(f))))
    }
}
