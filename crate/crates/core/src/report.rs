//! Check records and reports shared by the verification suite and the CLI.

use serde::{Deserialize, Serialize};

/// One verification record: a named check, the parameters it ran with, the
/// measured residual against its threshold, and replay information.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub params: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skip_rate: Option<f64>,
    pub seed: u64,
    pub elapsed_ms: f64,
}

impl CheckRecord {
    pub fn summary_line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let skip = self
            .skip_rate
            .map(|s| format!(" skip_rate={s:.3}"))
            .unwrap_or_default();
        format!(
            "{status} {name} residual={residual:.3e} threshold={threshold:.1e}{skip} ({params})",
            name = self.name,
            residual = self.residual,
            threshold = self.threshold,
            params = self.params,
        )
    }
}

/// An ordered list of check records; passes only if every record passes.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Report {
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn push(&mut self, record: CheckRecord) {
        self.records.push(record);
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failing(&self) -> Vec<&CheckRecord> {
        self.records.iter().filter(|r| !r.pass).collect()
    }
}
