use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::scheduler::DIAGONAL_EPSILON;
use crate::wrapper::WrapperConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(role: &str, bytes: &[u8]) -> Self {
        Self { role: role.into(), sha256: hex::encode(Sha256::digest(bytes)) }
    }
}

/// Provenance block attached to every JSON, CSV and SVG artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub config: WrapperConfig,
    /// Bidirectional pins get one input and one output wrapper cell.
    pub bidir_policy: String,
    /// Several tests of one module are run back to back.
    pub pattern_merge: String,
    pub diagonal_epsilon: f64,
    /// RFC 3339, UTC; absent under `--no-timestamp`.
    pub timestamp: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str, inputs: Vec<InputDigest>, config: WrapperConfig, stamp: bool) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            inputs,
            config,
            bidir_policy: "cell-per-side".into(),
            pattern_merge: "sum".into(),
            diagonal_epsilon: DIAGONAL_EPSILON,
            timestamp: stamp.then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }

    /// The leading comment line of a CSV artifact.
    pub fn csv_comment(&self) -> String {
        format!("# manifest: {}\n", self.to_json())
    }
}
