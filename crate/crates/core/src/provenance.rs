//! Content hashes stamped onto preprocessing artifacts and trained models.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub fn sha256_lines<'a>(lines: impl IntoIterator<Item = &'a str>) -> String {
    let mut h = Sha256::new();
    for line in lines {
        h.update(line.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

/// Hashes of the lemma table, cluster configuration and training vocabulary a
/// model was built with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub lemma_table: String,
    pub clusters: String,
    pub vocabulary: String,
}

/// Identifies the set of rows a statistic was computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RowSetId {
    pub n_rows: usize,
    pub digest: u64,
}

impl RowSetId {
    pub fn of(rows: &[usize]) -> Self {
        let mut h = Sha256::new();
        for r in rows {
            h.update((*r as u64).to_le_bytes());
        }
        let bytes = h.finalize();
        let mut first = [0u8; 8];
        first.copy_from_slice(&bytes[..8]);
        RowSetId {
            n_rows: rows.len(),
            digest: u64::from_le_bytes(first),
        }
    }
}
