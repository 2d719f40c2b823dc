use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{CensusError, CensusRow};
use crate::autcoeffs::CoeffProvider;
use crate::lfun::{AfeConfig, CoefficientTable};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardHeader {
    pub q: u64,
    /// SHA-256 of the provider data, the coefficient table, the AFE config and `q`.
    pub input_hash: String,
}

#[derive(Serialize, Deserialize)]
struct Shard {
    header: ShardHeader,
    rows: Vec<CensusRow>,
}

/// Per-modulus result files `q<q>.json` under one run directory.
#[derive(Debug, Clone)]
pub struct ShardStore {
    dir: PathBuf,
    base: Sha256,
}

impl ShardStore {
    pub fn open(dir: &Path, provider: &CoeffProvider, coeffs: &CoefficientTable, config: &AfeConfig) -> Result<Self, CensusError> {
        std::fs::create_dir_all(dir).map_err(|source| CensusError::Io { path: dir.to_path_buf(), source })?;
        let mut base = Sha256::new();
        let identity = serde_json::json!({
            "name": provider.name(),
            "conductor": provider.conductor(),
            "mu": provider.mu(),
            "root_constant": provider.root_constant(),
            "config": config,
            "limit": coeffs.limit(),
        });
        base.update(identity.to_string().as_bytes());
        for n in 1..=coeffs.limit() {
            let c = coeffs.scaled(n);
            base.update(c.re.to_le_bytes());
            base.update(c.im.to_le_bytes());
        }
        Ok(ShardStore { dir: dir.to_path_buf(), base })
    }

    pub fn path(&self, q: u64) -> PathBuf {
        self.dir.join(format!("q{q}.json"))
    }

    pub fn input_hash(&self, q: u64) -> String {
        let mut h = self.base.clone();
        h.update(q.to_le_bytes());
        hex::encode(h.finalize())
    }

    /// Rows of a completed shard whose header matches the current inputs.
    pub fn load(&self, q: u64) -> Result<Option<Vec<CensusRow>>, CensusError> {
        let path = self.path(q);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(source) => return Err(CensusError::Io { path, source }),
        };
        let Ok(shard) = serde_json::from_str::<Shard>(&text) else { return Ok(None) };
        let expected = ShardHeader { q, input_hash: self.input_hash(q) };
        Ok((shard.header == expected).then_some(shard.rows))
    }

    pub fn save(&self, q: u64, rows: &[CensusRow]) -> Result<(), CensusError> {
        let path = self.path(q);
        let shard = Shard { header: ShardHeader { q, input_hash: self.input_hash(q) }, rows: rows.to_vec() };
        let text = serde_json::to_string_pretty(&shard).map_err(|e| CensusError::Shard { path: path.clone(), msg: e.to_string() })?;
        let io = |source| CensusError::Io { path: path.clone(), source };
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(io)?;
        tmp.write_all(text.as_bytes()).map_err(io)?;
        tmp.persist(&path).map_err(|e| io(e.error))?;
        Ok(())
    }
}
