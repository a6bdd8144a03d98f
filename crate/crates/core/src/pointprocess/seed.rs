//! Hierarchical, counter-based seed derivation.
//!
//! A child seed is the SHA-256 digest of the parent key followed by the
//! length-prefixed child label. Streams therefore depend only on their path
//! from the root, never on the order in which replicates are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{PvError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedPath {
    /// Human-readable lineage, e.g. `root/lambda=500/rep/3`.
    pub path: String,
    #[serde(with = "hex_key")]
    pub key: [u8; 32],
}

impl SeedPath {
    /// Root seed from a hex string (any length, at least one byte).
    pub fn root_from_hex(hex_seed: &str) -> Result<Self> {
        let trimmed = hex_seed.trim().trim_start_matches("0x");
        let bytes = hex::decode(trimmed)
            .map_err(|e| PvError::Config(format!("seed `{hex_seed}` is not valid hex: {e}")))?;
        if bytes.is_empty() {
            return Err(PvError::Config("seed must contain at least one byte".into()));
        }
        let mut h = Sha256::new();
        h.update(b"pvlab-root\0");
        h.update(&bytes);
        Ok(SeedPath {
            path: format!("0x{}", trimmed.to_ascii_lowercase()),
            key: h.finalize().into(),
        })
    }

    pub fn root_from_u64(seed: u64) -> Self {
        Self::root_from_hex(&format!("{seed:016x}")).expect("u64 hex is valid")
    }

    pub fn derive(&self, label: impl std::fmt::Display) -> SeedPath {
        let label = label.to_string();
        let mut h = Sha256::new();
        h.update(self.key);
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        SeedPath {
            path: format!("{}/{}", self.path, label),
            key: h.finalize().into(),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key)
    }

    pub fn key_hex(&self) -> String {
        hex::encode(self.key)
    }
}

/// Free-function form of [`SeedPath::derive`].
pub fn derive_seed(parent: &SeedPath, label: impl std::fmt::Display) -> SeedPath {
    parent.derive(label)
}

mod hex_key {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(key: &[u8; 32], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(key))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; 32], D::Error> {
        let s = String::deserialize(d)?;
        let v = hex::decode(&s).map_err(serde::de::Error::custom)?;
        v.try_into()
            .map_err(|_| serde::de::Error::custom("seed key must be 32 bytes"))
    }
}
