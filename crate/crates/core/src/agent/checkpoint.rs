//! Versioned model checkpoints. JSON keeps the dump human-inspectable, and
//! floating-point fields round-trip bit-exactly because numbers are written
//! in shortest-round-trip form.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::embedding::EmbeddingConfig;
use super::model::ActorCriticParams;
use super::training::TrainConfig;

pub const CHECKPOINT_VERSION: u32 = 1;

/// Everything needed to reuse a trained policy on another graph: the
/// parameters plus the embedding recipe that produced its input features.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub embedding: EmbeddingConfig,
    pub train: TrainConfig,
    pub params: ActorCriticParams,
}

impl Checkpoint {
    pub fn new(embedding: EmbeddingConfig, train: TrainConfig, params: ActorCriticParams) -> Self {
        Checkpoint { version: CHECKPOINT_VERSION, embedding, train, params }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let body = serde_json::to_string(self)
            .map_err(|e| Error::Checkpoint(format!("serialize failed: {e}")))?;
        fs::write(path, body)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let body = fs::read_to_string(path)?;
        let ckpt: Checkpoint = serde_json::from_str(&body)
            .map_err(|e| Error::Checkpoint(format!("parse failed for {}: {e}", path.display())))?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {})",
                ckpt.version, CHECKPOINT_VERSION
            )));
        }
        if !ckpt.params.is_finite() {
            return Err(Error::Checkpoint("checkpoint holds non-finite parameters".into()));
        }
        Ok(ckpt)
    }
}
