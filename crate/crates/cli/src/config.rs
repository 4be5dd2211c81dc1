use std::path::{Path, PathBuf};
use std::sync::Arc;

use qcurv_core::geometry::{ManifoldSpec, ModelManifold};
use qcurv_core::paneitz::{OperatorModel, OperatorSpec};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::Failure;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    manifold: ManifoldSpec,
    #[serde(default)]
    operator: OperatorSpec,
    #[serde(default)]
    seed: Option<u64>,
    /// command-specific section
    #[serde(default)]
    params: serde_json::Value,
}

pub struct RunConfig {
    pub manifold: ManifoldSpec,
    pub operator: OperatorSpec,
    pub seed: u64,
    pub params: serde_json::Value,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path, out: &Path, seed: Option<u64>) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        let raw: RawConfig = serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        Ok(RunConfig {
            manifold: raw.manifold,
            operator: raw.operator,
            seed: seed.or(raw.seed).unwrap_or(0),
            params: raw.params,
            out: out.to_path_buf(),
        })
    }

    /// Command parameters; a missing section falls back to the defaults.
    pub fn params<T: DeserializeOwned + Default>(&self) -> Result<T, Failure> {
        if self.params.is_null() {
            return Ok(T::default());
        }
        serde_json::from_value(self.params.clone()).map_err(|e| Failure::Config(format!("params: {e}")))
    }

    /// Parameters with no sensible default.
    pub fn required_params<T: DeserializeOwned>(&self) -> Result<T, Failure> {
        serde_json::from_value(self.params.clone()).map_err(|e| Failure::Config(format!("params: {e}")))
    }

    pub fn build(&self) -> Result<(Arc<ModelManifold>, Arc<OperatorModel>), Failure> {
        let m = ModelManifold::build(&self.manifold)?;
        let op = OperatorModel::from_spec(&m, &self.operator)?;
        Ok((m, op))
    }
}
