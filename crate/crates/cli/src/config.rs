use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Failure;

/// Keys of a `--config` JSON file. Names match the long flags; a flag given
/// on the command line wins over the file.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub backend: Option<String>,
    pub start: Option<String>,
    pub refine: Option<usize>,
    pub max_side: Option<u32>,
    pub inpaint_radius: Option<u32>,
    pub conf: Option<f64>,
    pub seed: Option<u64>,
    pub parallelism: Option<usize>,
    pub out: Option<PathBuf>,
    pub n_images: Option<usize>,
    pub n_texts: Option<usize>,
    pub mock_manifest: Option<PathBuf>,
    pub mock_jitter: Option<f64>,
    pub max_tokens: Option<u32>,
    pub temperature: Option<f32>,
    pub prior: Option<PathBuf>,
    pub gt: Option<PathBuf>,
    pub pred: Option<Vec<String>>,
    pub scorer: Option<String>,
    pub train_frac: Option<f64>,
    pub max_images: Option<usize>,
    pub max_texts: Option<usize>,
    pub detections: Option<PathBuf>,
    pub renderer: Option<String>,
    pub split: Option<String>,
    pub corpora: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub addr: Option<String>,
    pub ui: Option<PathBuf>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, Failure> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))
}

/// Flag, else config value, else default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}
