use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use swarmselect::dataset::{clean, load_csv_with, synthesize, CsvOptions, SynthSpec};
use swarmselect::pipeline::GridConfig;
use swarmselect::Dataset;

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            _ => Err(format!("unknown format `{s}` (json, csv, svg)")),
        }
    }
}

/// Everything a run needs, loadable from JSON; command-line flags override
/// individual fields afterwards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub label_column: String,
    pub positive_label: Option<String>,
    pub synth: Option<SynthSpec>,
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
    pub grid: GridConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: None,
            label_column: "label".into(),
            positive_label: None,
            synth: None,
            output_dir: PathBuf::from("results"),
            formats: vec![Format::Json, Format::Csv, Format::Svg],
            grid: GridConfig::default(),
        }
    }
}

impl RunConfig {
    /// Read a config file; a relative `data` path is taken relative to the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))?;
        if let (Some(data), Some(dir)) = (&cfg.data, path.parent()) {
            if data.is_relative() {
                cfg.data = Some(dir.join(data));
            }
        }
        Ok(cfg)
    }

    /// Load (and clean) the configured dataset.
    pub fn dataset(&self) -> Result<Dataset, Failure> {
        let raw = match (&self.data, &self.synth) {
            (Some(path), None) => {
                let mut opts = CsvOptions::new(self.label_column.clone());
                opts.positive_label = self.positive_label.clone();
                load_csv_with(path, &opts)?
            }
            (None, Some(spec)) => synthesize(spec)?.0,
            (Some(_), Some(_)) => return Err(Failure::Usage("give either a data file or a synth spec, not both".into())),
            (None, None) => return Err(Failure::Usage("no data: pass --data or a config with `data` or `synth`".into())),
        };
        Ok(clean(&raw)?.0)
    }
}
