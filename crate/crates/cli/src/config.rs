use std::path::{Path, PathBuf};

use readlens_core::agents::{CuratorOptions, EvaluatorOptions, HttpSettings};
use readlens_core::clustering::{Method, DEFAULT_GAMMA};
use readlens_core::gaze_events::IvtParams;
use readlens_core::ScreenGeometry;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusteringConfig {
    pub seed: u64,
    pub k_min: usize,
    pub k_max: usize,
    pub gamma: f64,
    pub methods: Vec<Method>,
    /// Method whose selected model feeds ANOVA, the heatmap and the report.
    pub report_method: Method,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        ClusteringConfig {
            seed: 7,
            k_min: 2,
            k_max: 8,
            gamma: DEFAULT_GAMMA,
            methods: Method::ALL.to_vec(),
            report_method: Method::Kmeans,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub mock: bool,
    pub http: HttpSettings,
    pub curator: CuratorOptions,
    pub evaluator: EvaluatorOptions,
    pub role_instruction: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub screen: ScreenGeometry,
    pub ivt: IvtParams,
    pub clustering: ClusteringConfig,
    pub llm: LlmConfig,
    pub jobs: Option<usize>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            data_dir: PathBuf::from("data"),
            out_dir: PathBuf::from("out"),
            screen: ScreenGeometry::default(),
            ivt: IvtParams::default(),
            clustering: ClusteringConfig::default(),
            llm: LlmConfig::default(),
            jobs: None,
        }
    }
}

impl Config {
    /// Relative paths in the file resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: Config =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.data_dir, &mut cfg.out_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.screen.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.ivt.validate().map_err(CliError::Config)?;
        let c = &self.clustering;
        if c.k_min < 2 || c.k_max < c.k_min {
            return Err(CliError::Config(format!("invalid k range {}-{}", c.k_min, c.k_max)));
        }
        if !(c.gamma.is_finite() && c.gamma > 0.0) {
            return Err(CliError::Config("gamma must be positive".into()));
        }
        if c.methods.is_empty() {
            return Err(CliError::Config("no clustering method selected".into()));
        }
        if !c.methods.contains(&c.report_method) {
            return Err(CliError::Config(format!(
                "report method {} is not among the clustering methods",
                c.report_method
            )));
        }
        if self.llm.evaluator.runs == 0 {
            return Err(CliError::Config("evaluator runs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Parses `a-b`, `a..b`, `a..=b` or a single `k`.
pub fn parse_k_range(s: &str) -> Result<(usize, usize), String> {
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("bad k range {s:?}"));
    let (a, b) = if let Some((a, b)) = s.split_once("..=") {
        (parse(a)?, parse(b)?)
    } else if let Some((a, b)) = s.split_once("..") {
        (parse(a)?, parse(b)?)
    } else if let Some((a, b)) = s.split_once('-') {
        (parse(a)?, parse(b)?)
    } else {
        let k = parse(s)?;
        (k, k)
    };
    if a < 2 || b < a {
        return Err(format!("bad k range {s:?}: need 2 <= min <= max"));
    }
    Ok((a, b))
}
