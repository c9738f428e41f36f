use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryParams;
use crate::error::{Error, Result};
use crate::order::OrderParams;
use crate::sampling::SamplingParams;

/// Where per-frame flows come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlowSource {
    /// `<dir>/<stem>.prev.flo` and `<dir>/<stem>.next.flo` next to each frame stem.
    FloDir { dir: PathBuf },
    /// Block matching between the frame and its neighbors.
    Internal {
        #[serde(default = "default_block")]
        block: usize,
        #[serde(default = "default_radius")]
        radius: usize,
    },
}

fn default_block() -> usize {
    9
}

fn default_radius() -> usize {
    10
}

impl FlowSource {
    pub fn internal() -> Self {
        FlowSource::Internal {
            block: default_block(),
            radius: default_radius(),
        }
    }
}

/// Parameters that drive annotation of one clip, independent of file paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionParams {
    /// Frame distance to the neighbors. Overrides `order.baseline`.
    pub baseline: usize,
    /// Overrides `sampling.seed`.
    pub seed: u64,
    pub boundary: BoundaryParams,
    pub order: OrderParams,
    pub sampling: SamplingParams,
}

impl Default for ExtractionParams {
    fn default() -> Self {
        Self {
            baseline: 2,
            seed: 0,
            boundary: BoundaryParams::default(),
            order: OrderParams::default(),
            sampling: SamplingParams::default(),
        }
    }
}

impl ExtractionParams {
    /// Copies the top-level baseline and seed into the per-stage parameters.
    pub fn resolved(&self) -> Self {
        let mut p = *self;
        p.order.baseline = p.baseline;
        p.sampling.seed = p.seed;
        p
    }

    pub fn validate(&self) -> Result<()> {
        if self.baseline == 0 {
            return Err(Error::param("baseline must be >= 1"));
        }
        self.boundary.validate()?;
        self.order.validate()?;
        self.sampling.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Directory of PNG/PPM/PGM frames, processed in file-name order.
    pub frames_dir: PathBuf,
    pub flow: FlowSource,
    /// JSON Lines output.
    pub out: PathBuf,
    #[serde(default)]
    pub overlay_dir: Option<PathBuf>,
    #[serde(default = "default_baseline")]
    pub baseline: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub boundary: BoundaryParams,
    #[serde(default)]
    pub order: OrderParams,
    #[serde(default)]
    pub sampling: SamplingParams,
}

fn default_baseline() -> usize {
    2
}

impl PipelineConfig {
    pub fn new(frames_dir: impl Into<PathBuf>, flow: FlowSource, out: impl Into<PathBuf>) -> Self {
        Self {
            frames_dir: frames_dir.into(),
            flow,
            out: out.into(),
            overlay_dir: None,
            baseline: default_baseline(),
            seed: 0,
            boundary: BoundaryParams::default(),
            order: OrderParams::default(),
            sampling: SamplingParams::default(),
        }
    }

    pub fn params(&self) -> ExtractionParams {
        ExtractionParams {
            baseline: self.baseline,
            seed: self.seed,
            boundary: self.boundary,
            order: self.order,
            sampling: self.sampling,
        }
    }

    /// Parses TOML. Relative paths are resolved against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        };
        fix(&mut cfg.frames_dir);
        fix(&mut cfg.out);
        if let Some(dir) = cfg.overlay_dir.as_mut() {
            fix(dir);
        }
        if let FlowSource::FloDir { dir } = &mut cfg.flow {
            fix(dir);
        }
        Ok(cfg)
    }

    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parameter checks plus existence of the input directories.
    pub fn validate(&self) -> Result<()> {
        self.params()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if !self.frames_dir.is_dir() {
            return Err(Error::Config(format!(
                "frames_dir {} is not a directory",
                self.frames_dir.display()
            )));
        }
        match &self.flow {
            FlowSource::FloDir { dir } if !dir.is_dir() => {
                Err(Error::Config(format!("flow dir {} is not a directory", dir.display())))
            }
            FlowSource::Internal { block, radius } if block % 2 == 0 || *radius == 0 => Err(Error::Config(
                format!("internal flow needs an odd block and a positive radius, got {block} and {radius}"),
            )),
            _ => Ok(()),
        }
    }
}
