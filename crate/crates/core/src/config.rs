//! Experiment manifest, stored as TOML. Frequencies are given in Hz and
//! lengths in mm.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forward::{PathId, SynthesisMode};
use crate::imaging::{ImagingOptions, RasterSpec, RightConvention, SteeringSource};
use crate::scene::{Point2, Scene, SceneError, Target, SPEED_OF_LIGHT_MM_S};
use crate::subspace::Selection;
use crate::waveform::{FrequencyGrid, Pulse, WaveformError};

/// The shipped paper-defaults manifest.
pub const PAPER_DEFAULTS_TOML: &str = include_str!("../../../configs/paper_defaults.toml");

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("{field}: {message}")]
    Invalid { field: &'static str, message: String },
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Waveform(#[from] WaveformError),
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub antenna: Point2,
    pub reflection_coeff: ComplexValue,
    pub speed_mm_s: f64,
    pub targets: Vec<Target>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// omega0 / 2 pi
    pub f0_hz: f64,
    /// delta_omega / 2 pi
    pub delta_f_hz: f64,
    pub l_split: usize,
    pub n_total: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub center_freq_hz: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Methods {
    Tr,
    Dort,
    Both,
}

impl Methods {
    pub fn tr(self) -> bool {
        matches!(self, Methods::Tr | Methods::Both)
    }

    pub fn dort(self) -> bool {
        matches!(self, Methods::Dort | Methods::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagingConfig {
    pub methods: Methods,
    pub synthesis: SynthesisMode,
    pub paths: Vec<PathId>,
    pub k_targets: usize,
    /// Use sigma_i / sigma_1 < threshold instead of L - P*K to size the noise subspace.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_threshold: Option<f64>,
    pub steering_source: SteeringSource,
    pub right_convention: RightConvention,
    pub sharpness_q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub enabled: bool,
    pub snr_db: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub write_pgm: bool,
    /// Adds wall-clock runtimes to result tables, which makes them non-reproducible.
    pub record_timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub radii_mm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scene: SceneConfig,
    pub grid: GridConfig,
    pub pulse: PulseConfig,
    pub raster: RasterSpec,
    pub imaging: ImagingConfig,
    pub noise: NoiseConfig,
    pub output: OutputConfig,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::paper_defaults()
    }
}

impl RunConfig {
    pub fn paper_defaults() -> Self {
        RunConfig {
            scene: SceneConfig {
                antenna: Point2::new(0.0, 600.0),
                reflection_coeff: ComplexValue { re: -1.0, im: 0.0 },
                speed_mm_s: SPEED_OF_LIGHT_MM_S,
                targets: vec![Target::point(Point2::new(600.0, 750.0))],
            },
            grid: GridConfig { f0_hz: 1.5e9, delta_f_hz: 60e6, l_split: 10, n_total: 100 },
            pulse: PulseConfig { center_freq_hz: 4e9, amplitude: 1.0 },
            raster: RasterSpec::paper_default(),
            imaging: ImagingConfig {
                methods: Methods::Both,
                synthesis: SynthesisMode::MatchedFilter,
                paths: PathId::ALL.to_vec(),
                k_targets: 1,
                energy_threshold: None,
                steering_source: SteeringSource::Transmit,
                right_convention: RightConvention::Conjugate,
                sharpness_q: 4.0,
            },
            noise: NoiseConfig { enabled: false, snr_db: 30.0, seed: 0 },
            output: OutputConfig {
                dir: PathBuf::from("out"),
                write_pgm: true,
                record_timing: false,
            },
            sweep: SweepConfig { radii_mm: vec![1.0, 5.0, 10.0, 20.0, 30.0] },
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    pub fn scene(&self) -> Result<Scene, ConfigError> {
        let s = Scene {
            antenna: self.scene.antenna,
            reflection_coeff: Complex64::new(
                self.scene.reflection_coeff.re,
                self.scene.reflection_coeff.im,
            ),
            targets: self.scene.targets.clone(),
            speed: self.scene.speed_mm_s,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn grid(&self) -> Result<FrequencyGrid, ConfigError> {
        let g = &self.grid;
        if !(g.f0_hz.is_finite() && g.delta_f_hz.is_finite()) {
            return Err(invalid("grid", "frequencies must be finite"));
        }
        Ok(FrequencyGrid::new(
            2.0 * std::f64::consts::PI * g.f0_hz,
            2.0 * std::f64::consts::PI * g.delta_f_hz,
            g.n_total,
            g.l_split,
        )?)
    }

    pub fn pulse(&self) -> Result<Pulse, ConfigError> {
        if !self.pulse.amplitude.is_finite() {
            return Err(invalid("pulse.amplitude", "must be finite"));
        }
        Ok(Pulse::monocycle(self.pulse.center_freq_hz, self.pulse.amplitude)?)
    }

    pub fn imaging_options(&self) -> ImagingOptions {
        ImagingOptions {
            paths: self.imaging.paths.clone(),
            steering_source: self.imaging.steering_source,
            right_convention: self.imaging.right_convention,
        }
    }

    pub fn selection(&self) -> Selection {
        match self.imaging.energy_threshold {
            Some(eps) => Selection::EnergyThreshold(eps),
            None => Selection::PathsTargets {
                p_paths: self.imaging.paths.len(),
                k_targets: self.imaging.k_targets,
            },
        }
    }

    /// Checks everything that can be checked without running the pipeline.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.scene()?;
        let grid = self.grid()?;
        self.pulse()?;
        self.raster.validate().map_err(|e| invalid("raster", e.to_string()))?;
        let im = &self.imaging;
        if im.paths.is_empty() {
            return Err(invalid("imaging.paths", "at least one path is required"));
        }
        let mut seen = im.paths.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != im.paths.len() {
            return Err(invalid("imaging.paths", "paths must be distinct"));
        }
        if im.k_targets == 0 {
            return Err(invalid("imaging.k_targets", "must be at least 1"));
        }
        if im.energy_threshold.is_none() && im.paths.len() * im.k_targets >= grid.split() {
            return Err(invalid(
                "imaging",
                format!(
                    "P*K = {}*{} must be less than L = {}",
                    im.paths.len(),
                    im.k_targets,
                    grid.split()
                ),
            ));
        }
        if let Some(eps) = im.energy_threshold {
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(invalid("imaging.energy_threshold", "must lie in (0, 1]"));
            }
        }
        if !(im.sharpness_q >= 1.0 && im.sharpness_q.is_finite()) {
            return Err(invalid("imaging.sharpness_q", "must be a finite order >= 1"));
        }
        if self.noise.enabled && !self.noise.snr_db.is_finite() {
            return Err(invalid("noise.snr_db", "must be finite when noise is enabled"));
        }
        if self.sweep.radii_mm.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(invalid("sweep.radii_mm", "radii must be finite and non-negative"));
        }
        Ok(())
    }

    /// Copy with every target's radius set to `r`.
    pub fn with_radius(&self, r: f64) -> RunConfig {
        let mut cfg = self.clone();
        for t in &mut cfg.scene.targets {
            t.radius = r;
        }
        cfg
    }
}
