//! Experiment configuration (TOML) with strict schema checking.
//!
//! ```toml
//! [lattice]
//! nx_cells = 4
//! ny_cells = 4
//! d_a_x = 22.0
//! d_a_y = 22.0
//! d_b_x = 9.0
//! d_b_y = 9.0
//!
//! [run]
//! z_grid = [10.0, 15.0, 20.0, 25.0, 30.0]
//! injection = "corner_superposition"
//!
//! [output]
//! dir = "out/evolve"
//! format = "csv"
//! ```
//!
//! Every section and key is optional; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{Injection, DEFAULT_Z_GRID};
use crate::entanglement::VisibilityMap;
use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::spectrum::{DEFAULT_CORNER_THRESHOLD, DEFAULT_EDGE_THRESHOLD};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Points per segment of the Γ–X–M–Γ path.
    pub k_points_per_segment: usize,
    pub gap_grid: usize,
    pub wilson_grid: usize,
    /// Propagation distances, mm.
    pub z_grid: Vec<f64>,
    pub injection: Injection,
    /// Chebyshev radius of the return-probability window.
    pub return_width: usize,
    pub corner_threshold: f64,
    pub edge_threshold: f64,
    /// Energy window for spatial distributions; defaults to a narrow
    /// window around the on-site energy.
    pub energy_window: Option<[f64; 2]>,
    pub disorder_levels: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
    pub coupler_strength: f64,
    /// Defaults to the even-split length π / (4c).
    pub coupler_length: Option<f64>,
    pub visibility_map: VisibilityMap,
    pub entangle_z_grid: Vec<f64>,
    /// Loss rate on non-corner sites; defaults to 0.1 t_b.
    pub gamma: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            k_points_per_segment: 60,
            gap_grid: crate::bands::GAP_GRID,
            wilson_grid: crate::bands::WILSON_GRID,
            z_grid: DEFAULT_Z_GRID.to_vec(),
            injection: Injection::SingleSite(0),
            return_width: 0,
            corner_threshold: DEFAULT_CORNER_THRESHOLD,
            edge_threshold: DEFAULT_EDGE_THRESHOLD,
            energy_window: None,
            disorder_levels: vec![0.0, 0.05, 0.1],
            realizations: 50,
            seed: 0,
            coupler_strength: 1.0,
            coupler_length: None,
            visibility_map: VisibilityMap::Identity,
            entangle_z_grid: vec![0.0, 5.0, 11.0, 20.0, 30.0],
            gamma: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub lattice: LatticeSpec,
    pub run: RunConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            lattice: LatticeSpec::sample_c4(),
            run: RunConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical TOML serialization.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml_string()?.as_bytes())))
    }

    pub fn validate(&self) -> Result<()> {
        self.lattice.validate()?;
        let run = &self.run;
        let bad = |msg: String| Err(Error::Config(msg));
        if run.k_points_per_segment == 0 {
            return bad("k_points_per_segment must be positive".into());
        }
        if run.gap_grid < 2 {
            return bad("gap_grid must be at least 2".into());
        }
        if run.z_grid.iter().chain(&run.entangle_z_grid).any(|&z| !(z >= 0.0 && z.is_finite())) {
            return bad("propagation distances must be finite and non-negative".into());
        }
        if run.disorder_levels.iter().any(|&l| !(0.0..1.0).contains(&l)) {
            return bad("disorder levels must lie in [0, 1)".into());
        }
        if run.realizations == 0 {
            return bad("realizations must be positive".into());
        }
        if !(run.coupler_strength >= 0.0) {
            return bad("coupler_strength must be non-negative".into());
        }
        if let Some([lo, hi]) = run.energy_window {
            if !(lo <= hi) {
                return bad(format!("energy window [{lo}, {hi}] is empty"));
            }
        }
        if run.gamma.is_some_and(|g| !(g >= 0.0)) {
            return bad("gamma must be non-negative".into());
        }
        run.visibility_map.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}
