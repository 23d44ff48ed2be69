//! Experiment configuration: one JSON document drives simulation, bounds,
//! reconstruction, and benchmarking. Validation is exhaustive: every
//! problem is reported before any compute starts.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fast_music::TwoStageGrid;
use crate::geometry::TrajectoryAxis;
use crate::jad_music::{JadGrids, PinvStrategy};

/// Estimator selector, also the CLI `--method` values.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "kebab-case")]
pub enum MethodTag {
    FaHadMusic,
    JadRdMusic,
    #[serde(rename = "fd-2d-music")]
    #[value(name = "fd-2d-music")]
    Fd2dMusic,
    Fdfa,
    Sfa,
}

impl MethodTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodTag::FaHadMusic => "fa-had-music",
            MethodTag::JadRdMusic => "jad-rd-music",
            MethodTag::Fd2dMusic => "fd-2d-music",
            MethodTag::Fdfa => "fdfa",
            MethodTag::Sfa => "sfa",
        }
    }
}

impl std::fmt::Display for MethodTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Initial array layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeometrySpec {
    /// Uniform linear array along the y axis; the element count is
    /// `n_elements`.
    UlaY { spacing: f64 },
    /// Explicit coordinates in wavelengths; must match `n_elements`.
    Explicit { elements: Vec<(f64, f64)> },
}

/// Coordinated movement pattern.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrajectorySpec {
    /// Per-trial random steps, each drawn uniformly from
    /// [step_min, step_max] wavelengths along `axis`.
    Random { step_min: f64, step_max: f64, axis: TrajectoryAxis },
    /// A fixed displacement list shared by all trials; must match `n_moves`.
    Explicit { displacements: Vec<(f64, f64)> },
}

/// Path-gain model for the drawn sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GainModel {
    /// gamma ~ CN(0, 1): Rayleigh-faded powers, redrawn per trial.
    Rayleigh,
    /// |gamma| = 1 with a uniform phase: equal-power sources.
    UnitModulus,
}

/// Covariance fed to the reduced-dimension estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ReconSource {
    /// Analytic expectation oracle (no pilot noise in the reconstruction).
    Exact,
    /// Two-measurement protocol on stored finite-pilot snapshot streams.
    Sampled,
}

/// Search grids for all estimators.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSettings {
    pub theta: TwoStageGrid,
    pub phi: TwoStageGrid,
    pub jad: JadGrids,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            theta: TwoStageGrid::standard(),
            phi: TwoStageGrid::standard(),
            jad: JadGrids::standard(),
        }
    }
}

/// The full experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub methods: Vec<MethodTag>,
    /// N: elements of the moving array.
    pub n_elements: usize,
    /// K: spatial sampling positions.
    pub n_moves: usize,
    /// T: analog phase frames per position.
    pub n_frames: usize,
    /// L: sources (assumed known).
    pub n_sources: usize,
    /// N_p: pilot symbols per frame.
    pub n_pilots: usize,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub geometry: GeometrySpec,
    pub trajectory: TrajectorySpec,
    /// Truth angles are drawn uniformly from [-x, x] degrees on both axes.
    pub angle_max_abs_deg: f64,
    /// Azimuths with |theta| below this are rejected when drawing truths:
    /// elevation information scales with sin^2(theta) and vanishes at
    /// broadside, where no estimator meets a fixed per-target error bar.
    pub min_abs_theta_deg: f64,
    pub gain_model: GainModel,
    /// Minimum pairwise angular distance between drawn sources, degrees.
    pub min_source_separation_deg: f64,
    pub grid: GridSettings,
    /// Jacobi-Anger truncation tolerance.
    pub eps: f64,
    /// Differential phase of the reconstruction protocol, radians.
    pub alpha: f64,
    pub pinv: PinvStrategy,
    pub recon: ReconSource,
    /// Run only trials in [start, end) of the full set (resumable sweeps).
    pub trial_range: Option<(usize, usize)>,
    /// Where to write results.csv and manifest.json; in-memory only if unset.
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            methods: vec![MethodTag::FaHadMusic],
            n_elements: 8,
            n_moves: 24,
            n_frames: 3,
            n_sources: 6,
            n_pilots: 100,
            snr_db: vec![0.0],
            trials: 100,
            seed: 0xFAD0A,
            geometry: GeometrySpec::UlaY { spacing: 0.5 },
            trajectory: TrajectorySpec::Random {
                step_min: crate::geometry::DEFAULT_STEP_RANGE.0,
                step_max: crate::geometry::DEFAULT_STEP_RANGE.1,
                axis: TrajectoryAxis::X,
            },
            angle_max_abs_deg: 60.0,
            min_abs_theta_deg: 0.0,
            gain_model: GainModel::Rayleigh,
            min_source_separation_deg: 5.0,
            grid: GridSettings::default(),
            eps: crate::jad_music::DEFAULT_EPS,
            alpha: PI / 8.0,
            pinv: PinvStrategy::default(),
            recon: ReconSource::Sampled,
            trial_range: None,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Every configuration problem, or Ok if there are none.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        if self.methods.is_empty() {
            issues.push("methods: need at least one estimator".to_string());
        }
        if self.trials == 0 {
            issues.push("trials: must be >= 1".to_string());
        }
        if self.snr_db.is_empty() {
            issues.push("snr_db: list must be nonempty".to_string());
        }
        if self.n_sources == 0 {
            issues.push("n_sources: must be >= 1".to_string());
        }
        if self.n_sources > 8 {
            issues.push(format!(
                "n_sources: exhaustive error assignment supports at most 8 sources, got {}",
                self.n_sources
            ));
        }
        if self.n_pilots < self.n_sources {
            issues.push(format!(
                "n_pilots: must be >= n_sources ({} < {})",
                self.n_pilots, self.n_sources
            ));
        }
        if self.n_elements == 0 {
            issues.push("n_elements: must be >= 1".to_string());
        }
        if self.n_moves == 0 {
            issues.push("n_moves: must be >= 1".to_string());
        }
        if self.n_frames == 0 {
            issues.push("n_frames: must be >= 1".to_string());
        }
        if self.methods.contains(&MethodTag::FaHadMusic) {
            if self.n_frames >= self.n_elements.max(1) {
                issues.push(format!(
                    "n_frames: hybrid acquisition requires T < N ({} >= {})",
                    self.n_frames, self.n_elements
                ));
            }
            if self.n_moves * self.n_frames <= self.n_sources {
                issues.push(format!(
                    "n_moves * n_frames: compressed noise subspace is empty (K*T = {} <= L = {})",
                    self.n_moves * self.n_frames,
                    self.n_sources
                ));
            }
        }
        let needs_virtual = self.methods.iter().any(|m| {
            matches!(m, MethodTag::JadRdMusic | MethodTag::Fdfa | MethodTag::Sfa)
        });
        if needs_virtual && self.n_elements * self.n_moves <= self.n_sources {
            issues.push(format!(
                "n_elements * n_moves: virtual noise subspace is empty (N*K = {} <= L = {})",
                self.n_elements * self.n_moves,
                self.n_sources
            ));
        }
        if self.methods.contains(&MethodTag::JadRdMusic)
            && (2.0 * self.alpha).sin().abs() < 1e-12
        {
            issues.push(format!(
                "alpha: sin(2*alpha) = 0 at alpha = {} makes the reconstruction singular",
                self.alpha
            ));
        }
        match &self.geometry {
            GeometrySpec::UlaY { spacing } => {
                if *spacing <= 0.0 {
                    issues.push("geometry: ULA spacing must be positive".to_string());
                }
            }
            GeometrySpec::Explicit { elements } => {
                if elements.len() != self.n_elements {
                    issues.push(format!(
                        "geometry: explicit list has {} elements, n_elements = {}",
                        elements.len(),
                        self.n_elements
                    ));
                }
            }
        }
        match &self.trajectory {
            TrajectorySpec::Random { step_min, step_max, .. } => {
                if !(0.0 < *step_min && step_min <= step_max) {
                    issues.push(format!(
                        "trajectory: invalid step range [{step_min}, {step_max}]"
                    ));
                }
            }
            TrajectorySpec::Explicit { displacements } => {
                if displacements.len() != self.n_moves {
                    issues.push(format!(
                        "trajectory: explicit list has {} positions, n_moves = {}",
                        displacements.len(),
                        self.n_moves
                    ));
                }
                if displacements.first() != Some(&(0.0, 0.0)) {
                    issues.push(
                        "trajectory: first explicit displacement must be (0, 0)".to_string(),
                    );
                }
            }
        }
        if !(self.eps > 0.0) {
            issues.push(format!("eps: truncation tolerance must be positive, got {}", self.eps));
        }
        if !(0.0 < self.angle_max_abs_deg && self.angle_max_abs_deg <= 89.5) {
            issues.push(format!(
                "angle_max_abs_deg: must lie in (0, 89.5], got {}",
                self.angle_max_abs_deg
            ));
        }
        if !(0.0..self.angle_max_abs_deg).contains(&self.min_abs_theta_deg) {
            issues.push(format!(
                "min_abs_theta_deg: must lie in [0, angle_max_abs_deg), got {}",
                self.min_abs_theta_deg
            ));
        }
        if self.min_source_separation_deg < 0.0 {
            issues.push("min_source_separation_deg: must be >= 0".to_string());
        }
        if self.n_sources as f64 * self.min_source_separation_deg
            > 2.0 * self.angle_max_abs_deg * 1.5
        {
            issues.push(format!(
                "min_source_separation_deg: {} sources at {} deg separation do not fit in \
                 [-{}, {}] deg",
                self.n_sources,
                self.min_source_separation_deg,
                self.angle_max_abs_deg,
                self.angle_max_abs_deg
            ));
        }
        if let Some((start, end)) = self.trial_range {
            if start >= end || end > self.trials {
                issues.push(format!(
                    "trial_range: [{start}, {end}) must be a nonempty subrange of [0, {})",
                    self.trials
                ));
            }
        }
        for (name, g) in [("theta", &self.grid.theta), ("phi", &self.grid.phi)] {
            if !(g.coarse_step_deg > 0.0 && g.fine_step_deg > 0.0 && g.refine_window_deg > 0.0) {
                issues.push(format!("grid.{name}: steps and window must be positive"));
            }
            if g.lo_deg >= g.hi_deg {
                issues.push(format!("grid.{name}: lo_deg must be below hi_deg"));
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig { issues })
        }
    }
}
