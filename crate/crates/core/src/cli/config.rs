//! Experiment configuration, one TOML file per experiment.

use serde::{Deserialize, Serialize};

use crate::integrate::IntegratorSettings;
use crate::pointvortex::PeriodicVortexPath;
use crate::velocity::{vortex_position, PlanePoint};
use crate::wavefunction::SuperpositionState;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{key}: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self { key: key.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Oscillator,
    PointVortex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    pub a_over_b: f64,
    /// `c/b`; 1 unless set.
    #[serde(default = "one")]
    pub c_over_b: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathSection {
    Stationary {
        #[serde(default)]
        center: [f64; 2],
        period: f64,
    },
    Ellipse {
        amplitude_x: f64,
        amplitude_y: f64,
        gamma1: f64,
        gamma2: f64,
        period: f64,
    },
    /// The vortex path of the `[state]` superposition.
    FromState,
    Sampled {
        samples: Vec<[f64; 2]>,
        period: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lattice {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    /// Lattice points closer than this to the vortex at `t = 0` are skipped.
    #[serde(default = "default_exclusion")]
    pub exclusion: f64,
}

fn default_exclusion() -> f64 {
    0.05
}

impl Default for Lattice {
    fn default() -> Self {
        Self { x: [-1.2, 1.2], y: [-1.2, 1.2], nx: 20, ny: 20, exclusion: default_exclusion() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<Lattice>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectionOptions {
    pub periods: usize,
}

impl Default for SectionOptions {
    fn default() -> Self {
        Self { periods: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VortexPathOptions {
    pub samples: usize,
    /// Further `a/b` values drawn alongside the configured state.
    pub overlay_ratios: Vec<f64>,
}

impl Default for VortexPathOptions {
    fn default() -> Self {
        Self { samples: 512, overlay_ratios: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedPointOptions {
    /// Explicit Newton guesses; a grid over `grid_range²` when empty.
    pub guesses: Vec<[f64; 2]>,
    pub grid_range: [f64; 2],
    pub grid_points: usize,
    pub newton_tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub dedup_tol: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            guesses: Vec::new(),
            grid_range: [0.0, 1.2],
            grid_points: 7,
            newton_tol: 1e-10,
            max_iter: 50,
            fd_step: crate::integrate::DEFAULT_FD_STEP,
            dedup_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManifoldOptions {
    pub guess: [f64; 2],
    pub seed_delta: f64,
    pub max_arclength: f64,
    pub max_spacing: f64,
    pub max_levels: usize,
    pub transversality_tol: f64,
    /// Periods of the background section in the SVG; 0 draws manifolds only.
    pub section_periods: usize,
}

impl Default for ManifoldOptions {
    fn default() -> Self {
        let p = crate::chaos::ManifoldParams::default();
        Self {
            guess: [0.6, 0.75],
            seed_delta: p.seed_delta,
            max_arclength: p.max_arclength,
            max_spacing: p.max_spacing,
            max_levels: p.max_levels,
            transversality_tol: 1e-3,
            section_periods: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovOptions {
    pub periods: usize,
    /// Renormalization interval in units of the period.
    pub renorm_periods: f64,
    /// Per-period exponent above which a seed counts as chaotic.
    pub threshold: f64,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        Self { periods: 1600, renorm_periods: 1.0, threshold: crate::chaos::DEFAULT_CHAOS_THRESHOLD }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanOptions {
    pub a_over_b: Vec<f64>,
    pub periods: usize,
    pub threshold: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            a_over_b: vec![0.0, 0.0553, 0.1138, 0.17651],
            periods: 1600,
            threshold: crate::chaos::DEFAULT_CHAOS_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlotOptions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_range: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_range: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathSection>,
    #[serde(default)]
    pub seeds: SeedSection,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    #[serde(default)]
    pub section: SectionOptions,
    #[serde(default)]
    pub vortex_path: VortexPathOptions,
    #[serde(default)]
    pub fixed_point: FixedPointOptions,
    #[serde(default)]
    pub manifolds: ManifoldOptions,
    #[serde(default)]
    pub lyapunov: LyapunovOptions,
    #[serde(default)]
    pub scan: ScanOptions,
    #[serde(default)]
    pub plot: PlotOptions,
}

fn finite(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(key, format!("must be finite, got {v}")))
    }
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::new(key, format!("must be positive and finite, got {v}")))
    }
}

fn range(key: &str, r: [f64; 2]) -> Result<(), ConfigError> {
    finite(key, r[0])?;
    finite(key, r[1])?;
    if r[0] < r[1] {
        Ok(())
    } else {
        Err(ConfigError::new(key, format!("needs lower < upper, got [{}, {}]", r[0], r[1])))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let key = e.span().map(|s| text[s].trim().to_string()).unwrap_or_default();
            ConfigError::new(if key.is_empty() { "config".to_string() } else { key }, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(s) = &self.state {
            finite("state.a_over_b", s.a_over_b)?;
            if s.a_over_b < 0.0 {
                return Err(ConfigError::new("state.a_over_b", "must be non-negative"));
            }
            finite("state.c_over_b", s.c_over_b)?;
            finite("state.gamma1", s.gamma1)?;
            finite("state.gamma2", s.gamma2)?;
        }
        match self.model.kind {
            ModelKind::Oscillator if self.state.is_none() => {
                return Err(ConfigError::new("state", "the oscillator model needs a [state] section"));
            }
            ModelKind::PointVortex if self.path.is_none() => {
                return Err(ConfigError::new("path", "the point-vortex model needs a [path] section"));
            }
            _ => {}
        }
        if let Some(p) = &self.path {
            match p {
                PathSection::Stationary { center, period } => {
                    finite("path.center", center[0])?;
                    finite("path.center", center[1])?;
                    positive("path.period", *period)?;
                }
                PathSection::Ellipse { amplitude_x, amplitude_y, gamma1, gamma2, period } => {
                    finite("path.amplitude_x", *amplitude_x)?;
                    finite("path.amplitude_y", *amplitude_y)?;
                    finite("path.gamma1", *gamma1)?;
                    finite("path.gamma2", *gamma2)?;
                    positive("path.period", *period)?;
                }
                PathSection::FromState => {
                    if self.state.is_none() {
                        return Err(ConfigError::new("path.kind", "from_state needs a [state] section"));
                    }
                }
                PathSection::Sampled { samples, period } => {
                    positive("path.period", *period)?;
                    if samples.iter().flatten().any(|v| !v.is_finite()) {
                        return Err(ConfigError::new("path.samples", "must be finite"));
                    }
                }
            }
        }
        if self.seeds.points.is_some() && self.seeds.lattice.is_some() {
            return Err(ConfigError::new("seeds", "give either points or lattice, not both"));
        }
        if let Some(points) = &self.seeds.points {
            if points.iter().flatten().any(|v| !v.is_finite()) {
                return Err(ConfigError::new("seeds.points", "must be finite"));
            }
        }
        if let Some(l) = &self.seeds.lattice {
            range("seeds.lattice.x", l.x)?;
            range("seeds.lattice.y", l.y)?;
            finite("seeds.lattice.exclusion", l.exclusion)?;
        }
        self.integrator
            .validate()
            .map_err(|e| ConfigError::new("integrator", e.to_string()))?;
        for g in &self.fixed_point.guesses {
            finite("fixed_point.guesses", g[0])?;
            finite("fixed_point.guesses", g[1])?;
        }
        range("fixed_point.grid_range", self.fixed_point.grid_range)?;
        positive("fixed_point.newton_tol", self.fixed_point.newton_tol)?;
        positive("fixed_point.fd_step", self.fixed_point.fd_step)?;
        positive("fixed_point.dedup_tol", self.fixed_point.dedup_tol)?;
        let m = &self.manifolds;
        finite("manifolds.guess", m.guess[0])?;
        finite("manifolds.guess", m.guess[1])?;
        positive("manifolds.seed_delta", m.seed_delta)?;
        positive("manifolds.max_arclength", m.max_arclength)?;
        positive("manifolds.max_spacing", m.max_spacing)?;
        positive("manifolds.transversality_tol", m.transversality_tol)?;
        positive("lyapunov.renorm_periods", self.lyapunov.renorm_periods)?;
        finite("lyapunov.threshold", self.lyapunov.threshold)?;
        if self.lyapunov.periods == 0 {
            return Err(ConfigError::new("lyapunov.periods", "must be at least 1"));
        }
        for &r in &self.scan.a_over_b {
            finite("scan.a_over_b", r)?;
            if r < 0.0 {
                return Err(ConfigError::new("scan.a_over_b", "must be non-negative"));
            }
        }
        if self.scan.periods == 0 {
            return Err(ConfigError::new("scan.periods", "must be at least 1"));
        }
        finite("scan.threshold", self.scan.threshold)?;
        if self.vortex_path.samples == 0 {
            return Err(ConfigError::new("vortex_path.samples", "must be at least 1"));
        }
        for &r in &self.vortex_path.overlay_ratios {
            finite("vortex_path.overlay_ratios", r)?;
        }
        if let Some(r) = self.plot.x_range {
            range("plot.x_range", r)?;
        }
        if let Some(r) = self.plot.y_range {
            range("plot.y_range", r)?;
        }
        Ok(())
    }

    pub fn superposition(&self) -> Result<SuperpositionState, ConfigError> {
        let s = self.state.as_ref().ok_or_else(|| ConfigError::new("state", "missing [state] section"))?;
        SuperpositionState::from_ratios(s.a_over_b, s.c_over_b, s.gamma1, s.gamma2)
            .map_err(|e| ConfigError::new("state", e.to_string()))
    }

    pub fn vortex_path(&self) -> Result<PeriodicVortexPath, ConfigError> {
        let p = self.path.as_ref().ok_or_else(|| ConfigError::new("path", "missing [path] section"))?;
        let err = |e: crate::Error| ConfigError::new("path", e.to_string());
        match p {
            PathSection::Stationary { center, period } => {
                PeriodicVortexPath::stationary(PlanePoint::new(center[0], center[1]), *period).map_err(err)
            }
            PathSection::Ellipse { amplitude_x, amplitude_y, gamma1, gamma2, period } => {
                PeriodicVortexPath::ellipse(*amplitude_x, *amplitude_y, *gamma1, *gamma2, *period).map_err(err)
            }
            PathSection::FromState => PeriodicVortexPath::ellipse_from_state(&self.superposition()?).map_err(err),
            PathSection::Sampled { samples, period } => {
                let pts = samples.iter().map(|s| PlanePoint::new(s[0], s[1])).collect();
                PeriodicVortexPath::sampled(pts, *period).map_err(err)
            }
        }
    }

    /// Vortex position at `t = 0`, if the configured field has one.
    pub fn initial_vortex(&self) -> Result<Option<PlanePoint>, ConfigError> {
        match self.model.kind {
            ModelKind::Oscillator => Ok(vortex_position(&self.superposition()?, 0.0).ok()),
            ModelKind::PointVortex => Ok(Some(self.vortex_path()?.position(0.0))),
        }
    }

    /// Explicit seeds, or the lattice (default 20×20 over `[-1.2, 1.2]²`)
    /// without the points too close to the initial vortex.
    pub fn seed_points(&self) -> Result<Vec<PlanePoint>, ConfigError> {
        if let Some(points) = &self.seeds.points {
            return Ok(points.iter().map(|p| PlanePoint::new(p[0], p[1])).collect());
        }
        let lattice = self.seeds.lattice.clone().unwrap_or_default();
        let vortex = self.initial_vortex()?;
        Ok(lattice_points(&lattice, vortex))
    }
}

pub fn lattice_points(l: &Lattice, vortex: Option<PlanePoint>) -> Vec<PlanePoint> {
    let at = |r: [f64; 2], n: usize, i: usize| {
        if n <= 1 {
            0.5 * (r[0] + r[1])
        } else {
            r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(l.nx * l.ny);
    for j in 0..l.ny {
        for i in 0..l.nx {
            let p = PlanePoint::new(at(l.x, l.nx, i), at(l.y, l.ny, j));
            if vortex.is_none_or(|v| p.distance(v) >= l.exclusion) {
                out.push(p);
            }
        }
    }
    out
}
