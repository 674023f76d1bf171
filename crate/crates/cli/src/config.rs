//! Experiment configuration: TOML with one table per concern.
//!
//! Every numerical default lives here. `normalize` fills the defaults that
//! depend on the experiment, and the normalized form re-parses to itself.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use specgap_core::field::{Direction, FieldSpec};
use specgap_core::quasimode::Recipe;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Bands,
    Model2d,
    Supercell,
    Quasimode,
    Gaps,
    Localization,
    VerifyIdentities,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Bands => "bands",
            Experiment::Model2d => "model2d",
            Experiment::Supercell => "supercell",
            Experiment::Quasimode => "quasimode",
            Experiment::Gaps => "gaps",
            Experiment::Localization => "localization",
            Experiment::VerifyIdentities => "verify-identities",
        }
    }

    fn uses_sweep(self) -> bool {
        !matches!(self, Experiment::Bands | Experiment::VerifyIdentities)
    }
}

/// The shipped field families with their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FieldConfig {
    Constant { value: f64 },
    SinSquared { amplitude: f64 },
    CosProduct { amplitude: f64 },
    Stripe { amplitude: f64, axis: Direction, period: f64 },
    Power { beta1: f64, k: u32, period: f64 },
    Polynomial { coeffs: Vec<f64> },
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig::SinSquared { amplitude: 1.0 }
    }
}

impl FieldConfig {
    pub fn build(&self) -> specgap_core::Result<FieldSpec> {
        let f = match self {
            FieldConfig::Constant { value } => FieldSpec::constant(*value),
            FieldConfig::SinSquared { amplitude } => FieldSpec::sin_squared(*amplitude),
            FieldConfig::CosProduct { amplitude } => FieldSpec::cos_product(*amplitude),
            FieldConfig::Stripe { amplitude, axis, period } => FieldSpec::stripe(*amplitude, *axis, *period),
            FieldConfig::Power { beta1, k, period } => FieldSpec::power(*beta1, *k, *period),
            FieldConfig::Polynomial { coeffs } => FieldSpec::polynomial(coeffs.clone())?,
        };
        f.validate()?;
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Strictly decreasing semiclassical parameters.
    pub h: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { h: vec![0.04, 0.028, 0.02, 0.014, 0.01, 0.007, 0.005] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPolicy {
    /// `intervals` per side regardless of `h`.
    Fixed,
    /// Spacing at most `h^{1/(k+2)} / cells_per_length`.
    MagneticLength,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub policy: GridPolicy,
    /// `[x0, x1, y0, y1]` of the Dirichlet supercell.
    pub domain: [f64; 4],
    pub intervals: usize,
    pub cells_per_length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            policy: GridPolicy::MagneticLength,
            domain: [-1.5, 1.5, -1.5, 1.5],
            intervals: 96,
            cells_per_length: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Eigenpairs per solve.
    pub m: usize,
    pub tol: f64,
    pub seed: u64,
    pub dense_threshold: usize,
    pub restarts_per_pair: usize,
    /// Combine each solve with a solve on the halved grid.
    pub richardson: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = specgap_core::eigen::SolverOptions::default();
        Self {
            m: 12,
            tol: d.tol,
            seed: d.seed,
            dense_threshold: d.dense_threshold,
            restarts_per_pair: d.restarts_per_pair,
            richardson: true,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> specgap_core::eigen::SolverOptions {
        specgap_core::eigen::SolverOptions {
            tol: self.tol,
            seed: self.seed,
            dense_threshold: self.dense_threshold,
            keep_vectors: false,
            restarts_per_pair: self.restarts_per_pair,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandsConfig {
    pub k: u32,
    pub b_min: f64,
    pub b_max: f64,
    pub b_step: f64,
    pub j_max: usize,
    /// Coarse spacing of the Richardson pair on the line.
    pub spacing: f64,
    /// Extend the b-range until the minimum of the first band is interior.
    pub widen: bool,
}

impl Default for BandsConfig {
    fn default() -> Self {
        Self { k: 1, b_min: -1.0, b_max: 4.0, b_step: 0.05, j_max: 5, spacing: 1.0 / 64.0, widen: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Model2dConfig {
    /// Box half-width in magnetic lengths `h^{1/(k+2)}`.
    pub half_width: f64,
}

impl Default for Model2dConfig {
    fn default() -> Self {
        Self { half_width: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuasimodeConfig {
    pub recipe: Recipe,
    /// Well centre (point wells).
    pub center: [f64; 2],
    pub j: usize,
    /// Target level of `|b|` for point Gaussians.
    pub level: f64,
    /// Half-width of the square searched for the level set.
    pub search_half_width: f64,
    /// Gaussian grids use spacing `√h / points_per_width`.
    pub points_per_width: f64,
    /// Model boxes have half-width `box_half_width · h^{1/(k+2)}`.
    pub box_half_width: f64,
    /// Cylinder modes: target `b`, flux `α₁` and the Dirichlet `y` range.
    pub beta: f64,
    pub alpha1: f64,
    pub y_range: [f64; 2],
    /// Certify each quasimode against the full operator.
    pub certify: bool,
}

impl Default for QuasimodeConfig {
    fn default() -> Self {
        Self {
            recipe: Recipe::ModelRescaled,
            center: [0.0, 0.0],
            j: 1,
            level: 1.5,
            search_half_width: 0.5,
            points_per_width: 12.0,
            box_half_width: specgap_core::quasimode::MODEL_BOX_HALF_WIDTH,
            beta: 0.5,
            alpha1: 0.0,
            y_range: [-0.45, 0.45],
            certify: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GapsConfig {
    /// Well whose Taylor model supplies the reference levels `λ_j`.
    pub well: [f64; 2],
    /// The window is `[0, ½(λ_L + λ_{L+1})·h^{(2k+2)/(k+2)}]` with `L = levels`.
    pub levels: usize,
    /// Safety fraction for predicted windows.
    pub safety: f64,
    pub reference_half_width: f64,
    pub reference_spacing: f64,
}

impl Default for GapsConfig {
    fn default() -> Self {
        let r = specgap_core::model::ReferenceOptions::default();
        Self {
            well: [0.0, 0.0],
            levels: 3,
            safety: 0.25,
            reference_half_width: r.half_width,
            reference_spacing: r.spacing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalizationConfig {
    /// `[x0, x1, y0, y1]` of the single-well cell.
    pub cell: [f64; 4],
    pub cell_intervals: usize,
    /// Distances below `floor_factor · tol · ‖M‖` count as resolved to zero.
    pub floor_factor: f64,
}

impl Default for LocalizationConfig {
    fn default() -> Self {
        Self { cell: [-0.5, 0.5, -0.5, 0.5], cell_intervals: 32, floor_factor: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilationCase {
    pub k: u32,
    pub h: f64,
    pub beta: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentitiesConfig {
    pub case: Vec<DilationCase>,
}

impl Default for IdentitiesConfig {
    fn default() -> Self {
        let c = |k, h, beta, alpha| DilationCase { k, h, beta, alpha };
        Self { case: vec![c(1, 1.0, 0.5, 2.0), c(1, 0.01, -1.0, 0.5), c(2, 0.01, 0.3, 1.7), c(3, 0.05, -0.7, 0.8)] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<Experiment>,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub field: FieldConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub bands: BandsConfig,
    #[serde(default)]
    pub model2d: Model2dConfig,
    #[serde(default)]
    pub quasimode: QuasimodeConfig,
    #[serde(default)]
    pub gaps: GapsConfig,
    #[serde(default)]
    pub localization: LocalizationConfig,
    #[serde(default)]
    pub identities: IdentitiesConfig,
}

/// A configuration problem, anchored to the line of the offending key when
/// the source has one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn at(key: &str, message: impl Into<String>) -> Self {
        Self { line: None, key: key.to_string(), message: message.into() }
    }

    /// `path:line: key: message`, the line omitted when unknown.
    pub fn render(&self, path: &Path) -> String {
        let key = if self.key.is_empty() { String::new() } else { format!("{}: ", self.key) };
        match self.line {
            Some(l) => format!("{}:{}: {}{}", path.display(), l, key, self.message),
            None => format!("{}: {}{}", path.display(), key, self.message),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_at(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

/// Line of `section.key` in `source`, for keys written in their table or as a
/// dotted top-level key.
pub fn line_of(source: &str, dotted: &str) -> Option<usize> {
    let (section, key) = dotted.rsplit_once('.').unwrap_or(("", dotted));
    let key_matches =
        |text: &str, key: &str| text.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='));
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in source.lines().enumerate() {
        let text = raw.trim();
        if let Some(name) = text.strip_prefix("[[").and_then(|t| t.split_once("]]")).map(|t| t.0) {
            current = name.trim().to_string();
            if current == section {
                header.get_or_insert(i + 1);
            }
            continue;
        }
        if let Some(name) = text.strip_prefix('[').and_then(|t| t.split_once(']')).map(|t| t.0) {
            current = name.trim().to_string();
            if current == section {
                header.get_or_insert(i + 1);
            }
            continue;
        }
        if (current == section && key_matches(text, key)) || (current.is_empty() && key_matches(text, dotted)) {
            return Some(i + 1);
        }
    }
    header
}

pub fn parse(source: &str) -> Result<ExperimentConfig, ConfigError> {
    toml::from_str(source).map_err(|e| ConfigError {
        line: e.span().map(|s| line_at(source, s.start)),
        key: String::new(),
        message: e.message().trim().to_string(),
    })
}

impl ExperimentConfig {
    /// Resolves the experiment (the command line wins over an absent key; a
    /// conflicting key is an error) and the default output directory.
    pub fn normalize(mut self, experiment: Experiment) -> Result<Self, ConfigError> {
        match self.experiment {
            Some(e) if e != experiment => {
                return Err(ConfigError::at(
                    "experiment",
                    format!("config is for `{}` but `{}` was requested", e.name(), experiment.name()),
                ))
            }
            _ => self.experiment = Some(experiment),
        }
        if self.output.is_none() {
            self.output = Some(format!("specgap-out/{}", experiment.name()));
        }
        Ok(self)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize to TOML")
    }

    /// Semantic checks; errors carry the dotted key they concern.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let experiment = self.experiment.ok_or_else(|| ConfigError::at("experiment", "missing"))?;
        let field = self.field.build().map_err(|e| ConfigError::at("field", e.to_string()))?;
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::at(key, format!("must be positive and finite (got {v})")))
            }
        };

        if experiment.uses_sweep() {
            let h = &self.sweep.h;
            if h.is_empty() {
                return Err(ConfigError::at("sweep.h", "h sweep is empty"));
            }
            if let Some(v) = h.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                return Err(ConfigError::at("sweep.h", format!("h values must be positive (got {v})")));
            }
            if let Some(w) = h.windows(2).find(|w| !(w[1] < w[0])) {
                return Err(ConfigError::at(
                    "sweep.h",
                    format!("h sweep must be strictly decreasing ({} is followed by {})", w[0], w[1]),
                ));
            }
        }

        let g = &self.grid;
        if !(g.domain[0] < g.domain[1] && g.domain[2] < g.domain[3]) {
            return Err(ConfigError::at("grid.domain", "domain must be [x0, x1, y0, y1] with x0 < x1 and y0 < y1"));
        }
        if g.intervals < 2 {
            return Err(ConfigError::at("grid.intervals", "need at least 2 intervals per side"));
        }
        positive("grid.cells_per_length", g.cells_per_length)?;
        if self.solver.m == 0 {
            return Err(ConfigError::at("solver.m", "need at least one eigenpair"));
        }
        positive("solver.tol", self.solver.tol)?;

        let planar = matches!(field.lattice, specgap_core::field::Lattice::Plane { .. });
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::at("field.family", format!("`{}` needs {what}", experiment.name())))
            }
        };
        match experiment {
            Experiment::Bands => {
                let b = &self.bands;
                if !(b.b_min < b.b_max) {
                    return Err(ConfigError::at("bands.b_max", "b_max must exceed b_min"));
                }
                positive("bands.b_step", b.b_step)?;
                positive("bands.spacing", b.spacing)?;
                if !(1..=12).contains(&b.j_max) {
                    return Err(ConfigError::at("bands.j_max", format!("J = {} outside 1..=12", b.j_max)));
                }
            }
            Experiment::Model2d => {
                need(matches!(self.field, FieldConfig::Polynomial { .. }), "a polynomial model field")?;
                if self.model2d.half_width < 5.0 {
                    return Err(ConfigError::at(
                        "model2d.half_width",
                        "box half-width must be at least 5 magnetic lengths",
                    ));
                }
            }
            Experiment::Supercell | Experiment::Gaps | Experiment::Localization => {
                need(planar && field.k > 0, "a periodic field with wells in the plane")?;
            }
            Experiment::Quasimode => {
                let q = &self.quasimode;
                if q.j == 0 {
                    return Err(ConfigError::at("quasimode.j", "levels are numbered from 1"));
                }
                match q.recipe {
                    Recipe::CylinderSeparated => {
                        need(
                            matches!(
                                field.lattice,
                                specgap_core::field::Lattice::Cylinder { circle: Direction::X, .. }
                            ),
                            "a cylinder field varying along y",
                        )?;
                        if !(q.y_range[0] < 0.0 && 0.0 < q.y_range[1]) {
                            return Err(ConfigError::at(
                                "quasimode.y_range",
                                "y range must contain the zero line y = 0",
                            ));
                        }
                    }
                    _ => {
                        need(planar, "a field on the plane")?;
                        positive("quasimode.points_per_width", q.points_per_width)?;
                        positive("quasimode.box_half_width", q.box_half_width)?;
                        positive("quasimode.search_half_width", q.search_half_width)?;
                    }
                }
            }
            Experiment::VerifyIdentities => {
                if self.identities.case.is_empty() {
                    return Err(ConfigError::at("identities.case", "no dilation cases"));
                }
                for c in &self.identities.case {
                    positive("identities.case", c.h)?;
                    positive("identities.case", c.alpha)?;
                }
            }
        }
        if experiment == Experiment::Gaps {
            let gp = &self.gaps;
            if gp.levels == 0 {
                return Err(ConfigError::at("gaps.levels", "need at least one level"));
            }
            positive("gaps.reference_half_width", gp.reference_half_width)?;
            positive("gaps.reference_spacing", gp.reference_spacing)?;
        }
        if experiment == Experiment::Localization {
            let l = &self.localization;
            if !(l.cell[0] < l.cell[1] && l.cell[2] < l.cell[3]) || l.cell_intervals < 2 {
                return Err(ConfigError::at("localization.cell", "cell must be ordered with at least 2 intervals"));
            }
        }
        Ok(())
    }
}

/// Parses, normalizes and validates; errors are anchored to source lines.
pub fn load(source: &str, experiment: Experiment) -> Result<ExperimentConfig, ConfigError> {
    let anchor = |mut e: ConfigError| {
        if e.line.is_none() && !e.key.is_empty() {
            e.line = line_of(source, &e.key);
        }
        e
    };
    let config = parse(source)?.normalize(experiment).map_err(anchor)?;
    config.validate().map_err(anchor)?;
    Ok(config)
}
