//! Run configuration: a sectioned `key = value` file (TOML syntax) with the
//! sections `[domain]`, `[model]` (plus `[model.chi]`, `[model.xi]`),
//! `[weights]`, `[time]`, `[initial.u|v|w]` and `[output]`. Unknown keys are
//! rejected. Every `auto` field is resolved by [`resolve`] into a
//! [`ResolvedConfig`], which is what gets echoed to `resolved.json`.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::certifier::{
    c4_bound, certify, coefficients, eta_bound, find_witness, kernel_c0_estimate,
    sylvester_negative_definite, theta_exponent, AuxConstants, C0Source, Certificate,
    CertifyError, Coefficients, Witness,
};
use crate::diagnostics::Monitor;
use crate::model::{Grid, HypothesisReport, ModelError, SensitivitySpec, SystemState};
use crate::solver::snapshot::read_snapshot;
use crate::solver::{DiffusionMode, RunSetup, SchemeConfig, TimeStep};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("parameters not certified: {0}")]
    NotCertified(String),
    #[error("i/o: {0}")]
    Io(String),
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

/// A scalar that may be left as `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AutoF64 {
    Auto,
    Value(f64),
}

impl Serialize for AutoF64 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            AutoF64::Auto => s.serialize_str("auto"),
            AutoF64::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for AutoF64 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = AutoF64;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"auto\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<AutoF64, E> {
                Ok(AutoF64::Value(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<AutoF64, E> {
                Ok(AutoF64::Value(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<AutoF64, E> {
                Ok(AutoF64::Value(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<AutoF64, E> {
                if v == "auto" {
                    Ok(AutoF64::Auto)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(V)
    }
}

impl Default for AutoF64 {
    fn default() -> Self {
        AutoF64::Auto
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub lengths: Vec<f64>,
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyName {
    #[serde(rename = "pow")]
    Pow,
    #[serde(rename = "const")]
    Const,
    #[serde(rename = "table")]
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivitySection {
    pub family: FamilyName,
    #[serde(default)]
    pub chat: Option<f64>,
    #[serde(default)]
    pub k: Option<f64>,
    #[serde(default)]
    pub points: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub holder: Option<f64>,
}

fn default_auto() -> AutoF64 {
    AutoF64::Auto
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub theorem_n: u32,
    #[serde(default = "default_auto")]
    pub alpha: AutoF64,
    #[serde(default = "default_auto")]
    pub beta: AutoF64,
    #[serde(default)]
    pub c0: Option<f64>,
    pub chi: SensitivitySection,
    pub xi: SensitivitySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    #[serde(default = "default_auto")]
    pub p: AutoF64,
    #[serde(default = "default_auto")]
    pub r: AutoF64,
    #[serde(default = "default_auto")]
    pub sigma: AutoF64,
}

impl Default for WeightsSection {
    fn default() -> Self {
        Self {
            p: AutoF64::Auto,
            r: AutoF64::Auto,
            sigma: AutoF64::Auto,
        }
    }
}

fn d_dt_max() -> f64 {
    1e-2
}
fn d_cfl() -> f64 {
    0.5
}
fn d_linear_tol() -> f64 {
    1e-10
}
fn d_u_floor() -> f64 {
    1e-12
}
fn d_blowup_factor() -> f64 {
    1e6
}
fn d_diffusion() -> DiffusionMode {
    DiffusionMode::Implicit
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: f64,
    #[serde(default = "default_auto")]
    pub dt: AutoF64,
    #[serde(default = "d_dt_max")]
    pub dt_max: f64,
    #[serde(default = "d_cfl")]
    pub cfl: f64,
    #[serde(default = "d_diffusion")]
    pub diffusion: DiffusionMode,
    #[serde(default = "d_linear_tol")]
    pub linear_tol: f64,
    #[serde(default = "d_u_floor")]
    pub u_floor: f64,
    /// Blow-up cap as a multiple of `max u0`.
    #[serde(default = "d_blowup_factor")]
    pub blowup_factor: f64,
    #[serde(default)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Constant,
    Cosine,
    Gaussian,
    File,
}

/// Initial-data generator for one field:
///
/// * `constant`: `base`
/// * `cosine`: `base + amplitude * prod_a cos(pi x_a / L_a)`
/// * `gaussian`: `base + amplitude * exp(-|x - center|^2 / (2 width^2))`
/// * `file`: an `ARCS` snapshot matching the grid
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialField {
    pub kind: InitialKind,
    #[serde(default)]
    pub base: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    #[serde(default)]
    pub width: Option<f64>,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub u: InitialField,
    pub v: InitialField,
    pub w: InitialField,
}

fn d_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn d_snapshots() -> bool {
    false
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "d_out_dir")]
    pub directory: PathBuf,
    pub interval: f64,
    #[serde(default = "d_snapshots")]
    pub snapshots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSection,
    pub model: ModelSection,
    #[serde(default)]
    pub weights: WeightsSection,
    pub time: TimeSection,
    pub initial: InitialSection,
    pub output: OutputSection,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses configuration text; parse errors carry the 1-based line number.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

/// Builds a config from an already-parsed TOML value (used by sweeps after
/// overriding fields).
pub fn config_from_value(value: toml::Value) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = value.try_into().map_err(|e: toml::de::Error| ConfigError::Parse {
        line: 0,
        message: e.message().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn positive(field: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {x}")))
    }
}

impl SensitivitySection {
    fn validate(&self, name: &str) -> Result<(), ConfigError> {
        let field = |k: &str| format!("model.{name}.{k}");
        match self.family {
            FamilyName::Pow => {
                let chat = self.chat.ok_or_else(|| invalid(&field("chat"), "required for family pow"))?;
                let k = self.k.ok_or_else(|| invalid(&field("k"), "required for family pow"))?;
                positive(&field("chat"), chat)?;
                if !(k.is_finite() && k > 1.0) {
                    return Err(invalid(
                        &field("k"),
                        format!("k = {k} <= 1 gives a divergent tail integral"),
                    ));
                }
                if self.points.is_some() {
                    return Err(invalid(&field("points"), "only valid for family table"));
                }
            }
            FamilyName::Const => {
                let chat = self.chat.ok_or_else(|| invalid(&field("chat"), "required for family const"))?;
                positive(&field("chat"), chat)?;
                if self.k.is_some() || self.points.is_some() {
                    return Err(invalid(&field("k"), "family const takes only chat"));
                }
            }
            FamilyName::Table => {
                if self.chat.is_some() || self.k.is_some() {
                    return Err(invalid(&field("chat"), "family table takes only points"));
                }
                let points = self.points.as_ref().ok_or_else(|| invalid(&field("points"), "required for family table"))?;
                SensitivitySpec::tabulated(points).map_err(|e| invalid(&field("points"), e.to_string()))?;
            }
        }
        if let Some(h) = self.holder {
            if !(h > 0.0 && h < 1.0) {
                return Err(invalid(&field("holder"), format!("must lie in (0, 1), got {h}")));
            }
        }
        Ok(())
    }

    /// The sensitivity with its floor still at the family default.
    pub fn build(&self) -> Result<SensitivitySpec, ModelError> {
        let spec = match self.family {
            FamilyName::Pow => SensitivitySpec::power(self.chat.unwrap_or(0.0), self.k.unwrap_or(0.0))?,
            FamilyName::Const => SensitivitySpec::constant(self.chat.unwrap_or(0.0))?,
            FamilyName::Table => SensitivitySpec::tabulated(self.points.as_deref().unwrap_or(&[]))?,
        };
        Ok(match self.holder {
            Some(h) => spec.with_holder_exponent(h),
            None => spec,
        })
    }
}

impl InitialField {
    fn validate(&self, name: &str, dim: usize) -> Result<(), ConfigError> {
        let field = |k: &str| format!("initial.{name}.{k}");
        if !self.base.is_finite() || !self.amplitude.is_finite() {
            return Err(invalid(&field("base"), "base and amplitude must be finite"));
        }
        match self.kind {
            InitialKind::Gaussian => {
                let w = self.width.ok_or_else(|| invalid(&field("width"), "required for gaussian"))?;
                positive(&field("width"), w)?;
                let c = self.center.as_ref().ok_or_else(|| invalid(&field("center"), "required for gaussian"))?;
                if c.len() != dim {
                    return Err(invalid(&field("center"), format!("needs {dim} coordinates, got {}", c.len())));
                }
            }
            InitialKind::File => {
                if self.path.is_none() {
                    return Err(invalid(&field("path"), "required for kind file"));
                }
            }
            InitialKind::Constant | InitialKind::Cosine => {}
        }
        Ok(())
    }

    fn generate(&self, name: &str, grid: &Grid, base_dir: &Path) -> Result<Vec<f64>, ConfigError> {
        let values = match self.kind {
            InitialKind::Constant => vec![self.base; grid.len()],
            InitialKind::Cosine => {
                let lengths = grid.lengths().to_vec();
                grid.sample(|c| {
                    let mut prod = 1.0;
                    for (a, l) in lengths.iter().enumerate() {
                        prod *= (std::f64::consts::PI * c[a] / l).cos();
                    }
                    self.base + self.amplitude * prod
                })
            }
            InitialKind::Gaussian => {
                let center = self.center.clone().unwrap_or_default();
                let width = self.width.unwrap_or(1.0);
                let dim = grid.dim();
                grid.sample(|c| {
                    let r2: f64 = (0..dim).map(|a| (c[a] - center[a]).powi(2)).sum();
                    self.base + self.amplitude * (-r2 / (2.0 * width * width)).exp()
                })
            }
            InitialKind::File => {
                let rel = self.path.as_ref().expect("validated");
                let path = if rel.is_absolute() { rel.clone() } else { base_dir.join(rel) };
                let bytes = std::fs::read(&path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
                let snap = read_snapshot(&bytes[..]).map_err(|e| invalid(&format!("initial.{name}.path"), e.to_string()))?;
                if snap.dim as usize != grid.dim() || snap.cells[0] as usize != grid.nx() || snap.cells[1] as usize != grid.ny() {
                    return Err(invalid(
                        &format!("initial.{name}.path"),
                        format!("snapshot shape {:?} does not match the grid", snap.cells),
                    ));
                }
                snap.values
            }
        };
        if let Some(bad) = values.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(invalid(
                &format!("initial.{name}"),
                format!("initial data must be finite and nonnegative, found {bad}"),
            ));
        }
        Ok(values)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let dim = self.domain.lengths.len();
        if !(1..=2).contains(&dim) || self.domain.cells.len() != dim {
            return Err(invalid(
                "domain.cells",
                "lengths and cells must both list 1 or 2 axes",
            ));
        }
        Grid::new(&self.domain.lengths, &self.domain.cells).map_err(|e| invalid("domain", e.to_string()))?;
        if self.model.theorem_n < 2 {
            return Err(invalid("model.theorem_n", "must be at least 2"));
        }
        for (name, v) in [("model.alpha", self.model.alpha), ("model.beta", self.model.beta)] {
            if let AutoF64::Value(x) = v {
                positive(name, x)?;
            }
        }
        if let Some(c0) = self.model.c0 {
            positive("model.c0", c0)?;
        }
        self.model.chi.validate("chi")?;
        self.model.xi.validate("xi")?;
        let w = &self.weights;
        let autos = [w.p, w.r, w.sigma].iter().filter(|x| **x == AutoF64::Auto).count();
        if autos != 0 && autos != 3 {
            return Err(invalid("weights", "p, r and sigma must be all auto or all explicit"));
        }
        if let (AutoF64::Value(p), AutoF64::Value(r), AutoF64::Value(s)) = (w.p, w.r, w.sigma) {
            if !(p > 1.0 && p.is_finite()) {
                return Err(invalid("weights.p", format!("must exceed 1, got {p}")));
            }
            if !(r >= 0.0 && s >= 0.0 && r.is_finite() && s.is_finite()) {
                return Err(invalid("weights.r", "r and sigma must be nonnegative"));
            }
        }
        let t = &self.time;
        if !(t.t_end.is_finite() && t.t_end >= 0.0) {
            return Err(invalid("time.t_end", format!("must be nonnegative, got {}", t.t_end)));
        }
        if let AutoF64::Value(dt) = t.dt {
            positive("time.dt", dt)?;
        }
        positive("time.dt_max", t.dt_max)?;
        if !(t.cfl > 0.0 && t.cfl <= 1.0) {
            return Err(invalid("time.cfl", format!("must lie in (0, 1], got {}", t.cfl)));
        }
        if !(t.linear_tol > 0.0 && t.linear_tol < 1.0) {
            return Err(invalid("time.linear_tol", "must lie in (0, 1)"));
        }
        if !(t.u_floor >= 0.0 && t.u_floor < 1.0) {
            return Err(invalid("time.u_floor", "must lie in [0, 1)"));
        }
        positive("time.blowup_factor", t.blowup_factor)?;
        self.initial.u.validate("u", dim)?;
        self.initial.v.validate("v", dim)?;
        self.initial.w.validate("w", dim)?;
        positive("output.interval", self.output.interval)?;
        Ok(())
    }
}

/// Where each resolved weight came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSource {
    Witness,
    Explicit,
}

/// A configuration with every `auto` replaced by its value, plus the
/// certification artefacts that justified it.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub theorem_n: u32,
    pub mesh_dim: usize,
    pub lengths: Vec<f64>,
    pub cells: Vec<usize>,
    pub chi: SensitivitySpec,
    pub xi: SensitivitySpec,
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub r: f64,
    pub sigma: f64,
    pub eps0: f64,
    pub weight_source: WeightSource,
    pub coefficients: Coefficients,
    pub negative_definite: bool,
    pub certificate: Option<Certificate>,
    pub certification_error: Option<String>,
    pub witness: Option<Witness>,
    pub aux: AuxConstants,
    pub hypotheses_chi: HypothesisReport,
    pub hypotheses_xi: HypothesisReport,
    pub m0: f64,
    pub u0_max: f64,
    pub min_v0: f64,
    pub min_w0: f64,
    pub blowup_cap: f64,
    pub scheme: SchemeConfig,
    pub max_steps: Option<usize>,
    pub initial: InitialSection,
    pub output_interval: f64,
    pub output_directory: PathBuf,
    pub snapshots: bool,
    pub forced: bool,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub grid: Grid,
    #[serde(skip)]
    pub initial_state: SystemState,
}

impl ResolvedConfig {
    pub fn monitor(&self) -> Monitor {
        Monitor {
            chi: self.chi.clone(),
            xi: self.xi.clone(),
            p: self.p,
            r: self.r,
            sigma: self.sigma,
            coefficients: self.coefficients,
            u_floor: self.scheme.u_floor,
            blowup_cap: self.blowup_cap,
        }
    }

    pub fn run_setup(&self) -> RunSetup {
        RunSetup {
            grid: self.grid.clone(),
            initial: self.initial_state.clone(),
            scheme: self.scheme.clone(),
            chi: self.chi.clone(),
            xi: self.xi.clone(),
            output_interval: self.output_interval,
            monitor: self.monitor(),
            max_steps: self.max_steps,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("resolved config serializes")
    }
}

/// Resolves a configuration.
///
/// Without `force`, the sensitivity hypotheses must hold with the resolved
/// `(alpha, beta)` and the pair must be certified; otherwise the run is
/// refused with [`ConfigError::NotCertified`]. With `force`, failures are
/// recorded in `notes` and explicit weights are required when no witness
/// can be produced.
pub fn resolve(cfg: &RunConfig, base_dir: &Path, force: bool) -> Result<ResolvedConfig, ConfigError> {
    cfg.validate()?;
    let grid = Grid::new(&cfg.domain.lengths, &cfg.domain.cells).map_err(|e| invalid("domain", e.to_string()))?;
    let mut notes = Vec::new();
    if grid.dim() < 2 {
        notes.push("1D mesh: outside theorem scope (the theorem assumes n >= 2)".to_string());
    }
    notes.push("box domain: the theorem assumes a smooth boundary; corner effects are not assessed".to_string());

    let u0 = cfg.initial.u.generate("u", &grid, base_dir)?;
    let v0 = cfg.initial.v.generate("v", &grid, base_dir)?;
    let w0 = cfg.initial.w.generate("w", &grid, base_dir)?;
    let initial_state = SystemState::new(&grid, u0, v0, w0).map_err(|e| invalid("initial", e.to_string()))?;
    let m0 = initial_state.mass(&grid);
    if !(m0 > 0.0) {
        return Err(invalid("initial.u", "initial density must not vanish identically"));
    }
    let u0_max = initial_state.u.iter().copied().fold(0.0, f64::max);
    let min_v0 = initial_state.v.iter().copied().fold(f64::INFINITY, f64::min);
    let min_w0 = initial_state.w.iter().copied().fold(f64::INFINITY, f64::min);

    let (c0, c0_source) = match cfg.model.c0 {
        Some(c0) => (c0, C0Source::Override),
        None => {
            let c0 = kernel_c0_estimate(&grid, 1.0).map_err(|e| invalid("model.c0", e.to_string()))?;
            notes.push("c0 is a numerical stand-in from the discrete kernel, not the continuum constant".to_string());
            (c0, C0Source::Estimated)
        }
    };
    let eta1 = eta_bound(min_v0, m0, c0);
    let eta2 = eta_bound(min_w0, m0, c0);

    let chi = cfg.model.chi.build().map_err(|e| invalid("model.chi", e.to_string()))?;
    let xi = cfg.model.xi.build().map_err(|e| invalid("model.xi", e.to_string()))?;
    let chi = chi.with_eta_floor(eta1).map_err(|e| invalid("model.chi", e.to_string()))?;
    let xi = xi.with_eta_floor(eta2).map_err(|e| invalid("model.xi", e.to_string()))?;

    let resolve_constant = |value: AutoF64, spec: &SensitivitySpec, field: &str| -> Result<f64, ConfigError> {
        match value {
            AutoF64::Value(x) => Ok(x),
            AutoF64::Auto => spec.max_alpha().map_err(|e| invalid(field, e.to_string())),
        }
    };
    let alpha = resolve_constant(cfg.model.alpha, &chi, "model.alpha")?;
    let beta = resolve_constant(cfg.model.beta, &xi, "model.beta")?;
    let chi = chi.with_alpha_like(alpha);
    let xi = xi.with_alpha_like(beta);
    let hypotheses_chi = chi.validate_hypotheses(alpha);
    let hypotheses_xi = xi.validate_hypotheses(beta);
    let mut chi = chi;
    let mut xi = xi;
    chi.c_bound = hypotheses_chi.c_bound;
    xi.c_bound = hypotheses_xi.c_bound;

    let mut refusal = Vec::new();
    for (name, report) in [("chi", &hypotheses_chi), ("xi", &hypotheses_xi)] {
        for f in report.failures() {
            refusal.push(format!("{name}: {:?} fails ({})", f.hypothesis, f.detail));
        }
    }

    let n = cfg.model.theorem_n;
    let (certificate, certification_error) = match certify(n, alpha, beta) {
        Ok(c) => {
            if !c.feasible {
                refusal.push(format!(
                    "alpha = {alpha} does not exceed the minimal threshold {:.6} (delta* = {:.6})",
                    c.threshold_star, c.delta_star
                ));
            }
            (Some(c), None)
        }
        Err(e) => {
            refusal.push(e.to_string());
            (None, Some(e.to_string()))
        }
    };
    if !refusal.is_empty() {
        if !force {
            return Err(ConfigError::NotCertified(refusal.join("; ")));
        }
        notes.push("FORCED: parameters run outside the certified regime".to_string());
        notes.extend(refusal.iter().map(|r| format!("FORCED: {r}")));
    }
    let certified = certificate.as_ref().is_some_and(|c| c.feasible);

    let w = &cfg.weights;
    let (p, r, sigma, eps0, weight_source, witness) = match (w.p, w.r, w.sigma) {
        (AutoF64::Value(p), AutoF64::Value(r), AutoF64::Value(s)) => (p, r, s, 0.0, WeightSource::Explicit, None),
        _ => {
            if !certified {
                return Err(invalid(
                    "weights",
                    "auto weights need certified (alpha, beta); give p, r and sigma explicitly",
                ));
            }
            let wit = find_witness(n, alpha, beta).map_err(|e| match e {
                CertifyError::NotFound { .. } => ConfigError::NotCertified(e.to_string()),
                other => invalid("weights", other.to_string()),
            })?;
            (wit.p, wit.r, wit.sigma, wit.eps0, WeightSource::Witness, Some(wit))
        }
    };
    let coeffs = coefficients(p, r, sigma, alpha, beta, eps0);
    let negative_definite = sylvester_negative_definite(&coeffs);
    if !negative_definite {
        notes.push("weights do not make the gradient form negative definite; Q_max may be positive".to_string());
    }
    if p <= n as f64 / 2.0 {
        notes.push(format!("p = {p} does not exceed n/2 = {}", n as f64 / 2.0));
    }

    let c4 = match c4_bound(&chi, &xi, r, sigma) {
        Ok(c4) => Some(c4),
        Err(e) => {
            notes.push(format!("c4 unavailable: {e}"));
            None
        }
    };
    let aux = AuxConstants {
        eta1,
        eta2,
        c0,
        c0_source,
        c4,
        theta: theta_exponent(p, n),
    };

    let forced = force && !(hypotheses_chi.all_pass() && hypotheses_xi.all_pass() && certified);
    let t = &cfg.time;
    let scheme = SchemeConfig {
        dt: match t.dt {
            AutoF64::Auto => TimeStep::Auto,
            AutoF64::Value(dt) => TimeStep::Fixed(dt),
        },
        dt_max: t.dt_max,
        cfl: t.cfl,
        diffusion_mode: t.diffusion,
        linear_tol: t.linear_tol,
        t_end: t.t_end,
        u_floor: t.u_floor,
    };

    Ok(ResolvedConfig {
        theorem_n: n,
        mesh_dim: grid.dim(),
        lengths: grid.lengths().to_vec(),
        cells: grid.cells().to_vec(),
        chi,
        xi,
        alpha,
        beta,
        p,
        r,
        sigma,
        eps0,
        weight_source,
        coefficients: coeffs,
        negative_definite,
        certificate,
        certification_error,
        witness,
        aux,
        hypotheses_chi,
        hypotheses_xi,
        m0,
        u0_max,
        min_v0,
        min_w0,
        blowup_cap: t.blowup_factor * u0_max,
        scheme,
        max_steps: t.max_steps,
        initial: cfg.initial.clone(),
        output_interval: cfg.output.interval,
        output_directory: cfg.output.directory.clone(),
        snapshots: cfg.output.snapshots,
        forced,
        notes,
        grid,
        initial_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"
[domain]
lengths = [1.0]
cells = [16]

[model]
theorem_n = 2
alpha = 5.0
beta = 6.0
c0 = 1.0

[model.chi]
family = "pow"
chat = 1.0
k = 2.0

[model.xi]
family = "pow"
chat = 1.0
k = 2.0

[time]
t_end = 0.1

[initial.u]
kind = "constant"
base = 20.0

[initial.v]
kind = "constant"
base = 20.0

[initial.w]
kind = "constant"
base = 20.0

[output]
interval = 0.05
"#;

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = parse_config_str(MINIMAL).unwrap();
        assert_eq!(cfg.weights, WeightsSection::default());
        assert_eq!(cfg.time.dt, AutoF64::Auto);
        assert_eq!(cfg.time.cfl, 0.5);
        assert_eq!(cfg.output.directory, PathBuf::from("out"));
        let resolved = resolve(&cfg, Path::new("."), false).unwrap();
        assert_eq!(resolved.weight_source, WeightSource::Witness);
        let json = resolved.to_json();
        assert!(!json.contains("\"auto\""), "{json}");
    }

    #[test]
    fn unknown_key_is_a_parse_error_with_line() {
        let text = MINIMAL.replace("theorem_n = 2", "theorem_n = 2\nfoo = 1");
        match parse_config_str(&text) {
            Err(ConfigError::Parse { line, message }) => {
                assert!(message.contains("foo"), "{message}");
                assert_eq!(line, 8);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn slow_decay_exponent_is_rejected() {
        let text = MINIMAL.replacen("k = 2.0", "k = 0.5", 1);
        match parse_config_str(&text) {
            Err(ConfigError::Validation { field, .. }) => assert_eq!(field, "model.chi.k"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn auto_alpha_uses_floor() {
        let text = MINIMAL.replace("alpha = 5.0", "alpha = \"auto\"");
        let cfg = parse_config_str(&text).unwrap();
        let r = resolve(&cfg, Path::new("."), false).unwrap();
        assert!((r.alpha - 2.0 * (1.0 + r.aux.eta1)).abs() < 1e-12);
        assert!(r.aux.eta1 > 0.0 && r.aux.eta1 < 20.0);
    }

    #[test]
    fn uncertified_pair_needs_force() {
        let text = MINIMAL.replace("alpha = 5.0", "alpha = 3.0");
        let cfg = parse_config_str(&text).unwrap();
        assert!(matches!(
            resolve(&cfg, Path::new("."), false),
            Err(ConfigError::NotCertified(_))
        ));
        // forced but no explicit weights
        assert!(resolve(&cfg, Path::new("."), true).is_err());
        let text = text.replace("[time]", "[weights]\np = 1.5\nr = 0.1\nsigma = 0.1\n\n[time]");
        let cfg = parse_config_str(&text).unwrap();
        let r = resolve(&cfg, Path::new("."), true).unwrap();
        assert!(r.forced);
        assert!(r.notes.iter().any(|n| n.starts_with("FORCED")));
    }

    #[test]
    fn mixed_weights_are_rejected() {
        let text = MINIMAL.replace("[time]", "[weights]\np = 1.5\n\n[time]");
        assert!(matches!(
            parse_config_str(&text),
            Err(ConfigError::Validation { .. })
        ));
    }

    #[test]
    fn gaussian_needs_matching_center() {
        let text = MINIMAL.replacen(
            "kind = \"constant\"\nbase = 20.0",
            "kind = \"gaussian\"\nbase = 1.0\namplitude = 2.0\ncenter = [0.5, 0.5]\nwidth = 0.1",
            1,
        );
        assert!(matches!(
            parse_config_str(&text),
            Err(ConfigError::Validation { .. })
        ));
    }

    #[test]
    fn negative_cosine_data_are_rejected() {
        let text = MINIMAL.replacen(
            "kind = \"constant\"\nbase = 20.0",
            "kind = \"cosine\"\nbase = 1.0\namplitude = 2.0",
            1,
        );
        let cfg = parse_config_str(&text).unwrap();
        assert!(matches!(
            resolve(&cfg, Path::new("."), false),
            Err(ConfigError::Validation { .. })
        ));
    }
}
