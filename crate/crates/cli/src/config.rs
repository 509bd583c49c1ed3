//! Experiment configuration (TOML, unknown keys rejected).

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use upwind_core::filter::{builtin_filter, rescale, Filter, FilterTable};
use upwind_core::flux::{Component, FluxSpec, FluxTable, Shape};
use upwind_core::geometry::{standard_measure, DirectionMeasure, Grid};
use upwind_core::initial::InitialData;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub flux: FluxConfig,
    pub filter: FilterConfig,
    #[serde(default)]
    pub measure: MeasureConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Directory of the config file; relative paths are resolved against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `u_t + div f(u) = 0`; the operator is applied to `−f`.
    #[default]
    Conservation,
    /// `u_t = aud f(u)` as written.
    Divergence,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxConfig {
    /// burgers | advection | lwr | table
    pub name: String,
    pub speed: Option<f64>,
    /// CSV with header `u,f`.
    pub file: Option<PathBuf>,
    /// Per-axis multipliers of the scalar flux; defaults to 1 on every axis.
    pub scales: Option<Vec<f64>>,
    pub state_range: Option<[f64; 2]>,
    pub lipschitz: Option<f64>,
    #[serde(default)]
    pub convention: Convention,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    /// box | hat | exponential | table
    pub name: String,
    pub alpha: f64,
    /// CSV with header `r,phi` for the unit-scale kernel.
    pub file: Option<PathBuf>,
    /// Demand that every atom sits on a lattice radius.
    #[serde(default)]
    pub exact: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    /// line | square | hexagon | triangle; defaults to line (1D) or square (2D).
    pub name: Option<String>,
    /// Custom atoms `[nx, ny, weight]`.
    pub atoms: Option<Vec<[f64; 3]>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "one")]
    pub dim: usize,
    /// Cells per axis; sweeps derive it from `α` instead.
    pub n: Option<usize>,
    #[serde(default)]
    pub lower: f64,
    #[serde(default = "unit")]
    pub length: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default = "euler")]
    pub scheme: String,
    #[serde(default = "half")]
    pub safety: f64,
    #[serde(default = "half")]
    pub t_end: f64,
    pub dt: Option<f64>,
    #[serde(default)]
    pub output_times: Vec<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { scheme: euler(), safety: 0.5, t_end: 0.5, dt: None, output_times: vec![] }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Constant {
        value: f64,
    },
    Riemann {
        u_l: f64,
        u_r: f64,
        #[serde(default)]
        x0: f64,
    },
    Sine {
        amp: f64,
        #[serde(default = "unit")]
        freq: f64,
        #[serde(default)]
        offset: f64,
    },
    /// CSV with header `x,u`.
    Table {
        file: PathBuf,
    },
    RandomBv {
        /// Falls back to the top-level seed.
        seed: Option<u64>,
        tv_budget: f64,
        #[serde(default = "pieces")]
        pieces: usize,
        #[serde(default = "symmetric")]
        range: [f64; 2],
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioConfig {
    Run {
        /// Kruzkov constants audited alongside `u²`.
        #[serde(default)]
        kruzkov: Vec<f64>,
        /// Second datum for the L¹ contraction estimate.
        compare: Option<InitialConfig>,
    },
    ZeroFilterSweep {
        alphas: Vec<f64>,
        #[serde(default = "eight")]
        cells_per_alpha: f64,
    },
    FilterStabilitySweep {
        phi: String,
        psi: String,
        alphas: Vec<f64>,
        #[serde(default = "eight")]
        cells_per_alpha: f64,
    },
    StencilEquivalence {
        #[serde(default = "tight")]
        tolerance: f64,
    },
    EntropyAudit {
        #[serde(default)]
        kruzkov: Vec<f64>,
        #[serde(default = "ten")]
        states: usize,
    },
    ResolventCheck {
        /// Defaults to the filter scale.
        alpha: Option<f64>,
        /// Cells per grid in the refinement; defaults to `[n, 2n, 4n]`.
        cells: Option<Vec<usize>>,
        #[serde(default = "unit")]
        freq: f64,
        /// Run the filtered/unfiltered comparison up to this time.
        equivalence_t_end: Option<f64>,
    },
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig::Run { kruzkov: vec![], compare: None }
    }
}

impl ScenarioConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioConfig::Run { .. } => "run",
            ScenarioConfig::ZeroFilterSweep { .. } => "zero_filter_sweep",
            ScenarioConfig::FilterStabilitySweep { .. } => "filter_stability_sweep",
            ScenarioConfig::StencilEquivalence { .. } => "stencil_equivalence",
            ScenarioConfig::EntropyAudit { .. } => "entropy_audit",
            ScenarioConfig::ResolventCheck { .. } => "resolvent_check",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "out_dir")]
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: out_dir() }
    }
}

fn one() -> usize {
    1
}
fn unit() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn eight() -> f64 {
    8.0
}
fn tight() -> f64 {
    1e-12
}
fn ten() -> usize {
    10
}
fn pieces() -> usize {
    8
}
fn symmetric() -> [f64; 2] {
    [-1.0, 1.0]
}
fn euler() -> String {
    "euler".into()
}
fn out_dir() -> PathBuf {
    PathBuf::from("out")
}

pub fn parse_config_str(text: &str, base_dir: &Path) -> CliResult<ExperimentConfig> {
    let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let key = e.span().map(|s| text[s].lines().next().unwrap_or("").trim().to_string()).unwrap_or_default();
        CliError::config(if key.is_empty() { "<root>".into() } else { key }, e.message().to_string())
    })?;
    cfg.base_dir = base_dir.to_path_buf();
    validate(&cfg)?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_str(&text, &base)
}

fn validate(cfg: &ExperimentConfig) -> CliResult<()> {
    let g = &cfg.grid;
    if g.dim != 1 && g.dim != 2 {
        return Err(CliError::config("grid.dim", format!("must be 1 or 2, got {}", g.dim)));
    }
    if !(g.length > 0.0 && g.length.is_finite()) {
        return Err(CliError::config("grid.length", "must be positive"));
    }
    if let Some(n) = g.n {
        if n < 4 {
            return Err(CliError::config("grid.n", format!("need at least 4 cells, got {n}")));
        }
    }
    if !(cfg.filter.alpha > 0.0) {
        return Err(CliError::config("filter.alpha", "must be positive"));
    }
    let it = &cfg.integrator;
    if !(it.safety > 0.0 && it.safety <= 1.0) {
        return Err(CliError::config("integrator.safety", "must lie in (0, 1]"));
    }
    if !(it.t_end >= 0.0) {
        return Err(CliError::config("integrator.t_end", "must be non-negative"));
    }
    if it.output_times.iter().any(|&t| !(t >= 0.0 && t <= it.t_end)) {
        return Err(CliError::config("integrator.output_times", "every time must lie in [0, t_end]"));
    }
    upwind_core::evolve::Scheme::parse(&it.scheme).map_err(|e| CliError::config("integrator.scheme", e.to_string()))?;
    match &cfg.scenario {
        ScenarioConfig::ZeroFilterSweep { alphas, cells_per_alpha } | ScenarioConfig::FilterStabilitySweep { alphas, cells_per_alpha, .. } => {
            if alphas.len() < 2 || alphas.iter().any(|a| !(*a > 0.0)) {
                return Err(CliError::config("scenario.alphas", "need at least two positive scales"));
            }
            if !(*cells_per_alpha >= 1.0) {
                return Err(CliError::config("scenario.cells_per_alpha", "must be at least 1"));
            }
        }
        _ => {
            if g.n.is_none() {
                return Err(CliError::config("grid.n", format!("required for scenario `{}`", cfg.scenario.name())));
            }
        }
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Grid with `n` cells per axis on `[lower, lower + length)^d`.
    pub fn grid_with(&self, n: usize) -> CliResult<Grid> {
        let g = &self.grid;
        let grid = if g.dim == 1 {
            Grid::new_1d(n, g.lower, g.lower + g.length)
        } else {
            Grid::square(n, g.lower, g.lower + g.length)
        };
        grid.map_err(|e| CliError::config("grid", e.to_string()))
    }

    pub fn grid(&self) -> CliResult<Grid> {
        let n = self.grid.n.ok_or_else(|| CliError::config("grid.n", "required"))?;
        self.grid_with(n)
    }

    pub fn measure(&self) -> CliResult<DirectionMeasure> {
        let m = &self.measure;
        if let Some(atoms) = &m.atoms {
            if m.name.is_some() {
                return Err(CliError::config("measure", "give either `name` or `atoms`, not both"));
            }
            let atoms = atoms.iter().map(|a| ([a[0], a[1]], a[2])).collect();
            return DirectionMeasure::new(self.grid.dim, atoms).map_err(|e| CliError::config("measure.atoms", e.to_string()));
        }
        let default = if self.grid.dim == 1 { "line" } else { "square" };
        let name = m.name.as_deref().unwrap_or(default);
        let dm = standard_measure(name).map_err(|e| CliError::config("measure.name", e.to_string()))?;
        if dm.dim() != self.grid.dim {
            return Err(CliError::config("measure.name", format!("`{name}` is a {}D measure but the grid is {}D", dm.dim(), self.grid.dim)));
        }
        Ok(dm)
    }

    /// Unit-scale kernel of the configured filter.
    pub fn unit_filter(&self) -> CliResult<Filter> {
        named_filter(self, &self.filter.name, self.filter.file.as_deref(), "filter")
    }

    pub fn filter(&self) -> CliResult<Filter> {
        rescale(&self.unit_filter()?, self.filter.alpha).map_err(|e| CliError::config("filter.alpha", e.to_string()))
    }

    pub fn initial(&self) -> CliResult<InitialData> {
        initial_data(self, &self.initial, "initial")
    }

    /// Flux on `range`, with the configured convention applied.
    pub fn flux(&self, range: (f64, f64)) -> CliResult<FluxSpec> {
        let f = &self.flux;
        let range = match f.state_range {
            Some([lo, hi]) => (lo, hi),
            None => range,
        };
        let shape = match f.name.as_str() {
            "burgers" => Shape::Burgers,
            "lwr" => Shape::Lwr,
            "advection" => Shape::Linear,
            "table" => {
                let path = f.file.as_ref().ok_or_else(|| CliError::config("flux.file", "required for a table flux"))?;
                let rows = read_pairs(&self.resolve(path), ["u", "f"])?;
                Shape::Table(Arc::new(FluxTable::new(&rows).map_err(|e| CliError::config("flux.file", e.to_string()))?))
            }
            other => return Err(CliError::config("flux.name", format!("unknown flux `{other}`"))),
        };
        let speed = match (f.name.as_str(), f.speed) {
            ("advection", Some(s)) => s,
            ("advection", None) => return Err(CliError::config("flux.speed", "required for advection")),
            (_, Some(_)) => return Err(CliError::config("flux.speed", "only used by advection")),
            (_, None) => 1.0,
        };
        let d = self.grid.dim;
        let scales = f.scales.clone().unwrap_or_else(|| vec![1.0; d]);
        if scales.len() != d {
            return Err(CliError::config("flux.scales", format!("need {d} entries, got {}", scales.len())));
        }
        let components = scales.iter().map(|&s| Component::new(s * speed, shape.clone())).collect();
        let spec = FluxSpec::new(components, range, f.lipschitz).map_err(|e| {
            let key = match e {
                upwind_core::Error::LipschitzTooSmall { .. } => "flux.lipschitz",
                _ => "flux.state_range",
            };
            CliError::config(key, e.to_string())
        })?;
        Ok(match f.convention {
            Convention::Conservation => spec.negated(),
            Convention::Divergence => spec,
        })
    }
}

pub fn named_filter(cfg: &ExperimentConfig, name: &str, file: Option<&Path>, key: &str) -> CliResult<Filter> {
    if name == "table" {
        let path = file.ok_or_else(|| CliError::config(format!("{key}.file"), "required for a table filter"))?;
        let rows = read_pairs(&cfg.resolve(path), ["r", "phi"])?;
        let table = FilterTable::new(&rows, &[]).map_err(|e| CliError::config(format!("{key}.file"), e.to_string()))?;
        return Ok(Filter::table(table));
    }
    builtin_filter(name).map_err(|e| CliError::config(format!("{key}.name"), e.to_string()))
}

pub fn initial_data(cfg: &ExperimentConfig, init: &InitialConfig, key: &str) -> CliResult<InitialData> {
    Ok(match init {
        InitialConfig::Constant { value } => InitialData::Constant(*value),
        InitialConfig::Riemann { u_l, u_r, x0 } => InitialData::Riemann { u_l: *u_l, u_r: *u_r, x0: *x0 },
        InitialConfig::Sine { amp, freq, offset } => InitialData::Sine { amp: *amp, freq: *freq, offset: *offset },
        InitialConfig::Table { file } => InitialData::Table(read_pairs(&cfg.resolve(file), ["x", "u"])?),
        InitialConfig::RandomBv { seed, tv_budget, pieces, range } => {
            InitialData::random_bv(cfg.grid.dim, seed.unwrap_or(cfg.seed), *pieces, (range[0], range[1]), *tv_budget)
                .map_err(|e| CliError::config(key, e.to_string()))?
        }
    })
}

/// Two-column numeric CSV with the given header.
pub fn read_pairs(path: &Path, header: [&str; 2]) -> CliResult<Vec<(f64, f64)>> {
    let shown = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Input { path: shown.clone(), message: e.to_string() })?;
    let cols = rdr.headers().map_err(|e| CliError::Input { path: shown.clone(), message: e.to_string() })?.clone();
    if cols.len() != 2 || cols[0] != *header[0] || cols[1] != *header[1] {
        return Err(CliError::Input { path: shown, message: format!("expected header `{},{}`", header[0], header[1]) });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input { path: shown.clone(), message: e.to_string() })?;
        let parse = |s: &str| s.parse::<f64>().map_err(|_| CliError::Input { path: shown.clone(), message: format!("row {}: `{s}` is not a number", i + 2) });
        rows.push((parse(&rec[0])?, parse(&rec[1])?));
    }
    Ok(rows)
}
