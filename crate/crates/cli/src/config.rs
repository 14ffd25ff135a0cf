//! Declarative run configuration: a TOML document capturing every knob of
//! the pipeline, overridable by flags (flags win). Defaults mirror the
//! standard setup: 1% winsorization, VAR(1), 10-year horizon, generalized
//! shares, rolling windows 30-40.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use spillover_core::adf::RegressionForm;
use spillover_core::fevd::FevdMethod;
use spillover_core::sea::EventVariant;
use spillover_core::var::InfoCriterion;

use crate::error::{CliError, Result};
use crate::formats::graph::GraphFormat;
use crate::io::GapPolicy;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub output_dir: PathBuf,
    pub inputs: Inputs,
    #[serde(default)]
    pub prepare: Prepare,
    #[serde(default)]
    pub var: VarBlock,
    #[serde(default)]
    pub adf: AdfBlock,
    #[serde(default)]
    pub rolling: RollingBlock,
    #[serde(default)]
    pub network: NetworkBlock,
    #[serde(default)]
    pub conflict: ConflictBlock,
    #[serde(default)]
    pub regression: RegressionBlock,
    #[serde(default)]
    pub sea: SeaBlock,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub panel: PathBuf,
    pub catalog: Option<PathBuf>,
    pub coordinates: Option<PathBuf>,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
    #[serde(default = "default_year_column")]
    pub year_column: String,
    #[serde(default = "default_gap_policy")]
    pub gap_policy: GapPolicy,
}

fn default_delimiter() -> String {
    ",".to_string()
}

fn default_year_column() -> String {
    "year".to_string()
}

fn default_gap_policy() -> GapPolicy {
    GapPolicy::Strict
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prepare {
    /// Winsorization fraction; omit to skip clipping.
    pub winsorize: Option<f64>,
}

impl Default for Prepare {
    fn default() -> Self {
        Prepare { winsorize: Some(0.01) }
    }
}

/// VAR order: fixed or selected by information criterion.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
pub enum OrderSpec {
    Fixed(usize),
    Auto(String),
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarBlock {
    #[serde(default = "default_order")]
    pub order: OrderSpec,
    #[serde(default = "default_criterion")]
    pub criterion: String,
    #[serde(default = "default_max_order")]
    pub max_order: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_method")]
    pub method: String,
}

fn default_order() -> OrderSpec {
    OrderSpec::Fixed(1)
}

fn default_criterion() -> String {
    "bic".to_string()
}

fn default_max_order() -> usize {
    4
}

fn default_horizon() -> usize {
    10
}

fn default_method() -> String {
    "generalized".to_string()
}

impl Default for VarBlock {
    fn default() -> Self {
        VarBlock {
            order: default_order(),
            criterion: default_criterion(),
            max_order: default_max_order(),
            horizon: default_horizon(),
            method: default_method(),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdfBlock {
    #[serde(default = "default_adf_lag")]
    pub lag_order: usize,
    #[serde(default = "default_adf_form")]
    pub form: String,
}

fn default_adf_lag() -> usize {
    10
}

fn default_adf_form() -> String {
    "constant".to_string()
}

impl Default for AdfBlock {
    fn default() -> Self {
        AdfBlock { lag_order: default_adf_lag(), form: default_adf_form() }
    }
}

/// Window set: explicit list or inclusive range.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
pub enum WindowSpec {
    List(Vec<usize>),
    Range { from: usize, to: usize },
}

impl WindowSpec {
    pub fn expand(&self) -> Vec<usize> {
        match self {
            WindowSpec::List(v) => {
                let mut v = v.clone();
                v.sort_unstable();
                v.dedup();
                v
            }
            WindowSpec::Range { from, to } => (*from..=*to).collect(),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RollingBlock {
    #[serde(default = "default_windows")]
    pub windows: WindowSpec,
    /// Worker threads for the window set (each window is independent).
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_windows() -> WindowSpec {
    WindowSpec::Range { from: 30, to: 40 }
}

fn default_workers() -> usize {
    1
}

impl Default for RollingBlock {
    fn default() -> Self {
        RollingBlock { windows: default_windows(), workers: default_workers() }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkBlock {
    /// Terminal years to snapshot; each is clamped to the nearest available
    /// rolling end year. Defaults bracket the era's five panels.
    pub snapshot_years: Option<Vec<i32>>,
    #[serde(default = "default_retain")]
    pub retain_above: f64,
    #[serde(default = "default_highlight")]
    pub highlight_above: f64,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
    #[serde(default)]
    pub recompute_sizes: bool,
}

fn default_retain() -> f64 {
    0.2
}

fn default_highlight() -> f64 {
    0.5
}

fn default_formats() -> Vec<String> {
    vec!["dot".to_string(), "graphml".to_string(), "json".to_string()]
}

impl Default for NetworkBlock {
    fn default() -> Self {
        NetworkBlock {
            snapshot_years: None,
            retain_above: default_retain(),
            highlight_above: default_highlight(),
            formats: default_formats(),
            recompute_sizes: false,
        }
    }
}

/// Snapshot defaults: window-end years near the era's five highlighted
/// panels (pre-war, mid-century war, the northern wars, and two late-war
/// years).
pub const DEFAULT_SNAPSHOT_YEARS: [i32; 5] = [1617, 1648, 1721, 1759, 1762];

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConflictBlock {
    #[serde(default = "default_regions")]
    pub regions: Vec<u32>,
    #[serde(default)]
    pub schema: Option<crate::io::CatalogSchema>,
}

fn default_regions() -> Vec<u32> {
    vec![3, 4]
}

impl Default for ConflictBlock {
    fn default() -> Self {
        ConflictBlock { regions: default_regions(), schema: None }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionBlock {
    /// Year ranges excluded from the "excl." model variants.
    #[serde(default)]
    pub exclusions: Vec<(i32, i32)>,
    /// Newey-West lag; omit for the floor(4 (n/100)^{2/9}) rule.
    pub nw_lag: Option<usize>,
    #[serde(default = "default_quantiles")]
    pub quantiles: Vec<f64>,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    /// 0 = CPI control is the cross-city mean in year t; a positive value
    /// averages that mean over a trailing window of this length.
    #[serde(default)]
    pub cpi_window_mean: usize,
}

fn default_quantiles() -> Vec<f64> {
    vec![0.25, 0.5, 0.75, 0.9]
}

fn default_bootstrap() -> usize {
    1000
}

impl Default for RegressionBlock {
    fn default() -> Self {
        RegressionBlock {
            exclusions: Vec::new(),
            nw_lag: None,
            quantiles: default_quantiles(),
            bootstrap: default_bootstrap(),
            cpi_window_mean: 0,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeaBlock {
    #[serde(default = "default_half_width")]
    pub half_width: usize,
    #[serde(default = "default_n_boot")]
    pub n_boot: usize,
    #[serde(default = "default_variants")]
    pub variants: Vec<String>,
    /// Conflict spans the epochs center on; omit to skip the SEA stage.
    #[serde(default)]
    pub spans: Vec<(i32, i32)>,
    #[serde(default)]
    pub exclusions: Vec<(i32, i32)>,
    #[serde(default)]
    pub one_sided: bool,
}

fn default_half_width() -> usize {
    5
}

fn default_n_boot() -> usize {
    10_000
}

fn default_variants() -> Vec<String> {
    vec!["start".to_string(), "full-period".to_string(), "midpoint".to_string()]
}

impl Default for SeaBlock {
    fn default() -> Self {
        SeaBlock {
            half_width: default_half_width(),
            n_boot: default_n_boot(),
            variants: default_variants(),
            spans: Vec::new(),
            exclusions: Vec::new(),
            one_sided: false,
        }
    }
}

pub fn parse_method(name: &str) -> Result<FevdMethod> {
    match name {
        "cholesky" => Ok(FevdMethod::Cholesky),
        "generalized" => Ok(FevdMethod::Generalized),
        "generalized-target-scaled" => Ok(FevdMethod::GeneralizedTargetScaled),
        other => Err(CliError::config(format!(
            "unknown FEVD method \"{other}\" (expected cholesky, generalized, or generalized-target-scaled)"
        ))),
    }
}

pub fn parse_criterion(name: &str) -> Result<InfoCriterion> {
    match name.to_ascii_lowercase().as_str() {
        "aic" => Ok(InfoCriterion::Aic),
        "bic" => Ok(InfoCriterion::Bic),
        "hq" | "hannan-quinn" => Ok(InfoCriterion::HannanQuinn),
        other => Err(CliError::config(format!(
            "unknown information criterion \"{other}\" (expected aic, bic, or hq)"
        ))),
    }
}

pub fn parse_form(name: &str) -> Result<RegressionForm> {
    match name {
        "constant" => Ok(RegressionForm::Constant),
        "constant-trend" => Ok(RegressionForm::ConstantAndTrend),
        "none" => Ok(RegressionForm::None),
        other => Err(CliError::config(format!(
            "unknown regression form \"{other}\" (expected constant, constant-trend, or none)"
        ))),
    }
}

pub fn parse_variant(name: &str) -> Result<EventVariant> {
    match name {
        "start" => Ok(EventVariant::Start),
        "full-period" => Ok(EventVariant::FullPeriod),
        "midpoint" => Ok(EventVariant::Midpoint),
        other => Err(CliError::config(format!(
            "unknown SEA variant \"{other}\" (expected start, full-period, or midpoint)"
        ))),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::config(format!("config parse: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        // Input paths are relative to the config file.
        if let Some(dir) = path.parent() {
            config.inputs.panel = dir.join(&config.inputs.panel);
            config.inputs.catalog = config.inputs.catalog.map(|p| dir.join(p));
            config.inputs.coordinates = config.inputs.coordinates.map(|p| dir.join(p));
        }
        Ok(config)
    }

    pub fn delimiter_byte(&self) -> Result<u8> {
        let bytes = self.inputs.delimiter.as_bytes();
        if bytes.len() != 1 {
            return Err(CliError::config(format!(
                "delimiter must be a single byte, got \"{}\"",
                self.inputs.delimiter
            )));
        }
        Ok(bytes[0])
    }

    /// Everything checkable before touching the data.
    pub fn validate(&self) -> Result<()> {
        if !self.inputs.panel.exists() {
            return Err(CliError::config(format!(
                "panel file {} does not exist",
                self.inputs.panel.display()
            )));
        }
        for path in [&self.inputs.catalog, &self.inputs.coordinates].into_iter().flatten() {
            if !path.exists() {
                return Err(CliError::config(format!("input {} does not exist", path.display())));
            }
        }
        self.delimiter_byte()?;
        if let Some(p) = self.prepare.winsorize {
            if !(p > 0.0 && p < 0.5) {
                return Err(CliError::config(format!("winsorize fraction {p} outside (0, 0.5)")));
            }
        }
        if self.var.horizon == 0 {
            return Err(CliError::config("horizon must be at least 1"));
        }
        parse_method(&self.var.method)?;
        parse_form(&self.adf.form)?;
        match &self.var.order {
            OrderSpec::Fixed(0) => return Err(CliError::config("VAR order must be at least 1")),
            OrderSpec::Fixed(_) => {}
            OrderSpec::Auto(tag) if tag == "auto" => {
                parse_criterion(&self.var.criterion)?;
                if self.var.max_order == 0 {
                    return Err(CliError::config("max_order must be at least 1"));
                }
            }
            OrderSpec::Auto(other) => {
                return Err(CliError::config(format!(
                    "order must be an integer or \"auto\", got \"{other}\""
                )));
            }
        }
        let windows = self.rolling.windows.expand();
        if windows.is_empty() {
            return Err(CliError::config("window set is empty"));
        }
        if self.rolling.workers == 0 {
            return Err(CliError::config("workers must be at least 1"));
        }
        if self.network.highlight_above < self.network.retain_above {
            return Err(CliError::config(
                "highlight_above must be at least retain_above",
            ));
        }
        for f in &self.network.formats {
            f.parse::<GraphFormat>()?;
        }
        for &q in &self.regression.quantiles {
            if !(q > 0.0 && q < 1.0) {
                return Err(CliError::config(format!("quantile {q} outside (0, 1)")));
            }
        }
        if self.regression.bootstrap == 0 {
            return Err(CliError::config("bootstrap count must be at least 1"));
        }
        for (lo, hi) in self.regression.exclusions.iter().chain(&self.sea.exclusions) {
            if hi < lo {
                return Err(CliError::config(format!("exclusion range {lo}-{hi} is inverted")));
            }
        }
        if self.sea.half_width == 0 {
            return Err(CliError::config("SEA half-width must be at least 1"));
        }
        if self.sea.n_boot < 100 {
            return Err(CliError::config("SEA bootstrap count must be at least 100"));
        }
        for v in &self.sea.variants {
            parse_variant(v)?;
        }
        for &(start, end) in &self.sea.spans {
            if end < start {
                return Err(CliError::config(format!("SEA span {start}-{end} is inverted")));
            }
        }
        Ok(())
    }

    /// Feasibility arithmetic that needs the panel dimensions: every window
    /// must leave the residual covariance full rank after differencing.
    pub fn validate_against_panel(&self, n_locations: usize, t_diff: usize) -> Result<()> {
        let order = match &self.var.order {
            OrderSpec::Fixed(p) => *p,
            OrderSpec::Auto(_) => self.var.max_order,
        };
        let needed = order + spillover_core::var::min_rows_for_fit(n_locations, order, true);
        for w in self.rolling.windows.expand() {
            if w < needed {
                return Err(CliError::config(format!(
                    "window {w} infeasible for {n_locations} locations at order {order}: need at least {needed} (rank-deficiency, curse of dimensionality)"
                )));
            }
            if w > t_diff {
                return Err(CliError::config(format!(
                    "window {w} exceeds the differenced sample length {t_diff}"
                )));
            }
        }
        if t_diff <= 2 * (self.adf.lag_order + 2) {
            return Err(CliError::config(format!(
                "series too short ({t_diff}) for ADF lag order {}",
                self.adf.lag_order
            )));
        }
        Ok(())
    }

    /// SHA-256 of the resolved analytic configuration (hex). The output
    /// directory is excluded: where a run is written does not change what
    /// it computes, and identical analyses must hash identically.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("output_dir");
        }
        let canonical = serde_json::to_string(&value).expect("config value serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex_string(&hasher.finalize())
    }
}

pub fn hex_string(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        use std::fmt::Write as _;
        let _ = write!(out, "{b:02x}");
    }
    out
}
