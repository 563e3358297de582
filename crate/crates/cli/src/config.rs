//! JSON job configs. Every config is validated before any computation starts.

use std::path::{Path, PathBuf};

use rfcw::phase_diagram::ModelFamily;
use rfcw::FieldModel;
use serde::de::DeserializeOwned;
use serde::Deserialize;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<rfcw::Error> for ConfigError {
    fn from(e: rfcw::Error) -> Self {
        ConfigError(e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Reads and parses `path`; parse errors carry line and column.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn check_range(name: &str, r: [f64; 2], strict: bool) -> Result<(), ConfigError> {
    let ok = r[0].is_finite() && r[1].is_finite() && if strict { r[0] < r[1] } else { r[0] <= r[1] };
    if ok {
        Ok(())
    } else {
        Err(invalid(format!("{name}: range [{}, {}] is empty or unordered", r[0], r[1])))
    }
}

fn check_beta(beta: f64) -> Result<(), ConfigError> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("beta: must be positive and finite, got {beta}")))
    }
}

fn check_resolution(name: &str, n: usize) -> Result<(), ConfigError> {
    if n >= 2 {
        Ok(())
    } else {
        Err(invalid(format!("{name}: resolution must be >= 2, got {n}")))
    }
}

fn check_seeds(seeds: &[u64]) -> Result<(), ConfigError> {
    if seeds.is_empty() {
        Err(invalid("seeds: list is empty"))
    } else {
        Ok(())
    }
}

fn check_n_list(n_list: &[usize]) -> Result<(), ConfigError> {
    if n_list.is_empty() || n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        Err(invalid(format!("n_list: must be non-empty, positive and strictly increasing, got {n_list:?}")))
    } else {
        Ok(())
    }
}

/// Replaces the field strength of a one-parameter model.
pub fn with_field_strength(model: &FieldModel, h: f64) -> Result<FieldModel, ConfigError> {
    let replaced = match model {
        FieldModel::Constant { .. } => FieldModel::constant(h),
        FieldModel::Dichotomous { alpha, .. } => FieldModel::dichotomous(h, *alpha),
        FieldModel::Uniform { .. } => FieldModel::uniform(h),
        FieldModel::Rotation { angle, .. } => FieldModel::rotation(*angle, h),
        other => return Err(invalid(format!("--h does not apply to {other:?}"))),
    };
    Ok(replaced?)
}

fn default_curve_points() -> usize {
    211
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateCurveConfig {
    pub model: FieldModel,
    pub beta: f64,
    #[serde(default = "default_curve_points")]
    pub points: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl RateCurveConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check_beta(self.beta)?;
        check_resolution("points", self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScanFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseScanConfig {
    pub family: ModelFamily,
    pub beta_range: [f64; 2],
    pub h_range: [f64; 2],
    /// `[beta_points, h_points]`.
    pub resolution: [usize; 2],
    #[serde(default)]
    pub format: ScanFormat,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl PhaseScanConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check_range("beta_range", self.beta_range, true)?;
        check_beta(self.beta_range[0])?;
        check_range("h_range", self.h_range, false)?;
        if self.h_range[0] < 0.0 {
            return Err(invalid("h_range: field strengths must be >= 0"));
        }
        check_resolution("resolution[0]", self.resolution[0])?;
        check_resolution("resolution[1]", self.resolution[1])
    }
}

fn default_budget() -> f64 {
    0.02
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyCase {
    pub model: FieldModel,
    pub beta: f64,
    /// `β` used for the theoretical rate; defaults to `beta`.
    #[serde(default)]
    pub theory_beta: Option<f64>,
    pub interval: [f64; 2],
    pub n_list: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Bound on every deviation at the largest `n`.
    #[serde(default = "default_budget")]
    pub budget: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub cases: Vec<VerifyCase>,
    #[serde(default = "default_true")]
    pub oracles: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl VerifyConfig {
    /// Two LDP cases with known behaviour plus the oracle comparisons.
    pub fn default_suite() -> Self {
        let seeds: Vec<u64> = (1..=10).collect();
        VerifyConfig {
            cases: vec![
                VerifyCase {
                    model: FieldModel::Constant { h: 0.0 },
                    beta: 0.5,
                    theory_beta: None,
                    interval: [0.5, 1.0],
                    n_list: vec![100, 400, 1600],
                    seeds: seeds.clone(),
                    budget: 0.02,
                },
                VerifyCase {
                    model: FieldModel::Dichotomous { h: 1.0, alpha: 0.5 },
                    beta: 0.6,
                    theory_beta: None,
                    interval: [0.4, 1.0],
                    n_list: vec![2000],
                    seeds,
                    budget: 0.03,
                },
            ],
            oracles: true,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.cases.is_empty() {
            return Err(invalid("cases: list is empty"));
        }
        for (i, case) in self.cases.iter().enumerate() {
            let at = |e: ConfigError| invalid(format!("cases[{i}].{e}"));
            check_beta(case.beta).map_err(at)?;
            if let Some(b) = case.theory_beta {
                check_beta(b).map_err(|e| invalid(format!("cases[{i}].theory_{e}")))?;
            }
            check_range("interval", case.interval, false).map_err(at)?;
            check_n_list(&case.n_list).map_err(at)?;
            check_seeds(&case.seeds).map_err(at)?;
            if case.budget.is_nan() || case.budget <= 0.0 {
                return Err(invalid(format!("cases[{i}].budget: must be positive, got {}", case.budget)));
            }
        }
        Ok(())
    }
}

fn default_x_range() -> [f64; 2] {
    [-3.0, 3.0]
}

fn default_x_points() -> usize {
    61
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsConfig {
    pub models: Vec<FieldModel>,
    pub beta: f64,
    pub n_list: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_x_range")]
    pub x_range: [f64; 2],
    #[serde(default = "default_x_points")]
    pub x_points: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl FieldsConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.models.is_empty() {
            return Err(invalid("models: list is empty"));
        }
        check_beta(self.beta)?;
        check_n_list(&self.n_list)?;
        check_seeds(&self.seeds)?;
        check_range("x_range", self.x_range, true)?;
        check_resolution("x_points", self.x_points)
    }
}
