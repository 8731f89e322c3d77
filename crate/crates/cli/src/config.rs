//! Run configuration: a TOML document plus dotted `key=value` overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use phdae_core::calculus::DgKind;
use phdae_core::integrators::{ApproxMode, DdrCompletion, InputSampling, IntegrateOptions};
use phdae_core::library::{build_model, ModelParams, ShippedModel};
use phdae_core::numerics::{JacobianMode, NewtonConfig, Vector};
use phdae_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Sedg,
    Dgp,
    Ddr,
    Midpoint,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Sedg => "sedg",
            Scheme::Dgp => "dgp",
            Scheme::Ddr => "ddr",
            Scheme::Midpoint => "midpoint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DgChoice {
    Gonzalez,
    Left,
    Right,
}

impl DgChoice {
    pub fn kind(self) -> DgKind {
        match self {
            DgChoice::Gonzalez => DgKind::Gonzalez,
            DgChoice::Left => DgKind::Left,
            DgChoice::Right => DgKind::Right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompletionChoice {
    Midpoint,
    Next,
    Prev,
}

impl CompletionChoice {
    pub fn completion(self) -> DdrCompletion {
        match self {
            CompletionChoice::Midpoint => DdrCompletion::MatchCostateMidpoint,
            CompletionChoice::Next => DdrCompletion::MatchCostateNext,
            CompletionChoice::Prev => DdrCompletion::MatchCostatePrev,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    Midpoint,
    Left,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub name: String,
    /// Scalar parameter overrides, e.g. `k13 = 50.0`.
    pub params: BTreeMap<String, f64>,
    /// Replaces the model's default initial state.
    pub initial_state: Option<Vec<f64>>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            name: "four_particle".into(),
            params: BTreeMap::new(),
            initial_state: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonSection {
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    /// Backtracking factor in (0,1); absent means full Newton steps.
    pub damping: Option<f64>,
}

impl Default for NewtonSection {
    fn default() -> Self {
        let d = NewtonConfig::default();
        Self {
            tol: d.tol,
            max_iter: d.max_iter,
            fd_step: d.fd_step,
            damping: d.damping,
        }
    }
}

impl NewtonSection {
    pub fn config(&self) -> NewtonConfig {
        NewtonConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            jacobian_mode: JacobianMode::FiniteDifference,
            fd_step: self.fd_step,
            damping: self.damping,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InputSection {
    /// `zero`, `constant` or `sine`.
    pub signal: String,
    pub values: Vec<f64>,
    pub omega: f64,
    pub sampling: Sampling,
}

impl Default for InputSection {
    fn default() -> Self {
        Self {
            signal: "zero".into(),
            values: Vec::new(),
            omega: 1.0,
            sampling: Sampling::Midpoint,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSection {
    pub h_list: Vec<f64>,
    pub reference_h: f64,
    pub probe_time: f64,
    pub observables: Vec<String>,
    /// `scheme` (run at `reference_h`) or `exact` (closed form, where the
    /// model has one).
    pub reference: String,
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        Self {
            h_list: vec![0.02, 0.01, 0.005, 0.0025],
            reference_h: 1e-4,
            probe_time: 0.1,
            observables: vec!["q4".into(), "v4".into(), "lambda1".into()],
            reference: "scheme".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobustnessSection {
    pub h_list: Vec<f64>,
    pub schemes: Vec<Scheme>,
}

impl Default for RobustnessSection {
    fn default() -> Self {
        Self {
            h_list: vec![0.01, 0.05, 0.1, 0.2, 0.25, 0.4],
            schemes: vec![Scheme::Sedg, Scheme::Midpoint],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationSection {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for ValidationSection {
    fn default() -> Self {
        Self {
            samples: 20,
            seed: 2024,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub scheme: Scheme,
    pub discrete_gradient: DgChoice,
    /// Sampling mode per coefficient (`E`, `J`, `R`, `B`), replacing the
    /// scheme's default approximation of that coefficient.
    pub coefficients: BTreeMap<String, String>,
    /// DDR only.
    pub completion: CompletionChoice,
    pub h: f64,
    pub t_end: f64,
    pub newton: NewtonSection,
    pub input: InputSection,
    pub output: OutputSection,
    pub convergence: ConvergenceSection,
    pub robustness: RobustnessSection,
    pub validation: ValidationSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelSection::default(),
            scheme: Scheme::Sedg,
            discrete_gradient: DgChoice::Gonzalez,
            coefficients: BTreeMap::new(),
            completion: CompletionChoice::Midpoint,
            h: 0.01,
            t_end: 10.0,
            newton: NewtonSection::default(),
            input: InputSection::default(),
            output: OutputSection::default(),
            convergence: ConvergenceSection::default(),
            robustness: RobustnessSection::default(),
            validation: ValidationSection::default(),
        }
    }
}

/// Parse an override value as a TOML literal, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn apply_override(root: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{spec}' is not of the form key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("malformed override key '{key}'")));
    }
    let mut table = root;
    for p in &parts[..parts.len() - 1] {
        let entry = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override '{key}': '{p}' is not a table")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

impl RunConfig {
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut root: toml::Table = text
            .parse()
            .map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        for o in overrides {
            apply_override(&mut root, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(root)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("invalid config: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::from_toml_str(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Config(format!("h must be positive, got {}", self.h)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.h > self.t_end {
            return Err(Error::Config(format!("h={} exceeds t_end={}", self.h, self.t_end)));
        }
        self.newton.config().validate()?;
        for (name, mode) in &self.coefficients {
            if !["E", "J", "R", "B"].contains(&name.as_str()) {
                return Err(Error::Config(format!("unknown coefficient '{name}'")));
            }
            ApproxMode::parse(mode)?;
        }
        if !["zero", "constant", "sine"].contains(&self.input.signal.as_str()) {
            return Err(Error::Config(format!("unknown input signal '{}'", self.input.signal)));
        }
        Ok(())
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let mut p = ModelParams::defaults(&self.model.name)?;
        for (k, v) in &self.model.params {
            p.set(k, *v)?;
        }
        Ok(p)
    }

    pub fn build_model(&self) -> Result<ShippedModel> {
        build_model(&self.model_params()?)
    }

    pub fn initial_state(&self, model: &ShippedModel) -> Result<Vector> {
        match &self.model.initial_state {
            Some(v) if v.len() != model.system.n => Err(Error::Config(format!(
                "initial_state has {} entries, model '{}' has {} states",
                v.len(),
                model.name,
                model.system.n
            ))),
            Some(v) => Ok(Vector::from_vec(v.clone())),
            None => Ok(model.initial_state()),
        }
    }

    pub fn integrate_options(&self) -> IntegrateOptions {
        IntegrateOptions {
            newton: self.newton.config(),
            sampling: match self.input.sampling {
                Sampling::Midpoint => InputSampling::Midpoint,
                Sampling::Left => InputSampling::Left,
            },
        }
    }

    /// The input signal as a function of `(step, t)`.
    pub fn input_signal(&self, m: usize) -> Result<impl Fn(usize, f64) -> Vector + Sync> {
        let values = match self.input.signal.as_str() {
            "zero" => vec![0.0; m],
            _ if self.input.values.len() != m => {
                return Err(Error::Config(format!(
                    "input.values needs {m} entries, got {}",
                    self.input.values.len()
                )))
            }
            _ => self.input.values.clone(),
        };
        let sine = self.input.signal == "sine";
        let omega = self.input.omega;
        let base = Vector::from_vec(values);
        Ok(move |_k: usize, t: f64| if sine { &base * (omega * t).sin() } else { base.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = RunConfig::from_toml_str(
            "scheme = \"midpoint\"\n[model]\nname = \"linear_index1\"\n",
            &["h=0.1".into(), "t_end=1".into(), "newton.tol=1e-12".into(), "model.params.k=2".into()],
        )
        .unwrap();
        assert_eq!(cfg.scheme, Scheme::Midpoint);
        assert_eq!(cfg.h, 0.1);
        assert_eq!(cfg.t_end, 1.0);
        assert_eq!(cfg.newton.tol, 1e-12);
        assert!(cfg.model_params().is_err());
    }

    #[test]
    fn string_overrides_without_quotes() {
        let cfg = RunConfig::from_toml_str("", &["scheme=ddr".into(), "completion=next".into()]).unwrap();
        assert_eq!(cfg.scheme, Scheme::Ddr);
        assert_eq!(cfg.completion, CompletionChoice::Next);
    }

    #[test]
    fn rejects_bad_configs() {
        for o in ["h=-1", "h=20", "scheme=rk4", "bogus=1", "coefficients.Q=\"left\"", "newton.tol=0", "input.signal=\"ramp\""] {
            assert!(
                matches!(RunConfig::from_toml_str("", &[o.into()]), Err(Error::Config(_))),
                "{o}"
            );
        }
        assert!(RunConfig::from_toml_str("", &["noequals".into()]).is_err());
    }

    #[test]
    fn echo_round_trips() {
        let cfg = RunConfig::from_toml_str("", &["model.params.k13=60".into()]).unwrap();
        let again = RunConfig::from_toml_str(&cfg.to_toml(), &[]).unwrap();
        assert_eq!(cfg, again);
    }
}
