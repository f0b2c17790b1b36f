use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coupled::{AbsorbingLayer, Grid, WavePacketSpec};
use crate::error::MazerError;
use crate::model::{Basis, ModeFunction, ModelParams, PhotonDistribution, PhotonSector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Residual,
    ResidualSweep,
    Stationary,
    Propagate,
    Audit,
    ResonantProbabilities,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Residual,
        Scenario::ResidualSweep,
        Scenario::Stationary,
        Scenario::Propagate,
        Scenario::Audit,
        Scenario::ResonantProbabilities,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Residual => "residual",
            Scenario::ResidualSweep => "residual-sweep",
            Scenario::Stationary => "stationary",
            Scenario::Propagate => "propagate",
            Scenario::Audit => "audit",
            Scenario::ResonantProbabilities => "resonant-probabilities",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
                ConfigError::new(format!("unknown scenario `{s}`{}", suggestion(s, &names)))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    #[default]
    Mesa,
    Uncoupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub k0: f64,
    pub sigma_k: f64,
    /// Defaults to −5/σ_k − 10.
    #[serde(default)]
    pub z0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub dz: Option<f64>,
    #[serde(default)]
    pub margin_left: Option<f64>,
    #[serde(default)]
    pub margin_right: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn default_weights() -> BTreeMap<String, f64> {
    BTreeMap::from([("0".to_string(), 1.0)])
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("mazerlab-out")
}

/// A single scenario run. Energies in units of λ, lengths in 1/γ (ħ = 2M = 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default = "one")]
    pub cavity_length: f64,
    #[serde(default)]
    pub k: Option<f64>,
    #[serde(default)]
    pub ks: Option<Vec<f64>>,
    /// |D_n|² keyed by photon number.
    #[serde(default = "default_weights")]
    pub weights: BTreeMap<String, f64>,
    #[serde(default)]
    pub deltas: Option<Vec<f64>>,
    #[serde(default)]
    pub packet: Option<PacketConfig>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub record_every: Option<usize>,
    #[serde(default = "default_basis")]
    pub basis: Basis,
    #[serde(default)]
    pub mode: ModeKind,
    #[serde(default)]
    pub absorbing: Option<AbsorbingLayer>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub svg: bool,
    /// Reserved; no scenario draws random numbers.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_basis() -> Basis {
    Basis::Bare
}

const KNOWN_KEYS: &[&str] = &[
    "scenario",
    "lambda",
    "delta",
    "omega",
    "cavity_length",
    "k",
    "ks",
    "weights",
    "deltas",
    "packet",
    "grid",
    "dt",
    "steps",
    "record_every",
    "basis",
    "mode",
    "absorbing",
    "output_dir",
    "svg",
    "seed",
    "k0",
    "sigma_k",
    "z0",
    "dz",
    "margin_left",
    "margin_right",
    "width",
    "strength",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub message: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            line: None,
            column: None,
        }
    }

    fn from_json(err: &serde_json::Error) -> Self {
        let mut message = err.to_string();
        if let Some(name) = unknown_field(&message) {
            message.push_str(&suggestion(&name, KNOWN_KEYS));
        }
        let (line, column) = if err.line() > 0 {
            (Some(err.line()), Some(err.column()))
        } else {
            (None, None)
        };
        Self { message, line, column }
    }
}

impl ConfigError {
    /// Position of an offending key in the source text, for errors raised
    /// after the text was turned into a value.
    fn located_in(mut self, text: &str) -> Self {
        if self.line.is_some() {
            return self;
        }
        if let Some(name) = unknown_field(&self.message) {
            if let Some(offset) = text.find(&format!("\"{name}\"")) {
                let before = &text[..offset];
                self.line = Some(before.matches('\n').count() + 1);
                self.column = Some(offset - before.rfind('\n').map_or(0, |i| i + 1) + 1);
            }
        }
        self
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

impl From<MazerError> for ConfigError {
    fn from(e: MazerError) -> Self {
        ConfigError::new(e.to_string())
    }
}

fn unknown_field(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_string())
}

/// Physics names users reach for, mapped to the config key.
const ALIASES: &[(&str, &str)] = &[
    ("detuning", "delta"),
    ("coupling", "lambda"),
    ("frequency", "omega"),
    ("length", "cavity_length"),
    ("sectors", "weights"),
    ("photon_weights", "weights"),
    ("time_step", "dt"),
    ("n_steps", "steps"),
    ("output", "output_dir"),
];

fn suggestion(name: &str, candidates: &[&str]) -> String {
    let aliases = ALIASES.iter().filter(|(_, key)| candidates.contains(key)).copied();
    candidates
        .iter()
        .map(|c| (*c, *c))
        .chain(aliases)
        .map(|(spelling, key)| (strsim::jaro_winkler(name, spelling), key))
        .filter(|(score, _)| *score >= 0.8)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| format!(" (did you mean `{c}`?)"))
        .unwrap_or_default()
}

/// Parse `key=value` overrides. Values are read as JSON when possible and as
/// strings otherwise; dotted keys address nested objects.
pub fn parse_override(raw: &str) -> Result<(String, Value), ConfigError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| ConfigError::new(format!("override `{raw}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(ConfigError::new(format!("override `{raw}` has an empty key")));
    }
    let value = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
    Ok((key.to_string(), value))
}

fn apply_override(root: &mut Value, key: &str, value: Value) -> Result<(), ConfigError> {
    let mut node = root;
    let mut parts = key.split('.').peekable();
    while let Some(part) = parts.next() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| ConfigError::new(format!("override `{key}`: `{part}` is not inside an object")))?;
        if parts.peek().is_none() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

/// Parse, apply overrides, fill defaults and validate.
pub fn parse_config(text: &str, overrides: &[(String, Value)]) -> Result<RunConfig, ConfigError> {
    let config: RunConfig = if overrides.is_empty() {
        serde_json::from_str(text).map_err(|e| ConfigError::from_json(&e))?
    } else {
        let mut value: Value = serde_json::from_str(text).map_err(|e| ConfigError::from_json(&e))?;
        for (k, v) in overrides {
            apply_override(&mut value, k, v.clone())?;
        }
        serde_json::from_value(value).map_err(|e| ConfigError::from_json(&e).located_in(text))?
    };
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    load_config_with_overrides(path, &[])
}

pub fn load_config_with_overrides(path: &Path, overrides: &[(String, Value)]) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text, overrides)
}

/// Scenario-specific minimum config with every optional field at its default.
pub fn minimal_config(scenario: Scenario) -> RunConfig {
    RunConfig {
        scenario,
        lambda: 1.0,
        delta: 0.0,
        omega: 0.0,
        cavity_length: 1.0,
        k: None,
        ks: None,
        weights: default_weights(),
        deltas: None,
        packet: None,
        grid: None,
        dt: None,
        steps: None,
        record_every: None,
        basis: Basis::Bare,
        mode: ModeKind::Mesa,
        absorbing: None,
        output_dir: default_output_dir(),
        svg: false,
        seed: None,
    }
}

fn finite_list(field: &str, values: &[f64]) -> Result<(), ConfigError> {
    if values.is_empty() {
        return Err(ConfigError::new(format!("`{field}` must not be empty")));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(ConfigError::new(format!("`{field}` contains non-finite value {v}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let params = self.params()?;
        self.distribution()?;
        if let Some(ks) = &self.ks {
            finite_list("ks", ks)?;
        }
        if let Some(d) = &self.deltas {
            finite_list("deltas", d)?;
        }
        for k in self.ks() {
            if !(k > 0.0) {
                return Err(ConfigError::new(format!("`k` must be positive, got {k}")));
            }
        }
        let needs_k = matches!(
            self.scenario,
            Scenario::Residual | Scenario::ResidualSweep | Scenario::Stationary | Scenario::ResonantProbabilities
        );
        if needs_k && self.ks().is_empty() {
            return Err(ConfigError::new(format!("scenario {} needs `k` or `ks`", self.scenario)));
        }
        if self.scenario == Scenario::ResidualSweep && self.deltas.is_none() {
            return Err(ConfigError::new("scenario residual-sweep needs `deltas`"));
        }
        if self.scenario == Scenario::Propagate {
            if self.packet.is_none() {
                return Err(ConfigError::new("scenario propagate needs `packet`"));
            }
            match self.steps {
                Some(s) if s > 0 => {}
                _ => return Err(ConfigError::new("scenario propagate needs `steps` > 0")),
            }
            for s in self.distribution()?.sectors() {
                self.packet_spec(s.n)?.validate()?;
            }
            self.grid(&params)?;
            if let Some(dt) = self.dt {
                if !(dt > 0.0) || !dt.is_finite() {
                    return Err(ConfigError::new(format!("`dt` must be positive, got {dt}")));
                }
            }
        }
        if let Some(0) = self.record_every {
            return Err(ConfigError::new("`record_every` must be at least 1"));
        }
        if let Some(layer) = self.absorbing {
            if !(layer.width > 0.0) || !(layer.strength >= 0.0) {
                return Err(ConfigError::new("`absorbing` needs width > 0 and strength >= 0"));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams, ConfigError> {
        Ok(ModelParams::new(self.lambda, self.delta, self.omega, self.cavity_length)?)
    }

    pub fn distribution(&self) -> Result<PhotonDistribution, ConfigError> {
        let sectors = self
            .weights
            .iter()
            .map(|(key, &weight)| {
                let n = key
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| ConfigError::new(format!("`weights` key `{key}` is not a photon number")))?;
                Ok(PhotonSector { n, weight })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        Ok(PhotonDistribution::new(sectors)?)
    }

    /// `ks` if given, else `[k]`, else empty.
    pub fn ks(&self) -> Vec<f64> {
        match (&self.ks, self.k) {
            (Some(ks), _) => ks.clone(),
            (None, Some(k)) => vec![k],
            (None, None) => Vec::new(),
        }
    }

    /// `deltas` if given, else `[delta]`.
    pub fn delta_list(&self) -> Vec<f64> {
        self.deltas.clone().unwrap_or_else(|| vec![self.delta])
    }

    pub fn packet_spec(&self, n: u32) -> Result<WavePacketSpec, ConfigError> {
        let p = self
            .packet
            .ok_or_else(|| ConfigError::new("`packet` is required for this scenario"))?;
        Ok(WavePacketSpec {
            k0: p.k0,
            sigma_k: p.sigma_k,
            z0: p.z0.unwrap_or(-5.0 / p.sigma_k - 10.0),
            n,
        })
    }

    pub fn grid(&self, params: &ModelParams) -> Result<Grid, ConfigError> {
        let g = self.grid.unwrap_or_default();
        Ok(Grid::for_cavity(
            params.cavity_length(),
            g.dz.unwrap_or(Grid::DEFAULT_DZ),
            g.margin_left.unwrap_or(Grid::DEFAULT_MARGIN),
            g.margin_right.unwrap_or(Grid::DEFAULT_MARGIN),
        )?)
    }

    /// Half of dz² unless set.
    pub fn time_step(&self, grid: &Grid) -> f64 {
        self.dt.unwrap_or(0.5 * grid.dz() * grid.dz())
    }

    pub fn mode_function(&self) -> Result<ModeFunction, ConfigError> {
        Ok(match self.mode {
            ModeKind::Mesa => ModeFunction::mesa(self.cavity_length)?,
            ModeKind::Uncoupled => ModeFunction::Uncoupled,
        })
    }

    /// Canonical JSON used for hashing.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config(r#"{"scenario": "residual", "delta": 1, "k": 2}"#, &[]).unwrap();
        assert_eq!(c.lambda, 1.0);
        assert_eq!(c.cavity_length, 1.0);
        let d = c.distribution().unwrap();
        assert_eq!(d.sectors(), &[PhotonSector { n: 0, weight: 1.0 }]);
    }

    #[test]
    fn weights_must_sum_to_one() {
        let e = parse_config(r#"{"scenario": "residual", "k": 2, "weights": {"0": 0.5, "1": 0.6}}"#, &[]).unwrap_err();
        assert!(e.message.contains("weights"), "{}", e.message);
    }

    #[test]
    fn unknown_key_gets_a_suggestion() {
        let e = parse_config("{\"scenario\": \"residual\",\n \"k\": 2, \"detunning\": 1}", &[]).unwrap_err();
        assert!(e.message.contains("did you mean `delta`"), "{}", e.message);
        assert_eq!(e.line, Some(2));
        let e = parse_config(r#"{"scenario": "residual", "k": 2, "cavity_lenght": 1}"#, &[]).unwrap_err();
        assert!(e.message.contains("did you mean `cavity_length`"), "{}", e.message);
        let e = parse_config(r#"{"scenario": "residual", "k": 2, "xyzzy": 1}"#, &[]).unwrap_err();
        assert!(!e.message.contains("did you mean"), "{}", e.message);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = parse_config("{\"scenario\": \"residual\",\n  \"k\": }", &[]).unwrap_err();
        assert_eq!(e.line, Some(2));
        assert!(e.column.is_some());
    }

    #[test]
    fn unknown_keys_are_located_after_overrides() {
        let text = "{\"scenario\": \"residual\",\n  \"k\": 2, \"detunning\": 1}";
        let e = parse_config(text, &[parse_override("delta=1").unwrap()]).unwrap_err();
        assert_eq!((e.line, e.column), (Some(2), Some(11)));
        assert!(e.message.contains("did you mean `delta`"), "{}", e.message);
    }

    #[test]
    fn overrides_apply_before_validation() {
        let text = r#"{"scenario": "propagate", "packet": {"k0": 2, "sigma_k": 0.5}, "steps": 10}"#;
        let o = vec![parse_override("packet.k0=3").unwrap(), parse_override("delta=0.5").unwrap()];
        let c = parse_config(text, &o).unwrap();
        assert_eq!(c.packet.unwrap().k0, 3.0);
        assert_eq!(c.delta, 0.5);
        assert!(parse_config(text, &[parse_override("detuning=1").unwrap()]).is_err());
    }

    #[test]
    fn scenario_requirements() {
        assert!(parse_config(r#"{"scenario": "residual"}"#, &[]).is_err());
        assert!(parse_config(r#"{"scenario": "residual-sweep", "k": 1}"#, &[]).is_err());
        assert!(parse_config(r#"{"scenario": "audit"}"#, &[]).is_ok());
        assert!("residul".parse::<Scenario>().unwrap_err().message.contains("did you mean"));
    }
}
