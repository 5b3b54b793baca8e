use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::detectors::{DetectorKind, DetectorParams};
use crate::dtd::TrainingMode;
use crate::stream::StreamConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Baseline,
    Dtd,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Dtd => "dtd",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(Method::Baseline),
            "dtd" => Ok(Method::Dtd),
            other => Err(format!(
                "unknown method `{other}` (expected baseline or dtd)"
            )),
        }
    }
}

/// Which methods a config runs. `both` produces a paired baseline/DTD cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodSelection {
    Baseline,
    Dtd,
    #[default]
    Both,
}

impl MethodSelection {
    pub fn methods(self) -> &'static [Method] {
        match self {
            MethodSelection::Baseline => &[Method::Baseline],
            MethodSelection::Dtd => &[Method::Dtd],
            MethodSelection::Both => &[Method::Baseline, Method::Dtd],
        }
    }
}

impl From<Method> for MethodSelection {
    fn from(m: Method) -> Self {
        match m {
            Method::Baseline => MethodSelection::Baseline,
            Method::Dtd => MethodSelection::Dtd,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub kind: DetectorKind,
    /// Overrides the kind's default threshold. May be infinite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub params: DetectorParams,
}

impl DetectorConfig {
    pub fn new(kind: DetectorKind) -> Self {
        Self {
            kind,
            threshold: None,
            params: DetectorParams::default(),
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
            .unwrap_or_else(|| self.params.default_threshold(self.kind))
    }
}

fn default_var_smoothing() -> f64 {
    1e-9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierConfig {
    #[serde(default = "default_var_smoothing")]
    pub var_smoothing: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            var_smoothing: default_var_smoothing(),
        }
    }
}

fn default_mode() -> TrainingMode {
    TrainingMode::Continual
}
fn default_k() -> usize {
    3
}
fn default_eta() -> f64 {
    1e-6
}
pub fn default_seeds() -> Vec<u64> {
    (0..20).collect()
}

/// One experiment cell: a stream, a detector and a training mode, run over a
/// list of seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub method: MethodSelection,
    #[serde(default = "default_mode")]
    pub mode: TrainingMode,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub stream: StreamConfig,
    pub detector: DetectorConfig,
    #[serde(default)]
    pub classifier: ClassifierConfig,
    /// Results root; `results` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(
        name: impl Into<String>,
        stream: StreamConfig,
        detector: DetectorKind,
        mode: TrainingMode,
    ) -> Self {
        Self {
            name: name.into(),
            method: MethodSelection::Both,
            mode,
            k: default_k(),
            eta: default_eta(),
            seeds: default_seeds(),
            stream,
            detector: DetectorConfig::new(detector),
            classifier: ClassifierConfig::default(),
            output: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.name.is_empty() || self.name.contains(['/', '\\']) || self.name.starts_with('.') {
            return bad(format!("invalid experiment name `{}`", self.name));
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad("eta must be finite and positive".into());
        }
        if !(self.classifier.var_smoothing >= 0.0 && self.classifier.var_smoothing.is_finite()) {
            return bad("classifier.var_smoothing must be finite and non-negative".into());
        }
        if self.detector.threshold().is_nan() {
            return bad("detector.threshold is NaN".into());
        }
        if self.method != MethodSelection::Baseline && !self.detector.threshold().is_finite() {
            return bad("DTD needs a finite initial threshold".into());
        }
        self.detector
            .params
            .validate(self.detector.kind)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        self.stream
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Output directory name for one method's results: `<name>-<method>`.
    pub fn result_name(&self, method: Method) -> String {
        format!("{}-{}", self.name, method)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::GeneratorKind;

    const MINIMAL: &str = r#"
name = "sea0"

[stream]
kind = "sea"

[detector]
kind = "ddm"
"#;

    #[test]
    fn minimal_config_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.method, MethodSelection::Both);
        assert_eq!(c.mode, TrainingMode::Continual);
        assert_eq!(c.k, 3);
        assert_eq!(c.eta, 1e-6);
        assert_eq!(c.seeds.len(), 20);
        assert_eq!(c.stream.kind, GeneratorKind::Sea);
        assert_eq!(c.stream.n_chunks, 100);
        assert_eq!(c.detector.threshold(), 3.0);
        assert_eq!(c.result_name(Method::Dtd), "sea0-dtd");
    }

    #[test]
    fn full_config_round_trip() {
        let text = r#"
name = "mixed-kswin"
method = "dtd"
mode = "sporadic"
k = 5
eta = 0.001
seeds = [3, 4]

[stream]
kind = "mixed"
n_chunks = 30
chunk_size = 200

[detector]
kind = "kswin"
threshold = 0.5

[detector.params.kswin]
window = 20
recent = 5

[classifier]
var_smoothing = 1e-6
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.method, MethodSelection::Dtd);
        assert_eq!(c.detector.params.kswin.window, 20);
        assert_eq!(c.detector.threshold(), 0.5);
        assert_eq!(c.result_name(Method::Baseline), "mixed-kswin-baseline");
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn infinite_threshold_parses_for_baseline() {
        let text = MINIMAL.replace("kind = \"ddm\"", "kind = \"ddm\"\nthreshold = inf") + "";
        let text = format!("method = \"baseline\"\n{text}");
        let c = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(c.detector.threshold(), f64::INFINITY);
        let dtd = text.replace("method = \"baseline\"", "method = \"dtd\"");
        assert!(ExperimentConfig::from_toml(&dtd).is_err());
    }

    #[test]
    fn invalid_configs() {
        for (from, to) in [
            ("name = \"sea0\"", "name = \"sea0\"\nseeds = []"),
            ("name = \"sea0\"", "name = \"sea0\"\nk = 0"),
            ("name = \"sea0\"", "name = \"a/b\""),
            ("kind = \"sea\"", "kind = \"sea\"\nnoise = 0.9"),
            ("kind = \"ddm\"", "kind = \"nope\""),
            ("name = \"sea0\"", "name = \"sea0\"\nbogus = 1"),
        ] {
            let text = MINIMAL.replacen(from, to, 1);
            assert!(
                matches!(
                    ExperimentConfig::from_toml(&text),
                    Err(HarnessError::Config(_))
                ),
                "{to}"
            );
        }
    }
}
