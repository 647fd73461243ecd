use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::scoring::DEFAULT_MIN_COUNT;

/// Placeholder replaced by the SNR in hypothesis path templates.
pub const SNR_PLACEHOLDER: &str = "{snr}";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Read { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
    #[error("{field}: file `{path}` does not exist")]
    MissingFile { field: String, path: String },
}

impl ConfigError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ConfigError::Parse { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// A WER given either as a literal percentage or as a hypothesis file to be
/// scored against the dataset references.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WerSource {
    Literal(f64),
    File(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcclusionSettings {
    pub none: WerSource,
    pub initial: Option<WerSource>,
    pub middle: Option<WerSource>,
    /// Free text carried into the occlusion table.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub name: String,
    /// Audio-only hypotheses, a path template containing `{snr}`.
    pub ao: Option<String>,
    /// Audio-visual hypotheses, a path template containing `{snr}`.
    pub av: Option<String>,
    /// Visual-only hypotheses (a single file).
    pub vo: Option<String>,
    pub occlusion: Option<OcclusionSettings>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    pub refs: String,
    #[serde(rename = "system", default)]
    pub systems: Vec<SystemConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MafiSettings {
    pub norms: String,
    /// SNRs whose AO/AV IWER tables are correlated; defaults to all.
    pub snrs: Option<Vec<f64>>,
    /// Shuffles for permutation p-values; 0 disables them.
    #[serde(default)]
    pub permutations: usize,
}

/// A full evaluation, read from TOML. Relative paths are resolved against
/// the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub seed: u64,
    pub snrs: Vec<f64>,
    #[serde(default = "default_ref_snrs")]
    pub ref_snrs: Vec<f64>,
    #[serde(default = "default_min_count")]
    pub min_count: usize,
    pub mafi: Option<MafiSettings>,
    #[serde(rename = "dataset")]
    pub datasets: Vec<DatasetConfig>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("report")
}

fn default_ref_snrs() -> Vec<f64> {
    vec![0.0]
}

fn default_min_count() -> usize {
    DEFAULT_MIN_COUNT
}

/// Renders an SNR the way it appears in file names and table keys.
pub fn snr_key(snr: f64) -> String {
    if snr == 0.0 {
        "0".into()
    } else {
        snr.to_string()
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl EvalConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &path.display().to_string(), &base)
    }

    /// Parses and validates; `source` is only used in error messages.
    pub fn from_toml(text: &str, source: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg: EvalConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: source.to_string(),
            line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.normalize()?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn normalize(&mut self) -> Result<(), ConfigError> {
        if self
            .snrs
            .iter()
            .chain(&self.ref_snrs)
            .any(|s| !s.is_finite())
        {
            return Err(ConfigError::Invalid("SNR values must be finite".into()));
        }
        self.snrs.sort_by(f64::total_cmp);
        self.ref_snrs.sort_by(f64::total_cmp);
        if let Some(m) = &mut self.mafi {
            if let Some(s) = &mut m.snrs {
                s.sort_by(f64::total_cmp);
            }
        }
        Ok(())
    }

    pub fn resolve(&self, path: &str) -> PathBuf {
        self.base_dir.join(path)
    }

    /// Output directory, resolved like any other path.
    pub fn out_dir(&self) -> PathBuf {
        self.base_dir.join(&self.out)
    }

    /// Every SNR whose AO/AV tables enter the MaFI correlation.
    pub fn mafi_snrs(&self) -> Vec<f64> {
        self.mafi
            .as_ref()
            .and_then(|m| m.snrs.clone())
            .unwrap_or_else(|| self.snrs.clone())
    }

    fn check_file(&self, field: String, path: &str) -> Result<(), ConfigError> {
        if self.resolve(path).is_file() {
            Ok(())
        } else {
            Err(ConfigError::MissingFile {
                field,
                path: path.to_string(),
            })
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.snrs.is_empty() {
            return invalid("`snrs` must not be empty".into());
        }
        if self.snrs.windows(2).any(|w| w[0] == w[1]) {
            return invalid("`snrs` contains duplicates".into());
        }
        if self.ref_snrs.is_empty() {
            return invalid("`ref_snrs` must not be empty".into());
        }
        if self.datasets.is_empty() {
            return invalid("at least one [[dataset]] is required".into());
        }
        if let Some(m) = &self.mafi {
            self.check_file("mafi.norms".into(), &m.norms)?;
            if let Some(s) = &m.snrs {
                if let Some(x) = s.iter().find(|x| !self.snrs.contains(x)) {
                    return invalid(format!("mafi.snrs entry {x} is not in `snrs`"));
                }
            }
            if m.permutations > 0 && m.permutations < 1000 {
                return invalid("mafi.permutations must be 0 or at least 1000".into());
            }
        }
        let mut dataset_names = BTreeSet::new();
        for d in &self.datasets {
            let name = d.name.trim();
            if name.is_empty() {
                return invalid("dataset name must not be empty".into());
            }
            if !dataset_names.insert(path_component(name)) {
                return invalid(format!("duplicate dataset name `{name}`"));
            }
            self.check_file(format!("dataset `{name}` refs"), &d.refs)?;
            let mut system_names = BTreeSet::new();
            for s in &d.systems {
                let ctx = format!("dataset `{name}` system `{}`", s.name);
                if s.name.trim().is_empty() {
                    return invalid(format!("dataset `{name}`: system name must not be empty"));
                }
                if !system_names.insert(path_component(&s.name)) {
                    return invalid(format!("{ctx}: duplicate system name"));
                }
                for (mode, template) in [("ao", &s.ao), ("av", &s.av)] {
                    let Some(t) = template else { continue };
                    if !t.contains(SNR_PLACEHOLDER) {
                        return invalid(format!("{ctx}: `{mode}` must contain {SNR_PLACEHOLDER}"));
                    }
                    for &snr in &self.snrs {
                        self.check_file(format!("{ctx} {mode}"), &expand(t, snr))?;
                    }
                }
                if let Some(vo) = &s.vo {
                    self.check_file(format!("{ctx} vo"), vo)?;
                }
                if let Some(o) = &s.occlusion {
                    let sources = [
                        ("none", Some(&o.none)),
                        ("initial", o.initial.as_ref()),
                        ("middle", o.middle.as_ref()),
                    ];
                    for (label, src) in sources {
                        match src {
                            Some(WerSource::File(p)) => {
                                self.check_file(format!("{ctx} occlusion.{label}"), p)?
                            }
                            Some(WerSource::Literal(v)) if !(v.is_finite() && *v >= 0.0) => {
                                return invalid(format!(
                                    "{ctx}: occlusion.{label} WER {v} is invalid"
                                ));
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Fills the `{snr}` placeholder.
pub fn expand(template: &str, snr: f64) -> String {
    template.replace(SNR_PLACEHOLDER, &snr_key(snr))
}

/// A name made safe to use as a single path component.
pub fn path_component(name: &str) -> String {
    name.trim()
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}
