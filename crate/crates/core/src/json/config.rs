//! Per-field encoding rules and their JSON file form.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::path::PathRules;
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD_PREFIX: &str = "ge";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericKind {
    Categorical,
    Thermometer,
}

/// How a number becomes a vector.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericMode {
    kind: NumericKind,
    thresholds: Vec<f64>,
    label_prefix: String,
}

impl NumericMode {
    /// Every distinct value gets its own random vector.
    pub fn categorical() -> Self {
        Self {
            kind: NumericKind::Categorical,
            thresholds: Vec::new(),
            label_prefix: DEFAULT_THRESHOLD_PREFIX.to_owned(),
        }
    }

    /// Thresholds must be finite, nonempty and strictly increasing.
    pub fn thermometer(thresholds: Vec<f64>, label_prefix: Option<&str>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::Config("thermometer needs at least one threshold".into()));
        }
        if let Some(t) = thresholds.iter().find(|t| !t.is_finite()) {
            return Err(Error::Config(format!("non-finite threshold {t}")));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "thresholds must be strictly increasing: {thresholds:?}"
            )));
        }
        Ok(Self {
            kind: NumericKind::Thermometer,
            thresholds,
            label_prefix: label_prefix.unwrap_or(DEFAULT_THRESHOLD_PREFIX).to_owned(),
        })
    }

    pub fn kind(&self) -> NumericKind {
        self.kind
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn label_prefix(&self) -> &str {
        &self.label_prefix
    }
}

impl Default for NumericMode {
    fn default() -> Self {
        Self::categorical()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StringOrder {
    #[default]
    Bag,
    Sequence,
}

/// Whether object keys map to roles by bare key or by full path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleKeying {
    #[default]
    Bare,
    FullPath,
}

/// Strings split on Unicode whitespace; leading and trailing punctuation
/// (general category P) is stripped from each token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerRules {
    pub lowercase: bool,
}

impl Default for TokenizerRules {
    fn default() -> Self {
        Self { lowercase: true }
    }
}

#[derive(Debug, Clone)]
pub struct EncodingConfig {
    pub numeric_rules: PathRules<NumericMode>,
    pub default_numeric: NumericMode,
    pub string_order_rules: PathRules<StringOrder>,
    pub default_string_order: StringOrder,
    pub normalize_strings: bool,
    pub normalize_arrays: bool,
    pub normalize_top: bool,
    pub tokenizer: TokenizerRules,
    pub role_keying: RoleKeying,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        Self {
            numeric_rules: PathRules::default(),
            default_numeric: NumericMode::categorical(),
            string_order_rules: PathRules::default(),
            default_string_order: StringOrder::Bag,
            normalize_strings: true,
            normalize_arrays: true,
            normalize_top: true,
            tokenizer: TokenizerRules::default(),
            role_keying: RoleKeying::Bare,
        }
    }
}

impl EncodingConfig {
    /// No normalization anywhere; every term keeps its raw length.
    pub fn unnormalized() -> Self {
        Self {
            normalize_strings: false,
            normalize_arrays: false,
            normalize_top: false,
            ..Self::default()
        }
    }

    pub fn with_numeric_rule(mut self, pattern: &str, mode: NumericMode) -> Result<Self> {
        self.numeric_rules.insert(pattern, mode)?;
        Ok(self)
    }

    pub fn with_string_order_rule(mut self, pattern: &str, order: StringOrder) -> Result<Self> {
        self.string_order_rules.insert(pattern, order)?;
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ConfigFile = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        file.try_into()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NumericRuleFile {
    kind: NumericKind,
    #[serde(default)]
    thresholds: Option<Vec<f64>>,
    #[serde(default)]
    label_prefix: Option<String>,
}

impl TryFrom<NumericRuleFile> for NumericMode {
    type Error = Error;

    fn try_from(f: NumericRuleFile) -> Result<Self> {
        match (f.kind, f.thresholds) {
            (NumericKind::Categorical, None) => Ok(NumericMode::categorical()),
            (NumericKind::Categorical, Some(_)) => {
                Err(Error::Config("categorical rules take no thresholds".into()))
            }
            (NumericKind::Thermometer, Some(t)) => NumericMode::thermometer(t, f.label_prefix.as_deref()),
            (NumericKind::Thermometer, None) => Err(Error::Config("thermometer rules need thresholds".into())),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NormalizeFile {
    strings: Option<bool>,
    arrays: Option<bool>,
    top: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TokenizerFile {
    lowercase: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    numeric_rules: BTreeMap<String, NumericRuleFile>,
    #[serde(default)]
    default_numeric: Option<NumericRuleFile>,
    #[serde(default)]
    string_order_rules: BTreeMap<String, StringOrder>,
    #[serde(default)]
    default_string_order: Option<StringOrder>,
    #[serde(default)]
    normalize: NormalizeFile,
    #[serde(default)]
    tokenizer: TokenizerFile,
    #[serde(default)]
    role_keying: Option<RoleKeying>,
}

impl TryFrom<ConfigFile> for EncodingConfig {
    type Error = Error;

    fn try_from(f: ConfigFile) -> Result<Self> {
        let mut cfg = EncodingConfig::default();
        for (pattern, rule) in f.numeric_rules {
            cfg.numeric_rules.insert(&pattern, rule.try_into()?)?;
        }
        if let Some(rule) = f.default_numeric {
            cfg.default_numeric = rule.try_into()?;
        }
        for (pattern, order) in f.string_order_rules {
            cfg.string_order_rules.insert(&pattern, order)?;
        }
        if let Some(order) = f.default_string_order {
            cfg.default_string_order = order;
        }
        cfg.normalize_strings = f.normalize.strings.unwrap_or(cfg.normalize_strings);
        cfg.normalize_arrays = f.normalize.arrays.unwrap_or(cfg.normalize_arrays);
        cfg.normalize_top = f.normalize.top.unwrap_or(cfg.normalize_top);
        cfg.tokenizer.lowercase = f.tokenizer.lowercase.unwrap_or(cfg.tokenizer.lowercase);
        cfg.role_keying = f.role_keying.unwrap_or(cfg.role_keying);
        Ok(cfg)
    }
}
