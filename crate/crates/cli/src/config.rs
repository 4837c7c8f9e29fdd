//! The axiom configuration file: named formulas plus named axiom bundles.

use std::collections::BTreeMap;
use std::path::Path;

use modalforge::Formula;
use thiserror::Error;

const DEFAULT_CONFIG: &str = include_str!("../assets/axioms.cfg");

#[derive(Clone, Debug)]
pub struct AxiomConfig {
    axioms: BTreeMap<String, Formula>,
    logics: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `axiom NAME = FORMULA` or `logic NAME = a, b, …`")]
    Malformed { line: usize },
    #[error("line {line}: bad name `{name}`")]
    BadName { line: usize, name: String },
    #[error("line {line}: axiom `{name}` does not parse: {source}")]
    BadFormula {
        line: usize,
        name: String,
        source: modalforge::ParseError,
    },
    #[error("line {line}: logic `{logic}` references unknown axiom `{axiom}`")]
    UnknownAxiom {
        line: usize,
        logic: String,
        axiom: String,
    },
    #[error("line {line}: duplicate definition of `{name}`")]
    Duplicate { line: usize, name: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-')
}

impl AxiomConfig {
    /// The built-in catalog shipped with the binary.
    pub fn default_config() -> AxiomConfig {
        AxiomConfig::parse(DEFAULT_CONFIG).expect("the embedded default config parses")
    }

    pub fn default_text() -> &'static str {
        DEFAULT_CONFIG
    }

    pub fn from_path(path: &Path) -> Result<AxiomConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        AxiomConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<AxiomConfig, ConfigError> {
        let mut axioms = BTreeMap::new();
        let mut logics: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut logic_lines = Vec::new();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (keyword, rest) = content
                .split_once(char::is_whitespace)
                .ok_or(ConfigError::Malformed { line })?;
            let (name, value) = rest
                .split_once('=')
                .map(|(n, v)| (n.trim(), v.trim()))
                .ok_or(ConfigError::Malformed { line })?;
            if !valid_name(name) {
                return Err(ConfigError::BadName {
                    line,
                    name: name.to_string(),
                });
            }
            match keyword {
                "axiom" => {
                    let formula =
                        Formula::parse(value).map_err(|source| ConfigError::BadFormula {
                            line,
                            name: name.to_string(),
                            source,
                        })?;
                    if axioms.insert(name.to_string(), formula).is_some() {
                        return Err(ConfigError::Duplicate {
                            line,
                            name: name.to_string(),
                        });
                    }
                }
                "logic" => {
                    let members: Vec<String> = if value.is_empty() {
                        Vec::new()
                    } else {
                        value.split(',').map(|a| a.trim().to_string()).collect()
                    };
                    if logics.insert(name.to_string(), members).is_some() {
                        return Err(ConfigError::Duplicate {
                            line,
                            name: name.to_string(),
                        });
                    }
                    logic_lines.push((line, name.to_string()));
                }
                _ => return Err(ConfigError::Malformed { line }),
            }
        }
        for (line, logic) in logic_lines {
            for axiom in &logics[&logic] {
                if !axioms.contains_key(axiom) {
                    return Err(ConfigError::UnknownAxiom {
                        line,
                        logic,
                        axiom: axiom.clone(),
                    });
                }
            }
        }
        Ok(AxiomConfig { axioms, logics })
    }

    pub fn axiom(&self, name: &str) -> Option<&Formula> {
        self.axioms.get(name)
    }

    pub fn axiom_names(&self) -> impl Iterator<Item = &str> {
        self.axioms.keys().map(String::as_str)
    }

    pub fn logic(&self, name: &str) -> Option<&[String]> {
        self.logics.get(name).map(Vec::as_slice)
    }
}
