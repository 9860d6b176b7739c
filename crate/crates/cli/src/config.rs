//! Run configuration: a parameter schema per subcommand, `key = value` config
//! files with `[subcommand]` sections, and the merge of file values, flags,
//! defaults and the seed fallback into one validated [`RunConfig`].

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde_json::{json, Map, Value as Json};
use thiserror::Error;

/// Environment variable read when no seed is given by flag or file.
pub const SEED_ENV: &str = "FTQLAB_SEED";

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown key {key:?} for {scope}")]
    UnknownKey { key: String, scope: String },
    #[error("key {key:?}: expected {expected}, got {value:?}")]
    TypeMismatch {
        key: String,
        expected: &'static str,
        value: String,
    },
    #[error("missing required key {0:?}")]
    MissingKey(String),
    #[error("key {key:?}: {reason}")]
    Invalid { key: String, reason: String },
    #[error("unknown subcommand {0:?}")]
    UnknownCommand(String),
    #[error("config line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("{0}")]
    Usage(String),
    #[error("cannot read config file {path}: {reason}")]
    Unreadable { path: String, reason: String },
}

pub type Result<T, E = ConfigError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Int,
    Real,
    Str,
    IntList,
    RealList,
    StrList,
}

impl Kind {
    pub fn describe(self) -> &'static str {
        match self {
            Kind::Int => "a non-negative integer",
            Kind::Real => "a finite real",
            Kind::Str => "a string",
            Kind::IntList => "a comma-separated list of non-negative integers",
            Kind::RealList => "a comma-separated list of finite reals",
            Kind::StrList => "a comma-separated list of strings",
        }
    }

    pub fn value_name(self) -> &'static str {
        match self {
            Kind::Int => "INT",
            Kind::Real => "REAL",
            Kind::Str => "STR",
            Kind::IntList => "INT,..",
            Kind::RealList => "REAL,..",
            Kind::StrList => "STR,..",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(u64),
    Real(f64),
    Str(String),
    IntList(Vec<u64>),
    RealList(Vec<f64>),
    StrList(Vec<String>),
}

impl Value {
    fn to_json(&self) -> Json {
        match self {
            Value::Int(v) => json!(v),
            Value::Real(v) => json!(v),
            Value::Str(v) => json!(v),
            Value::IntList(v) => json!(v),
            Value::RealList(v) => json!(v),
            Value::StrList(v) => json!(v),
        }
    }
}

fn parse_int(s: &str) -> Option<u64> {
    s.trim().parse().ok()
}

fn parse_real(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    let items: Option<Vec<T>> = s.split(',').map(|p| f(p.trim())).collect();
    items.filter(|v| !v.is_empty())
}

/// Parses `raw` as `kind`; the error names `key`.
pub fn parse_value(key: &str, kind: Kind, raw: &str) -> Result<Value> {
    let v = match kind {
        Kind::Int => parse_int(raw).map(Value::Int),
        Kind::Real => parse_real(raw).map(Value::Real),
        Kind::Str => Some(raw.trim().to_string()).filter(|s| !s.is_empty()).map(Value::Str),
        Kind::IntList => parse_list(raw, parse_int).map(Value::IntList),
        Kind::RealList => parse_list(raw, parse_real).map(Value::RealList),
        Kind::StrList => parse_list(raw, |s| Some(s.to_string()).filter(|s| !s.is_empty())).map(Value::StrList),
    };
    v.ok_or_else(|| ConfigError::TypeMismatch {
        key: key.to_string(),
        expected: kind.describe(),
        value: raw.to_string(),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct Param {
    pub key: &'static str,
    pub kind: Kind,
    /// `None` marks a required key.
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn param(key: &'static str, kind: Kind, default: Option<&'static str>, help: &'static str) -> Param {
    Param {
        key,
        kind,
        default,
        help,
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CommandSpec {
    pub name: &'static str,
    pub about: &'static str,
    pub params: &'static [Param],
}

impl CommandSpec {
    pub fn param(&self, key: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.key == key)
    }
}

/// Keys accepted outside any section and as global flags.
pub const GLOBAL_PARAMS: &[Param] = &[
    param(
        "seed",
        Kind::Int,
        None,
        "Master seed; falls back to FTQLAB_SEED, then 0",
    ),
    param("out", Kind::Str, None, "Output file; stdout when absent"),
    param(
        "threads",
        Kind::Int,
        None,
        "Worker threads (a hint; results do not depend on it)",
    ),
];

pub const COMMANDS: &[CommandSpec] = &[
    CommandSpec {
        name: "rep-check",
        about: "Representation checks on golden cases (JSON)",
        params: &[param(
            "golden",
            Kind::Str,
            Some("shipped"),
            "Golden-case JSON file, or \"shipped\"",
        )],
    },
    CommandSpec {
        name: "noise-bounds",
        about: "Adversarial tail sums against exp(-n delta/3) (CSV)",
        params: &[
            param("n", Kind::IntList, Some("50,100,200,400"), "Qubit counts"),
            param("delta", Kind::RealList, Some("0.02,0.05,0.1"), "Noise rates"),
        ],
    },
    CommandSpec {
        name: "toric-comm",
        about: "Toric-code communication failure rates against the loop-counting bound (CSV)",
        params: &[
            param("L", Kind::IntList, None, "Lattice sizes"),
            param("nu", Kind::Real, None, "Channel noise rate"),
            param("delta-prime", Kind::Real, Some("0"), "Encoder and decoder noise rate"),
            param(
                "spread",
                Kind::Real,
                Some("0"),
                "Cluster spread of encoder and decoder noise",
            ),
            param(
                "trials",
                Kind::Int,
                Some("100000"),
                "Trials per lattice size (at least 100)",
            ),
        ],
    },
    CommandSpec {
        name: "rec-sim",
        about: "Fault-path sweeps of rectangles (JSON)",
        params: &[
            param("code", Kind::Str, Some("rotated-surface-5"), "Shipped base code"),
            param("t", Kind::Int, Some("2"), "Correctable weight of the base code"),
            param(
                "gate",
                Kind::StrList,
                Some("I,X,Z,CNOT,prep_z,measure_z"),
                "Rectangle gates",
            ),
            param("level", Kind::Int, Some("1"), "Rectangle level, 1 or 2"),
            param(
                "sweep",
                Kind::Str,
                Some("single-fault-exhaustive"),
                "single-fault-exhaustive or monte-carlo",
            ),
            param(
                "delta",
                Kind::Real,
                Some("0.001"),
                "Location fault rate for monte-carlo",
            ),
            param("trials", Kind::Int, Some("1000"), "Sampled paths for monte-carlo"),
            param("witnesses", Kind::Int, Some("10"), "Most witnesses kept per gate"),
        ],
    },
    CommandSpec {
        name: "teleport-verify",
        about: "Gate teleportation against the logical action on every branch (JSON)",
        params: &[
            param("code", Kind::Str, Some("toric-3"), "Shipped two-logical-qubit code"),
            param(
                "gate-set",
                Kind::Str,
                Some("standard"),
                "identity, paulis, cnot, standard or clifford",
            ),
            param(
                "trials",
                Kind::Int,
                Some("4"),
                "Random stabilizer inputs per gate, on top of the basis inputs",
            ),
            param(
                "table",
                Kind::Str,
                Some("standard"),
                "Correction table: standard, or swapped as a negative control",
            ),
        ],
    },
    CommandSpec {
        name: "single-shot",
        about: "Single-shot memory survival curves (CSV)",
        params: &[
            param("code", Kind::Str, Some("toric-3"), "Shipped code"),
            param("delta", Kind::RealList, Some("0.005"), "Circuit noise rates"),
            param("rounds", Kind::Int, Some("10"), "Rounds per trial"),
            param("trials", Kind::Int, Some("10000"), "Trials per noise rate"),
            param(
                "decoder",
                Kind::Str,
                Some("full"),
                "full (all check rows, syndrome-error aware) or reduced",
            ),
            param("heavy-weight", Kind::Int, Some("2"), "Reduced weight counted as heavy"),
            param(
                "min-survival",
                Kind::Real,
                Some("0.95"),
                "Survival every row must reach",
            ),
        ],
    },
];

pub fn command_spec(name: &str) -> Result<&'static CommandSpec> {
    COMMANDS
        .iter()
        .find(|c| c.name == name)
        .ok_or_else(|| ConfigError::UnknownCommand(name.to_string()))
}

/// A parsed config file: global keys, then one section per subcommand.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    pub global: BTreeMap<String, String>,
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    /// Parses `key = value` lines. `#` starts a comment line; `[name]` opens
    /// the section of a subcommand. Every key is checked against its schema.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = ConfigFile::default();
        let mut section: Option<&'static CommandSpec> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let spec = command_spec(name.trim()).map_err(|_| ConfigError::Syntax {
                    line: i + 1,
                    reason: format!("unknown section [{}]", name.trim()),
                })?;
                out.sections.entry(spec.name.to_string()).or_default();
                section = Some(spec);
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                reason: format!("expected key = value, got {line:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let (p, map, scope) = match section {
                Some(spec) => (
                    spec.param(key),
                    out.sections.get_mut(spec.name).unwrap(),
                    format!("[{}]", spec.name),
                ),
                None => (
                    GLOBAL_PARAMS.iter().find(|p| p.key == key),
                    &mut out.global,
                    "the global section".to_string(),
                ),
            };
            let p = p.ok_or_else(|| ConfigError::UnknownKey {
                key: key.to_string(),
                scope,
            })?;
            parse_value(key, p.kind, value)?;
            map.insert(key.to_string(), value.to_string());
        }
        Ok(out)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }
}

/// Validated configuration of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: &'static str,
    pub params: BTreeMap<&'static str, Value>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    /// Merges schema defaults, then file values, then flags. The seed comes
    /// from the flag, then the file, then `env_seed`, then 0.
    pub fn resolve(
        command: &str,
        file: Option<&ConfigFile>,
        flags: &[(String, String)],
        env_seed: Option<&str>,
    ) -> Result<Self> {
        let spec = command_spec(command)?;
        let empty = BTreeMap::new();
        let file_global = file.map_or(&empty, |f| &f.global);
        let file_section = file.and_then(|f| f.sections.get(spec.name)).unwrap_or(&empty);

        let mut raw: BTreeMap<&'static str, String> = BTreeMap::new();
        let mut global: BTreeMap<&'static str, String> = BTreeMap::new();
        for p in spec.params {
            if let Some(d) = p.default {
                raw.insert(p.key, d.to_string());
            }
            if let Some(v) = file_section.get(p.key) {
                raw.insert(p.key, v.clone());
            }
        }
        for p in GLOBAL_PARAMS {
            if let Some(v) = file_global.get(p.key) {
                global.insert(p.key, v.clone());
            }
        }
        for (k, v) in flags {
            if let Some(p) = spec.param(k) {
                raw.insert(p.key, v.clone());
            } else if let Some(p) = GLOBAL_PARAMS.iter().find(|p| p.key == k) {
                global.insert(p.key, v.clone());
            } else {
                return Err(ConfigError::UnknownKey {
                    key: k.clone(),
                    scope: spec.name.to_string(),
                });
            }
        }

        let mut params = BTreeMap::new();
        for p in spec.params {
            let v = raw
                .get(p.key)
                .ok_or_else(|| ConfigError::MissingKey(p.key.to_string()))?;
            params.insert(p.key, parse_value(p.key, p.kind, v)?);
        }
        let seed = match (global.get("seed"), env_seed) {
            (Some(s), _) => parse_int(s),
            (None, Some(e)) => Some(parse_int(e).ok_or_else(|| ConfigError::TypeMismatch {
                key: SEED_ENV.to_string(),
                expected: Kind::Int.describe(),
                value: e.to_string(),
            })?),
            (None, None) => Some(0),
        }
        .ok_or_else(|| ConfigError::TypeMismatch {
            key: "seed".into(),
            expected: Kind::Int.describe(),
            value: global["seed"].clone(),
        })?;
        let threads = match global.get("threads") {
            Some(t) => match parse_int(t) {
                Some(n) if n > 0 => Some(n as usize),
                _ => {
                    return Err(ConfigError::TypeMismatch {
                        key: "threads".into(),
                        expected: "a positive integer",
                        value: t.clone(),
                    })
                }
            },
            None => None,
        };
        Ok(Self {
            command: spec.name,
            params,
            seed,
            out: global.get("out").map(PathBuf::from),
            threads,
        })
    }

    fn get(&self, key: &str) -> &Value {
        self.params
            .get(key)
            .unwrap_or_else(|| panic!("{key:?} is not a {} key", self.command))
    }

    pub fn int(&self, key: &str) -> u64 {
        match self.get(key) {
            Value::Int(v) => *v,
            other => panic!("{key:?} holds {other:?}"),
        }
    }

    pub fn real(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Real(v) => *v,
            other => panic!("{key:?} holds {other:?}"),
        }
    }

    pub fn str(&self, key: &str) -> &str {
        match self.get(key) {
            Value::Str(v) => v,
            other => panic!("{key:?} holds {other:?}"),
        }
    }

    pub fn ints(&self, key: &str) -> &[u64] {
        match self.get(key) {
            Value::IntList(v) => v,
            other => panic!("{key:?} holds {other:?}"),
        }
    }

    pub fn reals(&self, key: &str) -> &[f64] {
        match self.get(key) {
            Value::RealList(v) => v,
            other => panic!("{key:?} holds {other:?}"),
        }
    }

    pub fn strs(&self, key: &str) -> &[String] {
        match self.get(key) {
            Value::StrList(v) => v,
            other => panic!("{key:?} holds {other:?}"),
        }
    }

    /// The resolved configuration embedded in every record. Output path and
    /// thread count are left out: neither changes the results.
    pub fn to_json(&self) -> Json {
        let mut params = Map::new();
        for (k, v) in &self.params {
            params.insert(k.to_string(), v.to_json());
        }
        json!({
            "command": self.command,
            "seed": self.seed,
            "params": params,
        })
    }
}
