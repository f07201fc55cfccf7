//! Plain `key=value` configuration files validated against per-command schemas.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kind {
    /// Real number in `[lo, hi]`, or `(lo, hi]` when `open_lo`.
    Real { lo: f64, hi: f64, open_lo: bool },
    /// Integer at least `min`.
    Count { min: usize },
    Choice(&'static [&'static str]),
    Path,
}

impl Kind {
    fn describe(&self) -> String {
        match *self {
            Kind::Real { lo, hi, open_lo } => {
                let left = if open_lo || lo.is_infinite() { "(" } else { "[" };
                let right = if hi.is_infinite() { ")" } else { "]" };
                format!("real in {left}{}, {}{right}", fmt_bound(lo), fmt_bound(hi))
            }
            Kind::Count { min } => format!("integer >= {min}"),
            Kind::Choice(opts) => format!("one of {}", opts.join("|")),
            Kind::Path => "path".to_string(),
        }
    }
}

fn fmt_bound(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    pub required: bool,
    /// Applied when the key is absent; optional keys without one stay unset.
    pub default: Option<&'static str>,
    pub help: &'static str,
}

#[derive(Clone, Copy, Debug)]
pub struct Schema {
    pub command: &'static str,
    pub keys: &'static [KeySpec],
}

impl Schema {
    pub fn key(&self, name: &str) -> Option<&KeySpec> {
        self.keys.iter().find(|k| k.name == name)
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "schema for `{}` (one key=value per line, '#' starts a comment):", self.command)?;
        for k in self.keys {
            let status = if k.required {
                "required".to_string()
            } else if let Some(d) = k.default {
                format!("default {d}")
            } else {
                "optional".to_string()
            };
            writeln!(f, "  {:<14} {:<34} {:<14} {}", k.name, k.kind.describe(), status, k.help)?;
        }
        Ok(())
    }
}

const POSITIVE: Kind = Kind::Real {
    lo: 0.0,
    hi: f64::INFINITY,
    open_lo: true,
};

const COMMON_KEYS: [KeySpec; 2] = [
    KeySpec {
        name: "seed",
        kind: Kind::Count { min: 0 },
        required: false,
        default: Some("0"),
        help: "seed for randomized sweeps",
    },
    KeySpec {
        name: "out",
        kind: Kind::Path,
        required: false,
        default: None,
        help: "output directory",
    },
];

pub const EVOLVE_SCHEMA: Schema = Schema {
    command: "evolve",
    keys: &[
        KeySpec {
            name: "gamma",
            kind: Kind::Real { lo: 0.0, hi: 1.0, open_lo: false },
            required: true,
            default: None,
            help: "reaction exponent",
        },
        KeySpec {
            name: "eps",
            kind: POSITIVE,
            required: true,
            default: None,
            help: "regularization scale",
        },
        KeySpec {
            name: "t_end",
            kind: POSITIVE,
            required: false,
            default: Some("1"),
            help: "final time",
        },
        KeySpec {
            name: "geometry",
            kind: Kind::Choice(&["line", "radial"]),
            required: false,
            default: Some("line"),
            help: "symmetric line or radial reduction",
        },
        KeySpec {
            name: "dim",
            kind: Kind::Count { min: 1 },
            required: false,
            default: Some("1"),
            help: "space dimension of the radial reduction",
        },
        KeySpec {
            name: "x_max",
            kind: POSITIVE,
            required: false,
            default: None,
            help: "domain half-width; chosen by the truncation rule when unset",
        },
        KeySpec {
            name: "dx",
            kind: POSITIVE,
            required: false,
            default: Some("0.02"),
            help: "cell width",
        },
        KeySpec {
            name: "reaction",
            kind: Kind::Choice(&["feps", "phillips"]),
            required: false,
            default: Some("feps"),
            help: "regularized reaction",
        },
        KeySpec {
            name: "dt",
            kind: POSITIVE,
            required: false,
            default: None,
            help: "time step; stability limit when unset",
        },
        KeySpec {
            name: "stride",
            kind: Kind::Count { min: 1 },
            required: false,
            default: None,
            help: "steps between snapshots; spacing min(1e-3, eps^2) when unset",
        },
        KeySpec {
            name: "bump_center",
            kind: Kind::Real {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
                open_lo: false,
            },
            required: false,
            default: Some("0"),
            help: "centre of the cubic bump",
        },
        KeySpec {
            name: "bump_radius",
            kind: POSITIVE,
            required: false,
            default: Some("1.5"),
            help: "radius of the cubic bump",
        },
        KeySpec {
            name: "bump_height",
            kind: POSITIVE,
            required: false,
            default: Some("3"),
            help: "height of the cubic bump",
        },
        COMMON_KEYS[0],
        COMMON_KEYS[1],
    ],
};

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Real(f64),
    Count(usize),
    Choice(String),
    Path(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConfigError {
    Syntax { line: usize, text: String },
    UnknownKey { line: usize, key: String },
    Duplicate { line: usize, key: String },
    Type { line: usize, key: String, expected: String, got: String },
    Range { line: usize, key: String, value: String, expected: String },
    Missing { key: String, expected: String },
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax { line, text } => write!(f, "line {line}: expected key=value, got `{text}`"),
            ConfigError::UnknownKey { line, key } => write!(f, "line {line}: unknown key `{key}`"),
            ConfigError::Duplicate { line, key } => write!(f, "line {line}: key `{key}` given twice"),
            ConfigError::Type { line, key, expected, got } => write!(f, "line {line}: `{key}` expects {expected}, got `{got}`"),
            ConfigError::Range { line, key, value, expected } => write!(f, "line {line}: `{key}` = {value} is outside the allowed range, expected {expected}"),
            ConfigError::Missing { key, expected } => write!(f, "missing required key `{key}` ({expected})"),
            ConfigError::Invalid(msg) => write!(f, "{msg}"),
        }
    }
}

/// Validated configuration; every schema key with a default is present.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: &'static str,
    pub values: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn real(&self, key: &str) -> Option<f64> {
        match self.values.get(key) {
            Some(Value::Real(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn count(&self, key: &str) -> Option<usize> {
        match self.values.get(key) {
            Some(Value::Count(n)) => Some(*n),
            _ => None,
        }
    }

    pub fn choice(&self, key: &str) -> Option<&str> {
        match self.values.get(key) {
            Some(Value::Choice(s)) => Some(s),
            _ => None,
        }
    }

    pub fn out(&self) -> Option<&PathBuf> {
        match self.values.get("out") {
            Some(Value::Path(p)) => Some(p),
            _ => None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.count("seed").unwrap_or(0) as u64
    }

    /// Canonical `key=value` text, sorted by key; parses back to the same config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.values {
            let v = match v {
                Value::Real(x) => format!("{x:?}"),
                Value::Count(n) => n.to_string(),
                Value::Choice(c) => c.clone(),
                Value::Path(p) => p.display().to_string(),
            };
            s.push_str(&format!("{k}={v}\n"));
        }
        s
    }
}

fn parse_value(spec: &KeySpec, raw: &str, line: usize) -> Result<Value, ConfigError> {
    let type_err = |expected: String| ConfigError::Type {
        line,
        key: spec.name.to_string(),
        expected,
        got: raw.to_string(),
    };
    let range_err = || ConfigError::Range {
        line,
        key: spec.name.to_string(),
        value: raw.to_string(),
        expected: spec.kind.describe(),
    };
    match spec.kind {
        Kind::Real { lo, hi, open_lo } => {
            let x: f64 = raw.parse().map_err(|_| type_err("a real number".into()))?;
            if !x.is_finite() {
                return Err(type_err("a finite real number".into()));
            }
            let above = if open_lo { x > lo } else { x >= lo };
            if !(above && x <= hi) {
                return Err(range_err());
            }
            Ok(Value::Real(x))
        }
        Kind::Count { min } => {
            let n: usize = raw.parse().map_err(|_| type_err("a nonnegative integer".into()))?;
            if n < min {
                return Err(range_err());
            }
            Ok(Value::Count(n))
        }
        Kind::Choice(opts) => {
            if opts.contains(&raw) {
                Ok(Value::Choice(raw.to_string()))
            } else {
                Err(type_err(spec.kind.describe()))
            }
        }
        Kind::Path => {
            if raw.is_empty() {
                Err(type_err("a nonempty path".into()))
            } else {
                Ok(Value::Path(PathBuf::from(raw)))
            }
        }
    }
}

/// Parses `text` against `schema`, returning every error found.
pub fn parse_config(text: &str, schema: &Schema) -> Result<RunConfig, Vec<ConfigError>> {
    let mut errors = Vec::new();
    let mut values = BTreeMap::new();
    let mut seen_at: BTreeMap<&str, usize> = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(ConfigError::Syntax { line, text: content.to_string() });
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(spec) = schema.key(key) else {
            errors.push(ConfigError::UnknownKey { line, key: key.to_string() });
            continue;
        };
        if seen_at.insert(spec.name, line).is_some() {
            errors.push(ConfigError::Duplicate { line, key: key.to_string() });
            continue;
        }
        match parse_value(spec, value, line) {
            Ok(v) => {
                values.insert(spec.name.to_string(), v);
            }
            Err(e) => errors.push(e),
        }
    }
    for spec in schema.keys {
        if seen_at.contains_key(spec.name) {
            continue;
        }
        if spec.required {
            errors.push(ConfigError::Missing {
                key: spec.name.to_string(),
                expected: spec.kind.describe(),
            });
        } else if let Some(d) = spec.default {
            let v = parse_value(spec, d, 0).expect("schema defaults are valid");
            values.insert(spec.name.to_string(), v);
        }
    }
    if errors.is_empty() {
        Ok(RunConfig { command: schema.command, values })
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_evolve_fragment_is_valid() {
        let cfg = parse_config("gamma=0.5\neps=0.1", &EVOLVE_SCHEMA).unwrap();
        assert_eq!(cfg.real("gamma"), Some(0.5));
        assert_eq!(cfg.real("eps"), Some(0.1));
        assert_eq!(cfg.real("t_end"), Some(1.0));
        assert_eq!(cfg.choice("reaction"), Some("feps"));
        assert_eq!(cfg.real("x_max"), None);
    }

    #[test]
    fn gamma_out_of_range_is_a_range_error() {
        let errs = parse_config("gamma=1.5\neps=0.1", &EVOLVE_SCHEMA).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(matches!(&errs[0], ConfigError::Range { key, .. } if key == "gamma"));
    }

    #[test]
    fn empty_file_lists_every_required_key() {
        let errs = parse_config("", &EVOLVE_SCHEMA).unwrap_err();
        let missing: Vec<_> = errs
            .iter()
            .map(|e| match e {
                ConfigError::Missing { key, .. } => key.as_str(),
                other => panic!("unexpected {other}"),
            })
            .collect();
        assert_eq!(missing, ["gamma", "eps"]);
    }

    #[test]
    fn all_errors_are_collected() {
        let text = "gamma=abc\nbogus=1\neps=-1\nstride=0\nreaction=explicit\nno equals sign\neps=0.1";
        let errs = parse_config(text, &EVOLVE_SCHEMA).unwrap_err();
        assert!(matches!(errs[0], ConfigError::Type { line: 1, .. }));
        assert!(matches!(errs[1], ConfigError::UnknownKey { line: 2, .. }));
        assert!(matches!(errs[2], ConfigError::Range { line: 3, .. }));
        assert!(matches!(errs[3], ConfigError::Range { line: 4, .. }));
        assert!(matches!(errs[4], ConfigError::Type { line: 5, .. }));
        assert!(matches!(errs[5], ConfigError::Syntax { line: 6, .. }));
        assert!(matches!(errs[6], ConfigError::Duplicate { line: 7, .. }));
        assert_eq!(errs.len(), 7);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = parse_config("# reference\n\ngamma = 0.25  # exponent\neps=0.05\n", &EVOLVE_SCHEMA).unwrap();
        assert_eq!(cfg.real("gamma"), Some(0.25));
    }

    #[test]
    fn canonical_text_round_trips() {
        let cfg = parse_config("gamma=0.5\neps=0.1\nx_max=7.5\nstride=3\nout=runs/a", &EVOLVE_SCHEMA).unwrap();
        let again = parse_config(&cfg.to_text(), &EVOLVE_SCHEMA).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn schema_listing_names_every_key() {
        let listing = EVOLVE_SCHEMA.to_string();
        for k in EVOLVE_SCHEMA.keys {
            assert!(listing.contains(k.name));
        }
    }
}
