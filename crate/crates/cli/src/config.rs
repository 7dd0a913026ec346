use std::fs;
use std::path::{Path, PathBuf};

use duality_core::product_formulas::DEFAULT_GAMMA;
use duality_core::HamiltonianSpec;
use toml::{Table, Value};

use crate::error::{CliError, Result};

pub const METHODS: [&str; 4] = ["suzuki", "multiproduct", "taylor", "lcu-random"];

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Suzuki { chi: Vec<u32>, r: usize },
    Multiproduct { k: Vec<u32>, gamma: f64, r: usize },
    Taylor { epsilon: Vec<f64> },
    LcuRandom { terms: usize, trials: usize },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Suzuki { .. } => "suzuki",
            Method::Multiproduct { .. } => "multiproduct",
            Method::Taylor { .. } => "taylor",
            Method::LcuRandom { .. } => "lcu-random",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub method: Method,
    pub hamiltonian_path: PathBuf,
    pub hamiltonian: HamiltonianSpec,
    pub t_values: Vec<f64>,
    pub seed: u64,
    pub output: PathBuf,
}

impl ExperimentConfig {
    /// Reads a config file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::config("config", e.message().to_string()))?;

        let method_keys: Vec<&str> = METHODS
            .iter()
            .copied()
            .filter(|m| table.contains_key(*m))
            .collect();
        for key in table.keys() {
            if !METHODS.contains(&key.as_str())
                && !["hamiltonian", "t_values", "seed", "output"].contains(&key.as_str())
            {
                return Err(CliError::config(key.clone(), "unknown key"));
            }
        }
        let method_key = match method_keys.as_slice() {
            [one] => *one,
            [] => {
                return Err(CliError::config(
                    "method",
                    format!("expected one section of {}", METHODS.join(", ")),
                ))
            }
            many => {
                return Err(CliError::config(
                    "method",
                    format!("more than one method section: {}", many.join(", ")),
                ))
            }
        };
        let section = match &table[method_key] {
            Value::Table(t) => t,
            _ => return Err(CliError::config(method_key, "must be a section")),
        };
        let method = parse_method(method_key, section)?;

        let hamiltonian_path = base.join(string(&table, "hamiltonian", "hamiltonian")?);
        let ham_text = fs::read_to_string(&hamiltonian_path).map_err(|e| {
            CliError::config(
                "hamiltonian",
                format!("{}: {e}", hamiltonian_path.display()),
            )
        })?;
        let hamiltonian = HamiltonianSpec::parse(&ham_text).map_err(|e| {
            CliError::config(
                "hamiltonian",
                format!("{}: {e}", hamiltonian_path.display()),
            )
        })?;

        let t_values = float_list(&table, "t_values", "t_values")?;
        if t_values.is_empty() {
            return Err(CliError::config("t_values", "must not be empty"));
        }
        if let Some(bad) = t_values.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(CliError::config(
                "t_values",
                format!("times must be finite and non-negative, got {bad}"),
            ));
        }
        let seed = match table.get("seed") {
            None => 0,
            Some(Value::Integer(s)) if *s >= 0 => *s as u64,
            Some(_) => return Err(CliError::config("seed", "must be a non-negative integer")),
        };
        let output = base.join(string(&table, "output", "output")?);
        Ok(Self {
            method,
            hamiltonian_path,
            hamiltonian,
            t_values,
            seed,
            output,
        })
    }
}

fn parse_method(name: &str, section: &Table) -> Result<Method> {
    let allowed: &[&str] = match name {
        "suzuki" => &["chi", "r"],
        "multiproduct" => &["k", "gamma", "r"],
        "taylor" => &["epsilon"],
        _ => &["terms", "trials"],
    };
    if let Some(key) = section.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(CliError::config(format!("{name}.{key}"), "unknown key"));
    }
    let field = |key: &str| format!("{name}.{key}");
    let method = match name {
        "suzuki" => Method::Suzuki {
            chi: positive_list(section, "chi", &field("chi"))?,
            r: optional_positive(section, "r", &field("r"))?.unwrap_or(1),
        },
        "multiproduct" => {
            let gamma = match section.get("gamma") {
                None => DEFAULT_GAMMA,
                Some(v) => number(v)
                    .filter(|g| g.is_finite() && *g > 0.0)
                    .ok_or_else(|| CliError::config(field("gamma"), "must be a positive number"))?,
            };
            Method::Multiproduct {
                k: positive_list(section, "k", &field("k"))?,
                gamma,
                r: optional_positive(section, "r", &field("r"))?.unwrap_or(1),
            }
        }
        "taylor" => {
            let epsilon = float_list(section, "epsilon", &field("epsilon"))?;
            if epsilon.is_empty()
                || epsilon
                    .iter()
                    .any(|e| !(e.is_finite() && *e > 0.0 && *e < 1.0))
            {
                return Err(CliError::config(
                    field("epsilon"),
                    "must be a nonempty list of values in (0, 1)",
                ));
            }
            Method::Taylor { epsilon }
        }
        _ => Method::LcuRandom {
            terms: optional_positive(section, "terms", &field("terms"))?
                .ok_or_else(|| CliError::config(field("terms"), "missing"))?,
            trials: optional_positive(section, "trials", &field("trials"))?.unwrap_or(1),
        },
    };
    Ok(method)
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn string(table: &Table, key: &str, field: &str) -> Result<String> {
    match table.get(key) {
        Some(Value::String(s)) if !s.is_empty() => Ok(s.clone()),
        Some(_) => Err(CliError::config(field, "must be a nonempty string")),
        None => Err(CliError::config(field, "missing")),
    }
}

fn float_list(table: &Table, key: &str, field: &str) -> Result<Vec<f64>> {
    let items = match table.get(key) {
        Some(Value::Array(items)) => items,
        Some(v) => {
            return number(v)
                .map(|x| vec![x])
                .ok_or_else(|| CliError::config(field, "must be a list of numbers"))
        }
        None => return Err(CliError::config(field, "missing")),
    };
    items
        .iter()
        .map(|v| number(v).ok_or_else(|| CliError::config(field, "must be a list of numbers")))
        .collect()
}

fn positive_list(table: &Table, key: &str, field: &str) -> Result<Vec<u32>> {
    let values = match table.get(key) {
        Some(Value::Array(items)) => items.clone(),
        Some(v) => vec![v.clone()],
        None => return Err(CliError::config(field, "missing")),
    };
    if values.is_empty() {
        return Err(CliError::config(field, "must not be empty"));
    }
    values
        .iter()
        .map(|v| match v {
            Value::Integer(i) if *i >= 1 && *i <= u32::MAX as i64 => Ok(*i as u32),
            _ => Err(CliError::config(field, "must be positive integers")),
        })
        .collect()
}

fn optional_positive(table: &Table, key: &str, field: &str) -> Result<Option<usize>> {
    match table.get(key) {
        None => Ok(None),
        Some(Value::Integer(i)) if *i >= 1 => Ok(Some(*i as usize)),
        Some(_) => Err(CliError::config(field, "must be a positive integer")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("h.txt"), "1.0 ZZ\n0.5 XI\n0.5 IX\n").unwrap();
        dir
    }

    #[test]
    fn parses_suzuki() {
        let dir = base();
        let cfg = ExperimentConfig::parse(
            "hamiltonian = \"h.txt\"\nt_values = [0.1, 0.2]\nseed = 4\noutput = \"o.csv\"\n[suzuki]\nchi = [1, 2]\n",
            dir.path(),
        )
        .unwrap();
        assert_eq!(
            cfg.method,
            Method::Suzuki {
                chi: vec![1, 2],
                r: 1
            }
        );
        assert_eq!(cfg.hamiltonian.len(), 3);
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.output, dir.path().join("o.csv"));
    }

    #[test]
    fn field_names_in_errors() {
        let dir = base();
        let cases = [
            ("hamiltonian = \"h.txt\"\nt_values = []\noutput = \"o\"\n[taylor]\nepsilon = [1e-4]\n", "t_values"),
            ("hamiltonian = \"h.txt\"\nt_values = [1]\noutput = \"o\"\n", "method"),
            ("hamiltonian = \"h.txt\"\nt_values = [1]\noutput = \"o\"\n[suzuki]\nchi=[1]\n[taylor]\nepsilon=[0.1]\n", "method"),
            ("hamiltonian = \"missing.txt\"\nt_values = [1]\noutput = \"o\"\n[taylor]\nepsilon = [1e-4]\n", "hamiltonian"),
            ("hamiltonian = \"h.txt\"\nt_values = [1]\noutput = \"o\"\n[suzuki]\nr = 2\n", "suzuki.chi"),
            ("hamiltonian = \"h.txt\"\nt_values = [1]\noutput = \"o\"\n[multiproduct]\nk = [1]\ngamma = -1\n", "multiproduct.gamma"),
            ("hamiltonian = \"h.txt\"\nt_values = [-1]\noutput = \"o\"\n[taylor]\nepsilon = [1e-4]\n", "t_values"),
            ("hamiltonian = \"h.txt\"\nt_values = [1]\n[taylor]\nepsilon = [1e-4]\n", "output"),
            ("hamiltonian = \"h.txt\"\nt_values = [1]\noutput = \"o\"\n[taylor]\neps = [1e-4]\n", "taylor.eps"),
            ("hamiltonian = \"h.txt\"\nt_values = [1]\noutput = \"o\"\nmethod = \"x\"\n[taylor]\nepsilon = [1e-4]\n", "method"),
        ];
        for (text, field) in cases {
            let err = ExperimentConfig::parse(text, dir.path()).unwrap_err();
            assert_eq!(err.field(), Some(field), "{text}");
        }
    }

    #[test]
    fn zero_time_allowed() {
        let dir = base();
        let cfg = ExperimentConfig::parse(
            "hamiltonian = \"h.txt\"\nt_values = [0.0]\noutput = \"o\"\n[lcu-random]\nterms = 3\n",
            dir.path(),
        )
        .unwrap();
        assert_eq!(
            cfg.method,
            Method::LcuRandom {
                terms: 3,
                trials: 1
            }
        );
    }
}
