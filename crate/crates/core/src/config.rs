//! Experiment configuration: flat `key=value` files, shipped presets and seed resolution.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::operators::{build_reflection, build_rotation, build_xxz, h2_hamiltonian, pauli_dense, s2_operator};
use crate::symmetry::{extract_sector, SymmetrySector, DEFAULT_SECTOR_TOL};
use crate::vqe::VqeConfig;

/// Largest chain the dense operators are built for.
pub const MAX_XXZ_QUBITS: usize = 8;

pub const SEED_ENV: &str = "SYMVQE_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum System {
    Xxz,
    H2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryKind {
    Reflection,
    Rotation,
    S2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Exact confinement unitary.
    Exact,
    /// Trained confinement circuit.
    Trained,
}

impl FromStr for System {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "xxz" => Ok(System::Xxz),
            "h2" => Ok(System::H2),
            _ => Err(format!("unknown system `{s}` (expected xxz or h2)")),
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            System::Xxz => "xxz",
            System::H2 => "h2",
        })
    }
}

impl FromStr for SymmetryKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "reflection" => Ok(SymmetryKind::Reflection),
            "rotation" => Ok(SymmetryKind::Rotation),
            "s2" => Ok(SymmetryKind::S2),
            _ => Err(format!("unknown symmetry `{s}` (expected reflection, rotation or s2)")),
        }
    }
}

impl fmt::Display for SymmetryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymmetryKind::Reflection => "reflection",
            SymmetryKind::Rotation => "rotation",
            SymmetryKind::S2 => "s2",
        })
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "1" => Ok(Method::Exact),
            "2" => Ok(Method::Trained),
            _ => Err(format!("unknown method `{s}` (expected 1 or 2)")),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "1",
            Method::Trained => "2",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub system: System,
    pub n_qubits: usize,
    pub j: f64,
    pub k: f64,
    pub symmetry: SymmetryKind,
    pub target_value: f64,
    pub method: Method,
    pub ansatz_depth: usize,
    pub utilde_depth: usize,
    pub train_samples: usize,
    pub train_tolerance: f64,
    pub train_max_iterations: usize,
    pub train_learning_rate: f64,
    pub max_iterations: usize,
    pub step_bound: f64,
    pub bound_decay: f64,
    pub learning_rate: f64,
    pub convergence_grad_norm: f64,
    /// `None` until set by a file, flag or the environment; resolves to 0.
    pub seed: Option<u64>,
    pub output_path: PathBuf,
    /// Where a trained `θ*` is written, method 2 only.
    pub theta_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let vqe = VqeConfig::default();
        Self {
            system: System::Xxz,
            n_qubits: 4,
            j: 1.0,
            k: 3.0,
            symmetry: SymmetryKind::Reflection,
            target_value: -1.0,
            method: Method::Exact,
            ansatz_depth: 2,
            utilde_depth: 5,
            train_samples: 100,
            train_tolerance: 1e-3,
            train_max_iterations: 20_000,
            train_learning_rate: 1.0,
            max_iterations: vqe.max_iterations,
            step_bound: vqe.step_bound,
            bound_decay: vqe.bound_decay,
            learning_rate: vqe.learning_rate,
            convergence_grad_norm: vqe.convergence_grad_norm,
            seed: None,
            output_path: PathBuf::from("trace.csv"),
            theta_path: None,
        }
    }
}

/// Keys a config file must set when it is not layered over a preset.
const REQUIRED_KEYS: [&str; 4] = ["system", "symmetry", "target_value", "method"];

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| Error::Parse {
        line,
        message: format!("`{key}`: {e}"),
    })
}

impl ExperimentConfig {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn vqe_config(&self) -> VqeConfig {
        VqeConfig {
            max_iterations: self.max_iterations,
            step_bound: self.step_bound,
            bound_decay: self.bound_decay,
            learning_rate: self.learning_rate,
            convergence_grad_norm: self.convergence_grad_norm,
            seed: self.seed(),
        }
    }

    /// Parse a config file. Without `base`, the keys in [`REQUIRED_KEYS`] must be present; with
    /// a base (a preset), the file only overrides what it mentions.
    pub fn parse(text: &str, base: Option<ExperimentConfig>) -> Result<Self> {
        let layered = base.is_some();
        let mut cfg = base.unwrap_or_default();
        let mut seen: Vec<String> = Vec::new();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected key=value, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|k| k == key) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            cfg.set(line, key, value)?;
            seen.push(key.to_string());
        }
        if !layered {
            if let Some(missing) = REQUIRED_KEYS.iter().find(|k| !seen.iter().any(|s| s == *k)) {
                return Err(Error::config(missing, "required key is missing"));
            }
        }
        Ok(cfg)
    }

    fn set(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        match key {
            "system" => self.system = parse_value(line, key, value)?,
            "n_qubits" => self.n_qubits = parse_value(line, key, value)?,
            "J" => self.j = parse_value(line, key, value)?,
            "K" => self.k = parse_value(line, key, value)?,
            "symmetry" => self.symmetry = parse_value(line, key, value)?,
            "target_value" => self.target_value = parse_value(line, key, value)?,
            "method" => self.method = parse_value(line, key, value)?,
            "ansatz_depth" => self.ansatz_depth = parse_value(line, key, value)?,
            "utilde_depth" => self.utilde_depth = parse_value(line, key, value)?,
            "train_samples" => self.train_samples = parse_value(line, key, value)?,
            "train_tolerance" => self.train_tolerance = parse_value(line, key, value)?,
            "train_max_iterations" => self.train_max_iterations = parse_value(line, key, value)?,
            "train_learning_rate" => self.train_learning_rate = parse_value(line, key, value)?,
            "max_iterations" => self.max_iterations = parse_value(line, key, value)?,
            "step_bound" => self.step_bound = parse_value(line, key, value)?,
            "bound_decay" => self.bound_decay = parse_value(line, key, value)?,
            "learning_rate" => self.learning_rate = parse_value(line, key, value)?,
            "convergence_grad_norm" => self.convergence_grad_norm = parse_value(line, key, value)?,
            "seed" => self.seed = Some(parse_value(line, key, value)?),
            "output_path" => self.output_path = PathBuf::from(value),
            "theta_path" => {
                self.theta_path = if value.is_empty() { None } else { Some(PathBuf::from(value)) }
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown key `{key}`"),
                })
            }
        }
        Ok(())
    }

    /// Fully resolved `key=value` lines in a fixed order; parses back to the same config.
    pub fn to_kv(&self) -> Vec<(&'static str, String)> {
        vec![
            ("system", self.system.to_string()),
            ("n_qubits", self.n_qubits.to_string()),
            ("J", self.j.to_string()),
            ("K", self.k.to_string()),
            ("symmetry", self.symmetry.to_string()),
            ("target_value", self.target_value.to_string()),
            ("method", self.method.to_string()),
            ("ansatz_depth", self.ansatz_depth.to_string()),
            ("utilde_depth", self.utilde_depth.to_string()),
            ("train_samples", self.train_samples.to_string()),
            ("train_tolerance", self.train_tolerance.to_string()),
            ("train_max_iterations", self.train_max_iterations.to_string()),
            ("train_learning_rate", self.train_learning_rate.to_string()),
            ("max_iterations", self.max_iterations.to_string()),
            ("step_bound", self.step_bound.to_string()),
            ("bound_decay", self.bound_decay.to_string()),
            ("learning_rate", self.learning_rate.to_string()),
            ("convergence_grad_norm", self.convergence_grad_norm.to_string()),
            ("seed", self.seed().to_string()),
            ("output_path", self.output_path.display().to_string()),
            (
                "theta_path",
                self.theta_path.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            ),
        ]
    }

    /// Field-level checks, including that `target_value` is an eigenvalue of the operator.
    pub fn validate(&self) -> Result<()> {
        match (self.system, self.symmetry) {
            (System::Xxz, SymmetryKind::Reflection | SymmetryKind::Rotation) | (System::H2, SymmetryKind::S2) => {}
            (system, symmetry) => {
                return Err(Error::config(
                    "symmetry",
                    format!("`{symmetry}` does not apply to system `{system}`"),
                ))
            }
        }
        match self.system {
            System::Xxz => {
                if !(2..=MAX_XXZ_QUBITS).contains(&self.n_qubits) {
                    return Err(Error::config("n_qubits", format!("must lie in 2..={MAX_XXZ_QUBITS}")));
                }
                if self.symmetry == SymmetryKind::Reflection && self.n_qubits % 2 == 1 {
                    return Err(Error::config("n_qubits", "the reflection operator needs an even chain"));
                }
                if !self.j.is_finite() || !self.k.is_finite() {
                    return Err(Error::config("J", "couplings must be finite"));
                }
            }
            System::H2 => {
                if self.n_qubits != 2 {
                    return Err(Error::config("n_qubits", "the H2 model has exactly 2 qubits"));
                }
            }
        }
        if self.ansatz_depth == 0 {
            return Err(Error::config("ansatz_depth", "must be at least 1"));
        }
        if self.method == Method::Trained {
            if self.train_samples == 0 {
                return Err(Error::config("train_samples", "must be at least 1"));
            }
            if !(self.train_tolerance > 0.0) {
                return Err(Error::config("train_tolerance", "must be positive"));
            }
            if !(self.train_learning_rate > 0.0) {
                return Err(Error::config("train_learning_rate", "must be positive"));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::config("max_iterations", "must be at least 1"));
        }
        self.vqe_config().validate()?;
        self.sector().map(|_| ())
    }

    pub fn hamiltonian(&self) -> Result<ComplexMatrix> {
        Ok(match self.system {
            System::Xxz => pauli_dense(&build_xxz(self.n_qubits, self.j, self.k)?),
            System::H2 => h2_hamiltonian(),
        })
    }

    pub fn symmetry_operator(&self) -> Result<ComplexMatrix> {
        match self.symmetry {
            SymmetryKind::Reflection => build_reflection(self.n_qubits),
            SymmetryKind::Rotation => build_rotation(self.n_qubits),
            SymmetryKind::S2 => Ok(s2_operator()),
        }
    }

    pub fn sector(&self) -> Result<SymmetrySector> {
        extract_sector(&self.symmetry_operator()?, self.target_value, DEFAULT_SECTOR_TOL).map_err(|e| match e {
            Error::EmptySector { target, .. } => Error::config(
                "target_value",
                format!("{target} is not an eigenvalue of the {} operator", self.symmetry),
            ),
            Error::SectorTooSmall { dim } => Error::config(
                "target_value",
                format!("sector has dimension {dim}; at least 2 is required"),
            ),
            other => other,
        })
    }
}

/// Shipped experiments: the four XXZ sectors under both methods and the H2 singlet sector.
pub const PRESET_NAMES: [&str; 10] = [
    "xxz-reflection-minus-m1",
    "xxz-reflection-plus-m1",
    "xxz-rotation-minus-m1",
    "xxz-rotation-plus-m1",
    "xxz-reflection-minus-m2",
    "xxz-reflection-plus-m2",
    "xxz-rotation-minus-m2",
    "xxz-rotation-plus-m2",
    "h2-s2-m1",
    "h2-s2-m2",
];

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig {
        output_path: PathBuf::from(format!("{name}.trace")),
        ..Default::default()
    };
    let parts: Vec<&str> = name.split('-').collect();
    match parts.as_slice() {
        ["xxz", symmetry, sign, method] => {
            cfg.symmetry = symmetry.parse().map_err(|_| unknown_preset(name))?;
            if cfg.symmetry == SymmetryKind::S2 {
                return Err(unknown_preset(name));
            }
            cfg.target_value = match *sign {
                "minus" => -1.0,
                "plus" => 1.0,
                _ => return Err(unknown_preset(name)),
            };
            cfg.method = parse_method_tag(method).ok_or_else(|| unknown_preset(name))?;
        }
        ["h2", "s2", method] => {
            cfg.system = System::H2;
            cfg.n_qubits = 2;
            cfg.symmetry = SymmetryKind::S2;
            cfg.target_value = 0.0;
            cfg.ansatz_depth = 1;
            cfg.utilde_depth = 4;
            cfg.method = parse_method_tag(method).ok_or_else(|| unknown_preset(name))?;
        }
        _ => return Err(unknown_preset(name)),
    }
    if cfg.method == Method::Trained {
        cfg.theta_path = Some(PathBuf::from(format!("{name}.theta")));
    }
    Ok(cfg)
}

fn parse_method_tag(tag: &str) -> Option<Method> {
    match tag {
        "m1" => Some(Method::Exact),
        "m2" => Some(Method::Trained),
        _ => None,
    }
}

fn unknown_preset(name: &str) -> Error {
    Error::config("preset", format!("unknown preset `{name}`; known: {}", PRESET_NAMES.join(", ")))
}

/// Seed precedence: command-line flag, then the config, then `SYMVQE_SEED`, then 0.
pub fn resolve_seed(cfg: &mut ExperimentConfig, flag: Option<u64>, env: Option<&str>) -> Result<()> {
    if let Some(seed) = flag {
        cfg.seed = Some(seed);
    } else if cfg.seed.is_none() {
        if let Some(raw) = env {
            let seed = raw
                .trim()
                .parse()
                .map_err(|_| Error::config(SEED_ENV, format!("`{raw}` is not an unsigned integer")))?;
            cfg.seed = Some(seed);
        }
    }
    Ok(())
}
