//! Training the layered circuit `Ũ(θ)` so that it maps every ansatz output into the symmetry
//! sector.
//!
//! The cost is the sample mean of `⟨ψ|(O − S)²|ψ⟩` over `ψ = Ũ(θ) A(α)|0⟩`. It is linear in the
//! input density matrix, so a batch of ansatz states is first folded into `ρ = mean |ψ⟩⟨ψ|` and
//! replaced by its (at most `k`) weighted eigenvectors. The cost and its shift-rule gradient are
//! then evaluated on those few vectors.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ansatz::{build_layered_circuit, random_params};
use crate::error::{Error, Result};
use crate::linalg::{eigh, ComplexMatrix, ComplexVector};
use crate::simulator::{apply_circuit, apply_gate, basis_state, expectation, ParamCircuit};
use crate::symmetry::SymmetrySector;
use crate::vqe::check_shift_rule;

/// Density-matrix eigenvalues below this are rounding noise outside the ansatz support.
const WEIGHT_FLOOR: f64 = 1e-14;

// Independent random streams drawn from one seed.
const STREAM_TRAIN: u64 = 0;
const STREAM_VALIDATION: u64 = 1;
const STREAM_HOLDOUT: u64 = 2;
const STREAM_INIT: u64 = 3;

#[derive(Clone, Debug)]
pub struct TrainingConfig {
    /// Entangling layers in `Ũ`.
    pub depth: usize,
    /// α draws per cost evaluation.
    pub n_samples: usize,
    pub target_mean_error: f64,
    /// Total iteration budget over all restarts.
    pub max_iterations: usize,
    pub step_bound: f64,
    pub bound_decay: f64,
    pub learning_rate: f64,
    /// Restart from a fresh θ once the validation cost has improved by less than
    /// `stall_ratio` over the last `stall_window` iterations.
    pub stall_window: usize,
    pub stall_ratio: f64,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            depth: 5,
            n_samples: 100,
            target_mean_error: 1e-3,
            max_iterations: 20_000,
            step_bound: 0.5,
            bound_decay: 0.9,
            learning_rate: 1.0,
            stall_window: 300,
            stall_ratio: 0.02,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_mean_error > 0.0) {
            return Err(Error::config("target_mean_error", "must be positive"));
        }
        if self.n_samples == 0 {
            return Err(Error::config("n_samples", "must be at least 1"));
        }
        if !(self.step_bound > 0.0) {
            return Err(Error::config("step_bound", "must be positive"));
        }
        if !(self.bound_decay > 0.0 && self.bound_decay <= 1.0) {
            return Err(Error::config("bound_decay", "must lie in (0, 1]"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::config("learning_rate", "must be positive"));
        }
        if self.stall_window == 0 {
            return Err(Error::config("stall_window", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.stall_ratio) {
            return Err(Error::config("stall_ratio", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TrainedUnitary {
    pub circuit: ParamCircuit,
    pub depth: usize,
    pub theta_star: Vec<f64>,
    /// Mean squared symmetry deviation on held-out α draws.
    pub achieved_mean_error: f64,
    /// Final cost on the fixed validation set.
    pub validation_error: f64,
    pub iterations_used: usize,
    pub restarts_used: usize,
}

/// Weighted pure states standing in for a mixed input `ρ = Σ w |v⟩⟨v|`.
#[derive(Clone, Debug)]
pub struct WeightedStates(Vec<(f64, ComplexVector)>);

impl WeightedStates {
    /// Fold the ansatz outputs for `alphas` into the eigen-decomposition of their mean projector.
    pub fn from_ansatz(ansatz: &ParamCircuit, alphas: &[Vec<f64>]) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::InvalidArgument("at least one α sample is required".into()));
        }
        let dim = ansatz.dim();
        let zero = basis_state(ansatz.n_qubits(), 0)?;
        let states: Vec<ComplexVector> = alphas
            .iter()
            .map(|a| apply_circuit(ansatz, a, &zero))
            .collect::<Result<_>>()?;
        let scale = 1.0 / states.len() as f64;
        let mut rho = ComplexMatrix::zeros(dim, dim);
        for psi in &states {
            for i in 0..dim {
                for j in 0..dim {
                    rho[(i, j)] += psi[i] * psi[j].conj() * scale;
                }
            }
        }
        let rho = rho.add(&rho.adjoint())?.scale(0.5.into());
        let eig = eigh(&rho)?;
        Ok(Self(
            (0..dim)
                .filter(|&j| eig.eigenvalues[j] > WEIGHT_FLOOR)
                .map(|j| (eig.eigenvalues[j], eig.vector(j)))
                .collect(),
        ))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.0.iter().map(|(w, _)| w).sum()
    }
}

/// `Σ w ⟨v|Ũ(θ)† M Ũ(θ)|v⟩`.
pub fn weighted_cost(
    utilde: &ParamCircuit,
    theta: &[f64],
    inputs: &WeightedStates,
    m: &ComplexMatrix,
) -> Result<f64> {
    let mut total = 0.0;
    for (w, v) in &inputs.0 {
        total += w * expectation(&apply_circuit(utilde, theta, v)?, m)?;
    }
    Ok(total)
}

/// Shift-rule gradient of [`weighted_cost`].
///
/// States just before each parameterized gate are cached from one forward pass, so a shifted
/// evaluation only replays the suffix of the circuit.
pub fn weighted_gradient(
    utilde: &ParamCircuit,
    theta: &[f64],
    inputs: &WeightedStates,
    m: &ComplexMatrix,
) -> Result<Vec<f64>> {
    check_shift_rule(utilde)?;
    if theta.len() != utilde.num_params() {
        return Err(Error::ParamCount {
            expected: utilde.num_params(),
            got: theta.len(),
        });
    }
    let gates = utilde.gates();
    let mut gate_of = vec![0usize; theta.len()];
    for (g, gate) in gates.iter().enumerate() {
        if let Some(p) = gate.param() {
            gate_of[p] = g;
        }
    }
    // prefix[i][g]: input i just before gate g, stored only at parameterized gates.
    let prefix: Vec<HashMap<usize, Vec<_>>> = inputs
        .0
        .iter()
        .map(|(_, v)| {
            let mut amps = v.as_slice().to_vec();
            let mut saved = HashMap::new();
            for (g, gate) in gates.iter().enumerate() {
                if gate.param().is_some() {
                    saved.insert(g, amps.clone());
                }
                apply_gate(&mut amps, gate, theta);
            }
            saved
        })
        .collect();

    (0..theta.len())
        .into_par_iter()
        .map(|j| {
            let g = gate_of[j];
            let mut shifted = theta.to_vec();
            let mut eval = |delta: f64| -> Result<f64> {
                shifted[j] = theta[j] + delta;
                let mut total = 0.0;
                for ((w, _), saved) in inputs.0.iter().zip(&prefix) {
                    let mut amps = saved[&g].clone();
                    for gate in &gates[g..] {
                        apply_gate(&mut amps, gate, &shifted);
                    }
                    total += w * expectation(&ComplexVector::new(amps), m)?;
                }
                Ok(total)
            };
            let plus = eval(FRAC_PI_2)?;
            let minus = eval(-FRAC_PI_2)?;
            Ok((plus - minus) / 2.0)
        })
        .collect()
}

/// Mean of `⟨ψ|(O − S)²|ψ⟩` over `ψ = Ũ(θ) A(α)|0…0⟩`, one simulation per sample.
pub fn symmetry_cost(
    theta: &[f64],
    sector: &SymmetrySector,
    alphas: &[Vec<f64>],
    ansatz: &ParamCircuit,
    utilde: &ParamCircuit,
) -> Result<f64> {
    if alphas.is_empty() {
        return Err(Error::InvalidArgument("at least one α sample is required".into()));
    }
    if ansatz.n_qubits() != utilde.n_qubits() || ansatz.dim() != sector.dim() {
        return Err(Error::Dimension("ansatz, trained circuit and sector disagree on the register".into()));
    }
    let m = sector.deviation_sq();
    let zero = basis_state(ansatz.n_qubits(), 0)?;
    let values: Vec<f64> = alphas
        .par_iter()
        .map(|a| {
            let psi = apply_circuit(utilde, theta, &apply_circuit(ansatz, a, &zero)?)?;
            expectation(&psi, &m)
        })
        .collect::<Result<_>>()?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn draw_alphas(rng: &mut ChaCha8Rng, count: usize, n_params: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| random_params(n_params, rng)).collect()
}

/// Train `Ũ(θ)` by clipped gradient descent with restarts.
///
/// Each iteration draws fresh α samples for the gradient, takes `θ − clip(η·g, ±bound)` and
/// keeps it only if the cost on a fixed validation set drops; otherwise the bound shrinks by
/// `bound_decay`. A stalled attempt is abandoned for a fresh random θ. Once the validation cost
/// meets the target, a held-out set of fresh samples decides success; a held-out miss tightens
/// the internal validation target and training continues.
pub fn train_unitary(
    sector: &SymmetrySector,
    cfg: &TrainingConfig,
    ansatz: &ParamCircuit,
) -> Result<TrainedUnitary> {
    cfg.validate()?;
    if ansatz.dim() != sector.dim() {
        return Err(Error::Dimension(format!(
            "{}-dimensional ansatz for a {}-dimensional sector operator",
            ansatz.dim(),
            sector.dim()
        )));
    }
    let utilde = build_layered_circuit(ansatz.n_qubits(), cfg.depth)?;
    let m = sector.deviation_sq();
    let n_alpha = ansatz.num_params();

    let mut train_rng = stream(cfg.seed, STREAM_TRAIN);
    let mut holdout_rng = stream(cfg.seed, STREAM_HOLDOUT);
    let mut init_rng = stream(cfg.seed, STREAM_INIT);
    let validation = WeightedStates::from_ansatz(
        ansatz,
        &draw_alphas(&mut stream(cfg.seed, STREAM_VALIDATION), cfg.n_samples, n_alpha),
    )?;

    // Aim below the target so a fresh held-out draw clears it with margin.
    let mut internal_target = cfg.target_mean_error * 0.5;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut restarts = 0usize;
    let mut theta = random_params(utilde.num_params(), &mut init_rng);
    let mut current = weighted_cost(&utilde, &theta, &validation, &m)?;
    let mut bound = cfg.step_bound;
    let mut history = vec![current];

    for iteration in 0..cfg.max_iterations {
        if best.as_ref().map_or(true, |(b, _)| current < *b) {
            best = Some((current, theta.clone()));
        }
        if current <= internal_target {
            let held_out = symmetry_cost(
                &theta,
                sector,
                &draw_alphas(&mut holdout_rng, cfg.n_samples, n_alpha),
                ansatz,
                &utilde,
            )?;
            if held_out <= cfg.target_mean_error {
                return Ok(TrainedUnitary {
                    circuit: utilde,
                    depth: cfg.depth,
                    theta_star: theta,
                    achieved_mean_error: held_out,
                    validation_error: current,
                    iterations_used: iteration,
                    restarts_used: restarts,
                });
            }
            internal_target = current / 2.0;
        }

        let window = history.len().saturating_sub(cfg.stall_window + 1);
        if history.len() > cfg.stall_window && current > history[window] * (1.0 - cfg.stall_ratio) {
            restarts += 1;
            theta = random_params(utilde.num_params(), &mut init_rng);
            current = weighted_cost(&utilde, &theta, &validation, &m)?;
            bound = cfg.step_bound;
            history = vec![current];
            continue;
        }

        let batch = WeightedStates::from_ansatz(ansatz, &draw_alphas(&mut train_rng, cfg.n_samples, n_alpha))?;
        let grad = weighted_gradient(&utilde, &theta, &batch, &m)?;
        let trial: Vec<f64> = theta
            .iter()
            .zip(&grad)
            .map(|(t, g)| t - (cfg.learning_rate * g).clamp(-bound, bound))
            .collect();
        let trial_cost = weighted_cost(&utilde, &trial, &validation, &m)?;
        if trial_cost < current {
            theta = trial;
            current = trial_cost;
        } else {
            bound *= cfg.bound_decay;
        }
        history.push(current);
    }
    let best_error = best.map_or(current, |(b, _)| b.min(current));
    Err(Error::TrainingFailed {
        iterations: cfg.max_iterations,
        best_error,
        target: cfg.target_mean_error,
    })
}

/// Serialize `θ*` as `key=value` lines, angles with 17 significant digits.
pub fn format_theta(trained: &TrainedUnitary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# trained confinement circuit");
    let _ = writeln!(out, "n_qubits={}", trained.circuit.n_qubits());
    let _ = writeln!(out, "depth={}", trained.depth);
    let _ = writeln!(out, "achieved_mean_error={:.16e}", trained.achieved_mean_error);
    let _ = writeln!(out, "iterations_used={}", trained.iterations_used);
    for (name, value) in trained.circuit.param_names().iter().zip(&trained.theta_star) {
        let _ = writeln!(out, "theta.{name}={value:.16e}");
    }
    out
}

/// Rebuild the layered circuit and `θ*` from [`format_theta`] output.
pub fn parse_theta(text: &str) -> Result<(ParamCircuit, Vec<f64>)> {
    let mut n_qubits = None;
    let mut depth = None;
    let mut angles: Vec<(usize, String, f64)> = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected key=value, got `{line}`"),
        })?;
        let bad = |what: &str| Error::Parse {
            line: line_no,
            message: format!("invalid {what} `{value}`"),
        };
        match key.trim() {
            "n_qubits" => n_qubits = Some(value.trim().parse::<usize>().map_err(|_| bad("qubit count"))?),
            "depth" => depth = Some(value.trim().parse::<usize>().map_err(|_| bad("depth"))?),
            "achieved_mean_error" | "iterations_used" => {}
            other => match other.strip_prefix("theta.") {
                Some(name) => {
                    let v: f64 = value.trim().parse().map_err(|_| bad("angle"))?;
                    if !v.is_finite() {
                        return Err(bad("angle"));
                    }
                    angles.push((line_no, name.to_string(), v));
                }
                None => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("unknown key `{other}`"),
                    })
                }
            },
        }
    }
    let missing = |field: &str| Error::Parse {
        line: text.lines().count(),
        message: format!("missing `{field}`"),
    };
    let circuit = build_layered_circuit(n_qubits.ok_or_else(|| missing("n_qubits"))?, depth.ok_or_else(|| missing("depth"))?)?;
    let mut theta = vec![f64::NAN; circuit.num_params()];
    for (line, name, v) in angles {
        let slot = circuit.param_index(&name).ok_or_else(|| Error::Parse {
            line,
            message: format!("no parameter named `{name}`"),
        })?;
        theta[slot] = v;
    }
    if let Some(j) = theta.iter().position(|t| t.is_nan()) {
        return Err(missing(&format!("theta.{}", circuit.param_names()[j])));
    }
    Ok((circuit, theta))
}

pub fn save_theta(trained: &TrainedUnitary, path: &Path) -> Result<()> {
    std::fs::write(path, format_theta(trained))?;
    Ok(())
}

pub fn load_theta(path: &Path) -> Result<(ParamCircuit, Vec<f64>)> {
    parse_theta(&std::fs::read_to_string(path)?)
}
