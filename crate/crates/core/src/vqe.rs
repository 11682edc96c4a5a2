//! Energy minimization over the ansatz parameters with parameter-shift gradients and a
//! per-coordinate clipped gradient step.

use std::f64::consts::FRAC_PI_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ansatz::random_params;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::oracle::OracleResult;
use crate::simulator::{apply_circuit, basis_state, expectation, Gate, ParamCircuit};
use crate::symmetry::SymmetrySector;

/// What maps the ansatz output into the symmetry sector.
#[derive(Clone, Debug)]
pub enum Confinement {
    /// Exact unitary `U`, applied as a dense gate.
    Exact(ComplexMatrix),
    /// Trained circuit `Ũ` with frozen parameters `θ*`.
    Trained { circuit: ParamCircuit, theta: Vec<f64> },
}

/// State preparation `|ψ(α)⟩ = V · A(α)|0…0⟩`.
#[derive(Clone, Debug)]
pub struct Pipeline {
    ansatz: ParamCircuit,
    confinement: Confinement,
}

impl Pipeline {
    pub fn new(ansatz: ParamCircuit, confinement: Confinement) -> Result<Self> {
        let dim = ansatz.dim();
        match &confinement {
            Confinement::Exact(u) => {
                if u.rows() != dim || u.cols() != dim {
                    return Err(Error::Dimension(format!(
                        "{}x{} confinement unitary for a {dim}-dimensional register",
                        u.rows(),
                        u.cols()
                    )));
                }
            }
            Confinement::Trained { circuit, theta } => {
                if circuit.n_qubits() != ansatz.n_qubits() {
                    return Err(Error::Dimension("trained circuit acts on a different register".into()));
                }
                if theta.len() != circuit.num_params() {
                    return Err(Error::ParamCount {
                        expected: circuit.num_params(),
                        got: theta.len(),
                    });
                }
            }
        }
        Ok(Self { ansatz, confinement })
    }

    pub fn ansatz(&self) -> &ParamCircuit {
        &self.ansatz
    }

    pub fn confinement(&self) -> &Confinement {
        &self.confinement
    }

    pub fn num_params(&self) -> usize {
        self.ansatz.num_params()
    }

    pub fn prepare(&self, alpha: &[f64]) -> Result<ComplexVector> {
        let zero = basis_state(self.ansatz.n_qubits(), 0)?;
        let state = apply_circuit(&self.ansatz, alpha, &zero)?;
        match &self.confinement {
            Confinement::Exact(u) => u.mul_vec(&state),
            Confinement::Trained { circuit, theta } => apply_circuit(circuit, theta, &state),
        }
    }
}

/// `⟨ψ(α)|H|ψ(α)⟩`.
pub fn energy(alpha: &[f64], prep: &Pipeline, h: &ComplexMatrix) -> Result<f64> {
    expectation(&prep.prepare(alpha)?, h)
}

/// Every parameter must drive exactly one RX or RY gate for the two-point rule to be exact.
pub fn check_shift_rule(circuit: &ParamCircuit) -> Result<()> {
    let mut uses = vec![0usize; circuit.num_params()];
    for (index, gate) in circuit.gates().iter().enumerate() {
        match gate {
            Gate::Rx { param, .. } | Gate::Ry { param, .. } => {
                uses[*param] += 1;
                if uses[*param] > 1 {
                    return Err(Error::UnsupportedShift {
                        index,
                        kind: "a gate sharing its parameter slot",
                    });
                }
            }
            _ => {}
        }
    }
    if let Some(unused) = uses.iter().position(|&u| u == 0) {
        return Err(Error::InvalidGate(format!(
            "parameter `{}` drives no gate",
            circuit.param_names()[unused]
        )));
    }
    Ok(())
}

/// Two-point shift rule: `∂ⱼf = (f(x + π/2·eⱼ) − f(x − π/2·eⱼ)) / 2`.
pub fn shift_gradient<F>(x: &[f64], f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    (0..x.len())
        .into_par_iter()
        .map(|j| {
            let mut shifted = x.to_vec();
            shifted[j] = x[j] + FRAC_PI_2;
            let plus = f(&shifted)?;
            shifted[j] = x[j] - FRAC_PI_2;
            let minus = f(&shifted)?;
            Ok((plus - minus) / 2.0)
        })
        .collect()
}

pub fn parameter_shift_grad(alpha: &[f64], prep: &Pipeline, h: &ComplexMatrix) -> Result<Vec<f64>> {
    check_shift_rule(&prep.ansatz)?;
    shift_gradient(alpha, |a| energy(a, prep, h))
}

#[derive(Clone, Debug)]
pub struct VqeConfig {
    pub max_iterations: usize,
    /// Per-coordinate update bound, radians.
    pub step_bound: f64,
    /// Factor applied to the bound after a step that does not lower the energy.
    pub bound_decay: f64,
    pub learning_rate: f64,
    /// Stop once the gradient ∞-norm drops below this.
    pub convergence_grad_norm: f64,
    pub seed: u64,
}

impl Default for VqeConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            step_bound: 0.5,
            bound_decay: 0.9,
            learning_rate: 0.1,
            convergence_grad_norm: 1e-6,
            seed: 0,
        }
    }
}

impl VqeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_bound > 0.0) {
            return Err(Error::config("step_bound", "must be positive"));
        }
        if !(self.bound_decay > 0.0 && self.bound_decay <= 1.0) {
            return Err(Error::config("bound_decay", "must lie in (0, 1]"));
        }
        if !(self.convergence_grad_norm > 0.0) {
            return Err(Error::config("convergence_grad_norm", "must be positive"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::config("learning_rate", "must be positive"));
        }
        Ok(())
    }
}

/// One optimizer iteration, evaluated at the parameters held at the start of the iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub energy: f64,
    /// `energy − sector ground energy`.
    pub energy_error: f64,
    pub fidelity: f64,
    /// `⟨O⟩`.
    pub symmetry_mean: f64,
    /// `⟨(O − S)²⟩`.
    pub symmetry_sq_error: f64,
}

#[derive(Clone, Debug)]
pub struct VqeOutcome {
    pub alpha: Vec<f64>,
    pub traces: Vec<TraceRecord>,
    /// Per-coordinate bound in force at each trace record.
    pub bounds: Vec<f64>,
    pub converged: bool,
}

impl VqeOutcome {
    pub fn last(&self) -> &TraceRecord {
        self.traces.last().expect("at least one trace record")
    }
}

/// Observables recorded alongside the energy.
pub struct TraceContext<'a> {
    pub sector: &'a SymmetrySector,
    pub oracle: &'a OracleResult,
}

impl TraceContext<'_> {
    pub fn record(
        &self,
        iteration: usize,
        state: &ComplexVector,
        h: &ComplexMatrix,
        deviation_sq: &ComplexMatrix,
    ) -> Result<TraceRecord> {
        let energy = expectation(state, h)?;
        Ok(TraceRecord {
            iteration,
            energy,
            energy_error: energy - self.oracle.sector_ground_energy,
            fidelity: self.oracle.fidelity(state),
            symmetry_mean: expectation(state, self.sector.operator())?,
            symmetry_sq_error: expectation(state, deviation_sq)?,
        })
    }
}

/// Clipped gradient descent from a seeded uniform start.
pub fn minimize(
    prep: &Pipeline,
    h: &ComplexMatrix,
    cfg: &VqeConfig,
    ctx: &TraceContext<'_>,
) -> Result<VqeOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = random_params(prep.num_params(), &mut rng);
    minimize_from(prep, h, cfg, ctx, start)
}

/// Clipped gradient descent from `start`.
///
/// Each iteration records a trace at the current point, takes `α − clip(η·g, ±bound)`, keeps it
/// only if the energy drops, and otherwise shrinks the bound by `bound_decay`.
pub fn minimize_from(
    prep: &Pipeline,
    h: &ComplexMatrix,
    cfg: &VqeConfig,
    ctx: &TraceContext<'_>,
    start: Vec<f64>,
) -> Result<VqeOutcome> {
    cfg.validate()?;
    check_shift_rule(&prep.ansatz)?;
    if start.len() != prep.num_params() {
        return Err(Error::ParamCount {
            expected: prep.num_params(),
            got: start.len(),
        });
    }
    let deviation_sq = ctx.sector.deviation_sq();
    let mut alpha = start;
    let mut bound = cfg.step_bound;
    let mut state = prep.prepare(&alpha)?;
    let mut current = expectation(&state, h)?;
    let mut traces = Vec::new();
    let mut bounds = Vec::new();
    let mut converged = false;

    for iteration in 0..cfg.max_iterations {
        traces.push(ctx.record(iteration, &state, h, &deviation_sq)?);
        bounds.push(bound);
        let grad = shift_gradient(&alpha, |a| energy(a, prep, h))?;
        let grad_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if grad_norm < cfg.convergence_grad_norm {
            converged = true;
            break;
        }
        let trial: Vec<f64> = alpha
            .iter()
            .zip(&grad)
            .map(|(a, g)| a - (cfg.learning_rate * g).clamp(-bound, bound))
            .collect();
        let trial_state = prep.prepare(&trial)?;
        let trial_energy = expectation(&trial_state, h)?;
        if trial_energy < current {
            alpha = trial;
            state = trial_state;
            current = trial_energy;
        } else {
            bound *= cfg.bound_decay;
        }
    }
    if !converged {
        // Final point after the last update.
        let iteration = traces.len();
        traces.push(ctx.record(iteration, &state, h, &deviation_sq)?);
        bounds.push(bound);
    }
    Ok(VqeOutcome {
        alpha,
        traces,
        bounds,
        converged,
    })
}
