//! End-to-end runs: build the model, confine, minimize and write the trace.

use std::path::Path;

use crate::ansatz::{build_subspace_ansatz, AnsatzSpec};
use crate::config::{ExperimentConfig, Method};
use crate::error::Result;
use crate::oracle::subspace_ground;
use crate::symmetry::build_exact_unitary;
use crate::trace::{fmt_float, Trace};
use crate::trainer::{save_theta, train_unitary, TrainedUnitary, TrainingConfig};
use crate::vqe::{minimize, Confinement, Pipeline, TraceContext, VqeOutcome};

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub trace: Trace,
    pub vqe: VqeOutcome,
    pub trained: Option<TrainedUnitary>,
}

pub fn training_config(cfg: &ExperimentConfig) -> TrainingConfig {
    TrainingConfig {
        depth: cfg.utilde_depth,
        n_samples: cfg.train_samples,
        target_mean_error: cfg.train_tolerance,
        max_iterations: cfg.train_max_iterations,
        step_bound: cfg.step_bound,
        bound_decay: cfg.bound_decay,
        learning_rate: cfg.train_learning_rate,
        seed: cfg.seed(),
        ..Default::default()
    }
}

/// Run an experiment in memory.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let h = cfg.hamiltonian()?;
    let sector = cfg.sector()?;
    let oracle = subspace_ground(&h, &sector)?;
    let ansatz = build_subspace_ansatz(&AnsatzSpec::new(cfg.n_qubits, sector.dim_k(), cfg.ansatz_depth)?)?;

    let (confinement, trained) = match cfg.method {
        Method::Exact => (Confinement::Exact(build_exact_unitary(&sector)?), None),
        Method::Trained => {
            let trained = train_unitary(&sector, &training_config(cfg), &ansatz)?;
            let confinement = Confinement::Trained {
                circuit: trained.circuit.clone(),
                theta: trained.theta_star.clone(),
            };
            (confinement, Some(trained))
        }
    };
    let prep = Pipeline::new(ansatz, confinement)?;
    let vqe = minimize(&prep, &h, &cfg.vqe_config(), &TraceContext { sector: &sector, oracle: &oracle })?;

    let last = vqe.last();
    let mut summary = vec![
        ("sector_dim".to_string(), sector.dim_k().to_string()),
        ("iterations".to_string(), vqe.traces.len().to_string()),
        ("converged".to_string(), vqe.converged.to_string()),
        ("final_energy".to_string(), fmt_float(last.energy)),
        ("oracle_energy".to_string(), fmt_float(oracle.sector_ground_energy)),
        ("full_ground_energy".to_string(), fmt_float(oracle.full_ground_energy)),
        (
            "sector_contains_global_ground".to_string(),
            (!oracle.sector_misses_global_ground()).to_string(),
        ),
        ("final_energy_error".to_string(), fmt_float(last.energy_error)),
        ("final_fidelity".to_string(), fmt_float(last.fidelity)),
        ("final_symmetry_mean".to_string(), fmt_float(last.symmetry_mean)),
        ("final_symmetry_sq_error".to_string(), fmt_float(last.symmetry_sq_error)),
    ];
    if let Some(t) = &trained {
        summary.push(("trained_mean_error".to_string(), fmt_float(t.achieved_mean_error)));
        summary.push(("training_iterations".to_string(), t.iterations_used.to_string()));
    }
    let trace = Trace {
        config: cfg.to_kv().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        records: vqe.traces.clone(),
        summary,
    };
    Ok(ExperimentOutcome { trace, vqe, trained })
}

/// Run an experiment and write the trace (and `θ*` for method 2) to the configured paths.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let outcome = execute(cfg)?;
    write_file(&cfg.output_path, &outcome.trace.render())?;
    if let (Some(trained), Some(path)) = (&outcome.trained, &cfg.theta_path) {
        create_parent(path)?;
        save_theta(trained, path)?;
    }
    Ok(outcome)
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    create_parent(path)?;
    std::fs::write(path, text)?;
    Ok(())
}
