//! State-vector simulation of parameterized n-qubit circuits.
//!
//! Qubit 0 is the least-significant bit of a computational-basis label. Gates update the
//! amplitude array in place using bit masks; only `Dense` gates do a matrix-vector product.

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{c, check_unitary, unitarity_deviation, ComplexMatrix, ComplexVector, C64};

pub const MAX_QUBITS: usize = 20;
pub const DENSE_UNITARY_TOL: f64 = 1e-10;
const IMAG_ERROR_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub enum Gate {
    /// `exp(-i φ σˣ / 2)` with φ = params[param].
    Rx { target: usize, param: usize },
    /// `exp(-i φ σʸ / 2)` with φ = params[param].
    Ry { target: usize, param: usize },
    Cnot { control: usize, target: usize },
    X { target: usize },
    /// Fixed unitary on `targets`; `targets[j]` is bit j of the matrix index.
    Dense {
        targets: Vec<usize>,
        matrix: Arc<ComplexMatrix>,
    },
    /// Basis-state relabeling on the whole register: amplitude of `|i⟩` moves to `|map[i]⟩`.
    Permutation { map: Arc<Vec<usize>> },
}

impl Gate {
    pub fn kind(&self) -> &'static str {
        match self {
            Gate::Rx { .. } => "RX",
            Gate::Ry { .. } => "RY",
            Gate::Cnot { .. } => "CNOT",
            Gate::X { .. } => "X",
            Gate::Dense { .. } => "DenseUnitary",
            Gate::Permutation { .. } => "Permutation",
        }
    }

    pub fn param(&self) -> Option<usize> {
        match self {
            Gate::Rx { param, .. } | Gate::Ry { param, .. } => Some(*param),
            _ => None,
        }
    }
}

/// Ordered gate list over `n_qubits` with named parameter slots.
#[derive(Clone, Debug)]
pub struct ParamCircuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    param_names: Vec<String>,
}

impl ParamCircuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "qubit count must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
            param_names: Vec::new(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn param_names(&self) -> &[String] {
        &self.param_names
    }

    pub fn num_params(&self) -> usize {
        self.param_names.len()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.param_names.iter().position(|n| n == name)
    }

    pub fn add_param(&mut self, name: impl Into<String>) -> Result<usize> {
        let name = name.into();
        if self.param_index(&name).is_some() {
            return Err(Error::InvalidGate(format!("duplicate parameter name `{name}`")));
        }
        self.param_names.push(name);
        Ok(self.param_names.len() - 1)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::InvalidGate(format!(
                "qubit {q} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// Validate and append a gate.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        match &gate {
            Gate::Rx { target, param } | Gate::Ry { target, param } => {
                self.check_qubit(*target)?;
                if *param >= self.param_names.len() {
                    return Err(Error::InvalidGate(format!("unknown parameter slot {param}")));
                }
            }
            Gate::Cnot { control, target } => {
                self.check_qubit(*control)?;
                self.check_qubit(*target)?;
                if control == target {
                    return Err(Error::InvalidGate("CNOT needs two distinct qubits".into()));
                }
            }
            Gate::X { target } => self.check_qubit(*target)?,
            Gate::Dense { targets, matrix } => {
                if targets.is_empty() {
                    return Err(Error::InvalidGate("dense gate without targets".into()));
                }
                let mut seen = HashSet::new();
                for &t in targets {
                    self.check_qubit(t)?;
                    if !seen.insert(t) {
                        return Err(Error::InvalidGate(format!("repeated dense target {t}")));
                    }
                }
                let d = 1usize << targets.len();
                if matrix.rows() != d || matrix.cols() != d {
                    return Err(Error::InvalidGate(format!(
                        "dense gate on {} qubits needs a {d}x{d} matrix, got {}x{}",
                        targets.len(),
                        matrix.rows(),
                        matrix.cols()
                    )));
                }
                if !check_unitary(matrix, DENSE_UNITARY_TOL) {
                    return Err(Error::NotUnitary {
                        deviation: unitarity_deviation(matrix),
                    });
                }
            }
            Gate::Permutation { map } => {
                if map.len() != self.dim() {
                    return Err(Error::InvalidGate(format!(
                        "permutation over {} labels on a {}-label register",
                        map.len(),
                        self.dim()
                    )));
                }
                let mut hit = vec![false; map.len()];
                for &m in map.iter() {
                    if m >= map.len() || std::mem::replace(&mut hit[m], true) {
                        return Err(Error::InvalidGate("permutation map is not a bijection".into()));
                    }
                }
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn rx(&mut self, target: usize, name: impl Into<String>) -> Result<usize> {
        let param = self.add_param(name)?;
        self.push(Gate::Rx { target, param })?;
        Ok(param)
    }

    pub fn ry(&mut self, target: usize, name: impl Into<String>) -> Result<usize> {
        let param = self.add_param(name)?;
        self.push(Gate::Ry { target, param })?;
        Ok(param)
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.push(Gate::Cnot { control, target })
    }

    pub fn x(&mut self, target: usize) -> Result<()> {
        self.push(Gate::X { target })
    }

    pub fn dense(&mut self, targets: Vec<usize>, matrix: ComplexMatrix) -> Result<()> {
        self.push(Gate::Dense {
            targets,
            matrix: Arc::new(matrix),
        })
    }

    pub fn permutation(&mut self, map: Vec<usize>) -> Result<()> {
        self.push(Gate::Permutation { map: Arc::new(map) })
    }

    /// Append all gates of `other`, prefixing its parameter names with `prefix`.
    pub fn append(&mut self, other: &ParamCircuit, prefix: &str) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::Dimension(format!(
                "cannot append a {}-qubit circuit to a {}-qubit circuit",
                other.n_qubits, self.n_qubits
            )));
        }
        let offset = self.param_names.len();
        for name in &other.param_names {
            self.add_param(format!("{prefix}{name}"))?;
        }
        for gate in &other.gates {
            let gate = match gate.clone() {
                Gate::Rx { target, param } => Gate::Rx {
                    target,
                    param: param + offset,
                },
                Gate::Ry { target, param } => Gate::Ry {
                    target,
                    param: param + offset,
                },
                g => g,
            };
            self.gates.push(gate);
        }
        Ok(())
    }
}

pub fn basis_state(n_qubits: usize, label: usize) -> Result<ComplexVector> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS || label >= 1 << n_qubits {
        return Err(Error::LabelOutOfRange { label, n_qubits });
    }
    let mut v = ComplexVector::zeros(1 << n_qubits);
    v[label] = c(1.0, 0.0);
    Ok(v)
}

/// Run `circuit` on `input` with parameter values `params` (radians).
pub fn apply_circuit(
    circuit: &ParamCircuit,
    params: &[f64],
    input: &ComplexVector,
) -> Result<ComplexVector> {
    if params.len() != circuit.num_params() {
        return Err(Error::ParamCount {
            expected: circuit.num_params(),
            got: params.len(),
        });
    }
    if input.dim() != circuit.dim() {
        return Err(Error::Dimension(format!(
            "state of dimension {} on a {}-qubit circuit",
            input.dim(),
            circuit.n_qubits
        )));
    }
    let mut state = input.clone();
    for gate in &circuit.gates {
        apply_gate(state.as_mut_slice(), gate, params);
    }
    Ok(state)
}

/// Apply one gate in place. The gate must be valid for `amps.len()`.
pub fn apply_gate(amps: &mut [C64], gate: &Gate, params: &[f64]) {
    match gate {
        Gate::Ry { target, param } => {
            let (s, co) = (params[*param] / 2.0).sin_cos();
            apply_single(amps, *target, [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]);
        }
        Gate::Rx { target, param } => {
            let (s, co) = (params[*param] / 2.0).sin_cos();
            apply_single(amps, *target, [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]);
        }
        Gate::X { target } => {
            let mask = 1usize << target;
            for i in 0..amps.len() {
                if i & mask == 0 {
                    amps.swap(i, i | mask);
                }
            }
        }
        Gate::Cnot { control, target } => {
            let cm = 1usize << control;
            let tm = 1usize << target;
            for i in 0..amps.len() {
                if i & cm != 0 && i & tm == 0 {
                    amps.swap(i, i | tm);
                }
            }
        }
        Gate::Dense { targets, matrix } => apply_dense(amps, targets, matrix),
        Gate::Permutation { map } => {
            let old = amps.to_vec();
            for (i, &m) in map.iter().enumerate() {
                amps[m] = old[i];
            }
        }
    }
}

fn apply_single(amps: &mut [C64], target: usize, u: [[C64; 2]; 2]) {
    let mask = 1usize << target;
    for i in 0..amps.len() {
        if i & mask == 0 {
            let a0 = amps[i];
            let a1 = amps[i | mask];
            amps[i] = u[0][0] * a0 + u[0][1] * a1;
            amps[i | mask] = u[1][0] * a0 + u[1][1] * a1;
        }
    }
}

fn apply_dense(amps: &mut [C64], targets: &[usize], matrix: &ComplexMatrix) {
    let local = 1usize << targets.len();
    let offsets: Vec<usize> = (0..local)
        .map(|l| {
            targets
                .iter()
                .enumerate()
                .filter(|(j, _)| l >> j & 1 == 1)
                .map(|(_, &t)| 1usize << t)
                .sum()
        })
        .collect();
    let tmask: usize = targets.iter().map(|&t| 1usize << t).sum();
    let mut gathered = vec![c(0.0, 0.0); local];
    for base in 0..amps.len() {
        if base & tmask != 0 {
            continue;
        }
        for (g, &o) in gathered.iter_mut().zip(&offsets) {
            *g = amps[base + o];
        }
        for (r, &o) in offsets.iter().enumerate() {
            let mut acc = c(0.0, 0.0);
            for (k, g) in gathered.iter().enumerate() {
                acc += matrix[(r, k)] * g;
            }
            amps[base + o] = acc;
        }
    }
}

/// `⟨ψ|op|ψ⟩` for a Hermitian `op`; fails if the imaginary part exceeds 1e-8.
pub fn expectation(state: &ComplexVector, op: &ComplexMatrix) -> Result<f64> {
    if op.rows() != state.dim() || op.cols() != state.dim() {
        return Err(Error::Dimension(format!(
            "{}x{} operator on a state of dimension {}",
            op.rows(),
            op.cols(),
            state.dim()
        )));
    }
    let value = state.inner(&op.mul_vec(state)?);
    if value.im.abs() > IMAG_ERROR_TOL {
        return Err(Error::ComplexExpectation { imag: value.im });
    }
    Ok(value.re)
}

/// Dense matrix of the bound circuit, built column by column from basis inputs.
pub fn circuit_unitary(circuit: &ParamCircuit, params: &[f64]) -> Result<ComplexMatrix> {
    let dim = circuit.dim();
    let columns = (0..dim)
        .map(|j| apply_circuit(circuit, params, &basis_state(circuit.n_qubits, j)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexMatrix::from_columns(&columns))
}
