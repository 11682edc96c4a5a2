//! Circuit builders: the k-dimensional subspace ansatz and the layered trainable circuit.
//!
//! Layered circuit: each of the `depth` layers is an RY, RX, RY rotation sublayer followed by a
//! CNOT ring; a closing RY, RX, RY sublayer follows the last layer. Every parameter
//! belongs to a plain RX or RY gate, so the two-point shift rule is exact for all of them.
//!
//! Subspace ansatz for `k` with `m = ⌊log₂ k⌋`:
//! 1. X on the `n − m` most significant qubits pins the support to the top `2^m` labels;
//! 2. a layered block on the low `m` qubits spreads amplitude over those labels;
//! 3. if `k > 2^m`, an RY-type and an RX-type pair rotation per leftover label move amplitude,
//!    with a free relative phase, from a block label onto a label in
//!    `{2ⁿ − k, …, 2ⁿ − 2^m − 1}`.
//!
//! A pair rotation is `P⁻¹ · C† · R₀(θ) · C · P` with `R` = RY or RX: the permutation `P` brings
//! the two labels to positions (0, 1), and the fixed basis change `C` turns the rotation's
//! generator into σᶻ on every other qubit-0 pair. The result rotates the chosen pair and only
//! applies phases elsewhere, so no amplitude can leave the support.

use std::f64::consts::TAU;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix};
use crate::simulator::{apply_circuit, basis_state, ParamCircuit};

const SUPPORT_CHECK_TOL: f64 = 1e-20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    /// Subspace dimension.
    pub k: usize,
    /// Layer count of the inner layered block.
    pub depth: usize,
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, k: usize, depth: usize) -> Result<Self> {
        let spec = Self { n_qubits, k, depth };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > crate::simulator::MAX_QUBITS {
            return Err(Error::InvalidArgument(format!("bad qubit count {}", self.n_qubits)));
        }
        if self.k <= 1 {
            return Err(Error::SectorTooSmall { dim: self.k });
        }
        if self.k > 1 << self.n_qubits {
            return Err(Error::InvalidArgument(format!(
                "subspace dimension {} exceeds 2^{}",
                self.k, self.n_qubits
            )));
        }
        if self.depth == 0 {
            return Err(Error::InvalidArgument("ansatz depth must be >= 1".into()));
        }
        Ok(())
    }

    /// `⌊log₂ k⌋`.
    pub fn m(&self) -> usize {
        (usize::BITS - 1 - self.k.leading_zeros()) as usize
    }

    /// First label of the support `{2ⁿ − k, …, 2ⁿ − 1}`.
    pub fn support_start(&self) -> usize {
        (1 << self.n_qubits) - self.k
    }
}

/// Parameter count of [`build_layered_circuit`].
pub fn layered_param_count(n: usize, depth: usize) -> usize {
    3 * n * (depth + 1)
}

fn add_layered_block(
    circuit: &mut ParamCircuit,
    qubits: &[usize],
    depth: usize,
    prefix: &str,
) -> Result<()> {
    let ring = |circuit: &mut ParamCircuit| -> Result<()> {
        match qubits.len() {
            0 | 1 => Ok(()),
            2 => circuit.cnot(qubits[0], qubits[1]),
            len => {
                for w in qubits.windows(2) {
                    circuit.cnot(w[0], w[1])?;
                }
                circuit.cnot(qubits[len - 1], qubits[0])
            }
        }
    };
    for layer in 0..=depth {
        for &q in qubits {
            circuit.ry(q, format!("{prefix}L{layer}.ry{q}"))?;
        }
        for &q in qubits {
            circuit.rx(q, format!("{prefix}L{layer}.rx{q}"))?;
        }
        for &q in qubits {
            circuit.ry(q, format!("{prefix}L{layer}.ry'{q}"))?;
        }
        if layer < depth {
            ring(circuit)?;
        }
    }
    Ok(())
}

/// Layered trainable circuit on all `n` qubits with `3·n·(depth + 1)` parameters. Depth 0 is a
/// single rotation sublayer with no entanglers.
pub fn build_layered_circuit(n: usize, depth: usize) -> Result<ParamCircuit> {
    let mut circuit = ParamCircuit::new(n)?;
    let qubits: Vec<usize> = (0..n).collect();
    add_layered_block(&mut circuit, &qubits, depth, "")?;
    Ok(circuit)
}

/// Circuit `A(α)` whose output from `|0…0⟩` is supported on the last `k` basis labels.
pub fn build_subspace_ansatz(spec: &AnsatzSpec) -> Result<ParamCircuit> {
    spec.validate()?;
    let n = spec.n_qubits;
    let m = spec.m();
    let mut circuit = ParamCircuit::new(n)?;

    for q in m..n {
        circuit.x(q)?;
    }
    if m > 0 {
        let low: Vec<usize> = (0..m).collect();
        add_layered_block(&mut circuit, &low, spec.depth, "A.")?;
    }

    let dim = 1usize << n;
    let block_start = dim - (1 << m);
    let extra = spec.k - (1 << m);
    for j in 0..extra {
        let from = block_start + j;
        let to = block_start - 1 - j;
        add_pair_rotation(&mut circuit, from, to, PairAxis::Y, &format!("A.ext{j}.y"))?;
        add_pair_rotation(&mut circuit, from, to, PairAxis::X, &format!("A.ext{j}.x"))?;
    }

    assert_support(&circuit, spec)?;
    Ok(circuit)
}

/// Rotation axis of a pair gadget on its two labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PairAxis {
    X,
    Y,
}

/// Rotate amplitude between basis labels `a` and `b` about `axis` with one parameter; all other
/// labels only pick up phases.
fn add_pair_rotation(
    circuit: &mut ParamCircuit,
    a: usize,
    b: usize,
    axis: PairAxis,
    name: &str,
) -> Result<()> {
    let n = circuit.n_qubits();
    let dim = 1usize << n;
    let mut map = vec![0usize; dim];
    map[a] = 0;
    map[b] = 1;
    let mut next = 2;
    for (label, slot) in map.iter_mut().enumerate() {
        if label != a && label != b {
            *slot = next;
            next += 1;
        }
    }
    let mut inverse = vec![0usize; dim];
    for (i, &m) in map.iter().enumerate() {
        inverse[m] = i;
    }

    // Columns of each other 2x2 block are eigenvectors of the rotation's Pauli, so C† σ C = σᶻ
    // there: (1, ±i)/√2 for σʸ, (1, ±1)/√2 for σˣ.
    let s = 0.5f64.sqrt();
    let lower = match axis {
        PairAxis::Y => (c(0.0, s), c(0.0, -s)),
        PairAxis::X => (c(s, 0.0), c(-s, 0.0)),
    };
    let mut basis_change = ComplexMatrix::identity(dim);
    for t in 1..dim / 2 {
        let (lo, hi) = (2 * t, 2 * t + 1);
        basis_change[(lo, lo)] = c(s, 0.0);
        basis_change[(lo, hi)] = c(s, 0.0);
        basis_change[(hi, lo)] = lower.0;
        basis_change[(hi, hi)] = lower.1;
    }
    let all: Vec<usize> = (0..n).collect();

    circuit.permutation(map)?;
    circuit.dense(all.clone(), basis_change.clone())?;
    match axis {
        PairAxis::Y => circuit.ry(0, name)?,
        PairAxis::X => circuit.rx(0, name)?,
    };
    circuit.dense(all, basis_change.adjoint())?;
    circuit.permutation(inverse)
}

fn assert_support(circuit: &ParamCircuit, spec: &AnsatzSpec) -> Result<()> {
    let zero = basis_state(spec.n_qubits, 0)?;
    let start = spec.support_start();
    let p = circuit.num_params();
    let probes: [Vec<f64>; 3] = [
        vec![0.0; p],
        (0..p).map(|i| 0.37 + 1.13 * i as f64).collect(),
        (0..p).map(|i| 2.9 - 0.71 * i as f64).collect(),
    ];
    for params in &probes {
        let out = apply_circuit(circuit, params, &zero)?;
        let leak: f64 = out.as_slice()[..start].iter().map(|z| z.norm_sqr()).sum();
        if leak > SUPPORT_CHECK_TOL {
            return Err(Error::InvalidGate(format!(
                "subspace ansatz leaks {leak:.3e} probability below label {start}"
            )));
        }
    }
    Ok(())
}

/// Uniform parameters in `[0, 2π)`.
pub fn random_params<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<f64> {
    (0..count).map(|_| rng.gen_range(0.0..TAU)).collect()
}
