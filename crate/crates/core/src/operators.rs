//! Hamiltonians and symmetry operators: the open-boundary XXZ chain, its mirror-reflection and
//! global spin-flip symmetries, and the two-qubit H₂ model with its total-spin operator.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let i = c(0.0, 1.0);
        let entries = match self {
            Pauli::I => [one, z, z, one],
            Pauli::X => [z, one, one, z],
            Pauli::Y => [z, -i, i, z],
            Pauli::Z => [one, z, z, -one],
        };
        ComplexMatrix::from_fn(2, 2, |r, col| entries[2 * r + col])
    }
}

/// Tensor product of single-qubit Paulis; `ops[q]` acts on qubit q.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    ops: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            ops: vec![Pauli::I; n_qubits],
        }
    }

    pub fn from_ops(ops: Vec<Pauli>) -> Self {
        Self { ops }
    }

    /// Identity except for the listed (qubit, Pauli) factors.
    pub fn with(n_qubits: usize, factors: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = Self::identity(n_qubits);
        for &(q, p) in factors {
            if q >= n_qubits {
                return Err(Error::InvalidArgument(format!(
                    "qubit {q} out of range for {n_qubits} qubits"
                )));
            }
            s.ops[q] = p;
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.ops.len()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    /// `P|x⟩ = phase(x)·|x ⊕ flip⟩`: returns (flip mask, phase for input label x).
    fn action(&self, x: usize) -> (usize, C64) {
        let mut flip = 0usize;
        let mut phase = c(1.0, 0.0);
        for (q, op) in self.ops.iter().enumerate() {
            let bit = x >> q & 1;
            match op {
                Pauli::I => {}
                Pauli::X => flip |= 1 << q,
                Pauli::Y => {
                    flip |= 1 << q;
                    // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
                    phase *= if bit == 0 { c(0.0, 1.0) } else { c(0.0, -1.0) };
                }
                Pauli::Z => {
                    if bit == 1 {
                        phase = -phase;
                    }
                }
            }
        }
        (flip, phase)
    }
}

impl fmt::Display for PauliString {
    /// Highest qubit first, matching how basis labels are written.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in self.ops.iter().rev() {
            let ch = match op {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

/// Real-weighted sum of Pauli strings.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn push(&mut self, coeff: f64, string: PauliString) -> Result<()> {
        if string.n_qubits() != self.n_qubits {
            return Err(Error::Dimension(format!(
                "{}-qubit string in a {}-qubit sum",
                string.n_qubits(),
                self.n_qubits
            )));
        }
        self.terms.push((coeff, string));
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Dense `Σ cᵢ Pᵢ`. Each string is a signed permutation, so this is built column by column
/// rather than through Kronecker products.
pub fn pauli_dense(p: &PauliSum) -> ComplexMatrix {
    let dim = 1usize << p.n_qubits;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (coeff, string) in &p.terms {
        for x in 0..dim {
            let (flip, phase) = string.action(x);
            m[(x ^ flip, x)] += phase * *coeff;
        }
    }
    m
}

/// `H = Σ_i J(XᵢXᵢ₊₁ + YᵢYᵢ₊₁) + K ZᵢZᵢ₊₁` over nearest neighbours, open boundaries.
pub fn build_xxz(n: usize, j: f64, k: f64) -> Result<PauliSum> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("XXZ chain needs n >= 2, got {n}")));
    }
    let mut h = PauliSum::new(n);
    for i in 0..n - 1 {
        for (coeff, p) in [(j, Pauli::X), (j, Pauli::Y), (k, Pauli::Z)] {
            h.push(coeff, PauliString::with(n, &[(i, p), (i + 1, p)])?)?;
        }
    }
    Ok(h)
}

fn permutation_matrix(dim: usize, f: impl Fn(usize) -> usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for x in 0..dim {
        m[(f(x), x)] = c(1.0, 0.0);
    }
    m
}

/// Mirror reflection of the chain: the product of SWAPs over qubit pairs (i, n−1−i).
pub fn build_reflection(n: usize) -> Result<ComplexMatrix> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "reflection operator needs an even qubit count, got {n}"
        )));
    }
    Ok(permutation_matrix(1 << n, |x| mirror_bits(x, n)))
}

pub(crate) fn mirror_bits(x: usize, n: usize) -> usize {
    (0..n).fold(0, |acc, q| acc | ((x >> q & 1) << (n - 1 - q)))
}

/// Global spin flip `Πᵢ σˣᵢ`.
pub fn build_rotation(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("rotation operator needs n >= 1".into()));
    }
    let all = (1usize << n) - 1;
    Ok(permutation_matrix(1 << n, |x| x ^ all))
}

/// H₂ (STO-3G) in the four-state N=2, S_z=0 basis |0110⟩, |0101⟩, |1010⟩, |1001⟩ ↔ labels 0..3,
/// equilibrium bond length 0.725 Å. Energies carry the unit label eV.
pub fn h2_hamiltonian() -> ComplexMatrix {
    #[rustfmt::skip]
    let h = [
        -1.06, 0.0,   0.0,   0.18,
         0.0, -1.84,  0.18,  0.0,
         0.0,  0.18, -0.23,  0.0,
         0.18, 0.0,   0.0,  -1.06,
    ];
    ComplexMatrix::from_real(4, 4, &h)
}

/// Total spin `S²` in the same basis as [`h2_hamiltonian`].
pub fn s2_operator() -> ComplexMatrix {
    #[rustfmt::skip]
    let s = [
         0.5, 0.0, 0.0, -0.5,
         0.0, 0.0, 0.0,  0.0,
         0.0, 0.0, 0.0,  0.0,
        -0.5, 0.0, 0.0,  0.5,
    ];
    ComplexMatrix::from_real(4, 4, &s)
}
