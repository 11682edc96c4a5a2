//! Exact-diagonalization reference: full and sector-restricted spectra, ground states and
//! fidelities.

use crate::error::{Error, Result};
use crate::linalg::{eigh, ComplexMatrix, ComplexVector, DEGENERACY_TOL};
use crate::symmetry::SymmetrySector;

const COMMUTATOR_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub sector_ground_energy: f64,
    pub sector_ground_state: ComplexVector,
    /// Orthonormal basis of the lowest sector level (one vector when non-degenerate).
    pub sector_ground_manifold: Vec<ComplexVector>,
    pub full_ground_energy: f64,
    /// Ascending.
    pub sector_spectrum: Vec<f64>,
    /// Ascending.
    pub full_spectrum: Vec<f64>,
}

impl OracleResult {
    /// Fidelity against the sector ground level; projector form when it is degenerate.
    pub fn fidelity(&self, state: &ComplexVector) -> f64 {
        manifold_fidelity(state, &self.sector_ground_manifold)
    }

    pub fn ground_is_degenerate(&self) -> bool {
        self.sector_ground_manifold.len() > 1
    }

    /// Whether the sector excludes the global ground level.
    pub fn sector_misses_global_ground(&self) -> bool {
        self.sector_ground_energy > self.full_ground_energy + DEGENERACY_TOL
    }
}

/// Diagonalize `P† H P` for the sector basis `P` and lift its ground level back.
pub fn subspace_ground(h: &ComplexMatrix, sector: &SymmetrySector) -> Result<OracleResult> {
    let deviation = h.commutator(sector.operator())?.max_abs();
    if deviation > COMMUTATOR_TOL {
        return Err(Error::NonCommuting { deviation });
    }
    let p = sector.sector_vectors();
    let projected = p.adjoint().matmul(h)?.matmul(p)?;
    // P†HP is Hermitian up to rounding; symmetrize before the strict check in eigh.
    let projected = projected.add(&projected.adjoint())?.scale(0.5.into());
    let restricted = eigh(&projected)?;
    let full = eigh(h)?;

    let ground = restricted.eigenvalues[0];
    let manifold: Vec<ComplexVector> = (0..restricted.dim())
        .take_while(|&j| restricted.eigenvalues[j] - ground <= DEGENERACY_TOL)
        .map(|j| p.mul_vec(&restricted.vector(j)))
        .collect::<Result<_>>()?;

    Ok(OracleResult {
        sector_ground_energy: ground,
        sector_ground_state: manifold[0].clone(),
        sector_ground_manifold: manifold,
        full_ground_energy: full.eigenvalues[0],
        sector_spectrum: restricted.eigenvalues,
        full_spectrum: full.eigenvalues,
    })
}

/// `|⟨reference|state⟩|²`.
pub fn fidelity(state: &ComplexVector, reference: &ComplexVector) -> f64 {
    reference.inner(state).norm_sqr().clamp(0.0, 1.0)
}

/// `‖P_g |ψ⟩‖²` for the projector onto an orthonormal `basis`.
pub fn manifold_fidelity(state: &ComplexVector, basis: &[ComplexVector]) -> f64 {
    basis
        .iter()
        .map(|b| b.inner(state).norm_sqr())
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// True if every value of `sub` can be matched to a distinct value of `full` within `tol`.
pub fn is_sub_multiset(sub: &[f64], full: &[f64], tol: f64) -> bool {
    let mut used = vec![false; full.len()];
    sub.iter().all(|&x| {
        match full
            .iter()
            .enumerate()
            .filter(|(i, &y)| !used[*i] && (x - y).abs() <= tol)
            .min_by(|a, b| (x - a.1).abs().total_cmp(&(x - b.1).abs()))
        {
            Some((i, _)) => {
                used[i] = true;
                true
            }
            None => false,
        }
    })
}
