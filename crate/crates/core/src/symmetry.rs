//! Symmetry sectors and the exact confinement unitary.
//!
//! The confinement unitary places the sector's eigenvectors in its last `k` columns, so any
//! state supported on the last `k` computational basis labels is mapped into the sector.

use crate::error::{Error, Result};
use crate::linalg::{check_unitary, eigh, unitarity_deviation, ComplexMatrix, ComplexVector};

pub const DEFAULT_SECTOR_TOL: f64 = 1e-6;
const EIGENPAIR_TOL: f64 = 1e-9;
const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SymmetrySector {
    operator: ComplexMatrix,
    target_value: f64,
    sector_vectors: ComplexMatrix,
    /// Eigenvectors outside the sector, ascending eigenvalue.
    complement: Vec<ComplexVector>,
}

impl SymmetrySector {
    pub fn operator(&self) -> &ComplexMatrix {
        &self.operator
    }

    pub fn target_value(&self) -> f64 {
        self.target_value
    }

    pub fn dim_k(&self) -> usize {
        self.sector_vectors.cols()
    }

    /// Full Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.operator.rows()
    }

    /// Columns are an orthonormal basis of the sector.
    pub fn sector_vectors(&self) -> &ComplexMatrix {
        &self.sector_vectors
    }

    /// `(O − S·I)²`, the squared deviation from the target eigenvalue.
    pub fn deviation_sq(&self) -> ComplexMatrix {
        let shifted = self
            .operator
            .sub(&ComplexMatrix::identity(self.dim()).scale(self.target_value.into()))
            .expect("square operator");
        let sq = shifted.matmul(&shifted).expect("square operator");
        // Remove rounding asymmetry so downstream Hermitian checks stay tight.
        sq.add(&sq.adjoint()).expect("square").scale(0.5.into())
    }
}

/// Collect every eigenvector of `op` whose eigenvalue lies within `tol` of `target`.
pub fn extract_sector(op: &ComplexMatrix, target: f64, tol: f64) -> Result<SymmetrySector> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("sector tolerance must be positive, got {tol}")));
    }
    let eig = eigh(op)?;
    let (inside, outside): (Vec<usize>, Vec<usize>) =
        (0..eig.dim()).partition(|&j| (eig.eigenvalues[j] - target).abs() <= tol);
    if inside.is_empty() {
        return Err(Error::EmptySector { target, tol });
    }
    if inside.len() <= 1 {
        return Err(Error::SectorTooSmall { dim: inside.len() });
    }
    let columns: Vec<ComplexVector> = inside.iter().map(|&j| eig.vector(j)).collect();
    for v in &columns {
        let residual = op
            .mul_vec(v)?
            .max_abs_diff(&v.scale(target.into()));
        if residual > EIGENPAIR_TOL {
            return Err(Error::InvalidArgument(format!(
                "eigenvector misses the target eigenvalue by {residual:.3e}; tolerance {tol:.1e} is too loose"
            )));
        }
    }
    Ok(SymmetrySector {
        operator: op.clone(),
        target_value: target,
        sector_vectors: ComplexMatrix::from_columns(&columns),
        complement: outside.iter().map(|&j| eig.vector(j)).collect(),
    })
}

/// `U = [complement eigenvectors | sector eigenvectors]`, a full unitary whose last `k` columns
/// span the sector.
pub fn build_exact_unitary(sector: &SymmetrySector) -> Result<ComplexMatrix> {
    let mut columns = sector.complement.clone();
    columns.extend(sector.sector_vectors.columns());
    let u = ComplexMatrix::from_columns(&columns);
    if !u.is_square() || !check_unitary(&u, UNITARY_TOL) {
        return Err(Error::NotUnitary {
            deviation: unitarity_deviation(&u),
        });
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::operators::{build_reflection, build_rotation, s2_operator};
    use crate::simulator::{basis_state, expectation};

    #[test]
    fn paper_sector_dimensions() {
        let refl = build_reflection(4).unwrap();
        assert_eq!(extract_sector(&refl, -1.0, 1e-6).unwrap().dim_k(), 6);
        assert_eq!(extract_sector(&refl, 1.0, 1e-6).unwrap().dim_k(), 10);
        let rot = build_rotation(4).unwrap();
        assert_eq!(extract_sector(&rot, 1.0, 1e-6).unwrap().dim_k(), 8);
        assert_eq!(extract_sector(&s2_operator(), 0.0, 1e-6).unwrap().dim_k(), 3);
    }

    #[test]
    fn sector_errors() {
        let refl = build_reflection(4).unwrap();
        assert!(matches!(extract_sector(&refl, 0.5, 1e-6), Err(Error::EmptySector { .. })));
        assert!(matches!(
            extract_sector(&s2_operator(), 1.0, 1e-6),
            Err(Error::SectorTooSmall { dim: 1 })
        ));
        assert!(extract_sector(&refl, 1.0, 0.0).is_err());
    }

    #[test]
    fn last_column_is_a_sector_eigenvector() {
        for (op, s) in [
            (build_reflection(4).unwrap(), -1.0),
            (build_rotation(4).unwrap(), 1.0),
            (s2_operator(), 0.0),
        ] {
            let sector = extract_sector(&op, s, DEFAULT_SECTOR_TOL).unwrap();
            let u = build_exact_unitary(&sector).unwrap();
            assert!(check_unitary(&u, 1e-10));
            let n = sector.dim().trailing_zeros() as usize;
            let v = u.mul_vec(&basis_state(n, sector.dim() - 1).unwrap()).unwrap();
            assert!(op.mul_vec(&v).unwrap().max_abs_diff(&v.scale(c(s, 0.0))) < 1e-9);
        }
    }

    #[test]
    fn conjugated_s2_vanishes_on_last_columns() {
        let sector = extract_sector(&s2_operator(), 0.0, DEFAULT_SECTOR_TOL).unwrap();
        let u = build_exact_unitary(&sector).unwrap();
        let conj = u.adjoint().matmul(&s2_operator()).unwrap().matmul(&u).unwrap();
        for i in 1..4 {
            assert!(conj[(i, i)].norm() < 1e-10);
        }
    }

    #[test]
    fn deviation_sq_on_sector_vectors_is_zero() {
        let sector = extract_sector(&build_reflection(4).unwrap(), 1.0, DEFAULT_SECTOR_TOL).unwrap();
        let m = sector.deviation_sq();
        for v in sector.sector_vectors().columns() {
            assert!(expectation(&v, &m).unwrap().abs() < 1e-18);
        }
    }

    #[test]
    fn exact_unitary_is_deterministic() {
        let op = build_reflection(4).unwrap();
        let a = build_exact_unitary(&extract_sector(&op, -1.0, 1e-6).unwrap()).unwrap();
        let b = build_exact_unitary(&extract_sector(&op, -1.0, 1e-6).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
