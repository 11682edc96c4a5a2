//! Dense complex linear algebra for the small operators used here (dimension <= a few dozen).
//!
//! Matrices are row-major. The Hermitian eigensolver is a cyclic Jacobi iteration with a
//! deterministic post-processing step, so identical inputs always produce bit-identical
//! eigenvectors, including inside degenerate eigenspaces.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
pub const JACOBI_OFF_TOL: f64 = 1e-12;
/// Eigenvalues closer than this are treated as one degenerate level.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, PartialEq)]
pub struct ComplexVector {
    data: Vec<C64>,
}

impl ComplexVector {
    pub fn new(data: Vec<C64>) -> Self {
        assert!(!data.is_empty(), "vectors must have positive dimension");
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![C64::new(0.0, 0.0); dim])
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &ComplexVector) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, s: C64) -> ComplexVector {
        ComplexVector::new(self.data.iter().map(|z| z * s).collect())
    }

    pub fn normalized(&self) -> ComplexVector {
        self.scale(c(1.0 / self.norm(), 0.0))
    }

    pub fn max_abs_diff(&self, other: &ComplexVector) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for ComplexVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.data[i]
    }
}

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.iter()).finish()
    }
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrices must have positive dimensions");
        Self {
            rows,
            cols,
            data: vec![c(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Row-major real entries.
    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), rows * cols);
        Self::from_fn(rows, cols, |i, j| c(values[i * cols + j], 0.0))
    }

    pub fn from_diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { c(0.0, 0.0) })
    }

    pub fn from_columns(columns: &[ComplexVector]) -> Self {
        assert!(!columns.is_empty());
        let rows = columns[0].dim();
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        ComplexVector::new((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn columns(&self) -> Vec<ComplexVector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &ComplexMatrix, f: impl Fn(C64, C64) -> C64) -> Result<ComplexMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        matmul(self, other)
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if self.cols != v.dim() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        let x = v.as_slice();
        Ok(ComplexVector::new(
            (0..self.rows)
                .map(|i| {
                    let row = &self.data[i * self.cols..(i + 1) * self.cols];
                    row.iter().zip(x).map(|(a, b)| a * b).sum()
                })
                .collect(),
        ))
    }

    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest `|M_ij - conj(M_ji)|`; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return Err(Error::Dimension(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = ComplexMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a[(i, k)];
            if aik == c(0.0, 0.0) {
                continue;
            }
            let brow = &b.data[k * b.cols..(k + 1) * b.cols];
            let orow = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for (o, &bkj) in orow.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
    Ok(out)
}

/// True iff `max |(M†M − I)_ij| <= tol`. Non-square input is never unitary.
pub fn check_unitary(m: &ComplexMatrix, tol: f64) -> bool {
    unitarity_deviation(m) <= tol
}

pub fn unitarity_deviation(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let gram = m.adjoint().matmul(m).expect("square");
    gram.max_abs_diff(&ComplexMatrix::identity(m.rows))
}

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `j` is the eigenvector for `eigenvalues[j]`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, j: usize) -> ComplexVector {
        self.eigenvectors.column(j)
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let lambda = ComplexMatrix::from_diag(&self.eigenvalues);
        v.matmul(&lambda)
            .and_then(|vl| vl.matmul(&v.adjoint()))
            .expect("square factors")
    }
}

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues come back ascending. Eigenvalues within [`DEGENERACY_TOL`] of each other form a
/// block whose basis is rebuilt from the canonical basis vectors projected onto the block's
/// eigenspace (Gram–Schmidt, in index order); every column is then phase-fixed so that its
/// largest-magnitude entry is real and positive.
pub fn eigh(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigh needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let n = m.rows;

    // Symmetrize so the iteration starts exactly Hermitian.
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c(m[(i, i)].re, 0.0)
        } else {
            (m[(i, j)] + m[(j, i)].conj()) * 0.5
        }
    });
    let mut v = ComplexMatrix::identity(n);

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&a) >= JACOBI_OFF_TOL {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                residual: off_norm(&a),
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re).then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut columns: Vec<ComplexVector> = order.iter().map(|&i| v.column(i)).collect();

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eigenvalues[end] - eigenvalues[start] <= DEGENERACY_TOL {
            end += 1;
        }
        if end - start > 1 {
            let block = canonical_basis(&columns[start..end]);
            columns.splice(start..end, block);
        }
        start = end;
    }
    for col in columns.iter_mut() {
        fix_phase(col);
    }

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: ComplexMatrix::from_columns(&columns),
    })
}

/// Zero `a[p][q]` with a unitary rotation on the (p, q) plane; accumulate it into `v`.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let abs = apq.norm();
    if abs == 0.0 {
        return;
    }
    let n = a.rows;
    let phase = apq / abs;
    let (app, aqq) = (a[(p, p)].re, a[(q, q)].re);

    // Real symmetric problem [[app, abs], [abs, aqq]] after removing the phase of a_pq.
    let tau = (aqq - app) / (2.0 * abs);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = t * cs;

    // G acts on columns p, q: G = diag(1, conj(phase)) · [[c, s], [-s, c]].
    let g_pp = c(cs, 0.0);
    let g_pq = c(sn, 0.0);
    let g_qp = phase.conj() * (-sn);
    let g_qq = phase.conj() * cs;

    // A <- A G
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    // A <- G† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = c(0.0, 0.0);
    a[(q, p)] = c(0.0, 0.0);
    a[(p, p)] = c(a[(p, p)].re, 0.0);
    a[(q, q)] = c(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

/// Deterministic orthonormal basis for the span of `block`: project e_0, e_1, ... onto the span
/// and Gram–Schmidt them in index order.
fn canonical_basis(block: &[ComplexVector]) -> Vec<ComplexVector> {
    let dim = block[0].dim();
    let want = block.len();

    let project = |x: &ComplexVector| -> ComplexVector {
        let mut out = ComplexVector::zeros(dim);
        for b in block {
            let coeff = b.inner(x);
            for i in 0..dim {
                out[i] += b[i] * coeff;
            }
        }
        out
    };

    // Loosen the acceptance threshold only if the strict pass cannot fill the block.
    for threshold in [1e-3, 1e-6, 1e-10] {
        let mut basis: Vec<ComplexVector> = Vec::with_capacity(want);
        for idx in 0..dim {
            if basis.len() == want {
                break;
            }
            let mut e = ComplexVector::zeros(dim);
            e[idx] = c(1.0, 0.0);
            let mut w = project(&e);
            // Two Gram–Schmidt passes for orthogonality at machine precision.
            for _ in 0..2 {
                for b in &basis {
                    let coeff = b.inner(&w);
                    for i in 0..dim {
                        w[i] -= b[i] * coeff;
                    }
                }
            }
            let norm = w.norm();
            if norm > threshold {
                basis.push(w.scale(c(1.0 / norm, 0.0)));
            }
        }
        if basis.len() == want {
            return basis;
        }
    }
    block.to_vec()
}

/// Rotate the global phase so the largest-magnitude entry (first one on near-ties) is real
/// positive.
fn fix_phase(v: &mut ComplexVector) {
    let max = v.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v
        .as_slice()
        .iter()
        .position(|z| z.norm() >= max - 1e-12)
        .expect("max exists");
    let rot = v[pivot].conj() / v[pivot].norm();
    for z in v.as_mut_slice() {
        *z *= rot;
    }
    let p = v[pivot];
    v[pivot] = c(p.re, 0.0);
}
