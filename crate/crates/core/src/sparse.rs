//! Compressed sparse row matrices and a direct solver.
//!
//! Assembly goes through [`Triplets`]; compression sorts entries stably by
//! `(row, col)` and sums duplicates in insertion order, so identical assembly
//! order gives bit-identical matrices. Factorization is delegated to faer's
//! sparse LU.

use std::io::Write;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::MatMut;

use crate::error::{Error, Result};

/// Unsorted coordinate list used during assembly.
#[derive(Debug, Clone)]
pub struct Triplets {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self { nrows, ncols, entries: Vec::with_capacity(cap) }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    /// Scatter a dense local block (row-major, `rows.len() x cols.len()`).
    pub fn add_block(&mut self, rows: &[usize], cols: &[usize], block: &[f64]) {
        debug_assert_eq!(block.len(), rows.len() * cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                self.push(r, c, block[i * cols.len() + j]);
            }
        }
    }

    pub fn append(&mut self, other: Triplets) {
        self.entries.extend(other.entries);
    }

    pub fn into_matrix(self) -> SparseMatrix {
        SparseMatrix::from_triplets(self.nrows, self.ncols, self.entries)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn from_triplets(nrows: usize, ncols: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored `(col, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `x^T A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    /// `y^T A x`.
    pub fn bilinear(&self, y: &[f64], x: &[f64]) -> f64 {
        assert_eq!(y.len(), self.nrows);
        (0..self.nrows)
            .map(|i| {
                let row: f64 = self.row(i).map(|(j, v)| v * x[j]).sum();
                y[i] * row
            })
            .sum()
    }

    pub fn transpose(&self) -> Self {
        let entries = self.iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, entries)
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        out
    }

    /// `sum_k a_k X_k` over matrices of identical shape.
    pub fn linear_combination(terms: &[(f64, &SparseMatrix)]) -> Self {
        let (nrows, ncols) = terms.first().map_or((0, 0), |(_, m)| (m.nrows, m.ncols));
        let mut entries = Vec::with_capacity(terms.iter().map(|(_, m)| m.nnz()).sum());
        for (a, m) in terms {
            assert_eq!((m.nrows, m.ncols), (nrows, ncols), "shape mismatch");
            entries.extend(m.iter().map(|(i, j, v)| (i, j, a * v)));
        }
        Self::from_triplets(nrows, ncols, entries)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |X - X^T|`.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        SparseMatrix::linear_combination(&[(1.0, self), (-1.0, &t)]).max_abs()
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.asymmetry() <= rel_tol * self.max_abs()
    }

    /// Dump as `row col value` lines (debugging aid).
    pub fn write_triplets(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# {} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.iter() {
            writeln!(w, "{i} {j} {v:?}")?;
        }
        Ok(())
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let trip: Vec<Triplet<usize, usize, f64>> = self.iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trip)
            .map_err(|e| Error::Solver(format!("matrix conversion failed: {e:?}")))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Factorized square matrix. Solves are checked against the original
/// matrix and refined iteratively until the relative residual meets the
/// requested tolerance.
pub struct LuSolver {
    matrix: SparseMatrix,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    tolerance: f64,
}

impl std::fmt::Debug for LuSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LuSolver").field("n", &self.matrix.nrows).field("tolerance", &self.tolerance).finish()
    }
}

/// Default relative residual target of a solve.
pub const SOLVE_TOLERANCE: f64 = 1e-12;

impl LuSolver {
    pub fn new(matrix: SparseMatrix) -> Result<Self> {
        if matrix.nrows != matrix.ncols {
            return Err(Error::Solver("matrix is not square".into()));
        }
        let lu = matrix
            .to_faer()?
            .sp_lu()
            .map_err(|e| Error::Solver(format!("LU factorization failed: {e:?}")))?;
        Ok(Self { matrix, lu, tolerance: SOLVE_TOLERANCE })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows
    }

    fn raw_solve(&self, x: &mut [f64]) {
        let n = x.len();
        self.lu.solve_in_place(MatMut::from_column_major_slice_mut(x, n, 1));
    }

    /// Solve and return `(x, relative residual)`.
    pub fn solve_with_residual(&self, b: &[f64]) -> Result<(Vec<f64>, f64)> {
        assert_eq!(b.len(), self.n());
        let bnorm = norm2(b);
        if bnorm == 0.0 {
            return Ok((vec![0.0; b.len()], 0.0));
        }
        let mut x = b.to_vec();
        self.raw_solve(&mut x);
        let mut r = vec![0.0; b.len()];
        let mut rel = f64::INFINITY;
        for _ in 0..4 {
            self.matrix.mul_vec_into(&x, &mut r);
            r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
            rel = norm2(&r) / bnorm;
            if !rel.is_finite() {
                return Err(Error::Solver("non-finite solution (singular matrix?)".into()));
            }
            if rel <= self.tolerance {
                break;
            }
            self.raw_solve(&mut r);
            x.iter_mut().zip(&r).for_each(|(xi, di)| *xi += di);
        }
        Ok((x, rel))
    }

    /// Solve, failing if the residual stays above the tolerance.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let (x, rel) = self.solve_with_residual(b)?;
        if rel > self.tolerance {
            return Err(Error::Solver(format!("relative residual {rel:e} above {:e}", self.tolerance)));
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tridiag(n: usize) -> SparseMatrix {
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, 4.0);
            if i > 0 {
                t.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                t.push(i, i + 1, -2.0);
            }
        }
        t.into_matrix()
    }

    #[test]
    fn duplicates_are_summed() {
        let m = SparseMatrix::from_triplets(2, 2, vec![(1, 0, 1.0), (0, 0, 2.0), (1, 0, 0.5)]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 0), 1.5);
        assert_eq!(m.get(0, 1), 0.0);
    }

    #[test]
    fn lu_solves_nonsymmetric_system() {
        let a = tridiag(50);
        let x0: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&x0);
        let lu = LuSolver::new(a).unwrap();
        let (x, res) = lu.solve_with_residual(&b).unwrap();
        assert!(res <= SOLVE_TOLERANCE);
        for (xi, ei) in x.iter().zip(&x0) {
            assert!((xi - ei).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        let r = LuSolver::new(a).and_then(|lu| lu.solve(&[1.0, 0.0]));
        assert!(r.is_err());
    }

    #[test]
    fn asymmetry_of_tridiag() {
        assert_eq!(tridiag(5).asymmetry(), 1.0);
        assert_eq!(SparseMatrix::identity(3).asymmetry(), 0.0);
    }

    proptest! {
        #[test]
        fn transpose_is_adjoint(
            entries in proptest::collection::vec((0usize..7, 0usize..7, -5.0f64..5.0), 0..30),
            x in proptest::collection::vec(-3.0f64..3.0, 7),
            y in proptest::collection::vec(-3.0f64..3.0, 7),
        ) {
            let a = SparseMatrix::from_triplets(7, 7, entries);
            let lhs = a.bilinear(&y, &x);
            let rhs = a.transpose().bilinear(&x, &y);
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }
    }
}
