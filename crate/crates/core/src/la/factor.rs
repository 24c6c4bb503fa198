//! Direct solvers: diagonal, sparse Cholesky and sparse LU.

use std::sync::Once;

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseRowMatRef, SymbolicSparseRowMatRef};
use faer::{Conj, MatMut, Par, Side};

use crate::error::{check_dim, BiotError, Result};
use crate::la::sparse::SparseMatrix;
use crate::la::LinearOperator;

static SEQUENTIAL: Once = Once::new();

/// Keeps faer single-threaded so repeated solves are bit-identical.
fn force_sequential() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(Par::Seq));
}

enum Kind {
    Diagonal(Vec<f64>),
    Cholesky(Llt<usize, f64>),
    Lu(Lu<usize, f64>),
}

/// A factorized square matrix that can be applied as its inverse.
pub struct Factorization {
    n: usize,
    kind: Kind,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            Kind::Diagonal(_) => "diagonal",
            Kind::Cholesky(_) => "cholesky",
            Kind::Lu(_) => "lu",
        };
        f.debug_struct("Factorization")
            .field("n", &self.n)
            .field("kind", &kind)
            .finish()
    }
}

fn faer_view(a: &SparseMatrix) -> SparseRowMatRef<'_, usize, f64> {
    let sym = SymbolicSparseRowMatRef::new_checked(
        a.nrows(),
        a.ncols(),
        a.row_offsets(),
        None,
        a.col_indices(),
    );
    SparseRowMatRef::new(sym, a.values())
}

impl Factorization {
    /// Inverse of a diagonal matrix. Fails on a zero entry.
    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let inv = diag
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                if d == 0.0 || !d.is_finite() {
                    Err(BiotError::Singular { pivot: i })
                } else {
                    Ok(1.0 / d)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n: diag.len(),
            kind: Kind::Diagonal(inv),
        })
    }

    /// Sparse Cholesky of a symmetric positive definite matrix. A diagonal
    /// matrix short-circuits to [`Factorization::diagonal`].
    pub fn cholesky(a: &SparseMatrix) -> Result<Self> {
        check_dim("cholesky (square)", a.nrows(), a.ncols())?;
        if a.is_diagonal() {
            let d = a.diagonal();
            if d.iter().any(|&v| v <= 0.0) {
                return Err(BiotError::NotPositiveDefinite);
            }
            return Self::diagonal(&d);
        }
        force_sequential();
        let llt = faer_view(a)
            .sp_cholesky(Side::Lower)
            .map_err(|_| BiotError::NotPositiveDefinite)?;
        Ok(Self {
            n: a.nrows(),
            kind: Kind::Cholesky(llt),
        })
    }

    /// Sparse LU with partial pivoting.
    pub fn lu(a: &SparseMatrix) -> Result<Self> {
        check_dim("lu (square)", a.nrows(), a.ncols())?;
        if a.is_diagonal() {
            return Self::diagonal(&a.diagonal());
        }
        force_sequential();
        let lu = faer_view(a)
            .sp_lu()
            .map_err(|_| BiotError::Singular { pivot: 0 })?;
        let f = Self {
            n: a.nrows(),
            kind: Kind::Lu(lu),
        };
        // numerically singular pivots surface as non-finite solutions
        let probe = f.solve(&vec![1.0; a.nrows()])?;
        if let Some(i) = probe.iter().position(|v| !v.is_finite()) {
            return Err(BiotError::Singular { pivot: i });
        }
        Ok(f)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_dim("factorization rhs", self.n, b.len())?;
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    /// Overwrites `x` with `A⁻¹ x`. Panics on a length mismatch.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n, "factorization rhs length");
        if self.n == 0 {
            return;
        }
        match &self.kind {
            Kind::Diagonal(inv) => x.iter_mut().zip(inv).for_each(|(v, d)| *v *= d),
            Kind::Cholesky(llt) => {
                llt.solve_in_place_with_conj(Conj::No, MatMut::from_column_major_slice_mut(x, self.n, 1))
            }
            Kind::Lu(lu) => {
                lu.solve_in_place_with_conj(Conj::No, MatMut::from_column_major_slice_mut(x, self.n, 1))
            }
        }
    }
}

impl LinearOperator for Factorization {
    fn nrows(&self) -> usize {
        self.n
    }

    fn ncols(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
        self.solve_in_place(y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &t)
    }

    fn residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
        let ax = a.spmv(x).unwrap();
        ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn cholesky_solves() {
        let a = laplace_1d(50);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let f = Factorization::cholesky(&a).unwrap();
        assert!(residual(&a, &f.solve(&b).unwrap(), &b) < 1e-10);
    }

    #[test]
    fn lu_solves_nonsymmetric() {
        let mut t = vec![];
        for i in 0..20 {
            t.push((i, i, 3.0));
            if i + 1 < 20 {
                t.push((i, i + 1, 1.0));
            }
            if i >= 2 {
                t.push((i, i - 2, -0.5));
            }
        }
        let a = SparseMatrix::from_triplets(20, 20, &t);
        let b = vec![1.0; 20];
        let f = Factorization::lu(&a).unwrap();
        assert!(residual(&a, &f.solve(&b).unwrap(), &b) < 1e-10);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(
            Factorization::cholesky(&a),
            Err(BiotError::NotPositiveDefinite)
        ));
    }

    #[test]
    fn diagonal_rejects_zero() {
        assert!(matches!(
            Factorization::diagonal(&[1.0, 0.0]),
            Err(BiotError::Singular { pivot: 1 })
        ));
    }
}
