//! Small dense matrices for desk-scale analysis and the symmetric
//! (generalized) eigensolver.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;

use crate::error::{check_dim, BiotError, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(nrows: usize, ncols: usize, data: Vec<f64>) -> Result<Self> {
        check_dim("dense data", nrows * ncols, data.len())?;
        Ok(Self { nrows, ncols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self { nrows, ncols, data }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds the dense matrix of a linear map by applying it to unit vectors.
    pub fn from_columns_of<F: FnMut(&[f64], &mut [f64])>(nrows: usize, ncols: usize, mut f: F) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        let mut e = vec![0.0; ncols];
        let mut col = vec![0.0; nrows];
        for j in 0..ncols {
            e[j] = 1.0;
            f(&e, &mut col);
            for i in 0..nrows {
                m[(i, j)] = col[i];
            }
            e[j] = 0.0;
        }
        m
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.nrows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("dense matvec", self.ncols, x.len())?;
        Ok((0..self.nrows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        check_dim("dense matmul", self.ncols, other.nrows)?;
        let a = self.to_nalgebra();
        let b = other.to_nalgebra();
        Ok(Self::from_nalgebra(&(a * b)))
    }

    pub fn add(&self, alpha: f64, other: &DenseMatrix, beta: f64) -> Result<DenseMatrix> {
        check_dim("dense add rows", self.nrows, other.nrows)?;
        check_dim("dense add cols", self.ncols, other.ncols)?;
        Ok(Self {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        })
    }

    pub fn scaled(&self, alpha: f64) -> DenseMatrix {
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    /// `(A + Aᵀ)/2`.
    pub fn symmetric_part(&self) -> DenseMatrix {
        let t = self.transpose();
        self.add(0.5, &t, 0.5).expect("square")
    }

    pub fn trace(&self) -> f64 {
        (0..self.nrows.min(self.ncols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `max |a_ij - a_ji| / max |a_ij|`.
    pub fn asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            for j in (i + 1)..self.ncols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst / scale
    }

    pub fn inverse(&self) -> Result<DenseMatrix> {
        check_dim("inverse of square matrix", self.nrows, self.ncols)?;
        let lu = self.to_nalgebra().lu();
        lu.try_inverse()
            .map(|m| Self::from_nalgebra(&m))
            .ok_or(BiotError::Singular { pivot: 0 })
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.nrows, self.ncols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = m[(i, j)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.ncols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.ncols + j]
    }
}

/// Eigenpairs of a symmetric (generalized) problem, ascending.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`, `B`-orthonormal for a
    /// pencil.
    pub vectors: Option<DenseMatrix>,
}

/// Relative tolerance under which a matrix is accepted as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Default size limit for dense analysis.
pub const DENSE_LIMIT: usize = 4000;

/// Solves `A v = λ v` or, with a pencil, `A v = λ B v` for symmetric `A` and
/// symmetric positive definite `B`.
///
/// The pencil is reduced to standard form through the Cholesky factor of
/// `B`: `L⁻¹ A L⁻ᵀ y = λ y`, `v = L⁻ᵀ y`.
pub fn dense_sym_eig(a: &DenseMatrix, pencil: Option<&DenseMatrix>, vectors: bool) -> Result<SymEig> {
    dense_sym_eig_limited(a, pencil, vectors, DENSE_LIMIT)
}

pub fn dense_sym_eig_limited(
    a: &DenseMatrix,
    pencil: Option<&DenseMatrix>,
    vectors: bool,
    limit: usize,
) -> Result<SymEig> {
    check_dim("eigenproblem (square)", a.nrows(), a.ncols())?;
    if a.nrows() > limit {
        return Err(BiotError::TooLarge {
            size: a.nrows(),
            limit,
        });
    }
    let asym = a.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(BiotError::NotSymmetric { asymmetry: asym });
    }
    let n = a.nrows();
    let mut am = a.to_nalgebra();
    // exact symmetrization of round-off
    am = (&am + am.transpose()) * 0.5;

    let (cmat, lfac) = match pencil {
        None => (am, None),
        Some(b) => {
            check_dim("pencil rows", n, b.nrows())?;
            check_dim("pencil cols", n, b.ncols())?;
            let basym = b.asymmetry();
            if basym > SYMMETRY_TOL {
                return Err(BiotError::NotSymmetric { asymmetry: basym });
            }
            let mut bm = b.to_nalgebra();
            bm = (&bm + bm.transpose()) * 0.5;
            let chol = bm.cholesky().ok_or(BiotError::NotPositiveDefinite)?;
            let l = chol.l();
            // C = L⁻¹ A L⁻ᵀ
            let linv_a = l
                .solve_lower_triangular(&am)
                .ok_or(BiotError::NotPositiveDefinite)?;
            let c = l
                .solve_lower_triangular(&linv_a.transpose())
                .ok_or(BiotError::NotPositiveDefinite)?;
            let c = (&c + c.transpose()) * 0.5;
            (c, Some(l))
        }
    };

    let eig = nalgebra::SymmetricEigen::new(cmat);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    let vectors = if vectors {
        let mut y = DMatrix::<f64>::zeros(n, n);
        for (k, &i) in order.iter().enumerate() {
            y.set_column(k, &eig.eigenvectors.column(i));
        }
        let v = match lfac {
            None => y,
            Some(l) => l
                .transpose()
                .solve_upper_triangular(&y)
                .ok_or(BiotError::NotPositiveDefinite)?,
        };
        Some(DenseMatrix::from_nalgebra(&v))
    } else {
        None
    };
    Ok(SymEig { values, vectors })
}
