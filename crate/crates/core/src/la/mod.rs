//! Linear algebra primitives.

pub mod block;
pub mod dense;
pub mod factor;
pub mod mm;
pub mod sparse;
pub mod vector;

pub use block::{BlockLayout, BlockOperator};
pub use dense::{dense_sym_eig, dense_sym_eig_limited, DenseMatrix, SymEig};
pub use factor::Factorization;
pub use mm::{read_matrix_market, write_matrix_market};
pub use sparse::{sparse_triple_product, SparseMatrix, TripletBuilder};

/// Anything that maps a vector of length `ncols` to one of length `nrows`.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    /// `y = Op x`; `y` is overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows()];
        self.apply(x, &mut y);
        y
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for Box<T> {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
}

/// Dense matrix of an operator, column by column.
pub fn operator_to_dense<O: LinearOperator + ?Sized>(op: &O) -> DenseMatrix {
    DenseMatrix::from_columns_of(op.nrows(), op.ncols(), |x, y| op.apply(x, y))
}
