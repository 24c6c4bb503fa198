//! Block-structured operators over a fixed partition of the unknowns.

use crate::error::{check_dim, BiotError, Result};
use crate::la::sparse::{SparseMatrix, TripletBuilder};
use crate::la::LinearOperator;

/// Contiguous partition of a vector into named-by-position blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockLayout {
    pub fn new(sizes: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        offsets.push(0);
        for s in sizes {
            offsets.push(offsets.last().unwrap() + s);
        }
        Self {
            sizes: sizes.to_vec(),
            offsets,
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, b: usize) -> usize {
        self.sizes[b]
    }

    pub fn offset(&self, b: usize) -> usize {
        self.offsets[b]
    }

    pub fn range(&self, b: usize) -> std::ops::Range<usize> {
        self.offsets[b]..self.offsets[b + 1]
    }

    pub fn total(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn split<'a>(&self, x: &'a [f64]) -> Vec<&'a [f64]> {
        (0..self.num_blocks()).map(|b| &x[self.range(b)]).collect()
    }
}

/// A grid of optional sparse blocks; missing blocks are zero.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    rows: BlockLayout,
    cols: BlockLayout,
    blocks: Vec<Option<SparseMatrix>>,
}

impl BlockOperator {
    pub fn new(rows: BlockLayout, cols: BlockLayout) -> Self {
        let n = rows.num_blocks() * cols.num_blocks();
        Self {
            rows,
            cols,
            blocks: vec![None; n],
        }
    }

    pub fn square(layout: BlockLayout) -> Self {
        Self::new(layout.clone(), layout)
    }

    pub fn row_layout(&self) -> &BlockLayout {
        &self.rows
    }

    pub fn col_layout(&self) -> &BlockLayout {
        &self.cols
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.cols.num_blocks() + j
    }

    /// Stores block `(i, j)`, checking its shape.
    pub fn set(&mut self, i: usize, j: usize, m: SparseMatrix) -> Result<()> {
        if i >= self.rows.num_blocks() || j >= self.cols.num_blocks() {
            return Err(BiotError::InvalidParameter(format!(
                "block ({i}, {j}) outside a {}x{} grid",
                self.rows.num_blocks(),
                self.cols.num_blocks()
            )));
        }
        check_dim("block rows", self.rows.size(i), m.nrows())?;
        check_dim("block cols", self.cols.size(j), m.ncols())?;
        let k = self.idx(i, j);
        self.blocks[k] = Some(m);
        Ok(())
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&SparseMatrix> {
        self.blocks[self.idx(i, j)].as_ref()
    }

    /// Block `(i, j)` or an explicit zero matrix of the right shape.
    pub fn block_or_zero(&self, i: usize, j: usize) -> SparseMatrix {
        self.block(i, j)
            .cloned()
            .unwrap_or_else(|| SparseMatrix::zeros(self.rows.size(i), self.cols.size(j)))
    }

    /// Assembles the monolithic matrix.
    pub fn to_sparse(&self) -> SparseMatrix {
        let nnz: usize = self.blocks.iter().flatten().map(|b| b.nnz()).sum();
        let mut t = TripletBuilder::with_capacity(self.rows.total(), self.cols.total(), nnz);
        for bi in 0..self.rows.num_blocks() {
            for bj in 0..self.cols.num_blocks() {
                if let Some(m) = self.block(bi, bj) {
                    let (r0, c0) = (self.rows.offset(bi), self.cols.offset(bj));
                    for i in 0..m.nrows() {
                        let (cols, vals) = m.row(i);
                        for (&c, &v) in cols.iter().zip(vals) {
                            t.push(r0 + i, c0 + c, v);
                        }
                    }
                }
            }
        }
        t.build()
    }

    /// Splits a monolithic matrix along the given layouts.
    pub fn from_sparse(a: &SparseMatrix, rows: BlockLayout, cols: BlockLayout) -> Result<Self> {
        check_dim("monolithic rows", rows.total(), a.nrows())?;
        check_dim("monolithic cols", cols.total(), a.ncols())?;
        let mut op = Self::new(rows, cols);
        for i in 0..op.rows.num_blocks() {
            for j in 0..op.cols.num_blocks() {
                let b = a.submatrix(op.rows.range(i), op.cols.range(j));
                if b.nnz() > 0 {
                    let k = op.idx(i, j);
                    op.blocks[k] = Some(b);
                }
            }
        }
        Ok(op)
    }
}

impl LinearOperator for BlockOperator {
    fn nrows(&self) -> usize {
        self.rows.total()
    }

    fn ncols(&self) -> usize {
        self.cols.total()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols.total(), "block apply: input length");
        assert_eq!(y.len(), self.rows.total(), "block apply: output length");
        y.iter_mut().for_each(|v| *v = 0.0);
        for bi in 0..self.rows.num_blocks() {
            let yr = self.rows.range(bi);
            for bj in 0..self.cols.num_blocks() {
                if let Some(m) = self.block(bi, bj) {
                    m.spmv_add(1.0, &x[self.cols.range(bj)], &mut y[yr.clone()]);
                }
            }
        }
    }
}
