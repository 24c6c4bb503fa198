use approx::assert_relative_eq;
use proptest::prelude::*;

use biot_core::la::vector::{dot, norm2};
use biot_core::la::{
    dense_sym_eig, read_matrix_market, sparse_triple_product, write_matrix_market, BlockLayout, BlockOperator,
    DenseMatrix, Factorization, LinearOperator, SparseMatrix, TripletBuilder,
};

fn dense_close(a: &DenseMatrix, b: &DenseMatrix, tol: f64) {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let diff = a.add(1.0, b, -1.0).unwrap().max_abs();
    assert!(diff <= tol * (1.0 + b.max_abs()), "max difference {diff}");
}

fn matrix_strategy(rows: usize, cols: usize) -> impl Strategy<Value = Vec<(usize, usize, f64)>> {
    prop::collection::vec((0..rows, 0..cols, -5.0f64..5.0), 0..(rows * cols))
}

proptest! {
    #[test]
    fn sparse_ops_match_dense(
        a in matrix_strategy(6, 5),
        b in matrix_strategy(5, 4),
        c in matrix_strategy(6, 5),
        x in prop::collection::vec(-1.0f64..1.0, 5),
    ) {
        let a = SparseMatrix::from_triplets(6, 5, &a);
        let b = SparseMatrix::from_triplets(5, 4, &b);
        let c = SparseMatrix::from_triplets(6, 5, &c);
        let (ad, bd, cd) = (a.to_dense(), b.to_dense(), c.to_dense());
        dense_close(&a.matmul(&b).unwrap().to_dense(), &ad.matmul(&bd).unwrap(), 1e-13);
        dense_close(&a.add(2.0, &c, -0.5).unwrap().to_dense(), &ad.add(2.0, &cd, -0.5).unwrap(), 1e-13);
        dense_close(&a.transpose().to_dense(), &ad.transpose(), 0.0);
        let y = a.spmv(&x).unwrap();
        let yd = ad.matvec(&x).unwrap();
        for (u, v) in y.iter().zip(&yd) {
            prop_assert!((u - v).abs() <= 1e-13);
        }
        let mut yt = vec![0.0; 5];
        a.spmv_transpose_add(1.0, &y, &mut yt);
        let ytd = ad.transpose().matvec(&y).unwrap();
        for (u, v) in yt.iter().zip(&ytd) {
            prop_assert!((u - v).abs() <= 1e-12);
        }
    }

    #[test]
    fn triple_product_matches_dense(
        a in matrix_strategy(4, 6),
        d in prop::collection::vec(0.1f64..3.0, 6),
    ) {
        let a = SparseMatrix::from_triplets(4, 6, &a);
        let got = sparse_triple_product(&a, &d, &a.transpose()).unwrap().to_dense();
        let want = a
            .to_dense()
            .matmul(&DenseMatrix::from_diagonal(&d))
            .unwrap()
            .matmul(&a.to_dense().transpose())
            .unwrap();
        dense_close(&got, &want, 1e-13);
    }

    #[test]
    fn cholesky_solves_spd(entries in matrix_strategy(7, 7), rhs in prop::collection::vec(-1.0f64..1.0, 7)) {
        let g = SparseMatrix::from_triplets(7, 7, &entries);
        let spd = g.transpose().matmul(&g).unwrap().add(1.0, &SparseMatrix::identity(7), 1.0).unwrap();
        let f = Factorization::cholesky(&spd).unwrap();
        let x = f.solve(&rhs).unwrap();
        let r = spd.spmv(&x).unwrap();
        let err: f64 = r.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-10 * (1.0 + norm2(&rhs)));
    }
}

#[test]
fn triplets_sum_duplicates() {
    let mut t = TripletBuilder::new(2, 2);
    t.push(0, 1, 1.5);
    t.push(0, 1, 2.5);
    t.push(1, 0, -1.0);
    let a = t.build();
    assert_eq!(a.get(0, 1), 4.0);
    assert_eq!(a.get(1, 0), -1.0);
    assert_eq!(a.get(0, 0), 0.0);
    assert_eq!(a.nnz(), 2);
}

#[test]
fn lu_solves_nonsymmetric() {
    let a = SparseMatrix::from_dense(&DenseMatrix::from_rows(&[&[4.0, 1.0, 0.0], &[2.0, 5.0, 1.0], &[0.0, -3.0, 6.0]]));
    let f = Factorization::lu(&a).unwrap();
    let x = f.solve(&[1.0, 2.0, 3.0]).unwrap();
    let r = a.spmv(&x).unwrap();
    for (u, v) in r.iter().zip([1.0, 2.0, 3.0]) {
        assert_relative_eq!(*u, v, epsilon = 1e-14);
    }
}

#[test]
fn cholesky_rejects_indefinite() {
    let a = SparseMatrix::from_dense(&DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]));
    assert!(Factorization::cholesky(&a).is_err());
    assert!(Factorization::diagonal(&[1.0, 0.0]).is_err());
}

#[test]
fn symmetric_eigenvalues() {
    let a = DenseMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
    let e = dense_sym_eig(&a, None, true).unwrap();
    assert_relative_eq!(e.values[0], 1.0, epsilon = 1e-14);
    assert_relative_eq!(e.values[1], 3.0, epsilon = 1e-14);
    let v = e.vectors.unwrap();
    let av = a.matvec(&v.column(1)).unwrap();
    for (x, y) in av.iter().zip(v.column(1)) {
        assert_relative_eq!(*x, 3.0 * y, epsilon = 1e-13);
    }

    // A v = λ B v with B = diag(1, 4): eigenvalues of diag(2, 1/2)-like pencil.
    let a = DenseMatrix::from_diagonal(&[2.0, 2.0]);
    let b = DenseMatrix::from_diagonal(&[1.0, 4.0]);
    let e = dense_sym_eig(&a, Some(&b), false).unwrap();
    assert_relative_eq!(e.values[0], 0.5, epsilon = 1e-14);
    assert_relative_eq!(e.values[1], 2.0, epsilon = 1e-14);

    let nonsym = DenseMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
    assert!(dense_sym_eig(&nonsym, None, false).is_err());
}

#[test]
fn dense_inverse_roundtrip() {
    let a = DenseMatrix::from_rows(&[&[3.0, 1.0, 0.5], &[1.0, 4.0, 1.0], &[0.0, 2.0, 5.0]]);
    let prod = a.matmul(&a.inverse().unwrap()).unwrap();
    dense_close(&prod, &DenseMatrix::identity(3), 1e-14);
    assert!(DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).inverse().is_err());
}

#[test]
fn matrix_market_roundtrip() {
    let a = SparseMatrix::from_triplets(3, 3, &[(0, 0, 2.0), (1, 0, -1.0), (0, 1, -1.0), (2, 2, 1e-300), (1, 1, 3.25)]);
    for symmetric in [false, true] {
        let mut buf = Vec::new();
        write_matrix_market(&mut buf, &a, symmetric).unwrap();
        let b = read_matrix_market(std::io::Cursor::new(buf)).unwrap();
        dense_close(&b.to_dense(), &a.to_dense(), 0.0);
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.mtx");
    write_matrix_market(std::fs::File::create(&path).unwrap(), &a, false).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate real general"));
    assert!(read_matrix_market(std::io::Cursor::new("garbage\n")).is_err());
}

#[test]
fn block_operator_assembles_and_splits() {
    let layout = BlockLayout::new(&[2, 1]);
    assert_eq!(layout.total(), 3);
    assert_eq!(layout.range(1), 2..3);
    let mut op = BlockOperator::square(layout.clone());
    op.set(0, 0, SparseMatrix::identity(2)).unwrap();
    op.set(0, 1, SparseMatrix::from_triplets(2, 1, &[(1, 0, 5.0)])).unwrap();
    op.set(1, 1, SparseMatrix::from_diagonal(&[7.0])).unwrap();
    assert!(op.set(1, 0, SparseMatrix::identity(2)).is_err());
    let y = op.apply_vec(&[1.0, 2.0, 3.0]);
    assert_eq!(y, vec![1.0, 17.0, 21.0]);
    let s = op.to_sparse();
    assert_eq!(s.get(1, 2), 5.0);
    let back = BlockOperator::from_sparse(&s, layout.clone(), layout).unwrap();
    assert_eq!(back.block(0, 1).unwrap().get(1, 0), 5.0);
    assert_eq!(back.block_or_zero(1, 0).nnz(), 0);
}

#[test]
fn vector_helpers() {
    assert_eq!(dot(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]), 32.0);
    assert_relative_eq!(norm2(&[3.0, 4.0]), 5.0);
}
