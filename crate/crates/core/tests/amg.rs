use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use biot_core::amg::{AmgHierarchy, AmgOptions, Cycle, Smoother};
use biot_core::krylov::{fgmres, pcg, GmresOptions, Identity};
use biot_core::la::vector::{dot, norm2};
use biot_core::la::{LinearOperator, SparseMatrix, TripletBuilder};

/// Five-point Dirichlet Laplacian on an `n x n` interior grid.
fn laplacian_2d(n: usize) -> SparseMatrix {
    let idx = |i: usize, j: usize| i * n + j;
    let mut t = TripletBuilder::new(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            t.push(idx(i, j), idx(i, j), 4.0);
            if i > 0 {
                t.push(idx(i, j), idx(i - 1, j), -1.0);
            }
            if i + 1 < n {
                t.push(idx(i, j), idx(i + 1, j), -1.0);
            }
            if j > 0 {
                t.push(idx(i, j), idx(i, j - 1), -1.0);
            }
            if j + 1 < n {
                t.push(idx(i, j), idx(i, j + 1), -1.0);
            }
        }
    }
    t.build()
}

fn small_coarse() -> AmgOptions {
    AmgOptions {
        coarse_size: 10,
        ..AmgOptions::default()
    }
}

fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn a_norm(a: &SparseMatrix, x: &[f64]) -> f64 {
    dot(x, &a.spmv(x).unwrap()).sqrt()
}

#[test]
fn coarse_operators_are_galerkin() {
    let a = laplacian_2d(16);
    let h = AmgHierarchy::setup(&a, small_coarse()).unwrap();
    assert!(h.num_levels() >= 3, "levels {}", h.num_levels());
    for l in 0..h.num_levels() - 1 {
        let p = h.prolongation(l).unwrap();
        let rap = p.transpose().matmul(h.level_matrix(l)).unwrap().matmul(p).unwrap();
        let diff = rap.add(1.0, h.level_matrix(l + 1), -1.0).unwrap().max_abs();
        assert!(diff <= 1e-12 * rap.max_abs(), "level {l}: {diff}");
        assert!(h.level_matrix(l + 1).asymmetry() <= 1e-14);
    }
    assert!(h.prolongation(h.num_levels() - 1).is_none());
    assert!(h.operator_complexity() < 2.0, "{}", h.operator_complexity());
}

#[test]
fn aggregates_cover_every_node() {
    let a = laplacian_2d(16);
    let h = AmgHierarchy::setup(&a, small_coarse()).unwrap();
    let agg = h.aggregates(0);
    let nc = h.level_matrix(1).nrows();
    assert_eq!(agg.len(), a.nrows());
    assert!(agg.iter().all(|&g| g < nc));
    for g in 0..nc {
        assert!(agg.contains(&g), "aggregate {g} is empty");
    }
}

#[test]
fn symmetric_cycle_is_symmetric() {
    let a = laplacian_2d(12);
    let h = AmgHierarchy::setup(&a, small_coarse()).unwrap();
    let x = random_vec(a.nrows(), 1);
    let y = random_vec(a.nrows(), 2);
    let bx = h.apply_vec(&x);
    let by = h.apply_vec(&y);
    let (l, r) = (dot(&y, &bx), dot(&x, &by));
    assert!((l - r).abs() <= 1e-12 * l.abs().max(1.0), "{l} vs {r}");
    assert!(dot(&x, &bx) > 0.0);
}

#[test]
fn vcycle_contracts_error_on_laplacian() {
    let a = laplacian_2d(16);
    let h = AmgHierarchy::setup(&a, small_coarse()).unwrap();
    // Error propagation of x <- x + B(b - A x) in the energy norm, by power
    // iteration on a random start.
    let mut e = random_vec(a.nrows(), 7);
    let mut rho = 0.0;
    for _ in 0..30 {
        let before = a_norm(&a, &e);
        let ae = a.spmv(&e).unwrap();
        let be = h.apply_vec(&ae);
        for (ei, bi) in e.iter_mut().zip(&be) {
            *ei -= bi;
        }
        rho = a_norm(&a, &e) / before;
        let s = 1.0 / norm2(&e);
        e.iter_mut().for_each(|v| *v *= s);
    }
    assert!(rho < 0.9, "energy contraction {rho}");
}

#[test]
fn setup_and_cycle_are_deterministic() {
    let a = laplacian_2d(20);
    let r = random_vec(a.nrows(), 3);
    let h1 = AmgHierarchy::setup(&a, small_coarse()).unwrap();
    let h2 = AmgHierarchy::setup(&a, small_coarse()).unwrap();
    assert_eq!(h1.aggregates(0), h2.aggregates(0));
    assert_eq!(h1.apply_vec(&r), h2.apply_vec(&r));
}

#[test]
fn pcg_with_amg_beats_unpreconditioned() {
    let a = laplacian_2d(32);
    let b = random_vec(a.nrows(), 11);
    let opts = GmresOptions::outer().with_tol(1e-8);
    let h = AmgHierarchy::setup(&a, AmgOptions::default()).unwrap();
    let (x, rep) = pcg(&a, &b, &h, &opts).unwrap();
    assert!(rep.converged);
    let (_, plain) = pcg(&a, &b, &Identity(a.nrows()), &opts).unwrap();
    assert!(plain.converged);
    assert!(rep.iterations * 2 < plain.iterations, "{} vs {}", rep.iterations, plain.iterations);
    let mut r = b.clone();
    a.spmv_add(-1.0, &x, &mut r);
    assert!(norm2(&r) <= 1e-8 * norm2(&b) * 1.0001);
}

#[test]
fn cycle_variants_all_converge_under_fgmres() {
    let a = laplacian_2d(24);
    let b = random_vec(a.nrows(), 5);
    let opts = GmresOptions::outer().with_tol(1e-10);
    for (cycle, smoother) in [
        (Cycle::V, Smoother::SymmetricGaussSeidel),
        (Cycle::W, Smoother::SymmetricGaussSeidel),
        (Cycle::K, Smoother::SymmetricGaussSeidel),
        (Cycle::V, Smoother::Jacobi { omega: 0.6 }),
    ] {
        let o = AmgOptions {
            smoother,
            coarse_size: 20,
            ..AmgOptions::default()
        }
        .with_cycle(cycle);
        let h = AmgHierarchy::setup(&a, o).unwrap();
        let (_, rep) = fgmres(&a, &b, &h, &opts).unwrap();
        assert!(rep.converged && rep.iterations < 40, "{cycle:?} {smoother:?}: {}", rep.iterations);
        assert!(rep.relres <= 1e-10 * 1.0001);
    }
}

#[test]
fn block_aggregation_respects_nodes() {
    // Two decoupled copies of a Laplacian interleaved as 2-vectors.
    let s = laplacian_2d(10);
    let n = s.nrows();
    let mut t = TripletBuilder::new(2 * n, 2 * n);
    for i in 0..n {
        let (cols, vals) = s.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            t.push(2 * i, 2 * j, v);
            t.push(2 * i + 1, 2 * j + 1, v);
        }
    }
    let a = t.build();
    let h = AmgHierarchy::setup(&a, small_coarse().with_block_size(2)).unwrap();
    assert_eq!(h.aggregates(0).len(), n);
    assert_eq!(h.level_matrix(1).nrows() % 2, 0);
    assert!(AmgHierarchy::setup(&a, small_coarse().with_block_size(3)).is_err());
}
