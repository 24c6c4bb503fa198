use approx::assert_relative_eq;

use biot_core::analysis::{
    equivalence_deviation, fov_bounds, fov_check, inf_sup_constant, lsl_decomposition_check, operator_deviation,
    schur_complement_check, spectral_interval, verify_inequalities, NormKind, NormMatrix,
};
use biot_core::amg::AmgOptions;
use biot_core::bench::{build_problem, ProblemParams};
use biot_core::biot::{BiotProblem, BiotSystem, Variant};
use biot_core::la::{dense_sym_eig, DenseMatrix, LinearOperator, SparseMatrix};
use biot_core::mesh::ProblemKind;
use biot_core::precond::{build_weighted_blocks, Family, SubSolver, SubSolverKind};
use biot_core::BiotError;

fn mandel(n: usize, nu: f64, k: f64) -> BiotProblem {
    build_problem(ProblemKind::Mandel2d, n, ProblemParams { nu, k, k_jump: None }).unwrap().1
}

/// `γ² = λ_min(Aᵀ N⁻¹ A, N)` computed through a generalized eigenproblem,
/// independently of the SVD route.
fn gamma_by_pencil(a: &DenseMatrix, n: &DenseMatrix) -> (f64, f64) {
    let ata = a.transpose().matmul(&n.inverse().unwrap()).unwrap().matmul(a).unwrap().symmetric_part();
    let e = dense_sym_eig(&ata, Some(n), false).unwrap();
    (e.values[0].max(0.0).sqrt(), e.values.last().unwrap().sqrt())
}

#[test]
fn inf_sup_matches_pencil_oracle() {
    for (variant, kind) in [(Variant::DiagBubble, NormKind::D), (Variant::Eliminated, NormKind::DE)] {
        let p = mandel(2, 0.2, 1e-6);
        let sys = BiotSystem::build(&p, 0.01, variant).unwrap();
        let norm = NormMatrix::build(&p, 0.01, kind).unwrap();
        let c = inf_sup_constant(&sys.op, &norm).unwrap();
        let (g, s) = gamma_by_pencil(&sys.matrix().to_dense(), &norm.matrix.to_dense());
        assert_relative_eq!(c.gamma, g, max_relative = 1e-6);
        assert_relative_eq!(c.varsigma, s, max_relative = 1e-8);
        assert!(c.gamma > 0.0 && c.gamma <= c.varsigma);
    }
}

#[test]
fn norm_matrices_have_expected_blocks() {
    let p = mandel(2, 0.0, 1.0);
    let c = p.blocks.counts;
    let d = NormMatrix::build(&p, 0.1, NormKind::D).unwrap();
    assert_eq!(d.blocks, vec![c.bubble + c.linear, c.pressure, c.flux]);
    let de = NormMatrix::build(&p, 0.1, NormKind::DE).unwrap();
    assert_eq!(de.blocks, vec![c.linear, c.pressure, c.flux]);
    let dt = NormMatrix::build(&p, 0.1, NormKind::DTilde).unwrap();
    assert_eq!(dt.blocks, vec![c.bubble, c.linear, c.pressure, c.flux]);
    assert!(d.matrix.asymmetry() < 1e-14);
}

#[test]
fn spectral_interval_of_diagonal_pencil() {
    let a = SparseMatrix::from_diagonal(&[1.0, 6.0, 2.0]);
    let b = SparseMatrix::from_diagonal(&[2.0, 2.0, 1.0]);
    let (lo, hi) = spectral_interval(&a, &b).unwrap();
    assert_relative_eq!(lo, 0.5, epsilon = 1e-14);
    assert_relative_eq!(hi, 3.0, epsilon = 1e-14);
}

#[test]
fn fov_of_known_operator() {
    // G = [[1, 1], [0, 1]] in the Euclidean inner product:
    // sym part eigenvalues 1 ± 1/2, norm (1 + √5)/2.
    let g = DenseMatrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
    let b = fov_bounds(&g, &DenseMatrix::identity(2)).unwrap();
    assert_relative_eq!(b.sigma, 0.5, epsilon = 1e-14);
    assert_relative_eq!(b.upsilon, (1.0 + 5f64.sqrt()) / 2.0, epsilon = 1e-14);
    assert_relative_eq!(b.envelope(2), (1.0 - b.sigma.powi(2) / b.upsilon.powi(2)).powi(2), epsilon = 1e-15);
    assert_eq!(b.first_violation(&[1.0, 0.1]), None);
    assert_eq!(b.first_violation(&[1.0, 0.99]), Some(1));
}

#[test]
fn fov_envelope_holds_for_exact_preconditioners() {
    let p = mandel(2, 0.2, 1e-6);
    for variant in [Variant::Full, Variant::Eliminated] {
        let sys = BiotSystem::build(&p, 0.01, variant).unwrap();
        for family in [Family::Diagonal, Family::Lower, Family::Upper] {
            let f = fov_check(&sys, family).unwrap();
            assert!(f.bounds.sigma > 0.0, "{variant:?} {family:?}: Σ = {}", f.bounds.sigma);
            assert!(f.bounds.upsilon >= f.bounds.sigma);
            assert_eq!(f.violation, None, "{variant:?} {family:?}");
        }
    }
}

#[test]
fn deviation_of_scaled_exact_inverse() {
    let p = mandel(2, 0.0, 1.0);
    let sys = BiotSystem::full(&p, 0.1).unwrap();
    let wb = build_weighted_blocks(&sys).unwrap();
    let exact = SubSolver::new(&wb.a_u, SubSolverKind::Direct).unwrap();
    struct Scaled<'a>(&'a SubSolver, f64);
    impl LinearOperator for Scaled<'_> {
        fn nrows(&self) -> usize {
            self.0.nrows()
        }
        fn ncols(&self) -> usize {
            self.0.ncols()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            self.0.apply(x, y);
            y.iter_mut().for_each(|v| *v *= self.1);
        }
    }
    assert!(equivalence_deviation(&exact, &wb.a_u).unwrap() < 1e-10);
    assert_relative_eq!(operator_deviation(&Scaled(&exact, 0.8), &wb.a_u).unwrap(), 0.2, epsilon = 1e-9);
}

#[test]
fn amg_deviation_is_a_contraction_and_krylov_is_rejected() {
    let p = mandel(4, 0.2, 1e-6);
    let sys = BiotSystem::eliminated(&p, 0.01).unwrap();
    let wb = build_weighted_blocks(&sys).unwrap();
    let amg = SubSolver::new(&wb.a_u, SubSolverKind::AmgVcycle(AmgOptions::default().with_block_size(2))).unwrap();
    let rho = equivalence_deviation(&amg, &wb.a_u).unwrap();
    assert!(rho > 0.0 && rho < 1.0, "{rho}");
    let krylov = SubSolver::new(&wb.a_u, SubSolverKind::krylov_amg(AmgOptions::default())).unwrap();
    assert!(matches!(equivalence_deviation(&krylov, &wb.a_u), Err(BiotError::Nonlinear(_))));
}

#[test]
fn inequalities_and_structure_hold_on_small_meshes() {
    for (nu, k, tau) in [(0.0, 1.0, 0.1), (0.4, 1e-6, 1e-4), (0.49, 1e-10, 0.01)] {
        let p = mandel(2, nu, k);
        let rep = verify_inequalities(&p, tau).unwrap();
        assert!(rep.all_pass(), "ν={nu} k={k}: {:?}", rep.failures());
        let diag = BiotSystem::diag_bubble(&p, tau).unwrap();
        assert!(lsl_decomposition_check(&diag).unwrap().pass(1e-11));
        assert!(schur_complement_check(&diag).unwrap() < 1e-12);
    }
    let full = BiotSystem::full(&mandel(1, 0.0, 1.0), 0.1).unwrap();
    assert!(lsl_decomposition_check(&full).is_err());
}
