//! Dense checks of the discrete stability constants at desk scale.
//!
//! Covers inf-sup and continuity constants in the weighted norms, spectral
//! intervals of SPD pencils, field-of-values bounds of the block
//! preconditioners, equivalence deviations of sub-solvers, the chain of
//! spectral inequalities behind the robustness estimates, and the block
//! factorization linking the diagonal-bubble and eliminated systems.

use nalgebra::DMatrix;

use crate::bench::problems::{build_problem, ProblemParams};
use crate::biot::{bubble_diagonal, BiotProblem, BiotSystem, Variant};
use crate::error::{check_dim, BiotError, Result};
use crate::krylov::{fgmres, GmresOptions};
use crate::la::dense::DENSE_LIMIT;
use crate::la::{dense_sym_eig, operator_to_dense, BlockLayout, BlockOperator, DenseMatrix, LinearOperator, SparseMatrix};
use crate::mesh::ProblemKind;
use crate::precond::{build_weighted_blocks, BlockPreconditioner, Family, SubSolver};

/// Singular values below this fraction of the largest count as zero.
pub const SINGULAR_CUTOFF: f64 = 1e-10;

/// Relative slack accepted by [`verify_inequalities`].
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// Largest sub-solver deviation for which the triangular preconditioners
/// stay field-of-values equivalent.
pub const DEVIATION_LIMIT: f64 = 0.2228;

/// Largest deviation `β` for the eliminated-system triangular estimates.
pub const DEVIATION_LIMIT_BETA: f64 = 0.1291;

fn check_limit(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        return Err(BiotError::TooLarge {
            size: n,
            limit: DENSE_LIMIT,
        });
    }
    Ok(())
}

fn dense(a: &SparseMatrix) -> DenseMatrix {
    operator_to_dense(a)
}

fn block_diagonal(blocks: &[SparseMatrix]) -> Result<SparseMatrix> {
    let sizes: Vec<usize> = blocks.iter().map(|b| b.nrows()).collect();
    let mut op = BlockOperator::square(BlockLayout::new(&sizes));
    for (i, b) in blocks.iter().enumerate() {
        op.set(i, i, b.clone())?;
    }
    Ok(op.to_sparse())
}

/// Lower Cholesky factor of a symmetric positive definite dense matrix.
fn cholesky_lower(w: &DenseMatrix) -> Result<DMatrix<f64>> {
    let m = w.to_nalgebra();
    let m = (&m + m.transpose()) * 0.5;
    m.cholesky().map(|c| c.l()).ok_or(BiotError::NotPositiveDefinite)
}

/// `Lᵀ G L⁻ᵀ`: the matrix of `G` in the inner product `W = L Lᵀ`.
fn in_inner_product(l: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let y = l
        .solve_lower_triangular(&g.transpose())
        .ok_or(BiotError::NotPositiveDefinite)?
        .transpose();
    Ok(l.transpose() * y)
}

fn max_singular_value(m: DMatrix<f64>) -> f64 {
    m.singular_values().iter().fold(0.0, |a, &b| a.max(b))
}

fn min_sym_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    nalgebra::SymmetricEigen::new(s)
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}

/// Which weighted block-diagonal norm matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// `blockdiag([D_bb A_bl; A_blᵀ A_ll], c_p⁻¹M_p, τM_w + τ²c_pA_w)` on
    /// `(u_b, u_l, p, w)`.
    D,
    /// `blockdiag(A_uᴱ, A_p^{E*}, τM_w + τ²c_pA_w)` on `(u_l, p, w)`.
    DE,
    /// `blockdiag(D_bb, A_uᴱ, A_p^{E*}, τM_w + τ²c_pA_w)` on
    /// `(u_b, u_l, p, w)`.
    DTilde,
}

/// An assembled weighted norm matrix.
#[derive(Debug, Clone)]
pub struct NormMatrix {
    pub kind: NormKind,
    pub matrix: SparseMatrix,
    /// Sizes of the diagonal blocks.
    pub blocks: Vec<usize>,
}

impl NormMatrix {
    pub fn build(problem: &BiotProblem, tau: f64, kind: NormKind) -> Result<Self> {
        let blocks = match kind {
            NormKind::D => {
                let wb = build_weighted_blocks(&BiotSystem::diag_bubble(problem, tau)?)?;
                vec![wb.a_u, wb.a_p, wb.a_w]
            }
            NormKind::DE => {
                let wb = build_weighted_blocks(&BiotSystem::eliminated(problem, tau)?)?;
                vec![wb.a_u, wb.a_p, wb.a_w]
            }
            NormKind::DTilde => {
                let d = bubble_diagonal(&problem.blocks.a_bb, problem.dim)?;
                let wb = build_weighted_blocks(&BiotSystem::eliminated(problem, tau)?)?;
                vec![SparseMatrix::from_diagonal(&d), wb.a_u, wb.a_p, wb.a_w]
            }
        };
        Ok(Self {
            kind,
            blocks: blocks.iter().map(|b| b.nrows()).collect(),
            matrix: block_diagonal(&blocks)?,
        })
    }

    /// `𝒟` for full and diagonal-bubble systems, `𝒟ᴱ` for eliminated ones.
    pub fn for_system(sys: &BiotSystem) -> Result<Self> {
        let kind = match sys.variant {
            Variant::Eliminated => NormKind::DE,
            _ => NormKind::D,
        };
        Self::build(&sys.problem(), sys.tau, kind)
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Inf-sup and continuity constants of a system in a norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfSup {
    pub gamma: f64,
    pub varsigma: f64,
}

/// Smallest positive and largest singular value of `L⁻¹ A L⁻ᵀ` where
/// `L Lᵀ` is the norm matrix.
pub fn inf_sup_constant<A: LinearOperator + ?Sized>(a: &A, norm: &NormMatrix) -> Result<InfSup> {
    let n = norm.size();
    check_dim("operator rows", n, a.nrows())?;
    check_dim("operator columns", n, a.ncols())?;
    check_limit(n)?;
    let l = cholesky_lower(&dense(&norm.matrix))?;
    let am = operator_to_dense(a).to_nalgebra();
    let x = l.solve_lower_triangular(&am).ok_or(BiotError::NotPositiveDefinite)?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or(BiotError::NotPositiveDefinite)?;
    let sv = c.singular_values();
    let varsigma = sv.iter().fold(0.0, |a: f64, &b| a.max(b));
    let gamma = sv
        .iter()
        .filter(|&&s| s > SINGULAR_CUTOFF * varsigma)
        .fold(f64::INFINITY, |a, &b| a.min(b));
    Ok(InfSup { gamma, varsigma })
}

/// Extreme eigenvalues of the pencil `(A, B)`, `B` SPD.
pub fn spectral_interval(a: &SparseMatrix, b: &SparseMatrix) -> Result<(f64, f64)> {
    pencil_extremes(&dense(a), &dense(b))
}

fn pencil_extremes(a: &DenseMatrix, b: &DenseMatrix) -> Result<(f64, f64)> {
    check_limit(a.nrows())?;
    let e = dense_sym_eig(&a.symmetric_part(), Some(&b.symmetric_part()), false)?;
    match (e.values.first(), e.values.last()) {
        (Some(&lo), Some(&hi)) => Ok((lo, hi)),
        _ => Err(BiotError::InvalidParameter("empty pencil".into())),
    }
}

/// Field-of-values bounds of an operator in an inner product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FovBounds {
    /// Lower bound of `(Gx, x)_W / (x, x)_W`.
    pub sigma: f64,
    /// Upper bound of `‖Gx‖_W / ‖x‖_W`.
    pub upsilon: f64,
}

impl FovBounds {
    /// Residual envelope `(1 - Σ²/Υ²)^m`.
    pub fn envelope(&self, m: usize) -> f64 {
        let r = self.sigma / self.upsilon;
        (1.0 - r * r).max(0.0).powi(m as i32)
    }

    /// First iteration whose relative residual exceeds the envelope.
    pub fn first_violation(&self, history: &[f64]) -> Option<usize> {
        history
            .iter()
            .enumerate()
            .position(|(m, &r)| r > self.envelope(m) * (1.0 + 1e-12))
    }
}

/// `Σ = λ_min(sym(R G R⁻¹))`, `Υ = ‖R G R⁻¹‖₂` with `RᵀR = W`.
pub fn fov_bounds(g: &DenseMatrix, w: &DenseMatrix) -> Result<FovBounds> {
    check_dim("operator (square)", g.nrows(), g.ncols())?;
    check_dim("inner product size", g.nrows(), w.nrows())?;
    check_limit(g.nrows())?;
    let l = cholesky_lower(w)?;
    let gh = in_inner_product(&l, &g.to_nalgebra())?;
    Ok(FovBounds {
        sigma: min_sym_eigenvalue(&gh),
        upsilon: max_singular_value(gh),
    })
}

/// Field-of-values bounds of a block preconditioner on its system.
///
/// Lower and diagonal preconditioners act from the left: `G = B A` in the
/// inner product of the weighted block diagonal `B_D⁻¹`. Upper ones act from
/// the right: `G = A B` in the inner product `B_D`.
pub fn preconditioner_fov(sys: &BiotSystem, prec: &BlockPreconditioner) -> Result<FovBounds> {
    if !prec.is_linear() {
        return Err(BiotError::Nonlinear("field of values needs a linear preconditioner"));
    }
    check_dim("preconditioner size", sys.size(), prec.size())?;
    check_limit(sys.size())?;
    let a = operator_to_dense(&sys.op);
    let p = operator_to_dense(prec);
    let wb = build_weighted_blocks(sys)?;
    let d = dense(&block_diagonal(&[wb.a_u, wb.a_p, wb.a_w])?);
    match prec.family {
        Family::Diagonal | Family::Lower => fov_bounds(&p.matmul(&a)?, &d),
        Family::Upper => fov_bounds(&a.matmul(&p)?, &d.inverse()?.symmetric_part()),
    }
}

/// Bounds of an exact preconditioner together with an observed FGMRES
/// residual history on the benchmark right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct FovCheck {
    pub bounds: FovBounds,
    pub history: Vec<f64>,
    /// First iteration above the envelope, if any.
    pub violation: Option<usize>,
}

/// Computes [`preconditioner_fov`] for the exact preconditioner of `family`
/// and checks one FGMRES solve (tolerance 1e-8) against the envelope.
pub fn fov_check(sys: &BiotSystem, family: Family) -> Result<FovCheck> {
    let prec = BlockPreconditioner::build(sys, family, false)?;
    let bounds = preconditioner_fov(sys, &prec)?;
    let b = sys.rhs(&sys.problem().zero_state())?;
    let (_, rep) = fgmres(&sys.op, &b, &prec, &GmresOptions::outer())?;
    Ok(FovCheck {
        violation: bounds.first_violation(&rep.history),
        history: rep.history,
        bounds,
    })
}

/// `‖I - S A‖_A` for a linear operator `S`.
pub fn operator_deviation<S: LinearOperator + ?Sized>(s: &S, a: &SparseMatrix) -> Result<f64> {
    check_dim("sub-solver rows", a.nrows(), s.nrows())?;
    check_dim("sub-solver columns", a.ncols(), s.ncols())?;
    check_limit(a.nrows())?;
    let ad = dense(a);
    let sd = operator_to_dense(s);
    let e = DenseMatrix::identity(a.nrows()).add(1.0, &sd.matmul(&ad)?, -1.0)?;
    let l = cholesky_lower(&ad)?;
    Ok(max_singular_value(in_inner_product(&l, &e.to_nalgebra())?))
}

/// `‖I - S A‖_A` for a linear sub-solver; nonlinear ones are rejected.
pub fn equivalence_deviation(s: &SubSolver, a: &SparseMatrix) -> Result<f64> {
    if !s.is_linear() {
        return Err(BiotError::Nonlinear("equivalence deviation needs a linear sub-solver"));
    }
    operator_deviation(s, a)
}

/// `‖I - S A‖_A` with `S` frozen as its action on unit vectors, also for
/// Krylov-wrapped sub-solvers.
pub fn frozen_deviation(s: &SubSolver, a: &SparseMatrix) -> Result<f64> {
    operator_deviation(s, a)
}

/// Whether a check bounds its measured value from above or below.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Upper,
    Lower,
    /// Strictly positive.
    Positive,
}

/// One spectral inequality evaluated on a discrete system.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub kind: BoundKind,
    /// Margin relative to `|bound|` (absolute for a zero bound); negative
    /// when violated.
    pub slack: f64,
    pub pass: bool,
}

impl InequalityCheck {
    fn new(name: &'static str, value: f64, bound: f64, kind: BoundKind) -> Self {
        let scale = if bound != 0.0 { bound.abs() } else { 1.0 };
        let slack = match kind {
            BoundKind::Upper => (bound - value) / scale,
            BoundKind::Lower | BoundKind::Positive => (value - bound) / scale,
        };
        let pass = match kind {
            BoundKind::Positive => value > 0.0,
            _ => slack >= -INEQUALITY_SLACK,
        };
        Self {
            name,
            value,
            bound,
            kind,
            slack,
            pass,
        }
    }
}

/// Measured constants and the inequality checks for one system.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub checks: Vec<InequalityCheck>,
    /// `ζ² = λ + 2μ/d`.
    pub zeta_sq: f64,
    /// `η² = λ_max(A_uᴰ, A_u)`.
    pub eta_sq: f64,
    /// `γ_B² = ζ² λ_min(B_u A_u⁻¹ B_uᵀ, M_p)`.
    pub gamma_b_sq: f64,
}

impl InequalityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&InequalityCheck> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn worst_slack(&self) -> f64 {
        self.checks.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min)
    }
}

fn inverse_diagonal(m: &SparseMatrix) -> Vec<f64> {
    m.diagonal().iter().map(|v| 1.0 / v).collect()
}

/// `X D⁻¹ Xᵀ` for a diagonal `D`.
fn weighted_gram(x: &DenseMatrix, d_inv: &[f64]) -> Result<DenseMatrix> {
    let mut xd = x.clone();
    for i in 0..xd.nrows() {
        for (j, w) in d_inv.iter().enumerate() {
            xd[(i, j)] *= w;
        }
    }
    xd.matmul(&x.transpose())
}

/// Evaluates the chain of spectral inequalities behind the stability and
/// preconditioner estimates on the full, diagonal-bubble and eliminated
/// systems built from `problem` at time step `tau`.
///
/// Failures are reported in the result, not returned as errors.
pub fn verify_inequalities(problem: &BiotProblem, tau: f64) -> Result<InequalityReport> {
    let full = BiotSystem::full(problem, tau)?;
    check_limit(full.size())?;
    let diag = BiotSystem::diag_bubble(problem, tau)?;
    let elim = BiotSystem::eliminated(problem, tau)?;
    let b = &problem.blocks;
    let nb = b.counts.bubble;
    let zeta_sq = problem.derived.zeta * problem.derived.zeta;
    let inv_zeta_sq = 1.0 / zeta_sq;
    let alpha = problem.params.alpha;

    let d = bubble_diagonal(&b.a_bb, problem.dim)?;
    let d_inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    let mp_inv = inverse_diagonal(&b.m_p);
    let m_p = dense(&b.m_p);

    let a_u = dense(&full.fields.a_u);
    let a_u_d = dense(&diag.fields.a_u);
    let b_u = dense(&full.fields.b_u);
    let b_b = dense(&b.b_b);
    let a_u_e = dense(&elim.fields.a_u);
    let b_u_e = dense(&elim.fields.b_u);
    let a_p_e = dense(&elim.fields.a_pp);
    let a_p_star = dense(&build_weighted_blocks(&elim)?.a_p);
    let d_bb = DenseMatrix::from_diagonal(&d);

    let mut checks = Vec::new();

    let (_, v) = pencil_extremes(&weighted_gram(&b_u.transpose(), &mp_inv)?, &a_u)?;
    checks.push(InequalityCheck::new("divergence_bound", v, inv_zeta_sq, BoundKind::Upper));

    let (_, v) = pencil_extremes(&weighted_gram(&b_b.transpose(), &mp_inv)?, &d_bb)?;
    checks.push(InequalityCheck::new("bubble_divergence_bound", v, inv_zeta_sq, BoundKind::Upper));

    let (lo, hi) = pencil_extremes(&dense(&b.a_bb), &d_bb)?;
    checks.push(InequalityCheck::new("bubble_diagonal_positive", lo, 0.0, BoundKind::Positive));
    checks.push(InequalityCheck::new("bubble_diagonal_upper", hi, 1.0, BoundKind::Upper));

    let (lo, hi) = pencil_extremes(&a_u, &a_u_d)?;
    checks.push(InequalityCheck::new("diagonal_bubble_equivalence", hi, 1.0, BoundKind::Upper));
    let eta_sq = 1.0 / lo;

    let (g0, _) = pencil_extremes(&b_u.matmul(&a_u.inverse()?)?.matmul(&b_u.transpose())?, &m_p)?;
    let gamma_b_sq = zeta_sq * g0;
    let lower = gamma_b_sq / (eta_sq * zeta_sq);
    let s_d = b_u.matmul(&a_u_d.inverse()?)?.matmul(&b_u.transpose())?;
    let (v, _) = pencil_extremes(&s_d, &m_p)?;
    checks.push(InequalityCheck::new("divergence_lower_diagonal", v, lower, BoundKind::Lower));

    let s_e = b_u_e
        .matmul(&a_u_e.inverse()?)?
        .matmul(&b_u_e.transpose())?
        .add(1.0, &weighted_gram(&b_b, &d_inv)?, 1.0)?;
    let (v, _) = pencil_extremes(&s_e, &m_p)?;
    checks.push(InequalityCheck::new("divergence_lower_eliminated", v, lower, BoundKind::Lower));

    let (v, _) = pencil_extremes(&a_p_star, &m_p.scaled(1.0 / problem.derived.c_p))?;
    checks.push(InequalityCheck::new("pressure_weight_over_mass", v, 1.0, BoundKind::Lower));

    let (v, _) = pencil_extremes(&a_p_star, &a_p_e)?;
    checks.push(InequalityCheck::new("pressure_weight_over_schur", v, 1.0, BoundKind::Lower));

    let (_, v) = pencil_extremes(&weighted_gram(&b_u_e.transpose(), &mp_inv)?, &a_u_e)?;
    checks.push(InequalityCheck::new("eliminated_divergence_bound", v, inv_zeta_sq, BoundKind::Upper));

    let dn = dense(&NormMatrix::build(problem, tau, NormKind::D)?.matrix);
    let dt = dense(&NormMatrix::build(problem, tau, NormKind::DTilde)?.matrix);
    for (sign, lo_name, hi_name) in [
        (1.0, "factor_norm_lower", "factor_norm_upper"),
        (-1.0, "factor_tilde_norm_lower", "factor_tilde_norm_upper"),
    ] {
        let linv = factor_inverse(&diag, &d_inv, sign * alpha, nb)?;
        let t = linv.matmul(&dn)?.matmul(&linv.transpose())?;
        let (lo, hi) = pencil_extremes(&t, &dt)?;
        checks.push(InequalityCheck::new(lo_name, lo, 0.25, BoundKind::Lower));
        checks.push(InequalityCheck::new(hi_name, hi, 2.0, BoundKind::Upper));
    }

    Ok(InequalityReport {
        checks,
        zeta_sq,
        eta_sq,
        gamma_b_sq,
    })
}

/// Identity except for the first block column `(I, -A_blᵀD⁻¹, cB_bD⁻¹, 0)`
/// on `(u_b, u_l, p, w)`.
fn factor_inverse(diag: &BiotSystem, d_inv: &[f64], c: f64, nb: usize) -> Result<DenseMatrix> {
    factor_with(diag, d_inv, -1.0, c, nb)
}

/// Identity except for the first block column `(I, s A_blᵀD⁻¹, c B_bD⁻¹, 0)`.
fn factor_with(diag: &BiotSystem, d_inv: &[f64], s: f64, c: f64, nb: usize) -> Result<DenseMatrix> {
    let blocks = diag.assembled();
    let nl = blocks.counts.linear;
    let n = diag.size();
    let mut l = DenseMatrix::identity(n);
    let a_lb = dense(&blocks.a_bl.transpose());
    let b_b = dense(&blocks.b_b);
    for j in 0..nb {
        for i in 0..nl {
            l[(nb + i, j)] = s * a_lb[(i, j)] * d_inv[j];
        }
        for i in 0..b_b.nrows() {
            l[(nb + nl + i, j)] = c * b_b[(i, j)] * d_inv[j];
        }
    }
    Ok(l)
}

fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    Ok(a.add(1.0, b, -1.0)?.max_abs())
}

/// Outcome of the block factorization check.
#[derive(Debug, Clone, PartialEq)]
pub struct LslReport {
    /// `max|𝒜ᴰ - L 𝒮 L̃ᵀ| / max|𝒜ᴰ|` with `𝒮 = blockdiag(D_bb, 𝒜ᴱ)`.
    pub identity_error: f64,
    /// `max|L⁻¹ 𝒜ᴰ L̃⁻ᵀ - 𝒮| / max|𝒜ᴰ|`.
    pub submatrix_error: f64,
    /// The leading block of `L⁻¹ 𝒜ᴰ L̃⁻ᵀ` equals `D_bb` bit for bit.
    pub leading_block_exact: bool,
}

impl LslReport {
    pub fn pass(&self, tol: f64) -> bool {
        self.identity_error < tol && self.submatrix_error < tol && self.leading_block_exact
    }
}

fn require_diag_bubble(sys: &BiotSystem) -> Result<&[f64]> {
    if sys.variant != Variant::DiagBubble {
        return Err(BiotError::InvalidParameter(format!(
            "expected the diagonal-bubble system, got {}",
            sys.variant.name()
        )));
    }
    Ok(sys.d_bb.as_deref().expect("diagonal-bubble system keeps D_bb"))
}

/// Checks `𝒜ᴰ = L 𝒮 L̃ᵀ` with `𝒮 = blockdiag(D_bb, 𝒜ᴱ)`, where `L` and `L̃`
/// are unit block lower triangular with first block columns
/// `(I, A_blᵀD⁻¹, ∓αB_bD⁻¹, 0)`.
pub fn lsl_decomposition_check(diag: &BiotSystem) -> Result<LslReport> {
    let d = require_diag_bubble(diag)?;
    check_limit(diag.size())?;
    let nb = d.len();
    let d_inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    let alpha = diag.params.alpha;
    let elim = BiotSystem::eliminated(&diag.problem(), diag.tau)?;

    let a = dense(&diag.matrix());
    let mut s = DenseMatrix::zeros(a.nrows(), a.ncols());
    for (i, &v) in d.iter().enumerate() {
        s[(i, i)] = v;
    }
    let ae = dense(&elim.matrix());
    for i in 0..ae.nrows() {
        for j in 0..ae.ncols() {
            s[(nb + i, nb + j)] = ae[(i, j)];
        }
    }
    let l = factor_with(diag, &d_inv, 1.0, -alpha, nb)?;
    let lt = factor_with(diag, &d_inv, 1.0, alpha, nb)?;
    let l_inv = factor_with(diag, &d_inv, -1.0, alpha, nb)?;
    let lt_inv = factor_with(diag, &d_inv, -1.0, -alpha, nb)?;

    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let rebuilt = l.matmul(&s)?.matmul(&lt.transpose())?;
    let reduced = l_inv.matmul(&a)?.matmul(&lt_inv.transpose())?;
    let leading_block_exact = (0..nb).all(|i| (0..nb).all(|j| reduced[(i, j)] == s[(i, j)]));
    Ok(LslReport {
        identity_error: max_abs_diff(&a, &rebuilt)? / scale,
        submatrix_error: max_abs_diff(&reduced, &s)? / scale,
        leading_block_exact,
    })
}

/// `max|𝒜ᴱ - (𝒜ᴰ₂₂ - 𝒜ᴰ₂₁ D_bb⁻¹ 𝒜ᴰ₁₂)| / max|𝒜ᴰ|` for the bubble block
/// of the diagonal-bubble system.
pub fn schur_complement_check(diag: &BiotSystem) -> Result<f64> {
    let d = require_diag_bubble(diag)?;
    check_limit(diag.size())?;
    let nb = d.len();
    let elim = BiotSystem::eliminated(&diag.problem(), diag.tau)?;
    let a = dense(&diag.matrix());
    let ae = dense(&elim.matrix());
    let n = a.nrows() - nb;
    check_dim("eliminated system", n, ae.nrows())?;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut v = a[(nb + i, nb + j)];
            for k in 0..nb {
                let c = a[(nb + i, k)];
                if c != 0.0 {
                    v -= c * a[(k, nb + j)] / d[k];
                }
            }
            worst = worst.max((v - ae[(i, j)]).abs());
        }
    }
    Ok(worst / a.max_abs().max(f64::MIN_POSITIVE))
}

/// Header of the constants CSV.
pub const CONSTANTS_HEADER: &str =
    "kind,problem,variant,h,tau,nu,k,gamma,varsigma,lambda_min,lambda_max,sigma,upsilon";

/// Stability constants of one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsReport {
    pub problem: ProblemKind,
    pub variant: Variant,
    pub n: usize,
    pub tau: f64,
    pub params: ProblemParams,
    /// `(𝒜ᴰ, 𝒟)` or `(𝒜ᴱ, 𝒟ᴱ)`.
    pub inf_sup: InfSup,
    /// Spectral interval of `(A_bb, D_bb)`.
    pub interval: (f64, f64),
    /// Exact lower triangular preconditioner.
    pub fov: FovBounds,
}

impl ConstantsReport {
    pub fn csv_row(&self) -> String {
        format!(
            "analysis,{},{},{},{},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
            self.problem.name(),
            self.variant.name(),
            1.0 / self.n as f64,
            self.tau,
            self.params.nu,
            self.params.k,
            self.inf_sup.gamma,
            self.inf_sup.varsigma,
            self.interval.0,
            self.interval.1,
            self.fov.sigma,
            self.fov.upsilon,
        )
    }
}

/// Inf-sup constants, bubble spectral interval and lower triangular FOV
/// bounds for the diagonal-bubble (`elim = false`) or eliminated system.
pub fn constants_report(
    problem: ProblemKind,
    n: usize,
    tau: f64,
    params: ProblemParams,
    elim: bool,
) -> Result<ConstantsReport> {
    let (_, bp) = build_problem(problem, n, params)?;
    let variant = if elim { Variant::Eliminated } else { Variant::DiagBubble };
    let sys = BiotSystem::build(&bp, tau, variant)?;
    let norm = NormMatrix::for_system(&sys)?;
    let inf_sup = inf_sup_constant(&sys.op, &norm)?;
    let d = bubble_diagonal(&bp.blocks.a_bb, bp.dim)?;
    let interval = spectral_interval(&bp.blocks.a_bb, &SparseMatrix::from_diagonal(&d))?;
    let prec = BlockPreconditioner::build(&sys, Family::Lower, false)?;
    let fov = preconditioner_fov(&sys, &prec)?;
    Ok(ConstantsReport {
        problem,
        variant,
        n,
        tau,
        params,
        inf_sup,
        interval,
        fov,
    })
}
