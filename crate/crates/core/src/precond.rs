//! Block diagonal, lower and upper triangular preconditioners over the
//! `(u, p, w)` field partition, with exact or approximate diagonal solves.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::amg::{AmgHierarchy, AmgOptions, Cycle};
use crate::biot::{BiotSystem, Variant};
use crate::error::{check_dim, BiotError, Result};
use crate::krylov::{fgmres, gmres, pcg, GmresOptions};
use crate::la::{sparse_triple_product, Factorization, LinearOperator, SparseMatrix};

/// Block structure of a preconditioner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Diagonal,
    Lower,
    Upper,
}

impl Family {
    pub fn letter(self) -> char {
        match self {
            Family::Diagonal => 'd',
            Family::Lower => 'l',
            Family::Upper => 'u',
        }
    }
}

/// A preconditioner id as used on the command line: `bd`, `bl`, `bu` for the
/// full (or diagonal-bubble) system and `bde`, `ble`, `bue` for the
/// eliminated system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecondId {
    pub family: Family,
    pub eliminated: bool,
}

impl PrecondId {
    pub fn name(self) -> String {
        format!("b{}{}", self.family.letter(), if self.eliminated { "e" } else { "" })
    }

    /// The system variant this id is meant for (diagonal-bubble systems
    /// also accept the non-eliminated ids).
    pub fn default_variant(self) -> Variant {
        if self.eliminated {
            Variant::Eliminated
        } else {
            Variant::Full
        }
    }
}

impl std::str::FromStr for PrecondId {
    type Err = BiotError;

    fn from_str(s: &str) -> Result<Self> {
        let family = match s.get(..2) {
            Some("bd") => Family::Diagonal,
            Some("bl") => Family::Lower,
            Some("bu") => Family::Upper,
            _ => return Err(BiotError::InvalidParameter(format!("unknown preconditioner '{s}'"))),
        };
        let eliminated = match &s[2..] {
            "" => false,
            "e" => true,
            _ => return Err(BiotError::InvalidParameter(format!("unknown preconditioner '{s}'"))),
        };
        Ok(Self { family, eliminated })
    }
}

/// The SPD matrices whose inverses the diagonal blocks approximate.
#[derive(Debug, Clone)]
pub struct WeightedBlocks {
    /// `A_u` (or its diagonal-bubble / eliminated counterpart).
    pub a_u: SparseMatrix,
    /// `c_p⁻¹ M_p`, or `c_p⁻¹ M_p + α² B_b D_bb⁻¹ B_bᵀ` when eliminated.
    pub a_p: SparseMatrix,
    /// `τ M_w + τ² c_p B_wᵀ M_p⁻¹ B_w`.
    pub a_w: SparseMatrix,
}

/// `A_w = B_wᵀ M_p⁻¹ B_w`.
pub fn flux_grad_div(b_w: &SparseMatrix, m_p: &SparseMatrix) -> Result<SparseMatrix> {
    let inv: Vec<f64> = m_p.diagonal().iter().map(|v| 1.0 / v).collect();
    sparse_triple_product(&b_w.transpose(), &inv, b_w)
}

pub fn build_weighted_blocks(sys: &BiotSystem) -> Result<WeightedBlocks> {
    let f = &sys.fields;
    let c_p = sys.derived.c_p;
    let tau = sys.tau;
    let a_p = match sys.variant {
        Variant::Eliminated => {
            // a_pp = M_p/M + α² B_b D⁻¹ B_bᵀ, so add the missing α²/ζ² M_p
            let alpha = sys.params.alpha;
            let zeta = sys.derived.zeta;
            f.a_pp.add(1.0, &f.m_p, alpha * alpha / (zeta * zeta))?
        }
        _ => f.m_p.scaled(1.0 / c_p),
    };
    let a_w = f.m_w.add(tau, &flux_grad_div(&f.b_w, &f.m_p)?, tau * tau * c_p)?;
    Ok(WeightedBlocks {
        a_u: f.a_u.clone(),
        a_p,
        a_w,
    })
}

/// How one diagonal block is inverted.
#[derive(Debug, Clone, PartialEq)]
pub enum SubSolverKind {
    /// Sparse Cholesky.
    Direct,
    /// Exact inverse of a diagonal block.
    DiagonalInverse,
    /// One AMG cycle (V, W or K as set in the options).
    AmgVcycle(AmgOptions),
    /// Flux block only: `(diag(τ M_w) + τ² c_p B_wᵀ M_p⁻¹ B_w)⁻¹` through
    /// the Woodbury identity, with a sparse Cholesky factor of the cell
    /// matrix `(τ² c_p)⁻¹ M_p + B_w diag(τ M_w)⁻¹ B_wᵀ`.
    FluxWoodbury,
    /// GMRES to a relative tolerance, preconditioned by `inner`.
    InnerKrylov {
        tol: f64,
        max_iter: usize,
        inner: Box<SubSolverKind>,
    },
    /// Conjugate gradients to a relative tolerance in the `inner`-weighted
    /// residual norm; `inner` must be symmetric positive definite.
    InnerCg {
        tol: f64,
        max_iter: usize,
        inner: Box<SubSolverKind>,
    },
}

impl SubSolverKind {
    pub fn is_linear(&self) -> bool {
        match self {
            SubSolverKind::InnerKrylov { .. } | SubSolverKind::InnerCg { .. } => false,
            SubSolverKind::AmgVcycle(o) => o.cycle != Cycle::K,
            _ => true,
        }
    }

    /// GMRES(1e-3, 200) around one AMG cycle (flexible for a K-cycle).
    pub fn krylov_amg(amg: AmgOptions) -> Self {
        let o = GmresOptions::inner();
        SubSolverKind::InnerKrylov {
            tol: o.tol,
            max_iter: o.max_iter,
            inner: Box::new(SubSolverKind::AmgVcycle(amg)),
        }
    }
}

/// Pieces of the flux weight `τ M_w + τ² c_p B_wᵀ M_p⁻¹ B_w` used by
/// [`SubSolverKind::FluxWoodbury`].
#[derive(Debug, Clone)]
pub struct FluxSplit {
    /// `τ M_w`.
    pub mass: SparseMatrix,
    pub b_w: SparseMatrix,
    /// Diagonal of `τ² c_p M_p⁻¹`.
    pub weight: Vec<f64>,
}

impl FluxSplit {
    pub fn new(sys: &BiotSystem) -> Self {
        let f = &sys.fields;
        let tau = sys.tau;
        let s = tau * tau * sys.derived.c_p;
        Self {
            mass: f.m_w.scaled(tau),
            b_w: f.b_w.clone(),
            weight: f.m_p.diagonal().iter().map(|v| s / v).collect(),
        }
    }
}

enum Engine {
    Direct(Factorization),
    Diagonal(Vec<f64>),
    Amg(AmgHierarchy),
    Woodbury {
        mass_inv: Vec<f64>,
        b_w: SparseMatrix,
        cells: Factorization,
    },
    Krylov {
        matrix: SparseMatrix,
        inner: Box<SubSolver>,
        opts: GmresOptions,
        cg: bool,
    },
}

/// An approximate inverse of one block.
pub struct SubSolver {
    kind: SubSolverKind,
    engine: Engine,
    n: usize,
    inner_failures: AtomicUsize,
    inner_iterations: AtomicUsize,
    applications: AtomicUsize,
}

impl std::fmt::Debug for SubSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SubSolver")
            .field("kind", &self.kind)
            .field("n", &self.n)
            .finish()
    }
}

impl SubSolver {
    pub fn new(a: &SparseMatrix, kind: SubSolverKind) -> Result<Self> {
        Self::with_flux_split(a, kind, None)
    }

    /// Like [`SubSolver::new`]; `split` is required by
    /// [`SubSolverKind::FluxAuxiliary`] (also when nested in a Krylov solve).
    pub fn with_flux_split(a: &SparseMatrix, kind: SubSolverKind, split: Option<&FluxSplit>) -> Result<Self> {
        check_dim("sub-solver block (square)", a.nrows(), a.ncols())?;
        let engine = match &kind {
            SubSolverKind::Direct => Engine::Direct(Factorization::cholesky(a)?),
            SubSolverKind::DiagonalInverse => {
                if !a.is_diagonal() {
                    return Err(BiotError::InvalidParameter(
                        "diagonal inverse requested for a non-diagonal block".into(),
                    ));
                }
                let d = a.diagonal();
                if let Some(i) = d.iter().position(|&v| v == 0.0) {
                    return Err(BiotError::Singular { pivot: i });
                }
                Engine::Diagonal(d.iter().map(|v| 1.0 / v).collect())
            }
            SubSolverKind::AmgVcycle(opts) => Engine::Amg(AmgHierarchy::setup(a, *opts)?),
            SubSolverKind::FluxWoodbury => {
                let split = split.ok_or_else(|| {
                    BiotError::InvalidParameter("flux Woodbury solver needs the flux splitting".into())
                })?;
                check_dim("flux splitting", a.nrows(), split.mass.nrows())?;
                check_dim("flux splitting", split.b_w.nrows(), split.weight.len())?;
                let mass_inv = invert_positive(&split.mass.diagonal())?;
                let w_inv = SparseMatrix::from_diagonal(&invert_positive(&split.weight)?);
                let cells = sparse_triple_product(&split.b_w, &mass_inv, &split.b_w.transpose())?.add(1.0, &w_inv, 1.0)?;
                Engine::Woodbury {
                    mass_inv,
                    b_w: split.b_w.clone(),
                    cells: Factorization::cholesky(&cells)?,
                }
            }
            SubSolverKind::InnerKrylov { tol, max_iter, inner } | SubSolverKind::InnerCg { tol, max_iter, inner } => {
                Engine::Krylov {
                    matrix: a.clone(),
                    inner: Box::new(SubSolver::with_flux_split(a, (**inner).clone(), split)?),
                    opts: GmresOptions {
                        tol: *tol,
                        max_iter: *max_iter,
                        restart: None,
                    },
                    cg: matches!(kind, SubSolverKind::InnerCg { .. }),
                }
            }
        };
        Ok(Self {
            kind,
            engine,
            n: a.nrows(),
            inner_failures: AtomicUsize::new(0),
            inner_iterations: AtomicUsize::new(0),
            applications: AtomicUsize::new(0),
        })
    }

    pub fn kind(&self) -> &SubSolverKind {
        &self.kind
    }

    pub fn is_linear(&self) -> bool {
        self.kind.is_linear()
    }

    /// Inner Krylov solves that hit their iteration cap.
    pub fn inner_failures(&self) -> usize {
        self.inner_failures.load(Ordering::Relaxed)
    }

    /// Mean inner Krylov iterations per application.
    pub fn mean_inner_iterations(&self) -> f64 {
        let a = self.applications.load(Ordering::Relaxed);
        if a == 0 {
            0.0
        } else {
            self.inner_iterations.load(Ordering::Relaxed) as f64 / a as f64
        }
    }

    fn record(&self, iterations: usize, converged: bool) {
        self.applications.fetch_add(1, Ordering::Relaxed);
        self.inner_iterations.fetch_add(iterations, Ordering::Relaxed);
        if !converged {
            self.inner_failures.fetch_add(1, Ordering::Relaxed);
        }
    }

    pub fn solve(&self, r: &[f64], z: &mut [f64]) {
        match &self.engine {
            Engine::Direct(f) => {
                z.copy_from_slice(r);
                f.solve_in_place(z);
            }
            Engine::Diagonal(inv) => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(inv) {
                    *zi = ri * di;
                }
            }
            Engine::Amg(h) => h.vcycle(r, z),
            Engine::Woodbury { mass_inv, b_w, cells } => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(mass_inv) {
                    *zi = ri * di;
                }
                let mut t = b_w.spmv(z).expect("conforming flux divergence");
                cells.solve_in_place(&mut t);
                let mut c = vec![0.0; z.len()];
                b_w.spmv_transpose_add(1.0, &t, &mut c);
                for ((zi, ci), di) in z.iter_mut().zip(&c).zip(mass_inv) {
                    *zi -= ci * di;
                }
            }
            Engine::Krylov { matrix, inner, opts, cg } => {
                let solver = match (*cg, inner.is_linear()) {
                    (true, _) => pcg,
                    (false, true) => gmres,
                    (false, false) => fgmres,
                };
                let (x, rep) = solver(matrix, r, inner.as_ref(), opts).expect("conforming inner solve");
                self.record(rep.iterations, rep.converged);
                z.copy_from_slice(&x);
            }
        }
    }
}

impl LinearOperator for SubSolver {
    fn nrows(&self) -> usize {
        self.n
    }
    fn ncols(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.solve(x, y)
    }
}

fn invert_positive(d: &[f64]) -> Result<Vec<f64>> {
    d.iter()
        .enumerate()
        .map(|(i, &v)| if v > 0.0 { Ok(1.0 / v) } else { Err(BiotError::Singular { pivot: i }) })
        .collect()
}

/// Choice of the three sub-solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SubSolverChoice {
    pub u: SubSolverKind,
    pub p: SubSolverKind,
    pub w: SubSolverKind,
}

impl SubSolverChoice {
    /// Direct solves everywhere (diagonal pressure weight inverted exactly).
    pub fn exact(sys: &BiotSystem) -> Self {
        let p = if sys.variant == Variant::Eliminated {
            SubSolverKind::Direct
        } else {
            SubSolverKind::DiagonalInverse
        };
        Self {
            u: SubSolverKind::Direct,
            p,
            w: SubSolverKind::Direct,
        }
    }

    /// K-cycle AMG preconditioned GMRES (tol 1e-3) for the displacement and
    /// eliminated pressure blocks, conjugate gradients (tol 1e-3) around
    /// [`SubSolverKind::FluxWoodbury`] for the flux block; the full-system
    /// pressure weight stays an exact diagonal inverse.
    pub fn inexact(sys: &BiotSystem) -> Self {
        let d = sys.dim;
        let bubbles = match sys.variant {
            Variant::Eliminated => 0,
            _ => sys.counts().bubble,
        };
        let u_amg = AmgOptions::default().with_block_size(d).with_scalar_prefix(bubbles).with_cycle(Cycle::K);
        let o = GmresOptions::inner();
        let p = if sys.variant == Variant::Eliminated {
            SubSolverKind::krylov_amg(AmgOptions::default().with_cycle(Cycle::K))
        } else {
            SubSolverKind::DiagonalInverse
        };
        Self {
            u: SubSolverKind::krylov_amg(u_amg),
            p,
            w: SubSolverKind::InnerCg {
                tol: o.tol,
                max_iter: o.max_iter,
                inner: Box::new(SubSolverKind::FluxWoodbury),
            },
        }
    }
}

/// A block preconditioner applied by block substitution.
#[derive(Debug)]
pub struct BlockPreconditioner {
    pub family: Family,
    pub variant: Variant,
    s_u: SubSolver,
    s_p: SubSolver,
    s_w: SubSolver,
    /// `α B_u` (or `α B_uᴱ`).
    alpha_b_u: SparseMatrix,
    /// `τ B_w`.
    tau_b_w: SparseMatrix,
    sizes: [usize; 3],
}

impl BlockPreconditioner {
    pub fn new(sys: &BiotSystem, family: Family, choice: &SubSolverChoice) -> Result<Self> {
        let wb = build_weighted_blocks(sys)?;
        Self::from_weighted(sys, &wb, family, choice)
    }

    /// Exact (`inexact = false`) or hatted preconditioner with the default
    /// sub-solvers.
    pub fn build(sys: &BiotSystem, family: Family, inexact: bool) -> Result<Self> {
        let choice = if inexact {
            SubSolverChoice::inexact(sys)
        } else {
            SubSolverChoice::exact(sys)
        };
        Self::new(sys, family, &choice)
    }

    pub fn from_weighted(
        sys: &BiotSystem,
        wb: &WeightedBlocks,
        family: Family,
        choice: &SubSolverChoice,
    ) -> Result<Self> {
        let s_u = SubSolver::new(&wb.a_u, choice.u.clone())?;
        let s_p = SubSolver::new(&wb.a_p, choice.p.clone())?;
        let s_w = SubSolver::with_flux_split(&wb.a_w, choice.w.clone(), Some(&FluxSplit::new(sys)))?;
        Ok(Self {
            family,
            variant: sys.variant,
            s_u,
            s_p,
            s_w,
            alpha_b_u: sys.fields.b_u.scaled(sys.params.alpha),
            tau_b_w: sys.fields.b_w.scaled(sys.tau),
            sizes: sys.field_sizes(),
        })
    }

    pub fn is_linear(&self) -> bool {
        self.s_u.is_linear() && self.s_p.is_linear() && self.s_w.is_linear()
    }

    pub fn sub_solvers(&self) -> [&SubSolver; 3] {
        [&self.s_u, &self.s_p, &self.s_w]
    }

    pub fn inner_failures(&self) -> usize {
        self.sub_solvers().iter().map(|s| s.inner_failures()).sum()
    }

    pub fn size(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn apply_into(&self, r: &[f64], z: &mut [f64]) {
        let [nu, np, _] = self.sizes;
        let (r_u, rest) = r.split_at(nu);
        let (r_p, r_w) = rest.split_at(np);
        let (z_u, rest) = z.split_at_mut(nu);
        let (z_p, z_w) = rest.split_at_mut(np);
        match self.family {
            Family::Diagonal => {
                self.s_u.solve(r_u, z_u);
                self.s_p.solve(r_p, z_p);
                self.s_w.solve(r_w, z_w);
            }
            Family::Lower => {
                self.s_u.solve(r_u, z_u);
                let mut t = r_p.to_vec();
                self.alpha_b_u.spmv_add(1.0, z_u, &mut t);
                self.s_p.solve(&t, z_p);
                let mut t = r_w.to_vec();
                self.tau_b_w.spmv_transpose_add(-1.0, z_p, &mut t);
                self.s_w.solve(&t, z_w);
            }
            Family::Upper => {
                self.s_w.solve(r_w, z_w);
                let mut t = r_p.to_vec();
                self.tau_b_w.spmv_add(1.0, z_w, &mut t);
                self.s_p.solve(&t, z_p);
                let mut t = r_u.to_vec();
                self.alpha_b_u.spmv_transpose_add(-1.0, z_p, &mut t);
                self.s_u.solve(&t, z_u);
            }
        }
    }
}

impl LinearOperator for BlockPreconditioner {
    fn nrows(&self) -> usize {
        self.size()
    }
    fn ncols(&self) -> usize {
        self.size()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_into(x, y)
    }
}
