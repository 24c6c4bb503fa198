//! Single benchmark solves and their CSV rows.

use std::fmt::Write as _;
use std::time::Instant;

use crate::bench::problems::{build_problem, MandelConfig, ProblemParams};
use crate::biot::{BiotSystem, State, Variant};
use crate::error::{BiotError, Result};
use crate::krylov::{fgmres, GmresOptions};
use crate::la::Factorization;
use crate::mesh::{ProblemKind, SimplicialMesh};
use crate::precond::{BlockPreconditioner, PrecondId};

/// Column order of the benchmark CSV.
pub const CSV_HEADER: &str = "problem,variant,precond,inexact,h,tau,nu,k,k_jump,iters,converged,relres,setup_s,solve_s";

/// One benchmark solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseSpec {
    pub problem: ProblemKind,
    /// Cells per side, `h = 1/n`.
    pub n: usize,
    pub tau: f64,
    pub nu: f64,
    pub k: f64,
    pub k_jump: Option<f64>,
    pub precond: PrecondId,
    pub inexact: bool,
    pub variant: Variant,
    pub tol: f64,
    pub max_iter: usize,
}

impl CaseSpec {
    /// Exact B_L on Mandel with the default solver settings.
    pub fn new(problem: ProblemKind, n: usize, tau: f64, precond: PrecondId) -> Self {
        Self {
            problem,
            n,
            tau,
            nu: 0.0,
            k: 1e-6,
            k_jump: None,
            precond,
            inexact: false,
            variant: precond.default_variant(),
            tol: 1e-8,
            max_iter: 500,
        }
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    pub fn with_k_jump(mut self, k_jump: Option<f64>) -> Self {
        self.k_jump = k_jump;
        self
    }

    pub fn with_inexact(mut self, inexact: bool) -> Self {
        self.inexact = inexact;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(BiotError::InvalidParameter("mesh needs at least one cell".into()));
        }
        let elim = self.variant == Variant::Eliminated;
        if elim != self.precond.eliminated {
            return Err(BiotError::InvalidParameter(format!(
                "preconditioner {} does not match the {} system",
                self.precond.name(),
                self.variant.name()
            )));
        }
        Ok(())
    }

    pub fn params(&self) -> ProblemParams {
        ProblemParams {
            nu: self.nu,
            k: self.k,
            k_jump: self.k_jump,
        }
    }

    pub fn precond_label(&self) -> String {
        self.precond.name()
    }
}

/// Outcome of one benchmark solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub case: CaseSpec,
    pub iterations: usize,
    pub converged: bool,
    pub relres: f64,
    pub history: Vec<f64>,
    pub setup_s: f64,
    pub solve_s: f64,
    pub system_size: usize,
    /// Inner Krylov solves that stopped at their iteration cap.
    pub inner_failures: usize,
    /// Set when the case could not be run.
    pub error: Option<String>,
}

impl SolveReport {
    pub fn failed(case: CaseSpec, err: &BiotError) -> Self {
        Self {
            case,
            iterations: 0,
            converged: false,
            relres: f64::NAN,
            history: Vec::new(),
            setup_s: 0.0,
            solve_s: 0.0,
            system_size: 0,
            inner_failures: 0,
            error: Some(err.to_string()),
        }
    }

    /// The CSV row without the two timing columns.
    pub fn csv_key(&self) -> String {
        let c = &self.case;
        let mut s = String::new();
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{:.3e}",
            c.problem.name(),
            c.variant.name(),
            c.precond_label(),
            c.inexact,
            c.h(),
            c.tau,
            c.nu,
            c.k,
            c.k_jump.map(|v| v.to_string()).unwrap_or_default(),
            self.iterations,
            self.converged,
            self.relres,
        );
        s
    }

    pub fn csv_row(&self) -> String {
        format!("{},{:.6},{:.6}", self.csv_key(), self.setup_s, self.solve_s)
    }
}

/// Assembles, preconditions and solves one backward-Euler step from the
/// zero state.
pub fn run_case(case: &CaseSpec) -> Result<SolveReport> {
    case.validate()?;
    let t0 = Instant::now();
    let (_, problem) = build_problem(case.problem, case.n, case.params())?;
    let sys = BiotSystem::build(&problem, case.tau, case.variant)?;
    let b = sys.rhs(&problem.zero_state())?;
    let prec = BlockPreconditioner::build(&sys, case.precond.family, case.inexact)?;
    let setup_s = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let opts = GmresOptions::outer().with_tol(case.tol).with_max_iter(case.max_iter);
    let (_, rep) = fgmres(&sys.op, &b, &prec, &opts)?;
    let solve_s = t1.elapsed().as_secs_f64();
    Ok(SolveReport {
        case: *case,
        iterations: rep.iterations,
        converged: rep.converged,
        relres: rep.relres,
        history: rep.history,
        setup_s,
        solve_s,
        system_size: sys.size(),
        inner_failures: prec.inner_failures(),
        error: None,
    })
}

/// Backward-Euler time stepping of Mandel's problem with a direct solve per
/// step; returns the mesh and the final state.
pub fn simulate_mandel(
    cfg: &MandelConfig,
    n: usize,
    tau: f64,
    steps: usize,
    variant: Variant,
) -> Result<(SimplicialMesh, State)> {
    let mesh = cfg.mesh(n)?;
    let problem = cfg.problem(&mesh)?;
    let sys = BiotSystem::build(&problem, tau, variant)?;
    let lu = Factorization::lu(&sys.matrix())?;
    let mut state = problem.zero_state();
    for _ in 0..steps {
        let b = sys.rhs(&state)?;
        let x = lu.solve(&b)?;
        state = sys.state_from_solution(&x)?;
    }
    Ok((mesh, state))
}

/// Relative centroid-L² error of a piecewise-constant pressure against
/// Mandel's series at time `t`.
pub fn mandel_pressure_error(mesh: &SimplicialMesh, p: &[f64], t: f64, cfg: &MandelConfig) -> Result<f64> {
    crate::error::check_dim("pressure", mesh.num_elements(), p.len())?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (e, ph) in p.iter().enumerate() {
        let x = mesh.centroid(e)[0];
        let exact = crate::bench::mandel::mandel_pressure(x, t, cfg)?;
        let w = mesh.volume(e);
        num += w * (ph - exact).powi(2);
        den += w * exact * exact;
    }
    Ok((num / den).sqrt())
}
