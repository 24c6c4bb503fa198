//! The three block systems (full, diagonal-bubble, bubble-eliminated), the
//! physical constants and backward-Euler right-hand sides.

use crate::error::{check_dim, BiotError, Result};
use crate::fem::{
    apply_essential_bcs, assemble_all, AssembledBlocks, AssemblyInput, BoundarySpec, Constraints,
};
use crate::la::{sparse_triple_product, BlockLayout, BlockOperator, LinearOperator, SparseMatrix};
use crate::mesh::SimplicialMesh;

/// Material parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub mu: f64,
    pub lambda: f64,
    /// Biot-Willis coefficient.
    pub alpha: f64,
    /// Biot modulus `M`.
    pub biot_modulus: f64,
    /// Fluid viscosity.
    pub mu_f: f64,
    pub body_force: [f64; 3],
    pub fluid_body_force: [f64; 3],
    pub source: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::from_young(1e4, 0.0, false).expect("valid defaults")
    }
}

impl PhysicalParams {
    /// Lamé parameters from Young's modulus and Poisson's ratio, with
    /// `λ = Eν / ((1 - 2ν)(1 + ν))`. The shear modulus is `E / (1 + 2ν)`
    /// unless `standard_shear` selects `E / (2(1 + ν))`.
    pub fn from_young(e: f64, nu: f64, standard_shear: bool) -> Result<Self> {
        if !(e > 0.0) {
            return Err(BiotError::InvalidParameter(format!("Young's modulus must be positive, got {e}")));
        }
        if !(nu < 0.5) || nu <= -1.0 {
            return Err(BiotError::InvalidParameter(format!(
                "Poisson's ratio must lie in (-1, 0.5), got {nu}"
            )));
        }
        let lambda = e * nu / ((1.0 - 2.0 * nu) * (1.0 + nu));
        let mu = if standard_shear {
            e / (2.0 * (1.0 + nu))
        } else {
            e / (1.0 + 2.0 * nu)
        };
        Ok(Self {
            mu,
            lambda,
            alpha: 1.0,
            biot_modulus: 1e6,
            mu_f: 1.0,
            body_force: [0.0; 3],
            fluid_body_force: [0.0; 3],
            source: 0.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(BiotError::InvalidParameter(format!("{what} out of range: {v}")));
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return bad("shear modulus", self.mu);
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad("first Lamé parameter", self.lambda);
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("Biot-Willis coefficient", self.alpha);
        }
        if !(self.biot_modulus > 0.0) {
            return bad("Biot modulus", self.biot_modulus);
        }
        if !(self.mu_f > 0.0) {
            return bad("fluid viscosity", self.mu_f);
        }
        Ok(())
    }
}

/// `ζ = sqrt(λ + 2μ/d)` and `c_p = (α²/ζ² + 1/M)⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub zeta: f64,
    pub c_p: f64,
}

pub fn derived_params(p: &PhysicalParams, dim: usize) -> Result<DerivedParams> {
    if !p.lambda.is_finite() || !p.mu.is_finite() {
        return Err(BiotError::InvalidParameter("Lamé parameters must be finite".into()));
    }
    let zeta = (p.lambda + 2.0 * p.mu / dim as f64).sqrt();
    if !(zeta > 0.0) {
        return Err(BiotError::InvalidParameter("ζ must be positive".into()));
    }
    let c_p = 1.0 / (p.alpha * p.alpha / (zeta * zeta) + 1.0 / p.biot_modulus);
    Ok(DerivedParams { zeta, c_p })
}

/// Piecewise-constant permeability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Permeability {
    Uniform(f64),
    /// `left` for `x < at`, `right` otherwise (by element centroid).
    JumpX { left: f64, right: f64, at: f64 },
}

impl Permeability {
    pub fn field(&self, mesh: &SimplicialMesh) -> Vec<f64> {
        (0..mesh.num_elements())
            .map(|e| match *self {
                Permeability::Uniform(k) => k,
                Permeability::JumpX { left, right, at } => {
                    if mesh.centroid(e)[0] < at {
                        left
                    } else {
                        right
                    }
                }
            })
            .collect()
    }
}

/// Which of the three algebraic systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Full,
    DiagBubble,
    Eliminated,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::DiagBubble => "diag",
            Variant::Eliminated => "elim",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = BiotError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Variant::Full),
            "diag" => Ok(Variant::DiagBubble),
            "elim" | "eliminated" => Ok(Variant::Eliminated),
            other => Err(BiotError::InvalidParameter(format!("unknown variant '{other}'"))),
        }
    }
}

/// Displacement, pressure at the previous time level (displacement ordered
/// bubbles first, then linear dofs).
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
}

/// A discrete Biot problem after assembly and boundary conditions, before the
/// time-step scaling.
#[derive(Debug, Clone)]
pub struct BiotProblem {
    pub dim: usize,
    pub params: PhysicalParams,
    pub derived: DerivedParams,
    pub blocks: AssembledBlocks,
    pub constraints: Constraints,
}

impl BiotProblem {
    pub fn assemble(
        mesh: &SimplicialMesh,
        boundary: &BoundarySpec,
        params: PhysicalParams,
        permeability: &[f64],
    ) -> Result<Self> {
        params.validate()?;
        let tractions = boundary.tractions();
        let input = AssemblyInput {
            mu: params.mu,
            lambda: params.lambda,
            mu_f: params.mu_f,
            permeability,
            tractions: &tractions,
            body_force: params.body_force,
            fluid_body_force: params.fluid_body_force,
            source: params.source,
        };
        let raw = assemble_all(mesh, &input)?;
        let constraints = Constraints::from_spec(mesh, boundary)?;
        let blocks = apply_essential_bcs(&raw, &constraints)?;
        Ok(Self {
            dim: mesh.dim(),
            params,
            derived: derived_params(&params, mesh.dim())?,
            blocks,
            constraints,
        })
    }

    pub fn zero_state(&self) -> State {
        let c = self.blocks.counts;
        State {
            u: vec![0.0; c.bubble + c.linear],
            p: vec![0.0; c.pressure],
        }
    }
}

/// Everything the block preconditioners and the analysis need, expressed
/// over the three physical fields `(u, p, w)`.
#[derive(Debug, Clone)]
pub struct FieldBlocks {
    /// `A_u`, `[D_bb A_bl; A_blᵀ A_ll]` or `A_uᴱ`.
    pub a_u: SparseMatrix,
    /// `B_u = [B_b B_l]` or `B_uᴱ`.
    pub b_u: SparseMatrix,
    pub b_w: SparseMatrix,
    pub m_w: SparseMatrix,
    pub m_p: SparseMatrix,
    /// Pressure diagonal block of the system: `M_p/M` or
    /// `M_p/M + α² B_b D⁻¹ B_bᵀ`.
    pub a_pp: SparseMatrix,
}

/// One of the three algebraic systems at a fixed time step.
#[derive(Debug, Clone)]
pub struct BiotSystem {
    pub variant: Variant,
    pub dim: usize,
    pub tau: f64,
    pub params: PhysicalParams,
    pub derived: DerivedParams,
    pub op: BlockOperator,
    pub fields: FieldBlocks,
    /// `(d+1) diag(A_bb)` for the diagonal-bubble and eliminated variants.
    pub d_bb: Option<Vec<f64>>,
    source: AssembledBlocks,
    constraints: Constraints,
}

fn hstack(a: &SparseMatrix, b: &SparseMatrix) -> Result<SparseMatrix> {
    check_dim("hstack rows", a.nrows(), b.nrows())?;
    let layout_r = BlockLayout::new(&[a.nrows()]);
    let layout_c = BlockLayout::new(&[a.ncols(), b.ncols()]);
    let mut op = BlockOperator::new(layout_r, layout_c);
    op.set(0, 0, a.clone())?;
    op.set(0, 1, b.clone())?;
    Ok(op.to_sparse())
}

fn displacement_block(a_bb: &SparseMatrix, a_bl: &SparseMatrix, a_ll: &SparseMatrix) -> Result<SparseMatrix> {
    let layout = BlockLayout::new(&[a_bb.nrows(), a_ll.nrows()]);
    let mut op = BlockOperator::square(layout);
    op.set(0, 0, a_bb.clone())?;
    op.set(0, 1, a_bl.clone())?;
    op.set(1, 0, a_bl.transpose())?;
    op.set(1, 1, a_ll.clone())?;
    Ok(op.to_sparse())
}

impl BiotSystem {
    /// Full system with unknowns `(u_b, u_l, p, w)`.
    pub fn full(problem: &BiotProblem, tau: f64) -> Result<Self> {
        Self::with_bubble_block(problem, tau, Variant::Full)
    }

    /// `A_bb` replaced by `D_bb = (d+1) diag(A_bb)`.
    pub fn diag_bubble(problem: &BiotProblem, tau: f64) -> Result<Self> {
        Self::with_bubble_block(problem, tau, Variant::DiagBubble)
    }

    pub fn build(problem: &BiotProblem, tau: f64, variant: Variant) -> Result<Self> {
        match variant {
            Variant::Full | Variant::DiagBubble => Self::with_bubble_block(problem, tau, variant),
            Variant::Eliminated => Self::eliminated(problem, tau),
        }
    }

    fn with_bubble_block(problem: &BiotProblem, tau: f64, variant: Variant) -> Result<Self> {
        check_tau(tau)?;
        let b = &problem.blocks;
        let c = b.counts;
        let alpha = problem.params.alpha;
        let inv_m = 1.0 / problem.params.biot_modulus;
        let (a_bb, d_bb) = match variant {
            Variant::Full => (b.a_bb.clone(), None),
            _ => {
                let d = bubble_diagonal(&b.a_bb, problem.dim)?;
                (SparseMatrix::from_diagonal(&d), Some(d))
            }
        };
        let layout = BlockLayout::new(&[c.bubble, c.linear, c.pressure, c.flux]);
        let mut op = BlockOperator::square(layout);
        op.set(0, 0, a_bb.clone())?;
        op.set(0, 1, b.a_bl.clone())?;
        op.set(0, 2, b.b_b.transpose().scaled(alpha))?;
        op.set(1, 0, b.a_bl.transpose())?;
        op.set(1, 1, b.a_ll.clone())?;
        op.set(1, 2, b.b_l.transpose().scaled(alpha))?;
        op.set(2, 0, b.b_b.scaled(-alpha))?;
        op.set(2, 1, b.b_l.scaled(-alpha))?;
        op.set(2, 2, b.m_p.scaled(inv_m))?;
        op.set(2, 3, b.b_w.scaled(-tau))?;
        op.set(3, 2, b.b_w.transpose().scaled(tau))?;
        op.set(3, 3, b.m_w.scaled(tau))?;
        let fields = FieldBlocks {
            a_u: displacement_block(&a_bb, &b.a_bl, &b.a_ll)?,
            b_u: hstack(&b.b_b, &b.b_l)?,
            b_w: b.b_w.clone(),
            m_w: b.m_w.clone(),
            m_p: b.m_p.clone(),
            a_pp: b.m_p.scaled(inv_m),
        };
        Ok(Self {
            variant,
            dim: problem.dim,
            tau,
            params: problem.params,
            derived: problem.derived,
            op,
            fields,
            d_bb,
            source: b.clone(),
            constraints: problem.constraints.clone(),
        })
    }

    /// Static condensation of the diagonal-bubble system: unknowns
    /// `(u_l, p, w)`.
    pub fn eliminated(problem: &BiotProblem, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        let b = &problem.blocks;
        let c = b.counts;
        let alpha = problem.params.alpha;
        let inv_m = 1.0 / problem.params.biot_modulus;
        let d = bubble_diagonal(&b.a_bb, problem.dim)?;
        let d_inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
        let a_lb = b.a_bl.transpose();
        let a_u_e = b.a_ll.add(1.0, &sparse_triple_product(&a_lb, &d_inv, &b.a_bl)?, -1.0)?;
        let b_u_e = b.b_l.add(1.0, &sparse_triple_product(&b.b_b, &d_inv, &b.a_bl)?, -1.0)?;
        let a_pp = b
            .m_p
            .add(inv_m, &sparse_triple_product(&b.b_b, &d_inv, &b.b_b.transpose())?, alpha * alpha)?;
        let layout = BlockLayout::new(&[c.linear, c.pressure, c.flux]);
        let mut op = BlockOperator::square(layout);
        op.set(0, 0, a_u_e.clone())?;
        op.set(0, 1, b_u_e.transpose().scaled(alpha))?;
        op.set(1, 0, b_u_e.scaled(-alpha))?;
        op.set(1, 1, a_pp.clone())?;
        op.set(1, 2, b.b_w.scaled(-tau))?;
        op.set(2, 1, b.b_w.transpose().scaled(tau))?;
        op.set(2, 2, b.m_w.scaled(tau))?;
        let fields = FieldBlocks {
            a_u: a_u_e,
            b_u: b_u_e,
            b_w: b.b_w.clone(),
            m_w: b.m_w.clone(),
            m_p: b.m_p.clone(),
            a_pp,
        };
        Ok(Self {
            variant: Variant::Eliminated,
            dim: problem.dim,
            tau,
            params: problem.params,
            derived: problem.derived,
            op,
            fields,
            d_bb: Some(d),
            source: b.clone(),
            constraints: problem.constraints.clone(),
        })
    }

    /// Assembled blocks after boundary conditions, before time-step scaling.
    pub fn assembled(&self) -> &AssembledBlocks {
        &self.source
    }

    /// The problem this system was built from.
    pub fn problem(&self) -> BiotProblem {
        BiotProblem {
            dim: self.dim,
            params: self.params,
            derived: self.derived,
            blocks: self.source.clone(),
            constraints: self.constraints.clone(),
        }
    }

    /// Sizes of the `(u, p, w)` field blocks.
    pub fn field_sizes(&self) -> [usize; 3] {
        [
            self.fields.a_u.nrows(),
            self.fields.m_p.nrows(),
            self.fields.m_w.nrows(),
        ]
    }

    pub fn size(&self) -> usize {
        self.op.nrows()
    }

    pub fn counts(&self) -> crate::fem::DofCounts {
        self.source.counts
    }

    /// Monolithic matrix.
    pub fn matrix(&self) -> SparseMatrix {
        self.op.to_sparse()
    }

    /// Backward-Euler right-hand side from the previous state.
    pub fn rhs(&self, prev: &State) -> Result<Vec<f64>> {
        let b = &self.source;
        let c = b.counts;
        check_dim("previous displacement", c.bubble + c.linear, prev.u.len())?;
        check_dim("previous pressure", c.pressure, prev.p.len())?;
        let alpha = self.params.alpha;
        let inv_m = 1.0 / self.params.biot_modulus;
        // f̃ = τ f + M_p p/M + α div u  (B = -div)
        let mut f_p: Vec<f64> = b.source_p.iter().map(|v| self.tau * v).collect();
        b.m_p.spmv_add(inv_m, &prev.p, &mut f_p);
        b.b_b.spmv_add(-alpha, &prev.u[..c.bubble], &mut f_p);
        b.b_l.spmv_add(-alpha, &prev.u[c.bubble..], &mut f_p);
        let f_w: Vec<f64> = b.load_w.iter().map(|v| self.tau * v).collect();
        let mut out = Vec::with_capacity(self.size());
        match self.variant {
            Variant::Full | Variant::DiagBubble => {
                out.extend_from_slice(&b.load_b);
                out.extend_from_slice(&b.load_l);
            }
            Variant::Eliminated => {
                let d = self.d_bb.as_ref().expect("eliminated system keeps D_bb");
                let db: Vec<f64> = b.load_b.iter().zip(d).map(|(f, d)| f / d).collect();
                let mut f_l = b.load_l.clone();
                b.a_bl.spmv_transpose_add(-1.0, &db, &mut f_l);
                b.b_b.spmv_add(alpha, &db, &mut f_p);
                out.extend_from_slice(&f_l);
            }
        }
        out.extend_from_slice(&f_p);
        out.extend_from_slice(&f_w);
        Ok(out)
    }

    /// Splits a solution into the next state, recovering bubbles for the
    /// eliminated system and expanding rigid-plate ties.
    pub fn state_from_solution(&self, x: &[f64]) -> Result<State> {
        check_dim("solution", self.size(), x.len())?;
        let b = &self.source;
        let c = b.counts;
        let (mut u, p) = match self.variant {
            Variant::Full | Variant::DiagBubble => {
                (x[..c.bubble + c.linear].to_vec(), x[c.bubble + c.linear..][..c.pressure].to_vec())
            }
            Variant::Eliminated => {
                let u_l = &x[..c.linear];
                let p = x[c.linear..][..c.pressure].to_vec();
                let d = self.d_bb.as_ref().expect("eliminated system keeps D_bb");
                let mut r = b.load_b.clone();
                b.a_bl.spmv_add(-1.0, u_l, &mut r);
                b.b_b.spmv_transpose_add(-self.params.alpha, &p, &mut r);
                let mut u: Vec<f64> = r.iter().zip(d).map(|(v, d)| v / d).collect();
                u.extend_from_slice(u_l);
                (u, p)
            }
        };
        self.constraints.expand_ties(&mut u[c.bubble..]);
        Ok(State { u, p })
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(BiotError::InvalidParameter(format!("time step must be positive, got {tau}")));
    }
    Ok(())
}

/// `(d+1) diag(A_bb)`, rejecting non-positive entries.
pub fn bubble_diagonal(a_bb: &SparseMatrix, dim: usize) -> Result<Vec<f64>> {
    let diag = a_bb.diagonal();
    if let Some(i) = diag.iter().position(|&v| !(v > 0.0)) {
        return Err(BiotError::Singular { pivot: i });
    }
    Ok(diag.iter().map(|v| (dim as f64 + 1.0) * v).collect())
}
