//! Mandel quadrant and footing cube setups.

use crate::biot::{BiotProblem, Permeability, PhysicalParams};
use crate::error::{BiotError, Result};
use crate::fem::{BoundaryCondition, BoundarySpec, RigidPlate};
use crate::mesh::{BoundaryTag, ProblemKind, SimplicialMesh};

/// Mandel's problem on the top-right quadrant of `[-a, a]²`.
#[derive(Debug, Clone, PartialEq)]
pub struct MandelConfig {
    pub a: f64,
    /// Total vertical load on the quadrant's top edge.
    pub force: f64,
    pub nu: f64,
    pub young: f64,
    pub alpha: f64,
    pub biot_modulus: f64,
    pub mu_f: f64,
    pub k: f64,
    /// Skempton coefficient.
    pub skempton: f64,
    pub series_tol: f64,
    pub max_terms: usize,
    pub standard_shear: bool,
    /// Load through a rigid plate (tied top displacements) instead of a
    /// uniform traction.
    pub rigid_plate: bool,
}

impl Default for MandelConfig {
    fn default() -> Self {
        Self {
            a: 1.0,
            force: 1e4,
            nu: 0.0,
            young: 1e4,
            alpha: 1.0,
            biot_modulus: 1e6,
            mu_f: 1.0,
            k: 1e-6,
            skempton: 1.0,
            series_tol: 1e-12,
            max_terms: 100_000,
            standard_shear: false,
            rigid_plate: false,
        }
    }
}

impl MandelConfig {
    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    pub fn with_rigid_plate(mut self, on: bool) -> Self {
        self.rigid_plate = on;
        self
    }

    /// `ν_u = (3ν + B(1 - 2ν)) / (3 - B(1 - 2ν))`.
    pub fn undrained_nu(&self) -> f64 {
        let b = self.skempton;
        let nu = self.nu;
        (3.0 * nu + b * (1.0 - 2.0 * nu)) / (3.0 - b * (1.0 - 2.0 * nu))
    }

    /// `p₀ = B (1 + ν_u) F / (3a)`.
    pub fn p0(&self) -> f64 {
        self.skempton * (1.0 + self.undrained_nu()) * self.force / (3.0 * self.a)
    }

    pub fn params(&self) -> Result<PhysicalParams> {
        let mut p = PhysicalParams::from_young(self.young, self.nu, self.standard_shear)?;
        p.alpha = self.alpha;
        p.biot_modulus = self.biot_modulus;
        p.mu_f = self.mu_f;
        Ok(p)
    }

    /// `c = K (λ + 2μ)` with `K = k / μ_f`.
    pub fn consolidation_coefficient(&self) -> Result<f64> {
        let p = self.params()?;
        Ok(self.k / self.mu_f * (p.lambda + 2.0 * p.mu))
    }

    pub fn boundary(&self) -> BoundarySpec {
        let top = BoundaryCondition::drained().with_no_flux(true);
        let mut spec = BoundarySpec::new()
            .set(BoundaryTag::SymmetryX, BoundaryCondition::symmetry(0))
            .set(BoundaryTag::SymmetryY, BoundaryCondition::symmetry(1))
            .set(BoundaryTag::Drained, BoundaryCondition::drained());
        if self.rigid_plate {
            spec = spec.set(BoundaryTag::LoadPatch, top);
            spec.rigid_plate = Some(RigidPlate {
                tag: BoundaryTag::LoadPatch,
                component: 1,
                force: -self.force,
            });
        } else {
            spec = spec.set(BoundaryTag::LoadPatch, top.with_traction([0.0, -self.force / self.a, 0.0]));
        }
        spec
    }

    pub fn mesh(&self, n: usize) -> Result<SimplicialMesh> {
        if self.a != 1.0 {
            return Err(BiotError::InvalidParameter("only the unit quadrant is meshed".into()));
        }
        let mut m = SimplicialMesh::unit_square(n)?;
        m.classify_boundary(ProblemKind::Mandel2d)?;
        Ok(m)
    }

    pub fn problem(&self, mesh: &SimplicialMesh) -> Result<BiotProblem> {
        let k = Permeability::Uniform(self.k).field(mesh);
        BiotProblem::assemble(mesh, &self.boundary(), self.params()?, &k)
    }
}

/// Footing on the unit cube, loaded on the central `0.5 x 0.5` top patch.
#[derive(Debug, Clone, PartialEq)]
pub struct FootingConfig {
    /// Load intensity per unit area.
    pub load: f64,
    pub nu: f64,
    pub young: f64,
    pub alpha: f64,
    pub biot_modulus: f64,
    pub mu_f: f64,
    /// Permeability, or its value for `x < 0.5` when `k_jump` is set.
    pub k: f64,
    /// Permeability for `x ≥ 0.5`.
    pub k_jump: Option<f64>,
    pub standard_shear: bool,
}

impl Default for FootingConfig {
    fn default() -> Self {
        Self {
            load: 3e4,
            nu: 0.2,
            young: 1e4,
            alpha: 1.0,
            biot_modulus: 1e6,
            mu_f: 1.0,
            k: 1e-6,
            k_jump: None,
            standard_shear: false,
        }
    }
}

impl FootingConfig {
    pub fn params(&self) -> Result<PhysicalParams> {
        let mut p = PhysicalParams::from_young(self.young, self.nu, self.standard_shear)?;
        p.alpha = self.alpha;
        p.biot_modulus = self.biot_modulus;
        p.mu_f = self.mu_f;
        Ok(p)
    }

    pub fn permeability(&self) -> Permeability {
        match self.k_jump {
            Some(right) => Permeability::JumpX {
                left: self.k,
                right,
                at: 0.5,
            },
            None => Permeability::Uniform(self.k),
        }
    }

    pub fn boundary(&self, dim: usize) -> BoundarySpec {
        BoundarySpec::new()
            .set(BoundaryTag::Clamped, BoundaryCondition::clamped(dim))
            .set(BoundaryTag::Drained, BoundaryCondition::drained())
            .set(
                BoundaryTag::LoadPatch,
                BoundaryCondition::drained().with_traction([0.0, 0.0, -self.load]),
            )
    }

    pub fn mesh(&self, n: usize) -> Result<SimplicialMesh> {
        let mut m = SimplicialMesh::unit_cube(n)?;
        m.classify_boundary(ProblemKind::Footing3d)?;
        Ok(m)
    }

    pub fn problem(&self, mesh: &SimplicialMesh) -> Result<BiotProblem> {
        let k = self.permeability().field(mesh);
        BiotProblem::assemble(mesh, &self.boundary(mesh.dim()), self.params()?, &k)
    }
}

/// Parameters shared by both benchmarks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub nu: f64,
    pub k: f64,
    pub k_jump: Option<f64>,
}

/// Mesh and assembled problem for one benchmark at `n` cells per side.
pub fn build_problem(kind: ProblemKind, n: usize, pp: ProblemParams) -> Result<(SimplicialMesh, BiotProblem)> {
    match kind {
        ProblemKind::Mandel2d => {
            if pp.k_jump.is_some() {
                return Err(BiotError::InvalidParameter(
                    "permeability jumps are only set up for the footing problem".into(),
                ));
            }
            let cfg = MandelConfig::default().with_nu(pp.nu).with_k(pp.k);
            let mesh = cfg.mesh(n)?;
            let problem = cfg.problem(&mesh)?;
            Ok((mesh, problem))
        }
        ProblemKind::Footing3d => {
            let cfg = FootingConfig {
                nu: pp.nu,
                k: pp.k,
                k_jump: pp.k_jump,
                ..FootingConfig::default()
            };
            let mesh = cfg.mesh(n)?;
            let problem = cfg.problem(&mesh)?;
            Ok((mesh, problem))
        }
    }
}
