//! Homogeneous essential boundary conditions, applied by symmetric
//! elimination with a unit diagonal, plus optional tying of one displacement
//! component over a boundary part (a rigid plate).

use std::collections::BTreeMap;

use crate::error::{BiotError, Result};
use crate::fem::assembly::AssembledBlocks;
use crate::la::{SparseMatrix, TripletBuilder};
use crate::mesh::{BoundaryTag, SimplicialMesh};

/// What a boundary tag constrains.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundaryCondition {
    /// Cartesian displacement components fixed to zero at the facet's
    /// vertices.
    pub fixed_components: [bool; 3],
    /// Fix the facet bubble (normal displacement enrichment).
    pub fix_bubble: bool,
    /// Impose `w·n = 0`.
    pub no_flux: bool,
    /// Surface traction.
    pub traction: [f64; 3],
}

impl BoundaryCondition {
    pub fn clamped(dim: usize) -> Self {
        let mut fixed = [false; 3];
        fixed[..dim].iter_mut().for_each(|f| *f = true);
        Self {
            fixed_components: fixed,
            fix_bubble: true,
            no_flux: true,
            traction: [0.0; 3],
        }
    }

    /// Zero normal displacement and zero normal flux on the plane
    /// `x_axis = const`.
    pub fn symmetry(axis: usize) -> Self {
        let mut fixed = [false; 3];
        fixed[axis] = true;
        Self {
            fixed_components: fixed,
            fix_bubble: true,
            no_flux: true,
            traction: [0.0; 3],
        }
    }

    pub fn drained() -> Self {
        Self::default()
    }

    pub fn with_traction(mut self, t: [f64; 3]) -> Self {
        self.traction = t;
        self
    }

    pub fn with_no_flux(mut self, no_flux: bool) -> Self {
        self.no_flux = no_flux;
        self
    }
}

/// Displacement component tied to a single unknown over a boundary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidPlate {
    pub tag: BoundaryTag,
    pub component: usize,
    /// Total force on the plate in the tied direction.
    pub force: f64,
}

/// Boundary data for every tag present on the mesh.
#[derive(Debug, Clone, Default)]
pub struct BoundarySpec {
    pub conditions: BTreeMap<BoundaryTag, BoundaryCondition>,
    pub rigid_plate: Option<RigidPlate>,
}

impl BoundarySpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, tag: BoundaryTag, bc: BoundaryCondition) -> Self {
        self.conditions.insert(tag, bc);
        self
    }

    pub fn tractions(&self) -> Vec<(BoundaryTag, [f64; 3])> {
        self.conditions
            .iter()
            .filter(|(_, bc)| bc.traction.iter().any(|&t| t != 0.0))
            .map(|(&t, bc)| (t, bc.traction))
            .collect()
    }
}

/// Per-space constraint masks and displacement ties.
#[derive(Debug, Clone)]
pub struct Constraints {
    pub bubble: Vec<bool>,
    pub linear: Vec<bool>,
    pub flux: Vec<bool>,
    /// `(master, slaves)`: linear dofs whose values equal the master's.
    pub ties: Vec<(usize, Vec<usize>)>,
    /// Extra load on tie masters.
    pub tie_loads: Vec<(usize, f64)>,
}

impl Constraints {
    /// Masks implied by `spec` on `mesh`. Every boundary facet must carry a
    /// tag with a condition in `spec`.
    pub fn from_spec(mesh: &SimplicialMesh, spec: &BoundarySpec) -> Result<Self> {
        let d = mesh.dim();
        let mut bubble = vec![false; mesh.num_facets()];
        let mut linear = vec![false; d * mesh.num_vertices()];
        let mut flux = vec![false; mesh.num_facets()];
        for f in mesh.boundary_facets() {
            let tag = mesh
                .tag(f)
                .ok_or_else(|| BiotError::InvalidParameter(format!("boundary facet {f} has no tag")))?;
            let bc = spec.conditions.get(&tag).ok_or_else(|| {
                BiotError::InvalidParameter(format!("no boundary condition for tag '{}'", tag.name()))
            })?;
            bubble[f] |= bc.fix_bubble;
            flux[f] |= bc.no_flux;
            for &v in mesh.facet(f) {
                for c in 0..d {
                    linear[d * v + c] |= bc.fixed_components[c];
                }
            }
        }
        let mut ties = Vec::new();
        let mut tie_loads = Vec::new();
        if let Some(plate) = spec.rigid_plate {
            if plate.component >= d {
                return Err(BiotError::InvalidParameter(format!(
                    "rigid plate component {} in {d}D",
                    plate.component
                )));
            }
            let mut verts: Vec<usize> = mesh
                .facets_with_tag(plate.tag)
                .flat_map(|f| mesh.facet(f).to_vec())
                .collect();
            verts.sort_unstable();
            verts.dedup();
            let dofs: Vec<usize> = verts
                .iter()
                .map(|&v| d * v + plate.component)
                .filter(|&i| !linear[i])
                .collect();
            if let Some((&master, slaves)) = dofs.split_first() {
                ties.push((master, slaves.to_vec()));
                tie_loads.push((master, plate.force));
            }
            // the plate moves rigidly: no normal bubble enrichment under it
            for f in mesh.facets_with_tag(plate.tag) {
                bubble[f] = true;
            }
        }
        Ok(Self {
            bubble,
            linear,
            flux,
            ties,
            tie_loads,
        })
    }

    pub fn none(bubble: usize, linear: usize, flux: usize) -> Self {
        Self {
            bubble: vec![false; bubble],
            linear: vec![false; linear],
            flux: vec![false; flux],
            ties: Vec::new(),
            tie_loads: Vec::new(),
        }
    }

    /// Linear dofs eliminated by ties (slaves).
    fn tie_slaves(&self) -> Vec<bool> {
        let mut m = vec![false; self.linear.len()];
        for (_, s) in &self.ties {
            for &i in s {
                m[i] = true;
            }
        }
        m
    }

    /// Linear-dof prolongation `P` with `u = P ũ`: slaves copy their master
    /// and have a zero column.
    pub fn tie_prolongation(&self) -> SparseMatrix {
        let n = self.linear.len();
        let slaves = self.tie_slaves();
        let mut t = TripletBuilder::with_capacity(n, n, n);
        for i in 0..n {
            if !slaves[i] {
                t.push(i, i, 1.0);
            }
        }
        for (m, s) in &self.ties {
            for &i in s {
                t.push(i, *m, 1.0);
            }
        }
        t.build()
    }

    /// Copies master values to their slaves.
    pub fn expand_ties(&self, u_linear: &mut [f64]) {
        for (m, s) in &self.ties {
            let v = u_linear[*m];
            for &i in s {
                u_linear[i] = v;
            }
        }
    }

    /// All linear dofs that end up as identity rows.
    pub fn linear_eliminated(&self) -> Vec<bool> {
        let slaves = self.tie_slaves();
        self.linear.iter().zip(&slaves).map(|(a, b)| *a || *b).collect()
    }
}

fn zero_masked(v: &mut [f64], mask: &[bool]) {
    v.iter_mut().zip(mask).for_each(|(x, &m)| {
        if m {
            *x = 0.0
        }
    });
}

/// Applies `c` to all blocks: ties first (`PᵀAP`), then symmetric row and
/// column elimination with a unit diagonal on the square blocks and zeroed
/// couplings; loads on constrained rows are zeroed.
pub fn apply_essential_bcs(blocks: &AssembledBlocks, c: &Constraints) -> Result<AssembledBlocks> {
    let counts = blocks.counts;
    crate::error::check_dim("bubble mask", counts.bubble, c.bubble.len())?;
    crate::error::check_dim("linear mask", counts.linear, c.linear.len())?;
    crate::error::check_dim("flux mask", counts.flux, c.flux.len())?;
    for (m, s) in &c.ties {
        if c.linear[*m] || s.iter().any(|&i| c.linear[i]) {
            return Err(BiotError::InvalidParameter(
                "a tied displacement dof is also fixed".into(),
            ));
        }
    }

    let (mut a_ll, mut a_bl, mut b_l, mut load_l) =
        (blocks.a_ll.clone(), blocks.a_bl.clone(), blocks.b_l.clone(), blocks.load_l.clone());
    if !c.ties.is_empty() {
        let p = c.tie_prolongation();
        let pt = p.transpose();
        a_ll = pt.matmul(&a_ll)?.matmul(&p)?;
        a_bl = a_bl.matmul(&p)?;
        b_l = b_l.matmul(&p)?;
        let mut reduced = vec![0.0; load_l.len()];
        p.spmv_transpose_add(1.0, &load_l, &mut reduced);
        load_l = reduced;
        for &(m, f) in &c.tie_loads {
            load_l[m] += f;
        }
    }
    let lin = c.linear_eliminated();
    let none_p = vec![false; counts.pressure];

    let a_bb = blocks.a_bb.eliminate(&c.bubble, &c.bubble, true)?;
    let a_bl = a_bl.eliminate(&c.bubble, &lin, false)?;
    let a_ll = a_ll.eliminate(&lin, &lin, true)?;
    let b_b = blocks.b_b.eliminate(&none_p, &c.bubble, false)?;
    let b_l = b_l.eliminate(&none_p, &lin, false)?;
    let b_w = blocks.b_w.eliminate(&none_p, &c.flux, false)?;
    let m_w = blocks.m_w.eliminate(&c.flux, &c.flux, true)?;

    let mut load_b = blocks.load_b.clone();
    zero_masked(&mut load_b, &c.bubble);
    zero_masked(&mut load_l, &lin);
    let mut load_w = blocks.load_w.clone();
    zero_masked(&mut load_w, &c.flux);

    Ok(AssembledBlocks {
        counts,
        a_bb,
        a_bl,
        a_ll,
        b_b,
        b_l,
        b_w,
        m_w,
        m_p: blocks.m_p.clone(),
        load_b,
        load_l,
        source_p: blocks.source_p.clone(),
        load_w,
    })
}
