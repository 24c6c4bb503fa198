//! Global assembly of the enriched-P1 / RT0 / P0 blocks.
//!
//! Unknown numbering: bubbles by facet id; linear displacement vertex-major
//! (`d * v + c`); pressure by element id; flux by facet id.

use crate::error::{BiotError, Result};
use crate::fem::quadrature::QuadratureRule;
use crate::la::{DenseMatrix, SparseMatrix, TripletBuilder};
use crate::mesh::{BoundaryTag, ElementGeometry, SimplicialMesh};

/// Sizes of the four discrete spaces on a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofCounts {
    pub dim: usize,
    pub bubble: usize,
    pub linear: usize,
    pub pressure: usize,
    pub flux: usize,
}

impl DofCounts {
    pub fn of(mesh: &SimplicialMesh) -> Self {
        Self {
            dim: mesh.dim(),
            bubble: mesh.num_facets(),
            linear: mesh.dim() * mesh.num_vertices(),
            pressure: mesh.num_elements(),
            flux: mesh.num_facets(),
        }
    }

    pub fn total(&self) -> usize {
        self.bubble + self.linear + self.pressure + self.flux
    }
}

/// All blocks of the discrete problem plus the load vectors, before any
/// time-step scaling.
#[derive(Debug, Clone)]
pub struct AssembledBlocks {
    pub counts: DofCounts,
    pub a_bb: SparseMatrix,
    pub a_bl: SparseMatrix,
    pub a_ll: SparseMatrix,
    pub b_b: SparseMatrix,
    pub b_l: SparseMatrix,
    pub b_w: SparseMatrix,
    pub m_w: SparseMatrix,
    pub m_p: SparseMatrix,
    /// `(g, v)` on bubbles: surface tractions plus body force.
    pub load_b: Vec<f64>,
    /// `(g, v)` on linear displacement dofs.
    pub load_l: Vec<f64>,
    /// `(f, q)` fluid source.
    pub source_p: Vec<f64>,
    /// `(g_f, r)` fluid body force.
    pub load_w: Vec<f64>,
}

/// Material and loading data consumed by [`assemble_all`].
#[derive(Debug, Clone)]
pub struct AssemblyInput<'a> {
    pub mu: f64,
    pub lambda: f64,
    pub mu_f: f64,
    /// Permeability per element.
    pub permeability: &'a [f64],
    /// Traction per boundary tag (tags not listed are traction-free).
    pub tractions: &'a [(BoundaryTag, [f64; 3])],
    pub body_force: [f64; 3],
    pub fluid_body_force: [f64; 3],
    pub source: f64,
}

/// Value and gradient of the scalar facet bubble `Π_{j != i} λ_j` at a
/// barycentric point.
#[inline]
pub fn bubble_scalar(dim: usize, geom: &ElementGeometry, lam: &[f64; 4], i: usize) -> (f64, [f64; 3]) {
    let nv = dim + 1;
    let mut value = 1.0;
    for j in 0..nv {
        if j != i {
            value *= lam[j];
        }
    }
    let mut grad = [0.0; 3];
    for k in 0..nv {
        if k == i {
            continue;
        }
        let mut coef = 1.0;
        for j in 0..nv {
            if j != i && j != k {
                coef *= lam[j];
            }
        }
        for c in 0..dim {
            grad[c] += coef * geom.grad_lambda[k][c];
        }
    }
    (value, grad)
}

/// Displacement gradients `G[r][c] = ∂u_r/∂x_c` of the `(d+1) + d(d+1)`
/// local basis functions (bubbles first, then vertex-major linears).
fn displacement_gradients(
    dim: usize,
    geom: &ElementGeometry,
    normals: &[[f64; 3]],
    lam: &[f64; 4],
    out: &mut Vec<[[f64; 3]; 3]>,
) {
    out.clear();
    let nv = dim + 1;
    for i in 0..nv {
        let (_, g) = bubble_scalar(dim, geom, lam, i);
        let n = normals[i];
        let mut m = [[0.0; 3]; 3];
        for r in 0..dim {
            for c in 0..dim {
                m[r][c] = n[r] * g[c];
            }
        }
        out.push(m);
    }
    for v in 0..nv {
        for comp in 0..dim {
            let mut m = [[0.0; 3]; 3];
            m[comp] = geom.grad_lambda[v];
            out.push(m);
        }
    }
}

/// Local elasticity matrix `2μ(ε(φ_j), ε(φ_i)) + λ(div φ_j, div φ_i)` over
/// the enriched basis; `normals[i]` is the canonical normal of local facet
/// `i`.
pub fn element_elasticity(
    dim: usize,
    geom: &ElementGeometry,
    normals: &[[f64; 3]],
    mu: f64,
    lambda: f64,
    rule: &QuadratureRule,
) -> DenseMatrix {
    let nloc = (dim + 1) * (dim + 1);
    let mut k = DenseMatrix::zeros(nloc, nloc);
    let mut grads = Vec::with_capacity(nloc);
    for (p, &w) in rule.points.iter().zip(&rule.weights) {
        displacement_gradients(dim, geom, normals, p, &mut grads);
        let wq = w * geom.volume;
        for a in 0..nloc {
            let ga = &grads[a];
            let div_a: f64 = (0..dim).map(|c| ga[c][c]).sum();
            for b in a..nloc {
                let gb = &grads[b];
                let div_b: f64 = (0..dim).map(|c| gb[c][c]).sum();
                let mut eps = 0.0;
                for r in 0..dim {
                    for c in 0..dim {
                        eps += 0.5 * (ga[r][c] + ga[c][r]) * gb[r][c];
                    }
                }
                let v = wq * (2.0 * mu * eps + lambda * div_a * div_b);
                k[(a, b)] += v;
                if a != b {
                    k[(b, a)] += v;
                }
            }
        }
    }
    k
}

/// Local `∫_T div φ` for the enriched displacement basis.
pub fn element_divergence(
    dim: usize,
    geom: &ElementGeometry,
    normals: &[[f64; 3]],
    rule: &QuadratureRule,
) -> Vec<f64> {
    let nloc = (dim + 1) * (dim + 1);
    let mut out = vec![0.0; nloc];
    let mut grads = Vec::with_capacity(nloc);
    for (p, &w) in rule.points.iter().zip(&rule.weights) {
        displacement_gradients(dim, geom, normals, p, &mut grads);
        for (a, g) in grads.iter().enumerate() {
            out[a] += w * geom.volume * (0..dim).map(|c| g[c][c]).sum::<f64>();
        }
    }
    out
}

/// RT0 basis function of local facet `i` evaluated at barycentric point
/// `lam`: `s (x - x_i) / (d |T|)`.
#[inline]
pub fn rt0_value(dim: usize, geom: &ElementGeometry, sign: f64, lam: &[f64; 4], i: usize) -> [f64; 3] {
    let mut x = [0.0; 3];
    for (j, l) in lam.iter().enumerate().take(dim + 1) {
        for c in 0..dim {
            x[c] += l * geom.vertices[j][c];
        }
    }
    let scale = sign / (dim as f64 * geom.volume);
    let mut out = [0.0; 3];
    for c in 0..dim {
        out[c] = scale * (x[c] - geom.vertices[i][c]);
    }
    out
}

/// Local RT0 mass matrix `∫_T φ_j · φ_i` (unit coefficient).
pub fn element_rt0_mass(dim: usize, geom: &ElementGeometry, signs: &[f64], rule: &QuadratureRule) -> DenseMatrix {
    let nv = dim + 1;
    let mut m = DenseMatrix::zeros(nv, nv);
    for (p, &w) in rule.points.iter().zip(&rule.weights) {
        let phis: Vec<[f64; 3]> = (0..nv).map(|i| rt0_value(dim, geom, signs[i], p, i)).collect();
        for a in 0..nv {
            for b in 0..nv {
                let dot: f64 = (0..dim).map(|c| phis[a][c] * phis[b][c]).sum();
                m[(a, b)] += w * geom.volume * dot;
            }
        }
    }
    m
}

fn local_normals(mesh: &SimplicialMesh, e: usize) -> [[f64; 3]; 4] {
    let mut n = [[0.0; 3]; 4];
    for (i, &f) in mesh.element_facets(e).iter().enumerate() {
        n[i] = mesh.facet_normal(f);
    }
    n
}

fn local_displacement_dofs(mesh: &SimplicialMesh, e: usize, nb: usize) -> Vec<(bool, usize)> {
    // (is_bubble, index within its block)
    let d = mesh.dim();
    let mut dofs = Vec::with_capacity((d + 1) * (d + 1));
    for &f in mesh.element_facets(e) {
        debug_assert!(f < nb);
        dofs.push((true, f));
    }
    for &v in mesh.element(e) {
        for c in 0..d {
            dofs.push((false, d * v + c));
        }
    }
    dofs
}

/// `A_bb`, `A_bl`, `A_ll` of the enriched elasticity form.
pub fn assemble_elasticity(
    mesh: &SimplicialMesh,
    mu: f64,
    lambda: f64,
) -> Result<(SparseMatrix, SparseMatrix, SparseMatrix)> {
    if !(mu > 0.0) {
        return Err(BiotError::InvalidParameter(format!("shear modulus must be positive, got {mu}")));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(BiotError::InvalidParameter(format!(
            "first Lamé parameter must be finite and non-negative, got {lambda}"
        )));
    }
    let counts = DofCounts::of(mesh);
    let d = mesh.dim();
    let rule = QuadratureRule::for_dim(d);
    let ne = mesh.num_elements();
    let mut bb = TripletBuilder::with_capacity(counts.bubble, counts.bubble, ne * (d + 1) * (d + 1));
    let mut bl = TripletBuilder::with_capacity(counts.bubble, counts.linear, ne * (d + 1) * d * (d + 1));
    let mut ll = TripletBuilder::with_capacity(counts.linear, counts.linear, ne * (d * (d + 1)).pow(2));
    for e in 0..ne {
        let geom = mesh.geometry(e);
        let normals = local_normals(mesh, e);
        let k = element_elasticity(d, &geom, &normals[..d + 1], mu, lambda, &rule);
        let dofs = local_displacement_dofs(mesh, e, counts.bubble);
        for (a, &(ba, ia)) in dofs.iter().enumerate() {
            for (b, &(bb_, ib)) in dofs.iter().enumerate() {
                let v = k[(a, b)];
                match (ba, bb_) {
                    (true, true) => bb.push(ia, ib, v),
                    (true, false) => bl.push(ia, ib, v),
                    (false, false) => ll.push(ia, ib, v),
                    (false, true) => {}
                }
            }
        }
    }
    Ok((bb.build(), bl.build(), ll.build()))
}

/// `B_b`, `B_l`, `B_w` with entries `-(div φ, q)`.
pub fn assemble_div_coupling(mesh: &SimplicialMesh) -> (SparseMatrix, SparseMatrix, SparseMatrix) {
    let counts = DofCounts::of(mesh);
    let d = mesh.dim();
    let rule = QuadratureRule::for_dim(d);
    let ne = mesh.num_elements();
    let mut bb = TripletBuilder::with_capacity(ne, counts.bubble, ne * (d + 1));
    let mut bl = TripletBuilder::with_capacity(ne, counts.linear, ne * d * (d + 1));
    let mut bw = TripletBuilder::with_capacity(ne, counts.flux, ne * (d + 1));
    for e in 0..ne {
        let geom = mesh.geometry(e);
        let normals = local_normals(mesh, e);
        let div = element_divergence(d, &geom, &normals[..d + 1], &rule);
        for (a, &(is_b, i)) in local_displacement_dofs(mesh, e, counts.bubble).iter().enumerate() {
            if is_b {
                bb.push(e, i, -div[a]);
            } else {
                bl.push(e, i, -div[a]);
            }
        }
        // ∫_T div φ_F = sign exactly
        for (&f, &s) in mesh.element_facets(e).iter().zip(mesh.element_signs(e)) {
            bw.push(e, f, -s);
        }
    }
    (bb.build(), bl.build(), bw.build())
}

/// `M_w = ∫ (μ_f / k) φ_G · φ_F` with `k` constant per element.
pub fn assemble_flux_mass(mesh: &SimplicialMesh, mu_f: f64, permeability: &[f64]) -> Result<SparseMatrix> {
    if permeability.len() != mesh.num_elements() {
        return Err(BiotError::DimensionMismatch {
            context: "permeability field",
            expected: mesh.num_elements(),
            found: permeability.len(),
        });
    }
    if let Some(k) = permeability.iter().find(|&&k| !(k > 0.0) || !k.is_finite()) {
        return Err(BiotError::InvalidParameter(format!("permeability must be positive, got {k}")));
    }
    if !(mu_f > 0.0) {
        return Err(BiotError::InvalidParameter(format!("fluid viscosity must be positive, got {mu_f}")));
    }
    let d = mesh.dim();
    let rule = QuadratureRule::for_dim(d);
    let nf = mesh.num_facets();
    let mut t = TripletBuilder::with_capacity(nf, nf, mesh.num_elements() * (d + 1) * (d + 1));
    for e in 0..mesh.num_elements() {
        let geom = mesh.geometry(e);
        let m = element_rt0_mass(d, &geom, mesh.element_signs(e), &rule);
        let coef = mu_f / permeability[e];
        let facets = mesh.element_facets(e);
        for a in 0..=d {
            for b in 0..=d {
                t.push(facets[a], facets[b], coef * m[(a, b)]);
            }
        }
    }
    Ok(t.build())
}

/// Diagonal P0 mass: element volumes.
pub fn assemble_p0_mass(mesh: &SimplicialMesh) -> SparseMatrix {
    SparseMatrix::from_diagonal(mesh.volumes())
}

/// Right-hand sides from surface tractions, body forces and sources.
pub fn assemble_loads(
    mesh: &SimplicialMesh,
    tractions: &[(BoundaryTag, [f64; 3])],
    body_force: [f64; 3],
    fluid_body_force: [f64; 3],
    source: f64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let counts = DofCounts::of(mesh);
    let d = mesh.dim();
    let mut load_b = vec![0.0; counts.bubble];
    let mut load_l = vec![0.0; counts.linear];
    let mut load_w = vec![0.0; counts.flux];
    let source_p: Vec<f64> = mesh.volumes().iter().map(|v| source * v).collect();

    let has_body = body_force.iter().any(|&g| g != 0.0);
    let has_fluid = fluid_body_force.iter().any(|&g| g != 0.0);
    if has_body || has_fluid {
        let rule = QuadratureRule::for_dim(d);
        for e in 0..mesh.num_elements() {
            let geom = mesh.geometry(e);
            let facets = mesh.element_facets(e);
            let signs = mesh.element_signs(e);
            for (p, &w) in rule.points.iter().zip(&rule.weights) {
                let wq = w * geom.volume;
                if has_body {
                    for (i, &f) in facets.iter().enumerate() {
                        let (b, _) = bubble_scalar(d, &geom, p, i);
                        let n = mesh.facet_normal(f);
                        let gn: f64 = (0..d).map(|c| body_force[c] * n[c]).sum();
                        load_b[f] += wq * b * gn;
                    }
                    for (j, &v) in mesh.element(e).iter().enumerate() {
                        for c in 0..d {
                            load_l[d * v + c] += wq * p[j] * body_force[c];
                        }
                    }
                }
                if has_fluid {
                    for (i, &f) in facets.iter().enumerate() {
                        let phi = rt0_value(d, &geom, signs[i], p, i);
                        load_w[f] += wq * (0..d).map(|c| phi[c] * fluid_body_force[c]).sum::<f64>();
                    }
                }
            }
        }
    }

    let frule = QuadratureRule::facet(d);
    for &(tag, g) in tractions {
        for f in mesh.facets_with_tag(tag) {
            let verts = mesh.facet(f);
            let n = mesh.facet_normal(f);
            let area = mesh.facet_measure(f);
            let gn: f64 = (0..d).map(|c| g[c] * n[c]).sum();
            for (p, &w) in frule.points.iter().zip(&frule.weights) {
                let bubble: f64 = p[..d].iter().product();
                load_b[f] += w * area * bubble * gn;
                for (j, &v) in verts.iter().enumerate() {
                    for c in 0..d {
                        load_l[d * v + c] += w * area * p[j] * g[c];
                    }
                }
            }
        }
    }
    (load_b, load_l, source_p, load_w)
}

/// Assembles every block and load vector.
pub fn assemble_all(mesh: &SimplicialMesh, input: &AssemblyInput<'_>) -> Result<AssembledBlocks> {
    let (a_bb, a_bl, a_ll) = assemble_elasticity(mesh, input.mu, input.lambda)?;
    let (b_b, b_l, b_w) = assemble_div_coupling(mesh);
    let m_w = assemble_flux_mass(mesh, input.mu_f, input.permeability)?;
    let m_p = assemble_p0_mass(mesh);
    let (load_b, load_l, source_p, load_w) = assemble_loads(
        mesh,
        input.tractions,
        input.body_force,
        input.fluid_body_force,
        input.source,
    );
    Ok(AssembledBlocks {
        counts: DofCounts::of(mesh),
        a_bb,
        a_bl,
        a_ll,
        b_b,
        b_l,
        b_w,
        m_w,
        m_p,
        load_b,
        load_l,
        source_p,
        load_w,
    })
}
