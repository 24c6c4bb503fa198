//! Structured simplicial meshes of the unit square and unit cube with
//! globally oriented facets.
//!
//! Conventions:
//! * local facet `i` of an element is the facet opposite its local vertex `i`;
//! * a facet stores its vertex ids sorted ascending, and its canonical normal
//!   is `rot(x_b - x_a)` in 2D and `(x_b - x_a) x (x_c - x_a)` in 3D;
//! * `sign(e, i)` is `+1` when the canonical normal of local facet `i` points
//!   out of element `e`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{BiotError, Result};

/// Sentinel for "no neighbour" in [`SimplicialMesh::facet_elements`].
pub const NO_ELEMENT: usize = usize::MAX;

/// Label carried by every boundary facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    /// Drained, traction-free.
    Drained,
    /// Clamped displacement, no flux.
    Clamped,
    /// Symmetry plane `x = const`.
    SymmetryX,
    /// Symmetry plane `y = const`.
    SymmetryY,
    /// Loaded part of the boundary.
    LoadPatch,
    /// Untouched by any condition.
    Free,
}

impl BoundaryTag {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::Drained => "drained",
            BoundaryTag::Clamped => "clamped",
            BoundaryTag::SymmetryX => "symmetry-x",
            BoundaryTag::SymmetryY => "symmetry-y",
            BoundaryTag::LoadPatch => "load-patch",
            BoundaryTag::Free => "free",
        }
    }
}

/// Benchmark geometry whose boundary partition [`SimplicialMesh::classify_boundary`]
/// knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Mandel2d,
    Footing3d,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Mandel2d => "mandel2d",
            ProblemKind::Footing3d => "footing3d",
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = BiotError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mandel2d" | "mandel" => Ok(ProblemKind::Mandel2d),
            "footing3d" | "footing" => Ok(ProblemKind::Footing3d),
            other => Err(BiotError::InvalidParameter(format!("unknown problem '{other}'"))),
        }
    }
}

/// Affine data of one simplex.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub volume: f64,
    /// Vertex coordinates (unused trailing entries are zero).
    pub vertices: [[f64; 3]; 4],
    /// Gradients of the barycentric coordinates.
    pub grad_lambda: [[f64; 3]; 4],
}

#[derive(Debug, Clone)]
pub struct SimplicialMesh {
    dim: usize,
    n: usize,
    coords: Vec<[f64; 3]>,
    /// `dim + 1` vertex ids per element.
    elements: Vec<usize>,
    /// `dim` sorted vertex ids per facet.
    facets: Vec<usize>,
    /// `dim + 1` facet ids per element, local facet `i` opposite vertex `i`.
    element_facets: Vec<usize>,
    element_signs: Vec<f64>,
    facet_elements: Vec<[usize; 2]>,
    facet_normals: Vec<[f64; 3]>,
    facet_measures: Vec<f64>,
    volumes: Vec<f64>,
    tags: Vec<Option<BoundaryTag>>,
}

impl SimplicialMesh {
    /// `N x N` squares, each cut along the lower-left to upper-right diagonal.
    pub fn unit_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(BiotError::InvalidParameter("mesh needs N >= 1".into()));
        }
        let h = 1.0 / n as f64;
        let vid = |i: usize, j: usize| j * (n + 1) + i;
        let mut coords = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                coords.push([i as f64 * h, j as f64 * h, 0.0]);
            }
        }
        let mut elements = Vec::with_capacity(6 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
                elements.extend_from_slice(&[v00, v10, v11]);
                elements.extend_from_slice(&[v00, v11, v01]);
            }
        }
        Ok(Self::from_elements(2, n, coords, elements))
    }

    /// `N x N x N` cubes, each split into the six Kuhn tetrahedra.
    pub fn unit_cube(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(BiotError::InvalidParameter("mesh needs N >= 1".into()));
        }
        let h = 1.0 / n as f64;
        let vid = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
        let mut coords = Vec::with_capacity((n + 1).pow(3));
        for k in 0..=n {
            for j in 0..=n {
                for i in 0..=n {
                    coords.push([i as f64 * h, j as f64 * h, k as f64 * h]);
                }
            }
        }
        const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut elements = Vec::with_capacity(24 * n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    for p in PERMS {
                        let mut c = [i, j, k];
                        elements.push(vid(c[0], c[1], c[2]));
                        for axis in p {
                            c[axis] += 1;
                            elements.push(vid(c[0], c[1], c[2]));
                        }
                    }
                }
            }
        }
        Ok(Self::from_elements(3, n, coords, elements))
    }

    fn from_elements(dim: usize, n: usize, coords: Vec<[f64; 3]>, elements: Vec<usize>) -> Self {
        let nv = dim + 1;
        let ne = elements.len() / nv;
        let mut lookup: HashMap<[usize; 3], usize> = HashMap::with_capacity(ne * nv);
        let mut facets = Vec::new();
        let mut facet_elements: Vec<[usize; 2]> = Vec::new();
        let mut element_facets = Vec::with_capacity(ne * nv);
        for e in 0..ne {
            let verts = &elements[e * nv..(e + 1) * nv];
            for i in 0..nv {
                let mut key = [usize::MAX; 3];
                let mut m = 0;
                for (l, &v) in verts.iter().enumerate() {
                    if l != i {
                        key[m] = v;
                        m += 1;
                    }
                }
                key[..dim].sort_unstable();
                let id = *lookup.entry(key).or_insert_with(|| {
                    facets.extend_from_slice(&key[..dim]);
                    facet_elements.push([NO_ELEMENT, NO_ELEMENT]);
                    facet_elements.len() - 1
                });
                let slot = &mut facet_elements[id];
                if slot[0] == NO_ELEMENT {
                    slot[0] = e;
                } else {
                    debug_assert_eq!(slot[1], NO_ELEMENT, "facet shared by more than two elements");
                    slot[1] = e;
                }
                element_facets.push(id);
            }
        }

        let nf = facet_elements.len();
        let mut facet_normals = Vec::with_capacity(nf);
        let mut facet_measures = Vec::with_capacity(nf);
        for f in 0..nf {
            let fv = &facets[f * dim..(f + 1) * dim];
            let (normal, measure) = canonical_normal(dim, &coords, fv);
            facet_normals.push(normal);
            facet_measures.push(measure);
        }

        let mut element_signs = Vec::with_capacity(ne * nv);
        let mut volumes = Vec::with_capacity(ne);
        for e in 0..ne {
            let verts = &elements[e * nv..(e + 1) * nv];
            volumes.push(simplex_volume(dim, &coords, verts));
            for i in 0..nv {
                let f = element_facets[e * nv + i];
                let opp = coords[verts[i]];
                let on = coords[facets[f * dim]];
                let n = facet_normals[f];
                let s: f64 = (0..dim).map(|c| n[c] * (on[c] - opp[c])).sum();
                element_signs.push(if s > 0.0 { 1.0 } else { -1.0 });
            }
        }

        Self {
            dim,
            n,
            coords,
            elements,
            facets,
            element_facets,
            element_signs,
            facet_elements,
            facet_normals,
            facet_measures,
            volumes,
            tags: vec![None; nf],
        }
    }

    /// Tags every boundary facet for the given benchmark geometry.
    ///
    /// Mandel quadrant: `x = 0` symmetry-x, `y = 0` symmetry-y, `x = 1`
    /// drained, `y = 1` loaded. Footing: `z = 0` clamped, the central
    /// `0.5 x 0.5` square of `z = 1` loaded, everything else drained.
    pub fn classify_boundary(&mut self, problem: ProblemKind) -> Result<()> {
        let expected_dim = match problem {
            ProblemKind::Mandel2d => 2,
            ProblemKind::Footing3d => 3,
        };
        if self.dim != expected_dim {
            return Err(BiotError::InvalidParameter(format!(
                "{problem:?} needs a {expected_dim}D mesh"
            )));
        }
        let eps = 1e-12;
        for f in 0..self.num_facets() {
            if !self.is_boundary_facet(f) {
                self.tags[f] = None;
                continue;
            }
            let c = self.facet_centroid(f);
            let tag = match problem {
                ProblemKind::Mandel2d => {
                    if c[0] < eps {
                        BoundaryTag::SymmetryX
                    } else if c[1] < eps {
                        BoundaryTag::SymmetryY
                    } else if c[1] > 1.0 - eps {
                        BoundaryTag::LoadPatch
                    } else {
                        BoundaryTag::Drained
                    }
                }
                ProblemKind::Footing3d => {
                    if c[2] < eps {
                        BoundaryTag::Clamped
                    } else if c[2] > 1.0 - eps
                        && (c[0] - 0.5).abs() <= 0.25
                        && (c[1] - 0.5).abs() <= 0.25
                    {
                        BoundaryTag::LoadPatch
                    } else {
                        BoundaryTag::Drained
                    }
                }
            };
            self.tags[f] = Some(tag);
        }
        Ok(())
    }

    /// Overrides the tag of one boundary facet.
    pub fn set_tag(&mut self, facet: usize, tag: BoundaryTag) -> Result<()> {
        if !self.is_boundary_facet(facet) {
            return Err(BiotError::InvalidParameter(format!("facet {facet} is interior")));
        }
        self.tags[facet] = Some(tag);
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per side.
    pub fn cells_per_side(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    #[inline]
    pub fn num_vertices(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn num_elements(&self) -> usize {
        self.volumes.len()
    }

    #[inline]
    pub fn num_facets(&self) -> usize {
        self.facet_elements.len()
    }

    #[inline]
    pub fn vertex(&self, v: usize) -> [f64; 3] {
        self.coords[v]
    }

    #[inline]
    pub fn element(&self, e: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.elements[e * nv..(e + 1) * nv]
    }

    #[inline]
    pub fn facet(&self, f: usize) -> &[usize] {
        &self.facets[f * self.dim..(f + 1) * self.dim]
    }

    #[inline]
    pub fn element_facets(&self, e: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.element_facets[e * nv..(e + 1) * nv]
    }

    #[inline]
    pub fn element_signs(&self, e: usize) -> &[f64] {
        let nv = self.dim + 1;
        &self.element_signs[e * nv..(e + 1) * nv]
    }

    #[inline]
    pub fn facet_elements(&self, f: usize) -> [usize; 2] {
        self.facet_elements[f]
    }

    pub fn is_boundary_facet(&self, f: usize) -> bool {
        self.facet_elements[f][1] == NO_ELEMENT
    }

    /// Unit canonical normal.
    #[inline]
    pub fn facet_normal(&self, f: usize) -> [f64; 3] {
        self.facet_normals[f]
    }

    /// Length (2D) or area (3D).
    #[inline]
    pub fn facet_measure(&self, f: usize) -> f64 {
        self.facet_measures[f]
    }

    pub fn facet_centroid(&self, f: usize) -> [f64; 3] {
        let mut c = [0.0; 3];
        for &v in self.facet(f) {
            for k in 0..3 {
                c[k] += self.coords[v][k];
            }
        }
        c.map(|x| x / self.dim as f64)
    }

    #[inline]
    pub fn volume(&self, e: usize) -> f64 {
        self.volumes[e]
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn centroid(&self, e: usize) -> [f64; 3] {
        let mut c = [0.0; 3];
        for &v in self.element(e) {
            for k in 0..3 {
                c[k] += self.coords[v][k];
            }
        }
        c.map(|x| x / (self.dim + 1) as f64)
    }

    pub fn tag(&self, f: usize) -> Option<BoundaryTag> {
        self.tags[f]
    }

    pub fn boundary_facets(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_facets()).filter(|&f| self.is_boundary_facet(f))
    }

    pub fn facets_with_tag(&self, tag: BoundaryTag) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_facets()).filter(move |&f| self.tags[f] == Some(tag))
    }

    pub fn geometry(&self, e: usize) -> ElementGeometry {
        let d = self.dim;
        let verts = self.element(e);
        let mut vertices = [[0.0; 3]; 4];
        for (l, &v) in verts.iter().enumerate() {
            vertices[l] = self.coords[v];
        }
        // rows of J⁻¹ are the gradients of λ_1..λ_d
        let mut jac = [[0.0; 3]; 3];
        for c in 0..d {
            for r in 0..d {
                jac[r][c] = vertices[c + 1][r] - vertices[0][r];
            }
        }
        let inv = small_inverse(d, &jac);
        let mut grad_lambda = [[0.0; 3]; 4];
        for i in 0..d {
            grad_lambda[i + 1] = [inv[i][0], inv[i][1], inv[i][2]];
        }
        for k in 0..d {
            grad_lambda[0][k] = -(1..=d).map(|i| grad_lambda[i][k]).sum::<f64>();
        }
        ElementGeometry {
            volume: self.volumes[e],
            vertices,
            grad_lambda,
        }
    }

    /// Largest circumradius-to-inradius ratio over all elements.
    pub fn shape_regularity(&self) -> f64 {
        (0..self.num_elements())
            .map(|e| {
                let g = self.geometry(e);
                let nv = self.dim + 1;
                // inradius = d |T| / total facet measure
                let surface: f64 = self.element_facets(e).iter().map(|&f| self.facet_measures[f]).sum();
                let inradius = self.dim as f64 * g.volume / surface;
                let circ = circumradius(self.dim, &g.vertices[..nv]);
                circ / inradius
            })
            .fold(0.0, f64::max)
    }

    /// Plain-text dump: a `vertices` section (`id x y [z]`), an `elements`
    /// section (`id v0 v1 ...`) and a `boundary` section
    /// (`facet v0 v1 [v2] tag`).
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dim {}", self.dim);
        let _ = writeln!(s, "vertices {}", self.num_vertices());
        for (i, c) in self.coords.iter().enumerate() {
            let _ = write!(s, "{i}");
            for v in &c[..self.dim] {
                let _ = write!(s, " {v:.17e}");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "elements {}", self.num_elements());
        for e in 0..self.num_elements() {
            let _ = write!(s, "{e}");
            for v in self.element(e) {
                let _ = write!(s, " {v}");
            }
            s.push('\n');
        }
        let nb = self.boundary_facets().count();
        let _ = writeln!(s, "boundary {nb}");
        for f in self.boundary_facets() {
            let _ = write!(s, "{f}");
            for v in self.facet(f) {
                let _ = write!(s, " {v}");
            }
            let tag = self.tags[f].map_or("untagged", BoundaryTag::name);
            let _ = writeln!(s, " {tag}");
        }
        s
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn canonical_normal(dim: usize, coords: &[[f64; 3]], fv: &[usize]) -> ([f64; 3], f64) {
    let raw = if dim == 2 {
        let t = sub(coords[fv[1]], coords[fv[0]]);
        [t[1], -t[0], 0.0]
    } else {
        cross(sub(coords[fv[1]], coords[fv[0]]), sub(coords[fv[2]], coords[fv[0]]))
    };
    let len = norm(raw);
    let measure = if dim == 2 { len } else { 0.5 * len };
    (raw.map(|x| x / len), measure)
}

fn simplex_volume(dim: usize, coords: &[[f64; 3]], verts: &[usize]) -> f64 {
    let a = sub(coords[verts[1]], coords[verts[0]]);
    let b = sub(coords[verts[2]], coords[verts[0]]);
    if dim == 2 {
        0.5 * (a[0] * b[1] - a[1] * b[0]).abs()
    } else {
        let c = sub(coords[verts[3]], coords[verts[0]]);
        let n = cross(a, b);
        (n[0] * c[0] + n[1] * c[1] + n[2] * c[2]).abs() / 6.0
    }
}

fn small_inverse(d: usize, m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut inv = [[0.0; 3]; 3];
    if d == 2 {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        inv[0][0] = m[1][1] / det;
        inv[0][1] = -m[0][1] / det;
        inv[1][0] = -m[1][0] / det;
        inv[1][1] = m[0][0] / det;
    } else {
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        for i in 0..3 {
            for j in 0..3 {
                let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
            }
        }
    }
    inv
}

fn circumradius(dim: usize, v: &[[f64; 3]]) -> f64 {
    // solve 2 (x_i - x_0)·c = |x_i|² - |x_0|² for the circumcentre
    let mut m = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    let sq = |p: [f64; 3]| p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    for i in 0..dim {
        for k in 0..dim {
            m[i][k] = 2.0 * (v[i + 1][k] - v[0][k]);
        }
        rhs[i] = sq(v[i + 1]) - sq(v[0]);
    }
    let inv = small_inverse(dim, &m);
    let mut c = [0.0; 3];
    for i in 0..dim {
        c[i] = (0..dim).map(|k| inv[i][k] * rhs[k]).sum();
    }
    norm(sub(c, v[0]))
}
