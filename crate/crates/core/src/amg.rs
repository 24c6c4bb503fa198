//! Unsmoothed aggregation AMG with a V(1,1) cycle.
//!
//! Unknowns are grouped into nodes of `block_size` consecutive dofs (after
//! an optional scalar prefix that only the smoother sees). Rows with nothing
//! but a diagonal entry, such as eliminated boundary dofs, are also left to
//! the smoother.

use crate::error::{check_dim, BiotError, Result};
use crate::la::vector::dot;
use crate::la::{Factorization, LinearOperator, SparseMatrix, TripletBuilder};

const UNASSIGNED: usize = usize::MAX;
const SKIPPED: usize = usize::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoother {
    /// Forward sweep before, backward sweep after the coarse correction.
    SymmetricGaussSeidel,
    /// Damped Jacobi.
    Jacobi { omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmgOptions {
    /// Strength threshold: `s_ij >= θ sqrt(s_ii s_jj)`.
    pub theta: f64,
    /// Stop coarsening at or below this many unknowns.
    pub coarse_size: usize,
    pub max_levels: usize,
    pub block_size: usize,
    /// Leading dofs excluded from aggregation on the finest level.
    pub scalar_prefix: usize,
    pub smoother: Smoother,
    pub sweeps: usize,
    pub cycle: Cycle,
}

/// Coarse-level recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cycle {
    /// One coarse visit per level.
    V,
    /// Two stationary coarse visits per level.
    W,
    /// Two coarse visits per level combined by a flexible conjugate
    /// gradient step; nonlinear, so use it under a flexible outer method.
    K,
}

impl Default for AmgOptions {
    fn default() -> Self {
        Self {
            theta: 0.08,
            coarse_size: 200,
            max_levels: 25,
            block_size: 1,
            scalar_prefix: 0,
            smoother: Smoother::SymmetricGaussSeidel,
            sweeps: 1,
            cycle: Cycle::V,
        }
    }
}

impl AmgOptions {
    pub fn with_block_size(mut self, b: usize) -> Self {
        self.block_size = b;
        self
    }

    pub fn with_scalar_prefix(mut self, n: usize) -> Self {
        self.scalar_prefix = n;
        self
    }

    pub fn with_cycle(mut self, cycle: Cycle) -> Self {
        self.cycle = cycle;
        self
    }
}

#[derive(Debug)]
struct Level {
    a: SparseMatrix,
    /// Fine-to-coarse prolongation (absent on the coarsest level).
    p: Option<SparseMatrix>,
    pt: Option<SparseMatrix>,
    diag_inv: Vec<f64>,
}

/// A built multigrid hierarchy; applying it runs one V-cycle from a zero
/// initial guess.
#[derive(Debug)]
pub struct AmgHierarchy {
    levels: Vec<Level>,
    coarse: Factorization,
    /// Aggregate id per fine node for each level (for inspection).
    aggregates: Vec<Vec<usize>>,
    opts: AmgOptions,
}

impl AmgHierarchy {
    pub fn setup(a: &SparseMatrix, opts: AmgOptions) -> Result<Self> {
        check_dim("AMG matrix (square)", a.nrows(), a.ncols())?;
        if opts.block_size == 0 {
            return Err(BiotError::InvalidParameter("AMG block size must be positive".into()));
        }
        if opts.scalar_prefix > a.nrows() || (a.nrows() - opts.scalar_prefix) % opts.block_size != 0 {
            return Err(BiotError::InvalidParameter(
                "AMG block size does not divide the unknown count".into(),
            ));
        }
        let mut levels = Vec::new();
        let mut aggregates = Vec::new();
        let mut current = a.clone();
        let mut prefix = opts.scalar_prefix;
        while current.nrows() > opts.coarse_size && levels.len() + 1 < opts.max_levels {
            let (agg, p) = aggregate(&current, prefix, opts.block_size, opts.theta);
            if p.ncols() == 0 || p.ncols() >= current.nrows() {
                break;
            }
            let pt = p.transpose();
            let coarse = pt.matmul(&current)?.matmul(&p)?;
            let diag_inv = inverse_diagonal(&current)?;
            levels.push(Level {
                a: current,
                p: Some(p),
                pt: Some(pt),
                diag_inv,
            });
            aggregates.push(agg);
            current = coarse;
            prefix = 0;
        }
        let coarse = match Factorization::cholesky(&current) {
            Ok(f) => f,
            Err(_) => Factorization::lu(&current)?,
        };
        let diag_inv = inverse_diagonal(&current)?;
        levels.push(Level {
            a: current,
            p: None,
            pt: None,
            diag_inv,
        });
        Ok(Self {
            levels,
            coarse,
            aggregates,
            opts,
        })
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level_matrix(&self, l: usize) -> &SparseMatrix {
        &self.levels[l].a
    }

    pub fn prolongation(&self, l: usize) -> Option<&SparseMatrix> {
        self.levels[l].p.as_ref()
    }

    /// Aggregate id of every node on level `l` (`usize::MAX - 1` marks
    /// smoother-only nodes).
    pub fn aggregates(&self, l: usize) -> &[usize] {
        &self.aggregates[l]
    }

    pub fn operator_complexity(&self) -> f64 {
        let fine = self.levels[0].a.nnz() as f64;
        self.levels.iter().map(|l| l.a.nnz() as f64).sum::<f64>() / fine
    }

    /// One cycle (V or W per the options): `z ≈ A⁻¹ r`.
    pub fn vcycle(&self, r: &[f64], z: &mut [f64]) {
        self.cycle(0, r, z);
    }

    fn cycle(&self, l: usize, r: &[f64], z: &mut [f64]) {
        let lev = &self.levels[l];
        if l + 1 == self.levels.len() {
            z.copy_from_slice(r);
            self.coarse.solve_in_place(z);
            return;
        }
        z.iter_mut().for_each(|v| *v = 0.0);
        for _ in 0..self.opts.sweeps {
            self.smooth(lev, r, z, true);
        }
        let mut res = r.to_vec();
        lev.a.spmv_add(-1.0, z, &mut res);
        let pt = lev.pt.as_ref().expect("interior level has restriction");
        let p = lev.p.as_ref().expect("interior level has prolongation");
        let rc = pt.spmv(&res).expect("conforming restriction");
        let mut zc = vec![0.0; rc.len()];
        self.cycle(l + 1, &rc, &mut zc);
        if l + 2 < self.levels.len() {
            self.accelerate(l + 1, &rc, &mut zc);
        }
        p.spmv_add(1.0, &zc, z);
        for _ in 0..self.opts.sweeps {
            self.smooth(lev, r, z, false);
        }
    }

    /// Second coarse visit of a W- or K-cycle on level `l`, given the first
    /// approximation `zc` of `A_l⁻¹ rc`.
    fn accelerate(&self, l: usize, rc: &[f64], zc: &mut [f64]) {
        let ac = &self.levels[l].a;
        match self.opts.cycle {
            Cycle::V => {}
            Cycle::W => {
                let mut rr = rc.to_vec();
                ac.spmv_add(-1.0, zc, &mut rr);
                let mut dc = vec![0.0; rc.len()];
                self.cycle(l, &rr, &mut dc);
                zc.iter_mut().zip(&dc).for_each(|(a, b)| *a += b);
            }
            Cycle::K => {
                let v = ac.spmv(zc).expect("square level matrix");
                let rho1 = dot(zc, &v);
                let alpha1 = dot(zc, rc);
                if !(rho1 > 0.0) {
                    return;
                }
                let mut r2 = rc.to_vec();
                r2.iter_mut().zip(&v).for_each(|(a, b)| *a -= alpha1 / rho1 * b);
                if dot(&r2, &r2).sqrt() <= 0.25 * dot(rc, rc).sqrt() {
                    zc.iter_mut().for_each(|a| *a *= alpha1 / rho1);
                    return;
                }
                let mut d = vec![0.0; rc.len()];
                self.cycle(l, &r2, &mut d);
                let w = ac.spmv(&d).expect("square level matrix");
                let gamma = dot(&d, &v);
                let beta = dot(&d, &w);
                let alpha2 = dot(&d, &r2);
                let rho2 = beta - gamma * gamma / rho1;
                if !(rho2 > 0.0) {
                    zc.iter_mut().for_each(|a| *a *= alpha1 / rho1);
                    return;
                }
                let c1 = alpha1 / rho1 - gamma * alpha2 / (rho1 * rho2);
                let c2 = alpha2 / rho2;
                zc.iter_mut().zip(&d).for_each(|(a, b)| *a = c1 * *a + c2 * b);
            }
        }
    }

    fn smooth(&self, lev: &Level, r: &[f64], z: &mut [f64], forward: bool) {
        let a = &lev.a;
        match self.opts.smoother {
            Smoother::SymmetricGaussSeidel => {
                let n = a.nrows();
                let mut step = |i: usize| {
                    let (cols, vals) = a.row(i);
                    let mut s = r[i];
                    for (&c, &v) in cols.iter().zip(vals) {
                        if c != i {
                            s -= v * z[c];
                        }
                    }
                    z[i] = s * lev.diag_inv[i];
                };
                if forward {
                    (0..n).for_each(&mut step);
                } else {
                    (0..n).rev().for_each(&mut step);
                }
            }
            Smoother::Jacobi { omega } => {
                let mut res = r.to_vec();
                a.spmv_add(-1.0, z, &mut res);
                for i in 0..z.len() {
                    z[i] += omega * lev.diag_inv[i] * res[i];
                }
            }
        }
    }
}

impl LinearOperator for AmgHierarchy {
    fn nrows(&self) -> usize {
        self.levels[0].a.nrows()
    }
    fn ncols(&self) -> usize {
        self.levels[0].a.ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.vcycle(x, y)
    }
}

fn inverse_diagonal(a: &SparseMatrix) -> Result<Vec<f64>> {
    a.diagonal()
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if d > 0.0 {
                Ok(1.0 / d)
            } else {
                Err(BiotError::Singular { pivot: i })
            }
        })
        .collect()
}

/// Greedy three-pass aggregation on the node strength graph. Returns the
/// aggregate of every node and the piecewise-constant prolongation (empty
/// coarse columns removed).
fn aggregate(a: &SparseMatrix, prefix: usize, b: usize, theta: f64) -> (Vec<usize>, SparseMatrix) {
    let n = a.nrows();
    let nodes = prefix + (n - prefix) / b;
    let node_of = |dof: usize| if dof < prefix { dof } else { prefix + (dof - prefix) / b };
    let node_dofs = |node: usize| -> std::ops::Range<usize> {
        if node < prefix {
            node..node + 1
        } else {
            let s = prefix + (node - prefix) * b;
            s..s + b
        }
    };
    let identity_row = |i: usize| {
        let (cols, _) = a.row(i);
        cols.iter().zip(a.row(i).1).all(|(&c, &v)| c == i || v == 0.0)
    };
    let active_dof: Vec<bool> = (0..n).map(|i| !identity_row(i)).collect();

    // node strength graph (squared Frobenius norms of node blocks)
    let mut state = vec![UNASSIGNED; nodes];
    let mut diag_strength = vec![0.0; nodes];
    let mut neighbours: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nodes];
    let mut acc: Vec<f64> = vec![0.0; nodes];
    let mut marker = vec![usize::MAX; nodes];
    for node in 0..nodes {
        if node < prefix || !node_dofs(node).any(|i| active_dof[i]) {
            state[node] = SKIPPED;
        }
    }
    let mut touched = Vec::new();
    for node in 0..nodes {
        if state[node] == SKIPPED {
            continue;
        }
        touched.clear();
        for i in node_dofs(node) {
            if !active_dof[i] {
                continue;
            }
            let (cols, vals) = a.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                if !active_dof[c] {
                    continue;
                }
                let m = node_of(c);
                if marker[m] != node {
                    marker[m] = node;
                    acc[m] = 0.0;
                    touched.push(m);
                }
                acc[m] += v * v;
            }
        }
        for &m in &touched {
            if m == node {
                diag_strength[node] = acc[m].sqrt();
            } else if state[m] != SKIPPED {
                neighbours[node].push((m, acc[m].sqrt()));
            }
        }
    }
    let strong: Vec<Vec<(usize, f64)>> = (0..nodes)
        .map(|i| {
            neighbours[i]
                .iter()
                .copied()
                .filter(|&(j, s)| s >= theta * (diag_strength[i] * diag_strength[j]).sqrt())
                .collect()
        })
        .collect();

    let mut next = 0;
    // pass 1: whole untouched neighbourhoods
    for i in 0..nodes {
        if state[i] != UNASSIGNED {
            continue;
        }
        if strong[i].iter().all(|&(j, _)| state[j] == UNASSIGNED) {
            state[i] = next;
            for &(j, _) in &strong[i] {
                state[j] = next;
            }
            next += 1;
        }
    }
    // pass 2: join the most strongly connected aggregate
    let snapshot = state.clone();
    for i in 0..nodes {
        if state[i] != UNASSIGNED {
            continue;
        }
        let best = strong[i]
            .iter()
            .filter(|&&(j, _)| snapshot[j] != UNASSIGNED && snapshot[j] != SKIPPED)
            .fold(None::<(usize, f64)>, |best, &(j, s)| match best {
                Some((_, bs)) if bs >= s => best,
                _ => Some((j, s)),
            });
        if let Some((j, _)) = best {
            state[i] = snapshot[j];
        }
    }
    // pass 3: leftovers with their unassigned strong neighbours
    for i in 0..nodes {
        if state[i] != UNASSIGNED {
            continue;
        }
        state[i] = next;
        for &(j, _) in &strong[i] {
            if state[j] == UNASSIGNED {
                state[j] = next;
            }
        }
        next += 1;
    }

    // prolongation: one coarse dof per (aggregate, component)
    let mut t = TripletBuilder::with_capacity(n, next * b, n);
    for node in 0..nodes {
        if state[node] == SKIPPED {
            continue;
        }
        for (c, i) in node_dofs(node).enumerate() {
            if active_dof[i] {
                t.push(i, state[node] * b + c, 1.0);
            }
        }
    }
    let p = t.build();
    // drop coarse columns that received no fine dof
    let mut used = vec![false; p.ncols()];
    for &c in p.col_indices() {
        used[c] = true;
    }
    let mut remap = vec![usize::MAX; p.ncols()];
    let mut k = 0;
    for (c, &u) in used.iter().enumerate() {
        if u {
            remap[c] = k;
            k += 1;
        }
    }
    let mut t = TripletBuilder::with_capacity(n, k, p.nnz());
    for i in 0..n {
        let (cols, vals) = p.row(i);
        for (&c, &v) in cols.iter().zip(vals) {
            t.push(i, remap[c], v);
        }
    }
    (state, t.build())
}
