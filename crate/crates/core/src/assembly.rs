//! Mass and PPIFE stiffness operators, load vectors and Dirichlet
//! elimination.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Side};
use crate::ife::GlobalSpace;
use crate::linalg::{CsrMatrix, TripletBuffer};
use crate::quadrature::{edge_quadrature, element_quadrature, Strength};

/// Gauss points per edge piece for operator assembly.
const EDGE_POINTS: usize = 3;
/// Gauss points per edge piece for functionals of non-polynomial data.
const EDGE_POINTS_FINE: usize = 5;

/// Interface-edge terms of the bilinear form: `ε` selects the symmetric
/// (`-1`), incomplete (`0`) or nonsymmetric (`+1`) variant, and each interior
/// interface edge `B` carries the penalty `sigma0 / |B|^alpha`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltyConfig {
    pub epsilon: f64,
    pub sigma0: f64,
    pub alpha: f64,
}

impl PenaltyConfig {
    pub fn new(epsilon: f64, sigma0: f64, alpha: f64) -> Result<Self> {
        if ![-1.0, 0.0, 1.0].contains(&epsilon) {
            return Err(Error::InvalidArgument(format!("epsilon must be -1, 0 or 1, got {epsilon}")));
        }
        if !(sigma0 >= 0.0) || !sigma0.is_finite() {
            return Err(Error::InvalidArgument(format!("sigma0 must be nonnegative, got {sigma0}")));
        }
        if epsilon != 1.0 && sigma0 == 0.0 {
            return Err(Error::InvalidArgument(format!("epsilon = {epsilon} requires a positive sigma0")));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { epsilon, sigma0, alpha })
    }

    pub fn nonsymmetric(sigma0: f64) -> Self {
        Self { epsilon: 1.0, sigma0, alpha: 1.0 }
    }

    pub fn symmetric(sigma0: f64) -> Self {
        Self { epsilon: -1.0, sigma0, alpha: 1.0 }
    }

    pub fn is_symmetric(&self) -> bool {
        self.epsilon == -1.0
    }

    pub fn penalty(&self, edge_length: f64) -> f64 {
        self.sigma0 / edge_length.powf(self.alpha)
    }
}

type Block4 = [[f64; 4]; 4];

fn element_blocks(space: &GlobalSpace, k: usize) -> (Block4, Block4) {
    let corners = space.mesh.element_corners(k);
    let basis = &space.bases[k];
    let mut mass = [[0.0; 4]; 4];
    let mut stiff = [[0.0; 4]; 4];
    for q in element_quadrature(&corners, &space.classification.elements[k], Strength::Assembly) {
        let vals = basis.values_on(q.side, q.point);
        let grads = basis.grads_on(q.side, q.point);
        let wb = q.weight * space.beta.on(q.side);
        for i in 0..4 {
            for j in i..4 {
                mass[i][j] += q.weight * (vals[i] * vals[j]);
                stiff[i][j] += wb * grads[i].dot(grads[j]);
            }
        }
    }
    for i in 0..4 {
        for j in 0..i {
            mass[i][j] = mass[j][i];
            stiff[i][j] = stiff[j][i];
        }
    }
    (mass, stiff)
}

/// Jumps and averages of `β grad φ . n` at one edge point, for the sorted
/// distinct dofs of both neighbors.
struct EdgeTraces {
    jump: Vec<f64>,
    avg_flux: Vec<f64>,
}

fn edge_traces(space: &GlobalSpace, k1: usize, k2: usize, normal: Point2, p: Point2, dofs: &[usize]) -> EdgeTraces {
    let mut jump = vec![0.0; dofs.len()];
    let mut avg_flux = vec![0.0; dofs.len()];
    for (kk, sign) in [(k1, 1.0), (k2, -1.0)] {
        let basis = &space.bases[kk];
        let side = basis.side_at(p);
        let vals = basis.values_on(side, p);
        let grads = basis.grads_on(side, p);
        let beta = space.beta.on(side);
        for (local, &g) in space.element_dofs(kk).iter().enumerate() {
            let slot = dofs.binary_search(&g).expect("element dof in edge dof list");
            jump[slot] += sign * vals[local];
            avg_flux[slot] += 0.5 * beta * grads[local].dot(normal);
        }
    }
    EdgeTraces { jump, avg_flux }
}

fn edge_dofs(space: &GlobalSpace, k1: usize, k2: usize) -> Vec<usize> {
    let mut dofs: Vec<usize> = space.element_dofs(k1).iter().chain(space.element_dofs(k2).iter()).copied().collect();
    dofs.sort_unstable();
    dofs.dedup();
    dofs
}

/// Local matrix of the interface-edge terms on edge `e`, rows are test
/// functions and columns trial functions.
fn edge_block(space: &GlobalSpace, e: usize, cfg: &PenaltyConfig) -> (Vec<usize>, Vec<Vec<f64>>) {
    let edge = &space.mesh.edges[e];
    let (k1, Some(k2)) = edge.elements else { unreachable!("interface edges are interior") };
    let [va, vb] = edge.vertices;
    let (a, b) = (space.mesh.vertices[va], space.mesh.vertices[vb]);
    let dofs = edge_dofs(space, k1, k2);
    let m = dofs.len();
    let pen = cfg.penalty(edge.length);
    let mut block = vec![vec![0.0; m]; m];
    for q in edge_quadrature(a, b, space.classification.edge_split[e], EDGE_POINTS, &space.curve) {
        let tr = edge_traces(space, k1, k2, edge.normal, q.point, &dofs);
        for i in 0..m {
            for j in 0..m {
                let consistency = -tr.avg_flux[j] * tr.jump[i];
                let symmetry = cfg.epsilon * tr.avg_flux[i] * tr.jump[j];
                let penalty = pen * (tr.jump[i] * tr.jump[j]);
                block[i][j] += q.weight * (consistency + symmetry + penalty);
            }
        }
    }
    if cfg.is_symmetric() {
        for i in 0..m {
            for j in 0..i {
                block[i][j] = block[j][i];
            }
        }
    }
    (dofs, block)
}

fn push_block4(buf: &mut TripletBuffer, dofs: [usize; 4], block: &Block4) {
    for (i, &gi) in dofs.iter().enumerate() {
        for (j, &gj) in dofs.iter().enumerate() {
            buf.push(gi, gj, block[i][j]);
        }
    }
}

fn push_edge_blocks(space: &GlobalSpace, cfg: &PenaltyConfig, buf: &mut TripletBuffer) {
    let blocks: Vec<_> =
        space.classification.interior_interface_edges.par_iter().map(|&e| edge_block(space, e, cfg)).collect();
    for (dofs, block) in blocks {
        for (i, &gi) in dofs.iter().enumerate() {
            for (j, &gj) in dofs.iter().enumerate() {
                buf.push(gi, gj, block[i][j]);
            }
        }
    }
}

/// Mass matrix and PPIFE stiffness matrix in one element sweep.
pub fn assemble_operators(space: &GlobalSpace, cfg: &PenaltyConfig) -> (CsrMatrix, CsrMatrix) {
    let n = space.n_dofs();
    let blocks: Vec<(Block4, Block4)> = (0..space.mesh.n_elements()).into_par_iter().map(|k| element_blocks(space, k)).collect();
    let mut mass = TripletBuffer::with_capacity(n, 16 * blocks.len());
    let mut stiff = TripletBuffer::with_capacity(n, 16 * blocks.len());
    for (k, (mb, sb)) in blocks.iter().enumerate() {
        let dofs = space.element_dofs(k);
        push_block4(&mut mass, dofs, mb);
        push_block4(&mut stiff, dofs, sb);
    }
    push_edge_blocks(space, cfg, &mut stiff);
    (mass.compress(), stiff.compress())
}

/// `M_ij = sum_K ∫_K φ_j φ_i`.
pub fn assemble_mass(space: &GlobalSpace) -> CsrMatrix {
    let n = space.n_dofs();
    let mut buf = TripletBuffer::with_capacity(n, 16 * space.mesh.n_elements());
    let blocks: Vec<Block4> = (0..space.mesh.n_elements()).into_par_iter().map(|k| element_blocks(space, k).0).collect();
    for (k, b) in blocks.iter().enumerate() {
        push_block4(&mut buf, space.element_dofs(k), b);
    }
    buf.compress()
}

/// Volume term `sum_K ∫_K β grad φ_j . grad φ_i` plus the consistency,
/// symmetrization and penalty terms on interior interface edges.
pub fn assemble_stiffness(space: &GlobalSpace, cfg: &PenaltyConfig) -> CsrMatrix {
    let n = space.n_dofs();
    let mut buf = TripletBuffer::with_capacity(n, 16 * space.mesh.n_elements());
    let blocks: Vec<Block4> = (0..space.mesh.n_elements()).into_par_iter().map(|k| element_blocks(space, k).1).collect();
    for (k, b) in blocks.iter().enumerate() {
        push_block4(&mut buf, space.element_dofs(k), b);
    }
    push_edge_blocks(space, cfg, &mut buf);
    buf.compress()
}

/// Volume part of the stiffness matrix only.
pub fn assemble_volume_stiffness(space: &GlobalSpace) -> CsrMatrix {
    let n = space.n_dofs();
    let mut buf = TripletBuffer::with_capacity(n, 16 * space.mesh.n_elements());
    for k in 0..space.mesh.n_elements() {
        push_block4(&mut buf, space.element_dofs(k), &element_blocks(space, k).1);
    }
    buf.compress()
}

fn scatter(space: &GlobalSpace, local: Vec<[f64; 4]>) -> Vec<f64> {
    let mut out = vec![0.0; space.n_dofs()];
    for (k, vals) in local.into_iter().enumerate() {
        for (&g, v) in space.element_dofs(k).iter().zip(vals) {
            out[g] += v;
        }
    }
    out
}

/// `F_i = sum_K ∫_K f φ_i`. `f` receives the exact-curve side of each
/// quadrature point; the basis branch follows the element's chord split.
pub fn assemble_load(space: &GlobalSpace, f: impl Fn(Point2, Side) -> f64 + Sync) -> Vec<f64> {
    let local: Vec<[f64; 4]> = (0..space.mesh.n_elements())
        .into_par_iter()
        .map(|k| {
            let corners = space.mesh.element_corners(k);
            let basis = &space.bases[k];
            let mut acc = [0.0; 4];
            for q in element_quadrature(&corners, &space.classification.elements[k], Strength::Error) {
                let fw = q.weight * f(q.point, space.curve.side(q.point));
                let vals = basis.values_on(q.side, q.point);
                for i in 0..4 {
                    acc[i] += fw * vals[i];
                }
            }
            acc
        })
        .collect();
    scatter(space, local)
}

/// `a_ε(w, φ_i)` for a continuous `w` with continuous normal flux, given
/// the flux field `β grad w`: the jump terms of `w` vanish, leaving
/// `sum_K ∫_K β grad w . grad φ_i - sum_B ∫_B (β grad w . n) [φ_i]`.
pub fn assemble_flux_functional(space: &GlobalSpace, flux: impl Fn(Point2) -> Point2 + Sync) -> Vec<f64> {
    let local: Vec<[f64; 4]> = (0..space.mesh.n_elements())
        .into_par_iter()
        .map(|k| {
            let corners = space.mesh.element_corners(k);
            let basis = &space.bases[k];
            let mut acc = [0.0; 4];
            for q in element_quadrature(&corners, &space.classification.elements[k], Strength::Error) {
                let fl = flux(q.point);
                let grads = basis.grads_on(q.side, q.point);
                for i in 0..4 {
                    acc[i] += q.weight * fl.dot(grads[i]);
                }
            }
            acc
        })
        .collect();
    let mut out = scatter(space, local);

    let edges: Vec<(Vec<usize>, Vec<f64>)> = space
        .classification
        .interior_interface_edges
        .par_iter()
        .map(|&e| {
            let edge = &space.mesh.edges[e];
            let (k1, Some(k2)) = edge.elements else { unreachable!("interface edges are interior") };
            let [va, vb] = edge.vertices;
            let (a, b) = (space.mesh.vertices[va], space.mesh.vertices[vb]);
            let dofs = edge_dofs(space, k1, k2);
            let mut acc = vec![0.0; dofs.len()];
            for q in edge_quadrature(a, b, space.classification.edge_split[e], EDGE_POINTS_FINE, &space.curve) {
                let tr = edge_traces(space, k1, k2, edge.normal, q.point, &dofs);
                let fn_ = flux(q.point).dot(edge.normal);
                for (slot, j) in tr.jump.iter().enumerate() {
                    acc[slot] -= q.weight * fn_ * j;
                }
            }
            (dofs, acc)
        })
        .collect();
    for (dofs, acc) in edges {
        for (g, v) in dofs.into_iter().zip(acc) {
            out[g] += v;
        }
    }
    out
}

/// An operator with Dirichlet dofs eliminated symmetrically: rows and
/// columns of constrained dofs are zeroed and their diagonal set to one.
/// The removed columns are kept to lift boundary values into the right
/// side.
#[derive(Clone, Debug)]
pub struct DirichletSystem {
    matrix: CsrMatrix,
    lifting: CsrMatrix,
    dofs: Vec<usize>,
}

impl DirichletSystem {
    pub fn new(op: &CsrMatrix, dofs: &[usize]) -> Self {
        let n = op.dim();
        let mut mask = vec![false; n];
        for &k in dofs {
            mask[k] = true;
        }
        let mut constrained = TripletBuffer::with_capacity(n, op.nnz());
        let mut lifting = TripletBuffer::new(n);
        for i in 0..n {
            if mask[i] {
                constrained.push(i, i, 1.0);
                continue;
            }
            for (j, v) in op.row(i) {
                if mask[j] {
                    lifting.push(i, j, v);
                } else {
                    constrained.push(i, j, v);
                }
            }
        }
        Self { matrix: constrained.compress(), lifting: lifting.compress(), dofs: dofs.to_vec() }
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dofs(&self) -> &[usize] {
        &self.dofs
    }

    /// Moves known values into `rhs`: `values[m]` is the value of dof
    /// `dofs()[m]`.
    pub fn constrain_rhs(&self, rhs: &mut [f64], values: &[f64]) {
        assert_eq!(values.len(), self.dofs.len());
        let mut g = vec![0.0; rhs.len()];
        for (&k, &v) in self.dofs.iter().zip(values) {
            g[k] = v;
        }
        let lift = self.lifting.spmv(&g);
        for (r, l) in rhs.iter_mut().zip(lift) {
            *r -= l;
        }
        for (&k, &v) in self.dofs.iter().zip(values) {
            rhs[k] = v;
        }
    }
}

/// Constrained copy of `op` and `rhs` with `u[dofs[m]] = values[m]`.
pub fn apply_dirichlet(op: &CsrMatrix, rhs: &[f64], dofs: &[usize], values: &[f64]) -> (CsrMatrix, Vec<f64>) {
    let sys = DirichletSystem::new(op, dofs);
    let mut rhs = rhs.to_vec();
    sys.constrain_rhs(&mut rhs, values);
    (sys.matrix, rhs)
}
