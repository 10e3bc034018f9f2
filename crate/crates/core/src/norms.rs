//! Error norms of finite element functions against an exact solution.
//!
//! The exact solution is evaluated by the exact-curve side of each point,
//! the discrete function by its element basis (chord side).

use rayon::prelude::*;

use crate::assembly::PenaltyConfig;
use crate::geometry::Point2;
use crate::ife::GlobalSpace;
use crate::manufactured::ExactSolution;
use crate::quadrature::{edge_quadrature, element_quadrature, Strength};

/// Samples per element side for the maximum norm and field export.
pub const SAMPLES_PER_SIDE: usize = 5;

/// Uniform `5 x 5` sample grid of element `k`, row-major from the
/// lower-left vertex; includes the four vertices.
pub fn element_samples(space: &GlobalSpace, k: usize) -> Vec<Point2> {
    let rect = space.mesh.element_rect(k);
    let m = (SAMPLES_PER_SIDE - 1) as f64;
    let mut out = Vec::with_capacity(SAMPLES_PER_SIDE * SAMPLES_PER_SIDE);
    for j in 0..SAMPLES_PER_SIDE {
        for i in 0..SAMPLES_PER_SIDE {
            out.push(Point2::new(
                rect.origin.x + rect.width * i as f64 / m,
                rect.origin.y + rect.height * j as f64 / m,
            ));
        }
    }
    out
}

/// Sum over elements of `integrand(k, point, weight, side)`, evaluated in
/// parallel and reduced in element order.
fn element_sum(space: &GlobalSpace, strength: Strength, integrand: impl Fn(usize, &crate::quadrature::QuadPoint) -> f64 + Sync) -> f64 {
    let per_element: Vec<f64> = (0..space.mesh.n_elements())
        .into_par_iter()
        .map(|k| {
            let corners = space.mesh.element_corners(k);
            element_quadrature(&corners, &space.classification.elements[k], strength)
                .iter()
                .map(|q| integrand(k, q))
                .sum()
        })
        .collect();
    per_element.iter().sum()
}

pub fn l2_error_with(space: &GlobalSpace, coeffs: &[f64], exact: impl Fn(Point2) -> f64 + Sync, strength: Strength) -> f64 {
    element_sum(space, strength, |k, q| {
        let e = space.eval_on(coeffs, k, q.side, q.point) - exact(q.point);
        q.weight * e * e
    })
    .sqrt()
}

/// `(sum_K ∫_K (u_h - u)^2)^(1/2)`.
pub fn l2_error(space: &GlobalSpace, coeffs: &[f64], exact: impl Fn(Point2) -> f64 + Sync) -> f64 {
    l2_error_with(space, coeffs, exact, Strength::Error)
}

pub fn h1_semi_error_with(
    space: &GlobalSpace,
    coeffs: &[f64],
    exact_grad: impl Fn(Point2) -> Point2 + Sync,
    strength: Strength,
) -> f64 {
    element_sum(space, strength, |k, q| {
        let e = space.grad_on(coeffs, k, q.side, q.point) - exact_grad(q.point);
        q.weight * e.dot(e)
    })
    .sqrt()
}

/// Broken `(sum_K ∫_K |grad u_h - grad u|^2)^(1/2)`, without β weighting.
pub fn h1_semi_error(space: &GlobalSpace, coeffs: &[f64], exact_grad: impl Fn(Point2) -> Point2 + Sync) -> f64 {
    h1_semi_error_with(space, coeffs, exact_grad, Strength::Error)
}

/// Energy norm of `u_h - u`: the β-weighted broken gradient plus the
/// penalty on jumps across interior interface edges. `u` is continuous,
/// so only jumps of `u_h` contribute.
pub fn energy_error(
    space: &GlobalSpace,
    coeffs: &[f64],
    exact_grad: impl Fn(Point2) -> Point2 + Sync,
    cfg: &PenaltyConfig,
) -> f64 {
    let volume = element_sum(space, Strength::Error, |k, q| {
        let e = space.grad_on(coeffs, k, q.side, q.point) - exact_grad(q.point);
        q.weight * space.beta.on(space.curve.side(q.point)) * e.dot(e)
    });
    let per_edge: Vec<f64> = space
        .classification
        .interior_interface_edges
        .par_iter()
        .map(|&e| {
            let edge = &space.mesh.edges[e];
            let (k1, Some(k2)) = edge.elements else { unreachable!("interface edges are interior") };
            let [va, vb] = edge.vertices;
            let (a, b) = (space.mesh.vertices[va], space.mesh.vertices[vb]);
            let pen = cfg.penalty(edge.length);
            edge_quadrature(a, b, space.classification.edge_split[e], 5, &space.curve)
                .iter()
                .map(|q| {
                    let jump = space.eval(coeffs, k1, q.point) - space.eval(coeffs, k2, q.point);
                    q.weight * pen * jump * jump
                })
                .sum()
        })
        .collect();
    (volume + per_edge.iter().sum::<f64>()).sqrt()
}

/// Largest `|u_h - u|` over the per-element sample grids.
pub fn linf_error(space: &GlobalSpace, coeffs: &[f64], exact: impl Fn(Point2) -> f64 + Sync) -> f64 {
    (0..space.mesh.n_elements())
        .into_par_iter()
        .map(|k| {
            element_samples(space, k)
                .into_iter()
                .map(|p| (space.eval(coeffs, k, p) - exact(p)).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Largest `|u_h - u|` over mesh vertices only.
pub fn linf_nodal_error(space: &GlobalSpace, coeffs: &[f64], exact: impl Fn(Point2) -> f64) -> f64 {
    space.mesh.vertices.iter().zip(coeffs).map(|(&p, c)| (c - exact(p)).abs()).fold(0.0, f64::max)
}

/// `log2(coarse / fine)`.
pub fn rate(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Errors of one run, plus rates against the next coarser run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorRecord {
    pub n_side: usize,
    pub h: f64,
    pub dt: f64,
    pub linf: f64,
    /// Vertex-only maximum error, reported alongside the sampled one.
    pub linf_nodal: f64,
    pub l2: f64,
    pub h1: f64,
    pub energy: f64,
    pub linf_rate: Option<f64>,
    pub l2_rate: Option<f64>,
    pub h1_rate: Option<f64>,
    pub energy_rate: Option<f64>,
}

impl ErrorRecord {
    /// All four norms of `coeffs` against `exact` at time `t`.
    pub fn measure(space: &GlobalSpace, coeffs: &[f64], exact: &dyn ExactSolution, t: f64, cfg: &PenaltyConfig, dt: f64) -> Self {
        let u = |p| exact.value(p, t);
        let g = |p| exact.gradient(p, t);
        Self {
            n_side: space.mesh.n_side,
            h: space.mesh.h,
            dt,
            linf: linf_error(space, coeffs, u),
            linf_nodal: linf_nodal_error(space, coeffs, u),
            l2: l2_error(space, coeffs, u),
            h1: h1_semi_error(space, coeffs, g),
            energy: energy_error(space, coeffs, g, cfg),
            linf_rate: None,
            l2_rate: None,
            h1_rate: None,
            energy_rate: None,
        }
    }

    pub fn set_rates_from(&mut self, coarser: &ErrorRecord) {
        self.linf_rate = Some(rate(coarser.linf, self.linf));
        self.l2_rate = Some(rate(coarser.l2, self.l2));
        self.h1_rate = Some(rate(coarser.h1, self.h1));
        self.energy_rate = Some(rate(coarser.energy, self.energy));
    }
}

/// Fills rates of records ordered by decreasing `h`; the first has none.
pub fn fill_rates(records: &mut [ErrorRecord]) {
    if let Some(first) = records.first_mut() {
        first.linf_rate = None;
        first.l2_rate = None;
        first.h1_rate = None;
        first.energy_rate = None;
    }
    for i in 1..records.len() {
        let prev = records[i - 1];
        records[i].set_rates_from(&prev);
    }
}
