//! Gauss rules on segments, triangles and squares, and the side-tagged
//! composite rules used on cut elements and split edges.

use std::sync::OnceLock;

use crate::geometry::{triangle_area, InterfaceCurve, Point2, Side};
use crate::mesh::ElementClass;

/// Gauss–Legendre rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct SegmentRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Rule on the reference triangle `(0,0), (1,0), (0,1)`; points are given
/// by their `(x, y)` reference coordinates and weights sum to `1/2`.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

/// Integration accuracy requested from element rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strength {
    /// Degree-4 triangles, 3x3 tensor rule: exact for products of bilinears.
    Assembly,
    /// Degree-7 triangles, 5x5 tensor rule: for error norms and loads.
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadPoint {
    pub point: Point2,
    /// Includes the geometric measure.
    pub weight: f64,
    pub side: Side,
}

pub type TaggedQuadrature = Vec<QuadPoint>;

fn gauss_legendre_symmetric(half_nodes: &[f64], half_weights: &[f64], center: Option<f64>) -> SegmentRule {
    // nodes on [-1, 1] given for the positive half; mapped to [0, 1]
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (&x, &w) in half_nodes.iter().zip(half_weights).rev() {
        nodes.push(0.5 * (1.0 - x));
        weights.push(0.5 * w);
    }
    if let Some(w0) = center {
        nodes.push(0.5);
        weights.push(0.5 * w0);
    }
    for (&x, &w) in half_nodes.iter().zip(half_weights) {
        nodes.push(0.5 * (1.0 + x));
        weights.push(0.5 * w);
    }
    SegmentRule { nodes, weights }
}

/// Gauss–Legendre rule with 2, 3, 4 or 5 points, exact to degree `2n - 1`.
pub fn segment_rule(n_points: usize) -> &'static SegmentRule {
    static RULES: OnceLock<[SegmentRule; 4]> = OnceLock::new();
    let rules = RULES.get_or_init(|| {
        let s35 = (3.0f64 / 5.0).sqrt();
        let r4a = ((3.0 - 2.0 * (6.0f64 / 5.0).sqrt()) / 7.0).sqrt();
        let r4b = ((3.0 + 2.0 * (6.0f64 / 5.0).sqrt()) / 7.0).sqrt();
        let w4a = (18.0 + 30.0f64.sqrt()) / 36.0;
        let w4b = (18.0 - 30.0f64.sqrt()) / 36.0;
        let r5a = (5.0 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
        let r5b = (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
        let w5a = (322.0 + 13.0 * 70.0f64.sqrt()) / 900.0;
        let w5b = (322.0 - 13.0 * 70.0f64.sqrt()) / 900.0;
        [
            gauss_legendre_symmetric(&[1.0 / 3.0f64.sqrt()], &[1.0], None),
            gauss_legendre_symmetric(&[s35], &[5.0 / 9.0], Some(8.0 / 9.0)),
            gauss_legendre_symmetric(&[r4a, r4b], &[w4a, w4b], None),
            gauss_legendre_symmetric(&[r5a, r5b], &[w5a, w5b], Some(128.0 / 225.0)),
        ]
    });
    match n_points {
        2..=5 => &rules[n_points - 2],
        _ => panic!("segment rules exist for 2 to 5 points, got {n_points}"),
    }
}

/// Symmetric triangle rules of polynomial degree 2 (3 points), 4 (6 points)
/// and 7 (20-point collapsed Gauss product).
pub fn triangle_rule(degree: usize) -> &'static TriangleRule {
    static RULES: OnceLock<[TriangleRule; 3]> = OnceLock::new();
    let rules = RULES.get_or_init(|| {
        let deg2 = TriangleRule {
            points: vec![[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]],
            weights: vec![1.0 / 6.0; 3],
        };

        // Dunavant degree 4
        let (a1, w1) = (0.445_948_490_915_965, 0.223_381_589_678_011);
        let (a2, w2) = (0.091_576_213_509_771, 0.109_951_743_655_322);
        let b1 = 1.0 - 2.0 * a1;
        let b2 = 1.0 - 2.0 * a2;
        let deg4 = TriangleRule {
            points: vec![[a1, a1], [b1, a1], [a1, b1], [a2, a2], [b2, a2], [a2, b2]],
            weights: vec![0.5 * w1, 0.5 * w1, 0.5 * w1, 0.5 * w2, 0.5 * w2, 0.5 * w2],
        };

        // Duffy map (u, v) -> (u, (1 - u) v) with Jacobian (1 - u): the
        // pulled-back degree-7 integrand has degree 8 in u and 7 in v.
        let gu = segment_rule(5);
        let gv = segment_rule(4);
        let mut points = Vec::with_capacity(20);
        let mut weights = Vec::with_capacity(20);
        for (&u, &wu) in gu.nodes.iter().zip(&gu.weights) {
            for (&v, &wv) in gv.nodes.iter().zip(&gv.weights) {
                points.push([u, (1.0 - u) * v]);
                weights.push(wu * wv * (1.0 - u));
            }
        }
        let deg7 = TriangleRule { points, weights };
        [deg2, deg4, deg7]
    });
    match degree {
        2 => &rules[0],
        4 => &rules[1],
        7 => &rules[2],
        _ => panic!("triangle rules exist for degree 2, 4 and 7, got {degree}"),
    }
}

impl Strength {
    fn triangle_degree(self) -> usize {
        match self {
            Strength::Assembly => 4,
            Strength::Error => 7,
        }
    }

    fn tensor_points(self) -> usize {
        match self {
            Strength::Assembly => 3,
            Strength::Error => 5,
        }
    }
}

/// Maps a reference triangle rule onto `tri`, appending tagged points.
pub fn push_triangle(out: &mut TaggedQuadrature, tri: &[Point2; 3], rule: &TriangleRule, side: Side) {
    let jac = 2.0 * triangle_area(tri);
    let (e1, e2) = (tri[1] - tri[0], tri[2] - tri[0]);
    for (r, &w) in rule.points.iter().zip(&rule.weights) {
        out.push(QuadPoint { point: tri[0] + e1 * r[0] + e2 * r[1], weight: w * jac, side });
    }
}

/// Tensor Gauss rule on an axis-aligned square given by its corners.
pub fn push_square(out: &mut TaggedQuadrature, corners: &[Point2; 4], n_points: usize, side: Side) {
    let rule = segment_rule(n_points);
    let (x0, y0) = (corners[0].x, corners[0].y);
    let (w, h) = (corners[1].x - x0, corners[3].y - y0);
    for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
        for (&s, &ws) in rule.nodes.iter().zip(&rule.weights) {
            out.push(QuadPoint { point: Point2::new(x0 + s * w, y0 + t * h), weight: ws * wt * w * h, side });
        }
    }
}

/// Side-tagged rule on one element. Cut elements use the fan triangulations
/// of their chord sub-polygons; tags follow the chord split.
pub fn element_quadrature(corners: &[Point2; 4], class: &ElementClass, strength: Strength) -> TaggedQuadrature {
    let mut out = Vec::new();
    match class {
        ElementClass::NonInterface(side) => push_square(&mut out, corners, strength.tensor_points(), *side),
        ElementClass::Interface(cut) => {
            let rule = triangle_rule(strength.triangle_degree());
            for side in [Side::Minus, Side::Plus] {
                for tri in cut.triangulation(side) {
                    push_triangle(&mut out, &tri, rule, side);
                }
            }
        }
    }
    out
}

/// Gauss rule on the segment `a -> b`, split at `split` when given. Each
/// piece is tagged by the exact-curve side of its midpoint.
pub fn edge_quadrature(
    a: Point2,
    b: Point2,
    split: Option<Point2>,
    n_points: usize,
    curve: &InterfaceCurve,
) -> TaggedQuadrature {
    let rule = segment_rule(n_points);
    let mut out = Vec::with_capacity(2 * n_points);
    let mut piece = |p: Point2, q: Point2| {
        let len = p.distance(q);
        let side = curve.side(p.midpoint(q));
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            out.push(QuadPoint { point: p.lerp(q, t), weight: w * len, side });
        }
    };
    match split {
        Some(s) => {
            piece(a, s);
            piece(s, b);
        }
        None => piece(a, b),
    }
    out
}
