//! Uniform Cartesian meshes of a square domain and their interface
//! classification.
//!
//! Numbering is row-major from the lower-left corner. Edges are numbered
//! horizontal-first: horizontal edge `(i, j)` on grid row `j` is `j * N + i`,
//! vertical edge `(i, j)` on grid column `i` is `N (N + 1) + j (N + 1) + i`.
//! Local element edges are ordered bottom, right, top, left.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{cut_from_crossings, edge_crossing, AxisRect, CutConfiguration, CutOutcome, EdgeCrossing, InterfaceCurve, Point2, Side};

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// `K_{B,1}` (smaller index) and, for interior edges, `K_{B,2}`.
    pub elements: (usize, Option<usize>),
    /// Unit normal from `K_{B,1}` to `K_{B,2}`; outward on the boundary.
    pub normal: Point2,
    pub length: f64,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.elements.1.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct CartesianMesh {
    pub domain: AxisRect,
    pub n_side: usize,
    pub h: f64,
    pub vertices: Vec<Point2>,
    /// Vertex indices counterclockwise from the lower-left corner.
    pub elements: Vec<[usize; 4]>,
    pub edges: Vec<Edge>,
    /// Global edge of each local edge (bottom, right, top, left).
    pub element_edges: Vec<[usize; 4]>,
}

impl CartesianMesh {
    pub fn new(domain: AxisRect, n_side: usize) -> Result<Self> {
        if n_side < 2 {
            return Err(Error::InvalidArgument(format!("n_side must be at least 2, got {n_side}")));
        }
        if (domain.width - domain.height).abs() > 1e-14 * domain.width {
            return Err(Error::InvalidArgument("mesh domain must be square".into()));
        }
        let n = n_side;
        let np = n + 1;
        let h = domain.width / n as f64;
        let coord = |origin: f64, k: usize| origin + domain.width * (k as f64) / (n as f64);

        let mut vertices = Vec::with_capacity(np * np);
        for j in 0..np {
            for i in 0..np {
                vertices.push(Point2::new(coord(domain.origin.x, i), coord(domain.origin.y, j)));
            }
        }
        let vid = |i: usize, j: usize| j * np + i;
        let eid = |i: usize, j: usize| j * n + i;

        let mut elements = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                elements.push([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]);
            }
        }

        let offset = n * np;
        let mut edges = Vec::with_capacity(2 * n * np);
        for j in 0..np {
            for i in 0..n {
                let (elements, normal) = match (j > 0, j < n) {
                    (true, true) => ((eid(i, j - 1), Some(eid(i, j))), Point2::new(0.0, 1.0)),
                    (false, _) => ((eid(i, j), None), Point2::new(0.0, -1.0)),
                    (true, false) => ((eid(i, j - 1), None), Point2::new(0.0, 1.0)),
                };
                edges.push(Edge { vertices: [vid(i, j), vid(i + 1, j)], elements, normal, length: h });
            }
        }
        for j in 0..n {
            for i in 0..np {
                let (elements, normal) = match (i > 0, i < n) {
                    (true, true) => ((eid(i - 1, j), Some(eid(i, j))), Point2::new(1.0, 0.0)),
                    (false, _) => ((eid(i, j), None), Point2::new(-1.0, 0.0)),
                    (true, false) => ((eid(i - 1, j), None), Point2::new(1.0, 0.0)),
                };
                edges.push(Edge { vertices: [vid(i, j), vid(i, j + 1)], elements, normal, length: h });
            }
        }

        let element_edges = (0..n * n)
            .map(|k| {
                let (i, j) = (k % n, k / n);
                [j * n + i, offset + j * np + i + 1, (j + 1) * n + i, offset + j * np + i]
            })
            .collect();

        Ok(Self { domain, n_side, h, vertices, elements, edges, element_edges })
    }

    /// The unit square `(0, 1)^2` with `n_side` elements per side.
    pub fn unit_square(n_side: usize) -> Result<Self> {
        Self::new(AxisRect::unit_square(), n_side)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element_corners(&self, k: usize) -> [Point2; 4] {
        self.elements[k].map(|v| self.vertices[v])
    }

    pub fn element_rect(&self, k: usize) -> AxisRect {
        let c = self.element_corners(k);
        AxisRect { origin: c[0], width: c[1].x - c[0].x, height: c[3].y - c[0].y }
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        let np = self.n_side + 1;
        let (i, j) = (v % np, v / np);
        i == 0 || j == 0 || i == self.n_side || j == self.n_side
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.n_vertices()).filter(|&v| self.is_boundary_vertex(v)).collect()
    }

    /// Debug dump: `V i x y`, `E i v0 v1 v2 v3`, `B i v0 v1 k1 k2 nx ny`
    /// (`k2 = -1` on the boundary).
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "V {i} {} {}", v.x, v.y);
        }
        for (i, e) in self.elements.iter().enumerate() {
            let _ = writeln!(out, "E {i} {} {} {} {}", e[0], e[1], e[2], e[3]);
        }
        for (i, b) in self.edges.iter().enumerate() {
            let k2 = b.elements.1.map_or(-1, |k| k as i64);
            let _ = writeln!(
                out,
                "B {i} {} {} {} {k2} {} {}",
                b.vertices[0], b.vertices[1], b.elements.0, b.normal.x, b.normal.y
            );
        }
        out
    }
}

/// `build_mesh` under its conventional name.
pub fn build_mesh(domain: AxisRect, n_side: usize) -> Result<CartesianMesh> {
    CartesianMesh::new(domain, n_side)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ElementClass {
    NonInterface(Side),
    Interface(CutConfiguration),
}

impl ElementClass {
    pub fn cut(&self) -> Option<&CutConfiguration> {
        match self {
            ElementClass::Interface(cut) => Some(cut),
            ElementClass::NonInterface(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MeshClassification {
    pub elements: Vec<ElementClass>,
    /// Point where Γ crosses each interior interface edge; `None` elsewhere.
    pub edge_split: Vec<Option<Point2>>,
    /// Interface elements in increasing order.
    pub interface_elements: Vec<usize>,
    /// Interior interface edges in increasing order.
    pub interior_interface_edges: Vec<usize>,
    pub boundary_vertices: Vec<usize>,
}

impl MeshClassification {
    pub fn is_interface_element(&self, k: usize) -> bool {
        matches!(self.elements[k], ElementClass::Interface(_))
    }

    pub fn non_interface_elements(&self) -> impl Iterator<Item = usize> + '_ {
        self.elements
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(c, ElementClass::NonInterface(_)))
            .map(|(k, _)| k)
    }
}

fn reversed(c: EdgeCrossing) -> EdgeCrossing {
    match c {
        EdgeCrossing::None => EdgeCrossing::None,
        EdgeCrossing::AtVertex(k) => EdgeCrossing::AtVertex(1 - k),
        EdgeCrossing::Interior { point, t } => EdgeCrossing::Interior { point, t: 1.0 - t },
    }
}

/// Classifies elements and edges of `mesh` against `curve`.
///
/// Each edge crossing is computed once and shared by both neighbors, so an
/// edge's split point is bitwise equal to the `D` or `E` point of the cuts
/// on either side.
pub fn classify_mesh(mesh: &CartesianMesh, curve: &InterfaceCurve) -> Result<MeshClassification> {
    let tol = 0.0;
    let vals: Vec<f64> = mesh.vertices.iter().map(|&p| curve.level_set(p)).collect();

    let crossings = mesh
        .edges
        .iter()
        .enumerate()
        .map(|(id, e)| {
            let [a, b] = e.vertices;
            edge_crossing(curve, mesh.vertices[a], mesh.vertices[b], vals[a], vals[b], tol)
                .map_err(|source| Error::MeshTooCoarse { edge: id, source: Box::new(source) })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut elements = Vec::with_capacity(mesh.n_elements());
    let mut interface_elements = Vec::new();
    for k in 0..mesh.n_elements() {
        let corners = mesh.element_corners(k);
        let v = mesh.elements[k].map(|i| vals[i]);
        let ee = mesh.element_edges[k];
        // bottom and right run along the global edge direction, top and left against it
        let local = [crossings[ee[0]], crossings[ee[1]], reversed(crossings[ee[2]]), reversed(crossings[ee[3]])];
        let class = match cut_from_crossings(curve, &corners, &v, &local, tol)? {
            CutOutcome::Uncut(side) => ElementClass::NonInterface(side),
            CutOutcome::Cut(cut) => {
                interface_elements.push(k);
                ElementClass::Interface(cut)
            }
        };
        elements.push(class);
    }

    let mut edge_split = vec![None; mesh.edges.len()];
    let mut interior_interface_edges = Vec::new();
    for (id, e) in mesh.edges.iter().enumerate() {
        let (k1, Some(k2)) = e.elements else { continue };
        if let EdgeCrossing::Interior { point, .. } = crossings[id] {
            let touches_cut = [k1, k2].iter().any(|&k| matches!(elements[k], ElementClass::Interface(_)));
            if touches_cut {
                edge_split[id] = Some(point);
                interior_interface_edges.push(id);
            }
        }
    }

    Ok(MeshClassification {
        elements,
        edge_split,
        interface_elements,
        interior_interface_edges,
        boundary_vertices: mesh.boundary_vertices(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Ellipse;
    use std::f64::consts::PI;

    fn benchmark_curve() -> InterfaceCurve {
        InterfaceCurve::Ellipse(Ellipse::new(Point2::new(0.0, 0.0), PI / 4.0, PI / 6.0).unwrap())
    }

    #[test]
    fn entity_counts() {
        let m = CartesianMesh::unit_square(2).unwrap();
        assert_eq!((m.n_vertices(), m.n_elements(), m.edges.len()), (9, 4, 12));
        let m = CartesianMesh::unit_square(10).unwrap();
        assert_eq!((m.n_vertices(), m.n_elements(), m.edges.len()), (121, 100, 220));
        assert!(CartesianMesh::unit_square(1).is_err());
    }

    #[test]
    fn center_element_has_interior_edges() {
        let m = CartesianMesh::unit_square(3).unwrap();
        for &e in &m.element_edges[4] {
            let edge = &m.edges[e];
            let (k1, k2) = edge.elements;
            assert!(k2.is_some());
            assert!(k1 == 4 || k2 == Some(4));
        }
    }

    #[test]
    fn edge_orientation_and_adjacency() {
        let m = CartesianMesh::unit_square(4).unwrap();
        let mut visits = vec![0usize; m.edges.len()];
        for (k, ee) in m.element_edges.iter().enumerate() {
            let corners = m.element_corners(k);
            for (l, &e) in ee.iter().enumerate() {
                visits[e] += 1;
                let edge = &m.edges[e];
                let ends = [m.vertices[edge.vertices[0]], m.vertices[edge.vertices[1]]];
                let local = [corners[l], corners[(l + 1) % 4]];
                assert!(ends.contains(&local[0]) && ends.contains(&local[1]));
            }
        }
        for (e, edge) in m.edges.iter().enumerate() {
            assert_eq!(visits[e], if edge.is_boundary() { 1 } else { 2 });
            assert!((edge.normal.norm() - 1.0).abs() < 1e-15);
            assert!(edge.normal.x == 0.0 || edge.normal.y == 0.0);
            if let (k1, Some(k2)) = edge.elements {
                assert!(k1 < k2);
                let c1 = crate::geometry::polygon_centroid(&m.element_corners(k1));
                let c2 = crate::geometry::polygon_centroid(&m.element_corners(k2));
                assert!((c2 - c1).dot(edge.normal) > 0.0);
            } else {
                let c = crate::geometry::polygon_centroid(&m.element_corners(edge.elements.0));
                let mid = m.vertices[edge.vertices[0]].midpoint(m.vertices[edge.vertices[1]]);
                assert!((mid - c).dot(edge.normal) > 0.0);
            }
        }
    }

    #[test]
    fn aligned_line_gives_no_interface_elements() {
        let m = CartesianMesh::unit_square(2).unwrap();
        let cls = classify_mesh(&m, &InterfaceCurve::line(1.0, 0.0, -0.5)).unwrap();
        assert!(cls.interface_elements.is_empty());
        assert!(cls.interior_interface_edges.is_empty());
        assert_eq!(cls.elements[0], ElementClass::NonInterface(Side::Minus));
        assert_eq!(cls.elements[1], ElementClass::NonInterface(Side::Plus));
    }

    #[test]
    fn vertical_line_cuts_first_column() {
        let m = CartesianMesh::unit_square(2).unwrap();
        let cls = classify_mesh(&m, &InterfaceCurve::line(1.0, 0.0, -0.3)).unwrap();
        assert_eq!(cls.interface_elements, vec![0, 2]);
        // horizontal edge at y = 0.5 between elements 0 and 2
        assert_eq!(cls.interior_interface_edges, vec![2]);
        let split = cls.edge_split[2].unwrap();
        assert!((split.x - 0.3).abs() < 1e-15 && split.y == 0.5);
    }

    #[test]
    fn ellipse_classification_matches_brute_force() {
        let m = CartesianMesh::unit_square(10).unwrap();
        let curve = benchmark_curve();
        let cls = classify_mesh(&m, &curve).unwrap();
        let samples = 100;
        let mut brute = Vec::new();
        for k in 0..m.n_elements() {
            let r = m.element_rect(k);
            let (mut neg, mut pos) = (false, false);
            for a in 0..=samples {
                for b in 0..=samples {
                    let p = Point2::new(
                        r.origin.x + r.width * a as f64 / samples as f64,
                        r.origin.y + r.height * b as f64 / samples as f64,
                    );
                    let v = curve.level_set(p);
                    neg |= v < 0.0;
                    pos |= v > 0.0;
                }
            }
            if neg && pos {
                brute.push(k);
            }
        }
        assert_eq!(cls.interface_elements, brute);
    }

    #[test]
    fn interface_edges_consistent_with_cuts() {
        for n in [10, 20, 40] {
            let m = CartesianMesh::unit_square(n).unwrap();
            let cls = classify_mesh(&m, &benchmark_curve()).unwrap();
            for &e in &cls.interior_interface_edges {
                let split = cls.edge_split[e].unwrap();
                let (k1, k2) = m.edges[e].elements;
                for k in [k1, k2.unwrap()] {
                    let cut = cls.elements[k].cut().expect("neighbor of interface edge is cut");
                    assert!(cut.d == split || cut.e == split);
                }
            }
        }
    }

    #[test]
    fn interface_count_scales_with_perimeter() {
        let count = |n| classify_mesh(&CartesianMesh::unit_square(n).unwrap(), &benchmark_curve()).unwrap().interface_elements.len();
        for n in [10, 20, 40] {
            let ratio = count(2 * n) as f64 / count(n) as f64;
            assert!((1.5..=2.5).contains(&ratio), "ratio {ratio} at {n}");
        }
    }

    #[test]
    fn dump_format() {
        let m = CartesianMesh::unit_square(2).unwrap();
        let d = m.dump();
        assert_eq!(d.lines().count(), 9 + 4 + 12);
        assert!(d.lines().any(|l| l == "E 0 0 1 4 3"));
        assert!(d.lines().any(|l| l == "B 0 0 1 0 -1 0 -1"));
        assert!(d.lines().any(|l| l == "B 2 3 4 0 2 0 1"));
    }
}
