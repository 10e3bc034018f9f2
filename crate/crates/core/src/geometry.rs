//! Interface curves, point/segment queries and the chord split of cut rectangles.
//!
//! A curve is described by a level set that is negative in the minus
//! subdomain and positive in the plus subdomain. A rectangle crossed by the
//! curve is split by the straight chord joining its two boundary crossings
//! `D` and `E`; everything downstream (basis branches, quadrature tags) works
//! with that chord split rather than with the curved pieces.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Crossings closer than this fraction of the edge length to a vertex are
/// moved onto the vertex.
pub const SNAP_TOLERANCE: f64 = 1e-10;

/// Sub-elements whose area is below this fraction of the element area are
/// dropped and the element is treated as uncut.
pub const SLIVER_AREA_TOLERANCE: f64 = 1e-12;

const CROSSING_SAMPLES: usize = 16;
const BISECTION_MAX_ITER: usize = 200;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn lerp(self, other: Self, t: f64) -> Self {
        Self::new(self.x + t * (other.x - self.x), self.y + t * (other.y - self.y))
    }

    pub fn midpoint(self, other: Self) -> Self {
        Self::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Self) -> Self {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Self) -> Self {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Self {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment2 {
    pub a: Point2,
    pub b: Point2,
}

impl Segment2 {
    pub const fn new(a: Point2, b: Point2) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    pub fn midpoint(&self) -> Point2 {
        self.a.midpoint(self.b)
    }

    pub fn point_at(&self, t: f64) -> Point2 {
        self.a.lerp(self.b, t)
    }
}

/// Axis-aligned rectangle given by its lower-left corner and extents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisRect {
    pub origin: Point2,
    pub width: f64,
    pub height: f64,
}

impl AxisRect {
    pub fn new(origin: Point2, width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0 && height > 0.0) || !width.is_finite() || !height.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "rectangle extents must be positive, got {width} x {height}"
            )));
        }
        Ok(Self { origin, width, height })
    }

    pub fn unit_square() -> Self {
        Self { origin: Point2::new(0.0, 0.0), width: 1.0, height: 1.0 }
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    /// Corners counterclockwise from the lower-left one.
    pub fn corners(&self) -> [Point2; 4] {
        let Point2 { x, y } = self.origin;
        let (x1, y1) = (x + self.width, y + self.height);
        [Point2::new(x, y), Point2::new(x1, y), Point2::new(x1, y1), Point2::new(x, y1)]
    }

    pub fn contains(&self, p: Point2, slack: f64) -> bool {
        p.x >= self.origin.x - slack
            && p.x <= self.origin.x + self.width + slack
            && p.y >= self.origin.y - slack
            && p.y <= self.origin.y + self.height + slack
    }
}

/// Which subdomain a point or a piece of an element belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn from_sign(value: f64) -> Self {
        if value <= 0.0 {
            Side::Minus
        } else {
            Side::Plus
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Minus,
    Plus,
    OnInterface,
}

/// Ellipse `r(x, y) = 1` with
/// `r = sqrt((x - x0)^2 / a^2 + (y - y0)^2 / b^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipse {
    pub center: Point2,
    pub semi_axes: (f64, f64),
}

impl Ellipse {
    pub fn new(center: Point2, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidArgument(format!("semi-axes must be positive, got ({a}, {b})")));
        }
        Ok(Self { center, semi_axes: (a, b) })
    }

    pub fn radius(&self, p: Point2) -> f64 {
        let (a, b) = self.semi_axes;
        let dx = (p.x - self.center.x) / a;
        let dy = (p.y - self.center.y) / b;
        dx.hypot(dy)
    }

    pub fn point_at_angle(&self, theta: f64) -> Point2 {
        let (a, b) = self.semi_axes;
        Point2::new(self.center.x + a * theta.cos(), self.center.y + b * theta.sin())
    }
}

pub type LevelSetFn = Arc<dyn Fn(Point2) -> f64 + Send + Sync>;

/// The interface Γ, given by a continuous level set.
#[derive(Clone)]
pub enum InterfaceCurve {
    Ellipse(Ellipse),
    /// Straight line `n . p + offset = 0`; negative side is minus.
    Line { normal: Point2, offset: f64 },
    LevelSet(LevelSetFn),
}

impl fmt::Debug for InterfaceCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterfaceCurve::Ellipse(e) => f.debug_tuple("Ellipse").field(e).finish(),
            InterfaceCurve::Line { normal, offset } => {
                f.debug_struct("Line").field("normal", normal).field("offset", offset).finish()
            }
            InterfaceCurve::LevelSet(_) => f.write_str("LevelSet(..)"),
        }
    }
}

impl InterfaceCurve {
    pub fn line(nx: f64, ny: f64, offset: f64) -> Self {
        InterfaceCurve::Line { normal: Point2::new(nx, ny), offset }
    }

    pub fn level_set(&self, p: Point2) -> f64 {
        match self {
            InterfaceCurve::Ellipse(e) => e.radius(p) - 1.0,
            InterfaceCurve::Line { normal, offset } => normal.dot(p) + offset,
            InterfaceCurve::LevelSet(f) => f(p),
        }
    }

    /// Exact-curve side of a point; points on Γ count as minus.
    pub fn side(&self, p: Point2) -> Side {
        Side::from_sign(self.level_set(p))
    }
}

pub fn classify_point(curve: &InterfaceCurve, p: Point2, tol: f64) -> Region {
    let v = curve.level_set(p);
    if v.abs() <= tol {
        Region::OnInterface
    } else if v < 0.0 {
        Region::Minus
    } else {
        Region::Plus
    }
}

fn sign_changes(values: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut changes = 0;
    for &v in values {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            changes += 1;
        }
        last = v;
    }
    changes
}

/// Orders segment endpoints lexicographically so that a shared mesh edge is
/// always processed in the same direction by both neighbors.
fn canonical(a: Point2, b: Point2) -> (Point2, Point2) {
    if (a.x, a.y) <= (b.x, b.y) {
        (a, b)
    } else {
        (b, a)
    }
}

fn check_single_crossing(curve: &InterfaceCurve, a: Point2, b: Point2, fa: f64, fb: f64) -> Result<()> {
    let mut samples = [0.0; CROSSING_SAMPLES + 2];
    samples[0] = fa;
    for (k, s) in samples[1..=CROSSING_SAMPLES].iter_mut().enumerate() {
        let t = (k + 1) as f64 / (CROSSING_SAMPLES + 1) as f64;
        *s = curve.level_set(a.lerp(b, t));
    }
    samples[CROSSING_SAMPLES + 1] = fb;
    if sign_changes(&samples) > 1 {
        return Err(Error::MultipleCrossings { x0: a.x, y0: a.y, x1: b.x, y1: b.y });
    }
    Ok(())
}

/// Root of the level set on `[a, b]` by bisection; assumes `fa` and `fb`
/// have strictly opposite signs. Returns the parameter along `a -> b`.
fn bisect(curve: &InterfaceCurve, a: Point2, b: Point2, fa: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let lo_negative = fa < 0.0;
    let len = a.distance(b);
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let fm = curve.level_set(a.lerp(b, mid));
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) * len <= 1e-15 * len.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Where the curve crosses a mesh edge, after snapping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum EdgeCrossing {
    None,
    /// Crossing at (or snapped onto) an endpoint; index 0 is `a`, 1 is `b`.
    AtVertex(usize),
    /// Crossing strictly inside the edge at parameter `t` from `a`.
    Interior { point: Point2, t: f64 },
}

/// Crossing of the edge `a -> b` given the level-set values at both ends.
pub(crate) fn edge_crossing(
    curve: &InterfaceCurve,
    a: Point2,
    b: Point2,
    fa: f64,
    fb: f64,
    tol: f64,
) -> Result<EdgeCrossing> {
    check_single_crossing(curve, a, b, fa, fb)?;
    let a_zero = fa.abs() <= tol;
    let b_zero = fb.abs() <= tol;
    if a_zero || b_zero || (fa > 0.0) == (fb > 0.0) {
        return Ok(match (a_zero, b_zero) {
            (true, false) => EdgeCrossing::AtVertex(0),
            (false, true) => EdgeCrossing::AtVertex(1),
            _ => EdgeCrossing::None,
        });
    }
    let swapped = canonical(a, b) != (a, b);
    let (ca, cb, cfa) = if swapped { (b, a, fb) } else { (a, b, fa) };
    let tc = bisect(curve, ca, cb, cfa);
    let point = ca.lerp(cb, tc);
    let t = if swapped { 1.0 - tc } else { tc };
    if t <= SNAP_TOLERANCE {
        Ok(EdgeCrossing::AtVertex(0))
    } else if t >= 1.0 - SNAP_TOLERANCE {
        Ok(EdgeCrossing::AtVertex(1))
    } else {
        Ok(EdgeCrossing::Interior { point, t })
    }
}

/// Intersection of the curve with a segment, if the level set changes sign
/// between the endpoints.
pub fn segment_intersection(curve: &InterfaceCurve, seg: Segment2, tol: f64) -> Result<Option<Point2>> {
    let fa = curve.level_set(seg.a);
    let fb = curve.level_set(seg.b);
    check_single_crossing(curve, seg.a, seg.b, fa, fb)?;
    if fa.abs() <= tol || fb.abs() <= tol || (fa > 0.0) == (fb > 0.0) {
        return Ok(None);
    }
    let (ca, cb) = canonical(seg.a, seg.b);
    let cfa = if ca == seg.a { fa } else { fb };
    Ok(Some(ca.lerp(cb, bisect(curve, ca, cb, cfa))))
}

/// Signed shoelace area, computed relative to the first vertex.
pub fn polygon_area(poly: &[Point2]) -> f64 {
    let Some(&o) = poly.first() else { return 0.0 };
    let n = poly.len();
    let mut twice = 0.0;
    for i in 1..n {
        twice += (poly[i] - o).cross(poly[(i + 1) % n] - o);
    }
    0.5 * twice
}

pub fn polygon_centroid(poly: &[Point2]) -> Point2 {
    let o = poly[0];
    let n = poly.len();
    let (mut cx, mut cy, mut twice) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (p, q) = (poly[i] - o, poly[(i + 1) % n] - o);
        let c = p.cross(q);
        twice += c;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    o + Point2::new(cx / (3.0 * twice), cy / (3.0 * twice))
}

pub fn triangle_area(t: &[Point2; 3]) -> f64 {
    0.5 * (t[1] - t[0]).cross(t[2] - t[0])
}

/// Fan triangulation from the first vertex of a convex polygon.
pub fn fan_triangulation(poly: &[Point2]) -> Vec<[Point2; 3]> {
    (1..poly.len().saturating_sub(1)).map(|k| [poly[0], poly[k], poly[k + 1]]).collect()
}

/// The chord split of an interface rectangle.
#[derive(Clone, Debug, PartialEq)]
pub struct CutConfiguration {
    pub d: Point2,
    pub e: Point2,
    /// Counterclockwise vertex list of `K-`.
    pub minus_polygon: Vec<Point2>,
    /// Counterclockwise vertex list of `K+`.
    pub plus_polygon: Vec<Point2>,
    minus_orientation: f64,
}

impl CutConfiguration {
    fn new(d: Point2, e: Point2, minus_polygon: Vec<Point2>, plus_polygon: Vec<Point2>) -> Self {
        let c = polygon_centroid(&minus_polygon);
        let minus_orientation = (e - d).cross(c - d).signum();
        Self { d, e, minus_polygon, plus_polygon, minus_orientation }
    }

    pub fn chord(&self) -> Segment2 {
        Segment2::new(self.d, self.e)
    }

    /// Unit normal of the chord pointing from `K-` into `K+`.
    pub fn chord_normal(&self) -> Point2 {
        let t = self.e - self.d;
        let n = Point2::new(t.y, -t.x) * (1.0 / t.norm());
        // (t.y, -t.x) lies on the negative-cross side of the chord
        if self.minus_orientation > 0.0 {
            n
        } else {
            n * -1.0
        }
    }

    /// Side of the chord line a point lies on; points on the line are minus.
    pub fn chord_side(&self, p: Point2) -> Side {
        let s = (self.e - self.d).cross(p - self.d);
        if s == 0.0 || (s > 0.0) == (self.minus_orientation > 0.0) {
            Side::Minus
        } else {
            Side::Plus
        }
    }

    pub fn polygon(&self, side: Side) -> &[Point2] {
        match side {
            Side::Minus => &self.minus_polygon,
            Side::Plus => &self.plus_polygon,
        }
    }

    pub fn area(&self, side: Side) -> f64 {
        polygon_area(self.polygon(side))
    }

    pub fn triangulation(&self, side: Side) -> Vec<[Point2; 3]> {
        fan_triangulation(self.polygon(side))
    }
}

/// Result of cutting one element.
#[derive(Clone, Debug, PartialEq)]
pub enum CutOutcome {
    Uncut(Side),
    Cut(CutConfiguration),
}

/// Cuts the quadrilateral with counterclockwise `corners` by the curve.
pub(crate) fn cut_corners(curve: &InterfaceCurve, corners: &[Point2; 4], tol: f64) -> Result<CutOutcome> {
    let vals = corners.map(|c| curve.level_set(c));
    let mut edges = [EdgeCrossing::None; 4];
    for j in 0..4 {
        let k = (j + 1) % 4;
        edges[j] = edge_crossing(curve, corners[j], corners[k], vals[j], vals[k], tol)?;
    }
    cut_from_crossings(curve, corners, &vals, &edges, tol)
}

/// Builds the chord split from per-edge crossings, where `edges[j]` is the
/// crossing of the edge `corners[j] -> corners[j + 1]`.
pub(crate) fn cut_from_crossings(
    curve: &InterfaceCurve,
    corners: &[Point2; 4],
    vals: &[f64; 4],
    edges: &[EdgeCrossing; 4],
    tol: f64,
) -> Result<CutOutcome> {
    // Crossings as (perimeter parameter, point); vertex j sits at parameter j.
    let mut crossings: Vec<(f64, Point2)> = Vec::with_capacity(4);
    let mut push = |s: f64, p: Point2| {
        let s = s.rem_euclid(4.0);
        if !crossings.iter().any(|&(q, _)| q == s) {
            crossings.push((s, p));
        }
    };
    for (j, crossing) in edges.iter().enumerate() {
        let k = (j + 1) % 4;
        match *crossing {
            EdgeCrossing::None => {}
            EdgeCrossing::AtVertex(0) => push(j as f64, corners[j]),
            EdgeCrossing::AtVertex(_) => push(k as f64, corners[k]),
            EdgeCrossing::Interior { point, t } => push(j as f64 + t, point),
        }
    }
    crossings.sort_by(|a, b| a.0.total_cmp(&b.0));

    let dominant_side = |idx: &[usize]| -> Option<Side> {
        idx.iter()
            .copied()
            .filter(|&j| vals[j].abs() > tol)
            .max_by(|&i, &j| vals[i].abs().total_cmp(&vals[j].abs()))
            .map(|j| Side::from_sign(vals[j]))
    };
    let fallback_side = || {
        dominant_side(&[0, 1, 2, 3]).unwrap_or_else(|| curve.side(polygon_centroid(corners)))
    };

    match crossings.len() {
        0 | 1 => return Ok(CutOutcome::Uncut(fallback_side())),
        2 => {}
        n => {
            return Err(Error::DegenerateCut(format!(
                "{n} boundary crossings on element with corners {:?}",
                corners
            )))
        }
    }

    let (s_d, d) = crossings[0];
    let (s_e, e) = crossings[1];
    // Vertices strictly between D and E along the boundary, and the rest.
    let first: Vec<usize> = (0..4).filter(|&j| (j as f64) > s_d && (j as f64) < s_e).collect();
    let second: Vec<usize> = (0..4)
        .filter(|&j| (j as f64) > s_e)
        .chain((0..4).filter(|&j| (j as f64) < s_d))
        .collect();

    if first.is_empty() || second.is_empty() {
        // Both crossings on one edge: the chord runs along the element boundary.
        return Ok(CutOutcome::Uncut(fallback_side()));
    }

    let build = |from: Point2, verts: &[usize], to: Point2| -> Vec<Point2> {
        let mut poly = Vec::with_capacity(verts.len() + 2);
        poly.push(from);
        poly.extend(verts.iter().map(|&j| corners[j]));
        poly.push(to);
        poly
    };
    let poly_a = build(d, &first, e);
    let poly_b = build(e, &second, d);
    let area_a = polygon_area(&poly_a);
    let area_b = polygon_area(&poly_b);
    let total = polygon_area(corners);

    let side_a = dominant_side(&first).unwrap_or_else(|| curve.side(polygon_centroid(&poly_a)));
    let side_b = dominant_side(&second).unwrap_or_else(|| curve.side(polygon_centroid(&poly_b)));

    if area_a.min(area_b) < SLIVER_AREA_TOLERANCE * total {
        return Ok(CutOutcome::Uncut(if area_a >= area_b { side_a } else { side_b }));
    }
    if side_a == side_b {
        return Err(Error::DegenerateCut(format!(
            "both sub-elements classified {:?} on element with corners {:?}",
            side_a, corners
        )));
    }
    let (minus, plus) = if side_a == Side::Minus { (poly_a, poly_b) } else { (poly_b, poly_a) };
    Ok(CutOutcome::Cut(CutConfiguration::new(d, e, minus, plus)))
}

/// Chord split of `rect`, or `None` when the curve does not cut it.
pub fn cut_rectangle(curve: &InterfaceCurve, rect: &AxisRect, tol: f64) -> Result<Option<CutConfiguration>> {
    match cut_corners(curve, &rect.corners(), tol)? {
        CutOutcome::Uncut(_) => Ok(None),
        CutOutcome::Cut(cut) => Ok(Some(cut)),
    }
}
