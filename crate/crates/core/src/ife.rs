//! Bilinear finite element and immersed finite element (IFE) shape functions.
//!
//! On an interface element every shape function has two bilinear branches,
//! one per side of the chord `DE`. The eight coefficients of shape `i` are
//! fixed by
//!
//! * nodal values `φ_i(A_j) = δ_ij`, each vertex using its own side's branch,
//! * continuity of the branches at `D` and `E`,
//! * equal mixed derivatives `d+ = d-`,
//! * a vanishing flux jump `∫_DE [β ∂φ/∂n] ds = 0`.
//!
//! The last integrand is linear along the chord, so it is imposed exactly
//! at the chord midpoint.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{AxisRect, CutConfiguration, InterfaceCurve, Point2, Side};
use crate::mesh::{classify_mesh, CartesianMesh, ElementClass, MeshClassification};
use crate::Coefficient;

const PIVOT_TOLERANCE: f64 = 1e-14;

/// `φ(x, y) = a + b X + c Y + d X Y` with `(X, Y) = (x, y) - center`.
/// Shape functions are centered on their element so that evaluation does
/// not cancel `O(1 / h^2)` terms.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BilinearCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub center: Point2,
}

impl BilinearCoeffs {
    /// Coefficients in global coordinates.
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d, center: Point2::new(0.0, 0.0) }
    }

    pub const fn centered(center: Point2, a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d, center }
    }

    #[inline]
    pub fn eval(&self, p: Point2) -> f64 {
        let (x, y) = (p.x - self.center.x, p.y - self.center.y);
        self.a + self.b * x + self.c * y + self.d * x * y
    }

    #[inline]
    pub fn grad(&self, p: Point2) -> Point2 {
        let (x, y) = (p.x - self.center.x, p.y - self.center.y);
        Point2::new(self.b + self.d * y, self.c + self.d * x)
    }

    fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }
}

/// Lagrange bilinear shape functions of `rect`, ordered like its corners.
pub fn standard_bilinear_basis(rect: &AxisRect) -> [BilinearCoeffs; 4] {
    let (hx, hy) = (0.5 * rect.width, 0.5 * rect.height);
    let center = Point2::new(rect.origin.x + hx, rect.origin.y + hy);
    let s = 1.0 / rect.area();
    [
        BilinearCoeffs::centered(center, 0.25, -hy * s, -hx * s, s),
        BilinearCoeffs::centered(center, 0.25, hy * s, -hx * s, -s),
        BilinearCoeffs::centered(center, 0.25, hy * s, hx * s, s),
        BilinearCoeffs::centered(center, 0.25, -hy * s, hx * s, -s),
    ]
}

/// Local shape functions of one element.
#[derive(Clone, Debug, PartialEq)]
pub enum ElementBasis {
    Standard { side: Side, shapes: [BilinearCoeffs; 4] },
    Immersed { minus: [BilinearCoeffs; 4], plus: [BilinearCoeffs; 4], cut: CutConfiguration },
}

/// Largest constraint violations of an element's shape functions, in
/// units of the element: coefficients of `x`, `y` are scaled by `h` and of
/// `xy` by `h^2`, and the flux jump is divided by the larger coefficient.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConstraintResiduals {
    pub nodal: f64,
    pub continuity: f64,
    pub mixed: f64,
    pub flux: f64,
    pub partition_of_unity: f64,
}

impl ConstraintResiduals {
    pub fn max_interface(&self) -> f64 {
        self.nodal.max(self.continuity).max(self.mixed).max(self.flux)
    }
}

impl ElementBasis {
    pub fn branch(&self, side: Side) -> &[BilinearCoeffs; 4] {
        match self {
            ElementBasis::Standard { shapes, .. } => shapes,
            ElementBasis::Immersed { minus, plus, .. } => match side {
                Side::Minus => minus,
                Side::Plus => plus,
            },
        }
    }

    pub fn cut(&self) -> Option<&CutConfiguration> {
        match self {
            ElementBasis::Immersed { cut, .. } => Some(cut),
            ElementBasis::Standard { .. } => None,
        }
    }

    /// Branch used at `p`: the chord side on immersed elements.
    pub fn side_at(&self, p: Point2) -> Side {
        match self {
            ElementBasis::Standard { side, .. } => *side,
            ElementBasis::Immersed { cut, .. } => cut.chord_side(p),
        }
    }

    pub fn eval(&self, i: usize, p: Point2) -> f64 {
        self.branch(self.side_at(p))[i].eval(p)
    }

    pub fn eval_grad(&self, i: usize, p: Point2) -> Point2 {
        self.branch(self.side_at(p))[i].grad(p)
    }

    /// Values of all four shape functions on a given branch.
    #[inline]
    pub fn values_on(&self, side: Side, p: Point2) -> [f64; 4] {
        let br = self.branch(side);
        [br[0].eval(p), br[1].eval(p), br[2].eval(p), br[3].eval(p)]
    }

    #[inline]
    pub fn grads_on(&self, side: Side, p: Point2) -> [Point2; 4] {
        let br = self.branch(side);
        [br[0].grad(p), br[1].grad(p), br[2].grad(p), br[3].grad(p)]
    }

    /// Checks every defining constraint of the shape functions.
    pub fn constraint_residuals(&self, corners: &[Point2; 4], beta: Coefficient) -> ConstraintResiduals {
        let mut r = ConstraintResiduals::default();
        let h = corners[0].distance(corners[1]).max(corners[0].distance(corners[3]));
        for side in [Side::Minus, Side::Plus] {
            let br = self.branch(side);
            let sums = br.iter().fold([0.0; 4], |acc, s| [acc[0] + s.a, acc[1] + s.b, acc[2] + s.c, acc[3] + s.d]);
            let pu = (sums[0] - 1.0).abs().max(h * sums[1].abs()).max(h * sums[2].abs()).max(h * h * sums[3].abs());
            r.partition_of_unity = r.partition_of_unity.max(pu);
        }
        for i in 0..4 {
            for (j, &v) in corners.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                r.nodal = r.nodal.max((self.eval(i, v) - target).abs());
            }
        }
        if let ElementBasis::Immersed { minus, plus, cut } = self {
            let n = cut.chord_normal();
            let m = cut.d.midpoint(cut.e);
            let len = cut.d.distance(cut.e);
            for i in 0..4 {
                for p in [cut.d, cut.e] {
                    r.continuity = r.continuity.max((plus[i].eval(p) - minus[i].eval(p)).abs());
                }
                r.mixed = r.mixed.max(h * h * (plus[i].d - minus[i].d).abs());
                let jump = beta.plus * plus[i].grad(m).dot(n) - beta.minus * minus[i].grad(m).dot(n);
                r.flux = r.flux.max((jump * len / beta.max()).abs());
            }
        }
        r
    }
}

/// In-place LU with partial pivoting of a dense `N x N` system with `R`
/// right-hand sides. Returns the smallest pivot on failure.
fn lu_solve<const N: usize, const R: usize>(m: &mut [[f64; N]; N], rhs: &mut [[f64; R]; N]) -> std::result::Result<(), f64> {
    for col in 0..N {
        let piv = (col..N).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        if m[piv][col].abs() < PIVOT_TOLERANCE {
            return Err(m[piv][col].abs());
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..N {
            let f = m[row][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..N {
                m[row][k] -= f * m[col][k];
            }
            for k in 0..R {
                rhs[row][k] -= f * rhs[col][k];
            }
        }
    }
    for col in (0..N).rev() {
        for k in 0..R {
            let mut s = rhs[col][k];
            for j in col + 1..N {
                s -= m[col][j] * rhs[j][k];
            }
            rhs[col][k] = s / m[col][col];
        }
    }
    Ok(())
}

fn solve_immersed(rect: &AxisRect, cut: &CutConfiguration, beta: Coefficient) -> std::result::Result<ElementBasis, f64> {
    // Solve in centered coordinates scaled by the element size, then undo
    // the scaling.
    let s = rect.width;
    let xc = rect.origin.x + 0.5 * rect.width;
    let yc = rect.origin.y + 0.5 * rect.height;
    let local = |p: Point2| ((p.x - xc) / s, (p.y - yc) / s);
    let monomials = |p: Point2| {
        let (xi, eta) = local(p);
        [1.0, xi, eta, xi * eta]
    };
    let block = |side: Side| match side {
        Side::Minus => 0,
        Side::Plus => 4,
    };

    let mut m = [[0.0f64; 8]; 8];
    let mut rhs = [[0.0f64; 4]; 8];
    for (j, &v) in rect.corners().iter().enumerate() {
        let off = block(cut.chord_side(v));
        m[j][off..off + 4].copy_from_slice(&monomials(v));
        rhs[j][j] = 1.0;
    }
    for (row, p) in [(4, cut.d), (5, cut.e)] {
        let mono = monomials(p);
        for k in 0..4 {
            m[row][k] = -mono[k];
            m[row][4 + k] = mono[k];
        }
    }
    m[6][3] = -1.0;
    m[6][7] = 1.0;
    let n = cut.chord_normal();
    let (xi_m, eta_m) = local(cut.d.midpoint(cut.e));
    let flux = [0.0, n.x, n.y, n.x * eta_m + n.y * xi_m];
    let scale = 1.0 / beta.max();
    for k in 0..4 {
        m[7][k] = -beta.minus * scale * flux[k];
        m[7][4 + k] = beta.plus * scale * flux[k];
    }

    lu_solve(&mut m, &mut rhs)?;

    let center = Point2::new(xc, yc);
    let to_global = |u: [f64; 4]| {
        let [a, b, c, d] = u;
        BilinearCoeffs::centered(center, a, b / s, c / s, d / (s * s))
    };
    let mut minus = [BilinearCoeffs::default(); 4];
    let mut plus = [BilinearCoeffs::default(); 4];
    for i in 0..4 {
        minus[i] = to_global([rhs[0][i], rhs[1][i], rhs[2][i], rhs[3][i]]);
        plus[i] = to_global([rhs[4][i], rhs[5][i], rhs[6][i], rhs[7][i]]);
    }
    Ok(ElementBasis::Immersed { minus, plus, cut: cut.clone() })
}

/// IFE shape functions of an interface rectangle.
pub fn build_immersed_basis(rect: &AxisRect, cut: &CutConfiguration, beta: Coefficient) -> Result<ElementBasis> {
    solve_immersed(rect, cut, beta).map_err(|pivot| Error::SingularLocalSystem { element: usize::MAX, pivot })
}

/// The global IFE space: one degree of freedom per mesh vertex.
#[derive(Clone, Debug)]
pub struct GlobalSpace {
    pub mesh: CartesianMesh,
    pub classification: MeshClassification,
    pub curve: InterfaceCurve,
    pub beta: Coefficient,
    pub bases: Vec<ElementBasis>,
}

impl GlobalSpace {
    /// Classifies `mesh` against `curve` and builds every element basis.
    pub fn new(mesh: CartesianMesh, curve: InterfaceCurve, beta: Coefficient) -> Result<Self> {
        let classification = classify_mesh(&mesh, &curve)?;
        Self::from_parts(mesh, classification, curve, beta)
    }

    pub fn from_parts(
        mesh: CartesianMesh,
        classification: MeshClassification,
        curve: InterfaceCurve,
        beta: Coefficient,
    ) -> Result<Self> {
        let bases = (0..mesh.n_elements())
            .into_par_iter()
            .map(|k| {
                let rect = mesh.element_rect(k);
                match &classification.elements[k] {
                    ElementClass::NonInterface(side) => {
                        Ok(ElementBasis::Standard { side: *side, shapes: standard_bilinear_basis(&rect) })
                    }
                    ElementClass::Interface(cut) => solve_immersed(&rect, cut, beta)
                        .map_err(|pivot| Error::SingularLocalSystem { element: k, pivot }),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { mesh, classification, curve, beta, bases })
    }

    pub fn n_dofs(&self) -> usize {
        self.mesh.n_vertices()
    }

    pub fn element_dofs(&self, k: usize) -> [usize; 4] {
        self.mesh.elements[k]
    }

    pub fn boundary_dofs(&self) -> &[usize] {
        &self.classification.boundary_vertices
    }

    /// Value of the finite element function `coeffs` at `p` in element `k`.
    pub fn eval(&self, coeffs: &[f64], k: usize, p: Point2) -> f64 {
        let side = self.bases[k].side_at(p);
        self.eval_on(coeffs, k, side, p)
    }

    pub fn eval_on(&self, coeffs: &[f64], k: usize, side: Side, p: Point2) -> f64 {
        let vals = self.bases[k].values_on(side, p);
        self.element_dofs(k).iter().zip(vals).map(|(&g, v)| coeffs[g] * v).sum()
    }

    pub fn grad_on(&self, coeffs: &[f64], k: usize, side: Side, p: Point2) -> Point2 {
        let grads = self.bases[k].grads_on(side, p);
        self.element_dofs(k)
            .iter()
            .zip(grads)
            .fold(Point2::default(), |acc, (&g, gr)| acc + gr * coeffs[g])
    }

    /// Largest coefficient magnitude over all element bases.
    pub fn max_coefficient(&self) -> f64 {
        self.bases
            .iter()
            .flat_map(|b| [Side::Minus, Side::Plus].map(|s| b.branch(s).iter().map(|c| c.max_abs()).fold(0.0, f64::max)))
            .fold(0.0, f64::max)
    }
}

/// Lagrange interpolant: the coefficient of each vertex is `u(vertex)`.
pub fn interpolate(space: &GlobalSpace, u: impl Fn(Point2) -> f64) -> Vec<f64> {
    space.mesh.vertices.iter().map(|&p| u(p)).collect()
}
