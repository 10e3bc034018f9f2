//! Problem data for the θ-scheme and the elliptical-interface benchmark with
//! a known exact solution.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Ellipse, InterfaceCurve, Point2, Side};
use crate::Coefficient;

/// Data `f`, `g`, `u0` of `u_t - div(β grad u) = f`, `u = g` on the boundary,
/// `u = u0` at `t = 0`. Implementations pick the subdomain of a point
/// themselves.
pub trait ParabolicProblem: Sync {
    fn source(&self, p: Point2, t: f64) -> f64;
    fn boundary(&self, p: Point2, t: f64) -> f64;
    fn initial(&self, p: Point2) -> f64;
    /// Gradient of `u0`, needed by the elliptic projection.
    fn initial_gradient(&self, _p: Point2) -> Option<Point2> {
        None
    }
}

/// A known solution to measure errors against.
pub trait ExactSolution: Sync {
    fn value(&self, p: Point2, t: f64) -> f64;
    fn gradient(&self, p: Point2, t: f64) -> Point2;
}

type ScalarField = Arc<dyn Fn(Point2, f64) -> f64 + Send + Sync>;
type VectorField = Arc<dyn Fn(Point2) -> Point2 + Send + Sync>;

/// Problem assembled from closures.
#[derive(Clone)]
pub struct FunctionProblem {
    source: ScalarField,
    boundary: ScalarField,
    initial: Arc<dyn Fn(Point2) -> f64 + Send + Sync>,
    initial_gradient: Option<VectorField>,
}

impl FunctionProblem {
    pub fn new(
        source: impl Fn(Point2, f64) -> f64 + Send + Sync + 'static,
        boundary: impl Fn(Point2, f64) -> f64 + Send + Sync + 'static,
        initial: impl Fn(Point2) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { source: Arc::new(source), boundary: Arc::new(boundary), initial: Arc::new(initial), initial_gradient: None }
    }

    pub fn with_initial_gradient(mut self, grad: impl Fn(Point2) -> Point2 + Send + Sync + 'static) -> Self {
        self.initial_gradient = Some(Arc::new(grad));
        self
    }

    /// `f = 0`, `g = 0`, `u0 = 0`.
    pub fn zero() -> Self {
        Self::new(|_, _| 0.0, |_, _| 0.0, |_| 0.0).with_initial_gradient(|_| Point2::default())
    }
}

impl fmt::Debug for FunctionProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionProblem").finish_non_exhaustive()
    }
}

impl ParabolicProblem for FunctionProblem {
    fn source(&self, p: Point2, t: f64) -> f64 {
        (self.source)(p, t)
    }

    fn boundary(&self, p: Point2, t: f64) -> f64 {
        (self.boundary)(p, t)
    }

    fn initial(&self, p: Point2) -> f64 {
        (self.initial)(p)
    }

    fn initial_gradient(&self, p: Point2) -> Option<Point2> {
        self.initial_gradient.as_ref().map(|g| g(p))
    }
}

/// Elliptical interface `r(x, y) = 1` with
/// `r^2 = ((x - x0) / a)^2 + ((y - y0) / b)^2` and exact solution
///
/// * `u- = r^p e^t / β-` inside,
/// * `u+ = (r^p / β+ - 1 / β+ + 1 / β-) e^t` outside.
///
/// Both `u` and the normal flux `β du/dn` are continuous across `r = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipseProblem {
    pub ellipse: Ellipse,
    pub p: i32,
    pub beta: Coefficient,
    pub t_final: f64,
}

impl EllipseProblem {
    pub fn new(ellipse: Ellipse, p: i32, beta: Coefficient, t_final: f64) -> Result<Self> {
        if p < 4 {
            return Err(Error::InvalidArgument(format!("exponent p must be at least 4, got {p}")));
        }
        if !(t_final > 0.0) {
            return Err(Error::InvalidArgument(format!("final time must be positive, got {t_final}")));
        }
        Ok(Self { ellipse, p, beta, t_final })
    }

    /// Center `(0, 0)`, semi-axes `(π/4, π/6)`, `p = 5`, `T = 1`.
    pub fn standard(beta: Coefficient) -> Self {
        let ellipse = Ellipse::new(Point2::new(0.0, 0.0), PI / 4.0, PI / 6.0).expect("positive semi-axes");
        Self { ellipse, p: 5, beta, t_final: 1.0 }
    }

    pub fn curve(&self) -> InterfaceCurve {
        InterfaceCurve::Ellipse(self.ellipse)
    }

    pub fn r(&self, q: Point2) -> f64 {
        self.ellipse.radius(q)
    }

    pub fn side(&self, q: Point2) -> Side {
        Side::from_sign(self.r(q) - 1.0)
    }

    fn scaled_offsets(&self, q: Point2) -> (f64, f64, f64, f64) {
        let (a, b) = self.ellipse.semi_axes;
        let dx = q.x - self.ellipse.center.x;
        let dy = q.y - self.ellipse.center.y;
        (dx, dy, a * a, b * b)
    }

    fn r_pow(&self, q: Point2) -> f64 {
        self.r(q).powi(self.p)
    }

    /// `grad r^p = p r^(p-2) ((x - x0) / a^2, (y - y0) / b^2)`.
    pub fn grad_r_pow(&self, q: Point2) -> Point2 {
        let (dx, dy, a2, b2) = self.scaled_offsets(q);
        let s = f64::from(self.p) * self.r(q).powi(self.p - 2);
        Point2::new(s * dx / a2, s * dy / b2)
    }

    /// `Δ r^p = p (p-2) r^(p-4) ((x-x0)^2/a^4 + (y-y0)^2/b^4) + p r^(p-2) (1/a^2 + 1/b^2)`.
    pub fn laplacian_r_pow(&self, q: Point2) -> f64 {
        let (dx, dy, a2, b2) = self.scaled_offsets(q);
        let p = f64::from(self.p);
        let r = self.r(q);
        p * (p - 2.0) * r.powi(self.p - 4) * (dx * dx / (a2 * a2) + dy * dy / (b2 * b2))
            + p * r.powi(self.p - 2) * (1.0 / a2 + 1.0 / b2)
    }

    pub fn exact_u_on(&self, side: Side, q: Point2, t: f64) -> f64 {
        let (bm, bp) = (self.beta.minus, self.beta.plus);
        let rp = self.r_pow(q);
        let et = t.exp();
        match side {
            Side::Minus => rp / bm * et,
            Side::Plus => (rp / bp - 1.0 / bp + 1.0 / bm) * et,
        }
    }

    pub fn exact_u(&self, q: Point2, t: f64) -> f64 {
        self.exact_u_on(self.side(q), q, t)
    }

    pub fn exact_grad_on(&self, side: Side, q: Point2, t: f64) -> Point2 {
        self.grad_r_pow(q) * (t.exp() / self.beta.on(side))
    }

    pub fn exact_grad_u(&self, q: Point2, t: f64) -> Point2 {
        self.exact_grad_on(self.side(q), q, t)
    }

    /// `f = u_t - β Δu` on the given branch.
    pub fn source_on(&self, side: Side, q: Point2, t: f64) -> f64 {
        let (bm, bp) = (self.beta.minus, self.beta.plus);
        let rp = self.r_pow(q);
        let lap = self.laplacian_r_pow(q);
        let et = t.exp();
        match side {
            Side::Minus => et * (rp / bm - lap),
            Side::Plus => et * (rp / bp + 1.0 / bm - 1.0 / bp - lap),
        }
    }

    pub fn source_f(&self, q: Point2, t: f64) -> f64 {
        self.source_on(self.side(q), q, t)
    }

    pub fn boundary_g(&self, q: Point2, t: f64) -> f64 {
        self.exact_u(q, t)
    }

    pub fn initial_u0(&self, q: Point2) -> f64 {
        self.exact_u(q, 0.0)
    }

    /// Outward unit normal of the level set at `q`.
    pub fn interface_normal(&self, q: Point2) -> Point2 {
        let (dx, dy, a2, b2) = self.scaled_offsets(q);
        let n = Point2::new(dx / a2, dy / b2);
        n * (1.0 / n.norm())
    }
}

impl ParabolicProblem for EllipseProblem {
    fn source(&self, p: Point2, t: f64) -> f64 {
        self.source_f(p, t)
    }

    fn boundary(&self, p: Point2, t: f64) -> f64 {
        self.boundary_g(p, t)
    }

    fn initial(&self, p: Point2) -> f64 {
        self.initial_u0(p)
    }

    fn initial_gradient(&self, p: Point2) -> Option<Point2> {
        Some(self.exact_grad_u(p, 0.0))
    }
}

impl ExactSolution for EllipseProblem {
    fn value(&self, p: Point2, t: f64) -> f64 {
        self.exact_u(p, t)
    }

    fn gradient(&self, p: Point2, t: f64) -> Point2 {
        self.exact_grad_u(p, t)
    }
}
