//! Partially penalized immersed finite element (PPIFE) methods for parabolic
//! interface problems on uniform Cartesian meshes.
//!
//! The pipeline is: [`geometry`] cuts elements by the interface, [`mesh`]
//! classifies elements and edges, [`ife`] builds the bilinear immersed
//! shape functions, [`assembly`] forms the mass and stiffness operators,
//! [`theta`] marches the θ-scheme, and [`norms`] measures errors against the
//! manufactured solution in [`manufactured`]. [`study`] runs convergence
//! studies end to end.

// `!(x > 0.0)` is used on purpose so NaN fails validation; dense kernels
// index by position.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::large_enum_variant)]

pub mod assembly;
pub mod error;
pub mod geometry;
pub mod ife;
pub mod linalg;
pub mod manufactured;
pub mod mesh;
pub mod norms;
pub mod quadrature;
pub mod study;
pub mod theta;

pub use assembly::PenaltyConfig;
pub use error::{Error, Result};
pub use geometry::{AxisRect, CutConfiguration, Ellipse, InterfaceCurve, Point2, Region, Segment2, Side};
pub use ife::{BilinearCoeffs, ElementBasis, GlobalSpace};
pub use linalg::{CsrMatrix, TripletBuffer};
pub use manufactured::{EllipseProblem, ExactSolution, FunctionProblem, ParabolicProblem};
pub use mesh::{CartesianMesh, MeshClassification};
pub use norms::ErrorRecord;
pub use study::{RunConfig, StudyReport};
pub use theta::{InitialMode, ThetaScheme, TransientSolution};

/// Piecewise-constant diffusion coefficient `(β-, β+)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficient {
    pub minus: f64,
    pub plus: f64,
}

impl Coefficient {
    pub fn new(minus: f64, plus: f64) -> Result<Self> {
        if !(minus > 0.0 && plus > 0.0) || !minus.is_finite() || !plus.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "diffusion coefficients must be positive, got ({minus}, {plus})"
            )));
        }
        Ok(Self { minus, plus })
    }

    pub fn on(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.minus,
            Side::Plus => self.plus,
        }
    }

    pub fn max(&self) -> f64 {
        self.minus.max(self.plus)
    }

    pub fn min(&self) -> f64 {
        self.minus.min(self.plus)
    }
}
