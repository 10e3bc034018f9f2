//! Shared fixtures for the benchmarks.

use ppife_core::{CartesianMesh, Coefficient, EllipseProblem, GlobalSpace, PenaltyConfig};

/// Elliptical-interface space with `β = (1, 10)` on an `n x n` mesh.
pub struct Fixture {
    pub problem: EllipseProblem,
    pub space: GlobalSpace,
}

impl Fixture {
    pub fn new(n: usize) -> Self {
        let beta = Coefficient::new(1.0, 10.0).expect("valid coefficient");
        let problem = EllipseProblem::standard(beta);
        let space = GlobalSpace::new(CartesianMesh::unit_square(n).expect("valid mesh"), problem.curve(), beta)
            .expect("benchmark mesh has a clean cut");
        Self { problem, space }
    }
}

pub fn penalties() -> [(&'static str, PenaltyConfig); 2] {
    [("nonsym", PenaltyConfig::nonsymmetric(1.0)), ("sym", PenaltyConfig::symmetric(100.0))]
}
