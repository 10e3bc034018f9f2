//! θ-scheme time stepping and initial conditions.

use std::fmt;
use std::str::FromStr;

use crate::assembly::{assemble_flux_functional, assemble_load, assemble_operators, assemble_stiffness, DirichletSystem, PenaltyConfig};
use crate::error::{Error, Result};
use crate::ife::{interpolate, GlobalSpace};
use crate::linalg::{solve, CsrMatrix, SolveStats, SolverOptions};
use crate::manufactured::ParabolicProblem;

/// How the discrete initial state is obtained from `u0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InitialMode {
    /// Nodal values of `u0`.
    #[default]
    Interpolation,
    /// `a_ε(u_h, v) = a_ε(u0, v)` for all test functions `v`.
    EllipticProjection,
}

impl fmt::Display for InitialMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitialMode::Interpolation => "interpolation",
            InitialMode::EllipticProjection => "projection",
        })
    }
}

impl FromStr for InitialMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "interpolation" | "interp" => Ok(InitialMode::Interpolation),
            "projection" | "elliptic" | "elliptic-projection" | "elliptic_projection" => {
                Ok(InitialMode::EllipticProjection)
            }
            other => Err(Error::InvalidArgument(format!(
                "unknown initial mode `{other}` (expected `interpolation` or `projection`)"
            ))),
        }
    }
}

/// `(M/Δt + θA) u^n = (M/Δt - (1-θ)A) u^{n-1} + θF^n + (1-θ)F^{n-1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaScheme {
    pub theta: f64,
    pub t_final: f64,
    pub n_steps: usize,
    /// Relative residual tolerance of each linear solve.
    pub tol: f64,
}

impl ThetaScheme {
    pub fn new(theta: f64, t_final: f64, n_steps: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidArgument(format!("theta must lie in [0, 1], got {theta}")));
        }
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(Error::InvalidArgument(format!("final time must be positive, got {t_final}")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidArgument("at least one time step is required".into()));
        }
        Ok(Self { theta, t_final, n_steps, tol: 1e-10 })
    }

    pub fn backward_euler(t_final: f64, n_steps: usize) -> Result<Self> {
        Self::new(1.0, t_final, n_steps)
    }

    pub fn crank_nicolson(t_final: f64, n_steps: usize) -> Result<Self> {
        Self::new(0.5, t_final, n_steps)
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    /// `t^n`; the last level is exactly `t_final`.
    pub fn time(&self, n: usize) -> f64 {
        if n == self.n_steps {
            self.t_final
        } else {
            n as f64 * self.dt()
        }
    }
}

/// Recorded coefficient vectors of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct TransientSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stride: usize,
    /// Krylov iterations of every step.
    pub iterations: Vec<usize>,
}

impl TransientSolution {
    pub fn initial_state(&self) -> &[f64] {
        &self.states[0]
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("at least the initial state is recorded")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("at least the initial time is recorded")
    }
}

/// Operators of the θ-scheme, assembled and constrained once.
#[derive(Clone, Debug)]
pub struct TimeStepper {
    scheme: ThetaScheme,
    mass: CsrMatrix,
    stiffness: CsrMatrix,
    system: DirichletSystem,
    explicit: CsrMatrix,
    symmetric: bool,
}

impl TimeStepper {
    pub fn new(space: &GlobalSpace, cfg: &PenaltyConfig, scheme: ThetaScheme) -> Self {
        let (mass, stiffness) = assemble_operators(space, cfg);
        Self::from_operators(mass, stiffness, space.boundary_dofs(), scheme)
    }

    pub fn from_operators(mass: CsrMatrix, stiffness: CsrMatrix, dirichlet_dofs: &[usize], scheme: ThetaScheme) -> Self {
        let inv_dt = 1.0 / scheme.dt();
        let composite = CsrMatrix::linear_combination(inv_dt, &mass, scheme.theta, &stiffness);
        let explicit = CsrMatrix::linear_combination(inv_dt, &mass, -(1.0 - scheme.theta), &stiffness);
        let system = DirichletSystem::new(&composite, dirichlet_dofs);
        let symmetric = system.matrix().is_symmetric();
        Self { scheme, mass, stiffness, system, explicit, symmetric }
    }

    pub fn scheme(&self) -> &ThetaScheme {
        &self.scheme
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    /// The constrained `M/Δt + θA`.
    pub fn composite(&self) -> &CsrMatrix {
        self.system.matrix()
    }

    /// Whether steps are solved with conjugate gradients.
    pub fn uses_cg(&self) -> bool {
        self.symmetric
    }

    /// One step from `u_prev`; `g_next[m]` is the value of the `m`-th
    /// Dirichlet dof at the new time level.
    pub fn step(&self, u_prev: &[f64], f_prev: &[f64], f_next: &[f64], g_next: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
        let theta = self.scheme.theta;
        let mut rhs = self.explicit.spmv(u_prev);
        for ((r, fp), fc) in rhs.iter_mut().zip(f_prev).zip(f_next) {
            *r += theta * fc + (1.0 - theta) * fp;
        }
        self.system.constrain_rhs(&mut rhs, g_next);
        let mut u = u_prev.to_vec();
        for (&k, &g) in self.system.dofs().iter().zip(g_next) {
            u[k] = g;
        }
        let opts = SolverOptions { tol: self.scheme.tol, ..SolverOptions::default() };
        let stats = solve(self.system.matrix(), &rhs, &mut u, self.symmetric, opts)?;
        for (&k, &g) in self.system.dofs().iter().zip(g_next) {
            u[k] = g;
        }
        Ok((u, stats))
    }

    /// Marches from `u0` to the final time, recording every `stride`-th
    /// level and the last one.
    pub fn march(
        &self,
        space: &GlobalSpace,
        problem: &dyn ParabolicProblem,
        u0: Vec<f64>,
        stride: usize,
    ) -> Result<TransientSolution> {
        let stride = stride.max(1);
        let boundary_values = |t: f64| -> Vec<f64> {
            space.boundary_dofs().iter().map(|&k| problem.boundary(space.mesh.vertices[k], t)).collect()
        };
        let load = |t: f64| assemble_load(space, |p, _| problem.source(p, t));

        let mut out = TransientSolution { times: vec![0.0], states: vec![u0.clone()], stride, iterations: Vec::new() };
        let mut u = u0;
        let mut f_prev = load(0.0);
        for n in 1..=self.scheme.n_steps {
            let t = self.scheme.time(n);
            let f_next = load(t);
            let (next, stats) = self
                .step(&u, &f_prev, &f_next, &boundary_values(t))
                .map_err(|source| Error::StepFailed { step: n, source: Box::new(source) })?;
            out.iterations.push(stats.iterations);
            u = next;
            f_prev = f_next;
            if n % stride == 0 || n == self.scheme.n_steps {
                out.times.push(t);
                out.states.push(u.clone());
            }
        }
        Ok(out)
    }
}

/// Single θ-step with operators assembled by the caller.
#[allow(clippy::too_many_arguments)]
pub fn theta_step(
    mass: &CsrMatrix,
    stiffness: &CsrMatrix,
    u_prev: &[f64],
    f_prev: &[f64],
    f_next: &[f64],
    dt: f64,
    theta: f64,
    dirichlet: (&[usize], &[f64]),
) -> Result<Vec<f64>> {
    let scheme = ThetaScheme::new(theta, dt, 1)?;
    let stepper = TimeStepper::from_operators(mass.clone(), stiffness.clone(), dirichlet.0, scheme);
    Ok(stepper.step(u_prev, f_prev, f_next, dirichlet.1)?.0)
}

/// Discrete initial state. `stiffness` may pass an already assembled
/// PPIFE matrix for the projection.
pub fn initial_condition(
    space: &GlobalSpace,
    mode: InitialMode,
    problem: &dyn ParabolicProblem,
    cfg: &PenaltyConfig,
    stiffness: Option<&CsrMatrix>,
) -> Result<Vec<f64>> {
    match mode {
        InitialMode::Interpolation => Ok(interpolate(space, |p| problem.initial(p))),
        InitialMode::EllipticProjection => {
            let probe = space.mesh.vertices[0];
            if problem.initial_gradient(probe).is_none() {
                return Err(Error::InvalidArgument("elliptic projection needs the gradient of u0".into()));
            }
            let flux = |p| {
                let g = problem.initial_gradient(p).expect("gradient available");
                g * space.beta.on(space.curve.side(p))
            };
            let mut rhs = assemble_flux_functional(space, flux);
            let owned;
            let a = match stiffness {
                Some(a) => a,
                None => {
                    owned = assemble_stiffness(space, cfg);
                    &owned
                }
            };
            let dofs = space.boundary_dofs();
            let values: Vec<f64> = dofs.iter().map(|&k| problem.initial(space.mesh.vertices[k])).collect();
            let system = DirichletSystem::new(a, dofs);
            system.constrain_rhs(&mut rhs, &values);
            let mut u = interpolate(space, |p| problem.initial(p));
            let symmetric = system.matrix().is_symmetric();
            solve(system.matrix(), &rhs, &mut u, symmetric, SolverOptions::default())?;
            for (&k, &g) in dofs.iter().zip(&values) {
                u[k] = g;
            }
            Ok(u)
        }
    }
}

/// Assembles the operators, builds the initial state and marches to the
/// final time.
pub fn run_transient(
    space: &GlobalSpace,
    cfg: &PenaltyConfig,
    scheme: ThetaScheme,
    problem: &dyn ParabolicProblem,
    init: InitialMode,
    stride: usize,
) -> Result<TransientSolution> {
    let stepper = TimeStepper::new(space, cfg, scheme);
    let u0 = initial_condition(space, init, problem, cfg, Some(stepper.stiffness()))?;
    stepper.march(space, problem, u0, stride)
}
