//! End-to-end convergence studies on the elliptical-interface benchmark.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

pub use crate::theta::InitialMode;

use crate::assembly::PenaltyConfig;
use crate::error::{Error, Result};
use crate::ife::GlobalSpace;
use crate::manufactured::EllipseProblem;
use crate::mesh::CartesianMesh;
use crate::norms::{element_samples, fill_rates, ErrorRecord};
use crate::theta::{initial_condition, ThetaScheme, TimeStepper};
use crate::Coefficient;

pub const DEFAULT_STUDY: [usize; 5] = [10, 20, 40, 80, 160];

/// Parameters of a convergence study on the unit square.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Elements per side of each mesh, strictly increasing.
    pub study: Vec<usize>,
    pub theta: f64,
    pub epsilon: f64,
    pub sigma0: f64,
    pub alpha: f64,
    pub beta_minus: f64,
    pub beta_plus: f64,
    /// `c` in `Δt = c h`.
    pub dt_ratio: f64,
    pub t_final: f64,
    pub init: InitialMode,
    pub tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            study: DEFAULT_STUDY.to_vec(),
            theta: 1.0,
            epsilon: 1.0,
            sigma0: 1.0,
            alpha: 1.0,
            beta_minus: 1.0,
            beta_plus: 10.0,
            dt_ratio: 2.0,
            t_final: 1.0,
            init: InitialMode::Interpolation,
            tol: 1e-10,
        }
    }
}

impl RunConfig {
    /// Named parameter sets of the benchmark runs.
    pub const PRESETS: [&'static str; 6] = ["be-nonsym", "be-sym", "cn-nonsym", "cn-sym", "be-contrast", "cn-contrast"];

    pub fn preset(name: &str) -> Option<Self> {
        let base = Self::default();
        let sym = Self { epsilon: -1.0, sigma0: 100.0, ..base.clone() };
        Some(match name {
            "be-nonsym" => base,
            "be-sym" => sym,
            "cn-nonsym" => Self { theta: 0.5, ..base },
            "cn-sym" => Self { theta: 0.5, ..sym },
            "be-contrast" => Self { beta_plus: 10000.0, ..base },
            "cn-contrast" => Self { theta: 0.5, beta_plus: 10000.0, ..base },
            _ => return None,
        })
    }

    pub fn penalty(&self) -> Result<PenaltyConfig> {
        PenaltyConfig::new(self.epsilon, self.sigma0, self.alpha)
    }

    pub fn beta(&self) -> Result<Coefficient> {
        Coefficient::new(self.beta_minus, self.beta_plus)
    }

    pub fn validate(&self) -> Result<()> {
        self.penalty()?;
        self.beta()?;
        if self.study.is_empty() {
            return Err(Error::InvalidArgument("the study needs at least one mesh".into()));
        }
        if self.study.iter().any(|&n| n < 2) {
            return Err(Error::InvalidArgument("every mesh needs at least 2 elements per side".into()));
        }
        if self.study.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("study mesh sizes must be strictly increasing".into()));
        }
        if !(self.dt_ratio > 0.0) || !self.dt_ratio.is_finite() {
            return Err(Error::InvalidArgument(format!("dt ratio must be positive, got {}", self.dt_ratio)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("solver tolerance must be positive, got {}", self.tol)));
        }
        ThetaScheme::new(self.theta, self.t_final, 1)?;
        Ok(())
    }

    /// Steps to the final time with `Δt` as close as possible to `c h`.
    pub fn n_steps(&self, n_side: usize) -> usize {
        let h = 1.0 / n_side as f64;
        ((self.t_final / (self.dt_ratio * h)).round() as usize).max(1)
    }

    pub fn scheme(&self, n_side: usize) -> Result<ThetaScheme> {
        Ok(ThetaScheme::new(self.theta, self.t_final, self.n_steps(n_side))?.with_tolerance(self.tol))
    }

    pub fn problem(&self) -> Result<EllipseProblem> {
        let beta = self.beta()?;
        let std = EllipseProblem::standard(beta);
        EllipseProblem::new(std.ellipse, std.p, beta, self.t_final)
    }
}

/// Result of one mesh of a study.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub record: ErrorRecord,
    pub space: GlobalSpace,
    pub solution: Vec<f64>,
    pub seconds: f64,
    pub total_iterations: usize,
}

/// Solves the benchmark on one mesh and measures the final-time errors.
pub fn run_single(cfg: &RunConfig, n_side: usize) -> Result<RunOutcome> {
    let start = Instant::now();
    let penalty = cfg.penalty()?;
    let problem = cfg.problem()?;
    let space = GlobalSpace::new(CartesianMesh::unit_square(n_side)?, problem.curve(), problem.beta)?;
    let scheme = cfg.scheme(n_side)?;
    let stepper = TimeStepper::new(&space, &penalty, scheme);
    let u0 = initial_condition(&space, cfg.init, &problem, &penalty, Some(stepper.stiffness()))?;
    let sol = stepper.march(&space, &problem, u0, scheme.n_steps)?;
    let solution = sol.final_state().to_vec();
    let record = ErrorRecord::measure(&space, &solution, &problem, sol.final_time(), &penalty, scheme.dt());
    Ok(RunOutcome {
        record,
        space,
        solution,
        seconds: start.elapsed().as_secs_f64(),
        total_iterations: sol.iterations.iter().sum(),
    })
}

/// Errors and timings of a completed (or partially completed) study.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyReport {
    pub config: RunConfig,
    pub records: Vec<ErrorRecord>,
    pub seconds: Vec<f64>,
}

impl StudyReport {
    pub fn new(config: RunConfig) -> Self {
        Self { config, records: Vec::new(), seconds: Vec::new() }
    }

    pub const CSV_HEADER: &'static str = "h,dt,linf,linf_rate,l2,l2_rate,h1,h1_rate,energy,energy_rate";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        let fmt_rate = |r: Option<f64>| r.map(|v| format!("{v:.5e}")).unwrap_or_default();
        for r in &self.records {
            let _ = writeln!(
                out,
                "{:.5e},{:.5e},{:.5e},{},{:.5e},{},{:.5e},{},{:.5e},{}",
                r.h,
                r.dt,
                r.linf,
                fmt_rate(r.linf_rate),
                r.l2,
                fmt_rate(r.l2_rate),
                r.h1,
                fmt_rate(r.h1_rate),
                r.energy,
                fmt_rate(r.energy_rate)
            );
        }
        out
    }

    /// Aligned text table: one row per mesh, each norm followed by its rate.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>6} {:>11} {:>11} {:>7} {:>11} {:>7} {:>11} {:>7} {:>11} {:>7} {:>11}",
            "N", "dt", "Linf", "rate", "L2", "rate", "H1", "rate", "energy", "rate", "Linf(nodes)"
        );
        let fmt_rate = |r: Option<f64>| r.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        for r in &self.records {
            let _ = writeln!(
                out,
                "{:>6} {:>11.4e} {:>11.4e} {:>7} {:>11.4e} {:>7} {:>11.4e} {:>7} {:>11.4e} {:>7} {:>11.4e}",
                r.n_side,
                r.dt,
                r.linf,
                fmt_rate(r.linf_rate),
                r.l2,
                fmt_rate(r.l2_rate),
                r.h1,
                fmt_rate(r.h1_rate),
                r.energy,
                fmt_rate(r.energy_rate),
                r.linf_nodal
            );
        }
        out
    }
}

/// Runs every mesh of the study in order. `on_mesh` sees the report after
/// each completed mesh, so partial results can be flushed before a later
/// mesh fails.
pub fn run_study_with(cfg: &RunConfig, mut on_mesh: impl FnMut(&StudyReport, &RunOutcome)) -> Result<StudyReport> {
    cfg.validate()?;
    let mut report = StudyReport::new(cfg.clone());
    for &n in &cfg.study {
        let outcome = run_single(cfg, n).map_err(|source| Error::StudyFailed { n_side: n, source: Box::new(source) })?;
        report.records.push(outcome.record);
        report.seconds.push(outcome.seconds);
        fill_rates(&mut report.records);
        on_mesh(&report, &outcome);
    }
    Ok(report)
}

pub fn run_study(cfg: &RunConfig) -> Result<StudyReport> {
    run_study_with(cfg, |_, _| {})
}

/// Writes `x y value side` for the 5x5 samples of every element, after a
/// one-line header.
pub fn write_field(space: &GlobalSpace, coeffs: &[f64], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "# x y value side")?;
    for k in 0..space.mesh.n_elements() {
        for p in element_samples(space, k) {
            let side = space.bases[k].side_at(p);
            writeln!(out, "{:.10e} {:.10e} {:.10e} {}", p.x, p.y, space.eval(coeffs, k, p), side.as_str())?;
        }
    }
    Ok(())
}

pub fn export_field(space: &GlobalSpace, coeffs: &[f64], path: &Path) -> Result<()> {
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    write_field(space, coeffs, &mut w).map_err(io)?;
    w.flush().map_err(io)
}
