use std::f64::consts::PI;

use ppife_core::assembly::{assemble_flux_functional, assemble_load, assemble_stiffness};
use ppife_core::ife::interpolate;
use ppife_core::norms::{energy_error, h1_semi_error, h1_semi_error_with, l2_error, l2_error_with};
use ppife_core::quadrature::Strength;
use ppife_core::study::{run_study, RunConfig};
use ppife_core::theta::{initial_condition, run_transient};
use ppife_core::{
    CartesianMesh, Coefficient, EllipseProblem, FunctionProblem, GlobalSpace, InitialMode, InterfaceCurve, PenaltyConfig,
    Point2, ThetaScheme,
};

fn ellipse_space(n: usize, beta: Coefficient) -> (GlobalSpace, EllipseProblem) {
    let problem = EllipseProblem::standard(beta);
    let space = GlobalSpace::new(CartesianMesh::unit_square(n).unwrap(), problem.curve(), beta).unwrap();
    (space, problem)
}

fn moderate() -> Coefficient {
    Coefficient::new(1.0, 10.0).unwrap()
}

#[test]
fn elliptic_projection_is_galerkin_orthogonal() {
    let (space, problem) = ellipse_space(20, moderate());
    let cfg = PenaltyConfig::nonsymmetric(1.0);
    let a = assemble_stiffness(&space, &cfg);
    let p = initial_condition(&space, InitialMode::EllipticProjection, &problem, &cfg, Some(&a)).unwrap();
    let rhs = assemble_flux_functional(&space, |q| problem.exact_grad_u(q, 0.0) * space.beta.on(space.curve.side(q)));
    let residual = a.spmv(&p);
    let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let boundary = space.boundary_dofs();
    for i in (0..space.n_dofs()).filter(|i| !boundary.contains(i)) {
        assert!((residual[i] - rhs[i]).abs() <= 1e-8 * scale, "dof {i}");
    }
    for &i in boundary {
        assert_eq!(p[i], problem.initial_u0(space.mesh.vertices[i]));
    }
}

#[test]
fn error_norms_are_stable_under_quadrature_strength() {
    let (space, problem) = ellipse_space(20, moderate());
    let u = interpolate(&space, |q| problem.exact_u(q, 1.0));
    let exact = |q| problem.exact_u(q, 1.0);
    let grad = |q| problem.exact_grad_u(q, 1.0);
    let (l2_lo, l2_hi) = (l2_error_with(&space, &u, exact, Strength::Assembly), l2_error_with(&space, &u, exact, Strength::Error));
    let (h1_lo, h1_hi) =
        (h1_semi_error_with(&space, &u, grad, Strength::Assembly), h1_semi_error_with(&space, &u, grad, Strength::Error));
    assert!((l2_lo - l2_hi).abs() < 0.01 * l2_hi, "{l2_lo} vs {l2_hi}");
    assert!((h1_lo - h1_hi).abs() < 0.01 * h1_hi, "{h1_lo} vs {h1_hi}");
}

#[test]
fn energy_norm_dominates_weighted_h1() {
    for beta in [moderate(), Coefficient::new(1.0, 10000.0).unwrap()] {
        let (space, problem) = ellipse_space(20, beta);
        let u = interpolate(&space, |q| problem.exact_u(q, 0.5));
        let grad = |q| problem.exact_grad_u(q, 0.5);
        let h1 = h1_semi_error(&space, &u, grad);
        let energy = energy_error(&space, &u, grad, &PenaltyConfig::nonsymmetric(1.0));
        assert!(energy >= beta.min().sqrt() * h1 * (1.0 - 1e-12));
        assert!(energy <= beta.max().sqrt() * h1 * 1.5 + 1.0);
    }
}

#[test]
fn interpolation_errors_converge() {
    let beta = moderate();
    let errors: Vec<(f64, f64)> = [10, 20, 40]
        .iter()
        .map(|&n| {
            let (space, problem) = ellipse_space(n, beta);
            let u = interpolate(&space, |q| problem.exact_u(q, 1.0));
            (l2_error(&space, &u, |q| problem.exact_u(q, 1.0)), h1_semi_error(&space, &u, |q| problem.exact_grad_u(q, 1.0)))
        })
        .collect();
    for w in errors.windows(2) {
        let (l2_rate, h1_rate) = ((w[0].0 / w[1].0).log2(), (w[0].1 / w[1].1).log2());
        assert!(l2_rate > 1.8, "L2 rate {l2_rate}");
        assert!(h1_rate > 0.9, "H1 rate {h1_rate}");
    }
}

#[test]
fn load_total_matches_fine_grid_integral() {
    let (space, problem) = ellipse_space(20, moderate());
    let t = 0.7;
    let load: f64 = assemble_load(&space, |q, side| problem.source_on(side, q, t)).iter().sum();
    let m = 2000;
    let h = 1.0 / m as f64;
    let mut integral = 0.0;
    for j in 0..m {
        for i in 0..m {
            let q = Point2::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            integral += problem.source_f(q, t) * h * h;
        }
    }
    assert!((load - integral).abs() <= 1e-3 * integral.abs(), "{load} vs {integral}");
}

#[test]
fn theta_schemes_have_their_temporal_order() {
    let (space, problem) = ellipse_space(10, moderate());
    let cfg = PenaltyConfig::nonsymmetric(1.0);
    let run = |scheme| {
        let sol = run_transient(&space, &cfg, scheme, &problem, InitialMode::EllipticProjection, 10_000).unwrap();
        sol.final_state().to_vec()
    };
    let reference = run(ThetaScheme::crank_nicolson(1.0, 1280).unwrap());
    let gap = |u: Vec<f64>| u.iter().zip(&reference).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let be = [gap(run(ThetaScheme::backward_euler(1.0, 20).unwrap())), gap(run(ThetaScheme::backward_euler(1.0, 40).unwrap()))];
    let cn = [gap(run(ThetaScheme::crank_nicolson(1.0, 20).unwrap())), gap(run(ThetaScheme::crank_nicolson(1.0, 40).unwrap()))];
    let be_order = (be[0] / be[1]).log2();
    let cn_order = (cn[0] / cn[1]).log2();
    assert!((be_order - 1.0).abs() < 0.15, "backward Euler order {be_order}");
    assert!((cn_order - 2.0).abs() < 0.15, "Crank-Nicolson order {cn_order}");
    assert!(cn[1] < be[1]);
}

#[test]
fn short_study_has_first_order_energy_convergence() {
    let cfg = RunConfig { study: vec![10, 20, 40], ..RunConfig::preset("be-nonsym").unwrap() };
    let report = run_study(&cfg).unwrap();
    for r in &report.records[1..] {
        let rate = r.h1_rate.unwrap();
        assert!((rate - 0.98).abs() < 0.05, "H1 rate {rate}");
        assert!(r.l2_rate.unwrap() > 1.8);
    }
}

#[test]
fn equal_coefficients_reduce_to_standard_elements() {
    let beta = Coefficient::new(2.0, 2.0).unwrap();
    let k = 1.0 + 4.0 * PI * PI;
    let problem = FunctionProblem::new(
        move |q: Point2, t: f64| k * t.exp() * (PI * q.x).sin() * (PI * q.y).sin(),
        |_, _| 0.0,
        |q: Point2| (PI * q.x).sin() * (PI * q.y).sin(),
    );
    let exact = |q: Point2| 1f64.exp() * (PI * q.x).sin() * (PI * q.y).sin();
    let cfg = PenaltyConfig::nonsymmetric(1.0);
    let mut errors = Vec::new();
    for n in [8, 16, 32] {
        let mesh = CartesianMesh::unit_square(n).unwrap();
        let ife = GlobalSpace::new(mesh.clone(), EllipseProblem::standard(beta).curve(), beta).unwrap();
        let plain = GlobalSpace::new(mesh, InterfaceCurve::line(1.0, 0.0, 5.0), beta).unwrap();
        let scheme = ThetaScheme::crank_nicolson(1.0, n).unwrap();
        let a = run_transient(&ife, &cfg, scheme, &problem, InitialMode::Interpolation, n).unwrap();
        let b = run_transient(&plain, &cfg, scheme, &problem, InitialMode::Interpolation, n).unwrap();
        let gap = a.final_state().iter().zip(b.final_state()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(gap < 1e-8, "N = {n}: {gap}");
        errors.push(l2_error(&ife, a.final_state(), exact));
    }
    for w in errors.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!((rate - 2.0).abs() < 0.15, "L2 rate {rate}");
    }
}
