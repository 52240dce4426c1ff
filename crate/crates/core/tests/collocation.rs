use ddesim_core::collocate::{
    collocation_residual, collocation_solve, evolve_state, reference_solution, remainder_against, remainder_estimate,
    scalar_history,
};
use ddesim_core::{evolution_matrix, multipliers, shift_problem, Cx, DdeProblem, GridPair, QuadratureRule};

fn rule(n: usize) -> QuadratureRule<f64> {
    QuadratureRule::default_for_degree(n)
}

fn hayes(r: f64) -> DdeProblem<f64> {
    DdeProblem::new(1, 1.0, 0.0, r).unwrap().with_scalar_b(|_| -1.0)
}

#[test]
fn evolution_matches_restricted_collocation_polynomial() {
    let p = DdeProblem::new(1, 1.0, 0.0, 1.6)
        .unwrap()
        .with_scalar_a(|t: f64| -0.2 * t.cos())
        .with_scalar_b(|_| -1.0)
        .with_scalar_c(|_, th| 0.3 * th);
    let phi = scalar_history(|th: f64| (2.0 * th).cos());
    let (n, m) = (14, 12);
    let state = evolve_state(&p, phi.clone(), n, m, &rule(n)).unwrap();
    let sp = shift_problem(&p);
    let g = GridPair::new(n, m, 1.0, 1.6).unwrap();
    let sol = collocation_solve(&sp, phi.clone(), &g, &rule(n)).unwrap();
    for (j, &th) in g.minus.nodes().iter().enumerate() {
        let v = sol.eval(1.6 + th).unwrap()[0];
        assert!((state[j] - v).norm() < 1e-13, "node {j}");
    }
    let residual = collocation_residual(&sp, &sol, phi, &g, &rule(n)).unwrap();
    assert!(residual < 1e-10);
}

#[test]
fn evolve_state_examples() {
    let hist = |th: f64| th.exp();
    let zero = DdeProblem::<f64>::new(1, 1.0, 0.0, 1.5).unwrap();
    let s = evolve_state(&zero, scalar_history(hist), 8, 8, &rule(8)).unwrap();
    assert!(s.iter().all(|z| (z - Cx::new(1.0, 0.0)).norm() < 1e-14));

    let p = hayes(1.0);
    let s = evolve_state(&p, scalar_history(|_| 1.0), 9, 9, &rule(9)).unwrap();
    let g = GridPair::new(9, 9, 1.0, 1.0).unwrap();
    for (j, &th) in g.minus.nodes().iter().enumerate() {
        assert!((s[j].re + th).abs() < 1e-13);
    }

    let alpha = Cx::new(-2.5, 0.75);
    let base = evolve_state(&p, scalar_history(hist), 9, 9, &rule(9)).unwrap();
    let scaled = evolve_state(
        &p,
        move |th: f64| scalar_history(hist)(th).map(|z| z * alpha),
        9,
        9,
        &rule(9),
    )
    .unwrap();
    assert!((scaled - base.map(|z| z * alpha)).norm() < 1e-13);
}

#[test]
fn error_is_bounded_by_a_stable_multiple_of_the_remainder() {
    // analytic but oscillatory history keeps every N above the round-off floor
    let p = shift_problem(&DdeProblem::new(1, 1.0, 0.0, 1.0).unwrap().with_scalar_b(|_| -2.0));
    let phi = scalar_history(|th: f64| (8.0 * th).cos());
    let reference = reference_solution(&p, phi.clone(), 5e-4).unwrap();
    let mut ratios = Vec::new();
    for n in [4, 8, 12, 16, 20] {
        let g = GridPair::new(n, n, 1.0, 1.0).unwrap();
        let sol = collocation_solve(&p, phi.clone(), &g, &rule(n)).unwrap();
        let est = remainder_against(&reference, &sol, &g).unwrap();
        assert!(est.rho > 1e-13);
        ratios.push(est.solution_error / est.rho);
    }
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(hi < 1.0 && hi / lo < 10.0, "{ratios:?}");
}

#[test]
fn remainder_decays_spectrally_for_analytic_solutions() {
    let p = shift_problem(&DdeProblem::new(1, 1.0, 0.0, 1.0).unwrap().with_scalar_a(|_| 1.0));
    let phi = scalar_history(|_| 1.0);
    let est = |n: usize| {
        let g = GridPair::new(n, n, 1.0, 1.0).unwrap();
        remainder_estimate(&p, phi.clone(), &g, &rule(n), 5e-4).unwrap()
    };
    let (coarse, fine) = (est(8), est(16));
    assert!(coarse.rho / fine.rho >= 1e4, "{coarse:?} {fine:?}");
    assert!(
        coarse.solution_error / fine.solution_error >= 1e4,
        "{coarse:?} {fine:?}"
    );
}

#[test]
fn remainder_decays_slowly_for_lipschitz_history() {
    let p = shift_problem(&hayes(1.0));
    let phi = scalar_history(|th: f64| (th + 0.5).abs());
    let reference = reference_solution(&p, phi.clone(), 1e-3).unwrap();
    let err = |n: usize| {
        let g = GridPair::new(n, n, 1.0, 1.0).unwrap();
        let sol = collocation_solve(&p, phi.clone(), &g, &rule(n)).unwrap();
        remainder_against(&reference, &sol, &g).unwrap()
    };
    let (a, b, c) = (err(6), err(12), err(24));
    assert!(b.solution_error < a.solution_error && c.solution_error < b.solution_error);
    assert!(c.solution_error > 1e-12, "kink in the history keeps the error visible");
}

#[test]
fn hayes_solution_on_first_interval_is_linear() {
    let p = shift_problem(&hayes(1.0));
    for n in [1, 3, 7, 20] {
        let g = GridPair::new(n, n.max(2), 1.0, 1.0).unwrap();
        let sol = collocation_solve(&p, scalar_history(|_| 1.0), &g, &rule(n)).unwrap();
        for k in 0..=50 {
            let t = k as f64 / 50.0;
            assert!(
                (sol.eval(t).unwrap()[0] - Cx::new(1.0 - t, 0.0)).norm() < 1e-13,
                "N={n} t={t}"
            );
        }
    }
}

#[test]
fn single_precision_pipeline_runs() {
    let p = DdeProblem::<f32>::new(1, 1.0, 0.0, 1.0)
        .unwrap()
        .with_scalar_b(|_| -1.0);
    let mats = evolution_matrix(&p, 10, 10, &QuadratureRule::default_for_degree(10)).unwrap();
    let res = multipliers(&mats, 1e-5).unwrap();
    let dom = res.dominant().unwrap();
    assert!(((dom.re * dom.re + dom.im * dom.im).sqrt() - 0.727_5).abs() < 1e-3);
}
