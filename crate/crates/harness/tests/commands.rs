use std::f64::consts::FRAC_PI_2;

use ddesim::commands::{chart_points, cmd_converge, execute, spectrum, Command};
use ddesim::RunConfig;
use ddesim_core::Verdict;

fn cfg(text: &str) -> RunConfig {
    RunConfig::parse(text).unwrap()
}

/// Data rows of a CSV document as fields.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn field(row: &[String], k: usize) -> f64 {
    row[k].parse().unwrap()
}

#[test]
fn spectrum_of_an_ode_doubles() {
    let c = cfg("[problem]\nbuiltin = pure-ode\na = 0.6931471805599453\n[discretization]\nN = 16\n");
    let out = execute(Command::Spectrum, &c).unwrap();
    let r = rows(&out.csv);
    assert!((field(&r[0], 2) - 2.0).abs() < 1e-10);
    assert_eq!(out.verdict, Some(Verdict::Unstable));
    assert!(out.warnings.is_empty());
    assert!(out.messages[0].starts_with("verdict: unstable"));
}

#[test]
fn positive_feedback_gives_the_omega_constant() {
    let c = cfg("[problem]\nbuiltin = hayes\na = 0\nb = 1\n[discretization]\nN = 20\n");
    let res = spectrum(&c).unwrap();
    let want = 0.567_143_290_409_783_8f64.exp();
    assert!((res.dominant().unwrap() - want).norm() < 1e-8);
    assert_eq!(res.verdict, Some(Verdict::Unstable));
}

#[test]
fn zero_problem_is_marginal() {
    let c = cfg("[problem]\nbuiltin = pure-ode\na = 0\n[discretization]\nN = 10\n");
    let out = execute(Command::Spectrum, &c).unwrap();
    let r = rows(&out.csv);
    assert_eq!(r.len(), 1);
    assert!((field(&r[0], 0) - 1.0).abs() < 1e-13 && field(&r[0], 1).abs() < 1e-13);
    assert_eq!(out.verdict, Some(Verdict::Marginal));
}

#[test]
fn spectrum_csv_schema_and_short_window_warning() {
    let c = cfg("[problem]\nbuiltin = hayes\n[window]\nrs = 0.5\n[discretization]\nN = 12\n");
    let out = execute(Command::Spectrum, &c).unwrap();
    let header = out.csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "re,im,modulus,cluster_id,cluster_mean_re,cluster_mean_im,cluster_count"
    );
    assert_eq!(out.warnings.len(), 1);
    assert!(out.warnings[0].contains("r_s"));
    for r in rows(&out.csv) {
        assert_eq!(r.len(), 7);
        let (re, im, modulus) = (field(&r, 0), field(&r, 1), field(&r, 2));
        assert!((re.hypot(im) - modulus).abs() <= 1e-15 * modulus.max(1.0));
    }
}

#[test]
fn converge_reports_spectral_decay() {
    let c = cfg("[problem]\nbuiltin = hayes\nb = -1\n[converge]\nN_list = 5, 10, 15, 20\n");
    let rep = cmd_converge(&c).unwrap();
    assert!(rep.strictly_decreasing());
    assert!(rep.monotone);
    assert!(rep.error_at(20).unwrap() < 1e-10);
    assert_eq!(rep.ratios.len(), 3);
    let out = execute(Command::Converge, &c).unwrap();
    let text = &out.csv;
    assert!(text.contains("\nN,dominant_re,dominant_im,abs_error\n"));
    assert!(text.contains("# ratio error(20)/error(15) = "));
    assert!(text.contains("# monotone = true"));
    assert!(text.contains("Newton root"));
}

#[test]
fn converge_against_analytic_targets() {
    let c = cfg("[problem]\nbuiltin = pure-ode\na = -0.3\n[converge]\nN_list = 16\n");
    let rep = cmd_converge(&c).unwrap();
    assert!(rep.error_at(16).unwrap() < 1e-12);
    assert!(rep.target.provenance.starts_with("analytic"));

    let given = cfg("[problem]\ndim = 1\na = \"-0.3\"\n[converge]\nN_list = 8, 16\ntarget_re = \"exp(-0.3)\"\n");
    let rep = cmd_converge(&given).unwrap();
    assert!(rep.error_at(16).unwrap() < 1e-12);
}

#[test]
fn converge_refuses_without_a_target() {
    let c = cfg("[problem]\ndim = 1\nb = \"-1\"\n[converge]\nN_list = 8\n");
    assert!(cmd_converge(&c).is_err());
    let periodic = cfg("[problem]\nbuiltin = periodic-scalar\nb0 = -1\n[converge]\nN_list = 8\n");
    assert!(cmd_converge(&periodic).is_err());
}

#[test]
fn chart_classifies_the_hayes_plane() {
    let c = cfg(
        "[problem]\nbuiltin = hayes\n[chart]\np1 = a\np1_min = 0\np1_max = 0\np1_steps = 1\n\
         p2 = b\np2_min = -2\np2_max = -1\np2_steps = 2\n[discretization]\nN = 20\n",
    );
    let pts = chart_points(&c).unwrap();
    assert_eq!(pts.len(), 2);
    assert_eq!((pts[0].p2, pts[0].verdict), (-2.0, Some(Verdict::Unstable)));
    assert_eq!((pts[1].p2, pts[1].verdict), (-1.0, Some(Verdict::Stable)));

    let marginal = cfg(&format!(
        "[problem]\nbuiltin = hayes\n[chart]\np1 = a\np1_min = 0\np1_max = 0\np1_steps = 1\n\
         p2 = b\np2_min = {b:e}\np2_max = {b:e}\np2_steps = 1\n",
        b = -FRAC_PI_2
    ));
    let pts = chart_points(&marginal).unwrap();
    assert!((pts[0].dominant_modulus - 1.0).abs() < 1e-6);
}

#[test]
fn chart_matches_spectrum_bitwise() {
    let c = cfg(
        "[problem]\nbuiltin = hayes\n[chart]\np1 = a\np1_min = -0.5\np1_max = 0.5\np1_steps = 3\n\
                 p2 = b\np2_min = -2\np2_max = 0.5\np2_steps = 4\n[discretization]\nN = 12\n",
    );
    let pts = chart_points(&c).unwrap();
    assert_eq!(pts.len(), 12);
    for p in &pts {
        let single = cfg(&format!(
            "[problem]\nbuiltin = hayes\na = {:e}\nb = {:e}\n[discretization]\nN = 12\n",
            p.p1, p.p2
        ));
        let res = spectrum(&single).unwrap();
        assert_eq!(res.spectral_radius().to_bits(), p.dominant_modulus.to_bits());
        assert_eq!(res.verdict, p.verdict);
    }
    let out = execute(Command::Chart, &c).unwrap();
    assert!(out.csv.contains("\na,b,dominant_modulus,verdict\n"));
}

#[test]
fn chart_records_failed_points() {
    // N = 0 is rejected by the evolution operator at every grid point
    let c = cfg(
        "[problem]\nbuiltin = hayes\n[chart]\np1 = a\np1_min = 0\np1_max = 1\np1_steps = 2\n\
                 p2 = b\np2_min = -1\np2_max = -1\np2_steps = 1\n[discretization]\nN = 0\n",
    );
    let out = execute(Command::Chart, &c).unwrap();
    let r = rows(&out.csv);
    assert_eq!(r.len(), 2);
    assert!(r.iter().all(|row| row[2] == "NaN" && row[3] == "error"));
    assert_eq!(out.warnings.len(), 1);
    let bad_name = cfg("[problem]\nbuiltin = hayes\n[chart]\np1 = c0\np1_min = 0\np1_max = 1\n\
                        p2 = b\np2_min = -1\np2_max = 1\n");
    assert!(execute(Command::Chart, &bad_name).is_err());
}

#[test]
fn floquet_multipliers_of_periodic_odes() {
    for (a0, want) in [(0.0, 1.0), (-1.0, (-1.0f64).exp())] {
        let c = cfg(&format!(
            "[problem]\nbuiltin = periodic-scalar\na0 = {a0}\n[discretization]\nN = 24\n[floquet]\nomega = 1\n"
        ));
        let out = execute(Command::Floquet, &c).unwrap();
        assert!(out.csv.contains("# k = 1\n"));
        let r = rows(&out.csv);
        assert_eq!(r.len(), 1);
        assert!((field(&r[0], 0) - want).abs() < 1e-10);
        assert!(out.warnings.is_empty());
    }
}

#[test]
fn floquet_picks_the_smallest_covering_power() {
    let c = cfg(
        "[problem]\nbuiltin = periodic-scalar\na0 = -0.2\na1 = 0.3\nomega = 0.6\n[discretization]\nN = 28\n\
                 [floquet]\nomega = 0.6\n",
    );
    let out = execute(Command::Floquet, &c).unwrap();
    assert!(out.csv.contains("# k = 2\n"));
    assert!(out.csv.contains("# window = 1.2000000000000000e0\n"));
    // U(2 omega) of an ODE: exp of the integral over two periods
    let r = rows(&out.csv);
    assert!((field(&r[0], 0) - (-0.24f64).exp()).abs() < 1e-10);
}

#[test]
fn floquet_warns_about_aperiodic_coefficients() {
    let c = cfg("[problem]\nbuiltin = periodic-scalar\nomega = 1\n[floquet]\nomega = 0.7\n");
    let out = execute(Command::Floquet, &c).unwrap();
    assert!(out.warnings.iter().any(|w| w.contains("periodic")));
}

#[test]
fn solve_tracks_the_reference() {
    let c = cfg("[problem]\nbuiltin = hayes\n[solve]\nphi = \"cos(theta)\"\nsamples = 11\nreference_step = 1e-3\n");
    let out = execute(Command::Solve, &c).unwrap();
    let r = rows(&out.csv);
    assert_eq!(r.len(), 11);
    assert_eq!(r[0].len(), 5);
    assert_eq!(field(&r[0], 1), 1.0);
    for row in &r {
        assert!((field(row, 1) - field(row, 3)).abs() < 1e-9);
    }
    let constant = cfg("[problem]\nbuiltin = hayes\n[solve]\nphi = 1\nsamples = 5\n");
    for row in rows(&execute(Command::Solve, &constant).unwrap().csv) {
        assert!((field(&row, 1) - (1.0 - field(&row, 0))).abs() < 1e-13);
    }
}

#[test]
fn output_is_deterministic() {
    let c = cfg("[problem]\nbuiltin = distributed-const\nb = -0.5\n[discretization]\nN = 14\n");
    let a = execute(Command::Spectrum, &c).unwrap().csv;
    let b = execute(Command::Spectrum, &c).unwrap().csv;
    assert_eq!(a, b);
    let conv = cfg("[problem]\nbuiltin = hayes\n[converge]\nN_list = 4, 8, 12, 16, 20, 24\n");
    assert_eq!(
        execute(Command::Converge, &conv).unwrap().csv,
        execute(Command::Converge, &conv).unwrap().csv
    );
}

#[test]
fn history_degree_does_not_move_the_spectrum() {
    let c = cfg("[problem]\nbuiltin = hayes\n[discretization]\nN = 16\n");
    let a = rows(
        &execute(Command::Spectrum, &c.clone().with_overrides(None, Some(16)))
            .unwrap()
            .csv,
    );
    let b = rows(
        &execute(Command::Spectrum, &c.with_overrides(None, Some(21)))
            .unwrap()
            .csv,
    );
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!((field(x, 0) - field(y, 0)).abs() < 1e-10);
        assert!((field(x, 1) - field(y, 1)).abs() < 1e-10);
    }
}
