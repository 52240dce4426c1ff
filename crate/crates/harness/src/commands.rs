//! The five CLI commands. Each returns its CSV document plus console messages so the
//! binary only decides where they go.

use ddesim_core::collocate::{collocation_solve, dense_samples, reference_solution};
use ddesim_core::model::parse_coefficient;
use ddesim_core::spectra::{monodromy, multipliers_with};
use ddesim_core::{evolution_matrix, shift_problem, DdeError, DdeProblem, GridPair, SpectrumResult, Verdict};
use nalgebra::DVector;
use num_complex::Complex64 as C;
use rayon::prelude::*;

use crate::builtins::Target;
use crate::config::{ProblemSpec, RunConfig};
use crate::error::{config_err, HarnessError, Result};
use crate::output::{num, Csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Converge,
    Chart,
    Floquet,
    Solve,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Converge => "converge",
            Command::Chart => "chart",
            Command::Floquet => "floquet",
            Command::Solve => "solve",
        }
    }

    /// File written when no `--out` is given.
    pub fn default_output(self) -> String {
        format!("{}.csv", self.name())
    }
}

/// What a command produced.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub csv: String,
    /// Lines for standard output.
    pub messages: Vec<String>,
    /// Lines for standard error.
    pub warnings: Vec<String>,
    pub verdict: Option<Verdict>,
}

pub fn execute(cmd: Command, cfg: &RunConfig) -> Result<CommandOutput> {
    match cmd {
        Command::Spectrum => cmd_spectrum(cfg),
        Command::Converge => cmd_converge(cfg).map(|r| r.into_output(cfg)),
        Command::Chart => cmd_chart(cfg),
        Command::Floquet => cmd_floquet(cfg),
        Command::Solve => cmd_solve(cfg),
    }
}

/// Multipliers of `T_{M,N}(r, s)` for the configured problem and discretization.
pub fn spectrum(cfg: &RunConfig) -> Result<SpectrumResult<f64>> {
    spectrum_of_problem(cfg, &cfg.problem()?, cfg.n, cfg.m)
}

fn spectrum_of_problem(cfg: &RunConfig, problem: &DdeProblem<f64>, n: usize, m: usize) -> Result<SpectrumResult<f64>> {
    let mats = evolution_matrix(problem, n, m, &cfg.rule(n)?)?;
    Ok(multipliers_with(&mats, &cfg.spectrum_options())?)
}

fn require_verdict(result: &SpectrumResult<f64>) -> Result<Verdict> {
    result.verdict.ok_or_else(|| {
        HarnessError::Numerical(DdeError::InvalidArgument(
            "every multiplier fell below the zero threshold; no verdict".into(),
        ))
    })
}

fn spectrum_rows(csv: &mut Csv, result: &SpectrumResult<f64>) {
    csv.row([
        "re",
        "im",
        "modulus",
        "cluster_id",
        "cluster_mean_re",
        "cluster_mean_im",
        "cluster_count",
    ]);
    for (k, mu) in result.multipliers.iter().enumerate() {
        let id = result.cluster_of(k).expect("every multiplier belongs to a cluster");
        let cl = &result.clusters[id];
        csv.row([
            num(mu.re),
            num(mu.im),
            num(mu.norm()),
            id.to_string(),
            num(cl.mean.re),
            num(cl.mean.im),
            cl.count.to_string(),
        ]);
    }
}

fn verdict_line(verdict: Verdict, result: &SpectrumResult<f64>) -> String {
    format!("verdict: {verdict} (spectral radius {})", num(result.spectral_radius()))
}

fn short_window_warning(cfg: &RunConfig, rs: f64) -> Option<String> {
    (rs < cfg.tau).then(|| {
        format!(
            "warning: r_s = {rs} < tau = {}; T(r, s) is not compact and its spectrum may contain spurious multipliers",
            cfg.tau
        )
    })
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<CommandOutput> {
    let result = spectrum(cfg)?;
    let verdict = require_verdict(&result)?;
    let mut csv = Csv::new();
    csv.raw(&cfg.header());
    spectrum_rows(&mut csv, &result);
    Ok(CommandOutput {
        csv: csv.into_string(),
        messages: vec![verdict_line(verdict, &result)],
        warnings: short_window_warning(cfg, cfg.r - cfg.s).into_iter().collect(),
        verdict: Some(verdict),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub dominant: C,
    pub abs_error: f64,
}

/// Dominant-multiplier errors against a registered target over a list of `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub target: Target,
    pub rows: Vec<ConvergenceRow>,
    /// `error(N_{k+1}) / error(N_k)`.
    pub ratios: Vec<f64>,
    /// Errors nonincreasing up to a factor 2, ignoring rows already at the resolution floor.
    pub monotone: bool,
    pub resolution: f64,
}

impl ConvergenceReport {
    pub fn error_at(&self, n: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.n == n).map(|r| r.abs_error)
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].abs_error < w[0].abs_error)
    }

    fn into_output(self, cfg: &RunConfig) -> CommandOutput {
        let mut csv = Csv::new();
        csv.raw(&cfg.header());
        csv.comment(format!(
            "target = {} {} ({})",
            num(self.target.value.re),
            num(self.target.value.im),
            self.target.provenance
        ));
        csv.row(["N", "dominant_re", "dominant_im", "abs_error"]);
        for r in &self.rows {
            csv.row([
                r.n.to_string(),
                num(r.dominant.re),
                num(r.dominant.im),
                num(r.abs_error),
            ]);
        }
        for (w, ratio) in self.rows.windows(2).zip(&self.ratios) {
            csv.comment(format!("ratio error({})/error({}) = {}", w[1].n, w[0].n, num(*ratio)));
        }
        csv.comment(format!("resolution floor = {}", num(self.resolution)));
        csv.comment(format!("monotone = {}", self.monotone));
        let last = self.rows.last().expect("N_list is nonempty");
        CommandOutput {
            csv: csv.into_string(),
            messages: vec![format!("error at N = {}: {}", last.n, num(last.abs_error))],
            warnings: if self.monotone {
                vec![]
            } else {
                vec!["warning: errors do not decrease monotonically".into()]
            },
            verdict: None,
        }
    }
}

/// Target from `[converge]` if given, otherwise from the builtin's oracle.
pub fn convergence_target(cfg: &RunConfig) -> Result<Target> {
    let conv = cfg.converge.as_ref();
    let given = conv.map(|c| (c.target_re.as_deref(), c.target_im.as_deref()));
    if let Some((re, im)) = given {
        if re.is_some() || im.is_some() {
            let part = |v: Option<&str>| v.map_or(Ok(0.0), crate::config::parse_real);
            return Ok(Target {
                value: C::new(part(re)?, part(im)?),
                provenance: "configured analytic value",
            });
        }
    }
    let Some(builtin) = cfg.builtin()? else {
        return Err(config_err(
            "no registered oracle for expression problems; give target_re/target_im in [converge]",
        ));
    };
    builtin.target(cfg.tau, cfg.s, cfg.r)?.ok_or_else(|| {
        config_err(format!(
            "builtin `{}` has no registered target for these parameters",
            builtin.kind.name()
        ))
    })
}

pub fn cmd_converge(cfg: &RunConfig) -> Result<ConvergenceReport> {
    let conv = cfg
        .converge
        .as_ref()
        .ok_or_else(|| config_err("converge needs a [converge] section"))?;
    let target = convergence_target(cfg)?;
    let problem = cfg.problem()?;
    let rows = conv
        .n_list
        .par_iter()
        .map(|&n| -> Result<ConvergenceRow> {
            let result = spectrum_of_problem(cfg, &problem, n, n)?;
            let mu = result
                .dominant()
                .ok_or_else(|| HarnessError::Oracle(format!("no multipliers retained at N = {n}")))?;
            let abs_error = (mu - target.value).norm().min((mu - target.value.conj()).norm());
            Ok(ConvergenceRow {
                n,
                dominant: mu,
                abs_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = rows.windows(2).map(|w| w[1].abs_error / w[0].abs_error).collect();
    let resolution = 64.0 * f64::EPSILON * target.value.norm().max(1.0);
    let monotone = rows
        .windows(2)
        .all(|w| w[1].abs_error <= 2.0 * w[0].abs_error || w[1].abs_error <= resolution);
    Ok(ConvergenceReport {
        target,
        rows,
        ratios,
        monotone,
        resolution,
    })
}

/// One evaluated chart grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub p1: f64,
    pub p2: f64,
    pub dominant_modulus: f64,
    pub verdict: Option<Verdict>,
}

/// The configuration with two builtin parameters replaced.
pub fn with_parameters(cfg: &RunConfig, assignments: &[(&str, f64)]) -> Result<RunConfig> {
    let mut builtin = cfg
        .builtin()?
        .ok_or_else(|| config_err("parameter sweeps need a builtin problem"))?;
    for (name, value) in assignments {
        builtin = builtin.with_param(name, *value)?;
    }
    let mut out = cfg.clone();
    out.problem = ProblemSpec::Builtin {
        name: builtin.kind.name().to_string(),
        params: builtin.params,
    };
    Ok(out)
}

pub fn chart_points(cfg: &RunConfig) -> Result<Vec<ChartPoint>> {
    let chart = cfg
        .chart
        .as_ref()
        .ok_or_else(|| config_err("chart needs a [chart] section"))?;
    // reject unknown names once, up front
    with_parameters(cfg, &[(&chart.p1.name, chart.p1.min), (&chart.p2.name, chart.p2.min)])?;
    let grid: Vec<(f64, f64)> = chart
        .p1
        .values()
        .into_iter()
        .flat_map(|x| chart.p2.values().into_iter().map(move |y| (x, y)))
        .collect();
    Ok(grid
        .par_iter()
        .map(|&(x, y)| {
            let point = with_parameters(cfg, &[(&chart.p1.name, x), (&chart.p2.name, y)])
                .and_then(|c| spectrum(&c))
                .and_then(|r| Ok((r.spectral_radius(), require_verdict(&r)?)));
            match point {
                Ok((modulus, verdict)) => ChartPoint {
                    p1: x,
                    p2: y,
                    dominant_modulus: modulus,
                    verdict: Some(verdict),
                },
                Err(_) => ChartPoint {
                    p1: x,
                    p2: y,
                    dominant_modulus: f64::NAN,
                    verdict: None,
                },
            }
        })
        .collect())
}

fn cmd_chart(cfg: &RunConfig) -> Result<CommandOutput> {
    let chart = cfg
        .chart
        .as_ref()
        .ok_or_else(|| config_err("chart needs a [chart] section"))?;
    let points = chart_points(cfg)?;
    let mut csv = Csv::new();
    csv.raw(&cfg.header());
    csv.row([
        chart.p1.name.as_str(),
        chart.p2.name.as_str(),
        "dominant_modulus",
        "verdict",
    ]);
    let mut failed = 0;
    for p in &points {
        let verdict = match p.verdict {
            Some(v) => v.to_string(),
            None => {
                failed += 1;
                "error".to_string()
            }
        };
        csv.row([num(p.p1), num(p.p2), num(p.dominant_modulus), verdict]);
    }
    let stable = points.iter().filter(|p| p.verdict == Some(Verdict::Stable)).count();
    Ok(CommandOutput {
        csv: csv.into_string(),
        messages: vec![format!("{} grid points, {stable} stable", points.len())],
        warnings: (failed > 0)
            .then(|| format!("warning: {failed} grid points failed and were recorded as NaN"))
            .into_iter()
            .collect(),
        verdict: None,
    })
}

/// Largest `|f(t + omega) - f(t)|` over a few sample times of one period.
fn periodicity_defect(problem: &DdeProblem<f64>, omega: f64) -> Result<f64> {
    let s = problem.start();
    let tau = problem.tau();
    let mut worst = 0.0f64;
    for k in 0..7 {
        let t = s + omega * (k as f64 + 0.37) / 7.0;
        let diff = |x: nalgebra::DMatrix<C>, y: nalgebra::DMatrix<C>| (x - y).camax();
        if problem.has_a() {
            worst = worst.max(diff(problem.a(t + omega)?, problem.a(t)?));
        }
        if problem.has_b() {
            worst = worst.max(diff(problem.b(t + omega)?, problem.b(t)?));
        }
        if problem.has_c() {
            let theta = -tau * (k as f64 + 0.5) / 7.0;
            worst = worst.max(diff(problem.c(t + omega, theta)?, problem.c(t, theta)?));
        }
    }
    Ok(worst)
}

fn cmd_floquet(cfg: &RunConfig) -> Result<CommandOutput> {
    let spec = cfg
        .floquet
        .as_ref()
        .ok_or_else(|| config_err("floquet needs a [floquet] section"))?;
    let mut warnings = Vec::new();
    // the coefficient functions ignore the window, so any window serves for sampling
    let probe = cfg.problem_on(cfg.s, cfg.s + cfg.tau)?;
    let defect = periodicity_defect(&probe, spec.omega)?;
    if !(defect < 1e-10) {
        warnings.push(format!(
            "warning: coefficients do not look {}-periodic (sampled defect {})",
            spec.omega,
            num(defect)
        ));
    }
    let problem = cfg.problem_on(cfg.s, cfg.s + spec.omega)?;
    let mono = monodromy(&problem, spec.omega, spec.k, cfg.n, cfg.m, &cfg.rule(cfg.n)?)?;
    let result = multipliers_with(&mono.mats, &cfg.spectrum_options())?;
    let verdict = require_verdict(&result)?;
    let mut csv = Csv::new();
    csv.raw(&cfg.header());
    csv.comment(format!("k = {}", mono.k));
    csv.comment(format!("window = {}", num(mono.window())));
    spectrum_rows(&mut csv, &result);
    warnings.extend(short_window_warning(cfg, mono.window()));
    Ok(CommandOutput {
        csv: csv.into_string(),
        messages: vec![
            format!("k = {}, window = {}", mono.k, mono.window()),
            verdict_line(verdict, &result),
        ],
        warnings,
        verdict: Some(verdict),
    })
}

/// `phi(theta)` from one expression per component.
pub fn history_from(exprs: &[String]) -> Result<impl Fn(f64) -> DVector<C> + Clone + Send + Sync + 'static> {
    let parsed = exprs
        .iter()
        .map(|e| parse_coefficient(e, true).map_err(|err| config_err(format!("[solve] phi: {err}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(
        move |theta: f64| {
            DVector::from_iterator(parsed.len(), parsed.iter().map(|p| C::new(p.eval(theta, theta), 0.0)))
        },
    )
}

fn cmd_solve(cfg: &RunConfig) -> Result<CommandOutput> {
    let spec = cfg.solve.clone().unwrap_or(crate::config::SolveSpec {
        phi: vec!["1".into()],
        samples: 101,
        reference_step: None,
    });
    let problem = cfg.problem()?;
    let d = problem.dim();
    if spec.phi.len() != d {
        return Err(config_err(format!(
            "[solve] phi has {} components, problem has {d}",
            spec.phi.len()
        )));
    }
    let phi = history_from(&spec.phi)?;
    let shifted = shift_problem(&problem);
    let grids = GridPair::new(cfg.n, cfg.m, shifted.tau(), shifted.rs())?;
    let sol = collocation_solve(&shifted, phi.clone(), &grids, &cfg.rule(cfg.n)?)?;
    let reference = spec
        .reference_step
        .map(|h| reference_solution(&shifted, phi, h))
        .transpose()?;

    let mut csv = Csv::new();
    csv.raw(&cfg.header());
    let mut header = vec!["t".to_string()];
    for i in 0..d {
        header.push(format!("x{i}_re"));
        header.push(format!("x{i}_im"));
    }
    if reference.is_some() {
        for i in 0..d {
            header.push(format!("ref{i}_re"));
            header.push(format!("ref{i}_im"));
        }
    }
    csv.row(&header);
    let mut sup_err = 0.0f64;
    for t in dense_samples(shifted.rs(), spec.samples) {
        let x = sol.eval(t)?;
        let mut row = vec![num(cfg.s + t)];
        row.extend(x.iter().flat_map(|z| [num(z.re), num(z.im)]));
        if let Some(r) = &reference {
            let y = r.value(t);
            sup_err = sup_err.max((&y - &x).iter().fold(0.0, |m, z| m.max(z.norm())));
            row.extend(y.iter().flat_map(|z| [num(z.re), num(z.im)]));
        }
        csv.row(&row);
    }
    let mut messages = vec![format!(
        "collocation solution on [{}, {}] at {} points",
        cfg.s, cfg.r, spec.samples
    )];
    if reference.is_some() {
        csv.comment(format!("sup error vs reference = {}", num(sup_err)));
        messages.push(format!("sup error vs reference: {}", num(sup_err)));
    }
    Ok(CommandOutput {
        csv: csv.into_string(),
        messages,
        warnings: vec![],
        verdict: None,
    })
}
