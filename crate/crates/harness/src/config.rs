//! Run configuration read from an INI-style file.
//!
//! ```ini
//! [problem]
//! builtin = hayes
//! tau = 1
//! b = -1
//!
//! [window]
//! s = 0
//! r = 1
//!
//! [discretization]
//! N = 20
//! ```
//!
//! Expression problems omit `builtin` and give quoted coefficient grids instead,
//! e.g. `a = "0, 1; -1, -0.1*t"` with `dim = 2`.

use std::collections::BTreeMap;
use std::path::Path;

use ddesim_core::quad::QuadKind;
use ddesim_core::spectra::{default_cluster_tol, DEFAULT_MARGIN, DEFAULT_ZERO_REL_TOL};
use ddesim_core::{parse_coefficient, DdeProblem, ExprMatrix, QuadratureRule};
use ini::{Ini, ParseOption, Properties};
use serde::Serialize;

use crate::builtins::{Builtin, BuiltinProblem};
use crate::error::{config_err, Result};

pub const DEFAULT_N: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    Builtin {
        name: String,
        params: BTreeMap<String, f64>,
    },
    Expressions {
        dim: usize,
        a: Option<String>,
        b: Option<String>,
        c: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub zero_rel_tol: f64,
    pub cluster_tol: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quadrature {
    pub kind: String,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergeSpec {
    pub n_list: Vec<usize>,
    pub target_re: Option<String>,
    pub target_im: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.max
                } else {
                    self.min + (self.max - self.min) * k as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartSpec {
    pub p1: Axis,
    pub p2: Axis,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloquetSpec {
    pub omega: f64,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSpec {
    pub phi: Vec<String>,
    pub samples: usize,
    pub reference_step: Option<f64>,
}

/// Fully resolved run parameters; echoed as JSON at the top of every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub tau: f64,
    pub s: f64,
    pub r: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub quadrature: Option<Quadrature>,
    pub tolerances: Tolerances,
    pub converge: Option<ConvergeSpec>,
    pub chart: Option<ChartSpec>,
    pub floquet: Option<FloquetSpec>,
    pub solve: Option<SolveSpec>,
}

const SECTIONS: [&str; 8] = [
    "problem",
    "window",
    "discretization",
    "tolerances",
    "converge",
    "chart",
    "floquet",
    "solve",
];

struct Section<'a> {
    name: &'static str,
    props: Option<&'a Properties>,
}

impl<'a> Section<'a> {
    fn get(&self, key: &str) -> Option<&'a str> {
        self.props.and_then(|p| p.get(key)).map(str::trim)
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        if let Some(p) = self.props {
            for (k, _) in p.iter() {
                if !allowed.contains(&k) {
                    return Err(config_err(format!("unknown key `{k}` in [{}]", self.name)));
                }
            }
        }
        Ok(())
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| parse_real(v).map_err(|e| self.wrap(key, e)))
            .transpose()
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>().map_err(|_| {
                    config_err(format!(
                        "[{}] {key}: expected a non-negative integer, got `{v}`",
                        self.name
                    ))
                })
            })
            .transpose()
    }

    fn wrap(&self, key: &str, e: crate::error::HarnessError) -> crate::error::HarnessError {
        config_err(format!("[{}] {key}: {e}", self.name))
    }
}

/// A number, or a constant expression such as `-pi/2`.
pub fn parse_real(text: &str) -> Result<f64> {
    if let Ok(v) = text.parse::<f64>() {
        return Ok(v);
    }
    let e = parse_coefficient(text, false).map_err(|e| config_err(e.to_string()))?;
    if uses_t(&e.ast) {
        return Err(config_err(format!("`{text}` must be constant")));
    }
    Ok(e.eval(0.0, 0.0))
}

fn uses_t(e: &ddesim_core::model::Expr) -> bool {
    use ddesim_core::model::Expr;
    match e {
        Expr::T => true,
        Expr::Num(_) | Expr::Theta | Expr::Pi => false,
        Expr::Neg(x) | Expr::Call(_, x) => uses_t(x),
        Expr::Bin(_, l, r) => uses_t(l) || uses_t(r),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let opts = ParseOption {
            enabled_quote: true,
            enabled_escape: false,
            ..ParseOption::default()
        };
        let ini = Ini::load_from_str_opt(&strip_inline_comments(text), opts).map_err(|e| config_err(e.to_string()))?;
        for name in ini.sections() {
            match name {
                None => {
                    if ini.general_section().iter().next().is_some() {
                        return Err(config_err("keys must appear inside a [section]"));
                    }
                }
                Some(n) if !SECTIONS.contains(&n) => return Err(config_err(format!("unknown section [{n}]"))),
                _ => {}
            }
        }
        let section = |name: &'static str| Section {
            name,
            props: ini.section(Some(name)),
        };

        let problem = section("problem");
        if problem.props.is_none() {
            return Err(config_err("missing [problem] section"));
        }
        let tau = problem.real("tau")?.unwrap_or(1.0);
        if !(tau > 0.0) {
            return Err(config_err("[problem] tau must be positive"));
        }
        let spec = match problem.get("builtin") {
            Some(name) => {
                let kind = Builtin::from_name(name)?;
                let mut allowed: Vec<&str> = vec!["builtin", "tau"];
                allowed.extend(kind.defaults().iter().map(|(n, _)| *n));
                problem.check_keys(&allowed)?;
                let mut given = BTreeMap::new();
                for (k, _) in kind.defaults() {
                    if let Some(v) = problem.real(k)? {
                        given.insert(k.to_string(), v);
                    }
                }
                let resolved = BuiltinProblem::new(kind, &given)?;
                ProblemSpec::Builtin {
                    name: kind.name().to_string(),
                    params: resolved.params,
                }
            }
            None => {
                problem.check_keys(&["tau", "dim", "a", "b", "c"])?;
                let dim = problem.count("dim")?.unwrap_or(1);
                let owned = |k: &str| problem.get(k).map(str::to_string);
                let spec = ProblemSpec::Expressions {
                    dim,
                    a: owned("a"),
                    b: owned("b"),
                    c: owned("c"),
                };
                // validate eagerly so errors surface before any command runs
                build_expression_problem(&spec, tau, 0.0, tau)?;
                spec
            }
        };

        let window = section("window");
        window.check_keys(&["s", "r", "rs"])?;
        let s = window.real("s")?.unwrap_or(0.0);
        let r = match (window.real("r")?, window.real("rs")?) {
            (Some(_), Some(_)) => return Err(config_err("[window] give either r or rs, not both")),
            (Some(r), None) => r,
            (None, Some(rs)) => s + rs,
            (None, None) => s + tau,
        };
        if !(r >= s) {
            return Err(config_err(format!("[window] end {r} precedes start {s}")));
        }

        let disc = section("discretization");
        disc.check_keys(&["N", "M", "quadrature", "quad_points"])?;
        let n = disc.count("N")?.unwrap_or(DEFAULT_N);
        let m = disc.count("M")?.unwrap_or(n);
        let kind = disc.get("quadrature");
        let points = disc.count("quad_points")?;
        let quadrature = match (kind, points) {
            (None, None) => None,
            (kind, points) => {
                let kind = kind.unwrap_or("gauss_legendre");
                parse_quad_kind(kind)?;
                Some(Quadrature {
                    kind: kind.to_string(),
                    points: points.unwrap_or_else(|| ddesim_core::quad::default_points(n)),
                })
            }
        };

        let tol = section("tolerances");
        tol.check_keys(&["zero_rel_tol", "cluster_tol", "margin"])?;
        let tolerances = Tolerances {
            zero_rel_tol: tol.real("zero_rel_tol")?.unwrap_or(DEFAULT_ZERO_REL_TOL),
            cluster_tol: tol.real("cluster_tol")?.unwrap_or_else(default_cluster_tol::<f64>),
            margin: tol.real("margin")?.unwrap_or(DEFAULT_MARGIN),
        };
        if !(tolerances.zero_rel_tol >= 0.0 && tolerances.cluster_tol > 0.0 && tolerances.margin >= 0.0) {
            return Err(config_err(
                "[tolerances] values must be non-negative (cluster_tol positive)",
            ));
        }

        let conv = section("converge");
        conv.check_keys(&["N_list", "target_re", "target_im"])?;
        let converge = match conv.props {
            None => None,
            Some(_) => {
                let list = conv
                    .get("N_list")
                    .ok_or_else(|| config_err("[converge] needs N_list"))?;
                let n_list = list
                    .split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<usize>()
                            .map_err(|_| config_err(format!("[converge] N_list: bad entry `{}`", v.trim())))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if n_list.is_empty() || n_list.contains(&0) {
                    return Err(config_err("[converge] N_list entries must be positive"));
                }
                for key in ["target_re", "target_im"] {
                    if let Some(v) = conv.get(key) {
                        parse_real(v).map_err(|e| conv.wrap(key, e))?;
                    }
                }
                Some(ConvergeSpec {
                    n_list,
                    target_re: conv.get("target_re").map(str::to_string),
                    target_im: conv.get("target_im").map(str::to_string),
                })
            }
        };

        let chart_sec = section("chart");
        let axis_keys = [
            "p1", "p1_min", "p1_max", "p1_steps", "p2", "p2_min", "p2_max", "p2_steps",
        ];
        chart_sec.check_keys(&axis_keys)?;
        let chart = match chart_sec.props {
            None => None,
            Some(_) => {
                let axis = |p: &str| -> Result<Axis> {
                    let need = |k: String| {
                        chart_sec
                            .get(&k)
                            .ok_or_else(|| config_err(format!("[chart] needs {k}")))
                    };
                    let name = need(p.to_string())?.to_string();
                    let min = parse_real(need(format!("{p}_min"))?)?;
                    let max = parse_real(need(format!("{p}_max"))?)?;
                    let steps = chart_sec.count(&format!("{p}_steps"))?.unwrap_or(11);
                    if steps == 0 {
                        return Err(config_err(format!("[chart] {p}_steps must be positive")));
                    }
                    Ok(Axis { name, min, max, steps })
                };
                Some(ChartSpec {
                    p1: axis("p1")?,
                    p2: axis("p2")?,
                })
            }
        };

        let flo = section("floquet");
        flo.check_keys(&["omega", "k"])?;
        let floquet = match flo.props {
            None => None,
            Some(_) => {
                let omega = flo.real("omega")?.ok_or_else(|| config_err("[floquet] needs omega"))?;
                if !(omega > 0.0) {
                    return Err(config_err("[floquet] omega must be positive"));
                }
                let k = flo.count("k")?;
                if k == Some(0) {
                    return Err(config_err("[floquet] k must be at least 1"));
                }
                Some(FloquetSpec { omega, k })
            }
        };

        let sol = section("solve");
        sol.check_keys(&["phi", "samples", "reference_step"])?;
        let solve = match sol.props {
            None => None,
            Some(_) => {
                let phi: Vec<String> = sol
                    .get("phi")
                    .unwrap_or("1")
                    .split(',')
                    .map(|p| p.trim().to_string())
                    .collect();
                for p in &phi {
                    parse_coefficient(p, true).map_err(|e| config_err(format!("[solve] phi: {e}")))?;
                }
                let reference_step = sol.real("reference_step")?;
                if let Some(h) = reference_step {
                    if !(h > 0.0 && h <= tau / 4.0) {
                        return Err(config_err("[solve] reference_step must lie in (0, tau/4]"));
                    }
                }
                Some(SolveSpec {
                    phi,
                    samples: sol.count("samples")?.unwrap_or(101).max(2),
                    reference_step,
                })
            }
        };

        Ok(RunConfig {
            problem: spec,
            tau,
            s,
            r,
            n,
            m,
            quadrature,
            tolerances,
            converge,
            chart,
            floquet,
            solve,
        })
    }

    /// Command-line overrides; `M` follows `N` unless given.
    pub fn with_overrides(mut self, n: Option<usize>, m: Option<usize>) -> Self {
        if let Some(n) = n {
            self.n = n;
            self.m = n;
        }
        if let Some(m) = m {
            self.m = m;
        }
        self
    }

    pub fn builtin(&self) -> Result<Option<BuiltinProblem>> {
        match &self.problem {
            ProblemSpec::Builtin { name, params } => Ok(Some(BuiltinProblem::new(Builtin::from_name(name)?, params)?)),
            ProblemSpec::Expressions { .. } => Ok(None),
        }
    }

    /// The problem on `[s, r]`.
    pub fn problem_on(&self, s: f64, r: f64) -> Result<DdeProblem<f64>> {
        match self.builtin()? {
            Some(b) => b.build(self.tau, s, r),
            None => build_expression_problem(&self.problem, self.tau, s, r),
        }
    }

    pub fn problem(&self) -> Result<DdeProblem<f64>> {
        self.problem_on(self.s, self.r)
    }

    /// Quadrature rule for collocation degree `n`.
    pub fn rule(&self, n: usize) -> Result<QuadratureRule<f64>> {
        match &self.quadrature {
            None => Ok(QuadratureRule::default_for_degree(n)),
            Some(q) => Ok(QuadratureRule::new(parse_quad_kind(&q.kind)?, q.points)?),
        }
    }

    pub fn spectrum_options(&self) -> ddesim_core::SpectrumOptions<f64> {
        ddesim_core::SpectrumOptions {
            zero_rel_tol: self.tolerances.zero_rel_tol,
            cluster_tol: self.tolerances.cluster_tol,
            margin: self.tolerances.margin,
        }
    }

    /// Pretty JSON, one `# `-prefixed line each.
    pub fn header(&self) -> String {
        let json = serde_json::to_string_pretty(self).expect("config serializes");
        json.lines().map(|l| format!("# {l}\n")).collect()
    }
}

/// Drops `; ...` and `# ...` tails that follow whitespace outside double quotes.
fn strip_inline_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        let mut quoted = false;
        let mut prev_space = false;
        let mut end = line.len();
        for (i, ch) in line.char_indices() {
            match ch {
                '"' => quoted = !quoted,
                ';' | '#' if !quoted && prev_space => {
                    end = i;
                    break;
                }
                _ => {}
            }
            prev_space = ch.is_whitespace();
        }
        out.push_str(line[..end].trim_end());
        out.push('\n');
    }
    out
}

fn parse_quad_kind(kind: &str) -> Result<QuadKind> {
    match kind {
        "gauss_legendre" => Ok(QuadKind::GaussLegendre),
        "clenshaw_curtis" => Ok(QuadKind::ClenshawCurtis),
        other => Err(config_err(format!(
            "unknown quadrature `{other}` (gauss_legendre or clenshaw_curtis)"
        ))),
    }
}

fn build_expression_problem(spec: &ProblemSpec, tau: f64, s: f64, r: f64) -> Result<DdeProblem<f64>> {
    let ProblemSpec::Expressions { dim, a, b, c } = spec else {
        unreachable!("expression spec expected");
    };
    let grid = |src: &Option<String>, allow_theta: bool, name: &str| -> Result<Option<ExprMatrix>> {
        src.as_deref()
            .map(|s| ExprMatrix::parse(s, allow_theta).map_err(|e| config_err(format!("[problem] {name}: {e}"))))
            .transpose()
    };
    let (a, b, c) = (grid(a, false, "a")?, grid(b, false, "b")?, grid(c, true, "c")?);
    Ok(DdeProblem::from_expressions(
        *dim,
        tau,
        s,
        r,
        a.as_ref(),
        b.as_ref(),
        c.as_ref(),
    )?)
}
