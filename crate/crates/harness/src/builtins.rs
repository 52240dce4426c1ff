//! Named benchmark problems with numeric parameters.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use ddesim_core::DdeProblem;
use num_complex::Complex64 as C;

use crate::error::{config_err, Result};
use crate::oracle::CharacteristicEquation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// `x' = a x + b x(t - tau)`.
    Hayes,
    /// `x' = a x`, posed as a delay equation.
    PureOde,
    /// `x' = a x + b x(t - tau) + c0 int_{-tau}^0 x(t + theta) dtheta`.
    DistributedConst,
    /// `x' = (a0 + a1 sin(2 pi t / omega)) x + (b0 + b1 cos(2 pi t / omega)) x(t - tau)`.
    PeriodicScalar,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [
        Builtin::Hayes,
        Builtin::PureOde,
        Builtin::DistributedConst,
        Builtin::PeriodicScalar,
    ];

    pub fn from_name(name: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == name)
            .ok_or_else(|| config_err(format!("unknown builtin `{name}`")))
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Hayes => "hayes",
            Builtin::PureOde => "pure-ode",
            Builtin::DistributedConst => "distributed-const",
            Builtin::PeriodicScalar => "periodic-scalar",
        }
    }

    /// Parameter names with their defaults.
    pub fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            Builtin::Hayes => &[("a", 0.0), ("b", -1.0)],
            Builtin::PureOde => &[("a", 0.0)],
            Builtin::DistributedConst => &[("a", 0.0), ("b", 0.0), ("c0", -1.0)],
            Builtin::PeriodicScalar => &[("a0", 0.0), ("a1", 1.0), ("b0", 0.0), ("b1", 0.0), ("omega", 1.0)],
        }
    }
}

/// A builtin together with fully resolved parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinProblem {
    pub kind: Builtin,
    pub params: BTreeMap<String, f64>,
}

/// Reference value for the dominant multiplier and where it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub value: C,
    pub provenance: &'static str,
}

impl BuiltinProblem {
    /// Defaults overridden by `given`; unknown names are rejected.
    pub fn new(kind: Builtin, given: &BTreeMap<String, f64>) -> Result<Self> {
        let mut params: BTreeMap<String, f64> = kind.defaults().iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for (k, v) in given {
            match params.get_mut(k) {
                Some(slot) => *slot = *v,
                None => {
                    return Err(config_err(format!(
                        "builtin `{}` has no parameter `{k}` (expected one of {})",
                        kind.name(),
                        kind.defaults().iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
                    )))
                }
            }
        }
        if kind == Builtin::PeriodicScalar && !(params["omega"] > 0.0) {
            return Err(config_err("periodic-scalar needs omega > 0"));
        }
        Ok(Self { kind, params })
    }

    pub fn param(&self, name: &str) -> f64 {
        self.params[name]
    }

    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut given = self.params.clone();
        given.insert(name.to_string(), value);
        Self::new(self.kind, &given)
    }

    pub fn build(&self, tau: f64, s: f64, r: f64) -> Result<DdeProblem<f64>> {
        let p = DdeProblem::new(1, tau, s, r)?;
        let p = match self.kind {
            Builtin::Hayes => {
                let (a, b) = (self.param("a"), self.param("b"));
                with_const(with_const(p, a, Coef::A), b, Coef::B)
            }
            Builtin::PureOde => with_const(p, self.param("a"), Coef::A),
            Builtin::DistributedConst => {
                let (a, b, c0) = (self.param("a"), self.param("b"), self.param("c0"));
                let p = with_const(with_const(p, a, Coef::A), b, Coef::B);
                if c0 != 0.0 {
                    p.with_scalar_c(move |_, _| c0)
                } else {
                    p
                }
            }
            Builtin::PeriodicScalar => {
                let (a0, a1, b0, b1, w) = (
                    self.param("a0"),
                    self.param("a1"),
                    self.param("b0"),
                    self.param("b1"),
                    self.param("omega"),
                );
                let mut p = p;
                if a0 != 0.0 || a1 != 0.0 {
                    p = p.with_scalar_a(move |t| a0 + a1 * (2.0 * PI * t / w).sin());
                }
                if b0 != 0.0 || b1 != 0.0 {
                    p = p.with_scalar_b(move |t| b0 + b1 * (2.0 * PI * t / w).cos());
                }
                p
            }
        };
        Ok(p)
    }

    /// Characteristic equation for the autonomous builtins.
    pub fn characteristic(&self, tau: f64) -> Option<CharacteristicEquation> {
        let p = |n: &str| self.params.get(n).copied().unwrap_or(0.0);
        match self.kind {
            Builtin::Hayes | Builtin::PureOde | Builtin::DistributedConst => Some(CharacteristicEquation {
                a: p("a"),
                b: p("b"),
                c0: p("c0"),
                tau,
            }),
            Builtin::PeriodicScalar => None,
        }
    }

    /// Registered target for the dominant multiplier of `T(r, s)`, if any.
    pub fn target(&self, tau: f64, s: f64, r: f64) -> Result<Option<Target>> {
        let rs = r - s;
        if let Some(eq) = self.characteristic(tau) {
            if eq.b == 0.0 && eq.c0 == 0.0 {
                return Ok(Some(Target {
                    value: C::new((eq.a * rs).exp(), 0.0),
                    provenance: "analytic exp(a r_s)",
                }));
            }
            let lambda = eq.rightmost()?;
            return Ok(Some(Target {
                value: (lambda * rs).exp(),
                provenance: "Newton root of the characteristic equation",
            }));
        }
        // periodic ODE: the only multiplier is exp of the integral of a over the window
        if self.param("b0") == 0.0 && self.param("b1") == 0.0 {
            let (a0, a1, w) = (self.param("a0"), self.param("a1"), self.param("omega"));
            let k = 2.0 * PI / w;
            let integral = a0 * rs + a1 / k * ((k * s).cos() - (k * r).cos());
            return Ok(Some(Target {
                value: C::new(integral.exp(), 0.0),
                provenance: "analytic exp(int_s^r a)",
            }));
        }
        Ok(None)
    }
}

enum Coef {
    A,
    B,
}

fn with_const(p: DdeProblem<f64>, v: f64, which: Coef) -> DdeProblem<f64> {
    if v == 0.0 {
        return p;
    }
    match which {
        Coef::A => p.with_scalar_a(move |_| v),
        Coef::B => p.with_scalar_b(move |_| v),
    }
}
