//! Splitting compositions and the time-stepping engine.
//!
//! A scheme is a list of stages `(c_j, d_j)`. One step applies, for
//! `j = 1..N` in order, the nonlinear Taylor flow over `c_j·τ` followed by
//! the exact linear flow over `d_j·τ`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::nonlinear::NonlinearFlow;
use crate::operators::{DispersionPolynomial, OperatorSymbol};
use crate::spectral::{Field, SpectralGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Lie,
    Strang,
    Ruth3,
    Yoshida4,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Lie, Scheme::Strang, Scheme::Ruth3, Scheme::Yoshida4];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Lie => "lie",
            Scheme::Strang => "strang",
            Scheme::Ruth3 => "ruth3",
            Scheme::Yoshida4 => "yoshida4",
        }
    }

    pub fn spec(self) -> SchemeSpec {
        let (stages, order) = match self {
            Scheme::Lie => (vec![Stage::new(1.0, 1.0)], 1),
            Scheme::Strang => (vec![Stage::new(0.0, 0.5), Stage::new(1.0, 0.5)], 2),
            Scheme::Ruth3 => (
                vec![
                    Stage::new(7.0 / 24.0, 2.0 / 3.0),
                    Stage::new(3.0 / 4.0, -2.0 / 3.0),
                    Stage::new(-1.0 / 24.0, 1.0),
                ],
                3,
            ),
            Scheme::Yoshida4 => {
                let (s1, s2) = yoshida_weights();
                (
                    vec![
                        Stage::new(0.0, s1 / 2.0),
                        Stage::new(s1, (s1 + s2) / 2.0),
                        Stage::new(s2, (s1 + s2) / 2.0),
                        Stage::new(s1, s1 / 2.0),
                    ],
                    4,
                )
            }
        };
        SchemeSpec {
            scheme: self,
            stages,
            nonlinear_order: order,
            formal_order: order,
        }
    }
}

/// `σ₁ = 1/(2 - 2^{1/3})`, `σ₂ = -2^{1/3}/(2 - 2^{1/3})`.
pub fn yoshida_weights() -> (f64, f64) {
    let cbrt2 = 2f64.cbrt();
    (1.0 / (2.0 - cbrt2), -cbrt2 / (2.0 - cbrt2))
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lie" => Ok(Scheme::Lie),
            "strang" => Ok(Scheme::Strang),
            "ruth3" | "ruth" => Ok(Scheme::Ruth3),
            "yoshida4" | "yoshida" => Ok(Scheme::Yoshida4),
            other => Err(invalid(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Nonlinear weight `c` and linear weight `d` of one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub c: f64,
    pub d: f64,
}

impl Stage {
    pub const fn new(c: f64, d: f64) -> Self {
        Self { c, d }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub scheme: Scheme,
    pub stages: Vec<Stage>,
    pub nonlinear_order: usize,
    pub formal_order: usize,
}

pub fn scheme_coefficients(name: &str) -> Result<SchemeSpec> {
    Ok(name.parse::<Scheme>()?.spec())
}

/// Linear operator `L` and nonlinear operator `B` of `∂t u = -Lu - B(u²)`.
#[derive(Debug, Clone)]
pub struct SplitProblem {
    pub linear: OperatorSymbol,
    pub nonlinear: OperatorSymbol,
}

impl SplitProblem {
    /// `L = P(∂x)/(1-ε∂x²)`, `B = ε∂x/(1-ε∂x²)`.
    pub fn bbm(grid: &SpectralGrid, epsilon: f64, polynomial: &DispersionPolynomial) -> Result<Self> {
        Ok(Self {
            linear: OperatorSymbol::l_eps_lambda(grid, epsilon, polynomial)?,
            nonlinear: OperatorSymbol::l_eps(grid, epsilon)?.scaled(epsilon),
        })
    }

    /// `L = ∂x + ε∂x³`, `B = ε∂x`.
    pub fn kdv(grid: &SpectralGrid, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return Err(invalid(format!("epsilon must be >= 0, got {epsilon}")));
        }
        let p = if epsilon > 0.0 {
            DispersionPolynomial::new(vec![1.0, epsilon])?
        } else {
            DispersionPolynomial::classical()
        };
        Ok(Self {
            linear: OperatorSymbol::l_eps_lambda(grid, 0.0, &p)?,
            nonlinear: OperatorSymbol::l_eps(grid, 0.0)?.scaled(epsilon),
        })
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.linear.grid()
    }
}

/// Scheme bound to a problem and a step size, with precomputed propagators.
#[derive(Debug, Clone)]
pub struct Stepper {
    flow: NonlinearFlow,
    stages: Vec<(f64, OperatorSymbol)>,
    tau: f64,
}

impl Stepper {
    pub fn new(spec: &SchemeSpec, problem: &SplitProblem, tau: f64) -> Result<Self> {
        if !tau.is_finite() {
            return Err(invalid("step size must be finite"));
        }
        let flow = NonlinearFlow::new(problem.nonlinear.clone(), spec.nonlinear_order)?;
        let stages = spec
            .stages
            .iter()
            .map(|s| (s.c * tau, problem.linear.propagator(s.d * tau)))
            .collect();
        Ok(Self { flow, stages, tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn step(&self, u: &Field) -> Result<Field> {
        let mut u = u.clone();
        for (c_tau, prop) in &self.stages {
            if *c_tau != 0.0 {
                u = self.flow.step(&u, *c_tau)?;
            }
            prop.apply_in_place(&mut u)?;
        }
        Ok(u)
    }
}

/// One step of `spec` applied to the BBM problem of `config`.
pub fn step(spec: &SchemeSpec, config: &TrajectoryConfig, u: &Field) -> Result<Field> {
    let problem = SplitProblem::bbm(u.grid(), config.epsilon, &config.polynomial)?;
    Stepper::new(spec, &problem, config.tau)?.step(u)
}

#[derive(Debug, Clone)]
pub struct TrajectoryConfig {
    pub epsilon: f64,
    pub polynomial: DispersionPolynomial,
    pub tau: f64,
    pub final_time: f64,
    pub initial: Field,
}

/// Number of steps `T/τ`, rejecting step sizes that do not divide `T`.
pub fn step_count(tau: f64, final_time: f64) -> Result<usize> {
    if !(tau > 0.0) || !(final_time > 0.0) || !tau.is_finite() || !final_time.is_finite() {
        return Err(invalid(format!(
            "need tau > 0 and T > 0, got tau={tau}, T={final_time}"
        )));
    }
    if tau > final_time * (1.0 + 1e-12) {
        return Err(invalid(format!("tau={tau} exceeds T={final_time}")));
    }
    let n = (final_time / tau).round();
    if (n * tau - final_time).abs() > 1e-12 * final_time {
        return Err(invalid(format!("tau={tau} does not divide T={final_time}")));
    }
    Ok(n as usize)
}

impl TrajectoryConfig {
    pub fn steps(&self) -> Result<usize> {
        step_count(self.tau, self.final_time)
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub field: Field,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub final_field: Field,
    /// Includes `t = 0` and the final time when a stride is requested.
    pub snapshots: Vec<Snapshot>,
}

/// Integrates the BBM problem of `config`, keeping every `stride`-th state.
pub fn integrate(
    spec: &SchemeSpec,
    config: &TrajectoryConfig,
    stride: Option<usize>,
) -> Result<Trajectory> {
    let problem = SplitProblem::bbm(config.initial.grid(), config.epsilon, &config.polynomial)?;
    integrate_problem(
        spec,
        &problem,
        &config.initial,
        config.tau,
        config.final_time,
        stride,
    )
}

pub fn integrate_problem(
    spec: &SchemeSpec,
    problem: &SplitProblem,
    u0: &Field,
    tau: f64,
    final_time: f64,
    stride: Option<usize>,
) -> Result<Trajectory> {
    let n = step_count(tau, final_time)?;
    if *u0.grid() != *problem.grid() {
        return Err(invalid("initial field and problem live on different grids"));
    }
    if stride == Some(0) {
        return Err(invalid("snapshot stride must be positive"));
    }
    let stepper = Stepper::new(spec, problem, tau)?;
    let mut u = u0.clone();
    let mut snapshots = Vec::new();
    if stride.is_some() {
        snapshots.push(Snapshot {
            time: 0.0,
            field: u.clone(),
        });
    }
    for i in 1..=n {
        u = stepper.step(&u)?;
        if !u.is_finite() {
            return Err(Error::BlowUp {
                step: i,
                time: i as f64 * tau,
            });
        }
        if let Some(s) = stride {
            if i % s == 0 || i == n {
                snapshots.push(Snapshot {
                    time: i as f64 * tau,
                    field: u.clone(),
                });
            }
        }
    }
    Ok(Trajectory {
        final_field: u,
        snapshots,
    })
}

/// Metadata written above a snapshot.
#[derive(Debug, Clone)]
pub struct SnapshotMeta {
    pub scheme: Scheme,
    pub epsilon: f64,
    pub tau: f64,
    pub time: f64,
}

/// CSV with `#`-prefixed metadata lines followed by `x,u` rows.
pub fn write_snapshot_csv<W: Write>(out: &mut W, meta: &SnapshotMeta, field: &Field) -> Result<()> {
    writeln!(out, "# scheme={}", meta.scheme)?;
    writeln!(out, "# epsilon={}", meta.epsilon)?;
    writeln!(out, "# tau={}", meta.tau)?;
    writeln!(out, "# t={}", meta.time)?;
    writeln!(out, "x,u")?;
    for (x, u) in field.grid().nodes().iter().zip(field.inverse_transform()) {
        writeln!(out, "{x:.17e},{u:.17e}")?;
    }
    Ok(())
}
