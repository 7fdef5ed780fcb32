//! High-accuracy reference solutions.
//!
//! Every system here has the form `∂t u = -L u - B(u²)` with diagonal `L` and
//! `B`, integrated on the Fourier coefficient vector by an adaptive
//! Dormand–Prince 5(4) pair. Stiff linear parts (KdV) are removed with an
//! integrating factor: the solver then advances `v = e^{tL} u`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::operators::{DispersionPolynomial, OperatorSymbol};
use crate::schemes::{integrate_problem, Scheme, SplitProblem};
use crate::spectral::{Field, SpectralGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToleranceSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self::uniform(1e-12)
    }
}

impl ToleranceSpec {
    pub fn uniform(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: tol,
            max_steps: 2_000_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) || self.max_steps == 0 {
            return Err(invalid("tolerances must be positive"));
        }
        Ok(())
    }
}

/// Step-size controller constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Controller {
    /// Local error target as a fraction of the requested tolerance, so that
    /// the accumulated error stays below the tolerance itself.
    pub local_fraction: f64,
    pub safety: f64,
    pub min_factor: f64,
    pub max_factor: f64,
}

pub const CONTROLLER: Controller = Controller {
    local_fraction: 0.1,
    safety: 0.9,
    min_factor: 0.2,
    max_factor: 5.0,
};

/// `∂t u = -L u - B(u²)`.
#[derive(Debug, Clone)]
pub struct OdeSystem {
    pub linear: OperatorSymbol,
    pub nonlinear: OperatorSymbol,
    pub integrating_factor: bool,
    pub description: String,
}

impl OdeSystem {
    /// Full BBM: `L = L_{ε,λ}`, `B = εL_ε`.
    pub fn bbm(grid: &SpectralGrid, epsilon: f64, polynomial: &DispersionPolynomial) -> Result<Self> {
        Ok(Self {
            linear: OperatorSymbol::l_eps_lambda(grid, epsilon, polynomial)?,
            nonlinear: OperatorSymbol::l_eps(grid, epsilon)?.scaled(epsilon),
            integrating_factor: false,
            description: format!("bbm eps={epsilon} P={:?}", polynomial.odd_coefficients()),
        })
    }

    /// KdV limit `∂t u + ∂x u + ε∂x u² + ε∂x³ u = 0`, integrated in the
    /// interaction picture.
    pub fn kdv(grid: &SpectralGrid, epsilon: f64) -> Result<Self> {
        let problem = SplitProblem::kdv(grid, epsilon)?;
        Ok(Self {
            linear: problem.linear,
            nonlinear: problem.nonlinear,
            integrating_factor: true,
            description: format!("kdv eps={epsilon}"),
        })
    }

    /// `∂t w = -B(w²)`.
    pub fn nonlinear_only(b: &OperatorSymbol) -> Self {
        Self {
            linear: OperatorSymbol::zero(b.grid()),
            nonlinear: b.clone(),
            integrating_factor: false,
            description: "nonlinear subproblem".into(),
        }
    }

    /// `∂t v = -L v`.
    pub fn linear_only(l: &OperatorSymbol) -> Self {
        Self {
            linear: l.clone(),
            nonlinear: OperatorSymbol::zero(l.grid()),
            integrating_factor: false,
            description: "linear subproblem".into(),
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.linear.grid()
    }

    /// `-L u - B(u²)`.
    pub fn rhs(&self, u: &Field) -> Result<Field> {
        let mut out = self.nonlinear.apply(&u.pointwise_square())?.scaled(-1.0);
        out.axpy(-1.0, &self.linear.apply(u)?)?;
        Ok(out)
    }

    // Right-hand side in the variable the integrator advances.
    fn state_rhs(&self, t: f64, y: &[Complex64]) -> Vec<Complex64> {
        let grid = self.grid();
        let u = Field::from_coeffs(grid, y.to_vec()).expect("state length matches grid");
        if !self.integrating_factor {
            return self.rhs(&u).expect("same grid").into_coeffs();
        }
        // v = e^{tL} u, v' = e^{tL} (-B(u²))
        let mut phys = u;
        let lin = self.linear.values();
        for (c, l) in phys.coeffs_mut().iter_mut().zip(lin) {
            *c *= (-t * l).exp();
        }
        let mut out = self.nonlinear.apply(&phys.pointwise_square()).expect("same grid");
        for (c, l) in out.coeffs_mut().iter_mut().zip(lin) {
            *c *= -(t * l).exp();
        }
        out.into_coeffs()
    }
}

/// `-L_{ε,λ}u - εL_ε(u²)`
pub fn bbm_rhs(epsilon: f64, polynomial: &DispersionPolynomial, u: &Field) -> Result<Field> {
    OdeSystem::bbm(u.grid(), epsilon, polynomial)?.rhs(u)
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive integration of `y' = f(t, y)` from `0` to `t_end` (either sign).
pub fn dormand_prince<F>(
    f: F,
    y0: &[Complex64],
    t_end: f64,
    tol: &ToleranceSpec,
) -> Result<Vec<Complex64>>
where
    F: Fn(f64, &[Complex64]) -> Vec<Complex64>,
{
    tol.validate()?;
    if !t_end.is_finite() {
        return Err(invalid("integration end time must be finite"));
    }
    let mut y = y0.to_vec();
    if t_end == 0.0 {
        return Ok(y);
    }
    let dir = t_end.signum();
    let span = t_end.abs();
    let n = y.len();
    let scale = |a: &[Complex64], b: &[Complex64], i: usize| {
        CONTROLLER.local_fraction * (tol.abs_tol + tol.rel_tol * a[i].norm().max(b[i].norm()))
    };

    let mut k: Vec<Vec<Complex64>> = vec![Vec::new(); 7];
    k[0] = f(0.0, &y);

    // Initial step from the scaled size of y and y'.
    let d0 = (0..n).map(|i| y[i].norm() / scale(&y, &y, i)).fold(0.0, f64::max);
    let d1 = (0..n).map(|i| k[0][i].norm() / scale(&y, &y, i)).fold(0.0, f64::max);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h = h.min(span);

    let mut s = 0.0;
    let mut steps = 0usize;
    let mut stage = vec![Complex64::new(0.0, 0.0); n];
    while s < span {
        if steps >= tol.max_steps {
            return Err(Error::ConvergenceFailure {
                target: t_end,
                reached: dir * s,
                max_steps: tol.max_steps,
            });
        }
        steps += 1;
        let last = s + h >= span * (1.0 - 1e-15);
        if last {
            h = span - s;
        }
        let hs = dir * h;
        for st in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for j in 0..st {
                    acc += hs * A[st][j] * k[j][i];
                }
                stage[i] = acc;
            }
            k[st] = f(dir * (s + C[st] * h), &stage);
        }
        // stage now holds the 5th-order solution (row 7 of A).
        let mut err = 0.0f64;
        for i in 0..n {
            let mut e = Complex64::new(0.0, 0.0);
            for j in 0..7 {
                e += E[j] * k[j][i];
            }
            err = err.max((hs * e).norm() / scale(&y, &stage, i));
        }
        if !err.is_finite() {
            h *= CONTROLLER.min_factor;
            continue;
        }
        if err <= 1.0 {
            s = if last { span } else { s + h };
            std::mem::swap(&mut y, &mut stage);
            k.swap(0, 6);
            let factor = if err == 0.0 {
                CONTROLLER.max_factor
            } else {
                (CONTROLLER.safety * err.powf(-0.2)).clamp(CONTROLLER.min_factor, CONTROLLER.max_factor)
            };
            h *= factor;
        } else {
            let factor =
                (CONTROLLER.safety * err.powf(-0.2)).clamp(CONTROLLER.min_factor, 1.0);
            h *= factor;
        }
        if h < 1e-14 * span.max(1.0) {
            return Err(Error::ConvergenceFailure {
                target: t_end,
                reached: dir * s,
                max_steps: tol.max_steps,
            });
        }
    }
    Ok(y)
}

/// Solution of `system` at time `t_end` from `u0`.
pub fn adaptive_reference(
    system: &OdeSystem,
    u0: &Field,
    t_end: f64,
    tol: &ToleranceSpec,
) -> Result<Field> {
    if *u0.grid() != *system.grid() {
        return Err(invalid("initial field and system live on different grids"));
    }
    if t_end < 0.0 {
        return Err(invalid("reference integration needs t_end >= 0"));
    }
    let y = dormand_prince(|t, y| system.state_rhs(t, y), u0.coeffs(), t_end, tol)?;
    let mut out = Field::from_coeffs(u0.grid(), y)?;
    if system.integrating_factor {
        system.linear.propagator(t_end).apply_in_place(&mut out)?;
    }
    Ok(out)
}

/// Exact flow of `∂t w = -B(w²)` over `tau` (either sign).
pub fn subproblem_oracle(
    b: &OperatorSymbol,
    w0: &Field,
    tau: f64,
    tol: &ToleranceSpec,
) -> Result<Field> {
    if *w0.grid() != *b.grid() {
        return Err(invalid("field and operator live on different grids"));
    }
    let system = OdeSystem::nonlinear_only(b);
    let y = dormand_prince(|t, y| system.state_rhs(t, y), w0.coeffs(), tau, tol)?;
    Field::from_coeffs(w0.grid(), y)
}

/// KdV limit solution by fourth-order splitting with the exact linear flow.
pub fn kdv_solve(u0: &Field, t_end: f64, tau: f64, epsilon: f64) -> Result<Field> {
    let problem = SplitProblem::kdv(u0.grid(), epsilon)?;
    let traj = integrate_problem(&Scheme::Yoshida4.spec(), &problem, u0, tau, t_end, None)?;
    Ok(traj.final_field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datum::InitialDatum;

    #[test]
    fn bbm_rhs_on_sine() {
        let g = SpectralGrid::new(32).unwrap();
        let out = bbm_rhs(1.0, &DispersionPolynomial::classical(), &g.sample(f64::sin)).unwrap();
        let expected = g.sample(|x| -0.5 * x.cos() - (2.0 * x).sin() / 5.0);
        assert!(out.l2_distance(&expected).unwrap() < 1e-15);
        let p = DispersionPolynomial::classical();
        assert!(bbm_rhs(0.5, &p, &Field::zeros(&g)).unwrap().l2_norm() == 0.0);
        assert!(bbm_rhs(0.5, &p, &g.sample(|_| 4.0)).unwrap().l2_norm() < 1e-15);
    }

    #[test]
    fn zero_horizon_returns_input() {
        let g = SpectralGrid::new(32).unwrap();
        let u0 = InitialDatum::Bump.field(&g);
        let sys = OdeSystem::bbm(&g, 1.0, &DispersionPolynomial::classical()).unwrap();
        let out = adaptive_reference(&sys, &u0, 0.0, &ToleranceSpec::default()).unwrap();
        assert_eq!(out.coeffs(), u0.coeffs());
        let b = OperatorSymbol::l_eps(&g, 1.0).unwrap();
        let w = subproblem_oracle(&b, &u0, 0.0, &ToleranceSpec::default()).unwrap();
        assert_eq!(w.coeffs(), u0.coeffs());
    }

    #[test]
    fn constant_is_stationary() {
        let g = SpectralGrid::new(32).unwrap();
        let c = g.sample(|_| 0.9);
        let b = OperatorSymbol::l_eps(&g, 0.5).unwrap().scaled(0.5);
        let w = subproblem_oracle(&b, &c, 0.7, &ToleranceSpec::default()).unwrap();
        assert!(w.l2_distance(&c).unwrap() < 1e-15);
    }

    #[test]
    fn linear_system_matches_exact_propagator() {
        let g = SpectralGrid::new(64).unwrap();
        let u0 = InitialDatum::Bump.field(&g);
        let l = OperatorSymbol::l_eps(&g, 0.3).unwrap();
        let tol = ToleranceSpec::uniform(1e-11);
        let out = adaptive_reference(&OdeSystem::linear_only(&l), &u0, 2.0, &tol).unwrap();
        let exact = l.propagator(2.0).apply(&u0).unwrap();
        assert!(out.l2_distance(&exact).unwrap() < 1e-10);
    }

    #[test]
    fn backward_oracle_inverts_forward() {
        let g = SpectralGrid::new(64).unwrap();
        let u0 = InitialDatum::Bump.field(&g);
        let b = OperatorSymbol::l_eps(&g, 1.0).unwrap();
        let tol = ToleranceSpec::uniform(1e-13);
        let fwd = subproblem_oracle(&b, &u0, 0.3, &tol).unwrap();
        let back = subproblem_oracle(&b, &fwd, -0.3, &tol).unwrap();
        assert!(back.l2_distance(&u0).unwrap() < 1e-11);
    }

    #[test]
    fn step_budget_exhaustion_is_reported() {
        let g = SpectralGrid::new(32).unwrap();
        let u0 = InitialDatum::Bump.field(&g);
        let sys = OdeSystem::bbm(&g, 1.0, &DispersionPolynomial::classical()).unwrap();
        let tol = ToleranceSpec {
            max_steps: 3,
            ..ToleranceSpec::uniform(1e-12)
        };
        assert!(matches!(
            adaptive_reference(&sys, &u0, 5.0, &tol),
            Err(Error::ConvergenceFailure { .. })
        ));
    }

    #[test]
    fn kdv_at_zero_epsilon_is_transport() {
        let g = SpectralGrid::new(64).unwrap();
        let u0 = InitialDatum::Bump.field(&g);
        let out = kdv_solve(&u0, 1.0, 0.01, 0.0).unwrap();
        let exact = g.sample(|x| InitialDatum::Bump.eval(x - 1.0));
        assert!(out.l2_distance(&exact).unwrap() < 1e-10);
    }
}
