//! Truncated Taylor flows for the quadratic subproblem `∂t w = -B(w²)`.
//!
//! With `a = B(w²)` the exact flow expands as
//!
//! ```text
//! w(τ) = w - τ a + τ² B(w a)
//!        - τ³ [ B(a²)/3 + 2 B(w B(w a))/3 ]
//!        + τ⁴ [ B(a B(w a))/2 + B(w B(a²))/6 + B(w B(w B(w a)))/3 ] + O(τ⁵)
//! ```
//!
//! and the flow of order `p` keeps the terms up to `τ^p`. `B` is any odd
//! multiplier: `εL_ε` for BBM, `ε∂x` for KdV.

use crate::error::{invalid, Result};
use crate::operators::OperatorSymbol;
use crate::reference::{subproblem_oracle, ToleranceSpec};
use crate::spectral::Field;

#[derive(Debug, Clone)]
pub struct NonlinearFlow {
    b: OperatorSymbol,
    order: usize,
}

impl NonlinearFlow {
    pub fn new(b: OperatorSymbol, order: usize) -> Result<Self> {
        if !(1..=4).contains(&order) {
            return Err(invalid(format!("Taylor order must be 1..=4, got {order}")));
        }
        Ok(Self { b, order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn operator(&self) -> &OperatorSymbol {
        &self.b
    }

    /// Coefficient fields `T_1..T_order` of `w(τ) ≈ w + Σ τ^p T_p`.
    pub fn taylor_terms(&self, w: &Field) -> Result<Vec<Field>> {
        let b = &self.b;
        let mut terms = Vec::with_capacity(self.order);

        let a = b.apply(&w.pointwise_square())?;
        terms.push(a.scaled(-1.0));
        if self.order == 1 {
            return Ok(terms);
        }

        let bwa = b.apply(&w.product(&a)?)?;
        terms.push(bwa.clone());
        if self.order == 2 {
            return Ok(terms);
        }

        let baa = b.apply(&a.pointwise_square())?;
        let bwbwa = b.apply(&w.product(&bwa)?)?;
        let mut t3 = baa.scaled(-1.0 / 3.0);
        t3.axpy(-2.0 / 3.0, &bwbwa)?;
        terms.push(t3);
        if self.order == 3 {
            return Ok(terms);
        }

        let mut inner = a.product(&bwa)?.scaled(0.5);
        inner.axpy(1.0 / 6.0, &w.product(&baa)?)?;
        inner.axpy(1.0 / 3.0, &w.product(&bwbwa)?)?;
        terms.push(b.apply(&inner)?);
        Ok(terms)
    }

    /// One step of length `tau` (negative allowed).
    pub fn step(&self, w: &Field, tau: f64) -> Result<Field> {
        if *w.grid() != *self.b.grid() {
            return Err(invalid("field and nonlinear operator live on different grids"));
        }
        if tau == 0.0 {
            return Ok(w.clone());
        }
        let mut out = w.clone();
        let mut power = 1.0;
        for term in self.taylor_terms(w)? {
            power *= tau;
            out.axpy(power, &term)?;
        }
        Ok(out)
    }
}

/// Result of comparing Taylor steps against the exact subflow.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOrderReport {
    pub taus: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log τ`; `None` when every
    /// error is at the rounding floor.
    pub slope: Option<f64>,
}

/// Errors below this are treated as rounding noise and left out of the fit.
pub const LOCAL_ORDER_FLOOR: f64 = 1e-14;

/// Measures the local order of `flow` on `w0` against an adaptive solution of
/// the subproblem. The expected slope is `order + 1`.
pub fn local_order_check(
    flow: &NonlinearFlow,
    w0: &Field,
    taus: &[f64],
    oracle_tol: &ToleranceSpec,
) -> Result<LocalOrderReport> {
    let mut errors = Vec::with_capacity(taus.len());
    for &tau in taus {
        let approx = flow.step(w0, tau)?;
        let exact = subproblem_oracle(flow.operator(), w0, tau, oracle_tol)?;
        errors.push(approx.l2_distance(&exact)?);
    }
    let pts: Vec<(f64, f64)> = taus
        .iter()
        .zip(&errors)
        .filter(|(_, &e)| e > LOCAL_ORDER_FLOOR)
        .map(|(&t, &e)| (t.ln(), e.ln()))
        .collect();
    let slope = if pts.len() >= 2 {
        Some(crate::fit::least_squares_slope(&pts))
    } else {
        None
    };
    Ok(LocalOrderReport {
        taus: taus.to_vec(),
        errors,
        slope,
    })
}
