//! Browser bindings for the BBM splitting demo.
//!
//! Every export returns a flat `Float64Array`; the layouts are documented per
//! function. The `*_impl` functions hold the logic and run natively in tests.

use bbm_core::harness::log_spaced_taus;
use bbm_core::reference::{adaptive_reference, kdv_solve, OdeSystem, ToleranceSpec};
use bbm_core::schemes::integrate_problem;
use bbm_core::{DispersionPolynomial, InitialDatum, Result, Scheme, SpectralGrid, SplitProblem};
use wasm_bindgen::prelude::*;

fn to_js(e: bbm_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `[x_0..x_{n-1}, u(t_0)..., u(t_1)..., ...]` with `frames + 1` snapshots
/// evenly spaced in time.
pub fn simulate_impl(
    scheme: &str,
    epsilon: f64,
    tau: f64,
    final_time: f64,
    n_points: usize,
    frames: usize,
) -> Result<Vec<f64>> {
    let scheme: Scheme = scheme.parse()?;
    let grid = SpectralGrid::new(n_points)?;
    let problem = SplitProblem::bbm(&grid, epsilon, &DispersionPolynomial::classical())?;
    let u0 = InitialDatum::Bump.field(&grid);
    let steps = bbm_core::schemes::step_count(tau, final_time)?;
    let frames = frames.clamp(1, steps);
    if steps % frames != 0 {
        return Err(bbm_core::Error::InvalidArgument(format!(
            "{frames} frames do not split {steps} steps evenly"
        )));
    }
    let traj = integrate_problem(&scheme.spec(), &problem, &u0, tau, final_time, Some(steps / frames))?;
    let mut out = grid.nodes();
    for snap in traj.snapshots {
        out.extend(snap.field.inverse_transform());
    }
    Ok(out)
}

/// `[τ_0, err_0, τ_1, err_1, ...]`: L² error at `final_time` against the
/// adaptive reference for six step sizes from `T/10` to `T/1000`.
pub fn convergence_impl(scheme: &str, epsilon: f64, final_time: f64, n_points: usize) -> Result<Vec<f64>> {
    let scheme: Scheme = scheme.parse()?;
    let grid = SpectralGrid::new(n_points)?;
    let p = DispersionPolynomial::classical();
    let u0 = InitialDatum::Bump.field(&grid);
    let reference = adaptive_reference(
        &OdeSystem::bbm(&grid, epsilon, &p)?,
        &u0,
        final_time,
        &ToleranceSpec::uniform(1e-12),
    )?;
    let problem = SplitProblem::bbm(&grid, epsilon, &p)?;
    let mut out = Vec::new();
    for tau in log_spaced_taus(final_time / 10.0, final_time / 1000.0, 6, final_time) {
        let u = integrate_problem(&scheme.spec(), &problem, &u0, tau, final_time, None)?.final_field;
        out.push(tau);
        out.push(u.l2_distance(&reference)?);
    }
    Ok(out)
}

/// `[x..., u_BBM(T)..., u_KdV(T)...]`, BBM by Strang splitting and KdV by
/// fourth-order splitting with the same step.
pub fn bbm_vs_kdv_impl(epsilon: f64, final_time: f64, n_points: usize, tau: f64) -> Result<Vec<f64>> {
    let grid = SpectralGrid::new(n_points)?;
    let u0 = InitialDatum::Bump.field(&grid);
    let problem = SplitProblem::bbm(&grid, epsilon, &DispersionPolynomial::classical())?;
    let bbm = integrate_problem(&Scheme::Strang.spec(), &problem, &u0, tau, final_time, None)?.final_field;
    let kdv = kdv_solve(&u0, final_time, tau, epsilon)?;
    let mut out = grid.nodes();
    out.extend(bbm.inverse_transform());
    out.extend(kdv.inverse_transform());
    Ok(out)
}

#[wasm_bindgen]
pub fn simulate(
    scheme: &str,
    epsilon: f64,
    tau: f64,
    final_time: f64,
    n_points: usize,
    frames: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    simulate_impl(scheme, epsilon, tau, final_time, n_points, frames).map_err(to_js)
}

#[wasm_bindgen]
pub fn convergence(
    scheme: &str,
    epsilon: f64,
    final_time: f64,
    n_points: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    convergence_impl(scheme, epsilon, final_time, n_points).map_err(to_js)
}

#[wasm_bindgen]
pub fn bbm_vs_kdv(
    epsilon: f64,
    final_time: f64,
    n_points: usize,
    tau: f64,
) -> std::result::Result<Vec<f64>, JsError> {
    bbm_vs_kdv_impl(epsilon, final_time, n_points, tau).map_err(to_js)
}
