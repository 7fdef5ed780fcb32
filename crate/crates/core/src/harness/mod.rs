//! Convergence, ε-scaling and KdV-limit studies.

mod report;

pub use report::{emit_report, ReportFormat, StudyMetadata};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::datum::InitialDatum;
use crate::error::{invalid, Error, Result};
use crate::fit::least_squares_slope;
use crate::operators::DispersionPolynomial;
use crate::reference::{adaptive_reference, kdv_solve, OdeSystem, ToleranceSpec};
use crate::schemes::{integrate_problem, step_count, Scheme, SplitProblem};
use crate::spectral::{Field, SpectralGrid};

/// Errors at or below this are considered to sit on the reference floor.
pub const ACCURACY_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordFlag {
    Ok,
    BlowUp,
    InvalidConfig,
}

impl RecordFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordFlag::Ok => "ok",
            RecordFlag::BlowUp => "blow_up",
            RecordFlag::InvalidConfig => "invalid_config",
        }
    }
}

/// One `(scheme, ε, τ)` cell. Flagged cells carry NaN errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub scheme: Scheme,
    pub epsilon: f64,
    pub tau: f64,
    pub error_l2: f64,
    pub error_hr: f64,
    pub runtime_ms: f64,
    pub flag: RecordFlag,
}

impl ConvergenceRecord {
    pub fn is_ok(&self) -> bool {
        self.flag == RecordFlag::Ok
    }
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub schemes: Vec<Scheme>,
    pub epsilons: Vec<f64>,
    pub taus: Vec<f64>,
    pub n_points: usize,
    pub final_time: f64,
    pub datum: InitialDatum,
    pub polynomial: DispersionPolynomial,
    /// Sobolev index of the auxiliary `error_hr` column.
    pub norm_r: f64,
    pub dealias: bool,
    pub reference_tol: f64,
    pub seed: u64,
    /// Record wall-clock time per cell. Off by default so reports are
    /// reproducible byte for byte.
    pub timings: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            schemes: Scheme::ALL.to_vec(),
            epsilons: (1..=10).map(|i| i as f64 / 10.0).collect(),
            taus: log_spaced_taus(1e-1, 1e-3, 7, 5.0),
            n_points: 200,
            final_time: 5.0,
            datum: InitialDatum::Bump,
            polynomial: DispersionPolynomial::classical(),
            norm_r: 1.0,
            dealias: false,
            reference_tol: 1e-12,
            seed: 0,
            timings: false,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() || self.epsilons.is_empty() || self.taus.is_empty() {
            return Err(invalid("schemes, epsilons and taus must be nonempty"));
        }
        if self.epsilons.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(invalid("epsilon values must lie in [0, 1]"));
        }
        if !(self.final_time > 0.0) || !(self.norm_r >= 0.0) || !(self.reference_tol > 0.0) {
            return Err(invalid("need T > 0, r >= 0 and a positive reference tolerance"));
        }
        SpectralGrid::new(self.n_points)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::with_dealiasing(self.n_points, self.dealias)
    }
}

/// `count` step sizes from `hi` down to `lo`, log-spaced and snapped to
/// `T/n` so that each divides `T`.
pub fn log_spaced_taus(hi: f64, lo: f64, count: usize, final_time: f64) -> Vec<f64> {
    let count = count.max(1);
    let mut out: Vec<f64> = (0..count)
        .map(|i| {
            let frac = if count == 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
            let target = hi * (lo / hi).powf(frac);
            let n = (final_time / target).round().max(1.0);
            final_time / n
        })
        .collect();
    out.dedup();
    out
}

fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Reference solution of the BBM problem at `T` for each ε in the config.
pub fn reference_solutions(config: &StudyConfig) -> Result<Vec<Field>> {
    let grid = config.grid()?;
    let u0 = config.datum.field(&grid);
    let tol = ToleranceSpec::uniform(config.reference_tol);
    par_map(config.epsilons.clone(), |eps| {
        let system = OdeSystem::bbm(&grid, eps, &config.polynomial)?;
        adaptive_reference(&system, &u0, config.final_time, &tol)
    })
    .into_iter()
    .collect()
}

/// Runs every `(scheme, ε, τ)` cell against the adaptive reference.
///
/// Records are ordered by scheme, then ε, then τ as listed in the config.
pub fn convergence_study(config: &StudyConfig) -> Result<Vec<ConvergenceRecord>> {
    config.validate()?;
    let grid = config.grid()?;
    let u0 = config.datum.field(&grid);
    let references = reference_solutions(config)?;

    let mut cells = Vec::new();
    for &scheme in &config.schemes {
        for (ei, &eps) in config.epsilons.iter().enumerate() {
            for &tau in &config.taus {
                cells.push((scheme, ei, eps, tau));
            }
        }
    }
    par_map(cells, |(scheme, ei, eps, tau)| {
        run_cell(config, &grid, &u0, &references[ei], scheme, eps, tau)
    })
    .into_iter()
    .collect()
}

fn run_cell(
    config: &StudyConfig,
    grid: &SpectralGrid,
    u0: &Field,
    reference: &Field,
    scheme: Scheme,
    epsilon: f64,
    tau: f64,
) -> Result<ConvergenceRecord> {
    let flagged = |flag| ConvergenceRecord {
        scheme,
        epsilon,
        tau,
        error_l2: f64::NAN,
        error_hr: f64::NAN,
        runtime_ms: 0.0,
        flag,
    };
    if step_count(tau, config.final_time).is_err() {
        return Ok(flagged(RecordFlag::InvalidConfig));
    }
    let problem = SplitProblem::bbm(grid, epsilon, &config.polynomial)?;
    let start = Instant::now();
    let result = integrate_problem(&scheme.spec(), &problem, u0, tau, config.final_time, None);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    match result {
        Ok(traj) => {
            let diff = traj.final_field.sub(reference)?;
            Ok(ConvergenceRecord {
                scheme,
                epsilon,
                tau,
                error_l2: diff.l2_norm(),
                error_hr: diff.sobolev_norm(config.norm_r)?,
                runtime_ms: if config.timings { elapsed } else { 0.0 },
                flag: RecordFlag::Ok,
            })
        }
        Err(Error::BlowUp { .. }) => Ok(flagged(RecordFlag::BlowUp)),
        Err(e) => Err(e),
    }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderFit {
    pub eoc: f64,
    /// Smallest and largest τ in the fitted window.
    pub window: (f64, f64),
    pub points: usize,
}

/// Empirical order of convergence of `scheme` at `epsilon`.
///
/// Points at or below `floor` are dropped. Among the contiguous runs of at
/// least three remaining points, the longest whose consecutive slopes all lie
/// within 10% of the run's fitted slope is used (ties go to the smaller τ);
/// without such a run all points are fitted.
pub fn estimate_order_with_floor(
    records: &[ConvergenceRecord],
    scheme: Scheme,
    epsilon: f64,
    floor: f64,
) -> Result<OrderFit> {
    let mut pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.scheme == scheme && same(r.epsilon, epsilon) && r.is_ok())
        .filter(|r| r.error_l2.is_finite() && r.error_l2 > floor)
        .map(|r| (r.tau, r.error_l2))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| same(a.0, b.0));
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{scheme} at eps={epsilon}: {} usable step sizes, need 3",
            pts.len()
        )));
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(t, e)| (t.ln(), e.ln())).collect();

    let mut best: Option<(usize, usize)> = None;
    for len in (3..=logs.len()).rev() {
        for start in 0..=logs.len() - len {
            let win = &logs[start..start + len];
            let s = least_squares_slope(win);
            let stable = win.windows(2).all(|p| {
                let local = (p[1].1 - p[0].1) / (p[1].0 - p[0].0);
                (local - s).abs() <= 0.1 * s.abs()
            });
            if stable {
                best = Some((start, len));
                break;
            }
        }
        if best.is_some() {
            break;
        }
    }
    let (start, len) = best.unwrap_or((0, logs.len()));
    let win = &logs[start..start + len];
    Ok(OrderFit {
        eoc: least_squares_slope(win),
        window: (pts[start].0, pts[start + len - 1].0),
        points: len,
    })
}

pub fn estimate_order(records: &[ConvergenceRecord], scheme: Scheme, epsilon: f64) -> Result<OrderFit> {
    estimate_order_with_floor(records, scheme, epsilon, ACCURACY_FLOOR)
}

/// Slope of `log error` against `log ε` at fixed τ.
pub fn epsilon_scaling(records: &[ConvergenceRecord], scheme: Scheme, tau: f64) -> Result<f64> {
    let mut pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.scheme == scheme && same(r.tau, tau) && r.is_ok())
        .filter(|r| r.epsilon > 0.0 && r.error_l2.is_finite() && r.error_l2 > 0.0)
        .map(|r| (r.epsilon.ln(), r.error_l2.ln()))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| same(a.0, b.0));
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{scheme} at tau={tau}: {} usable epsilon values with nonzero error, need 4",
            pts.len()
        )));
    }
    Ok(least_squares_slope(&pts))
}

#[derive(Debug, Clone)]
pub struct KdvLimitConfig {
    pub epsilons: Vec<f64>,
    pub tau: f64,
    pub final_time: f64,
    pub n_points: usize,
    pub datum: InitialDatum,
    pub polynomial: DispersionPolynomial,
    pub dealias: bool,
}

impl Default for KdvLimitConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![0.02, 0.05, 0.1, 0.2],
            tau: 1e-4,
            final_time: 5.0,
            n_points: 200,
            datum: InitialDatum::Bump,
            polynomial: DispersionPolynomial::classical(),
            dealias: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdvLimitRecord {
    pub epsilon: f64,
    pub difference_l2: f64,
}

/// `‖u_BBM(T) - u_KdV(T)‖` per ε, BBM by Lie splitting, KdV by [`kdv_solve`].
pub fn kdv_limit_study(config: &KdvLimitConfig) -> Result<Vec<KdvLimitRecord>> {
    if !config.polynomial.is_classical() {
        return Err(invalid("the KdV limit is only defined for P = d/dx"));
    }
    if config.epsilons.is_empty() {
        return Err(invalid("need at least one epsilon"));
    }
    step_count(config.tau, config.final_time)?;
    let grid = SpectralGrid::with_dealiasing(config.n_points, config.dealias)?;
    let u0 = config.datum.field(&grid);
    par_map(config.epsilons.clone(), |eps| {
        let bbm = SplitProblem::bbm(&grid, eps, &config.polynomial)?;
        let u_bbm = integrate_problem(
            &Scheme::Lie.spec(),
            &bbm,
            &u0,
            config.tau,
            config.final_time,
            None,
        )?
        .final_field;
        let u_kdv = kdv_solve(&u0, config.final_time, config.tau, eps)?;
        Ok(KdvLimitRecord {
            epsilon: eps,
            difference_l2: u_bbm.l2_distance(&u_kdv)?,
        })
    })
    .into_iter()
    .collect()
}

/// Slope of `log difference` against `log ε` (ε = 0 entries skipped).
pub fn kdv_limit_slope(records: &[KdvLimitRecord]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.epsilon > 0.0 && r.difference_l2 > 0.0)
        .map(|r| (r.epsilon.ln(), r.difference_l2.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData("need two positive epsilons".into()));
    }
    Ok(least_squares_slope(&pts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(scheme: Scheme, epsilon: f64, tau: f64, err: f64) -> ConvergenceRecord {
        ConvergenceRecord {
            scheme,
            epsilon,
            tau,
            error_l2: err,
            error_hr: err,
            runtime_ms: 0.0,
            flag: RecordFlag::Ok,
        }
    }

    #[test]
    fn default_taus_divide_t() {
        let taus = log_spaced_taus(1e-1, 1e-3, 7, 5.0);
        assert_eq!(taus.len(), 7);
        assert_eq!(taus[0], 0.1);
        assert_eq!(*taus.last().unwrap(), 1e-3);
        for t in taus {
            step_count(t, 5.0).unwrap();
        }
    }

    #[test]
    fn order_fit_drops_floor_and_preasymptotic_points() {
        let mut recs: Vec<ConvergenceRecord> = [0.1, 0.05, 0.025, 0.0125, 0.00625]
            .iter()
            .map(|&t| rec(Scheme::Strang, 1.0, t, 2.0 * t * t))
            .collect();
        recs.push(rec(Scheme::Strang, 1.0, 0.2, 5.0)); // pre-asymptotic
        recs.push(rec(Scheme::Strang, 1.0, 0.001, 1e-12)); // floor
        let fit = estimate_order(&recs, Scheme::Strang, 1.0).unwrap();
        assert!((fit.eoc - 2.0).abs() < 1e-12);
        assert_eq!(fit.points, 5);
    }

    #[test]
    fn order_fit_needs_three_distinct_taus() {
        let recs = vec![
            rec(Scheme::Lie, 1.0, 0.01, 1e-3),
            rec(Scheme::Lie, 1.0, 0.01, 1e-3),
            rec(Scheme::Lie, 1.0, 0.01, 1e-3),
        ];
        assert!(matches!(
            estimate_order(&recs, Scheme::Lie, 1.0),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn epsilon_slope() {
        let recs: Vec<_> = (1..=10)
            .map(|i| rec(Scheme::Lie, i as f64 / 10.0, 1e-3, 3e-4 * i as f64 / 10.0))
            .collect();
        assert!((epsilon_scaling(&recs, Scheme::Lie, 1e-3).unwrap() - 1.0).abs() < 1e-12);
        let zeros: Vec<_> = (1..=5).map(|i| rec(Scheme::Lie, i as f64 / 10.0, 1e-3, 0.0)).collect();
        assert!(epsilon_scaling(&zeros, Scheme::Lie, 1e-3).is_err());
    }

    #[test]
    fn kdv_limit_rejects_higher_order_p() {
        let cfg = KdvLimitConfig {
            polynomial: DispersionPolynomial::new(vec![0.0, 1.0]).unwrap(),
            ..KdvLimitConfig::default()
        };
        assert!(matches!(kdv_limit_study(&cfg), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn kdv_limit_at_zero_epsilon_vanishes() {
        let cfg = KdvLimitConfig {
            epsilons: vec![0.0],
            tau: 0.01,
            final_time: 1.0,
            n_points: 64,
            ..KdvLimitConfig::default()
        };
        let out = kdv_limit_study(&cfg).unwrap();
        assert!(out[0].difference_l2 < 1e-12, "{out:?}");
    }

    #[test]
    fn invalid_tau_is_flagged_per_cell() {
        let cfg = StudyConfig {
            schemes: vec![Scheme::Lie],
            epsilons: vec![1.0],
            taus: vec![0.3, 0.25],
            n_points: 32,
            final_time: 1.0,
            ..StudyConfig::default()
        };
        let recs = convergence_study(&cfg).unwrap();
        assert_eq!(recs[0].flag, RecordFlag::InvalidConfig);
        assert!(recs[0].error_l2.is_nan());
        assert_eq!(recs[1].flag, RecordFlag::Ok);
        assert!(recs[1].error_l2 > 0.0);
    }
}
