//! Randomized checks of the operator inequalities behind the error analysis.
//!
//! For every setting `(ε, σ, r, t)` and every random band-limited field `f`:
//!
//! * (i)   `‖εL_ε f‖_r ≤ ε^{1-σ} ‖f‖_{r+1-2σ}`
//! * (ii)  `‖L_ε f‖_r ≤ min{ ε^{-1} ‖f‖_{r-1}, ‖f‖_{r+1} }`
//! * (iii) `‖(e^{tL_{ε,λ}} - 1) f‖_r ≤ |t| ‖f‖_{r+λ}`
//!
//! The outcome depends on the Sobolev weight. With `(1+k²)^r` all three hold
//! for every `ε ∈ (0,1]`, `σ ∈ [0,1]`. With `(1+|k|)^{2r}`, (i) fails for
//! `σ > 1/2` and the `ε^{-1}` branch of (ii) fails once the field has modes
//! `|k| > 1/ε` (the worst ratio stays below 2).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::operators::{DispersionPolynomial, OperatorSymbol};
use crate::spectral::{Field, SobolevWeight, SpectralGrid};

/// Slack for rounding in the norm sums.
const RATIO_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    /// `‖εL_ε f‖_r ≤ ε^{1-σ} ‖f‖_{r+1-2σ}`
    Smoothing,
    /// `‖L_ε f‖_r ≤ min{ε^{-1}‖f‖_{r-1}, ‖f‖_{r+1}}`
    MinBound,
    /// `‖(e^{tL_{ε,λ}} - 1) f‖_r ≤ |t| ‖f‖_{r+λ}`
    FlowIncrement,
}

impl Inequality {
    pub const ALL: [Inequality; 3] = [
        Inequality::Smoothing,
        Inequality::MinBound,
        Inequality::FlowIncrement,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaSetting {
    pub epsilon: f64,
    pub sigma: f64,
    pub r: f64,
    pub t: f64,
}

impl LemmaSetting {
    /// Cartesian product of `eps_list × sigma_list` at fixed `r`, `t`.
    pub fn product(eps_list: &[f64], sigma_list: &[f64], r: f64, t: f64) -> Vec<Self> {
        eps_list
            .iter()
            .flat_map(|&epsilon| {
                sigma_list.iter().map(move |&sigma| LemmaSetting {
                    epsilon,
                    sigma,
                    r,
                    t,
                })
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.sigma) {
            return Err(invalid(format!("sigma must lie in [0, 1], got {}", self.sigma)));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(invalid(format!(
                "epsilon must lie in [0, 1], got {}",
                self.epsilon
            )));
        }
        if !(self.r >= 0.0) || !self.t.is_finite() {
            return Err(invalid("r must be >= 0 and t finite"));
        }
        Ok(())
    }
}

/// One line of the battery report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaOutcome {
    pub inequality: Inequality,
    pub epsilon: f64,
    pub sigma: f64,
    pub r: f64,
    pub t: f64,
    pub trials: usize,
    pub worst_ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct LemmaBattery {
    pub polynomial: DispersionPolynomial,
    pub weight: SobolevWeight,
    pub trials: usize,
    /// Band limit of the random fields.
    pub k_max: usize,
    /// Spectral decay exponent of the random fields.
    pub decay: f64,
    pub seed: u64,
}

impl Default for LemmaBattery {
    fn default() -> Self {
        Self {
            polynomial: DispersionPolynomial::classical(),
            weight: SobolevWeight::Bessel,
            trials: 100,
            k_max: 40,
            decay: 1.0,
            seed: 0,
        }
    }
}

/// Left and right side of one inequality for one field.
pub fn evaluate(
    inequality: Inequality,
    setting: &LemmaSetting,
    polynomial: &DispersionPolynomial,
    weight: SobolevWeight,
    f: &Field,
) -> Result<(f64, f64)> {
    setting.validate()?;
    let grid = f.grid();
    let LemmaSetting {
        epsilon,
        sigma,
        r,
        t,
    } = *setting;
    let norm = |g: &Field, s: f64| g.weighted_norm(s, weight);
    Ok(match inequality {
        Inequality::Smoothing => {
            let lhs = OperatorSymbol::l_eps(grid, epsilon)?
                .scaled(epsilon)
                .apply(f)?;
            (
                norm(&lhs, r),
                epsilon.powf(1.0 - sigma) * norm(f, r + 1.0 - 2.0 * sigma),
            )
        }
        Inequality::MinBound => {
            let lhs = norm(&OperatorSymbol::l_eps(grid, epsilon)?.apply(f)?, r);
            let smooth = norm(f, r + 1.0);
            let rhs = if epsilon > 0.0 {
                smooth.min(norm(f, r - 1.0) / epsilon)
            } else {
                smooth
            };
            (lhs, rhs)
        }
        Inequality::FlowIncrement => {
            let l = OperatorSymbol::l_eps_lambda(grid, epsilon, polynomial)?;
            // e^{tL} is the propagator of -L at time t
            let mut diff = l.propagator(-t).apply(f)?;
            diff.axpy(-1.0, f)?;
            (
                norm(&diff, r),
                t.abs() * norm(f, r + polynomial.degree() as f64),
            )
        }
    })
}

impl LemmaBattery {
    pub fn run(&self, grid: &SpectralGrid, settings: &[LemmaSetting]) -> Result<Vec<LemmaOutcome>> {
        if self.trials == 0 {
            return Err(invalid("lemma battery needs at least one trial"));
        }
        for s in settings {
            s.validate()?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(settings.len() * 3);
        for setting in settings {
            let mut worst = [0.0f64; 3];
            for _ in 0..self.trials {
                let f = Field::random_band_limited(grid, self.k_max, self.decay, &mut rng);
                for (slot, ineq) in Inequality::ALL.iter().enumerate() {
                    let (lhs, rhs) = evaluate(*ineq, setting, &self.polynomial, self.weight, &f)?;
                    let ratio = if rhs > 0.0 {
                        lhs / rhs
                    } else if lhs > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    };
                    worst[slot] = worst[slot].max(ratio);
                }
            }
            for (slot, ineq) in Inequality::ALL.iter().enumerate() {
                out.push(LemmaOutcome {
                    inequality: *ineq,
                    epsilon: setting.epsilon,
                    sigma: setting.sigma,
                    r: setting.r,
                    t: setting.t,
                    trials: self.trials,
                    worst_ratio: worst[slot],
                    pass: worst[slot] <= 1.0 + RATIO_SLACK,
                });
            }
        }
        Ok(out)
    }
}
