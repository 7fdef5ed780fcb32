//! Fourier multipliers for the dispersive operators and the exact linear flow.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::{Field, SpectralGrid};

/// `P(∂x) = Σ_m a_m ∂x^{2m+1}` with real coefficients.
///
/// Only odd derivatives are representable, which makes `Re P(ik) = 0` and
/// `P(0) = 0` hold by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionPolynomial {
    odd_coefficients: Vec<f64>,
}

impl DispersionPolynomial {
    /// `odd_coefficients[m]` multiplies `∂x^{2m+1}`. Trailing zeros are dropped.
    pub fn new(odd_coefficients: Vec<f64>) -> Result<Self> {
        let mut coeffs = odd_coefficients;
        if coeffs.iter().any(|a| !a.is_finite()) {
            return Err(invalid("dispersion coefficients must be finite"));
        }
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(invalid("dispersion polynomial needs a nonzero coefficient"));
        }
        Ok(Self {
            odd_coefficients: coeffs,
        })
    }

    /// The classical case `P(∂x) = ∂x`.
    pub fn classical() -> Self {
        Self {
            odd_coefficients: vec![1.0],
        }
    }

    pub fn odd_coefficients(&self) -> &[f64] {
        &self.odd_coefficients
    }

    /// Degree λ (always odd).
    pub fn degree(&self) -> usize {
        2 * self.odd_coefficients.len() - 1
    }

    pub fn is_classical(&self) -> bool {
        self.odd_coefficients == [1.0]
    }

    /// Imaginary part of `P(ik)`; the real part is identically zero.
    pub fn symbol_imag(&self, k: f64) -> f64 {
        // (ik)^{2m+1} = i (-1)^m k^{2m+1}
        let k2 = k * k;
        let mut power = k;
        let mut sign = 1.0;
        let mut acc = 0.0;
        for &a in &self.odd_coefficients {
            acc += sign * a * power;
            power *= k2;
            sign = -sign;
        }
        acc
    }

    pub fn symbol(&self, k: f64) -> Complex64 {
        Complex64::new(0.0, self.symbol_imag(k))
    }
}

/// Diagonal Fourier multiplier on a fixed grid.
///
/// Odd symbols are set to zero on the unpaired Nyquist slot so that they map
/// real fields to real fields.
#[derive(Debug, Clone)]
pub struct OperatorSymbol {
    grid: SpectralGrid,
    values: Vec<Complex64>,
    epsilon: f64,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(invalid(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    Ok(())
}

impl OperatorSymbol {
    fn from_odd_fn(grid: &SpectralGrid, epsilon: f64, f: impl Fn(f64) -> f64) -> Self {
        let nyquist = grid.nyquist();
        let values = grid
            .slot_wavenumbers()
            .iter()
            .map(|&k| {
                if k == nyquist {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, f(k as f64))
                }
            })
            .collect();
        Self {
            grid: grid.clone(),
            values,
            epsilon,
        }
    }

    /// `L_ε = ∂x / (1 - ε∂x²)`, symbol `ik / (1 + εk²)`.
    pub fn l_eps(grid: &SpectralGrid, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self::from_odd_fn(grid, epsilon, |k| k / (1.0 + epsilon * k * k)))
    }

    /// `L_{ε,λ} = P(∂x) / (1 - ε∂x²)`, symbol `P(ik) / (1 + εk²)`.
    pub fn l_eps_lambda(
        grid: &SpectralGrid,
        epsilon: f64,
        polynomial: &DispersionPolynomial,
    ) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self::from_odd_fn(grid, epsilon, |k| {
            polynomial.symbol_imag(k) / (1.0 + epsilon * k * k)
        }))
    }

    pub fn zero(grid: &SpectralGrid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.n_points()],
            epsilon: 0.0,
        }
    }

    /// Arbitrary per-slot values (FFT slot order).
    pub fn from_values(grid: &SpectralGrid, values: Vec<Complex64>, epsilon: f64) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(invalid("symbol length does not match grid"));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
            epsilon,
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            epsilon: self.epsilon,
        }
    }

    /// Exact flow `e^{-t·L}` of `∂t v = -L v`.
    pub fn propagator(&self, t: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| (-t * v).exp()).collect(),
            epsilon: self.epsilon,
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Values in FFT slot order.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Symbol at wavenumber `k` (zero outside the band).
    pub fn value(&self, k: i64) -> Complex64 {
        self.grid
            .slot_of(k)
            .map(|s| self.values[s])
            .unwrap_or_default()
    }

    pub fn apply(&self, field: &Field) -> Result<Field> {
        let mut out = field.clone();
        self.apply_in_place(&mut out)?;
        Ok(out)
    }

    pub fn apply_in_place(&self, field: &mut Field) -> Result<()> {
        if *field.grid() != self.grid {
            return Err(invalid("operator and field live on different grids"));
        }
        for (c, v) in field.coeffs_mut().iter_mut().zip(&self.values) {
            *c *= v;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> SpectralGrid {
        SpectralGrid::new(32).unwrap()
    }

    #[test]
    fn l_eps_values() {
        let g = grid();
        let l1 = OperatorSymbol::l_eps(&g, 1.0).unwrap();
        assert!((l1.value(2) - Complex64::new(0.0, 0.4)).norm() < 1e-16);
        assert_eq!(l1.value(0), Complex64::new(0.0, 0.0));
        let l0 = OperatorSymbol::l_eps(&g, 0.0).unwrap();
        for k in -15..16 {
            assert_eq!(l0.value(k), Complex64::new(0.0, k as f64));
        }
        assert!(OperatorSymbol::l_eps(&g, -0.1).is_err());
        assert!(OperatorSymbol::l_eps(&g, 1.5).is_err());
    }

    #[test]
    fn polynomial_symbols() {
        let g = grid();
        let p1 = DispersionPolynomial::classical();
        assert_eq!(p1.degree(), 1);
        let a = OperatorSymbol::l_eps(&g, 0.3).unwrap();
        let b = OperatorSymbol::l_eps_lambda(&g, 0.3, &p1).unwrap();
        assert_eq!(a.values(), b.values());

        let p13 = DispersionPolynomial::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(p13.degree(), 3);
        let s = OperatorSymbol::l_eps_lambda(&g, 0.0, &p13).unwrap();
        assert!(s.value(1).norm() < 1e-16);

        let p3 = DispersionPolynomial::new(vec![0.0, 1.0]).unwrap();
        let s3 = OperatorSymbol::l_eps_lambda(&g, 1.0, &p3).unwrap();
        assert!((s3.value(2) - Complex64::new(0.0, -1.6)).norm() < 1e-15);

        assert!(DispersionPolynomial::new(vec![0.0, 0.0]).is_err());
        assert_eq!(DispersionPolynomial::new(vec![2.0, 0.0]).unwrap().degree(), 1);
    }

    #[test]
    fn symbols_are_imaginary_and_vanish_at_zero() {
        let g = grid();
        let p = DispersionPolynomial::new(vec![0.5, -0.2, 0.1]).unwrap();
        for eps in [0.0, 0.01, 0.5, 1.0] {
            let s = OperatorSymbol::l_eps_lambda(&g, eps, &p).unwrap();
            assert!(s.values().iter().all(|v| v.re == 0.0));
            assert_eq!(s.value(0), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn apply_l_eps_to_sine() {
        // ∂x/(1-∂x²) sin = cos/2
        let g = grid();
        let f = g.sample(f64::sin);
        let out = OperatorSymbol::l_eps(&g, 1.0).unwrap().apply(&f).unwrap();
        let expected = g.sample(|x| 0.5 * x.cos());
        assert!(out.l2_distance(&expected).unwrap() < 1e-15);

        let constant = g.sample(|_| 2.5);
        let killed = OperatorSymbol::l_eps(&g, 0.7).unwrap().apply(&constant).unwrap();
        assert!(killed.l2_norm() < 1e-16);
        assert_eq!(OperatorSymbol::zero(&g).apply(&f).unwrap().l2_norm(), 0.0);

        let other = SpectralGrid::new(16).unwrap();
        assert!(OperatorSymbol::zero(&other).apply(&f).is_err());
    }

    #[test]
    fn propagator_is_unitary_phase() {
        let g = grid();
        let s = OperatorSymbol::l_eps(&g, 0.0).unwrap();
        let e = s.propagator(std::f64::consts::PI);
        assert!((e.value(1) + Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(s.propagator(0.0).values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));

        let p = DispersionPolynomial::new(vec![1.0, 0.3]).unwrap();
        let l = OperatorSymbol::l_eps_lambda(&g, 0.2, &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for t in [-5.0, -0.01, 0.3, 5.0] {
            let prop = l.propagator(t);
            assert!(prop.values().iter().all(|v| (v.norm() - 1.0).abs() < 1e-15));
            let f = Field::random_band_limited(&g, 15, 0.5, &mut rng);
            let out = prop.apply(&f).unwrap();
            for r in [0.0, 1.0, 2.0] {
                let a = out.sobolev_norm(r).unwrap();
                let b = f.sobolev_norm(r).unwrap();
                assert!((a - b).abs() <= 1e-13 * b);
            }
            assert!(out.hermitian_defect() < 1e-14);
        }
    }
}
