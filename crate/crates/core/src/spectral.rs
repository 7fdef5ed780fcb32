//! Periodic Fourier discretization on `[-π, π)`.
//!
//! A [`Field`] stores the Fourier coefficients of a real periodic function in
//! FFT order. Coefficients use the continuous normalization
//! `û_k ≈ (1/2π) ∫ u(x) e^{-ikx} dx`, so Fourier multipliers can be written
//! directly from their symbols. Physical samples live on the nodes
//! `x_j = -π + j·Δx`, `Δx = 2π/n`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result};

struct GridInner {
    n: usize,
    dealias: bool,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Wavenumber of each FFT-ordered slot.
    slots: Vec<i64>,
}

/// Uniform periodic grid with `n` collocation points (`n` even, `n ≥ 4`).
///
/// Cloning is cheap; FFT plans are shared.
#[derive(Clone)]
pub struct SpectralGrid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n_points", &self.inner.n)
            .field("dealias", &self.inner.dealias)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n && self.inner.dealias == other.inner.dealias)
    }
}

impl SpectralGrid {
    /// Grid without dealiasing.
    pub fn new(n_points: usize) -> Result<Self> {
        Self::with_dealiasing(n_points, false)
    }

    /// Grid whose quadratic products are filtered with the 2/3 rule when
    /// `dealias` is set.
    pub fn with_dealiasing(n_points: usize, dealias: bool) -> Result<Self> {
        if n_points < 4 || !n_points.is_multiple_of(2) {
            return Err(invalid(format!(
                "grid needs an even number of points >= 4, got {n_points}"
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_points);
        let inverse = planner.plan_fft_inverse(n_points);
        let half = (n_points / 2) as i64;
        let slots = (0..n_points as i64)
            .map(|j| if j < half { j } else { j - n_points as i64 })
            .collect();
        Ok(Self {
            inner: Arc::new(GridInner {
                n: n_points,
                dealias,
                forward,
                inverse,
                slots,
            }),
        })
    }

    pub fn n_points(&self) -> usize {
        self.inner.n
    }

    pub fn dealias(&self) -> bool {
        self.inner.dealias
    }

    pub fn domain_length(&self) -> f64 {
        2.0 * PI
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI / self.inner.n as f64
    }

    /// Collocation nodes `-π + jΔx`.
    pub fn nodes(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.inner.n).map(|j| -PI + j as f64 * dx).collect()
    }

    /// Wavenumbers `-n/2, …, n/2 - 1` in ascending order.
    pub fn wavenumbers(&self) -> Vec<i64> {
        let half = (self.inner.n / 2) as i64;
        (-half..half).collect()
    }

    /// Wavenumbers in FFT slot order (the storage order of [`Field`]).
    pub fn slot_wavenumbers(&self) -> &[i64] {
        &self.inner.slots
    }

    /// The unpaired wavenumber `-n/2`.
    pub fn nyquist(&self) -> i64 {
        -((self.inner.n / 2) as i64)
    }

    /// Storage slot of wavenumber `k`, if it is representable.
    pub fn slot_of(&self, k: i64) -> Option<usize> {
        let n = self.inner.n as i64;
        let half = n / 2;
        if k >= -half && k < half {
            Some(if k >= 0 { k as usize } else { (k + n) as usize })
        } else {
            None
        }
    }

    /// Physical samples to Fourier coefficients.
    pub fn transform(&self, samples: &[f64]) -> Result<Field> {
        if samples.len() != self.inner.n {
            return Err(invalid(format!(
                "expected {} samples, got {}",
                self.inner.n,
                samples.len()
            )));
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_in_place(&mut buf);
        Ok(Field {
            grid: self.clone(),
            coeffs: buf,
        })
    }

    /// Samples `f` at the nodes and transforms.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Field {
        let samples: Vec<f64> = self.nodes().into_iter().map(f).collect();
        self.transform(&samples).expect("length matches grid")
    }

    // Raw DFT plus the (-1)^k shift from the grid origin at -π, scaled by 1/n.
    fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.inner.forward.process(buf);
        let scale = 1.0 / self.inner.n as f64;
        for (c, &k) in buf.iter_mut().zip(&self.inner.slots) {
            *c *= if k % 2 == 0 { scale } else { -scale };
        }
    }

    fn inverse_in_place(&self, buf: &mut [Complex64]) {
        for (c, &k) in buf.iter_mut().zip(&self.inner.slots) {
            if k % 2 != 0 {
                *c = -*c;
            }
        }
        self.inner.inverse.process(buf);
    }

    fn apply_dealias(&self, coeffs: &mut [Complex64]) {
        if !self.inner.dealias {
            return;
        }
        let cutoff = (2.0 / 3.0) * (self.inner.n / 2) as f64;
        for (c, &k) in coeffs.iter_mut().zip(&self.inner.slots) {
            if (k.abs() as f64) > cutoff {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// Weight used by [`Field::sobolev_norm_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SobolevWeight {
    /// `(1 + |k|)^{2r}`
    #[default]
    Shifted,
    /// `(1 + k²)^r`
    Bessel,
}

impl SobolevWeight {
    #[inline]
    pub fn weight(self, k: i64, r: f64) -> f64 {
        let k = k as f64;
        match self {
            SobolevWeight::Shifted => (1.0 + k.abs()).powf(2.0 * r),
            SobolevWeight::Bessel => (1.0 + k * k).powf(r),
        }
    }
}

/// Real periodic function represented by its Fourier coefficients.
#[derive(Clone, Debug)]
pub struct Field {
    grid: SpectralGrid,
    coeffs: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: &SpectralGrid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n_points()],
        }
    }

    /// Builds a field from coefficients in FFT slot order.
    pub fn from_coeffs(grid: &SpectralGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n_points() {
            return Err(invalid(format!(
                "expected {} coefficients, got {}",
                grid.n_points(),
                coeffs.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Random real field with modes `1 ≤ |k| ≤ k_max` and zero mean.
    ///
    /// Coefficient magnitudes decay like `(1+|k|)^{-decay}`.
    pub fn random_band_limited<R: Rng + ?Sized>(
        grid: &SpectralGrid,
        k_max: usize,
        decay: f64,
        rng: &mut R,
    ) -> Self {
        let k_max = k_max.min(grid.n_points() / 2 - 1) as i64;
        let mut field = Self::zeros(grid);
        for k in 1..=k_max {
            let amp = (1.0 + k as f64).powf(-decay);
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * amp;
            field.set_mode_pair(k, c);
        }
        field
    }

    /// Sets `coeff(k) = c` and `coeff(-k) = conj(c)`.
    pub fn set_mode_pair(&mut self, k: i64, c: Complex64) {
        let pos = self.grid.slot_of(k).expect("wavenumber in range");
        let neg = self.grid.slot_of(-k).expect("wavenumber in range");
        self.coeffs[pos] = c;
        self.coeffs[neg] = c.conj();
        if k == 0 {
            self.coeffs[pos] = Complex64::new(c.re, 0.0);
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// Coefficients in FFT slot order.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of wavenumber `k`; zero outside the representable band.
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.grid
            .slot_of(k)
            .map(|s| self.coeffs[s])
            .unwrap_or_default()
    }

    /// Physical samples at the grid nodes.
    pub fn inverse_transform(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        self.grid.inverse_in_place(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// `( Σ_k (1+|k|)^{2r} |û_k|² )^{1/2}`.
    pub fn sobolev_norm(&self, r: f64) -> Result<f64> {
        self.sobolev_norm_with(r, SobolevWeight::Shifted)
    }

    pub fn sobolev_norm_with(&self, r: f64, weight: SobolevWeight) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(invalid(format!("Sobolev index must be >= 0, got {r}")));
        }
        Ok(self.weighted_norm(r, weight))
    }

    /// Same sum as [`Self::sobolev_norm_with`] but for any real index,
    /// including the negative ones that show up in operator estimates.
    pub fn weighted_norm(&self, s: f64, weight: SobolevWeight) -> f64 {
        self.coeffs
            .iter()
            .zip(self.grid.slot_wavenumbers())
            .map(|(c, &k)| weight.weight(k, s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// L² norm in the coefficient convention (`‖u‖_{L²}/√(2π)`).
    pub fn l2_norm(&self) -> f64 {
        self.weighted_norm(0.0, SobolevWeight::Shifted)
    }

    pub fn pointwise_square(&self) -> Field {
        let mut buf = self.coeffs.clone();
        self.grid.inverse_in_place(&mut buf);
        for c in buf.iter_mut() {
            *c = Complex64::new(c.re * c.re, 0.0);
        }
        self.grid.forward_in_place(&mut buf);
        self.grid.apply_dealias(&mut buf);
        Field {
            grid: self.grid.clone(),
            coeffs: buf,
        }
    }

    pub fn product(&self, other: &Field) -> Result<Field> {
        self.check_grid(other)?;
        let mut a = self.coeffs.clone();
        let mut b = other.coeffs.clone();
        self.grid.inverse_in_place(&mut a);
        self.grid.inverse_in_place(&mut b);
        for (x, y) in a.iter_mut().zip(&b) {
            *x = Complex64::new(x.re * y.re, 0.0);
        }
        self.grid.forward_in_place(&mut a);
        self.grid.apply_dealias(&mut a);
        Ok(Field {
            grid: self.grid.clone(),
            coeffs: a,
        })
    }

    /// `self += alpha · other`
    pub fn axpy(&mut self, alpha: f64, other: &Field) -> Result<()> {
        self.check_grid(other)?;
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += alpha * y;
        }
        Ok(())
    }

    pub fn scaled(&self, alpha: f64) -> Field {
        Field {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
        }
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// L² norm of the difference.
    pub fn l2_distance(&self, other: &Field) -> Result<f64> {
        Ok(self.sub(other)?.l2_norm())
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest `|û_{-k} - conj(û_k)|` over the paired wavenumbers, relative to
    /// the largest coefficient magnitude.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n_points() as i64;
        let scale = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut worst = (self.coeff(0).im).abs();
        for k in 1..n / 2 {
            worst = worst.max((self.coeff(-k) - self.coeff(k).conj()).norm());
        }
        worst / scale
    }

    pub(crate) fn check_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(invalid("fields live on different grids"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn grid_layout() {
        let g = SpectralGrid::new(200).unwrap();
        assert!((g.dx() - 0.031_415_926_535_897_934).abs() < 1e-15);
        assert!((g.dx() - 0.0314).abs() < 1e-4);
        let g4 = SpectralGrid::new(4).unwrap();
        assert_eq!(g4.wavenumbers(), vec![-2, -1, 0, 1]);
        assert_eq!(g4.slot_wavenumbers(), &[0, 1, -2, -1]);
        assert!(SpectralGrid::new(3).is_err());
        assert!(SpectralGrid::new(2).is_err());
        assert!(SpectralGrid::new(0).is_err());
    }

    #[test]
    fn sine_has_single_mode_pair() {
        let g = SpectralGrid::new(16).unwrap();
        let f = g.sample(f64::sin);
        assert!(close(f.coeff(1), Complex64::new(0.0, -0.5), 1e-15));
        assert!(close(f.coeff(-1), Complex64::new(0.0, 0.5), 1e-15));
        for k in g.wavenumbers() {
            if k.abs() != 1 {
                assert!(f.coeff(k).norm() < 1e-15, "k={k}");
            }
        }
    }

    #[test]
    fn zero_samples_give_zero_coefficients() {
        let g = SpectralGrid::new(8).unwrap();
        let f = g.transform(&[0.0; 8]).unwrap();
        assert!(f.coeffs().iter().all(|c| c.norm() == 0.0));
        assert!(g.transform(&[0.0; 7]).is_err());
    }

    #[test]
    fn sobolev_norm_of_sine() {
        let g = SpectralGrid::new(16).unwrap();
        let f = g.sample(f64::sin);
        assert!((f.sobolev_norm(0.0).unwrap() - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((f.sobolev_norm(1.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(f.sobolev_norm(-0.5).is_err());
    }

    #[test]
    fn square_of_sine() {
        let g = SpectralGrid::new(16).unwrap();
        let sq = g.sample(f64::sin).pointwise_square();
        assert!(close(sq.coeff(0), Complex64::new(0.5, 0.0), 1e-15));
        assert!(close(sq.coeff(2), Complex64::new(-0.25, 0.0), 1e-15));
        assert!(close(sq.coeff(-2), Complex64::new(-0.25, 0.0), 1e-15));
        let zero = Field::zeros(&g).pointwise_square();
        assert!(zero.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn dealiasing_cuts_upper_third() {
        let g = SpectralGrid::with_dealiasing(16, true).unwrap();
        // cos(4x)² = 1/2 + cos(8x)/2, mode 8 is Nyquist and must vanish; cutoff is 16/3.
        let f = g.sample(|x| (4.0 * x).cos() + (3.0 * x).cos());
        let sq = f.pointwise_square();
        for k in g.wavenumbers() {
            if k.abs() > 5 {
                assert_eq!(sq.coeff(k).norm(), 0.0, "k={k}");
            }
        }
        assert!(sq.coeff(1).norm() > 0.4);
    }

    #[test]
    fn hermitian_symmetry_of_products() {
        let g = SpectralGrid::new(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = Field::random_band_limited(&g, 20, 1.0, &mut rng);
        let h = Field::random_band_limited(&g, 20, 1.0, &mut rng);
        assert!(f.pointwise_square().hermitian_defect() < 1e-12);
        assert!(f.product(&h).unwrap().hermitian_defect() < 1e-12);
        let other = SpectralGrid::new(32).unwrap();
        assert!(f.product(&Field::zeros(&other)).is_err());
    }
}
