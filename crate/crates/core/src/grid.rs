//! Uniform 1-D sample lattices and the complex fields living on them.
//!
//! Everything downstream (objects, kernels, the biphoton state) is sampled on
//! a [`Grid1D`]. Grids are plain value descriptors; every field carries its
//! grid so plane mismatches are detected instead of silently producing
//! garbage.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Result, SimError};

/// Uniform 1-D lattice: `n` samples spaced `pitch` metres, symmetric about
/// `center`. Sample `i` sits at `center + (i - (n-1)/2) * pitch`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    pitch: f64,
    center: f64,
}

impl Grid1D {
    pub fn new(n: usize, pitch: f64, center: f64) -> Result<Self> {
        if n < 2 {
            return Err(SimError::config(format!(
                "grid needs n >= 2 samples, got {n}"
            )));
        }
        if pitch <= 0.0 || !pitch.is_finite() {
            return Err(SimError::config(format!(
                "grid pitch must be positive, got {pitch}"
            )));
        }
        Ok(Grid1D { n, pitch, center })
    }

    /// Symmetric grid spanning `[-halfwidth, +halfwidth]` (extent = 2*halfwidth).
    pub fn spanning(n: usize, halfwidth: f64) -> Result<Self> {
        if halfwidth.is_nan() || halfwidth <= 0.0 {
            return Err(SimError::config(format!(
                "grid halfwidth must be positive, got {halfwidth}"
            )));
        }
        Grid1D::new(n, 2.0 * halfwidth / n as f64, 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// Physical width covered by the lattice, `n * pitch`.
    pub fn extent(&self) -> f64 {
        self.n as f64 * self.pitch
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        self.center + (i as f64 - (self.n as f64 - 1.0) / 2.0) * self.pitch
    }

    pub fn coordinates(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.coordinate(i))
    }

    /// Index of the sample closest to `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        let f = (x - self.coordinate(0)) / self.pitch;
        (f.round().max(0.0) as usize).min(self.n - 1)
    }
}

/// Vacuum wavelength with its wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavelength {
    lambda: f64,
}

impl Wavelength {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(SimError::config(format!(
                "wavelength must be positive, got {lambda}"
            )));
        }
        Ok(Wavelength { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Angular wavenumber `2*pi / lambda`.
    pub fn k(&self) -> f64 {
        TAU / self.lambda
    }
}

/// Complex transverse field sampled on a grid.
#[derive(Debug, Clone)]
pub struct ComplexField {
    grid: Grid1D,
    amp: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid1D, amp: Vec<Complex64>) -> Result<Self> {
        if amp.len() != grid.n() {
            return Err(SimError::config(format!(
                "field has {} samples but grid has {}",
                amp.len(),
                grid.n()
            )));
        }
        Ok(ComplexField { grid, amp })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        ComplexField {
            grid,
            amp: vec![Complex64::ZERO; grid.n()],
        }
    }

    /// Sample an amplitude function over the grid coordinates.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let amp = grid.coordinates().map(f).collect();
        ComplexField { grid, amp }
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn amp(&self) -> &[Complex64] {
        &self.amp
    }

    pub fn amp_mut(&mut self) -> &mut [Complex64] {
        &mut self.amp
    }

    /// Discrete power `sum(|amp_i|^2) * pitch`.
    pub fn power(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.pitch()
    }

    /// Ratio of the worse edge-sample intensity to the peak intensity.
    /// Free-space kernels only conserve power while this stays small.
    pub fn edge_intensity_ratio(&self) -> f64 {
        let peak = self.amp.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let edge = self.amp[0]
            .norm_sqr()
            .max(self.amp[self.amp.len() - 1].norm_sqr());
        edge / peak
    }

    /// Linear interpolation onto `target`, real and imaginary parts
    /// separately. Targets outside the source extent are zero; the half-pitch
    /// skirt between the outermost sample and the extent edge clamps to the
    /// edge sample.
    pub fn resample(&self, target: Grid1D) -> Result<ComplexField> {
        if target == self.grid {
            return Ok(self.clone());
        }
        let half = self.grid.extent() / 2.0;
        let lo = self.grid.center() - half;
        let hi = self.grid.center() + half;
        let tlo = target.center() - target.extent() / 2.0;
        let thi = target.center() + target.extent() / 2.0;
        if thi <= lo || tlo >= hi {
            return Err(SimError::config(
                "resample target does not overlap the source extent".to_string(),
            ));
        }
        let x0 = self.grid.coordinate(0);
        let xn = self.grid.coordinate(self.grid.n() - 1);
        let amp = target
            .coordinates()
            .map(|t| {
                if t < lo || t > hi {
                    Complex64::ZERO
                } else if t <= x0 {
                    self.amp[0]
                } else if t >= xn {
                    self.amp[self.grid.n() - 1]
                } else {
                    let f = (t - x0) / self.grid.pitch();
                    let i = f.floor() as usize;
                    let w = f - i as f64;
                    self.amp[i] * (1.0 - w) + self.amp[i + 1] * w
                }
            })
            .collect();
        ComplexField::new(target, amp)
    }
}

/// Linear interpolation of a real-valued profile sampled on `grid` at `x`,
/// with the same edge semantics as [`ComplexField::resample`].
pub fn interp_profile(grid: Grid1D, values: &[f64], x: f64) -> f64 {
    debug_assert_eq!(values.len(), grid.n());
    let half = grid.extent() / 2.0;
    if x < grid.center() - half || x > grid.center() + half {
        return 0.0;
    }
    let x0 = grid.coordinate(0);
    let xn = grid.coordinate(grid.n() - 1);
    if x <= x0 {
        values[0]
    } else if x >= xn {
        values[grid.n() - 1]
    } else {
        let f = (x - x0) / grid.pitch();
        let i = f.floor() as usize;
        let w = f - i as f64;
        values[i] * (1.0 - w) + values[i + 1] * w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn grid_coordinates_symmetric() {
        let g = Grid1D::new(3, 1e-3, 0.0).unwrap();
        let xs: Vec<f64> = g.coordinates().collect();
        assert_eq!(xs, vec![-1e-3, 0.0, 1e-3]);
    }

    #[test]
    fn grid_extent() {
        let g = Grid1D::new(4096, 2e-6, 0.0).unwrap();
        assert_relative_eq!(g.extent(), 8.192e-3, max_relative = 1e-15);
    }

    #[test]
    fn grid_rejects_degenerate() {
        assert!(Grid1D::new(1, 1e-3, 0.0).is_err());
        assert!(Grid1D::new(16, 0.0, 0.0).is_err());
        assert!(Grid1D::new(16, -1e-6, 0.0).is_err());
    }

    #[test]
    fn wavelength_wavenumber() {
        let w = Wavelength::new(812e-9).unwrap();
        assert_relative_eq!(w.k() * w.lambda(), TAU, max_relative = 1e-15);
        assert!(Wavelength::new(0.0).is_err());
    }

    #[test]
    fn power_examples() {
        let g = Grid1D::new(100, 1e-5, 0.0).unwrap();
        let f = ComplexField::from_fn(g, |_| Complex64::new(1.0, 0.0));
        assert_relative_eq!(f.power(), 1e-3, max_relative = 1e-12);

        let z = ComplexField::zeros(g);
        assert_eq!(z.power(), 0.0);

        let g2 = Grid1D::new(2, 0.5, 0.0).unwrap();
        let mut f2 = ComplexField::zeros(g2);
        f2.amp_mut()[0] = Complex64::new(0.0, 2.0);
        assert_relative_eq!(f2.power(), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn resample_identity_is_bitwise() {
        let g = Grid1D::new(64, 1e-5, 0.0).unwrap();
        let f = ComplexField::from_fn(g, |x| Complex64::new(x, -x * x));
        let r = f.resample(g).unwrap();
        assert_eq!(f.amp(), r.amp());
    }

    #[test]
    fn resample_constant_onto_finer_grid() {
        let g = Grid1D::new(32, 1e-4, 0.0).unwrap();
        let f = ComplexField::from_fn(g, |_| Complex64::new(0.7, -0.2));
        let fine = Grid1D::new(64, 5e-5, 0.0).unwrap();
        let r = f.resample(fine).unwrap();
        for a in r.amp() {
            assert_relative_eq!(a.re, 0.7, max_relative = 1e-14);
            assert_relative_eq!(a.im, -0.2, max_relative = 1e-14);
        }
    }

    #[test]
    fn resample_gaussian_power_conserved() {
        // analytic oracle: integral of exp(-2 x^2 / w^2) = w sqrt(pi/2)
        let w = 1e-3;
        let g = Grid1D::new(16384, 1e-6, 0.0).unwrap();
        let f = ComplexField::from_fn(g, |x| Complex64::new((-x * x / (w * w)).exp(), 0.0));
        let analytic = w * (std::f64::consts::PI / 2.0).sqrt();
        assert_relative_eq!(f.power(), analytic, max_relative = 1e-9);
        let fine = Grid1D::new(32768, 5e-7, 0.0).unwrap();
        let r = f.resample(fine).unwrap();
        assert_relative_eq!(r.power(), analytic, max_relative = 1e-6);
    }

    #[test]
    fn resample_disjoint_target_rejected() {
        let g = Grid1D::new(32, 1e-4, 0.0).unwrap();
        let f = ComplexField::zeros(g);
        let far = Grid1D::new(32, 1e-4, 1.0).unwrap();
        assert!(f.resample(far).is_err());
    }

    proptest! {
        #[test]
        fn coordinates_increase_and_span(n in 2usize..300, pitch in 1e-9f64..1e-2, c in -1e-2f64..1e-2) {
            let g = Grid1D::new(n, pitch, c).unwrap();
            let xs: Vec<f64> = g.coordinates().collect();
            for w in xs.windows(2) {
                prop_assert!(w[1] > w[0]);
            }
            prop_assert!((xs[n - 1] - xs[0] - (n as f64 - 1.0) * pitch).abs() <= 1e-12 * g.extent());
        }

        #[test]
        fn power_invariant_under_global_phase(phi in 0.0f64..TAU) {
            let g = Grid1D::new(128, 1e-5, 0.0).unwrap();
            let f = ComplexField::from_fn(g, |x| Complex64::new((x * 1e4).sin(), (x * 2e4).cos()));
            let rot = Complex64::from_polar(1.0, phi);
            let g2 = ComplexField::new(g, f.amp().iter().map(|a| a * rot).collect()).unwrap();
            prop_assert!((f.power() - g2.power()).abs() <= 1e-12 * f.power());
        }
    }
}
