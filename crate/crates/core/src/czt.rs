//! Chirp-z evaluation of the discrete Fresnel quadrature.
//!
//! The paraxial kernel factors as chirp(out) * cross * chirp(in) with the
//! cross term a complex-exponential ramp in the index product. Bluestein's
//! identity `m*i = (m^2 + i^2 - (m-i)^2) / 2` turns the ramp into a linear
//! convolution, evaluated here with zero-padded FFTs. The result equals the
//! direct kernel-matrix application term for term (same quadrature sum, FFT
//! round-off only), for any output lattice.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Result, SimError};
use crate::grid::{ComplexField, Grid1D};

/// Precomputed plan for one propagation step between two fixed grids.
pub struct CztPlan {
    grid_in: Grid1D,
    grid_out: Grid1D,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
    kernel_hat: Vec<Complex64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    nfft: usize,
}

impl CztPlan {
    /// `k_over_d` is `k / distance`; `prefactor` multiplies the whole output
    /// (kernel prefactor times the input quadrature weight).
    pub fn new(grid_in: Grid1D, grid_out: Grid1D, k_over_d: f64, prefactor: Complex64) -> Self {
        let (ni, no) = (grid_in.n(), grid_out.n());
        let si = (ni as f64 - 1.0) / 2.0;
        let so = (no as f64 - 1.0) / 2.0;
        let (pi_, po) = (grid_in.pitch(), grid_out.pitch());
        let (ci, co) = (grid_in.center(), grid_out.center());
        // phase per unit (m - so)(i - si)
        let w = k_over_d * po * pi_;

        // quadratic input/output chirps of the kernel itself
        let half_k_over_d = k_over_d / 2.0;
        let pre: Vec<Complex64> = (0..ni)
            .map(|i| {
                let ip = i as f64 - si;
                let x = grid_in.coordinate(i);
                // e^{ik x^2/2d} * e^{-ik c_o p_i i'/d} * e^{-iw i'^2/2}
                Complex64::from_polar(
                    1.0,
                    half_k_over_d * x * x - k_over_d * co * pi_ * ip - w * ip * ip / 2.0,
                )
            })
            .collect();
        let const_phase = -k_over_d * co * ci;
        let post: Vec<Complex64> = (0..no)
            .map(|m| {
                let mp = m as f64 - so;
                let x = grid_out.coordinate(m);
                prefactor
                    * Complex64::from_polar(
                        1.0,
                        half_k_over_d * x * x - k_over_d * ci * po * mp - w * mp * mp / 2.0
                            + const_phase,
                    )
            })
            .collect();

        let nconv = ni + no - 1;
        let nfft = nconv.next_power_of_two();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(nfft);
        let ifft = planner.plan_fft_inverse(nfft);

        // chirp kernel g_r = e^{+iw (r - (so - si))^2 / 2}, r = m - i
        let ds = so - si;
        let mut kernel = vec![Complex64::ZERO; nfft];
        for (j, slot) in kernel.iter_mut().enumerate().take(nconv) {
            let r = j as f64 - (ni as f64 - 1.0);
            *slot = Complex64::from_polar(1.0, w * (r - ds) * (r - ds) / 2.0);
        }
        fft.process(&mut kernel);

        CztPlan {
            grid_in,
            grid_out,
            pre,
            post,
            kernel_hat: kernel,
            fft,
            ifft,
            nfft,
        }
    }

    pub fn grid_in(&self) -> Grid1D {
        self.grid_in
    }

    pub fn grid_out(&self) -> Grid1D {
        self.grid_out
    }

    /// Propagate one field. Pure; safe to call concurrently.
    pub fn apply(&self, f: &ComplexField) -> Result<ComplexField> {
        if f.grid() != self.grid_in {
            return Err(SimError::config(
                "field grid does not match the propagation plan input",
            ));
        }
        let ni = self.grid_in.n();
        let no = self.grid_out.n();
        let mut buf = vec![Complex64::ZERO; self.nfft];
        for ((b, a), pre) in buf.iter_mut().zip(f.amp()).zip(&self.pre) {
            *b = a * pre;
        }
        self.fft.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.ifft.process(&mut buf);
        let scale = 1.0 / self.nfft as f64; // rustfft leaves transforms unnormalized
        let amp: Vec<Complex64> = (0..no)
            .map(|m| buf[m + ni - 1] * self.post[m] * scale)
            .collect();
        ComplexField::new(self.grid_out, amp)
    }
}
