//! Fresnel free-space propagation: direct quadrature kernels, the chirp-z
//! fast path, and cascade composition.
//!
//! Kernel convention (1-D paraxial):
//!
//! ```text
//! h_d(x_out, x_in) = exp(ikd)/sqrt(i lambda d) * exp(ik (x_out - x_in)^2 / 2d)
//! ```
//!
//! with `sqrt(i) = exp(i pi/4)`. A field is propagated by the midpoint rule,
//! `out_m = sum_i h[m,i] f_i * pitch_in`. The `exp(ikd)` path phase cancels in
//! every intensity; it can be dropped per kernel to check that.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::FRAC_PI_4;

use crate::czt::CztPlan;
use crate::elements::PhaseObject;
use crate::error::{Result, SimError};
use crate::grid::{ComplexField, Grid1D, Wavelength};

/// Free-space propagation over a positive distance.
#[derive(Debug, Clone, Copy)]
pub struct FresnelSpec {
    pub distance: f64,
    pub lambda: Wavelength,
    /// Keep the `exp(ikd)` path phase. All intensities are invariant under it.
    pub include_path_phase: bool,
}

impl FresnelSpec {
    pub fn new(distance: f64, lambda: Wavelength) -> Result<Self> {
        if distance <= 0.0 || !distance.is_finite() {
            return Err(SimError::config(format!(
                "propagation distance must be positive, got {distance}"
            )));
        }
        Ok(FresnelSpec {
            distance,
            lambda,
            include_path_phase: true,
        })
    }

    fn prefactor(&self) -> Complex64 {
        let mag = 1.0 / (self.lambda.lambda() * self.distance).sqrt();
        let mut phase = -FRAC_PI_4;
        if self.include_path_phase {
            phase += self.lambda.k() * self.distance;
        }
        Complex64::from_polar(mag, phase)
    }

    /// Reject grid pairs whose sampling cannot carry the kernel chirp across
    /// the other plane's span: `pitch * extent_other <= lambda * d`. Equality
    /// is the full-field-of-view lattice and is accepted.
    fn check_sampling(&self, grid_in: Grid1D, grid_out: Grid1D) -> Result<()> {
        let ld = self.lambda.lambda() * self.distance;
        let slack = 1.0 + 1e-9;
        if grid_in.pitch() * grid_out.extent() > ld * slack {
            return Err(SimError::numerics(format!(
                "input pitch {:.4e} m aliases the Fresnel kernel over the output span \
                 (need pitch <= {:.4e} m for d = {} m)",
                grid_in.pitch(),
                ld / grid_out.extent(),
                self.distance
            )));
        }
        if grid_out.pitch() * grid_in.extent() > ld * slack {
            return Err(SimError::numerics(format!(
                "output pitch {:.4e} m aliases the Fresnel kernel over the input span \
                 (need pitch <= {:.4e} m for d = {} m)",
                grid_out.pitch(),
                ld / grid_in.extent(),
                self.distance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum KernelData {
    Dense(Array2<Complex64>),
    Diagonal(Vec<Complex64>),
}

/// Complex matrix mapping an input-plane field to an output-plane field,
/// `out = h . f * pitch_in` (entries carry units 1/m). Diagonal kernels
/// (objects, identity) are stored as their diagonal.
#[derive(Debug, Clone)]
pub struct TransferKernel {
    grid_in: Grid1D,
    grid_out: Grid1D,
    data: KernelData,
}

impl TransferKernel {
    pub fn grid_in(&self) -> Grid1D {
        self.grid_in
    }

    pub fn grid_out(&self) -> Grid1D {
        self.grid_out
    }

    /// Entry `h[m, i]`.
    pub fn entry(&self, m: usize, i: usize) -> Complex64 {
        match &self.data {
            KernelData::Dense(h) => h[[m, i]],
            KernelData::Diagonal(d) => {
                if m == i {
                    d[m]
                } else {
                    Complex64::ZERO
                }
            }
        }
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        match &self.data {
            KernelData::Dense(h) => h.clone(),
            KernelData::Diagonal(d) => {
                let n = d.len();
                let mut h = Array2::zeros((n, n));
                for (i, &v) in d.iter().enumerate() {
                    h[[i, i]] = v;
                }
                h
            }
        }
    }

    pub(crate) fn dense_rows(&self) -> Option<&Array2<Complex64>> {
        match &self.data {
            KernelData::Dense(h) => Some(h),
            KernelData::Diagonal(_) => None,
        }
    }
}

/// Identity element of the cascade, `h = I / pitch`.
pub fn identity_kernel(grid: Grid1D) -> TransferKernel {
    let v = Complex64::new(1.0 / grid.pitch(), 0.0);
    TransferKernel {
        grid_in: grid,
        grid_out: grid,
        data: KernelData::Diagonal(vec![v; grid.n()]),
    }
}

/// Diagonal kernel of a phase object, so that applying it reproduces
/// [`crate::elements::apply_object`].
pub fn object_kernel(obj: &PhaseObject) -> TransferKernel {
    let grid = obj.grid();
    let inv_p = 1.0 / grid.pitch();
    let d = obj.reflectance().into_iter().map(|r| r * inv_p).collect();
    TransferKernel {
        grid_in: grid,
        grid_out: grid,
        data: KernelData::Diagonal(d),
    }
}

/// Direct-quadrature Fresnel kernel matrix between two grids. This is the
/// oracle path; rows are evaluated in parallel but each row is summed in a
/// fixed order downstream.
pub fn fresnel_kernel(
    spec: &FresnelSpec,
    grid_in: Grid1D,
    grid_out: Grid1D,
) -> Result<TransferKernel> {
    spec.check_sampling(grid_in, grid_out)?;
    let pref = spec.prefactor();
    let half_k_over_d = spec.lambda.k() / (2.0 * spec.distance);
    let xin: Vec<f64> = grid_in.coordinates().collect();
    let mut h = Array2::zeros((grid_out.n(), grid_in.n()));
    let rows: Vec<(usize, &mut [Complex64])> = h
        .outer_iter_mut()
        .map(|r| r.into_slice().expect("row-major layout"))
        .enumerate()
        .collect();
    rows.into_par_iter().for_each(|(m, row)| {
        let xm = grid_out.coordinate(m);
        for (hv, &xi) in row.iter_mut().zip(&xin) {
            let u = xm - xi;
            *hv = pref * Complex64::from_polar(1.0, half_k_over_d * u * u);
        }
    });
    Ok(TransferKernel {
        grid_in,
        grid_out,
        data: KernelData::Dense(h),
    })
}

/// `out_m = sum_i h[m,i] f_i * pitch_in`.
pub fn apply_kernel(k: &TransferKernel, f: &ComplexField) -> Result<ComplexField> {
    if f.grid() != k.grid_in {
        return Err(SimError::config(
            "field grid does not match the kernel input plane",
        ));
    }
    let p = k.grid_in.pitch();
    let amp = match &k.data {
        KernelData::Diagonal(d) => f.amp().iter().zip(d).map(|(a, di)| a * di * p).collect(),
        KernelData::Dense(h) => {
            let mut out = vec![Complex64::ZERO; k.grid_out.n()];
            out.par_iter_mut().enumerate().for_each(|(m, o)| {
                let row = h.row(m);
                let row = row.as_slice().expect("row-major layout");
                let mut acc = Complex64::ZERO;
                for (hv, a) in row.iter().zip(f.amp()) {
                    acc += hv * a;
                }
                *o = acc * p;
            });
            out
        }
    };
    ComplexField::new(k.grid_out, amp)
}

/// Cascade composition `h = h2 . h1 * pitch_mid`, the matrix realization of
/// chaining two systems through their shared plane.
pub fn compose(k2: &TransferKernel, k1: &TransferKernel) -> Result<TransferKernel> {
    if k1.grid_out != k2.grid_in {
        return Err(SimError::config(
            "cascade planes do not match between the two kernels",
        ));
    }
    let p = k1.grid_out.pitch();
    let data = match (&k2.data, &k1.data) {
        (KernelData::Diagonal(d2), KernelData::Diagonal(d1)) => {
            KernelData::Diagonal(d2.iter().zip(d1).map(|(a, b)| a * b * p).collect())
        }
        (KernelData::Dense(h2), KernelData::Diagonal(d1)) => {
            // scale columns of h2
            let mut h = h2.clone();
            h.outer_iter_mut().for_each(|mut row| {
                for (v, d) in row.iter_mut().zip(d1) {
                    *v *= d * p;
                }
            });
            KernelData::Dense(h)
        }
        (KernelData::Diagonal(d2), KernelData::Dense(h1)) => {
            // scale rows of h1
            let mut h = h1.clone();
            for (mut row, d) in h.outer_iter_mut().zip(d2) {
                let s = d * p;
                for v in row.iter_mut() {
                    *v *= s;
                }
            }
            KernelData::Dense(h)
        }
        (KernelData::Dense(h2), KernelData::Dense(h1)) => {
            let (no, nmid) = (k2.grid_out.n(), k2.grid_in.n());
            let ni = k1.grid_in.n();
            let mut h = Array2::zeros((no, ni));
            let rows: Vec<(usize, &mut [Complex64])> = h
                .outer_iter_mut()
                .map(|r| r.into_slice().expect("row-major layout"))
                .enumerate()
                .collect();
            rows.into_par_iter().for_each(|(m, out_row)| {
                for kk in 0..nmid {
                    let c = h2[[m, kk]] * p;
                    let src = h1.row(kk);
                    let src = src.as_slice().expect("row-major layout");
                    axpy(out_row, c, src);
                }
            });
            KernelData::Dense(h)
        }
    };
    Ok(TransferKernel {
        grid_in: k1.grid_in,
        grid_out: k2.grid_out,
        data,
    })
}

#[inline]
fn axpy(out: &mut [Complex64], c: Complex64, src: &[Complex64]) {
    for (o, s) in out.iter_mut().zip(src) {
        *o += c * s;
    }
}

/// Fast Fresnel propagation onto an explicit output grid via the chirp-z
/// factorization. Evaluates the same quadrature sum as
/// `apply_kernel(fresnel_kernel(..))` to FFT round-off.
pub fn apply_fresnel_fast(
    spec: &FresnelSpec,
    f: &ComplexField,
    grid_out: Grid1D,
) -> Result<ComplexField> {
    fresnel_plan(spec, f.grid(), grid_out)?.apply(f)
}

/// Reusable chirp-z plan for one hop (build once, apply to many fields).
pub fn fresnel_plan(spec: &FresnelSpec, grid_in: Grid1D, grid_out: Grid1D) -> Result<CztPlan> {
    spec.check_sampling(grid_in, grid_out)?;
    let k_over_d = spec.lambda.k() / spec.distance;
    Ok(CztPlan::new(
        grid_in,
        grid_out,
        k_over_d,
        spec.prefactor() * grid_in.pitch(),
    ))
}
