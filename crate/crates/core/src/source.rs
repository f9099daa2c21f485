//! Two-photon state construction: the thin-crystal delta-correlated limit and
//! the full model with pump profile and sinc phase matching.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::error::{Result, SimError};
use crate::grid::{Grid1D, Wavelength};

/// Transverse pump field profile at the crystal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PumpProfile {
    PlaneWave,
    /// Field `exp(-y^2 / waist^2)` (1/e^2 intensity radius = waist).
    Gaussian {
        waist: f64,
    },
}

/// Physical parameters of the down-conversion source.
#[derive(Debug, Clone, Copy)]
pub struct SourceSpec {
    pub lambda_pump: Wavelength,
    /// Crystal thickness `l` (metres, >= 0; 0 is the ideal thin crystal).
    pub crystal_length: f64,
    pub pump_profile: PumpProfile,
    /// Illuminated extent of the crystal for the thin-crystal form.
    pub pump_aperture: f64,
}

/// Longitudinal momentum mismatch of pump, probe and reference in the
/// degenerate collinear paraxial expansion: `delta = (q1 - q2)^2 / (2 k_pump)`.
pub fn longitudinal_mismatch(q1: f64, q2: f64, k_pump: f64) -> f64 {
    let dq = q1 - q2;
    dq * dq / (2.0 * k_pump)
}

fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        let pu = PI * u;
        pu.sin() / pu
    }
}

/// Phase-matching amplitude `sinc((l/2pi) delta) * exp(-i (l/2) delta)` with
/// `sinc(u) = sin(pi u)/(pi u)`, i.e. `sin(l delta/2)/(l delta/2)` times the
/// phase — the standard thick-crystal result for collinear degenerate
/// down-conversion.
pub fn phase_matching(q1: f64, q2: f64, spec: &SourceSpec) -> Complex64 {
    let delta = longitudinal_mismatch(q1, q2, spec.lambda_pump.k());
    let l = spec.crystal_length;
    Complex64::from_polar(1.0, -0.5 * l * delta) * sinc(l / (2.0 * PI) * delta)
}

/// Which representation a state uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateForm {
    DiagonalThinCrystal,
    Full,
}

enum StateData {
    Diagonal(Vec<Complex64>),
    Full(Array2<Complex64>),
}

/// Biphoton state function `phi(x, x')` on a shared grid, normalized so that
/// `sum |phi|^2 * pitch^2 = 1`.
pub struct BiphotonState {
    grid: Grid1D,
    data: StateData,
}

impl BiphotonState {
    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn form(&self) -> StateForm {
        match self.data {
            StateData::Diagonal(_) => StateForm::DiagonalThinCrystal,
            StateData::Full(_) => StateForm::Full,
        }
    }

    pub fn phi(&self, i: usize, j: usize) -> Complex64 {
        match &self.data {
            StateData::Diagonal(d) => {
                if i == j {
                    d[i]
                } else {
                    Complex64::ZERO
                }
            }
            StateData::Full(m) => m[[i, j]],
        }
    }

    /// Diagonal entries when the state is in the thin-crystal form.
    pub fn diagonal(&self) -> Option<&[Complex64]> {
        match &self.data {
            StateData::Diagonal(d) => Some(d),
            StateData::Full(_) => None,
        }
    }

    pub fn full_matrix(&self) -> Option<&Array2<Complex64>> {
        match &self.data {
            StateData::Diagonal(_) => None,
            StateData::Full(m) => Some(m),
        }
    }

    /// Discrete normalization `sum |phi|^2 * pitch^2`.
    pub fn norm_sq(&self) -> f64 {
        let p2 = self.grid.pitch() * self.grid.pitch();
        match &self.data {
            StateData::Diagonal(d) => d.iter().map(|v| v.norm_sqr()).sum::<f64>() * p2,
            StateData::Full(m) => m.iter().map(|v| v.norm_sqr()).sum::<f64>() * p2,
        }
    }
}

impl BiphotonState {
    /// Thin-crystal state with an arbitrary diagonal profile (for instance a
    /// structured pump illuminating the crystal). The profile is normalized.
    pub fn from_diagonal(grid: Grid1D, diag: Vec<Complex64>) -> Result<Self> {
        if diag.len() != grid.n() {
            return Err(SimError::config("diagonal length must match the grid"));
        }
        let p2 = grid.pitch() * grid.pitch();
        let total: f64 = diag.iter().map(|v| v.norm_sqr()).sum::<f64>() * p2;
        if total <= 0.0 || !total.is_finite() {
            return Err(SimError::config(
                "state diagonal has vanishing or non-finite norm",
            ));
        }
        let s = 1.0 / total.sqrt();
        let diag = diag.into_iter().map(|v| v * s).collect();
        Ok(BiphotonState {
            grid,
            data: StateData::Diagonal(diag),
        })
    }
}

/// Thin-crystal (`l -> 0`, plane-wave pump) state: perfectly position
/// correlated, `phi[i,i]` constant over the pump aperture and zero outside.
pub fn build_thin_crystal_state(spec: &SourceSpec, grid: Grid1D) -> Result<BiphotonState> {
    if spec.pump_aperture > grid.extent() * (1.0 + 1e-12) {
        return Err(SimError::config(format!(
            "pump aperture {:.3e} m exceeds the grid extent {:.3e} m",
            spec.pump_aperture,
            grid.extent()
        )));
    }
    let inside: Vec<bool> = grid
        .coordinates()
        .map(|x| (x - grid.center()).abs() <= spec.pump_aperture / 2.0)
        .collect();
    let m = inside.iter().filter(|&&b| b).count();
    if m == 0 {
        return Err(SimError::config("pump aperture selects no grid samples"));
    }
    let c = 1.0 / (grid.pitch() * (m as f64).sqrt());
    let diag = inside
        .into_iter()
        .map(|b| {
            if b {
                Complex64::new(c, 0.0)
            } else {
                Complex64::ZERO
            }
        })
        .collect();
    Ok(BiphotonState {
        grid,
        data: StateData::Diagonal(diag),
    })
}

/// Momentum lattice dual to a grid: `q_k = 2 pi (k - n/2) / (n * pitch)`.
pub fn dual_lattice(grid: Grid1D) -> Vec<f64> {
    let n = grid.n() as f64;
    let dq = 2.0 * PI / (n * grid.pitch());
    (0..grid.n()).map(|k| (k as f64 - n / 2.0) * dq).collect()
}

/// Full model: evaluate the phase-matching amplitude on the dual lattice,
/// inverse-transform to position offsets, convolve along the diagonal with
/// the pump profile, normalize.
pub fn build_full_state(spec: &SourceSpec, grid: Grid1D) -> Result<BiphotonState> {
    let waist = match spec.pump_profile {
        PumpProfile::Gaussian { waist } => waist,
        PumpProfile::PlaneWave => return Err(SimError::config(
            "full-model state needs a gaussian pump; use the thin-crystal form for a plane wave",
        )),
    };
    if waist.is_nan() || waist <= 0.0 {
        return Err(SimError::config(format!(
            "pump waist must be positive, got {waist}"
        )));
    }
    if waist > grid.extent() / 3.0 {
        return Err(SimError::config(format!(
            "pump waist {:.3e} m does not fit the grid (need waist <= extent/3 = {:.3e} m)",
            waist,
            grid.extent() / 3.0
        )));
    }
    let n = grid.n();
    let q = dual_lattice(grid);
    let dq = q[1] - q[0];
    // phase of the matching function must be resolved between adjacent
    // lattice points at the corner of the q domain
    let qmax = q[0].abs().max(q[n - 1].abs());
    let corner_step = spec.crystal_length * 2.0 * qmax * dq / spec.lambda_pump.k();
    if corner_step > PI {
        return Err(SimError::numerics(format!(
            "grid too coarse to sample the phase-matching function: corner phase step {corner_step:.3} rad"
        )));
    }

    // (i) matching amplitude on the dual lattice
    let mut xi = Array2::<Complex64>::zeros((n, n));
    for k in 0..n {
        for l in 0..n {
            xi[[k, l]] = phase_matching(q[k], q[l], spec);
        }
    }

    // (ii) inverse transform to integer pitch offsets u_r = r * pitch,
    // r in [-n/2, n/2): separable FFTs plus the half-lattice phase
    // e^{i q_k r p} = e^{2 pi i k r / n} * (-1)^r
    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(n);
    for mut row in xi.outer_iter_mut() {
        let s = row.as_slice_mut().expect("row-major layout");
        ifft.process(s);
    }
    let mut xit = xi.reversed_axes().as_standard_layout().into_owned();
    for mut row in xit.outer_iter_mut() {
        let s = row.as_slice_mut().expect("row-major layout");
        ifft.process(s);
    }
    let xi = xit.reversed_axes().as_standard_layout().into_owned();
    // xi[k_index r mod n, s mod n] now holds sum_kl e^{2pi i (kr+ls)/n}; the
    // centered-offset value needs the (-1)^(r+s) factor and the dq/2pi weights.
    let scale = (dq / (2.0 * PI)) * (dq / (2.0 * PI));
    let offset_value = |r: i64, s: i64| -> Complex64 {
        let half = (n / 2) as i64;
        if r < -half || r >= half || s < -half || s >= half {
            return Complex64::ZERO; // outside the sampled offset window
        }
        let ri = r.rem_euclid(n as i64) as usize;
        let si = s.rem_euclid(n as i64) as usize;
        let sign = if (r + s).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        };
        xi[[ri, si]] * sign * scale
    };

    // (iii) convolve along the diagonal with the sampled pump, one linear
    // convolution per diagonal of phi
    let ep: Vec<f64> = grid
        .coordinates()
        .map(|y| (-y * y / (waist * waist)).exp())
        .collect();
    let nfft = (3 * n).next_power_of_two();
    let fwd = planner.plan_fft_forward(nfft);
    let inv = planner.plan_fft_inverse(nfft);
    let mut ep_hat = vec![Complex64::ZERO; nfft];
    for (i, &e) in ep.iter().enumerate() {
        ep_hat[i] = Complex64::new(e, 0.0);
    }
    fwd.process(&mut ep_hat);

    let mut phi = Array2::<Complex64>::zeros((n, n));
    let half = (n / 2) as i64;
    for delta in -(n as i64 - 1)..=(n as i64 - 1) {
        // xi along this diagonal: t in [t_lo, t_hi] (both offsets in window)
        let t_lo = (-half).max(delta - half);
        let t_hi = (half - 1).min(delta + half - 1);
        if t_lo > t_hi {
            continue;
        }
        let mut buf = vec![Complex64::ZERO; nfft];
        for t in t_lo..=t_hi {
            buf[(t - t_lo) as usize] = offset_value(t, t - delta);
        }
        fwd.process(&mut buf);
        for (b, e) in buf.iter_mut().zip(&ep_hat) {
            *b *= e;
        }
        inv.process(&mut buf);
        let norm = grid.pitch() / nfft as f64;
        // phi[i, i-delta] = sum_m ep[m] xi[(i-m), (i-m)-delta] * pitch,
        // conv index i = m + t  ->  buffer slot i - t_lo
        let i_lo = delta.max(0);
        let i_hi = (n as i64 - 1).min(n as i64 - 1 + delta);
        for i in i_lo..=i_hi {
            let slot = i - t_lo;
            if slot >= 0 && (slot as usize) < nfft {
                phi[[i as usize, (i - delta) as usize]] = buf[slot as usize] * norm;
            }
        }
    }

    // (iv) normalize
    let p2 = grid.pitch() * grid.pitch();
    let total: f64 = phi.iter().map(|v| v.norm_sqr()).sum::<f64>() * p2;
    if total <= 0.0 || !total.is_finite() {
        return Err(SimError::numerics(
            "full state has vanishing or non-finite norm",
        ));
    }
    let s = 1.0 / total.sqrt();
    phi.mapv_inplace(|v| v * s);
    Ok(BiphotonState {
        grid,
        data: StateData::Full(phi),
    })
}
