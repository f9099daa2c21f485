//! The coincidence engine: fourth-order coherence map of the two-arm system,
//! pinhole-integrated scans, singles rates, the envelope correction and the
//! advanced-wave identity.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::elements::{window_mask, PhaseObject, SlitWindow};
use crate::error::{Result, SimError};
use crate::grid::{ComplexField, Grid1D};
use crate::propagation::{fresnel_plan, FresnelSpec, TransferKernel};
use crate::source::{BiphotonState, StateForm};

/// Kernels of the two arms, sharing the source plane: `h1` crystal -> D1
/// (free space, object, free space), `h2` crystal -> D2 (free space).
pub struct TwoArmSystem {
    pub h1: TransferKernel,
    pub h2: TransferKernel,
}

impl TwoArmSystem {
    pub fn new(h1: TransferKernel, h2: TransferKernel) -> Result<Self> {
        if h1.grid_in() != h2.grid_in() {
            return Err(SimError::config(
                "arm kernels must share the source plane grid",
            ));
        }
        Ok(TwoArmSystem { h1, h2 })
    }
}

/// Biphoton detection amplitude `A(x1, x2)` and its modulus square, the
/// coincidence rate surface.
pub struct CoincidenceMap {
    grid1: Grid1D,
    grid2: Grid1D,
    amplitude: Array2<Complex64>,
    g2: Array2<f64>,
}

impl CoincidenceMap {
    fn from_amplitude(grid1: Grid1D, grid2: Grid1D, amplitude: Array2<Complex64>) -> Self {
        let g2 = amplitude.mapv(|a| a.norm_sqr());
        CoincidenceMap {
            grid1,
            grid2,
            amplitude,
            g2,
        }
    }

    pub fn grid1(&self) -> Grid1D {
        self.grid1
    }

    pub fn grid2(&self) -> Grid1D {
        self.grid2
    }

    pub fn amplitude(&self) -> &Array2<Complex64> {
        &self.amplitude
    }

    pub fn g2(&self) -> &Array2<f64> {
        &self.g2
    }

    /// Total `sum g2 * pitch1 * pitch2`.
    pub fn total(&self) -> f64 {
        self.g2.iter().sum::<f64>() * self.grid1.pitch() * self.grid2.pitch()
    }
}

fn dense_or_owned(k: &TransferKernel) -> std::borrow::Cow<'_, Array2<Complex64>> {
    match k.dense_rows() {
        Some(h) => std::borrow::Cow::Borrowed(h),
        None => std::borrow::Cow::Owned(k.to_dense()),
    }
}

/// `A = H1 . Phi . H2^T * pitch^2`, the double-quadrature realization of the
/// coincidence amplitude. Output rows are computed in parallel with a fixed
/// per-row summation order, so results do not depend on the worker count.
pub fn coincidence_amplitude(state: &BiphotonState, sys: &TwoArmSystem) -> Result<CoincidenceMap> {
    let gs = state.grid();
    if sys.h1.grid_in() != gs {
        return Err(SimError::config(
            "system source plane does not match the state grid",
        ));
    }
    let (g1, g2) = (sys.h1.grid_out(), sys.h2.grid_out());
    let h1 = dense_or_owned(&sys.h1);
    let h2 = dense_or_owned(&sys.h2);
    let n = gs.n();
    let p2 = gs.pitch() * gs.pitch();
    let (n1, n2) = (g1.n(), g2.n());

    let amp = match state.form() {
        StateForm::DiagonalThinCrystal => {
            let d = state.diagonal().expect("diagonal form");
            let w: Vec<Complex64> = d.iter().map(|v| v * p2).collect();
            let mut a = Array2::zeros((n1, n2));
            let rows: Vec<(usize, &mut [Complex64])> = a
                .outer_iter_mut()
                .map(|r| r.into_slice().expect("row-major layout"))
                .enumerate()
                .collect();
            rows.into_par_iter().for_each(|(i, out)| {
                let r1 = h1.row(i);
                let r1 = r1.as_slice().expect("row-major layout");
                let scaled: Vec<Complex64> = r1.iter().zip(&w).map(|(h, wi)| h * wi).collect();
                for (j, o) in out.iter_mut().enumerate() {
                    let r2 = h2.row(j);
                    let r2 = r2.as_slice().expect("row-major layout");
                    let mut acc = Complex64::ZERO;
                    for (s, hv) in scaled.iter().zip(r2) {
                        acc += s * hv;
                    }
                    *o = acc;
                }
            });
            a
        }
        StateForm::Full => {
            let phi = state.full_matrix().expect("full form");
            // t = H1 . Phi, then A = t . H2^T * pitch^2
            let mut t = Array2::<Complex64>::zeros((n1, n));
            let rows: Vec<(usize, &mut [Complex64])> = t
                .outer_iter_mut()
                .map(|r| r.into_slice().expect("row-major layout"))
                .enumerate()
                .collect();
            rows.into_par_iter().for_each(|(i, out)| {
                let r1 = h1.row(i);
                let r1 = r1.as_slice().expect("row-major layout");
                for (x, &c) in r1.iter().enumerate() {
                    if c != Complex64::ZERO {
                        let src = phi.row(x);
                        let src = src.as_slice().expect("row-major layout");
                        for (o, s) in out.iter_mut().zip(src) {
                            *o += c * s;
                        }
                    }
                }
            });
            let mut a = Array2::zeros((n1, n2));
            let rows: Vec<(usize, &mut [Complex64])> = a
                .outer_iter_mut()
                .map(|r| r.into_slice().expect("row-major layout"))
                .enumerate()
                .collect();
            rows.into_par_iter().for_each(|(i, out)| {
                let ti = t.row(i);
                let ti = ti.as_slice().expect("row-major layout");
                for (j, o) in out.iter_mut().enumerate() {
                    let r2 = h2.row(j);
                    let r2 = r2.as_slice().expect("row-major layout");
                    let mut acc = Complex64::ZERO;
                    for (u, v) in ti.iter().zip(r2) {
                        acc += u * v;
                    }
                    *o = acc * p2;
                }
            });
            a
        }
    };
    Ok(CoincidenceMap::from_amplitude(g1, g2, amp))
}

/// Free-space hops and the object of the probe arm, for the fast path.
pub struct ProbeArmSpec {
    pub to_object: FresnelSpec,
    pub object: PhaseObject,
    pub to_detector: FresnelSpec,
    pub detector_grid: Grid1D,
}

/// Fast-path equivalent of [`coincidence_amplitude`]: every hop is evaluated
/// with the chirp-z transform instead of explicit kernel matrices. Agrees
/// with the direct route to round-off; the direct route is the oracle.
pub fn coincidence_amplitude_fast(
    state: &BiphotonState,
    probe: &ProbeArmSpec,
    reference: &FresnelSpec,
    reference_grid: Grid1D,
) -> Result<CoincidenceMap> {
    let gs = state.grid();
    if probe.object.grid() != gs {
        return Err(SimError::config(
            "fast path expects the object sampled on the source grid",
        ));
    }
    let g1 = probe.detector_grid;
    let g2 = reference_grid;
    let refl = probe.object.reflectance();
    let fwd2 = fresnel_plan(reference, gs, g2)?;

    let amp = match state.form() {
        StateForm::DiagonalThinCrystal => {
            let d = state.diagonal().expect("diagonal form");
            // advanced-wave sweep: one impulse per D1 sample, backward
            // through the probe arm, reflect on the state diagonal, forward
            // through the reference arm
            let back_b = fresnel_plan(&probe.to_detector, g1, gs)?;
            let back_a = fresnel_plan(&probe.to_object, gs, gs)?;
            let p1 = g1.pitch();
            let ps = gs.pitch();
            let mut a = Array2::zeros((g1.n(), g2.n()));
            let rows: Vec<(usize, &mut [Complex64])> = a
                .outer_iter_mut()
                .map(|r| r.into_slice().expect("row-major layout"))
                .enumerate()
                .collect();
            rows.into_par_iter()
                .try_for_each(|(i, out)| -> Result<()> {
                    let mut imp = ComplexField::zeros(g1);
                    imp.amp_mut()[i] = Complex64::new(1.0 / p1, 0.0);
                    let at_object = back_b.apply(&imp)?;
                    let reflected = ComplexField::new(
                        gs,
                        at_object
                            .amp()
                            .iter()
                            .zip(&refl)
                            .map(|(v, r)| v * r)
                            .collect(),
                    )?;
                    let at_source = back_a.apply(&reflected)?;
                    let weighted = ComplexField::new(
                        gs,
                        at_source
                            .amp()
                            .iter()
                            .zip(d)
                            .map(|(v, phi)| v * phi * ps)
                            .collect(),
                    )?;
                    let row = fwd2.apply(&weighted)?;
                    out.copy_from_slice(row.amp());
                    Ok(())
                })?;
            a
        }
        StateForm::Full => {
            let phi = state.full_matrix().expect("full form");
            let n = gs.n();
            // b[x, j] = sum_x' phi[x, x'] h2[j, x'] pitch
            let mut b = Array2::<Complex64>::zeros((n, g2.n()));
            let rows: Vec<(usize, &mut [Complex64])> = b
                .outer_iter_mut()
                .map(|r| r.into_slice().expect("row-major layout"))
                .enumerate()
                .collect();
            rows.into_par_iter()
                .try_for_each(|(x, out)| -> Result<()> {
                    let src = phi.row(x);
                    let f = ComplexField::new(gs, src.to_vec())?;
                    let row = fwd2.apply(&f)?;
                    out.copy_from_slice(row.amp());
                    Ok(())
                })?;
            // A[:, j] = probe-arm forward application of b[:, j]
            let fwd_a = fresnel_plan(&probe.to_object, gs, gs)?;
            let fwd_b = fresnel_plan(&probe.to_detector, gs, g1)?;
            let cols: Vec<Vec<Complex64>> = (0..g2.n())
                .into_par_iter()
                .map(|j| -> Result<Vec<Complex64>> {
                    let v: Vec<Complex64> = (0..n).map(|x| b[[x, j]]).collect();
                    let f = ComplexField::new(gs, v)?;
                    let at_object = fwd_a.apply(&f)?;
                    let reflected = ComplexField::new(
                        gs,
                        at_object
                            .amp()
                            .iter()
                            .zip(&refl)
                            .map(|(v, r)| v * r)
                            .collect(),
                    )?;
                    let at_d1 = fwd_b.apply(&reflected)?;
                    Ok(at_d1.amp().to_vec())
                })
                .collect::<Result<Vec<_>>>()?;
            let mut a = Array2::zeros((g1.n(), g2.n()));
            for (j, col) in cols.iter().enumerate() {
                for (i, &v) in col.iter().enumerate() {
                    a[[i, j]] = v;
                }
            }
            a
        }
    };
    Ok(CoincidenceMap::from_amplitude(g1, g2, amp))
}

/// Scan of the reference detector: `C(x2)` on the native D2 lattice.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub x2: Vec<f64>,
    /// P1-integrated, P2-convolved coincidence rate.
    pub coincidence: Vec<f64>,
    pub singles_d2: Vec<f64>,
    /// Envelope-corrected coincidence; equals `coincidence` until
    /// [`envelope_correct`] is applied.
    pub corrected: Vec<f64>,
}

/// Integrate `g2` over the fixed window P1 and convolve along `x2` with the
/// discrete unit-mass rectangle of the scanning window P2.
pub fn scan_coincidence(
    map: &CoincidenceMap,
    p1: &SlitWindow,
    p2: &SlitWindow,
) -> Result<ScanResult> {
    let mask = window_mask(map.grid1, p1)?;
    let rows: Vec<usize> = mask
        .iter()
        .enumerate()
        .filter_map(|(i, &m)| if m { Some(i) } else { None })
        .collect();
    let p1pitch = map.grid1.pitch();
    let n2 = map.grid2.n();
    let mut raw = vec![0.0; n2];
    for &i in &rows {
        let row = map.g2.row(i);
        let row = row.as_slice().expect("row-major layout");
        for (acc, v) in raw.iter_mut().zip(row) {
            *acc += v;
        }
    }
    for v in raw.iter_mut() {
        *v *= p1pitch;
    }

    if p2.width.is_nan() || p2.width <= 0.0 {
        return Err(SimError::config("P2 window width must be positive"));
    }
    let kmax = ((p2.width / 2.0) / map.grid2.pitch() + 1e-12).floor() as i64;
    let taps = 2 * kmax + 1;
    let w = 1.0 / taps as f64;
    let coincidence: Vec<f64> = (0..n2 as i64)
        .map(|j| {
            let mut acc = 0.0;
            for k in -kmax..=kmax {
                let jj = j + k;
                if jj >= 0 && (jj as usize) < n2 {
                    acc += raw[jj as usize] * w;
                }
            }
            acc
        })
        .collect();

    let singles_d2 = singles_rate(map, Detector::D2);
    Ok(ScanResult {
        x2: map.grid2.coordinates().collect(),
        corrected: coincidence.clone(),
        coincidence,
        singles_d2,
    })
}

/// Which detector plane a singles profile belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    D1,
    D2,
}

/// Marginal of the coincidence surface over the opposite detector grid.
pub fn singles_rate(map: &CoincidenceMap, at: Detector) -> Vec<f64> {
    match at {
        Detector::D1 => {
            let p = map.grid2.pitch();
            map.g2
                .outer_iter()
                .map(|row| row.iter().sum::<f64>() * p)
                .collect()
        }
        Detector::D2 => {
            let p = map.grid1.pitch();
            let mut s = vec![0.0; map.grid2.n()];
            for row in map.g2.outer_iter() {
                let row = row.as_slice().expect("row-major layout");
                for (acc, v) in s.iter_mut().zip(row) {
                    *acc += v;
                }
            }
            for v in s.iter_mut() {
                *v *= p;
            }
            s
        }
    }
}

/// Far-field singles profile of the reference arm computed from the reduced
/// state (complete trace over the probe arm), so it is independent of the
/// object by construction. This is the envelope source.
pub fn reference_singles(
    state: &BiphotonState,
    reference: &FresnelSpec,
    grid2: Grid1D,
) -> Result<Vec<f64>> {
    let gs = state.grid();
    let plan = fresnel_plan(reference, gs, grid2)?;
    let p3 = gs.pitch().powi(3);
    match state.form() {
        StateForm::DiagonalThinCrystal => {
            let d = state.diagonal().expect("diagonal form");
            // each crystal sample radiates independently
            let mut s = vec![0.0; grid2.n()];
            // |h2[j,x]|^2 is 1/(lambda d) for the Fresnel kernel; use the
            // plan on basis rows to stay convention-proof
            let rows: Vec<Vec<f64>> = (0..gs.n())
                .into_par_iter()
                .map(|x| -> Result<Vec<f64>> {
                    if d[x] == Complex64::ZERO {
                        return Ok(vec![0.0; grid2.n()]);
                    }
                    let mut f = ComplexField::zeros(gs);
                    f.amp_mut()[x] = d[x] / gs.pitch();
                    let out = plan.apply(&f)?;
                    Ok(out.amp().iter().map(|a| a.norm_sqr()).collect())
                })
                .collect::<Result<Vec<_>>>()?;
            for r in rows {
                for (acc, v) in s.iter_mut().zip(r) {
                    *acc += v;
                }
            }
            for v in s.iter_mut() {
                *v *= p3;
            }
            Ok(s)
        }
        StateForm::Full => {
            let phi = state.full_matrix().expect("full form");
            let partial: Vec<Vec<f64>> = (0..gs.n())
                .into_par_iter()
                .map(|x| -> Result<Vec<f64>> {
                    let f = ComplexField::new(gs, phi.row(x).to_vec())?;
                    let out = plan.apply(&f)?;
                    Ok(out.amp().iter().map(|a| a.norm_sqr()).collect())
                })
                .collect::<Result<Vec<_>>>()?;
            let mut s = vec![0.0; grid2.n()];
            for r in partial {
                for (acc, v) in s.iter_mut().zip(r) {
                    *acc += v;
                }
            }
            for v in s.iter_mut() {
                *v *= gs.pitch();
            }
            Ok(s)
        }
    }
}

/// Multiply the scan by a non-negative envelope profile, normalized to its
/// peak.
pub fn envelope_correct(scan: &ScanResult, envelope: &[f64]) -> Result<ScanResult> {
    if envelope.len() != scan.coincidence.len() {
        return Err(SimError::Data(format!(
            "envelope has {} points but the scan has {}",
            envelope.len(),
            scan.coincidence.len()
        )));
    }
    if let Some(v) = envelope.iter().find(|&&v| v < 0.0 || !v.is_finite()) {
        return Err(SimError::Data(format!(
            "envelope values must be non-negative, got {v}"
        )));
    }
    let peak = envelope.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(SimError::Data("envelope is identically zero".to_string()));
    }
    let corrected = scan
        .coincidence
        .iter()
        .zip(envelope)
        .map(|(c, e)| c * e / peak)
        .collect();
    Ok(ScanResult {
        corrected,
        ..scan.clone()
    })
}

/// Advanced-wave image: a point impulse at `x1` propagated backward through
/// the probe arm, reflected on the state diagonal at the crystal, and
/// propagated forward through the reference arm. Its squared modulus equals
/// the corresponding row of the coincidence surface.
pub fn klyshko_image(state: &BiphotonState, sys: &TwoArmSystem, x1: f64) -> Result<ComplexField> {
    let d = state
        .diagonal()
        .ok_or_else(|| SimError::config("advanced-wave image needs the thin-crystal state"))?;
    let g1 = sys.h1.grid_out();
    let gs = state.grid();
    if sys.h1.grid_in() != gs {
        return Err(SimError::config(
            "system source plane does not match the state grid",
        ));
    }
    let i1 = g1.nearest_index(x1);
    if (g1.coordinate(i1) - x1).abs() > 1e-9 * g1.pitch().max(1e-12) {
        return Err(SimError::config(format!(
            "x1 = {x1:.6e} m is not a D1 grid coordinate (nearest sample at {:.6e} m)",
            g1.coordinate(i1)
        )));
    }
    let h1 = dense_or_owned(&sys.h1);
    let h2 = dense_or_owned(&sys.h2);
    // unit-mass impulse, backward through h1^T: with a single-sample impulse
    // of amplitude 1/pitch1 the quadrature collapses to the kernel row
    let backward: Vec<Complex64> = (0..gs.n()).map(|x| h1[[i1, x]]).collect();
    let ps = gs.pitch();
    let reflected: Vec<Complex64> = backward
        .iter()
        .zip(d)
        .map(|(b, phi)| b * phi * ps)
        .collect();
    let g2 = sys.h2.grid_out();
    let mut out = vec![Complex64::ZERO; g2.n()];
    out.par_iter_mut().enumerate().for_each(|(j, o)| {
        let row = h2.row(j);
        let row = row.as_slice().expect("row-major layout");
        let mut acc = Complex64::ZERO;
        for (r, c) in row.iter().zip(&reflected) {
            acc += r * c;
        }
        *o = acc * ps;
    });
    ComplexField::new(g2, out)
}

/// Fraction of the arm-1 singles that falls inside the fixed window P1.
pub fn collection_fraction(s1: &[f64], grid1: Grid1D, p1: &SlitWindow) -> Result<f64> {
    if s1.len() != grid1.n() {
        return Err(SimError::config(
            "singles profile length does not match the D1 grid",
        ));
    }
    let mask = window_mask(grid1, p1)?;
    let total: f64 = s1.iter().sum();
    if total <= 0.0 {
        return Ok(0.0);
    }
    let inside: f64 = s1
        .iter()
        .zip(&mask)
        .filter(|(_, &m)| m)
        .map(|(v, _)| v)
        .sum();
    Ok(inside / total)
}
