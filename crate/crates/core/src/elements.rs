//! Reflective pure phase objects (micro-mirror array model) and slit windows.

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::grid::{ComplexField, Grid1D, Wavelength};

/// Pure phase object: unimodular reflectance `aperture * exp(i*theta)` per
/// sample. Phases are stored unwrapped; only `exp(i*theta)` enters the
/// physics.
#[derive(Debug, Clone)]
pub struct PhaseObject {
    grid: Grid1D,
    theta: Vec<f64>,
    aperture: Vec<bool>,
}

impl PhaseObject {
    pub fn new(grid: Grid1D, theta: Vec<f64>, aperture: Vec<bool>) -> Result<Self> {
        if theta.len() != grid.n() || aperture.len() != grid.n() {
            return Err(SimError::config(
                "phase object arrays must match the grid length",
            ));
        }
        Ok(PhaseObject {
            grid,
            theta,
            aperture,
        })
    }

    /// Fully reflective object with zero phase everywhere.
    pub fn flat(grid: Grid1D) -> Self {
        PhaseObject {
            grid,
            theta: vec![0.0; grid.n()],
            aperture: vec![true; grid.n()],
        }
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn aperture(&self) -> &[bool] {
        &self.aperture
    }

    /// Complex reflectance per sample, `aperture_i * exp(i*theta_i)`.
    pub fn reflectance(&self) -> Vec<Complex64> {
        self.theta
            .iter()
            .zip(&self.aperture)
            .map(|(&t, &a)| {
                if a {
                    Complex64::from_polar(1.0, t)
                } else {
                    Complex64::ZERO
                }
            })
            .collect()
    }
}

/// Micro-mirror array: `n_columns` adjacent columns of width `column_width`,
/// centered on the grid. Pulling a column down a distance `d` imparts phase
/// `2*pi*(2d/lambda)` on reflection (double traversal of the gap).
#[derive(Debug, Clone)]
pub struct MirrorArraySpec {
    pub n_columns: usize,
    pub column_width: f64,
    pub pull_depths: Vec<f64>,
    pub lambda: Wavelength,
}

impl MirrorArraySpec {
    /// Reflection phase for a pull depth, `4*pi*d/lambda`.
    pub fn phase_for_depth(&self, depth: f64) -> f64 {
        2.0 * std::f64::consts::TAU * depth / self.lambda.lambda()
    }
}

/// Column-aligned construction: each grid sample inside the array span gets
/// the phase of the column it falls in; column edges snap to the sample
/// lattice.
pub fn build_phase_object(spec: &MirrorArraySpec, grid: Grid1D) -> Result<PhaseObject> {
    if spec.n_columns == 0 {
        return Err(SimError::config("mirror array needs at least one column"));
    }
    if spec.column_width.is_nan() || spec.column_width <= 0.0 {
        return Err(SimError::config("mirror column width must be positive"));
    }
    if spec.pull_depths.len() != spec.n_columns {
        return Err(SimError::config(format!(
            "mirror array has {} columns but {} pull depths",
            spec.n_columns,
            spec.pull_depths.len()
        )));
    }
    if let Some(&d) = spec.pull_depths.iter().find(|&&d| d < 0.0) {
        return Err(SimError::config(format!(
            "pull depths must be non-negative, got {d}"
        )));
    }
    let span = spec.n_columns as f64 * spec.column_width;
    if grid.extent() < span {
        return Err(SimError::config(format!(
            "object span {span:.3e} m exceeds grid extent {:.3e} m",
            grid.extent()
        )));
    }
    if grid.pitch() > spec.column_width / 8.0 {
        return Err(SimError::config(format!(
            "grid pitch {:.3e} m under-resolves {:.3e} m columns (need pitch <= width/8)",
            grid.pitch(),
            spec.column_width
        )));
    }
    let left = grid.center() - span / 2.0;
    let mut theta = vec![0.0; grid.n()];
    let mut aperture = vec![false; grid.n()];
    for (i, x) in grid.coordinates().enumerate() {
        let j = ((x - left) / spec.column_width).floor();
        if j >= 0.0 && (j as usize) < spec.n_columns {
            aperture[i] = true;
            theta[i] = spec.phase_for_depth(spec.pull_depths[j as usize]);
        }
    }
    PhaseObject::new(grid, theta, aperture)
}

/// A pulled strip: `width` wide, centered at `center`, pulled down `depth`.
#[derive(Debug, Clone, Copy)]
pub struct PulledStrip {
    pub center: f64,
    pub width: f64,
    pub depth: f64,
}

/// Strip-centered construction used by the built-in presets: a centered
/// aperture of `aperture_width` with zero phase, plus pulled strips placed by
/// their own centers (independent of any column lattice).
pub fn phase_strip_object(
    grid: Grid1D,
    aperture_width: f64,
    strips: &[PulledStrip],
    lambda: Wavelength,
) -> Result<PhaseObject> {
    if aperture_width.is_nan() || aperture_width <= 0.0 || aperture_width > grid.extent() {
        return Err(SimError::config(format!(
            "aperture width {aperture_width:.3e} m must be positive and fit the grid extent {:.3e} m",
            grid.extent()
        )));
    }
    let mut theta = vec![0.0; grid.n()];
    let mut aperture = vec![false; grid.n()];
    for (i, x) in grid.coordinates().enumerate() {
        if (x - grid.center()).abs() <= aperture_width / 2.0 {
            aperture[i] = true;
            for s in strips {
                if (x - s.center).abs() <= s.width / 2.0 {
                    theta[i] = 2.0 * std::f64::consts::TAU * s.depth / lambda.lambda();
                }
            }
        }
    }
    PhaseObject::new(grid, theta, aperture)
}

/// Multiply a field by the object's complex reflectance.
pub fn apply_object(f: &ComplexField, obj: &PhaseObject) -> Result<ComplexField> {
    if f.grid() != obj.grid() {
        return Err(SimError::config(
            "field and phase object live on different grids",
        ));
    }
    let r = obj.reflectance();
    let amp = f.amp().iter().zip(&r).map(|(a, ri)| a * ri).collect();
    ComplexField::new(f.grid(), amp)
}

/// Slit / pinhole window on a detector plane.
#[derive(Debug, Clone, Copy)]
pub struct SlitWindow {
    pub center: f64,
    pub width: f64,
}

impl SlitWindow {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if width.is_nan() || width <= 0.0 {
            return Err(SimError::config(format!(
                "slit width must be positive, got {width}"
            )));
        }
        Ok(SlitWindow { center, width })
    }
}

/// Boolean mask of the samples inside the window, `|x_i - center| <= width/2`.
pub fn window_mask(grid: Grid1D, w: &SlitWindow) -> Result<Vec<bool>> {
    let mask: Vec<bool> = grid
        .coordinates()
        .map(|x| (x - w.center).abs() <= w.width / 2.0)
        .collect();
    if !mask.iter().any(|&m| m) {
        return Err(SimError::config(format!(
            "window at {:.3e} m (width {:.3e} m) selects no samples on the grid",
            w.center, w.width
        )));
    }
    Ok(mask)
}
