//! Experiment presets, configuration parsing, and end-to-end pipeline runs.

use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

use crate::coincidence::{
    coincidence_amplitude, coincidence_amplitude_fast, collection_fraction, envelope_correct,
    reference_singles, scan_coincidence, singles_rate, CoincidenceMap, Detector, ProbeArmSpec,
    ScanResult, TwoArmSystem,
};
use crate::elements::{
    build_phase_object, phase_strip_object, MirrorArraySpec, PhaseObject, PulledStrip, SlitWindow,
};
use crate::error::{Result, SimError};
use crate::grid::{interp_profile, Grid1D, Wavelength};
use crate::propagation::{compose, fresnel_kernel, object_kernel, FresnelSpec};
use crate::source::{build_full_state, build_thin_crystal_state, PumpProfile, SourceSpec};

/// Which phase distribution the micro-mirror array implements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectKind {
    /// Uniform phase zero over the full aperture.
    Flat,
    /// One column-width strip of the pi pull depth, centered.
    PhaseSlit,
    /// Two pi strips separated by one zero strip, centered.
    DoublePhaseSlit,
    /// Column-aligned array with explicit pull depths.
    Custom { depths: Vec<f64> },
}

/// Grid parameters: the source/object plane lattice and the detector plane
/// lattices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub source_n: usize,
    pub source_pitch: f64,
    pub detector_n: usize,
    pub detector_halfwidth: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            source_n: 2048,
            source_pitch: 4e-6,
            detector_n: 1024,
            detector_halfwidth: 8e-3,
        }
    }
}

/// Envelope correction source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeConfig {
    /// No correction; the corrected column equals the raw column.
    None,
    /// Far-field reference singles of the full source model.
    FullModel { waist: f64 },
    /// Two-column CSV file `x2_m,weight`, linearly interpolated.
    File(String),
}

/// Scan lattice for the emitted profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            min: -8e-3,
            max: 8e-3,
            step: 1e-4,
        }
    }
}

/// Full scenario description. Defaults reproduce the reference geometry:
/// degenerate 812 nm pairs from a 406 nm pump, d_a = 1.17 m, d_b = 1.98 m,
/// d_2 = 3.96 m, a 12-column 300 um mirror array and 1.4 mm slits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub lambda: f64,
    pub lambda_pump: f64,
    pub d_a: f64,
    pub d_b: f64,
    pub d_2: f64,
    pub crystal_length: f64,
    pub object: ObjectKind,
    pub n_columns: usize,
    pub column_width: f64,
    pub pull_depth_pi: f64,
    pub p1_width: f64,
    pub p1_center: f64,
    pub p2_width: f64,
    pub grid: GridConfig,
    /// Illuminated crystal extent for the thin-crystal state; 0 means the
    /// full source grid extent.
    pub pump_aperture: f64,
    pub envelope: EnvelopeConfig,
    pub scan: ScanConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            lambda: 812e-9,
            lambda_pump: 406e-9,
            d_a: 1.17,
            d_b: 1.98,
            d_2: 3.96,
            crystal_length: 1.5e-3,
            object: ObjectKind::Flat,
            n_columns: 12,
            column_width: 300e-6,
            pull_depth_pi: 203e-9,
            p1_width: 1.4e-3,
            p1_center: 0.0,
            p2_width: 1.4e-3,
            grid: GridConfig::default(),
            pump_aperture: 0.0,
            envelope: EnvelopeConfig::None,
            scan: ScanConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// Validate invariants; returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        for (name, v) in [
            ("lambda", self.lambda),
            ("lambda_pump", self.lambda_pump),
            ("d_a", self.d_a),
            ("d_b", self.d_b),
            ("d_2", self.d_2),
            ("column_width", self.column_width),
            ("p1_width", self.p1_width),
            ("p2_width", self.p2_width),
        ] {
            if v <= 0.0 || !v.is_finite() {
                return Err(SimError::config(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.crystal_length < 0.0 || self.pump_aperture < 0.0 {
            return Err(SimError::config(
                "crystal_length and pump_aperture must be non-negative",
            ));
        }
        if self.n_columns == 0 {
            return Err(SimError::config("n_columns must be at least 1"));
        }
        if (self.lambda_pump - self.lambda / 2.0).abs() > 1e-12 * self.lambda {
            warnings.push(format!(
                "lambda_pump = {:.4e} m is not the degenerate value lambda/2 = {:.4e} m",
                self.lambda_pump,
                self.lambda / 2.0
            ));
        }
        if let ObjectKind::Custom { depths } = &self.object {
            if depths.len() != self.n_columns {
                return Err(SimError::config(format!(
                    "custom object has {} depths but n_columns = {}",
                    depths.len(),
                    self.n_columns
                )));
            }
        }
        if self.scan.step.is_nan() || self.scan.step <= 0.0 || self.scan.min >= self.scan.max {
            return Err(SimError::config(
                "scan range must satisfy min < max with positive step",
            ));
        }
        if let EnvelopeConfig::FullModel { waist } = self.envelope {
            if waist.is_nan() || waist <= 0.0 {
                return Err(SimError::config(format!(
                    "envelope waist must be positive, got {waist}"
                )));
            }
        }
        Ok(warnings)
    }

    pub fn source_grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.grid.source_n, self.grid.source_pitch, 0.0)
    }

    pub fn detector_grid(&self) -> Result<Grid1D> {
        Grid1D::spanning(self.grid.detector_n, self.grid.detector_halfwidth)
    }

    /// Build the phase object for this scenario on the source grid.
    pub fn build_object(&self, grid: Grid1D) -> Result<PhaseObject> {
        let lambda = Wavelength::new(self.lambda)?;
        let aperture = self.n_columns as f64 * self.column_width;
        let w = self.column_width;
        let d = self.pull_depth_pi;
        match &self.object {
            ObjectKind::Flat => phase_strip_object(grid, aperture, &[], lambda),
            ObjectKind::PhaseSlit => phase_strip_object(
                grid,
                aperture,
                &[PulledStrip {
                    center: 0.0,
                    width: w,
                    depth: d,
                }],
                lambda,
            ),
            ObjectKind::DoublePhaseSlit => phase_strip_object(
                grid,
                aperture,
                &[
                    PulledStrip {
                        center: -w,
                        width: w,
                        depth: d,
                    },
                    PulledStrip {
                        center: w,
                        width: w,
                        depth: d,
                    },
                ],
                lambda,
            ),
            ObjectKind::Custom { depths } => build_phase_object(
                &MirrorArraySpec {
                    n_columns: self.n_columns,
                    column_width: w,
                    pull_depths: depths.clone(),
                    lambda,
                },
                grid,
            ),
        }
    }

    /// Scan lattice coordinates, ascending, `min` to at most `max`.
    pub fn scan_lattice(&self) -> Vec<f64> {
        let k = ((self.scan.max - self.scan.min) / self.scan.step + 1e-9).floor() as usize;
        (0..=k)
            .map(|i| self.scan.min + i as f64 * self.scan.step)
            .collect()
    }
}

/// Parse a config file. An empty (or whitespace-only) file means all
/// defaults; unknown keys are rejected with their location.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let trimmed = text.trim();
    let effective = if trimmed.is_empty() { "{}" } else { trimmed };
    let cfg: ScenarioConfig = serde_json::from_str(effective).map_err(|e| {
        SimError::config(format!(
            "config parse failed at line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Which coincidence-engine route a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Chirp-z transforms for every hop (default).
    Fast,
    /// Explicit direct-quadrature kernel matrices (the oracle).
    Oracle,
}

/// How emitted rates are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Peak of this run's raw coincidence column is 1.
    SelfPeak,
    /// Peak of the flat-object variant of the same config is 1, so peak
    /// heights are comparable across objects.
    FlatPeak,
}

/// Derived profile metrics, all recomputable from the emitted arrays.
#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub peak_value: f64,
    pub peak_x2: f64,
    pub center_value: f64,
    pub dip_visibility: f64,
    pub dip_half_depth_width: f64,
    pub collection_fraction: f64,
    pub peak_after_collection: f64,
}

/// Everything a scenario run produces.
pub struct RunReport {
    pub config: ScenarioConfig,
    pub mode: RunMode,
    /// Scan-lattice coordinates and the emitted columns.
    pub x2: Vec<f64>,
    pub coincidence: Vec<f64>,
    pub corrected: Vec<f64>,
    pub singles_d2: Vec<f64>,
    /// Arm-1 singles on the D1 grid (not part of the CSV contract).
    pub singles_d1: Vec<f64>,
    pub metrics: Metrics,
    pub warnings: Vec<String>,
    pub wall_ms: u128,
    /// Full coincidence surface, kept when a g2 dump was requested.
    pub g2_dump: Option<CoincidenceMap>,
}

/// Options beyond the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub oracle: bool,
    pub normalize_flat: bool,
    pub keep_g2: bool,
}

fn build_map(cfg: &ScenarioConfig, obj: &PhaseObject, mode: RunMode) -> Result<CoincidenceMap> {
    let lambda = Wavelength::new(cfg.lambda)?;
    let gs = cfg.source_grid()?;
    let gdet = cfg.detector_grid()?;
    let pump_aperture = if cfg.pump_aperture > 0.0 {
        cfg.pump_aperture
    } else {
        gs.extent()
    };
    let state = build_thin_crystal_state(
        &SourceSpec {
            lambda_pump: Wavelength::new(cfg.lambda_pump)?,
            crystal_length: 0.0,
            pump_profile: PumpProfile::PlaneWave,
            pump_aperture,
        },
        gs,
    )?;
    let fa = FresnelSpec::new(cfg.d_a, lambda)?;
    let fb = FresnelSpec::new(cfg.d_b, lambda)?;
    let f2 = FresnelSpec::new(cfg.d_2, lambda)?;
    match mode {
        RunMode::Oracle => {
            let ka = fresnel_kernel(&fa, gs, gs)?;
            let kb = fresnel_kernel(&fb, gs, gdet)?;
            let h1 = compose(&kb, &compose(&object_kernel(obj), &ka)?)?;
            let h2 = fresnel_kernel(&f2, gs, gdet)?;
            coincidence_amplitude(&state, &TwoArmSystem::new(h1, h2)?)
        }
        RunMode::Fast => coincidence_amplitude_fast(
            &state,
            &ProbeArmSpec {
                to_object: fa,
                object: obj.clone(),
                to_detector: fb,
                detector_grid: gdet,
            },
            &f2,
            gdet,
        ),
    }
}

fn envelope_on_scan(cfg: &ScenarioConfig, scan_x: &[f64]) -> Result<Option<Vec<f64>>> {
    match &cfg.envelope {
        EnvelopeConfig::None => Ok(None),
        EnvelopeConfig::FullModel { waist } => {
            let gs = cfg.source_grid()?;
            let gdet = cfg.detector_grid()?;
            let state = build_full_state(
                &SourceSpec {
                    lambda_pump: Wavelength::new(cfg.lambda_pump)?,
                    crystal_length: cfg.crystal_length,
                    pump_profile: PumpProfile::Gaussian { waist: *waist },
                    pump_aperture: gs.extent(),
                },
                gs,
            )?;
            let s2 = reference_singles(
                &state,
                &FresnelSpec::new(cfg.d_2, Wavelength::new(cfg.lambda)?)?,
                gdet,
            )?;
            Ok(Some(
                scan_x
                    .iter()
                    .map(|&x| interp_profile(gdet, &s2, x))
                    .collect(),
            ))
        }
        EnvelopeConfig::File(path) => {
            let text = std::fs::read_to_string(path)?;
            let mut pts: Vec<(f64, f64)> = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let mut parts = line.split(',');
                let x: f64 = parts
                    .next()
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| {
                        SimError::Data(format!("envelope file line {}: bad x value", lineno + 1))
                    })?;
                let wgt: f64 = parts
                    .next()
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| {
                        SimError::Data(format!("envelope file line {}: bad weight", lineno + 1))
                    })?;
                pts.push((x, wgt));
            }
            if pts.len() < 2 {
                return Err(SimError::Data(
                    "envelope file needs at least two points".into(),
                ));
            }
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (lo, hi) = (pts[0].0, pts[pts.len() - 1].0);
            let interp = |x: f64| -> Result<f64> {
                if x < lo || x > hi {
                    return Err(SimError::Data(format!(
                        "scan point {x:.4e} m outside the envelope file range [{lo:.4e}, {hi:.4e}]"
                    )));
                }
                let idx = pts.partition_point(|p| p.0 <= x).min(pts.len() - 1).max(1);
                let (x0, y0) = pts[idx - 1];
                let (x1, y1) = pts[idx];
                if x1 == x0 {
                    return Ok(y0);
                }
                Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
            };
            scan_x
                .iter()
                .map(|&x| interp(x))
                .collect::<Result<Vec<f64>>>()
                .map(Some)
        }
    }
}

fn resample_to_scan(grid: Grid1D, values: &[f64], scan_x: &[f64]) -> Vec<f64> {
    scan_x
        .iter()
        .map(|&x| interp_profile(grid, values, x))
        .collect()
}

/// Linear interpolation of (x2, c) at x = 0, clamping to the nearest end.
fn value_at_zero(x2: &[f64], c: &[f64]) -> f64 {
    if 0.0 <= x2[0] {
        return c[0];
    }
    for i in 0..x2.len() - 1 {
        if x2[i] <= 0.0 && 0.0 <= x2[i + 1] {
            let t = -x2[i] / (x2[i + 1] - x2[i]);
            return c[i] * (1.0 - t) + c[i + 1] * t;
        }
    }
    c[c.len() - 1]
}

/// Profile metrics on a scan lattice: (peak, peak position, value at x2=0,
/// dip visibility, full dip width at half depth).
pub fn profile_metrics(x2: &[f64], c: &[f64]) -> (f64, f64, f64, f64, f64) {
    let mut peak = f64::NEG_INFINITY;
    let mut peak_x = 0.0;
    for (&x, &v) in x2.iter().zip(c) {
        if v > peak {
            peak = v;
            peak_x = x;
        }
    }
    let center = value_at_zero(x2, c);
    let visibility = if peak + center > 0.0 {
        (peak - center) / (peak + center)
    } else {
        0.0
    };

    if peak <= center {
        return (peak, peak_x, center, visibility, 0.0);
    }
    // walk out from the sample nearest zero to the half-depth crossings
    let level = center + (peak - center) / 2.0;
    let i0 = x2
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let cross = |dir: i64| -> f64 {
        let mut i = i0 as i64;
        loop {
            let next = i + dir;
            if next < 0 || next as usize >= c.len() {
                return x2[i as usize];
            }
            if c[next as usize] >= level {
                let (a, b) = (c[i as usize], c[next as usize]);
                let t = if b != a { (level - a) / (b - a) } else { 0.0 };
                return x2[i as usize] + t * (x2[next as usize] - x2[i as usize]);
            }
            i = next;
        }
    };
    let width = (cross(1) - cross(-1)).abs();
    (peak, peak_x, center, visibility, width)
}

/// Run the full pipeline: grids, object, state, kernels, coincidence map,
/// scan, envelope, metrics. Deterministic for a fixed config and mode.
pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunReport> {
    let t0 = Instant::now();
    let mut warnings = cfg.validate()?;
    let mode = if opts.oracle {
        RunMode::Oracle
    } else {
        RunMode::Fast
    };
    let gs = cfg.source_grid()?;
    let gdet = cfg.detector_grid()?;
    let obj = cfg.build_object(gs)?;
    let map = build_map(cfg, &obj, mode)?;

    let p1 = SlitWindow::new(cfg.p1_center, cfg.p1_width)?;
    let p2 = SlitWindow::new(0.0, cfg.p2_width)?;
    let native: ScanResult = scan_coincidence(&map, &p1, &p2)?;
    let singles_d1 = singles_rate(&map, Detector::D1);

    // truncation report: how much light reaches the detector-plane edges
    for (name, profile) in [("D1", &singles_d1), ("D2", &native.singles_d2)] {
        let peak = profile.iter().cloned().fold(0.0, f64::max);
        if peak > 0.0 {
            let edge = profile[0].max(profile[profile.len() - 1]);
            if edge > 1e-6 * peak {
                warnings.push(format!(
                    "{name} plane edge intensity is {:.2e} of peak; the window truncates the beam",
                    edge / peak
                ));
            }
        }
    }

    let scan_x = cfg.scan_lattice();
    let mut coincidence = resample_to_scan(gdet, &native.coincidence, &scan_x);
    let mut corrected = match envelope_on_scan(cfg, &scan_x)? {
        Some(env) => {
            let tmp = ScanResult {
                x2: scan_x.clone(),
                coincidence: coincidence.clone(),
                singles_d2: vec![0.0; scan_x.len()],
                corrected: coincidence.clone(),
            };
            envelope_correct(&tmp, &env)?.corrected
        }
        None => coincidence.clone(),
    };
    let mut singles_d2 = resample_to_scan(gdet, &native.singles_d2, &scan_x);

    // normalization: coincidence columns by the reference peak, singles by
    // its own peak
    let ref_peak = if opts.normalize_flat && cfg.object != ObjectKind::Flat {
        let flat_cfg = ScenarioConfig {
            object: ObjectKind::Flat,
            ..cfg.clone()
        };
        let flat_obj = flat_cfg.build_object(gs)?;
        let flat_map = build_map(&flat_cfg, &flat_obj, mode)?;
        let flat_scan = scan_coincidence(&flat_map, &p1, &p2)?;
        resample_to_scan(gdet, &flat_scan.coincidence, &scan_x)
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    } else {
        coincidence.iter().cloned().fold(0.0, f64::max)
    };
    if ref_peak > 0.0 {
        let s = 1.0 / ref_peak;
        for v in coincidence.iter_mut() {
            *v *= s;
        }
        for v in corrected.iter_mut() {
            *v *= s;
        }
    }
    let s2_peak = singles_d2.iter().cloned().fold(0.0, f64::max);
    if s2_peak > 0.0 {
        let s = 1.0 / s2_peak;
        for v in singles_d2.iter_mut() {
            *v *= s;
        }
    }

    let (peak, peak_x2, center, vis, width) = profile_metrics(&scan_x, &coincidence);
    let frac = collection_fraction(&singles_d1, map.grid1(), &p1)?;
    let metrics = Metrics {
        peak_value: peak,
        peak_x2,
        center_value: center,
        dip_visibility: vis,
        dip_half_depth_width: width,
        collection_fraction: frac,
        peak_after_collection: peak * frac,
    };

    Ok(RunReport {
        config: cfg.clone(),
        mode,
        x2: scan_x,
        coincidence,
        corrected,
        singles_d2,
        singles_d1,
        metrics,
        warnings,
        wall_ms: t0.elapsed().as_millis(),
        g2_dump: if opts.keep_g2 { Some(map) } else { None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.lambda, 812e-9);
        assert_eq!(cfg.d_a, 1.17);
        assert_eq!(cfg.d_b, 1.98);
        assert_eq!(cfg.d_2, 3.96);
        assert_eq!(cfg.p1_width, 1.4e-3);
        assert_eq!(cfg.n_columns, 12);
    }

    #[test]
    fn unknown_keys_rejected_with_location() {
        let err = parse_config(r#"{"lambda": 812e-9, "bogus_key": 1}"#).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        assert!(msg.contains("bogus_key"), "{msg}");
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn object_variants_parse() {
        let cfg = parse_config(r#"{"object": "phase-slit"}"#).unwrap();
        assert_eq!(cfg.object, ObjectKind::PhaseSlit);
        let cfg = parse_config(r#"{"object": "double-phase-slit"}"#).unwrap();
        assert_eq!(cfg.object, ObjectKind::DoublePhaseSlit);
        let cfg =
            parse_config(r#"{"object": {"custom": {"depths": [0,0,0,0,0,203e-9,0,0,0,0,0,0]}}}"#)
                .unwrap();
        assert!(matches!(cfg.object, ObjectKind::Custom { .. }));
        // custom depth count must match n_columns
        assert!(parse_config(r#"{"object": {"custom": {"depths": [1e-9]}}}"#).is_err());
    }

    #[test]
    fn preset_objects_have_expected_shape() {
        let cfg = ScenarioConfig::default();
        let gs = cfg.source_grid().unwrap();
        let flat = cfg.build_object(gs).unwrap();
        let open = flat.aperture().iter().filter(|&&a| a).count();
        assert_eq!(open, 900); // 3.6 mm at 4 um

        let slit_cfg = ScenarioConfig {
            object: ObjectKind::PhaseSlit,
            ..cfg.clone()
        };
        let slit = slit_cfg.build_object(gs).unwrap();
        let pi_samples = slit.theta().iter().filter(|&&t| t > 3.0).count();
        // one 300 um column
        assert!((73..=77).contains(&pi_samples), "{pi_samples}");

        let dbl_cfg = ScenarioConfig {
            object: ObjectKind::DoublePhaseSlit,
            ..cfg
        };
        let dbl = dbl_cfg.build_object(gs).unwrap();
        let pi_samples = dbl.theta().iter().filter(|&&t| t > 3.0).count();
        assert!((148..=154).contains(&pi_samples), "{pi_samples}");
        // center column stays at zero
        let n = gs.n();
        assert_eq!(dbl.theta()[n / 2], 0.0);
    }

    #[test]
    fn envelope_variants_parse() {
        let cfg = parse_config(r#"{"envelope": "none"}"#).unwrap();
        assert_eq!(cfg.envelope, EnvelopeConfig::None);
        let cfg = parse_config(r#"{"envelope": {"full-model": {"waist": 1.5e-3}}}"#).unwrap();
        assert_eq!(cfg.envelope, EnvelopeConfig::FullModel { waist: 1.5e-3 });
        let cfg = parse_config(r#"{"envelope": {"file": "profiles/env.csv"}}"#).unwrap();
        assert_eq!(
            cfg.envelope,
            EnvelopeConfig::File("profiles/env.csv".into())
        );
        assert!(parse_config(r#"{"envelope": {"full-model": {"waist": -1.0}}}"#).is_err());
    }

    #[test]
    fn degenerate_warning_fires() {
        let cfg = parse_config(r#"{"lambda_pump": 500e-9}"#).unwrap();
        let warnings = cfg.validate().unwrap();
        assert!(warnings.iter().any(|w| w.contains("degenerate")));
    }

    #[test]
    fn scan_lattice_default_has_161_points() {
        let cfg = ScenarioConfig::default();
        let xs = cfg.scan_lattice();
        assert_eq!(xs.len(), 161);
        assert_eq!(xs[0], -8e-3);
        assert!((xs[160] - 8e-3).abs() < 1e-12);
        assert!(xs.iter().any(|&x| x.abs() < 1e-15));
    }

    #[test]
    fn metrics_on_synthetic_profile() {
        // symmetric double hump with a central dip
        let x2: Vec<f64> = (-50..=50).map(|i| i as f64 * 1e-4).collect();
        let c: Vec<f64> = x2
            .iter()
            .map(|&x| {
                let u = x / 1e-3;
                (-(u.abs() - 2.0).powi(2)).exp()
            })
            .collect();
        let (peak, peak_x, center, vis, width) = profile_metrics(&x2, &c);
        assert!((peak - 1.0).abs() < 1e-6);
        assert!((peak_x.abs() - 2e-3).abs() < 1.1e-4);
        assert!((center - (-4.0f64).exp()).abs() < 1e-6);
        assert!(vis > 0.9);
        assert!(width > 1e-3 && width < 4e-3);
    }
}
