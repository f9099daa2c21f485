//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Criteria 1-6, 8 and 9 run on the default preset geometry. The two
//! arm-sum identities in criteria 3 and 7 are evaluated with detector grids
//! covering the full field of view of the source sampling (extent =
//! lambda*d/pitch), where the discrete propagation kernel is exactly unitary
//! and the identities' derivation holds; the default +-8 mm windows truncate
//! the scattered light at the percent level and cannot carry a 1e-6 claim.

use std::sync::LazyLock;
use std::time::{Duration, Instant};

use biphoton_imaging::coincidence::{
    coincidence_amplitude, coincidence_amplitude_fast, collection_fraction, klyshko_image,
    scan_coincidence, singles_rate, CoincidenceMap, Detector, ProbeArmSpec, TwoArmSystem,
};
use biphoton_imaging::elements::{PhaseObject, SlitWindow};
use biphoton_imaging::grid::{Grid1D, Wavelength};
use biphoton_imaging::propagation::{
    apply_fresnel_fast, compose, fresnel_kernel, object_kernel, FresnelSpec,
};
use biphoton_imaging::scenario::{profile_metrics, ObjectKind, ScenarioConfig};
use biphoton_imaging::source::{
    build_full_state, build_thin_crystal_state, BiphotonState, PumpProfile, SourceSpec,
};
use biphoton_imaging::ComplexField;

const LAM: f64 = 812e-9;
const D_A: f64 = 1.17;
const D_B: f64 = 1.98;
const D_2: f64 = 3.96;
const APERTURE: f64 = 3.6e-3;
const P_WIDTH: f64 = 1.4e-3;

fn lam() -> Wavelength {
    Wavelength::new(LAM).unwrap()
}

fn cfg_for(object: ObjectKind) -> ScenarioConfig {
    ScenarioConfig {
        object,
        ..ScenarioConfig::default()
    }
}

fn source_grid() -> Grid1D {
    Grid1D::new(2048, 4e-6, 0.0).unwrap()
}

fn detector_grid() -> Grid1D {
    Grid1D::spanning(1024, 8e-3).unwrap()
}

fn thin_state(gs: Grid1D) -> BiphotonState {
    build_thin_crystal_state(
        &SourceSpec {
            lambda_pump: Wavelength::new(406e-9).unwrap(),
            crystal_length: 0.0,
            pump_profile: PumpProfile::PlaneWave,
            pump_aperture: gs.extent(),
        },
        gs,
    )
    .unwrap()
}

fn preset_object(kind: &ObjectKind, gs: Grid1D) -> PhaseObject {
    cfg_for(kind.clone()).build_object(gs).unwrap()
}

fn oracle_system(obj: &PhaseObject, gs: Grid1D, g1: Grid1D, g2: Grid1D) -> TwoArmSystem {
    let fa = fresnel_kernel(&FresnelSpec::new(D_A, lam()).unwrap(), gs, gs).unwrap();
    let fb = fresnel_kernel(&FresnelSpec::new(D_B, lam()).unwrap(), gs, g1).unwrap();
    let h1 = compose(&fb, &compose(&object_kernel(obj), &fa).unwrap()).unwrap();
    let h2 = fresnel_kernel(&FresnelSpec::new(D_2, lam()).unwrap(), gs, g2).unwrap();
    TwoArmSystem::new(h1, h2).unwrap()
}

fn fast_map(obj: &PhaseObject, state: &BiphotonState, g1: Grid1D, g2: Grid1D) -> CoincidenceMap {
    coincidence_amplitude_fast(
        state,
        &ProbeArmSpec {
            to_object: FresnelSpec::new(D_A, lam()).unwrap(),
            object: obj.clone(),
            to_detector: FresnelSpec::new(D_B, lam()).unwrap(),
            detector_grid: g1,
        },
        &FresnelSpec::new(D_2, lam()).unwrap(),
        g2,
    )
    .unwrap()
}

struct Preset {
    name: &'static str,
    kind: ObjectKind,
    sys: TwoArmSystem,
    state: BiphotonState,
    map_oracle: CoincidenceMap,
    map_fast: CoincidenceMap,
    t_oracle: Duration,
    t_fast: Duration,
}

static PRESETS: LazyLock<Vec<Preset>> = LazyLock::new(|| {
    let gs = source_grid();
    let gdet = detector_grid();
    [
        ("flat", ObjectKind::Flat),
        ("phase-slit", ObjectKind::PhaseSlit),
        ("double-phase-slit", ObjectKind::DoublePhaseSlit),
    ]
    .into_iter()
    .map(|(name, kind)| {
        let obj = preset_object(&kind, gs);
        let state = thin_state(gs);
        let t0 = Instant::now();
        let sys = oracle_system(&obj, gs, gdet, gdet);
        let map_oracle = coincidence_amplitude(&state, &sys).unwrap();
        let t_oracle = t0.elapsed();
        let t0 = Instant::now();
        let map_fast = fast_map(&obj, &state, gdet, gdet);
        let t_fast = t0.elapsed();
        Preset {
            name,
            kind,
            sys,
            state,
            map_oracle,
            map_fast,
            t_oracle,
            t_fast,
        }
    })
    .collect()
});

/// Maps with the D1 grid covering the full source-sampling field of view
/// (exactly unitary probe-arm sum), keyed by object, for criteria 3 and 7.
static COMPLETE_D1_MAPS: LazyLock<Vec<(ObjectKind, CoincidenceMap)>> = LazyLock::new(|| {
    let gs = source_grid();
    let fov1 = LAM * D_B / gs.pitch();
    let g1 = Grid1D::new(gs.n(), fov1 / gs.n() as f64, 0.0).unwrap();
    let g2 = detector_grid();
    [
        ObjectKind::Flat,
        ObjectKind::PhaseSlit,
        ObjectKind::DoublePhaseSlit,
    ]
    .into_iter()
    .map(|kind| {
        let obj = preset_object(&kind, gs);
        let state = thin_state(gs);
        let map = fast_map(&obj, &state, g1, g2);
        (kind, map)
    })
    .collect()
});

fn rel_l2_g2(a: &CoincidenceMap, b: &CoincidenceMap) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.g2().iter().zip(b.g2().iter()) {
        num += (x - y) * (x - y);
        den += y * y;
    }
    (num / den).sqrt()
}

fn max_rel_change(a: &[f64], b: &[f64]) -> f64 {
    let peak = b.iter().cloned().fold(0.0, f64::max);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / peak)
        .fold(0.0, f64::max)
}

fn one_pitch_scan(map: &CoincidenceMap) -> Vec<f64> {
    let p1 = SlitWindow::new(0.0, map.grid1().pitch()).unwrap();
    let p2 = SlitWindow::new(0.0, map.grid2().pitch()).unwrap();
    scan_coincidence(map, &p1, &p2).unwrap().coincidence
}

fn preset_window_scan(map: &CoincidenceMap) -> Vec<f64> {
    let p1 = SlitWindow::new(0.0, P_WIDTH).unwrap();
    let p2 = SlitWindow::new(0.0, P_WIDTH).unwrap();
    scan_coincidence(map, &p1, &p2).unwrap().coincidence
}

fn local_maxima(x: &[f64], c: &[f64]) -> Vec<(f64, f64)> {
    (1..c.len() - 1)
        .filter(|&i| c[i] > c[i - 1] && c[i] > c[i + 1])
        .map(|i| (x[i], c[i]))
        .collect()
}

fn first_minimum_after_zero(x: &[f64], c: &[f64], side: f64) -> Option<f64> {
    let idx: Vec<usize> = (1..c.len() - 1)
        .filter(|&i| x[i] * side > 0.0 && c[i] < c[i - 1] && c[i] < c[i + 1])
        .collect();
    idx.iter()
        .map(|&i| x[i])
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
}

#[test]
fn criterion_1_oracle_equivalence_and_runtime() {
    let mut ok = true;
    let mut detail = String::new();
    for p in PRESETS.iter() {
        let err = rel_l2_g2(&p.map_fast, &p.map_oracle);
        let t_ok = p.t_oracle.as_secs_f64() < 60.0 && p.t_fast.as_secs_f64() < 60.0;
        ok &= err < 1e-6 && t_ok;
        detail.push_str(&format!(
            "[{} relL2={err:.2e} oracle={:.1}s fast={:.1}s] ",
            p.name,
            p.t_oracle.as_secs_f64(),
            p.t_fast.as_secs_f64()
        ));
    }
    println!(
        "criterion 1 (oracle equivalence <=1e-6, runtime <60s/preset): {} {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "{detail}");
}

#[test]
fn criterion_2_klyshko_identity() {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let mut ok = true;
    let mut worst = 0.0f64;
    for p in PRESETS.iter() {
        let g1 = p.map_oracle.grid1();
        for _ in 0..10 {
            let i = rng.random_range(0..g1.n());
            let img = klyshko_image(&p.state, &p.sys, g1.coordinate(i)).unwrap();
            let row = p.map_oracle.g2().row(i);
            let peak = row.iter().cloned().fold(0.0, f64::max);
            for (j, &g) in row.iter().enumerate() {
                let rel = (img.amp()[j].norm_sqr() - g).abs() / peak.max(1e-300);
                worst = worst.max(rel);
                ok &= rel <= 1e-10;
            }
        }
    }
    println!(
        "criterion 2 (advanced-wave identity <=1e-10, 10 random x1/preset): {} worst={worst:.2e}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "worst relative mismatch {worst:.3e}");
}

#[test]
fn criterion_3_normalization_unitarity_bookkeeping() {
    // Eq-2 normalization of both state forms
    let gs = source_grid();
    let thin = thin_state(gs);
    let norm_thin = (thin.norm_sq() - 1.0).abs();
    let gsmall = Grid1D::new(512, 16e-6, 0.0).unwrap();
    let full = build_full_state(
        &SourceSpec {
            lambda_pump: Wavelength::new(406e-9).unwrap(),
            crystal_length: 1.5e-3,
            pump_profile: PumpProfile::Gaussian { waist: 1e-3 },
            pump_aperture: gsmall.extent(),
        },
        gsmall,
    )
    .unwrap();
    let norm_full = (full.norm_sq() - 1.0).abs();

    // free-space power conservation on a decayed field
    let f = ComplexField::from_fn(gs, |x| {
        num_complex::Complex64::new((-x * x / (0.7e-3f64).powi(2)).exp(), 0.0)
    });
    let mut drift = 0.0f64;
    for d in [D_A, D_B, D_2] {
        let out = apply_fresnel_fast(&FresnelSpec::new(d, lam()).unwrap(), &f, gs).unwrap();
        drift = drift.max((out.power() - f.power()).abs() / f.power());
    }

    // total coincidence budget invariant under object swap (complete probe sum)
    let totals: Vec<f64> = COMPLETE_D1_MAPS.iter().map(|(_, m)| m.total()).collect();
    let t_ref = totals[0];
    let budget = totals
        .iter()
        .map(|t| (t - t_ref).abs() / t_ref)
        .fold(0.0, f64::max);

    let ok = norm_thin <= 1e-10 && norm_full <= 1e-10 && drift <= 1e-3 && budget <= 1e-3;
    println!(
        "criterion 3 (norm <=1e-10, power <=1e-3, sum-g2 swap <=1e-3): {} \
         norm_thin={norm_thin:.2e} norm_full={norm_full:.2e} power_drift={drift:.2e} budget_change={budget:.2e}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}

#[test]
fn criterion_4_flat_far_field_scale() {
    let flat = &PRESETS[0];
    assert_eq!(flat.kind, ObjectKind::Flat);
    let c = one_pitch_scan(&flat.map_oracle);
    let x: Vec<f64> = flat.map_oracle.grid2().coordinates().collect();
    let expected = LAM * (D_A + D_2) / APERTURE;
    let plus = first_minimum_after_zero(&x, &c, 1.0).unwrap();
    let minus = first_minimum_after_zero(&x, &c, -1.0).unwrap();
    let err_p = (plus - expected).abs() / expected;
    let err_m = (minus + expected).abs() / expected;
    let ok = err_p <= 0.03 && err_m <= 0.03;
    println!(
        "criterion 4 (first zeros at +-{:.4} mm within 3%): {} found {:.4}/{:.4} mm (err {:.1}%/{:.1}%)",
        expected * 1e3,
        if ok { "PASS" } else { "FAIL" },
        plus * 1e3,
        minus * 1e3,
        err_p * 100.0,
        err_m * 100.0
    );
    assert!(ok);
}

#[test]
fn criterion_5_phase_slit_shape() {
    let slit = &PRESETS[1];
    assert_eq!(slit.kind, ObjectKind::PhaseSlit);
    let c = preset_window_scan(&slit.map_fast);
    let x: Vec<f64> = slit.map_fast.grid2().coordinates().collect();
    let step = slit.map_fast.grid2().pitch();
    let peak = c.iter().cloned().fold(0.0, f64::max);
    let maxima = local_maxima(&x, &c);
    let dominant: Vec<&(f64, f64)> = maxima.iter().filter(|(_, v)| *v >= 0.5 * peak).collect();
    let two = dominant.len() == 2;
    let symmetric = two && (dominant[0].0 + dominant[1].0).abs() <= step;
    let (_, _, center, vis, _) = profile_metrics(&x, &c);
    // central local minimum: the value at zero sits below the profile half a
    // millimetre to either side
    let i0 = x.iter().position(|&v| v > 0.0).unwrap();
    let off = (0.5e-3 / step).round() as usize;
    let central_min = c[i0] < c[i0 + off] && c[i0 - 1] < c[i0 - 1 - off] && center < peak;
    let ok = two && symmetric && central_min && vis > 0.5;
    println!(
        "criterion 5 (two dominant maxima, symmetric, central dip, visibility>0.5): {} \
         n_dominant={} positions=({:.3}, {:.3}) mm visibility={vis:.4}",
        if ok { "PASS" } else { "FAIL" },
        dominant.len(),
        dominant.first().map(|d| d.0 * 1e3).unwrap_or(f64::NAN),
        dominant.last().map(|d| d.0 * 1e3).unwrap_or(f64::NAN),
    );
    assert!(ok);
}

#[test]
fn criterion_6_double_slit_ordering() {
    let slit = &PRESETS[1];
    let dbl = &PRESETS[2];
    assert_eq!(dbl.kind, ObjectKind::DoublePhaseSlit);
    let x: Vec<f64> = slit.map_fast.grid2().coordinates().collect();
    let cs = preset_window_scan(&slit.map_fast);
    let cd = preset_window_scan(&dbl.map_fast);
    let (peak_s, _, center_s, _, width_s) = profile_metrics(&x, &cs);
    let (peak_d, _, center_d, _, width_d) = profile_metrics(&x, &cd);

    let p1 = SlitWindow::new(0.0, P_WIDTH).unwrap();
    let coll_s = collection_fraction(
        &singles_rate(&slit.map_fast, Detector::D1),
        slit.map_fast.grid1(),
        &p1,
    )
    .unwrap();
    let coll_d = collection_fraction(
        &singles_rate(&dbl.map_fast, Detector::D1),
        dbl.map_fast.grid1(),
        &p1,
    )
    .unwrap();

    let wider = width_d > width_s;
    let deeper = center_d / peak_d < center_s / peak_s;
    let lower = peak_d * coll_d < peak_s * coll_s;
    let ok = wider && deeper && lower;
    println!(
        "criterion 6 (double slit: wider dip, deeper dip, lower collected peak): {} \
         widths {:.3}/{:.3} mm, depth ratios {:.4}/{:.4}, collected peaks {:.3e}/{:.3e}",
        if ok { "PASS" } else { "FAIL" },
        width_d * 1e3,
        width_s * 1e3,
        center_d / peak_d,
        center_s / peak_s,
        peak_d * coll_d,
        peak_s * coll_s
    );
    assert!(ok);
}

#[test]
fn criterion_7_incoherence_blindness() {
    // S2 with the complete probe-arm sum
    let s2: Vec<Vec<f64>> = COMPLETE_D1_MAPS
        .iter()
        .take(2)
        .map(|(_, m)| singles_rate(m, Detector::D2))
        .collect();
    let ds2 = max_rel_change(&s2[1], &s2[0]);

    // S1 with the complete reference-arm sum
    let gs = source_grid();
    let fov2 = LAM * D_2 / gs.pitch();
    let g2c = Grid1D::new(gs.n(), fov2 / gs.n() as f64, 0.0).unwrap();
    let state = thin_state(gs);
    let s1: Vec<Vec<f64>> = [ObjectKind::Flat, ObjectKind::PhaseSlit]
        .into_iter()
        .map(|kind| {
            let obj = preset_object(&kind, gs);
            let map = fast_map(&obj, &state, detector_grid(), g2c);
            singles_rate(&map, Detector::D1)
        })
        .collect();
    let ds1 = max_rel_change(&s1[1], &s1[0]);

    let ok = ds2 <= 1e-6 && ds1 <= 1e-6;
    println!(
        "criterion 7 (singles blindness <=1e-6: S2 object swap, S1 theta swap): {} \
         dS2={ds2:.2e} dS1={ds1:.2e}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(
        ok,
        "dS2 = {ds2:.3e}, dS1 = {ds1:.3e}; the finite pump window gives the object-plane \
         illumination a ~0.1 mm coherence width, so arm-1 singles respond to the phase \
         pattern at the 1e-1 level in this model"
    );
}

#[test]
fn criterion_8_contrast_maximal_at_pi() {
    let gs = source_grid();
    let gdet = detector_grid();
    let state = thin_state(gs);
    let lambda = lam();
    let mut vis = Vec::new();
    for k in 0..9 {
        let theta = k as f64 * std::f64::consts::PI / 4.0;
        let depth = theta * LAM / (4.0 * std::f64::consts::PI);
        let obj = biphoton_imaging::elements::phase_strip_object(
            gs,
            APERTURE,
            &[biphoton_imaging::elements::PulledStrip {
                center: 0.0,
                width: 300e-6,
                depth,
            }],
            lambda,
        )
        .unwrap();
        let map = fast_map(&obj, &state, gdet, gdet);
        let c = preset_window_scan(&map);
        let x: Vec<f64> = gdet.coordinates().collect();
        let (_, _, _, v, _) = profile_metrics(&x, &c);
        vis.push(v);
    }
    let argmax = vis
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let ok = argmax == 4; // pi on the 9-point lattice over [0, 2pi]
    let listing: Vec<String> = vis.iter().map(|v| format!("{v:.3}")).collect();
    println!(
        "criterion 8 (dip visibility maximal at pi over 9 phases): {} argmax=theta_{argmax} \
         visibilities=[{}]",
        if ok { "PASS" } else { "FAIL" },
        listing.join(", ")
    );
    assert!(
        ok,
        "visibility peaks at index {argmax} (theta = {}pi/4), not pi: the quadratic \
         illumination phase across the aperture (Fresnel number ~2.8 at this geometry) \
         shifts the optimal cancellation phase above pi; in the far-field limit the \
         maximum is at pi",
        argmax
    );
}

#[test]
fn criterion_9_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("scan.json");
    std::fs::write(&cfg_path, r#"{"object": "phase-slit"}"#).unwrap();
    let bin = env!("CARGO_BIN_EXE_simulate");
    let mut outputs = Vec::new();
    for (name, threads) in [("a", 1), ("b", 1), ("c", 4)] {
        let out = dir.path().join(format!("{name}.csv"));
        let status = std::process::Command::new(bin)
            .arg("--config")
            .arg(&cfg_path)
            .arg("--out")
            .arg(&out)
            .arg("--threads")
            .arg(threads.to_string())
            .status()
            .unwrap();
        assert!(status.success(), "simulate failed");
        outputs.push(std::fs::read(&out).unwrap());
    }
    let rerun_same = outputs[0] == outputs[1];
    let across_threads = outputs[0] == outputs[2];
    let ok = rerun_same && across_threads;
    println!(
        "criterion 9 (byte-identical CSV across runs and worker counts 1/4): {} \
         rerun={rerun_same} threads={across_threads}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}
