//! CSV emission. Output bytes are a pure function of the run inputs: fixed
//! column order, fixed float formatting, no timestamps.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::scenario::RunReport;

fn fmt(v: f64) -> String {
    // 9 significant digits, '.' decimal separator
    format!("{v:.8e}")
}

/// Render the scan CSV: '#'-prefixed comment block echoing the effective
/// config and the derived metrics, then the pinned header and one row per
/// scan point, ascending in x2.
pub fn render_csv(report: &RunReport) -> String {
    let mut out = String::new();
    out.push_str("# coincidence scan\n");
    let cfg = serde_json::to_string_pretty(&report.config).expect("config serializes");
    for line in cfg.lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(&format!(
        "# metric peak_value = {}\n",
        fmt(report.metrics.peak_value)
    ));
    out.push_str(&format!(
        "# metric peak_x2 = {}\n",
        fmt(report.metrics.peak_x2)
    ));
    out.push_str(&format!(
        "# metric center_value = {}\n",
        fmt(report.metrics.center_value)
    ));
    out.push_str(&format!(
        "# metric dip_visibility = {}\n",
        fmt(report.metrics.dip_visibility)
    ));
    out.push_str(&format!(
        "# metric dip_half_depth_width = {}\n",
        fmt(report.metrics.dip_half_depth_width)
    ));
    out.push_str(&format!(
        "# metric collection_fraction = {}\n",
        fmt(report.metrics.collection_fraction)
    ));
    out.push_str(&format!(
        "# metric peak_after_collection = {}\n",
        fmt(report.metrics.peak_after_collection)
    ));
    out.push_str("x2_m,coincidence_raw,coincidence_corrected,singles_d2\n");
    for i in 0..report.x2.len() {
        out.push_str(&fmt(report.x2[i]));
        out.push(',');
        out.push_str(&fmt(report.coincidence[i]));
        out.push(',');
        out.push_str(&fmt(report.corrected[i]));
        out.push(',');
        out.push_str(&fmt(report.singles_d2[i]));
        out.push('\n');
    }
    out
}

pub fn emit_csv(report: &RunReport, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(render_csv(report).as_bytes())?;
    Ok(())
}

/// Dump the full coincidence surface: header row of x2 coordinates, then one
/// row per x1 sample.
pub fn render_g2_csv(report: &RunReport) -> Option<String> {
    let map = report.g2_dump.as_ref()?;
    let mut out = String::new();
    out.push_str("# g2 surface, rows x1, columns x2\n");
    out.push_str("x1_m");
    for x in map.grid2().coordinates() {
        out.push(',');
        out.push_str(&fmt(x));
    }
    out.push('\n');
    for (i, x1) in map.grid1().coordinates().enumerate() {
        out.push_str(&fmt(x1));
        let row = map.g2().row(i);
        for v in row.iter() {
            out.push(',');
            out.push_str(&fmt(*v));
        }
        out.push('\n');
    }
    Some(out)
}

pub fn emit_g2_csv(report: &RunReport, path: &Path) -> Result<()> {
    if let Some(text) = render_g2_csv(report) {
        let mut f = std::fs::File::create(path)?;
        f.write_all(text.as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Metrics, RunMode, RunReport, ScenarioConfig};

    fn tiny_report() -> RunReport {
        RunReport {
            config: ScenarioConfig::default(),
            mode: RunMode::Fast,
            x2: vec![-1e-3, 0.0, 1e-3],
            coincidence: vec![0.5, 1.0, 0.5],
            corrected: vec![0.5, 1.0, 0.5],
            singles_d2: vec![1.0, 1.0, 1.0],
            singles_d1: vec![1.0; 4],
            metrics: Metrics {
                peak_value: 1.0,
                peak_x2: 0.0,
                center_value: 1.0,
                dip_visibility: 0.0,
                dip_half_depth_width: 0.0,
                collection_fraction: 0.25,
                peak_after_collection: 0.25,
            },
            warnings: vec![],
            wall_ms: 0,
            g2_dump: None,
        }
    }

    #[test]
    fn header_is_first_non_comment_line() {
        let text = render_csv(&tiny_report());
        let first = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(
            first,
            "x2_m,coincidence_raw,coincidence_corrected,singles_d2"
        );
    }

    #[test]
    fn one_row_per_scan_point_and_ascending() {
        let text = render_csv(&tiny_report());
        let rows: Vec<&str> = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("x2_m"))
            .collect();
        assert_eq!(rows.len(), 3);
        let xs: Vec<f64> = rows
            .iter()
            .map(|r| r.split(',').next().unwrap().parse().unwrap())
            .collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt(1.0 / 3.0), "3.33333333e-1");
        assert_eq!(fmt(0.0), "0.00000000e0");
    }

    #[test]
    fn render_is_deterministic() {
        let a = render_csv(&tiny_report());
        let b = render_csv(&tiny_report());
        assert_eq!(a, b);
    }
}
