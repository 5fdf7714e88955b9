//! CSV and report files.

use std::fs;
use std::io::Write;
use std::path::Path;

use orbavg::averaging::EstimatorCurves;
use orbavg::numerics::SampledCurve;
use orbavg::runner::{ComparisonReport, RunArtifacts};

use crate::CliError;

pub const ESTIMATOR_HEADER: &str = "tau,n_P,n_E,n_Y,m_P,m_E,m_Y";
pub const COMPARISON_HEADER: &str = "t_orbits,absL_P,envelope_P,absL_E,envelope_E,absL_Y,envelope_Y";
pub const L_CURVE_HEADER: &str = "t_orbits,L_P,L_E,L_Y";

fn row(values: &[f64]) -> String {
    let cells: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
    cells.join(",")
}

fn write_table(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<(), CliError> {
    if rows.is_empty() {
        return Err(CliError::Usage(format!("refusing to write empty table {}", path.display())));
    }
    let mut out = String::with_capacity(rows.len() * 128);
    out.push_str(header);
    out.push('\n');
    for r in rows {
        out.push_str(&row(r));
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
}

pub fn estimator_rows(curves: &EstimatorCurves) -> Vec<Vec<f64>> {
    curves
        .samples
        .iter()
        .map(|s| {
            let mut r = vec![s.tau];
            r.extend_from_slice(&s.n);
            r.extend_from_slice(&s.m);
            r
        })
        .collect()
}

pub fn comparison_rows(report: &ComparisonReport) -> Vec<Vec<f64>> {
    report
        .rows
        .iter()
        .map(|r| {
            let mut out = vec![r.t_orbits];
            for (l, n) in r.abs_l.iter().zip(&r.envelope) {
                out.push(*l);
                out.push(*n);
            }
            out
        })
        .collect()
}

/// `L` at `points + 1` equally spaced orbit counts including both ends.
pub fn l_curve_rows(curve: &SampledCurve, points: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let (t0, t1) = (curve.t_start(), curve.t_end());
    (0..=points)
        .map(|k| {
            let t = if k == points { t1 } else { t0 + (t1 - t0) * k as f64 / points as f64 };
            let mut r = vec![t];
            r.extend(curve.eval(t)?);
            Ok(r)
        })
        .collect()
}

pub fn write_estimator(path: &Path, curves: &EstimatorCurves) -> Result<(), CliError> {
    write_table(path, ESTIMATOR_HEADER, &estimator_rows(curves))
}

pub fn write_comparison(path: &Path, report: &ComparisonReport) -> Result<(), CliError> {
    write_table(path, COMPARISON_HEADER, &comparison_rows(report))
}

pub fn write_l_curve(path: &Path, curve: &SampledCurve, points: usize) -> Result<(), CliError> {
    write_table(path, L_CURVE_HEADER, &l_curve_rows(curve, points)?)
}

/// Parse a file written by this module back into its header and rows.
pub fn read_table(path: &Path) -> Result<(String, Vec<Vec<f64>>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().to_string();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|c| c.parse::<f64>().map_err(|e| CliError::Usage(format!("bad cell '{c}': {e}"))))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}

const COMPONENTS: [&str; 3] = ["P", "E", "Y"];

/// `key=value` summary of the fixed point and envelope run.
pub fn n_report(n: &RunArtifacts) -> String {
    let (fp, curves) = (&n.fixed_point, &n.curves);
    let mut out = String::new();
    let mut put = |k: String, v: String| out.push_str(&format!("{k}={v}\n"));
    put("n_operation_seconds".into(), format!("{}", n.elapsed.as_secs_f64()));
    for (i, c) in COMPONENTS.iter().enumerate() {
        put(format!("l0_{c}"), format!("{:?}", fp.l0[i]));
    }
    put("fixed_point_iterations".into(), fp.iterations.to_string());
    put("fixed_point_residual".into(), format!("{:?}", fp.residual));
    if let Some(b) = fp.contraction_bound {
        put("contraction_bound".into(), format!("{b:?}"));
    }
    put("hypothesis_box_in_caps".into(), fp.flags.box_in_caps.to_string());
    put("hypothesis_contraction".into(), fp.flags.contraction.to_string());
    put("hypothesis_self_map".into(), fp.flags.self_map.to_string());
    put("hypothesis_fixed_point_in_box".into(), fp.flags.fixed_point_in_box.to_string());
    put("estimator_steps".into(), curves.steps.to_string());
    put("estimator_min_det".into(), format!("{:?}", curves.min_det));
    for (i, c) in COMPONENTS.iter().enumerate() {
        put(format!("cap_margin_{c}"), format!("{:?}", curves.cap_margin[i]));
    }
    for (i, c) in COMPONENTS.iter().enumerate() {
        put(format!("a0_fine_grid_deficit_{c}"), format!("{:?}", n.a0_deficit[i]));
    }
    out
}

pub fn comparison_report(report: &ComparisonReport, elapsed_l_s: f64) -> String {
    let mut out = format!("l_operation_seconds={elapsed_l_s}\n");
    out.push_str(&format!("checked_points={}\n", report.checked_points));
    out.push_str(&format!("slack={:?}\n", report.slack));
    for (i, c) in COMPONENTS.iter().enumerate() {
        out.push_str(&format!("dominance_{c}={}\n", report.dominance[i]));
        out.push_str(&format!("max_ratio_{c}={:?}\n", report.max_ratio[i]));
        let first = report.first_violation[i].map_or_else(|| "none".to_string(), |t| format!("{t:?}"));
        out.push_str(&format!("first_violation_{c}={first}\n"));
    }
    out
}
