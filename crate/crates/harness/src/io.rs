//! Report emission and parsing: `report.json`, `trace.csv`, `sweep.csv`.
//!
//! Floats are written in shortest round-trip form, so parsing an emitted file
//! reproduces the original values exactly.

use std::path::Path;

use rarn::report::{IterationRecord, RunReport};

use crate::runner::{SweepPoint, SweepResult};
use crate::{HarnessError, Result};

pub fn report_to_json(report: &RunReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn report_from_json(text: &str) -> Result<RunReport> {
    Ok(serde_json::from_str(text)?)
}

pub fn sweep_to_json(sweep: &SweepResult) -> Result<String> {
    Ok(serde_json::to_string_pretty(sweep)?)
}

pub fn sweep_from_json(text: &str) -> Result<SweepResult> {
    Ok(serde_json::from_str(text)?)
}

fn to_csv<T: serde::Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io {
        path: "<csv buffer>".into(),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv writer emits UTF-8"))
}

fn from_csv<T: serde::de::DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// One row per outer iteration.
pub fn trace_to_csv(records: &[IterationRecord]) -> Result<String> {
    to_csv(records)
}

pub fn trace_from_csv(text: &str) -> Result<Vec<IterationRecord>> {
    from_csv(text)
}

/// Columns `eps_g, eps_h, outer_iters, succ_iters, hv_products, converged, max_param, seed`.
pub fn sweep_to_csv(sweep: &SweepResult) -> Result<String> {
    to_csv(&sweep.points)
}

pub fn sweep_points_from_csv(text: &str) -> Result<Vec<SweepPoint>> {
    from_csv(text)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rarn::report::StepKind;

    fn record(k: usize, rho: f64) -> IterationRecord {
        IterationRecord {
            k,
            grad_norm: 0.1 / 3.0,
            f: 1.0 + 1e-17,
            param: 0.7,
            param_next: 1.4,
            step_norm: 1e-300,
            rho,
            success: false,
            f_trial: f64::INFINITY,
            model_decrease: 2.5e-7,
            reg_value: 1.0 / 7.0,
            on_boundary: true,
            step_kind: StepKind::NegativeCurvature,
            subproblem_iters: 3,
            hv_products_cumulative: 12,
            step_bound_ok: true,
            gradient_bound_ok: false,
            cauchy_bound_ok: true,
        }
    }

    #[test]
    fn csv_round_trip_with_infinities() {
        let recs = vec![record(0, f64::NEG_INFINITY), record(1, 0.123456789012345678)];
        let text = trace_to_csv(&recs).unwrap();
        assert!(text.lines().next().unwrap().starts_with("k,grad_norm,f,param"));
        assert_eq!(trace_from_csv(&text).unwrap(), recs);
    }
}
