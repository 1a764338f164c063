use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use twodrug::integrator::Trajectory;

use crate::error::CliError;

/// Seventeen significant digits, enough to round-trip any f64.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_owned(), source })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Write { path: path.clone(), source })?;
    Ok(path)
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Header `t,<columns>` and one row per sample.
pub fn trajectory_csv<const D: usize>(columns: &[&str], tr: &Trajectory<D>) -> String {
    let mut out = String::from("t");
    for c in columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for s in &tr.samples {
        out.push_str(&num(s.t));
        for v in s.x {
            let _ = write!(out, ",{}", num(v));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use twodrug::{integrate_reduced, reduced_coefficients, IntegratorOptions, ModelParameters, ReducedState};

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 7090.909090909091, 1e-300, -3.0 / 7.0, 0.0] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_layout() {
        let c = reduced_coefficients(&ModelParameters::baseline().validate().unwrap());
        let tr = integrate_reduced(&c, ReducedState::ORIGIN, &IntegratorOptions::fixed_rk4(0.5, 1.0)).unwrap();
        let csv = trajectory_csv(&["D1", "D2"], &tr);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,D1,D2");
        assert_eq!(lines.len(), 1 + tr.samples.len());
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 3));
    }
}
