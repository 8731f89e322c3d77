//! CSV and JSON writers. Floats use `{:.16e}`, 17 significant digits, which
//! round-trips every `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use phdae_core::{Error, Result};

use crate::config::RunConfig;
use crate::runner::Summary;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: Vec<f64>,
    pub h: f64,
    pub dh: f64,
    pub w_diss: f64,
    pub supplied: f64,
    pub balance_residual: f64,
    pub g_pos: Option<f64>,
    pub g_vel: Option<f64>,
    pub newton_iters: usize,
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    write_file(path, &(text + "\n"))
}

pub fn trajectory_header(n: usize, constrained: bool) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((0..n).map(|i| format!("x{i}")));
    cols.extend(["H", "dH", "W_diss", "supplied", "balance_residual"].map(String::from));
    if constrained {
        cols.push("g_pos_norm".into());
        cols.push("g_vel_norm".into());
    }
    cols.push("newton_iters".into());
    cols.join(",")
}

pub fn trajectory_csv(n: usize, constrained: bool, rows: &[TrajectoryRow]) -> String {
    let mut out = trajectory_header(n, constrained);
    out.push('\n');
    for r in rows {
        let mut fields: Vec<String> = vec![fmt_f64(r.t)];
        fields.extend(r.x.iter().map(|&v| fmt_f64(v)));
        fields.extend([r.h, r.dh, r.w_diss, r.supplied, r.balance_residual].map(fmt_f64));
        if constrained {
            fields.push(fmt_f64(r.g_pos.unwrap_or(f64::NAN)));
            fields.push(fmt_f64(r.g_vel.unwrap_or(f64::NAN)));
        }
        fields.push(r.newton_iters.to_string());
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

/// Parse a trajectory file written by [`trajectory_csv`].
pub fn parse_trajectory_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Io("empty trajectory file".into()))?
        .split(',')
        .map(String::from)
        .collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|f| f.parse::<f64>().map_err(|e| Error::Io(format!("bad field '{f}': {e}"))))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((header, rows))
}

pub fn write_run(
    dir: &Path,
    cfg: &RunConfig,
    n: usize,
    constrained: bool,
    rows: &[TrajectoryRow],
    summary: &Summary,
) -> Result<()> {
    write_file(&dir.join("trajectory.csv"), &trajectory_csv(n, constrained, rows))?;
    write_json(&dir.join("summary.json"), summary)?;
    write_file(&dir.join("config.echo"), &cfg.to_toml())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_formatting() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 19.0 / 21.0, f64::MAX, 5e-324] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn header_layout() {
        assert_eq!(
            trajectory_header(2, false),
            "t,x0,x1,H,dH,W_diss,supplied,balance_residual,newton_iters"
        );
        assert!(trajectory_header(1, true).ends_with("balance_residual,g_pos_norm,g_vel_norm,newton_iters"));
    }

    #[test]
    fn csv_parses_back() {
        let row = TrajectoryRow {
            t: 0.1,
            x: vec![1.0 / 3.0, -2.0],
            h: 0.5,
            dh: -1e-3,
            w_diss: 1e-3,
            supplied: 0.0,
            balance_residual: 1e-17,
            g_pos: None,
            g_vel: None,
            newton_iters: 2,
        };
        let text = trajectory_csv(2, false, std::slice::from_ref(&row));
        let (h, rows) = parse_trajectory_csv(&text).unwrap();
        assert_eq!(h.len(), 9);
        assert_eq!(rows[0][1], row.x[0]);
        assert_eq!(rows[0][8], 2.0);
    }
}
