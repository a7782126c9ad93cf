use std::io::Write;

use serde::Serialize;

use super::pipeline::{AtlasResult, CellStatus, EpochDiagnostics, GridSummary};
use crate::diagnostics::TransitionOutcome;
use crate::error::{ErrorKind, Result};

const EPOCH_FIELDS: [&str; 17] = [
    "ice",
    "gamma_crit",
    "regime",
    "lambda_p",
    "rho_p",
    "rho_z",
    "gain",
    "loss",
    "d_temp",
    "d_hmax",
    "grad_t",
    "grad_h",
    "i_t",
    "i_h",
    "d_t",
    "d_t_neutral",
    "r2",
];

/// Column order of `diagnostics.csv`.
pub fn diagnostics_header() -> Vec<String> {
    let mut cols: Vec<String> = [
        "cell",
        "lat",
        "lon",
        "area_km2",
        "status",
        "transition",
        "delta_gamma",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for epoch in ["start", "end"] {
        cols.extend(EPOCH_FIELDS.iter().map(|f| format!("{f}_{epoch}")));
    }
    cols
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn epoch_fields(e: Option<&EpochDiagnostics>) -> Vec<String> {
    let Some(e) = e else {
        return vec![String::new(); EPOCH_FIELDS.len()];
    };
    let s = e.stability.as_ref();
    let i = e.impact.as_ref();
    vec![
        e.ice.to_string(),
        opt(s.map(|r| r.gamma_crit)),
        e.regime.map(|r| r.as_str().to_string()).unwrap_or_default(),
        opt(s.map(|r| r.lambda_p)),
        opt(s.map(|r| r.rho_p)),
        opt(s.map(|r| r.rho_z)),
        opt(s.map(|r| r.gain)),
        opt(s.map(|r| r.loss)),
        opt(e.anomaly.map(|a| a.d_temp)),
        opt(e.anomaly.map(|a| a.d_hmax)),
        opt(i.map(|r| r.grad_t)),
        opt(i.map(|r| r.grad_h)),
        opt(i.map(|r| r.i_t)),
        opt(i.map(|r| r.i_h)),
        opt(i.map(|r| r.d_t_index)),
        i.map(|r| r.neutral.to_string()).unwrap_or_default(),
        opt(i.and_then(|r| r.r2)),
    ]
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Io(std::io::Error::other(e))
}

pub fn write_diagnostics<W: Write>(out: W, result: &AtlasResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(diagnostics_header()).map_err(csv_err)?;
    for cell in &result.cells {
        let mut row = vec![
            cell.index.to_string(),
            num(cell.lat),
            num(cell.lon),
            num(cell.area_km2),
        ];
        match &cell.status {
            CellStatus::Done {
                start,
                end,
                transition,
                delta_gamma,
            } => {
                let (status, label) = match transition {
                    TransitionOutcome::Label(l) => ("ok", l.as_str()),
                    TransitionOutcome::Excluded => ("ice", ""),
                };
                row.extend([status.to_string(), label.to_string(), opt(*delta_gamma)]);
                row.extend(epoch_fields(Some(start)));
                row.extend(epoch_fields(Some(end)));
            }
            CellStatus::Missing | CellStatus::Failed(_) => {
                let status = if matches!(cell.status, CellStatus::Missing) {
                    "missing"
                } else {
                    "failed"
                };
                row.extend([status.to_string(), String::new(), String::new()]);
                row.extend(epoch_fields(None));
                row.extend(epoch_fields(None));
            }
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `class,cells,area_1e6_km2,coverage_pct`, one row per class then a total.
pub fn write_summary<W: Write>(out: W, summary: &GridSummary) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["class", "cells", "area_1e6_km2", "coverage_pct"])
        .map_err(csv_err)?;
    let mut cells = 0;
    for r in &summary.rows {
        cells += r.cells;
        w.write_record([
            r.class.name().to_string(),
            r.cells.to_string(),
            format!("{:.6}", r.area_km2 / 1e6),
            format!("{:.4}", r.percent),
        ])
        .map_err(csv_err)?;
    }
    let total_pct = if summary.total_area_km2 > 0.0 {
        100.0
    } else {
        0.0
    };
    w.write_record([
        "Total".to_string(),
        cells.to_string(),
        format!("{:.6}", summary.total_area_km2 / 1e6),
        format!("{total_pct:.4}"),
    ])
    .map_err(csv_err)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    cell: usize,
    lat: f64,
    lon: f64,
    kind: &'static str,
    code: &'a str,
    message: &'a str,
}

pub fn kind_name(kind: ErrorKind) -> &'static str {
    match kind {
        ErrorKind::Input => "input",
        ErrorKind::Numerical => "numerical",
        ErrorKind::Io => "io",
    }
}

/// One JSON object per failed cell. Returns the number of lines written.
pub fn write_errors<W: Write>(mut out: W, result: &AtlasResult) -> Result<usize> {
    let mut n = 0;
    for (cell, failure) in result.failures() {
        let line = ErrorLine {
            cell: cell.index,
            lat: cell.lat,
            lon: cell.lon,
            kind: kind_name(failure.kind),
            code: failure.code,
            message: &failure.message,
        };
        let text = serde_json::to_string(&line).map_err(|e| crate::Error::Io(e.into()))?;
        writeln!(out, "{text}")?;
        n += 1;
    }
    Ok(n)
}
