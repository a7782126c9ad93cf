//! Binary PPM (P6) maps with one pixel per grid cell, north up, longitude
//! increasing to the right.

use std::io::Write;
use std::path::{Path, PathBuf};

use super::pipeline::{AtlasResult, CellDiagnostics, CellStatus, EpochDiagnostics};
use crate::diagnostics::TransitionLabel;
use crate::error::{Error, Result};

pub type Rgb = [u8; 3];

/// Pixels not covered by any cell.
pub const NO_CELL: Rgb = [128, 128, 128];
/// Ice-covered in the mapped epoch.
pub const ICE: Rgb = [235, 245, 250];
/// Missing data or failed cells.
pub const NO_DATA: Rgb = [48, 48, 48];

const GAMMA_LOW: Rgb = [8, 48, 107];
const GAMMA_MID: Rgb = [107, 174, 214];
const GAMMA_HIGH: Rgb = [239, 59, 44];
const GAMMA_OVER: Rgb = [103, 0, 13];
const DT_MIXING: Rgb = [33, 102, 172];
const NEUTRAL: Rgb = [247, 247, 247];
const DT_THERMAL: Rgb = [178, 24, 43];
const SHIFT_DOWN: Rgb = [27, 120, 55];
const SHIFT_UP: Rgb = [118, 42, 131];
/// `Δγ` saturates at this magnitude.
pub const SHIFT_LIMIT: f64 = 0.5;

fn mix(a: Rgb, b: Rgb, t: f64) -> Rgb {
    let t = t.clamp(0.0, 1.0);
    let ch = |i: usize| (a[i] as f64 + (b[i] as f64 - a[i] as f64) * t).round() as u8;
    [ch(0), ch(1), ch(2)]
}

/// `γ_crit`: dark to light blue on [0, 0.5], light blue to red on (0.5, 1],
/// dark red above 1.
pub fn gamma_color(gamma: f64) -> Rgb {
    if gamma <= 0.5 {
        mix(GAMMA_LOW, GAMMA_MID, gamma / 0.5)
    } else if gamma <= 1.0 {
        mix(GAMMA_MID, GAMMA_HIGH, (gamma - 0.5) / 0.5)
    } else {
        GAMMA_OVER
    }
}

/// `D_T`: blue (mixing driven) through white at 0.5 to red (thermally driven).
pub fn dominance_color(d_t: f64) -> Rgb {
    if d_t <= 0.5 {
        mix(DT_MIXING, NEUTRAL, d_t / 0.5)
    } else {
        mix(NEUTRAL, DT_THERMAL, (d_t - 0.5) / 0.5)
    }
}

/// `Δγ`: green for a falling requirement, purple for a rising one.
pub fn shift_color(delta: f64) -> Rgb {
    if delta <= 0.0 {
        mix(NEUTRAL, SHIFT_DOWN, -delta / SHIFT_LIMIT)
    } else {
        mix(NEUTRAL, SHIFT_UP, delta / SHIFT_LIMIT)
    }
}

pub fn transition_color(label: TransitionLabel) -> Rgb {
    match label {
        TransitionLabel::StableViability => [49, 130, 189],
        TransitionLabel::StableRestriction => [222, 45, 38],
        TransitionLabel::HabitatExpansion => [49, 163, 84],
        TransitionLabel::HabitatContraction => [253, 141, 60],
        TransitionLabel::IceFreeViability => [158, 202, 225],
        TransitionLabel::IceFreeRestriction => [188, 128, 189],
    }
}

/// Pixel layout of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterGeometry {
    pub width: usize,
    pub height: usize,
    lat_max: f64,
    lon_min: f64,
    dlat: f64,
    dlon: f64,
}

const MAX_PIXELS: usize = 100_000_000;

impl RasterGeometry {
    pub fn of(result: &AtlasResult) -> Result<Self> {
        let cells = &result.cells;
        if cells.is_empty() {
            return Err(Error::InvalidInput("cannot rasterize an empty grid".into()));
        }
        let (dlat, dlon) = result.resolution;
        let fold = |f: fn(&CellDiagnostics) -> f64, init: f64, op: fn(f64, f64) -> f64| {
            cells.iter().map(f).fold(init, op)
        };
        let lat_min = fold(|c| c.lat, f64::INFINITY, f64::min);
        let lat_max = fold(|c| c.lat, f64::NEG_INFINITY, f64::max);
        let lon_min = fold(|c| c.lon, f64::INFINITY, f64::min);
        let lon_max = fold(|c| c.lon, f64::NEG_INFINITY, f64::max);
        let width = ((lon_max - lon_min) / dlon).round() as usize + 1;
        let height = ((lat_max - lat_min) / dlat).round() as usize + 1;
        if width.saturating_mul(height) > MAX_PIXELS {
            return Err(Error::InvalidInput(format!(
                "raster of {width} x {height} pixels is too large"
            )));
        }
        Ok(Self {
            width,
            height,
            lat_max,
            lon_min,
            dlat,
            dlon,
        })
    }

    /// `(column, row)` of a cell.
    pub fn pixel(&self, lat: f64, lon: f64) -> (usize, usize) {
        let col = ((lon - self.lon_min) / self.dlon).round() as usize;
        let row = ((self.lat_max - lat) / self.dlat).round() as usize;
        (col.min(self.width - 1), row.min(self.height - 1))
    }
}

pub fn write_ppm<W: Write>(mut out: W, width: usize, height: usize, pixels: &[Rgb]) -> Result<()> {
    debug_assert_eq!(pixels.len(), width * height);
    write!(out, "P6\n{width} {height}\n255\n")?;
    let bytes: Vec<u8> = pixels.iter().flatten().copied().collect();
    out.write_all(&bytes)?;
    Ok(())
}

fn render(
    geo: &RasterGeometry,
    result: &AtlasResult,
    color: impl Fn(&CellDiagnostics) -> Rgb,
) -> Vec<Rgb> {
    let mut pixels = vec![NO_CELL; geo.width * geo.height];
    for cell in &result.cells {
        let (col, row) = geo.pixel(cell.lat, cell.lon);
        pixels[row * geo.width + col] = color(cell);
    }
    pixels
}

fn epoch_of(cell: &CellDiagnostics, end: bool) -> Option<&EpochDiagnostics> {
    match &cell.status {
        CellStatus::Done { start, end: e, .. } => Some(if end { e } else { start }),
        _ => None,
    }
}

fn epoch_color(
    cell: &CellDiagnostics,
    end: bool,
    f: impl Fn(&EpochDiagnostics) -> Option<Rgb>,
) -> Rgb {
    match epoch_of(cell, end) {
        Some(e) if e.ice => ICE,
        Some(e) => f(e).unwrap_or(NO_DATA),
        None => NO_DATA,
    }
}

/// Write the six map products into `dir` and return their paths.
pub fn write_rasters(dir: &Path, result: &AtlasResult) -> Result<Vec<PathBuf>> {
    let geo = RasterGeometry::of(result)?;
    let mut products: Vec<(String, Vec<Rgb>)> = Vec::new();
    for (suffix, end) in [("start", false), ("end", true)] {
        products.push((
            format!("gamma_crit_{suffix}.ppm"),
            render(&geo, result, |c| {
                epoch_color(c, end, |e| e.gamma_crit().map(gamma_color))
            }),
        ));
        products.push((
            format!("dominance_{suffix}.ppm"),
            render(&geo, result, |c| {
                epoch_color(c, end, |e| e.impact.map(|i| dominance_color(i.d_t_index)))
            }),
        ));
    }
    products.push((
        "delta_gamma.ppm".into(),
        render(&geo, result, |c| match &c.status {
            CellStatus::Done {
                delta_gamma: Some(d),
                ..
            } => shift_color(*d),
            CellStatus::Done { .. } => ICE,
            _ => NO_DATA,
        }),
    ));
    products.push((
        "transition.ppm".into(),
        render(&geo, result, |c| match (&c.status, c.transition()) {
            (_, Some(l)) => transition_color(l),
            (CellStatus::Done { .. }, None) => ICE,
            _ => NO_DATA,
        }),
    ));

    let mut paths = Vec::new();
    for (name, pixels) in products {
        let path = dir.join(name);
        let file = std::fs::File::create(&path)?;
        write_ppm(
            std::io::BufWriter::new(file),
            geo.width,
            geo.height,
            &pixels,
        )?;
        paths.push(path);
    }
    Ok(paths)
}
