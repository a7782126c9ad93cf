use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::forcing::{fit_mld, fit_sst, SeasonalForcing, MONTHS};
use crate::params::LightConfig;
use crate::thermo::KELVIN_OFFSET;

/// Cells whose coldest month is below this SST (°C) are treated as ice.
pub const ICE_THRESHOLD_C: f64 = -1.8;

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// `lat,lon,sst01..sst12,mld01..mld12`
pub fn header() -> Vec<String> {
    let mut cols = vec!["lat".to_string(), "lon".to_string()];
    cols.extend((1..=MONTHS).map(|m| format!("sst{m:02}")));
    cols.extend((1..=MONTHS).map(|m| format!("mld{m:02}")));
    cols
}

/// Monthly means of one cell: SST in °C, mixed-layer depth in m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Climatology {
    pub sst: [f64; MONTHS],
    pub mld: [f64; MONTHS],
}

impl Climatology {
    pub fn min_sst(&self) -> f64 {
        self.sst.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_ice(&self) -> bool {
        self.min_sst() < ICE_THRESHOLD_C
    }

    /// Fitted seasonal drivers at `latitude`.
    pub fn forcing(&self, latitude: f64, light: &LightConfig) -> Result<SeasonalForcing> {
        let kelvin = self.sst.map(|c| c + KELVIN_OFFSET);
        SeasonalForcing::new(
            fit_mld(&self.mld)?,
            fit_sst(&kelvin)?,
            light.source_at(latitude),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRecord {
    pub lat: f64,
    pub lon: f64,
    /// `None` when any monthly field is blank.
    pub climatology: Option<Climatology>,
}

impl CellRecord {
    pub fn key(&self) -> (u64, u64) {
        (self.lat.to_bits(), self.lon.to_bits())
    }
}

fn schema(row: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

fn parse_field(row: usize, column: &str, raw: &str) -> Result<Option<f64>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    let v: f64 = raw
        .parse()
        .map_err(|_| schema(row, column, format!("`{raw}` is not a number")))?;
    if !v.is_finite() {
        return Err(schema(row, column, format!("`{raw}` is not finite")));
    }
    Ok(Some(v))
}

/// Parse a grid. Rows are numbered by their line in the file, the header
/// being line 1.
pub fn read_grid<R: Read>(input: R) -> Result<Vec<CellRecord>> {
    let expected = header();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(input);
    let found = reader
        .headers()
        .map_err(|e| schema(1, "<header>", e.to_string()))?;
    let found: Vec<&str> = found.iter().map(str::trim).collect();
    if found.len() != expected.len() {
        return Err(schema(
            1,
            "<header>",
            format!("expected {} columns, found {}", expected.len(), found.len()),
        ));
    }
    for (want, got) in expected.iter().zip(&found) {
        if want != got {
            return Err(schema(
                1,
                want,
                format!("expected column `{want}`, found `{got}`"),
            ));
        }
    }

    let mut cells = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let fallback_row = i + 2;
        let record = record.map_err(|e| {
            let row = e.position().map_or(fallback_row, |p| p.line() as usize);
            schema(row, "<record>", e.to_string())
        })?;
        let row = record
            .position()
            .map_or(fallback_row, |p| p.line() as usize);
        let values: Vec<Option<f64>> = record
            .iter()
            .zip(&expected)
            .map(|(raw, col)| parse_field(row, col, raw))
            .collect::<Result<_>>()?;

        let lat = values[0].ok_or_else(|| schema(row, "lat", "latitude is required"))?;
        let lon = values[1].ok_or_else(|| schema(row, "lon", "longitude is required"))?;
        if !(-90.0..=90.0).contains(&lat) {
            return Err(schema(
                row,
                "lat",
                format!("latitude {lat} outside [-90, 90]"),
            ));
        }
        if !(-180.0..180.0).contains(&lon) {
            return Err(schema(
                row,
                "lon",
                format!("longitude {lon} outside [-180, 180)"),
            ));
        }
        for (j, v) in values.iter().enumerate().skip(2 + MONTHS) {
            if let Some(h) = v {
                if *h <= 0.0 {
                    return Err(schema(
                        row,
                        &expected[j],
                        format!("mixed-layer depth {h} must be positive"),
                    ));
                }
            }
        }
        let climatology = if values.iter().all(Option::is_some) {
            let mut sst = [0.0; MONTHS];
            let mut mld = [0.0; MONTHS];
            for m in 0..MONTHS {
                sst[m] = values[2 + m].unwrap();
                mld[m] = values[2 + MONTHS + m].unwrap();
            }
            Some(Climatology { sst, mld })
        } else {
            None
        };
        let cell = CellRecord {
            lat,
            lon,
            climatology,
        };
        if !seen.insert(cell.key()) {
            return Err(schema(
                row,
                "lat,lon",
                format!("duplicate cell ({lat}, {lon})"),
            ));
        }
        cells.push(cell);
    }
    Ok(cells)
}

pub fn load_grid(path: impl AsRef<Path>) -> Result<Vec<CellRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    read_grid(std::io::BufReader::new(file)).map_err(|e| match e {
        Error::Schema {
            row,
            column,
            message,
        } => Error::Schema {
            row,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

/// Write a grid in the input schema; missing climatologies become blank
/// fields. Values are written in shortest round-trip form.
pub fn write_grid<W: Write>(out: W, cells: &[CellRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header()).map_err(csv_err)?;
    for cell in cells {
        let mut row = vec![cell.lat.to_string(), cell.lon.to_string()];
        match &cell.climatology {
            Some(c) => {
                row.extend(c.sst.iter().map(f64::to_string));
                row.extend(c.mld.iter().map(f64::to_string));
            }
            None => row.extend(std::iter::repeat(String::new()).take(2 * MONTHS)),
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Area of a `dlat × dlon` degree cell centred at `lat`, in km².
pub fn cell_area(lat: f64, dlat: f64, dlon: f64) -> Result<f64> {
    if !(lat.abs() <= 90.0) {
        return Err(Error::Domain(format!("latitude {lat} outside [-90, 90]")));
    }
    if !(dlat > 0.0 && dlon > 0.0) {
        return Err(Error::Domain(format!(
            "cell spacing must be positive (dlat = {dlat}, dlon = {dlon})"
        )));
    }
    let cos = if lat.abs() == 90.0 {
        0.0
    } else {
        lat.to_radians().cos()
    };
    let deg = std::f64::consts::PI / 180.0;
    Ok(EARTH_RADIUS_KM * EARTH_RADIUS_KM * deg * deg * dlon * dlat * cos)
}

fn min_spacing(mut values: Vec<f64>) -> Option<f64> {
    values.sort_by(f64::total_cmp);
    values.dedup();
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > 0.0)
        .min_by(f64::total_cmp)
}

/// `(dlat, dlon)` from the smallest coordinate spacing; 1° on an axis with a
/// single value.
pub fn infer_resolution(cells: &[CellRecord]) -> (f64, f64) {
    let dlat = min_spacing(cells.iter().map(|c| c.lat).collect()).unwrap_or(1.0);
    let dlon = min_spacing(cells.iter().map(|c| c.lon).collect()).unwrap_or(1.0);
    (dlat, dlon)
}
