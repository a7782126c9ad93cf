use std::collections::{BTreeMap, HashMap};

use log::debug;
use rayon::prelude::*;

use super::grid::{cell_area, infer_resolution, CellRecord, Climatology};
use crate::diagnostics::{
    classify_regime, classify_transition, gamma_gradients_with, realized_impacts, taylor_r2_with,
    Anomaly, EpochState, FiniteDiff, ImpactReport, Lattice, RegimeLabel, TransitionLabel,
    TransitionOutcome,
};
use crate::error::{Error, ErrorKind, Result};
use crate::forcing::SeasonalForcing;
use crate::params::LightConfig;
use crate::stability::{Quadrature, StabilityAnalyzer, StabilityReport};
use crate::thermo::BioParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub c0: f64,
    pub quadrature: Quadrature,
    pub finite_diff: FiniteDiff,
    pub lattice: Lattice,
    /// Worker threads; 0 means one per available core.
    pub jobs: usize,
}

/// Diagnostics of one cell in one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochDiagnostics {
    pub ice: bool,
    /// Absent for ice.
    pub stability: Option<StabilityReport>,
    pub anomaly: Option<Anomaly>,
    pub impact: Option<ImpactReport>,
    pub regime: Option<RegimeLabel>,
}

impl EpochDiagnostics {
    pub fn state(&self) -> EpochState {
        match &self.stability {
            Some(r) if !self.ice => EpochState::Open(r.gamma_crit),
            _ => EpochState::Ice,
        }
    }

    pub fn gamma_crit(&self) -> Option<f64> {
        self.stability.map(|r| r.gamma_crit)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub kind: ErrorKind,
    pub code: &'static str,
    pub message: String,
}

// Nearly every cell is `Done`, so boxing it would only add allocations.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Done {
        start: EpochDiagnostics,
        end: EpochDiagnostics,
        transition: TransitionOutcome,
        /// `γ_end - γ_start` when both epochs are open water.
        delta_gamma: Option<f64>,
    },
    /// A blank field in one of the grids.
    Missing,
    Failed(CellFailure),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellDiagnostics {
    /// Zero-based position in the start grid.
    pub index: usize,
    pub lat: f64,
    pub lon: f64,
    pub area_km2: f64,
    pub status: CellStatus,
}

impl CellDiagnostics {
    pub fn transition(&self) -> Option<TransitionLabel> {
        match &self.status {
            CellStatus::Done {
                transition: TransitionOutcome::Label(l),
                ..
            } => Some(*l),
            _ => None,
        }
    }
}

/// Summary category of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SummaryClass {
    Label(TransitionLabel),
    /// Ice-covered in the end epoch.
    Ice,
    Missing,
    Failed,
}

impl SummaryClass {
    pub fn all() -> Vec<SummaryClass> {
        let mut v: Vec<_> = TransitionLabel::ALL
            .iter()
            .map(|l| SummaryClass::Label(*l))
            .collect();
        v.extend([
            SummaryClass::Ice,
            SummaryClass::Missing,
            SummaryClass::Failed,
        ]);
        v
    }

    pub fn name(&self) -> &'static str {
        match self {
            SummaryClass::Label(l) => l.as_str(),
            SummaryClass::Ice => "Excluded: Ice",
            SummaryClass::Missing => "Excluded: Missing Data",
            SummaryClass::Failed => "Excluded: Numerical Failure",
        }
    }

    fn of(cell: &CellDiagnostics) -> Self {
        match &cell.status {
            CellStatus::Done {
                transition: TransitionOutcome::Label(l),
                ..
            } => SummaryClass::Label(*l),
            CellStatus::Done { .. } => SummaryClass::Ice,
            CellStatus::Missing => SummaryClass::Missing,
            CellStatus::Failed(_) => SummaryClass::Failed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub class: SummaryClass,
    pub cells: usize,
    pub area_km2: f64,
    /// Share of the total grid area.
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSummary {
    pub rows: Vec<SummaryRow>,
    pub total_area_km2: f64,
}

impl GridSummary {
    pub fn from_cells(cells: &[CellDiagnostics]) -> Self {
        let mut acc: BTreeMap<SummaryClass, (usize, f64)> = SummaryClass::all()
            .into_iter()
            .map(|c| (c, (0, 0.0)))
            .collect();
        let mut total = 0.0;
        for cell in cells {
            let e = acc
                .get_mut(&SummaryClass::of(cell))
                .expect("all classes present");
            e.0 += 1;
            e.1 += cell.area_km2;
            total += cell.area_km2;
        }
        let rows = SummaryClass::all()
            .into_iter()
            .map(|class| {
                let (n, area) = acc[&class];
                SummaryRow {
                    class,
                    cells: n,
                    area_km2: area,
                    percent: if total > 0.0 {
                        100.0 * area / total
                    } else {
                        0.0
                    },
                }
            })
            .collect();
        Self {
            rows,
            total_area_km2: total,
        }
    }

    pub fn row(&self, class: SummaryClass) -> &SummaryRow {
        self.rows
            .iter()
            .find(|r| r.class == class)
            .expect("all classes present")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtlasResult {
    pub cells: Vec<CellDiagnostics>,
    pub summary: GridSummary,
    pub resolution: (f64, f64),
}

impl AtlasResult {
    pub fn failures(&self) -> impl Iterator<Item = (&CellDiagnostics, &CellFailure)> {
        self.cells.iter().filter_map(|c| match &c.status {
            CellStatus::Failed(f) => Some((c, f)),
            _ => None,
        })
    }
}

/// Scenario grids; all three must cover the same cells.
#[derive(Debug, Clone, Copy)]
pub struct Scenario<'a> {
    pub start: &'a [CellRecord],
    pub end: &'a [CellRecord],
    pub reference: &'a [CellRecord],
}

fn align<'a>(
    base: &[CellRecord],
    other: &'a [CellRecord],
    missing: &mut Vec<(f64, f64)>,
) -> Vec<Option<&'a CellRecord>> {
    let index: HashMap<(u64, u64), &CellRecord> = other.iter().map(|c| (c.key(), c)).collect();
    let base_keys: std::collections::HashSet<_> = base.iter().map(CellRecord::key).collect();
    for c in other {
        if !base_keys.contains(&c.key()) {
            missing.push((c.lat, c.lon));
        }
    }
    base.iter()
        .map(|c| {
            let found = index.get(&c.key()).copied();
            if found.is_none() {
                missing.push((c.lat, c.lon));
            }
            found
        })
        .collect()
}

fn epoch(
    clim: &Climatology,
    reference: &SeasonalForcing,
    lat: f64,
    bio: &BioParams,
    light: &LightConfig,
    opts: &PipelineOptions,
) -> Result<EpochDiagnostics> {
    if clim.is_ice() {
        return Ok(EpochDiagnostics {
            ice: true,
            stability: None,
            anomaly: None,
            impact: None,
            regime: None,
        });
    }
    let forcing = clim.forcing(lat, light)?;
    let an = StabilityAnalyzer::new(&forcing, bio, opts.quadrature)?;
    let report = an.report(opts.c0)?;
    let anomaly = Anomaly::between(&forcing, reference)?;
    let grads = gamma_gradients_with(&an, &opts.finite_diff)?;
    let mut impact = realized_impacts(&grads, &anomaly);
    impact.r2 = Some(taylor_r2_with(&an, &opts.lattice)?);
    Ok(EpochDiagnostics {
        ice: false,
        stability: Some(report),
        anomaly: Some(anomaly),
        impact: Some(impact),
        regime: Some(classify_regime(report.gamma_crit)?),
    })
}

fn process(
    start: &Climatology,
    end: &Climatology,
    reference: &Climatology,
    lat: f64,
    bio: &BioParams,
    light: &LightConfig,
    opts: &PipelineOptions,
) -> Result<CellStatus> {
    let ref_forcing = reference.forcing(lat, light)?;
    let start = epoch(start, &ref_forcing, lat, bio, light, opts)?;
    let end = epoch(end, &ref_forcing, lat, bio, light, opts)?;
    let transition = classify_transition(start.state(), end.state())?;
    let delta_gamma = match (start.gamma_crit(), end.gamma_crit()) {
        (Some(a), Some(b)) => Some(b - a),
        _ => None,
    };
    Ok(CellStatus::Done {
        start,
        end,
        transition,
        delta_gamma,
    })
}

/// Run the per-cell pipeline. Output order follows the start grid whatever
/// the worker count.
pub fn run_pipeline(
    scenario: Scenario<'_>,
    bio: &BioParams,
    light: &LightConfig,
    opts: &PipelineOptions,
) -> Result<AtlasResult> {
    bio.validate()?;
    if !(opts.c0 > 0.0 && opts.c0.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "C_0 must be positive, got {}",
            opts.c0
        )));
    }
    let mut mismatch = Vec::new();
    let ends = align(scenario.start, scenario.end, &mut mismatch);
    let refs = align(scenario.start, scenario.reference, &mut mismatch);
    if !mismatch.is_empty() {
        mismatch.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        mismatch.dedup();
        return Err(Error::GridMismatch { cells: mismatch });
    }

    let (dlat, dlon) = infer_resolution(scenario.start);
    let work = |index: usize| -> Result<CellDiagnostics> {
        let cell = &scenario.start[index];
        let area_km2 = cell_area(cell.lat, dlat, dlon)?;
        let triple = (
            cell.climatology.as_ref(),
            ends[index].and_then(|c| c.climatology.as_ref()),
            refs[index].and_then(|c| c.climatology.as_ref()),
        );
        let status = match triple {
            (Some(s), Some(e), Some(r)) => match process(s, e, r, cell.lat, bio, light, opts) {
                Ok(status) => status,
                Err(err) => {
                    debug!("cell {index} ({}, {}): {err}", cell.lat, cell.lon);
                    CellStatus::Failed(CellFailure {
                        kind: err.kind(),
                        code: err.code(),
                        message: err.to_string(),
                    })
                }
            },
            _ => CellStatus::Missing,
        };
        Ok(CellDiagnostics {
            index,
            lat: cell.lat,
            lon: cell.lon,
            area_km2,
            status,
        })
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
    let cells: Vec<CellDiagnostics> = pool.install(|| {
        (0..scenario.start.len())
            .into_par_iter()
            .map(work)
            .collect::<Result<_>>()
    })?;
    let summary = GridSummary::from_cells(&cells);
    Ok(AtlasResult {
        cells,
        summary,
        resolution: (dlat, dlon),
    })
}
