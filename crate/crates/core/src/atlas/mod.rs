//! Gridded ingestion, per-cell orchestration and map products.

mod grid;
mod output;
mod pipeline;
pub mod raster;

pub use grid::{
    cell_area, header, infer_resolution, load_grid, read_grid, write_grid, CellRecord, Climatology,
    EARTH_RADIUS_KM, ICE_THRESHOLD_C,
};
pub use output::{diagnostics_header, kind_name, write_diagnostics, write_errors, write_summary};
pub use pipeline::{
    run_pipeline, AtlasResult, CellDiagnostics, CellFailure, CellStatus, EpochDiagnostics,
    GridSummary, PipelineOptions, Scenario, SummaryClass, SummaryRow,
};
