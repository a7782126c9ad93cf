use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A value outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("rate law has no interior optimum (delta_c = {delta_c}, delta_h = {delta_h})")]
    NoInteriorOptimum { delta_c: f64, delta_h: f64 },

    #[error("integrator step size underflow at t = {t} d")]
    StepUnderflow { t: f64 },

    #[error("integrator exceeded {max_steps} steps before t = {t} d")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("state left the nonnegative simplex at t = {t} d: {detail}")]
    Positivity { t: f64, detail: String },

    #[error("quadrature did not converge (residual estimate {residual:e})")]
    Quadrature { residual: f64 },

    #[error("sensitivity undefined: {0}")]
    SensitivityUndefined(String),

    #[error("degenerate Taylor lattice: {0}")]
    DegenerateLattice(String),

    #[error("row {row}, column `{column}`: {message}")]
    Schema {
        row: usize,
        column: String,
        message: String,
    },

    #[error("grids differ in {} cell(s): {}", .cells.len(), format_cells(.cells))]
    GridMismatch { cells: Vec<(f64, f64)> },

    #[error("parameter file: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_cells(cells: &[(f64, f64)]) -> String {
    const SHOWN: usize = 8;
    let mut out: Vec<String> = cells
        .iter()
        .take(SHOWN)
        .map(|(lat, lon)| format!("({lat}, {lon})"))
        .collect();
    if cells.len() > SHOWN {
        out.push(format!("... {} more", cells.len() - SHOWN));
    }
    out.join(", ")
}

/// Coarse error class, used for machine-readable reports and exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numerical,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidInput(_)
            | Error::Domain(_)
            | Error::NoInteriorOptimum { .. }
            | Error::Schema { .. }
            | Error::GridMismatch { .. }
            | Error::Config(_)
            | Error::DegenerateLattice(_) => ErrorKind::Input,
            Error::StepUnderflow { .. }
            | Error::TooManySteps { .. }
            | Error::Positivity { .. }
            | Error::Quadrature { .. }
            | Error::SensitivityUndefined(_) => ErrorKind::Numerical,
            Error::Io(_) => ErrorKind::Io,
        }
    }

    /// Short stable identifier, e.g. `step_underflow`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Domain(_) => "domain",
            Error::NoInteriorOptimum { .. } => "no_interior_optimum",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::TooManySteps { .. } => "too_many_steps",
            Error::Positivity { .. } => "positivity",
            Error::Quadrature { .. } => "quadrature",
            Error::SensitivityUndefined(_) => "sensitivity_undefined",
            Error::DegenerateLattice(_) => "degenerate_lattice",
            Error::Schema { .. } => "schema",
            Error::GridMismatch { .. } => "grid_mismatch",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}
