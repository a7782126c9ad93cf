use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use npzt_core::atlas::{
    load_grid, raster, run_pipeline, write_diagnostics, write_errors, write_summary, CellRecord,
    PipelineOptions, Scenario,
};
use npzt_core::diagnostics::{classify_regime, FiniteDiff, Lattice};
use npzt_core::npzt::{assess_fate, integrate, EcoState, IntegratorControl};
use npzt_core::params::Params;
use npzt_core::stability::{Quadrature, StabilityAnalyzer};
use npzt_core::{Error, ErrorKind};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "npzt",
    version,
    about = "Plankton persistence thresholds from seasonal ocean climatologies"
)]
pub struct Cli {
    /// Only log errors
    #[arg(long, short, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit seasonal MLD and SST cycles to every cell of a grid
    Fit(FitArgs),
    /// Invasion exponent, multipliers and critical nutrient requirement per cell
    Stability(StabilityArgs),
    /// Integrate the full NPZ-T system for one cell
    Simulate(SimulateArgs),
    /// Two-epoch climate-shift diagnostics, summary table and maps
    Atlas(AtlasArgs),
    /// Print the version
    Version,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Grid CSV: lat,lon,sst01..sst12,mld01..mld12
    grid: PathBuf,
    /// Output file (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScienceArgs {
    /// Parameter file (TOML); required
    #[arg(long)]
    params: PathBuf,
    /// Total inventory C_0 in mmol m^-3 (default: file value, else 2 N_0)
    #[arg(long)]
    c0: Option<f64>,
}

#[derive(Debug, Args)]
struct QuadArgs {
    /// Quadrature nodes per period
    #[arg(long, default_value_t = Quadrature::default().nodes)]
    quad_nodes: usize,
}

#[derive(Debug, Args)]
struct StabilityArgs {
    /// Grid CSV
    grid: PathBuf,
    #[command(flatten)]
    science: ScienceArgs,
    #[command(flatten)]
    quad: QuadArgs,
    /// Output file (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Abort on the first failing cell
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Grid CSV holding the cell
    grid: PathBuf,
    /// Zero-based data row of the cell
    #[arg(long)]
    row: usize,
    #[command(flatten)]
    science: ScienceArgs,
    /// Simulated years
    #[arg(long, default_value_t = 10)]
    years: usize,
    /// Initial state N,P,Z; sets C_0 to its sum
    #[arg(long, value_delimiter = ',', num_args = 3, conflicts_with_all = ["seed", "c0"])]
    init: Option<Vec<f64>>,
    /// Draw a random initial state on the simplex from this seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output sampling interval in days
    #[arg(long, default_value_t = 1.0)]
    stride: f64,
    /// Relative integrator tolerance
    #[arg(long, default_value_t = 1e-8)]
    tol_rel: f64,
    /// Absolute integrator tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol_abs: f64,
    /// Output file (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AtlasArgs {
    /// Start-epoch grid CSV
    #[arg(long)]
    start: PathBuf,
    /// End-epoch grid CSV
    #[arg(long)]
    end: PathBuf,
    /// Reference-period grid CSV for the anomalies
    #[arg(long = "ref")]
    reference: PathBuf,
    #[command(flatten)]
    science: ScienceArgs,
    #[command(flatten)]
    quad: QuadArgs,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0: one per core)
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Also write PPM maps
    #[arg(long)]
    raster: bool,
    /// Abort on the first failing cell instead of reporting it
    #[arg(long)]
    strict: bool,
    /// Temperature step for the gradients, K
    #[arg(long, default_value_t = FiniteDiff::default().temp_step)]
    fd_temp: f64,
    /// Depth step for the gradients, fraction of h_max
    #[arg(long, default_value_t = FiniteDiff::default().mld_fraction)]
    fd_mld: f64,
    /// Taylor lattice points per axis
    #[arg(long, default_value_t = Lattice::default().n)]
    lattice_n: usize,
    /// Taylor lattice temperature half-width, K
    #[arg(long, default_value_t = Lattice::default().temp_span)]
    lattice_temp: f64,
    /// Taylor lattice depth half-width, fraction of h_max
    #[arg(long, default_value_t = Lattice::default().mld_fraction)]
    lattice_mld: f64,
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Input | ErrorKind::Io => EXIT_INPUT,
        ErrorKind::Numerical => EXIT_NUMERICAL,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(e.kind()),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

type CliResult<T = ExitCode> = std::result::Result<T, Failure>;

pub fn init_logging(quiet: bool) {
    let level = if quiet {
        log::LevelFilter::Error
    } else {
        log::LevelFilter::Info
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .format_target(false)
        .target(env_logger::Target::Stderr)
        .init();
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Fit(a) => fit(a),
        Command::Stability(a) => stability(a),
        Command::Simulate(a) => simulate(a),
        Command::Atlas(a) => atlas_cmd(a),
        Command::Version => {
            println!("npzt {}", env!("CARGO_PKG_VERSION"));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn sink(out: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            Failure::from(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn load_params(science: &ScienceArgs) -> CliResult<(Params, f64)> {
    let params = Params::load(&science.params)?;
    let c0 = science.c0.unwrap_or_else(|| params.c0_or_default());
    if !(c0.is_finite() && c0 > 0.0) {
        return Err(Failure::usage(format!("--c0 must be positive, got {c0}")));
    }
    Ok((params, c0))
}

fn num(v: f64) -> String {
    v.to_string()
}

fn csv_line(out: &mut dyn Write, fields: &[String]) -> std::io::Result<()> {
    writeln!(out, "{}", fields.join(","))
}

fn fit(a: FitArgs) -> CliResult {
    let cells = load_grid(&a.grid)?;
    let mut out = sink(&a.out)?;
    let head = [
        "lat",
        "lon",
        "ice",
        "h_max",
        "h_min",
        "t_peak",
        "t_mean",
        "amplitude",
        "phase",
        "period",
    ];
    csv_line(&mut out, &head.map(String::from))?;
    for cell in &cells {
        let mut row = vec![num(cell.lat), num(cell.lon)];
        match &cell.climatology {
            None => row.extend(vec![String::new(); 8]),
            Some(c) if c.is_ice() => {
                row.push("true".into());
                row.extend(vec![String::new(); 7]);
            }
            Some(c) => {
                let f = c.forcing(cell.lat, &Default::default())?;
                row.push("false".into());
                row.extend(
                    [
                        f.mld.h_max,
                        f.mld.h_min,
                        f.mld.t_peak,
                        f.sst.t_mean,
                        f.sst.amplitude,
                        f.sst.phase,
                        f.period,
                    ]
                    .map(num),
                );
            }
        }
        csv_line(&mut out, &row)?;
    }
    out.flush()?;
    info!("fitted {} cells", cells.len());
    Ok(ExitCode::SUCCESS)
}

fn stability(a: StabilityArgs) -> CliResult {
    let (params, c0) = load_params(&a.science)?;
    let cells = load_grid(&a.grid)?;
    let quad = Quadrature {
        nodes: a.quad.quad_nodes,
    };
    let mut out = sink(&a.out)?;
    let head = [
        "lat",
        "lon",
        "status",
        "c0",
        "lambda_p",
        "rho_p",
        "rho_z",
        "gain",
        "loss",
        "gamma_crit",
        "break_even_c0",
        "regime",
    ];
    csv_line(&mut out, &head.map(String::from))?;
    let mut worst: Option<u8> = None;
    for (i, cell) in cells.iter().enumerate() {
        let mut row = vec![num(cell.lat), num(cell.lon)];
        let computed = match &cell.climatology {
            None => Err("missing"),
            Some(c) if c.is_ice() => Err("ice"),
            Some(c) => Ok(c
                .forcing(cell.lat, &params.light)
                .and_then(|f| StabilityAnalyzer::new(&f, &params.bio, quad))
                .and_then(|an| Ok((an.report(c0)?, an.break_even_inventory()?)))
                .and_then(|(r, c)| Ok((r, c, classify_regime(r.gamma_crit)?)))),
        };
        match computed {
            Err(status) => {
                row.push(status.into());
                row.extend(vec![String::new(); 9]);
            }
            Ok(Err(e)) => {
                if a.strict {
                    return Err(Failure {
                        code: exit_code(e.kind()),
                        message: format!("cell {i} ({}, {}): {e}", cell.lat, cell.lon),
                    });
                }
                warn!("cell {i} ({}, {}): {e}", cell.lat, cell.lon);
                worst = worst.max(Some(exit_code(e.kind())));
                row.push("failed".into());
                row.extend(vec![String::new(); 9]);
            }
            Ok(Ok((r, break_even, regime))) => {
                row.push("ok".into());
                row.extend(
                    [
                        r.c0_used,
                        r.lambda_p,
                        r.rho_p,
                        r.rho_z,
                        r.gain,
                        r.loss,
                        r.gamma_crit,
                    ]
                    .map(num),
                );
                row.push(break_even.map(num).unwrap_or_default());
                row.push(regime.as_str().into());
            }
        }
        csv_line(&mut out, &row)?;
    }
    out.flush()?;
    Ok(worst.map_or(ExitCode::SUCCESS, ExitCode::from))
}

fn random_state(seed: u64, c0: f64) -> EcoState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // log-uniform P in [1e-8, 0.5] C_0, Z uniform in the remaining half
    let p = c0 * rng.gen_range((1e-8f64).ln()..0.5f64.ln()).exp();
    let z = rng.gen_range(0.0..0.5) * (c0 - p);
    EcoState::new(c0 - p - z, p, z)
}

fn pick_cell(cells: &[CellRecord], row: usize) -> CliResult<&CellRecord> {
    cells
        .get(row)
        .ok_or_else(|| Failure::usage(format!("--row {row} out of range ({} cells)", cells.len())))
}

fn simulate(a: SimulateArgs) -> CliResult {
    let (params, c0) = load_params(&a.science)?;
    if a.years == 0 {
        return Err(Failure::usage("--years must be at least 1"));
    }
    let cells = load_grid(&a.grid)?;
    let cell = pick_cell(&cells, a.row)?;
    let clim = cell.climatology.ok_or_else(|| Failure {
        code: EXIT_INPUT,
        message: format!("row {} has missing data", a.row),
    })?;
    if clim.is_ice() {
        warn!(
            "cell ({}, {}) is ice-covered; simulating anyway",
            cell.lat, cell.lon
        );
    }
    let forcing = clim.forcing(cell.lat, &params.light)?;
    let s0 = match (&a.init, a.seed) {
        (Some(v), _) => EcoState::new(v[0], v[1], v[2]),
        (None, Some(seed)) => random_state(seed, c0),
        (None, None) => EcoState::new(0.98 * c0, 0.01 * c0, 0.01 * c0),
    };
    let ctrl = IntegratorControl {
        rtol: a.tol_rel,
        atol: a.tol_abs,
        stride: a.stride,
        ..Default::default()
    };
    let t_end = a.years as f64 * forcing.period;
    let traj = integrate(s0, 0.0, t_end, &forcing, &params.bio, &ctrl)?;
    let mut out = sink(&a.out)?;
    traj.write_csv(&mut out, &forcing, &params.bio)?;
    out.flush()?;

    let lambda = StabilityAnalyzer::new(&forcing, &params.bio, Quadrature::default())?
        .invasion_exponent(traj.c0)?;
    let fate = assess_fate(s0, &forcing, &params.bio, a.years, &ctrl)?;
    info!(
        "C0 = {}, lambda_P = {lambda:.6e} /d, final-year P in [{:.3e}, {:.3e}], max drift {:.3e}{}",
        traj.c0,
        fate.final_year_min_p,
        fate.final_year_max_p,
        traj.max_drift(),
        if fate.is_extinct() { " (extinct)" } else { "" }
    );
    Ok(ExitCode::SUCCESS)
}

fn create(dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| {
        Failure::from(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    Ok(BufWriter::new(file))
}

fn atlas_cmd(a: AtlasArgs) -> CliResult {
    let (params, c0) = load_params(&a.science)?;
    if a.jobs > 1024 {
        return Err(Failure::usage(format!("--jobs {} is unreasonable", a.jobs)));
    }
    let opts = PipelineOptions {
        c0,
        quadrature: Quadrature {
            nodes: a.quad.quad_nodes,
        },
        finite_diff: FiniteDiff {
            temp_step: a.fd_temp,
            mld_fraction: a.fd_mld,
        },
        lattice: Lattice {
            n: a.lattice_n,
            temp_span: a.lattice_temp,
            mld_fraction: a.lattice_mld,
        },
        jobs: a.jobs,
    };
    let start = load_grid(&a.start)?;
    let end = load_grid(&a.end)?;
    let reference = load_grid(&a.reference)?;
    info!("{} cells, C0 = {c0}", start.len());
    let scenario = Scenario {
        start: &start,
        end: &end,
        reference: &reference,
    };
    let result = run_pipeline(scenario, &params.bio, &params.light, &opts)?;

    let failures: Vec<_> = result.failures().collect();
    if a.strict {
        if let Some((cell, f)) = failures.first() {
            return Err(Failure {
                code: exit_code(f.kind),
                message: format!(
                    "cell {} ({}, {}): {}",
                    cell.index, cell.lat, cell.lon, f.message
                ),
            });
        }
    }

    std::fs::create_dir_all(&a.out)?;
    let mut w = create(&a.out, "diagnostics.csv")?;
    write_diagnostics(&mut w, &result)?;
    w.flush()?;
    let mut w = create(&a.out, "summary.csv")?;
    write_summary(&mut w, &result.summary)?;
    w.flush()?;
    let mut w = create(&a.out, "errors.jsonl")?;
    let n_errors = write_errors(&mut w, &result)?;
    w.flush()?;
    if a.raster {
        let paths = raster::write_rasters(&a.out, &result)?;
        info!("wrote {} maps", paths.len());
    }
    for row in &result.summary.rows {
        info!(
            "{:<28} {:>7} cells {:>12.4} x10^6 km2 {:>8.3} %",
            row.class.name(),
            row.cells,
            row.area_km2 / 1e6,
            row.percent
        );
    }
    if n_errors > 0 {
        warn!(
            "{n_errors} cells failed; see {}",
            a.out.join("errors.jsonl").display()
        );
        let code = failures
            .iter()
            .map(|(_, f)| exit_code(f.kind))
            .max()
            .unwrap_or(EXIT_NUMERICAL);
        return Ok(ExitCode::from(code));
    }
    Ok(ExitCode::SUCCESS)
}
