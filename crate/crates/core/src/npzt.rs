//! The nonlinear NPZ-T system.
//!
//! ```text
//! dN/dt = -f g P + (1-α) h Z + m_P P + m_Z Z² + s_+ (P + Z)
//! dP/dt =  f g P - h Z - m_P P - s_+ P
//! dZ/dt =  α h Z - m_Z Z² - s_+ Z
//! ```
//!
//! with Monod uptake `g = μ_P(T) N / (N + N_0)` and Holling type III grazing
//! `h = μ_Z(T) P² / (P² + P_0²)`. The right-hand side sums to zero, so the
//! total inventory `C_0 = N + P + Z` is conserved and trajectories stay on the
//! simplex `{N, P, Z >= 0, N + P + Z = C_0}`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::forcing::SeasonalForcing;
use crate::ode::{DormandPrince, StepCheck};
use crate::thermo::BioParams;

/// Relative size (of `C_0`) below which a negative component is treated as
/// round-off and clipped.
pub const CLIP_TOLERANCE: f64 = 1e-12;

/// Phytoplankton below this fraction of `C_0` for a full period counts as
/// extinct.
pub const EXTINCTION_FRACTION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EcoState {
    pub n: f64,
    pub p: f64,
    pub z: f64,
}

impl EcoState {
    pub fn new(n: f64, p: f64, z: f64) -> Self {
        Self { n, p, z }
    }

    /// Extinction equilibrium `E_0 = (C_0, 0, 0)`.
    pub fn extinction(c0: f64) -> Self {
        Self::new(c0, 0.0, 0.0)
    }

    pub fn total(&self) -> f64 {
        self.n + self.p + self.z
    }

    fn to_array(self) -> [f64; 3] {
        [self.n, self.p, self.z]
    }

    fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    fn is_nonnegative(&self) -> bool {
        self.n >= 0.0 && self.p >= 0.0 && self.z >= 0.0
    }
}

/// Instantaneous environment-dependent rates at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub light: f64,
    pub mu_p: f64,
    pub mu_z: f64,
    pub m_p: f64,
    pub m_z: f64,
    pub s_plus: f64,
}

impl Rates {
    pub fn at(t: f64, forcing: &SeasonalForcing, bio: &BioParams) -> Self {
        let temp = forcing.temperature(t);
        Self {
            light: forcing.light_factor(t, bio.k_d, bio.i_half),
            mu_p: bio.growth.rate(temp),
            mu_z: bio.grazing.rate(temp),
            m_p: bio.mort_p.rate(temp),
            m_z: bio.mort_z.rate(temp),
            s_plus: forcing.entrainment(t),
        }
    }
}

fn derivative(s: &EcoState, r: &Rates, bio: &BioParams) -> EcoState {
    let uptake = r.mu_p * s.n / (s.n + bio.n_half);
    let p2 = s.p * s.p;
    let grazing = r.mu_z * p2 / (p2 + bio.p_half * bio.p_half);
    let growth = r.light * uptake * s.p;
    EcoState {
        n: -growth
            + (1.0 - bio.alpha) * grazing * s.z
            + r.m_p * s.p
            + r.m_z * s.z * s.z
            + r.s_plus * (s.p + s.z),
        p: growth - grazing * s.z - r.m_p * s.p - r.s_plus * s.p,
        z: bio.alpha * grazing * s.z - r.m_z * s.z * s.z - r.s_plus * s.z,
    }
}

/// Time derivative of the state. Rejects states off the nonnegative orthant.
pub fn rhs(t: f64, s: &EcoState, forcing: &SeasonalForcing, bio: &BioParams) -> Result<EcoState> {
    if !s.is_nonnegative() {
        return Err(Error::Domain(format!("negative state component {s:?}")));
    }
    Ok(derivative(s, &Rates::at(t, forcing, bio), bio))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorControl {
    pub rtol: f64,
    pub atol: f64,
    /// Output sampling interval in days.
    pub stride: f64,
    pub max_steps: usize,
}

impl Default for IntegratorControl {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            stride: 1.0,
            max_steps: 5_000_000,
        }
    }
}

impl IntegratorControl {
    fn solver(&self) -> DormandPrince {
        DormandPrince {
            rtol: self.rtol,
            atol: self.atol,
            max_steps: self.max_steps,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.stride > 0.0) || !self.stride.is_finite() {
            return Err(Error::InvalidInput(format!(
                "integrator tolerances and stride must be positive ({self:?})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<EcoState>,
    pub c0: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&EcoState> {
        self.states.last()
    }

    /// Largest `|N + P + Z - C_0|` over the samples.
    pub fn max_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (s.total() - self.c0).abs())
            .fold(0.0, f64::max)
    }

    /// Samples with `t >= since`.
    pub fn since(&self, since: f64) -> impl Iterator<Item = (f64, &EcoState)> {
        self.times
            .iter()
            .copied()
            .zip(self.states.iter())
            .filter(move |(t, _)| *t >= since)
    }

    /// CSV export: `t_days,N,P,Z,H,T,I,f,s_plus`, 17 significant digits.
    pub fn write_csv<W: Write>(
        &self,
        mut out: W,
        forcing: &SeasonalForcing,
        bio: &BioParams,
    ) -> Result<()> {
        writeln!(out, "t_days,N,P,Z,H,T,I,f,s_plus")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let t = *t;
            let row = [
                t,
                s.n,
                s.p,
                s.z,
                forcing.depth(t),
                forcing.temperature(t),
                forcing.irradiance(t),
                forcing.light_factor(t, bio.k_d, bio.i_half),
                forcing.entrainment(t),
            ];
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Keeps a trial state on the simplex: round-off negatives are clipped and
/// their mass is taken from the other components, anything larger rejects
/// the step.
fn simplex_guard(c0: f64) -> impl FnMut(f64, &mut [f64; 3]) -> StepCheck {
    let floor = -CLIP_TOLERANCE * c0;
    move |_, y| {
        if y.iter().any(|v| !v.is_finite() || *v < floor) {
            return StepCheck::Reject;
        }
        if y.iter().all(|v| *v >= 0.0) {
            return StepCheck::Accept;
        }
        let mut deficit = 0.0;
        for v in y.iter_mut() {
            if *v < 0.0 {
                deficit += *v;
                *v = 0.0;
            }
        }
        // Nutrient absorbs the deficit; if it is the clipped component, the
        // largest remaining pool does.
        let sink = if y[0] + deficit >= 0.0 {
            0
        } else if y[1] >= y[2] {
            1
        } else {
            2
        };
        y[sink] = (y[sink] + deficit).max(0.0);
        StepCheck::Adjusted
    }
}

fn check_initial(s0: &EcoState) -> Result<f64> {
    let c0 = s0.total();
    if !s0.is_nonnegative() || !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::InvalidInput(format!(
            "initial state must be nonnegative with positive total, got {s0:?}"
        )));
    }
    Ok(c0)
}

fn run(
    s0: EcoState,
    t0: f64,
    outputs: &[f64],
    forcing: &SeasonalForcing,
    bio: &BioParams,
    ctrl: &IntegratorControl,
    mut emit: impl FnMut(f64, EcoState),
) -> Result<EcoState> {
    bio.validate()?;
    ctrl.validate()?;
    let c0 = check_initial(&s0)?;
    let f = |t: f64, y: &[f64; 3]| {
        let s = EcoState::from_array(*y);
        derivative(&s, &Rates::at(t, forcing, bio), bio).to_array()
    };
    let end = ctrl
        .solver()
        .solve(f, t0, s0.to_array(), outputs, simplex_guard(c0), |t, y| {
            emit(t, EcoState::from_array(*y))
        })?;
    let end = EcoState::from_array(end);
    if !end.is_nonnegative() {
        return Err(Error::Positivity {
            t: outputs.last().copied().unwrap_or(t0),
            detail: format!("{end:?}"),
        });
    }
    Ok(end)
}

fn sample_times(t0: f64, t1: f64, stride: f64) -> Vec<f64> {
    let mut times = Vec::new();
    let mut k = 0u64;
    loop {
        let t = t0 + stride * k as f64;
        if t >= t1 - 1e-9 * stride {
            break;
        }
        times.push(t);
        k += 1;
    }
    times.push(t1);
    times
}

/// Integrate from `t0` to `t1`, sampling every `ctrl.stride` days plus `t1`.
pub fn integrate(
    s0: EcoState,
    t0: f64,
    t1: f64,
    forcing: &SeasonalForcing,
    bio: &BioParams,
    ctrl: &IntegratorControl,
) -> Result<Trajectory> {
    if !(t1 > t0) {
        return Err(Error::InvalidInput(format!(
            "need t1 > t0 (t0 = {t0}, t1 = {t1})"
        )));
    }
    ctrl.validate()?;
    let c0 = check_initial(&s0)?;
    let outputs = sample_times(t0, t1, ctrl.stride);
    let mut traj = Trajectory {
        times: Vec::with_capacity(outputs.len()),
        states: Vec::with_capacity(outputs.len()),
        c0,
    };
    run(s0, t0, &outputs, forcing, bio, ctrl, |t, s| {
        traj.times.push(t);
        traj.states.push(s);
    })?;
    Ok(traj)
}

/// States at `t = 0, T_p, 2 T_p, ..., years * T_p` (length `years + 1`).
pub fn annual_poincare(
    s0: EcoState,
    forcing: &SeasonalForcing,
    bio: &BioParams,
    years: usize,
    ctrl: &IntegratorControl,
) -> Result<Vec<EcoState>> {
    if years == 0 {
        return Err(Error::InvalidInput("need at least one year".into()));
    }
    let outputs: Vec<f64> = (0..=years).map(|n| n as f64 * forcing.period).collect();
    let mut strobes = Vec::with_capacity(outputs.len());
    run(s0, 0.0, &outputs, forcing, bio, ctrl, |_, s| {
        strobes.push(s)
    })?;
    Ok(strobes)
}

/// Long-run behaviour of phytoplankton from one initial condition.
#[derive(Debug, Clone, PartialEq)]
pub struct FateReport {
    pub c0: f64,
    pub years: usize,
    /// States at period multiples, starting with the initial state.
    pub strobes: Vec<EcoState>,
    pub final_year_min_p: f64,
    pub final_year_max_p: f64,
    /// Largest conservation error seen at any sample.
    pub max_drift: f64,
}

impl FateReport {
    /// `P < 1e-12 C_0` throughout the final period.
    pub fn is_extinct(&self) -> bool {
        self.final_year_max_p < EXTINCTION_FRACTION * self.c0
    }

    /// Lowest `P` over the final period, as a fraction of `C_0`.
    pub fn persistence_floor(&self) -> f64 {
        self.final_year_min_p / self.c0
    }
}

/// Simulate `years` periods from `s0` and summarise the final one.
pub fn assess_fate(
    s0: EcoState,
    forcing: &SeasonalForcing,
    bio: &BioParams,
    years: usize,
    ctrl: &IntegratorControl,
) -> Result<FateReport> {
    if years == 0 {
        return Err(Error::InvalidInput("need at least one year".into()));
    }
    let c0 = check_initial(&s0)?;
    let t_end = years as f64 * forcing.period;
    let last_start = t_end - forcing.period;
    let mut outputs = sample_times(0.0, t_end, ctrl.stride);
    for n in 1..years {
        outputs.push(n as f64 * forcing.period);
    }
    outputs.sort_by(f64::total_cmp);
    outputs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    let mut strobes = vec![s0];
    let mut next_strobe = 1usize;
    let (mut lo, mut hi, mut drift) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    run(s0, 0.0, &outputs, forcing, bio, ctrl, |t, s| {
        drift = drift.max((s.total() - c0).abs());
        if t >= last_start - 1e-9 {
            lo = lo.min(s.p);
            hi = hi.max(s.p);
        }
        if next_strobe <= years && (t - next_strobe as f64 * forcing.period).abs() < 1e-9 {
            strobes.push(s);
            next_strobe += 1;
        }
    })?;
    Ok(FateReport {
        c0,
        years,
        strobes,
        final_year_min_p: lo,
        final_year_max_p: hi,
        max_drift: drift,
    })
}
