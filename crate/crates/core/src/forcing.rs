//! Periodic environmental drivers for a single grid cell.
//!
//! Mixed-layer depth `H(t)`, sea-surface temperature `T(t)` and surface
//! irradiance `I(t)` are smooth `period`-periodic functions of the day of
//! year. The light-limitation factor `f(t)` and the entrainment rate
//! `s_+(t)` are derived from them.
//!
//! Monthly climatologies are placed at month midpoints,
//! `period / 12 * (m + 0.5)` for the zero-based month index `m`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const DAYS_PER_YEAR: f64 = 365.0;
pub const MONTHS: usize = 12;

/// Day of year assigned to the zero-based month index `month`.
pub fn month_midpoint(month: usize, period: f64) -> f64 {
    period / MONTHS as f64 * (month as f64 + 0.5)
}

fn check_period(period: f64) -> Result<()> {
    if period.is_finite() && period > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "period must be positive, got {period}"
        )))
    }
}

fn twelve<'a>(monthly: &'a [f64], what: &str) -> Result<&'a [f64; MONTHS]> {
    monthly.try_into().map_err(|_| {
        Error::InvalidInput(format!(
            "{what} climatology needs {MONTHS} monthly values, got {}",
            monthly.len()
        ))
    })
}

/// Raised-cosine mixed-layer depth cycle anchored at its deepest day.
///
/// `H(t) = h_min + (h_max - h_min) * (1 + cos(2π (t - t_peak) / period)) / 2`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MldCycle {
    pub h_max: f64,
    pub h_min: f64,
    pub t_peak: f64,
    pub period: f64,
}

impl MldCycle {
    pub fn new(h_max: f64, h_min: f64, t_peak: f64, period: f64) -> Result<Self> {
        check_period(period)?;
        if !(h_min.is_finite() && h_max.is_finite() && h_min > 0.0) {
            return Err(Error::InvalidInput(format!(
                "mixed-layer depths must be finite and positive (h_min = {h_min}, h_max = {h_max})"
            )));
        }
        if h_min > h_max {
            return Err(Error::InvalidInput(format!(
                "h_min = {h_min} exceeds h_max = {h_max}"
            )));
        }
        if !t_peak.is_finite() {
            return Err(Error::InvalidInput("t_peak must be finite".into()));
        }
        Ok(Self {
            h_max,
            h_min,
            t_peak: t_peak.rem_euclid(period),
            period,
        })
    }

    /// Constant-depth cycle; entrainment vanishes identically.
    pub fn flat(depth: f64, period: f64) -> Result<Self> {
        Self::new(depth, depth, 0.0, period)
    }

    fn phase(&self, t: f64) -> f64 {
        2.0 * PI * (t - self.t_peak).rem_euclid(self.period) / self.period
    }

    /// Unit-amplitude depth profile and its time derivative at `t`:
    /// `H = h_min + (h_max - h_min) * shape`, `H' = (h_max - h_min) * slope`.
    pub(crate) fn shape(&self, t: f64) -> (f64, f64) {
        let (sin, cos) = self.phase(t).sin_cos();
        (0.5 * (1.0 + cos), -0.5 * (2.0 * PI / self.period) * sin)
    }

    /// Depth and entrainment for a given unit-amplitude profile.
    pub(crate) fn apply_shape(&self, shape: (f64, f64)) -> (f64, f64) {
        let amp = self.h_max - self.h_min;
        let depth = self.h_min + amp * shape.0;
        (depth, (amp * shape.1 / depth).max(0.0))
    }

    pub fn depth(&self, t: f64) -> f64 {
        self.apply_shape(self.shape(t)).0
    }

    /// Analytic `dH/dt` in m per day.
    pub fn depth_rate(&self, t: f64) -> f64 {
        (self.h_max - self.h_min) * self.shape(t).1
    }

    /// Entrainment dilution `s_+ = max(0, H'/H)`.
    pub fn entrainment(&self, t: f64) -> f64 {
        self.apply_shape(self.shape(t)).1
    }

    /// Days in `[0, period)` where `H'` changes sign: the deepest and the
    /// shallowest day. `s_+` has a kink at both.
    pub fn turning_points(&self) -> [f64; 2] {
        [
            self.t_peak,
            (self.t_peak + 0.5 * self.period).rem_euclid(self.period),
        ]
    }
}

/// Fit the raised-cosine cycle to 12 monthly mean depths.
///
/// `h_max` and `h_min` are the monthly extremes and the peak is placed at the
/// midpoint of the deepest month (the first one on ties).
pub fn fit_mld(monthly: &[f64]) -> Result<MldCycle> {
    fit_mld_with_period(monthly, DAYS_PER_YEAR)
}

pub fn fit_mld_with_period(monthly: &[f64], period: f64) -> Result<MldCycle> {
    let monthly = twelve(monthly, "MLD")?;
    for (month, &h) in monthly.iter().enumerate() {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidInput(format!(
                "MLD for month {} must be finite and positive, got {h}",
                month + 1
            )));
        }
    }
    let (peak_month, h_max) =
        monthly
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (m, h)| {
                if h > best.1 {
                    (m, h)
                } else {
                    best
                }
            });
    let h_min = monthly.iter().copied().fold(f64::INFINITY, f64::min);
    MldCycle::new(h_max, h_min, month_midpoint(peak_month, period), period)
}

/// Single-harmonic sea-surface temperature cycle.
///
/// `T(t) = t_mean + amplitude * cos(2π (t - phase) / period)`, in kelvin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SstCycle {
    pub t_mean: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub period: f64,
}

impl SstCycle {
    pub fn new(t_mean: f64, amplitude: f64, phase: f64, period: f64) -> Result<Self> {
        check_period(period)?;
        if !(t_mean.is_finite() && amplitude.is_finite() && phase.is_finite()) || amplitude < 0.0 {
            return Err(Error::InvalidInput(format!(
                "invalid SST cycle (mean {t_mean}, amplitude {amplitude}, phase {phase})"
            )));
        }
        Ok(Self {
            t_mean,
            amplitude,
            phase: phase.rem_euclid(period),
            period,
        })
    }

    pub fn constant(t: f64, period: f64) -> Result<Self> {
        Self::new(t, 0.0, 0.0, period)
    }

    /// `cos(2π (t - phase) / period)`.
    pub(crate) fn shape(&self, t: f64) -> f64 {
        (2.0 * PI * (t - self.phase).rem_euclid(self.period) / self.period).cos()
    }

    pub fn temperature(&self, t: f64) -> f64 {
        self.t_mean + self.amplitude * self.shape(t)
    }

    pub fn min(&self) -> f64 {
        self.t_mean - self.amplitude
    }

    pub fn max(&self) -> f64 {
        self.t_mean + self.amplitude
    }

    /// Same cycle with the mean shifted by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            t_mean: self.t_mean + offset,
            ..*self
        }
    }
}

/// Fit mean and first Fourier harmonic to 12 monthly temperatures.
pub fn fit_sst(monthly: &[f64]) -> Result<SstCycle> {
    fit_sst_with_period(monthly, DAYS_PER_YEAR)
}

pub fn fit_sst_with_period(monthly: &[f64], period: f64) -> Result<SstCycle> {
    check_period(period)?;
    let monthly = twelve(monthly, "SST")?;
    if let Some(m) = monthly.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "SST for month {} is not finite",
            m + 1
        )));
    }
    let n = MONTHS as f64;
    let t_mean = monthly.iter().sum::<f64>() / n;
    let (mut a, mut b) = (0.0, 0.0);
    for (m, &v) in monthly.iter().enumerate() {
        let omega_t = 2.0 * PI * month_midpoint(m, period) / period;
        a += (v - t_mean) * omega_t.cos();
        b += (v - t_mean) * omega_t.sin();
    }
    a *= 2.0 / n;
    b *= 2.0 / n;
    let mut amplitude = a.hypot(b);
    // Round-off residue of a constant series.
    if amplitude <= 1e-12 * t_mean.abs() {
        amplitude = 0.0;
    }
    let phase = if amplitude == 0.0 {
        0.0
    } else {
        b.atan2(a) * period / (2.0 * PI)
    };
    SstCycle::new(t_mean, amplitude, phase, period)
}

/// Daily-mean surface photosynthetically active radiation from solar geometry.
///
/// Declination `δ = 23.45° sin(2π (284 + d) / period)`, sunset hour angle
/// `ω_s = acos(-tan φ tan δ)` clamped to `[0, π]`, daily-mean top-of-atmosphere
/// flux `S/π (ω_s sin φ sin δ + cos φ cos δ sin ω_s)` at mean Earth–Sun
/// distance. Surface PAR is that flux times `transmittance * par_fraction`,
/// converted with `i_unit_scale` (µmol photons per joule).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrradianceModel {
    pub latitude: f64,
    pub transmittance: f64,
    pub par_fraction: f64,
    pub i_unit_scale: f64,
    pub solar_constant: f64,
    pub period: f64,
}

const MAX_DECLINATION_DEG: f64 = 23.45;

impl IrradianceModel {
    pub const DEFAULT_TRANSMITTANCE: f64 = 0.7;
    pub const DEFAULT_PAR_FRACTION: f64 = 0.43;
    pub const DEFAULT_UNIT_SCALE: f64 = 4.57;
    pub const DEFAULT_SOLAR_CONSTANT: f64 = 1367.0;

    pub fn at_latitude(latitude: f64) -> Self {
        Self {
            latitude,
            transmittance: Self::DEFAULT_TRANSMITTANCE,
            par_fraction: Self::DEFAULT_PAR_FRACTION,
            i_unit_scale: Self::DEFAULT_UNIT_SCALE,
            solar_constant: Self::DEFAULT_SOLAR_CONSTANT,
            period: DAYS_PER_YEAR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_period(self.period)?;
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(Error::InvalidInput(format!(
                "latitude {} outside [-90, 90]",
                self.latitude
            )));
        }
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !unit(self.transmittance) || !unit(self.par_fraction) {
            return Err(Error::InvalidInput(
                "transmittance and par_fraction must lie in (0, 1]".into(),
            ));
        }
        if !(self.i_unit_scale > 0.0 && self.solar_constant > 0.0)
            || !self.i_unit_scale.is_finite()
            || !self.solar_constant.is_finite()
        {
            return Err(Error::InvalidInput(
                "i_unit_scale and solar_constant must be positive".into(),
            ));
        }
        Ok(())
    }

    fn declination(&self, t: f64) -> f64 {
        let d = t.rem_euclid(self.period);
        MAX_DECLINATION_DEG.to_radians() * (2.0 * PI * (284.0 + d) / self.period).sin()
    }

    /// Surface PAR in µmol m⁻² s⁻¹ on day `t`.
    pub fn irradiance(&self, t: f64) -> f64 {
        let phi = self.latitude.to_radians();
        let delta = self.declination(t);
        let omega_s = (-phi.tan() * delta.tan()).clamp(-1.0, 1.0).acos();
        let toa = self.solar_constant / PI
            * (omega_s * phi.sin() * delta.sin() + phi.cos() * delta.cos() * omega_s.sin());
        toa.max(0.0) * self.transmittance * self.par_fraction * self.i_unit_scale
    }

    /// Days in `[0, period)` where polar day or polar night begins or ends.
    /// `I(t)` is continuous but not smooth there.
    pub fn kinks(&self) -> Vec<f64> {
        let colat = 90.0 - self.latitude.abs();
        if colat > MAX_DECLINATION_DEG {
            return Vec::new();
        }
        let s = colat / MAX_DECLINATION_DEG;
        let mut days = Vec::with_capacity(4);
        for target in [s, -s] {
            let theta = target.asin();
            for th in [theta, PI - theta] {
                let d = (th * self.period / (2.0 * PI) - 284.0).rem_euclid(self.period);
                days.push(d);
            }
        }
        days
    }
}

/// Source of surface irradiance for a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LightSource {
    Astronomical(IrradianceModel),
    /// Time-invariant PAR, for controlled experiments.
    Constant(f64),
}

impl LightSource {
    pub fn irradiance(&self, t: f64) -> f64 {
        match self {
            LightSource::Astronomical(model) => model.irradiance(t),
            LightSource::Constant(value) => *value,
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match self {
            LightSource::Astronomical(model) => model.kinks(),
            LightSource::Constant(_) => Vec::new(),
        }
    }
}

/// Total function form of [`IrradianceModel::irradiance`].
pub fn irradiance_at(model: &IrradianceModel, t: f64) -> f64 {
    model.irradiance(t)
}

fn depth_average(x: f64) -> f64 {
    // (1 - e^{-x}) / x, with the x -> 0 limit
    if x == 0.0 {
        1.0
    } else {
        -(-x).exp_m1() / x
    }
}

pub(crate) fn light_limitation_unchecked(h: f64, i: f64, k_d: f64, i_half: f64) -> f64 {
    depth_average(k_d * h) * i / (i + i_half)
}

/// Mixed-layer averaged light limitation
/// `f = (1 - e^{-K_d H}) / (K_d H) * I / (I + I_0)`.
pub fn light_limitation(h: f64, i: f64, k_d: f64, i_half: f64) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!(
            "mixed-layer depth must be positive, got {h}"
        )));
    }
    if !(i >= 0.0) || !(k_d > 0.0) || !(i_half > 0.0) {
        return Err(Error::Domain(format!(
            "light limitation needs I >= 0, K_d > 0, I_0 > 0 (got I = {i}, K_d = {k_d}, I_0 = {i_half})"
        )));
    }
    Ok(light_limitation_unchecked(h, i, k_d, i_half))
}

pub fn entrainment(mld: &MldCycle, t: f64) -> f64 {
    mld.entrainment(t)
}

/// The `(H, T, I)` drivers of one cell sharing a common period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeasonalForcing {
    pub mld: MldCycle,
    pub sst: SstCycle,
    pub light: LightSource,
    pub period: f64,
}

impl SeasonalForcing {
    pub fn new(mld: MldCycle, sst: SstCycle, light: LightSource) -> Result<Self> {
        let period = mld.period;
        check_period(period)?;
        let light_period = match &light {
            LightSource::Astronomical(model) => {
                model.validate()?;
                model.period
            }
            LightSource::Constant(value) => {
                if !(value.is_finite() && *value >= 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "constant irradiance must be nonnegative, got {value}"
                    )));
                }
                period
            }
        };
        if sst.period != period || light_period != period {
            return Err(Error::InvalidInput(format!(
                "forcing periods disagree (MLD {period}, SST {}, light {light_period})",
                sst.period
            )));
        }
        if !(sst.min() > 0.0) {
            return Err(Error::InvalidInput(format!(
                "SST cycle reaches {} K; temperatures must be in kelvin",
                sst.min()
            )));
        }
        Ok(Self {
            mld,
            sst,
            light,
            period,
        })
    }

    pub fn depth(&self, t: f64) -> f64 {
        self.mld.depth(t)
    }

    pub fn temperature(&self, t: f64) -> f64 {
        self.sst.temperature(t)
    }

    pub fn irradiance(&self, t: f64) -> f64 {
        self.light.irradiance(t)
    }

    pub fn entrainment(&self, t: f64) -> f64 {
        self.mld.entrainment(t)
    }

    pub fn light_factor(&self, t: f64, k_d: f64, i_half: f64) -> f64 {
        light_limitation_unchecked(self.depth(t), self.irradiance(t), k_d, i_half)
    }

    /// Sorted, de-duplicated days in `[0, period)` where a driver is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut points: Vec<f64> = self.mld.turning_points().to_vec();
        points.extend(self.light.kinks());
        points.retain(|d| d.is_finite());
        for d in points.iter_mut() {
            *d = d.rem_euclid(self.period);
        }
        points.sort_by(f64::total_cmp);
        points.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        points
    }

    /// Copy with the SST mean shifted and the maximum depth replaced.
    pub fn perturbed(&self, temp_offset: f64, h_max: f64) -> Result<Self> {
        let mld = MldCycle::new(h_max, self.mld.h_min, self.mld.t_peak, self.period)?;
        Self::new(mld, self.sst.shifted(temp_offset), self.light)
    }
}
