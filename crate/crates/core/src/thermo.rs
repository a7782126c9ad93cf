//! Generalized Eyring–Evans–Polanyi thermal performance curves.
//!
//! ```text
//! k(T) = k0 * exp[ (ΔC/R) ln(T/T_ref) + (ΔH/R) (1/T_ref - 1/T) ]
//! ```
//!
//! `ΔC` and `ΔH` are treated as molar quantities so that division by the
//! gas constant is dimensionless. With `ΔC < 0 < ΔH` the curve is concave in
//! log space with its maximum at `T_opt = -ΔH / ΔC`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

pub const GAS_CONSTANT: f64 = 8.314462618;
pub const REFERENCE_TEMPERATURE: f64 = 293.15;
pub const KELVIN_OFFSET: f64 = 273.15;

/// Community-mean activation heat capacity (J mol⁻¹ K⁻¹ scale) and its spread.
pub const PHYTO_DELTA_C: f64 = -14418.93;
pub const PHYTO_DELTA_C_SD: f64 = 2879.40;
/// Community-mean activation enthalpy and its spread.
pub const PHYTO_DELTA_H: f64 = 4213943.43;
pub const PHYTO_DELTA_H_SD: f64 = 838418.23;

/// Default seed for ensemble sampling.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoParams {
    /// Rate at `t_ref`, per day.
    pub k0: f64,
    pub delta_c: f64,
    pub delta_h: f64,
    pub t_ref: f64,
    pub r_gas: f64,
}

impl ThermoParams {
    pub fn new(k0: f64, delta_c: f64, delta_h: f64) -> Self {
        Self {
            k0,
            delta_c,
            delta_h,
            t_ref: REFERENCE_TEMPERATURE,
            r_gas: GAS_CONSTANT,
        }
    }

    /// Temperature-independent rate (`ΔC = ΔH = 0`).
    pub fn constant(k0: f64) -> Self {
        Self::new(k0, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.k0, self.delta_c, self.delta_h, self.t_ref, self.r_gas]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.k0 < 0.0 || self.t_ref <= 0.0 || self.r_gas <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "thermal parameters need finite k0 >= 0, t_ref > 0, R > 0 (got {self:?})"
            )));
        }
        Ok(())
    }

    /// Rate at `temp` kelvin; callers guarantee `temp > 0`.
    #[inline]
    pub fn rate(&self, temp: f64) -> f64 {
        self.k0 * self.log_factor(temp).exp()
    }

    /// `rate(temp) / k0`.
    #[inline]
    pub(crate) fn shape(&self, temp: f64) -> f64 {
        self.log_factor(temp).exp()
    }

    /// Both curves differ at most in `k0`.
    pub(crate) fn same_curve(&self, other: &ThermoParams) -> bool {
        self.delta_c == other.delta_c
            && self.delta_h == other.delta_h
            && self.t_ref == other.t_ref
            && self.r_gas == other.r_gas
    }

    #[inline]
    fn log_factor(&self, temp: f64) -> f64 {
        self.delta_c / self.r_gas * (temp / self.t_ref).ln()
            + self.delta_h / self.r_gas * (1.0 / self.t_ref - 1.0 / temp)
    }

    pub fn with_k0(self, k0: f64) -> Self {
        Self { k0, ..self }
    }
}

pub fn eep_rate(p: &ThermoParams, temp: f64) -> Result<f64> {
    if !(temp > 0.0) || !temp.is_finite() {
        return Err(Error::Domain(format!(
            "temperature must be positive kelvin, got {temp}"
        )));
    }
    Ok(p.rate(temp))
}

pub fn optimal_temperature(p: &ThermoParams) -> Result<f64> {
    if !(p.delta_c < 0.0 && p.delta_h > 0.0) {
        return Err(Error::NoInteriorOptimum {
            delta_c: p.delta_c,
            delta_h: p.delta_h,
        });
    }
    Ok(-p.delta_h / p.delta_c)
}

/// `n` curves with `ΔC` and `ΔH` drawn independently from normals centered on
/// `p`. Draws come from ChaCha8 seeded with `seed`, `ΔC` before `ΔH` for each
/// member.
pub fn tpc_ensemble(
    p: &ThermoParams,
    sd_c: f64,
    sd_h: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<ThermoParams>> {
    let normal = |mean: f64, sd: f64| {
        Normal::new(mean, sd).map_err(|e| Error::InvalidInput(format!("ensemble spread: {e}")))
    };
    if !(sd_c >= 0.0 && sd_h >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "ensemble standard deviations must be nonnegative (got {sd_c}, {sd_h})"
        )));
    }
    let dist_c = normal(p.delta_c, sd_c)?;
    let dist_h = normal(p.delta_h, sd_h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let delta_c = dist_c.sample(&mut rng);
            let delta_h = dist_h.sample(&mut rng);
            ThermoParams {
                delta_c,
                delta_h,
                ..*p
            }
        })
        .collect())
}

/// Biological constants of the NPZ-T model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BioParams {
    /// Maximum phytoplankton growth `μ_P(T)`.
    pub growth: ThermoParams,
    /// Maximum zooplankton grazing `μ_Z(T)`.
    pub grazing: ThermoParams,
    /// Linear phytoplankton mortality `m_P(T)`.
    pub mort_p: ThermoParams,
    /// Quadratic zooplankton mortality `m_Z(T)`.
    pub mort_z: ThermoParams,
    /// Nutrient half-saturation `N_0` (mmol m⁻³).
    pub n_half: f64,
    /// Grazing half-saturation `P_0` (mmol m⁻³).
    pub p_half: f64,
    /// Light attenuation `K_d` (m⁻¹).
    pub k_d: f64,
    /// Light half-saturation `I_0` (µmol m⁻² s⁻¹).
    pub i_half: f64,
    /// Zooplankton assimilation efficiency.
    pub alpha: f64,
}

impl BioParams {
    pub fn validate(&self) -> Result<()> {
        for rate in [&self.growth, &self.grazing, &self.mort_p, &self.mort_z] {
            rate.validate()?;
        }
        let positive = [self.n_half, self.p_half, self.k_d, self.i_half];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInput(
                "half-saturations and K_d must be finite and positive".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "assimilation efficiency must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Replace the thermal curve of all four rates, keeping their `k0`.
    pub fn with_shared_curve(self, delta_c: f64, delta_h: f64) -> Self {
        let set = |p: ThermoParams| ThermoParams {
            delta_c,
            delta_h,
            ..p
        };
        Self {
            growth: set(self.growth),
            grazing: set(self.grazing),
            mort_p: set(self.mort_p),
            mort_z: set(self.mort_z),
            ..self
        }
    }

    /// Reference rates (0.8, 4, 0.024, 1.8 d⁻¹) on the community-mean curve,
    /// with caller-supplied half-saturations and efficiency.
    pub fn reference(n_half: f64, p_half: f64, k_d: f64, i_half: f64, alpha: f64) -> Self {
        let curve = |k0| ThermoParams::new(k0, PHYTO_DELTA_C, PHYTO_DELTA_H);
        Self {
            growth: curve(0.8),
            grazing: curve(4.0),
            mort_p: curve(0.024),
            mort_z: curve(1.8),
            n_half,
            p_half,
            k_d,
            i_half,
            alpha,
        }
    }
}
