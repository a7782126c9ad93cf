//! Parameter files.
//!
//! Science parameters are always read from an explicit TOML file; see
//! `params.example` at the repository root for the layout.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::forcing::{IrradianceModel, LightSource, DAYS_PER_YEAR};
use crate::thermo::{BioParams, ThermoParams, GAS_CONSTANT};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRates {
    mu_p: f64,
    mu_z: f64,
    m_p: f64,
    m_z: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThermo {
    delta_c: f64,
    delta_h: f64,
    t_ref: f64,
    #[serde(default = "default_gas_constant")]
    gas_constant: f64,
}

fn default_gas_constant() -> f64 {
    GAS_CONSTANT
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAssumed {
    n_half: f64,
    p_half: f64,
    k_d: f64,
    i_half: f64,
    alpha: f64,
    c0: Option<f64>,
}

#[derive(Debug, Deserialize, Default, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum RawSource {
    #[default]
    Astronomical,
    Constant,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawLight {
    #[serde(default)]
    source: RawSource,
    transmittance: Option<f64>,
    par_fraction: Option<f64>,
    i_unit_scale: Option<f64>,
    solar_constant: Option<f64>,
    constant_par: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    rates: RawRates,
    thermo: RawThermo,
    assumed: RawAssumed,
    #[serde(default)]
    light: RawLight,
}

/// How surface irradiance is produced for each cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LightConfig {
    Astronomical {
        transmittance: f64,
        par_fraction: f64,
        i_unit_scale: f64,
        solar_constant: f64,
    },
    /// Same PAR everywhere and always.
    Constant(f64),
}

impl Default for LightConfig {
    fn default() -> Self {
        LightConfig::Astronomical {
            transmittance: IrradianceModel::DEFAULT_TRANSMITTANCE,
            par_fraction: IrradianceModel::DEFAULT_PAR_FRACTION,
            i_unit_scale: IrradianceModel::DEFAULT_UNIT_SCALE,
            solar_constant: IrradianceModel::DEFAULT_SOLAR_CONSTANT,
        }
    }
}

impl LightConfig {
    pub fn source_at(&self, latitude: f64) -> LightSource {
        match *self {
            LightConfig::Astronomical {
                transmittance,
                par_fraction,
                i_unit_scale,
                solar_constant,
            } => LightSource::Astronomical(IrradianceModel {
                latitude,
                transmittance,
                par_fraction,
                i_unit_scale,
                solar_constant,
                period: DAYS_PER_YEAR,
            }),
            LightConfig::Constant(par) => LightSource::Constant(par),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub bio: BioParams,
    /// Total inventory `C_0`, if set in the file.
    pub c0: Option<f64>,
    pub light: LightConfig,
}

impl Params {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawParams =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let curve = |k0| ThermoParams {
            k0,
            delta_c: raw.thermo.delta_c,
            delta_h: raw.thermo.delta_h,
            t_ref: raw.thermo.t_ref,
            r_gas: raw.thermo.gas_constant,
        };
        let a = &raw.assumed;
        let bio = BioParams {
            growth: curve(raw.rates.mu_p),
            grazing: curve(raw.rates.mu_z),
            mort_p: curve(raw.rates.m_p),
            mort_z: curve(raw.rates.m_z),
            n_half: a.n_half,
            p_half: a.p_half,
            k_d: a.k_d,
            i_half: a.i_half,
            alpha: a.alpha,
        };
        bio.validate().map_err(|e| Error::Config(e.to_string()))?;
        if let Some(c0) = a.c0 {
            if !(c0.is_finite() && c0 > 0.0) {
                return Err(Error::Config(format!(
                    "assumed.c0 must be positive, got {c0}"
                )));
            }
        }

        let l = &raw.light;
        let light = match l.source {
            RawSource::Astronomical => {
                if l.constant_par.is_some() {
                    return Err(Error::Config(
                        "light.constant_par requires light.source = \"constant\"".into(),
                    ));
                }
                let LightConfig::Astronomical {
                    transmittance,
                    par_fraction,
                    i_unit_scale,
                    solar_constant,
                } = LightConfig::default()
                else {
                    unreachable!()
                };
                let cfg = LightConfig::Astronomical {
                    transmittance: l.transmittance.unwrap_or(transmittance),
                    par_fraction: l.par_fraction.unwrap_or(par_fraction),
                    i_unit_scale: l.i_unit_scale.unwrap_or(i_unit_scale),
                    solar_constant: l.solar_constant.unwrap_or(solar_constant),
                };
                if let LightSource::Astronomical(model) = cfg.source_at(0.0) {
                    model.validate().map_err(|e| Error::Config(e.to_string()))?;
                }
                cfg
            }
            RawSource::Constant => {
                if l.transmittance.is_some()
                    || l.par_fraction.is_some()
                    || l.i_unit_scale.is_some()
                    || l.solar_constant.is_some()
                {
                    return Err(Error::Config(
                        "astronomical light settings are not used with light.source = \"constant\""
                            .into(),
                    ));
                }
                let par = l.constant_par.ok_or_else(|| {
                    Error::Config("light.source = \"constant\" needs light.constant_par".into())
                })?;
                if !(par.is_finite() && par >= 0.0) {
                    return Err(Error::Config(format!(
                        "light.constant_par must be nonnegative, got {par}"
                    )));
                }
                LightConfig::Constant(par)
            }
        };
        Ok(Self {
            bio,
            c0: a.c0,
            light,
        })
    }

    /// `C_0` from the file, or `2 N_0`.
    pub fn c0_or_default(&self) -> f64 {
        self.c0.unwrap_or(2.0 * self.bio.n_half)
    }
}
