//! Stability of the extinction state `E_0 = (C_0, 0, 0)`.
//!
//! Linearized at `E_0` the phytoplankton and zooplankton perturbations
//! decouple, so the monodromy matrix is diagonal with multipliers
//!
//! ```text
//! ρ_P = exp ∫ (f g(C_0) - m_P - s_+) dt      ρ_Z = exp(-∫ s_+ dt) = h_min / h_max
//! ```
//!
//! over one period. Writing `γ = C_0 / (C_0 + N_0)`, the phytoplankton
//! exponent splits into a gain `G = ∫ μ_P f dt` and a loss
//! `L = ∫ (m_P + s_+) dt`, and the population persists iff `γ > γ_crit = L / G`.

use crate::error::{Error, Result};
use crate::forcing::SeasonalForcing;
use crate::thermo::BioParams;

/// Composite Simpson quadrature over one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quadrature {
    /// Approximate node count per period, shared among the smooth pieces.
    pub nodes: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { nodes: 4096 }
    }
}

const MIN_PANELS: usize = 8;
const RESIDUAL_RTOL: f64 = 1e-6;
const RESIDUAL_ATOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
struct Node {
    weight: f64,
    /// Weight in the half-resolution rule; zero for odd nodes.
    coarse: f64,
    irradiance: f64,
    mld_shape: (f64, f64),
    sst_shape: f64,
}

/// Per-cell quadrature cache. Perturbing the mean temperature or the maximum
/// depth leaves the nodes valid, since neither moves a non-smooth point.
#[derive(Debug, Clone)]
pub struct StabilityAnalyzer {
    forcing: SeasonalForcing,
    bio: BioParams,
    nodes: Vec<Node>,
}

/// Gain and loss integrals over one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainLoss {
    pub gain: f64,
    pub loss: f64,
    /// `∫ s_+ dt`, the entrainment part of the loss.
    pub dilution: f64,
}

impl GainLoss {
    /// `L / G`, or `+inf` when there is no gain.
    pub fn gamma_crit(&self) -> f64 {
        if self.gain > 0.0 {
            self.loss / self.gain
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// Invasion growth rate per day.
    pub lambda_p: f64,
    pub rho_p: f64,
    pub rho_z: f64,
    pub gain: f64,
    pub loss: f64,
    pub gamma_crit: f64,
    pub c0_used: f64,
}

impl StabilityReport {
    /// Saturation `γ = C_0 / (C_0 + N_0)` the report was evaluated at.
    pub fn saturation(&self, n_half: f64) -> f64 {
        saturation(self.c0_used, n_half)
    }
}

pub fn saturation(c0: f64, n_half: f64) -> f64 {
    c0 / (c0 + n_half)
}

/// Sub-intervals of one period delimited by the forcing breakpoints.
fn pieces(forcing: &SeasonalForcing) -> Vec<(f64, f64)> {
    let points = forcing.breakpoints();
    let period = forcing.period;
    match points.len() {
        0 => vec![(0.0, period)],
        n => (0..n)
            .map(|i| {
                let a = points[i];
                let b = if i + 1 < n {
                    points[i + 1]
                } else {
                    points[0] + period
                };
                (a, b)
            })
            .filter(|(a, b)| b > a)
            .collect(),
    }
}

/// Simpson weights on `[a, b]` after the substitution
/// `x = a + (b - a)(3u² - 2u³)`, which flattens the integrand at both ends so
/// that endpoint kinks cost no accuracy. Returns `(x, w_fine, w_coarse)`.
fn piece_rule(a: f64, b: f64, panels: usize) -> Vec<(f64, f64, f64)> {
    let len = b - a;
    let du = 1.0 / panels as f64;
    (0..=panels)
        .map(|j| {
            let u = j as f64 * du;
            let x = a + len * u * u * (3.0 - 2.0 * u);
            let jac = len * 6.0 * u * (1.0 - u);
            let simpson = |j: usize, n: usize| {
                if j == 0 || j == n {
                    1.0
                } else if j % 2 == 1 {
                    4.0
                } else {
                    2.0
                }
            };
            let fine = simpson(j, panels) * du / 3.0 * jac;
            let coarse = if j % 2 == 0 {
                simpson(j / 2, panels / 2) * 2.0 * du / 3.0 * jac
            } else {
                0.0
            };
            (x, fine, coarse)
        })
        .collect()
}

impl StabilityAnalyzer {
    pub fn new(forcing: &SeasonalForcing, bio: &BioParams, quad: Quadrature) -> Result<Self> {
        bio.validate()?;
        if quad.nodes < 16 {
            return Err(Error::InvalidInput(format!(
                "quadrature needs at least 16 nodes, got {}",
                quad.nodes
            )));
        }
        let period = forcing.period;
        let mut nodes = Vec::with_capacity(quad.nodes + 64);
        for (a, b) in pieces(forcing) {
            let share = (quad.nodes as f64 * (b - a) / period / 4.0).round() as usize * 4;
            for (t, weight, coarse) in piece_rule(a, b, share.max(MIN_PANELS)) {
                if weight == 0.0 && coarse == 0.0 {
                    continue;
                }
                nodes.push(Node {
                    weight,
                    coarse,
                    irradiance: forcing.irradiance(t),
                    mld_shape: forcing.mld.shape(t),
                    sst_shape: forcing.sst.shape(t),
                });
            }
        }
        Ok(Self {
            forcing: *forcing,
            bio: *bio,
            nodes,
        })
    }

    pub fn forcing(&self) -> &SeasonalForcing {
        &self.forcing
    }

    pub fn bio(&self) -> &BioParams {
        &self.bio
    }

    pub fn period(&self) -> f64 {
        self.forcing.period
    }

    /// Integrate `term(rates)` and its absolute value at both resolutions.
    fn integrate<const K: usize>(
        &self,
        temp_offset: f64,
        h_max: f64,
        term: impl Fn(&Sample) -> [f64; K],
    ) -> Result<[f64; K]> {
        let mld = crate::forcing::MldCycle::new(
            h_max,
            self.forcing.mld.h_min,
            self.forcing.mld.t_peak,
            self.forcing.period,
        )?;
        let sst = self.forcing.sst.shifted(temp_offset);
        if !(sst.min() > 0.0) {
            return Err(Error::Domain(format!(
                "temperature {} K is not positive",
                sst.min()
            )));
        }
        let b = &self.bio;
        let shared = b.growth.same_curve(&b.mort_p);
        let mut fine = [0.0; K];
        let mut coarse = [0.0; K];
        let mut scale = [0.0; K];
        for node in &self.nodes {
            let (depth, s_plus) = mld.apply_shape(node.mld_shape);
            let temp = sst.t_mean + sst.amplitude * node.sst_shape;
            let (mu_p, m_p) = if shared {
                let shape = b.growth.shape(temp);
                (b.growth.k0 * shape, b.mort_p.k0 * shape)
            } else {
                (b.growth.rate(temp), b.mort_p.rate(temp))
            };
            let sample = Sample {
                light: crate::forcing::light_limitation_unchecked(
                    depth,
                    node.irradiance,
                    b.k_d,
                    b.i_half,
                ),
                mu_p,
                m_p,
                s_plus,
            };
            let v = term(&sample);
            for k in 0..K {
                fine[k] += node.weight * v[k];
                coarse[k] += node.coarse * v[k];
                scale[k] += node.weight * v[k].abs();
            }
        }
        for k in 0..K {
            let residual = (fine[k] - coarse[k]).abs();
            if !fine[k].is_finite() || !(residual <= RESIDUAL_RTOL * scale[k] + RESIDUAL_ATOL) {
                return Err(Error::Quadrature { residual });
            }
        }
        Ok(fine)
    }

    /// Gain and loss at the base forcing.
    pub fn gain_loss(&self) -> Result<GainLoss> {
        self.gain_loss_at(0.0, self.forcing.mld.h_max)
    }

    /// Gain and loss with the mean temperature shifted by `temp_offset` and
    /// the maximum depth set to `h_max`.
    pub fn gain_loss_at(&self, temp_offset: f64, h_max: f64) -> Result<GainLoss> {
        let [gain, mort, dilution] =
            self.integrate(temp_offset, h_max, |s| [s.mu_p * s.light, s.m_p, s.s_plus])?;
        Ok(GainLoss {
            gain,
            loss: mort + dilution,
            dilution,
        })
    }

    pub fn gamma_crit(&self) -> Result<f64> {
        Ok(self.gain_loss()?.gamma_crit())
    }

    pub fn gamma_crit_at(&self, temp_offset: f64, h_max: f64) -> Result<f64> {
        Ok(self.gain_loss_at(temp_offset, h_max)?.gamma_crit())
    }

    /// `λ_P = (1/T_p) ∫ (f g(C_0) - m_P - s_+) dt`, integrated as one integrand.
    pub fn invasion_exponent(&self, c0: f64) -> Result<f64> {
        let gamma = checked_saturation(c0, self.bio.n_half)?;
        let [net] = self.integrate(0.0, self.forcing.mld.h_max, |s| {
            [s.light * s.mu_p * gamma - s.m_p - s.s_plus]
        })?;
        Ok(net / self.period())
    }

    /// Floquet multipliers `(ρ_P, ρ_Z)`.
    pub fn monodromy(&self, c0: f64) -> Result<(f64, f64)> {
        let lambda = self.invasion_exponent(c0)?;
        let gl = self.gain_loss()?;
        Ok(((self.period() * lambda).exp(), (-gl.dilution).exp()))
    }

    pub fn report(&self, c0: f64) -> Result<StabilityReport> {
        let lambda_p = self.invasion_exponent(c0)?;
        let gl = self.gain_loss()?;
        Ok(StabilityReport {
            lambda_p,
            rho_p: (self.period() * lambda_p).exp(),
            rho_z: (-gl.dilution).exp(),
            gain: gl.gain,
            loss: gl.loss,
            gamma_crit: gl.gamma_crit(),
            c0_used: c0,
        })
    }

    /// Inventory at which `γ = γ_crit`, or `None` when `γ_crit >= 1`.
    pub fn break_even_inventory(&self) -> Result<Option<f64>> {
        Ok(inventory_for(self.gamma_crit()?, self.bio.n_half))
    }
}

struct Sample {
    light: f64,
    mu_p: f64,
    m_p: f64,
    s_plus: f64,
}

fn checked_saturation(c0: f64, n_half: f64) -> Result<f64> {
    if !(c0 > 0.0 && c0.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "inventory C_0 must be positive, got {c0}"
        )));
    }
    Ok(saturation(c0, n_half))
}

/// Solve `C_0 / (C_0 + N_0) = γ` for `C_0`.
pub fn inventory_for(gamma: f64, n_half: f64) -> Option<f64> {
    if gamma.is_finite() && (0.0..1.0).contains(&gamma) {
        Some(n_half * gamma / (1.0 - gamma))
    } else {
        None
    }
}

fn analyzer(forcing: &SeasonalForcing, bio: &BioParams) -> Result<StabilityAnalyzer> {
    StabilityAnalyzer::new(forcing, bio, Quadrature::default())
}

pub fn invasion_exponent(forcing: &SeasonalForcing, bio: &BioParams, c0: f64) -> Result<f64> {
    analyzer(forcing, bio)?.invasion_exponent(c0)
}

pub fn monodromy(forcing: &SeasonalForcing, bio: &BioParams, c0: f64) -> Result<(f64, f64)> {
    analyzer(forcing, bio)?.monodromy(c0)
}

pub fn gain_loss(forcing: &SeasonalForcing, bio: &BioParams) -> Result<GainLoss> {
    analyzer(forcing, bio)?.gain_loss()
}

pub fn gamma_crit(forcing: &SeasonalForcing, bio: &BioParams) -> Result<f64> {
    analyzer(forcing, bio)?.gamma_crit()
}

pub fn break_even_inventory(forcing: &SeasonalForcing, bio: &BioParams) -> Result<Option<f64>> {
    analyzer(forcing, bio)?.break_even_inventory()
}

pub fn stability_report(
    forcing: &SeasonalForcing,
    bio: &BioParams,
    c0: f64,
) -> Result<StabilityReport> {
    analyzer(forcing, bio)?.report(c0)
}
