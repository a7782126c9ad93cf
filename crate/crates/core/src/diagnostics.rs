//! Climate-shift diagnostics built on `γ_crit`: sensitivity gradients,
//! realized impacts, the thermal dominance index, first-order Taylor quality,
//! regime classes and two-epoch habitat transitions.

use std::fmt;

use crate::error::{Error, Result};
use crate::forcing::SeasonalForcing;
use crate::stability::{Quadrature, StabilityAnalyzer};
use crate::thermo::BioParams;

/// Thermal and mixing anomalies of an epoch relative to a reference period.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Anomaly {
    /// Shift of the annual-mean temperature (K).
    pub d_temp: f64,
    /// Shift of the annual maximum mixed-layer depth (m).
    pub d_hmax: f64,
}

impl Anomaly {
    pub fn new(d_temp: f64, d_hmax: f64) -> Result<Self> {
        if !(d_temp.is_finite() && d_hmax.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "anomalies must be finite (ΔT = {d_temp}, ΔH = {d_hmax})"
            )));
        }
        Ok(Self { d_temp, d_hmax })
    }

    /// Anomaly of `epoch` against `reference`, from their fitted cycles.
    pub fn between(epoch: &SeasonalForcing, reference: &SeasonalForcing) -> Result<Self> {
        Self::new(
            epoch.sst.t_mean - reference.sst.t_mean,
            epoch.mld.h_max - reference.mld.h_max,
        )
    }
}

/// Finite-difference steps for the `γ_crit` gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDiff {
    /// Temperature step (K).
    pub temp_step: f64,
    /// Depth step as a fraction of `h_max`.
    pub mld_fraction: f64,
}

impl Default for FiniteDiff {
    fn default() -> Self {
        Self {
            temp_step: 0.5,
            mld_fraction: 0.05,
        }
    }
}

impl FiniteDiff {
    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.temp_step) || !ok(self.mld_fraction) {
            return Err(Error::InvalidInput(format!(
                "finite-difference steps must be positive ({self:?})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gradients {
    /// `∂γ_crit/∂T` (1/K).
    pub grad_t: f64,
    /// `∂γ_crit/∂H_max` (1/m).
    pub grad_h: f64,
}

fn finite_gamma(an: &StabilityAnalyzer, d_temp: f64, h_max: f64) -> Result<f64> {
    let g = an.gamma_crit_at(d_temp, h_max)?;
    if g.is_finite() {
        Ok(g)
    } else {
        Err(Error::SensitivityUndefined(format!(
            "γ_crit is infinite at ΔT = {d_temp} K, h_max = {h_max} m"
        )))
    }
}

/// Gradients of `γ_crit` by central differences. When `h_max - δH` would
/// fall below `h_min`, the depth derivative uses the second-order forward
/// stencil instead.
pub fn gamma_gradients_with(an: &StabilityAnalyzer, fd: &FiniteDiff) -> Result<Gradients> {
    fd.validate()?;
    let h_max = an.forcing().mld.h_max;
    let h_min = an.forcing().mld.h_min;
    let base = finite_gamma(an, 0.0, h_max)?;
    let dt = fd.temp_step;
    let grad_t = (finite_gamma(an, dt, h_max)? - finite_gamma(an, -dt, h_max)?) / (2.0 * dt);
    let dh = fd.mld_fraction * h_max;
    let grad_h = if h_max - dh >= h_min {
        (finite_gamma(an, 0.0, h_max + dh)? - finite_gamma(an, 0.0, h_max - dh)?) / (2.0 * dh)
    } else {
        let g1 = finite_gamma(an, 0.0, h_max + dh)?;
        let g2 = finite_gamma(an, 0.0, h_max + 2.0 * dh)?;
        (-3.0 * base + 4.0 * g1 - g2) / (2.0 * dh)
    };
    Ok(Gradients { grad_t, grad_h })
}

pub fn gamma_gradients(forcing: &SeasonalForcing, bio: &BioParams) -> Result<Gradients> {
    let an = StabilityAnalyzer::new(forcing, bio, Quadrature::default())?;
    gamma_gradients_with(&an, &FiniteDiff::default())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactReport {
    pub i_t: f64,
    pub i_h: f64,
    /// Thermal dominance `D_T = I_T / (I_T + I_H)`.
    pub d_t_index: f64,
    /// Both impacts vanished and `D_T` holds the neutral value 0.5.
    pub neutral: bool,
    pub grad_t: f64,
    pub grad_h: f64,
    /// First-order Taylor fit quality, when evaluated.
    pub r2: Option<f64>,
}

pub fn realized_impacts(grads: &Gradients, anomaly: &Anomaly) -> ImpactReport {
    let i_t = grads.grad_t.abs() * anomaly.d_temp.abs();
    let i_h = grads.grad_h.abs() * anomaly.d_hmax.abs();
    let total = i_t + i_h;
    let (d_t_index, neutral) = if total > 0.0 {
        (i_t / total, false)
    } else {
        (0.5, true)
    };
    ImpactReport {
        i_t,
        i_h,
        d_t_index,
        neutral,
        grad_t: grads.grad_t,
        grad_h: grads.grad_h,
        r2: None,
    }
}

/// `(ΔT, ΔH)` lattice for the Taylor-linearity score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    /// Points per axis.
    pub n: usize,
    /// Half-width of the temperature offsets (K).
    pub temp_span: f64,
    /// Half-width of the depth offsets as a fraction of `h_max`.
    pub mld_fraction: f64,
}

impl Default for Lattice {
    fn default() -> Self {
        Self {
            n: 5,
            temp_span: 2.0,
            mld_fraction: 0.2,
        }
    }
}

fn linspace(half: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64)
        .collect()
}

/// Fit `y = a + b x1 + c x2` over the given offsets and return `R²`.
/// Points whose response is an error or non-finite are excluded; more than
/// half excluded is an error.
pub fn taylor_r2_response(
    temp_offsets: &[f64],
    mld_offsets: &[f64],
    mut response: impl FnMut(f64, f64) -> Result<f64>,
) -> Result<f64> {
    if temp_offsets.len() < 3 || mld_offsets.len() < 3 {
        return Err(Error::DegenerateLattice(
            "need at least 3 points per axis".into(),
        ));
    }
    let total = temp_offsets.len() * mld_offsets.len();
    let mut points = Vec::with_capacity(total);
    for &x1 in temp_offsets {
        for &x2 in mld_offsets {
            if let Ok(y) = response(x1, x2) {
                if y.is_finite() {
                    points.push((x1, x2, y));
                }
            }
        }
    }
    let excluded = total - points.len();
    if 2 * excluded > total {
        return Err(Error::DegenerateLattice(format!(
            "{excluded} of {total} lattice points have no finite response"
        )));
    }

    let n = points.len() as f64;
    let mean = |k: fn(&(f64, f64, f64)) -> f64| points.iter().map(k).sum::<f64>() / n;
    let (m1, m2, my) = (mean(|p| p.0), mean(|p| p.1), mean(|p| p.2));
    let (mut s11, mut s12, mut s22, mut s1y, mut s2y, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x1, x2, y) in &points {
        let (u, v, w) = (x1 - m1, x2 - m2, y - my);
        s11 += u * u;
        s12 += u * v;
        s22 += v * v;
        s1y += u * w;
        s2y += v * w;
        syy += w * w;
    }
    let det = s11 * s22 - s12 * s12;
    if !(det > 1e-12 * (s11 * s22).max(f64::MIN_POSITIVE)) || s11 == 0.0 || s22 == 0.0 {
        return Err(Error::DegenerateLattice(
            "lattice offsets do not span both axes".into(),
        ));
    }
    if syy == 0.0 {
        return Ok(1.0);
    }
    let b = (s1y * s22 - s2y * s12) / det;
    let c = (s2y * s11 - s1y * s12) / det;
    let explained = b * s1y + c * s2y;
    Ok((explained / syy).clamp(0.0, 1.0))
}

/// `R²` of the first-order plane through `γ_crit` on the lattice around the
/// analyzer's base forcing.
pub fn taylor_r2_with(an: &StabilityAnalyzer, lattice: &Lattice) -> Result<f64> {
    if lattice.n < 3 {
        return Err(Error::DegenerateLattice(format!(
            "need at least 3 points per axis, got {}",
            lattice.n
        )));
    }
    let h_max = an.forcing().mld.h_max;
    let temps = linspace(lattice.temp_span, lattice.n);
    let depths = linspace(lattice.mld_fraction * h_max, lattice.n);
    taylor_r2_response(&temps, &depths, |dt, dh| an.gamma_crit_at(dt, h_max + dh))
}

pub fn taylor_r2(forcing: &SeasonalForcing, bio: &BioParams, lattice: &Lattice) -> Result<f64> {
    let an = StabilityAnalyzer::new(forcing, bio, Quadrature::default())?;
    taylor_r2_with(&an, lattice)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegimeLabel {
    Robust,
    Marginal,
    Restrictive,
}

impl RegimeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeLabel::Robust => "Robust",
            RegimeLabel::Marginal => "Marginal",
            RegimeLabel::Restrictive => "Restrictive",
        }
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "γ_crit must be nonnegative, got {gamma}"
        )))
    }
}

/// Robust for `γ <= 0.5`, Marginal for `0.5 < γ <= 1`, Restrictive above.
pub fn classify_regime(gamma: f64) -> Result<RegimeLabel> {
    check_gamma(gamma)?;
    Ok(if gamma <= 0.5 {
        RegimeLabel::Robust
    } else if gamma <= 1.0 {
        RegimeLabel::Marginal
    } else {
        RegimeLabel::Restrictive
    })
}

/// State of a cell in one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpochState {
    Ice,
    Open(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransitionLabel {
    StableViability,
    StableRestriction,
    HabitatExpansion,
    HabitatContraction,
    IceFreeViability,
    IceFreeRestriction,
}

impl TransitionLabel {
    pub const ALL: [TransitionLabel; 6] = [
        TransitionLabel::StableViability,
        TransitionLabel::StableRestriction,
        TransitionLabel::HabitatExpansion,
        TransitionLabel::HabitatContraction,
        TransitionLabel::IceFreeViability,
        TransitionLabel::IceFreeRestriction,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TransitionLabel::StableViability => "Stable Viability",
            TransitionLabel::StableRestriction => "Stable Restriction",
            TransitionLabel::HabitatExpansion => "Habitat Expansion",
            TransitionLabel::HabitatContraction => "Habitat Contraction",
            TransitionLabel::IceFreeViability => "Ice-Free Viability",
            TransitionLabel::IceFreeRestriction => "Ice-Free Restriction",
        }
    }
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionOutcome {
    Label(TransitionLabel),
    /// Still frozen at the end epoch.
    Excluded,
}

/// Viability means `γ <= 1`, restriction `γ > 1`.
pub fn classify_transition(start: EpochState, end: EpochState) -> Result<TransitionOutcome> {
    use TransitionLabel::*;
    let end = match end {
        EpochState::Ice => {
            if let EpochState::Open(g) = start {
                check_gamma(g)?;
            }
            return Ok(TransitionOutcome::Excluded);
        }
        EpochState::Open(g) => {
            check_gamma(g)?;
            g <= 1.0
        }
    };
    let label = match start {
        EpochState::Ice => {
            if end {
                IceFreeViability
            } else {
                IceFreeRestriction
            }
        }
        EpochState::Open(g) => {
            check_gamma(g)?;
            match (g <= 1.0, end) {
                (true, true) => StableViability,
                (false, false) => StableRestriction,
                (false, true) => HabitatExpansion,
                (true, false) => HabitatContraction,
            }
        }
    };
    Ok(TransitionOutcome::Label(label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::{IrradianceModel, LightSource, MldCycle, SstCycle};
    use crate::thermo::{ThermoParams, PHYTO_DELTA_C, PHYTO_DELTA_H};
    use proptest::prelude::*;

    fn bio() -> BioParams {
        BioParams::reference(0.5, 0.5, 0.04, 30.0, 0.3)
    }

    fn flat_bio() -> BioParams {
        let mut b = bio();
        b.growth = ThermoParams::constant(0.8);
        b.mort_p = ThermoParams::constant(0.024);
        b.grazing = ThermoParams::constant(4.0);
        b.mort_z = ThermoParams::constant(1.8);
        b
    }

    fn cell(lat: f64, h_max: f64, h_min: f64, t_mean: f64) -> SeasonalForcing {
        SeasonalForcing::new(
            MldCycle::new(h_max, h_min, 45.0, 365.0).unwrap(),
            SstCycle::new(t_mean, 4.0, 220.0, 365.0).unwrap(),
            LightSource::Astronomical(IrradianceModel::at_latitude(lat)),
        )
        .unwrap()
    }

    #[test]
    fn temperature_independent_rates_have_no_thermal_gradient() {
        let f = SeasonalForcing::new(
            MldCycle::flat(40.0, 365.0).unwrap(),
            SstCycle::new(285.0, 3.0, 100.0, 365.0).unwrap(),
            LightSource::Astronomical(IrradianceModel::at_latitude(30.0)),
        )
        .unwrap();
        let g = gamma_gradients(&f, &flat_bio()).unwrap();
        assert_eq!(g.grad_t, 0.0);
    }

    #[test]
    fn deepening_a_flat_layer_raises_threshold() {
        let f = SeasonalForcing::new(
            MldCycle::flat(40.0, 365.0).unwrap(),
            SstCycle::constant(290.0, 365.0).unwrap(),
            LightSource::Astronomical(IrradianceModel::at_latitude(30.0)),
        )
        .unwrap();
        let g = gamma_gradients(&f, &bio()).unwrap();
        assert!(g.grad_h > 0.0);
        let an = StabilityAnalyzer::new(&f, &bio(), Quadrature::default()).unwrap();
        assert!(an.gamma_crit_at(0.0, 42.0).unwrap() > an.gamma_crit().unwrap());
    }

    #[test]
    fn central_differences_are_second_order() {
        let f = cell(45.0, 160.0, 25.0, 284.0);
        let an = StabilityAnalyzer::new(&f, &bio(), Quadrature::default()).unwrap();
        let grad = |temp_step: f64, mld_fraction: f64| {
            gamma_gradients_with(
                &an,
                &FiniteDiff {
                    temp_step,
                    mld_fraction,
                },
            )
            .unwrap()
        };
        let (a, b, c) = (grad(1.0, 0.1), grad(0.5, 0.05), grad(0.25, 0.025));
        let ratio_t = (a.grad_t - b.grad_t) / (b.grad_t - c.grad_t);
        let ratio_h = (a.grad_h - b.grad_h) / (b.grad_h - c.grad_h);
        assert!((ratio_t - 4.0).abs() < 0.2, "{ratio_t}");
        assert!((ratio_h - 4.0).abs() < 0.2, "{ratio_h}");
    }

    #[test]
    fn first_order_prediction_within_two_percent() {
        for (lat, h_max, h_min, t_mean) in [
            (45.0, 160.0, 25.0, 284.0),
            (-20.0, 70.0, 30.0, 298.0),
            (60.0, 400.0, 30.0, 279.0),
        ] {
            let f = cell(lat, h_max, h_min, t_mean);
            let an = StabilityAnalyzer::new(&f, &bio(), Quadrature::default()).unwrap();
            let g = gamma_gradients_with(&an, &FiniteDiff::default()).unwrap();
            let base = an.gamma_crit().unwrap();
            for (dt, dh) in [
                (0.5, 0.05 * h_max),
                (-0.5, 0.05 * h_max),
                (0.3, -0.04 * h_max),
            ] {
                let direct = an.gamma_crit_at(dt, h_max + dh).unwrap();
                let predicted = base + g.grad_t * dt + g.grad_h * dh;
                assert!(
                    (predicted - direct).abs() <= 0.02 * direct.abs(),
                    "{predicted} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn infinite_threshold_has_no_gradient() {
        let f = SeasonalForcing::new(
            MldCycle::new(80.0, 20.0, 30.0, 365.0).unwrap(),
            SstCycle::constant(285.0, 365.0).unwrap(),
            LightSource::Constant(0.0),
        )
        .unwrap();
        assert!(matches!(
            gamma_gradients(&f, &bio()),
            Err(Error::SensitivityUndefined(_))
        ));
    }

    #[test]
    fn impact_partition() {
        let g = Gradients {
            grad_t: 0.02,
            grad_h: -0.001,
        };
        let only_t = realized_impacts(&g, &Anomaly::new(1.5, 0.0).unwrap());
        assert_eq!(only_t.d_t_index, 1.0);
        let only_h = realized_impacts(&g, &Anomaly::new(0.0, -30.0).unwrap());
        assert_eq!(only_h.d_t_index, 0.0);
        assert!((only_h.i_h - 0.03).abs() < 1e-15);
        let even = realized_impacts(&g, &Anomaly::new(1.0, 20.0).unwrap());
        assert_eq!(even.i_t, even.i_h);
        assert_eq!(even.d_t_index, 0.5);
        assert!(!even.neutral);
        let none = realized_impacts(&g, &Anomaly::default());
        assert_eq!(none.d_t_index, 0.5);
        assert!(none.neutral);
    }

    #[test]
    fn exactly_linear_response_scores_one() {
        let temps = linspace(2.0, 5);
        let depths = linspace(30.0, 5);
        let r2 =
            taylor_r2_response(&temps, &depths, |x, y| Ok(0.7 + 0.031 * x - 0.0042 * y)).unwrap();
        assert!((r2 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn known_quadratic_response() {
        // y = x1² on a symmetric 3-point axis: the plane fit explains nothing.
        let axis = [-1.0, 0.0, 1.0];
        let r2 = taylor_r2_response(&axis, &axis, |x, _| Ok(x * x)).unwrap();
        assert!(r2.abs() < 1e-15);
        // y = x1 + x1²: R² = Σx² / (Σx² + Σ(x² - mean)²) = 6 / (6 + 2)
        let r2 = taylor_r2_response(&axis, &axis, |x, _| Ok(x + x * x)).unwrap();
        assert!((r2 - 0.75).abs() < 1e-14, "{r2}");
    }

    #[test]
    fn collapsed_lattice_is_degenerate() {
        let f = cell(45.0, 160.0, 25.0, 284.0);
        let lattice = Lattice {
            n: 5,
            temp_span: 0.0,
            mld_fraction: 0.0,
        };
        assert!(matches!(
            taylor_r2(&f, &bio(), &lattice),
            Err(Error::DegenerateLattice(_))
        ));
        let thin = Lattice {
            n: 2,
            ..Lattice::default()
        };
        assert!(matches!(
            taylor_r2(&f, &bio(), &thin),
            Err(Error::DegenerateLattice(_))
        ));
    }

    #[test]
    fn excluded_points_are_tolerated_up_to_half() {
        let axis = [-1.0, 0.0, 1.0];
        let r2 = taylor_r2_response(&axis, &axis, |x, y| {
            if x < 0.0 {
                Err(Error::Domain("x".into()))
            } else {
                Ok(x + 2.0 * y)
            }
        })
        .unwrap();
        assert!((r2 - 1.0).abs() < 1e-12);
        let r = taylor_r2_response(&axis, &axis, |x, y| {
            if x + y < 1.0 {
                Ok(f64::NAN)
            } else {
                Ok(1.0)
            }
        });
        assert!(r.is_err());
    }

    #[test]
    fn flat_layer_lattice_excludes_shallower_points() {
        let f = SeasonalForcing::new(
            MldCycle::flat(50.0, 365.0).unwrap(),
            SstCycle::new(288.0, 3.0, 200.0, 365.0).unwrap(),
            LightSource::Astronomical(IrradianceModel::at_latitude(35.0)),
        )
        .unwrap();
        let r2 = taylor_r2(&f, &bio(), &Lattice::default()).unwrap();
        assert!((0.0..=1.0).contains(&r2));
    }

    #[test]
    fn curvature_near_thermal_optimum_lowers_r2() {
        // Mean temperature at the optimum of the shared curve.
        let t_opt = -PHYTO_DELTA_H / PHYTO_DELTA_C;
        let f = SeasonalForcing::new(
            MldCycle::new(60.0, 20.0, 45.0, 365.0).unwrap(),
            SstCycle::new(t_opt, 1.0, 220.0, 365.0).unwrap(),
            LightSource::Astronomical(IrradianceModel::at_latitude(10.0)),
        )
        .unwrap();
        let an = StabilityAnalyzer::new(&f, &bio(), Quadrature::default()).unwrap();
        let mut last = 1.0;
        for span in [1.0, 2.0, 4.0, 8.0] {
            let lattice = Lattice {
                n: 5,
                temp_span: span,
                mld_fraction: 0.05 * span,
            };
            let r2 = taylor_r2_with(&an, &lattice).unwrap();
            assert!(r2 < last, "span {span}: {r2} >= {last}");
            last = r2;
        }
        assert!(last < 1.0);
    }

    #[test]
    fn regime_thresholds() {
        assert_eq!(classify_regime(0.3).unwrap(), RegimeLabel::Robust);
        assert_eq!(classify_regime(0.5).unwrap(), RegimeLabel::Robust);
        assert_eq!(classify_regime(0.75).unwrap(), RegimeLabel::Marginal);
        assert_eq!(classify_regime(1.0).unwrap(), RegimeLabel::Marginal);
        assert_eq!(classify_regime(1.2).unwrap(), RegimeLabel::Restrictive);
        assert_eq!(
            classify_regime(f64::INFINITY).unwrap(),
            RegimeLabel::Restrictive
        );
        assert!(classify_regime(-0.1).is_err());
        assert!(classify_regime(f64::NAN).is_err());
    }

    #[test]
    fn transition_cases() {
        use EpochState::{Ice, Open};
        use TransitionLabel::*;
        let label = |s, e| classify_transition(s, e).unwrap();
        assert_eq!(
            label(Open(0.8), Open(0.7)),
            TransitionOutcome::Label(StableViability)
        );
        assert_eq!(
            label(Open(1.5), Open(1.1)),
            TransitionOutcome::Label(StableRestriction)
        );
        assert_eq!(
            label(Open(1.3), Open(0.9)),
            TransitionOutcome::Label(HabitatExpansion)
        );
        assert_eq!(
            label(Open(0.9), Open(1.3)),
            TransitionOutcome::Label(HabitatContraction)
        );
        assert_eq!(
            label(Ice, Open(0.8)),
            TransitionOutcome::Label(IceFreeViability)
        );
        assert_eq!(
            label(Ice, Open(1.4)),
            TransitionOutcome::Label(IceFreeRestriction)
        );
        assert_eq!(label(Ice, Ice), TransitionOutcome::Excluded);
        assert_eq!(label(Open(0.4), Ice), TransitionOutcome::Excluded);
        assert_eq!(
            label(Open(1.0), Open(1.0)),
            TransitionOutcome::Label(StableViability)
        );
        assert_eq!(
            label(Open(f64::INFINITY), Open(1.0)),
            TransitionOutcome::Label(HabitatExpansion)
        );
        assert!(classify_transition(Open(-1.0), Open(0.5)).is_err());
    }

    fn epoch() -> impl Strategy<Value = EpochState> {
        prop_oneof![
            Just(EpochState::Ice),
            (0.0..3.0f64).prop_map(EpochState::Open),
            Just(EpochState::Open(1.0)),
            Just(EpochState::Open(f64::INFINITY)),
        ]
    }

    proptest! {
        #[test]
        fn transitions_partition_inputs(s in epoch(), e in epoch()) {
            let outcome = classify_transition(s, e).unwrap();
            let labels: Vec<_> = TransitionLabel::ALL
                .iter()
                .filter(|l| outcome == TransitionOutcome::Label(**l))
                .collect();
            let excluded = outcome == TransitionOutcome::Excluded;
            prop_assert_eq!(labels.len() + usize::from(excluded), 1);
            prop_assert_eq!(excluded, e == EpochState::Ice);
        }

        #[test]
        fn dominance_is_bounded_and_monotone(
            gt in -1.0..1.0f64, gh in 1e-4..1e-2f64, dt in 0.0..5.0f64, dh in 1.0..100.0f64,
        ) {
            let g = Gradients { grad_t: gt, grad_h: gh };
            let a = realized_impacts(&g, &Anomaly::new(dt, dh).unwrap());
            let b = realized_impacts(&g, &Anomaly::new(dt + 0.5, dh).unwrap());
            prop_assert!((0.0..=1.0).contains(&a.d_t_index));
            if gt != 0.0 {
                prop_assert!(b.d_t_index > a.d_t_index);
            }
        }
    }
}
