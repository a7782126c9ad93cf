#![allow(dead_code)]

use std::f64::consts::PI;
use std::fmt::Write as _;

use npzt_core::forcing::{IrradianceModel, LightSource, MldCycle, SeasonalForcing, SstCycle};
use npzt_core::stability::{inventory_for, Quadrature, StabilityAnalyzer};
use npzt_core::thermo::BioParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PERIOD: f64 = 365.0;

pub fn bio() -> BioParams {
    BioParams::reference(0.5, 0.5, 0.04, 30.0, 0.3)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_forcing(rng: &mut impl Rng) -> SeasonalForcing {
    let h_min = rng.gen_range(10.0..50.0);
    SeasonalForcing::new(
        MldCycle::new(
            h_min * rng.gen_range(1.2..8.0),
            h_min,
            rng.gen_range(0.0..PERIOD),
            PERIOD,
        )
        .unwrap(),
        SstCycle::new(
            rng.gen_range(275.0..302.0),
            rng.gen_range(0.5..6.0),
            rng.gen_range(0.0..PERIOD),
            PERIOD,
        )
        .unwrap(),
        LightSource::Astronomical(IrradianceModel::at_latitude(rng.gen_range(-60.0..60.0))),
    )
    .unwrap()
}

/// A random forcing and the inventory that puts `λ_P` at a random value in
/// `lambda_range`.
pub fn cell_with_exponent(
    rng: &mut impl Rng,
    lambda_range: std::ops::Range<f64>,
) -> (SeasonalForcing, f64, f64) {
    let b = bio();
    loop {
        let f = random_forcing(rng);
        let gl = StabilityAnalyzer::new(&f, &b, Quadrature::default())
            .unwrap()
            .gain_loss()
            .unwrap();
        let lambda = rng.gen_range(lambda_range.clone());
        let gamma = (lambda * PERIOD + gl.loss) / gl.gain;
        if (0.02..0.98).contains(&gamma) {
            return (f, inventory_for(gamma, b.n_half).unwrap(), lambda);
        }
    }
}

/// Monthly climatology sampled from raised-cosine MLD and cosine SST.
pub struct SyntheticCell {
    pub lat: f64,
    pub lon: f64,
    pub sst_mean_c: f64,
    pub sst_amp: f64,
    pub sst_peak: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub mld_peak: f64,
}

impl SyntheticCell {
    pub fn monthly(&self) -> ([f64; 12], [f64; 12]) {
        let mut sst = [0.0; 12];
        let mut mld = [0.0; 12];
        for m in 0..12 {
            let t = PERIOD / 12.0 * (m as f64 + 0.5);
            sst[m] =
                self.sst_mean_c + self.sst_amp * (2.0 * PI * (t - self.sst_peak) / PERIOD).cos();
            mld[m] = self.h_min
                + (self.h_max - self.h_min)
                    * 0.5
                    * (1.0 + (2.0 * PI * (t - self.mld_peak) / PERIOD).cos());
        }
        (sst, mld)
    }

    pub fn csv_row(&self) -> String {
        let (sst, mld) = self.monthly();
        let mut s = format!("{},{}", self.lat, self.lon);
        for v in sst.iter().chain(mld.iter()) {
            write!(s, ",{v:.6}").unwrap();
        }
        s
    }
}

pub fn grid_header() -> String {
    npzt_core::atlas::header().join(",")
}

pub fn grid_csv(cells: &[SyntheticCell]) -> String {
    let mut s = grid_header() + "\n";
    for c in cells {
        s += &c.csv_row();
        s += "\n";
    }
    s
}

/// A `rows × cols` latitude-longitude block of plausible cells. `warming` and
/// `shoaling` shift every cell's mean SST (°C) and maximum depth (m).
pub fn synthetic_grid(rows: usize, cols: usize, warming: f64, shoaling: f64) -> Vec<SyntheticCell> {
    let mut cells = Vec::with_capacity(rows * cols);
    let dlat = 150.0 / rows as f64;
    let dlon = 360.0 / cols as f64;
    for i in 0..rows {
        for j in 0..cols {
            let lat = -75.0 + dlat * (i as f64 + 0.5);
            let lon = -180.0 + dlon * (j as f64 + 0.5);
            let a = lat.abs();
            let wiggle = (lon.to_radians() * 3.0).sin();
            let north = lat > 0.0;
            cells.push(SyntheticCell {
                lat,
                lon,
                sst_mean_c: 28.0 - 0.36 * a + 1.5 * wiggle + warming * (0.5 + a / 75.0),
                sst_amp: 1.0 + 0.07 * a,
                sst_peak: if north { 220.0 } else { 40.0 },
                h_max: 35.0 + 4.0 * a + 20.0 * wiggle.abs() - shoaling * (a / 75.0),
                h_min: 12.0 + 0.15 * a,
                mld_peak: if north { 45.0 } else { 225.0 },
            });
        }
    }
    cells
}
