//! Scenario geometry and free-space link budgets.
//!
//! Every link gain is a linear power ratio: antenna gains over free-space path
//! loss. The RIS-assisted cascade pays the path loss of both hops and gains one
//! aggregate reflection factor.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Aggregate RIS reflection gain used when a scenario does not set one.
///
/// With free-space loss on both hops the default geometry's cascade is about
/// 82 dB weaker than the direct Alice-Bob link; this gain brings the RIS link
/// to within a few dB of it, which is the regime where both links matter.
pub const DEFAULT_RIS_GAIN_DB: f64 = 80.0;

pub const DEFAULT_WAVELENGTH_M: f64 = 0.01;
pub const DEFAULT_ANTENNA_GAIN_DB: f64 = 5.0;
pub const DEFAULT_NOISE_POWER_DBM: f64 = -104.0;
pub const DEFAULT_TOTAL_POWER_DBM: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Node placement and radio parameters. Distances in meters, powers in dBm,
/// gains in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub alice: Point2D,
    pub ris: Point2D,
    pub bob: Point2D,
    pub eves: Vec<Point2D>,
    #[serde(default = "default_wavelength")]
    pub wavelength_m: f64,
    /// Applied at every transmit and receive antenna.
    #[serde(default = "default_antenna_gain")]
    pub antenna_gain_db: f64,
    #[serde(default = "default_ris_gain")]
    pub ris_gain_db: f64,
    /// Applied to every receiver branch.
    #[serde(default = "default_noise_power")]
    pub noise_power_dbm: f64,
    #[serde(default = "default_total_power")]
    pub total_power_dbm: f64,
}

fn default_wavelength() -> f64 {
    DEFAULT_WAVELENGTH_M
}
fn default_antenna_gain() -> f64 {
    DEFAULT_ANTENNA_GAIN_DB
}
fn default_ris_gain() -> f64 {
    DEFAULT_RIS_GAIN_DB
}
fn default_noise_power() -> f64 {
    DEFAULT_NOISE_POWER_DBM
}
fn default_total_power() -> f64 {
    DEFAULT_TOTAL_POWER_DBM
}

impl Scenario {
    /// Alice at the origin, RIS at (50, 0), Bob at (50, 10), with the given
    /// eavesdroppers and default radio parameters.
    pub fn reference(eves: Vec<Point2D>) -> Self {
        Scenario {
            alice: Point2D::new(0.0, 0.0),
            ris: Point2D::new(50.0, 0.0),
            bob: Point2D::new(50.0, 10.0),
            eves,
            wavelength_m: DEFAULT_WAVELENGTH_M,
            antenna_gain_db: DEFAULT_ANTENNA_GAIN_DB,
            ris_gain_db: DEFAULT_RIS_GAIN_DB,
            noise_power_dbm: DEFAULT_NOISE_POWER_DBM,
            total_power_dbm: DEFAULT_TOTAL_POWER_DBM,
        }
    }

    pub fn from_json_str(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let scenario: Scenario = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength_m > 0.0 && self.wavelength_m.is_finite()) {
            return Err(Error::domain(format!(
                "wavelength must be positive, got {}",
                self.wavelength_m
            )));
        }
        if self.eves.is_empty() {
            return Err(Error::domain("a scenario needs at least one eavesdropper"));
        }
        let mut nodes = [&self.alice, &self.ris, &self.bob].into_iter().chain(&self.eves);
        if nodes.any(|p| !p.is_finite()) {
            return Err(Error::domain("node positions must be finite"));
        }
        for (name, v) in [
            ("antenna_gain_db", self.antenna_gain_db),
            ("noise_power_dbm", self.noise_power_dbm),
            ("total_power_dbm", self.total_power_dbm),
        ] {
            if !v.is_finite() {
                return Err(Error::domain(format!("{name} must be finite, got {v}")));
            }
        }
        // -inf disables the cascade; +inf or NaN is meaningless.
        if self.ris_gain_db.is_nan() || self.ris_gain_db == f64::INFINITY {
            return Err(Error::domain("ris_gain_db must be finite or -inf"));
        }
        Ok(())
    }

    pub fn noise_power_w(&self) -> f64 {
        dbm_to_watts(self.noise_power_dbm)
    }

    pub fn total_power_w(&self) -> f64 {
        dbm_to_watts(self.total_power_dbm)
    }

    pub fn with_eves(&self, eves: Vec<Point2D>) -> Self {
        Scenario { eves, ..self.clone() }
    }
}

/// Linear power gains |α|² of every link in a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkGains {
    /// Alice → Bob direct link.
    pub alpha_ab1_sq: f64,
    /// Alice → RIS → Bob cascade.
    pub alpha_ab2_sq: f64,
    pub alpha_ae1_sq: Vec<f64>,
    pub alpha_ae2_sq: Vec<f64>,
}

impl LinkGains {
    pub fn eve_count(&self) -> usize {
        self.alpha_ae1_sq.len()
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Free-space path loss `20 log10(4πd/λ)` in dB.
pub fn path_loss_db(distance_m: f64, wavelength_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !(wavelength_m > 0.0) {
        return Err(Error::domain(format!(
            "path loss needs positive distance and wavelength, got d = {distance_m}, λ = {wavelength_m}"
        )));
    }
    Ok(20.0 * (4.0 * PI * distance_m / wavelength_m).log10())
}

/// `10^((Σ gains − loss) / 10)`.
pub fn link_gain_linear(path_loss_db: f64, gains_db: &[f64]) -> f64 {
    let budget: f64 = gains_db.iter().sum::<f64>() - path_loss_db;
    10f64.powf(budget / 10.0)
}

pub fn scenario_gains(s: &Scenario) -> Result<LinkGains> {
    s.validate()?;
    let g = s.antenna_gain_db;
    let lambda = s.wavelength_m;
    let loss = |a: &Point2D, b: &Point2D| path_loss_db(a.distance(b), lambda);
    let alice_ris = loss(&s.alice, &s.ris)?;

    let direct = |rx: &Point2D| -> Result<f64> { Ok(link_gain_linear(loss(&s.alice, rx)?, &[g, g])) };
    let cascade =
        |rx: &Point2D| -> Result<f64> { Ok(link_gain_linear(alice_ris + loss(&s.ris, rx)?, &[g, g, s.ris_gain_db])) };

    let mut alpha_ae1_sq = Vec::with_capacity(s.eves.len());
    let mut alpha_ae2_sq = Vec::with_capacity(s.eves.len());
    for eve in &s.eves {
        alpha_ae1_sq.push(direct(eve)?);
        alpha_ae2_sq.push(cascade(eve)?);
    }
    Ok(LinkGains {
        alpha_ab1_sq: direct(&s.bob)?,
        alpha_ab2_sq: cascade(&s.bob)?,
        alpha_ae1_sq,
        alpha_ae2_sq,
    })
}

/// Axis-aligned rectangle that eavesdroppers are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub const fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Region {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn contains(&self, p: &Point2D) -> bool {
        (self.x_min..=self.x_max).contains(&p.x) && (self.y_min..=self.y_max).contains(&p.y)
    }
}

/// `count` points drawn uniformly from `region`; the same seed always yields
/// the same list.
pub fn random_eve_region(region: &Region, count: usize, seed: u64) -> Result<Vec<Point2D>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_points(region, count, &mut rng)
}

pub(crate) fn random_points<R: Rng>(region: &Region, count: usize, rng: &mut R) -> Result<Vec<Point2D>> {
    if !(region.x_min < region.x_max && region.y_min < region.y_max) {
        return Err(Error::domain(format!("empty region {region:?}")));
    }
    if count == 0 {
        return Err(Error::domain("at least one point must be requested"));
    }
    Ok((0..count)
        .map(|_| {
            Point2D::new(
                rng.gen_range(region.x_min..region.x_max),
                rng.gen_range(region.y_min..region.y_max),
            )
        })
        .collect())
}
