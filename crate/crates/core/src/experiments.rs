//! Parameter sweeps comparing three transmission schemes on a scenario.
//!
//! * `ssoc`: the two links carry independent streams and the budget is split
//!   by [`optimize`].
//! * `no_ssoc`: one stream over the coherently combined channel.
//! * `no_ris`: the direct link alone.
//!
//! Every sweep point yields one row per scheme, in that order. Rates are
//! clamped at zero.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel_model::{random_points, scenario_gains, Point2D, Region, Scenario};
use crate::error::{Error, Result};
use crate::optimizer::{optimize, OptimizerConfig};
use crate::secrecy_rate::{
    baseline_rate_no_ris, clamped_secrecy_rate, nats_to_bits, reference_rate_no_ssoc, snr_coefficients,
};

pub const CSV_HEADER: [&str; 7] = ["sweep_var", "scheme", "rate_nats", "rate_bits", "p1_w", "p2_w", "iters"];

/// Eavesdropper abscissa in the distance sweep.
pub const DISTANCE_SWEEP_EVE_X: f64 = 45.0;
/// Eavesdroppers of the power sweep.
pub const POWER_SWEEP_EVES: [Point2D; 2] = [Point2D { x: 50.0, y: 15.0 }, Point2D { x: 55.0, y: 10.0 }];
/// Region the eavesdroppers of the count sweep are drawn from.
pub const EVE_COUNT_REGION: Region = Region::new(40.0, 45.0, 30.0, 50.0);
pub const DEFAULT_TRIALS: usize = 500;
pub const DEFAULT_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Ssoc,
    NoSsoc,
    NoRis,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Ssoc, Scheme::NoSsoc, Scheme::NoRis];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Ssoc => "ssoc",
            Scheme::NoSsoc => "no_ssoc",
            Scheme::NoRis => "no_ris",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Ssoc => "RIS with SSOC",
            Scheme::NoSsoc => "RIS without SSOC",
            Scheme::NoRis => "Without RIS",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One scheme at one sweep point. The allocation and iteration count are only
/// present for SSOC rows of a single optimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepResultRow {
    pub sweep_var: f64,
    pub scheme: Scheme,
    pub rate_nats: f64,
    pub rate_bits: f64,
    pub p1_w: Option<f64>,
    pub p2_w: Option<f64>,
    pub iters: Option<usize>,
}

impl SweepResultRow {
    fn summary(sweep_var: f64, scheme: Scheme, rate_nats: f64) -> Self {
        SweepResultRow {
            sweep_var,
            scheme,
            rate_nats,
            rate_bits: nats_to_bits(rate_nats),
            p1_w: None,
            p2_w: None,
            iters: None,
        }
    }
}

/// All three schemes on one scenario, tagged with `sweep_var`.
pub fn evaluate_point(s: &Scenario, sweep_var: f64, cfg: &OptimizerConfig) -> Result<[SweepResultRow; 3]> {
    s.validate()?;
    let gains = scenario_gains(s)?;
    let noise = s.noise_power_w();
    let pt = s.total_power_w();
    let c = snr_coefficients(&gains, noise)?;
    let (alloc, trace) = optimize(&c, pt, cfg, None)?;
    let ssoc = clamped_secrecy_rate(&alloc, &c);
    Ok([
        SweepResultRow {
            p1_w: Some(alloc.p1),
            p2_w: Some(alloc.p2),
            iters: Some(trace.iterations()),
            ..SweepResultRow::summary(sweep_var, Scheme::Ssoc, ssoc)
        },
        SweepResultRow::summary(sweep_var, Scheme::NoSsoc, reference_rate_no_ssoc(pt, &gains, noise)),
        SweepResultRow::summary(sweep_var, Scheme::NoRis, baseline_rate_no_ris(pt, &gains, noise)),
    ])
}

fn sweep(scenarios: Vec<(f64, Scenario)>, cfg: &OptimizerConfig) -> Result<Vec<SweepResultRow>> {
    let rows = scenarios
        .par_iter()
        .map(|(v, s)| evaluate_point(s, *v, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// `0, 1, …, 50` metres.
pub fn default_distance_grid() -> Vec<f64> {
    (0..=50).map(f64::from).collect()
}

/// `0, 2, …, 50` dBm.
pub fn default_power_grid_dbm() -> Vec<f64> {
    (0..=25).map(|i| f64::from(2 * i)).collect()
}

/// Moves the single eavesdropper of `base` to `(45, d_v)` for each `d_v`.
pub fn sweep_eve_distance(base: &Scenario, dv_grid: &[f64], cfg: &OptimizerConfig) -> Result<Vec<SweepResultRow>> {
    if base.eves.len() != 1 {
        return Err(Error::domain(format!(
            "the distance sweep needs exactly one eavesdropper, the scenario has {}",
            base.eves.len()
        )));
    }
    let points = dv_grid
        .iter()
        .map(|&dv| (dv, base.with_eves(vec![Point2D::new(DISTANCE_SWEEP_EVE_X, dv)])))
        .collect();
    sweep(points, cfg)
}

/// Sets the total power of `base` to each value of `pt_grid_dbm`.
pub fn sweep_total_power(base: &Scenario, pt_grid_dbm: &[f64], cfg: &OptimizerConfig) -> Result<Vec<SweepResultRow>> {
    if base.eves.len() != 2 {
        return Err(Error::domain(format!(
            "the power sweep needs exactly two eavesdroppers, the scenario has {}",
            base.eves.len()
        )));
    }
    let points = pt_grid_dbm
        .iter()
        .map(|&pt| {
            (
                pt,
                Scenario {
                    total_power_dbm: pt,
                    ..base.clone()
                },
            )
        })
        .collect();
    sweep(points, cfg)
}

/// For each `k`, the [`percentile_rate`] of every scheme over `trials` random
/// placements of `k` eavesdroppers in `region`.
///
/// Placements are nested: trial `t` draws `max(k_list)` points from stream
/// `t` of a generator seeded with `seed`, and uses the first `k` of them. A
/// larger `k` therefore only adds eavesdroppers, which can never raise a rate.
pub fn sweep_num_eves(
    base: &Scenario,
    region: &Region,
    k_list: &[usize],
    trials: usize,
    seed: u64,
    cfg: &OptimizerConfig,
) -> Result<Vec<SweepResultRow>> {
    if k_list.is_empty() || k_list.contains(&0) {
        return Err(Error::domain("eavesdropper counts must be non-empty and at least 1"));
    }
    if k_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("eavesdropper counts must be strictly ascending"));
    }
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    let k_max = *k_list.last().expect("non-empty");
    let draws = (0..trials)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            random_points(region, k_max, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;

    // rates[k index][trial] = the three scheme rates.
    let rates = k_list
        .iter()
        .map(|&k| {
            draws
                .par_iter()
                .map(|eves| {
                    let rows = evaluate_point(&base.with_eves(eves[..k].to_vec()), k as f64, cfg)?;
                    Ok(rows.map(|r| r.rate_nats))
                })
                .collect::<Result<Vec<[f64; 3]>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(k_list.len() * 3);
    for (&k, per_trial) in k_list.iter().zip(&rates) {
        for (i, scheme) in Scheme::ALL.into_iter().enumerate() {
            let samples: Vec<f64> = per_trial.iter().map(|r| r[i]).collect();
            rows.push(SweepResultRow::summary(
                k as f64,
                scheme,
                percentile_rate(&samples, DEFAULT_LEVEL)?,
            ));
        }
    }
    Ok(rows)
}

/// Largest sample value that at least `⌈level·N⌉` samples reach: the
/// ascending order statistic at zero-based index `N − ⌈level·N⌉`.
pub fn percentile_rate(samples: &[f64], level: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::domain("percentile of an empty sample"));
    }
    if !(level > 0.0 && level <= 1.0) {
        return Err(Error::domain(format!("level must lie in (0, 1], got {level}")));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::domain("samples contain NaN"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // Guard against level·N landing a hair above an integer.
    let need = ((level * n as f64) - 1e-9).ceil().max(1.0) as usize;
    Ok(sorted[n - need.min(n)])
}
