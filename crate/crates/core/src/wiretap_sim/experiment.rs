use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::channel::DiscreteWiretapSystem;
use super::codebook::{codebook_size, enumerable, random_codebook_with, DEFAULT_STATE_BUDGET};
use super::decoder::{average_errors, default_decoder_eps};
use super::measures::mutual_information;
use super::security::message_tv_to_product;
use crate::error::{Error, Result};

/// A decay experiment as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySpec {
    pub system: DiscreteWiretapSystem,
    /// Message rate `R`, nats per symbol.
    pub rate: f64,
    /// Randomness rate `R1`, nats per symbol.
    pub randomness_rate: f64,
    #[serde(default = "default_block_lengths")]
    pub block_lengths: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Decoder slack; `0.1 · I(X;Y)` when absent.
    #[serde(default)]
    pub eps: Option<f64>,
}

fn default_block_lengths() -> Vec<usize> {
    vec![2, 4, 6, 8, 10]
}

fn default_trials() -> usize {
    20
}

/// One codebook draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub n: usize,
    pub trial: usize,
    /// Largest TV distance from a message's output law to the i.i.d. law, over
    /// messages and eavesdroppers.
    pub tv_max: f64,
    pub p_err_joint: f64,
    pub p_err_msg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySummary {
    pub n: usize,
    pub messages: usize,
    pub randomness: usize,
    pub mean_tv_max: f64,
    pub mean_p_err_joint: f64,
    pub mean_p_err_msg: f64,
}

/// Whether the rates sit where the achievability argument applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeFlags {
    /// `R1 > max_j I(X;Z_j)`.
    pub resolvability: bool,
    /// `R + R1 < I(X;Y)`.
    pub reliability: bool,
    /// Mean joint error never decreases with `n`, as expected above capacity.
    pub error_non_decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayResult {
    pub rows: Vec<DecayRow>,
    pub summaries: Vec<DecaySummary>,
    /// Block lengths too long to enumerate.
    pub skipped: Vec<usize>,
    /// Least-squares slope of `ln(mean tv_max)` against `n`; absent when a mean
    /// is zero or fewer than two lengths ran.
    pub tv_slope: Option<f64>,
    pub joint_error_slope: Option<f64>,
    pub regime: RegimeFlags,
    pub warnings: Vec<String>,
}

pub fn security_decay_experiment(
    system: &DiscreteWiretapSystem,
    rate: f64,
    randomness_rate: f64,
    n_list: &[usize],
    trials: usize,
    seed: u64,
) -> Result<DecayResult> {
    run_decay(&DecaySpec {
        system: system.clone(),
        rate,
        randomness_rate,
        block_lengths: n_list.to_vec(),
        trials,
        seed,
        eps: None,
    })
}

/// Averages exact TV distances and decoding errors over `trials` random
/// codebooks per block length.
///
/// Trial `t` at length `n` draws its codebook from stream `(n << 32) | t` of a
/// generator seeded with `seed`, so results do not depend on thread count.
pub fn run_decay(spec: &DecaySpec) -> Result<DecayResult> {
    if spec.trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    if spec.block_lengths.is_empty() || spec.block_lengths.contains(&0) {
        return Err(Error::domain("block lengths must be non-empty and positive"));
    }
    let sys = &spec.system;
    let qx = &sys.input_dist;
    let eps = match spec.eps {
        Some(e) => e,
        None => default_decoder_eps(&sys.bob, qx)?,
    };

    let bob_info = mutual_information(&sys.bob, qx)?;
    let eve_info = sys
        .eves
        .iter()
        .map(|e| mutual_information(e, qx))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut warnings = Vec::new();
    let resolvability = spec.randomness_rate > eve_info;
    let reliability = spec.rate + spec.randomness_rate < bob_info;
    if !resolvability {
        warnings.push(format!(
            "randomness rate {} does not exceed the largest eavesdropper information {eve_info:.6}",
            spec.randomness_rate
        ));
    }
    if !reliability {
        warnings.push(format!(
            "total rate {} is not below Bob's information {bob_info:.6}",
            spec.rate + spec.randomness_rate
        ));
    }

    let widest = sys
        .eves
        .iter()
        .map(|e| e.output_size())
        .chain([sys.bob.output_size()])
        .max()
        .unwrap_or(1);
    let mut lengths = Vec::new();
    let mut skipped = Vec::new();
    for &n in &spec.block_lengths {
        let ok = enumerable(widest, n, DEFAULT_STATE_BUDGET).is_ok()
            && codebook_size(spec.rate, n).is_ok()
            && codebook_size(spec.randomness_rate, n).is_ok();
        if ok {
            lengths.push((n, codebook_size(spec.rate, n)?, codebook_size(spec.randomness_rate, n)?));
        } else {
            skipped.push(n);
            warnings.push(format!("block length {n} exceeds the enumeration budget; skipped"));
        }
    }

    let jobs: Vec<_> = lengths
        .iter()
        .flat_map(|&(n, l, l1)| (0..spec.trials).map(move |t| (n, l, l1, t)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(n, l, l1, trial)| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(((n as u64) << 32) | trial as u64);
            let cb = random_codebook_with(qx, n, l, l1, &mut rng)?;
            let mut tv_max: f64 = 0.0;
            for e in &sys.eves {
                tv_max = message_tv_to_product(&cb, e, qx)?.into_iter().fold(tv_max, f64::max);
            }
            let (p_err_msg, p_err_joint) = average_errors(&cb, &sys.bob, qx, eps)?;
            Ok(DecayRow {
                n,
                trial,
                tv_max,
                p_err_joint,
                p_err_msg,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let summaries: Vec<DecaySummary> = lengths
        .iter()
        .map(|&(n, messages, randomness)| {
            let these: Vec<_> = rows.iter().filter(|r| r.n == n).collect();
            let mean = |f: fn(&DecayRow) -> f64| these.iter().map(|r| f(r)).sum::<f64>() / these.len() as f64;
            DecaySummary {
                n,
                messages,
                randomness,
                mean_tv_max: mean(|r| r.tv_max),
                mean_p_err_joint: mean(|r| r.p_err_joint),
                mean_p_err_msg: mean(|r| r.p_err_msg),
            }
        })
        .collect();

    let ns: Vec<f64> = summaries.iter().map(|s| s.n as f64).collect();
    let log_slope = |ys: Vec<f64>| {
        if ys.iter().any(|&y| !(y > 0.0)) {
            return None;
        }
        least_squares_slope(&ns, &ys.iter().map(|y| y.ln()).collect::<Vec<_>>())
    };
    let tv_slope = log_slope(summaries.iter().map(|s| s.mean_tv_max).collect());
    let joint_error_slope = log_slope(summaries.iter().map(|s| s.mean_p_err_joint).collect());
    let error_non_decreasing = summaries
        .windows(2)
        .all(|w| w[1].mean_p_err_joint >= w[0].mean_p_err_joint);
    if !reliability && error_non_decreasing {
        warnings.push("joint error does not decrease with n, as expected above Bob's information".into());
    }

    Ok(DecayResult {
        rows,
        summaries,
        skipped,
        tv_slope,
        joint_error_slope,
        regime: RegimeFlags {
            resolvability,
            reliability,
            error_non_decreasing,
        },
        warnings,
    })
}

/// Slope of the least-squares line through `(x, y)`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wiretap_sim::channel::DiscreteChannel;

    fn system(eve: DiscreteChannel) -> DiscreteWiretapSystem {
        DiscreteWiretapSystem::new(DiscreteChannel::bsc(0.05).unwrap(), vec![eve], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn slope_fit() {
        assert_eq!(least_squares_slope(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]), Some(2.0));
        assert_eq!(least_squares_slope(&[1.0], &[2.0]), None);
        assert_eq!(least_squares_slope(&[1.0, 1.0], &[2.0, 3.0]), None);
    }

    #[test]
    fn input_independent_eve_sees_nothing() {
        let sys = system(DiscreteChannel::constant(2, &[0.5, 0.5]).unwrap());
        let r = security_decay_experiment(&sys, 0.1, 0.2, &[2, 4], 3, 1).unwrap();
        assert!(r.rows.iter().all(|row| row.tv_max < 1e-15));
        assert_eq!(r.tv_slope, None);
        assert_eq!(r.rows.len(), 6);
    }

    #[test]
    fn deterministic_across_runs() {
        let sys = system(DiscreteChannel::bsc(0.3).unwrap());
        let a = security_decay_experiment(&sys, 0.1, 0.35, &[2, 4], 4, 9).unwrap();
        let b = security_decay_experiment(&sys, 0.1, 0.35, &[2, 4], 4, 9).unwrap();
        assert_eq!(a, b);
        for row in &a.rows {
            assert!(row.p_err_msg <= row.p_err_joint);
            assert!((0.0..=1.0).contains(&row.tv_max));
        }
    }

    #[test]
    fn flags_and_skips() {
        let sys = system(DiscreteChannel::bsc(0.3).unwrap());
        let r = security_decay_experiment(&sys, 0.4, 0.3, &[2, 40], 2, 0).unwrap();
        assert_eq!(r.skipped, vec![40]);
        assert!(!r.regime.reliability);
        assert!(r.regime.resolvability);
        assert!(!r.warnings.is_empty());
        let low = security_decay_experiment(&sys, 0.1, 0.01, &[2], 1, 0).unwrap();
        assert!(!low.regime.resolvability);
    }

    #[test]
    fn spec_json() {
        let json = r#"{"system": {"bob": [[0.95, 0.05], [0.05, 0.95]],
                                  "eves": [[[0.7, 0.3], [0.3, 0.7]]],
                                  "input_dist": [0.5, 0.5]},
                       "rate": 0.1, "randomness_rate": 0.35}"#;
        let s: DecaySpec = serde_json::from_str(json).unwrap();
        assert_eq!(s.block_lengths, vec![2, 4, 6, 8, 10]);
        assert_eq!(s.trials, 20);
        assert!(serde_json::from_str::<DecaySpec>(&json.replace("\"rate\"", "\"rat\"")).is_err());
    }
}
