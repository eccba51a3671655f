use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::channel::{DiscreteChannel, DiscreteWiretapSystem};
use super::codebook::{check_alphabet, iid_distribution, message_output_distribution, Codebook};
use super::decoder::average_errors;
use super::measures::{joint_and_product, mutual_information, output_marginal, renyi_divergence, tv_unchecked};
use crate::error::{Error, Result};

/// Largest TV distance between the output laws of any two messages.
pub fn distinguishing_advantage(cb: &Codebook, ch: &DiscreteChannel) -> Result<f64> {
    let dists = (0..cb.messages())
        .map(|m| message_output_distribution(cb, m, ch))
        .collect::<Result<Vec<_>>>()?;
    let mut best: f64 = 0.0;
    for (i, a) in dists.iter().enumerate() {
        for b in &dists[i + 1..] {
            best = best.max(tv_unchecked(a, b));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Sampled distinguishing advantage for block lengths too long to enumerate.
///
/// Each pair uses `TV(P, Q) = E_P[(1 − Q/P)^+]` with `samples` draws from `P`;
/// the pair with the largest estimate is reported.
pub fn distinguishing_advantage_mc(cb: &Codebook, ch: &DiscreteChannel, samples: usize, seed: u64) -> Result<Estimate> {
    check_alphabet(cb, ch)?;
    if samples < 2 {
        return Err(Error::domain("need at least two samples"));
    }
    let rows = (0..ch.input_size())
        .map(|x| WeightedIndex::new(ch.row(x)).map_err(|e| Error::domain(format!("channel row {x}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let likelihood = |m: usize, z: &[usize]| -> f64 {
        cb.message_words(m)
            .map(|x| x.iter().zip(z).map(|(&a, &b)| ch.prob(a, b)).product::<f64>())
            .sum::<f64>()
            / cb.randomness() as f64
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = Estimate {
        value: 0.0,
        std_error: 0.0,
    };
    let mut z = vec![0; cb.block_length()];
    for m1 in 0..cb.messages() {
        for m2 in 0..cb.messages() {
            if m1 == m2 {
                continue;
            }
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..samples {
                let word = cb.word(m1, rng.gen_range(0..cb.randomness()));
                for (zi, &x) in z.iter_mut().zip(word) {
                    *zi = rows[x].sample(&mut rng);
                }
                let v = (1.0 - likelihood(m2, &z) / likelihood(m1, &z)).max(0.0);
                s += v;
                s2 += v * v;
            }
            let k = samples as f64;
            let mean = s / k;
            let var = ((s2 - k * mean * mean) / (k - 1.0)).max(0.0);
            if mean > best.value {
                best = Estimate {
                    value: mean,
                    std_error: (var / k).sqrt(),
                };
            }
        }
    }
    Ok(best)
}

/// Bounds on the semantic advantage implied by a distinguishing advantage.
pub fn semantic_advantage_interval(adv_ds: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&adv_ds) {
        return Err(Error::domain(format!("advantage {adv_ds} outside [0, 1]")));
    }
    Ok((adv_ds / 2.0, adv_ds))
}

/// TV distance from each message's output law to `Q_Z^{⊗n}`.
pub fn message_tv_to_product(cb: &Codebook, ch: &DiscreteChannel, qx: &[f64]) -> Result<Vec<f64>> {
    let reference = iid_distribution(&output_marginal(ch, qx)?, cb.block_length())?;
    (0..cb.messages())
        .map(|m| Ok(tv_unchecked(&message_output_distribution(cb, m, ch)?, &reference)))
        .collect()
}

/// `exp(−2 ε² L1)`.
pub fn mcdiarmid_rhs(eps: f64, randomness: usize) -> Result<f64> {
    if !(eps > 0.0) || randomness == 0 {
        return Err(Error::domain(format!(
            "need eps > 0 and L1 >= 1, got eps = {eps}, L1 = {randomness}"
        )));
    }
    Ok((-2.0 * eps * eps * randomness as f64).exp())
}

/// Largest exponents the atypicality and error bounds admit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentPredictions {
    /// Atypical-term exponent per eavesdropper, `(α − 1)(I(X;Z_j) + ε − D_α)`.
    pub eve_atypical: Vec<f64>,
    /// Bob's atypical-term exponent, `(α − 1)(I(X;Y) + ε − D_α)`.
    pub gamma1: f64,
    /// Decoding-error exponent, `I(X;Y) + ε − R − R1`.
    pub gamma2: f64,
}

/// Divergences are between the joint law of (input, output) and the product of
/// its marginals. Negative bounds and infinite divergences give 0.
pub fn exponent_predictions(
    system: &DiscreteWiretapSystem,
    alpha: f64,
    eps: f64,
    rate: f64,
    randomness_rate: f64,
) -> Result<ExponentPredictions> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("order must exceed 1, got {alpha}")));
    }
    let qx = &system.input_dist;
    let bound = |ch: &DiscreteChannel| -> Result<f64> {
        let info = mutual_information(ch, qx)?;
        let (j, p) = joint_and_product(ch, qx)?;
        let d = renyi_divergence(&j, &p, alpha)?;
        Ok(if d.is_finite() {
            ((alpha - 1.0) * (info + eps - d)).max(0.0)
        } else {
            0.0
        })
    };
    let eve_atypical = system.eves.iter().map(bound).collect::<Result<Vec<_>>>()?;
    let gamma1 = bound(&system.bob)?;
    let gamma2 = (mutual_information(&system.bob, qx)? + eps - rate - randomness_rate).max(0.0);
    Ok(ExponentPredictions {
        eve_atypical,
        gamma1,
        gamma2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityReport {
    /// `[j][m]`: TV distance from message `m`'s output law at eavesdropper `j`
    /// to the i.i.d. output law.
    pub message_tv: Vec<Vec<f64>>,
    /// Largest over eavesdroppers.
    pub distinguishing_advantage: f64,
    pub semantic_interval: (f64, f64),
    pub p_message_error: f64,
    pub p_joint_error: f64,
    pub predictions: ExponentPredictions,
}

/// Everything the exact machinery says about one codebook.
pub fn security_report(system: &DiscreteWiretapSystem, cb: &Codebook, alpha: f64, eps: f64) -> Result<SecurityReport> {
    let qx = &system.input_dist;
    let message_tv = system
        .eves
        .iter()
        .map(|e| message_tv_to_product(cb, e, qx))
        .collect::<Result<Vec<_>>>()?;
    let mut adv: f64 = 0.0;
    for e in &system.eves {
        adv = adv.max(distinguishing_advantage(cb, e)?);
    }
    let (p_message_error, p_joint_error) = average_errors(cb, &system.bob, qx, eps)?;
    Ok(SecurityReport {
        message_tv,
        distinguishing_advantage: adv,
        semantic_interval: semantic_advantage_interval(adv.min(1.0))?,
        p_message_error,
        p_joint_error,
        predictions: exponent_predictions(system, alpha, eps, cb.rate(), cb.randomness_rate())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn advantage_examples() {
        let b = DiscreteChannel::bsc(0.1).unwrap();
        let single = Codebook::new(vec![vec![vec![0, 1]]], 2).unwrap();
        assert_eq!(distinguishing_advantage(&single, &b).unwrap(), 0.0);
        let cb = Codebook::new(vec![vec![vec![0, 0]], vec![vec![1, 1]]], 2).unwrap();
        assert!((distinguishing_advantage(&cb, &b).unwrap() - 0.8).abs() < 1e-14);
        let c = DiscreteChannel::constant(2, &[0.4, 0.6]).unwrap();
        assert!(distinguishing_advantage(&cb, &c).unwrap() < 1e-15);
    }

    #[test]
    fn sampled_advantage_tracks_exact() {
        let b = DiscreteChannel::bsc(0.2).unwrap();
        let cb = Codebook::new(
            vec![vec![vec![0, 0, 1], vec![1, 0, 1]], vec![vec![1, 1, 0], vec![0, 1, 1]]],
            2,
        )
        .unwrap();
        let exact = distinguishing_advantage(&cb, &b).unwrap();
        let est = distinguishing_advantage_mc(&cb, &b, 200_000, 5).unwrap();
        assert!(
            (est.value - exact).abs() < 4.0 * est.std_error + 1e-3,
            "{est:?} vs {exact}"
        );
    }

    #[test]
    fn interval() {
        assert_eq!(semantic_advantage_interval(0.0).unwrap(), (0.0, 0.0));
        assert_eq!(semantic_advantage_interval(1.0).unwrap(), (0.5, 1.0));
        assert_eq!(semantic_advantage_interval(0.64).unwrap(), (0.32, 0.64));
        assert!(semantic_advantage_interval(1.1).is_err());
    }

    #[test]
    fn mcdiarmid() {
        assert!((mcdiarmid_rhs(1.0, 1).unwrap() - (-2f64).exp()).abs() < 1e-16);
        assert!((mcdiarmid_rhs(1e-9, 5).unwrap() - 1.0).abs() < 1e-15);
        let a = mcdiarmid_rhs(0.3, 4).unwrap();
        assert!((mcdiarmid_rhs(0.3, 8).unwrap() - a * a).abs() < 1e-15);
        assert!(mcdiarmid_rhs(0.0, 1).is_err());
        assert!(mcdiarmid_rhs(0.1, 0).is_err());
    }

    #[test]
    fn predictions() {
        let bob = DiscreteChannel::bsc(0.05).unwrap();
        let indep = DiscreteChannel::constant(2, &[0.5, 0.5]).unwrap();
        let sys = DiscreteWiretapSystem::new(bob, vec![indep], vec![0.5, 0.5]).unwrap();
        let p = exponent_predictions(&sys, 1.5, 0.2, 0.1, 0.2).unwrap();
        assert!((p.eve_atypical[0] - 0.5 * 0.2).abs() < 1e-15);
        let near = exponent_predictions(&sys, 1.0 + 1e-9, 0.2, 0.1, 0.2).unwrap();
        assert!(near.eve_atypical[0] < 1e-9 && near.gamma1 < 1e-9);
        let info = mutual_information(&sys.bob, &sys.input_dist).unwrap();
        assert!((p.gamma2 - (info + 0.2 - 0.3)).abs() < 1e-15);
        assert!(exponent_predictions(&sys, 1.0, 0.2, 0.1, 0.2).is_err());
    }

    #[test]
    fn report_is_consistent() {
        let sys = DiscreteWiretapSystem::new(
            DiscreteChannel::bsc(0.05).unwrap(),
            vec![DiscreteChannel::bsc(0.3).unwrap(), DiscreteChannel::bsc(0.4).unwrap()],
            vec![0.5, 0.5],
        )
        .unwrap();
        let cb = super::super::codebook::random_codebook(&sys.input_dist, 4, 2, 3, 11).unwrap();
        let r = security_report(&sys, &cb, 2.0, 0.05).unwrap();
        assert_eq!(r.message_tv.len(), 2);
        assert!(r.semantic_interval.0 <= r.semantic_interval.1);
        assert!(r.p_message_error <= r.p_joint_error);
        let max_tv = r.message_tv.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
        assert!(r.distinguishing_advantage <= 2.0 * max_tv + 1e-15);
    }
}
