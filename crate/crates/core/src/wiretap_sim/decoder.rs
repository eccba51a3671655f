use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::channel::DiscreteChannel;
use super::codebook::{check_alphabet, enumerable, Codebook, DEFAULT_STATE_BUDGET};
use super::measures::{letter_densities, mutual_information, output_marginal, DENSITY_TIE_TOLERANCE};
use super::security::Estimate;
use crate::error::{Error, Result};

/// Decoder slack as a fraction of `I(X;Y)` when none is given.
pub const DEFAULT_EPS_FRACTION: f64 = 0.1;

/// `0.1 · I(X;Y)`.
pub fn default_decoder_eps(ch: &DiscreteChannel, qx: &[f64]) -> Result<f64> {
    Ok(DEFAULT_EPS_FRACTION * mutual_information(ch, qx)?)
}

/// Joint-typicality decoder for a fixed codebook.
///
/// A pair `(x, y)` is typical when `K(y_i|x_i) > 0` for every letter and the
/// per-letter density average is at most `I(X;Y) + ε`. The decoder returns
/// the unique typical `(m, w)`, or `(0, 0)` when there is none or more than one.
#[derive(Debug, Clone)]
pub struct TypicalityDecoder<'a> {
    cb: &'a Codebook,
    output_size: usize,
    threshold: f64,
    densities: Vec<Option<f64>>,
}

impl<'a> TypicalityDecoder<'a> {
    pub fn new(cb: &'a Codebook, ch: &DiscreteChannel, qx: &[f64], eps: f64) -> Result<Self> {
        if !eps.is_finite() {
            return Err(Error::domain(format!("epsilon must be finite, got {eps}")));
        }
        check_alphabet(cb, ch)?;
        let qy = output_marginal(ch, qx)?;
        Ok(TypicalityDecoder {
            cb,
            output_size: ch.output_size(),
            threshold: mutual_information(ch, qx)? + eps,
            densities: letter_densities(ch, &qy),
        })
    }

    pub fn is_typical(&self, x: &[usize], y: &[usize]) -> bool {
        let mut sum = 0.0;
        for (&a, &b) in x.iter().zip(y) {
            match self.densities[a * self.output_size + b] {
                Some(d) => sum += d,
                None => return false,
            }
        }
        sum / x.len() as f64 <= self.threshold + DENSITY_TIE_TOLERANCE
    }

    pub fn decode(&self, y: &[usize]) -> (usize, usize) {
        let mut found = None;
        for m in 0..self.cb.messages() {
            for (w, x) in self.cb.message_words(m).enumerate() {
                if self.is_typical(x, y) {
                    if found.is_some() {
                        return (0, 0);
                    }
                    found = Some((m, w));
                }
            }
        }
        found.unwrap_or((0, 0))
    }
}

pub fn typicality_decode(
    y: &[usize],
    cb: &Codebook,
    ch_bob: &DiscreteChannel,
    qx: &[f64],
    eps: f64,
) -> Result<(usize, usize)> {
    if y.len() != cb.block_length() {
        return Err(Error::Dimension(format!(
            "output of length {} for a length-{} codebook",
            y.len(),
            cb.block_length()
        )));
    }
    if let Some(s) = y.iter().find(|&&s| s >= ch_bob.output_size()) {
        return Err(Error::domain(format!("output symbol {s} outside the channel alphabet")));
    }
    Ok(TypicalityDecoder::new(cb, ch_bob, qx, eps)?.decode(y))
}

/// Writes the base-`k` digits of `index` into `out`, most significant first.
pub(crate) fn digits(mut index: usize, k: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = index % k;
        index /= k;
    }
}

/// Exact `(message error, joint error)` under uniform `(m, w)`, summed over
/// every output sequence.
pub fn average_errors(cb: &Codebook, ch_bob: &DiscreteChannel, qx: &[f64], eps: f64) -> Result<(f64, f64)> {
    let dec = TypicalityDecoder::new(cb, ch_bob, qx, eps)?;
    let k = ch_bob.output_size();
    let states = enumerable(k, cb.block_length(), DEFAULT_STATE_BUDGET)?;
    let (mut msg, mut joint) = (0.0, 0.0);
    let mut y = vec![0; cb.block_length()];
    for index in 0..states {
        digits(index, k, &mut y);
        let (mh, wh) = dec.decode(&y);
        for m in 0..cb.messages() {
            for (w, x) in cb.message_words(m).enumerate() {
                if (m, w) == (mh, wh) {
                    continue;
                }
                let p: f64 = x.iter().zip(&y).map(|(&a, &b)| ch_bob.prob(a, b)).product();
                joint += p;
                if m != mh {
                    msg += p;
                }
            }
        }
    }
    let words = (cb.messages() * cb.randomness()) as f64;
    Ok((msg / words, joint / words))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub message: Estimate,
    pub joint: Estimate,
}

/// Sampled `(message error, joint error)` with binomial standard errors.
pub fn average_errors_mc(
    cb: &Codebook,
    ch_bob: &DiscreteChannel,
    qx: &[f64],
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<ErrorEstimate> {
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    let dec = TypicalityDecoder::new(cb, ch_bob, qx, eps)?;
    let rows = (0..ch_bob.input_size())
        .map(|x| WeightedIndex::new(ch_bob.row(x)).map_err(|e| Error::domain(format!("channel row {x}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut msg, mut joint) = (0usize, 0usize);
    let mut y = vec![0; cb.block_length()];
    for _ in 0..trials {
        let m = rng.gen_range(0..cb.messages());
        let w = rng.gen_range(0..cb.randomness());
        for (yi, &x) in y.iter_mut().zip(cb.word(m, w)) {
            *yi = rows[x].sample(&mut rng);
        }
        let (mh, wh) = dec.decode(&y);
        joint += usize::from((mh, wh) != (m, w));
        msg += usize::from(mh != m);
    }
    let est = |count: usize| {
        let p = count as f64 / trials as f64;
        Estimate {
            value: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    };
    Ok(ErrorEstimate {
        message: est(msg),
        joint: est(joint),
    })
}
