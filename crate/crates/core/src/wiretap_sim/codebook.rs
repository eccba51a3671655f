use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::channel::{check_distribution, DiscreteChannel};
use crate::error::{Error, Result};

/// Largest product-alphabet size enumerated exactly.
pub const DEFAULT_STATE_BUDGET: u64 = 10_000_000;

/// A wiretap codebook: one length-`n` input word per (message, randomness)
/// pair. Messages and randomness indices are zero-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codebook {
    n: usize,
    messages: usize,
    randomness: usize,
    /// `words[m * randomness + w]`.
    words: Vec<Vec<usize>>,
}

impl Codebook {
    /// `words[m][w]` is the word for message `m` and randomness `w`.
    pub fn new(words: Vec<Vec<Vec<usize>>>, input_size: usize) -> Result<Self> {
        let messages = words.len();
        if messages == 0 || words[0].is_empty() {
            return Err(Error::Dimension(
                "codebook needs at least one message and one randomness value".into(),
            ));
        }
        let randomness = words[0].len();
        let n = words[0][0].len();
        if n == 0 {
            return Err(Error::Dimension("block length must be at least 1".into()));
        }
        let mut flat = Vec::with_capacity(messages * randomness);
        for (m, row) in words.into_iter().enumerate() {
            if row.len() != randomness {
                return Err(Error::Dimension(format!(
                    "message {m} has {} words, expected {randomness}",
                    row.len()
                )));
            }
            for word in row {
                if word.len() != n {
                    return Err(Error::Dimension(format!(
                        "word of length {} in a length-{n} codebook",
                        word.len()
                    )));
                }
                if let Some(s) = word.iter().find(|&&s| s >= input_size) {
                    return Err(Error::domain(format!(
                        "symbol {s} outside an alphabet of size {input_size}"
                    )));
                }
                flat.push(word);
            }
        }
        Ok(Codebook {
            n,
            messages,
            randomness,
            words: flat,
        })
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    /// `L`.
    pub fn messages(&self) -> usize {
        self.messages
    }

    /// `L1`.
    pub fn randomness(&self) -> usize {
        self.randomness
    }

    pub fn word(&self, m: usize, w: usize) -> &[usize] {
        &self.words[m * self.randomness + w]
    }

    /// Words of message `m`, one per randomness value.
    pub fn message_words(&self, m: usize) -> impl Iterator<Item = &[usize]> {
        self.words[m * self.randomness..(m + 1) * self.randomness]
            .iter()
            .map(Vec::as_slice)
    }

    /// `ln(L) / n`.
    pub fn rate(&self) -> f64 {
        (self.messages as f64).ln() / self.n as f64
    }

    /// `ln(L1) / n`.
    pub fn randomness_rate(&self) -> f64 {
        (self.randomness as f64).ln() / self.n as f64
    }
}

/// Number of codewords for `rate` nats per symbol at block length `n`:
/// `round(e^{nR})`, at least 1.
pub fn codebook_size(rate: f64, n: usize) -> Result<usize> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::domain(format!(
            "rate must be finite and non-negative, got {rate}"
        )));
    }
    let size = (n as f64 * rate).exp().round();
    if size > DEFAULT_STATE_BUDGET as f64 {
        return Err(Error::Budget {
            states: size as u128,
            budget: DEFAULT_STATE_BUDGET,
        });
    }
    Ok((size as usize).max(1))
}

/// Draws `L·L1` words with i.i.d. symbols from `qx`.
pub fn random_codebook(qx: &[f64], n: usize, messages: usize, randomness: usize, seed: u64) -> Result<Codebook> {
    random_codebook_with(qx, n, messages, randomness, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub(crate) fn random_codebook_with<R: Rng>(
    qx: &[f64],
    n: usize,
    messages: usize,
    randomness: usize,
    rng: &mut R,
) -> Result<Codebook> {
    check_distribution(qx, qx.len(), "input distribution")?;
    if messages == 0 || randomness == 0 || n == 0 {
        return Err(Error::domain("L, L1 and n must all be at least 1"));
    }
    let dist = WeightedIndex::new(qx).map_err(|e| Error::domain(format!("input distribution: {e}")))?;
    let words = (0..messages)
        .map(|_| {
            (0..randomness)
                .map(|_| (0..n).map(|_| dist.sample(rng)).collect())
                .collect()
        })
        .collect();
    Codebook::new(words, qx.len())
}

/// `|alphabet|^n` if it fits the budget.
pub(crate) fn enumerable(alphabet: usize, n: usize, budget: u64) -> Result<usize> {
    let states = (alphabet as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if states > u128::from(budget) {
        return Err(Error::Budget { states, budget });
    }
    Ok(states as usize)
}

/// `K^{⊗n}(· | x)` over all output sequences, first symbol most significant.
pub fn word_output_distribution(ch: &DiscreteChannel, word: &[usize]) -> Vec<f64> {
    let k = ch.output_size();
    let mut dist = vec![1.0];
    for &x in word {
        let row = ch.row(x);
        let mut next = Vec::with_capacity(dist.len() * k);
        for &p in &dist {
            next.extend(row.iter().map(|&r| p * r));
        }
        dist = next;
    }
    dist
}

/// Output distribution induced by message `m` with uniform randomness:
/// the average of `K^{⊗n}(· | x(m, w))` over `w`.
pub fn message_output_distribution(cb: &Codebook, m: usize, ch: &DiscreteChannel) -> Result<Vec<f64>> {
    message_output_distribution_with_budget(cb, m, ch, DEFAULT_STATE_BUDGET)
}

pub fn message_output_distribution_with_budget(
    cb: &Codebook,
    m: usize,
    ch: &DiscreteChannel,
    budget: u64,
) -> Result<Vec<f64>> {
    if m >= cb.messages() {
        return Err(Error::domain(format!(
            "message {m} out of range for L = {}",
            cb.messages()
        )));
    }
    check_alphabet(cb, ch)?;
    let states = enumerable(ch.output_size(), cb.block_length(), budget)?;
    let mut acc = vec![0.0; states];
    for word in cb.message_words(m) {
        for (a, p) in acc.iter_mut().zip(word_output_distribution(ch, word)) {
            *a += p;
        }
    }
    let inv = 1.0 / cb.randomness() as f64;
    acc.iter_mut().for_each(|a| *a *= inv);
    Ok(acc)
}

/// i.i.d. product `q^{⊗n}`, first symbol most significant.
pub fn iid_distribution(q: &[f64], n: usize) -> Result<Vec<f64>> {
    enumerable(q.len(), n, DEFAULT_STATE_BUDGET)?;
    let mut dist = vec![1.0];
    for _ in 0..n {
        dist = dist.iter().flat_map(|&p| q.iter().map(move |&r| p * r)).collect();
    }
    Ok(dist)
}

pub(crate) fn check_alphabet(cb: &Codebook, ch: &DiscreteChannel) -> Result<()> {
    let max = cb.words.iter().flatten().copied().max().unwrap_or(0);
    if max >= ch.input_size() {
        return Err(Error::Dimension(format!(
            "codebook uses symbol {max}, channel has {} inputs",
            ch.input_size()
        )));
    }
    Ok(())
}
