use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed deviation of a channel row sum from 1.
pub const ROW_TOLERANCE: f64 = 1e-12;
/// Allowed deviation of a probability vector's total from 1.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

/// A finite-alphabet channel: `matrix[x][z]` is the probability of output `z`
/// given input `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DiscreteChannel {
    input_size: usize,
    output_size: usize,
    /// Row-major, `input_size × output_size`.
    entries: Vec<f64>,
}

impl DiscreteChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let input_size = rows.len();
        if input_size == 0 {
            return Err(Error::Dimension("channel needs at least one input".into()));
        }
        let output_size = rows[0].len();
        if output_size == 0 {
            return Err(Error::Dimension("channel needs at least one output".into()));
        }
        let mut entries = Vec::with_capacity(input_size * output_size);
        for (x, row) in rows.into_iter().enumerate() {
            if row.len() != output_size {
                return Err(Error::Dimension(format!(
                    "row {x} has {} entries, expected {output_size}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::domain(format!("row {x} has entry {v} outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::domain(format!("row {x} sums to {sum}, not 1")));
            }
            entries.extend(row);
        }
        Ok(DiscreteChannel {
            input_size,
            output_size,
            entries,
        })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("crossover probability {p} outside [0, 1]")));
        }
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Noiseless channel on `k` symbols.
    pub fn identity(k: usize) -> Result<Self> {
        Self::new(
            (0..k)
                .map(|x| (0..k).map(|z| f64::from(u8::from(x == z))).collect())
                .collect(),
        )
    }

    /// Every input sees the same output distribution `row`.
    pub fn constant(inputs: usize, row: &[f64]) -> Result<Self> {
        Self::new(vec![row.to_vec(); inputs])
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    /// `K(z | x)`.
    #[inline]
    pub fn prob(&self, x: usize, z: usize) -> f64 {
        self.entries[x * self.output_size + z]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.entries[x * self.output_size..(x + 1) * self.output_size]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.output_size).map(<[f64]>::to_vec).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for DiscreteChannel {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<DiscreteChannel> for Vec<Vec<f64>> {
    fn from(ch: DiscreteChannel) -> Self {
        ch.rows()
    }
}

/// Checks that `p` is a probability vector of length `len`.
pub fn check_distribution(p: &[f64], len: usize, what: &str) -> Result<()> {
    if p.len() != len {
        return Err(Error::Dimension(format!(
            "{what} has length {}, expected {len}",
            p.len()
        )));
    }
    if let Some(v) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::domain(format!("{what} has entry {v} outside [0, 1]")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(Error::domain(format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

/// Bob's channel, the eavesdroppers' channels and the input distribution
/// `Q_X`, all over a shared input alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem")]
pub struct DiscreteWiretapSystem {
    pub bob: DiscreteChannel,
    pub eves: Vec<DiscreteChannel>,
    pub input_dist: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    bob: DiscreteChannel,
    eves: Vec<DiscreteChannel>,
    input_dist: Vec<f64>,
}

impl TryFrom<RawSystem> for DiscreteWiretapSystem {
    type Error = Error;

    fn try_from(r: RawSystem) -> Result<Self> {
        Self::new(r.bob, r.eves, r.input_dist)
    }
}

impl DiscreteWiretapSystem {
    pub fn new(bob: DiscreteChannel, eves: Vec<DiscreteChannel>, input_dist: Vec<f64>) -> Result<Self> {
        if eves.is_empty() {
            return Err(Error::Dimension("at least one eavesdropper channel is required".into()));
        }
        let k = bob.input_size();
        for (j, e) in eves.iter().enumerate() {
            if e.input_size() != k {
                return Err(Error::Dimension(format!(
                    "eavesdropper {j} has {} inputs, Bob has {k}",
                    e.input_size()
                )));
            }
        }
        check_distribution(&input_dist, k, "input distribution")?;
        Ok(DiscreteWiretapSystem { bob, eves, input_dist })
    }

    pub fn input_size(&self) -> usize {
        self.bob.input_size()
    }
}
