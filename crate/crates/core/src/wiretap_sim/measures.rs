use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::channel::{check_distribution, DiscreteChannel};
use super::codebook::DEFAULT_STATE_BUDGET;
use crate::error::{Error, Result};

/// Per-letter average densities within this of a threshold count as equal to it.
pub const DENSITY_TIE_TOLERANCE: f64 = 1e-9;

/// `Q_Z = Q_Xᵀ K`.
pub fn output_marginal(ch: &DiscreteChannel, qx: &[f64]) -> Result<Vec<f64>> {
    check_distribution(qx, ch.input_size(), "input distribution")?;
    let mut q = vec![0.0; ch.output_size()];
    for (x, &px) in qx.iter().enumerate() {
        for (acc, &k) in q.iter_mut().zip(ch.row(x)) {
            *acc += px * k;
        }
    }
    Ok(q)
}

fn check_pair(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::Dimension(format!("lengths {} and {} differ", p.len(), q.len())));
    }
    check_distribution(p, p.len(), "first distribution")?;
    check_distribution(q, q.len(), "second distribution")
}

/// Total variation distance `½ Σ |p − q|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    check_pair(p, q)?;
    Ok(tv_unchecked(p, q))
}

pub(crate) fn tv_unchecked(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Total variation distance as `E_q[(p/q − 1)^+]`.
pub fn tv_positive_part(p: &[f64], q: &[f64]) -> Result<f64> {
    check_pair(p, q)?;
    let mut sum = 0.0;
    for (i, (&a, &b)) in p.iter().zip(q).enumerate() {
        if b == 0.0 {
            if a > 0.0 {
                return Err(Error::domain(format!("p has mass {a} at index {i} where q has none")));
            }
            continue;
        }
        sum += b * (a / b - 1.0).max(0.0);
    }
    Ok(sum)
}

/// An information density, which is `−∞` when the channel cannot produce the
/// observed output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    Finite(f64),
    NegInfinity,
}

impl Density {
    pub fn value(self) -> f64 {
        match self {
            Density::Finite(v) => v,
            Density::NegInfinity => f64::NEG_INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Density::Finite(_))
    }
}

/// Table of per-letter densities `ln(K(z|x) / Q_Z(z))`, `None` where
/// `K(z|x) = 0`.
pub(crate) fn letter_densities(ch: &DiscreteChannel, qz: &[f64]) -> Vec<Option<f64>> {
    let mut t = Vec::with_capacity(ch.input_size() * ch.output_size());
    for x in 0..ch.input_size() {
        for (z, &qzz) in qz.iter().enumerate() {
            let k = ch.prob(x, z);
            t.push((k > 0.0).then(|| (k / qzz).ln()));
        }
    }
    t
}

/// `Σ_i ln(K(z_i|x_i) / Q_Z(z_i))`.
pub fn information_density(ch: &DiscreteChannel, qx: &[f64], x_seq: &[usize], z_seq: &[usize]) -> Result<Density> {
    if x_seq.len() != z_seq.len() {
        return Err(Error::Dimension(format!(
            "input length {} differs from output length {}",
            x_seq.len(),
            z_seq.len()
        )));
    }
    let qz = output_marginal(ch, qx)?;
    let mut sum = 0.0;
    for (&x, &z) in x_seq.iter().zip(z_seq) {
        if x >= ch.input_size() || z >= ch.output_size() {
            return Err(Error::domain(format!(
                "symbol pair ({x}, {z}) outside the channel alphabets"
            )));
        }
        let k = ch.prob(x, z);
        if k == 0.0 {
            return Ok(Density::NegInfinity);
        }
        sum += (k / qz[z]).ln();
    }
    Ok(Density::Finite(sum))
}

/// `I(X; Z)` in nats.
pub fn mutual_information(ch: &DiscreteChannel, qx: &[f64]) -> Result<f64> {
    let qz = output_marginal(ch, qx)?;
    let mut sum = 0.0;
    for (x, &px) in qx.iter().enumerate() {
        for (z, &qzz) in qz.iter().enumerate() {
            let k = ch.prob(x, z);
            if px > 0.0 && k > 0.0 {
                sum += px * k * (k / qzz).ln();
            }
        }
    }
    Ok(sum.max(0.0))
}

/// Joint law `Q_X(x) K(z|x)` and product law `Q_X(x) Q_Z(z)`, both flattened
/// with index `x · |Z| + z`.
pub fn joint_and_product(ch: &DiscreteChannel, qx: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let qz = output_marginal(ch, qx)?;
    let mut joint = Vec::with_capacity(qx.len() * qz.len());
    let mut product = Vec::with_capacity(qx.len() * qz.len());
    for (x, &px) in qx.iter().enumerate() {
        for (z, &qzz) in qz.iter().enumerate() {
            joint.push(px * ch.prob(x, z));
            product.push(px * qzz);
        }
    }
    Ok((joint, product))
}

/// `D_α(p‖q) = ln(Σ p^α q^{1−α}) / (α − 1)`; may be `+∞`.
pub fn renyi_divergence(p: &[f64], q: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) || alpha == 1.0 {
        return Err(Error::domain(format!(
            "Rényi order must lie in (0, 1) or (1, ∞), got {alpha}; use mutual_information for order 1"
        )));
    }
    check_pair(p, q)?;
    let mut sum = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            if alpha > 1.0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        sum += a.powf(alpha) * b.powf(1.0 - alpha);
    }
    if sum == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((sum.ln() / (alpha - 1.0)).max(0.0))
}

/// Probability under `(Q_X K)^{⊗n}` that the per-letter average density
/// exceeds `I + ε`.
///
/// Letters are grouped by `(x, z)` pair, so the sum runs over multiplicity
/// vectors rather than sequences and each density total is computed in a
/// fixed order.
pub fn atypical_probability(ch: &DiscreteChannel, qx: &[f64], eps: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("block length must be at least 1"));
    }
    if !eps.is_finite() {
        return Err(Error::domain(format!("epsilon must be finite, got {eps}")));
    }
    let qz = output_marginal(ch, qx)?;
    let info = mutual_information(ch, qx)?;
    let dens = letter_densities(ch, &qz);
    let mut letters = Vec::new();
    for x in 0..ch.input_size() {
        for z in 0..ch.output_size() {
            let p = qx[x] * ch.prob(x, z);
            if p > 0.0 {
                letters.push((p, dens[x * ch.output_size() + z].expect("positive probability")));
            }
        }
    }
    let states = multiset_count(n, letters.len());
    if states > u128::from(DEFAULT_STATE_BUDGET) {
        return Err(Error::Budget {
            states,
            budget: DEFAULT_STATE_BUDGET,
        });
    }

    // Distribution over multiplicity vectors, built one letter at a time.
    let mut layer: HashMap<Vec<u16>, f64> = HashMap::from([(vec![0; letters.len()], 1.0)]);
    for _ in 0..n {
        let mut next: HashMap<Vec<u16>, f64> = HashMap::with_capacity(layer.len() * letters.len());
        for (counts, p) in &layer {
            for (k, &(pk, _)) in letters.iter().enumerate() {
                let mut c = counts.clone();
                c[k] += 1;
                *next.entry(c).or_insert(0.0) += p * pk;
            }
        }
        layer = next;
    }
    let threshold = info + eps;
    let mut keys: Vec<_> = layer.into_iter().collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(keys
        .into_iter()
        .filter(|(counts, _)| {
            let total: f64 = counts.iter().zip(&letters).map(|(&c, &(_, d))| f64::from(c) * d).sum();
            total / n as f64 > threshold + DENSITY_TIE_TOLERANCE
        })
        .map(|(_, p)| p)
        .sum())
}

/// `C(n + k − 1, k − 1)`, saturating.
fn multiset_count(n: usize, k: usize) -> u128 {
    if k == 0 {
        return 1;
    }
    let (top, r) = ((n + k - 1) as u128, (k - 1).min(n) as u128);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = match acc.checked_mul(top - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}
