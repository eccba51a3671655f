//! Secrecy rate of the two-link (direct + RIS) AWGN wiretap channel and the
//! comparison schemes.
//!
//! Rates are in nats per channel use; [`nats_to_bits`] is the only place bits
//! appear.

use serde::{Deserialize, Serialize};

use crate::channel_model::LinkGains;
use crate::error::{Error, Result};

/// Per-watt SNR slopes `|α|²/N` of Bob's two links and of each eavesdropper's
/// two links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrCoefficients {
    pub mu1: f64,
    pub mu2: f64,
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
}

impl SnrCoefficients {
    pub fn new(mu1: f64, mu2: f64, beta1: Vec<f64>, beta2: Vec<f64>) -> Result<Self> {
        let c = SnrCoefficients { mu1, mu2, beta1, beta2 };
        c.validate()?;
        Ok(c)
    }

    /// Single eavesdropper shorthand.
    pub fn single(mu: [f64; 2], beta: [f64; 2]) -> Result<Self> {
        Self::new(mu[0], mu[1], vec![beta[0]], vec![beta[1]])
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta1.len() != self.beta2.len() {
            return Err(Error::Dimension(format!(
                "{} direct-link and {} RIS-link eavesdropper slopes",
                self.beta1.len(),
                self.beta2.len()
            )));
        }
        if self.beta1.is_empty() {
            return Err(Error::domain("at least one eavesdropper is required"));
        }
        let all = [self.mu1, self.mu2]
            .into_iter()
            .chain(self.eve_slopes().flat_map(|(a, b)| [a, b]));
        for v in all {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::domain(format!(
                    "SNR slopes must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn eve_count(&self) -> usize {
        self.beta1.len()
    }

    pub fn eve_slopes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.beta1.iter().copied().zip(self.beta2.iter().copied())
    }

    /// Raw secrecy rate at `(p1, p2)`; may be negative.
    pub fn rate(&self, p1: f64, p2: f64) -> f64 {
        let bob = (p1 * self.mu1).ln_1p() + (p2 * self.mu2).ln_1p();
        bob - self.worst_eve_rate(p1, p2)
    }

    pub fn worst_eve_rate(&self, p1: f64, p2: f64) -> f64 {
        self.eve_slopes()
            .map(|(b1, b2)| (p1 * b1).ln_1p() + (p2 * b2).ln_1p())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Multiplies every slope by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        SnrCoefficients {
            mu1: self.mu1 * s,
            mu2: self.mu2 * s,
            beta1: self.beta1.iter().map(|b| b * s).collect(),
            beta2: self.beta2.iter().map(|b| b * s).collect(),
        }
    }
}

/// Powers on the direct (`p1`) and RIS (`p2`) links under the budget `pt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub p1: f64,
    pub p2: f64,
    pub pt: f64,
}

/// Relative slack on `p1 + p2 <= pt`.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

impl PowerAllocation {
    pub fn new(p1: f64, p2: f64, pt: f64) -> Result<Self> {
        let a = PowerAllocation { p1, p2, pt };
        if !a.is_feasible() {
            return Err(Error::domain(format!(
                "infeasible allocation p1 = {p1}, p2 = {p2} for budget {pt}"
            )));
        }
        Ok(a)
    }

    pub fn is_feasible(&self) -> bool {
        self.p1 >= 0.0 && self.p2 >= 0.0 && self.pt >= 0.0 && self.p1 + self.p2 <= self.pt * (1.0 + BUDGET_TOLERANCE)
    }
}

pub fn snr_coefficients(g: &LinkGains, noise_w: f64) -> Result<SnrCoefficients> {
    if !(noise_w > 0.0) {
        return Err(Error::domain(format!("noise power must be positive, got {noise_w}")));
    }
    SnrCoefficients::new(
        g.alpha_ab1_sq / noise_w,
        g.alpha_ab2_sq / noise_w,
        g.alpha_ae1_sq.iter().map(|a| a / noise_w).collect(),
        g.alpha_ae2_sq.iter().map(|a| a / noise_w).collect(),
    )
}

pub fn secrecy_rate(p: &PowerAllocation, c: &SnrCoefficients) -> f64 {
    c.rate(p.p1, p.p2)
}

pub fn clamped_secrecy_rate(p: &PowerAllocation, c: &SnrCoefficients) -> f64 {
    secrecy_rate(p, c).max(0.0)
}

/// Conventional single-stream scheme: the two links add coherently in
/// amplitude at every receiver and the whole budget drives one stream.
pub fn reference_rate_no_ssoc(pt: f64, g: &LinkGains, noise_w: f64) -> f64 {
    let combined = |a1: f64, a2: f64| (a1.sqrt() + a2.sqrt()).powi(2);
    let snr = |gain: f64| (pt * gain / noise_w).ln_1p();
    let bob = snr(combined(g.alpha_ab1_sq, g.alpha_ab2_sq));
    let eve = g
        .alpha_ae1_sq
        .iter()
        .zip(&g.alpha_ae2_sq)
        .map(|(&e1, &e2)| snr(combined(e1, e2)))
        .fold(f64::NEG_INFINITY, f64::max);
    (bob - eve).max(0.0)
}

/// Direct link only, full budget.
pub fn baseline_rate_no_ris(pt: f64, g: &LinkGains, noise_w: f64) -> f64 {
    let snr = |gain: f64| (pt * gain / noise_w).ln_1p();
    let eve = g.alpha_ae1_sq.iter().map(|&e| snr(e)).fold(f64::NEG_INFINITY, f64::max);
    (snr(g.alpha_ab1_sq) - eve).max(0.0)
}

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}
