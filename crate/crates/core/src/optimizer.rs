//! Minorize-maximization of the secrecy rate over the power split.
//!
//! Each eavesdropper term `ln(1 + β P)` is replaced by its tangent at the
//! current anchor, which turns the objective into the concave surrogate
//!
//! ```text
//! g(P1, P2) = ln(1 + μ1 P1) + ln(1 + μ2 P2) − max_j ℓ_j(P1, P2)
//! ```
//!
//! with affine `ℓ_j`. `g` touches the secrecy rate at the anchor and lies below
//! it everywhere else, so maximizing `g` never decreases the rate.
//!
//! The inner maximization is done in closed form. The two KKT cases (budget
//! inactive / budget active with a quadratic in `P1`) are exact while a single
//! eavesdropper piece is active. When several pieces tie at the optimum the
//! maximizer sits on a tie line `ℓ_i = ℓ_k` or at a vertex, so those are
//! enumerated as well, together with the simplex boundary. The surrogate is
//! concave on a polygon, which makes this finite candidate set exhaustive.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::secrecy_rate::{PowerAllocation, SnrCoefficients};

/// Candidates whose multiplier falls below this are not budget-active KKT points.
const LAMBDA_FLOOR: f64 = -1e-12;
/// Relative slack when deciding whether a computed point lies in the feasible set.
const FEASIBILITY_SLACK: f64 = 1e-9;
/// Surrogate values this close (relative) count as a tie.
const TIE_TOLERANCE: f64 = 1e-13;

/// The fixed pair the tangent lines are taken at.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SurrogateAnchor {
    pub p1_m: f64,
    pub p2_m: f64,
}

impl SurrogateAnchor {
    pub const fn new(p1_m: f64, p2_m: f64) -> Self {
        SurrogateAnchor { p1_m, p2_m }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    /// Budget inactive, both powers strictly positive (λ = 0).
    Interior,
    /// Budget active, `P1 + P2 = Pt`.
    BudgetActive,
    /// `P1 = 0`.
    CornerP1Zero,
    /// `P2 = 0`.
    CornerP2Zero,
    Origin,
    /// Two eavesdropper tangent planes tie at the point.
    EveTie,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktCandidate {
    pub p1: f64,
    pub p2: f64,
    /// Budget multiplier; only budget-active candidates carry one.
    pub lambda: Option<f64>,
    pub case_tag: CaseTag,
}

impl KktCandidate {
    fn new(p1: f64, p2: f64, case_tag: CaseTag) -> Self {
        KktCandidate {
            p1,
            p2,
            lambda: None,
            case_tag,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Stop once the secrecy rate changes by less than this (nats).
    pub tolerance: f64,
    /// Grid step of the brute-force oracle, as a fraction of the budget.
    pub grid_resolution: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iterations: 500,
            tolerance: 1e-9,
            grid_resolution: 1e-3,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::domain("max_iterations must be at least 1"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::domain(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if !(self.grid_resolution > 0.0 && self.grid_resolution < 1.0) {
            return Err(Error::domain(format!(
                "grid_resolution must lie in (0, 1), got {}",
                self.grid_resolution
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub anchor: SurrogateAnchor,
    pub candidate: KktCandidate,
    pub surrogate_value: f64,
    /// Secrecy rate at the chosen candidate.
    pub rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OptimizerTrace {
    /// Anchor the run started from.
    pub start: SurrogateAnchor,
    pub steps: Vec<TraceStep>,
    pub converged: bool,
}

impl OptimizerTrace {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    /// Largest drop in secrecy rate between consecutive anchors (0 for an
    /// ascending trace).
    pub fn max_rate_drop(&self, c: &SnrCoefficients) -> f64 {
        let mut prev = c.rate(self.start.p1_m, self.start.p2_m);
        let mut worst: f64 = 0.0;
        for s in &self.steps {
            worst = worst.max(prev - s.rate);
            prev = s.rate;
        }
        worst
    }
}

/// Tangent of `ln(1 + β p)` at `anchor`, evaluated at `p`.
pub fn tangent_line(beta: f64, anchor: f64, p: f64) -> f64 {
    let at = beta * anchor;
    at.ln_1p() + beta * (p - anchor) / (1.0 + at)
}

/// One eavesdropper's tangent plane `ℓ(P) = base + s1 (P1 − a1) + s2 (P2 − a2)`.
#[derive(Debug, Clone, Copy)]
struct Piece {
    s1: f64,
    s2: f64,
    base: f64,
}

#[derive(Debug, Clone)]
struct Surrogate {
    mu1: f64,
    mu2: f64,
    anchor: SurrogateAnchor,
    pieces: Vec<Piece>,
}

impl Surrogate {
    fn new(anchor: &SurrogateAnchor, c: &SnrCoefficients) -> Self {
        let (a1, a2) = (anchor.p1_m, anchor.p2_m);
        let pieces = c
            .eve_slopes()
            .map(|(b1, b2)| Piece {
                s1: b1 / (1.0 + b1 * a1),
                s2: b2 / (1.0 + b2 * a2),
                base: (b1 * a1).ln_1p() + (b2 * a2).ln_1p(),
            })
            .collect();
        Surrogate {
            mu1: c.mu1,
            mu2: c.mu2,
            anchor: *anchor,
            pieces,
        }
    }

    fn piece_value(&self, piece: &Piece, p1: f64, p2: f64) -> f64 {
        piece.base + piece.s1 * (p1 - self.anchor.p1_m) + piece.s2 * (p2 - self.anchor.p2_m)
    }

    /// Constant term when the piece is written as `c + s1 P1 + s2 P2`.
    fn piece_offset(&self, piece: &Piece) -> f64 {
        piece.base - piece.s1 * self.anchor.p1_m - piece.s2 * self.anchor.p2_m
    }

    fn bob(&self, p1: f64, p2: f64) -> f64 {
        (p1 * self.mu1).ln_1p() + (p2 * self.mu2).ln_1p()
    }

    fn value(&self, p1: f64, p2: f64) -> f64 {
        let eve = self
            .pieces
            .iter()
            .map(|pc| self.piece_value(pc, p1, p2))
            .fold(f64::NEG_INFINITY, f64::max);
        self.bob(p1, p2) - eve
    }

    /// Largest tangent slope per coordinate, used by the max-slope
    /// stationarity conditions.
    fn max_slopes(&self) -> (f64, f64) {
        self.pieces
            .iter()
            .fold((f64::NEG_INFINITY, f64::NEG_INFINITY), |(m1, m2), pc| {
                (m1.max(pc.s1), m2.max(pc.s2))
            })
    }
}

/// Surrogate value at `(p1, p2)` built from tangents at `anchor`.
pub fn surrogate_value(p1: f64, p2: f64, anchor: &SurrogateAnchor, c: &SnrCoefficients) -> f64 {
    let bob = (p1 * c.mu1).ln_1p() + (p2 * c.mu2).ln_1p();
    let eve = c
        .eve_slopes()
        .map(|(b1, b2)| tangent_line(b1, anchor.p1_m, p1) + tangent_line(b2, anchor.p2_m, p2))
        .fold(f64::NEG_INFINITY, f64::max);
    bob - eve
}

fn all_slopes_positive(c: &SnrCoefficients) -> bool {
    c.mu1 > 0.0 && c.mu2 > 0.0 && c.eve_slopes().all(|(b1, b2)| b1 > 0.0 && b2 > 0.0)
}

fn within_budget(p1: f64, p2: f64, pt: f64) -> bool {
    let slack = FEASIBILITY_SLACK * pt.max(f64::MIN_POSITIVE);
    p1 >= -slack && p2 >= -slack && p1 + p2 <= pt + slack
}

/// Snaps a point that is feasible up to rounding onto the feasible set.
fn snap(p1: f64, p2: f64, pt: f64) -> (f64, f64) {
    let (p1, p2) = (p1.max(0.0), p2.max(0.0));
    let sum = p1 + p2;
    if sum > pt {
        (p1 * pt / sum, p2 * pt / sum)
    } else {
        (p1, p2)
    }
}

/// Budget-inactive stationary point (λ = 0).
///
/// Solves `μk / (1 + μk Pk) = max_j β_jk / (1 + β_jk Pk^(m))` per coordinate.
/// Returns `None` when the point is infeasible or when a slope is zero (those
/// instances are covered by the boundary candidates).
pub fn solve_case1(anchor: &SurrogateAnchor, c: &SnrCoefficients, pt: f64) -> Option<KktCandidate> {
    if !all_slopes_positive(c) {
        return None;
    }
    let (s1, s2) = Surrogate::new(anchor, c).max_slopes();
    let p1 = 1.0 / s1 - 1.0 / c.mu1;
    let p2 = 1.0 / s2 - 1.0 / c.mu2;
    if p1 < 0.0 || p2 < 0.0 || !within_budget(p1, p2, pt) {
        return None;
    }
    let (p1, p2) = snap(p1, p2, pt);
    Some(KktCandidate {
        p1,
        p2,
        lambda: Some(0.0),
        case_tag: CaseTag::Interior,
    })
}

/// Real roots of `a x² + b x + c`, falling back to the linear root when `a`
/// vanishes. Empty when there is no real root (or `a = b = 0`).
fn real_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 || !scale.is_finite() {
        return Vec::new();
    }
    let (a, b, c) = (a / scale, b / scale, c / scale);
    if a.abs() <= 1e-14 {
        if b.abs() <= 1e-14 {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    // Numerically stable pair: q = −(b + sign(b)√Δ)/2, roots q/a and c/q.
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// Budget-active stationary points (`P1 + P2 = Pt`, λ ≥ 0).
///
/// Eliminating λ from the two stationarity conditions gives
/// `A P1² + B P1 + C = 0` with
///
/// ```text
/// A = D μ1 μ2
/// B = −D (μ1 − μ2) − μ1 μ2 (D Pt + 2)
/// C = μ1 − μ2 − D + Pt (μ1 μ2 − D μ2)
/// D = max_j β_j1 / (1 + β_j1 P1^(m)) − max_j β_j2 / (1 + β_j2 P2^(m))
/// ```
///
/// Every real root in `[0, Pt]` whose multiplier
/// `λ = μ1 / (1 + μ1 P1) − max_j β_j1 / (1 + β_j1 P1^(m))` is non-negative is
/// returned; the surrogate value decides between them.
pub fn solve_case2(anchor: &SurrogateAnchor, c: &SnrCoefficients, pt: f64) -> Vec<KktCandidate> {
    let (s1, s2) = Surrogate::new(anchor, c).max_slopes();
    budget_roots(c.mu1, c.mu2, s1, s2, pt)
}

fn budget_roots(mu1: f64, mu2: f64, s1: f64, s2: f64, pt: f64) -> Vec<KktCandidate> {
    if !(pt > 0.0) {
        return Vec::new();
    }
    let d = s1 - s2;
    let a = d * mu1 * mu2;
    let b = -d * (mu1 - mu2) - mu1 * mu2 * (d * pt + 2.0);
    let c = mu1 - mu2 - d + pt * (mu1 * mu2 - d * mu2);
    real_roots(a, b, c)
        .into_iter()
        .filter(|&p1| within_budget(p1, pt - p1, pt))
        .filter_map(|p1| {
            let p1 = p1.clamp(0.0, pt);
            let p2 = pt - p1;
            let lambda = mu1 / (1.0 + p1 * mu1) - s1;
            (lambda >= LAMBDA_FLOOR).then_some(KktCandidate {
                p1,
                p2,
                lambda: Some(lambda.max(0.0)),
                case_tag: CaseTag::BudgetActive,
            })
        })
        .collect()
}

/// Line `n · P = offset` in the power plane.
#[derive(Debug, Clone, Copy)]
struct Line {
    normal: [f64; 2],
    offset: f64,
    tag: CaseTag,
    /// Pieces that can be active along this line; `None` means all of them.
    pieces: Option<[usize; 2]>,
}

impl Line {
    /// Portion of the line inside the feasible triangle as `(point, direction,
    /// t_lo, t_hi)`.
    fn clip(&self, pt: f64) -> Option<([f64; 2], [f64; 2], f64, f64)> {
        let [n1, n2] = self.normal;
        let norm_sq = n1 * n1 + n2 * n2;
        if norm_sq == 0.0 || !norm_sq.is_finite() {
            return None;
        }
        let origin = [self.offset * n1 / norm_sq, self.offset * n2 / norm_sq];
        let dir = [-n2, n1];
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let slack = FEASIBILITY_SLACK * pt;
        // a · P <= b for P1 >= 0, P2 >= 0, P1 + P2 <= pt.
        for (a, b) in [([-1.0, 0.0], 0.0), ([0.0, -1.0], 0.0), ([1.0, 1.0], pt)] {
            let ad = a[0] * dir[0] + a[1] * dir[1];
            let room = b - (a[0] * origin[0] + a[1] * origin[1]);
            if ad.abs() <= 1e-15 * (dir[0].abs() + dir[1].abs()) {
                if room < -slack {
                    return None;
                }
            } else if ad > 0.0 {
                hi = hi.min(room / ad);
            } else {
                lo = lo.max(room / ad);
            }
        }
        (lo <= hi).then_some((origin, dir, lo, hi))
    }

    fn intersect(&self, other: &Line) -> Option<[f64; 2]> {
        let [a, b] = self.normal;
        let [c, d] = other.normal;
        let det = a * d - b * c;
        let scale = (a.abs() + b.abs()) * (c.abs() + d.abs());
        if det.abs() <= 1e-12 * scale || scale == 0.0 {
            return None;
        }
        Some([
            (self.offset * d - b * other.offset) / det,
            (a * other.offset - self.offset * c) / det,
        ])
    }
}

impl Surrogate {
    fn lines(&self, pt: f64) -> Vec<Line> {
        let mut lines = vec![
            Line {
                normal: [1.0, 0.0],
                offset: 0.0,
                tag: CaseTag::CornerP1Zero,
                pieces: None,
            },
            Line {
                normal: [0.0, 1.0],
                offset: 0.0,
                tag: CaseTag::CornerP2Zero,
                pieces: None,
            },
            Line {
                normal: [1.0, 1.0],
                offset: pt,
                tag: CaseTag::BudgetActive,
                pieces: None,
            },
        ];
        for i in 0..self.pieces.len() {
            for k in i + 1..self.pieces.len() {
                let (pi, pk) = (&self.pieces[i], &self.pieces[k]);
                lines.push(Line {
                    normal: [pi.s1 - pk.s1, pi.s2 - pk.s2],
                    offset: self.piece_offset(pk) - self.piece_offset(pi),
                    tag: CaseTag::EveTie,
                    pieces: Some([i, k]),
                });
            }
        }
        lines
    }

    /// Maximizers of `bob − ℓ_j` along the clipped line, for each relevant
    /// piece, plus the segment endpoints.
    fn line_candidates(&self, line: &Line, pt: f64, out: &mut Vec<KktCandidate>) {
        let Some((origin, dir, lo, hi)) = line.clip(pt) else {
            return;
        };
        let at = |t: f64| [origin[0] + t * dir[0], origin[1] + t * dir[1]];
        let mut push = |p: [f64; 2], tag: CaseTag, lambda: Option<f64>| {
            if within_budget(p[0], p[1], pt) {
                let (p1, p2) = snap(p[0], p[1], pt);
                out.push(KktCandidate {
                    p1,
                    p2,
                    lambda,
                    case_tag: tag,
                });
            }
        };
        push(at(lo), line.tag, None);
        push(at(hi), line.tag, None);

        let a1 = 1.0 + self.mu1 * origin[0];
        let a2 = 1.0 + self.mu2 * origin[1];
        let b1 = self.mu1 * dir[0];
        let b2 = self.mu2 * dir[1];
        let relevant: Vec<usize> = match line.pieces {
            Some(ids) => ids.to_vec(),
            None => (0..self.pieces.len()).collect(),
        };
        for j in relevant {
            let pc = &self.pieces[j];
            let sigma = pc.s1 * dir[0] + pc.s2 * dir[1];
            // d/dt [ln(a1 + b1 t) + ln(a2 + b2 t) − σ t] = 0, cleared of denominators.
            let qa = -sigma * b1 * b2;
            let qb = 2.0 * b1 * b2 - sigma * (a1 * b2 + a2 * b1);
            let qc = b1 * a2 + b2 * a1 - sigma * a1 * a2;
            for t in real_roots(qa, qb, qc) {
                if t >= lo && t <= hi {
                    let p = at(t);
                    let lambda = (line.tag == CaseTag::BudgetActive)
                        .then(|| self.mu1 / (1.0 + self.mu1 * p[0].max(0.0)) - pc.s1);
                    if lambda.is_some_and(|l| l < LAMBDA_FLOOR) {
                        continue;
                    }
                    push(p, line.tag, lambda.map(|l| l.max(0.0)));
                }
            }
        }
    }
}

/// The finite candidate set for the inner maximization at `anchor`; never
/// empty for `pt > 0`.
///
/// Contains the max-slope KKT points (both cases), the same two cases with
/// each eavesdropper piece taken alone, maximizers along the three edges of
/// the feasible triangle and along every eavesdropper tie line, the vertices,
/// and every pairwise intersection of those lines.
pub fn kkt_candidates(anchor: &SurrogateAnchor, c: &SnrCoefficients, pt: f64) -> Vec<KktCandidate> {
    let sur = Surrogate::new(anchor, c);
    let mut out = vec![
        KktCandidate::new(0.0, 0.0, CaseTag::Origin),
        KktCandidate::new(pt, 0.0, CaseTag::CornerP2Zero),
        KktCandidate::new(0.0, pt, CaseTag::CornerP1Zero),
    ];
    out.extend(solve_case1(anchor, c, pt));
    out.extend(solve_case2(anchor, c, pt));

    for pc in &sur.pieces {
        if c.mu1 > 0.0 && c.mu2 > 0.0 && pc.s1 > 0.0 && pc.s2 > 0.0 {
            let p1 = 1.0 / pc.s1 - 1.0 / c.mu1;
            let p2 = 1.0 / pc.s2 - 1.0 / c.mu2;
            if p1 >= 0.0 && p2 >= 0.0 && within_budget(p1, p2, pt) {
                let (p1, p2) = snap(p1, p2, pt);
                out.push(KktCandidate {
                    p1,
                    p2,
                    lambda: Some(0.0),
                    case_tag: CaseTag::Interior,
                });
            }
        }
    }

    let lines = sur.lines(pt);
    for line in &lines {
        sur.line_candidates(line, pt, &mut out);
    }
    for (i, a) in lines.iter().enumerate() {
        for b in &lines[i + 1..] {
            if let Some(p) = a.intersect(b) {
                if within_budget(p[0], p[1], pt) {
                    let (p1, p2) = snap(p[0], p[1], pt);
                    let tag = if a.tag == CaseTag::EveTie { b.tag } else { a.tag };
                    out.push(KktCandidate::new(p1, p2, tag));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmStep {
    pub anchor: SurrogateAnchor,
    pub candidate: KktCandidate,
    pub surrogate_value: f64,
}

/// One minorize-maximization step: the candidate with the largest surrogate
/// value becomes the next anchor. Ties go to the larger `p1`, then the larger
/// `p2`.
pub fn mm_step(anchor: &SurrogateAnchor, c: &SnrCoefficients, pt: f64) -> MmStep {
    let sur = Surrogate::new(anchor, c);
    let mut best: Option<(KktCandidate, f64)> = None;
    for cand in kkt_candidates(anchor, c, pt) {
        let v = sur.value(cand.p1, cand.p2);
        if !v.is_finite() {
            continue;
        }
        best = match best {
            None => Some((cand, v)),
            Some((b, bv)) => {
                let tol = TIE_TOLERANCE * bv.abs().max(1.0);
                let better = if (v - bv).abs() <= tol {
                    (cand.p1, cand.p2) > (b.p1, b.p2)
                } else {
                    v > bv
                };
                if better {
                    Some((cand, v))
                } else {
                    Some((b, bv))
                }
            }
        };
    }
    // The origin is always a finite candidate.
    let (candidate, _) = best.expect("candidate set contains the origin");
    MmStep {
        anchor: SurrogateAnchor::new(candidate.p1, candidate.p2),
        candidate,
        surrogate_value: surrogate_value(candidate.p1, candidate.p2, anchor, c),
    }
}

/// Runs minorize-maximization until the secrecy rate moves by less than
/// `cfg.tolerance` or `cfg.max_iterations` steps have been taken.
///
/// With an explicit `start` a single run is made from it. Without one the
/// secrecy rate can have several stationary points (eavesdroppers strong on
/// different links), so runs are made from the even split and from the three
/// vertices `(0, 0)`, `(Pt, 0)`, `(0, Pt)`; the best end point wins and its
/// trace is returned. Starting at the origin also guarantees a non-negative
/// result.
pub fn optimize(
    c: &SnrCoefficients,
    pt: f64,
    cfg: &OptimizerConfig,
    start: Option<SurrogateAnchor>,
) -> Result<(PowerAllocation, OptimizerTrace)> {
    c.validate()?;
    cfg.validate()?;
    if !(pt > 0.0 && pt.is_finite()) {
        return Err(Error::domain(format!(
            "power budget must be positive and finite, got {pt}"
        )));
    }
    let starts = match start {
        Some(a) => {
            if !(a.p1_m.is_finite() && a.p2_m.is_finite() && within_budget(a.p1_m, a.p2_m, pt)) {
                return Err(Error::domain(format!("start {a:?} is outside the feasible set")));
            }
            let (p1, p2) = snap(a.p1_m, a.p2_m, pt);
            vec![SurrogateAnchor::new(p1, p2)]
        }
        None => vec![
            SurrogateAnchor::new(pt / 2.0, pt / 2.0),
            SurrogateAnchor::new(0.0, 0.0),
            SurrogateAnchor::new(pt, 0.0),
            SurrogateAnchor::new(0.0, pt),
        ],
    };

    let mut best: Option<(SurrogateAnchor, f64, OptimizerTrace)> = None;
    for s in starts {
        let (end, trace) = run_mm(c, pt, cfg, s);
        let rate = c.rate(end.p1_m, end.p2_m);
        if best.as_ref().is_none_or(|(_, r, _)| rate > *r) {
            best = Some((end, rate, trace));
        }
    }
    let (end, _, trace) = best.expect("at least one start");
    Ok((PowerAllocation::new(end.p1_m, end.p2_m, pt)?, trace))
}

fn run_mm(
    c: &SnrCoefficients,
    pt: f64,
    cfg: &OptimizerConfig,
    start: SurrogateAnchor,
) -> (SurrogateAnchor, OptimizerTrace) {
    let mut anchor = start;
    let mut rate = c.rate(anchor.p1_m, anchor.p2_m);
    let mut trace = OptimizerTrace {
        start,
        ..OptimizerTrace::default()
    };
    for _ in 0..cfg.max_iterations {
        let step = mm_step(&anchor, c, pt);
        let next_rate = c.rate(step.anchor.p1_m, step.anchor.p2_m);
        trace.steps.push(TraceStep {
            anchor,
            candidate: step.candidate,
            surrogate_value: step.surrogate_value,
            rate: next_rate,
        });
        let delta = (next_rate - rate).abs();
        anchor = step.anchor;
        rate = next_rate;
        if delta < cfg.tolerance {
            trace.converged = true;
            break;
        }
    }
    (anchor, trace)
}

/// Exhaustive maximum of the secrecy rate over the grid
/// `{(i h, k h) : i + k <= N}` with `N = round(1 / resolution)` and
/// `h = pt / N`.
///
/// Independent of the surrogate machinery; used to check [`optimize`].
pub fn grid_oracle(c: &SnrCoefficients, pt: f64, resolution: f64) -> Result<(PowerAllocation, f64)> {
    c.validate()?;
    if !(resolution > 0.0 && resolution < 1.0) {
        return Err(Error::domain(format!(
            "resolution must lie in (0, 1), got {resolution}"
        )));
    }
    if !(pt >= 0.0 && pt.is_finite()) {
        return Err(Error::domain(format!("power budget must be non-negative, got {pt}")));
    }
    let steps = (1.0 / resolution).round() as usize;
    let h = pt / steps as f64;
    let axis = |slope: f64| -> Vec<f64> { (0..=steps).map(|i| (i as f64 * h * slope).ln_1p()).collect() };
    let bob1 = axis(c.mu1);
    let bob2 = axis(c.mu2);
    let eve1: Vec<Vec<f64>> = c.beta1.iter().map(|&b| axis(b)).collect();
    let eve2: Vec<Vec<f64>> = c.beta2.iter().map(|&b| axis(b)).collect();

    let (i, k, _) = (0..=steps)
        .into_par_iter()
        .map(|i| {
            let mut best = (i, 0, f64::NEG_INFINITY);
            for k in 0..=steps - i {
                let eve = eve1
                    .iter()
                    .zip(&eve2)
                    .map(|(e1, e2)| e1[i] + e2[k])
                    .fold(f64::NEG_INFINITY, f64::max);
                let v = bob1[i] + bob2[k] - eve;
                if v > best.2 {
                    best = (i, k, v);
                }
            }
            best
        })
        .reduce(
            || (0, 0, f64::NEG_INFINITY),
            |a, b| {
                if b.2 > a.2 || (b.2 == a.2 && (b.0, b.1) < (a.0, a.1)) {
                    b
                } else {
                    a
                }
            },
        );
    let p1 = i as f64 * h;
    let p2 = (k as f64 * h).min(pt - p1).max(0.0);
    Ok((PowerAllocation { p1, p2, pt }, c.rate(p1, p2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst() -> SnrCoefficients {
        SnrCoefficients::single([1.0, 2.0], [0.5, 0.5]).unwrap()
    }

    #[test]
    fn tangent_examples() {
        assert!((tangent_line(1.0, 1.0, 1.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((tangent_line(1.0, 0.0, 2.0) - 2.0).abs() < 1e-15);
        assert_eq!(tangent_line(0.0, 3.0, 7.0), 0.0);
    }

    #[test]
    fn surrogate_examples() {
        let c = inst();
        let a = SurrogateAnchor::new(1.0, 1.0);
        assert!((surrogate_value(1.0, 1.0, &a, &c) - c.rate(1.0, 1.0)).abs() < 1e-15);
        // ln3 + ln5 − 2 (ln1.5 + 1/3)
        assert!((surrogate_value(2.0, 2.0, &a, &c) - 1.230_453_318_219_215).abs() < 1e-12);
        assert!(surrogate_value(2.0, 2.0, &a, &c) <= c.rate(2.0, 2.0));
    }

    #[test]
    fn internal_surrogate_matches_public_form() {
        let c = SnrCoefficients::new(3.0, 0.4, vec![0.2, 5.0, 1.0], vec![2.0, 0.1, 0.7]).unwrap();
        let a = SurrogateAnchor::new(0.3, 0.6);
        let s = Surrogate::new(&a, &c);
        for &(p1, p2) in &[(0.0, 0.0), (0.1, 0.8), (0.5, 0.5), (1.0, 0.0)] {
            assert!((s.value(p1, p2) - surrogate_value(p1, p2, &a, &c)).abs() < 1e-13);
        }
    }

    #[test]
    fn case1_examples() {
        let c = inst();
        let a = SurrogateAnchor::new(1.0, 1.0);
        let cand = solve_case1(&a, &c, 10.0).unwrap();
        assert!((cand.p1 - 2.0).abs() < 1e-12 && (cand.p2 - 2.5).abs() < 1e-12);
        assert_eq!(cand.case_tag, CaseTag::Interior);
        assert!(solve_case1(&a, &c, 3.0).is_none());
        // μ1 = 0.2 is below the tangent slope 1/3 → P1* < 0.
        let weak = SnrCoefficients::single([0.2, 2.0], [0.5, 0.5]).unwrap();
        assert!(solve_case1(&a, &weak, 10.0).is_none());
        let zero = SnrCoefficients::single([1.0, 0.0], [0.5, 0.5]).unwrap();
        assert!(solve_case1(&a, &zero, 10.0).is_none());
    }

    #[test]
    fn case2_linear_and_symmetric() {
        let c = inst();
        let a = SurrogateAnchor::new(1.0, 1.0);
        // D = 0: −4 P1 + (2 Pt − 1) = 0.
        let cands = solve_case2(&a, &c, 3.0);
        assert_eq!(cands.len(), 1);
        assert!((cands[0].p1 - 1.25).abs() < 1e-12);
        assert!((cands[0].p2 - 1.75).abs() < 1e-12);
        let lambda = cands[0].lambda.unwrap();
        assert!((lambda - (1.0 / 2.25 - 1.0 / 3.0)).abs() < 1e-12);

        let sym = SnrCoefficients::new(2.0, 2.0, vec![0.1, 0.2], vec![0.1, 0.2]).unwrap();
        let cands = solve_case2(&SurrogateAnchor::new(0.4, 0.4), &sym, 5.0);
        assert_eq!(cands.len(), 1);
        assert!((cands[0].p1 - 2.5).abs() < 1e-12);
    }

    #[test]
    fn case2_negative_discriminant_is_empty() {
        assert!(real_roots(1.0, 0.0, 1.0).is_empty());
        assert_eq!(real_roots(0.0, 2.0, -1.0), vec![0.5]);
        assert!(real_roots(0.0, 0.0, 1.0).is_empty());
        let mut r = real_roots(1.0, -3.0, 2.0);
        r.sort_by(f64::total_cmp);
        assert!((r[0] - 1.0).abs() < 1e-15 && (r[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn case2_root_matches_budget_line_grid() {
        let c = inst();
        let a = SurrogateAnchor::new(1.0, 1.0);
        let pt = 3.0;
        let n = 10_000;
        let (best_p1, _) = (0..=n)
            .map(|i| {
                let p1 = pt * i as f64 / n as f64;
                (p1, surrogate_value(p1, pt - p1, &a, &c))
            })
            .fold((0.0, f64::NEG_INFINITY), |b, x| if x.1 > b.1 { x } else { b });
        let cands = solve_case2(&a, &c, pt);
        assert!((cands[0].p1 - best_p1).abs() <= 1e-4 * pt);
    }

    #[test]
    fn dominated_instance_goes_to_origin() {
        let c = SnrCoefficients::single([0.2, 0.1], [1.0, 1.0]).unwrap();
        let step = mm_step(&SurrogateAnchor::new(0.5, 0.5), &c, 1.0);
        assert_eq!(step.candidate.case_tag, CaseTag::Origin);
        assert_eq!((step.anchor.p1_m, step.anchor.p2_m), (0.0, 0.0));
    }

    #[test]
    fn single_usable_link_takes_the_budget() {
        let c = SnrCoefficients::single([5.0, 0.0], [0.5, 0.5]).unwrap();
        let step = mm_step(&SurrogateAnchor::new(0.5, 0.5), &c, 1.0);
        assert_eq!((step.anchor.p1_m, step.anchor.p2_m), (1.0, 0.0));
    }

    #[test]
    fn candidates_are_feasible_and_nonempty() {
        let c = SnrCoefficients::new(3.0, 0.4, vec![0.2, 5.0, 1.0], vec![2.0, 0.1, 0.7]).unwrap();
        let cands = kkt_candidates(&SurrogateAnchor::new(0.2, 0.3), &c, 1.0);
        assert!(!cands.is_empty());
        for k in cands {
            assert!(PowerAllocation::new(k.p1, k.p2, 1.0).is_ok(), "{k:?}");
            if let Some(l) = k.lambda {
                assert!(l >= 0.0);
            }
        }
    }

    #[test]
    fn fixed_point_is_stationary() {
        let c = inst();
        let cfg = OptimizerConfig {
            max_iterations: 100_000,
            tolerance: 1e-15,
            ..OptimizerConfig::default()
        };
        let (alloc, _) = optimize(&c, 3.0, &cfg, None).unwrap();
        let a = SurrogateAnchor::new(alloc.p1, alloc.p2);
        let step = mm_step(&a, &c, 3.0);
        assert!((step.anchor.p1_m - a.p1_m).abs() < 1e-6, "{step:?} vs {a:?}");
        assert!((step.anchor.p2_m - a.p2_m).abs() < 1e-6);
    }

    #[test]
    fn default_start_escapes_a_negative_stationary_point() {
        // Eavesdroppers strong on opposite links: the even split is a local
        // maximum with a negative rate.
        let c = SnrCoefficients::new(0.4, 4.7, vec![0.1, 5.0], vec![6.7, 0.6]).unwrap();
        let cfg = OptimizerConfig::default();
        let (single, _) = optimize(&c, 1.0, &cfg, Some(SurrogateAnchor::new(0.5, 0.5))).unwrap();
        assert!(c.rate(single.p1, single.p2) < -0.1);
        let (multi, trace) = optimize(&c, 1.0, &cfg, None).unwrap();
        let r = c.rate(multi.p1, multi.p2);
        assert!(r >= 0.0);
        let (_, g) = grid_oracle(&c, 1.0, 1e-3).unwrap();
        assert!(r >= g - 1e-9, "{r} vs {g}");
        assert!(trace.max_rate_drop(&c) <= 1e-12);
    }

    #[test]
    fn first_step_from_origin_hits_the_surrogate_max() {
        let c = inst();
        let a = SurrogateAnchor::new(0.0, 0.0);
        let pt = 2.0;
        let step = mm_step(&a, &c, pt);
        let n = 1000;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=n {
            for k in 0..=n - i {
                let v = surrogate_value(pt * i as f64 / n as f64, pt * k as f64 / n as f64, &a, &c);
                best = best.max(v);
            }
        }
        assert!(step.surrogate_value >= best - 1e-12);
        assert!(
            step.surrogate_value - best < 1e-6 * 4.0,
            "{} vs {}",
            step.surrogate_value,
            best
        );
    }

    #[test]
    fn equal_channels_converge_to_zero_rate() {
        let c = SnrCoefficients::new(1.5, 0.3, vec![1.5], vec![0.3]).unwrap();
        let (alloc, trace) = optimize(&c, 2.0, &OptimizerConfig::default(), None).unwrap();
        assert_eq!(c.rate(alloc.p1, alloc.p2), 0.0);
        assert!(trace.converged);
    }

    #[test]
    fn optimize_rejects_bad_input() {
        let c = inst();
        let cfg = OptimizerConfig::default();
        assert!(optimize(&c, 0.0, &cfg, None).is_err());
        assert!(optimize(&c, f64::INFINITY, &cfg, None).is_err());
        assert!(optimize(&c, 1.0, &cfg, Some(SurrogateAnchor::new(2.0, 0.0))).is_err());
        let bad = SnrCoefficients {
            mu1: f64::NAN,
            ..inst()
        };
        assert!(matches!(optimize(&bad, 1.0, &cfg, None), Err(Error::Domain(_))));
        let zero_iter = OptimizerConfig {
            max_iterations: 0,
            ..cfg
        };
        assert!(optimize(&c, 1.0, &zero_iter, None).is_err());
    }

    #[test]
    fn grid_oracle_examples() {
        let dominated = SnrCoefficients::single([0.2, 0.1], [1.0, 1.0]).unwrap();
        let (p, r) = grid_oracle(&dominated, 1.0, 1e-2).unwrap();
        assert_eq!((p.p1, p.p2, r), (0.0, 0.0, 0.0));

        let link1 = SnrCoefficients::single([5.0, 0.0], [0.5, 0.5]).unwrap();
        let (p, _) = grid_oracle(&link1, 1.0, 1e-2).unwrap();
        assert!((p.p1 - 1.0).abs() < 1e-12 && p.p2 == 0.0);

        let c = inst();
        let (_, fine) = grid_oracle(&c, 2.0, 1e-3).unwrap();
        let (_, coarse) = grid_oracle(&c, 2.0, 1e-2).unwrap();
        assert!(fine >= coarse - 1e-12);
        assert!(fine - coarse <= 5e-3);
        let (alloc, _) = optimize(&c, 2.0, &OptimizerConfig::default(), None).unwrap();
        assert!((c.rate(alloc.p1, alloc.p2) - fine).abs() <= 1e-3);
    }
}
