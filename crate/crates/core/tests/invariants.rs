use proptest::prelude::*;

use ris_secrecy::channel_model::{path_loss_db, scenario_gains};
use ris_secrecy::optimizer::{surrogate_value, tangent_line, SurrogateAnchor};
use ris_secrecy::secrecy_rate::nats_to_bits;
use ris_secrecy::wiretap_sim::{
    average_errors, distinguishing_advantage, message_tv_to_product, mutual_information, random_codebook,
    renyi_divergence, tv_distance, tv_positive_part, DiscreteChannel,
};
use ris_secrecy::{optimize, OptimizerConfig, Point2D, Scenario, SnrCoefficients};

fn slope() -> impl Strategy<Value = f64> {
    (-3.0f64..3.0).prop_map(|e| 10f64.powf(e))
}

fn coefficients(max_eves: usize) -> impl Strategy<Value = SnrCoefficients> {
    (
        slope(),
        slope(),
        prop::collection::vec((slope(), slope()), 1..=max_eves),
    )
        .prop_map(|(m1, m2, eves)| {
            let (b1, b2) = eves.into_iter().unzip();
            SnrCoefficients::new(m1, m2, b1, b2).unwrap()
        })
}

/// A point of the feasible triangle, given two uniforms and the budget.
fn feasible(u: f64, v: f64, pt: f64) -> (f64, f64) {
    let p1 = u * pt;
    (p1, v * (pt - p1))
}

fn distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, len).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    })
}

fn channel(inputs: usize, outputs: usize) -> impl Strategy<Value = DiscreteChannel> {
    prop::collection::vec(distribution(outputs), inputs).prop_map(|rows| DiscreteChannel::new(rows).unwrap())
}

fn point() -> impl Strategy<Value = Point2D> {
    (-100.0f64..100.0, -100.0f64..100.0).prop_map(|(x, y)| Point2D::new(x, y))
}

proptest! {
    #[test]
    fn tangent_dominates_log(beta in slope(), a in 0.0f64..50.0, p in 0.0f64..50.0) {
        let exact = (beta * p).ln_1p();
        prop_assert!(tangent_line(beta, a, p) >= exact - 1e-12 * exact.abs().max(1.0));
    }

    #[test]
    fn surrogate_minorizes_and_touches(
        c in coefficients(4),
        pt in 0.1f64..100.0,
        (u, v, s, t) in (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0),
    ) {
        let (a1, a2) = feasible(u, v, pt);
        let (p1, p2) = feasible(s, t, pt);
        let anchor = SurrogateAnchor::new(a1, a2);
        let rate = c.rate(p1, p2);
        prop_assert!(surrogate_value(p1, p2, &anchor, &c) <= rate + 1e-12 * rate.abs().max(1.0));
        let at = c.rate(a1, a2);
        prop_assert!((surrogate_value(a1, a2, &anchor, &c) - at).abs() <= 1e-12 * at.abs().max(1.0));
    }

    #[test]
    fn mm_ascends_and_stays_feasible(
        c in coefficients(4),
        pt in 0.1f64..100.0,
        (u, v) in (0.0f64..=1.0, 0.0f64..=1.0),
    ) {
        let (a1, a2) = feasible(u, v, pt);
        let (alloc, trace) = optimize(&c, pt, &OptimizerConfig::default(), Some(SurrogateAnchor::new(a1, a2))).unwrap();
        prop_assert!(trace.max_rate_drop(&c) <= 1e-9);
        prop_assert!(alloc.is_feasible());
        prop_assert!(c.rate(alloc.p1, alloc.p2) >= c.rate(a1, a2) - 1e-9);
    }

    #[test]
    fn multistart_is_never_negative(c in coefficients(4), pt in 0.1f64..100.0) {
        let (alloc, _) = optimize(&c, pt, &OptimizerConfig::default(), None).unwrap();
        prop_assert!(c.rate(alloc.p1, alloc.p2) >= 0.0);
    }

    #[test]
    fn slopes_and_powers_trade_off(
        c in coefficients(3),
        s in (-2.0f64..2.0).prop_map(|e| 10f64.powf(e)),
        pt in 0.1f64..100.0,
        (u, v) in (0.0f64..=1.0, 0.0f64..=1.0),
    ) {
        let (p1, p2) = feasible(u, v, pt);
        let r = c.rate(p1, p2);
        prop_assert!((c.scaled(s).rate(p1 / s, p2 / s) - r).abs() <= 1e-10 * r.abs().max(1.0));
        let cfg = OptimizerConfig::default();
        let (a, _) = optimize(&c, pt, &cfg, None).unwrap();
        let (b, _) = optimize(&c.scaled(s), pt / s, &cfg, None).unwrap();
        let (ra, rb) = (c.rate(a.p1, a.p2), c.scaled(s).rate(b.p1, b.p2));
        prop_assert!((ra - rb).abs() <= 1e-6 * ra.abs().max(1.0), "{ra} vs {rb}");
    }

    #[test]
    fn eve_order_is_irrelevant(c in coefficients(5), (u, v) in (0.0f64..=1.0, 0.0f64..=1.0), rot in 0usize..5) {
        let mut b1 = c.beta1.clone();
        let mut b2 = c.beta2.clone();
        let k = rot % b1.len();
        b1.rotate_left(k);
        b2.rotate_left(k);
        b1.reverse();
        b2.reverse();
        let d = SnrCoefficients::new(c.mu1, c.mu2, b1, b2).unwrap();
        let (p1, p2) = feasible(u, v, 10.0);
        prop_assert_eq!(c.rate(p1, p2), d.rate(p1, p2));
    }

    #[test]
    fn another_eve_never_helps(c in coefficients(4), e in (slope(), slope()), (u, v) in (0.0f64..=1.0, 0.0f64..=1.0)) {
        let mut b1 = c.beta1.clone();
        let mut b2 = c.beta2.clone();
        b1.push(e.0);
        b2.push(e.1);
        let d = SnrCoefficients::new(c.mu1, c.mu2, b1, b2).unwrap();
        let (p1, p2) = feasible(u, v, 10.0);
        prop_assert!(d.rate(p1, p2) <= c.rate(p1, p2));
    }

    #[test]
    fn single_eve_rate_is_a_difference(mu in (slope(), slope()), beta in (slope(), slope()), (u, v) in (0.0f64..=1.0, 0.0f64..=1.0)) {
        let c = SnrCoefficients::single([mu.0, mu.1], [beta.0, beta.1]).unwrap();
        let (p1, p2) = feasible(u, v, 10.0);
        let expect = ((1.0 + p1 * mu.0) * (1.0 + p2 * mu.1) / ((1.0 + p1 * beta.0) * (1.0 + p2 * beta.1))).ln();
        let r = c.rate(p1, p2);
        prop_assert!((r - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        prop_assert!((nats_to_bits(r) * std::f64::consts::LN_2 - r).abs() <= 1e-14 * r.abs().max(1.0));
    }

    #[test]
    fn path_loss_grows_with_distance_and_shrinks_with_wavelength(
        d in 0.1f64..1e3, dd in 1e-3f64..1e3, lambda in 1e-3f64..1.0, dl in 1e-4f64..1.0,
    ) {
        prop_assert!(path_loss_db(d + dd, lambda).unwrap() > path_loss_db(d, lambda).unwrap());
        prop_assert!(path_loss_db(d, lambda + dl).unwrap() < path_loss_db(d, lambda).unwrap());
    }

    #[test]
    fn gains_depend_only_on_relative_positions(
        alice in point(), ris in point(), bob in point(), eve in point(), shift in point(),
    ) {
        let mut s = Scenario::reference(vec![eve]);
        s.alice = alice;
        s.ris = ris;
        s.bob = bob;
        let moved = |p: Point2D| Point2D::new(p.x + shift.x, p.y + shift.y);
        let mut t = s.clone();
        t.alice = moved(alice);
        t.ris = moved(ris);
        t.bob = moved(bob);
        t.eves = vec![moved(eve)];
        // Coincident nodes are rejected; only compare valid layouts.
        if let (Ok(a), Ok(b)) = (scenario_gains(&s), scenario_gains(&t)) {
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs());
            prop_assert!(close(a.alpha_ab1_sq, b.alpha_ab1_sq));
            prop_assert!(close(a.alpha_ab2_sq, b.alpha_ab2_sq));
            prop_assert!(close(a.alpha_ae1_sq[0], b.alpha_ae1_sq[0]));
            prop_assert!(close(a.alpha_ae2_sq[0], b.alpha_ae2_sq[0]));
        }
    }

    #[test]
    fn tv_is_a_metric_and_matches_positive_part(
        (p, q, r) in (2usize..12).prop_flat_map(|k| (distribution(k), distribution(k), distribution(k))),
    ) {
        let pq = tv_distance(&p, &q).unwrap();
        let qr = tv_distance(&q, &r).unwrap();
        let pr = tv_distance(&p, &r).unwrap();
        prop_assert!(pr <= pq + qr + 1e-15);
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert!((pq - tv_distance(&q, &p).unwrap()).abs() <= 1e-15);
        prop_assert!((tv_positive_part(&p, &q).unwrap() - pq).abs() <= 1e-12);
    }

    #[test]
    fn mutual_information_bounds(ch in channel(3, 4), qx in distribution(3)) {
        let i = mutual_information(&ch, &qx).unwrap();
        prop_assert!(i >= 0.0);
        prop_assert!(i <= 3f64.ln() + 1e-12);
    }

    #[test]
    fn renyi_is_monotone_in_order(
        (p, q) in (2usize..10).prop_flat_map(|k| (distribution(k), distribution(k))),
        a in 0.05f64..0.95,
        b in 1.05f64..8.0,
        step in 0.01f64..2.0,
    ) {
        let d = |alpha: f64| renyi_divergence(&p, &q, alpha).unwrap();
        prop_assert!(d(a) >= 0.0);
        prop_assert!(d(a) <= d(b) + 1e-12);
        prop_assert!(d(b) <= d(b + step) + 1e-12);
    }

    #[test]
    fn codebook_bounds(
        bob in channel(2, 2),
        eve in channel(2, 2),
        qx in distribution(2),
        n in 1usize..5,
        l in 1usize..4,
        l1 in 1usize..4,
        seed in any::<u64>(),
    ) {
        let cb = random_codebook(&qx, n, l, l1, seed).unwrap();
        let adv = distinguishing_advantage(&cb, &eve).unwrap();
        let max_tv = message_tv_to_product(&cb, &eve, &qx).unwrap().into_iter().fold(0.0f64, f64::max);
        prop_assert!(adv <= 2.0 * max_tv + 1e-12);
        let eps = 0.1 * mutual_information(&bob, &qx).unwrap() + 1e-3;
        let (msg, joint) = average_errors(&cb, &bob, &qx, eps).unwrap();
        prop_assert!(msg <= joint + 1e-15);
        prop_assert!((0.0..=1.0).contains(&joint));
    }
}
