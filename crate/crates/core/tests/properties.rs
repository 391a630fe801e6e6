use proptest::prelude::*;
use tsirelson::classifier::{classify, compute_p_mu};
use tsirelson::sequence::{LogProductStatus, MeasureSequence, TailRule};
use tsirelson::simulator::{self, exact_cyclic_law, Anchor, ChainConfig};
use tsirelson::stats;
use tsirelson::torus::{Coord, CyclicDistribution, TorusMeasure, TorusPoint};

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn rational_atoms(q: i64) -> impl Strategy<Value = TorusMeasure> {
    prop::collection::btree_map(0..q, 1u32..10, 1..5).prop_map(move |m| {
        let total: u32 = m.values().sum();
        let atoms = m
            .into_iter()
            .map(|(loc, w)| (Coord::ratio(loc, q), w as f64 / total as f64))
            .collect();
        TorusMeasure::atoms(atoms).unwrap()
    })
}

fn real_atoms() -> impl Strategy<Value = TorusMeasure> {
    prop::collection::vec((0.0f64..1.0, 1u32..10), 1..4).prop_filter_map("distinct", |v| {
        let total: u32 = v.iter().map(|(_, w)| w).sum();
        TorusMeasure::atoms(
            v.into_iter()
                .map(|(x, w)| (Coord::real(x), w as f64 / total as f64))
                .collect(),
        )
        .ok()
    })
}

fn wrapped_gaussian() -> impl Strategy<Value = TorusMeasure> {
    (-2.0f64..2.0, 0.0f64..1.0).prop_map(|(m, v)| TorusMeasure::wrapped_gaussian(m, v).unwrap())
}

fn piecewise() -> impl Strategy<Value = TorusMeasure> {
    prop::collection::vec(0.05f64..2.0, 1..5).prop_map(|heights| {
        let n = heights.len();
        let breaks: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let mass: f64 = heights.iter().sum::<f64>() / n as f64;
        TorusMeasure::piecewise(breaks, heights.iter().map(|h| h / mass).collect()).unwrap()
    })
}

fn any_measure() -> impl Strategy<Value = TorusMeasure> {
    prop_oneof![
        (0i64..12).prop_map(|a| TorusMeasure::dirac(Coord::ratio(a, 12))),
        (0.0f64..1.0).prop_map(|x| TorusMeasure::dirac(Coord::real(x))),
        rational_atoms(12),
        real_atoms(),
        wrapped_gaussian(),
        Just(TorusMeasure::Uniform),
        piecewise(),
    ]
}

/// Pairs for which a closed-form convolution exists.
fn supported_pair() -> impl Strategy<Value = (TorusMeasure, TorusMeasure)> {
    prop_oneof![
        (rational_atoms(8), rational_atoms(6)),
        (real_atoms(), rational_atoms(5)),
        (wrapped_gaussian(), wrapped_gaussian()),
        ((0.0f64..1.0).prop_map(|x| TorusMeasure::dirac(Coord::real(x))), any_measure()),
        (any_measure(), Just(TorusMeasure::Uniform)),
    ]
}

proptest! {
    #[test]
    fn convolution_theorem((a, b) in supported_pair()) {
        let c = a.convolve(&b).unwrap();
        for p in -10..=10 {
            let diff = (c.fourier(p) - a.fourier(p) * b.fourier(p)).norm();
            prop_assert!(diff <= 1e-10, "p = {}: {} vs {}", p, a.describe(), b.describe());
        }
    }

    #[test]
    fn fourier_modulus_bounded(m in any_measure(), p in -50i64..50) {
        prop_assert!(m.fourier(p).norm() <= 1.0 + 1e-12);
        prop_assert_eq!(m.fourier(0).re, 1.0);
        prop_assert_eq!(m.fourier(0).im, 0.0);
    }

    #[test]
    fn cyclic_oracle_matches_convolve(a in rational_atoms(8), b in rational_atoms(4)) {
        let q = 8;
        let direct = a.convolve(&b).unwrap().to_cyclic(q).unwrap();
        let via_grid = a.to_cyclic(q).unwrap().convolve(&b.to_cyclic(q).unwrap()).unwrap();
        for (x, y) in direct.weights().iter().zip(via_grid.weights()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn cyclic_convolution_commutes_and_associates(
        a in prop::collection::vec(0.0f64..1.0, 6),
        b in prop::collection::vec(0.0f64..1.0, 6),
        c in prop::collection::vec(0.0f64..1.0, 6),
    ) {
        let norm = |v: Vec<f64>| {
            let s: f64 = v.iter().sum::<f64>() + 1e-9;
            let mut w: Vec<f64> = v.iter().map(|x| (x + 1e-9 / 6.0) / s).collect();
            let drift = 1.0 - w.iter().sum::<f64>();
            w[0] += drift;
            CyclicDistribution::new(w).unwrap()
        };
        let (a, b, c) = (norm(a), norm(b), norm(c));
        let ab = a.convolve(&b).unwrap();
        let ba = b.convolve(&a).unwrap();
        let ab_c = ab.convolve(&c).unwrap();
        let a_bc = a.convolve(&b.convolve(&c).unwrap()).unwrap();
        for i in 0..6 {
            prop_assert!((ab.weights()[i] - ba.weights()[i]).abs() <= 1e-14);
            prop_assert!((ab_c.weights()[i] - a_bc.weights()[i]).abs() <= 1e-14);
        }
    }

    #[test]
    fn torus_group_laws(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (a, b, c) = (TorusPoint::from_bits(a), TorusPoint::from_bits(b), TorusPoint::from_bits(c));
        prop_assert_eq!((a + b) + c, a + (b + c));
        prop_assert_eq!(a + b, b + a);
        prop_assert_eq!(a + (-a), TorusPoint::ZERO);
        prop_assert!((0.0..1.0).contains(&a.value()));
    }

    #[test]
    fn subgroup_gcd_law(m in rational_atoms(12)) {
        let ev = compute_p_mu(&MeasureSequence::iid(m), 48).unwrap();
        for &p in &ev.members {
            for &q in &ev.members {
                prop_assert!(ev.members.contains(&gcd(p, q)));
            }
        }
        if ev.p_mu > 0 {
            prop_assert_eq!(ev.members[0], ev.p_mu);
        }
    }

    #[test]
    fn iid_rational_membership_is_arithmetic(m in rational_atoms(12), p in 1i64..30) {
        let seq = MeasureSequence::iid(m.clone());
        let v = seq.tail_log_product(p);
        prop_assert!(v.certified);
        prop_assert_eq!(v.is_finite(), m.arithmetic_structure(p).is_modulus_one());
    }

    #[test]
    fn prefix_changes_keep_p_mu(
        tail in rational_atoms(6),
        prefix in prop::collection::vec(wrapped_gaussian(), 0..4),
    ) {
        let base = MeasureSequence::iid(tail.clone());
        let modified = MeasureSequence::new(prefix.clone(), TailRule::Iid(tail)).unwrap();
        let a = classify(&base, 24).unwrap();
        let b = classify(&modified, 24).unwrap();
        prop_assert_eq!(a.evidence.p_mu, b.evidence.p_mu);
        for p in 1..=24i64 {
            let (va, vb) = (base.tail_log_product(p), modified.tail_log_product(p));
            prop_assert_eq!(va.is_finite(), vb.is_finite());
            if let (LogProductStatus::Finite { .. }, LogProductStatus::Finite { tail_log_sum, .. }) = (va.status, vb.status) {
                prop_assert!(tail_log_sum >= 0.0);
            }
        }
    }
}

#[test]
fn monte_carlo_matches_fourier_for_every_variant() {
    let measures = [
        TorusMeasure::dirac(Coord::ratio(2, 7)),
        TorusMeasure::atoms(vec![
            (Coord::ratio(1, 5), 0.3),
            (Coord::real(0.77), 0.5),
            (Coord::ratio(0, 1), 0.2),
        ])
        .unwrap(),
        TorusMeasure::wrapped_gaussian(0.3, 0.02).unwrap(),
        TorusMeasure::Uniform,
        TorusMeasure::piecewise(vec![0.0, 0.25, 0.6, 1.0], vec![2.0, 0.5, 0.8125]).unwrap(),
    ];
    let n = 100_000;
    for (idx, m) in measures.iter().enumerate() {
        let mut rng = simulator::substream(9, simulator::Stream::Noise, idx as u64);
        let draws: Vec<TorusPoint> = (0..n).map(|_| m.sample(&mut rng)).collect();
        for p in 1..=5 {
            let gap = (stats::ecf(&draws, p) - m.fourier(p)).norm();
            assert!(gap <= 4.0 / (n as f64).sqrt(), "{} p = {p}: gap {gap}", m.describe());
        }
    }
}

#[test]
fn empirical_law_matches_cyclic_oracle() {
    let tail = TorusMeasure::atoms(vec![
        (Coord::ratio(0, 1), 0.5),
        (Coord::ratio(1, 8), 0.3),
        (Coord::ratio(3, 4), 0.2),
    ])
    .unwrap();
    let seq = MeasureSequence::new(vec![TorusMeasure::dirac(Coord::ratio(3, 8))], TailRule::Iid(tail)).unwrap();
    let anchor = Coord::ratio(1, 4);
    let n = 100_000;
    let e = simulator::simulate(&ChainConfig {
        seq: seq.clone(),
        depth: 6,
        anchor: Anchor::Deterministic(anchor.to_point()),
        samples: n,
        seed: 11,
    })
    .unwrap();
    let exact = exact_cyclic_law(&seq, 6, anchor, 1 << 16).unwrap().unwrap();
    let empirical = stats::empirical_cyclic(&e.eta0(), exact.order());
    let tv = empirical.total_variation(&exact);
    assert!(tv <= 3.0 * (exact.order() as f64 / n as f64).sqrt(), "tv = {tv}");
}

#[test]
fn determinism_across_worker_counts() {
    let seq = MeasureSequence::iid(
        TorusMeasure::piecewise(vec![0.0, 0.5, 1.0], vec![1.5, 0.5]).unwrap(),
    );
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let eight = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
    let run = || {
        let limit = simulator::centered_products(&seq, 0, -9, 5000, 17).unwrap();
        let sk = simulator::skeleton(simulator::SkeletonConfig { depth: 6, samples: 5000, seed: 3 }).unwrap();
        let c = stats::ecf(&sk.xi_column(0), 1);
        (limit.samples, sk.eta0, c)
    };
    assert_eq!(one.install(run), eight.install(run));
}
