use proptest::prelude::*;

use shiftopt::scalar::lcm_usize;
use shiftopt::weights::Tabular;
use shiftopt::{
    dbar_periodic_exact, jsr_upper, log_norm, matching_distance, BiSequence, MatchKind, MeasureSpec,
    Scalar, SubshiftSpec, WeightFunction, Word,
};

fn word(max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0u8..2, 1..=max).prop_map(|v| Word::new(v).unwrap())
}

fn ratio() -> impl Strategy<Value = Scalar> {
    (-9i64..=9, 1i64..=5).prop_map(|(p, q)| Scalar::ratio(p, q))
}

fn tabular() -> impl Strategy<Value = WeightFunction> {
    (
        [ratio(), ratio()],
        prop::collection::vec((-5i64..=5, 0u8..2, ratio()), 0..8),
    )
        .prop_map(|(default, over)| {
            let mut t = Tabular::constant(Scalar::ZERO);
            t.default = default;
            for (i, a, v) in over {
                t = t.with(a, i, v);
            }
            WeightFunction::Tabular(t)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn norm_of_concatenation_is_subadditive(phi in tabular(), u in word(8), v in word(8)) {
        let uv = log_norm(&phi, &u.concat(&v), 0).unwrap();
        let a = log_norm(&phi, &u, 0).unwrap().upper.unwrap();
        let b = log_norm(&phi, &v, 0).unwrap().upper.unwrap();
        prop_assert!(uv.lower <= a + b);
    }

    #[test]
    fn jsr_upper_nonincreasing_under_doubling(phi in tabular(), n in 1usize..=5) {
        let a = jsr_upper(&phi, n, 0).unwrap();
        let b = jsr_upper(&phi, 2 * n, 0).unwrap();
        prop_assert!(a.certified && b.certified);
        prop_assert!(b.value <= a.value);
    }

    #[test]
    fn dbar_is_a_metric_on_orbits(u in word(5), v in word(5), w in word(5)) {
        let d = |a: &Word, b: &Word| Scalar::Exact(dbar_periodic_exact(a, b));
        prop_assert_eq!(d(&u, &v), d(&v, &u));
        prop_assert!(d(&u, &w) <= d(&u, &v) + d(&v, &w));
        prop_assert_eq!(d(&u, &u.rotate(1)), Scalar::ZERO);
    }

    #[test]
    fn matching_a_full_period_recovers_dbar(u in word(5), v in word(5), reps in 1usize..=3) {
        let len = lcm_usize(u.len(), v.len()) * reps;
        let x = BiSequence::periodic(u.clone()).window(0, len as i64 - 1).unwrap();
        let z = SubshiftSpec::PeriodicOrbit { word: v.clone() };
        let m = matching_distance(&x, &z, MatchKind::Exact).unwrap();
        prop_assert_eq!(m, dbar_periodic_exact(&u, &v));
    }

    #[test]
    fn json_round_trip(phi in tabular(), u in word(7), p in 0i64..=6) {
        let back: WeightFunction = serde_json::from_str(&serde_json::to_string(&phi).unwrap()).unwrap();
        prop_assert_eq!(
            log_norm(&back, &u, 3).unwrap().upper,
            log_norm(&phi, &u, 3).unwrap().upper
        );
        let mu = MeasureSpec::bernoulli(Scalar::ratio(p, 6));
        let back: MeasureSpec = serde_json::from_str(&serde_json::to_string(&mu).unwrap()).unwrap();
        prop_assert_eq!(back, mu);
    }

    #[test]
    fn empirical_period_window_is_the_periodic_measure(u in word(6), l in 1usize..=4) {
        let emp = MeasureSpec::empirical(BiSequence::periodic(u.clone()), 3, u.len() as u64);
        prop_assert_eq!(emp.cylinders(l).unwrap(), MeasureSpec::periodic(u).cylinders(l).unwrap());
    }
}

#[test]
fn markov_cylinders_are_consistent() {
    let mu = MeasureSpec::markov([
        [Scalar::ratio(2, 3), Scalar::ratio(1, 3)],
        [Scalar::ratio(1, 4), Scalar::ratio(3, 4)],
    ]);
    for l in 1..=6 {
        let cyl = mu.cylinders(l).unwrap();
        let total = cyl.iter().fold(Scalar::ZERO, |s, (_, m)| s + *m);
        assert_eq!(total, Scalar::ONE);
        for (w, m) in &cyl {
            let ext = [0u8, 1].map(|a| mu.cylinder_prob(&w.concat(&Word::new(vec![a]).unwrap())).unwrap());
            assert_eq!(ext[0] + ext[1], *m);
        }
    }
    // stationary law solves π P = π: π = (3/7, 4/7)
    assert_eq!(mu.one_frequency().unwrap(), Scalar::ratio(4, 7));
}

#[test]
fn sturmian_measure_matches_long_orbit_frequencies() {
    let mu = MeasureSpec::golden_sturmian();
    let z = BiSequence::golden_sturmian().window(0, 199_999).unwrap();
    for (w, m) in mu.cylinders(4).unwrap() {
        let hits = (0..=z.len() - 4).filter(|&i| w.occurs_at(z.symbols(), i)).count();
        let freq = hits as f64 / (z.len() - 3) as f64;
        assert!((freq - m.to_f64()).abs() < 1e-3, "{w}: {freq} vs {m}");
    }
}
