//! Exact cross-checks between independent code paths.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use shiftopt::dbar::dbar_periodic_via_density;
use shiftopt::experiments::{orbit_one_frequency, run_tech_strictly_all};
use shiftopt::perturb::{check_upper_inequality, plan_invariants};
use shiftopt::weights::Tabular;
use shiftopt::{
    build_plan, dbar_lp_lower, dbar_periodic_exact, jsr_upper, log_norm, lyapunov_periodic_exact,
    matching_distance, window_sum, BiSequence, MatchKind, MeasureSpec, Scalar, SubshiftSpec,
    WeightFunction, Word,
};

#[derive(Serialize)]
pub struct Check {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub passed: bool,
}

fn check(name: &'static str, outcomes: impl IntoIterator<Item = bool>) -> Check {
    let (mut cases, mut failures) = (0, 0);
    for ok in outcomes {
        cases += 1;
        failures += usize::from(!ok);
    }
    Check {
        name,
        cases,
        failures,
        passed: failures == 0 && cases > 0,
    }
}

fn words_up_to(n: usize) -> Vec<Word> {
    (1..=n).flat_map(Word::all).collect()
}

fn random_tabular(rng: &mut ChaCha8Rng) -> WeightFunction {
    let mut v = || Scalar::ratio(rng.random_range(-6..=6), rng.random_range(1..=4));
    let mut t = Tabular::constant(Scalar::ZERO);
    t.default = [v(), v()];
    for i in -3..=3 {
        t = t.with(0, i, v()).with(1, i, v());
    }
    WeightFunction::Tabular(t)
}

pub fn run(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    out.push(check(
        "exact_formula",
        run_tech_strictly_all(5, 5)
            .map(|rs| rs.into_iter().flat_map(|r| r.rows).map(|r| r.difference == Scalar::ZERO).collect())
            .unwrap_or_else(|_| vec![false]),
    ));

    let small = words_up_to(4);
    out.push(check(
        "dbar_phase_vs_density",
        small.iter().flat_map(|u| {
            small
                .iter()
                .map(move |v| dbar_periodic_via_density(u, v).is_ok_and(|d| d == dbar_periodic_exact(u, v)))
        }),
    ));

    let lyndon = Word::lyndon_up_to(3);
    out.push(check(
        "dbar_lp_tight_at_lcm",
        lyndon.iter().flat_map(|u| {
            lyndon.iter().map(move |v| {
                let l = shiftopt::scalar::lcm_usize(u.len(), v.len());
                let (mu, nu) = (MeasureSpec::periodic(u.clone()), MeasureSpec::periodic(v.clone()));
                dbar_lp_lower(&mu, &nu, l).is_ok_and(|r| r.value == Scalar::Exact(dbar_periodic_exact(u, v)))
            })
        }),
    ));

    out.push(check(
        "orbit_frequency_identity",
        words_up_to(6)
            .iter()
            .map(|w| orbit_one_frequency(w).is_ok_and(|(a, b)| a == b)),
    ));

    let mut draws = Vec::new();
    for _ in 0..200 {
        let big_n = rng.random_range(1..=4);
        let omega = Word::from_code(rng.random_range(0..1u64 << big_n), big_n);
        let z = omega.concat(&Word::from_code(rng.random_range(0..64), 6));
        let zs = BiSequence::periodic(z);
        let plan = build_plan(&WeightFunction::greedy_indicator(zs.clone()), &omega, &zs, 3, 16);
        let n = rng.random_range(big_n + 1..=120);
        let x: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let k = rng.random_range(-150..400);
        draws.push(plan.is_ok_and(|p| {
            plan_invariants(&p).all()
                && Word::new(x.clone())
                    .and_then(|x| check_upper_inequality(&p, &x, k))
                    .is_ok_and(|r| r.holds)
        }));
    }
    out.push(check("perturbation_bound", draws));

    let mut sandwich = Vec::new();
    let mut norms = Vec::new();
    for _ in 0..20 {
        let phi = random_tabular(&mut rng);
        let upper = jsr_upper(&phi, 8, 0).map(|r| r.value);
        let best = Word::lyndon_up_to(6)
            .iter()
            .map(|w| lyapunov_periodic_exact(&phi, w))
            .collect::<Result<Vec<_>, _>>()
            .map(|v| v.into_iter().fold(Scalar::Float(f64::NEG_INFINITY), Scalar::max));
        sandwich.push(matches!((best, upper), (Ok(b), Ok(u)) if b <= u));

        let len = rng.random_range(1..=8);
        let x = Word::from_code(rng.random_range(0..1u64 << len), len);
        let brute = (-40..=40)
            .map(|k| window_sum(&phi, &x, k))
            .collect::<Result<Vec<_>, _>>()
            .map(|v| v.into_iter().fold(Scalar::Float(f64::NEG_INFINITY), Scalar::max));
        let b = log_norm(&phi, &x, 2);
        norms.push(matches!((brute, b), (Ok(s), Ok(b)) if b.upper == Some(s)));
    }
    out.push(check("variational_sandwich", sandwich));
    out.push(check("norm_exact_sup", norms));

    let pairs: Vec<Word> = Word::all(2).collect();
    let mut matches = Vec::new();
    for mask in 1u32..16 {
        let factors: BTreeSet<Word> = (0..4).filter(|b| mask >> b & 1 == 1).map(|b| pairs[b].clone()).collect();
        let z = SubshiftSpec::FactorSet { l: 2, factors };
        if z.factor_graph().is_err() {
            continue;
        }
        for _ in 0..4 {
            let len = rng.random_range(1..=10);
            let x = Word::from_code(rng.random_range(0..1u64 << len), len);
            let e = matching_distance(&x, &z, MatchKind::Exact);
            let d = matching_distance(&x, &z, MatchKind::Dp);
            matches.push(matches!((e, d), (Ok(a), Ok(b)) if a == b));
        }
    }
    out.push(check("matching_exact_vs_dp", matches));
    out
}
