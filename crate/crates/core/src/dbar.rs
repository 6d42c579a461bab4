//! Ornstein `d̄` between invariant measures, and the matching distance of a
//! word to a subshift.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, Field};
use crate::measures::MeasureSpec;
use crate::scalar::{lcm_usize, Rational, Scalar};
use crate::symbolic::{mismatch_density, FactorGraph, SubshiftSpec, Word};

const MAX_TABLEAU_CELLS: usize = 40_000_000;

/// Exact `d̄` between the periodic measures on the orbits of `u^∞` and `v^∞`.
pub fn dbar_periodic_exact(u: &Word, v: &Word) -> Rational {
    let l = lcm_usize(u.len(), v.len());
    (0..v.len())
        .map(|r| {
            let d = (0..l).filter(|&i| u.cyclic(i as i64) != v.cyclic((i + r) as i64)).count();
            Rational::new(d as i64, l as i64)
        })
        .min()
        .unwrap()
}

/// `∫ 𝔡 d(μ × ν) = μ([1])ν([0]) + μ([0])ν([1])`.
pub fn dbar_upper_product(mu: &MeasureSpec, nu: &MeasureSpec) -> Result<Scalar> {
    let m1 = mu.one_frequency()?;
    let n1 = nu.one_frequency()?;
    Ok(m1 * (Scalar::ONE - n1) + (Scalar::ONE - m1) * n1)
}

/// Order-`l` relaxation of the joinings of `μ` and `ν`: couplings of the
/// length-`l` cylinder distributions that are consistent under the shift.
#[derive(Clone, Debug)]
pub struct CouplingLP {
    pub l: usize,
    pub left: Vec<(Word, Scalar)>,
    pub right: Vec<(Word, Scalar)>,
    /// Variable `t` is the mass on the pair `(left[vars[t].0], right[vars[t].1])`.
    pub vars: Vec<(usize, usize)>,
    /// Sparse equality rows `Σ coef·x = rhs`.
    pub rows: Vec<(Vec<(usize, i64)>, Scalar)>,
}

impl CouplingLP {
    pub fn new(mu: &MeasureSpec, nu: &MeasureSpec, l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidParameter("LP order must be ≥ 1".into()));
        }
        let left = mu.cylinders(l)?;
        let right = nu.cylinders(l)?;
        let vars: Vec<(usize, usize)> = (0..left.len())
            .flat_map(|i| (0..right.len()).map(move |j| (i, j)))
            .collect();
        let mut rows = Vec::new();
        for (i, (_, m)) in left.iter().enumerate() {
            let coefs = (0..right.len()).map(|j| (i * right.len() + j, 1)).collect();
            rows.push((coefs, *m));
        }
        for (j, (_, m)) in right.iter().enumerate() {
            let coefs = (0..left.len()).map(|i| (i * right.len() + j, 1)).collect();
            rows.push((coefs, *m));
        }
        if l >= 2 {
            // Σ_{a,b} x(s·a, t·b) = Σ_{a,b} x(a·s, b·t) for every pair of (l−1)-words
            let mut keyed: BTreeMap<(&[u8], &[u8]), BTreeMap<usize, i64>> = BTreeMap::new();
            for (t, &(i, j)) in vars.iter().enumerate() {
                let (u, v) = (left[i].0.symbols(), right[j].0.symbols());
                *keyed.entry((&u[..l - 1], &v[..l - 1])).or_default().entry(t).or_default() += 1;
                *keyed.entry((&u[1..], &v[1..])).or_default().entry(t).or_default() -= 1;
            }
            for coefs in keyed.into_values() {
                let coefs: Vec<(usize, i64)> = coefs.into_iter().filter(|&(_, c)| c != 0).collect();
                if !coefs.is_empty() {
                    rows.push((coefs, Scalar::ZERO));
                }
            }
        }
        if rows.len() * (vars.len() + rows.len()) > MAX_TABLEAU_CELLS {
            return Err(Error::Budget(format!("{} × {} tableau", rows.len(), vars.len())));
        }
        Ok(CouplingLP { l, left, right, vars, rows })
    }

    fn cost(&self, t: usize) -> i64 {
        let (i, j) = self.vars[t];
        (self.left[i].0.at(0) != self.right[j].0.at(0)) as i64
    }

    pub fn is_exact(&self) -> bool {
        self.rows.iter().all(|(_, b)| b.is_exact())
    }

    fn dense<F: Field>(&self, num: impl Fn(Scalar) -> F) -> (Vec<Vec<F>>, Vec<F>, Vec<F>) {
        let n = self.vars.len();
        let a = self
            .rows
            .iter()
            .map(|(coefs, _)| {
                let mut r = vec![F::zero(); n];
                for &(t, c) in coefs {
                    r[t] = num(Scalar::int(c));
                }
                r
            })
            .collect();
        let b = self.rows.iter().map(|(_, rhs)| num(*rhs)).collect();
        let c = (0..n).map(|t| num(Scalar::int(self.cost(t)))).collect();
        (a, b, c)
    }

    /// Optimal `∫ 𝔡`, exact when every cylinder mass is rational.
    pub fn solve(&self) -> Result<Scalar> {
        if self.is_exact() {
            let (a, b, c) = self.dense(|s| {
                let r = s.as_exact().unwrap();
                BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
            });
            let sol = lp::solve(&a, &b, &c)?;
            Ok(match (sol.value.numer().to_i64(), sol.value.denom().to_i64()) {
                (Some(p), Some(q)) => Scalar::ratio(p, q),
                _ => Scalar::Float(sol.value.to_f64().unwrap_or(f64::NAN)),
            })
        } else {
            let (a, b, c) = self.dense(Scalar::to_f64);
            Ok(Scalar::Float(lp::solve(&a, &b, &c)?.value.max(0.0)))
        }
    }

    /// Plain-text listing: variables with their pair and cost, then one
    /// equality per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "coupling-lp order {} vars {} rows {}", self.l, self.vars.len(), self.rows.len());
        let _ = writeln!(s, "minimize");
        for (t, &(i, j)) in self.vars.iter().enumerate() {
            let _ = writeln!(s, "  x{t} {} {} cost {}", self.left[i].0, self.right[j].0, self.cost(t));
        }
        let _ = writeln!(s, "subject to");
        for (coefs, rhs) in &self.rows {
            let lhs: Vec<String> = coefs.iter().map(|(t, c)| format!("{c:+} x{t}")).collect();
            let _ = writeln!(s, "  {} = {rhs}", lhs.join(" "));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpReport {
    pub value: Scalar,
    pub l: usize,
    pub exact: bool,
    pub variables: usize,
    pub constraints: usize,
}

/// Lower bound for `d̄(μ, ν)` from the order-`l` coupling relaxation.
pub fn dbar_lp_lower(mu: &MeasureSpec, nu: &MeasureSpec, l: usize) -> Result<LpReport> {
    let lp = CouplingLP::new(mu, nu, l)?;
    Ok(LpReport {
        value: lp.solve()?,
        l,
        exact: lp.is_exact(),
        variables: lp.vars.len(),
        constraints: lp.rows.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    /// Branch-and-bound over all admissible windows.
    Exact,
    /// Dynamic programming over the follower graph.
    Dp,
}

/// `(1/n) min_y #{i : x_i ≠ y_i}` over admissible length-`n` windows `y` of `Z`.
pub fn matching_distance(x: &Word, z: &SubshiftSpec, kind: MatchKind) -> Result<Rational> {
    let n = x.len();
    let best = match z {
        SubshiftSpec::PeriodicOrbit { word } => (0..word.len())
            .map(|r| {
                (0..n)
                    .filter(|&i| x.at(i) != word.cyclic((r + i) as i64))
                    .count()
            })
            .min()
            .unwrap(),
        _ => {
            let g = z.factor_graph()?;
            if n <= g.l {
                short_match(x, &g)
            } else {
                match kind {
                    MatchKind::Dp => viterbi(x, &g),
                    MatchKind::Exact => branch_and_bound(x, &g),
                }
            }
        }
    };
    Ok(Rational::new(best as i64, n as i64))
}

fn mismatches(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(p, q)| p != q).count()
}

fn short_match(x: &Word, g: &FactorGraph) -> usize {
    let n = x.len();
    g.factors
        .iter()
        .flat_map(|f| (0..=g.l - n).map(move |o| mismatches(x.symbols(), &f.symbols()[o..o + n])))
        .min()
        .unwrap()
}

fn viterbi(x: &Word, g: &FactorGraph) -> usize {
    let xs = x.symbols();
    let l = g.l;
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); g.factors.len()];
    for (f, fs) in g.followers.iter().enumerate() {
        for &h in fs {
            preds[h].push(f);
        }
    }
    let mut cost: Vec<usize> = g.factors.iter().map(|f| mismatches(&xs[..l], f.symbols())).collect();
    for &xi in &xs[l..] {
        cost = (0..g.factors.len())
            .map(|h| {
                let step = (g.factors[h].at(l - 1) != xi) as usize;
                preds[h]
                    .iter()
                    .map(|&f| cost[f])
                    .min()
                    .map_or(usize::MAX, |c| c.saturating_add(step))
            })
            .collect();
    }
    cost.into_iter().min().unwrap()
}

fn branch_and_bound(x: &Word, g: &FactorGraph) -> usize {
    fn go(x: &[u8], g: &FactorGraph, node: usize, pos: usize, cost: usize, best: &mut usize) {
        if cost >= *best {
            return;
        }
        if pos == x.len() {
            *best = cost;
            return;
        }
        for &h in &g.followers[node] {
            let step = (g.factors[h].at(g.l - 1) != x[pos]) as usize;
            go(x, g, h, pos + 1, cost + step, best);
        }
    }
    let xs = x.symbols();
    let mut best = usize::MAX;
    for (f, w) in g.factors.iter().enumerate() {
        go(xs, g, f, g.l, mismatches(&xs[..g.l], w.symbols()), &mut best);
    }
    best
}

/// `d̄` between the periodic measures, through the mismatch density of aligned windows.
pub fn dbar_periodic_via_density(u: &Word, v: &Word) -> Result<Rational> {
    let l = lcm_usize(u.len(), v.len());
    let uu = u.repeat(l / u.len());
    (0..v.len())
        .map(|r| mismatch_density(&uu, &v.rotate(r).repeat(l / v.len())))
        .try_fold(Rational::from_integer(1), |m, d| d.map(|d| m.min(d)))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::symbolic::BiSequence;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    /// Oracle: every ergodic joining of two periodic orbits is uniform on one
    /// `(σ×σ)`-orbit of a pair of phases; take the least mismatch frequency.
    fn joining_oracle(u: &Word, v: &Word) -> Rational {
        let (p, q) = (u.len(), v.len());
        let mut seen = vec![vec![false; q]; p];
        let mut best = r(1, 1);
        for a in 0..p {
            for b in 0..q {
                if seen[a][b] {
                    continue;
                }
                let (mut i, mut j, mut len, mut bad) = (a, b, 0, 0);
                while !seen[i][j] {
                    seen[i][j] = true;
                    len += 1;
                    bad += (u.at(i) != v.at(j)) as i64;
                    i = (i + 1) % p;
                    j = (j + 1) % q;
                }
                best = best.min(r(bad, len));
            }
        }
        best
    }

    #[test]
    fn periodic_examples() {
        assert_eq!(dbar_periodic_exact(&w("0"), &w("1")), r(1, 1));
        assert_eq!(dbar_periodic_exact(&w("01"), &w("10")), r(0, 1));
        assert_eq!(dbar_periodic_exact(&w("01"), &w("0")), r(1, 2));
        assert_eq!(dbar_periodic_exact(&w("001"), &w("011")), r(1, 3));
    }

    #[test]
    fn periodic_matches_joining_oracle() {
        let words: Vec<Word> = (1..=5).flat_map(Word::all).collect();
        for u in &words {
            for v in &words {
                assert_eq!(dbar_periodic_exact(u, v), joining_oracle(u, v), "{u} {v}");
                assert_eq!(dbar_periodic_via_density(u, v).unwrap(), joining_oracle(u, v));
            }
        }
    }

    #[test]
    fn metric_on_orbits() {
        let reps = Word::lyndon_up_to(5);
        for u in &reps {
            assert_eq!(dbar_periodic_exact(u, &u.rotate(1)), r(0, 1));
            for v in &reps {
                let d = dbar_periodic_exact(u, v);
                assert_eq!(d, dbar_periodic_exact(v, u));
                assert_eq!(d == r(0, 1), u == v);
                for t in &reps {
                    assert!(dbar_periodic_exact(u, t) <= d + dbar_periodic_exact(v, t));
                }
            }
        }
    }

    #[test]
    fn lp_examples() {
        let mu = MeasureSpec::bernoulli(Scalar::ratio(1, 3));
        for l in 1..=3 {
            assert_eq!(dbar_lp_lower(&mu, &mu, l).unwrap().value, Scalar::ZERO);
        }
        let zero = MeasureSpec::periodic(w("0"));
        let one = MeasureSpec::periodic(w("1"));
        assert_eq!(dbar_lp_lower(&zero, &one, 1).unwrap().value, Scalar::ONE);
        let alt = MeasureSpec::periodic(w("01"));
        assert_eq!(dbar_lp_lower(&alt, &zero, 2).unwrap().value, Scalar::ratio(1, 2));
    }

    #[test]
    fn lp_monotone_and_tight_at_lcm() {
        let reps = Word::lyndon_up_to(4);
        for u in &reps {
            for v in &reps {
                let (mu, nu) = (MeasureSpec::periodic(u.clone()), MeasureSpec::periodic(v.clone()));
                let l = lcm_usize(u.len(), v.len());
                let mut prev = Scalar::ZERO;
                for k in 1..=l {
                    let val = dbar_lp_lower(&mu, &nu, k).unwrap().value;
                    assert!(prev <= val, "{u} {v} L={k}");
                    prev = val;
                }
                assert_eq!(prev, Scalar::Exact(dbar_periodic_exact(u, v)), "{u} {v}");
            }
        }
    }

    #[test]
    fn lp_float_path() {
        let mu = MeasureSpec::golden_sturmian();
        let nu = MeasureSpec::periodic(w("1"));
        let v = dbar_lp_lower(&mu, &nu, 3).unwrap();
        assert!(!v.exact);
        assert!((v.value.to_f64() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn product_bounds() {
        let zero = MeasureSpec::periodic(w("0"));
        assert_eq!(dbar_upper_product(&zero, &zero).unwrap(), Scalar::ZERO);
        let b = MeasureSpec::bernoulli(Scalar::ratio(1, 2));
        assert_eq!(dbar_upper_product(&b, &b).unwrap(), Scalar::ratio(1, 2));
        let alt = MeasureSpec::periodic(w("01"));
        assert_eq!(dbar_upper_product(&alt, &zero).unwrap(), Scalar::ratio(1, 2));
    }

    #[test]
    fn lp_text_export() {
        let lp = CouplingLP::new(&MeasureSpec::periodic(w("01")), &MeasureSpec::periodic(w("0")), 2).unwrap();
        let t = lp.to_text();
        assert!(t.starts_with("coupling-lp order 2 vars 2"));
        assert!(t.contains("x0 01 00 cost 0"));
    }

    #[test]
    fn matching_examples() {
        let z = SubshiftSpec::PeriodicOrbit { word: w("0") };
        assert_eq!(matching_distance(&w("01").repeat(6), &z, MatchKind::Dp).unwrap(), r(1, 2));
        let z = SubshiftSpec::PeriodicOrbit { word: w("011") };
        assert_eq!(matching_distance(&w("1101101"), &z, MatchKind::Exact).unwrap(), r(0, 1));
    }

    /// Oracle: every word of length `n`, kept when each length-`l` window is a factor.
    fn brute_match(x: &Word, l: usize, factors: &BTreeSet<Word>) -> Option<Rational> {
        let n = x.len();
        Word::all(n)
            .filter(|y| (0..=n - l).all(|i| factors.contains(&y.sub(i, l))))
            .map(|y| r(mismatches(x.symbols(), y.symbols()) as i64, n as i64))
            .min()
    }

    #[test]
    fn dp_equals_brute_force_on_factor_sets() {
        let mut checked = 0;
        for l in 1..=3usize {
            let all: Vec<Word> = Word::all(l).collect();
            for mask in 1u32..(1 << all.len()) {
                let factors: BTreeSet<Word> =
                    all.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, w)| w.clone()).collect();
                let spec = SubshiftSpec::FactorSet { l, factors: factors.clone() };
                if spec.factor_graph().is_err() {
                    continue;
                }
                for n in [l, l + 1, 7, 12] {
                    for code in [0u64, 0b1011_0110_1101, 0b0101_0101_0101, 0b1110_0011_1000] {
                        let x = Word::from_code(code & ((1 << n) - 1), n);
                        let dp = matching_distance(&x, &spec, MatchKind::Dp).unwrap();
                        assert_eq!(Some(dp), brute_match(&x, l, &factors), "{x} {factors:?}");
                        assert_eq!(matching_distance(&x, &spec, MatchKind::Exact).unwrap(), dp);
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn member_words_have_distance_zero() {
        let seq = BiSequence::golden_sturmian();
        let spec = SubshiftSpec::OrbitClosureApprox { seq: seq.clone(), window: 500, l: 8 };
        let x = seq.window(100, 140).unwrap();
        assert_eq!(matching_distance(&x, &spec, MatchKind::Dp).unwrap(), r(0, 1));
    }

    #[test]
    fn dead_end_rejected() {
        let spec = SubshiftSpec::FactorSet { l: 2, factors: [w("01")].into_iter().collect() };
        assert!(matches!(matching_distance(&w("0101"), &spec, MatchKind::Dp), Err(Error::DeadEnd(_))));
    }
}
