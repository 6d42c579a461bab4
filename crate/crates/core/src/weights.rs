//! Bounded weight functions `φ(a, i)`, `a ∈ {0,1}`, `i ∈ ℤ`.
//!
//! A weight function is the whole data of an operator pair: operator `a`
//! sends `e_i` to `exp(φ(a,i)) e_{i+1}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cocycle;
use crate::error::{Error, Result};
use crate::scalar::{lcm_usize, Scalar};
use crate::symbolic::{BiSequence, Word};

/// Constant defaults with finitely many overridden indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Tabular {
    pub default: [Scalar; 2],
    pub overrides: BTreeMap<i64, [Scalar; 2]>,
}

impl Tabular {
    pub fn constant(c: Scalar) -> Self {
        Tabular {
            default: [c, c],
            overrides: BTreeMap::new(),
        }
    }

    pub fn with(mut self, a: u8, i: i64, v: Scalar) -> Self {
        let default = self.default;
        self.overrides.entry(i).or_insert(default)[a as usize] = v;
        self
    }

    fn get(&self, a: u8, i: i64) -> Scalar {
        self.overrides
            .get(&i)
            .map_or(self.default[a as usize], |row| row[a as usize])
    }

    fn support(&self) -> Option<(i64, i64)> {
        let lo = *self.overrides.keys().next()?;
        let hi = *self.overrides.keys().next_back()?;
        Some((lo, hi))
    }
}

#[derive(Clone, Debug)]
pub enum WeightFunction {
    Tabular(Tabular),
    /// `φ(a, i) = table[a][z_i]`.
    OrbitInduced { z: BiSequence, table: [[Scalar; 2]; 2] },
    /// `Σ λ_t φ_t`.
    Combo { terms: Vec<(Scalar, WeightFunction)> },
    /// The perturbation `ψ_A` of a [`PerturbationPlan`].
    Psi { plan: Arc<PerturbationPlan> },
}

/// How far a weight function is from being periodic in the index.
#[derive(Clone, Debug, PartialEq)]
pub enum Structure {
    /// `φ(a, i) = base[i mod period][a]` for every `i` outside `support`.
    Eventual {
        period: usize,
        base: Vec<[Scalar; 2]>,
        support: Option<(i64, i64)>,
    },
    General,
}

impl Structure {
    pub fn period(&self) -> Option<usize> {
        match self {
            Structure::Eventual { period, .. } => Some(*period),
            Structure::General => None,
        }
    }

    /// The base pattern at index `i` (ignoring the finite support).
    pub fn base_at(&self, a: u8, i: i64) -> Option<Scalar> {
        match self {
            Structure::Eventual { period, base, .. } => {
                Some(base[i.rem_euclid(*period as i64) as usize][a as usize])
            }
            Structure::General => None,
        }
    }

    pub fn is_fully_periodic(&self) -> bool {
        matches!(self, Structure::Eventual { support: None, .. })
    }
}

impl WeightFunction {
    pub fn constant(c: impl Into<Scalar>) -> Self {
        WeightFunction::Tabular(Tabular::constant(c.into()))
    }

    pub fn orbit_induced(z: BiSequence, table: [[Scalar; 2]; 2]) -> Self {
        WeightFunction::OrbitInduced { z, table }
    }

    /// `φ(z_i, i) = 1`, `φ(1 − z_i, i) = 0`.
    pub fn greedy_indicator(z: BiSequence) -> Self {
        Self::orbit_induced(z, [[Scalar::ONE, Scalar::ZERO], [Scalar::ZERO, Scalar::ONE]])
    }

    /// Operators `α^{1−z_n}` and `α^{z_n}`: weight `log α` when `a = z_i`, else 0.
    pub fn gurvits(z: BiSequence, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha {alpha} not in (0,1)")));
        }
        let l = Scalar::Float(alpha.ln());
        Ok(Self::orbit_induced(z, [[l, Scalar::ZERO], [Scalar::ZERO, l]]))
    }

    /// 2 if `a = z_i = 1`, 1 if `a = z_i = 0`, 0 if `a ≠ z_i`.
    pub fn two_one_zero(z: BiSequence) -> Self {
        Self::orbit_induced(z, [[Scalar::ONE, Scalar::ZERO], [Scalar::ZERO, Scalar::int(2)]])
    }

    pub fn plus(self, other: WeightFunction) -> Self {
        self.combine(Scalar::ONE, other)
    }

    /// `self + λ·other`.
    pub fn combine(self, lambda: Scalar, other: WeightFunction) -> Self {
        let mut terms = match self {
            WeightFunction::Combo { terms } => terms,
            f => vec![(Scalar::ONE, f)],
        };
        terms.push((lambda, other));
        WeightFunction::Combo { terms }
    }

    pub fn scaled(self, lambda: Scalar) -> Self {
        WeightFunction::Combo {
            terms: vec![(lambda, self)],
        }
    }

    pub fn psi(plan: PerturbationPlan) -> Self {
        WeightFunction::Psi { plan: Arc::new(plan) }
    }

    pub fn eval(&self, a: u8, i: i64) -> Result<Scalar> {
        Ok(match self {
            WeightFunction::Tabular(t) => t.get(a, i),
            WeightFunction::OrbitInduced { z, table } => table[a as usize][z.symbol(i)? as usize],
            WeightFunction::Combo { terms } => {
                let mut s = Scalar::ZERO;
                for (l, f) in terms {
                    s = s + *l * f.eval(a, i)?;
                }
                s
            }
            WeightFunction::Psi { plan } => plan.psi(a, i),
        })
    }

    /// Rows `[φ(0,i), φ(1,i)]` for `i ∈ [lo, hi]`.
    pub fn rows(&self, lo: i64, hi: i64) -> Result<Vec<[Scalar; 2]>> {
        if hi < lo {
            return Ok(Vec::new());
        }
        match self {
            WeightFunction::OrbitInduced { z, table } => Ok(z
                .fill(lo, hi)?
                .into_iter()
                .map(|s| [table[0][s as usize], table[1][s as usize]])
                .collect()),
            WeightFunction::Combo { terms } => {
                let mut acc = vec![[Scalar::ZERO; 2]; (hi - lo + 1) as usize];
                for (l, f) in terms {
                    for (row, sub) in acc.iter_mut().zip(f.rows(lo, hi)?) {
                        row[0] = row[0] + *l * sub[0];
                        row[1] = row[1] + *l * sub[1];
                    }
                }
                Ok(acc)
            }
            _ => (lo..=hi).map(|i| Ok([self.eval(0, i)?, self.eval(1, i)?])).collect(),
        }
    }

    pub fn structure(&self) -> Structure {
        match self {
            WeightFunction::Tabular(t) => Structure::Eventual {
                period: 1,
                base: vec![t.default],
                support: t.support(),
            },
            WeightFunction::OrbitInduced { z, table } => match z.period_word() {
                Some(p) => Structure::Eventual {
                    period: p.len(),
                    base: p
                        .symbols()
                        .iter()
                        .map(|&s| [table[0][s as usize], table[1][s as usize]])
                        .collect(),
                    support: None,
                },
                None => Structure::General,
            },
            WeightFunction::Psi { plan } => Structure::Eventual {
                period: 1,
                base: vec![[Scalar::ZERO; 2]],
                support: plan.support(),
            },
            WeightFunction::Combo { terms } => {
                let mut period = 1usize;
                let mut parts = Vec::with_capacity(terms.len());
                for (l, f) in terms {
                    match f.structure() {
                        Structure::General => return Structure::General,
                        Structure::Eventual { period: p, base, support } => {
                            period = lcm_usize(period, p);
                            parts.push((*l, p, base, support));
                        }
                    }
                }
                let base = (0..period)
                    .map(|r| {
                        let mut row = [Scalar::ZERO; 2];
                        for (l, p, b, _) in &parts {
                            row[0] = row[0] + *l * b[r % p][0];
                            row[1] = row[1] + *l * b[r % p][1];
                        }
                        row
                    })
                    .collect();
                let support = parts
                    .iter()
                    .filter_map(|(_, _, _, s)| *s)
                    .reduce(|(a, b), (c, d)| (a.min(c), b.max(d)));
                Structure::Eventual { period, base, support }
            }
        }
    }

    /// `‖φ‖∞`: exact for tables and `ψ_A`, an upper bound for combinations.
    pub fn sup_norm(&self) -> Scalar {
        match self {
            WeightFunction::Tabular(t) => t
                .overrides
                .values()
                .chain(std::iter::once(&t.default))
                .flat_map(|r| r.iter().map(|v| v.abs()))
                .fold(Scalar::ZERO, Scalar::max),
            WeightFunction::OrbitInduced { table, .. } => table
                .iter()
                .flatten()
                .map(|v| v.abs())
                .fold(Scalar::ZERO, Scalar::max),
            WeightFunction::Combo { terms } => terms.iter().map(|(l, f)| l.abs() * f.sup_norm()).sum(),
            WeightFunction::Psi { plan } => plan.sup_norm(),
        }
    }

    /// `inf_i (φ(z_i,i) − φ(1−z_i,i))` over `i ∈ [lo, hi]`: the uniform greedy gap along `z`.
    pub fn greedy_gap(&self, z: &BiSequence, lo: i64, hi: i64) -> Result<Scalar> {
        let zs = z.fill(lo, hi)?;
        let rows = self.rows(lo, hi)?;
        zs.iter()
            .zip(rows)
            .map(|(&s, r)| r[s as usize] - r[1 - s as usize])
            .reduce(Scalar::min)
            .ok_or(Error::EmptyWindow { a: lo, b: hi })
    }

    /// Same function with every value moved to the float path.
    pub fn to_float(&self) -> WeightFunction {
        let f = |r: [Scalar; 2]| [r[0].to_float(), r[1].to_float()];
        match self {
            WeightFunction::Tabular(t) => WeightFunction::Tabular(Tabular {
                default: f(t.default),
                overrides: t.overrides.iter().map(|(&i, &r)| (i, f(r))).collect(),
            }),
            WeightFunction::OrbitInduced { z, table } => WeightFunction::OrbitInduced {
                z: z.clone(),
                table: [f(table[0]), f(table[1])],
            },
            WeightFunction::Combo { terms } => WeightFunction::Combo {
                terms: terms.iter().map(|(l, g)| (l.to_float(), g.to_float())).collect(),
            },
            WeightFunction::Psi { plan } => WeightFunction::Combo {
                terms: vec![(Scalar::Float(1.0), WeightFunction::Psi { plan: plan.clone() })],
            },
        }
    }
}

/// `ψ_ℓ`: `+1` on `(ω_i, ℓ+i)`, `−N` on `(1−ω_i, ℓ+i)`, zero elsewhere.
pub fn psi_ell(omega: &Word, ell: i64) -> WeightFunction {
    let n = omega.len() as i64;
    let mut t = Tabular::constant(Scalar::ZERO);
    for (i, &s) in omega.symbols().iter().enumerate() {
        let mut row = [Scalar::ZERO; 2];
        row[s as usize] = Scalar::ONE;
        row[1 - s as usize] = Scalar::int(-n);
        t.overrides.insert(ell + i as i64, row);
    }
    WeightFunction::Tabular(t)
}

/// One level of the perturbation construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanLevel {
    pub n: u64,
    pub k: i64,
    /// `Σ_{i<n} φ(z_i, k+i)` at the chosen `k`.
    pub window_sum: Scalar,
    /// `B_j`: `[k, k+n−N]` minus earlier levels, as disjoint closed intervals.
    pub b: Vec<(i64, i64)>,
    /// `|A_j|`
    pub a_count: u64,
    /// `|C_j|`
    pub c_count: u64,
}

impl PlanLevel {
    pub fn b_len(&self) -> u64 {
        self.b.iter().map(|(a, b)| (b - a + 1) as u64).sum()
    }

    pub fn b_contains(&self, ell: i64) -> bool {
        self.b.iter().any(|&(a, b)| a <= ell && ell <= b)
    }

    /// Average `window_sum / n`.
    pub fn window_average(&self) -> Scalar {
        self.window_sum.div_int(self.n as i64)
    }
}

/// Data defining `ψ_A` for a word `ω` along a base sequence `z`.
#[derive(Clone, Debug)]
pub struct PerturbationPlan {
    omega: Word,
    z: BiSequence,
    levels: Vec<PlanLevel>,
    /// `z_0 … z_{n_J − 1}`
    prefix: Vec<u8>,
}

impl PartialEq for PerturbationPlan {
    fn eq(&self, other: &Self) -> bool {
        self.omega == other.omega && self.z == other.z && self.levels == other.levels
    }
}

/// Scale sequence `n_1 = N`, `n_j` the least integer with `(Σ_{i<j} n_i)/n_j < 2^{−(j+1)}`.
pub fn scale_sequence(word_len: u64, depth: usize) -> Result<Vec<u64>> {
    let mut ns: Vec<u64> = Vec::with_capacity(depth);
    let mut total = 0u64;
    for j in 1..=depth {
        let n = if j == 1 {
            word_len
        } else {
            total
                .checked_mul(1u64 << (j + 1))
                .and_then(|v| v.checked_add(1))
                .filter(|&v| v < 1 << 40)
                .ok_or_else(|| Error::Budget(format!("scale n_{j} overflows")))?
        };
        total += n;
        ns.push(n);
    }
    Ok(ns)
}

/// Subtract closed intervals `taken` from `[lo, hi]`.
fn interval_difference(lo: i64, hi: i64, taken: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut cuts: Vec<(i64, i64)> = taken
        .iter()
        .filter(|&&(a, b)| b >= lo && a <= hi)
        .copied()
        .collect();
    cuts.sort_unstable();
    let mut out = Vec::new();
    let mut cur = lo;
    for (a, b) in cuts {
        if a > cur {
            out.push((cur, a - 1));
        }
        cur = cur.max(b + 1);
        if cur > hi {
            break;
        }
    }
    if cur <= hi {
        out.push((cur, hi));
    }
    out
}

impl PerturbationPlan {
    /// Assemble a plan from explicit scales and offsets.
    pub fn from_levels(omega: Word, z: BiSequence, ns: &[u64], ks: &[i64], sums: &[Scalar]) -> Result<Self> {
        if ns.len() != ks.len() || ns.len() != sums.len() || ns.is_empty() {
            return Err(Error::InvalidParameter("plan needs matching nonempty n, k lists".into()));
        }
        let big_n = omega.len() as i64;
        if ns.iter().any(|&n| (n as i64) < big_n) {
            return Err(Error::InvalidParameter("every scale must be at least |ω|".into()));
        }
        let max_n = *ns.iter().max().unwrap();
        let prefix = z.fill(0, max_n as i64 - 1)?;
        let occurs: Vec<bool> = (0..=prefix.len() - omega.len())
            .map(|p| omega.occurs_at(&prefix, p))
            .collect();
        let mut levels: Vec<PlanLevel> = Vec::new();
        let mut taken: Vec<(i64, i64)> = Vec::new();
        for ((&n, &k), &window_sum) in ns.iter().zip(ks).zip(sums) {
            let hi = k + n as i64 - big_n;
            let b = interval_difference(k, hi, &taken);
            let c_count = (k..=hi).filter(|&l| occurs[(l - k) as usize]).count() as u64;
            let a_count = b
                .iter()
                .flat_map(|&(a, b)| a..=b)
                .filter(|&l| occurs[(l - k) as usize])
                .count() as u64;
            taken.push((k, hi));
            levels.push(PlanLevel {
                n,
                k,
                window_sum,
                b,
                a_count,
                c_count,
            });
        }
        Ok(PerturbationPlan {
            omega,
            z,
            levels,
            prefix,
        })
    }

    pub fn omega(&self) -> &Word {
        &self.omega
    }

    pub fn z(&self) -> &BiSequence {
        &self.z
    }

    pub fn levels(&self) -> &[PlanLevel] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn word_len(&self) -> usize {
        self.omega.len()
    }

    /// `z_0 … z_{n_J−1}`.
    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    /// `ℓ ∈ A`.
    pub fn contains(&self, ell: i64) -> bool {
        self.level_of(ell).is_some()
    }

    /// The level `j` (0-based) with `ℓ ∈ A_j`.
    pub fn level_of(&self, ell: i64) -> Option<usize> {
        let j = self.levels.iter().position(|lv| lv.b_contains(ell))?;
        let off = (ell - self.levels[j].k) as usize;
        self.omega.occurs_at(&self.prefix, off).then_some(j)
    }

    /// `ℓ ∈ C_j` (0-based level).
    pub fn in_c(&self, j: usize, ell: i64) -> bool {
        let lv = &self.levels[j];
        let hi = lv.k + lv.n as i64 - self.omega.len() as i64;
        lv.k <= ell && ell <= hi && self.omega.occurs_at(&self.prefix, (ell - lv.k) as usize)
    }

    /// Members of `A_j`, materialised (small plans only).
    pub fn a_set(&self, j: usize) -> Vec<i64> {
        self.levels[j]
            .b
            .iter()
            .flat_map(|&(a, b)| a..=b)
            .filter(|&l| self.level_of(l) == Some(j))
            .collect()
    }

    /// `ψ_ℓ(a, i)` for a single `ℓ`.
    pub fn psi_ell_at(&self, ell: i64, a: u8, i: i64) -> Scalar {
        let n = self.omega.len() as i64;
        if i < ell || i >= ell + n {
            return Scalar::ZERO;
        }
        if self.omega.at((i - ell) as usize) == a {
            Scalar::ONE
        } else {
            Scalar::int(-n)
        }
    }

    /// `ψ_A(a, i) = Σ_{ℓ∈A} ψ_ℓ(a, i)`; at most `N` terms are nonzero.
    pub fn psi(&self, a: u8, i: i64) -> Scalar {
        let n = self.omega.len() as i64;
        (i - n + 1..=i)
            .filter(|&l| self.contains(l))
            .map(|l| self.psi_ell_at(l, a, i))
            .sum()
    }

    /// Hull of the indices where `ψ_A` can be nonzero.
    pub fn support(&self) -> Option<(i64, i64)> {
        let n = self.omega.len() as i64;
        let lo = self.levels.iter().flat_map(|l| l.b.first()).map(|b| b.0).min()?;
        let hi = self.levels.iter().flat_map(|l| l.b.last()).map(|b| b.1).max()?;
        Some((lo, hi + n - 1))
    }

    pub fn sup_norm(&self) -> Scalar {
        let Some((lo, hi)) = self.support() else {
            return Scalar::ZERO;
        };
        let n = self.omega.len() as i64;
        if hi - lo > 1 << 22 {
            // never exceeds N² in absolute value
            return Scalar::int(n * n);
        }
        (lo..=hi)
            .flat_map(|i| [self.psi(0, i), self.psi(1, i)])
            .map(Scalar::abs)
            .fold(Scalar::ZERO, Scalar::max)
    }

    /// `Σ_{i<|x|} ψ_A(x_i, k+i)`, summed over the contributing `ℓ`.
    pub fn window_sum(&self, x: &[u8], k: i64) -> Scalar {
        let n = self.omega.len() as i64;
        let len = x.len() as i64;
        let mut total = 0i64;
        for ell in (k - n + 1)..=(k + len - 1) {
            if !self.contains(ell) {
                continue;
            }
            for t in 0..n {
                let i = ell + t - k;
                if (0..len).contains(&i) {
                    total += if x[i as usize] == self.omega.at(t as usize) { 1 } else { -n };
                }
            }
        }
        Scalar::int(total)
    }

    /// Number of occurrences of `ω` in `z_0 … z_{n−1}` (positions `0 ..= n−N`).
    pub fn occurrences(&self, n: u64) -> u64 {
        let n = n as usize;
        (0..=n - self.omega.len())
            .filter(|&p| self.omega.occurs_at(&self.prefix[..n], p))
            .count() as u64
    }
}

#[derive(Serialize, Deserialize)]
struct PlanRepr {
    omega: Word,
    z: BiSequence,
    n: Vec<u64>,
    k: Vec<i64>,
    window_sum: Vec<Scalar>,
}

impl Serialize for PerturbationPlan {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PlanRepr {
            omega: self.omega.clone(),
            z: self.z.clone(),
            n: self.levels.iter().map(|l| l.n).collect(),
            k: self.levels.iter().map(|l| l.k).collect(),
            window_sum: self.levels.iter().map(|l| l.window_sum).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PerturbationPlan {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = PlanRepr::deserialize(deserializer)?;
        PerturbationPlan::from_levels(r.omega, r.z, &r.n, &r.k, &r.window_sum).map_err(serde::de::Error::custom)
    }
}

/// Build the plan for `φ`, `ω` along `z` to depth `depth`, choosing each
/// `k_j` as the maximiser of `Σ_{i<n_j} φ(z_i, k+i)` over `|k| ≤ k_search`.
pub fn build_plan(
    phi: &WeightFunction,
    omega: &Word,
    z: &BiSequence,
    depth: usize,
    k_search: i64,
) -> Result<PerturbationPlan> {
    if depth == 0 {
        return Err(Error::InvalidParameter("plan depth must be ≥ 1".into()));
    }
    let ns = scale_sequence(omega.len() as u64, depth)?;
    let max_n = *ns.last().unwrap();
    let prefix = z.fill(0, max_n as i64 - 1)?;
    let mut ks = Vec::with_capacity(depth);
    let mut sums = Vec::with_capacity(depth);
    for &n in &ns {
        let (k, s) = cocycle::argmax_shift(phi, &prefix[..n as usize], -k_search, k_search)?;
        ks.push(k);
        sums.push(s);
    }
    let plan = PerturbationPlan::from_levels(omega.clone(), z.clone(), &ns, &ks, &sums)?;
    if plan.levels.iter().all(|l| l.a_count == 0) {
        return Err(Error::NoOccurrence(omega.to_string()));
    }
    Ok(plan)
}

mod serde_impl {
    //! JSON layout: `{"variant": ..., fields}`; tabular overrides as sorted
    //! `[index, v0, v1]` triples.
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(tag = "variant")]
    pub(super) enum Repr {
        Tabular {
            default: [Scalar; 2],
            #[serde(default)]
            overrides: Vec<(i64, Scalar, Scalar)>,
        },
        OrbitInduced {
            z: BiSequence,
            table: [[Scalar; 2]; 2],
        },
        Combo {
            terms: Vec<(Scalar, WeightFunction)>,
        },
        Psi {
            plan: PerturbationPlan,
        },
    }
}

impl Serialize for WeightFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde_impl::Repr;
        let repr = match self {
            WeightFunction::Tabular(t) => Repr::Tabular {
                default: t.default,
                overrides: t.overrides.iter().map(|(&i, r)| (i, r[0], r[1])).collect(),
            },
            WeightFunction::OrbitInduced { z, table } => Repr::OrbitInduced {
                z: z.clone(),
                table: *table,
            },
            WeightFunction::Combo { terms } => Repr::Combo { terms: terms.clone() },
            WeightFunction::Psi { plan } => Repr::Psi {
                plan: (**plan).clone(),
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WeightFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde_impl::Repr;
        Ok(match Repr::deserialize(deserializer)? {
            Repr::Tabular { default, overrides } => WeightFunction::Tabular(Tabular {
                default,
                overrides: overrides.into_iter().map(|(i, a, b)| (i, [a, b])).collect(),
            }),
            Repr::OrbitInduced { z, table } => WeightFunction::OrbitInduced { z, table },
            Repr::Combo { terms } => WeightFunction::Combo { terms },
            Repr::Psi { plan } => WeightFunction::psi(plan),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn tabular_lookup() {
        let phi = WeightFunction::Tabular(Tabular::constant(Scalar::ZERO).with(1, 0, Scalar::ONE));
        assert_eq!(phi.eval(1, 0).unwrap(), Scalar::ONE);
        assert_eq!(phi.eval(1, 5).unwrap(), Scalar::ZERO);
        assert_eq!(phi.eval(0, 0).unwrap(), Scalar::ZERO);
    }

    #[test]
    fn orbit_induced_on_constant_orbit() {
        let phi = WeightFunction::greedy_indicator(BiSequence::periodic(w("0")));
        for i in -5..5 {
            assert_eq!(phi.eval(0, i).unwrap(), Scalar::ONE);
            assert_eq!(phi.eval(1, i).unwrap(), Scalar::ZERO);
        }
    }

    #[test]
    fn psi_with_single_anchor() {
        // ω = 10, A = {0}: hand-built plan with one level of n = N = 2 at k = 0
        let plan = PerturbationPlan::from_levels(
            w("10"),
            BiSequence::periodic(w("10")),
            &[2],
            &[0],
            &[Scalar::ZERO],
        )
        .unwrap();
        assert_eq!(plan.a_set(0), vec![0]);
        let psi = WeightFunction::psi(plan);
        assert_eq!(psi.eval(1, 0).unwrap(), Scalar::ONE);
        assert_eq!(psi.eval(0, 0).unwrap(), Scalar::int(-2));
        assert_eq!(psi.eval(0, 1).unwrap(), Scalar::ONE);
        assert_eq!(psi.eval(1, 1).unwrap(), Scalar::int(-2));
        assert_eq!(psi.eval(0, 5).unwrap(), Scalar::ZERO);
        assert_eq!(psi.eval(1, 5).unwrap(), Scalar::ZERO);
    }

    #[test]
    fn psi_ell_single_symbol() {
        let WeightFunction::Tabular(t) = psi_ell(&w("1"), 3) else { unreachable!() };
        assert_eq!(t.overrides.len(), 1);
        assert_eq!(t.overrides[&3], [Scalar::int(-1), Scalar::ONE]);
        assert_eq!(t.default, [Scalar::ZERO; 2]);
    }

    #[test]
    fn psi_ell_values_and_window_sums_are_bounded() {
        // exhaustive over ω with N ≤ 3, every word x of length ≤ 6, shifts around ℓ
        for n in 1..=3usize {
            for omega in Word::all(n) {
                let big_n = n as i64;
                let phi = psi_ell(&omega, 0);
                for i in -2..5 {
                    for a in 0..2 {
                        let v = phi.eval(a, i).unwrap();
                        assert!(Scalar::int(-big_n) <= v && v <= Scalar::ONE);
                    }
                }
                for len in 1..=6 {
                    for x in Word::all(len) {
                        for k in -(len as i64) - 1..=big_n + 1 {
                            let s = cocycle::window_sum(&phi, &x, k).unwrap();
                            assert!(Scalar::int(-big_n * big_n) <= s && s <= Scalar::int(big_n), "{omega} {x} {k}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn scale_sequence_small_word() {
        // independent arithmetic: n2 = 2·8 + 1, n3 = (2 + 17)·16 + 1
        assert_eq!(scale_sequence(2, 3).unwrap(), vec![2, 17, 305]);
        let ns = scale_sequence(3, 5).unwrap();
        for j in 1..ns.len() {
            let before: u64 = ns[..j].iter().sum();
            let level = j as u32 + 1;
            // strict inequality holds and fails for n_j − 1
            assert!(before * (1 << (level + 1)) < ns[j]);
            assert!(before * (1 << (level + 1)) >= ns[j] - 1);
        }
    }

    #[test]
    fn interval_difference_cases() {
        assert_eq!(interval_difference(0, 10, &[]), vec![(0, 10)]);
        assert_eq!(interval_difference(0, 10, &[(2, 3), (5, 5)]), vec![(0, 1), (4, 4), (6, 10)]);
        assert_eq!(interval_difference(0, 10, &[(-5, 20)]), vec![]);
        assert_eq!(interval_difference(0, 10, &[(8, 12), (-3, 1)]), vec![(2, 7)]);
    }

    #[test]
    fn plan_on_periodic_omega() {
        let omega = w("011");
        let z = BiSequence::periodic(omega.clone());
        let phi = WeightFunction::constant(Scalar::ZERO);
        let plan = build_plan(&phi, &omega, &z, 3, 5).unwrap();
        let first = &plan.levels()[0];
        // C_1 is the single anchor k_1 since z starts with ω
        assert_eq!(first.c_count, 1);
        assert!(plan.in_c(0, first.k));
        // every level: C_j = aligned indices k_j + 3t
        for (j, lv) in plan.levels().iter().enumerate() {
            let hi = lv.k + lv.n as i64 - 3;
            for l in lv.k..=hi {
                assert_eq!(plan.in_c(j, l), (l - lv.k) % 3 == 0);
            }
        }
    }

    #[test]
    fn plan_without_occurrence_fails() {
        let z = BiSequence::periodic(w("0"));
        let phi = WeightFunction::constant(Scalar::ZERO);
        assert!(matches!(
            build_plan(&phi, &w("1"), &z, 2, 3),
            Err(Error::NoOccurrence(_))
        ));
    }

    #[test]
    fn structure_of_combo() {
        let a = WeightFunction::greedy_indicator(BiSequence::periodic(w("01")));
        let b = WeightFunction::greedy_indicator(BiSequence::periodic(w("001")));
        let Structure::Eventual { period, support, .. } = a.plus(b).structure() else {
            panic!("expected eventual structure")
        };
        assert_eq!(period, 6);
        assert_eq!(support, None);
        let g = WeightFunction::greedy_indicator(BiSequence::golden_sturmian());
        assert_eq!(g.structure(), Structure::General);
    }

    #[test]
    fn sup_norms() {
        let t = WeightFunction::Tabular(Tabular::constant(Scalar::ratio(1, 2)).with(0, 3, Scalar::int(-3)));
        assert_eq!(t.sup_norm(), Scalar::int(3));
        let c = t.clone().combine(Scalar::int(-2), WeightFunction::constant(Scalar::ONE));
        assert_eq!(c.sup_norm(), Scalar::int(5));
    }

    #[test]
    fn greedy_gap_diagnostic() {
        let z = BiSequence::periodic(w("01"));
        let phi = WeightFunction::two_one_zero(z.clone());
        assert_eq!(phi.greedy_gap(&z, -10, 10).unwrap(), Scalar::ONE);
    }

    #[test]
    fn weight_json_round_trip() {
        let phi = WeightFunction::Tabular(
            Tabular::constant(Scalar::ratio(1, 3))
                .with(1, -2, Scalar::ratio(7, 5))
                .with(0, 4, Scalar::int(-1)),
        )
        .combine(Scalar::ratio(1, 2), WeightFunction::greedy_indicator(BiSequence::periodic(w("011"))));
        let js = serde_json::to_string(&phi).unwrap();
        let back: WeightFunction = serde_json::from_str(&js).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), js);
        for i in -5..8 {
            for a in 0..2 {
                let (x, y) = (phi.eval(a, i).unwrap(), back.eval(a, i).unwrap());
                assert_eq!(x.as_exact().unwrap(), y.as_exact().unwrap());
            }
        }
        assert!(js.contains("[-2,\"1/3\",\"7/5\"]"), "{js}");
    }
}
