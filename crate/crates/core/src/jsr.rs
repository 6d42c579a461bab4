//! Bounds on `log ϱ(L_0, L_1)`: word enumeration from above, periodic
//! products from below.

use serde::{Deserialize, Serialize};

use crate::cocycle::{self, candidate_shifts, Certainty, Lattice, UNBOUNDED};
use crate::error::{Error, Result};
use crate::par;
use crate::scalar::Scalar;
use crate::symbolic::Word;
use crate::weights::{Structure, WeightFunction};

pub const MAX_ENUMERATION_LEN: usize = 24;

/// Prefix length at which the enumeration tree is split into independent subtrees.
const SPLIT_DEPTH: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsrUpper {
    /// `(1/n) max_x log‖L_x‖` over words of length `n`.
    pub value: Scalar,
    pub n: usize,
    pub k_window: i64,
    /// True when every norm in the max was exact, making `value` an upper bound.
    pub certified: bool,
    /// Lexicographically first maximising word.
    pub word: Word,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsrLower {
    pub value: Scalar,
    pub word: Word,
    pub certified: bool,
}

trait Acc: Copy + PartialOrd + std::ops::Add<Output = Self> + Send + Sync {
    const NEG_INF: Self;
    /// Can a subtree whose bound is `bound` still beat `best` strictly?
    fn may_beat(bound: Self, best: Self) -> bool;
}

impl Acc for i128 {
    const NEG_INF: Self = i128::MIN / 4;
    fn may_beat(bound: Self, best: Self) -> bool {
        bound > best
    }
}

impl Acc for f64 {
    const NEG_INF: Self = f64::NEG_INFINITY;
    fn may_beat(bound: Self, best: Self) -> bool {
        bound >= best - 1e-9 * (1.0 + best.abs())
    }
}

/// Weights `vals[k][i][a] = φ(a, k_k + i)` and tails `rem[k][d] = Σ_{i≥d} max_a`.
struct Search<T> {
    n: usize,
    vals: Vec<Vec<[T; 2]>>,
    rem: Vec<Vec<T>>,
}

impl<T: Acc> Search<T> {
    fn new(n: usize, vals: Vec<Vec<[T; 2]>>, zero: T) -> Self {
        let rem = vals
            .iter()
            .map(|row| {
                let mut r = vec![zero; n + 1];
                for d in (0..n).rev() {
                    let m = if row[d][0] > row[d][1] { row[d][0] } else { row[d][1] };
                    r[d] = r[d + 1] + m;
                }
                r
            })
            .collect();
        Search { n, vals, rem }
    }

    /// Best completion of the prefix `code` (of length `depth`), if it beats nothing yet.
    fn subtree(&self, code: u64, depth: usize, zero: T) -> Option<(T, u64)> {
        let mut sums = vec![zero; self.vals.len()];
        for d in 0..depth {
            let a = ((code >> (depth - 1 - d)) & 1) as usize;
            for (s, row) in sums.iter_mut().zip(&self.vals) {
                *s = *s + row[d][a];
            }
        }
        let mut best = (T::NEG_INF, u64::MAX);
        let mut stack = vec![sums];
        self.dfs(code, depth, &mut stack, &mut best);
        (best.1 != u64::MAX).then_some(best)
    }

    fn dfs(&self, code: u64, depth: usize, stack: &mut Vec<Vec<T>>, best: &mut (T, u64)) {
        let sums = stack.last().unwrap();
        if depth == self.n {
            let v = sums
                .iter()
                .copied()
                .fold(T::NEG_INF, |a, b| if b > a { b } else { a });
            if best.1 == u64::MAX || v > best.0 {
                *best = (v, code);
            }
            return;
        }
        let bound = sums
            .iter()
            .zip(&self.rem)
            .map(|(&s, r)| s + r[depth])
            .fold(T::NEG_INF, |a, b| if b > a { b } else { a });
        if best.1 != u64::MAX && !T::may_beat(bound, best.0) {
            return;
        }
        for a in 0..2 {
            let next: Vec<T> = stack
                .last()
                .unwrap()
                .iter()
                .zip(&self.vals)
                .map(|(&s, row)| s + row[depth][a])
                .collect();
            stack.push(next);
            self.dfs((code << 1) | a as u64, depth + 1, stack, best);
            stack.pop();
        }
    }

    fn run(&self, zero: T) -> (T, u64) {
        let split = self.n.min(SPLIT_DEPTH);
        let parts = par::map(1 << split, |c| self.subtree(c as u64, split, zero));
        let mut best: Option<(T, u64)> = None;
        for p in parts.into_iter().flatten() {
            if best.is_none_or(|b| p.0 > b.0) {
                best = Some(p);
            }
        }
        best.expect("at least one word")
    }
}

/// `(1/n) max_{|x|=n} log‖L_x‖`: an upper bound for `log ϱ` whenever the
/// norms are exact (eventually periodic weights); otherwise the scan over
/// `|k| ≤ k_window` is used and the result is not certified.
pub fn jsr_upper(phi: &WeightFunction, n: usize, k_window: i64) -> Result<JsrUpper> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be ≥ 1".into()));
    }
    if n > MAX_ENUMERATION_LEN {
        return Err(Error::Budget(format!("2^{n} words (cap is n = {MAX_ENUMERATION_LEN})")));
    }
    let st = phi.structure();
    let certified = st != Structure::General;
    let ks = if certified {
        candidate_shifts(&st, n as i64, -UNBOUNDED, UNBOUNDED)?
    } else {
        candidate_shifts(&st, n as i64, -k_window, k_window)?
    };
    let lo = *ks.iter().min().unwrap();
    let hi = *ks.iter().max().unwrap() + n as i64 - 1;
    let lattice = Lattice::compile(&phi.rows(lo, hi)?);
    let (value, code) = match &lattice {
        Lattice::Int { den, rows } => {
            let vals = ks
                .iter()
                .map(|&k| {
                    let off = (k - lo) as usize;
                    rows[off..off + n].iter().map(|r| [r[0] as i128, r[1] as i128]).collect()
                })
                .collect();
            let (v, code) = Search::new(n, vals, 0i128).run(0);
            let v = i64::try_from(v)
                .map(|v| Scalar::ratio(v, *den))
                .unwrap_or(Scalar::Float(v as f64 / *den as f64));
            (v, code)
        }
        Lattice::Float(rows) => {
            let vals = ks
                .iter()
                .map(|&k| {
                    let off = (k - lo) as usize;
                    rows[off..off + n].to_vec()
                })
                .collect();
            let (v, code) = Search::new(n, vals, 0f64).run(0.0);
            (Scalar::Float(v), code)
        }
    };
    Ok(JsrUpper {
        value: value.div_int(n as i64),
        n,
        k_window,
        certified,
        word: Word::from_code(code, n),
    })
}

/// `max_w Λ(φ, orbit of w)` over the candidates: a lower bound for `log ϱ`.
pub fn jsr_lower(phi: &WeightFunction, candidates: &[Word], m: u64, k_window: i64) -> Result<JsrLower> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("empty candidate list".into()));
    }
    let rates = par::map(candidates.len(), |i| {
        cocycle::periodic_log_spectral_radius(phi, &candidates[i], m, k_window)
    });
    let mut best: Option<JsrLower> = None;
    for (w, r) in candidates.iter().zip(rates) {
        let r = r?;
        let certified = r.certainty == Certainty::Exact;
        if best.as_ref().is_none_or(|b| r.lower > b.value) {
            best = Some(JsrLower {
                value: r.lower,
                word: w.clone(),
                certified,
            });
        }
    }
    Ok(best.unwrap())
}
