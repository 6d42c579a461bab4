//! Shift-invariant probability measures on `{0,1}^ℤ`, through their cylinder masses.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symbolic::{BiSequence, Rotation, Word};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum MeasureSpec {
    /// Uniform on the shift orbit of `word^∞`.
    PeriodicOrbit { word: Word },
    Bernoulli { p: Scalar },
    /// First-order chain with transition matrix `p[a][b] = P(b | a)`.
    Markov {
        p: [[Scalar; 2]; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pi: Option<[Scalar; 2]>,
    },
    /// The rotation-invariant measure coded by `1 ↔ [0, 1/2]`.
    SturmianMeasure { gamma: Rotation },
    /// The window `seq_a … seq_{a+n−1}` read cyclically.
    Empirical { seq: BiSequence, a: i64, n: u64 },
}

fn check_prob(v: Scalar, what: &str) -> Result<()> {
    if v < Scalar::ZERO || v > Scalar::ONE {
        return Err(Error::InvalidParameter(format!("{what} = {v} is not a probability")));
    }
    Ok(())
}

impl MeasureSpec {
    pub fn periodic(word: Word) -> Self {
        MeasureSpec::PeriodicOrbit { word }
    }

    pub fn bernoulli(p: Scalar) -> Self {
        MeasureSpec::Bernoulli { p }
    }

    pub fn markov(p: [[Scalar; 2]; 2]) -> Self {
        MeasureSpec::Markov { p, pi: None }
    }

    pub fn golden_sturmian() -> Self {
        MeasureSpec::SturmianMeasure {
            gamma: Rotation::golden(),
        }
    }

    pub fn empirical(seq: BiSequence, a: i64, n: u64) -> Self {
        MeasureSpec::Empirical { seq, a, n }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MeasureSpec::Bernoulli { p } => check_prob(*p, "p"),
            MeasureSpec::Markov { p, .. } => {
                for row in p {
                    check_prob(row[0], "P")?;
                    check_prob(row[1], "P")?;
                    if !(row[0] + row[1]).le_slack(Scalar::ONE) || !Scalar::ONE.le_slack(row[0] + row[1]) {
                        return Err(Error::InvalidParameter("Markov rows must sum to 1".into()));
                    }
                }
                self.stationary().map(|_| ())
            }
            MeasureSpec::Empirical { n, .. } if *n == 0 => Err(Error::EmptyWord),
            _ => Ok(()),
        }
    }

    /// Stationary row vector of a Markov spec (given, or solved from `P`).
    pub fn stationary(&self) -> Result<[Scalar; 2]> {
        let MeasureSpec::Markov { p, pi } = self else {
            return Err(Error::Unsupported("stationary vector of a non-Markov measure".into()));
        };
        if let Some(pi) = pi {
            return Ok(*pi);
        }
        let (p01, p10) = (p[0][1], p[1][0]);
        let s = p01 + p10;
        if s == Scalar::ZERO {
            return Err(Error::InvalidParameter(
                "reducible Markov chain: supply the stationary vector".into(),
            ));
        }
        let pi0 = match (p10.as_exact(), s.as_exact()) {
            (Some(a), Some(b)) => Scalar::Exact(a / b),
            _ => Scalar::Float(p10.to_f64() / s.to_f64()),
        };
        Ok([pi0, Scalar::ONE - pi0])
    }

    /// The cyclic word an empirical or periodic measure is uniform over.
    pub fn orbit_word(&self) -> Result<Option<Word>> {
        Ok(match self {
            MeasureSpec::PeriodicOrbit { word } => Some(word.clone()),
            MeasureSpec::Empirical { seq, a, n } => {
                if *n == 0 {
                    return Err(Error::EmptyWord);
                }
                Some(seq.window(*a, *a + *n as i64 - 1)?)
            }
            _ => None,
        })
    }

    /// `μ([ω])`.
    pub fn cylinder_prob(&self, omega: &Word) -> Result<Scalar> {
        match self {
            MeasureSpec::PeriodicOrbit { .. } | MeasureSpec::Empirical { .. } => {
                let w = self.orbit_word()?.unwrap();
                Ok(orbit_cylinder(&w, omega))
            }
            MeasureSpec::Bernoulli { p } => Ok(omega
                .symbols()
                .iter()
                .map(|&s| if s == 1 { *p } else { Scalar::ONE - *p })
                .fold(Scalar::ONE, |a, b| a * b)),
            MeasureSpec::Markov { p, .. } => {
                let pi = self.stationary()?;
                let s = omega.symbols();
                Ok(s.windows(2)
                    .map(|t| p[t[0] as usize][t[1] as usize])
                    .fold(pi[s[0] as usize], |a, b| a * b))
            }
            MeasureSpec::SturmianMeasure { gamma } => Ok(sturmian_arcs(gamma, omega.len())
                .into_iter()
                .filter(|(w, _)| w == omega)
                .map(|(_, len)| arc_mass(len))
                .sum()),
        }
    }

    /// Every word of length `l` with positive mass, with its mass, sorted by word.
    pub fn cylinders(&self, l: usize) -> Result<Vec<(Word, Scalar)>> {
        if l == 0 {
            return Err(Error::EmptyWord);
        }
        match self {
            MeasureSpec::PeriodicOrbit { .. } | MeasureSpec::Empirical { .. } => {
                let w = self.orbit_word()?.unwrap();
                let mut counts: BTreeMap<Word, i64> = BTreeMap::new();
                for r in 0..w.len() {
                    let win: Vec<u8> = (0..l).map(|i| w.cyclic((r + i) as i64)).collect();
                    *counts.entry(Word::from_vec_unchecked(win)).or_default() += 1;
                }
                let p = w.len() as i64;
                Ok(counts.into_iter().map(|(u, c)| (u, Scalar::ratio(c, p))).collect())
            }
            MeasureSpec::SturmianMeasure { gamma } => {
                let mut acc: BTreeMap<Word, u128> = BTreeMap::new();
                for (w, len) in sturmian_arcs(gamma, l) {
                    *acc.entry(w).or_default() += len;
                }
                Ok(acc.into_iter().map(|(w, len)| (w, arc_mass(len))).collect())
            }
            MeasureSpec::Bernoulli { .. } | MeasureSpec::Markov { .. } => {
                if l > 24 {
                    return Err(Error::Budget(format!("2^{l} cylinders")));
                }
                let mut out = Vec::new();
                for w in Word::all(l) {
                    let m = self.cylinder_prob(&w)?;
                    if m > Scalar::ZERO {
                        out.push((w, m));
                    }
                }
                Ok(out)
            }
        }
    }

    /// `μ([1])`.
    pub fn one_frequency(&self) -> Result<Scalar> {
        self.cylinder_prob(&Word::from_vec_unchecked(vec![1]))
    }

    /// A word drawn from the length-`n` cylinder distribution.
    pub fn sample_word(&self, n: usize, seed: u64) -> Result<Word> {
        if matches!(self, MeasureSpec::Empirical { .. }) {
            return Err(Error::Unsupported(
                "sampling an empirical measure; read its window directly".into(),
            ));
        }
        Ok(self.sample_anchored(n, &mut ChaCha8Rng::seed_from_u64(seed))?.0)
    }

    /// A sample together with the index where it sits in the source sequence
    /// (the window start for empirical measures, 0 otherwise).
    pub(crate) fn sample_anchored(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<(Word, i64)> {
        if n == 0 {
            return Err(Error::EmptyWord);
        }
        let sym = match self {
            MeasureSpec::PeriodicOrbit { word } => {
                let r = rng.random_range(0..word.len()) as i64;
                (0..n as i64).map(|i| word.cyclic(r + i)).collect()
            }
            MeasureSpec::Empirical { a, .. } => {
                let w = self.orbit_word()?.unwrap();
                let r = rng.random_range(0..w.len()) as i64;
                let x = (0..n as i64).map(|i| w.cyclic(r + i)).collect();
                return Ok((Word::from_vec_unchecked(x), a + r));
            }
            MeasureSpec::Bernoulli { p } => {
                let p = p.to_f64();
                (0..n).map(|_| (rng.random::<f64>() < p) as u8).collect()
            }
            MeasureSpec::Markov { p, .. } => {
                let pi = self.stationary()?;
                let mut s = (rng.random::<f64>() >= pi[0].to_f64()) as u8;
                let mut out = Vec::with_capacity(n);
                for _ in 0..n {
                    out.push(s);
                    s = (rng.random::<f64>() < p[s as usize][1].to_f64()) as u8;
                }
                out
            }
            MeasureSpec::SturmianMeasure { gamma } => {
                let theta: u128 = rng.random();
                (0..n as i64)
                    .map(|i| Rotation::code(theta.wrapping_add(gamma.phase(i))))
                    .collect()
            }
        };
        Ok((Word::from_vec_unchecked(sym), 0))
    }
}

/// Fraction of phases of `w^∞` showing `omega`.
fn orbit_cylinder(w: &Word, omega: &Word) -> Scalar {
    let p = w.len();
    let hits = (0..p)
        .filter(|&r| (0..omega.len()).all(|i| w.cyclic((r + i) as i64) == omega.at(i)))
        .count();
    Scalar::ratio(hits as i64, p as i64)
}

fn arc_mass(len: u128) -> Scalar {
    Scalar::Float(len as f64 / 2f64.powi(128))
}

/// Partition of the circle (in units of `2^-128`) into arcs on which the
/// length-`l` itinerary under rotation by `γ` is constant.
fn sturmian_arcs(gamma: &Rotation, l: usize) -> Vec<(Word, u128)> {
    let half = 1u128 << 127;
    let mut cuts: Vec<u128> = (0..l as i64)
        .flat_map(|i| {
            let back = 0u128.wrapping_sub(gamma.phase(i));
            [back, back.wrapping_add(half)]
        })
        .collect();
    cuts.sort_unstable();
    cuts.dedup();
    let mut arcs = Vec::with_capacity(cuts.len());
    for (t, &start) in cuts.iter().enumerate() {
        let end = cuts.get(t + 1).copied().unwrap_or(cuts[0]);
        let len = end.wrapping_sub(start);
        let mid = start.wrapping_add(len / 2);
        let word = (0..l as i64)
            .map(|i| Rotation::code(mid.wrapping_add(gamma.phase(i))))
            .collect();
        arcs.push((Word::from_vec_unchecked(word), len));
    }
    arcs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn specs() -> Vec<MeasureSpec> {
        vec![
            MeasureSpec::periodic(w("0010111")),
            MeasureSpec::bernoulli(Scalar::ratio(1, 3)),
            MeasureSpec::markov([
                [Scalar::ratio(2, 3), Scalar::ratio(1, 3)],
                [Scalar::ratio(1, 4), Scalar::ratio(3, 4)],
            ]),
            MeasureSpec::golden_sturmian(),
            MeasureSpec::empirical(BiSequence::golden_sturmian(), 5, 40),
        ]
    }

    fn close(a: Scalar, b: Scalar) -> bool {
        match (a, b) {
            (Scalar::Exact(x), Scalar::Exact(y)) => x == y,
            _ => (a.to_f64() - b.to_f64()).abs() < 1e-12,
        }
    }

    #[test]
    fn consistency_identities() {
        for mu in specs() {
            for l in 1..=6 {
                let mut total = Scalar::ZERO;
                for om in Word::all(l) {
                    let m = mu.cylinder_prob(&om).unwrap();
                    assert!(m >= Scalar::ZERO && m.le_slack(Scalar::ONE));
                    total = total + m;
                    let right: Scalar = (0..2)
                        .map(|a| mu.cylinder_prob(&om.concat(&Word::from_vec_unchecked(vec![a]))).unwrap())
                        .sum();
                    let left: Scalar = (0..2)
                        .map(|a| mu.cylinder_prob(&Word::from_vec_unchecked(vec![a]).concat(&om)).unwrap())
                        .sum();
                    assert!(close(m, right), "{mu:?} {om}");
                    assert!(close(m, left), "{mu:?} {om}");
                }
                assert!(close(total, Scalar::ONE), "{mu:?} L={l}: {total}");
            }
        }
    }

    #[test]
    fn periodic_half() {
        assert_eq!(MeasureSpec::periodic(w("01")).cylinder_prob(&w("0")).unwrap(), Scalar::ratio(1, 2));
    }

    #[test]
    fn sturmian_values() {
        let mu = MeasureSpec::golden_sturmian();
        let g = (5f64.sqrt() - 1.0) / 2.0;
        assert!((mu.cylinder_prob(&w("1")).unwrap().to_f64() - 0.5).abs() < 1e-15);
        assert!((mu.cylinder_prob(&w("11")).unwrap().to_f64() - (g - 0.5)).abs() < 1e-15);
        for l in [7, 20, 50] {
            let cyl = mu.cylinders(l).unwrap();
            // 2l cut points bound the number of arcs, hence of factors
            assert!(cyl.len() <= 2 * l);
            let arcs = sturmian_arcs(&Rotation::golden(), l);
            for (u, _) in &cyl {
                assert!(arcs.iter().filter(|(v, _)| v == u).count() <= l + 1);
            }
            let s: f64 = cyl.iter().map(|(_, m)| m.to_f64()).sum();
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn markov_stationary() {
        let mu = specs()[2].clone();
        let pi = mu.stationary().unwrap();
        assert_eq!(pi, [Scalar::ratio(3, 7), Scalar::ratio(4, 7)]);
    }

    #[test]
    fn degenerate_coin() {
        let mu = MeasureSpec::bernoulli(Scalar::ONE);
        for seed in 0..5 {
            assert_eq!(mu.sample_word(30, seed).unwrap(), w(&"1".repeat(30)));
        }
    }

    #[test]
    fn periodic_samples_are_phases() {
        let word = w("00101");
        let mu = MeasureSpec::periodic(word.clone());
        let phases: Vec<Word> = (0..5).map(|r| word.rotate(r).repeat(3).sub(0, 12)).collect();
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..200 {
            let x = mu.sample_word(12, seed).unwrap();
            assert!(phases.contains(&x));
            seen.insert(x);
        }
        assert_eq!(seen.len(), 5);
    }

    #[test]
    fn markov_frequency_within_three_sigma() {
        let mu = specs()[2].clone();
        let n = 100_000;
        let x = mu.sample_word(n, 7).unwrap();
        let freq = x.ones() as f64 / n as f64;
        // variance of a two-state chain mean: π0 π1 (1+ρ)/(1−ρ)/n, ρ = 1 − P01 − P10
        let (pi1, rho) = (4.0 / 7.0, 1.0 - 1.0 / 3.0 - 1.0 / 4.0);
        let sigma = (pi1 * (1.0 - pi1) * (1.0 + rho) / (1.0 - rho) / n as f64).sqrt();
        assert!((freq - pi1).abs() < 3.0 * sigma, "{freq}");
    }

    #[test]
    fn sampling_is_deterministic() {
        for mu in specs().into_iter().take(4) {
            assert_eq!(mu.sample_word(64, 11).unwrap(), mu.sample_word(64, 11).unwrap());
        }
        assert!(matches!(
            specs()[4].sample_word(5, 0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn sturmian_samples_are_factors() {
        let mu = MeasureSpec::golden_sturmian();
        let factors: Vec<Word> = mu.cylinders(10).unwrap().into_iter().map(|(w, _)| w).collect();
        for seed in 0..50 {
            assert!(factors.contains(&mu.sample_word(10, seed).unwrap()));
        }
    }

    #[test]
    fn json_round_trip() {
        for mu in specs() {
            let js = serde_json::to_string(&mu).unwrap();
            let back: MeasureSpec = serde_json::from_str(&js).unwrap();
            assert_eq!(back, mu, "{js}");
        }
    }
}
