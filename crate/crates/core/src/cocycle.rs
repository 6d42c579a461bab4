//! Windowed sums `Σ_{i<n} φ(x_i, k+i)` and the norm identity
//! `log‖L_{x_n}⋯L_{x_1}‖ = sup_k Σ_{i<n} φ(x_i, k+i)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lcm_usize, Scalar};
use crate::symbolic::{BiSequence, Word};
use crate::weights::{Structure, WeightFunction};

/// Stand-in for `±∞` when asking for the sup over all of `ℤ`.
pub(crate) const UNBOUNDED: i64 = 1 << 60;

/// Most shifts a general (aperiodic) weight is scanned over in one call.
const MAX_GENERAL_SHIFTS: i64 = 1 << 27;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certainty {
    /// `lower == upper` is the true value.
    Exact,
    /// Certified `lower ≤ value ≤ upper`.
    Bracket,
    /// Certified lower bound only.
    OneSided,
    /// A finite-scale estimate, not a bound.
    Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub n: u64,
    pub k_window: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Scalar,
    pub upper: Option<Scalar>,
    pub certainty: Certainty,
    pub meta: Meta,
}

impl Bounds {
    pub fn new(lower: Scalar, upper: Option<Scalar>, meta: Meta) -> Self {
        let certainty = match upper {
            Some(u) if u == lower => Certainty::Exact,
            Some(_) => Certainty::Bracket,
            None => Certainty::OneSided,
        };
        Bounds {
            lower,
            upper,
            certainty,
            meta,
        }
    }

    pub fn exact(value: Scalar, meta: Meta) -> Self {
        Self::new(value, Some(value), meta)
    }

    pub fn estimate(value: Scalar, meta: Meta) -> Self {
        Bounds {
            lower: value,
            upper: None,
            certainty: Certainty::Estimate,
            meta,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.certainty == Certainty::Exact
    }

    /// Divide both ends by a positive count (totals to per-symbol rates).
    pub fn per(mut self, n: i64) -> Self {
        self.lower = self.lower.div_int(n);
        self.upper = self.upper.map(|u| u.div_int(n));
        self
    }
}

/// `Σ_{i<n} φ(x_i, k+i)`.
pub fn window_sum(phi: &WeightFunction, x: &Word, k: i64) -> Result<Scalar> {
    Ok(shift_sums(phi, x.symbols(), &[k])?[0])
}

/// Window sums for every shift in `ks`.
pub fn shift_sums(phi: &WeightFunction, x: &[u8], ks: &[i64]) -> Result<Vec<Scalar>> {
    if ks.is_empty() {
        return Ok(Vec::new());
    }
    if x.is_empty() {
        return Ok(vec![Scalar::ZERO; ks.len()]);
    }
    match phi {
        WeightFunction::Psi { plan } => Ok(ks.iter().map(|&k| plan.window_sum(x, k)).collect()),
        WeightFunction::OrbitInduced { z, table } => correlation_sums(z, table, x, ks),
        _ => {
            let lo = *ks.iter().min().unwrap();
            let hi = *ks.iter().max().unwrap() + x.len() as i64 - 1;
            let lattice = Lattice::compile(&phi.rows(lo, hi)?);
            Ok(ks.iter().map(|&k| lattice.sum(x, (k - lo) as usize)).collect())
        }
    }
}

/// Rows packed over a common denominator, or floats.
pub(crate) enum Lattice {
    Int { den: i64, rows: Vec<[i64; 2]> },
    Float(Vec<[f64; 2]>),
}

impl Lattice {
    pub(crate) fn compile(rows: &[[Scalar; 2]]) -> Self {
        let float = || Lattice::Float(rows.iter().map(|r| [r[0].to_f64(), r[1].to_f64()]).collect());
        let mut den = 1i64;
        for v in rows.iter().flatten() {
            match v.as_exact() {
                Some(r) => match crate::scalar::checked_lcm(den, *r.denom()) {
                    Some(d) if d < 1 << 40 => den = d,
                    _ => return float(),
                },
                None => return float(),
            }
        }
        let mut packed = Vec::with_capacity(rows.len());
        for r in rows {
            let mut p = [0i64; 2];
            for a in 0..2 {
                let q = r[a].as_exact().unwrap();
                match q.numer().checked_mul(den / q.denom()) {
                    Some(v) if v.abs() < 1 << 62 => p[a] = v,
                    _ => return float(),
                }
            }
            packed.push(p);
        }
        Lattice::Int { den, rows: packed }
    }

    fn sum(&self, x: &[u8], off: usize) -> Scalar {
        match self {
            Lattice::Int { den, rows } => {
                let s: i128 = x
                    .iter()
                    .zip(&rows[off..off + x.len()])
                    .map(|(&a, r)| r[a as usize] as i128)
                    .sum();
                match i64::try_from(s) {
                    Ok(s) => Scalar::ratio(s, *den),
                    Err(_) => Scalar::Float(s as f64 / *den as f64),
                }
            }
            Lattice::Float(rows) => Scalar::Float(
                x.iter()
                    .zip(&rows[off..off + x.len()])
                    .map(|(&a, r)| r[a as usize])
                    .sum(),
            ),
        }
    }
}

fn pack_bits(bits: &[u8], extra_words: usize) -> Vec<u64> {
    let mut out = vec![0u64; bits.len().div_ceil(64) + extra_words];
    for (i, &b) in bits.iter().enumerate() {
        out[i / 64] |= (b as u64) << (i % 64);
    }
    out
}

/// Orbit-induced sums through the counts `c[a][b] = #{i : x_i = a, z_{k+i} = b}`,
/// with `#{x_i = 1, z_{k+i} = 1}` taken by popcount.
fn correlation_sums(z: &BiSequence, table: &[[Scalar; 2]; 2], x: &[u8], ks: &[i64]) -> Result<Vec<Scalar>> {
    let n = x.len();
    let lo = *ks.iter().min().unwrap();
    let hi = *ks.iter().max().unwrap() + n as i64 - 1;
    let zs = z.fill(lo, hi)?;
    let zw = pack_bits(&zs, 2);
    let xw = pack_bits(x, 0);
    let mut zcum = Vec::with_capacity(zs.len() + 1);
    zcum.push(0u64);
    for &s in &zs {
        zcum.push(zcum.last().unwrap() + s as u64);
    }
    let x1 = x.iter().filter(|&&s| s == 1).count() as i64;
    let n = n as i64;
    Ok(ks
        .iter()
        .map(|&k| {
            let off = (k - lo) as usize;
            let (q, r) = (off / 64, off % 64);
            let mut m11 = 0i64;
            for (w, &xv) in xw.iter().enumerate() {
                let zv = if r == 0 {
                    zw[q + w]
                } else {
                    (zw[q + w] >> r) | (zw[q + w + 1] << (64 - r))
                };
                m11 += (xv & zv).count_ones() as i64;
            }
            let z1 = (zcum[off + n as usize] - zcum[off]) as i64;
            let c = [[n - x1 - z1 + m11, z1 - m11], [x1 - m11, m11]];
            (0..2)
                .flat_map(|a| (0..2).map(move |b| (a, b)))
                .map(|(a, b)| table[a][b] * Scalar::int(c[a][b]))
                .sum()
        })
        .collect())
}

/// Shifts in `[klo, khi]` whose window sums include the maximum over the range.
pub fn candidate_shifts(structure: &Structure, n: i64, klo: i64, khi: i64) -> Result<Vec<i64>> {
    if khi < klo {
        return Err(Error::EmptyWindow { a: klo, b: khi });
    }
    match structure {
        Structure::General => {
            if khi - klo >= MAX_GENERAL_SHIFTS {
                return Err(Error::Budget(format!("{} shifts", khi - klo + 1)));
            }
            Ok((klo..=khi).collect())
        }
        Structure::Eventual { period, support, .. } => {
            let p = *period as i64;
            match support {
                None => {
                    if khi - klo < p {
                        return Ok((klo..=khi).collect());
                    }
                    let c = (-(p - 1) / 2).clamp(klo, khi - p + 1);
                    Ok((c..c + p).collect())
                }
                Some((lo, hi)) => {
                    let (core_lo, core_hi) = (lo - n + 1, *hi);
                    let mut out = Vec::new();
                    let left_hi = khi.min(core_lo - 1);
                    if left_hi >= klo {
                        out.extend(klo.max(left_hi - p + 1)..=left_hi);
                    }
                    let (a, b) = (klo.max(core_lo), khi.min(core_hi));
                    if a <= b {
                        if b - a >= MAX_GENERAL_SHIFTS {
                            return Err(Error::Budget(format!("{} shifts", b - a + 1)));
                        }
                        out.extend(a..=b);
                    }
                    let right_lo = klo.max(core_hi + 1);
                    if right_lo <= khi {
                        out.extend(right_lo..=khi.min(right_lo + p - 1));
                    }
                    Ok(out)
                }
            }
        }
    }
}

/// Maximiser of the window sum over `k ∈ [klo, khi]`; ties go to the smallest `|k|`, then the smaller `k`.
pub fn argmax_shift(phi: &WeightFunction, x: &[u8], klo: i64, khi: i64) -> Result<(i64, Scalar)> {
    let ks = candidate_shifts(&phi.structure(), x.len() as i64, klo, khi)?;
    let sums = shift_sums(phi, x, &ks)?;
    Ok(best(&ks, &sums))
}

fn best(ks: &[i64], sums: &[Scalar]) -> (i64, Scalar) {
    let mut out = (ks[0], sums[0]);
    for (&k, &s) in ks.iter().zip(sums).skip(1) {
        if s > out.1 || (s == out.1 && (k.abs(), k) < (out.0.abs(), out.0)) {
            out = (k, s);
        }
    }
    out
}

/// `sup_{k∈ℤ}` of the window sum, when the structure of `φ` makes it computable.
pub fn sup_shift(phi: &WeightFunction, x: &[u8]) -> Result<Option<Scalar>> {
    let st = phi.structure();
    if st == Structure::General {
        return Ok(None);
    }
    let ks = candidate_shifts(&st, x.len() as i64, -UNBOUNDED, UNBOUNDED)?;
    Ok(Some(best(&ks, &shift_sums(phi, x, &ks)?).1))
}

/// `log` of the norm of `L_{x_n}⋯L_{x_1}`: the lower end scans `|k| ≤ k_window`,
/// the upper end is present whenever the sup over all of `ℤ` is computable.
pub fn log_norm(phi: &WeightFunction, x: &Word, k_window: i64) -> Result<Bounds> {
    if k_window < 0 {
        return Err(Error::InvalidParameter("kWindow must be ≥ 0".into()));
    }
    let lower = argmax_shift(phi, x.symbols(), -k_window, k_window)?.1;
    let upper = sup_shift(phi, x.symbols())?;
    let meta = Meta {
        n: x.len() as u64,
        k_window,
        m: None,
    };
    Ok(Bounds::new(lower, upper, meta))
}

/// `max_{k mod L} (1/L) Σ_{i<L} base(w_{i mod |w|}, k+i)`, `L = lcm(period, |w|)`:
/// the exact growth rate per symbol of `w^∞` when `φ` is eventually periodic.
pub fn periodic_rate(structure: &Structure, w: &Word) -> Option<Scalar> {
    let Structure::Eventual { period, base, .. } = structure else {
        return None;
    };
    let l = lcm_usize(*period, w.len());
    (0..*period)
        .map(|k| {
            (0..l)
                .map(|i| base[(k + i) % period][w.at(i % w.len()) as usize])
                .sum::<Scalar>()
        })
        .reduce(Scalar::max)
        .map(|s| s.div_int(l as i64))
}

/// Per-symbol `log ρ(L_w) / |w|` via Gelfand's formula along `w^m`.
pub fn periodic_log_spectral_radius(phi: &WeightFunction, w: &Word, m: u64, k_window: i64) -> Result<Bounds> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be ≥ 1".into()));
    }
    let meta = Meta {
        n: w.len() as u64,
        k_window,
        m: Some(m),
    };
    let st = phi.structure();
    if let Some(rate) = periodic_rate(&st, w) {
        return Ok(Bounds::exact(rate, meta));
    }
    let x = w.repeat(m as usize);
    let total = argmax_shift(phi, x.symbols(), -k_window, k_window)?.1;
    Ok(Bounds::estimate(total.div_int(x.len() as i64), meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::Tabular;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    /// Independent oracle: direct evaluation point by point.
    fn naive(phi: &WeightFunction, x: &Word, k: i64) -> Scalar {
        (0..x.len())
            .map(|i| phi.eval(x.at(i), k + i as i64).unwrap())
            .sum()
    }

    #[test]
    fn constant_weights() {
        let phi = WeightFunction::constant(Scalar::ratio(3, 2));
        let x = w("01101");
        for k in [-7, 0, 12] {
            assert_eq!(window_sum(&phi, &x, k).unwrap(), Scalar::ratio(15, 2));
        }
        let b = log_norm(&phi, &x, 3).unwrap();
        assert!(b.is_exact());
        assert_eq!(b.lower, Scalar::ratio(15, 2));
    }

    #[test]
    fn single_override() {
        let phi = WeightFunction::Tabular(Tabular::constant(Scalar::ZERO).with(1, 0, Scalar::ONE));
        assert_eq!(window_sum(&phi, &w("11"), 0).unwrap(), Scalar::ONE);
    }

    #[test]
    fn period_one_scan() {
        let phi = WeightFunction::greedy_indicator(BiSequence::periodic(w("0")));
        let b = log_norm(&phi, &w("01"), 0).unwrap();
        assert!(b.is_exact());
        assert_eq!(b.lower, Scalar::ONE);
    }

    #[test]
    fn correlation_matches_pointwise() {
        let z = BiSequence::golden_sturmian();
        let table = [
            [Scalar::ratio(1, 3), Scalar::int(-2)],
            [Scalar::ratio(5, 7), Scalar::int(4)],
        ];
        let phi = WeightFunction::orbit_induced(z, table);
        let x: Word = "0110100110010110100101100110100111".repeat(5).parse().unwrap();
        let ks: Vec<i64> = (-150..150).collect();
        let fast = shift_sums(&phi, x.symbols(), &ks).unwrap();
        for (k, v) in ks.iter().zip(fast) {
            assert_eq!(v.as_exact().unwrap(), naive(&phi, &x, *k).as_exact().unwrap(), "k={k}");
        }
    }

    #[test]
    fn tabular_sup_is_found_beyond_window() {
        // the reward sits at index 40, outside a window of 5
        let phi = WeightFunction::Tabular(Tabular::constant(Scalar::ZERO).with(0, 40, Scalar::int(3)));
        let b = log_norm(&phi, &w("000"), 5).unwrap();
        assert_eq!(b.lower, Scalar::ZERO);
        assert_eq!(b.upper, Some(Scalar::int(3)));
        assert_eq!(b.certainty, Certainty::Bracket);
        let b = log_norm(&phi, &w("000"), 40).unwrap();
        assert!(b.is_exact());
    }

    #[test]
    fn exact_sup_agrees_with_wide_scan() {
        // oracle: brute-force scan over a range containing every distinct shift class
        let phi = WeightFunction::Tabular(
            Tabular {
                default: [Scalar::ratio(-1, 2), Scalar::ratio(1, 3)],
                overrides: Default::default(),
            }
            .with(0, -3, Scalar::int(2))
            .with(1, 2, Scalar::int(-5))
            .with(0, 6, Scalar::ratio(7, 4)),
        )
        .plus(WeightFunction::greedy_indicator(BiSequence::periodic(w("011"))));
        for x in Word::all(7) {
            let brute = (-60..60).map(|k| naive(&phi, &x, k)).fold(Scalar::int(-1000), Scalar::max);
            assert_eq!(sup_shift(&phi, x.symbols()).unwrap(), Some(brute), "{x}");
        }
    }

    #[test]
    fn periodic_rates() {
        let phi = WeightFunction::constant(Scalar::int(2));
        let b = periodic_log_spectral_radius(&phi, &w("011"), 4, 0).unwrap();
        assert_eq!(b.lower, Scalar::int(2));
        let phi = WeightFunction::greedy_indicator(BiSequence::periodic(w("01")));
        let b = periodic_log_spectral_radius(&phi, &w("01"), 1, 0).unwrap();
        assert!(b.is_exact());
        assert_eq!(b.lower, Scalar::ONE);
        // oracle: average of matches between (01)^∞ and z = (001)^∞ over the lcm window, all phases
        let z = w("001");
        let phi = WeightFunction::greedy_indicator(BiSequence::periodic(z.clone()));
        let oracle = (0..6)
            .map(|k| {
                let m = (0..6).filter(|&i| w("01").cyclic(i) == z.cyclic(i + k)).count();
                Scalar::ratio(m as i64, 6)
            })
            .fold(Scalar::ZERO, Scalar::max);
        assert_eq!(periodic_log_spectral_radius(&phi, &w("01"), 1, 0).unwrap().lower, oracle);
    }

    #[test]
    fn candidates_cover_range() {
        let st = Structure::Eventual {
            period: 3,
            base: vec![[Scalar::ZERO; 2]; 3],
            support: Some((10, 12)),
        };
        let c = candidate_shifts(&st, 4, -100, 100).unwrap();
        assert_eq!(c, vec![4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15]);
        let c = candidate_shifts(&st, 4, -100, -50).unwrap();
        assert_eq!(c, vec![-52, -51, -50]);
        let c = candidate_shifts(&st, 4, 40, 41).unwrap();
        assert_eq!(c, vec![40, 41]);
    }
}
