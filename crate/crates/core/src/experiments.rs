//! End-to-end reproductions: the Sturmian gap between the joint spectral
//! radius and periodic products, the exact formula along a uniformly greedy
//! periodic sequence, and the two-frequency block sequence on which the
//! subordination principle fails.

use serde::{Deserialize, Serialize};

use crate::cocycle::{self, periodic_log_spectral_radius};
use crate::dbar::dbar_periodic_exact;
use crate::error::{Error, Result};
use crate::jsr::jsr_upper;
use crate::lyapunov::{lyapunov_mc, lyapunov_periodic_exact, McEstimate};
use crate::measures::MeasureSpec;
use crate::par;
use crate::scalar::Scalar;
use crate::symbolic::{block_sequence, BiSequence, BlockKind, BlockSystem, Rotation, Word};
use crate::weights::WeightFunction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GurvitsConfig {
    pub gamma: Rotation,
    pub alpha: f64,
    /// Length of the greedy window along the complement sequence.
    pub n: usize,
    pub max_word_len: usize,
    /// Repetitions of each word; `None` means the least `m` with `|w|·m ≥ min_product_len`.
    pub m: Option<u64>,
    pub min_product_len: usize,
    pub k_window: i64,
}

impl Default for GurvitsConfig {
    fn default() -> Self {
        GurvitsConfig {
            gamma: Rotation::golden(),
            alpha: 0.5,
            n: 10_000,
            max_word_len: 10,
            m: None,
            min_product_len: 10_000,
            k_window: 4096,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthRow {
    pub len: usize,
    pub words: usize,
    pub best_word: Word,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GurvitsReport {
    pub config: GurvitsConfig,
    /// `(1/n) log‖L_x‖` for `x` the complement of `z_0 … z_{n−1}`.
    pub jsr_lower_estimate: f64,
    /// Best per-symbol `log ρ(L_w)/|w|` estimate over all words up to `max_word_len`.
    pub best_word_rate: f64,
    pub best_word: Word,
    pub target_half_log_alpha: f64,
    /// `jsr_lower_estimate − best_word_rate`
    pub gap: f64,
    /// `best_word_rate − ½ log α`
    pub best_word_excess: f64,
    pub per_length: Vec<LengthRow>,
    pub fibonacci: Vec<LengthRow>,
}

pub fn run_gurvits(cfg: &GurvitsConfig) -> Result<GurvitsReport> {
    if cfg.n == 0 || cfg.max_word_len == 0 {
        return Err(Error::InvalidParameter("n and max_word_len must be ≥ 1".into()));
    }
    let z = BiSequence::sturmian(cfg.gamma, 0);
    let phi = WeightFunction::gurvits(z.clone(), cfg.alpha)?;
    let greedy = z.window(0, cfg.n as i64 - 1)?.complement();
    let lower = cocycle::log_norm(&phi, &greedy, cfg.k_window)?.lower.to_f64() / cfg.n as f64;

    let words = Word::lyndon_up_to(cfg.max_word_len);
    let rates = par::map(words.len(), |i| -> Result<f64> {
        let w = &words[i];
        let m = cfg.m.unwrap_or_else(|| cfg.min_product_len.div_ceil(w.len()).max(1) as u64);
        Ok(periodic_log_spectral_radius(&phi, w, m, cfg.k_window)?.lower.to_f64())
    });
    let rates: Vec<f64> = rates.into_iter().collect::<Result<_>>()?;
    let mut per_length: Vec<LengthRow> = Vec::new();
    for (w, &r) in words.iter().zip(&rates) {
        match per_length.last_mut() {
            Some(row) if row.len == w.len() => {
                row.words += 1;
                if r > row.rate {
                    row.rate = r;
                    row.best_word = w.clone();
                }
            }
            _ => per_length.push(LengthRow {
                len: w.len(),
                words: 1,
                best_word: w.clone(),
                rate: r,
            }),
        }
    }
    let best = per_length
        .iter()
        .fold(None::<&LengthRow>, |b, r| match b {
            Some(b) if b.rate >= r.rate => Some(b),
            _ => Some(r),
        })
        .unwrap()
        .clone();
    let mut fib = vec![1usize, 2];
    while fib[fib.len() - 1] + fib[fib.len() - 2] <= cfg.max_word_len {
        fib.push(fib[fib.len() - 1] + fib[fib.len() - 2]);
    }
    let fibonacci = per_length.iter().filter(|r| fib.contains(&r.len)).cloned().collect();
    let target = 0.5 * cfg.alpha.ln();
    Ok(GurvitsReport {
        config: cfg.clone(),
        jsr_lower_estimate: lower,
        best_word_rate: best.rate,
        best_word: best.best_word,
        target_half_log_alpha: target,
        gap: lower - best.rate,
        best_word_excess: best.rate - target,
        per_length,
        fibonacci,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TechRow {
    pub mu: Word,
    pub lyapunov: Scalar,
    pub one_minus_dbar: Scalar,
    pub difference: Scalar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TechReport {
    pub z: Word,
    pub test_periods: usize,
    pub rows: Vec<TechRow>,
    pub identity_holds: bool,
}

/// Along `z = w^∞` with weight 1 on `z` and 0 off it, compare `Λ(φ, μ)` with
/// `1 − d̄(μ, μ_z)` for every periodic `μ` of period at most `test_periods`.
pub fn run_tech_strictly(z: &Word, test_periods: usize) -> Result<TechReport> {
    if test_periods == 0 {
        return Err(Error::InvalidParameter("test_periods must be ≥ 1".into()));
    }
    let phi = WeightFunction::greedy_indicator(BiSequence::periodic(z.clone()));
    let mut rows = Vec::new();
    for mu in Word::lyndon_up_to(test_periods) {
        let lyapunov = lyapunov_periodic_exact(&phi, &mu)?;
        let one_minus_dbar = Scalar::ONE - Scalar::Exact(dbar_periodic_exact(&mu, z));
        rows.push(TechRow {
            mu,
            lyapunov,
            one_minus_dbar,
            difference: lyapunov - one_minus_dbar,
        });
    }
    let identity_holds = rows
        .iter()
        .all(|r| r.difference.is_exact() && r.difference == Scalar::ZERO);
    Ok(TechReport {
        z: z.clone(),
        test_periods,
        rows,
        identity_holds,
    })
}

/// The exact formula for every `z` of period at most `max_z_period` (one per orbit).
pub fn run_tech_strictly_all(max_z_period: usize, test_periods: usize) -> Result<Vec<TechReport>> {
    let zs = Word::lyndon_up_to(max_z_period);
    par::map(zs.len(), |i| run_tech_strictly(&zs[i], test_periods))
        .into_iter()
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NomatherConfig {
    /// `a_1, a_2, …` in `B_{j+1} = B_j^{a_j} C_j`, `C_{j+1} = C_j^{a_j} B_j`.
    pub exponents: Vec<u64>,
    /// Block level whose `B` and `C` blocks define the two empirical measures.
    pub j: usize,
    /// Window length for the greedy value along `z`.
    pub n: usize,
    pub mc_len: usize,
    pub samples: usize,
    pub k_window: i64,
    pub seed: u64,
}

impl Default for NomatherConfig {
    fn default() -> Self {
        NomatherConfig {
            exponents: BlockSystem::default_exponents(5),
            j: 3,
            n: 100_000,
            mc_len: 2000,
            samples: 64,
            k_window: 4096,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NomatherReport {
    pub config: NomatherConfig,
    pub depth: usize,
    pub block_len: u64,
    /// Start of the level-`j` `C` block defining `μ̂₁`.
    pub c_block_start: i64,
    /// Start of the level-`j` `B` block defining `μ̂₂`.
    pub b_block_start: i64,
    pub f1_hat: Scalar,
    pub f2_hat: Scalar,
    pub frequency_gap: Scalar,
    /// `max (1/n) Σ φ(z_i, i)` over length-`n` windows of the first level-`(j+1)` `C` block.
    pub greedy_value: Scalar,
    pub greedy_window_start: i64,
    /// `1 + f̂₁`
    pub target: Scalar,
    pub greedy_deviation: Scalar,
    pub lambda_mu2: McEstimate,
    pub lambda_mu1: McEstimate,
    /// `Λ(φ, μ) ≤ 1 + μ([1])` for every `μ`, since `φ(a, i) ≤ 1 + a`.
    pub envelope_mu2: Scalar,
    /// `1 + f̂₁ − Λ-estimate(μ̂₂)`
    pub margin: f64,
}

pub fn run_nomather(cfg: &NomatherConfig) -> Result<NomatherReport> {
    let depth = cfg.j + 2;
    if cfg.j == 0 || depth > cfg.exponents.len() {
        return Err(Error::InvalidParameter(format!(
            "level j = {} needs j ≥ 1 and at least j + 2 exponents",
            cfg.j
        )));
    }
    let one = Word::from_vec_unchecked(vec![1]);
    let zero = Word::from_vec_unchecked(vec![0]);
    let z = block_sequence(zero, one, &cfg.exponents, depth)?;
    let BiSequence::BlockRecursive(bs) = &z else { unreachable!() };
    let phi = WeightFunction::two_one_zero(z.clone());
    let block_len = bs.system().len(cfg.j, BlockKind::B);
    let find = |level, kind| {
        bs.find_block(level, kind, 0)
            .ok_or_else(|| Error::InvalidParameter(format!("no level-{level} block after 0")))
    };
    let c_start = find(cfg.j, BlockKind::C)?;
    let b_start = find(cfg.j, BlockKind::B)?;
    let mu1 = MeasureSpec::empirical(z.clone(), c_start, block_len);
    let mu2 = MeasureSpec::empirical(z.clone(), b_start, block_len);
    let f1 = mu1.one_frequency()?;
    let f2 = mu2.one_frequency()?;

    let g_start = find(cfg.j + 1, BlockKind::C)?;
    let g_len = bs.system().len(cfg.j + 1, BlockKind::C) as usize;
    if g_len < cfg.n || cfg.n == 0 {
        return Err(Error::InvalidParameter(format!(
            "greedy window {} must lie in a block of length {g_len}",
            cfg.n
        )));
    }
    let syms = z.fill(g_start, g_start + g_len as i64 - 1)?;
    let mut ones: usize = syms[..cfg.n].iter().map(|&s| s as usize).sum();
    let (mut best, mut best_at) = (ones, 0usize);
    for s in 1..=g_len - cfg.n {
        ones = ones + syms[s + cfg.n - 1] as usize - syms[s - 1] as usize;
        if ones > best {
            best = ones;
            best_at = s;
        }
    }
    let greedy = Scalar::ratio((cfg.n + best) as i64, cfg.n as i64);
    let target = Scalar::ONE + f1;

    let lambda_mu2 = lyapunov_mc(&phi, &mu2, cfg.mc_len, cfg.samples, cfg.k_window, cfg.seed)?;
    let lambda_mu1 = lyapunov_mc(&phi, &mu1, cfg.mc_len, cfg.samples, cfg.k_window, cfg.seed)?;
    Ok(NomatherReport {
        config: cfg.clone(),
        depth,
        block_len,
        c_block_start: c_start,
        b_block_start: b_start,
        f1_hat: f1,
        f2_hat: f2,
        frequency_gap: f1 - f2,
        greedy_value: greedy,
        greedy_window_start: g_start + best_at as i64,
        target,
        greedy_deviation: (greedy - target).abs(),
        margin: target.to_f64() - lambda_mu2.mean,
        lambda_mu2,
        lambda_mu1,
        envelope_mu2: Scalar::ONE + f2,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub max_periodic_lyapunov: Scalar,
    pub argmax_word: Word,
    pub jsr_upper: Scalar,
    pub n: usize,
    pub gap: Scalar,
}

/// `max_{|w| ≤ max_period} Λ(φ, μ_w) ≤ log ϱ ≤ jsr_upper(φ, n)`, with the gap.
pub fn variational_sandwich(phi: &WeightFunction, max_period: usize, n: usize) -> Result<SandwichReport> {
    let mut best: Option<(Scalar, Word)> = None;
    for w in Word::lyndon_up_to(max_period) {
        let v = lyapunov_periodic_exact(phi, &w)?;
        if best.as_ref().is_none_or(|b| v > b.0) {
            best = Some((v, w));
        }
    }
    let (lower, word) = best.ok_or_else(|| Error::InvalidParameter("max_period must be ≥ 1".into()))?;
    let upper = jsr_upper(phi, n, 0)?.value;
    Ok(SandwichReport {
        max_periodic_lyapunov: lower,
        argmax_word: word,
        jsr_upper: upper,
        n,
        gap: upper - lower,
    })
}

/// For `Z` the orbit of `w^∞` and `f = χ_[1]`: the largest `ν([1])` over
/// periodic measures carried by `Z`, and the largest phase average of ones in
/// `w`. The two agree.
pub fn orbit_one_frequency(w: &Word) -> Result<(Scalar, Scalar)> {
    let root = w.primitive_root();
    let mut measure_side: Option<Scalar> = None;
    for u in Word::lyndon_up_to(root.len()) {
        let carried = u.len() == root.len() && (0..root.len()).any(|r| root.rotate(r) == u);
        if carried {
            let v = MeasureSpec::periodic(u).one_frequency()?;
            measure_side = Some(measure_side.map_or(v, |m| m.max(v)));
        }
    }
    let p = w.len() as i64;
    let phase_side = (0..p)
        .map(|k| Scalar::ratio((0..p).map(|i| w.cyclic(k + i) as i64).sum(), p))
        .fold(Scalar::ZERO, Scalar::max);
    Ok((measure_side.unwrap(), phase_side))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn tech_strictly_small_cases() {
        let r = run_tech_strictly(&w("0"), 2).unwrap();
        let one = r.rows.iter().find(|r| r.mu == w("1")).unwrap();
        assert_eq!(one.lyapunov, Scalar::ZERO);
        assert_eq!(one.one_minus_dbar, Scalar::ZERO);
        let alt = r.rows.iter().find(|r| r.mu == w("01")).unwrap();
        assert_eq!(alt.lyapunov, Scalar::ratio(1, 2));
        assert!(r.identity_holds);
    }

    #[test]
    fn gurvits_small() {
        let cfg = GurvitsConfig {
            n: 2000,
            max_word_len: 5,
            min_product_len: 2000,
            k_window: 512,
            ..Default::default()
        };
        let r = run_gurvits(&cfg).unwrap();
        assert!(r.jsr_lower_estimate >= -0.01);
        assert!(r.best_word_rate <= r.target_half_log_alpha + 0.05);
        assert_eq!(r.per_length.len(), 5);
        assert_eq!(r.fibonacci.iter().map(|r| r.len).collect::<Vec<_>>(), vec![1, 2, 3, 5]);
    }

    #[test]
    fn gurvits_near_one() {
        let cfg = GurvitsConfig {
            alpha: 0.999_999,
            n: 500,
            max_word_len: 3,
            min_product_len: 500,
            k_window: 64,
            ..Default::default()
        };
        let r = run_gurvits(&cfg).unwrap();
        assert!(r.gap.abs() < 1e-5);
        assert!(r.target_half_log_alpha.abs() < 1e-5);
    }

    #[test]
    fn orbit_frequency_identity() {
        for len in 1..=6 {
            for word in Word::all(len) {
                let (a, b) = orbit_one_frequency(&word).unwrap();
                assert_eq!(a, b, "{word}");
            }
        }
    }

    #[test]
    fn sandwich_on_random_periodic_weights() {
        let phi = WeightFunction::orbit_induced(
            BiSequence::periodic(w("0110")),
            [[Scalar::ratio(1, 2), Scalar::ratio(-1, 3)], [Scalar::ZERO, Scalar::ratio(2, 5)]],
        );
        let r = variational_sandwich(&phi, 6, 12).unwrap();
        assert!(r.gap >= Scalar::ZERO);
    }
}
