//! `Λ(φ, μ) = inf_n (1/n) ∫ sup_k Σ_{i<n} φ(x_i, k+i) dμ(x)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cocycle::{self, candidate_shifts, periodic_rate, shift_sums};
use crate::error::{Error, Result};
use crate::measures::MeasureSpec;
use crate::par;
use crate::scalar::Scalar;
use crate::symbolic::Word;
use crate::weights::{Structure, WeightFunction};

pub const MAX_EXPECTATION_LEN: usize = 24;

/// Exact `Λ(φ, μ_w)` for the periodic measure on the orbit of `w^∞`.
pub fn lyapunov_periodic_exact(phi: &WeightFunction, w: &Word) -> Result<Scalar> {
    periodic_rate(&phi.structure(), w).ok_or(Error::NotPeriodic)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationBound {
    /// `(1/n) Σ_x μ([x]) log‖L_x‖` at the requested `n`.
    pub value: Scalar,
    pub n: usize,
    pub k_window: i64,
    /// True when every norm is exact, making each value an upper bound for `Λ`.
    pub certified: bool,
    /// The same quantity at up to three trailing lengths `n−2, n−1, n`.
    pub trail: Vec<(usize, Scalar)>,
}

fn expectation(phi: &WeightFunction, mu: &MeasureSpec, n: usize, k_window: i64) -> Result<(Scalar, bool)> {
    let st = phi.structure();
    let exact = st != Structure::General;
    let ks = if exact {
        candidate_shifts(&st, n as i64, -cocycle::UNBOUNDED, cocycle::UNBOUNDED)?
    } else {
        candidate_shifts(&st, n as i64, -k_window, k_window)?
    };
    let cyl = mu.cylinders(n)?;
    let norms = par::map(cyl.len(), |i| {
        shift_sums(phi, cyl[i].0.symbols(), &ks).map(|v| v.into_iter().fold(Scalar::Float(f64::NEG_INFINITY), Scalar::max))
    });
    let mut total = Scalar::ZERO;
    for ((_, mass), norm) in cyl.iter().zip(norms) {
        total = total + *mass * norm?;
    }
    Ok((total.div_int(n as i64), exact))
}

/// Expectation of the `n`-step norm: certifies `Λ(φ, μ) ≤ value` when norms are exact.
pub fn lyapunov_upper(phi: &WeightFunction, mu: &MeasureSpec, n: usize, k_window: i64) -> Result<ExpectationBound> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be ≥ 1".into()));
    }
    if n > MAX_EXPECTATION_LEN {
        return Err(Error::Budget(format!("cylinders of length {n}")));
    }
    let mut trail = Vec::new();
    let mut certified = true;
    for m in n.saturating_sub(2).max(1)..=n {
        let (v, exact) = expectation(phi, mu, m, k_window)?;
        certified &= exact;
        trail.push((m, v));
    }
    Ok(ExpectationBound {
        value: trail.last().unwrap().1,
        n,
        k_window,
        certified,
        trail,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// `mean − 3·SE`, `mean + 3·SE`: a soft bracket, not a certified bound.
    pub soft_lower: f64,
    pub soft_upper: f64,
    pub n: usize,
    pub samples: usize,
    pub k_window: i64,
    pub seed: u64,
    /// Sample norms were scanned over a finite shift window only.
    pub one_sided: bool,
}

/// Monte-Carlo estimate of `Λ(φ, μ)` from `(1/n) log‖L_x‖` at sampled `x`.
///
/// Sample `s` draws from its own ChaCha stream, so results do not depend on
/// the number of worker threads. For empirical measures the shift window is
/// centred on the sample's position in the source sequence.
pub fn lyapunov_mc(
    phi: &WeightFunction,
    mu: &MeasureSpec,
    n: usize,
    samples: usize,
    k_window: i64,
    seed: u64,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameter("zero samples".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be ≥ 1".into()));
    }
    let st = phi.structure();
    let exact = st != Structure::General;
    let rates = par::map(samples, |s| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        let (x, anchor) = mu.sample_anchored(n, &mut rng)?;
        let ks = if exact {
            candidate_shifts(&st, n as i64, -cocycle::UNBOUNDED, cocycle::UNBOUNDED)?
        } else {
            candidate_shifts(&st, n as i64, anchor - k_window, anchor + k_window)?
        };
        let best = shift_sums(phi, x.symbols(), &ks)?
            .into_iter()
            .fold(Scalar::Float(f64::NEG_INFINITY), Scalar::max);
        Ok(best.to_f64() / n as f64)
    });
    let rates: Vec<f64> = rates.into_iter().collect::<Result<_>>()?;
    let k = rates.len() as f64;
    // centred on the first sample so identical samples give exactly zero variance
    let r0 = rates[0];
    let mean = r0 + rates.iter().map(|r| r - r0).sum::<f64>() / k;
    let var = if rates.len() > 1 {
        rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    let se = (var / k).sqrt();
    Ok(McEstimate {
        mean,
        std_error: se,
        soft_lower: mean - 3.0 * se,
        soft_upper: mean + 3.0 * se,
        n,
        samples,
        k_window,
        seed,
        one_sided: !exact,
    })
}
