//! Finite-depth checks of the `ψ_A` perturbation: the pointwise upper bound
//! on its window sums and the growth it forces along the base sequence.

use serde::{Deserialize, Serialize};

use crate::cocycle::shift_sums;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symbolic::Word;
use crate::weights::{PerturbationPlan, WeightFunction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperReport {
    pub n: usize,
    pub k: i64,
    pub big_n: usize,
    /// `Σ_{i<n} ψ_A(x_i, k+i)`
    pub lhs: Scalar,
    /// Occurrences of `ω` in `x`.
    pub occurrences: u64,
    /// `2N(N−1) + N·occurrences`
    pub rhs: Scalar,
    pub holds: bool,
}

/// `Σ_{i<n} ψ_A(x_i, k+i) ≤ 2N(N−1) + N·#{i ≤ n−N : x shows ω at i}`.
pub fn check_upper_inequality(plan: &PerturbationPlan, x: &Word, k: i64) -> Result<UpperReport> {
    let big_n = plan.word_len();
    if x.len() <= big_n {
        return Err(Error::InvalidParameter(format!("|x| = {} must exceed N = {big_n}", x.len())));
    }
    let omega = plan.omega();
    let occ = (0..=x.len() - big_n)
        .filter(|&i| omega.occurs_at(x.symbols(), i))
        .count() as u64;
    let nn = big_n as i64;
    let lhs = plan.window_sum(x.symbols(), k);
    let rhs = Scalar::int(2 * nn * (nn - 1) + nn * occ as i64);
    Ok(UpperReport {
        n: x.len(),
        k,
        big_n,
        lhs,
        occurrences: occ,
        rhs,
        holds: lhs <= rhs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub j: usize,
    pub big_n: usize,
    pub n_j: u64,
    pub k_j: i64,
    pub a_count: u64,
    pub c_count: u64,
    pub lambda: Scalar,
    /// `(1/n_j) Σ φ(z_i, k_j+i)`
    pub base_average: Scalar,
    /// `(1/n_j) Σ ψ_A(z_i, k_j+i)`
    pub psi_average: Scalar,
    /// `(1/n_j) Σ (φ+λψ_A)(z_i, k_j+i)`
    pub lhs: Scalar,
    /// Empirical frequency of `ω` along `z_0 … z_{n_j−1}`.
    pub omega_frequency: Scalar,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_frequency: Option<Scalar>,
    /// `2N²(N−1)/n_j`
    pub slack_boundary: Scalar,
    /// `N²/2^j`
    pub slack_scale: Scalar,
    /// `base_average + λ(N·freq − slack_boundary − slack_scale)`
    pub rhs: Scalar,
    pub margin: Scalar,
}

/// Compare the perturbed window average at level `j` (1-based) against the
/// growth predicted from the frequency of `ω`.
pub fn check_growth(
    plan: &PerturbationPlan,
    phi: &WeightFunction,
    lambda: Scalar,
    j: usize,
    target_frequency: Option<Scalar>,
) -> Result<GrowthReport> {
    if j == 0 || j > plan.depth() {
        return Err(Error::InvalidParameter(format!("level {j} outside 1..={}", plan.depth())));
    }
    let lv = &plan.levels()[j - 1];
    let n = lv.n as i64;
    let big_n = plan.word_len() as i64;
    let z = &plan.prefix()[..lv.n as usize];
    let base = shift_sums(phi, z, &[lv.k])?[0];
    let psi = plan.window_sum(z, lv.k);
    let occ = plan.occurrences(lv.n) as i64;
    let freq = Scalar::ratio(occ, n);
    let slack_boundary = Scalar::ratio(2 * big_n * big_n * (big_n - 1), n);
    let slack_scale = Scalar::ratio(big_n * big_n, 1i64 << j);
    let base_average = base.div_int(n);
    let psi_average = psi.div_int(n);
    let lhs = base_average + lambda * psi_average;
    let rhs = base_average + lambda * (Scalar::int(big_n) * freq - slack_boundary - slack_scale);
    Ok(GrowthReport {
        j,
        big_n: big_n as usize,
        n_j: lv.n,
        k_j: lv.k,
        a_count: lv.a_count,
        c_count: lv.c_count,
        lambda,
        base_average,
        psi_average,
        lhs,
        omega_frequency: freq,
        target_frequency,
        slack_boundary,
        slack_scale,
        rhs,
        margin: lhs - rhs,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanInvariants {
    /// `n_1 = N` and `(Σ_{i<j} n_i)/n_j < 2^{−(j+1)}` with `n_j` least such.
    pub scales: bool,
    pub b_disjoint: bool,
    pub a_within_b: bool,
    /// `A_j = C_j \ ⋃_{i<j} B_i`
    pub a_is_c_minus_earlier: bool,
}

impl PlanInvariants {
    pub fn all(&self) -> bool {
        self.scales && self.b_disjoint && self.a_within_b && self.a_is_c_minus_earlier
    }
}

/// Recheck the set recursion of a plan member by member (small plans only).
pub fn plan_invariants(plan: &PerturbationPlan) -> PlanInvariants {
    let levels = plan.levels();
    let big_n = plan.word_len() as u64;
    let mut scales = levels[0].n == big_n;
    let mut before = 0u64;
    for (idx, lv) in levels.iter().enumerate() {
        if idx > 0 {
            let pow = 1u64 << (idx + 2);
            scales &= before * pow < lv.n && before * pow >= lv.n - 1;
        }
        before += lv.n;
    }
    let spans: Vec<(i64, i64)> = levels
        .iter()
        .map(|lv| (lv.k, lv.k + lv.n as i64 - big_n as i64))
        .collect();
    let mut b_disjoint = true;
    let mut a_within_b = true;
    let mut a_is_c_minus_earlier = true;
    for (j, lv) in levels.iter().enumerate() {
        let (lo, hi) = spans[j];
        for ell in lo..=hi {
            let in_b = lv.b_contains(ell);
            let earlier = levels[..j].iter().any(|p| p.b_contains(ell));
            // B_j is the span minus earlier B's, so membership must be exclusive
            if in_b == earlier {
                b_disjoint = false;
            }
            let in_a = plan.level_of(ell) == Some(j);
            if in_a && !in_b {
                a_within_b = false;
            }
            if in_a != (plan.in_c(j, ell) && !earlier) {
                a_is_c_minus_earlier = false;
            }
        }
        for b in &lv.b {
            if b.0 < lo || b.1 > hi {
                b_disjoint = false;
            }
        }
    }
    PlanInvariants {
        scales,
        b_disjoint,
        a_within_b,
        a_is_c_minus_earlier,
    }
}
