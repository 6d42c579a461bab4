//! Dense two-phase simplex with Bland's rule, over exact rationals or `f64`.
//!
//! Solves `min c·x` subject to `A x = b`, `x ≥ 0`.

use std::fmt::Display;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub trait Field: Clone + Display + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn less(&self, o: &Self) -> bool;
}

impl Field for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn less(&self, o: &Self) -> bool {
        self < o
    }
}

/// Feasibility and optimality tolerance of the float path.
pub const FLOAT_TOL: f64 = 1e-9;

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        self.abs() <= FLOAT_TOL
    }
    fn is_positive(&self) -> bool {
        *self > FLOAT_TOL
    }
    fn is_negative(&self) -> bool {
        *self < -FLOAT_TOL
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn less(&self, o: &Self) -> bool {
        *self < *o - FLOAT_TOL
    }
}

pub fn big(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Clone, Debug)]
pub struct Solution<F> {
    pub value: F,
    pub x: Vec<F>,
}

struct Tableau<F> {
    rows: Vec<Vec<F>>,
    obj: Vec<F>,
    basis: Vec<usize>,
    /// Columns allowed to enter.
    active: usize,
}

impl<F: Field> Tableau<F> {
    fn rhs(&self) -> usize {
        self.obj.len() - 1
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.rows[r][j].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.div(&p);
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[j].is_zero() {
                continue;
            }
            let f = row[j].clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                *v = v.sub(&f.mul(pv));
            }
        }
        if !self.obj[j].is_zero() {
            let f = self.obj[j].clone();
            for (v, pv) in self.obj.iter_mut().zip(&prow) {
                *v = v.sub(&f.mul(pv));
            }
        }
        self.basis[r] = j;
    }

    /// Bland's rule iterations until optimal.
    fn optimise(&mut self) -> Result<()> {
        let rhs = self.rhs();
        loop {
            let Some(j) = (0..self.active).find(|&j| self.obj[j].is_negative()) else {
                return Ok(());
            };
            let mut leave: Option<(usize, F)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[j].is_positive() {
                    continue;
                }
                let ratio = row[rhs].div(&row[j]);
                let better = match &leave {
                    None => true,
                    Some((l, best)) => {
                        ratio.less(best) || (!best.less(&ratio) && self.basis[i] < self.basis[*l])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, j),
                None => return Err(Error::Unsupported("unbounded linear program".into())),
            }
        }
    }
}

/// `min c·x` s.t. `A x = b`, `x ≥ 0`.
pub fn solve<F: Field>(a: &[Vec<F>], b: &[F], c: &[F]) -> Result<Solution<F>> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter("inconsistent LP dimensions".into()));
    }
    let width = n + m + 1;
    let mut rows = Vec::with_capacity(m);
    for (i, (ar, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_negative();
        let mut row: Vec<F> = Vec::with_capacity(width);
        for v in ar {
            row.push(if flip { F::zero().sub(v) } else { v.clone() });
        }
        for k in 0..m {
            row.push(if k == i { F::one() } else { F::zero() });
        }
        row.push(if flip { F::zero().sub(bi) } else { bi.clone() });
        rows.push(row);
    }
    // phase one: minimise the artificial total
    let mut obj = vec![F::zero(); width];
    for row in &rows {
        for j in 0..n {
            obj[j] = obj[j].sub(&row[j]);
        }
        obj[width - 1] = obj[width - 1].sub(&row[width - 1]);
    }
    let mut t = Tableau {
        rows,
        obj,
        basis: (n..n + m).collect(),
        active: n,
    };
    t.optimise()?;
    if t.obj[width - 1].is_negative() {
        return Err(Error::Infeasible);
    }
    // drive zero-level artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => {
                    t.pivot(i, j);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }
    // phase two
    let rhs = width - 1;
    let mut obj = vec![F::zero(); width];
    obj[..n].clone_from_slice(c);
    for (row, &bv) in t.rows.iter().zip(&t.basis) {
        let cb = c[bv].clone();
        if cb.is_zero() {
            continue;
        }
        for (o, v) in obj.iter_mut().zip(row) {
            *o = o.sub(&cb.mul(v));
        }
    }
    t.obj = obj;
    t.optimise()?;
    let mut x = vec![F::zero(); n];
    for (row, &bv) in t.rows.iter().zip(&t.basis) {
        x[bv] = row[rhs].clone();
    }
    Ok(Solution {
        value: F::zero().sub(&t.obj[rhs]),
        x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_transport() {
        // two sources (1/3, 2/3), two sinks (1/2, 1/2), off-diagonal cost 1
        let a = vec![
            vec![1, 1, 0, 0],
            vec![0, 0, 1, 1],
            vec![1, 0, 1, 0],
            vec![0, 1, 0, 1],
        ]
        .into_iter()
        .map(|r| r.into_iter().map(|v| big(v, 1)).collect())
        .collect::<Vec<Vec<BigRational>>>();
        let b = vec![big(1, 3), big(2, 3), big(1, 2), big(1, 2)];
        let c = vec![big(0, 1), big(1, 1), big(1, 1), big(0, 1)];
        let s = solve(&a, &b, &c).unwrap();
        assert_eq!(s.value, big(1, 6));
    }

    #[test]
    fn infeasible_detected() {
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let b = vec![1.0, 2.0];
        assert!(matches!(solve(&a, &b, &[0.0, 0.0]), Err(Error::Infeasible)));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, which cycles under the textbook largest-coefficient rule
        let a: Vec<Vec<BigRational>> = vec![
            vec![big(1, 4), big(-8, 1), big(-1, 1), big(9, 1), big(1, 1), big(0, 1), big(0, 1)],
            vec![big(1, 2), big(-12, 1), big(-1, 2), big(3, 1), big(0, 1), big(1, 1), big(0, 1)],
            vec![big(0, 1), big(0, 1), big(1, 1), big(0, 1), big(0, 1), big(0, 1), big(1, 1)],
        ];
        let b = vec![big(0, 1), big(0, 1), big(1, 1)];
        let c = vec![big(-3, 4), big(20, 1), big(-1, 2), big(6, 1), big(0, 1), big(0, 1), big(0, 1)];
        let s = solve(&a, &b, &c).unwrap();
        assert_eq!(s.value, big(-5, 4));
    }

    #[test]
    fn float_matches_exact() {
        let a = vec![vec![2.0, 1.0, 1.0, 0.0], vec![1.0, 3.0, 0.0, 1.0]];
        let b = vec![4.0, 6.0];
        let c = vec![-1.0, -1.0, 0.0, 0.0];
        let s = solve(&a, &b, &c).unwrap();
        // optimum at x = (6/5, 8/5)
        assert!((s.value + 2.8).abs() < 1e-9);
    }
}
