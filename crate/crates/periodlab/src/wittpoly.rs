//! Universal Witt polynomials built by ghost-solving over exact rationals.
//!
//! The table builder solves for the addition, multiplication, negation and
//! Frobenius polynomials from the ghost equations and verifies that every
//! coefficient is an integer before handing the table out. Nothing here is
//! special-cased per prime; integrality is a checked outcome, not an input.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Sparse multivariate polynomial over Q. Keys are exponent vectors of a
/// fixed length; the zero polynomial is the empty map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPoly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u16>, BigRational>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn var(nvars: usize, idx: usize) -> Self {
        let mut key = vec![0u16; nvars];
        key[idx] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(key, BigRational::one());
        MPoly { nvars, terms }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0u16; nvars], c);
        }
        MPoly { nvars, terms }
    }

    fn insert(&mut self, key: Vec<u16>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return MPoly::zero(self.nvars);
        }
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut out = MPoly::zero(self.nvars);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let key: Vec<u16> = ka.iter().zip(kb).map(|(a, b)| a + b).collect();
                out.insert(key, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = MPoly::constant(self.nvars, BigRational::one());
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.denom().is_one())
    }

    /// Evaluate over BigInt arguments (exact, for ghost oracles).
    pub fn eval_bigint(&self, args: &[BigInt]) -> BigInt {
        assert_eq!(args.len(), self.nvars);
        assert!(self.is_integral(), "evaluation requires integral coefficients");
        let mut acc = BigInt::zero();
        for (k, c) in &self.terms {
            let mut t = c.numer().clone();
            for (x, &e) in args.iter().zip(k) {
                for _ in 0..e {
                    t *= x;
                }
            }
            acc += t;
        }
        acc
    }
}

/// Ghost polynomial w_n in a block of variables starting at `offset`:
/// w_n = sum_{i<=n} p^i * X_{offset+i}^(p^(n-i)).
pub fn ghost_poly(p: u64, nvars: usize, offset: usize, n: usize) -> MPoly {
    let mut acc = MPoly::zero(nvars);
    for i in 0..=n {
        let coeff = BigRational::from_integer(BigInt::from(p).pow(i as u32));
        let exp = (p as u32).pow((n - i) as u32);
        let term = MPoly::var(nvars, offset + i).pow(exp).scale(&coeff);
        acc = acc.add(&term);
    }
    acc
}

/// Universal polynomial table for truncated Witt vectors of length n.
///
/// All entries have verified integer coefficients.
/// `sum[k]`, `prod[k]`, `neg[k]` give the k-th component of x + y, x * y, -x
/// in variables X_0..X_{n-1}, Y_0..Y_{n-1} (negation uses the X block only).
/// `frob[k]` gives the k-th component of F(x) for k <= n - 2 (Frobenius
/// shortens a truncated vector by one slot).
#[derive(Clone, Debug)]
pub struct WittTable {
    pub p: u64,
    pub n: usize,
    pub sum: Vec<MPoly>,
    pub prod: Vec<MPoly>,
    pub neg: Vec<MPoly>,
    pub frob: Vec<MPoly>,
}

fn solve_family<FRhs>(p: u64, n: usize, _nvars: usize, rhs: FRhs) -> Result<Vec<MPoly>>
where
    FRhs: Fn(usize) -> MPoly,
{
    let mut solved: Vec<MPoly> = Vec::with_capacity(n);
    for k in 0..n {
        let mut target = rhs(k);
        for (i, prev) in solved.iter().enumerate().take(k) {
            let exp = (p as u32).pow((k - i) as u32);
            let coeff = BigRational::from_integer(BigInt::from(p).pow(i as u32));
            target = target.sub(&prev.pow(exp).scale(&coeff));
        }
        let inv_pk = BigRational::new(BigInt::one(), BigInt::from(p).pow(k as u32));
        let poly = target.scale(&inv_pk);
        if !poly.is_integral() {
            return Err(Error::Params(format!(
                "ghost solve produced non-integral component at level {}",
                k
            )));
        }
        solved.push(poly);
    }
    Ok(solved)
}

/// Build the universal table for prime p and length n by ghost-solving.
pub fn build_witt_table(p: u64, n: usize) -> Result<WittTable> {
    if !matches!(p, 2 | 3 | 5) {
        return Err(Error::Params(format!("unsupported prime {}", p)));
    }
    if n == 0 || n > 5 {
        return Err(Error::Params(format!("Witt length {} outside desk scale 1..=5", n)));
    }
    let two = 2 * n;
    let sum = solve_family(p, n, two, |k| {
        ghost_poly(p, two, 0, k).add(&ghost_poly(p, two, n, k))
    })?;
    let prod = solve_family(p, n, two, |k| {
        ghost_poly(p, two, 0, k).mul(&ghost_poly(p, two, n, k))
    })?;
    let neg = solve_family(p, n, n, |k| {
        ghost_poly(p, n, 0, k).scale(&-BigRational::one())
    })?;
    let frob = if n >= 2 {
        solve_family(p, n - 1, n, |k| ghost_poly(p, n, 0, k + 1))?
    } else {
        Vec::new()
    };
    Ok(WittTable { p, n, sum, prod, neg, frob })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn s1_matches_closed_form() {
        // S_1 = X_1 + Y_1 - (1/p)((X_0+Y_0)^p - X_0^p - Y_0^p), expanded integrally.
        for p in [2u64, 3, 5] {
            let t = build_witt_table(p, 2).unwrap();
            let nv = 4;
            let x0 = MPoly::var(nv, 0);
            let x1 = MPoly::var(nv, 1);
            let y0 = MPoly::var(nv, 2);
            let y1 = MPoly::var(nv, 3);
            let inv_p = BigRational::new(BigInt::one(), BigInt::from(p));
            let closed = x1.add(&y1).sub(
                &x0.add(&y0)
                    .pow(p as u32)
                    .sub(&x0.pow(p as u32))
                    .sub(&y0.pow(p as u32))
                    .scale(&inv_p),
            );
            assert_eq!(t.sum[1], closed, "p = {}", p);
        }
    }

    #[test]
    fn s1_p2_is_x1_plus_y1_minus_x0y0() {
        let t = build_witt_table(2, 2).unwrap();
        let nv = 4;
        let expect = MPoly::var(nv, 1)
            .add(&MPoly::var(nv, 3))
            .sub(&MPoly::var(nv, 0).mul(&MPoly::var(nv, 2)));
        assert_eq!(t.sum[1], expect);
    }

    #[test]
    fn p1_matches_closed_form() {
        // P_1 = X_0^p Y_1 + X_1 Y_0^p + p X_1 Y_1.
        for p in [2u64, 3, 5] {
            let t = build_witt_table(p, 2).unwrap();
            let nv = 4;
            let expect = MPoly::var(nv, 0)
                .pow(p as u32)
                .mul(&MPoly::var(nv, 3))
                .add(&MPoly::var(nv, 1).mul(&MPoly::var(nv, 2).pow(p as u32)))
                .add(&MPoly::var(nv, 1).mul(&MPoly::var(nv, 3)).scale(&q(p as i64)));
            assert_eq!(t.prod[1], expect, "p = {}", p);
        }
    }

    #[test]
    fn tables_are_integral_through_desk_scale() {
        for p in [2u64, 3, 5] {
            let t = build_witt_table(p, 3).unwrap();
            for fam in [&t.sum, &t.prod, &t.neg, &t.frob] {
                for poly in fam {
                    assert!(poly.is_integral());
                }
            }
        }
        // Deeper table at the small prime stays integral too.
        let t = build_witt_table(2, 4).unwrap();
        assert!(t.sum.iter().all(|q| q.is_integral()));
    }

    #[test]
    fn neg_is_componentwise_for_odd_p_but_not_p2() {
        let t3 = build_witt_table(3, 3).unwrap();
        for (k, poly) in t3.neg.iter().enumerate() {
            let expect = MPoly::var(3, k).scale(&q(-1));
            assert_eq!(*poly, expect, "odd p negation is componentwise");
        }
        let t2 = build_witt_table(2, 2).unwrap();
        let naive = MPoly::var(2, 1).scale(&q(-1));
        assert_ne!(t2.neg[1], naive, "p = 2 negation must carry");
    }

    #[test]
    fn ghost_identities_at_integers() {
        // Spot-check the defining property at specific integer points.
        let p = 3u64;
        let n = 3usize;
        let t = build_witt_table(p, n).unwrap();
        let x: Vec<BigInt> = vec![BigInt::from(2), BigInt::from(-5), BigInt::from(7)];
        let y: Vec<BigInt> = vec![BigInt::from(4), BigInt::from(1), BigInt::from(-3)];
        let mut args: Vec<BigInt> = x.clone();
        args.extend(y.clone());
        for k in 0..n {
            let gx = ghost_poly(p, 2 * n, 0, k).eval_bigint(&args);
            let gy = ghost_poly(p, 2 * n, n, k).eval_bigint(&args);
            let s: Vec<BigInt> = (0..n).map(|i| t.sum[i].eval_bigint(&args)).collect();
            let m: Vec<BigInt> = (0..n).map(|i| t.prod[i].eval_bigint(&args)).collect();
            let gs = ghost_poly(p, n, 0, k).eval_bigint(&s);
            let gm = ghost_poly(p, n, 0, k).eval_bigint(&m);
            assert_eq!(gs, &gx + &gy);
            assert_eq!(gm, &gx * &gy);
        }
    }
}
