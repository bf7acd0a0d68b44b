//! Truncated Witt vectors over a coefficient ring, driven by universal tables.
//!
//! Operations are the evaluations of the ghost-solved polynomials; rings of
//! characteristic p additionally get the structural shortcuts (componentwise
//! Frobenius, shift Verschiebung, p-multiplication as V o F, exact division
//! by p when the bottom component vanishes).

use crate::error::{Error, Result};
use crate::gf::{Gf, GfElem};
use crate::wittpoly::{ghost_poly, MPoly, WittTable};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::fmt::Debug;

/// Context-passing ring object. Elements are plain data; the ring carries
/// parameters and implements the operations.
pub trait Ring {
    type Elem: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn from_int(&self, n: &BigInt) -> Self::Elem;

    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn pow_u(&self, a: &Self::Elem, mut n: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            n >>= 1;
            if n > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }
}

/// Perfect ring of characteristic p: Frobenius is invertible.
pub trait PerfectCharP: Ring {
    fn p(&self) -> u64;
    fn frobenius_elem(&self, a: &Self::Elem) -> Self::Elem;
    fn pth_root_elem(&self, a: &Self::Elem) -> Result<Self::Elem>;
}

/// The integers, used as the torsion-free oracle ring for ghost tests.
#[derive(Clone, Debug, Default)]
pub struct BigIntRing;

impl Ring for BigIntRing {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::from(1)
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn from_int(&self, n: &BigInt) -> BigInt {
        n.clone()
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
}

impl Ring for Gf {
    type Elem = GfElem;

    fn zero(&self) -> GfElem {
        Gf::zero(self)
    }
    fn one(&self) -> GfElem {
        Gf::one(self)
    }
    fn add(&self, a: &GfElem, b: &GfElem) -> GfElem {
        Gf::add(self, a, b)
    }
    fn neg(&self, a: &GfElem) -> GfElem {
        Gf::neg(self, a)
    }
    fn mul(&self, a: &GfElem, b: &GfElem) -> GfElem {
        Gf::mul(self, a, b)
    }
    fn from_int(&self, n: &BigInt) -> GfElem {
        Gf::from_int(self, n)
    }
    fn is_zero(&self, a: &GfElem) -> bool {
        Gf::is_zero(self, a)
    }
}

impl PerfectCharP for Gf {
    fn p(&self) -> u64 {
        Gf::p(self)
    }
    fn frobenius_elem(&self, a: &GfElem) -> GfElem {
        self.frobenius(a)
    }
    fn pth_root_elem(&self, a: &GfElem) -> Result<GfElem> {
        Ok(self.pth_root(a))
    }
}

/// Truncated Witt vector: components in phantom-free plain storage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittVector<E> {
    pub comps: Vec<E>,
}

impl<E: Clone> WittVector<E> {
    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }
}

fn eval_poly<R: Ring>(ring: &R, poly: &MPoly, args: &[R::Elem]) -> R::Elem {
    let mut acc = ring.zero();
    for (key, coeff) in &poly.terms {
        debug_assert!(coeff.denom().is_positive());
        let mut term = ring.from_int(coeff.numer());
        for (x, &e) in args.iter().zip(key) {
            if e > 0 {
                term = ring.mul(&term, &ring.pow_u(x, e as u64));
            }
        }
        acc = ring.add(&acc, &term);
    }
    acc
}

fn paired_args<R: Ring>(a: &WittVector<R::Elem>, b: &WittVector<R::Elem>) -> Vec<R::Elem> {
    let mut args: Vec<R::Elem> = a.comps.clone();
    args.extend(b.comps.iter().cloned());
    args
}

pub fn witt_zero<R: Ring>(ring: &R, n: usize) -> WittVector<R::Elem> {
    WittVector { comps: vec![ring.zero(); n] }
}

pub fn witt_is_zero<R: Ring>(ring: &R, a: &WittVector<R::Elem>) -> bool {
    a.comps.iter().all(|c| ring.is_zero(c))
}

/// Teichmuller lift: (z, 0, ..., 0).
pub fn teichmuller<R: Ring>(ring: &R, z: &R::Elem, n: usize) -> WittVector<R::Elem> {
    let mut comps = vec![ring.zero(); n];
    comps[0] = z.clone();
    WittVector { comps }
}

pub fn witt_add<R: Ring>(
    ring: &R,
    table: &WittTable,
    a: &WittVector<R::Elem>,
    b: &WittVector<R::Elem>,
) -> WittVector<R::Elem> {
    assert_eq!(a.len(), table.n);
    assert_eq!(b.len(), table.n);
    let args = paired_args::<R>(a, b);
    WittVector { comps: table.sum.iter().map(|p| eval_poly(ring, p, &args)).collect() }
}

pub fn witt_mul<R: Ring>(
    ring: &R,
    table: &WittTable,
    a: &WittVector<R::Elem>,
    b: &WittVector<R::Elem>,
) -> WittVector<R::Elem> {
    assert_eq!(a.len(), table.n);
    assert_eq!(b.len(), table.n);
    let args = paired_args::<R>(a, b);
    WittVector { comps: table.prod.iter().map(|p| eval_poly(ring, p, &args)).collect() }
}

pub fn witt_neg<R: Ring>(
    ring: &R,
    table: &WittTable,
    a: &WittVector<R::Elem>,
) -> WittVector<R::Elem> {
    assert_eq!(a.len(), table.n);
    WittVector { comps: table.neg.iter().map(|p| eval_poly(ring, p, &a.comps)).collect() }
}

pub fn witt_sub<R: Ring>(
    ring: &R,
    table: &WittTable,
    a: &WittVector<R::Elem>,
    b: &WittVector<R::Elem>,
) -> WittVector<R::Elem> {
    witt_add(ring, table, a, &witt_neg(ring, table, b))
}

/// Verschiebung: shift components up, dropping the top one.
pub fn verschiebung<R: Ring>(ring: &R, a: &WittVector<R::Elem>) -> WittVector<R::Elem> {
    let mut comps = vec![ring.zero(); a.len()];
    for i in 1..a.len() {
        comps[i] = a.comps[i - 1].clone();
    }
    WittVector { comps }
}

/// Frobenius via the universal polynomials; shortens the vector by one slot.
pub fn frobenius_table<R: Ring>(
    ring: &R,
    table: &WittTable,
    a: &WittVector<R::Elem>,
) -> WittVector<R::Elem> {
    assert_eq!(a.len(), table.n);
    WittVector { comps: table.frob.iter().map(|p| eval_poly(ring, p, &a.comps)).collect() }
}

/// Frobenius in characteristic p: componentwise p-th power, same length.
pub fn frobenius_charp<R: PerfectCharP>(ring: &R, a: &WittVector<R::Elem>) -> WittVector<R::Elem> {
    WittVector { comps: a.comps.iter().map(|c| ring.frobenius_elem(c)).collect() }
}

/// Inverse Frobenius in characteristic p (perfect coefficients).
pub fn frobenius_inv_charp<R: PerfectCharP>(
    ring: &R,
    a: &WittVector<R::Elem>,
) -> Result<WittVector<R::Elem>> {
    let comps: Result<Vec<_>> = a.comps.iter().map(|c| ring.pth_root_elem(c)).collect();
    Ok(WittVector { comps: comps? })
}

/// Multiplication by p in characteristic p: p = V o F, i.e. shift of the
/// componentwise p-th powers. The top component falls off the truncation.
pub fn mul_p_charp<R: PerfectCharP>(ring: &R, a: &WittVector<R::Elem>) -> WittVector<R::Elem> {
    verschiebung(ring, &frobenius_charp(ring, a))
}

/// Exact division by p in characteristic p over perfect coefficients.
///
/// Defined only when the bottom component vanishes; the inverse of V o F is
/// a downward shift followed by p-th roots. The freed top slot is zero,
/// which silently GAINS a layer of precision; callers that track precision
/// must account for it (PeriodElement does).
pub fn divide_p_charp<R: PerfectCharP>(
    ring: &R,
    a: &WittVector<R::Elem>,
) -> Result<WittVector<R::Elem>> {
    if !ring.is_zero(&a.comps[0]) {
        return Err(Error::Domain(
            "division by p requires a vanishing bottom Witt component".into(),
        ));
    }
    let n = a.len();
    let mut comps = Vec::with_capacity(n);
    for i in 1..n {
        comps.push(ring.pth_root_elem(&a.comps[i])?);
    }
    comps.push(ring.zero());
    Ok(WittVector { comps })
}

/// The image of an integer in W_n(R), by binary double-and-add on the tables.
pub fn witt_from_int<R: Ring>(
    ring: &R,
    table: &WittTable,
    n_val: &BigInt,
) -> WittVector<R::Elem> {
    let negative = n_val.is_negative();
    let mag = n_val.abs();
    let one = teichmuller(ring, &ring.one(), table.n);
    let mut acc = witt_zero(ring, table.n);
    let bits = mag.bits();
    for i in (0..bits).rev() {
        acc = witt_add(ring, table, &acc, &acc);
        if mag.bit(i) {
            acc = witt_add(ring, table, &acc, &one);
        }
    }
    if negative {
        acc = witt_neg(ring, table, &acc);
    }
    acc
}

/// Ghost components w_0..w_(n-1), meaningful over torsion-free rings.
pub fn ghost<R: Ring>(ring: &R, p: u64, a: &WittVector<R::Elem>) -> Vec<R::Elem> {
    let n = a.len();
    (0..n)
        .map(|k| {
            let poly = ghost_poly(p, n, 0, k);
            eval_poly(ring, &poly, &a.comps)
        })
        .collect()
}

/// The ring W_n(k) for a residue field k, as a context-passing ring object.
///
/// Elements are Witt vectors over k; this is the coefficient ring of the
/// Laurent models and the norm tower.
#[derive(Clone, Debug)]
pub struct WkRing {
    pub gf: Gf,
    pub table: std::sync::Arc<WittTable>,
}

impl WkRing {
    pub fn new(gf: Gf, table: std::sync::Arc<WittTable>) -> Self {
        assert_eq!(gf.p(), table.p);
        WkRing { gf, table }
    }

    pub fn n(&self) -> usize {
        self.table.n
    }

    /// First index with a nonzero component, i.e. the p-adic valuation;
    /// `None` for zero (valuation >= n).
    pub fn vp(&self, a: &WittVector<GfElem>) -> Option<usize> {
        a.comps.iter().position(|c| !self.gf.is_zero(c))
    }

    /// Arithmetic Frobenius of W(k): componentwise field Frobenius
    /// (length-preserving ring automorphism, unlike the Witt-F operator).
    pub fn frobenius_auto(&self, a: &WittVector<GfElem>) -> WittVector<GfElem> {
        WittVector { comps: a.comps.iter().map(|c| self.gf.frobenius(c)).collect() }
    }

    pub fn frobenius_auto_inv(&self, a: &WittVector<GfElem>) -> WittVector<GfElem> {
        WittVector { comps: a.comps.iter().map(|c| self.gf.pth_root(c)).collect() }
    }

    /// Inverse of a unit (bottom component nonzero) by Newton iteration.
    pub fn inv(&self, a: &WittVector<GfElem>) -> Result<WittVector<GfElem>> {
        if self.gf.is_zero(&a.comps[0]) {
            return Err(Error::NotUnit("W(k) element with zero bottom component".into()));
        }
        let mut z = teichmuller(&self.gf, &self.gf.inv(&a.comps[0])?, self.n());
        // z <- z(2 - az) doubles the number of correct p-digits each round.
        let two = witt_from_int(&self.gf, &self.table, &BigInt::from(2));
        for _ in 0..self.n().ilog2() + 1 {
            let az = witt_mul(&self.gf, &self.table, a, &z);
            let corr = witt_sub(&self.gf, &self.table, &two, &az);
            z = witt_mul(&self.gf, &self.table, &z, &corr);
        }
        let check = witt_mul(&self.gf, &self.table, a, &z);
        let one = teichmuller(&self.gf, &self.gf.one(), self.n());
        debug_assert_eq!(check, one);
        Ok(z)
    }
}

impl Ring for WkRing {
    type Elem = WittVector<GfElem>;

    fn zero(&self) -> Self::Elem {
        witt_zero(&self.gf, self.n())
    }
    fn one(&self) -> Self::Elem {
        teichmuller(&self.gf, &self.gf.one(), self.n())
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        witt_add(&self.gf, &self.table, a, b)
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        witt_neg(&self.gf, &self.table, a)
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        witt_mul(&self.gf, &self.table, a, b)
    }
    fn from_int(&self, n: &BigInt) -> Self::Elem {
        witt_from_int(&self.gf, &self.table, n)
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        witt_is_zero(&self.gf, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wittpoly::build_witt_table;
    use std::sync::Arc;

    #[test]
    fn teichmuller_multiplicative_over_integers() {
        let t = build_witt_table(3, 3).unwrap();
        let r = BigIntRing;
        let a = teichmuller(&r, &BigInt::from(5), 3);
        let b = teichmuller(&r, &BigInt::from(-7), 3);
        let ab = teichmuller(&r, &BigInt::from(-35), 3);
        assert_eq!(witt_mul(&r, &t, &a, &b), ab);
    }

    #[test]
    fn verschiebung_frobenius_is_p_over_integers() {
        // F(V(x)) = p x, checked on ghost components over Z.
        let p = 2u64;
        let t = build_witt_table(p, 3).unwrap();
        let r = BigIntRing;
        let x = WittVector { comps: vec![BigInt::from(3), BigInt::from(-1), BigInt::from(4)] };
        let vx = verschiebung(&r, &x);
        let fvx = frobenius_table(&r, &t, &vx);
        let g = ghost(&r, p, &fvx);
        let gx = ghost(&r, p, &x);
        for k in 0..2 {
            assert_eq!(g[k], BigInt::from(p) * &gx[k]);
        }
    }

    #[test]
    fn from_int_matches_ghost() {
        let p = 5u64;
        let t = build_witt_table(p, 3).unwrap();
        let r = BigIntRing;
        for n in [-7i64, 0, 1, 4, 26] {
            let w = witt_from_int(&r, &t, &BigInt::from(n));
            let g = ghost(&r, p, &w);
            for gk in g {
                assert_eq!(gk, BigInt::from(n), "ghost of integer image is constant");
            }
        }
    }

    #[test]
    fn charp_p_multiple_matches_table() {
        // In W_3(F_4): p * x computed by V o F equals table-made p * x.
        let gf = Gf::extension(2, 2).unwrap();
        let t = Arc::new(build_witt_table(2, 3).unwrap());
        let ring = WkRing::new(gf.clone(), t.clone());
        let g = gf.gen();
        let x = WittVector { comps: vec![g.clone(), gf.one(), gf.add(&g, &gf.one())] };
        let px_struct = mul_p_charp(&gf, &x);
        let p_img = ring.from_int(&BigInt::from(2));
        let px_table = ring.mul(&p_img, &x);
        assert_eq!(px_struct, px_table);
    }

    #[test]
    fn divide_p_inverts_mul_p() {
        let gf = Gf::extension(3, 2).unwrap();
        let x = WittVector {
            comps: vec![gf.gen(), gf.one(), gf.zero()],
        };
        let px = mul_p_charp(&gf, &x);
        let back = divide_p_charp(&gf, &px).unwrap();
        // The top component is freshly unknown-as-zero; lower ones must match.
        assert_eq!(back.comps[0], x.comps[0]);
        assert_eq!(back.comps[1], x.comps[1]);
        let y = WittVector { comps: vec![gf.one(), gf.zero(), gf.zero()] };
        assert!(divide_p_charp(&gf, &y).is_err());
    }

    #[test]
    fn wk_inverse_of_units() {
        let gf = Gf::prime(5);
        let t = Arc::new(build_witt_table(5, 3).unwrap());
        let ring = WkRing::new(gf, t);
        let a = ring.from_int(&BigInt::from(7));
        let inv = ring.inv(&a).unwrap();
        assert_eq!(ring.mul(&a, &inv), ring.one());
        let nonunit = ring.from_int(&BigInt::from(10));
        assert!(ring.inv(&nonunit).is_err());
    }

    #[test]
    fn p2_negation_self_consistency() {
        // x + (-x) = 0 in W_3(F_2), where negation is not componentwise.
        let gf = Gf::prime(2);
        let t = Arc::new(build_witt_table(2, 3).unwrap());
        let ring = WkRing::new(gf.clone(), t);
        let x = WittVector { comps: vec![gf.one(), gf.one(), gf.zero()] };
        let s = ring.add(&x, &ring.neg(&x));
        assert!(ring.is_zero(&s));
    }
}
