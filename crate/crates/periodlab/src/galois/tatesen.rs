//! Cocycle trivialization by averaging: over the truncated normed ring
//! W_N(k)[T]/(T^D) with a cyclic group acting through T -> [zeta] T, a
//! matrix cocycle close to 1 is conjugated to 1 by the weighted average
//! M = sum_g g(alpha) U_g with a trace-1 element alpha.  One round cancels
//! the first-order defect (the cocycle law turns U_g - 1 into a coboundary
//! up to higher terms), so iterating converges exactly in the truncation:
//! every value strictly above (N - 1) + (D - 1) val_T is stored zero.

use crate::error::{Error, Result};
use crate::gf::{Gf, GfElem};
use crate::rat::{rint, Rat, ValBound};
use crate::witt::{teichmuller, Ring, WittVector, WkRing};
use crate::wittpoly::build_witt_table;
use std::sync::Arc;

type Wk = WittVector<GfElem>;

/// The ring W_N(k)[T]/(T^dcap) with val(sum c_i T^i) = min vp(c_i) + i val_T
/// and the order-q action sigma: T -> [zeta] T (k-linear on coefficients).
#[derive(Clone, Debug)]
pub struct TsRing {
    pub wk: WkRing,
    pub dcap: usize,
    pub val_t: Rat,
    pub zeta: GfElem,
    pub q: usize,
}

/// Element as its T-coefficient list, length dcap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TsElem {
    pub coeffs: Vec<Wk>,
}

pub type TsMat = Vec<Vec<TsElem>>;

impl TsRing {
    pub fn new(gf: Gf, n: usize, dcap: usize, val_t: Rat, zeta: GfElem) -> Result<Self> {
        if dcap == 0 || val_t <= rint(0) {
            return Err(Error::Params("need dcap >= 1 and val_T > 0".into()));
        }
        if gf.is_zero(&zeta) {
            return Err(Error::Params("zeta must be a root of unity, got 0".into()));
        }
        let mut q = 1usize;
        let mut z = zeta.clone();
        while z != gf.one() {
            z = gf.mul(&z, &zeta);
            q += 1;
            if q > gf.order() as usize {
                return Err(Error::Params("zeta order overflow".into()));
            }
        }
        if q < 2 {
            return Err(Error::Params("zeta = 1 generates no action".into()));
        }
        let table = Arc::new(build_witt_table(gf.p(), n)?);
        Ok(TsRing { wk: WkRing::new(gf, table), dcap, val_t, zeta, q })
    }

    pub fn zero(&self) -> TsElem {
        TsElem { coeffs: vec![self.wk.zero(); self.dcap] }
    }

    pub fn one(&self) -> TsElem {
        self.from_wk(self.wk.one())
    }

    pub fn from_wk(&self, c: Wk) -> TsElem {
        let mut out = self.zero();
        out.coeffs[0] = c;
        out
    }

    /// c T^i (degrees at or above dcap vanish).
    pub fn tmono(&self, i: usize, c: Wk) -> TsElem {
        let mut out = self.zero();
        if i < self.dcap {
            out.coeffs[i] = c;
        }
        out
    }

    pub fn add(&self, a: &TsElem, b: &TsElem) -> TsElem {
        TsElem {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| self.wk.add(x, y))
                .collect(),
        }
    }

    pub fn neg(&self, a: &TsElem) -> TsElem {
        TsElem { coeffs: a.coeffs.iter().map(|x| self.wk.neg(x)).collect() }
    }

    pub fn sub(&self, a: &TsElem, b: &TsElem) -> TsElem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &TsElem, b: &TsElem) -> TsElem {
        let mut out = self.zero();
        for (i, x) in a.coeffs.iter().enumerate() {
            if self.wk.is_zero(x) {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if i + j < self.dcap && !self.wk.is_zero(y) {
                    let prod = self.wk.mul(x, y);
                    out.coeffs[i + j] = self.wk.add(&out.coeffs[i + j], &prod);
                }
            }
        }
        out
    }

    pub fn is_zero(&self, a: &TsElem) -> bool {
        a.coeffs.iter().all(|c| self.wk.is_zero(c))
    }

    /// sigma^k: T-degree i picks up the Teichmuller lift of zeta^(i k).
    pub fn sigma(&self, a: &TsElem, k: usize) -> TsElem {
        let coeffs = a
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let e = ((i * k) % self.q) as u64;
                let zp = self.wk.gf.pow(&self.zeta, e);
                let lift = teichmuller(&self.wk.gf, &zp, self.wk.n());
                self.wk.mul(c, &lift)
            })
            .collect();
        TsElem { coeffs }
    }

    /// min_i (vp(c_i) + i val_T); Infinite for the zero element.
    pub fn val(&self, a: &TsElem) -> ValBound {
        let mut best = ValBound::Infinite;
        for (i, c) in a.coeffs.iter().enumerate() {
            if let Some(v) = self.wk.vp(c) {
                let cand = rint(v as i64) + rint(i as i64) * self.val_t;
                best = best.min(ValBound::Finite(cand));
            }
        }
        best
    }

    /// Inverse of a unit: the constant coefficient inverts in W_N(k) and
    /// the positive-degree part is nilpotent (T^dcap = 0).
    pub fn inv(&self, a: &TsElem) -> Result<TsElem> {
        let c0inv = self.wk.inv(&a.coeffs[0])?;
        let unit_inv = self.from_wk(c0inv);
        // a = c0 (1 + y) with y of T-degree >= 1.
        let y = self.sub(&self.mul(&unit_inv, a), &self.one());
        let mut acc = self.one();
        let mut pw = self.one();
        for _ in 1..self.dcap {
            pw = self.neg(&self.mul(&pw, &y));
            if self.is_zero(&pw) {
                break;
            }
            acc = self.add(&acc, &pw);
        }
        Ok(self.mul(&acc, &unit_inv))
    }

    pub fn mat_id(&self, d: usize) -> TsMat {
        (0..d)
            .map(|i| (0..d).map(|j| if i == j { self.one() } else { self.zero() }).collect())
            .collect()
    }

    pub fn mat_add(&self, a: &TsMat, b: &TsMat) -> TsMat {
        a.iter()
            .zip(b)
            .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| self.add(x, y)).collect())
            .collect()
    }

    pub fn mat_mul(&self, a: &TsMat, b: &TsMat) -> TsMat {
        let d = a.len();
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let mut s = self.zero();
                        for l in 0..d {
                            s = self.add(&s, &self.mul(&a[i][l], &b[l][j]));
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    }

    pub fn mat_sigma(&self, a: &TsMat, k: usize) -> TsMat {
        a.iter()
            .map(|row| row.iter().map(|e| self.sigma(e, k)).collect())
            .collect()
    }

    pub fn mat_scalar_mul(&self, c: &TsElem, a: &TsMat) -> TsMat {
        a.iter()
            .map(|row| row.iter().map(|e| self.mul(c, e)).collect())
            .collect()
    }

    pub fn mat_eq(&self, a: &TsMat, b: &TsMat) -> bool {
        a.iter()
            .zip(b)
            .all(|(ra, rb)| ra.iter().zip(rb).all(|(x, y)| self.is_zero(&self.sub(x, y))))
    }

    /// min entry valuation of U - I.
    pub fn mat_val_minus_id(&self, u: &TsMat) -> ValBound {
        let id = self.mat_id(u.len());
        let mut best = ValBound::Infinite;
        for (ru, ri) in u.iter().zip(&id) {
            for (x, y) in ru.iter().zip(ri) {
                best = best.min(self.val(&self.sub(x, y)));
            }
        }
        best
    }

    /// Inverse of a matrix with val(U - I) > 0: the Neumann series in
    /// (I - U) terminates because nonzero elements have bounded valuation.
    pub fn mat_inv_unipotent(&self, u: &TsMat) -> Result<TsMat> {
        let d = u.len();
        let id = self.mat_id(d);
        match self.mat_val_minus_id(u) {
            ValBound::Infinite => return Ok(id),
            ValBound::Finite(v) if v > rint(0) => {}
            v => {
                return Err(Error::NotUnit(format!(
                    "matrix is not unipotently invertible: val(U - 1) = {}",
                    v
                )))
            }
        }
        let neg_n: TsMat = u
            .iter()
            .zip(&id)
            .map(|(ru, ri)| ru.iter().zip(ri).map(|(x, y)| self.sub(y, x)).collect())
            .collect();
        let mut acc = self.mat_id(d);
        let mut pw = self.mat_id(d);
        let cap = self.wk.n() + self.dcap + 2;
        for _ in 0..cap {
            pw = self.mat_mul(&pw, &neg_n);
            if pw.iter().all(|row| row.iter().all(|e| self.is_zero(e))) {
                return Ok(acc);
            }
            acc = self.mat_add(&acc, &pw);
        }
        // val(N^k) grows by at least val(N) > 0 per factor, so the loop
        // above always exits through the zero test.
        Ok(acc)
    }
}

/// Cocycle on the cyclic group: mats[k] is the value at sigma^k, with
/// mats[0] = I and the law U_(k+l) = U_k sigma^k(U_l) (indices mod q).
#[derive(Clone, Debug)]
pub struct TsCocycle {
    pub mats: Vec<TsMat>,
}

/// The coboundary cocycle of an invertible B: U_k = B^(-1) sigma^k(B).
pub fn coboundary_cocycle(ts: &TsRing, b: &TsMat) -> Result<TsCocycle> {
    let binv = ts.mat_inv_unipotent(b)?;
    let mats = (0..ts.q)
        .map(|k| ts.mat_mul(&binv, &ts.mat_sigma(b, k)))
        .collect();
    Ok(TsCocycle { mats })
}

/// Exact check of the cocycle law on all index pairs.
pub fn cocycle_law_holds(ts: &TsRing, c: &TsCocycle) -> bool {
    if c.mats.len() != ts.q {
        return false;
    }
    let d = c.mats[0].len();
    if !ts.mat_eq(&c.mats[0], &ts.mat_id(d)) {
        return false;
    }
    for k in 0..ts.q {
        for l in 0..ts.q {
            let lhs = &c.mats[(k + l) % ts.q];
            let rhs = ts.mat_mul(&c.mats[k], &ts.mat_sigma(&c.mats[l], k));
            if !ts.mat_eq(lhs, &rhs) {
                return false;
            }
        }
    }
    true
}

/// Result of the trivialization: the accumulated conjugator, its measured
/// defect val(M - 1), and the number of averaging rounds used.
#[derive(Clone, Debug)]
pub struct TsOutcome {
    pub m: TsMat,
    pub defect: ValBound,
    pub rounds: usize,
}

/// Conjugate the cocycle to 1 by iterated averaging M = sum_k sigma^k(alpha) U_k.
///
/// Hypotheses checked up front: a > c1, val(alpha) > -c1, trace(alpha) = 1
/// exactly, val(U_k - 1) >= a, and the cocycle law.  The returned M carries
/// the certificate val(M - 1) >= a - c1; failure to converge within the
/// budget or to certify is an error, never an uncertified answer.
pub fn tate_sen_trivialize(
    ts: &TsRing,
    coc: &TsCocycle,
    alpha: &TsElem,
    a: Rat,
    c1: Rat,
    budget: usize,
) -> Result<TsOutcome> {
    if a <= c1 {
        return Err(Error::Params(format!("need a > c1, got a = {}, c1 = {}", a, c1)));
    }
    match ts.val(alpha) {
        ValBound::Infinite => {
            return Err(Error::Domain("alpha = 0 cannot have trace 1".into()))
        }
        ValBound::Finite(v) if v > -c1 => {}
        v => {
            return Err(Error::Domain(format!(
                "val(alpha) = {} is not above -c1 = {}",
                v, -c1
            )))
        }
    }
    let mut trace = ts.zero();
    for k in 0..ts.q {
        trace = ts.add(&trace, &ts.sigma(alpha, k));
    }
    if !ts.is_zero(&ts.sub(&trace, &ts.one())) {
        return Err(Error::Domain("the averaging element does not have trace 1".into()));
    }
    if !cocycle_law_holds(ts, coc) {
        return Err(Error::Domain("input does not satisfy the cocycle law".into()));
    }
    for (k, u) in coc.mats.iter().enumerate().skip(1) {
        let v = ts.mat_val_minus_id(u);
        if v < ValBound::Finite(a) {
            return Err(Error::Domain(format!(
                "val(U_{} - 1) = {} is below a = {}",
                k, v, a
            )));
        }
    }

    let d = coc.mats[0].len();
    let mut us = coc.mats.clone();
    let mut m_tot = ts.mat_id(d);
    let mut rounds = 0usize;
    loop {
        let id = ts.mat_id(d);
        if us.iter().all(|u| ts.mat_eq(u, &id)) {
            break;
        }
        if rounds >= budget {
            return Err(Error::Uncertified(format!(
                "cocycle not trivialized within {} rounds; hypotheses too weak",
                budget
            )));
        }
        let mut m = ts.mat_scalar_mul(&ts.sigma(alpha, 0), &us[0]);
        for k in 1..ts.q {
            m = ts.mat_add(&m, &ts.mat_scalar_mul(&ts.sigma(alpha, k), &us[k]));
        }
        let minv = ts.mat_inv_unipotent(&m)?;
        for (k, u) in us.iter_mut().enumerate() {
            *u = ts.mat_mul(&minv, &ts.mat_mul(u, &ts.mat_sigma(&m, k)));
        }
        m_tot = ts.mat_mul(&m_tot, &m);
        rounds += 1;
    }
    let defect = ts.mat_val_minus_id(&m_tot);
    if defect < ValBound::Finite(a - c1) {
        return Err(Error::Uncertified(format!(
            "val(M - 1) = {} does not reach a - c1 = {}",
            defect,
            a - c1
        )));
    }
    Ok(TsOutcome { m: m_tot, defect, rounds })
}
