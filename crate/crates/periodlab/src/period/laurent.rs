//! The integer-exponent Laurent model: finite sums f = sum_k a_k T^k with
//! a_k in W_N(k), T standing for [X]. This is the unperfected shadow of the
//! period ring; its valuation calW is computed termwise and is exact (the
//! model has no hidden content), and `embed_laurent` realizes T -> [X] as an
//! isometry into the Witt-of-tilt model.

use super::{Interval, PeriodElement, PeriodRing};
use crate::error::{Error, Result};
use crate::gf::GfElem;
use crate::params::ModelParams;
use crate::rat::{rint, Rat, ValBound};
use crate::tilt::Tilt;
use crate::witt::{mul_p_charp, teichmuller, Ring, WittVector, WkRing};
use num_bigint::BigInt;
use std::collections::BTreeMap;
use std::sync::Arc;

pub type WkElem = WittVector<GfElem>;

/// Finite Laurent sum over W_N(k); invariant: no zero coefficients, all
/// exponents inside the configured X-window.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LaurentElement {
    pub terms: BTreeMap<i64, WkElem>,
}

impl LaurentElement {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct LaurentRing {
    pub wk: WkRing,
    pub prm: Arc<ModelParams>,
}

impl LaurentRing {
    pub fn new(prm: Arc<ModelParams>) -> Self {
        let wk = WkRing::new(prm.gf.clone(), prm.table.clone());
        LaurentRing { wk, prm }
    }

    fn check_exp(&self, k: i64) -> Result<()> {
        if k > self.prm.dx || k < self.prm.dx_neg {
            return Err(Error::WindowOverflow(format!(
                "Laurent exponent {} outside the window [{}, {}]",
                k, self.prm.dx_neg, self.prm.dx
            )));
        }
        Ok(())
    }

    pub fn zero(&self) -> LaurentElement {
        LaurentElement::default()
    }

    pub fn monomial(&self, k: i64, coeff: WkElem) -> Result<LaurentElement> {
        self.check_exp(k)?;
        let mut terms = BTreeMap::new();
        if !self.wk.is_zero(&coeff) {
            terms.insert(k, coeff);
        }
        Ok(LaurentElement { terms })
    }

    pub fn t_pow(&self, k: i64) -> Result<LaurentElement> {
        self.monomial(k, self.wk.one())
    }

    pub fn from_wk(&self, coeff: WkElem) -> LaurentElement {
        self.monomial(0, coeff).expect("exponent 0 is always in the window")
    }

    pub fn from_int(&self, n: &BigInt) -> LaurentElement {
        self.from_wk(self.wk.from_int(n))
    }

    pub fn one(&self) -> LaurentElement {
        self.from_int(&BigInt::from(1))
    }

    pub fn add(&self, a: &LaurentElement, b: &LaurentElement) -> LaurentElement {
        let mut terms = a.terms.clone();
        for (&k, c) in &b.terms {
            let merged = match terms.get(&k) {
                Some(prev) => self.wk.add(prev, c),
                None => c.clone(),
            };
            if self.wk.is_zero(&merged) {
                terms.remove(&k);
            } else {
                terms.insert(k, merged);
            }
        }
        LaurentElement { terms }
    }

    pub fn neg(&self, a: &LaurentElement) -> LaurentElement {
        LaurentElement {
            terms: a.terms.iter().map(|(&k, c)| (k, self.wk.neg(c))).collect(),
        }
    }

    pub fn sub(&self, a: &LaurentElement, b: &LaurentElement) -> LaurentElement {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &LaurentElement, b: &LaurentElement) -> Result<LaurentElement> {
        let mut acc: BTreeMap<i64, WkElem> = BTreeMap::new();
        for (&ka, ca) in &a.terms {
            for (&kb, cb) in &b.terms {
                let k = ka + kb;
                self.check_exp(k)?;
                let prod = self.wk.mul(ca, cb);
                let merged = match acc.get(&k) {
                    Some(prev) => self.wk.add(prev, &prod),
                    None => prod,
                };
                if self.wk.is_zero(&merged) {
                    acc.remove(&k);
                } else {
                    acc.insert(k, merged);
                }
            }
        }
        Ok(LaurentElement { terms: acc })
    }

    pub fn scalar_mul(&self, c: &WkElem, a: &LaurentElement) -> LaurentElement {
        let mut terms = BTreeMap::new();
        for (&k, ck) in &a.terms {
            let prod = self.wk.mul(c, ck);
            if !self.wk.is_zero(&prod) {
                terms.insert(k, prod);
            }
        }
        LaurentElement { terms }
    }

    pub fn pow_u(&self, a: &LaurentElement, mut n: u64) -> Result<LaurentElement> {
        let mut base = a.clone();
        let mut acc = self.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base)?;
            }
            n >>= 1;
            if n > 0 {
                base = self.mul(&base, &base)?;
            }
        }
        Ok(acc)
    }

    /// Frobenius on the model: T -> T^(p^n) with the arithmetic Frobenius on
    /// coefficients. Negative n requires all exponents divisible by p^|n|.
    pub fn phi(&self, a: &LaurentElement, n: i32) -> Result<LaurentElement> {
        let p = self.prm.p as i64;
        let mut pn: i64 = 1;
        for _ in 0..n.unsigned_abs() {
            pn = pn.checked_mul(p).ok_or_else(|| Error::Params("phi power overflow".into()))?;
        }
        let mut terms = BTreeMap::new();
        for (&k, c) in &a.terms {
            let (k2, c2) = if n >= 0 {
                let mut cc = c.clone();
                for _ in 0..n {
                    cc = self.wk.frobenius_auto(&cc);
                }
                (k.checked_mul(pn).ok_or_else(|| Error::Params("exponent overflow".into()))?, cc)
            } else {
                if k % pn != 0 {
                    return Err(Error::Domain(format!(
                        "exponent {} not divisible by p^{} under inverse Frobenius",
                        k, -n
                    )));
                }
                let mut cc = c.clone();
                for _ in 0..(-n) {
                    cc = self.wk.frobenius_auto_inv(&cc);
                }
                (k / pn, cc)
            };
            self.check_exp(k2)?;
            terms.insert(k2, c2);
        }
        Ok(LaurentElement { terms })
    }
}

/// calW^I(f) = min over terms of vp(a_k) + c_s * k/e at the endpoints.
/// Exact by construction: the Laurent model has no window-truncated tails.
pub fn calw_val(lr: &LaurentRing, f: &LaurentElement, i: &Interval) -> Result<ValBound> {
    let p = rint(lr.prm.p as i64);
    let e = rint(lr.prm.e);
    let cf = |s: Rat| (p - rint(1)) / (p * s);

    let term_val = |c: Option<Rat>| -> ValBound {
        let mut best = ValBound::Infinite;
        for (&k, a) in &f.terms {
            let vp = lr.wk.vp(a).expect("no zero coefficients") as i64;
            let v = match c {
                Some(cc) => rint(vp) + cc * rint(k) / e,
                None => rint(vp),
            };
            best = best.min(ValBound::Finite(v));
        }
        best
    };

    let hi = match i.hi {
        ValBound::Finite(h) => term_val(Some(cf(h))),
        ValBound::Infinite => term_val(None),
    };
    if i.lo == rint(0) {
        if let Some((&k, _)) = f.terms.iter().next() {
            if k < 0 {
                return Err(Error::Domain(format!(
                    "exponent {} < 0: not a plus-part series at the 0 endpoint",
                    k
                )));
            }
        }
        return Ok(hi);
    }
    Ok(hi.min(term_val(Some(cf(i.lo)))))
}

/// Split into (strictly negative exponents, nonnegative exponents).
pub fn decompose_pm(f: &LaurentElement) -> (LaurentElement, LaurentElement) {
    let mut minus = BTreeMap::new();
    let mut plus = BTreeMap::new();
    for (&k, c) in &f.terms {
        if k < 0 {
            minus.insert(k, c.clone());
        } else {
            plus.insert(k, c.clone());
        }
    }
    (LaurentElement { terms: minus }, LaurentElement { terms: plus })
}

/// Embed W_N(k) componentwise into the Witt-of-tilt model.
fn const_embed(pr: &PeriodRing, a: &WkElem) -> PeriodElement {
    let comps: Vec<Tilt> = a.comps.iter().map(|c| pr.tr.constant(c.clone())).collect();
    PeriodElement { scale: 0, w: WittVector { comps } }
}

/// The ring map T -> u = [X]; an isometry for calW vs W at every point.
pub fn embed_laurent(
    pr: &PeriodRing,
    _lr: &LaurentRing,
    f: &LaurentElement,
) -> Result<PeriodElement> {
    let mut acc = pr.zero();
    for (&k, a) in &f.terms {
        let u_k = pr.teich(&pr.tr.x_mono(rint(k))?);
        let term = pr.mul(&const_embed(pr, a), &u_k);
        acc = pr.add(&acc, &term);
    }
    Ok(acc)
}

/// Regroup a Y-free period element with integer X-exponents back into the
/// Laurent model by p-adic digit peeling: read the bottom layer, lift its
/// Teichmuller digit, subtract that digit's embedding, divide by p, repeat.
/// (Witt-sum cross terms put fractional rooted exponents into upper layers
/// even for genuine images, so the peel must go digit by digit rather than
/// through the canonical monomial form.) Errors when a bottom-layer digit
/// carries Y or a fractional X-exponent.
pub fn laurent_from_period(
    pr: &PeriodRing,
    lr: &LaurentRing,
    x: &PeriodElement,
) -> Result<LaurentElement> {
    if x.scale != 0 {
        return Err(Error::Domain("Laurent regrouping needs an integral element".into()));
    }
    let n = pr.n();
    let mut rem = PeriodElement { scale: 0, w: x.w.clone() };
    let mut acc = lr.zero();
    for i in 0..n {
        // Terms at or above the bottom layer's drop bound are uncertified
        // residue of window folds, not recoverable content: fold them back
        // into the drop before reading the digit.
        {
            let layer = &mut rem.w.comps[0];
            let mut dr = layer.drop;
            let mut kept = BTreeMap::new();
            for (&(a, b), c) in &layer.terms {
                let v = pr.prm().mono_val(a, b);
                if layer.drop.certifies(v) {
                    kept.insert((a, b), c.clone());
                } else {
                    dr = dr.min(ValBound::Finite(v));
                }
            }
            layer.terms = kept;
            layer.drop = dr;
        }
        let layer = rem.w.comps[0].clone();
        if layer.terms.is_empty() && i + 1 < n {
            rem = PeriodElement {
                scale: 0,
                w: crate::witt::divide_p_charp(&pr.tr, &rem.w)?,
            };
            continue;
        }
        let mut digit = lr.zero();
        for (&(a, b), c) in &layer.terms {
            if b != rint(0) {
                return Err(Error::Domain(
                    "Y-bearing monomial has no Laurent image".into(),
                ));
            }
            if !a.is_integer() {
                return Err(Error::Domain(format!(
                    "X-exponent {} is not an integer; element is not at level 0",
                    a
                )));
            }
            let tc = teichmuller(&lr.wk.gf, c, lr.wk.n());
            digit = lr.add(&digit, &lr.monomial(a.to_integer(), tc)?);
        }
        // acc += p^i * digit, coefficientwise in W_N(k).
        let mut shifted = digit.clone();
        for _ in 0..i {
            shifted = LaurentElement {
                terms: shifted
                    .terms
                    .iter()
                    .map(|(&k, c)| (k, mul_p_charp(&lr.wk.gf, c)))
                    .collect(),
            };
        }
        acc = lr.add(&acc, &shifted);
        if i + 1 == n {
            break;
        }
        // Bottom layers cancel exactly; the quotient carries the next digit.
        let lift = embed_laurent(pr, lr, &digit)?;
        let diff = pr.sub(&rem, &lift);
        debug_assert!(diff.w.comps[0].is_stored_zero());
        rem = PeriodElement {
            scale: 0,
            w: crate::witt::divide_p_charp(&pr.tr, &diff.w)?,
        };
    }
    Ok(acc)
}

/// Write f with calW^{[r_l, r_k]} >= 0 as a sum over powers
/// (p T^(-e p^l))^i (T^(e p^k) / p)^j with plus-part coefficients.
/// Returns triples (i, j, plus-part); their recombination equals f.
pub fn presentation_decompose(
    lr: &LaurentRing,
    f: &LaurentElement,
    l: u32,
    k: u32,
) -> Result<Vec<(u32, u32, LaurentElement)>> {
    let p = lr.prm.p as i64;
    let e = lr.prm.e;
    let low_step = e * p.pow(l);
    let high_step = e * p.pow(k);
    let mut buckets: BTreeMap<(u32, u32), LaurentElement> = BTreeMap::new();
    for (&kk, a) in &f.terms {
        let vp = lr.wk.vp(a).expect("no zero coefficients") as i64;
        let (ci, dj, shift, pshift) = if kk >= 0 {
            let d = kk / high_step;
            (0u32, d as u32, kk - d * high_step, d)
        } else {
            let c = (-kk + low_step - 1) / low_step;
            if vp < c {
                return Err(Error::Domain(format!(
                    "term T^{} has vp = {} < {}; calW at the low endpoint is negative",
                    kk, vp, c
                )));
            }
            (c as u32, 0u32, kk + c * low_step, -c)
        };
        // Multiply the coefficient by p^pshift (possibly peeling, which is
        // exact here because vp covers it).
        let coeff = if pshift >= 0 {
            let mut cc = a.clone();
            for _ in 0..pshift {
                cc = mul_p_charp(&lr.wk.gf, &cc);
            }
            cc
        } else {
            let mut cc = a.clone();
            for _ in 0..(-pshift) {
                cc = crate::witt::divide_p_charp(&lr.wk.gf, &cc)?;
            }
            cc
        };
        let mono = lr.monomial(shift, coeff)?;
        let entry = buckets.entry((ci, dj)).or_insert_with(|| lr.zero());
        *entry = lr.add(entry, &mono);
    }
    Ok(buckets.into_iter().map(|((i, j), g)| (i, j, g)).collect())
}
