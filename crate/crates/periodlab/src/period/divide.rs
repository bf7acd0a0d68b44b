//! Division with remainder by F = phi^k(E(u)), detecting membership in the
//! kernel ideal it generates.
//!
//! Mod p, F reduces to its leading monomial a_e X^(e p^k), so division is a
//! layerwise peel: in round j the bottom layer z_j of the residue splits
//! into monomials whose valuation covers v(X^(e p^k)) = p^k (these divide
//! and feed the quotient, staying integral) and the rest, which is the
//! canonical remainder contribution p^j [z_low]. On Y-free monomials the
//! valuation test is exactly the X-degree test alpha >= e p^k. The bottom
//! layer of the new residue cancels by construction, so dividing by p is
//! exact and the loop ends after N rounds.

use super::special::epoly_elem;
use super::{PeriodElement, PeriodRing};
use crate::error::Result;
use crate::gf::GfElem;
use crate::rat::{rint, Rat};
use crate::tilt::Tilt;
use crate::rat::ValBound;
use crate::witt::{divide_p_charp, Ring};
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct DivisionOutcome {
    pub quot: PeriodElement,
    pub rem: PeriodElement,
    /// rem is stored-zero: x lies in (F) modulo the stored precision.
    pub in_ker: bool,
}

fn tilt_from_terms(
    pr: &PeriodRing,
    terms: &BTreeMap<(Rat, Rat), GfElem>,
    drop: ValBound,
) -> Result<Tilt> {
    let mut acc = Tilt::stored_zero();
    for (&(alpha, beta), c) in terms {
        acc = pr.tr.add(&acc, &pr.tr.monomial(alpha, beta, c.clone())?);
    }
    acc.drop = acc.drop.min(drop);
    Ok(acc)
}

pub fn divide_by_f(pr: &PeriodRing, x: &PeriodElement, k: u32) -> Result<DivisionOutcome> {
    let prm = pr.prm();
    let f = pr.phi(&epoly_elem(pr), k as i32)?;
    let p = prm.p as i64;
    let shift = rint(prm.e * p.pow(k)); // X-degree of the leading monomial
    let v_thr = rint(p.pow(k)); // its valuation: v(X) = 1/e
    let lead = prm.gf.from_int(&prm.e_coeffs[prm.e as usize]);
    let lead_inv = prm.gf.inv(&lead)?;
    let f0 = PeriodElement { scale: 0, w: f.w.clone() };

    let mut residue = PeriodElement { scale: 0, w: x.w.clone() };
    let mut quot = pr.zero();
    let mut rem = pr.zero();
    for j in 0..pr.n() as u32 {
        let z = residue.w.comps[0].clone();
        let mut high: BTreeMap<(Rat, Rat), _> = BTreeMap::new();
        let mut low: BTreeMap<(Rat, Rat), _> = BTreeMap::new();
        for (&(alpha, beta), c) in &z.terms {
            if prm.mono_val(alpha, beta) >= v_thr {
                high.insert((alpha - shift, beta), prm.gf.mul(c, &lead_inv));
            } else {
                low.insert((alpha, beta), c.clone());
            }
        }
        let high = tilt_from_terms(pr, &high, z.drop.add_rat(-v_thr))?;
        let low = tilt_from_terms(pr, &low, z.drop)?;
        let q_lift = pr.teich(&high);
        let r_lift = pr.teich(&low);
        quot = pr.add(&quot, &pr.mul_p_pow(&q_lift, j));
        rem = pr.add(&rem, &pr.mul_p_pow(&r_lift, j));
        let reduced = pr.sub(&pr.sub(&residue, &pr.mul(&q_lift, &f0)), &r_lift);
        debug_assert!(reduced.w.comps[0].is_stored_zero());
        residue = PeriodElement {
            scale: 0,
            w: divide_p_charp(&pr.tr, &reduced.w)?,
        };
    }
    let in_ker = rem.is_stored_zero();
    quot.scale = x.scale;
    rem.scale = x.scale;
    Ok(DivisionOutcome { quot, rem, in_ker })
}
