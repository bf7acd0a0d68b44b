//! Truncated period-ring elements: p^(-scale) times a Witt vector of tilt
//! elements, exact modulo p^(N - scale) and the declared exponent windows.
//!
//! The canonical monomial form (`mono_form`) peels an element into a sum of
//! p^i times Teichmuller lifts of single monomials; it is the bridge every
//! monomial-defined operator (derivations, trace maps, conversions) uses.

mod divide;
mod laurent;
mod section;
mod special;
mod trace;
mod units;
mod valuation;

pub use divide::{divide_by_f, DivisionOutcome};
pub use laurent::{
    calw_val, decompose_pm, embed_laurent, laurent_from_period, presentation_decompose,
    LaurentElement, LaurentRing, WkElem,
};
pub use section::{approx_seq, section_s};
pub use special::{
    b_elem, binv_elem, epoly_elem, eps_elem, lambda_data, q_elem, special_element, t_data,
    u_elem, v_elem, SpecialName,
};
pub use trace::{tate_trace, tate_trace_extended};
pub use units::{invert_factored, is_unit, FactoredInverse};
pub use valuation::{v_val, w_val, wk_semival};

use crate::error::{Error, Result};
use crate::gf::GfElem;
use crate::params::ModelParams;
use crate::rat::{rint, Rat, ValBound};
use crate::tilt::{Tilt, TiltRing};
use crate::witt::{
    mul_p_charp, teichmuller, witt_add, witt_mul, witt_neg, witt_zero, PerfectCharP, Ring,
    WittVector,
};
use num_bigint::BigInt;
use std::sync::Arc;

/// A closed valuation interval [lo, hi] with hi possibly infinite.
/// lo = hi = 0 is rejected; lo = 0 means the plus-part boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rat,
    pub hi: ValBound,
}

impl Interval {
    pub fn new(lo: Rat, hi: ValBound) -> Result<Self> {
        if lo < rint(0) {
            return Err(Error::Params(format!("interval lower endpoint {} < 0", lo)));
        }
        match hi {
            ValBound::Finite(h) => {
                if h < lo {
                    return Err(Error::Params(format!("interval [{}, {}] is empty", lo, h)));
                }
                if h == rint(0) {
                    return Err(Error::Params("interval [0, 0] is outside the model".into()));
                }
            }
            ValBound::Infinite => {}
        }
        Ok(Interval { lo, hi })
    }

    /// Grid interval [r_jlo, r_jhi] (or [r_jlo, +inf)).
    pub fn grid(prm: &ModelParams, jlo: i32, jhi: Option<i32>) -> Result<Self> {
        let lo = prm.grid_r(jlo);
        let hi = match jhi {
            Some(j) => ValBound::Finite(prm.grid_r(j)),
            None => ValBound::Infinite,
        };
        Interval::new(lo, hi)
    }

    /// The plus-part interval [0, r_j].
    pub fn plus(prm: &ModelParams, jhi: i32) -> Result<Self> {
        Interval::new(rint(0), ValBound::Finite(prm.grid_r(jhi)))
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Truncated period-ring element: p^(-scale) * (stored Witt vector).
/// Known modulo p^(N - scale); the tilt components carry window certificates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodElement {
    pub scale: u32,
    pub w: WittVector<Tilt>,
}

impl PeriodElement {
    pub fn is_stored_zero(&self) -> bool {
        self.w.comps.iter().all(|c| c.is_stored_zero())
    }
}

/// A single term of the canonical monomial form:
/// p^layer * [coeff * X^alpha * Y^beta] (exponents already rooted).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonoTerm {
    pub layer: usize,
    pub coeff: GfElem,
    pub alpha: Rat,
    pub beta: Rat,
}

/// Ring object for period elements.
#[derive(Clone, Debug)]
pub struct PeriodRing {
    pub tr: TiltRing,
}

impl PeriodRing {
    pub fn new(prm: Arc<ModelParams>) -> Self {
        PeriodRing { tr: TiltRing::new(prm) }
    }

    pub fn prm(&self) -> &ModelParams {
        &self.tr.prm
    }

    pub fn n(&self) -> usize {
        self.prm().n_len
    }

    pub fn zero(&self) -> PeriodElement {
        PeriodElement { scale: 0, w: witt_zero(&self.tr, self.n()) }
    }

    pub fn one(&self) -> PeriodElement {
        PeriodElement { scale: 0, w: teichmuller(&self.tr, &self.tr.one(), self.n()) }
    }

    pub fn from_int(&self, n: &BigInt) -> PeriodElement {
        PeriodElement { scale: 0, w: crate::witt::witt_from_int(&self.tr, &self.prm().table, n) }
    }

    /// Teichmuller lift of a tilt element.
    pub fn teich(&self, t: &Tilt) -> PeriodElement {
        PeriodElement { scale: 0, w: teichmuller(&self.tr, t, self.n()) }
    }

    /// Known absolute p-adic precision: the element is exact mod p^(this).
    pub fn precision(&self, x: &PeriodElement) -> i64 {
        self.n() as i64 - x.scale as i64
    }

    /// Multiply the stored vector by p (value * p at equal scale).
    pub fn mul_p_stored(&self, x: &PeriodElement) -> PeriodElement {
        PeriodElement { scale: x.scale, w: mul_p_charp(&self.tr, &x.w) }
    }

    /// Multiply by p^j (j >= 0) without touching the scale.
    pub fn mul_p_pow(&self, x: &PeriodElement, j: u32) -> PeriodElement {
        let mut out = x.clone();
        for _ in 0..j {
            out = self.mul_p_stored(&out);
        }
        out
    }

    /// Rewrite at a strictly larger scale (same value, lower precision).
    pub fn raise_scale(&self, x: &PeriodElement, to: u32) -> PeriodElement {
        assert!(to >= x.scale);
        let mut out = x.clone();
        for _ in x.scale..to {
            out = self.mul_p_stored(&out);
            out.scale += 1;
        }
        out
    }

    /// Divide the value by p (scale bump; representation-level, always exact).
    pub fn div_p(&self, x: &PeriodElement) -> PeriodElement {
        PeriodElement { scale: x.scale + 1, w: x.w.clone() }
    }

    /// Canonical minimal scale: strip p-divisible bottom layers. Hidden
    /// content certificates of the stripped layer are folded into the
    /// remaining ones (rooted, since unrooting by p divides valuations by p).
    pub fn normalize_scale(&self, x: &PeriodElement) -> PeriodElement {
        let mut out = x.clone();
        let p = rint(self.prm().p as i64);
        while out.scale > 0 && out.w.comps[0].is_stored_zero() {
            let d0 = out.w.comps[0].drop;
            let mut comps = Vec::with_capacity(self.n());
            for i in 1..self.n() {
                match self.tr.pth_root_elem(&out.w.comps[i]) {
                    Ok(mut rooted) => {
                        rooted.drop = rooted.drop.min(d0.scale(rint(1) / p));
                        comps.push(rooted);
                    }
                    Err(_) => return out, // denominator budget: stop normalizing
                }
            }
            let mut top = Tilt::stored_zero();
            // The freed top slot is unknown at the new precision; record the
            // stripped layer's certificate there as well.
            top.drop = d0.scale(rint(1) / p);
            comps.push(top);
            out = PeriodElement { scale: out.scale - 1, w: WittVector { comps } };
        }
        out
    }

    fn aligned(&self, a: &PeriodElement, b: &PeriodElement) -> (PeriodElement, PeriodElement) {
        let m = a.scale.max(b.scale);
        (self.raise_scale(a, m), self.raise_scale(b, m))
    }

    pub fn add(&self, a: &PeriodElement, b: &PeriodElement) -> PeriodElement {
        let (a, b) = self.aligned(a, b);
        PeriodElement {
            scale: a.scale,
            w: witt_add(&self.tr, &self.prm().table, &a.w, &b.w),
        }
    }

    pub fn neg(&self, a: &PeriodElement) -> PeriodElement {
        PeriodElement { scale: a.scale, w: witt_neg(&self.tr, &self.prm().table, &a.w) }
    }

    pub fn sub(&self, a: &PeriodElement, b: &PeriodElement) -> PeriodElement {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &PeriodElement, b: &PeriodElement) -> PeriodElement {
        PeriodElement {
            scale: a.scale + b.scale,
            w: witt_mul(&self.tr, &self.prm().table, &a.w, &b.w),
        }
    }

    pub fn pow_u(&self, a: &PeriodElement, mut n: u64) -> PeriodElement {
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

    /// Multiply by an ordinary integer.
    pub fn int_mul(&self, n: &BigInt, x: &PeriodElement) -> PeriodElement {
        let img = self.from_int(n);
        self.mul(&img, x)
    }

    /// Multiply by the inverse of an integer unit (exact in W_N: integers
    /// congruent mod p^N act identically).
    pub fn unit_int_div(&self, x: &PeriodElement, u: i64) -> Result<PeriodElement> {
        let p = self.prm().p;
        if u % p as i64 == 0 {
            return Err(Error::NotUnit(format!("{} is not a p-adic unit", u)));
        }
        let zp = crate::zp::Zp::new(p, self.n() as u32);
        let inv = zp.inv(&zp.reduce(&BigInt::from(u)))?;
        Ok(self.int_mul(&BigInt::from(inv), x))
    }

    pub fn is_stored_zero(&self, x: &PeriodElement) -> bool {
        x.w.comps.iter().all(|c| c.is_stored_zero())
    }

    /// Stored equality after scale alignment (equality mod the truncation ideal).
    pub fn stored_eq(&self, a: &PeriodElement, b: &PeriodElement) -> bool {
        self.is_stored_zero(&self.sub(a, b))
    }

    /// Per-layer certificates of a difference: tail bounds of the stored-zero
    /// residual components (what "equal" is exact modulo).
    pub fn diff_certificate(&self, a: &PeriodElement, b: &PeriodElement) -> Vec<ValBound> {
        let d = self.sub(a, b);
        d.w.comps.iter().map(|c| c.drop).collect()
    }

    /// Frobenius power: componentwise on tilt coordinates, scale untouched.
    pub fn phi(&self, x: &PeriodElement, n: i32) -> Result<PeriodElement> {
        let comps: Result<Vec<Tilt>> =
            x.w.comps.iter().map(|c| self.tr.phi(c, n)).collect();
        Ok(PeriodElement { scale: x.scale, w: WittVector { comps: comps? } })
    }

    /// tau^a componentwise (functoriality of the Witt construction).
    pub fn act_tau(&self, x: &PeriodElement, a: &Rat) -> Result<PeriodElement> {
        let comps: Result<Vec<Tilt>> =
            x.w.comps.iter().map(|c| self.tr.act_tau(c, a)).collect();
        Ok(PeriodElement { scale: x.scale, w: WittVector { comps: comps? } })
    }

    /// gamma_c componentwise.
    pub fn act_gamma(&self, x: &PeriodElement, c: &Rat) -> Result<PeriodElement> {
        let comps: Result<Vec<Tilt>> =
            x.w.comps.iter().map(|c2| self.tr.act_gamma(c2, c)).collect();
        Ok(PeriodElement { scale: x.scale, w: WittVector { comps: comps? } })
    }

    /// Canonical monomial form of the stored Witt vector: greedy layer peel.
    /// Returns the terms plus the residual certificates per layer (bounds on
    /// content that the peel could not represent).
    pub fn mono_form(&self, x: &PeriodElement) -> Result<(Vec<MonoTerm>, Vec<ValBound>)> {
        let n = self.n();
        let p = rint(self.prm().p as i64);
        let mut rem = x.w.clone();
        let mut terms = Vec::new();
        for i in 0..n {
            let layer = rem.comps[i].clone();
            if layer.is_stored_zero() {
                continue;
            }
            let mut pi = rint(1);
            for _ in 0..i {
                pi = pi * p;
            }
            // Witt sum of the Teichmuller terms of this layer, at level p^i.
            let mut sum_i = witt_zero(&self.tr, n);
            for (&(a, bta), c) in &layer.terms {
                let ra = a / pi;
                let rb = bta / pi;
                crate::tilt::den_exp(ra, self.prm().p).map_err(|_| {
                    Error::DenominatorBudget(format!(
                        "layer {} monomial X^{} needs roots beyond the budget",
                        i, a
                    ))
                })?;
                let mut rc = c.clone();
                for _ in 0..i {
                    rc = self.prm().gf.pth_root(&rc);
                }
                let mono = self.tr.monomial(ra, rb, rc.clone())?;
                terms.push(MonoTerm { layer: i, coeff: rc, alpha: ra, beta: rb });
                let mut teich_term = teichmuller(&self.tr, &mono, n);
                for _ in 0..i {
                    teich_term = mul_p_charp(&self.tr, &teich_term);
                }
                sum_i = witt_add(&self.tr, &self.prm().table, &sum_i, &teich_term);
            }
            rem = crate::witt::witt_sub(&self.tr, &self.prm().table, &rem, &sum_i);
            debug_assert!(rem.comps[i].is_stored_zero());
        }
        let residual = rem.comps.iter().map(|c| c.drop).collect();
        Ok((terms, residual))
    }

    /// Rebuild a period element from monomial-form terms (scale 0).
    pub fn from_mono_terms(&self, terms: &[MonoTerm]) -> Result<PeriodElement> {
        let n = self.n();
        let mut acc = witt_zero(&self.tr, n);
        for t in terms {
            let mono = self.tr.monomial(t.alpha, t.beta, t.coeff.clone())?;
            let mut te = teichmuller(&self.tr, &mono, n);
            for _ in 0..t.layer {
                te = mul_p_charp(&self.tr, &te);
            }
            acc = witt_add(&self.tr, &self.prm().table, &acc, &te);
        }
        Ok(PeriodElement { scale: 0, w: acc })
    }

    /// True when every stored monomial of every layer is Y-free.
    pub fn is_y_free(&self, x: &PeriodElement) -> bool {
        x.w.comps.iter().all(|c| c.is_y_free())
    }
}
