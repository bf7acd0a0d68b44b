//! The tilted coefficient model: windowed bivariate monomials X^alpha Y^beta
//! over the residue field, with fractional exponents of bounded p-power
//! denominator and explicit tail certificates for window-dropped content.
//!
//! The X window complement is not an ideal (negative exponents re-enter the
//! window under multiplication), so every drop is recorded as a lower bound
//! on the valuation of the discarded terms; valuations report whether the
//! stored minimum is certified against that bound.

use crate::error::{Error, Result};
use crate::gf::GfElem;
use crate::params::ModelParams;
use crate::rat::{rat, rint, CertVal, Rat, ValBound};
use crate::witt::{PerfectCharP, Ring};
use crate::zp::binom_rat_mod_p;
use num_bigint::BigInt;

use std::collections::BTreeMap;
use std::sync::Arc;

/// A windowed tilt element: monomials plus a tail bound on dropped content.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tilt {
    /// (alpha, beta) -> nonzero coefficient, deterministically ordered.
    pub terms: BTreeMap<(Rat, Rat), GfElem>,
    /// Lower bound on v of everything that was dropped; Infinite if nothing was.
    pub drop: ValBound,
}

impl Tilt {
    pub fn stored_zero() -> Self {
        Tilt { terms: BTreeMap::new(), drop: ValBound::Infinite }
    }

    pub fn is_stored_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_certified_zero(&self) -> bool {
        self.terms.is_empty() && self.drop.is_infinite()
    }

    /// True when no Y appears in any stored monomial.
    pub fn is_y_free(&self) -> bool {
        self.terms.keys().all(|(_, b)| *b == rint(0))
    }
}

/// Exponent denominators must be pure p-powers; returns v_p(denominator).
pub fn den_exp(r: Rat, p: u64) -> Result<u32> {
    let mut d = *r.denom();
    debug_assert!(d > 0);
    let mut v = 0u32;
    while d % (p as i64) == 0 {
        d /= p as i64;
        v += 1;
    }
    if d != 1 {
        return Err(Error::Domain(format!(
            "exponent {} has a denominator not a power of {}",
            r, p
        )));
    }
    Ok(v)
}

/// Ring object for the tilt model.
#[derive(Clone, Debug)]
pub struct TiltRing {
    pub prm: Arc<ModelParams>,
}

impl TiltRing {
    pub fn new(prm: Arc<ModelParams>) -> Self {
        TiltRing { prm }
    }

    fn in_window(&self, alpha: Rat, beta: Rat) -> bool {
        alpha >= rint(self.prm.dx_neg)
            && alpha <= rint(self.prm.dx)
            && beta >= rint(self.prm.dy_neg)
            && beta <= rint(self.prm.dy)
    }

    fn check_denominators(&self, alpha: Rat, beta: Rat) -> Result<()> {
        let cap = self.prm.m_total();
        if den_exp(alpha, self.prm.p)? > cap || den_exp(beta, self.prm.p)? > cap {
            return Err(Error::DenominatorBudget(format!(
                "exponents ({}, {}) exceed denominator budget p^{}",
                alpha, beta, cap
            )));
        }
        Ok(())
    }

    /// Fold a candidate term into a map or into the drop certificate.
    fn fold(
        &self,
        map: &mut BTreeMap<(Rat, Rat), GfElem>,
        dropacc: &mut ValBound,
        alpha: Rat,
        beta: Rat,
        coeff: GfElem,
    ) {
        if self.prm.gf.is_zero(&coeff) {
            return;
        }
        if !self.in_window(alpha, beta) {
            *dropacc = (*dropacc).min(ValBound::Finite(self.prm.mono_val(alpha, beta)));
            return;
        }
        use std::collections::btree_map::Entry;
        match map.entry((alpha, beta)) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                let s = self.prm.gf.add(e.get(), &coeff);
                if self.prm.gf.is_zero(&s) {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    /// Build a single-monomial element (validated).
    pub fn monomial(&self, alpha: Rat, beta: Rat, coeff: GfElem) -> Result<Tilt> {
        self.check_denominators(alpha, beta)?;
        if !self.in_window(alpha, beta) {
            return Err(Error::WindowOverflow(format!(
                "monomial X^{} Y^{} outside window [{}, {}] x [{}, {}]",
                alpha, beta, self.prm.dx_neg, self.prm.dx, self.prm.dy_neg, self.prm.dy
            )));
        }
        let mut t = Tilt::stored_zero();
        let mut dr = ValBound::Infinite;
        self.fold(&mut t.terms, &mut dr, alpha, beta, coeff);
        t.drop = dr;
        Ok(t)
    }

    pub fn x_mono(&self, alpha: Rat) -> Result<Tilt> {
        self.monomial(alpha, rint(0), self.prm.gf.one())
    }

    pub fn y_mono(&self, beta: Rat) -> Result<Tilt> {
        self.monomial(rint(0), beta, self.prm.gf.one())
    }

    pub fn constant(&self, c: GfElem) -> Tilt {
        let mut t = Tilt::stored_zero();
        if !self.prm.gf.is_zero(&c) {
            t.terms.insert((rint(0), rint(0)), c);
        }
        t
    }

    /// Minimum valuation among stored terms (Infinite for stored zero).
    pub fn stored_min(&self, x: &Tilt) -> ValBound {
        x.terms
            .keys()
            .map(|&(a, b)| ValBound::Finite(self.prm.mono_val(a, b)))
            .fold(ValBound::Infinite, ValBound::min)
    }

    /// Lower bound on the valuation of the full content (stored + dropped).
    pub fn lower_bound(&self, x: &Tilt) -> ValBound {
        self.stored_min(x).min(x.drop)
    }

    /// The tilted valuation with its exactness certificate.
    pub fn v_tilt(&self, x: &Tilt) -> CertVal {
        CertVal { value: self.stored_min(x), threshold: x.drop }
    }

    /// Multiply by a single monomial (window-folding, exact certificate).
    pub fn mul_mono(&self, x: &Tilt, da: Rat, db: Rat, c: &GfElem) -> Result<Tilt> {
        self.check_denominators(da, db)?;
        let mut out = Tilt::stored_zero();
        let shift_v = self.prm.mono_val(da, db);
        let mut dr = x.drop.add_rat(shift_v);
        if self.prm.gf.is_zero(c) {
            return Ok(Tilt::stored_zero());
        }
        for (&(a, b), coeff) in &x.terms {
            self.fold(&mut out.terms, &mut dr, a + da, b + db, self.prm.gf.mul(coeff, c));
        }
        out.drop = dr;
        Ok(out)
    }

    /// Scale all coefficients by a field element.
    pub fn scale_coeff(&self, x: &Tilt, c: &GfElem) -> Tilt {
        if self.prm.gf.is_zero(c) {
            return Tilt::stored_zero();
        }
        Tilt {
            terms: x
                .terms
                .iter()
                .map(|(k, v)| (*k, self.prm.gf.mul(v, c)))
                .collect(),
            drop: x.drop,
        }
    }

    /// Frobenius power phi^n with the internal denominator cap.
    pub fn phi_internal(&self, x: &Tilt, n: i32) -> Result<Tilt> {
        let mut scale = rint(1);
        let p = rint(self.prm.p as i64);
        if n >= 0 {
            for _ in 0..n {
                scale = scale * p;
            }
        } else {
            for _ in 0..(-n) {
                scale = scale / p;
            }
        }
        let mut out = Tilt::stored_zero();
        let mut dr = x.drop.scale(scale);
        for (&(a, b), coeff) in &x.terms {
            let (na, nb) = (a * scale, b * scale);
            self.check_denominators(na, nb)?;
            let c = if n >= 0 {
                let mut c = coeff.clone();
                for _ in 0..n {
                    c = self.prm.gf.frobenius(&c);
                }
                c
            } else {
                let mut c = coeff.clone();
                for _ in 0..(-n) {
                    c = self.prm.gf.pth_root(&c);
                }
                c
            };
            self.fold(&mut out.terms, &mut dr, na, nb, c);
        }
        out.drop = dr;
        Ok(out)
    }

    /// Public Frobenius power: |n| limited by the declared budget m.
    pub fn phi(&self, x: &Tilt, n: i32) -> Result<Tilt> {
        if n < 0 && (-n) as u32 > self.prm.m {
            return Err(Error::DenominatorBudget(format!(
                "phi^{} exceeds declared root depth m = {}",
                n, self.prm.m
            )));
        }
        self.phi_internal(x, n)
    }

    /// tau^a for an exact p-adic integer a: each monomial X^alpha Y^beta maps
    /// to X^alpha Y^beta (1+Y)^(a alpha), computed exactly by phi-conjugation
    /// when alpha is fractional. Requires beta >= 0 on every stored monomial.
    pub fn act_tau(&self, x: &Tilt, a: &Rat) -> Result<Tilt> {
        den_exp_unit(a, self.prm.p)?;
        let p = self.prm.p;
        let mut out = Tilt::stored_zero();
        let mut dr = x.drop; // tau is an isometry; hidden content keeps its bound
        for (&(alpha, beta), coeff) in &x.terms {
            if beta < rint(0) {
                return Err(Error::Domain(format!(
                    "tau is defined on beta >= 0 monomials; found Y^{}",
                    beta
                )));
            }
            let j = den_exp(alpha, p)?;
            let pj = rint((p as i64).pow(j));
            let alpha_int = alpha * pj;
            debug_assert!(alpha_int.is_integer());
            let arg = *a * alpha_int;
            // Series exponent step is 1/p^j; keep terms with beta + k/p^j <= dy.
            let kmax_r = (rint(self.prm.dy) - beta) * pj;
            let kmax = kmax_r.floor().to_integer().max(0) as u64;
            for k in 0..=kmax {
                let c = binom_rat_mod_p(&arg, k, p)?;
                if c == 0 {
                    continue;
                }
                let cc = self.prm.gf.mul(coeff, &self.prm.gf.from_u64(c));
                self.fold(&mut out.terms, &mut dr, alpha, beta + rat(k as i64, 1) / pj, cc);
            }
            // Tail of the binomial series beyond the window; a nonnegative
            // integer exponent within range terminates exactly, no tail.
            let exact_series = arg.is_integer() && arg >= rint(0) && arg <= rint(kmax as i64);
            if !exact_series {
                let tail_beta = beta + rat(kmax as i64 + 1, 1) / pj;
                dr = dr.min(ValBound::Finite(self.prm.mono_val(alpha, tail_beta)));
            }
        }
        out.drop = dr;
        Ok(out)
    }

    /// The series (1+Y)^c - 1 truncated at the Y window.
    fn gamma_series(&self, c: &Rat) -> Result<Tilt> {
        let mut out = Tilt::stored_zero();
        let mut dr = ValBound::Finite(self.prm.mono_val(rint(0), rint(self.prm.dy + 1)));
        for k in 1..=self.prm.dy as u64 {
            let b = binom_rat_mod_p(c, k, self.prm.p)?;
            if b == 0 {
                continue;
            }
            self.fold(&mut out.terms, &mut dr, rint(0), rint(k as i64), self.prm.gf.from_u64(b));
        }
        // Exact when the binomial series terminates inside the window.
        if c.is_integer() && *c >= rint(0) && *c <= rint(self.prm.dy) {
            dr = ValBound::Infinite;
        }
        out.drop = dr;
        Ok(out)
    }

    /// gamma_c: fixes X, sends Y to (1+Y)^c - 1. c must be a unit in Z_p,
    /// and 1 mod 4 when p = 2 (so that c lies in the procyclic part).
    /// Fractional Y-exponents are handled by exact phi-conjugation.
    pub fn act_gamma(&self, x: &Tilt, c: &Rat) -> Result<Tilt> {
        self.check_gamma_exponent(c)?;
        let p = self.prm.p;
        let g = self.gamma_series(c)?;
        let mut acc = Tilt::stored_zero();
        let mut dr = x.drop; // gamma_c is an isometry
        for (&(alpha, beta), coeff) in &x.terms {
            if beta < rint(0) {
                return Err(Error::Domain(format!(
                    "gamma is defined on beta >= 0 monomials; found Y^{}",
                    beta
                )));
            }
            let piece = if beta == rint(0) {
                self.monomial(alpha, rint(0), coeff.clone())?
            } else {
                let j = den_exp(beta, p)?;
                let pj = rint((p as i64).pow(j));
                let beta_int = (beta * pj).to_integer() as u64;
                let powed = self.pow_u(&g, beta_int);
                let rooted = self.phi_internal(&powed, -(j as i32))?;
                // gamma fixes the X part and the coefficient.
                self.mul_mono(&rooted, alpha, rint(0), coeff)?
            };
            dr = dr.min(piece.drop);
            for (&(a2, b2), c2) in &piece.terms {
                self.fold(&mut acc.terms, &mut dr, a2, b2, c2.clone());
            }
        }
        acc.drop = dr;
        Ok(acc)
    }

    pub fn check_gamma_exponent(&self, c: &Rat) -> Result<()> {
        den_exp_unit(c, self.prm.p)?;
        if c.numer() % (self.prm.p as i64) == 0 {
            return Err(Error::Domain(format!("gamma exponent {} is not a unit", c)));
        }
        if self.prm.p == 2 {
            // c mod 4 must be 1: numerator * denominator^(-1) mod 4.
            let n = c.numer().rem_euclid(4);
            let d = c.denom().rem_euclid(4);
            // d is odd so d^(-1) mod 4 = d.
            if (n * d).rem_euclid(4) != 1 {
                return Err(Error::Domain(format!(
                    "gamma exponent {} must be 1 mod 4 when p = 2",
                    c
                )));
            }
        }
        Ok(())
    }
}

fn den_exp_unit(a: &Rat, p: u64) -> Result<()> {
    if a.denom() % (p as i64) == 0 {
        return Err(Error::Domain(format!("{} is not a p-adic integer", a)));
    }
    Ok(())
}

impl Ring for TiltRing {
    type Elem = Tilt;

    fn zero(&self) -> Tilt {
        Tilt::stored_zero()
    }

    fn one(&self) -> Tilt {
        self.constant(self.prm.gf.one())
    }

    fn add(&self, a: &Tilt, b: &Tilt) -> Tilt {
        let mut out = a.clone();
        let mut dr = a.drop.min(b.drop);
        for (&k, c) in &b.terms {
            self.fold(&mut out.terms, &mut dr, k.0, k.1, c.clone());
        }
        out.drop = dr;
        out
    }

    fn neg(&self, a: &Tilt) -> Tilt {
        Tilt {
            terms: a
                .terms
                .iter()
                .map(|(k, c)| (*k, self.prm.gf.neg(c)))
                .collect(),
            drop: a.drop,
        }
    }

    fn mul(&self, a: &Tilt, b: &Tilt) -> Tilt {
        let mut out = Tilt::stored_zero();
        // Hidden-content bounds: e_a * full(b), e_b * full(a), e_a * e_b.
        let mut dr = a
            .drop
            .add(self.lower_bound(b))
            .min(b.drop.add(self.lower_bound(a)))
            .min(a.drop.add(b.drop));
        for (&(a1, b1), c1) in &a.terms {
            for (&(a2, b2), c2) in &b.terms {
                let c = self.prm.gf.mul(c1, c2);
                self.fold(&mut out.terms, &mut dr, a1 + a2, b1 + b2, c);
            }
        }
        out.drop = dr;
        out
    }

    fn from_int(&self, n: &BigInt) -> Tilt {
        self.constant(self.prm.gf.from_int(n))
    }

    fn is_zero(&self, a: &Tilt) -> bool {
        a.is_stored_zero()
    }
}

impl PerfectCharP for TiltRing {
    fn p(&self) -> u64 {
        self.prm.p
    }

    fn frobenius_elem(&self, a: &Tilt) -> Tilt {
        self.phi_internal(a, 1)
            .expect("raising exponents never exceeds the denominator budget")
    }

    fn pth_root_elem(&self, a: &Tilt) -> Result<Tilt> {
        self.phi_internal(a, -1)
    }
}
