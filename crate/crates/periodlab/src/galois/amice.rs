//! Binomial-basis expansions of the orbit map a -> tau^a(x).
//!
//! For x whose canonical monomials share one X-exponent alpha, every term
//! picks up the same factor (1+Y)^(a alpha) under tau^a.  With
//! base = [(1+Y)^alpha] - 1 the binomial theorem gives
//! tau^a(x) = sum_m C(a,m) x base^m exactly for nonnegative integers a,
//! and the sum extends to a in p^h Z_p by p-adic continuity.  The term
//! norms decay like p^(-m/p^h) at the matching grid radius, which is what
//! makes the orbit map analytic on p^h Z_p rather than merely continuous.

use crate::error::{Error, Result};
use crate::period::{w_val, Interval, PeriodElement, PeriodRing};
use crate::rat::{rat, rint, Rat, ValBound};
use crate::tilt::den_exp;
use crate::witt::Ring;
use crate::zp::{binom_mod_p, binom_rat_mod_ppow, vp_factorial, Zp};
use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

/// Expansion tau^a(x) = sum_m C(a,m) coeffs[m] for a in p^h Z_p.
///
/// `base` is [(1+Y)^alpha] - 1 and coeffs[m] = x * base^m; the list ends
/// with a single stored-zero coefficient (its certificates bound the tail)
/// unless the hard budget cut it first.
#[derive(Clone, Debug)]
pub struct AnalyticExpansion {
    /// Granularity exponent: evaluation points live in p^h Z_p.
    pub h: u32,
    /// Denominator exponent of the shared X-exponent (the phi^-j column).
    pub depth: u32,
    /// The increment [(1+Y)^alpha] - 1 whose powers generate the terms.
    pub base: PeriodElement,
    pub coeffs: Vec<PeriodElement>,
}

/// Shared X-exponent of the canonical monomials, or an error when the
/// terms span several columns (the orbit map is then not one binomial
/// family).  An element with no stored terms sits in the alpha = 0 column.
fn column_exponent(pr: &PeriodRing, x: &PeriodElement) -> Result<Rat> {
    let (terms, _residual) = pr.mono_form(x)?;
    let mut alpha: Option<Rat> = None;
    for t in &terms {
        match alpha {
            None => alpha = Some(t.alpha),
            Some(a) if a != t.alpha => {
                return Err(Error::Domain(format!(
                    "terms in distinct columns X^{} and X^{} have no common orbit expansion",
                    a, t.alpha
                )));
            }
            Some(_) => {}
        }
    }
    Ok(alpha.unwrap_or_else(|| rint(0)))
}

/// Expand the orbit map of x into the binomial basis at granularity p^h.
///
/// Requires a single-column x with nonnegative integer alpha * p^depth
/// (the increment series is then finite and exact) and h >= depth.
pub fn amice_expand(
    pr: &PeriodRing,
    x: &PeriodElement,
    h: u32,
) -> Result<AnalyticExpansion> {
    let p = pr.prm().p;
    let alpha = column_exponent(pr, x)?;
    let j = den_exp(alpha, p)?;
    if h < j {
        return Err(Error::Params(format!(
            "granularity p^{} is coarser than the column depth p^-{}",
            h, j
        )));
    }
    let pj = (p as i64).pow(j);
    let nx_r = alpha * rint(pj);
    if !nx_r.is_integer() || nx_r < rint(0) {
        return Err(Error::Domain(format!(
            "column exponent {} is not in the nonnegative cone",
            alpha
        )));
    }
    let nx = nx_r.to_integer() as u64;
    if rint(nx as i64) > rint(pr.prm().dy) * rint(pj) {
        return Err(Error::Precision(format!(
            "increment series for X^{} leaves the Y window",
            alpha
        )));
    }

    // base = [(1+Y)^(nx/p^j)] - 1; the tilt series is finite and exact for
    // a nonnegative integer nx (freshman's dream supplies the p^j-th root).
    let zp = Zp::new(p, 1);
    let gf = &pr.prm().gf;
    let mut series = pr.tr.constant(gf.one());
    for k in 1..=nx {
        let c = binom_mod_p(&zp, &BigUint::from(nx), k)?;
        if c == 0 {
            continue;
        }
        let mono = pr.tr.monomial(rint(0), rat(k as i64, 1) / rint(pj), gf.from_u64(c))?;
        series = pr.tr.add(&series, &mono);
    }
    let base = pr.sub(&pr.teich(&series), &pr.one());

    // Every layer of base vanishes at Y = 0, so multiplication raises the
    // minimal Y-degree of every layer; the powers leave the window in at
    // most dy * p^j steps per layer.
    let budget = (pr.prm().dy.max(1) as usize) * (pj as usize) * (pr.n() + 1) + 4;
    let mut coeffs = vec![x.clone()];
    for _ in 0..budget {
        if coeffs.last().unwrap().is_stored_zero() {
            break;
        }
        let next = pr.mul(coeffs.last().unwrap(), &base);
        coeffs.push(next);
    }
    Ok(AnalyticExpansion { h, depth: j, base, coeffs })
}

/// Evaluate the expansion at a in p^h Z_p: sum_m C(a,m) coeffs[m], with the
/// binomial coefficients reduced mod p^N (representative choice is absorbed
/// by the truncation ideal).
pub fn amice_eval(
    pr: &PeriodRing,
    exp: &AnalyticExpansion,
    a: &Rat,
) -> Result<PeriodElement> {
    let p = pr.prm().p;
    let prec = pr.n() as u32;
    let mut acc = pr.zero();
    for (m, w) in exp.coeffs.iter().enumerate() {
        let c = binom_rat_mod_ppow(a, m as u64, p, prec)?;
        if c.is_zero() {
            continue;
        }
        acc = pr.add(&acc, &pr.int_mul(&BigInt::from(c), w));
    }
    Ok(acc)
}

/// Certified decay margins: margins[m] is a proven lower bound for
/// W(C(a,m) coeffs[m]) - m/p^h at the grid radius r_(h - depth), valid for
/// every a in p^h Z_p.  All margins nonnegative certifies the term-norm
/// bound p^(-m/p^h).
///
/// The bound chains v_p(C(a,m)) >= -v_p(floor(m/p^h)!) with
/// W(coeffs[m]) >= m * W(base); the base norm must be window-certified.
pub fn amice_decay_margins(
    pr: &PeriodRing,
    exp: &AnalyticExpansion,
) -> Result<Vec<Rat>> {
    let p = pr.prm().p;
    let mut out = vec![rint(0)];
    if exp.coeffs.len() <= 1 || pr.is_stored_zero(&exp.base) {
        // A constant column: every later term is stored zero and the bound
        // holds trivially below the p^N horizon.
        return Ok(out);
    }
    let k = (exp.h - exp.depth) as i32;
    let r = pr.prm().grid_r(k);
    let i = Interval::new(r, ValBound::Finite(r))?;
    let wb = w_val(pr, &exp.base, &i)?;
    if !wb.is_exact() {
        return Err(Error::Uncertified(format!(
            "base norm {} at radius {} is dominated by window cuts",
            wb.value, r
        )));
    }
    let wv = match wb.value {
        ValBound::Finite(q) => q,
        ValBound::Infinite => unreachable!("stored-zero base handled above"),
    };
    let ph = (p as i64).pow(exp.h);
    for m in 1..exp.coeffs.len() as i64 {
        let binom_floor = vp_factorial((m / ph) as u64, p) as i64;
        out.push(rint(m) * wv - rint(binom_floor) - rat(m, ph));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;
    use crate::period::u_elem;

    fn ring(p: u64, e: i64) -> PeriodRing {
        PeriodRing::new(ModelParams::desk(p, e, 3, 2).unwrap())
    }

    #[test]
    fn constant_expansion_is_trivial() {
        for p in [2u64, 3, 5] {
            let pr = ring(p, 1);
            let exp = amice_expand(&pr, &pr.one(), 0).unwrap();
            assert!(pr.stored_eq(&exp.coeffs[0], &pr.one()));
            for w in &exp.coeffs[1..] {
                assert!(pr.is_stored_zero(w), "p = {}: nonzero tail term", p);
            }
            let margins = amice_decay_margins(&pr, &exp).unwrap();
            assert_eq!(margins, vec![rint(0)]);
        }
    }

    #[test]
    fn base_norm_matches_the_grid_formula() {
        // W of [(1+Y)^(1/p^n)] - 1 at the point radius r_k is
        // 1/((p-1) p^(n+k-1)): the bottom layer contributes the rooted
        // monomial Y^(1/p^n) and the Witt carries sit at weight >= 1.
        for (p, n, k) in [(2u64, 0u32, 1u32), (2, 1, 1), (3, 0, 1), (3, 1, 2), (5, 0, 1)] {
            let pr = ring(p, 1);
            let x = pr.phi(&u_elem(&pr), -(n as i32)).unwrap();
            let exp = amice_expand(&pr, &x, n + k).unwrap();
            assert_eq!(exp.depth, n);
            let r = pr.prm().grid_r(k as i32);
            let i = Interval::new(r, ValBound::Finite(r)).unwrap();
            let wb = w_val(&pr, &exp.base, &i).unwrap();
            assert!(wb.is_exact(), "(p,n,k) = ({},{},{}): {:?}", p, n, k, wb);
            let expect = rat(1, ((p as i64) - 1) * (p as i64).pow(n + k - 1));
            assert_eq!(wb.value, ValBound::Finite(expect));
        }
    }

    #[test]
    fn reconstruction_matches_the_action() {
        // Evaluating the expansion at a reproduces tau^a(x) on the nose:
        // layer 0 computes in the same window quotient on both paths, and
        // the Witt carries of the evaluation sum all fold away.  The
        // samples include p-adic non-integers (a = p^h/(1-p) has v_p = h)
        // and arguments whose action series is window-cut.
        for (p, n, k) in [(3u64, 0u32, 1i32), (3, 1, 1), (2, 0, 1), (2, 1, 2)] {
            let pr = ring(p, 1);
            let x = pr.phi(&u_elem(&pr), -(n as i32)).unwrap();
            let h = n + k as u32;
            let exp = amice_expand(&pr, &x, h).unwrap();
            let ph = (p as i64).pow(h);
            for a in [rint(ph), rint(2 * ph), rint(4 * ph), rint(5 * ph), rat(ph, 1 - p as i64)] {
                let ev = amice_eval(&pr, &exp, &a).unwrap();
                let tv = pr.act_tau(&x, &a).unwrap();
                assert!(
                    pr.stored_eq(&ev, &tv),
                    "(p,n,k) = ({},{},{}), a = {}: evaluation disagrees with the action",
                    p, n, k, a
                );
            }
        }
    }

    #[test]
    fn decay_margins_are_nonnegative() {
        for (p, n, k) in [(2u64, 0u32, 1u32), (3, 0, 1), (3, 1, 1), (5, 0, 1)] {
            let pr = ring(p, 1);
            let x = pr.phi(&u_elem(&pr), -(n as i32)).unwrap();
            let exp = amice_expand(&pr, &x, n + k).unwrap();
            let margins = amice_decay_margins(&pr, &exp).unwrap();
            assert!(margins.len() > 2);
            for (m, g) in margins.iter().enumerate() {
                assert!(
                    *g >= rint(0),
                    "(p,n,k) = ({},{},{}): margin {} at m = {}",
                    p, n, k, g, m
                );
            }
        }
    }

    #[test]
    fn mixed_columns_are_rejected() {
        let pr = ring(3, 1);
        let u = u_elem(&pr);
        let x = pr.add(&u, &pr.phi(&u, -1).unwrap());
        match amice_expand(&pr, &x, 1) {
            Err(Error::Domain(_)) => {}
            other => panic!("expected a column error, got {:?}", other.map(|e| e.coeffs.len())),
        }
        match amice_expand(&pr, &pr.phi(&u, -1).unwrap(), 0) {
            Err(Error::Params(_)) => {}
            other => panic!("expected a granularity error, got {:?}", other.map(|e| e.h)),
        }
    }
}
