//! The multiplicative section of reduction to layer 0 and the approximation
//! sequence it generates: x = sum_n p^n s(xbar_n) with xbar_0 the bottom
//! layer and x_(n+1) = (x_n - s(xbar_n))/p, an exact division because the
//! bottom layers cancel by construction.

use super::{PeriodElement, PeriodRing};
use crate::error::Result;
use crate::rat::{rint, ValBound};
use crate::tilt::Tilt;
use crate::witt::{divide_p_charp, witt_add, witt_sub, witt_zero, WittVector};

/// s(xbar): the Witt sum of the Teichmuller lifts of the monomials of xbar.
/// Unlike [xbar] itself this is additive-by-monomial, which is what makes
/// every Witt component isobaric of weight p^k in the input monomials; in
/// particular every layer of s(xbar) has the same rooted valuation as xbar.
pub fn section_s(pr: &PeriodRing, xbar: &Tilt) -> PeriodElement {
    let n = pr.n();
    let mut w = witt_zero(&pr.tr, n);
    for (&(alpha, beta), coeff) in &xbar.terms {
        let mono = pr
            .tr
            .monomial(alpha, beta, coeff.clone())
            .expect("monomials of a stored tilt are inside the window");
        let lift = crate::witt::teichmuller(&pr.tr, &mono, n);
        w = witt_add(&pr.tr, &pr.prm().table, &w, &lift);
    }
    if !xbar.drop.is_infinite() {
        // A hidden monomial of valuation >= D perturbs layer k by isobaric
        // products: one factor carries weight p^j of the new monomial, the
        // rest weight p^k - p^j of stored ones, so the rooted change is at
        // least (D + (p^k - 1) * min(0, v_min)) / p^k.
        let min0 = pr.tr.stored_min(xbar).min(ValBound::Finite(rint(0)));
        let p = pr.prm().p as i64;
        for (k, comp) in w.comps.iter_mut().enumerate() {
            let pk = rint(p.pow(k as u32));
            let bound = if k == 0 {
                xbar.drop
            } else {
                xbar.drop.add(min0.scale(pk - rint(1))).scale(rint(1) / pk)
            };
            comp.drop = comp.drop.min(bound);
        }
    }
    PeriodElement { scale: 0, w }
}

/// The first `rounds` terms xbar_0, xbar_1, ... of the approximation
/// sequence of the stored vector of x. Scale is ignored: the sequence
/// describes the stored value p^scale * x. Rounds beyond the precision
/// horizon are refused by the caller contract (rounds <= N).
pub fn approx_seq(pr: &PeriodRing, x: &PeriodElement, rounds: usize) -> Result<Vec<Tilt>> {
    assert!(rounds <= pr.n(), "approximation beyond the precision horizon");
    let mut current: WittVector<Tilt> = x.w.clone();
    let mut out = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let xbar = current.comps[0].clone();
        let lift = section_s(pr, &xbar);
        let diff = witt_sub(&pr.tr, &pr.prm().table, &current, &lift.w);
        debug_assert!(diff.comps[0].is_stored_zero());
        current = divide_p_charp(&pr.tr, &diff)?;
        out.push(xbar);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witt::Ring;
    use crate::params::ModelParams;
    use crate::period::wk_semival;
    use crate::rat::rint;

    fn ring(p: u64, e: i64) -> PeriodRing {
        PeriodRing::new(ModelParams::desk(p, e, 3, 2).unwrap())
    }

    fn sample(pr: &PeriodRing) -> PeriodElement {
        // [X] + p [X^2] + [X][Y]: layered and mixed, exact.
        let u = pr.teich(&pr.tr.x_mono(rint(1)).unwrap());
        let u2 = pr.teich(&pr.tr.x_mono(rint(2)).unwrap());
        let y = pr.teich(&pr.tr.y_mono(rint(1)).unwrap());
        pr.add(&pr.add(&u, &pr.mul_p_stored(&u2)), &pr.mul(&u, &y))
    }

    #[test]
    fn reconstruction_is_exact() {
        for (p, e) in [(2u64, 1i64), (3, 1), (3, 2)] {
            let pr = ring(p, e);
            let x = sample(&pr);
            let xbars = approx_seq(&pr, &x, pr.n()).unwrap();
            let mut recon = pr.zero();
            for (n, xbar) in xbars.iter().enumerate() {
                recon = pr.add(&recon, &pr.mul_p_pow(&section_s(&pr, xbar), n as u32));
            }
            assert!(pr.stored_eq(&recon, &x));
        }
    }

    #[test]
    fn section_layers_share_valuation() {
        let pr = ring(3, 1);
        // xbar = X + X^2 has v = 1; every layer of s(xbar) then has rooted
        // valuation exactly 1, not just >= (isobaric components).
        let xadd = pr.tr.add(
            &pr.tr.x_mono(rint(1)).unwrap(),
            &pr.tr.x_mono(rint(2)).unwrap(),
        );
        let s = section_s(&pr, &xadd);
        for k in 0..pr.n() {
            let w = wk_semival(&pr, &s, k).unwrap();
            assert!(w.is_exact());
            assert_eq!(w.value, crate::rat::ValBound::Finite(rint(1)));
        }
    }

    #[test]
    fn sequence_of_a_section_stops_after_one_term() {
        let pr = ring(2, 1);
        let xbar = pr.tr.add(
            &pr.tr.x_mono(rint(1)).unwrap(),
            &pr.tr.y_mono(rint(2)).unwrap(),
        );
        let s = section_s(&pr, &xbar);
        let seq = approx_seq(&pr, &s, pr.n()).unwrap();
        assert_eq!(seq[0], xbar);
        assert!(seq[1..].iter().all(|t| t.is_stored_zero()));
    }

    #[test]
    fn first_term_valuation_dominates() {
        // w_0(xbar_n) >= w_n(x): the n-th approximation term cannot be
        // smaller than the n-th partial valuation.
        let pr = ring(3, 1);
        let x = sample(&pr);
        let seq = approx_seq(&pr, &x, pr.n()).unwrap();
        for (n, xbar) in seq.iter().enumerate() {
            if xbar.is_stored_zero() {
                continue;
            }
            let wn = wk_semival(&pr, &x, n).unwrap().value.as_finite().unwrap();
            let w0 = pr.tr.stored_min(xbar).as_finite().unwrap();
            assert!(w0 >= wn, "term {}: {} < {}", n, w0, wn);
        }
    }
}
