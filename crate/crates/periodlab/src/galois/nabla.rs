//! The derivations of the model carried by t: nabla_tau multiplies each
//! canonical monomial by t times its X-exponent; nabla_gamma is the
//! Y-direction analogue t (1+Y) d/dY. Both act termwise on the canonical
//! monomial form p^i [c X^alpha Y^beta]; for rooted exponents the formula
//! is conjugated through the Frobenius, which contributes the 1/p^j factor
//! hidden in the rooted (1+Y)-term.
//!
//! Residual window certificates of the input are folded into the output's
//! bottom-layer drop at their worst-case rescaling, so uncertified content
//! never gains a certificate by passing through a derivation.

use crate::error::Result;
use crate::period::{binv_elem, t_data, PeriodElement, PeriodRing};
use crate::rat::{rint, Rat, ValBound};
use crate::tilt::den_exp;
use crate::witt::Ring;
use num_bigint::BigInt;

/// Multiply by a rational whose denominator is a p-power: the integer part
/// goes through the ring, the p-part is a scale bump.
fn rat_mul(pr: &PeriodRing, q: Rat, x: &PeriodElement) -> Result<PeriodElement> {
    let j = den_exp(q, pr.prm().p)?;
    let num = (q * rint((pr.prm().p as i64).pow(j))).to_integer();
    let mut out = pr.int_mul(&BigInt::from(num), x);
    for _ in 0..j {
        out = pr.div_p(&out);
    }
    Ok(out)
}

/// Fold the peel residuals into the bottom layer of the output at their
/// worst-case rescaling (content at layer k may surface k layers lower,
/// dividing a nonnegative bound by p^k; negative bounds stay put).
fn carry_residuals(pr: &PeriodRing, out: &mut PeriodElement, residual: &[ValBound]) {
    let p = rint(pr.prm().p as i64);
    for (k, r) in residual.iter().enumerate() {
        if let ValBound::Finite(d) = r {
            let mut scaled = *d;
            if scaled >= rint(0) {
                for _ in 0..k {
                    scaled = scaled / p;
                }
            }
            out.w.comps[0].drop = out.w.comps[0].drop.min(ValBound::Finite(scaled));
        }
    }
}

/// Termwise X-exponent multiplication: p^i [c X^a Y^b] -> a p^i [c X^a Y^b].
pub fn theta_x(pr: &PeriodRing, x: &PeriodElement) -> Result<PeriodElement> {
    let (terms, residual) = pr.mono_form(x)?;
    let mut acc = pr.zero();
    for term in &terms {
        if term.alpha == rint(0) {
            continue;
        }
        let piece = pr.from_mono_terms(std::slice::from_ref(term))?;
        acc = pr.add(&acc, &rat_mul(pr, term.alpha, &piece)?);
    }
    let mut out = acc;
    carry_residuals(pr, &mut out, &residual);
    out.scale += x.scale;
    Ok(out)
}

/// nabla_tau = t * theta_x: the infinitesimal tau-action.
pub fn nabla_tau(pr: &PeriodRing, x: &PeriodElement) -> Result<PeriodElement> {
    let (t, _) = t_data(pr)?;
    Ok(pr.mul(&t, &theta_x(pr, x)?))
}

/// nabla_gamma on one canonical monomial:
/// p^i [c X^a Y^b] -> b t p^i [c X^a (Y^(b - q) + Y^b)], q = p^(-den_exp(b)).
pub fn nabla_gamma(pr: &PeriodRing, x: &PeriodElement) -> Result<PeriodElement> {
    let (t, _) = t_data(pr)?;
    let (terms, residual) = pr.mono_form(x)?;
    let p = pr.prm().p;
    let mut acc = pr.zero();
    for term in &terms {
        if term.beta == rint(0) {
            continue;
        }
        let j = den_exp(term.beta, p)?;
        let q = rint(1) / rint((p as i64).pow(j));
        let lower = pr.tr.monomial(term.alpha, term.beta - q, term.coeff.clone())?;
        let upper = pr.tr.monomial(term.alpha, term.beta, term.coeff.clone())?;
        let mono = pr.teich(&pr.tr.add(&lower, &upper));
        let mut piece = mono;
        for _ in 0..term.layer {
            piece = pr.mul_p_stored(&piece);
        }
        acc = pr.add(&acc, &rat_mul(pr, term.beta, &piece)?);
    }
    let mut out = pr.mul(&t, &acc);
    carry_residuals(pr, &mut out, &residual);
    out.scale += x.scale;
    Ok(out)
}

/// partial_gamma = binv * nabla_gamma, the normalized gamma-derivation with
/// partial_gamma(b) = 1 up to certificates. Needs a radius certifying the
/// inverse of b; radius violations carry the certifying grid point.
pub fn partial_gamma(pr: &PeriodRing, x: &PeriodElement, r: Rat) -> Result<PeriodElement> {
    let binv = binv_elem(pr, r)?;
    Ok(pr.mul(&binv, &nabla_gamma(pr, x)?))
}
