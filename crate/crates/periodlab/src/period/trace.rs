//! Normalized trace projectors: R_n keeps the Teichmuller monomials whose
//! X-exponent lives at root depth <= n (denominator dividing p^n) and kills
//! the deeper ones. This realizes the level-n expansion filter
//! x = sum_{i} u^i a_i(x) |-> sum_{den(i) <= p^n} u^i a_i(x).

use super::{PeriodElement, PeriodRing};
use crate::error::{Error, Result};
use crate::tilt::den_exp;

fn trace_filtered(
    pr: &PeriodRing,
    x: &PeriodElement,
    n: u32,
    filter_y: bool,
) -> Result<PeriodElement> {
    if n > pr.prm().m {
        return Err(Error::Params(format!(
            "trace level {} beyond the configured root depth {}",
            n,
            pr.prm().m
        )));
    }
    let (terms, residual) = pr.mono_form(x)?;
    let mut kept = Vec::new();
    for t in terms {
        if !filter_y && t.beta != crate::rat::rint(0) {
            return Err(Error::Domain(
                "normalized trace is defined on the Y-free part; \
                 use the extended variant for mixed elements"
                    .into(),
            ));
        }
        let da = den_exp(t.alpha, pr.prm().p)?;
        let db = den_exp(t.beta, pr.prm().p)?;
        if da <= n && (!filter_y || db <= n) {
            kept.push(t);
        }
    }
    let mut out = pr.from_mono_terms(&kept)?;
    for (comp, r) in out.w.comps.iter_mut().zip(residual) {
        comp.drop = comp.drop.min(r);
    }
    out.scale = x.scale;
    Ok(out)
}

/// R_n on the Y-free part. Idempotent, the identity on level-n elements,
/// and linear over the level-n subring.
pub fn tate_trace(pr: &PeriodRing, x: &PeriodElement, n: u32) -> Result<PeriodElement> {
    trace_filtered(pr, x, n, false)
}

/// Model-extended trace that filters both exponent denominators. This is a
/// feature of the truncated model, not of the underlying theory for mixed
/// elements; it backs the b_n approximants.
pub fn tate_trace_extended(pr: &PeriodRing, x: &PeriodElement, n: u32) -> Result<PeriodElement> {
    trace_filtered(pr, x, n, true)
}
