//! Valuations on period elements: the layer semivaluations w_k, the interval
//! valuations W^I and V^I = floor(W^I), with exactness certificates.
//!
//! For x = p^(-M) * sum_k p^k [y_k] and a single point s > 0,
//!   W^{[s,s]}(x) = min_k (k - M + c_s * v(y_k)),   c_s = (p-1)/(p*s),
//! where v(y_k) = v_tilt(comp_k) / p^k (the k-th root normalization).
//! W over [lo, hi] is the minimum of the endpoint evaluations (the map
//! c |-> W is concave, so interval infima sit at endpoints); for lo = 0 the
//! element must be integral layer-wise and the hi endpoint alone decides.
//!
//! Certificates: every answer carries a threshold below which it is exact,
//! built from the per-layer window-drop bounds and the p-adic precision
//! horizon N - M. Stored-zero layers contribute only to the threshold.

use super::{Interval, PeriodElement, PeriodRing};
use crate::error::{Error, Result};
use crate::rat::{rint, CertVal, Rat, ValBound};

fn c_factor(pr: &PeriodRing, s: Rat) -> Rat {
    let p = rint(pr.prm().p as i64);
    (p - rint(1)) / (p * s)
}

struct LayerData {
    /// v(y_k) from stored terms; Infinite when the layer is stored-zero.
    stored: ValBound,
    /// Tail bound on hidden content of y_k (already root-normalized).
    drop: ValBound,
}

fn layers(pr: &PeriodRing, x: &PeriodElement) -> Vec<LayerData> {
    let p = rint(pr.prm().p as i64);
    let mut pk = rint(1);
    let mut out = Vec::with_capacity(x.w.comps.len());
    for comp in &x.w.comps {
        let inv = rint(1) / pk;
        out.push(LayerData {
            stored: pr.tr.stored_min(comp).scale(inv),
            drop: comp.drop.scale(inv),
        });
        pk = pk * p;
    }
    out
}

/// Evaluate W at one point; `c` is None for the s = +inf endpoint (c = 0).
fn endpoint(layers: &[LayerData], scale: i64, c: Option<Rat>) -> (ValBound, ValBound) {
    let mut value = ValBound::Infinite;
    let mut threshold = ValBound::Infinite;
    for (k, ld) in layers.iter().enumerate() {
        let base = rint(k as i64 - scale);
        let weigh = |v: ValBound| -> ValBound {
            match (c, v) {
                (_, ValBound::Infinite) => ValBound::Infinite,
                (None, ValBound::Finite(_)) => ValBound::Finite(base),
                (Some(cf), vb) => vb.scale(cf).add_rat(base),
            }
        };
        value = value.min(weigh(ld.stored));
        threshold = threshold.min(weigh(ld.drop));
    }
    (value, threshold)
}

/// w_k(x) = inf_{i <= k} v(y_i) on the stored Witt vector of x.
pub fn wk_semival(pr: &PeriodRing, x: &PeriodElement, k: usize) -> Result<CertVal> {
    if k >= pr.n() {
        return Err(Error::Precision(format!(
            "w_{} asks beyond the precision budget N = {}",
            k,
            pr.n()
        )));
    }
    let ls = layers(pr, x);
    let mut value = ValBound::Infinite;
    let mut threshold = ValBound::Infinite;
    for ld in ls.iter().take(k + 1) {
        value = value.min(ld.stored);
        threshold = threshold.min(ld.drop);
    }
    Ok(CertVal { value, threshold })
}

/// W^I(x) with exactness certificate.
pub fn w_val(pr: &PeriodRing, x: &PeriodElement, i: &Interval) -> Result<CertVal> {
    let ls = layers(pr, x);
    let scale = x.scale as i64;
    let horizon = ValBound::Finite(rint(pr.n() as i64 - scale));

    let hi_c = match i.hi {
        ValBound::Finite(h) => Some(c_factor(pr, h)),
        ValBound::Infinite => None,
    };
    let (hi_value, hi_threshold) = endpoint(&ls, scale, hi_c);

    if i.lo == rint(0) {
        // Plus-part boundary: requires layerwise integrality, and then the
        // hi endpoint alone computes the infimum over (0, hi].
        for (k, ld) in ls.iter().enumerate() {
            if let ValBound::Finite(v) = ld.stored {
                if v < rint(0) {
                    return Err(Error::Domain(format!(
                        "layer {} has negative valuation {}; not in the [0, hi] ring",
                        k, v
                    )));
                }
            }
            if let ValBound::Finite(d) = ld.drop {
                if d < rint(0) {
                    return Err(Error::Uncertified(format!(
                        "layer {} may hide content of negative valuation (bound {})",
                        k, d
                    )));
                }
            }
        }
        return Ok(CertVal { value: hi_value, threshold: hi_threshold.min(horizon) });
    }

    let (lo_value, lo_threshold) = endpoint(&ls, scale, Some(c_factor(pr, i.lo)));
    Ok(CertVal {
        value: lo_value.min(hi_value),
        threshold: lo_threshold.min(hi_threshold).min(horizon),
    })
}

/// V^I(x) = floor(W^I(x)); defined on bounded intervals only.
pub fn v_val(pr: &PeriodRing, x: &PeriodElement, i: &Interval) -> Result<CertVal> {
    if i.hi.is_infinite() {
        return Err(Error::Params("V is defined over bounded intervals only".into()));
    }
    let w = w_val(pr, x, i)?;
    let value = match w.value {
        ValBound::Finite(v) => ValBound::Finite(v.floor()),
        ValBound::Infinite => ValBound::Infinite,
    };
    // Exactness transfers: hidden content above the threshold cannot change
    // the floor once threshold > floor(value).
    Ok(CertVal { value, threshold: w.threshold })
}
