//! Galois-analytic layer: truncated logarithms, the derivations nabla_tau
//! and nabla_gamma, analyticity profiles, Amice-style analytic expansions,
//! re-expansion in powers of b, Tate-Sen cocycle trivialization, and descent
//! to finite Frobenius levels.

mod amice;
mod berger;
mod log;
mod nabla;
mod profile;

pub use amice::{amice_decay_margins, amice_eval, amice_expand, AnalyticExpansion};
pub use berger::{
    approx_b, berger_expansion, bpoly_add, bpoly_derive, bpoly_eval, layer_val,
    monodromy_residual, monodromy_solve, residual_is_zero, BPoly, ConnMatrix,
};

pub use log::{f_poly, logab_identity_sides, partial_log, BiPoly};
pub use nabla::{nabla_gamma, nabla_tau, partial_gamma, theta_x};
pub use profile::{analyticity_profile, slope_threshold, ProfileReport};
