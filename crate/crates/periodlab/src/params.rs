//! Shared model parameters: prime, residue field, ramification, windows,
//! truncation depths, and the Eisenstein data of the base extension.

use crate::error::{Error, Result};
use crate::gf::Gf;
use crate::rat::{rat, Rat};
use crate::wittpoly::{build_witt_table, WittTable};
use crate::zp::Zp;
use num_bigint::BigInt;
use num_traits::Zero;
use std::sync::Arc;

/// Parameters of the truncated model. Construct through [`ModelParams::new`]
/// so the invariants are checked once and everything downstream can rely on
/// them.
#[derive(Clone, Debug)]
pub struct ModelParams {
    /// Residue characteristic.
    pub p: u64,
    /// Residue field k = F_{p^f}.
    pub gf: Gf,
    /// Ramification index of K over Q_p (degree of the Eisenstein polynomial).
    pub e: i64,
    /// Witt vector length N: p-adic statements live mod p^N.
    pub n_len: usize,
    /// Public Frobenius-inverse depth: exponent denominators callers may request.
    pub m: u32,
    /// X-exponent window: alpha in [dx_neg, dx].
    pub dx: i64,
    pub dx_neg: i64,
    /// Y-exponent window: beta in [dy_neg, dy]; dy_neg <= 0 is a localization
    /// allowance used only by period-level inversion, Galois actions require
    /// beta >= 0.
    pub dy: i64,
    pub dy_neg: i64,
    /// Eisenstein coefficients a_0..a_e of E(u); a_0 = p * unit, a_e a unit.
    pub e_coeffs: Vec<BigInt>,
    /// Z_p working precision for binomial coefficients of group exponents.
    pub a_prec: u32,
    /// Universal Witt polynomial table at (p, n_len).
    pub table: Arc<WittTable>,
}

impl ModelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        gf: Gf,
        e: i64,
        n_len: usize,
        m: u32,
        dx: i64,
        dx_neg: i64,
        dy: i64,
        dy_neg: i64,
        e_coeffs: Vec<BigInt>,
        a_prec: u32,
    ) -> Result<Arc<Self>> {
        let p = gf.p();
        if !(1..=3).contains(&e) {
            return Err(Error::Params(format!("ramification e = {} outside desk scale 1..=3", e)));
        }
        if !(1..=3).contains(&n_len) {
            return Err(Error::Params(format!("Witt length N = {} outside desk scale 1..=3", n_len)));
        }
        if m > 3 {
            return Err(Error::Params(format!("root depth m = {} outside desk scale 0..=3", m)));
        }
        if dx < 1 || dx_neg > 0 || dy < 1 || dy_neg > 0 {
            return Err(Error::Params("windows need dx >= 1 >= 0 >= dx_neg and dy >= 1 >= 0 >= dy_neg".into()));
        }
        if e_coeffs.len() != (e as usize) + 1 {
            return Err(Error::Params(format!(
                "Eisenstein data has {} coefficients, expected degree e = {}",
                e_coeffs.len(),
                e
            )));
        }
        let pz = BigInt::from(p);
        if (&e_coeffs[e as usize] % &pz).is_zero() {
            return Err(Error::Params("Eisenstein leading coefficient must be a unit".into()));
        }
        for (i, c) in e_coeffs.iter().enumerate().take(e as usize) {
            if !(c % &pz).is_zero() {
                return Err(Error::Params(format!(
                    "Eisenstein coefficient a_{} must be divisible by p",
                    i
                )));
            }
        }
        let a0_over_p = &e_coeffs[0] / &pz;
        if (&a0_over_p % &pz).is_zero() {
            return Err(Error::Params("Eisenstein constant term must be exactly p * unit".into()));
        }
        let min_prec = n_len as u32 + 2 * m + 4;
        if a_prec < min_prec {
            return Err(Error::Params(format!(
                "Z_p precision A = {} below the safe floor N + 2m + 4 = {}",
                a_prec, min_prec
            )));
        }
        let table = Arc::new(build_witt_table(p, n_len)?);
        Ok(Arc::new(ModelParams {
            p,
            gf,
            e,
            n_len,
            m,
            dx,
            dx_neg,
            dy,
            dy_neg,
            e_coeffs,
            a_prec,
            table,
        }))
    }

    /// Convenience constructor with standard windows for a given prime.
    pub fn desk(p: u64, e: i64, n_len: usize, m: u32) -> Result<Arc<Self>> {
        let gf = Gf::prime(p);
        // E(u) = u^e - p: Eisenstein with constant term -p = p * (p - 1) unit.
        let mut coeffs = vec![BigInt::zero(); (e as usize) + 1];
        coeffs[0] = BigInt::from(-(p as i64));
        coeffs[e as usize] = BigInt::from(1);
        ModelParams::new(gf, e, n_len, m, 12, -12, 10, -4, coeffs, n_len as u32 + 2 * m + 6)
    }

    /// Internal exponent-denominator cap: the public budget plus the layer
    /// depth needed for Teichmuller coordinate extraction.
    pub fn m_total(&self) -> u32 {
        self.m + self.n_len as u32
    }

    /// Weight of the Y direction in the tilted valuation: p / (p - 1).
    pub fn y_weight(&self) -> Rat {
        rat(self.p as i64, self.p as i64 - 1)
    }

    /// v(x) of a monomial X^alpha Y^beta: alpha / e + beta * p / (p - 1).
    pub fn mono_val(&self, alpha: Rat, beta: Rat) -> Rat {
        alpha / rat(self.e, 1) + beta * self.y_weight()
    }

    /// Z_p context at the configured working precision.
    pub fn zp(&self) -> Zp {
        Zp::new(self.p, self.a_prec)
    }

    /// The Frobenius grid point r_j = (p-1) p^(j-1), with r_0 = (p-1)/p.
    pub fn grid_r(&self, j: i32) -> Rat {
        let p = self.p as i64;
        if j <= 0 {
            let mut r = rat(p - 1, p);
            for _ in 0..(-j) {
                r = r / rat(p, 1);
            }
            r
        } else {
            let mut r = rat(p - 1, 1);
            for _ in 0..(j - 1) {
                r = r * rat(p, 1);
            }
            r
        }
    }
}
