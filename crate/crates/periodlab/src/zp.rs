//! Truncated p-adic integers Z_p / p^A with precision-tracking binomials.
//!
//! An element is a canonical residue in [0, p^A). Binomial coefficients
//! C(a, k) of a residue are well defined only mod p^(A - v_p(k!)); the
//! helpers return the surviving precision together with the value so
//! callers can thread certificates instead of silently losing digits.

use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Ring object for Z/p^A viewed as a truncation of Z_p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Zp {
    p: u64,
    prec: u32,
    modulus: BigUint,
}

impl Zp {
    pub fn new(p: u64, prec: u32) -> Self {
        assert!(prec > 0, "precision must be at least one digit");
        Zp { p, prec, modulus: BigUint::from(p).pow(prec) }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    /// Canonical residue of an integer.
    pub fn reduce(&self, n: &BigInt) -> BigUint {
        let m = BigInt::from(self.modulus.clone());
        n.mod_floor(&m).to_biguint().expect("mod_floor of positive modulus is nonnegative")
    }

    pub fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a + b) % &self.modulus
    }

    pub fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a + &self.modulus - (b % &self.modulus)) % &self.modulus
    }

    pub fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.modulus
    }

    pub fn is_unit(&self, a: &BigUint) -> bool {
        !(a % self.p).is_zero()
    }

    /// Inverse of a unit mod p^A (extended Euclid).
    pub fn inv(&self, a: &BigUint) -> Result<BigUint> {
        if !self.is_unit(a) {
            return Err(Error::NotUnit(format!("{} is divisible by {}", a, self.p)));
        }
        let a = BigInt::from(a.clone());
        let m = BigInt::from(self.modulus.clone());
        let e = a.extended_gcd(&m);
        debug_assert!(e.gcd.is_one());
        Ok(e.x.mod_floor(&m).to_biguint().unwrap())
    }

    /// p-adic valuation of a residue; `None` for the zero residue
    /// (valuation >= prec, indistinguishable from infinity at this precision).
    pub fn vp(&self, a: &BigUint) -> Option<u32> {
        if a.is_zero() {
            return None;
        }
        let mut v = 0;
        let mut x = a.clone();
        let p = BigUint::from(self.p);
        while (&x % &p).is_zero() {
            x /= &p;
            v += 1;
        }
        Some(v)
    }
}

/// v_p(k!) by Legendre's formula.
pub fn vp_factorial(k: u64, p: u64) -> u64 {
    let mut v = 0;
    let mut q = p;
    while q <= k {
        v += k / q;
        match q.checked_mul(p) {
            Some(next) => q = next,
            None => break,
        }
    }
    v
}

/// Binomial coefficient C(a, k) of a p-adic residue, with surviving precision.
///
/// `a` is the canonical residue of a p-adic integer known mod p^prec.
/// Returns (value mod p^kept, kept) with kept = prec - v_p(k!).
/// Errors when v_p(k!) >= prec (no certified digits remain).
pub fn binom_padic(zp: &Zp, a: &BigUint, k: u64) -> Result<(BigUint, u32)> {
    let drop = vp_factorial(k, zp.p());
    if drop >= zp.prec() as u64 {
        return Err(Error::Precision(format!(
            "C(a, {}) loses {} digits but only {} are known",
            k,
            drop,
            zp.prec()
        )));
    }
    let kept = zp.prec() - drop as u32;
    if k == 0 {
        return Ok((BigUint::one() % BigUint::from(zp.p()).pow(kept), kept));
    }
    // Exact integer binomial of the canonical representative, then reduction.
    // Different representatives differ by p^prec, which moves C(a, k) by
    // multiples of p^(prec - v_p(k!)), so the reduced value is well defined.
    let a = BigInt::from(a.clone());
    let mut num = BigInt::one();
    for j in 0..k {
        num *= &a - BigInt::from(j);
    }
    let mut den = BigInt::one();
    for j in 1..=k {
        den *= BigInt::from(j);
    }
    let (q, r) = num.div_rem(&den);
    debug_assert!(r.is_zero(), "integer binomial must divide exactly");
    let m = BigInt::from(BigUint::from(zp.p()).pow(kept));
    let red = q.mod_floor(&m);
    debug_assert!(!red.is_negative());
    Ok((red.to_biguint().unwrap(), kept))
}

/// C(a, k) mod p for a residue a (needs v_p(k!) < prec of the input context).
pub fn binom_mod_p(zp: &Zp, a: &BigUint, k: u64) -> Result<u64> {
    let (val, kept) = binom_padic(zp, a, k)?;
    debug_assert!(kept >= 1);
    Ok((val % BigUint::from(zp.p())).to_u64().unwrap())
}

/// Reduce an exact rational with p-unit denominator mod p^prec.
pub fn rat_mod_ppow(a: &crate::rat::Rat, p: u64, prec: u32) -> Result<BigUint> {
    let num = BigInt::from(*a.numer());
    let den = BigInt::from(*a.denom());
    let m = BigInt::from(p).pow(prec);
    if (&den % BigInt::from(p)).is_zero() {
        return Err(Error::Domain(format!(
            "{} is not a p-adic integer (denominator divisible by {})",
            a, p
        )));
    }
    let e = den.extended_gcd(&m);
    let den_inv = e.x.mod_floor(&m);
    Ok((num * den_inv).mod_floor(&m).to_biguint().unwrap())
}

fn small_binom_mod_p(a: u64, k: u64, p: u64) -> u64 {
    // Digits are < p <= 5; the exact integer binomial fits easily.
    if k > a {
        return 0;
    }
    let mut num = 1u64;
    let mut den = 1u64;
    for j in 0..k {
        num *= a - j;
        den *= j + 1;
    }
    ((num / den) % p) as u64
}

/// C(a, k) mod p for an exact rational p-adic integer a, via Lucas' theorem
/// on the base-p digits. Exact for every k (the digits of a are exact).
pub fn binom_rat_mod_p(a: &crate::rat::Rat, k: u64, p: u64) -> Result<u64> {
    let mut digits_needed = 1u32;
    let mut q = p;
    while q <= k {
        digits_needed += 1;
        match q.checked_mul(p) {
            Some(next) => q = next,
            None => break,
        }
    }
    let mut residue = rat_mod_ppow(a, p, digits_needed)?;
    let mut kk = k;
    let mut acc = 1u64;
    let pb = BigUint::from(p);
    while kk > 0 || !residue.is_zero() {
        let ad = (&residue % &pb).to_u64().unwrap();
        let kd = kk % p;
        acc = (acc * small_binom_mod_p(ad, kd, p)) % p;
        if acc == 0 {
            return Ok(0);
        }
        residue /= &pb;
        kk /= p;
    }
    Ok(acc)
}

/// C(a, k) mod p^prec for an exact rational p-adic integer a.
///
/// Computed as the exact rational product formula; the result of binomials
/// of p-adic integers is a p-adic integer, so the reduced denominator is a
/// p-unit and the reduction is exact at any requested precision.
pub fn binom_rat_mod_ppow(a: &crate::rat::Rat, k: u64, p: u64, prec: u32) -> Result<BigUint> {
    use num_rational::BigRational;
    let ar = BigRational::new(BigInt::from(*a.numer()), BigInt::from(*a.denom()));
    if (ar.denom() % BigInt::from(p)).is_zero() {
        return Err(Error::Domain(format!("{} is not a p-adic integer", a)));
    }
    let mut acc = BigRational::one();
    for j in 0..k {
        acc *= &ar - BigRational::from_integer(BigInt::from(j));
        acc /= BigRational::from_integer(BigInt::from(j + 1));
    }
    let m = BigInt::from(p).pow(prec);
    if (acc.denom() % BigInt::from(p)).is_zero() {
        return Err(Error::Domain(format!(
            "C({}, {}) is not p-integral; exponent outside Z_p",
            a, k
        )));
    }
    let e = acc.denom().extended_gcd(&m);
    let den_inv = e.x.mod_floor(&m);
    Ok((acc.numer() * den_inv).mod_floor(&m).to_biguint().unwrap())
}
