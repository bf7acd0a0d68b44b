//! Finite residue fields F_{p^f} at desk scale (p in {2, 3, 5}, f <= 3).
//!
//! Elements are coefficient vectors of length f over F_p with respect to a
//! fixed monic defining polynomial. The ring object carries the parameters;
//! elements are plain data so they can sit inside Witt vectors and tilt
//! monomial maps without back-references.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

/// Residue field description: F_p[g] / (modpoly(g)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gf {
    p: u64,
    f: usize,
    /// Monic defining polynomial, little-endian, length f + 1.
    modpoly: Vec<u64>,
}

/// Field element: little-endian coefficients over F_p, always length f.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GfElem(pub Vec<u64>);

impl Gf {
    /// The prime field F_p.
    pub fn prime(p: u64) -> Self {
        Gf { p, f: 1, modpoly: vec![0, 1] }
    }

    /// An extension field with an explicitly supplied monic defining polynomial.
    pub fn new(p: u64, modpoly: Vec<u64>) -> Result<Self> {
        if !matches!(p, 2 | 3 | 5) {
            return Err(Error::Params(format!("unsupported prime {}", p)));
        }
        if modpoly.len() < 2 {
            return Err(Error::Params("defining polynomial must have degree >= 1".into()));
        }
        let f = modpoly.len() - 1;
        if modpoly[f] != 1 {
            return Err(Error::Params("defining polynomial must be monic".into()));
        }
        if modpoly.iter().any(|&c| c >= p) {
            return Err(Error::Params("defining polynomial coefficients must be reduced mod p".into()));
        }
        // Degree 2 and 3 polynomials are irreducible iff they have no roots.
        if (2..=3).contains(&f) {
            for a in 0..p {
                let mut acc = 0u64;
                for &c in modpoly.iter().rev() {
                    acc = (acc * a + c) % p;
                }
                if acc == 0 {
                    return Err(Error::Params(format!(
                        "defining polynomial has root {} mod {}, not irreducible",
                        a, p
                    )));
                }
            }
        } else if f > 3 {
            return Err(Error::Params("residue degree f > 3 is beyond desk scale".into()));
        }
        Ok(Gf { p, f, modpoly })
    }

    /// A standard extension of degree f (fixed small table of defining polynomials).
    pub fn extension(p: u64, f: usize) -> Result<Self> {
        if f == 1 {
            return Ok(Gf::prime(p));
        }
        let modpoly: Vec<u64> = match (p, f) {
            (2, 2) => vec![1, 1, 1],
            (2, 3) => vec![1, 1, 0, 1],
            (3, 2) => vec![1, 0, 1],
            (3, 3) => vec![1, 2, 0, 1],
            (5, 2) => vec![2, 0, 1],
            (5, 3) => vec![1, 1, 0, 1],
            _ => return Err(Error::Params(format!("no standard F_{}^{}", p, f))),
        };
        Gf::new(p, modpoly)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.f
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.f as u32)
    }

    pub fn zero(&self) -> GfElem {
        GfElem(vec![0; self.f])
    }

    pub fn one(&self) -> GfElem {
        let mut c = vec![0; self.f];
        c[0] = 1;
        GfElem(c)
    }

    /// The class of the generator g (equals 0 when f = 1 only for p | g, never here).
    pub fn gen(&self) -> GfElem {
        if self.f == 1 {
            // No proper generator in the prime field; return 1.
            return self.one();
        }
        let mut c = vec![0; self.f];
        c[1] = 1;
        GfElem(c)
    }

    pub fn is_zero(&self, a: &GfElem) -> bool {
        a.0.iter().all(|&c| c == 0)
    }

    pub fn from_u64(&self, n: u64) -> GfElem {
        let mut c = vec![0; self.f];
        c[0] = n % self.p;
        GfElem(c)
    }

    pub fn from_int(&self, n: &BigInt) -> GfElem {
        let p = BigInt::from(self.p);
        let r = n.mod_floor(&p);
        self.from_u64(r.to_u64().expect("reduced residue fits in u64"))
    }

    /// Build an element from little-endian coefficients (reduced mod p, padded to f).
    pub fn elem(&self, coeffs: &[u64]) -> Result<GfElem> {
        if coeffs.len() > self.f {
            return Err(Error::Params(format!(
                "element has {} coefficients but residue degree is {}",
                coeffs.len(),
                self.f
            )));
        }
        let mut c = vec![0; self.f];
        for (i, &x) in coeffs.iter().enumerate() {
            c[i] = x % self.p;
        }
        Ok(GfElem(c))
    }

    pub fn add(&self, a: &GfElem, b: &GfElem) -> GfElem {
        GfElem(
            a.0.iter()
                .zip(&b.0)
                .map(|(&x, &y)| (x + y) % self.p)
                .collect(),
        )
    }

    pub fn neg(&self, a: &GfElem) -> GfElem {
        GfElem(a.0.iter().map(|&x| (self.p - x) % self.p).collect())
    }

    pub fn sub(&self, a: &GfElem, b: &GfElem) -> GfElem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &GfElem, b: &GfElem) -> GfElem {
        // Schoolbook product then reduction by the monic defining polynomial.
        let mut prod = vec![0u64; 2 * self.f];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        for i in (self.f..2 * self.f).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for (k, &m) in self.modpoly.iter().enumerate().take(self.f) {
                let idx = i - self.f + k;
                prod[idx] = (prod[idx] + c * (self.p - m)) % self.p;
            }
        }
        prod.truncate(self.f);
        GfElem(prod)
    }

    pub fn pow(&self, a: &GfElem, mut n: u64) -> GfElem {
        let mut base = a.clone();
        let mut acc = self.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            n >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &GfElem) -> Result<GfElem> {
        if self.is_zero(a) {
            return Err(Error::DivisionByZero("inverse of 0 in residue field".into()));
        }
        // x^(q-2) = x^(-1) in F_q; q <= 125 so the exponent is tiny.
        Ok(self.pow(a, self.order() - 2))
    }

    /// Arithmetic Frobenius x -> x^p.
    pub fn frobenius(&self, a: &GfElem) -> GfElem {
        self.pow(a, self.p)
    }

    /// Inverse of Frobenius; exact since the field is perfect (x -> x^(p^(f-1))).
    pub fn pth_root(&self, a: &GfElem) -> GfElem {
        self.pow(a, self.p.pow(self.f as u32 - 1))
    }

    /// All field elements in a deterministic order (used by small exhaustive tests).
    pub fn all_elements(&self) -> Vec<GfElem> {
        let q = self.order();
        (0..q)
            .map(|mut n| {
                let mut c = vec![0; self.f];
                for slot in c.iter_mut() {
                    *slot = n % self.p;
                    n /= self.p;
                }
                GfElem(c)
            })
            .collect()
    }
}
