//! Exact rational numbers and extended valuation bounds.
//!
//! All valuations in this crate are rationals with small denominators
//! (divisors of e*(p-1)*p^m at desk scale), so a machine-word ratio is
//! enough; overflow panics rather than wrapping.

use num_rational::Ratio;
use std::fmt;

/// Exact rational number used for exponents and valuations.
pub type Rat = Ratio<i64>;

/// Construct a rational from a numerator/denominator pair.
pub fn rat(num: i64, den: i64) -> Rat {
    Ratio::new(num, den)
}

/// Construct an integer rational.
pub fn rint(n: i64) -> Rat {
    Ratio::from_integer(n)
}

/// A valuation bound: either a finite rational or +infinity.
///
/// `Infinite` is the bound of the zero element and of an empty set of
/// dropped terms; it absorbs addition and wins every `min`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValBound {
    Finite(Rat),
    Infinite,
}

impl ValBound {
    pub fn finite(num: i64, den: i64) -> Self {
        ValBound::Finite(rat(num, den))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ValBound::Infinite)
    }

    /// Minimum of two bounds (finite values beat infinity).
    pub fn min(self, other: ValBound) -> ValBound {
        match (self, other) {
            (ValBound::Finite(a), ValBound::Finite(b)) => ValBound::Finite(a.min(b)),
            (ValBound::Finite(a), ValBound::Infinite) => ValBound::Finite(a),
            (ValBound::Infinite, b) => b,
        }
    }

    /// Sum of bounds; infinity absorbs.
    pub fn add(self, other: ValBound) -> ValBound {
        match (self, other) {
            (ValBound::Finite(a), ValBound::Finite(b)) => ValBound::Finite(a + b),
            _ => ValBound::Infinite,
        }
    }

    /// Add a finite rational to the bound.
    pub fn add_rat(self, r: Rat) -> ValBound {
        match self {
            ValBound::Finite(a) => ValBound::Finite(a + r),
            ValBound::Infinite => ValBound::Infinite,
        }
    }

    /// Scale the bound by a positive rational (e.g. p^n rescaling under Frobenius).
    pub fn scale(self, c: Rat) -> ValBound {
        assert!(c > rint(0), "valuation bounds scale by positive factors only");
        match self {
            ValBound::Finite(a) => ValBound::Finite(a * c),
            ValBound::Infinite => ValBound::Infinite,
        }
    }

    /// True when `self` (a bound on hidden content) strictly exceeds `v`,
    /// i.e. a stored value `v` is certified exact against this bound.
    pub fn certifies(&self, v: Rat) -> bool {
        match self {
            ValBound::Finite(a) => *a > v,
            ValBound::Infinite => true,
        }
    }

    pub fn as_finite(&self) -> Option<Rat> {
        match self {
            ValBound::Finite(a) => Some(*a),
            ValBound::Infinite => None,
        }
    }
}

impl PartialOrd for ValBound {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp_bound(other))
    }
}

impl ValBound {
    fn cmp_bound(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (ValBound::Infinite, ValBound::Infinite) => Ordering::Equal,
            (ValBound::Infinite, _) => Ordering::Greater,
            (_, ValBound::Infinite) => Ordering::Less,
            (ValBound::Finite(a), ValBound::Finite(b)) => a.cmp(b),
        }
    }
}

impl Ord for ValBound {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.cmp_bound(other)
    }
}

impl fmt::Display for ValBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValBound::Finite(a) => write!(f, "{}", a),
            ValBound::Infinite => write!(f, "inf"),
        }
    }
}

/// A rational value together with an exactness certificate.
///
/// `value` is computed from stored terms; `threshold` bounds anything that
/// was dropped by a window. The value is exact when it is strictly below
/// the threshold (dropped content cannot change the minimum).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CertVal {
    pub value: ValBound,
    pub threshold: ValBound,
}

impl CertVal {
    pub fn exact(value: ValBound) -> Self {
        CertVal { value, threshold: ValBound::Infinite }
    }

    /// True when the stored minimum cannot be undercut by dropped content.
    pub fn is_exact(&self) -> bool {
        match self.value {
            ValBound::Finite(v) => self.threshold.certifies(v),
            // A stored-zero element is only exactly zero if nothing was dropped.
            ValBound::Infinite => self.threshold.is_infinite(),
        }
    }
}

impl fmt::Display for CertVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{} (exact)", self.value)
        } else {
            write!(f, "{} (tail bound {})", self.value, self.threshold)
        }
    }
}

/// p-adic valuation of a nonzero integer.
pub fn vp_i64(mut n: i64, p: i64) -> u32 {
    assert!(n != 0);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valbound_min_and_add() {
        let a = ValBound::finite(1, 2);
        let b = ValBound::finite(1, 3);
        assert_eq!(a.min(b), b);
        assert_eq!(a.add(b), ValBound::Finite(rat(5, 6)));
        assert_eq!(a.min(ValBound::Infinite), a);
        assert_eq!(ValBound::Infinite.add(a), ValBound::Infinite);
    }

    #[test]
    fn certval_exactness() {
        let exact = CertVal { value: ValBound::finite(1, 1), threshold: ValBound::finite(3, 1) };
        assert!(exact.is_exact());
        let fuzzy = CertVal { value: ValBound::finite(1, 1), threshold: ValBound::finite(1, 1) };
        assert!(!fuzzy.is_exact());
        let zero = CertVal { value: ValBound::Infinite, threshold: ValBound::finite(5, 1) };
        assert!(!zero.is_exact());
    }

    #[test]
    fn vp_small() {
        assert_eq!(vp_i64(12, 2), 2);
        assert_eq!(vp_i64(9, 3), 2);
        assert_eq!(vp_i64(7, 5), 0);
    }
}
