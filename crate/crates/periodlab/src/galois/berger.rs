//! Re-expansion along b: polynomials in w = b - z with Y-free coefficients
//! form a subalgebra on which the normalized derivation acts exactly as
//! d/dw (it kills Y-free elements and sends b to 1).  In that algebra the
//! telescoping sum x_i = (1/i!) sum_k (-1)^k w^k/k! d^(k+i)(x) recovers
//! every coefficient, and H = sum_k (-1)^k D^k w^k/k! solves the monodromy
//! equation d(H) + D H = 0 for nilpotent connections D.
//!
//! Evaluation sends w to b - z in the period ring.  The approximants b_n
//! are stored-layer truncations of b; their tails b - b_n are certified in
//! the p-adic layer valuation (the large-radius limit of the W family --
//! at desk radii the stored content of b carries window-negative
//! X-exponents, so the finite-radius W bound does not hold and is not
//! claimed).

use crate::error::{Error, Result};
use crate::period::{b_elem, PeriodElement, PeriodRing};
use crate::rat::{rat, rint, Rat, ValBound};
use num_bigint::BigInt;

/// Polynomial sum_i coeffs[i] * (b - z)^i with Y-free coefficients and a
/// Y-free basepoint z.  The representation is the witness that the input
/// lies in the derivation-polynomial subalgebra.
#[derive(Clone, Debug)]
pub struct BPoly {
    pub z: PeriodElement,
    pub coeffs: Vec<PeriodElement>,
}

/// Stored-layer p-adic valuation: the index of the lowest nonzero
/// Teichmuller layer, shifted by the scale.  This is the large-radius
/// limit of the W family and the certificate language for b - b_n.
pub fn layer_val(x: &PeriodElement) -> ValBound {
    for (i, c) in x.w.comps.iter().enumerate() {
        if !c.is_stored_zero() {
            return ValBound::Finite(rint(i as i64 - x.scale as i64));
        }
    }
    ValBound::Infinite
}

/// Require every canonical monomial of x to be Y-free.  Content hidden
/// below window certificates cannot be inspected; it stays bounded by the
/// drops it carries through every later operation, so it is not rejected.
fn check_y_free(pr: &PeriodRing, x: &PeriodElement, role: &str) -> Result<()> {
    let (terms, _residual) = pr.mono_form(x)?;
    for t in &terms {
        if t.beta != rint(0) {
            return Err(Error::Domain(format!(
                "{} must be Y-free; found Y^{} at layer {}",
                role, t.beta, t.layer
            )));
        }
    }
    Ok(())
}

impl BPoly {
    pub fn new(pr: &PeriodRing, z: PeriodElement, coeffs: Vec<PeriodElement>) -> Result<Self> {
        check_y_free(pr, &z, "the basepoint")?;
        for c in &coeffs {
            check_y_free(pr, c, "a coefficient")?;
        }
        Ok(BPoly { z, coeffs })
    }

    /// Largest index with a nonzero stored coefficient.
    pub fn degree(&self, pr: &PeriodRing) -> Option<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .find(|(_, c)| !pr.is_stored_zero(c))
            .map(|(i, _)| i)
    }
}

/// Multiply by a rational scalar: the p-free part of the denominator is a
/// unit in W_N, the p-part is a scale bump (exact at representation level).
fn rat_scale(pr: &PeriodRing, q: Rat, x: &PeriodElement) -> Result<PeriodElement> {
    let p = pr.prm().p as i64;
    let mut d = *q.denom();
    let mut j = 0u32;
    while d % p == 0 {
        d /= p;
        j += 1;
    }
    let mut out = pr.int_mul(&BigInt::from(*q.numer()), x);
    if d != 1 {
        out = pr.unit_int_div(&out, d)?;
    }
    for _ in 0..j {
        out = pr.div_p(&out);
    }
    Ok(out)
}

/// The exact derivation on the representation: d(w) = 1, d(coeff) = 0.
pub fn bpoly_derive(pr: &PeriodRing, x: &BPoly) -> BPoly {
    let coeffs = x
        .coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| pr.int_mul(&BigInt::from(i), c))
        .collect();
    BPoly { z: x.z.clone(), coeffs }
}

/// Termwise sum; the basepoints must agree at stored level.
pub fn bpoly_add(pr: &PeriodRing, x: &BPoly, y: &BPoly) -> Result<BPoly> {
    if !pr.stored_eq(&x.z, &y.z) {
        return Err(Error::Domain(
            "polynomials in different variables b - z cannot be added".into(),
        ));
    }
    let len = x.coeffs.len().max(y.coeffs.len());
    let mut coeffs = Vec::with_capacity(len);
    for i in 0..len {
        let a = x.coeffs.get(i);
        let b = y.coeffs.get(i);
        coeffs.push(match (a, b) {
            (Some(a), Some(b)) => pr.add(a, b),
            (Some(a), None) => a.clone(),
            (None, Some(b)) => b.clone(),
            (None, None) => unreachable!(),
        });
    }
    Ok(BPoly { z: x.z.clone(), coeffs })
}

/// Evaluate at w = b - z in the period ring (Horner).
pub fn bpoly_eval(pr: &PeriodRing, x: &BPoly) -> Result<PeriodElement> {
    let b = b_elem(pr)?;
    let w = pr.sub(&b, &x.z);
    let mut acc = pr.zero();
    for c in x.coeffs.iter().rev() {
        acc = pr.add(&pr.mul(&acc, &w), c);
    }
    Ok(acc)
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product::<i64>().max(1)
}

/// Recover the coefficients of x = sum_i x_i w^i through the telescoping
/// sums x_i = (1/i!) sum_k (-1)^k w^k/k! d^(k+i)(x), executed in the
/// polynomial algebra.  Every positive-degree coefficient of the sum
/// cancels exactly; the recovered constants are scale-normalized.
pub fn berger_expansion(
    pr: &PeriodRing,
    x: &BPoly,
    d: usize,
) -> Result<Vec<PeriodElement>> {
    let deg = x.degree(pr).unwrap_or(0);
    if deg > d {
        return Err(Error::Domain(format!(
            "derivative power {} of the input does not vanish at truncation (degree {})",
            d + 1,
            deg
        )));
    }
    let mut derivs = vec![x.clone()];
    for _ in 0..deg {
        derivs.push(bpoly_derive(pr, derivs.last().unwrap()));
    }
    let mut out = Vec::with_capacity(d + 1);
    for i in 0..=d {
        let mut acc: Vec<PeriodElement> = vec![pr.zero(); deg + 1];
        for k in 0..=deg.saturating_sub(i) {
            let Some(dkx) = derivs.get(k + i) else { break };
            let sign = if k % 2 == 0 { 1 } else { -1 };
            let q = rat(sign, factorial(i) * factorial(k));
            for (j, c) in dkx.coeffs.iter().enumerate() {
                if j + k <= deg {
                    acc[j + k] = pr.add(&acc[j + k], &rat_scale(pr, q, c)?);
                }
            }
        }
        debug_assert!(
            acc.iter().skip(1).all(|c| pr.is_stored_zero(c)),
            "telescoping left a positive-degree term"
        );
        out.push(pr.normalize_scale(&acc[0]));
    }
    Ok(out)
}

/// Square matrix over Y-free period elements.
pub type ConnMatrix = Vec<Vec<PeriodElement>>;

fn mat_check(pr: &PeriodRing, d_mat: &ConnMatrix) -> Result<usize> {
    let n = d_mat.len();
    if n == 0 || d_mat.iter().any(|row| row.len() != n) {
        return Err(Error::Params("connection matrix must be square and nonempty".into()));
    }
    for row in d_mat {
        for e in row {
            check_y_free(pr, e, "a connection entry")?;
        }
    }
    Ok(n)
}

fn mat_mul(pr: &PeriodRing, a: &ConnMatrix, b: &ConnMatrix) -> ConnMatrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut s = pr.zero();
                    for (l, al) in a[i].iter().enumerate() {
                        s = pr.add(&s, &pr.mul(al, &b[l][j]));
                    }
                    s
                })
                .collect()
        })
        .collect()
}

fn mat_is_zero(pr: &PeriodRing, a: &ConnMatrix) -> bool {
    a.iter().all(|row| row.iter().all(|e| pr.is_stored_zero(e)))
}

/// Solve d(H) + D H = 0 with H = sum_k (-1)^k D^k w^k / k!.  The powers
/// must vanish at truncation within the bound (nilpotent connection);
/// entries of H come back as polynomials in w.
pub fn monodromy_solve(
    pr: &PeriodRing,
    d_mat: &ConnMatrix,
    z: &PeriodElement,
    dbound: usize,
) -> Result<Vec<Vec<BPoly>>> {
    let n = mat_check(pr, d_mat)?;
    check_y_free(pr, z, "the basepoint")?;
    let mut terms: Vec<ConnMatrix> = Vec::new();
    let mut power: ConnMatrix = (0..n)
        .map(|i| (0..n).map(|j| if i == j { pr.one() } else { pr.zero() }).collect())
        .collect();
    let mut k = 0usize;
    loop {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let mut term = Vec::with_capacity(n);
        for row in &power {
            let mut trow = Vec::with_capacity(n);
            for e in row {
                trow.push(rat_scale(pr, rat(sign, factorial(k)), e)?);
            }
            term.push(trow);
        }
        terms.push(term);
        power = mat_mul(pr, d_mat, &power);
        if mat_is_zero(pr, &power) {
            break;
        }
        k += 1;
        if k > dbound {
            return Err(Error::Uncertified(format!(
                "connection is not nilpotent within order {} at truncation",
                dbound
            )));
        }
    }
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| BPoly {
                    z: z.clone(),
                    coeffs: terms.iter().map(|t| t[i][j].clone()).collect(),
                })
                .collect()
        })
        .collect())
}

/// Residual d(H) + D H, entrywise in the polynomial algebra.
pub fn monodromy_residual(
    pr: &PeriodRing,
    d_mat: &ConnMatrix,
    h: &[Vec<BPoly>],
) -> Result<Vec<Vec<BPoly>>> {
    let n = mat_check(pr, d_mat)?;
    if h.len() != n || h.iter().any(|row| row.len() != n) {
        return Err(Error::Params("solution matrix shape mismatch".into()));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let mut r = bpoly_derive(pr, &h[i][j]);
            for (l, hl) in h.iter().enumerate() {
                let scaled = BPoly {
                    z: hl[j].z.clone(),
                    coeffs: hl[j].coeffs.iter().map(|c| pr.mul(&d_mat[i][l], c)).collect(),
                };
                r = bpoly_add(pr, &r, &scaled)?;
            }
            row.push(r);
        }
        out.push(row);
    }
    Ok(out)
}

/// True when every entry of the residual is stored-zero in every degree.
pub fn residual_is_zero(pr: &PeriodRing, r: &[Vec<BPoly>]) -> bool {
    r.iter()
        .all(|row| row.iter().all(|e| e.coeffs.iter().all(|c| pr.is_stored_zero(c))))
}

/// Stored-layer truncation of b to n layers.  The tail b - b_n vanishes in
/// the first n stored layers, so layer_val(b - b_n) >= n - scale(b).
pub fn approx_b(pr: &PeriodRing, n: usize) -> Result<PeriodElement> {
    if n > pr.n() {
        return Err(Error::Params(format!(
            "truncation depth {} exceeds the {} stored layers",
            n,
            pr.n()
        )));
    }
    let b = b_elem(pr)?;
    let mut w = b.w.clone();
    for i in n..pr.n() {
        w.comps[i] = crate::tilt::Tilt::stored_zero();
    }
    Ok(PeriodElement { scale: b.scale, w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;
    use crate::period::u_elem;

    fn ring(p: u64, e: i64) -> PeriodRing {
        PeriodRing::new(ModelParams::desk(p, e, 3, 2).unwrap())
    }

    fn samples(pr: &PeriodRing) -> Vec<PeriodElement> {
        let u = u_elem(pr);
        let p = pr.from_int(&BigInt::from(pr.prm().p));
        vec![
            pr.add(&pr.one(), &pr.mul(&p, &u)),
            pr.mul(&u, &u),
            pr.sub(&pr.int_mul(&BigInt::from(3), &u), &p),
            pr.mul(&u, &pr.mul(&u, &u)),
        ]
    }

    #[test]
    fn constant_input_re_expands_to_itself() {
        let pr = ring(3, 1);
        let u = u_elem(&pr);
        let c0 = pr.add(&pr.mul(&u, &u), &pr.from_int(&BigInt::from(3)));
        let x = BPoly::new(&pr, u.clone(), vec![c0.clone()]).unwrap();
        let got = berger_expansion(&pr, &x, 2).unwrap();
        assert!(pr.stored_eq(&got[0], &c0));
        assert!(pr.is_stored_zero(&got[1]));
        assert!(pr.is_stored_zero(&got[2]));
    }

    #[test]
    fn cubic_coefficients_recovered_exactly() {
        // p = 5 keeps every 1/(i! k!) a unit, so recovery is scale-free.
        let pr = ring(5, 1);
        let cs = samples(&pr);
        let x = BPoly::new(&pr, u_elem(&pr), cs.clone()).unwrap();
        let got = berger_expansion(&pr, &x, 3).unwrap();
        assert_eq!(got.len(), 4);
        for (i, (g, c)) in got.iter().zip(&cs).enumerate() {
            assert_eq!(g.scale, 0, "coefficient {} came back scaled", i);
            assert!(pr.stored_eq(g, c), "coefficient {} not recovered", i);
        }
        // Round trip through the ring.  The recovered coefficients are
        // stored-identical but carry finite fold certificates from the
        // integer multiplications (6 and 6^-1 are multi-layer Witt
        // constants), so evaluation may discard deep products the
        // certificates cannot support: compare modulo certificates.
        let back = BPoly::new(&pr, u_elem(&pr), got).unwrap();
        let lhs = bpoly_eval(&pr, &x).unwrap();
        let rhs = bpoly_eval(&pr, &back).unwrap();
        let d = pr.sub(&lhs, &rhs);
        let r = pr.prm().grid_r(1);
        let i = crate::period::Interval::new(r, ValBound::Finite(r)).unwrap();
        let wd = crate::period::w_val(&pr, &d, &i).unwrap();
        assert!(
            !wd.is_exact() || wd.value.is_infinite(),
            "round-trip difference is certified nonzero: {:?}",
            wd
        );
    }

    #[test]
    fn recovery_survives_p_in_the_factorials() {
        // At p = 3 the k = 3 term divides by 3: the recovered coefficient
        // is rebuilt at a higher scale and normalizes back down.
        let pr = ring(3, 1);
        let cs = samples(&pr);
        let x = BPoly::new(&pr, u_elem(&pr), cs.clone()).unwrap();
        let got = berger_expansion(&pr, &x, 3).unwrap();
        for (i, (g, c)) in got.iter().zip(&cs).enumerate() {
            assert!(pr.stored_eq(g, c), "coefficient {} not recovered", i);
        }
    }

    #[test]
    fn linearity_of_the_expansion() {
        let pr = ring(5, 1);
        let cs = samples(&pr);
        let x = BPoly::new(&pr, u_elem(&pr), cs[..3].to_vec()).unwrap();
        let y = BPoly::new(&pr, u_elem(&pr), cs[1..].to_vec()).unwrap();
        let s = bpoly_add(&pr, &x, &y).unwrap();
        let ex = berger_expansion(&pr, &x, 3).unwrap();
        let ey = berger_expansion(&pr, &y, 3).unwrap();
        let es = berger_expansion(&pr, &s, 3).unwrap();
        for i in 0..=3 {
            assert!(pr.stored_eq(&es[i], &pr.add(&ex[i], &ey[i])));
        }
    }

    #[test]
    fn degree_overflow_names_the_failing_power() {
        let pr = ring(5, 1);
        let mut cs = samples(&pr);
        cs.push(u_elem(&pr));
        let x = BPoly::new(&pr, u_elem(&pr), cs).unwrap();
        match berger_expansion(&pr, &x, 3) {
            Err(Error::Domain(msg)) => {
                assert!(msg.contains("power 4"), "unexpected message: {}", msg)
            }
            other => panic!("expected a degree error, got {:?}", other.map(|v| v.len())),
        }
    }

    #[test]
    fn y_laden_coefficients_are_rejected() {
        let pr = ring(3, 1);
        let eps = crate::period::eps_elem(&pr);
        match BPoly::new(&pr, pr.zero(), vec![eps]) {
            Err(Error::Domain(msg)) => assert!(msg.contains("Y-free")),
            other => panic!("expected rejection, got {:?}", other.map(|b| b.coeffs.len())),
        }
    }

    #[test]
    fn approx_b_tail_certificates() {
        for p in [2u64, 3, 5] {
            let pr = ring(p, 1);
            let b = b_elem(&pr).unwrap();
            assert_eq!(b.scale, 0);
            for n in 0..=pr.n() {
                let bn = approx_b(&pr, n).unwrap();
                let tail = pr.sub(&b, &bn);
                assert!(
                    layer_val(&tail) >= ValBound::Finite(rint(n as i64)),
                    "p = {}, n = {}: tail starts below layer {}",
                    p, n, n
                );
            }
            for n in 0..pr.n() {
                let step = pr.sub(&approx_b(&pr, n).unwrap(), &approx_b(&pr, n + 1).unwrap());
                assert!(layer_val(&step) >= ValBound::Finite(rint(n as i64)));
            }
            assert!(approx_b(&pr, pr.n() + 1).is_err());
        }
    }

    #[test]
    fn zero_connection_gives_identity() {
        let pr = ring(3, 1);
        let d0: ConnMatrix = vec![
            vec![pr.zero(), pr.zero()],
            vec![pr.zero(), pr.zero()],
        ];
        let h = monodromy_solve(&pr, &d0, &pr.zero(), 4).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { pr.one() } else { pr.zero() };
                assert!(pr.stored_eq(&h[i][j].coeffs[0], &want));
                assert!(h[i][j].coeffs.iter().skip(1).all(|c| pr.is_stored_zero(c)));
            }
        }
        let r = monodromy_residual(&pr, &d0, &h).unwrap();
        assert!(residual_is_zero(&pr, &r));
    }

    #[test]
    fn triangular_connection_matches_the_recursion_oracle() {
        // Independent path: term-by-term recursion T_(k+1) = -D T_k/(k+1)
        // against the closed-form powers inside monodromy_solve.
        let pr = ring(5, 1);
        let u = u_elem(&pr);
        let d_mat: ConnMatrix = vec![
            vec![pr.zero(), u.clone(), pr.one()],
            vec![pr.zero(), pr.zero(), pr.mul(&u, &u)],
            vec![pr.zero(), pr.zero(), pr.zero()],
        ];
        let h = monodromy_solve(&pr, &d_mat, &pr.zero(), 6).unwrap();
        let mut term: ConnMatrix = (0..3)
            .map(|i| (0..3).map(|j| if i == j { pr.one() } else { pr.zero() }).collect())
            .collect();
        for k in 0.. {
            for i in 0..3 {
                for j in 0..3 {
                    let got = h[i][j].coeffs.get(k).cloned().unwrap_or_else(|| pr.zero());
                    assert!(
                        pr.stored_eq(&got, &term[i][j]),
                        "entry ({},{}) degree {} disagrees with the oracle",
                        i, j, k
                    );
                }
            }
            let next = mat_mul(&pr, &d_mat, &term);
            if mat_is_zero(&pr, &next) {
                break;
            }
            term = (0..3)
                .map(|i| {
                    (0..3)
                        .map(|j| rat_scale(&pr, rat(-1, k as i64 + 1), &next[i][j]).unwrap())
                        .collect()
                })
                .collect();
        }
        let r = monodromy_residual(&pr, &d_mat, &h).unwrap();
        assert!(residual_is_zero(&pr, &r));
    }

    #[test]
    fn residual_vanishes_on_sampled_nilpotent_connections() {
        let pr = ring(3, 1);
        let u = u_elem(&pr);
        let p = pr.from_int(&BigInt::from(3));
        let pool = [u.clone(), pr.one(), p, pr.mul(&u, &u), pr.zero()];
        for s in 0..5usize {
            let pick = |k: usize| pool[(s + k) % pool.len()].clone();
            let d_mat: ConnMatrix = vec![
                vec![pr.zero(), pick(0), pick(1)],
                vec![pr.zero(), pr.zero(), pick(2)],
                vec![pr.zero(), pr.zero(), pr.zero()],
            ];
            let h = monodromy_solve(&pr, &d_mat, &pr.zero(), 6).unwrap();
            let r = monodromy_residual(&pr, &d_mat, &h).unwrap();
            assert!(residual_is_zero(&pr, &r), "sample {} residual nonzero", s);
        }
    }

    #[test]
    fn non_nilpotent_connection_is_rejected() {
        let pr = ring(3, 1);
        let d_mat: ConnMatrix = vec![vec![pr.one()]];
        match monodromy_solve(&pr, &d_mat, &pr.zero(), 5) {
            Err(Error::Uncertified(msg)) => assert!(msg.contains("nilpotent")),
            other => panic!("expected rejection, got {:?}", other.map(|h| h.len())),
        }
    }
}
