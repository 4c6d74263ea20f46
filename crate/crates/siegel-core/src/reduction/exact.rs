//! Exact dyadic/rational arithmetic for g = 1 height flows.
//!
//! For `α = [[1,0],[q,1]]` the flowed height is the inverse squared length of
//! the shortest vector of the lattice `{(n e^{−t}, (nq − m) e^{t})}`. Beyond
//! `t ≈ 15` the residuals `nq − m` fall below the float product precision, so
//! the lattice reduction is run on exact integer pairs `(n, m)` with `q`
//! held as a rational; only the final norms are evaluated in floating point.

use crate::{Result, SiegelError};

/// A rational with 128-bit numerator and denominator.
///
/// Every `f64` is exactly representable; decimal strings parse exactly while
/// the scaled numerator fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational128 {
    num: i128,
    den: i128,
}

impl Rational128 {
    pub fn new(num: i128, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(SiegelError::Domain("zero denominator".into()));
        }
        let sign = if den < 0 { -1 } else { 1 };
        let (mut n, mut d) = (num * sign, den * sign);
        let g = gcd(n.unsigned_abs(), d.unsigned_abs()) as i128;
        if g > 1 {
            n /= g;
            d /= g;
        }
        Ok(Self { num: n, den: d })
    }

    pub fn zero() -> Self {
        Self { num: 0, den: 1 }
    }

    /// Exact conversion of a finite `f64` (every double is dyadic).
    pub fn from_f64_exact(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(SiegelError::Domain("non-finite value".into()));
        }
        if x == 0.0 {
            return Ok(Self::zero());
        }
        let bits = x.to_bits();
        let sign: i128 = if bits >> 63 == 1 { -1 } else { 1 };
        let exponent = ((bits >> 52) & 0x7ff) as i64;
        let fraction = bits & 0x000f_ffff_ffff_ffff;
        let (mantissa, exp) = if exponent == 0 {
            (fraction as i128, -1074i64)
        } else {
            ((fraction | 0x0010_0000_0000_0000) as i128, exponent - 1075)
        };
        if exp >= 0 {
            if exp > 70 {
                return Err(SiegelError::Domain("value too large for exact rational".into()));
            }
            Self::new(sign * (mantissa << exp), 1)
        } else {
            let shift = (-exp) as u32;
            if shift > 100 {
                // mantissa has at most 53 bits; reduce before shifting
                let tz = mantissa.trailing_zeros().min(shift);
                let m = mantissa >> tz;
                let s = shift - tz;
                if s > 126 {
                    return Err(SiegelError::Domain("exponent out of range".into()));
                }
                return Self::new(sign * m, 1i128 << s);
            }
            Self::new(sign * mantissa, 1i128 << shift)
        }
    }

    /// Parses a plain decimal string (`-12.345`, `0.1`, `3`) exactly.
    pub fn from_decimal_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (-1i128, rest),
            None => (1i128, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(SiegelError::Domain(format!("bad decimal: {s}")));
        }
        let mut num: i128 = 0;
        for c in int_part.chars().chain(frac_part.chars()) {
            let d = c
                .to_digit(10)
                .ok_or_else(|| SiegelError::Domain(format!("bad decimal: {s}")))? as i128;
            num = num
                .checked_mul(10)
                .and_then(|v| v.checked_add(d))
                .ok_or_else(|| SiegelError::Domain("decimal overflows 128 bits".into()))?;
        }
        let mut den: i128 = 1;
        for _ in 0..frac_part.len() {
            den = den
                .checked_mul(10)
                .ok_or_else(|| SiegelError::Domain("decimal overflows 128 bits".into()))?;
        }
        Self::new(sign * num, den)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn den(&self) -> i128 {
        self.den
    }

    /// Continued-fraction expansion `[a0; a1, a2, ...]`, exact.
    pub fn continued_fraction(&self, max_terms: usize) -> Vec<i128> {
        let mut out = Vec::new();
        let (mut p, mut q) = (self.num, self.den);
        for _ in 0..max_terms {
            if q == 0 {
                break;
            }
            let a = p.div_euclid(q);
            out.push(a);
            let r = p - a * q;
            p = q;
            q = r;
        }
        out
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    if a == 0 {
        1
    } else {
        a
    }
}

/// Lattice vector `(n, m)` standing for `(n e^{−t}, (nq − m) e^{t})`.
#[derive(Debug, Clone, Copy)]
struct LatVec {
    n: i128,
    m: i128,
}

struct FlowLattice {
    q: Rational128,
    e2t: f64,   // e^{2t}
    em2t: f64,  // e^{−2t}
}

impl FlowLattice {
    /// Residual `nq − m`, exact in 128-bit then rounded once to f64.
    fn residual(&self, v: LatVec) -> Option<f64> {
        let a = v.n.checked_mul(self.q.num)?;
        let b = v.m.checked_mul(self.q.den)?;
        let r = a.checked_sub(b)?;
        Some(r as f64 / self.q.den as f64)
    }

    fn dot(&self, u: LatVec, w: LatVec) -> Option<f64> {
        let ru = self.residual(u)?;
        let rw = self.residual(w)?;
        Some((u.n as f64) * (w.n as f64) * self.em2t + ru * rw * self.e2t)
    }

    fn norm2(&self, v: LatVec) -> Option<f64> {
        self.dot(v, v)
    }
}

/// `log Hgt(class(e^{−tδ̂} α))` for `g = 1`, `δ̂ = (1)`, `α = [[1,0],[q,1]]`.
pub fn g1_flow_log_height(q: &Rational128, t: f64) -> Result<f64> {
    let lat = FlowLattice {
        q: *q,
        e2t: (2.0 * t).exp(),
        em2t: (-2.0 * t).exp(),
    };
    let overflow = || SiegelError::Domain("lattice coordinates overflow 128 bits".into());

    let mut u = LatVec { n: 1, m: 0 };
    let mut w = LatVec { n: 0, m: 1 };
    let mut nu = lat.norm2(u).ok_or_else(overflow)?;
    let mut nw = lat.norm2(w).ok_or_else(overflow)?;

    // Lagrange-Gauss reduction; terminates in O(t) steps.
    for _ in 0..10_000 {
        if nu > nw {
            std::mem::swap(&mut u, &mut w);
            std::mem::swap(&mut nu, &mut nw);
        }
        if nu <= 0.0 || !nu.is_finite() {
            return Err(SiegelError::Domain("degenerate flow lattice".into()));
        }
        let mu = (lat.dot(u, w).ok_or_else(overflow)? / nu).round();
        if mu == 0.0 {
            break;
        }
        if mu.abs() > 1e30 {
            return Err(overflow());
        }
        let mi = mu as i128;
        w = LatVec {
            n: w.n.checked_sub(mi.checked_mul(u.n).ok_or_else(overflow)?).ok_or_else(overflow)?,
            m: w.m.checked_sub(mi.checked_mul(u.m).ok_or_else(overflow)?).ok_or_else(overflow)?,
        };
        let nw_new = lat.norm2(w).ok_or_else(overflow)?;
        if nw_new >= nw {
            break;
        }
        nw = nw_new;
    }
    let lambda1 = nu.min(nw);
    Ok(-lambda1.ln())
}

/// Detects whether `q` is (to the stated tolerance) a rational with small
/// denominator: some continued-fraction convergent `p/k` with `k ≤ cutoff`
/// satisfies `|q − p/k| < tol / k²`.
pub fn is_small_rational(q: &Rational128, cutoff: i128, tol: f64) -> bool {
    let cf = q.continued_fraction(80);
    let (mut p0, mut q0): (i128, i128) = (1, 0);
    let (mut p1, mut q1): (i128, i128) = (cf[0], 1);
    let check = |p: i128, k: i128| -> bool {
        if k == 0 || k > cutoff {
            return false;
        }
        // |q − p/k| = |q.num·k − p·q.den| / (q.den·k)
        let lhs = (q.num.checked_mul(k), p.checked_mul(q.den));
        if let (Some(a), Some(b)) = lhs {
            let delta = (a - b).abs() as f64 / (q.den as f64 * k as f64);
            delta < tol / (k as f64 * k as f64)
        } else {
            false
        }
    };
    if check(p1, q1) {
        return true;
    }
    for &a in &cf[1..] {
        let p2 = match a.checked_mul(p1).and_then(|v| v.checked_add(p0)) {
            Some(v) => v,
            None => return false,
        };
        let q2 = match a.checked_mul(q1).and_then(|v| v.checked_add(q0)) {
            Some(v) => v,
            None => return false,
        };
        if q2 > cutoff {
            // denominators only grow from here
            return check(p2, q2);
        }
        if check(p2, q2) {
            return true;
        }
        (p0, q0) = (p1, q1);
        (p1, q1) = (p2, q2);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_conversion_is_exact() {
        let r = Rational128::from_f64_exact(0.5).unwrap();
        assert_eq!((r.num(), r.den()), (1, 2));
        let r = Rational128::from_f64_exact(1.0 / 3.0).unwrap();
        assert!((r.to_f64() - 1.0 / 3.0).abs() == 0.0);
    }

    #[test]
    fn decimal_parsing() {
        let r = Rational128::from_decimal_str("-12.25").unwrap();
        assert_eq!((r.num(), r.den()), (-49, 4));
        let r = Rational128::from_decimal_str("0.1").unwrap();
        assert_eq!((r.num(), r.den()), (1, 10));
    }

    #[test]
    fn identity_flow_height_is_2t() {
        let q = Rational128::zero();
        for &t in &[0.0, 1.0, 5.0, 20.0, 30.0] {
            let lh = g1_flow_log_height(&q, t).unwrap();
            assert!((lh - 2.0 * t).abs() < 1e-12, "t={t} lh={lh}");
        }
    }

    #[test]
    fn rational_flow_escapes_with_slope_two() {
        let q = Rational128::new(1, 3).unwrap();
        let lh20 = g1_flow_log_height(&q, 20.0).unwrap();
        let lh25 = g1_flow_log_height(&q, 25.0).unwrap();
        assert!((lh25 - lh20) / 5.0 > 1.99, "slope {}", (lh25 - lh20) / 5.0);
    }

    #[test]
    fn golden_flow_stays_low() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let q = Rational128::from_f64_exact(phi).unwrap();
        let mut sup: f64 = f64::NEG_INFINITY;
        let mut t = 0.0;
        while t <= 25.0 {
            sup = sup.max(g1_flow_log_height(&q, t).unwrap());
            t += 0.25;
        }
        assert!(sup < 2.0, "sup log height {sup}");
    }

    #[test]
    fn small_rational_detection() {
        let third = Rational128::from_f64_exact(1.0 / 3.0).unwrap();
        assert!(is_small_rational(&third, 1_000_000, 1e-12));

        let phi = Rational128::from_f64_exact((1.0 + 5f64.sqrt()) / 2.0).unwrap();
        assert!(!is_small_rational(&phi, 1_000_000, 1e-12));
    }

    #[test]
    fn continued_fraction_of_third() {
        let third = Rational128::new(1, 3).unwrap();
        assert_eq!(third.continued_fraction(5), vec![0, 3]);
    }
}
