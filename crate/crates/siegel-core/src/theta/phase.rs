//! Exact fractional parts of dyadic phase terms.
//!
//! Theta phases `Q[n] + l(n)` are reduced mod 1 before any trig call. Every
//! `f64` coefficient is a dyadic rational `m·2^e`; multiplying by integer
//! lattice data and reducing mod 1 stays in 128-bit integers, so anchor
//! phases are exact for `|n| ≤ 2^20`. Shifts of `Q` by integer symmetric
//! matrices and of `l` by integer vectors then leave per-term phases
//! bit-for-bit unchanged.

/// Dyadic decomposition `value = m · 2^e` of a finite `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dyadic {
    pub m: i128,
    pub e: i32,
}

impl Dyadic {
    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            return Self { m: 0, e: 0 };
        }
        let bits = x.to_bits();
        let sign: i128 = if bits >> 63 == 1 { -1 } else { 1 };
        let exponent = ((bits >> 52) & 0x7ff) as i32;
        let fraction = bits & 0x000f_ffff_ffff_ffff;
        let (mut m, mut e) = if exponent == 0 {
            (fraction as i128, -1074)
        } else {
            ((fraction | 0x0010_0000_0000_0000) as i128, exponent - 1075)
        };
        // normalize away trailing zeros so e is as large as possible
        let tz = m.trailing_zeros();
        if tz > 0 && tz < 127 {
            m >>= tz;
            e += tz as i32;
        }
        Self { m: sign * m, e }
    }

    /// `frac(self · k)` in `[0, 1)`, exact whenever `|m·k| < 2^127`.
    pub fn frac_times(&self, k: i128) -> f64 {
        if self.m == 0 || k == 0 {
            return 0.0;
        }
        if self.e >= 0 {
            // an integer times an integer: zero mod 1
            return 0.0;
        }
        let s = -self.e as u32;
        let p = match self.m.checked_mul(k) {
            Some(p) => p,
            None => {
                // |value·k| is astronomically large; phase information is
                // already lost at f64 level, fall back to float reduction
                let v = (self.m as f64) * (k as f64) * (self.e as f64).exp2();
                return v.rem_euclid(1.0);
            }
        };
        if s < 127 {
            let modulus = 1i128 << s;
            let r = p.rem_euclid(modulus);
            // r < 2^126 and the modulus is a power of two: the quotient is
            // a correctly rounded f64
            (r as f64) * (-(s as f64)).exp2()
        } else {
            // |p·2^{-s}| < 2^{127-s} <= 1: no wrap can occur
            let v = (p as f64) * (-(s as f64)).exp2();
            v.rem_euclid(1.0)
        }
    }
}

/// Fractional part of a sum of fractional parts.
#[inline]
pub fn frac(x: f64) -> f64 {
    x - x.floor()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_values_have_zero_frac() {
        assert_eq!(Dyadic::from_f64(3.0).frac_times(7), 0.0);
        assert_eq!(Dyadic::from_f64(-12.0).frac_times(5), 0.0);
    }

    #[test]
    fn quarter_times_odd() {
        let d = Dyadic::from_f64(0.25);
        assert_eq!(d.frac_times(1), 0.25);
        assert_eq!(d.frac_times(2), 0.5);
        assert_eq!(d.frac_times(4), 0.0);
        assert_eq!(d.frac_times(9), 0.25);
    }

    #[test]
    fn integer_shift_invariance_is_exact() {
        // mantissa limited to 40 bits so that adding 3 stays exact in f64
        let q40 = (std::f64::consts::SQRT_2 * (1u64 << 40) as f64).round() / (1u64 << 40) as f64;
        let q = Dyadic::from_f64(q40);
        let q_shift = Dyadic::from_f64(q40 + 3.0);
        for n in [1i128, 2, 17, 1_000_003] {
            let k = n * n;
            assert_eq!(q.frac_times(k), q_shift.frac_times(k), "n = {n}");
        }
    }

    #[test]
    fn matches_naive_for_small_arguments() {
        let vals = [0.1, 1.0 / 3.0, std::f64::consts::PI, 1e-8, 123.456];
        for &v in &vals {
            let d = Dyadic::from_f64(v);
            for k in [1i128, 5, 12, 99] {
                let exact = d.frac_times(k);
                let naive = (v * k as f64).rem_euclid(1.0);
                let diff = (exact - naive).abs().min(1.0 - (exact - naive).abs());
                assert!(diff < 1e-9, "v={v} k={k} exact={exact} naive={naive}");
            }
        }
    }
}
