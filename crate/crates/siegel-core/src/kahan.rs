//! Compensated (Kahan) accumulation and deterministic pairwise reduction.

use num_complex::Complex64;

/// Kahan summator for `f64`.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Component-wise compensated accumulator for complex values.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanComplex {
    re: KahanSum,
    im: KahanSum,
}

impl KahanComplex {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Pairwise tree reduction of partial sums in a fixed order.
///
/// The result depends only on the order of `parts`, never on the number of
/// worker threads that produced them.
pub fn tree_sum_complex(parts: &[Complex64]) -> Complex64 {
    match parts.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => parts[0],
        n => {
            let mid = n / 2;
            tree_sum_complex(&parts[..mid]) + tree_sum_complex(&parts[mid..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut k = KahanSum::new();
        k.add(1.0);
        for _ in 0..10_000 {
            k.add(1e-16);
        }
        assert!((k.value() - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn tree_sum_matches_sequential_on_ones() {
        let parts: Vec<Complex64> = (0..1023).map(|_| Complex64::new(1.0, -1.0)).collect();
        let s = tree_sum_complex(&parts);
        assert_eq!(s.re, 1023.0);
        assert_eq!(s.im, -1023.0);
    }
}
