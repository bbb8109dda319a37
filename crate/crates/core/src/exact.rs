//! Order-independent summation of non-negative reals.
//!
//! Values are converted to an integer count of `2^-52` units and added in
//! `u128`, so any permutation or grouping of the same terms produces the same
//! bits. Every square root of a positive integer, and every value `>= 1`, is an
//! exact multiple of `2^-52`; smaller values are rounded to the nearest unit.

const FRAC_BITS: i32 = 52;
const UNIT: f64 = 4503599627370496.0; // 2^52

/// Convert a non-negative finite value to fixed-point units.
#[inline]
pub fn to_fixed(x: f64) -> u128 {
    debug_assert!(x >= 0.0 && x.is_finite());
    if x == 0.0 {
        return 0;
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, exp) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    let shift = exp + FRAC_BITS;
    if shift >= 0 {
        (mantissa as u128) << shift
    } else if shift > -64 {
        let s = (-shift) as u32;
        ((mantissa as u128) + (1u128 << (s - 1))) >> s
    } else {
        0
    }
}

#[inline]
pub fn from_fixed(units: u128) -> f64 {
    units as f64 / UNIT
}

/// Fixed-point units of an integer value.
#[inline]
pub fn int_to_fixed(v: u64) -> u128 {
    (v as u128) << FRAC_BITS
}

/// Running exact sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExactSum(u128);

impl ExactSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        self.0 += to_fixed(x);
    }

    pub fn value(&self) -> f64 {
        from_fixed(self.0)
    }
}

impl FromIterator<f64> for ExactSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = ExactSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn integers_and_roots_are_exact() {
        assert_eq!(from_fixed(to_fixed(3.0)), 3.0);
        assert_eq!(to_fixed(7.0), int_to_fixed(7));
        let r = 2f64.sqrt();
        assert_eq!(from_fixed(to_fixed(r)), r);
        assert_eq!(to_fixed(0.5), 1u128 << 51);
    }

    proptest! {
        #[test]
        fn permutation_invariant(mut xs in proptest::collection::vec(0u32..100_000, 1..200), seed in any::<u64>()) {
            let vals: Vec<f64> = xs.iter().map(|&v| (v as f64).sqrt()).collect();
            let a: ExactSum = vals.iter().copied().collect();
            // deterministic shuffle
            let n = xs.len();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                xs.swap(i, (s >> 33) as usize % (i + 1));
            }
            let b: ExactSum = xs.iter().map(|&v| (v as f64).sqrt()).collect();
            prop_assert_eq!(a, b);
            let naive: f64 = vals.iter().sum();
            prop_assert!((a.value() - naive).abs() <= 1e-9 * naive.max(1.0));
        }
    }
}
