//! Exact arithmetic substrate: rationals, dyadic valuation and norm, the gcd
//! map `G2`, and 2x2 integer matrices acting as linear fractional maps.

use std::fmt;
use std::ops::Mul;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact reduced fraction with positive denominator. Zero is `0/1`.
pub type Rational = BigRational;

/// Builds the reduced rational `n/d`. Panics if `d == 0`.
pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Power of two `2^e` as an exact rational, for any sign of `e`.
pub fn pow2(e: i64) -> Rational {
    let m = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Rational::from_integer(m)
    } else {
        Rational::new(BigInt::one(), m)
    }
}

/// Dyadic valuation of an integer. `δ(0)` is [`Valuation::Infinite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Finite(u64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u64> {
        match self {
            Valuation::Finite(k) => Some(k),
            Valuation::Infinite => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(k) => write!(f, "{k}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(k) => s.serialize_u64(*k),
            Valuation::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Largest `k` with `2^k | n`.
pub fn dyadic_valuation(n: &BigInt) -> Valuation {
    n.trailing_zeros().map_or(Valuation::Infinite, Valuation::Finite)
}

/// Same as [`dyadic_valuation`] for unsigned integers.
pub fn dyadic_valuation_uint(n: &BigUint) -> Valuation {
    n.trailing_zeros().map_or(Valuation::Infinite, Valuation::Finite)
}

/// The dyadic absolute value `|a/b|_2 = 2^(δ(b) - δ(a))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DyadicNorm {
    Zero,
    Pow2(i64),
}

impl DyadicNorm {
    pub fn of(r: &Rational) -> Self {
        match r.numer().trailing_zeros() {
            None => DyadicNorm::Zero,
            Some(num) => {
                let den = r.denom().trailing_zeros().unwrap_or(0);
                DyadicNorm::Pow2(den as i64 - num as i64)
            }
        }
    }

    /// Exponent `e` of the value `2^e`; `None` for `|0|_2`.
    pub fn exponent(self) -> Option<i64> {
        match self {
            DyadicNorm::Zero => None,
            DyadicNorm::Pow2(e) => Some(e),
        }
    }

    pub fn to_rational(self) -> Rational {
        match self {
            DyadicNorm::Zero => Rational::zero(),
            DyadicNorm::Pow2(e) => pow2(e),
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            DyadicNorm::Zero => 0.0,
            DyadicNorm::Pow2(e) => 2f64.powi(e as i32),
        }
    }
}

impl Mul for DyadicNorm {
    type Output = DyadicNorm;

    fn mul(self, rhs: DyadicNorm) -> DyadicNorm {
        match (self, rhs) {
            (DyadicNorm::Pow2(a), DyadicNorm::Pow2(b)) => DyadicNorm::Pow2(a + b),
            _ => DyadicNorm::Zero,
        }
    }
}

/// `|r|_2` for an exact rational.
pub fn dyadic_norm(r: &Rational) -> DyadicNorm {
    DyadicNorm::of(r)
}

/// The gcd map `G2(y) = min(1, |y|_2^-2)`.
pub fn g2(y: &Rational) -> Rational {
    match DyadicNorm::of(y) {
        DyadicNorm::Pow2(e) if e > 0 => pow2(-2 * e),
        _ => Rational::one(),
    }
}

/// Natural logarithm of a big unsigned integer. Returns `-inf` for zero.
pub fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 64 {
        return n.to_u64().map_or(f64::NEG_INFINITY, |v| (v as f64).ln());
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().expect("64-bit window");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// 2x2 integer matrix `[[m00, m01], [m10, m11]]`, acting on rationals as the
/// map `x -> (m00 x + m01) / (m10 x + m11)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix2 {
    pub m00: BigInt,
    pub m01: BigInt,
    pub m10: BigInt,
    pub m11: BigInt,
}

impl IntMatrix2 {
    pub fn new(m00: impl Into<BigInt>, m01: impl Into<BigInt>, m10: impl Into<BigInt>, m11: impl Into<BigInt>) -> Self {
        IntMatrix2 { m00: m00.into(), m01: m01.into(), m10: m10.into(), m11: m11.into() }
    }

    pub fn identity() -> Self {
        Self::new(1, 0, 0, 1)
    }

    /// `M_a = [[0, 1], [2^a, 2^a]]`, the integer matrix of the inverse branch
    /// `h_a(x) = 2^-a / (1 + x)`.
    pub fn branch(a: u32) -> Self {
        let p = BigInt::one() << a;
        IntMatrix2 { m00: BigInt::zero(), m01: BigInt::one(), m10: p.clone(), m11: p }
    }

    pub fn det(&self) -> BigInt {
        &self.m00 * &self.m11 - &self.m01 * &self.m10
    }

    fn denominator_at(&self, x: &Rational) -> Result<Rational> {
        let den = Rational::from_integer(self.m10.clone()) * x + Rational::from_integer(self.m11.clone());
        if den.is_zero() {
            Err(Error::Pole)
        } else {
            Ok(den)
        }
    }

    /// `(m00 x + m01) / (m10 x + m11)`.
    pub fn apply(&self, x: &Rational) -> Result<Rational> {
        let den = self.denominator_at(x)?;
        let num = Rational::from_integer(self.m00.clone()) * x + Rational::from_integer(self.m01.clone());
        Ok(num / den)
    }

    /// Signed derivative of the map at `x`: `det / (m10 x + m11)^2`.
    pub fn derivative_at(&self, x: &Rational) -> Result<Rational> {
        let den = self.denominator_at(x)?;
        Ok(Rational::from_integer(self.det()) / (&den * &den))
    }

    /// `|det|` as an unsigned integer.
    pub fn abs_det(&self) -> BigUint {
        self.det().abs().to_biguint().expect("absolute value is nonnegative")
    }
}

impl Mul for &IntMatrix2 {
    type Output = IntMatrix2;

    fn mul(self, rhs: &IntMatrix2) -> IntMatrix2 {
        IntMatrix2 {
            m00: &self.m00 * &rhs.m00 + &self.m01 * &rhs.m10,
            m01: &self.m00 * &rhs.m01 + &self.m01 * &rhs.m11,
            m10: &self.m10 * &rhs.m00 + &self.m11 * &rhs.m10,
            m11: &self.m10 * &rhs.m01 + &self.m11 * &rhs.m11,
        }
    }
}

impl fmt::Display for IntMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.m00, self.m01, self.m10, self.m11)
    }
}

/// Applies `m` to `x`. See [`IntMatrix2::apply`].
pub fn lft_apply(m: &IntMatrix2, x: &Rational) -> Result<Rational> {
    m.apply(x)
}

/// Derivative of the map of `m` at `x`. See [`IntMatrix2::derivative_at`].
pub fn lft_derivative_at(m: &IntMatrix2, x: &Rational) -> Result<Rational> {
    m.derivative_at(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(dyadic_valuation(&big(75)), Valuation::Finite(0));
        assert_eq!(dyadic_valuation(&big(52)), Valuation::Finite(2));
        assert_eq!(dyadic_valuation(&big(1)), Valuation::Finite(0));
        assert_eq!(dyadic_valuation(&big(-48)), Valuation::Finite(4));
        assert_eq!(dyadic_valuation(&big(0)), Valuation::Infinite);
        assert_eq!(Valuation::Infinite.to_string(), "inf");
        assert_eq!(serde_json::to_string(&Valuation::Infinite).unwrap(), "\"inf\"");
    }

    #[test]
    fn norm_examples() {
        assert_eq!(dyadic_norm(&rational(3, 4)), DyadicNorm::Pow2(2));
        assert_eq!(dyadic_norm(&rational(3, 4)).to_rational(), rational(4, 1));
        assert_eq!(dyadic_norm(&rational(10, 1)).to_rational(), rational(1, 2));
        assert_eq!(dyadic_norm(&rational(1, 1)), DyadicNorm::Pow2(0));
        assert_eq!(dyadic_norm(&rational(0, 1)), DyadicNorm::Zero);
    }

    #[test]
    fn g2_examples() {
        assert_eq!(g2(&rational(2, 5)), rational(1, 1));
        assert_eq!(g2(&rational(3, 4)), rational(1, 16));
        assert_eq!(g2(&rational(0, 1)), rational(1, 1));
        assert_eq!(g2(&rational(5, 8)), rational(1, 64));
    }

    #[test]
    fn lft_examples() {
        let m1 = IntMatrix2::branch(1);
        assert_eq!(m1, IntMatrix2::new(0, 1, 2, 2));
        assert_eq!(m1.apply(&rational(0, 1)).unwrap(), rational(1, 2));
        assert_eq!(IntMatrix2::identity().apply(&rational(3, 7)).unwrap(), rational(3, 7));
        assert_eq!(IntMatrix2::branch(0).apply(&rational(1, 1)).unwrap(), rational(1, 2));

        let m12 = &m1 * &IntMatrix2::branch(2);
        assert_eq!(m12, IntMatrix2::new(4, 4, 8, 10));
        assert_eq!(m12.derivative_at(&rational(0, 1)).unwrap(), rational(2, 25));
        assert_eq!(IntMatrix2::identity().derivative_at(&rational(5, 3)).unwrap(), rational(1, 1));
        assert_eq!(IntMatrix2::branch(0).derivative_at(&rational(0, 1)).unwrap(), rational(-1, 1));
    }

    #[test]
    fn pole_is_reported() {
        let m = IntMatrix2::new(1, 0, 1, -1);
        assert_eq!(m.apply(&rational(1, 1)), Err(Error::Pole));
        assert_eq!(m.derivative_at(&rational(1, 1)), Err(Error::Pole));
    }

    #[test]
    fn ln_of_big_integers() {
        let n = BigUint::one() << 300u32;
        assert!((ln_biguint(&n) - 300.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!((ln_biguint(&BigUint::from(1000u32)) - 1000f64.ln()).abs() < 1e-12);
    }

    fn nonzero_rational() -> impl Strategy<Value = Rational> {
        (-5000i64..5000, 1i64..5000)
            .prop_filter("nonzero", |(n, _)| *n != 0)
            .prop_map(|(n, d)| rational(n, d))
    }

    fn small_matrix() -> impl Strategy<Value = IntMatrix2> {
        (-9i64..10, -9i64..10, -9i64..10, -9i64..10).prop_map(|(a, b, c, d)| IntMatrix2::new(a, b, c, d))
    }

    proptest! {
        #[test]
        fn norm_is_multiplicative(r in nonzero_rational(), s in nonzero_rational()) {
            prop_assert_eq!(dyadic_norm(&(&r * &s)), dyadic_norm(&r) * dyadic_norm(&s));
        }

        #[test]
        fn valuation_is_exact(n in prop::num::i64::ANY.prop_filter("nonzero", |n| *n != 0)) {
            let k = dyadic_valuation(&big(n)).finite().unwrap();
            let n = n as i128;
            prop_assert_eq!(n % (1i128 << k), 0);
            prop_assert_ne!(n % (1i128 << (k + 1)), 0);
        }

        #[test]
        fn g2_is_min_of_one_and_inverse_square_norm(r in nonzero_rational()) {
            let norm = dyadic_norm(&r).to_rational();
            let inv_sq = Rational::one() / (&norm * &norm);
            let expected = if inv_sq < Rational::one() { inv_sq } else { Rational::one() };
            prop_assert_eq!(g2(&r), expected);
        }

        #[test]
        fn composition_and_chain_rule(m in small_matrix(), n in small_matrix(), x in nonzero_rational()) {
            let mn = &m * &n;
            if let (Ok(inner), Ok(whole)) = (n.apply(&x), mn.apply(&x)) {
                if let Ok(outer) = m.apply(&inner) {
                    prop_assert_eq!(&whole, &outer);
                    let lhs = mn.derivative_at(&x).unwrap();
                    let rhs = m.derivative_at(&inner).unwrap() * n.derivative_at(&x).unwrap();
                    prop_assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn g2_many_random_rationals() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let n: i64 = rng.gen_range(1..1_000_000) * if rng.gen() { 1 } else { -1 };
            let d: i64 = rng.gen_range(1..1_000_000);
            let r = rational(n, d);
            let e = dyadic_norm(&r).exponent().unwrap();
            let expected = if e > 0 { pow2(-2 * e) } else { Rational::one() };
            assert_eq!(g2(&r), expected);
        }
    }
}
