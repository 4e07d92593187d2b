//! Exact probabilities.
//!
//! Every execution path of a model has probability `2^-s` where `s` is the
//! number of sampled bits, so masses accumulated by the interpreter are kept
//! as dyadic rationals and only converted to arbitrary rationals at the
//! reporting and comparison boundary.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Prob = BigRational;

/// Largest denominator exponent a [`Dyadic`] can carry.
pub const MAX_DYADIC_EXP: u32 = 126;

/// `num / 2^exp`, kept normalised (odd numerator or zero exponent).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    num: u128,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };

    /// `2^-bits`.
    pub fn pow2_neg(bits: u32) -> Dyadic {
        assert!(
            bits <= MAX_DYADIC_EXP,
            "tape of {bits} bits exceeds exact range"
        );
        Dyadic { num: 1, exp: bits }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// `(num, exp)` with the value `num / 2^exp`.
    pub fn parts(self) -> (u128, u32) {
        (self.num, self.exp)
    }

    pub fn add(self, other: Dyadic) -> Dyadic {
        let exp = self.exp.max(other.exp);
        let a = self.num << (exp - self.exp);
        let b = other.num << (exp - other.exp);
        Dyadic { num: a + b, exp }.normalised()
    }

    /// `self - other`; panics if negative.
    pub fn sub(self, other: Dyadic) -> Dyadic {
        let exp = self.exp.max(other.exp);
        let a = self.num << (exp - self.exp);
        let b = other.num << (exp - other.exp);
        Dyadic {
            num: a.checked_sub(b).expect("negative dyadic"),
            exp,
        }
        .normalised()
    }

    pub fn mul(self, other: Dyadic) -> Dyadic {
        let num = self
            .num
            .checked_mul(other.num)
            .expect("dyadic product overflow");
        let exp = self.exp + other.exp;
        assert!(exp <= MAX_DYADIC_EXP + 1, "dyadic exponent overflow");
        Dyadic { num, exp }.normalised()
    }

    /// Halves `k` times.
    pub fn shift_down(self, k: u32) -> Dyadic {
        let exp = self.exp + k;
        assert!(exp <= MAX_DYADIC_EXP + 1, "dyadic exponent overflow");
        Dyadic { num: self.num, exp }.normalised()
    }

    fn normalised(mut self) -> Dyadic {
        if self.num == 0 {
            return Dyadic::ZERO;
        }
        let tz = self.num.trailing_zeros().min(self.exp);
        self.num >>= tz;
        self.exp -= tz;
        self
    }

    pub fn to_ratio(self) -> Prob {
        BigRational::new(BigInt::from(self.num), BigInt::one() << self.exp as usize)
    }

    /// Signed difference `self - other` as a rational.
    pub fn diff(self, other: Dyadic) -> Prob {
        self.to_ratio() - other.to_ratio()
    }

    pub fn partial_cmp_dyadic(&self, other: &Dyadic) -> std::cmp::Ordering {
        let exp = self.exp.max(other.exp);
        (self.num << (exp - self.exp)).cmp(&(other.num << (exp - other.exp)))
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::ZERO, Dyadic::add)
    }
}

pub fn ratio(num: i64, den: i64) -> Prob {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Prob {
    BigRational::zero()
}

pub fn one() -> Prob {
    BigRational::one()
}

/// `2^-k` as a rational.
pub fn pow2_neg(k: u32) -> Prob {
    BigRational::new(BigInt::one(), BigInt::one() << k as usize)
}

/// `n^-c` as a rational.
pub fn inv_pow(n: u32, c: u32) -> Prob {
    BigRational::new(BigInt::one(), BigInt::from(n).pow(c))
}

pub fn abs(p: &Prob) -> Prob {
    p.abs()
}

/// `num/den` in lowest terms.
pub fn format(p: &Prob) -> String {
    format!("{}/{}", p.numer(), p.denom())
}

/// Parses `num/den` or an integer.
pub fn parse(s: &str) -> Option<Prob> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().ok()?;
            let b: BigInt = b.trim().parse().ok()?;
            if b.is_zero() {
                return None;
            }
            Some(BigRational::new(a, b))
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_sums_are_exact() {
        let half = Dyadic::pow2_neg(1);
        let quarter = Dyadic::pow2_neg(2);
        assert_eq!(half.add(quarter).add(quarter), Dyadic::ONE);
        assert_eq!(half.add(quarter).to_ratio(), ratio(3, 4));
        assert_eq!(Dyadic::ONE.sub(quarter).to_ratio(), ratio(3, 4));
        assert_eq!(half.shift_down(3).to_ratio(), pow2_neg(4));
    }

    #[test]
    fn format_and_parse() {
        assert_eq!(format(&ratio(6, 8)), "3/4");
        assert_eq!(parse("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse("1").unwrap(), one());
        assert!(parse("1/0").is_none());
        assert_eq!(format(&zero()), "0/1");
    }
}
