//! Exact rational helpers shared by the symbolic modules.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses `"p"`, `"p/q"` or a finite decimal such as `"0.5"`.
pub fn parse_rational(input: &str) -> Result<Rational> {
    let err = || Error::ParseRational {
        input: input.to_string(),
    };
    let s = input.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 64 {
            return Err(err());
        }
        let negative = whole.trim_start().starts_with('-');
        let whole: BigInt = match whole {
            "" | "-" | "+" => BigInt::zero(),
            w => w.parse().map_err(|_| err())?,
        };
        let frac_int: BigInt = frac.parse().map_err(|_| err())?;
        let scale = num_traits::pow(BigInt::from(10u32), frac.len());
        let magnitude = whole.abs() * &scale + frac_int;
        let numer = if negative { -magnitude } else { magnitude };
        return Ok(Rational::new(numer, scale));
    }
    let p: BigInt = s.parse().map_err(|_| err())?;
    Ok(Rational::from_integer(p))
}

/// `p/q`, or just `p` for integers.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Natural log of |n| for arbitrarily large integers. Returns -inf for zero.
pub fn ln_abs_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = n.abs() >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// `|n| = top * 2^shift` with `top` holding the leading 64 bits.
fn split_bigint(n: &BigInt) -> (f64, i64) {
    let bits = n.bits();
    if bits <= 64 {
        return (n.abs().to_f64().unwrap(), 0);
    }
    let shift = bits - 64;
    let top: BigInt = n.abs() >> shift;
    (top.to_f64().unwrap(), shift as i64)
}

/// `ln |a / b| + exponent ln 2`, keeping the binary exponents exact so
/// the result is accurate even when `a` and `b` have thousands of digits.
pub fn ln_abs_ratio(a: &BigInt, b: &BigInt, exponent: i64) -> f64 {
    if a.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (ta, sa) = split_bigint(a);
    let (tb, sb) = split_bigint(b);
    (ta / tb).ln() + (sa - sb + exponent) as f64 * std::f64::consts::LN_2
}

/// Sign and natural log of |r|.
pub fn signed_ln(r: &Rational) -> (i8, f64) {
    let sign = match r.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    };
    if sign == 0 {
        return (0, f64::NEG_INFINITY);
    }
    (sign, ln_abs_ratio(r.numer(), r.denom(), 0))
}

/// Converts with full relative precision even when numerator and denominator
/// individually overflow `f64`.
pub fn to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 9.0e15 && d < 9.0e15 {
            return n / d;
        }
    }
    let (sign, log) = signed_ln(r);
    sign as f64 * log.exp()
}

/// Exact rational value of a finite `f64`.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Rising factorial (a)_j = a (a+1) ... (a+j-1).
pub fn rising(a: &Rational, j: u32) -> Rational {
    let mut acc = Rational::one();
    let mut factor = a.clone();
    for _ in 0..j {
        if factor.is_zero() {
            return Rational::zero();
        }
        acc *= &factor;
        factor += Rational::one();
    }
    acc
}

/// True when `r` is a nonnegative integer.
pub fn is_nonnegative_integer(r: &Rational) -> bool {
    r.is_integer() && !r.is_negative()
}

pub fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    a.lcm(b)
}
