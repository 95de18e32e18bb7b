//! Multivariate gamma, generalized Pochhammer symbols and the case-defined
//! powers of pi, all carried in signed log-space.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul, Neg};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::rational::{int, ratio, rising, signed_ln, to_f64, Rational};

/// `sign * exp(log_magnitude)`; the magnitude is ignored when `sign == 0`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SignedLogValue {
    pub sign: i8,
    pub log_magnitude: f64,
}

impl SignedLogValue {
    pub const ZERO: SignedLogValue = SignedLogValue {
        sign: 0,
        log_magnitude: f64::NEG_INFINITY,
    };
    pub const ONE: SignedLogValue = SignedLogValue {
        sign: 1,
        log_magnitude: 0.0,
    };

    pub fn new(sign: i8, log_magnitude: f64) -> Self {
        if sign == 0 {
            Self::ZERO
        } else {
            SignedLogValue {
                sign: sign.signum(),
                log_magnitude,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    pub fn from_rational(r: &Rational) -> Self {
        let (sign, log) = signed_ln(r);
        Self::new(sign, log)
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.log_magnitude.exp()
        }
    }

    pub fn abs(&self) -> Self {
        Self::new(self.sign.abs(), self.log_magnitude)
    }

    /// Raises to a real power; only defined for positive values.
    pub fn powf(&self, p: f64) -> Self {
        debug_assert!(self.sign > 0);
        Self::new(self.sign, self.log_magnitude * p)
    }

    /// Sum with cancellation handled relative to the largest term: terms are
    /// sorted by decreasing magnitude and accumulated after scaling by it.
    pub fn sum<I: IntoIterator<Item = SignedLogValue>>(terms: I) -> Self {
        let mut terms: Vec<SignedLogValue> = terms.into_iter().filter(|t| t.sign != 0).collect();
        if terms.is_empty() {
            return Self::ZERO;
        }
        terms.sort_by(|a, b| {
            b.log_magnitude
                .partial_cmp(&a.log_magnitude)
                .unwrap_or(Ordering::Equal)
        });
        let top = terms[0].log_magnitude;
        let total: f64 = terms
            .iter()
            .map(|t| t.sign as f64 * (t.log_magnitude - top).exp())
            .sum();
        if total == 0.0 {
            Self::ZERO
        } else {
            Self::new(if total > 0.0 { 1 } else { -1 }, top + total.abs().ln())
        }
    }
}

impl Mul for SignedLogValue {
    type Output = SignedLogValue;
    fn mul(self, rhs: SignedLogValue) -> SignedLogValue {
        Self::new(self.sign * rhs.sign, self.log_magnitude + rhs.log_magnitude)
    }
}

impl Div for SignedLogValue {
    type Output = SignedLogValue;
    fn div(self, rhs: SignedLogValue) -> SignedLogValue {
        assert!(rhs.sign != 0, "division by zero");
        Self::new(self.sign * rhs.sign, self.log_magnitude - rhs.log_magnitude)
    }
}

impl Neg for SignedLogValue {
    type Output = SignedLogValue;
    fn neg(self) -> SignedLogValue {
        Self::new(-self.sign, self.log_magnitude)
    }
}

impl std::ops::Add for SignedLogValue {
    type Output = SignedLogValue;
    fn add(self, rhs: SignedLogValue) -> SignedLogValue {
        Self::sum([self, rhs])
    }
}

impl PartialEq for SignedLogValue {
    fn eq(&self, other: &Self) -> bool {
        self.sign == other.sign && (self.sign == 0 || self.log_magnitude == other.log_magnitude)
    }
}

impl fmt::Display for SignedLogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => write!(f, "{}exp({})", if s < 0 { "-" } else { "" }, self.log_magnitude),
        }
    }
}

/// `ln |Gamma(x)|` and the sign of `Gamma(x)`.
pub fn ln_gamma(x: f64) -> (f64, i8) {
    let (value, sign) = libm::lgamma_r(x);
    (value, if sign < 0 { -1 } else { 1 })
}

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `Gamma^beta_m(c) = pi^{m(m-1)beta/4} prod_{i=1}^m Gamma(c - (i-1) beta / 2)`.
pub fn log_multivariate_gamma(beta: &Rational, m: usize, c: f64) -> Result<SignedLogValue> {
    let half_beta = to_f64(beta) / 2.0;
    let mm = m as f64;
    let mut log = mm * (mm - 1.0) * to_f64(beta) / 4.0 * std::f64::consts::PI.ln();
    let mut sign = 1i8;
    for i in 1..=m {
        let argument = c - (i as f64 - 1.0) * half_beta;
        if is_pole(argument) {
            return Err(Error::GammaPole { index: i, argument });
        }
        let (lg, s) = ln_gamma(argument);
        log += lg;
        sign *= s;
    }
    Ok(SignedLogValue::new(sign, log))
}

/// `(a)^beta_kappa = prod_i (a - (i-1) beta / 2)_{kappa_i}`, exactly zero
/// as soon as one factor vanishes.
pub fn gen_pochhammer(a: f64, kappa: &Partition, beta: &Rational) -> SignedLogValue {
    let half_beta = to_f64(beta) / 2.0;
    let mut acc = SignedLogValue::ONE;
    for (i, &part) in kappa.parts().iter().enumerate() {
        let start = a - i as f64 * half_beta;
        for j in 0..part {
            let factor = start + j as f64;
            if factor == 0.0 {
                return SignedLogValue::ZERO;
            }
            acc = acc * SignedLogValue::from_f64(factor);
        }
    }
    acc
}

/// Exact counterpart of [`gen_pochhammer`] for rational `a`.
pub fn gen_pochhammer_exact(a: &Rational, kappa: &Partition, beta: &Rational) -> Rational {
    let half_beta = beta / int(2);
    let mut acc = Rational::one();
    for (i, &part) in kappa.parts().iter().enumerate() {
        let start = a - &half_beta * int(i as i64);
        let factor = rising(&start, part);
        if factor.is_zero() {
            return Rational::zero();
        }
        acc *= factor;
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PiExponent {
    R,
    R1,
    R2,
}

/// Case-defined exponents of pi in the leading constants:
/// `r = n beta/2` (beta = 1) or `(n-1) beta/2`; `r1 = 0` or `-n beta/2`;
/// `r2 = 0` or `-(n-1) beta/2`.
pub fn pi_exponent(which: PiExponent, beta: u32, n: u32) -> Result<Rational> {
    let n = n as i64;
    let b = beta as i64;
    match beta {
        1 => Ok(match which {
            PiExponent::R => ratio(n * b, 2),
            PiExponent::R1 | PiExponent::R2 => Rational::zero(),
        }),
        2 | 4 => Ok(match which {
            PiExponent::R => ratio((n - 1) * b, 2),
            PiExponent::R1 => ratio(-n * b, 2),
            PiExponent::R2 => ratio(-(n - 1) * b, 2),
        }),
        other => Err(Error::UnsupportedBeta(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::part;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn multivariate_gamma_values() {
        let v = log_multivariate_gamma(&int(1), 1, 2.0).unwrap();
        assert_eq!(v.sign, 1);
        assert!(v.log_magnitude.abs() < 1e-15);
        let v = log_multivariate_gamma(&int(1), 2, 1.5).unwrap();
        assert!(close(v.log_magnitude, (PI / 2.0).ln(), 1e-14));
        let v = log_multivariate_gamma(&int(2), 2, 2.0).unwrap();
        assert!(close(v.log_magnitude, PI.ln(), 1e-14));
        for c in [0.3, 1.0, 2.5, 17.25, 150.0] {
            let v = log_multivariate_gamma(&ratio(3, 7), 1, c).unwrap();
            assert!(close(v.log_magnitude, ln_gamma(c).0, 1e-15) || v.log_magnitude == ln_gamma(c).0);
        }
    }

    #[test]
    fn multivariate_gamma_pole() {
        // c - beta/2 = 0 at i = 2
        let err = log_multivariate_gamma(&int(2), 3, 1.0).unwrap_err();
        assert_eq!(err, Error::GammaPole { index: 2, argument: 0.0 });
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(gen_pochhammer(2.7, &Partition::empty(), &int(1)), SignedLogValue::ONE);
        assert!(close(gen_pochhammer(3.0, &part![2], &int(1)).to_f64(), 12.0, 1e-15));
        assert!(close(gen_pochhammer(2.0, &part![2, 1], &int(1)).to_f64(), 9.0, 1e-15));
        assert_eq!(gen_pochhammer_exact(&int(2), &part![2, 1], &int(1)), ratio(9, 1));
        let v = gen_pochhammer(-3.0, &part![2], &int(1));
        assert!(close(v.to_f64(), 6.0, 1e-15));
        let v = gen_pochhammer(-3.0, &part![3], &int(1));
        assert!(close(v.to_f64(), -6.0, 1e-15));
        assert!(gen_pochhammer(-3.0, &part![4], &int(1)).is_zero());
    }

    #[test]
    fn pochhammer_against_direct_product() {
        for a in [0.25, 1.5, 4.0, 7.125] {
            for kappa in [part![3, 2, 1], part![5], part![2, 2, 2, 1]] {
                for beta in [int(1), int(2), ratio(1, 2)] {
                    let hb = to_f64(&beta) / 2.0;
                    let mut direct = 1.0;
                    for (i, &p) in kappa.parts().iter().enumerate() {
                        for j in 0..p {
                            direct *= a - i as f64 * hb + j as f64;
                        }
                    }
                    let v = gen_pochhammer(a, &kappa, &beta);
                    assert!(close(v.to_f64(), direct, 1e-13), "{a} {kappa}");
                }
            }
        }
    }

    #[test]
    fn vanishing_truncates_t_sum() {
        // p = beta (m - n + 1)/2 - 1 with the first row parameter (n-m-1) beta/2 + 1 = -p
        for (beta, m, n) in [(1u32, 10i64, 3i64), (2, 10, 3), (1, 5, 2), (1, 145, 2)] {
            let b = int(beta as i64);
            let a = ratio((n - m - 1) * beta as i64, 2) + int(1);
            let p = ratio(beta as i64 * (m - n + 1), 2) - int(1);
            assert!(p.is_integer());
            let p = p.to_integer().try_into().unwrap_or(0u32);
            for t1 in 0..=p + 3 {
                let tau = part![t1];
                let exact = gen_pochhammer_exact(&a, &tau, &b);
                let float = gen_pochhammer(to_f64(&a), &tau, &b);
                assert_eq!(exact.is_zero(), t1 > p);
                assert_eq!(float.is_zero(), t1 > p);
            }
        }
    }

    #[test]
    fn pi_exponents() {
        assert_eq!(pi_exponent(PiExponent::R, 1, 3).unwrap(), ratio(3, 2));
        assert_eq!(pi_exponent(PiExponent::R1, 2, 3).unwrap(), int(-3));
        assert_eq!(pi_exponent(PiExponent::R2, 1, 7).unwrap(), int(0));
        assert_eq!(pi_exponent(PiExponent::R, 4, 3).unwrap(), int(4));
        assert!(pi_exponent(PiExponent::R, 3, 3).is_err());
    }

    #[test]
    fn signed_sums() {
        let s = SignedLogValue::sum([
            SignedLogValue::from_f64(1e300),
            SignedLogValue::from_f64(-1e300),
            SignedLogValue::from_f64(2.0),
        ]);
        // cancellation below the top term's precision is not recoverable
        assert!(s.to_f64().abs() < 1e286);
        let s = SignedLogValue::from_f64(3.0) + SignedLogValue::from_f64(-5.0);
        assert!(close(s.to_f64(), -2.0, 1e-15));
        assert!((SignedLogValue::from_f64(2.0) + SignedLogValue::from_f64(-2.0)).is_zero());
        let p = SignedLogValue::from_f64(-3.0) * SignedLogValue::from_f64(4.0);
        assert!(close(p.to_f64(), -12.0, 1e-15));
        let r = SignedLogValue::from_rational(&ratio(-28, 75));
        assert!(close(r.to_f64(), -28.0 / 75.0, 1e-15));
    }
}
