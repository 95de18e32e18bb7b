//! Integer partitions: the index set of every polynomial basis in this crate.
//!
//! A [`Partition`] is stored in canonical form (weakly decreasing, no
//! trailing zeros), so two equal partitions always hash and compare equal.
//! The derived `Ord` is lexicographic on the parts, which coincides with the
//! lexicographic order used for leading terms whenever weights agree.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, Rational};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// Builds a partition from parts that must be weakly decreasing; trailing
    /// zeros are dropped.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::ParsePartition {
                input: format!("{parts:?}"),
                reason: "parts must be weakly decreasing".into(),
            });
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Partition(parts))
    }

    /// Sorts arbitrary nonnegative parts into canonical form.
    pub fn from_unsorted(mut parts: Vec<u32>) -> Self {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Partition(parts)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// i-th part (0-based), zero beyond the length.
    pub fn part(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Fixed-length view padded with zeros. Panics if `m < len()`.
    pub fn padded(&self, m: usize) -> Vec<u32> {
        assert!(self.len() <= m, "partition {self} longer than {m}");
        let mut v = self.0.clone();
        v.resize(m, 0);
        v
    }

    pub fn conjugate(&self) -> Partition {
        let first = self.part(0);
        let parts = (1..=first)
            .map(|j| self.0.iter().take_while(|&&p| p >= j).count() as u32)
            .collect();
        Partition(parts)
    }

    /// Product over the cells (i, j) of `kappa'_j - i + alpha (kappa_i - j + 1)`.
    pub fn upper_hook_product(&self, alpha: &Rational) -> Rational {
        let conj = self.conjugate();
        let mut acc = Rational::one();
        for (i, &row) in self.0.iter().enumerate() {
            let i1 = i as i64 + 1;
            for j in 1..=row {
                let leg = int(conj.part(j as usize - 1) as i64 - i1);
                let arm = int((row - j + 1) as i64);
                acc *= leg + alpha * arm;
            }
        }
        acc
    }

    /// Dominance order: every partial sum of `self` is at least the
    /// corresponding partial sum of `other` (equal weights assumed).
    pub fn dominates(&self, other: &Partition) -> bool {
        let n = self.len().max(other.len());
        let (mut a, mut b) = (0u64, 0u64);
        for i in 0..n {
            a += self.part(i) as u64;
            b += other.part(i) as u64;
            if a < b {
                return false;
            }
        }
        true
    }

    /// Componentwise sum, the exponent rule for products of E-monomials.
    pub fn add(&self, other: &Partition) -> Partition {
        let n = self.len().max(other.len());
        Partition((0..n).map(|i| self.part(i) + other.part(i)).collect())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "()");
        }
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Partition {
    /// Comma-separated form used on the command line and as JSON keys; the
    /// empty partition is the empty string.
    pub fn to_csv(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        parts.join(",")
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Accepts `"2,1,1"`, `"(2,1,1)"`, `"2 1 1"`, and `""`/`"()"` for the
    /// empty partition.
    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| Error::ParsePartition {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let body = s.trim();
        let body = body
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .unwrap_or(body)
            .trim();
        if body.is_empty() {
            return Ok(Partition::empty());
        }
        let mut parts = Vec::new();
        for token in body.split(|c: char| c == ',' || c.is_whitespace()) {
            if token.is_empty() {
                continue;
            }
            let v: u32 = token.parse().map_err(|_| err("parts must be nonnegative integers"))?;
            if v > 100_000 {
                return Err(err("part too large"));
            }
            parts.push(v);
        }
        if parts.len() > 4096 {
            return Err(err("too many parts"));
        }
        Partition::new(parts).map_err(|_| err("parts must be weakly decreasing"))
    }
}

impl TryFrom<Vec<u32>> for Partition {
    type Error = Error;

    fn try_from(parts: Vec<u32>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<u32> {
    fn from(p: Partition) -> Vec<u32> {
        p.0
    }
}

/// Shorthand for literals in tests and examples. Panics on invalid input.
#[macro_export]
macro_rules! part {
    () => { $crate::partition::Partition::empty() };
    ($($x:expr),+ $(,)?) => {
        $crate::partition::Partition::new(vec![$($x),+]).expect("valid partition")
    };
}

/// All partitions of `k` with at most `m` parts, in strictly descending
/// lexicographic order.
pub fn enumerate(k: u32, m: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fill(k, k, m, &mut current, &mut out);
    out
}

fn fill(remaining: u32, max_part: u32, slots: usize, current: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if remaining == 0 {
        out.push(Partition(current.clone()));
        return;
    }
    if slots == 0 {
        return;
    }
    let top = remaining.min(max_part);
    // the remaining slots must be able to absorb what is left
    let bottom = remaining.div_ceil(slots as u32);
    for first in (bottom..=top).rev() {
        current.push(first);
        fill(remaining - first, first, slots - 1, current, out);
        current.pop();
    }
}

/// Lexicographic comparison of two partitions of the same weight.
///
/// Comparing partitions of different weight is a contract violation.
pub fn lex_compare(kappa: &Partition, mu: &Partition) -> Ordering {
    assert_eq!(
        kappa.weight(),
        mu.weight(),
        "lex_compare needs equal weights: {kappa} vs {mu}"
    );
    kappa.cmp(mu)
}

/// Exact upper hook product with `alpha = 2/beta`; convenience for callers
/// holding `beta`.
pub fn upper_hook_product(kappa: &Partition, alpha: &Rational) -> Rational {
    kappa.upper_hook_product(alpha)
}

/// Number of partitions of `k` into at most `m` parts, by the standard
/// recurrence p(k, m) = p(k, m - 1) + p(k - m, m).
pub fn count(k: u32, m: usize) -> u64 {
    let k = k as usize;
    let mut table = vec![vec![0u64; m + 1]; k + 1];
    for row in table.iter_mut().take(k + 1) {
        row[0] = 0;
    }
    for j in 0..=m {
        table[0][j] = 1;
    }
    for n in 1..=k {
        for j in 1..=m {
            table[n][j] = table[n][j - 1] + if n >= j { table[n - j][j] } else { 0 };
        }
    }
    table[k][m]
}
