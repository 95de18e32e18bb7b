//! Polynomials in the basis `E_kappa = e_1^{k1-k2} e_2^{k2-k3} ... e_m^{km}`
//! of products of elementary symmetric functions, and the Laplace-Beltrami
//! operator
//!
//! ```text
//! D = sum_i x_i^2 d^2/dx_i^2 + beta sum_{i != j} x_i^2 / (x_i - x_j) d/dx_i
//! ```
//!
//! expressed as a triangular matrix on that basis.
//!
//! The operator is applied in the monomial basis of `x_1..x_m` and the
//! (symmetric) image is rewritten in the E-basis by lex leading-term
//! elimination. All arithmetic is exact. Cost grows quickly with `m`;
//! everything here is meant for `m <= 4` (the distribution code uses
//! `m = n - 1 <= 3`).

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, LazyLock, RwLock};

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::rational::{binomial, int, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EPolynomial {
    m: usize,
    terms: BTreeMap<Partition, Rational>,
}

impl EPolynomial {
    pub fn zero(m: usize) -> Self {
        assert!(m >= 1, "need at least one variable");
        EPolynomial {
            m,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(m: usize) -> Self {
        Self::monomial(Partition::empty(), m).expect("empty partition fits")
    }

    /// The single basis element `E_kappa`.
    pub fn monomial(kappa: Partition, m: usize) -> Result<Self> {
        Self::term(kappa, Rational::one(), m)
    }

    pub fn term(kappa: Partition, coefficient: Rational, m: usize) -> Result<Self> {
        if kappa.len() > m {
            return Err(Error::TooManyParts {
                length: kappa.len(),
                partition: kappa,
                m,
            });
        }
        let mut p = Self::zero(m);
        p.add_term(kappa, coefficient);
        Ok(p)
    }

    pub fn from_terms<I>(m: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Partition, Rational)>,
    {
        let mut p = Self::zero(m);
        for (kappa, c) in terms {
            if kappa.len() > m {
                return Err(Error::TooManyParts {
                    length: kappa.len(),
                    partition: kappa,
                    m,
                });
            }
            p.add_term(kappa, c);
        }
        Ok(p)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> &BTreeMap<Partition, Rational> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Partition, Rational> {
        self.terms
    }

    pub fn coefficient(&self, kappa: &Partition) -> Rational {
        self.terms.get(kappa).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c * E_kappa`. Terms with more than `m` parts vanish identically
    /// and are dropped.
    pub fn add_term(&mut self, kappa: Partition, c: Rational) {
        if c.is_zero() || kappa.len() > self.m {
            return;
        }
        match self.terms.entry(kappa) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Lex-leading partition and its coefficient.
    pub fn leading(&self) -> Option<(&Partition, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.m);
        }
        EPolynomial {
            m: self.m,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &EPolynomial, c: &Rational) {
        assert_eq!(self.m, other.m, "mixed variable counts");
        for (k, v) in &other.terms {
            self.add_term(k.clone(), v * c);
        }
    }

    /// The common weight of all terms; errors when the terms disagree.
    /// The zero polynomial reports `None`.
    pub fn homogeneous_weight(&self) -> Result<Option<u32>> {
        let mut weights = self.terms.keys().map(Partition::weight);
        let Some(first) = weights.next() else {
            return Ok(None);
        };
        for w in weights {
            if w != first {
                return Err(Error::NotHomogeneous { first, second: w });
            }
        }
        Ok(Some(first))
    }

    /// Numeric value at the spectrum `x` (`x.len()` must equal `m`).
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.m, "expected {} values", self.m);
        let e = elementary_values(x);
        self.terms
            .iter()
            .map(|(kappa, c)| crate::rational::to_f64(c) * e_monomial_value(kappa, &e))
            .sum()
    }

    /// Exact value at `x = (1, ..., 1)`, where `e_i = C(m, i)`.
    pub fn evaluate_at_ones(&self) -> Rational {
        let e: Vec<Rational> = (0..=self.m)
            .map(|i| Rational::from_integer(binomial(self.m as u64, i as u64)))
            .collect();
        let mut total = Rational::zero();
        for (kappa, c) in &self.terms {
            let mut v = c.clone();
            for (i, exp) in e_exponents(kappa).into_iter().enumerate() {
                if exp > 0 {
                    v *= num_traits::pow(e[i + 1].clone(), exp as usize);
                }
            }
            total += v;
        }
        total
    }
}

impl Add for &EPolynomial {
    type Output = EPolynomial;
    fn add(self, rhs: &EPolynomial) -> EPolynomial {
        let mut out = self.clone();
        out.add_scaled(rhs, &Rational::one());
        out
    }
}

impl Sub for &EPolynomial {
    type Output = EPolynomial;
    fn sub(self, rhs: &EPolynomial) -> EPolynomial {
        let mut out = self.clone();
        out.add_scaled(rhs, &-Rational::one());
        out
    }
}

impl Neg for &EPolynomial {
    type Output = EPolynomial;
    fn neg(self) -> EPolynomial {
        self.scale(&-Rational::one())
    }
}

impl Mul for &EPolynomial {
    type Output = EPolynomial;
    fn mul(self, rhs: &EPolynomial) -> EPolynomial {
        e_poly_multiply(self, rhs)
    }
}

/// Exponents `(k1-k2, k2-k3, ..., km)` of `e_1 .. e_len` in `E_kappa`.
pub fn e_exponents(kappa: &Partition) -> Vec<u32> {
    let parts = kappa.parts();
    (0..parts.len())
        .map(|i| parts[i] - kappa.part(i + 1))
        .collect()
}

/// `E_mu * E_tau = E_{mu + tau}` (componentwise sum of parts).
pub fn e_monomial_product(mu: &Partition, tau: &Partition, m: usize) -> Partition {
    debug_assert!(mu.len() <= m && tau.len() <= m);
    mu.add(tau)
}

pub fn e_poly_multiply(f: &EPolynomial, g: &EPolynomial) -> EPolynomial {
    assert_eq!(f.m, g.m, "mixed variable counts");
    let mut out = EPolynomial::zero(f.m);
    for (a, ca) in &f.terms {
        for (b, cb) in &g.terms {
            out.add_term(e_monomial_product(a, b, f.m), ca * cb);
        }
    }
    out
}

/// `[e_0, e_1, ..., e_m]` of `x`, from the coefficients of prod (1 + t x_i).
pub fn elementary_values(x: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; x.len() + 1];
    e[0] = 1.0;
    for (count, &xi) in x.iter().enumerate() {
        for i in (1..=count + 1).rev() {
            e[i] += xi * e[i - 1];
        }
    }
    e
}

fn e_monomial_value(kappa: &Partition, e: &[f64]) -> f64 {
    e_exponents(kappa)
        .into_iter()
        .enumerate()
        .map(|(i, exp)| e[i + 1].powi(exp as i32))
        .product()
}

// ---------------------------------------------------------------------------
// Monomial basis internals.

type Exponent = Vec<u32>;
type MonoPoly = BTreeMap<Exponent, Rational>;

fn mono_add(p: &mut MonoPoly, key: Exponent, c: Rational) {
    if c.is_zero() {
        return;
    }
    match p.entry(key) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

fn mono_mul(a: &MonoPoly, b: &MonoPoly) -> MonoPoly {
    let mut out = MonoPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Exponent = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            mono_add(&mut out, e, ca * cb);
        }
    }
    out
}

fn elementary_mono(i: usize, m: usize) -> MonoPoly {
    let mut out = MonoPoly::new();
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize == i {
            let e = (0..m).map(|v| (mask >> v) & 1).collect();
            out.insert(e, Rational::one());
        }
    }
    out
}

static FULL_EXPANSIONS: LazyLock<RwLock<HashMap<(Partition, usize), Arc<MonoPoly>>>> =
    LazyLock::new(Default::default);

static PROJECTED_EXPANSIONS: LazyLock<
    RwLock<HashMap<(Partition, usize), Arc<BTreeMap<Partition, Rational>>>>,
> = LazyLock::new(Default::default);

/// `E_kappa` in the monomial basis of `m` variables.
fn full_expansion(kappa: &Partition, m: usize) -> Arc<MonoPoly> {
    let key = (kappa.clone(), m);
    if let Some(hit) = FULL_EXPANSIONS.read().unwrap().get(&key) {
        return hit.clone();
    }
    let mut acc = MonoPoly::new();
    acc.insert(vec![0; m], Rational::one());
    for (i, exp) in e_exponents(kappa).into_iter().enumerate() {
        if exp == 0 {
            continue;
        }
        let e = elementary_mono(i + 1, m);
        for _ in 0..exp {
            acc = mono_mul(&acc, &e);
        }
    }
    let value = Arc::new(acc);
    FULL_EXPANSIONS.write().unwrap().insert(key, value.clone());
    value
}

fn is_decreasing(e: &[u32]) -> bool {
    e.windows(2).all(|w| w[0] >= w[1])
}

/// Coefficients of the monomial symmetric functions in `E_kappa`.
fn projected_expansion(kappa: &Partition, m: usize) -> Arc<BTreeMap<Partition, Rational>> {
    let key = (kappa.clone(), m);
    if let Some(hit) = PROJECTED_EXPANSIONS.read().unwrap().get(&key) {
        return hit.clone();
    }
    let full = full_expansion(kappa, m);
    let proj: BTreeMap<Partition, Rational> = full
        .iter()
        .filter(|(e, _)| is_decreasing(e))
        .map(|(e, c)| (Partition::from_unsorted(e.clone()), c.clone()))
        .collect();
    let value = Arc::new(proj);
    PROJECTED_EXPANSIONS.write().unwrap().insert(key, value.clone());
    value
}

/// Rewrites a symmetric polynomial, given by its monomial-symmetric
/// coefficients, in the E-basis. The leading monomial of `E_lambda` is
/// `x^lambda` with coefficient one, so each step removes the lex-leading
/// partition.
fn symmetric_to_e(mut proj: BTreeMap<Partition, Rational>, m: usize) -> EPolynomial {
    let mut out = EPolynomial::zero(m);
    while let Some((lambda, c)) = proj.pop_last() {
        let expansion = projected_expansion(&lambda, m);
        for (mu, coef) in expansion.iter() {
            if mu == &lambda {
                continue;
            }
            let delta = -(coef * &c);
            match proj.entry(mu.clone()) {
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert(delta);
                }
                std::collections::btree_map::Entry::Occupied(mut o) => {
                    *o.get_mut() += delta;
                    if o.get().is_zero() {
                        o.remove();
                    }
                }
            }
        }
        out.add_term(lambda, c);
    }
    out
}

/// Exact quotient of `numerator` by `x_i - x_j` (`i < j`), or `None` when
/// the division leaves a remainder.
fn divide_by_difference(mut numerator: MonoPoly, i: usize, j: usize) -> Option<MonoPoly> {
    debug_assert!(i < j);
    let mut quotient = MonoPoly::new();
    // leading term of x_i - x_j in lex order is x_i
    while let Some((mut e, c)) = numerator.pop_last() {
        if e[i] == 0 {
            return None;
        }
        e[i] -= 1;
        let mut shifted = e.clone();
        shifted[j] += 1;
        mono_add(&mut quotient, e, c.clone());
        mono_add(&mut numerator, shifted, c);
    }
    Some(quotient)
}

fn apply_operator(f: &MonoPoly, beta: &Rational, m: usize) -> Option<MonoPoly> {
    let mut out = MonoPoly::new();
    for (e, c) in f {
        let diag: u64 = e.iter().map(|&a| a as u64 * (a as u64).saturating_sub(1)).sum();
        mono_add(&mut out, e.clone(), c * int(diag as i64));
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let mut numerator = MonoPoly::new();
            for (e, c) in f {
                if e[i] > 0 {
                    let mut up = e.clone();
                    up[i] += 1;
                    mono_add(&mut numerator, up, c * int(e[i] as i64));
                }
                if e[j] > 0 {
                    let mut up = e.clone();
                    up[j] += 1;
                    mono_add(&mut numerator, up, -(c * int(e[j] as i64)));
                }
            }
            let quotient = divide_by_difference(numerator, i, j)?;
            for (e, c) in quotient {
                mono_add(&mut out, e, c * beta);
            }
        }
    }
    Some(out)
}

/// Row `nu` of the operator matrix: `D E_nu = sum_mu b[nu, mu] E_mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct LbMatrixRow {
    pub source: Partition,
    pub beta: Rational,
    pub m: usize,
    pub entries: BTreeMap<Partition, Rational>,
}

impl LbMatrixRow {
    pub fn get(&self, mu: &Partition) -> Rational {
        self.entries.get(mu).cloned().unwrap_or_else(Rational::zero)
    }

    /// The diagonal entry `b[nu, nu]`, which is the eigenvalue `d(nu)`.
    pub fn diagonal(&self) -> Rational {
        self.get(&self.source)
    }
}

type RowKey = (Partition, Rational, usize);

static LB_ROWS: LazyLock<RwLock<HashMap<RowKey, Arc<LbMatrixRow>>>> =
    LazyLock::new(Default::default);

/// Applies the Laplace-Beltrami operator to `E_nu` in `m` variables.
///
/// Memoized on `(nu, beta, m)`; concurrent callers may compute the same row
/// twice, which is harmless because rows are deterministic.
pub fn lb_apply(nu: &Partition, beta: &Rational, m: usize) -> Result<Arc<LbMatrixRow>> {
    if nu.len() > m {
        return Err(Error::TooManyParts {
            partition: nu.clone(),
            length: nu.len(),
            m,
        });
    }
    if !beta.is_positive() {
        return Err(Error::NonPositive {
            name: "beta",
            value: crate::rational::format_rational(beta),
        });
    }
    let key = (nu.clone(), beta.clone(), m);
    if let Some(hit) = LB_ROWS.read().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let f = full_expansion(nu, m);
    let image = apply_operator(&f, beta, m).ok_or_else(|| Error::InexactDivision(nu.clone()))?;
    let mut proj = BTreeMap::new();
    for (e, c) in &image {
        let sorted = Partition::from_unsorted(e.clone());
        let mut sorted_exp = sorted.parts().to_vec();
        sorted_exp.resize(m, 0);
        if image.get(&sorted_exp) != Some(c) {
            return Err(Error::NotSymmetric(nu.clone()));
        }
        if is_decreasing(e) {
            proj.insert(sorted, c.clone());
        }
    }
    let entries = symmetric_to_e(proj, m).into_terms();
    let row = Arc::new(LbMatrixRow {
        source: nu.clone(),
        beta: beta.clone(),
        m,
        entries,
    });
    LB_ROWS.write().unwrap().insert(key, row.clone());
    Ok(row)
}

/// Applies the operator linearly to an E-polynomial.
pub fn lb_apply_poly(f: &EPolynomial, beta: &Rational) -> Result<EPolynomial> {
    let mut out = EPolynomial::zero(f.m());
    for (nu, c) in f.terms() {
        let row = lb_apply(nu, beta, f.m())?;
        for (mu, b) in &row.entries {
            out.add_term(mu.clone(), b * c);
        }
    }
    Ok(out)
}

/// Eigenvalue `d(kappa)` read off the operator's diagonal.
pub fn lb_eigenvalue(kappa: &Partition, beta: &Rational, m: usize) -> Result<Rational> {
    if kappa.is_empty() {
        return Ok(Rational::zero());
    }
    let d = lb_apply(kappa, beta, m)?.diagonal();
    debug_assert_eq!(d, lb_eigenvalue_closed_form(kappa, beta, m));
    Ok(d)
}

/// `sum_i kappa_i (kappa_i - 1 + beta (m - i))`.
pub fn lb_eigenvalue_closed_form(kappa: &Partition, beta: &Rational, m: usize) -> Rational {
    kappa
        .parts()
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let k = k as i64;
            int(k) * (int(k - 1) + beta * int(m as i64 - i as i64 - 1))
        })
        .fold(Rational::zero(), |a, b| a + b)
}

/// One move of the printed zonal (`beta = 1`) recurrences: the target shape
/// as a signed vector and its coefficient. Targets with a negative or
/// increasing entry are not partitions and carry `valid = false`.
#[derive(Clone, Debug, PartialEq)]
pub struct AppendixMove {
    pub target: Vec<i64>,
    pub coefficient: Rational,
    pub valid: bool,
}

/// Right-hand side of the printed recurrence for `m = 2, 3, 4` at the lower
/// partition `mu`, with every candidate move listed.
pub fn appendix_moves(mu: &Partition, m: usize) -> Result<Vec<AppendixMove>> {
    if !(2..=4).contains(&m) {
        return Err(Error::AppendixDimension(m));
    }
    if mu.len() > m {
        return Err(Error::TooManyParts {
            partition: mu.clone(),
            length: mu.len(),
            m,
        });
    }
    let p: Vec<i64> = mu.padded(m).into_iter().map(i64::from).collect();
    // gaps nu_i = mu_i - mu_{i+1}, one-based in the printed form
    let g: Vec<i64> = (0..m - 1).map(|i| p[i] - p[i + 1]).collect();
    let tri = |x: i64| (x + 2) * (x + 1);
    // (shift vector, coefficient)
    let mut raw: Vec<(Vec<i64>, i64)> = Vec::new();
    let unit = |plus: &[usize], minus: &[usize]| {
        let mut v = vec![0i64; m];
        for &i in plus {
            v[i] += 1;
        }
        for &i in minus {
            v[i] -= 1;
        }
        v
    };
    match m {
        2 => {
            raw.push((unit(&[0], &[1]), tri(g[0])));
        }
        3 => {
            raw.push((unit(&[0], &[1]), tri(g[0])));
            raw.push((unit(&[1], &[2]), tri(g[1])));
            raw.push((unit(&[0], &[2]), 3 * (g[0] + 1) * (g[1] + 1)));
        }
        _ => {
            raw.push((unit(&[0], &[1]), tri(g[0])));
            raw.push((unit(&[1], &[2]), tri(g[1])));
            raw.push((unit(&[2], &[3]), tri(g[2])));
            raw.push((unit(&[0, 1], &[2, 3]), 2 * tri(g[1])));
            raw.push((unit(&[0], &[2]), 3 * (g[0] + 1) * (g[1] + 1)));
            raw.push((unit(&[1], &[3]), 3 * (g[1] + 1) * (g[2] + 1)));
            raw.push((unit(&[0], &[3]), 4 * (g[0] + 1) * (g[2] + 1)));
        }
    }
    Ok(raw
        .into_iter()
        .map(|(shift, c)| {
            let target: Vec<i64> = p.iter().zip(&shift).map(|(a, b)| a + b).collect();
            let valid = target.iter().all(|&t| t >= 0) && target.windows(2).all(|w| w[0] >= w[1]);
            AppendixMove {
                target,
                coefficient: int(c),
                valid,
            }
        })
        .collect())
}

/// The valid moves of [`appendix_moves`] keyed by target partition.
pub fn lb_apply_appendix(mu: &Partition, m: usize) -> Result<BTreeMap<Partition, Rational>> {
    let mut out = BTreeMap::new();
    for mv in appendix_moves(mu, m)? {
        if mv.valid {
            let parts = mv.target.iter().map(|&t| t.to_u32().unwrap()).collect();
            let target = Partition::new(parts).expect("checked decreasing");
            *out.entry(target).or_insert_with(Rational::zero) += mv.coefficient;
        }
    }
    Ok(out)
}
