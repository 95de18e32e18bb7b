//! Null distribution of `x = 1 - l_n / l_1` for `W ~ W^beta_m(n, sigma^2 I)`
//! with `m > n` (singular case), evaluated from the truncated series
//!
//! ```text
//! F_K(x) = C sum_{k=0}^{K} sum_{kappa |- k} Gamma(mn beta/2 + k) / (n^k k!)
//!            sum_{t=0}^{t_max} x^{e0 + k + t} / t!
//!            sum_{tau |- t} sum_{delta |- k+t} g^delta_{kappa,tau} (a)_tau (b)_delta C_delta(I) / (c)_delta
//! ```
//!
//! with `e0 = (n-1)(n beta + 2)/2`, `a = (n-m-1) beta/2 + 1`,
//! `b = n beta/2 + 1`, `c = (n-1) beta + 2`, all partitions having at most
//! `n - 1` parts.
//!
//! Everything except `C Gamma(mn beta/2)` and `x^{e0}` is rational, so the
//! coefficient of each power of `x` is accumulated exactly. The finite
//! `t`-sum alternates with binomial-sized terms (`(a)_tau` with `a = -p`),
//! which is only safe in exact arithmetic.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::esym::EPolynomial;
use crate::jack::{e_monomial_to_jack, jack_at_identity, jack_in_e, jack_product};
use crate::partition::{enumerate, Partition};
use crate::rational::{factorial, int, is_nonnegative_integer, ln_abs_ratio, ratio, rising, signed_ln, Rational};
use crate::special::{
    gen_pochhammer, gen_pochhammer_exact, ln_gamma, log_multivariate_gamma, pi_exponent, PiExponent,
    SignedLogValue,
};

/// Relative size of the last k-block below which the series counts as
/// converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DistParams {
    pub m: u32,
    pub n: u32,
    pub beta: u32,
    /// Truncation order of the k-sum.
    pub k_max: u32,
    /// Upper limit of the t-sum; `None` means `p (n - 1)` when
    /// `p = beta (m - n + 1)/2 - 1` is a nonnegative integer.
    pub t_max: Option<u32>,
}

impl DistParams {
    pub fn new(m: u32, n: u32, beta: u32, k_max: u32) -> Result<Self> {
        let p = DistParams {
            m,
            n,
            beta,
            k_max,
            t_max: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// The truncation orders used for the published percentile tables:
    /// 25 for real and 40 for complex matrices.
    pub fn default_truncation(beta: u32) -> u32 {
        if beta == 1 {
            25
        } else {
            40
        }
    }

    pub fn with_t_max(mut self, t_max: u32) -> Self {
        self.t_max = Some(t_max);
        self
    }

    fn validate(&self) -> Result<()> {
        if ![1, 2, 4].contains(&self.beta) {
            return Err(Error::UnsupportedBeta(self.beta.to_string()));
        }
        if self.n < 2 || self.m <= self.n {
            return Err(Error::InvalidParams(format!(
                "need m > n >= 2, got m = {}, n = {}",
                self.m, self.n
            )));
        }
        Ok(())
    }

    pub fn beta_rational(&self) -> Rational {
        int(self.beta as i64)
    }

    /// `p = beta (m - n + 1)/2 - 1`.
    pub fn p(&self) -> Rational {
        ratio(self.beta as i64 * (self.m as i64 - self.n as i64 + 1), 2) - int(1)
    }

    pub fn resolved_t_max(&self) -> Result<u32> {
        resolve_t_max(self.t_max, &self.p(), self.n)
    }
}

fn resolve_t_max(t_max: Option<u32>, p: &Rational, n: u32) -> Result<u32> {
    if let Some(t) = t_max {
        return Ok(t);
    }
    if is_nonnegative_integer(p) {
        let p = p.to_integer().to_u32().ok_or_else(|| Error::InvalidParams("p too large".into()))?;
        Ok(p * (n - 1))
    } else {
        Err(Error::InvalidParams(format!(
            "p = {} is not a nonnegative integer; supply t_max explicitly",
            crate::rational::format_rational(p)
        )))
    }
}

/// The rational parameters shared by the singular-case density and its
/// real-case generalization.
#[derive(Clone, Debug)]
struct SeriesShape {
    /// number of Jack variables (`n - 1`)
    vars: usize,
    beta: Rational,
    /// Gamma argument base `mn beta / 2`
    gamma_base: Rational,
    /// divisor base of the k-sum (`n`)
    scale: u32,
    /// first-row parameter of the tau Pochhammer
    a_tau: Rational,
    b_delta: Rational,
    c_delta: Rational,
    /// exponent of x in the leading term of the CDF
    e0: Rational,
}

impl SeriesShape {
    fn new(m: u32, n: u32, beta: u32) -> Self {
        let (m, n, b) = (m as i64, n as i64, beta as i64);
        SeriesShape {
            vars: (n - 1) as usize,
            beta: int(b),
            gamma_base: ratio(m * n * b, 2),
            scale: n as u32,
            a_tau: ratio((n - m - 1) * b, 2) + int(1),
            b_delta: ratio(n * b, 2) + int(1),
            c_delta: int((n - 1) * b + 2),
            e0: ratio((n - 1) * (n * b + 2), 2),
        }
    }
}

/// `ln C` of the singular-case density.
pub fn leading_constant(p: &DistParams) -> Result<SignedLogValue> {
    p.validate()?;
    let beta = p.beta_rational();
    let b = p.beta as f64;
    let (m, n) = (p.m as f64, p.n as f64);
    let nv = p.n as usize;
    let r = crate::rational::to_f64(&pi_exponent(PiExponent::R, p.beta, p.n)?);
    let numerator = log_multivariate_gamma(&beta, nv - 1, n * b / 2.0 + 1.0)?
        * log_multivariate_gamma(&beta, nv - 1, (n - 2.0) * b / 2.0 + 1.0)?
        * SignedLogValue::new(1, r * std::f64::consts::PI.ln());
    let (lg, sg) = ln_gamma(n * b / 2.0);
    let denominator = log_multivariate_gamma(&beta, nv - 1, (n - 1.0) * b + 2.0)?
        * SignedLogValue::new(1, m * n * b / 2.0 * n.ln())
        * SignedLogValue::new(sg, lg)
        * log_multivariate_gamma(&beta, nv, m * b / 2.0)?;
    Ok(numerator / denominator)
}

/// `ln C_2` of the real-case density for arbitrary `n1 = min(n, m)`,
/// `n2 = max(n, m)`.
pub fn leading_constant_general_beta1(n1: u32, n2: u32) -> Result<SignedLogValue> {
    if n1 < 2 || n2 < n1 {
        return Err(Error::InvalidParams(format!("need n2 >= n1 >= 2, got {n1}, {n2}")));
    }
    let one = int(1);
    let (a, b) = (n1 as f64, n2 as f64);
    let k = n1 as usize;
    let numerator = SignedLogValue::new(1, a / 2.0 * std::f64::consts::PI.ln())
        * log_multivariate_gamma(&one, k - 1, (a + 2.0) / 2.0)?
        * log_multivariate_gamma(&one, k - 1, a / 2.0)?;
    let (lg, sg) = ln_gamma(a / 2.0);
    let denominator = log_multivariate_gamma(&one, k - 1, a + 1.0)?
        * SignedLogValue::new(1, a * b / 2.0 * a.ln())
        * SignedLogValue::new(sg, lg)
        * log_multivariate_gamma(&one, k, b / 2.0)?;
    Ok(numerator / denominator)
}

/// One `(k, kappa, t, tau, delta)` contribution, without the overall
/// constant and the power of `x`.
#[derive(Clone, Debug, Serialize)]
pub struct TermRecord {
    pub k: u32,
    pub kappa: Partition,
    pub t: u32,
    pub tau: Partition,
    pub delta: Partition,
    #[serde(serialize_with = "ser_rational")]
    pub g: Rational,
    /// `Gamma(c0 + k) / (Gamma(c0) n^k k! t!)`
    pub prefactor: SignedLogValue,
    /// `(a)_tau`
    pub poch_tau: SignedLogValue,
    /// `(b)_delta / (c)_delta`
    pub poch_delta: SignedLogValue,
    #[serde(serialize_with = "ser_rational")]
    pub jack_identity: Rational,
    pub term: SignedLogValue,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::rational::format_rational(r))
}

impl TermRecord {
    pub fn recombine(&self) -> SignedLogValue {
        self.prefactor
            * SignedLogValue::from_rational(&self.g)
            * self.poch_tau
            * self.poch_delta
            * SignedLogValue::from_rational(&self.jack_identity)
    }
}

/// `sum_j N_j x^j / D` with integer numerators, evaluated exactly at the
/// binary value of `x`.
#[derive(Clone, Debug)]
struct ExactPoly {
    numerators: Vec<BigInt>,
    denominator: BigInt,
}

impl ExactPoly {
    fn new(coefficients: &[Rational]) -> Self {
        let denominator = coefficients
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let numerators = coefficients
            .iter()
            .map(|c| c.numer() * (&denominator / c.denom()))
            .collect();
        ExactPoly {
            numerators,
            denominator,
        }
    }

    fn eval(&self, x: f64) -> SignedLogValue {
        let Some(last) = self.numerators.len().checked_sub(1) else {
            return SignedLogValue::ZERO;
        };
        let xr = Rational::from_float(x).expect("finite x");
        let (u, v) = (xr.numer().clone(), xr.denom().clone());
        let mut acc = self.numerators[last].clone();
        let mut vpow = BigInt::one();
        for j in (0..last).rev() {
            vpow *= &v;
            acc = acc * &u + &self.numerators[j] * &vpow;
        }
        if acc.is_zero() {
            return SignedLogValue::ZERO;
        }
        let sign = if acc.is_negative() { -1 } else { 1 };
        let shift = v.bits() as i64 - 1;
        debug_assert_eq!(v, BigInt::one() << shift as usize);
        SignedLogValue::new(sign, ln_abs_ratio(&acc, &self.denominator, -(last as i64) * shift))
    }
}

/// Precomputed coefficients of the truncated series for one parameter set.
///
/// Building the ledger is the expensive step; every evaluation afterwards
/// (CDF, density, moments, quantile bisection) reuses it.
#[derive(Clone, Debug)]
pub struct SeriesLedger {
    m: u32,
    n: u32,
    beta: u32,
    k_max: u32,
    t_max: u32,
    shape: SeriesShape,
    /// `ln (C Gamma(mn beta/2))`
    log_scale: SignedLogValue,
    /// `blocks[k][t]`: exact coefficient of `x^{e0 + k + t}` in the CDF,
    /// without the overall constant.
    blocks: Vec<Vec<Rational>>,
    records: Option<Vec<TermRecord>>,
    cdf_poly: ExactPoly,
    pdf_poly: ExactPoly,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LedgerOptions {
    /// Keep one record per `(k, kappa, t, tau, delta)`, computing every
    /// `g^delta_{kappa,tau}` explicitly.
    pub keep_records: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub k_max: u32,
    pub t_max: u32,
    /// `|block_K| / |sum_k block_k|` at `x = 1`.
    pub last_term: f64,
    pub converged: bool,
    /// Truncated total mass `F_K(1)`.
    pub mass: f64,
}

impl SeriesLedger {
    pub fn build(p: &DistParams) -> Result<Self> {
        Self::build_with(p, LedgerOptions::default())
    }

    pub fn build_with(p: &DistParams, options: LedgerOptions) -> Result<Self> {
        p.validate()?;
        let t_max = p.resolved_t_max()?;
        let shape = SeriesShape::new(p.m, p.n, p.beta);
        let log_scale = leading_constant(p)? * log_gamma_positive(&shape.gamma_base);
        Self::assemble(p.m, p.n, p.beta, p.k_max, t_max, shape, log_scale, options)
    }

    /// Real-case series in `n1 = min(n, m)`, `n2 = max(n, m)` with its own
    /// leading constant; valid for nonsingular matrices too.
    pub fn build_general_beta1(n1: u32, n2: u32, k_max: u32, t_max: Option<u32>) -> Result<Self> {
        if n1 < 2 || n2 < n1 {
            return Err(Error::InvalidParams(format!("need n2 >= n1 >= 2, got {n1}, {n2}")));
        }
        let shape = SeriesShape::new(n2, n1, 1);
        let p = ratio(n2 as i64 - n1 as i64 + 1, 2) - int(1);
        let t_max = resolve_t_max(t_max, &p, n1)?;
        let log_scale = leading_constant_general_beta1(n1, n2)? * log_gamma_positive(&shape.gamma_base);
        Self::assemble(n2, n1, 1, k_max, t_max, shape, log_scale, LedgerOptions::default())
    }

    /// Grows K one block at a time until the last block is below
    /// `tolerance` relative to the running mass (and at least `min_k`).
    pub fn build_converged(m: u32, n: u32, beta: u32, min_k: u32, tolerance: f64, limit: u32) -> Result<Self> {
        let p = DistParams::new(m, n, beta, min_k)?;
        let t_max = p.resolved_t_max()?;
        let shape = SeriesShape::new(m, n, beta);
        let log_scale = leading_constant(&p)? * log_gamma_positive(&shape.gamma_base);
        let mut weights = HashMap::new();
        let mut blocks = Vec::new();
        let mut total = Rational::zero();
        let mut k = 0;
        loop {
            let (block, _) = compute_block(&shape, k, t_max, &mut weights, false)?;
            let block_sum: Rational = block.iter().fold(Rational::zero(), |a, b| a + b);
            total += &block_sum;
            blocks.push(block);
            let rel = relative(&block_sum, &total);
            if k >= min_k && rel < tolerance {
                break;
            }
            if k >= limit {
                return Err(Error::TruncationInsufficient { last_term: rel });
            }
            k += 1;
        }
        Ok(Self::from_blocks(m, n, beta, k, t_max, shape, log_scale, blocks, None))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        m: u32,
        n: u32,
        beta: u32,
        k_max: u32,
        t_max: u32,
        shape: SeriesShape,
        log_scale: SignedLogValue,
        options: LedgerOptions,
    ) -> Result<Self> {
        let mut weights = HashMap::new();
        // warm the per-delta weights serially so the parallel phase only reads
        for j in 0..=(k_max + t_max) {
            for delta in enumerate(j, shape.vars) {
                delta_weight(&shape, &delta, &mut weights)?;
            }
        }
        let built: Vec<(Vec<Rational>, Vec<TermRecord>)> = (0..=k_max)
            .into_par_iter()
            .map(|k| {
                let mut local = weights.clone();
                compute_block(&shape, k, t_max, &mut local, options.keep_records)
            })
            .collect::<Result<_>>()?;
        let mut blocks = Vec::with_capacity(built.len());
        let mut records = options.keep_records.then(Vec::new);
        for (block, recs) in built {
            blocks.push(block);
            if let Some(all) = records.as_mut() {
                all.extend(recs);
            }
        }
        Ok(Self::from_blocks(m, n, beta, k_max, t_max, shape, log_scale, blocks, records))
    }

    #[allow(clippy::too_many_arguments)]
    fn from_blocks(
        m: u32,
        n: u32,
        beta: u32,
        k_max: u32,
        t_max: u32,
        shape: SeriesShape,
        log_scale: SignedLogValue,
        blocks: Vec<Vec<Rational>>,
        records: Option<Vec<TermRecord>>,
    ) -> Self {
        let degree = (k_max + t_max) as usize;
        let mut cdf = vec![Rational::zero(); degree + 1];
        for (k, block) in blocks.iter().enumerate() {
            for (t, c) in block.iter().enumerate() {
                cdf[k + t] += c;
            }
        }
        let pdf: Vec<Rational> = cdf
            .iter()
            .enumerate()
            .map(|(j, c)| c * (&shape.e0 + int(j as i64)))
            .collect();
        SeriesLedger {
            m,
            n,
            beta,
            k_max,
            t_max,
            log_scale,
            cdf_poly: ExactPoly::new(&cdf),
            pdf_poly: ExactPoly::new(&pdf),
            shape,
            blocks,
            records,
        }
    }

    pub fn params(&self) -> (u32, u32, u32) {
        (self.m, self.n, self.beta)
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub fn t_max(&self) -> u32 {
        self.t_max
    }

    pub fn records(&self) -> Option<&[TermRecord]> {
        self.records.as_deref()
    }

    /// `ln (C Gamma(mn beta/2))`.
    pub fn log_scale(&self) -> SignedLogValue {
        self.log_scale
    }

    /// Exact coefficient of `x^{e0 + k + t}` (before the overall constant).
    pub fn block(&self, k: u32) -> &[Rational] {
        &self.blocks[k as usize]
    }

    pub fn diagnostics(&self) -> Diagnostics {
        let sums: Vec<Rational> = self
            .blocks
            .iter()
            .map(|b| b.iter().fold(Rational::zero(), |a, c| a + c))
            .collect();
        let total = sums.iter().fold(Rational::zero(), |a, b| a + b);
        let last_term = relative(sums.last().unwrap(), &total);
        let mass = (self.log_scale * SignedLogValue::from_rational(&total)).to_f64();
        Diagnostics {
            k_max: self.k_max,
            t_max: self.t_max,
            last_term,
            converged: last_term < CONVERGENCE_TOLERANCE,
            mass,
        }
    }

    /// A human-readable note when the k-sum has not converged.
    pub fn truncation_warning(&self) -> Option<String> {
        let d = self.diagnostics();
        (!d.converged).then(|| {
            format!(
                "truncated series not converged at K = {}: last k-block is {:.3e} of the mass (F_K(1) = {:.6})",
                d.k_max, d.last_term, d.mass
            )
        })
    }

    /// Truncated distribution function `F_K(x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        if x == 0.0 {
            return Ok(0.0);
        }
        let power = SignedLogValue::new(1, crate::rational::to_f64(&self.shape.e0) * x.ln());
        Ok((self.log_scale * power * self.cdf_poly.eval(x)).to_f64())
    }

    /// Density, the termwise derivative of [`cdf`](Self::cdf).
    pub fn pdf(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        if x == 0.0 {
            return Ok(0.0);
        }
        let power = SignedLogValue::new(1, (crate::rational::to_f64(&self.shape.e0) - 1.0) * x.ln());
        Ok((self.log_scale * power * self.pdf_poly.eval(x)).to_f64())
    }

    /// `E[x^h]`; `h = 0` is the truncated total mass.
    pub fn moment(&self, h: u32) -> f64 {
        let mut total = Rational::zero();
        for (k, block) in self.blocks.iter().enumerate() {
            for (t, c) in block.iter().enumerate() {
                let e = &self.shape.e0 + int((k + t) as i64);
                total += c * &e / (&e + int(h as i64));
            }
        }
        (self.log_scale * SignedLogValue::from_rational(&total)).to_f64()
    }

    /// Mean, variance, skewness and (non-excess) kurtosis of `x`.
    pub fn summary_stats(&self) -> Result<SummaryStats> {
        let d = self.diagnostics();
        if !d.converged {
            return Err(Error::TruncationInsufficient { last_term: d.last_term });
        }
        let raw: Vec<f64> = (1..=4).map(|h| self.moment(h)).collect();
        Ok(SummaryStats::from_raw_moments(raw[0], raw[1], raw[2], raw[3]))
    }

    /// Smallest `x` with `F_K(x) = alpha`, by bisection to `|F - alpha| <= 1e-8`.
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: alpha,
                range: "(0, 1)",
            });
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let (mut f_lo, mut f_hi) = (0.0, self.cdf(1.0)?);
        if f_hi < alpha {
            return Err(Error::QuantileUnreachable { alpha, mass: f_hi });
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let f_mid = self.cdf(mid)?;
            if f_mid < f_lo - 1e-12 || f_mid > f_hi + 1e-12 {
                return Err(Error::NonMonotone { x: mid });
            }
            if (f_mid - alpha).abs() <= 1e-8 || hi - lo < 1e-15 {
                return Ok(mid);
            }
            if f_mid < alpha {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
                f_hi = f_mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "x",
            value: x,
            range: "[0, 1]",
        })
    }
}

fn relative(part: &Rational, total: &Rational) -> f64 {
    if part.is_zero() {
        return 0.0;
    }
    if total.is_zero() {
        return f64::INFINITY;
    }
    let (_, a) = signed_ln(part);
    let (_, b) = signed_ln(total);
    (a - b).exp()
}

fn log_gamma_positive(x: &Rational) -> SignedLogValue {
    let (lg, sign) = ln_gamma(crate::rational::to_f64(x));
    SignedLogValue::new(sign, lg)
}

/// `(b)_delta C_delta(I) / (c)_delta`, memoized per ledger.
fn delta_weight(
    shape: &SeriesShape,
    delta: &Partition,
    cache: &mut HashMap<Partition, Rational>,
) -> Result<Rational> {
    if let Some(w) = cache.get(delta) {
        return Ok(w.clone());
    }
    let w = gen_pochhammer_exact(&shape.b_delta, delta, &shape.beta)
        * jack_at_identity(delta, &shape.beta, shape.vars)?
        / gen_pochhammer_exact(&shape.c_delta, delta, &shape.beta);
    cache.insert(delta.clone(), w.clone());
    Ok(w)
}

/// `sum_delta g^delta_{kappa,tau} w(delta)` without forming the `g`s: the
/// reduction to Jack polynomials is linear, so each E-monomial of
/// `C_kappa C_tau` is weighted by the weight of its own reduction.
fn contracted_product(
    shape: &SeriesShape,
    product: &EPolynomial,
    monomial_weights: &mut HashMap<Partition, Rational>,
    weights: &mut HashMap<Partition, Rational>,
) -> Result<Rational> {
    let mut total = Rational::zero();
    for (nu, c) in product.terms() {
        let w = match monomial_weights.get(nu) {
            Some(w) => w.clone(),
            None => {
                let mut w = Rational::zero();
                for (delta, a) in e_monomial_to_jack(nu, &shape.beta, shape.vars)?.iter() {
                    w += a * delta_weight(shape, delta, weights)?;
                }
                monomial_weights.insert(nu.clone(), w.clone());
                w
            }
        };
        total += c * w;
    }
    Ok(total)
}

fn compute_block(
    shape: &SeriesShape,
    k: u32,
    t_max: u32,
    weights: &mut HashMap<Partition, Rational>,
    keep_records: bool,
) -> Result<(Vec<Rational>, Vec<TermRecord>)> {
    let beta = &shape.beta;
    let vars = shape.vars;
    let k_factor = rising(&shape.gamma_base, k)
        / (Rational::from_integer(num_traits::pow(BigInt::from(shape.scale), k as usize))
            * Rational::from_integer(factorial(k)));
    let kappas = enumerate(k, vars);
    let taus: Vec<(u32, Partition, Rational)> = (0..=t_max)
        .flat_map(|t| enumerate(t, vars).into_iter().map(move |tau| (t, tau)))
        .filter_map(|(t, tau)| {
            let poch = gen_pochhammer_exact(&shape.a_tau, &tau, beta);
            (!poch.is_zero()).then_some((t, tau, poch))
        })
        .collect();

    let mut block = vec![Rational::zero(); t_max as usize + 1];
    let mut records = Vec::new();
    let mut monomial_weights = HashMap::new();
    for kappa in &kappas {
        let left = jack_in_e(kappa, beta, vars)?;
        for (t, tau, poch) in &taus {
            let inner = if keep_records {
                let g = jack_product(kappa, tau, beta, vars)?;
                let mut inner = Rational::zero();
                let prefactor = SignedLogValue::from_rational(
                    &(&k_factor / Rational::from_integer(factorial(*t))),
                );
                for (delta, gc) in g.terms() {
                    let w = delta_weight(shape, delta, weights)?;
                    inner += gc * &w;
                    let jack_identity = jack_at_identity(delta, beta, vars)?;
                    let poch_tau = gen_pochhammer(crate::rational::to_f64(&shape.a_tau), tau, beta);
                    let poch_delta = gen_pochhammer(crate::rational::to_f64(&shape.b_delta), delta, beta)
                        / gen_pochhammer(crate::rational::to_f64(&shape.c_delta), delta, beta);
                    let mut record = TermRecord {
                        k,
                        kappa: kappa.clone(),
                        t: *t,
                        tau: tau.clone(),
                        delta: delta.clone(),
                        g: gc.clone(),
                        prefactor,
                        poch_tau,
                        poch_delta,
                        jack_identity,
                        term: SignedLogValue::ZERO,
                    };
                    record.term = SignedLogValue::from_rational(
                        &(&k_factor / Rational::from_integer(factorial(*t)) * gc * poch * &w),
                    );
                    records.push(record);
                }
                inner
            } else {
                let right = jack_in_e(tau, beta, vars)?;
                contracted_product(shape, &(&*left * &*right), &mut monomial_weights, weights)?
            };
            block[*t as usize] += poch * inner;
        }
    }
    for (t, c) in block.iter_mut().enumerate() {
        *c = &*c * &k_factor / Rational::from_integer(factorial(t as u32));
    }
    Ok((block, records))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

impl SummaryStats {
    pub fn from_raw_moments(m1: f64, m2: f64, m3: f64, m4: f64) -> Self {
        let variance = m2 - m1 * m1;
        let mu3 = m3 - 3.0 * m1 * m2 + 2.0 * m1.powi(3);
        let mu4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4);
        SummaryStats {
            mean: m1,
            variance,
            skewness: mu3 / variance.powf(1.5),
            kurtosis: mu4 / (variance * variance),
        }
    }
}

/// Builds the ledger and evaluates `F_K(x)`.
pub fn cdf_truncated(p: &DistParams, x: f64) -> Result<f64> {
    check_unit(x)?;
    SeriesLedger::build(p)?.cdf(x)
}

pub fn pdf(p: &DistParams, x: f64) -> Result<f64> {
    check_unit(x)?;
    SeriesLedger::build(p)?.pdf(x)
}

pub fn moment(p: &DistParams, h: u32) -> Result<f64> {
    Ok(SeriesLedger::build(p)?.moment(h))
}

pub fn summary_stats(p: &DistParams) -> Result<SummaryStats> {
    SeriesLedger::build(p)?.summary_stats()
}

pub fn quantile(p: &DistParams, alpha: f64) -> Result<f64> {
    SeriesLedger::build(p)?.quantile(alpha)
}

/// Real-case density for `n1 = min(n, m)`, `n2 = max(n, m)`.
pub fn pdf_general_beta1(n1: u32, n2: u32, k_max: u32, t_max: Option<u32>, x: f64) -> Result<f64> {
    check_unit(x)?;
    SeriesLedger::build_general_beta1(n1, n2, k_max, t_max)?.pdf(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        assert!(matches!(DistParams::new(10, 3, 3, 5), Err(Error::UnsupportedBeta(_))));
        assert!(DistParams::new(3, 3, 1, 5).is_err());
        assert!(DistParams::new(5, 1, 1, 5).is_err());
        // p = (10 - 4 + 1)/2 - 1 = 5/2 is not an integer
        let p = DistParams::new(10, 4, 1, 5).unwrap();
        assert!(p.resolved_t_max().is_err());
        assert_eq!(p.clone().with_t_max(3).resolved_t_max().unwrap(), 3);
        assert_eq!(DistParams::new(10, 3, 1, 25).unwrap().resolved_t_max().unwrap(), 6);
        assert_eq!(DistParams::new(10, 3, 2, 40).unwrap().resolved_t_max().unwrap(), 14);
    }

    #[test]
    fn closed_form_two_by_five() {
        // n = 2, m = 5, beta = 1: f(x) = x (1 - x) / (1 - x/2)^5, F_inf(1) = 1
        let ledger = SeriesLedger::build_converged(5, 2, 1, 10, 1e-14, 400).unwrap();
        for x in [0.1, 0.5, 0.9] {
            let exact = x * (1.0 - x) / (1.0 - x / 2.0f64).powi(5);
            assert!((ledger.pdf(x).unwrap() - exact).abs() < 1e-12 * exact);
        }
        assert!((ledger.moment(0) - 1.0).abs() < 1e-12);
        let c = leading_constant(&DistParams::new(5, 2, 1, 0).unwrap()).unwrap();
        assert!((c.to_f64() - 1.0 / 48.0).abs() < 1e-15);
    }

    #[test]
    fn boundaries() {
        let ledger = SeriesLedger::build(&DistParams::new(5, 2, 1, 20).unwrap()).unwrap();
        assert_eq!(ledger.cdf(0.0).unwrap(), 0.0);
        assert!(ledger.cdf(-0.1).is_err());
        assert!(ledger.cdf(1.1).is_err());
        assert!(ledger.quantile(0.0).is_err());
        assert!(ledger.quantile(1.0).is_err());
    }

    #[test]
    fn summary_moment_inequality() {
        let s = SummaryStats::from_raw_moments(0.5, 0.3, 0.2, 0.15);
        assert!(s.kurtosis > s.skewness * s.skewness + 1.0);
    }
}
