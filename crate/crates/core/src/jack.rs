//! Jack polynomials `C^beta_kappa` in the E-basis, reduction of E-polynomials
//! to Jack expansions, and linearization of Jack products.
//!
//! Normalization is the "C" one: `sum_{kappa |- k} C_kappa = (tr X)^k`,
//! with leading coefficient `q[kappa, kappa] = (2/beta)^k k! / prod h*`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, LazyLock, RwLock};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::esym::{lb_apply, lb_apply_appendix, lb_eigenvalue, EPolynomial};
use crate::partition::{enumerate, Partition};
use crate::rational::{factorial, format_rational, int, Rational};

/// A linear combination `sum_delta c_delta C^beta_delta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JackExpansion {
    beta: Rational,
    m: usize,
    terms: BTreeMap<Partition, Rational>,
}

impl JackExpansion {
    pub fn zero(beta: Rational, m: usize) -> Self {
        JackExpansion {
            beta,
            m,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms<I>(beta: Rational, m: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Partition, Rational)>,
    {
        let mut out = Self::zero(beta, m);
        for (kappa, c) in terms {
            if kappa.len() > m {
                return Err(Error::TooManyParts {
                    length: kappa.len(),
                    partition: kappa,
                    m,
                });
            }
            out.add_term(kappa, c);
        }
        Ok(out)
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> &BTreeMap<Partition, Rational> {
        &self.terms
    }

    pub fn coefficient(&self, kappa: &Partition) -> Rational {
        self.terms.get(kappa).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, kappa: Partition, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(kappa).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    /// Expands every Jack polynomial back into the E-basis.
    pub fn to_e_polynomial(&self) -> Result<EPolynomial> {
        let mut out = EPolynomial::zero(self.m);
        for (kappa, c) in &self.terms {
            out.add_scaled(&*jack_in_e(kappa, &self.beta, self.m)?, c);
        }
        Ok(out)
    }

    /// `{ "2,1": "28/75", ... }` with exact rational strings.
    pub fn to_json_map(&self) -> serde_json::Map<String, serde_json::Value> {
        self.terms
            .iter()
            .map(|(k, v)| (k.to_csv(), serde_json::Value::String(format_rational(v))))
            .collect()
    }
}

type TableKey = (Partition, Rational, usize);

static JACK_TABLES: LazyLock<RwLock<HashMap<TableKey, Arc<EPolynomial>>>> =
    LazyLock::new(Default::default);

static E_TO_JACK: LazyLock<RwLock<HashMap<TableKey, Arc<BTreeMap<Partition, Rational>>>>> =
    LazyLock::new(Default::default);

static AT_IDENTITY: LazyLock<RwLock<HashMap<TableKey, Rational>>> = LazyLock::new(Default::default);

fn check_inputs(kappa: &Partition, beta: &Rational, m: usize) -> Result<()> {
    if !beta.is_positive() {
        return Err(Error::NonPositive {
            name: "beta",
            value: format_rational(beta),
        });
    }
    if m == 0 {
        return Err(Error::InvalidParams("need at least one variable".into()));
    }
    if kappa.len() > m {
        return Err(Error::TooManyParts {
            partition: kappa.clone(),
            length: kappa.len(),
            m,
        });
    }
    Ok(())
}

/// `q[kappa, kappa] = (2/beta)^k k! / prod_{cells} h*(i, j)` with `alpha = 2/beta`.
pub fn leading_coefficient(kappa: &Partition, beta: &Rational) -> Rational {
    let alpha = int(2) / beta;
    let k = kappa.weight();
    let numerator = num_traits::pow(alpha.clone(), k as usize) * Rational::from_integer(factorial(k));
    numerator / kappa.upper_hook_product(&alpha)
}

/// `C^beta_kappa = sum_{mu <= kappa} q[kappa, mu] E_mu`, memoized.
///
/// Coefficients below the leading one follow from the eigen-equation:
/// `q[kappa, mu] (d(kappa) - d(mu)) = sum_{mu < nu <= kappa} b[nu, mu] q[kappa, nu]`.
/// A vanishing `d(kappa) - d(mu)` is an error only when the right-hand side
/// is nonzero.
pub fn jack_in_e(kappa: &Partition, beta: &Rational, m: usize) -> Result<Arc<EPolynomial>> {
    check_inputs(kappa, beta, m)?;
    let key = (kappa.clone(), beta.clone(), m);
    if let Some(hit) = JACK_TABLES.read().unwrap().get(&key) {
        return Ok(hit.clone());
    }

    let q_top = leading_coefficient(kappa, beta);
    let top_row = lb_apply(kappa, beta, m)?;
    let d_top = top_row.diagonal();

    let mut poly = EPolynomial::zero(m);
    poly.add_term(kappa.clone(), q_top.clone());
    // pending[mu] = sum over finished nu of b[nu, mu] q[kappa, nu]
    let mut pending: BTreeMap<Partition, Rational> = BTreeMap::new();
    push_row(&mut pending, &top_row.entries, kappa, &q_top);

    for mu in enumerate(kappa.weight(), m).into_iter().filter(|mu| mu < kappa) {
        // Partitions that are lex-smaller but not dominated by kappa never
        // receive a contribution, and may share kappa's eigenvalue.
        let Some(sum) = pending.remove(&mu) else {
            continue;
        };
        let row = lb_apply(&mu, beta, m)?;
        let gap = &d_top - row.diagonal();
        if gap.is_zero() {
            return Err(Error::DegenerateEigenvalue {
                kappa: kappa.clone(),
                mu,
                value: format_rational(&d_top),
            });
        }
        let q = sum / gap;
        push_row(&mut pending, &row.entries, &mu, &q);
        poly.add_term(mu, q);
    }

    let value = Arc::new(poly);
    JACK_TABLES.write().unwrap().insert(key, value.clone());
    Ok(value)
}

fn push_row(
    pending: &mut BTreeMap<Partition, Rational>,
    entries: &BTreeMap<Partition, Rational>,
    source: &Partition,
    q: &Rational,
) {
    for (target, b) in entries {
        if target == source {
            continue;
        }
        let slot = pending.entry(target.clone()).or_insert_with(Rational::zero);
        *slot += b * q;
    }
}

/// The same expansion driven by the printed zonal recurrences for
/// `m = 2, 3, 4`:
/// `(beta/2) (d(mu) - d(kappa)) q[kappa, mu] = sum_moves c q[kappa, mu']`.
/// Only meaningful at `beta = 1`; kept as an independent cross-check.
pub fn jack_in_e_appendix(kappa: &Partition, beta: &Rational, m: usize) -> Result<EPolynomial> {
    check_inputs(kappa, beta, m)?;
    let d_top = lb_eigenvalue(kappa, beta, m)?;
    let mut q: BTreeMap<Partition, Rational> = BTreeMap::new();
    q.insert(kappa.clone(), leading_coefficient(kappa, beta));
    for mu in enumerate(kappa.weight(), m).into_iter().filter(|mu| mu < kappa) {
        let mut rhs = Rational::zero();
        for (target, c) in lb_apply_appendix(&mu, m)? {
            if let Some(v) = q.get(&target) {
                rhs += c * v;
            }
        }
        if rhs.is_zero() {
            continue;
        }
        let lhs = beta / int(2) * (lb_eigenvalue(&mu, beta, m)? - &d_top);
        if lhs.is_zero() {
            return Err(Error::DegenerateEigenvalue {
                kappa: kappa.clone(),
                mu,
                value: format_rational(&d_top),
            });
        }
        q.insert(mu, rhs / lhs);
    }
    EPolynomial::from_terms(m, q)
}

/// Reduces `f` to Jack polynomials by repeatedly cancelling the lex-leading
/// E-term against `C_kappa` scaled by `LC(f) / q[kappa, kappa]`.
pub fn reduce_to_jack(f: &EPolynomial, beta: &Rational) -> Result<JackExpansion> {
    f.homogeneous_weight()?;
    let m = f.m();
    let mut residual = f.clone();
    let mut out = JackExpansion::zero(beta.clone(), m);
    while let Some((kappa, lc)) = residual.leading() {
        let kappa = kappa.clone();
        let jack = jack_in_e(&kappa, beta, m)?;
        let factor = lc / jack.coefficient(&kappa);
        residual.add_scaled(&jack, &-factor.clone());
        debug_assert!(residual.coefficient(&kappa).is_zero());
        out.add_term(kappa, factor);
    }
    Ok(out)
}

/// `E_nu` as a Jack expansion, memoized per `(nu, beta, m)`.
pub fn e_monomial_to_jack(
    nu: &Partition,
    beta: &Rational,
    m: usize,
) -> Result<Arc<BTreeMap<Partition, Rational>>> {
    check_inputs(nu, beta, m)?;
    let key = (nu.clone(), beta.clone(), m);
    if let Some(hit) = E_TO_JACK.read().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let reduced = reduce_to_jack(&EPolynomial::monomial(nu.clone(), m)?, beta)?;
    let value = Arc::new(reduced.terms);
    E_TO_JACK.write().unwrap().insert(key, value.clone());
    Ok(value)
}

/// Jack expansion of a homogeneous E-polynomial, assembled term by term from
/// the memoized reductions of single `E_nu`.
pub fn e_to_jack(f: &EPolynomial, beta: &Rational) -> Result<JackExpansion> {
    f.homogeneous_weight()?;
    let mut acc: BTreeMap<Partition, Rational> = BTreeMap::new();
    for (nu, c) in f.terms() {
        for (delta, a) in e_monomial_to_jack(nu, beta, f.m())?.iter() {
            *acc.entry(delta.clone()).or_insert_with(Rational::zero) += a * c;
        }
    }
    acc.retain(|_, v| !v.is_zero());
    Ok(JackExpansion {
        beta: beta.clone(),
        m: f.m(),
        terms: acc,
    })
}

/// Linearization `C_kappa C_tau = sum_delta g^delta_{kappa,tau} C_delta`.
pub fn jack_product(kappa: &Partition, tau: &Partition, beta: &Rational, m: usize) -> Result<JackExpansion> {
    check_inputs(kappa, beta, m)?;
    check_inputs(tau, beta, m)?;
    let left = jack_in_e(kappa, beta, m)?;
    let right = jack_in_e(tau, beta, m)?;
    e_to_jack(&(&*left * &*right), beta)
}

/// Numeric value of `C^beta_kappa` at the spectrum `x`.
pub fn jack_evaluate(kappa: &Partition, beta: &Rational, x: &[f64]) -> Result<f64> {
    Ok(jack_in_e(kappa, beta, x.len())?.evaluate(x))
}

/// Exact `C^beta_kappa(I_m)`, memoized.
pub fn jack_at_identity(kappa: &Partition, beta: &Rational, m: usize) -> Result<Rational> {
    let key = (kappa.clone(), beta.clone(), m);
    if let Some(hit) = AT_IDENTITY.read().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let value = jack_in_e(kappa, beta, m)?.evaluate_at_ones();
    AT_IDENTITY.write().unwrap().insert(key, value.clone());
    Ok(value)
}

/// All memoized Jack tables, sorted by key.
pub fn cached_tables() -> Vec<(Partition, Rational, usize, Arc<EPolynomial>)> {
    let guard = JACK_TABLES.read().unwrap();
    let mut out: Vec<_> = guard
        .iter()
        .map(|((k, b, m), v)| (k.clone(), b.clone(), *m, v.clone()))
        .collect();
    out.sort_by(|a, b| (a.2, &a.1, &a.0).cmp(&(b.2, &b.1, &b.0)));
    out
}

/// Seeds the table cache. The caller is responsible for having validated the
/// expansion (see `snapshot`).
pub(crate) fn insert_table(kappa: Partition, beta: Rational, m: usize, table: EPolynomial) {
    JACK_TABLES
        .write()
        .unwrap()
        .entry((kappa, beta, m))
        .or_insert_with(|| Arc::new(table));
}

/// One, as a Jack expansion of the empty partition.
pub fn unit(beta: Rational, m: usize) -> JackExpansion {
    let mut out = JackExpansion::zero(beta, m);
    out.add_term(Partition::empty(), Rational::one());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::esym::lb_apply_poly;
    use crate::part;
    use crate::rational::ratio;

    fn expansion(pairs: &[(Partition, Rational)], m: usize) -> EPolynomial {
        EPolynomial::from_terms(m, pairs.iter().cloned()).unwrap()
    }

    #[test]
    fn low_degree_tables() {
        for (beta, m) in [(int(1), 1), (int(2), 3), (ratio(3, 7), 4)] {
            assert_eq!(*jack_in_e(&part![1], &beta, m).unwrap(), expansion(&[(part![1], int(1))], m));
        }
        assert_eq!(
            *jack_in_e(&part![2], &int(1), 2).unwrap(),
            expansion(&[(part![2], int(1)), (part![1, 1], ratio(-4, 3))], 2)
        );
        // E_(2) = C_(2) + C_(1,1) fixes the second coefficient at 4/3
        assert_eq!(
            *jack_in_e(&part![1, 1], &int(1), 2).unwrap(),
            expansion(&[(part![1, 1], ratio(4, 3))], 2)
        );
        assert_eq!(
            *jack_in_e(&part![2, 1], &int(1), 2).unwrap(),
            expansion(&[(part![2, 1], ratio(12, 5))], 2)
        );
        assert_eq!(*jack_in_e(&Partition::empty(), &int(1), 2).unwrap(), EPolynomial::one(2));
    }

    #[test]
    fn leading_coefficients_match_tables() {
        for beta in [int(1), int(2), ratio(1, 2)] {
            for k in 1..=6 {
                for kappa in enumerate(k, 3) {
                    let table = jack_in_e(&kappa, &beta, 3).unwrap();
                    assert_eq!(table.leading().unwrap().0, &kappa);
                    assert_eq!(table.coefficient(&kappa), leading_coefficient(&kappa, &beta));
                }
            }
        }
    }

    #[test]
    fn algorithm_one_example() {
        let f = EPolynomial::monomial(part![2, 1, 1], 4).unwrap();
        let r = reduce_to_jack(&f, &int(1)).unwrap();
        assert_eq!(
            r.terms().clone(),
            BTreeMap::from([(part![2, 1, 1], ratio(3, 16)), (part![1, 1, 1, 1], ratio(1, 2))])
        );
        assert_eq!(e_to_jack(&f, &int(1)).unwrap(), r);
    }

    #[test]
    fn power_of_trace() {
        for beta in [int(1), int(2), ratio(3, 7)] {
            let r = e_to_jack(&EPolynomial::monomial(part![5], 3).unwrap(), &beta).unwrap();
            assert_eq!(r.terms().len(), enumerate(5, 3).len());
            assert!(r.terms().values().all(|c| c.is_one()));
        }
        let r = e_to_jack(&EPolynomial::monomial(part![1], 2).unwrap(), &int(2)).unwrap();
        assert_eq!(r.terms().clone(), BTreeMap::from([(part![1], int(1))]));
    }

    #[test]
    fn non_homogeneous_rejected() {
        let f = expansion(&[(part![2], int(1)), (part![1], int(1))], 2);
        assert!(matches!(e_to_jack(&f, &int(1)), Err(Error::NotHomogeneous { .. })));
        assert!(matches!(reduce_to_jack(&f, &int(1)), Err(Error::NotHomogeneous { .. })));
    }

    #[test]
    fn worked_products() {
        let g = jack_product(&part![2, 1], &part![2], &int(1), 2).unwrap();
        assert_eq!(
            g.terms().clone(),
            BTreeMap::from([(part![3, 2], ratio(28, 75)), (part![4, 1], ratio(27, 50))])
        );
        for m in 2..=3 {
            let g = jack_product(&part![5], &part![1], &int(1), m).unwrap();
            assert_eq!(
                g.terms().clone(),
                BTreeMap::from([(part![6], int(1)), (part![5, 1], ratio(5, 27))])
            );
        }
        let g = jack_product(&Partition::empty(), &part![3, 1], &int(2), 2).unwrap();
        assert_eq!(g.terms().clone(), BTreeMap::from([(part![3, 1], int(1))]));
    }

    #[test]
    fn evaluations() {
        assert!((jack_evaluate(&part![1], &int(1), &[1.0, 2.0]).unwrap() - 3.0).abs() < 1e-15);
        assert!((jack_evaluate(&part![2], &int(1), &[1.0, 1.0]).unwrap() - 8.0 / 3.0).abs() < 1e-14);
        assert_eq!(jack_at_identity(&part![2], &int(1), 2).unwrap(), ratio(8, 3));
        for m in 1..=4 {
            assert_eq!(jack_at_identity(&part![1], &ratio(1, 2), m).unwrap(), int(m as i64));
            let total: Rational = enumerate(4, m)
                .iter()
                .map(|k| jack_at_identity(k, &int(2), m).unwrap())
                .fold(Rational::zero(), |a, b| a + b);
            assert_eq!(total, int((m as i64).pow(4)));
        }
        let x = [0.3, 1.7];
        for beta in [int(1), int(4)] {
            let s: f64 = enumerate(3, 2).iter().map(|k| jack_evaluate(k, &beta, &x).unwrap()).sum();
            assert!((s - 2.0f64.powi(3)).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenfunction_small() {
        let beta = ratio(3, 7);
        for kappa in enumerate(4, 3) {
            let c = jack_in_e(&kappa, &beta, 3).unwrap();
            let image = lb_apply_poly(&c, &beta).unwrap();
            assert_eq!(image, c.scale(&lb_eigenvalue(&kappa, &beta, 3).unwrap()));
        }
    }

    #[test]
    fn appendix_matches_operator_at_beta_one() {
        for m in 2..=4 {
            for k in 1..=5 {
                for kappa in enumerate(k, m) {
                    assert_eq!(
                        jack_in_e_appendix(&kappa, &int(1), m).unwrap(),
                        *jack_in_e(&kappa, &int(1), m).unwrap(),
                        "{kappa} m={m}"
                    );
                }
            }
        }
    }

    #[test]
    fn bad_arguments() {
        assert!(jack_in_e(&part![1, 1, 1], &int(1), 2).is_err());
        assert!(jack_in_e(&part![1], &int(-1), 2).is_err());
        assert!(jack_in_e(&part![1], &int(0), 2).is_err());
    }
}
