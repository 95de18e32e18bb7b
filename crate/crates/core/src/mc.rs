//! Monte Carlo sampling of `l_n / l_1` for singular beta-Wishart matrices
//! `W = X X*`, `X` an `m x n` real (beta = 1) or complex (beta = 2)
//! Gaussian matrix.
//!
//! Each replication draws from its own ChaCha8 stream (`seed`, stream =
//! replication index), so results do not depend on thread scheduling.

use std::str::FromStr;

use nalgebra::{Complex, DMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::dist::SummaryStats;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Ratio,
    OneMinusRatio,
}

impl Statistic {
    fn apply(self, ratio: f64) -> f64 {
        match self {
            Statistic::Ratio => ratio,
            Statistic::OneMinusRatio => 1.0 - ratio,
        }
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ratio" => Ok(Statistic::Ratio),
            "one-minus-ratio" | "one_minus_ratio" => Ok(Statistic::OneMinusRatio),
            other => Err(Error::InvalidParams(format!("unknown statistic {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McConfig {
    pub m: u32,
    pub n: u32,
    pub beta: u32,
    pub reps: usize,
    pub seed: u64,
    pub statistic: Statistic,
}

impl McConfig {
    pub fn new(m: u32, n: u32, beta: u32, reps: usize, seed: u64, statistic: Statistic) -> Result<Self> {
        let cfg = McConfig {
            m,
            n,
            beta,
            reps,
            seed,
            statistic,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.beta != 1 && self.beta != 2 {
            return Err(Error::UnsupportedBeta(format!("{} (sampling supports 1 and 2)", self.beta)));
        }
        if self.n < 2 || self.m <= self.n {
            return Err(Error::InvalidParams(format!(
                "need m > n >= 2, got m = {}, n = {}",
                self.m, self.n
            )));
        }
        if self.reps == 0 {
            return Err(Error::InvalidParams("reps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct McSample {
    pub values: Vec<f64>,
    /// Replications redrawn because the eigen-solver failed or returned a
    /// degenerate spectrum.
    pub resampled: usize,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn draw_real(rng: &mut ChaCha8Rng, m: usize, n: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| scale * normal(rng))
}

fn draw_complex(rng: &mut ChaCha8Rng, m: usize, n: usize, scale: f64) -> DMatrix<Complex<f64>> {
    let s = scale * std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(m, n, |_, _| Complex::new(s * normal(rng), s * normal(rng)))
}

fn real_spectrum(x: &DMatrix<f64>) -> Option<Vec<f64>> {
    let gram = x.transpose() * x;
    let eig = nalgebra::SymmetricEigen::try_new(gram, f64::EPSILON, 1000)?;
    Some(eig.eigenvalues.iter().copied().collect())
}

fn complex_spectrum(x: &DMatrix<Complex<f64>>) -> Option<Vec<f64>> {
    let gram = x.adjoint() * x;
    let eig = nalgebra::SymmetricEigen::try_new(gram, f64::EPSILON, 1000)?;
    Some(eig.eigenvalues.iter().copied().collect())
}

fn extreme_ratio(spectrum: &[f64]) -> Option<f64> {
    let max = spectrum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = spectrum.iter().copied().fold(f64::INFINITY, f64::min);
    let r = min / max;
    (r > 0.0 && r < 1.0).then_some(r)
}

fn replicate(cfg: &McConfig, rep: usize, scale: f64) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep as u64);
    let (m, n) = (cfg.m as usize, cfg.n as usize);
    let mut failures = 0;
    loop {
        let spectrum = if cfg.beta == 1 {
            real_spectrum(&draw_real(&mut rng, m, n, scale))
        } else {
            complex_spectrum(&draw_complex(&mut rng, m, n, scale))
        };
        match spectrum.as_deref().and_then(extreme_ratio) {
            Some(r) => return (cfg.statistic.apply(r), failures),
            None => failures += 1,
        }
    }
}

fn sample_scaled(cfg: &McConfig, scale: f64) -> Result<McSample> {
    cfg.validate()?;
    let draws: Vec<(f64, usize)> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| replicate(cfg, rep, scale))
        .collect();
    let resampled = draws.iter().map(|d| d.1).sum();
    if resampled * 10_000 > cfg.reps {
        return Err(Error::EigenFailures {
            failures: resampled,
            reps: cfg.reps,
        });
    }
    Ok(McSample {
        values: draws.into_iter().map(|d| d.0).collect(),
        resampled,
    })
}

/// Draws `cfg.reps` values of the configured statistic.
pub fn sample_extreme_ratio(cfg: &McConfig) -> Result<McSample> {
    sample_scaled(cfg, 1.0)
}

/// Nearest-rank quantile: the `ceil(alpha N)`-th smallest sample (the
/// minimum for `alpha` near 0).
pub fn empirical_quantile(samples: &[f64], alpha: f64) -> Result<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted_quantile(&sorted, alpha)
}

pub fn sorted_quantile(sorted: &[f64], alpha: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "(0, 1)",
        });
    }
    let rank = (alpha * sorted.len() as f64).ceil() as usize;
    Ok(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Population moments; kurtosis is not excess-adjusted.
pub fn empirical_moments(samples: &[f64]) -> Result<SummaryStats> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if samples.len() < 4 {
        return Err(Error::InvalidParams("at least 4 samples are needed".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &s in samples {
        let d = s - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    if m2 <= (4.0 * f64::EPSILON * mean.abs()).powi(2) {
        return Err(Error::DegenerateVariance);
    }
    Ok(SummaryStats {
        mean,
        variance: m2,
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
    })
}

/// `sup_x |F_n(x) - F(x)|` for the empirical distribution of `samples`.
pub fn ks_distance<F>(samples: &[f64], cdf: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x)?;
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(beta: u32, reps: usize, seed: u64) -> McConfig {
        McConfig::new(6, 3, beta, reps, seed, Statistic::Ratio).unwrap()
    }

    #[test]
    fn quantile_conventions() {
        let s = [5.0, 1.0, 4.0, 2.0, 3.0];
        assert_eq!(empirical_quantile(&s, 0.5).unwrap(), 3.0);
        assert_eq!(empirical_quantile(&s, 1e-12).unwrap(), 1.0);
        assert_eq!(empirical_quantile(&s, 1.0).unwrap(), 5.0);
        assert!(matches!(empirical_quantile(&[], 0.5), Err(Error::EmptySample)));
    }

    #[test]
    fn moments_of_constant_fail() {
        assert!(matches!(empirical_moments(&[0.3; 10]), Err(Error::DegenerateVariance)));
        assert!(empirical_moments(&[0.1, 0.2]).is_err());
        let m = empirical_moments(&[0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!((m.mean, m.variance, m.skewness, m.kurtosis), (0.5, 0.25, 0.0, 1.0));
    }

    #[test]
    fn deterministic_and_in_range() {
        for beta in [1, 2] {
            let a = sample_extreme_ratio(&cfg(beta, 500, 7)).unwrap();
            let b = sample_extreme_ratio(&cfg(beta, 500, 7)).unwrap();
            assert_eq!(a.values, b.values);
            assert!(a.values.iter().all(|&v| v > 0.0 && v < 1.0));
            let c = sample_extreme_ratio(&cfg(beta, 500, 8)).unwrap();
            assert_ne!(a.values, c.values);
        }
    }

    #[test]
    fn prefix_stable_across_reps() {
        let short = sample_extreme_ratio(&cfg(1, 100, 3)).unwrap();
        let long = sample_extreme_ratio(&cfg(1, 300, 3)).unwrap();
        assert_eq!(short.values[..], long.values[..100]);
    }

    #[test]
    fn scale_invariance() {
        for beta in [1, 2] {
            let a = sample_scaled(&cfg(beta, 200, 11), 1.0).unwrap();
            let b = sample_scaled(&cfg(beta, 200, 11), 37.5).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    fn full_nonzero_real(x: &DMatrix<f64>) -> Vec<f64> {
        let eig = nalgebra::SymmetricEigen::new(x * x.transpose());
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v.truncate(x.ncols());
        v
    }

    fn full_nonzero_complex(x: &DMatrix<Complex<f64>>) -> Vec<f64> {
        let eig = nalgebra::SymmetricEigen::new(x * x.adjoint());
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v.truncate(x.ncols());
        v
    }

    #[test]
    fn gram_matches_full_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x = draw_real(&mut rng, 7, 3, 1.0);
            let mut gram = real_spectrum(&x).unwrap();
            gram.sort_by(|a, b| b.total_cmp(a));
            for (g, f) in gram.iter().zip(full_nonzero_real(&x)) {
                assert!((g - f).abs() <= 1e-10 * g.abs());
            }
            let z = draw_complex(&mut rng, 6, 2, 1.0);
            let mut gram = complex_spectrum(&z).unwrap();
            gram.sort_by(|a, b| b.total_cmp(a));
            for (g, f) in gram.iter().zip(full_nonzero_complex(&z)) {
                assert!((g - f).abs() <= 1e-10 * g.abs());
            }
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(McConfig::new(10, 3, 4, 10, 0, Statistic::Ratio).is_err());
        assert!(McConfig::new(3, 3, 1, 10, 0, Statistic::Ratio).is_err());
        assert!(McConfig::new(10, 3, 1, 0, 0, Statistic::Ratio).is_err());
        assert_eq!("one-minus-ratio".parse::<Statistic>().unwrap(), Statistic::OneMinusRatio);
    }

    #[test]
    fn ks_of_exact_uniform_grid() {
        let s: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_distance(&s, |x| Ok(x)).unwrap();
        assert!((d - 0.005).abs() < 1e-12);
    }
}
