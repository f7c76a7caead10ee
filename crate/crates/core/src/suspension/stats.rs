use std::collections::BTreeSet;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{count, sample, trial_seed, PoissonSample, SuspensionError};
use crate::cfspace::{act, boolean, correlation, measure, refine, BoolOp, CompactOpen, MeasureValue, SpaceError};
use crate::groups::GroupElement;
use crate::scheme::CFScheme;

/// Acceptance thresholds for the statistical checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    /// Chi-square goodness-of-fit passes when the p-value is at least this.
    pub significance: f64,
    /// Pairwise correlations must stay below `rho_factor / √trials`.
    pub rho_factor: f64,
    /// Monte-Carlo estimates must lie within this many standard errors.
    pub bracket_sigma: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { significance: 0.01, rho_factor: 4.0, bracket_sigma: 3.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockFit {
    pub mu: String,
    pub mean: f64,
    pub variance: f64,
    pub chi2: f64,
    pub df: u64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairCorrelation {
    pub i: usize,
    pub j: usize,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoarsenStats {
    pub trials: u64,
    pub blocks: Vec<BlockFit>,
    pub correlations: Vec<PairCorrelation>,
    pub rho_threshold: f64,
    pub significance: f64,
    pub pass: bool,
}

/// Fits the summed counts of each block to Poisson(μ(block)) and measures
/// pairwise correlation between blocks, over `trials` seeded samples of
/// `region` at level `m`.
pub fn coarsen_check(
    s: &CFScheme,
    region: &CompactOpen,
    m: usize,
    partition: &[CompactOpen],
    trials: u64,
    seed: u64,
    th: &Thresholds,
) -> Result<CoarsenStats, SuspensionError> {
    if trials == 0 {
        return Err(SuspensionError::Precondition("trials must be positive".into()));
    }
    let deepest = partition.iter().map(|b| b.level()).max().unwrap_or(m).max(m);
    let fine: Vec<BTreeSet<GroupElement>> =
        partition.iter().map(|b| Ok(refine(s, b, deepest)?.names().to_explicit())).collect::<Result<_, SpaceError>>()?;
    for i in 0..fine.len() {
        for j in i + 1..fine.len() {
            if !fine[i].is_disjoint(&fine[j]) {
                return Err(SuspensionError::Partition(i, j));
            }
        }
    }
    let per_trial = |i: u64| -> Result<Vec<u64>, SuspensionError> {
        let x = sample(s, region, m, trial_seed(seed, i))?;
        let x = if deepest > m { super::refine_sample(s, &x, deepest)? } else { x };
        fine.iter()
            .map(|names| {
                let mut total = 0;
                for name in names {
                    if !x.region().contains(name) {
                        return Err(SuspensionError::Coverage { name: name.clone(), level: deepest });
                    }
                    total += x.counts().get(name).copied().unwrap_or(0);
                }
                Ok(total)
            })
            .collect()
    };
    let rows: Vec<Vec<u64>> = (0..trials).into_par_iter().map(per_trial).collect::<Result<_, _>>()?;
    let blocks = partition
        .iter()
        .enumerate()
        .map(|(b, block)| {
            let mu = measure(s, block);
            let column: Vec<u64> = rows.iter().map(|r| r[b]).collect();
            fit(&column, mu.to_f64().unwrap_or(0.0), mu.to_string())
        })
        .collect::<Vec<_>>();
    let mut correlations = Vec::new();
    for i in 0..partition.len() {
        for j in i + 1..partition.len() {
            let x: Vec<f64> = rows.iter().map(|r| r[i] as f64).collect();
            let y: Vec<f64> = rows.iter().map(|r| r[j] as f64).collect();
            correlations.push(PairCorrelation { i, j, rho: pearson(&x, &y) });
        }
    }
    let rho_threshold = th.rho_factor / (trials as f64).sqrt();
    let pass = blocks.iter().all(|b| b.p_value >= th.significance)
        && correlations.iter().all(|c| c.rho.abs() < rho_threshold);
    Ok(CoarsenStats { trials, blocks, correlations, rho_threshold, significance: th.significance, pass })
}

fn fit(column: &[u64], lambda: f64, mu: String) -> BlockFit {
    let n = column.len() as f64;
    let mean = column.iter().sum::<u64>() as f64 / n;
    let variance = if column.len() > 1 {
        column.iter().map(|&k| (k as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let bins = pooled_bins(lambda, n);
    let mut observed = vec![0u64; bins.len()];
    for &k in column {
        let idx = bins.iter().rposition(|(lo, _)| k >= *lo).unwrap_or(0);
        observed[idx] += 1;
    }
    let chi2: f64 = bins.iter().zip(&observed).map(|((_, e), &o)| (o as f64 - e).powi(2) / e).sum();
    let df = bins.len() as u64 - 1;
    let p_value = if df == 0 { 1.0 } else { ChiSquared::new(df as f64).expect("positive df").sf(chi2) };
    BlockFit { mu, mean, variance, chi2, df, p_value }
}

/// Bins `[lo, next lo)` of the Poisson(λ) law, the last one open, pooled
/// so every bin expects at least 5 of `n` observations.
fn pooled_bins(lambda: f64, n: f64) -> Vec<(u64, f64)> {
    let mut bins = Vec::new();
    let (mut lo, mut acc, mut cdf) = (0u64, 0.0, 0.0);
    let mut p = (-lambda).exp();
    let mut k = 0u64;
    loop {
        acc += p;
        cdf += p;
        let tail = (1.0 - cdf).max(0.0);
        if n * tail < 5.0 {
            break;
        }
        if n * acc >= 5.0 {
            bins.push((lo, n * acc));
            lo = k + 1;
            acc = 0.0;
        }
        k += 1;
        p *= lambda / k as f64;
    }
    let last = n * (1.0 - cdf + acc).max(0.0);
    match bins.last_mut() {
        Some(b) if last < 5.0 => b.1 += last,
        _ => bins.push((lo, last)),
    }
    bins
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// `Cov(N_A ∘ T*_g, N_B) = μ(T_g A ∩ B)` for the Poisson suspension.
pub fn exact_covariance(
    s: &CFScheme,
    g: &GroupElement,
    a: &CompactOpen,
    b: &CompactOpen,
    budget: usize,
) -> Result<MeasureValue, SuspensionError> {
    Ok(correlation(s, g, a, b, budget)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McCovariance {
    pub estimate: f64,
    pub stderr: f64,
}

impl McCovariance {
    /// Whether `value` lies within `sigma` standard errors of the estimate.
    pub fn brackets(&self, value: f64, sigma: f64) -> bool {
        (self.estimate - value).abs() <= sigma * self.stderr
    }
}

/// Monte-Carlo estimate of `Cov(N_A ∘ T*_g, N_B)`.
///
/// With `T*_g x = x ∘ T_g` the first factor counts the points of `x` in
/// `T_g A`, which is the count of `A` in the sample moved by `g⁻¹`.
pub fn mc_covariance(
    s: &CFScheme,
    g: &GroupElement,
    a: &CompactOpen,
    b: &CompactOpen,
    trials: u64,
    seed: u64,
    budget: usize,
) -> Result<McCovariance, SuspensionError> {
    if trials == 0 {
        return Err(SuspensionError::Precondition("trials must be positive".into()));
    }
    let moved = act(s, g, a, budget)?;
    if !moved.residual.is_empty() {
        return Err(SpaceError::Undefined { g: g.clone(), budget }.into());
    }
    let ga = moved.image;
    let region = boolean(s, BoolOp::Union, &ga, b)?;
    let level = region.level();
    let (mu_a, mu_b) = (measure(s, a).to_f64().unwrap_or(0.0), measure(s, b).to_f64().unwrap_or(0.0));
    let products: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let x: PoissonSample = sample(s, &region, level, trial_seed(seed, i))?;
            let na = count(s, &x, &ga)? as f64;
            let nb = count(s, &x, b)? as f64;
            Ok((na - mu_a) * (nb - mu_b))
        })
        .collect::<Result<_, SuspensionError>>()?;
    let n = trials as f64;
    let estimate = products.iter().sum::<f64>() / n;
    let stderr = if trials > 1 {
        (products.iter().map(|p| (p - estimate).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(McCovariance { estimate, stderr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::fixtures::s1;

    fn z(x: i64) -> GroupElement {
        GroupElement::lattice([x])
    }

    #[test]
    fn bins_expect_five() {
        for &(lambda, n) in &[(0.5, 10_000.0), (0.25, 200.0), (3.0, 1000.0), (0.01, 100.0)] {
            let bins = pooled_bins(lambda, n);
            let total: f64 = bins.iter().map(|b| b.1).sum();
            assert!((total - n).abs() < 1e-6 * n);
            if bins.len() > 1 {
                assert!(bins.iter().all(|b| b.1 >= 5.0), "{bins:?}");
            }
        }
    }

    #[test]
    fn exact_covariance_examples() {
        let s = s1();
        let a = CompactOpen::cylinder(&s, 1, z(0)).unwrap();
        let half = MeasureValue::new(1.into(), 2.into());
        assert_eq!(exact_covariance(&s, &z(0), &a, &a, 2).unwrap(), half);
        assert_eq!(exact_covariance(&s, &z(3), &a, &a, 2).unwrap(), MeasureValue::from_integer(0.into()));
    }

    #[test]
    fn zero_trials_rejected() {
        let s = s1();
        let a = CompactOpen::cylinder(&s, 1, z(0)).unwrap();
        assert!(matches!(mc_covariance(&s, &z(0), &a, &a, 0, 1, 2), Err(SuspensionError::Precondition(_))));
        assert!(matches!(
            coarsen_check(&s, &a, 1, std::slice::from_ref(&a), 0, 1, &Thresholds::default()),
            Err(SuspensionError::Precondition(_))
        ));
    }

    #[test]
    fn overlapping_blocks_rejected() {
        let s = s1();
        let a = CompactOpen::cylinder(&s, 1, z(0)).unwrap();
        let c = CompactOpen::cylinder(&s, 2, z(30)).unwrap();
        let x = CompactOpen::level_set(&s, 2).unwrap();
        assert!(matches!(
            coarsen_check(&s, &x, 2, &[a, c], 10, 1, &Thresholds::default()),
            Err(SuspensionError::Partition(0, 1))
        ));
    }
}
