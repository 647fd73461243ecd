//! Pearson correlation with analytic and permutation p-values.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::util::derive_seed;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StatsError {
    #[error("inputs differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("input is constant")]
    ConstantInput,
    #[error("non-finite input value")]
    NonFinite,
    #[error("correlation {0} is outside [-1, 1]")]
    InvalidR(f64),
    #[error("permutation test needs at least 1000 iterations, got {0}")]
    TooFewIterations(usize),
}

fn check_inputs(x: &[f64], y: &[f64]) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewSamples(x.len()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

fn centered(v: &[f64]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|a| a - mean).collect()
}

/// Product-moment correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_inputs(x, y)?;
    let xc = centered(x);
    let yc = centered(y);
    let sxx: f64 = xc.iter().map(|a| a * a).sum();
    let syy: f64 = yc.iter().map(|b| b * b).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    let sxy: f64 = xc.iter().zip(&yc).map(|(a, b)| a * b).sum();
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Two-tailed p-value; `degenerate` marks |r| = 1, where p is reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValue {
    pub p: f64,
    pub degenerate: bool,
}

/// t statistic for correlation `r` over `n` samples.
pub fn t_statistic(r: f64, n: usize) -> f64 {
    r * ((n as f64 - 2.0) / (1.0 - r * r)).sqrt()
}

/// Two-tailed p-value of `r` under Student's t with `n - 2` degrees of
/// freedom: `I_{df/(df+t^2)}(df/2, 1/2)`.
pub fn p_value(r: f64, n: usize) -> Result<PValue, StatsError> {
    if n < 3 {
        return Err(StatsError::TooFewSamples(n));
    }
    if !r.is_finite() || r.abs() > 1.0 {
        return Err(StatsError::InvalidR(r));
    }
    if r.abs() == 1.0 {
        return Ok(PValue {
            p: 0.0,
            degenerate: true,
        });
    }
    let df = (n - 2) as f64;
    // df / (df + t^2) simplifies to 1 - r^2
    let x = 1.0 - r * r;
    let p = statrs::function::beta::beta_reg(df / 2.0, 0.5, x);
    Ok(PValue {
        p: p.clamp(0.0, 1.0),
        degenerate: false,
    })
}

/// Shuffles per parallel batch; fixed so results do not depend on the
/// thread count.
const PERMUTATION_BATCH: usize = 1000;

/// Permutation p-value: the add-one-smoothed fraction of shuffles of `y`
/// whose |r| reaches the observed |r|.
pub fn permutation_p(
    x: &[f64],
    y: &[f64],
    iterations: usize,
    seed: u64,
) -> Result<f64, StatsError> {
    if iterations < 1000 {
        return Err(StatsError::TooFewIterations(iterations));
    }
    let observed = pearson(x, y)?.abs();
    let xc = centered(x);
    let yc = centered(y);
    let norm =
        xc.iter().map(|a| a * a).sum::<f64>().sqrt() * yc.iter().map(|b| b * b).sum::<f64>().sqrt();
    let threshold = observed - 1e-12;

    let n_batches = iterations.div_ceil(PERMUTATION_BATCH);
    let hits: usize = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let len = PERMUTATION_BATCH.min(iterations - b * PERMUTATION_BATCH);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, b as u64));
            let mut perm = yc.clone();
            let mut count = 0;
            for _ in 0..len {
                perm.shuffle(&mut rng);
                let sxy: f64 = xc.iter().zip(&perm).map(|(a, b)| a * b).sum();
                if (sxy / norm).abs() >= threshold {
                    count += 1;
                }
            }
            count
        })
        .sum();
    Ok((hits as f64 + 1.0) / (iterations as f64 + 1.0))
}

/// Significance marker: `***` for p < 0.001, `**` for p < 0.01, else empty.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else {
        ""
    }
}

/// `r` to three decimals followed by its significance stars.
pub fn format_correlation(r: f64, p: f64) -> String {
    format!("{}{}", crate::util::format_fixed(r, 3), stars(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_linearity() {
        let x = [1.0, 4.0, 2.0, 8.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &y).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn hand_evaluated() {
        let r = pearson(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
    }

    #[test]
    fn input_errors() {
        assert_eq!(
            pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]).unwrap_err(),
            StatsError::LengthMismatch(3, 2)
        );
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]).unwrap_err(),
            StatsError::TooFewSamples(2)
        );
        assert_eq!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap_err(),
            StatsError::ConstantInput
        );
        assert_eq!(
            pearson(&[1.0, 2.0, 3.0], &[f64::NAN, 2.0, 3.0]).unwrap_err(),
            StatsError::NonFinite
        );
    }

    #[test]
    fn p_of_zero_r_is_one() {
        for n in [3, 10, 500] {
            assert!((p_value(0.0, n).unwrap().p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn p_reference_value() {
        assert!((t_statistic(0.5, 12) - 1.8257).abs() < 1e-4);
        let p = p_value(0.5, 12).unwrap();
        assert!((p.p - 0.0979).abs() < 5e-4, "{}", p.p);
        assert!(!p.degenerate);
    }

    #[test]
    fn degenerate_r() {
        let p = p_value(-1.0, 10).unwrap();
        assert_eq!(p.p, 0.0);
        assert!(p.degenerate);
        assert!(p_value(1.5, 10).is_err());
        assert!(p_value(0.5, 2).is_err());
    }

    #[test]
    fn permutation_extremes() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let p = permutation_p(&x, &x, 10_000, 1).unwrap();
        assert!(p <= 0.001);
        // orthogonal to a linear trend: r = 0
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = [1.0, -1.0, -1.0, -1.0, -1.0, 1.0];
        assert!(pearson(&x, &y).unwrap().abs() < 1e-12);
        let p = permutation_p(&x, &y, 2000, 1).unwrap();
        assert!(p > 0.99);
        assert!(permutation_p(&x, &y, 999, 1).is_err());
    }

    #[test]
    fn permutation_is_seeded() {
        let x = [1.0, 3.0, 2.0, 5.0, 4.0, 7.0, 6.0];
        let y = [2.0, 1.0, 4.0, 3.0, 6.0, 5.0, 9.0];
        let a = permutation_p(&x, &y, 3500, 9).unwrap();
        let b = permutation_p(&x, &y, 3500, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn star_thresholds() {
        assert_eq!(stars(0.0005), "***");
        assert_eq!(stars(0.001), "**");
        assert_eq!(stars(0.005), "**");
        assert_eq!(stars(0.01), "");
        assert_eq!(stars(0.5), "");
        assert_eq!(format_correlation(-0.097, 0.005), "-0.097**");
        assert_eq!(format_correlation(-0.173, 0.0001), "-0.173***");
        assert_eq!(format_correlation(0.002, 0.9), "0.002");
    }
}
