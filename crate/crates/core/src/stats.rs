//! Welch's unequal-variance t statistic.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("each group needs at least two samples")]
    TooFewSamples,
    #[error("both groups have zero variance; t is undefined")]
    ZeroVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchResult {
    pub t: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub dof: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    /// Sample standard deviations (n - 1 denominator).
    pub sd_a: f64,
    pub sd_b: f64,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

pub fn welch_t(a: &[f64], b: &[f64]) -> Result<WelchResult, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::TooFewSamples);
    }
    let (mean_a, var_a) = mean_var(a);
    let (mean_b, var_b) = mean_var(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ua, ub) = (var_a / na, var_b / nb);
    if ua + ub == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let t = (mean_a - mean_b) / libm::sqrt(ua + ub);
    let dof = (ua + ub) * (ua + ub) / (ua * ua / (na - 1.0) + ub * ub / (nb - 1.0));
    Ok(WelchResult { t, dof, mean_a, mean_b, sd_a: libm::sqrt(var_a), sd_b: libm::sqrt(var_b) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_example() {
        let r = welch_t(&[1.0, 2.0, 3.0, 4.0], &[2.0, 3.0, 4.0, 5.0]).unwrap();
        // means 2.5 / 3.5, variances 5/3 each: t = -1 / sqrt(5/6)
        assert!((r.t - (-1.0954451150103321)).abs() < 1e-12);
        assert!((r.dof - 6.0).abs() < 1e-12);
        assert_eq!((r.mean_a, r.mean_b), (2.5, 3.5));
    }

    #[test]
    fn identical_groups_give_zero() {
        let g = [1.0, 4.0, 2.0, 8.0];
        assert_eq!(welch_t(&g, &g).unwrap().t, 0.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(welch_t(&[1.0], &[1.0, 2.0]), Err(StatsError::TooFewSamples));
        assert_eq!(welch_t(&[3.0, 3.0], &[1.0, 1.0]), Err(StatsError::ZeroVariance));
        // One constant group is fine.
        assert!(welch_t(&[3.0, 3.0], &[1.0, 2.0]).is_ok());
    }
}
