//! Wilson score intervals, the two-proportion z-test, and the small
//! pieces of normal-distribution machinery they need.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("n must be >= 1")]
    EmptySample,
    #[error("k must not exceed n (k={k}, n={n})")]
    KExceedsN { k: usize, n: usize },
    #[error("pooled proportion is degenerate (0 or 1); standard error undefined")]
    DegeneratePool,
    #[error("confidence must lie strictly between 0 and 1")]
    BadConfidence,
}

/// Standard normal CDF via the Abramowitz & Stegun 26.2.17 rational
/// approximation; absolute error below 1e-7, plenty for 3-decimal
/// p-values.
pub fn normal_cdf(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - normal_cdf(-x);
    }
    let t = 1.0 / (1.0 + 0.2316419 * x);
    let poly = t
        * (0.319381530
            + t * (-0.356563782 + t * (1.781477937 + t * (-1.821255978 + t * 1.330274429))));
    let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    1.0 - pdf * poly
}

/// Inverse standard normal CDF (Acklam's rational approximation).
pub fn normal_quantile(p: f64) -> Result<f64, StatsError> {
    if !(0.0..1.0).contains(&p) || p == 0.0 {
        return Err(StatsError::BadConfidence);
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = 0.02425;
    let p_high = 1.0 - p_low;
    let x = if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= p_high {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    Ok(x)
}

/// Two-sided normal quantile for the given confidence level. The 95%
/// value is pinned to the conventional 1.959964.
fn z_for_confidence(confidence: f64) -> Result<f64, StatsError> {
    if !(0.0..1.0).contains(&confidence) || confidence == 0.0 {
        return Err(StatsError::BadConfidence);
    }
    if (confidence - 0.95).abs() < 1e-12 {
        return Ok(1.959964);
    }
    normal_quantile(1.0 - (1.0 - confidence) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilsonInterval {
    pub low: f64,
    pub high: f64,
    pub confidence: f64,
}

impl WilsonInterval {
    /// Bounds as rounded percentages, the form used in result tables.
    pub fn percent_bounds(&self) -> (u32, u32) {
        (round_half_up(self.low * 100.0), round_half_up(self.high * 100.0))
    }
}

/// Wilson score interval for k successes out of n.
pub fn wilson_interval(k: usize, n: usize, confidence: f64) -> Result<WilsonInterval, StatsError> {
    if n == 0 {
        return Err(StatsError::EmptySample);
    }
    if k > n {
        return Err(StatsError::KExceedsN { k, n });
    }
    let z = z_for_confidence(confidence)?;
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = p + z2 / (2.0 * nf);
    let margin = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    let low = ((center - margin) / denom).clamp(0.0, 1.0);
    let high = ((center + margin) / denom).clamp(0.0, 1.0);
    Ok(WilsonInterval { low, high, confidence })
}

/// Pooled two-proportion z-test; returns the z statistic and the
/// two-tailed p-value.
pub fn two_proportion_z(
    k1: usize,
    n1: usize,
    k2: usize,
    n2: usize,
) -> Result<(f64, f64), StatsError> {
    if n1 == 0 || n2 == 0 {
        return Err(StatsError::EmptySample);
    }
    if k1 > n1 {
        return Err(StatsError::KExceedsN { k: k1, n: n1 });
    }
    if k2 > n2 {
        return Err(StatsError::KExceedsN { k: k2, n: n2 });
    }
    let pooled = (k1 + k2) as f64 / (n1 + n2) as f64;
    if pooled == 0.0 || pooled == 1.0 {
        return Err(StatsError::DegeneratePool);
    }
    let p1 = k1 as f64 / n1 as f64;
    let p2 = k2 as f64 / n2 as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    let z = (p1 - p2) / se;
    let p = 2.0 * (1.0 - normal_cdf(z.abs()));
    Ok((z, p))
}

/// Round-half-up to the nearest integer, as percentages are displayed.
pub fn round_half_up(x: f64) -> u32 {
    (x + 0.5).floor().max(0.0) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_paper_fixtures() {
        // Cells from the published result tables.
        let cases = [
            ((14, 36), (25, 55)),
            ((18, 36), (34, 66)),
            ((13, 13), (77, 100)),
            ((0, 70), (0, 5)),
        ];
        for ((k, n), expected) in cases {
            let w = wilson_interval(k, n, 0.95).unwrap();
            assert_eq!(w.percent_bounds(), expected, "wilson({k},{n})");
        }
        let w = wilson_interval(0, 70, 0.95).unwrap();
        assert!(w.low == 0.0);
        assert!((w.high - 0.052).abs() < 5e-4);
    }

    #[test]
    fn wilson_contains_proportion_and_shrinks() {
        for &(k, n) in &[(1usize, 3usize), (5, 10), (49, 50), (0, 4), (7, 7)] {
            let w = wilson_interval(k, n, 0.95).unwrap();
            let p = k as f64 / n as f64;
            assert!(w.low <= p + 1e-12 && p <= w.high + 1e-12);
            let wider = wilson_interval(k * 10, n * 10, 0.95).unwrap();
            assert!(wider.high - wider.low <= w.high - w.low + 1e-12);
        }
    }

    #[test]
    fn wilson_mirror_symmetry() {
        for &(k, n) in &[(3usize, 10usize), (0, 8), (8, 8), (14, 36)] {
            let a = wilson_interval(k, n, 0.95).unwrap();
            let b = wilson_interval(n - k, n, 0.95).unwrap();
            assert!((a.low - (1.0 - b.high)).abs() < 1e-12);
            assert!((a.high - (1.0 - b.low)).abs() < 1e-12);
        }
    }

    #[test]
    fn wilson_errors() {
        assert_eq!(wilson_interval(0, 0, 0.95), Err(StatsError::EmptySample));
        assert!(wilson_interval(5, 3, 0.95).is_err());
    }

    #[test]
    fn z_test_paper_fixture() {
        let (_, p) = two_proportion_z(14, 15, 7, 15).unwrap();
        assert!((0.004..=0.006).contains(&p), "p = {p}");
    }

    #[test]
    fn z_test_identical_and_degenerate() {
        let (z, p) = two_proportion_z(9, 20, 9, 20).unwrap();
        assert_eq!(z, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
        assert_eq!(
            two_proportion_z(15, 15, 15, 15),
            Err(StatsError::DegeneratePool)
        );
        assert_eq!(two_proportion_z(0, 15, 0, 15), Err(StatsError::DegeneratePool));
    }

    #[test]
    fn z_test_antisymmetry() {
        let (z1, p1) = two_proportion_z(12, 20, 5, 18).unwrap();
        let (z2, p2) = two_proportion_z(5, 18, 12, 20).unwrap();
        assert!((z1 + z2).abs() < 1e-12);
        assert!((p1 - p2).abs() < 1e-12);
    }

    #[test]
    fn normal_approximations_agree() {
        // quantile(cdf(x)) should recover x well inside the bulk.
        for &x in &[-2.5f64, -1.0, 0.0, 0.5, 1.959964, 3.0] {
            let p = normal_cdf(x);
            let back = normal_quantile(p).unwrap();
            assert!((back - x).abs() < 1e-5, "x={x} back={back}");
        }
        assert!((normal_cdf(1.959964) - 0.975).abs() < 1e-6);
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(round_half_up(35.5), 36);
        assert_eq!(round_half_up(59.5), 60);
        assert_eq!(round_half_up(37.83), 38);
        assert_eq!(round_half_up(0.0), 0);
        assert_eq!(round_half_up(24.785), 25);
    }
}
