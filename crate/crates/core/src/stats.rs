//! Empirical distribution of `C` over `Ω_n`: standardized moments, distance
//! to the normal law and growth of mean and variance in `log n`.
//!
//! All logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::cf::CostSpec;
use crate::enumeration::{census_grid, CostHistogram, GridCensus, PairKind, Reference};
use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Standard normal CDF, Abramowitz–Stegun 26.2.17 (absolute error below
/// `7.5e-8`).
pub fn normal_cdf(x: f64) -> f64 {
    const P: f64 = 0.231_641_9;
    const B: [f64; 5] = [0.319_381_530, -0.356_563_782, 1.781_477_937, -1.821_255_978, 1.330_274_429];
    if x.is_nan() {
        return f64::NAN;
    }
    let z = x.abs();
    let t = 1.0 / (1.0 + P * z);
    let poly = t * (B[0] + t * (B[1] + t * (B[2] + t * (B[3] + t * B[4]))));
    let upper = (-0.5 * z * z).exp() / SQRT_2PI * poly;
    if x >= 0.0 {
        1.0 - upper
    } else {
        upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub n: u64,
    pub count: u64,
    /// `m_p(n)` for `p = 0..=p_max`, centred at `μ log n`.
    pub moments: Vec<f64>,
    /// The same with centring `μ log v` per pair.
    pub log_v_moments: Vec<f64>,
    pub ks_distance: f64,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub grid: Vec<u64>,
    pub kind: PairKind,
    /// Centring of `moments`; `log_v_moments` always uses [`Reference::LogV`].
    pub reference: Reference,
    pub mu: f64,
    pub sigma: f64,
    pub p_max: u32,
    pub log_base: String,
    pub rows: Vec<MomentRow>,
}

fn check_standardization(grid: &[u64], sigma: f64) -> Result<()> {
    if let Some(&n) = grid.iter().find(|&&n| n <= 2) {
        return Err(Error::InvalidBound(n));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParams(format!("sigma must be positive, got {sigma}")));
    }
    Ok(())
}

/// Standardized moments `m_p(n) = E[((C − μ log n)/(σ √log n))^p]` over each
/// grid point, from one enumeration pass.
pub fn moment_report(
    grid: &[u64],
    c: &CostSpec,
    mu: f64,
    sigma: f64,
    p_max: u32,
    kind: PairKind,
) -> Result<MomentReport> {
    check_standardization(grid, sigma)?;
    let census = census_grid(grid, kind, c, mu, p_max)?;
    Ok(report_from_census(&census, mu, sigma, p_max, kind))
}

/// Builds a [`MomentReport`] from an existing census (which must carry at
/// least `p_max` power sums).
pub fn report_from_census(census: &[GridCensus], mu: f64, sigma: f64, p_max: u32, kind: PairKind) -> MomentReport {
    let rows = census
        .iter()
        .map(|g| {
            let log_n = (g.n as f64).ln();
            let scale = sigma * log_n.sqrt();
            let centre = mu * log_n;
            let count = g.histogram.count();
            let moments = (0..=p_max as i32)
                .map(|p| g.histogram.sum_by(|cost| ((cost - centre) / scale).powi(p)) / count as f64)
                .collect();
            let log_v_moments = g
                .log_v_power_sums
                .iter()
                .take(p_max as usize + 1)
                .enumerate()
                .map(|(p, &s)| s / scale.powi(p as i32) / count as f64)
                .collect();
            MomentRow {
                n: g.n,
                count,
                moments,
                log_v_moments,
                ks_distance: ks_from_histogram(&g.histogram, centre, scale),
                mean: g.histogram.mean(),
                variance: g.histogram.variance(),
            }
        })
        .collect();
    MomentReport {
        grid: census.iter().map(|g| g.n).collect(),
        kind,
        reference: Reference::LogN,
        mu,
        sigma,
        p_max,
        log_base: "e".into(),
        rows,
    }
}

/// Kolmogorov distance between the law of `(C − centre)/scale` under the
/// histogram and the standard normal.
pub fn ks_from_histogram(hist: &CostHistogram, centre: f64, scale: f64) -> f64 {
    let total = hist.count() as f64;
    if total == 0.0 {
        return 0.0;
    }
    let mut below = 0u64;
    let mut worst = 0.0f64;
    for &(cost, m) in hist.entries() {
        let phi = normal_cdf((cost - centre) / scale);
        let before = below as f64 / total;
        below += m;
        let after = below as f64 / total;
        worst = worst.max((phi - before).abs()).max((after - phi).abs());
    }
    worst.min(1.0)
}

/// Kolmogorov distance of the standardized cost over one pair set.
pub fn ks_distance(n: u64, c: &CostSpec, mu: f64, sigma: f64, kind: PairKind) -> Result<f64> {
    check_standardization(&[n], sigma)?;
    let census = census_grid(&[n], kind, c, mu, 0)?;
    let log_n = (n as f64).ln();
    Ok(ks_from_histogram(&census[0].histogram, mu * log_n, sigma * log_n.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthTarget {
    MeanVsLogN,
    VarVsLogN,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub target: GrowthTarget,
}

/// Ordinary least squares of `y` on `x`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    (slope, intercept, r2)
}

fn check_span(grid: &[u64]) -> Result<()> {
    match (grid.first(), grid.last()) {
        (Some(&lo), Some(&hi)) if grid.len() >= 2 && hi >= 30 * lo => Ok(()),
        _ => Err(Error::Precondition("growth fit needs a grid spanning a factor 30".into())),
    }
}

/// Fits the mean or the variance of `C` over `Ω_n` against `log n`.
pub fn growth_fit(grid: &[u64], c: &CostSpec, target: GrowthTarget, kind: PairKind) -> Result<GrowthFit> {
    check_span(grid)?;
    let census = census_grid(grid, kind, c, 0.0, 0)?;
    growth_fit_from_census(&census, target)
}

pub fn growth_fit_from_census(census: &[GridCensus], target: GrowthTarget) -> Result<GrowthFit> {
    let grid: Vec<u64> = census.iter().map(|g| g.n).collect();
    check_span(&grid)?;
    let x: Vec<f64> = grid.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = census
        .iter()
        .map(|g| match target {
            GrowthTarget::MeanVsLogN => g.histogram.mean(),
            GrowthTarget::VarVsLogN => g.histogram.variance(),
        })
        .collect();
    let (slope, intercept, r_squared) = ols(&x, &y);
    Ok(GrowthFit {
        slope,
        intercept,
        r_squared,
        target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_symmetry_and_limits() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-9);
        for x in [0.1, 0.7, 1.5, 3.0] {
            assert!((normal_cdf(x) + normal_cdf(-x) - 1.0).abs() < 1e-15);
        }
        assert!(normal_cdf(40.0) == 1.0);
        assert!(normal_cdf(-40.0) >= 0.0);
    }

    #[test]
    fn ols_exact_line() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|a| 3.0 * a - 1.0).collect();
        let (slope, intercept, r2) = ols(&x, &y);
        assert!((slope - 3.0).abs() < 1e-14 && (intercept + 1.0).abs() < 1e-14);
        assert_eq!(r2, 1.0);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let c = CostSpec::constant(1.0).unwrap();
        assert!(matches!(
            moment_report(&[2, 100], &c, 0.84, 0.7, 4, PairKind::Reduced),
            Err(Error::InvalidBound(2))
        ));
        assert!(moment_report(&[100], &c, 0.84, 0.0, 4, PairKind::Reduced).is_err());
        assert!(growth_fit(&[100, 1000], &c, GrowthTarget::MeanVsLogN, PairKind::Reduced).is_err());
    }

    #[test]
    fn zeroth_moment_is_one() {
        let c = CostSpec::constant(1.0).unwrap();
        let r = moment_report(&[50, 200], &c, 0.84, 0.72, 4, PairKind::All).unwrap();
        for row in &r.rows {
            assert!((row.moments[0] - 1.0).abs() < 1e-15);
            assert!((row.log_v_moments[0] - 1.0).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&row.ks_distance));
        }
    }
}
