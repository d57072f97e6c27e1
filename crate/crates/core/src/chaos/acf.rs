use super::ChaosError;

/// Sample autocorrelation for lags `0..=max_lag`, normalized by the lag-0
/// autocovariance so that `acf[0] == 1`.
pub fn autocorrelation(values: &[f64], max_lag: usize) -> Result<Vec<f64>, ChaosError> {
    let n = values.len();
    if n < 2 || max_lag >= n - 1 {
        return Err(ChaosError::SeriesTooShort {
            len: n,
            required: max_lag + 2,
        });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let c0: f64 = centered.iter().map(|c| c * c).sum();
    if c0 == 0.0 {
        return Err(ChaosError::ZeroVariance);
    }
    let mut acf = Vec::with_capacity(max_lag + 1);
    acf.push(1.0);
    for lag in 1..=max_lag {
        let c: f64 = centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum();
        acf.push(c / c0);
    }
    Ok(acf)
}

/// Picks the delay from an autocorrelation curve.
///
/// First lag where the ACF drops below `1/e`; failing that, the first local
/// minimum; failing that, 1.
pub fn select_delay(acf: &[f64]) -> usize {
    let threshold = (-1.0f64).exp();
    if let Some(lag) = (1..acf.len()).find(|&l| acf[l] < threshold) {
        return lag;
    }
    (1..acf.len().saturating_sub(1))
        .find(|&l| acf[l] < acf[l - 1] && acf[l] <= acf[l + 1])
        .unwrap_or(1)
}
