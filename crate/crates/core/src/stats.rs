//! Log-space accumulation and small regression helpers.

/// Neumaier-compensated sum, evaluated in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `ln Σ exp(x_i)` with max-subtraction. Empty input or all `-∞` gives `-∞`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + compensated_sum(xs.iter().map(|&x| (x - m).exp())).ln()
}

/// `ln` of the sample mean of `exp(x_i)` together with the relative standard
/// error of that mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMean {
    pub log_mean: f64,
    /// Standard error of the sample mean divided by the sample mean.
    pub rel_std_err: f64,
    /// `ln` of the standard error of the sample mean.
    pub log_std_err: f64,
}

/// Treats `xs` as log-weights of `n` samples; samples not present count as
/// zero weight (so `n >= xs.len()`).
pub fn log_mean_exp(xs: &[f64], n: usize) -> LogMean {
    debug_assert!(n >= xs.len() && n > 0);
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return LogMean {
            log_mean: f64::NEG_INFINITY,
            rel_std_err: 0.0,
            log_std_err: f64::NEG_INFINITY,
        };
    }
    let nf = n as f64;
    let s1 = compensated_sum(xs.iter().map(|&x| (x - m).exp())) / nf;
    let s2 = compensated_sum(xs.iter().map(|&x| (2.0 * (x - m)).exp())) / nf;
    let var = (s2 - s1 * s1).max(0.0);
    let se_scaled = (var / nf).sqrt();
    LogMean {
        log_mean: m + s1.ln(),
        rel_std_err: se_scaled / s1,
        log_std_err: if se_scaled > 0.0 {
            m + se_scaled.ln()
        } else {
            f64::NEG_INFINITY
        },
    }
}

/// Ordinary least-squares fit `y = slope · x + intercept`.
pub fn least_squares_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_survives_large_exponents() {
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn log_mean_of_constant_has_no_error() {
        let lm = log_mean_exp(&[0.5; 10], 10);
        assert!((lm.log_mean - 0.5).abs() < 1e-15);
        assert_eq!(lm.rel_std_err, 0.0);
    }

    #[test]
    fn log_mean_counts_missing_samples_as_zero() {
        // two hits of weight 1 out of four samples
        let lm = log_mean_exp(&[0.0, 0.0], 4);
        assert!((lm.log_mean - 0.5f64.ln()).abs() < 1e-15);
        let se = (0.25f64 / 4.0).sqrt();
        assert!((lm.log_std_err.exp() - se).abs() < 1e-15);
    }

    #[test]
    fn compensated_sum_beats_naive_cancellation() {
        let xs = [1e16, 1.0, -1e16];
        assert_eq!(compensated_sum(xs), 1.0);
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let xs = [1.0, 2.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| -0.3 * x + 2.0).collect();
        let (s, b) = least_squares_line(&xs, &ys).unwrap();
        assert!((s + 0.3).abs() < 1e-14 && (b - 2.0).abs() < 1e-14);
    }
}
