//! Empirical and predicted autocorrelation on the symbol-period lag grid.
//!
//! The empirical estimate is time averaged with a fixed divisor,
//! `R̂(k) = (1/N) Σ_n w[n + k·N_s] w[n]`, so that a noiseless single-path CSF
//! waveform estimates the base-pulse ACF directly.

use crate::channel::ChannelModel;
use crate::csf::{integrated_acf, CsfParams, RxxTable};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::waveform::Waveform;

/// ACF values at integer lags `0..=max_lag` (symbol periods).
#[derive(Debug, Clone, PartialEq)]
pub struct AcfEstimate<T> {
    values: Vec<T>,
    n_samples: usize,
}

impl<T: Real> AcfEstimate<T> {
    pub fn new(values: Vec<T>, n_samples: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("ACF must contain lag 0".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("ACF values must be finite".into()));
        }
        Ok(Self { values, n_samples })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn lags(&self) -> std::ops::RangeInclusive<usize> {
        0..=self.max_lag()
    }

    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    /// Samples behind the estimate; 0 for analytic predictions.
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }
}

fn lagged_product_mean<T: Real>(x: &[T], shift: usize) -> T {
    let sum: T = x[shift..].iter().zip(x).map(|(&a, &b)| a * b).sum();
    sum / T::from_usize_lossy(x.len())
}

/// Time-averaged ACF at lags `0..=max_lag` symbol periods.
pub fn empirical_acf<T: Real>(wave: &Waveform<T>, max_lag: usize) -> Result<AcfEstimate<T>> {
    let ns = wave.samples_per_symbol();
    let needed = (max_lag + 1) * ns;
    if wave.len() <= needed {
        return Err(Error::InsufficientSamples {
            needed,
            got: wave.len(),
        });
    }
    let x = wave.samples();
    let values = (0..=max_lag)
        .map(|k| lagged_product_mean(x, k * ns))
        .collect();
    Ok(AcfEstimate {
        values,
        n_samples: x.len(),
    })
}

/// Time-averaged ACF at every sample lag `0..=max_shift` (lag = shift / N_s).
pub fn empirical_acf_samples<T: Real>(wave: &Waveform<T>, max_shift: usize) -> Result<Vec<T>> {
    if wave.len() <= max_shift + 1 {
        return Err(Error::InsufficientSamples {
            needed: max_shift + 1,
            got: wave.len(),
        });
    }
    let x = wave.samples();
    Ok((0..=max_shift).map(|s| lagged_product_mean(x, s)).collect())
}

/// Received-signal ACF from the channel, term by term:
///
/// ```text
/// R_rr(η) = Σ_l α_l² R_xx(η) + R_ww(η)
///         + Σ_{l≥1} α_0 α_l [R_xx(η + τ_l) + R_xx(η − τ_l)]
///         + Σ_{i≠j ≥1} α_i α_j R_xx(η + τ_i − τ_j)
/// ```
///
/// with `R_ww(η) = noise_var` at `η = 0` and 0 elsewhere.
fn predict_with<T: Real, F: Fn(T) -> T>(ch: &ChannelModel<T>, noise_var: T, rxx: F, eta: T) -> T {
    let paths = ch.paths();
    let main = paths[0].attenuation;
    let tau = |i: usize| T::from_usize_lossy(paths[i].delay);

    let energy: T = paths.iter().map(|p| p.attenuation * p.attenuation).sum();
    let mut total = energy * rxx(eta);
    if eta == T::zero() {
        total += noise_var;
    }
    for (l, p) in paths.iter().enumerate().skip(1) {
        total += main * p.attenuation * (rxx(eta + tau(l)) + rxx(eta - tau(l)));
    }
    for (i, pi) in paths.iter().enumerate().skip(1) {
        for (j, pj) in paths.iter().enumerate().skip(1) {
            if i != j {
                total += pi.attenuation * pj.attenuation * rxx(eta + tau(i) - tau(j));
            }
        }
    }
    total
}

/// Predicted received-signal ACF at integer lags `0..=max_lag`.
pub fn predicted_rx_acf<T: Real>(
    ch: &ChannelModel<T>,
    noise_var: T,
    params: &CsfParams<T>,
    max_lag: usize,
) -> Result<AcfEstimate<T>> {
    if noise_var.is_nan() || noise_var < T::zero() {
        return Err(Error::Domain(format!(
            "noise variance must be >= 0, got {noise_var}"
        )));
    }
    let table = RxxTable::authoritative(params, max_lag + ch.max_delay());
    Ok(predicted_rx_acf_with_table(ch, noise_var, &table, max_lag))
}

/// As [`predicted_rx_acf`] with a precomputed table covering
/// `max_lag + max_delay`.
pub fn predicted_rx_acf_with_table<T: Real>(
    ch: &ChannelModel<T>,
    noise_var: T,
    table: &RxxTable<T>,
    max_lag: usize,
) -> AcfEstimate<T> {
    let rxx = |eta: T| {
        let k = eta.round().to_isize().expect("integer lag");
        table.get(k)
    };
    let values = (0..=max_lag)
        .map(|k| predict_with(ch, noise_var, rxx, T::from_usize_lossy(k)))
        .collect();
    AcfEstimate {
        values,
        n_samples: 0,
    }
}

/// Predicted received-signal ACF at an arbitrary real lag, using the
/// integrated base-pulse ACF (valid between integer lags too).
pub fn predicted_rx_acf_at<T: Real>(
    ch: &ChannelModel<T>,
    noise_var: T,
    params: &CsfParams<T>,
    lag: T,
) -> T {
    predict_with(ch, noise_var, |eta| integrated_acf(eta, params), lag)
}

/// Lags `1..max_lag` where the ACF departs most from a single-path shape.
///
/// The excess `d(k) = R_rr(k) − R_rr(0)·R_xx(k)/R_xx(0)` removes the
/// contribution a path-free channel of the same power would have; secondary
/// peaks are the strict interior local maxima of `d`.
pub fn secondary_peaks<T: Real>(acf: &AcfEstimate<T>, rxx: &RxxTable<T>) -> Vec<usize> {
    let v = acf.values();
    let r0 = rxx.get(0);
    let excess: Vec<T> = (0..v.len())
        .map(|k| v[k] - v[0] * rxx.get(k as isize) / r0)
        .collect();
    (1..v.len().saturating_sub(1))
        .filter(|&k| excess[k] > excess[k - 1] && excess[k] > excess[k + 1])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_multipath, sample_random_channel};
    use crate::csf::{encode_waveform, random_symbols, theoretical_acf};
    use approx::assert_abs_diff_eq;

    #[test]
    fn fig2_secondary_peaks() {
        let params = CsfParams::<f64>::default();
        let ch = ChannelModel::exponential(0.6, &[2, 7], 10).unwrap();
        let pred = predicted_rx_acf(&ch, 0.0, &params, 10).unwrap();
        let table = RxxTable::authoritative(&params, 10);
        assert_eq!(secondary_peaks(&pred, &table), vec![2, 5, 7]);
        let single = ChannelModel::exponential(0.6, &[], 10).unwrap();
        let flat = predicted_rx_acf(&single, 0.0, &params, 10).unwrap();
        assert!(secondary_peaks(&flat, &table).len() <= 1);
    }

    #[test]
    fn zero_waveform() {
        let w = Waveform::new(vec![0.0f64; 400], 16, 0.0).unwrap();
        let acf = empirical_acf(&w, 5).unwrap();
        assert!(acf.values().iter().all(|&v| v == 0.0));
        assert_eq!(acf.n_samples(), 400);
    }

    #[test]
    fn insufficient_samples() {
        let w = Waveform::new(vec![1.0f64; 96], 16, 0.0).unwrap();
        assert_eq!(
            empirical_acf(&w, 5),
            Err(Error::InsufficientSamples {
                needed: 96,
                got: 96
            })
        );
        assert!(empirical_acf(&w, 4).is_ok());
    }

    #[test]
    fn scaling_is_quadratic() {
        let params = CsfParams::<f64>::default();
        let w = encode_waveform(&random_symbols(128, 3).unwrap(), &params);
        let a = empirical_acf(&w, 6).unwrap();
        let b = empirical_acf(&w.scaled(3.0), 6).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_abs_diff_eq!(9.0 * x, *y, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_path_prediction_is_rxx() {
        let params = CsfParams::<f64>::default();
        let ch = ChannelModel::exponential(0.5, &[], 10).unwrap();
        let pred = predicted_rx_acf(&ch, 0.0, &params, 10).unwrap();
        for k in pred.lags() {
            assert_abs_diff_eq!(
                pred.values()[k],
                theoretical_acf(k as f64, &params),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn noise_only_touches_lag_zero_linearly() {
        let params = CsfParams::<f64>::default();
        let ch = ChannelModel::exponential(0.6, &[2, 7], 10).unwrap();
        let a = predicted_rx_acf(&ch, 0.0, &params, 10).unwrap();
        let b = predicted_rx_acf(&ch, 0.25, &params, 10).unwrap();
        let c = predicted_rx_acf(&ch, 0.5, &params, 10).unwrap();
        assert_abs_diff_eq!(b.values()[0] - a.values()[0], 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(c.values()[0] - a.values()[0], 0.5, epsilon = 1e-14);
        assert_eq!(a.values()[1..], b.values()[1..]);
        assert!(predicted_rx_acf(&ch, -0.1, &params, 10).is_err());
    }

    #[test]
    fn fractional_prediction_agrees_at_integers() {
        let params = CsfParams::<f64>::default();
        let ch = ChannelModel::exponential(0.6, &[2, 7], 10).unwrap();
        let pred = predicted_rx_acf(&ch, 0.1, &params, 10).unwrap();
        for k in 0..=10 {
            let v = predicted_rx_acf_at(&ch, 0.1, &params, k as f64);
            assert_abs_diff_eq!(v, pred.values()[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn noiseless_single_path_matches_closed_form() {
        let params = CsfParams::<f64>::default();
        let w = encode_waveform(&random_symbols(1 << 16, 12).unwrap(), &params);
        let acf = empirical_acf(&w, 10).unwrap();
        for k in acf.lags() {
            let d = (acf.values()[k] - theoretical_acf(k as f64, &params)).abs();
            assert!(d < 0.03, "lag {k}: {d}");
        }
    }

    #[test]
    fn random_channel_empirical_matches_prediction() {
        let params = CsfParams::<f64>::default();
        for seed in 0..3u64 {
            let ch = sample_random_channel(10, (0.3, 0.9), 6, 100 + seed).unwrap();
            let x = encode_waveform(&random_symbols(1 << 16, 200 + seed).unwrap(), &params);
            let y = apply_multipath(&x, &ch).unwrap();
            let emp = empirical_acf(&y, 10).unwrap();
            let pred = predicted_rx_acf(&ch, 0.0, &params, 10).unwrap();
            assert!(emp.max_abs_diff(&pred) < 0.03, "seed {seed}");
        }
    }

    #[test]
    fn sample_lag_acf_matches_symbol_lag_acf() {
        let params = CsfParams::<f64>::default();
        let w = encode_waveform(&random_symbols(256, 8).unwrap(), &params);
        let fine = empirical_acf_samples(&w, 3 * 16).unwrap();
        let coarse = empirical_acf(&w, 3).unwrap();
        for k in 0..=3 {
            assert_eq!(fine[k * 16], coarse.values()[k]);
        }
    }
}
