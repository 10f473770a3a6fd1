//! Non-blind least-squares channel estimation from a known probe.

use crate::error::{Error, Result};
use crate::linalg::householder_lstsq;
use crate::scalar::Real;
use crate::waveform::Waveform;

/// Known transmitted probe and the matching received waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeFrame<T> {
    probe: Waveform<T>,
    received: Waveform<T>,
}

impl<T: Real> ProbeFrame<T> {
    pub fn new(probe: Waveform<T>, received: Waveform<T>) -> Result<Self> {
        if probe.samples_per_symbol() != received.samples_per_symbol()
            || probe.t0() != received.t0()
        {
            return Err(Error::Contract(
                "probe and received waveforms must share a sampling grid".into(),
            ));
        }
        Ok(Self { probe, received })
    }

    pub fn probe(&self) -> &Waveform<T> {
        &self.probe
    }

    pub fn received(&self) -> &Waveform<T> {
        &self.received
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsEstimate<T> {
    /// `α̂_0..α̂_M` as fitted.
    pub alpha: Vec<T>,
    /// `α̂_l / α̂_0`, comparable with the blind estimator's `α_0 = 1` convention.
    pub relative: Vec<T>,
    /// Shifted-probe matrix was numerically rank deficient.
    pub degenerate: bool,
}

impl<T: Real> LsEstimate<T> {
    /// `α̂_1/α̂_0, …, α̂_M/α̂_0`.
    pub fn secondary_taps(&self) -> &[T] {
        &self.relative[1..]
    }
}

/// `min_α ‖received − X α‖²` where column `l` of `X` is the probe delayed by
/// `l` symbol periods. Solved by Householder QR.
pub fn ls_estimate<T: Real>(frame: &ProbeFrame<T>, max_delay: usize) -> Result<LsEstimate<T>> {
    let ns = frame.probe.samples_per_symbol();
    let probe = frame.probe.samples();
    let y = frame.received.samples();
    let n_taps = max_delay + 1;
    if probe.len() <= n_taps * ns {
        return Err(Error::InsufficientSamples {
            needed: n_taps * ns,
            got: probe.len(),
        });
    }
    let columns: Vec<Vec<T>> = (0..n_taps)
        .map(|l| {
            let shift = l * ns;
            let mut col = vec![T::zero(); y.len()];
            if shift < y.len() {
                let n = probe.len().min(y.len() - shift);
                col[shift..shift + n].copy_from_slice(&probe[..n]);
            }
            col
        })
        .collect();
    let sol = householder_lstsq(&columns, y);
    let alpha = sol.coefficients;
    let degenerate =
        sol.rank_deficient || alpha[0] == T::zero() || alpha.iter().any(|a| !a.is_finite());
    let relative = if alpha[0] != T::zero() {
        alpha.iter().map(|&a| a / alpha[0]).collect()
    } else {
        vec![T::nan(); n_taps]
    };
    Ok(LsEstimate {
        alpha,
        relative,
        degenerate,
    })
}
