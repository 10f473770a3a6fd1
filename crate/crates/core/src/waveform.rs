use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniformly sampled real signal. Time is measured in symbol periods.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform<T> {
    samples: Vec<T>,
    samples_per_symbol: usize,
    t0: T,
}

impl<T: Real> Waveform<T> {
    pub fn new(samples: Vec<T>, samples_per_symbol: usize, t0: T) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain(
                "waveform must have at least one sample".into(),
            ));
        }
        if samples_per_symbol == 0 {
            return Err(Error::Domain("samples_per_symbol must be >= 1".into()));
        }
        if !t0.is_finite() {
            return Err(Error::Domain("t0 must be finite".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Domain(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            samples_per_symbol,
            t0,
        })
    }

    /// Builds a waveform without re-validating; callers guarantee the invariants.
    pub(crate) fn from_parts(samples: Vec<T>, samples_per_symbol: usize, t0: T) -> Self {
        debug_assert!(!samples.is_empty() && samples_per_symbol >= 1);
        Self {
            samples,
            samples_per_symbol,
            t0,
        }
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.samples_per_symbol
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time (in symbol periods) of sample `n`.
    pub fn time_of(&self, n: usize) -> T {
        self.t0 + T::from_usize_lossy(n) / T::from_usize_lossy(self.samples_per_symbol)
    }

    /// Mean of the squared samples.
    pub fn mean_power(&self) -> T {
        let sum: T = self.samples.iter().map(|&s| s * s).sum();
        sum / T::from_usize_lossy(self.samples.len())
    }

    pub fn scaled(&self, c: T) -> Self {
        Self::from_parts(
            self.samples.iter().map(|&s| s * c).collect(),
            self.samples_per_symbol,
            self.t0,
        )
    }
}
