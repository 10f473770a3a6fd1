//! Chaotic shape-forming filter (CSF): base pulse, waveform synthesis and the
//! autocorrelation of the base pulse.
//!
//! Time is normalized to the symbol period, so the base frequency is `f = 1`
//! and `ω = 2π`. The base pulse is
//!
//! ```text
//!        ⎧ (1 − e^{−β}) e^{βt} (cos ωt − (β/ω) sin ωt)    t < 0
//! p(t) = ⎨ 1 − e^{β(t−1)} (cos ωt − (β/ω) sin ωt)         0 ≤ t < 1
//!        ⎩ 0                                             t ≥ 1
//! ```
//!
//! and a symbol stream `s_m ∈ {−1, +1}` is encoded as `x(t) = Σ s_m p(t − m)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use crate::scalar::Real;
use crate::waveform::Waveform;

/// Smallest admissible oversampling factor.
pub const MIN_OVERSAMPLING: usize = 8;
/// Default samples per symbol period.
pub const DEFAULT_OVERSAMPLING: usize = 16;
/// Amplitude below which the truncated `t < 0` tail is discarded.
pub const TAIL_AMPLITUDE: f64 = 1e-6;
/// Relative disagreement above which the integrated ACF replaces the closed form.
pub const CLOSED_FORM_REL_TOL: f64 = 0.01;

/// Parameters of the base pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsfParams<T> {
    beta: T,
    freq: T,
    oversampling: usize,
    pulse_tail: usize,
}

impl<T: Real> CsfParams<T> {
    /// Parameters with the minimal tail truncation for `beta`.
    pub fn new(beta: T, oversampling: usize) -> Result<Self> {
        if !(beta.is_finite() && beta > T::zero()) {
            return Err(Error::InvalidParams(format!(
                "beta must be > 0, got {beta}"
            )));
        }
        let tail = Self::min_pulse_tail(beta);
        Self::with_tail(beta, oversampling, tail)
    }

    pub fn with_tail(beta: T, oversampling: usize, pulse_tail: usize) -> Result<Self> {
        let freq = T::one();
        if !(beta.is_finite() && beta > T::zero()) {
            return Err(Error::InvalidParams(format!(
                "beta must be > 0, got {beta}"
            )));
        }
        // β ≤ f ln 2, with one ulp of slack so that `ln 2` itself is accepted in f32.
        let upper = freq * T::LN_2();
        if beta > upper + upper * T::epsilon() {
            return Err(Error::InvalidParams(format!(
                "beta must satisfy beta <= f ln 2 = {upper}, got {beta}"
            )));
        }
        if oversampling < MIN_OVERSAMPLING {
            return Err(Error::InvalidParams(format!(
                "oversampling must be >= {MIN_OVERSAMPLING}, got {oversampling}"
            )));
        }
        let min_tail = Self::min_pulse_tail(beta);
        if pulse_tail < min_tail {
            return Err(Error::InvalidParams(format!(
                "pulse_tail must be >= {min_tail} for beta = {beta}, got {pulse_tail}"
            )));
        }
        Ok(Self {
            beta,
            freq,
            oversampling,
            pulse_tail,
        })
    }

    /// `ceil(ln(1e6) / β)`: number of symbol periods after which the tail
    /// envelope falls below [`TAIL_AMPLITUDE`].
    pub fn min_pulse_tail(beta: T) -> usize {
        let k = (-TAIL_AMPLITUDE.ln() / beta.to_f64_lossy()).ceil();
        k as usize
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn freq(&self) -> T {
        self.freq
    }

    pub fn omega(&self) -> T {
        T::TAU() * self.freq
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    pub fn pulse_tail(&self) -> usize {
        self.pulse_tail
    }

    /// Evaluates the base pulse at a finite time.
    #[inline]
    pub(crate) fn pulse(&self, t: T) -> T {
        let period = self.freq.recip();
        if t >= period {
            return T::zero();
        }
        let omega = self.omega();
        let (s, c) = (omega * t).sin_cos();
        let shape = c - self.beta / omega * s;
        if t < T::zero() {
            (T::one() - (-self.beta * period).exp()) * (self.beta * t).exp() * shape
        } else {
            T::one() - (self.beta * (t - period)).exp() * shape
        }
    }

    /// Envelope constant `C` with `|p(−t)| ≤ C e^{−βt}` for `t > 0`.
    pub fn tail_envelope(&self) -> T {
        (T::one() - (-self.beta).exp()) * (T::one() + self.beta / self.omega())
    }
}

impl<T: Real> Default for CsfParams<T> {
    /// `β = ln 2`, 16 samples per symbol, minimal tail.
    fn default() -> Self {
        Self::new(T::LN_2(), DEFAULT_OVERSAMPLING).expect("default CSF parameters are valid")
    }
}

/// Base pulse `p(t)`, `t` in symbol periods.
pub fn base_pulse<T: Real>(t: T, params: &CsfParams<T>) -> Result<T> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("pulse time must be finite, got {t}")));
    }
    Ok(params.pulse(t))
}

/// Information symbols in `{−1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolStream {
    symbols: Vec<i8>,
    seed: u64,
}

impl SymbolStream {
    /// Wraps externally supplied symbols (seed recorded as 0).
    pub fn new(symbols: Vec<i8>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Domain("symbol stream must not be empty".into()));
        }
        if let Some(i) = symbols.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::Domain(format!(
                "symbol {i} is {}, expected -1 or +1",
                symbols[i]
            )));
        }
        Ok(Self { symbols, seed: 0 })
    }

    pub fn symbols(&self) -> &[i8] {
        &self.symbols
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self {
            symbols: self.symbols.iter().map(|&s| -s).collect(),
            seed: self.seed,
        }
    }
}

/// `n` iid equiprobable ±1 symbols drawn from ChaCha8 seeded with `seed`.
pub fn random_symbols(n: usize, seed: u64) -> Result<SymbolStream> {
    if n == 0 {
        return Err(Error::Domain("symbol count must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbols = (0..n)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    Ok(SymbolStream { symbols, seed })
}

/// Sampled base pulse on `t = −K + j/N_s`, `j = 0..(K + 1)·N_s`.
pub fn sampled_pulse<T: Real>(params: &CsfParams<T>) -> Vec<T> {
    let ns = params.oversampling;
    let k = params.pulse_tail;
    let ns_t = T::from_usize_lossy(ns);
    (0..(k + 1) * ns)
        .map(|j| {
            let offset = j as f64 - (k * ns) as f64;
            params.pulse(T::lit(offset) / ns_t)
        })
        .collect()
}

/// Samples `x(t) = Σ s_m p(t − m)` on `t = −K + n/N_s` over `[−K, len)`.
pub fn encode_waveform<T: Real>(stream: &SymbolStream, params: &CsfParams<T>) -> Waveform<T> {
    let ns = params.oversampling;
    let k = params.pulse_tail;
    let pulse = sampled_pulse(params);
    let mut out = vec![T::zero(); (k + stream.len()) * ns];
    for (m, &s) in stream.symbols.iter().enumerate() {
        let dst = &mut out[m * ns..m * ns + pulse.len()];
        if s > 0 {
            dst.iter_mut().zip(&pulse).for_each(|(o, &p)| *o += p);
        } else {
            dst.iter_mut().zip(&pulse).for_each(|(o, &p)| *o -= p);
        }
    }
    Waveform::from_parts(out, ns, -T::from_usize_lossy(k))
}

/// `I₀ = R_xx(0)` in closed form.
fn closed_form_energy<T: Real>(params: &CsfParams<T>) -> T {
    let beta = params.beta;
    let omega = params.omega();
    let (b2, w2) = (beta * beta, omega * omega);
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    T::one() + (T::one() - (-beta).exp()) * (w2 - three * b2) / (two * beta * (w2 + b2))
}

/// Closed-form ACF of the base pulse. Exact at integer lags; the `η ≠ 0`
/// branch does not hold between integers (use [`integrated_acf`] there).
pub fn theoretical_acf<T: Real>(lag: T, params: &CsfParams<T>) -> T {
    let i0 = closed_form_energy(params);
    let a = lag.abs();
    if a == T::zero() {
        return i0;
    }
    let beta = params.beta;
    ((T::one() - a) * beta).exp() * (T::one() - (-beta).exp()) * (T::one() - i0) / T::lit(2.0)
}

/// `∫ p(ξ + η) p(ξ) dξ` by piecewise Gauss-Legendre quadrature.
///
/// The integrand is smooth between the breakpoints `{−|η|, 1 − |η|, 0, 1}`
/// and the integer grid, and is integrated over `[−K − |η|, 1 − |η|]`, where
/// the product of tail envelopes is below `TAIL_AMPLITUDE²`.
pub fn integrated_acf<T: Real>(lag: T, params: &CsfParams<T>) -> T {
    let a = lag.abs().to_f64_lossy();
    let upper = 1.0 - a;
    let lower = -(params.pulse_tail as f64) - a;

    let mut cuts: Vec<f64> = ((lower.ceil() as i64)..=(upper.floor() as i64))
        .map(|i| i as f64)
        .chain([lower, upper, -a, 1.0 - a, 0.0])
        .filter(|&c| c >= lower && c <= upper)
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);

    let (nodes, weights) = gauss_legendre();
    let eta = T::lit(a);
    let mut total = T::zero();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut seg = T::zero();
        for (x, wt) in nodes.iter().zip(weights) {
            let xi = T::lit(mid + half * x);
            seg += T::lit(*wt) * params.pulse(xi + eta) * params.pulse(xi);
        }
        total += T::lit(half) * seg;
    }
    total
}

/// Where a tabulated ACF value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcfSource {
    ClosedForm,
    Integrated,
}

/// Authoritative transmitted-signal ACF at integer lags `0..=max_lag`,
/// extended evenly to negative lags.
#[derive(Debug, Clone, PartialEq)]
pub struct RxxTable<T> {
    values: Vec<T>,
    sources: Vec<AcfSource>,
}

impl<T: Real> RxxTable<T> {
    /// Closed form, unless it disagrees with the integral by more than
    /// [`CLOSED_FORM_REL_TOL`] at some lag, in which case the integral is used
    /// at that lag.
    pub fn authoritative(params: &CsfParams<T>, max_lag: usize) -> Self {
        let tol = T::lit(CLOSED_FORM_REL_TOL);
        let (values, sources) = (0..=max_lag)
            .map(|k| {
                let lag = T::from_usize_lossy(k);
                let closed = theoretical_acf(lag, params);
                let integral = integrated_acf(lag, params);
                if (closed - integral).abs() <= tol * integral.abs() {
                    (closed, AcfSource::ClosedForm)
                } else {
                    (integral, AcfSource::Integrated)
                }
            })
            .unzip();
        Self { values, sources }
    }

    pub fn from_values(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("ACF table must cover lag 0".into()));
        }
        let sources = vec![AcfSource::Integrated; values.len()];
        Ok(Self { values, sources })
    }

    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    /// `R_xx(lag)` with `R_xx(−k) = R_xx(k)`.
    ///
    /// Panics if `|lag|` exceeds the table.
    #[inline]
    pub fn get(&self, lag: isize) -> T {
        self.values[lag.unsigned_abs()]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn sources(&self) -> &[AcfSource] {
        &self.sources
    }
}
