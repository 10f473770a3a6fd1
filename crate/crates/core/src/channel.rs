//! Integer-delay multipath channel with exponential damping, plus AWGN.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::waveform::Waveform;

/// `α = e^{−γτ}`.
pub fn attenuation_from_delay<T: Real>(gamma: T, tau: T) -> Result<T> {
    if tau.is_nan() || tau < T::zero() {
        return Err(Error::Domain(format!("delay must be >= 0, got {tau}")));
    }
    if gamma.is_nan() || gamma <= T::zero() {
        return Err(Error::Domain(format!("damping must be > 0, got {gamma}")));
    }
    Ok((-gamma * tau).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path<T> {
    /// Delay in whole symbol periods.
    pub delay: usize,
    pub attenuation: T,
}

/// `h(t) = Σ α_l δ(t − τ_l)` with `τ_0 = 0`, `α_0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel<T> {
    paths: Vec<Path<T>>,
    gamma: T,
    max_delay: usize,
}

impl<T: Real> ChannelModel<T> {
    pub fn new(paths: Vec<Path<T>>, gamma: T, max_delay: usize) -> Result<Self> {
        let first = paths
            .first()
            .ok_or_else(|| Error::InvalidParams("channel needs at least the main path".into()))?;
        if first.delay != 0 || first.attenuation != T::one() {
            return Err(Error::InvalidParams(
                "main path must have delay 0 and attenuation 1".into(),
            ));
        }
        if paths.windows(2).any(|w| w[1].delay <= w[0].delay) {
            return Err(Error::InvalidParams(
                "delays must be strictly increasing".into(),
            ));
        }
        if let Some(p) = paths.iter().find(|p| p.delay > max_delay) {
            return Err(Error::InvalidParams(format!(
                "delay {} exceeds max_delay {max_delay}",
                p.delay
            )));
        }
        if paths
            .iter()
            .any(|p| !p.attenuation.is_finite() || p.attenuation < T::zero())
        {
            return Err(Error::InvalidParams(
                "attenuations must be finite and >= 0".into(),
            ));
        }
        Ok(Self {
            paths,
            gamma,
            max_delay,
        })
    }

    /// Paths at `delays` with `α_l = e^{−γτ_l}`. A leading 0 delay is implied.
    pub fn exponential(gamma: T, delays: &[usize], max_delay: usize) -> Result<Self> {
        let mut all = Vec::with_capacity(delays.len() + 1);
        if delays.first() != Some(&0) {
            all.push(0);
        }
        all.extend_from_slice(delays);
        let paths = all
            .iter()
            .map(|&d| {
                Ok(Path {
                    delay: d,
                    attenuation: attenuation_from_delay(gamma, T::from_usize_lossy(d))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(paths, gamma, max_delay)
    }

    pub fn paths(&self) -> &[Path<T>] {
        &self.paths
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn max_delay(&self) -> usize {
        self.max_delay
    }

    pub fn path_count(&self) -> usize {
        self.paths.len()
    }

    /// Dense taps `α_0..α_M`; absent delays are 0.
    pub fn taps(&self) -> Vec<T> {
        let mut taps = vec![T::zero(); self.max_delay + 1];
        for p in &self.paths {
            taps[p.delay] = p.attenuation;
        }
        taps
    }

    /// `[α_1, …, α_M]`, the vector scored by the MSE criterion.
    pub fn secondary_taps(&self) -> Vec<T> {
        self.taps()[1..].to_vec()
    }
}

/// `Σ_l α_l x(t − τ_l)` on the input grid, extended by `M·N_s` samples.
pub fn apply_multipath<T: Real>(wave: &Waveform<T>, ch: &ChannelModel<T>) -> Result<Waveform<T>> {
    let ns = wave.samples_per_symbol();
    if let Some(p) = ch.paths.iter().find(|p| p.delay > ch.max_delay) {
        return Err(Error::Contract(format!(
            "delay {} exceeds max_delay {}",
            p.delay, ch.max_delay
        )));
    }
    let input = wave.samples();
    let mut out = vec![T::zero(); input.len() + ch.max_delay * ns];
    for p in &ch.paths {
        let shift = p.delay * ns;
        out[shift..shift + input.len()]
            .iter_mut()
            .zip(input)
            .for_each(|(o, &x)| *o += p.attenuation * x);
    }
    Ok(Waveform::from_parts(out, ns, wave.t0()))
}

/// Noise actually injected by [`add_awgn`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec<T> {
    pub snr_db: T,
    /// Per-sample variance; 0 when noise is disabled.
    pub sigma2: T,
    pub seed: u64,
}

impl<T: Real> NoiseSpec<T> {
    pub fn enabled(&self) -> bool {
        self.sigma2 > T::zero()
    }
}

/// `n` iid `N(0, sigma2)` samples.
pub fn gaussian_samples<T: Real>(n: usize, sigma2: T, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = sigma2.sqrt();
    (0..n)
        .map(|_| sigma * T::lit(rng.sample::<f64, _>(StandardNormal)))
        .collect()
}

/// Adds white Gaussian noise at `snr_db` relative to the mean power of
/// `wave`. `snr_db = +∞` disables the noise.
pub fn add_awgn<T: Real>(wave: &Waveform<T>, snr_db: T, seed: u64) -> (Waveform<T>, NoiseSpec<T>) {
    if snr_db.is_infinite() && snr_db > T::zero() {
        let spec = NoiseSpec {
            snr_db,
            sigma2: T::zero(),
            seed,
        };
        return (wave.clone(), spec);
    }
    let power = wave.mean_power();
    let sigma2 = power / T::lit(10.0).powf(snr_db / T::lit(10.0));
    let noise = gaussian_samples(wave.len(), sigma2, seed);
    let samples = wave
        .samples()
        .iter()
        .zip(noise)
        .map(|(&x, w)| x + w)
        .collect();
    let spec = NoiseSpec {
        snr_db,
        sigma2,
        seed,
    };
    (
        Waveform::from_parts(samples, wave.samples_per_symbol(), wave.t0()),
        spec,
    )
}

/// Random exponential channel: `γ ~ U[gamma_range]`, `path_count − 1`
/// distinct delays drawn without replacement from `1..=max_delay`.
pub fn sample_random_channel<T: Real>(
    max_delay: usize,
    gamma_range: (T, T),
    path_count: usize,
    seed: u64,
) -> Result<ChannelModel<T>> {
    if path_count == 0 {
        return Err(Error::Domain("path_count must be >= 1".into()));
    }
    if path_count > max_delay + 1 {
        return Err(Error::Domain(format!(
            "path_count {path_count} exceeds max_delay + 1 = {}",
            max_delay + 1
        )));
    }
    let (lo, hi) = gamma_range;
    if !(lo > T::zero() && hi >= lo && hi.is_finite()) {
        return Err(Error::Domain(format!("invalid gamma range [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: f64 = rng.random();
    let gamma = lo + (hi - lo) * T::lit(u);
    let mut delays: Vec<usize> = if path_count > 1 {
        index::sample(&mut rng, max_delay, path_count - 1)
            .into_iter()
            .map(|i| i + 1)
            .collect()
    } else {
        Vec::new()
    };
    delays.sort_unstable();
    ChannelModel::exponential(gamma, &delays, max_delay)
}
