//! Per-trial simulation shared by the sweeps.

use csf_core::{
    add_awgn, apply_multipath, empirical_acf, encode_waveform, gaussian_samples, ls_estimate,
    solve_channel, ChannelModel64, CsfParams64, EstimationResult64, IdentificationProblem,
    LsEstimate, ProbeFrame, RxxTable64, SolverOptions64, SymbolStream, Waveform64,
};

use crate::error::Result;

/// Fixed ingredients of a blind estimate.
#[derive(Debug, Clone)]
pub struct BlindSetup {
    pub params: CsfParams64,
    pub max_delay: usize,
    pub table: RxxTable64,
    pub opts: SolverOptions64,
}

impl BlindSetup {
    pub fn new(params: CsfParams64, max_delay: usize, max_iterations: usize) -> Self {
        let table = RxxTable64::authoritative(&params, 2 * max_delay);
        let opts = SolverOptions64 {
            max_iterations,
            ..SolverOptions64::empirical(table.get(0))
        };
        Self {
            params,
            max_delay,
            table,
            opts,
        }
    }

    pub fn estimate(&self, received: &Waveform64) -> Result<EstimationResult64> {
        let r_rr = empirical_acf(received, self.max_delay)?;
        let prob = IdentificationProblem::with_table(r_rr, self.table.clone())?;
        Ok(solve_channel(&prob, &self.opts))
    }
}

/// Noiseless received CSF frame.
pub fn received_csf(
    stream: &SymbolStream,
    params: &CsfParams64,
    ch: &ChannelModel64,
) -> Result<(Waveform64, Waveform64)> {
    let x = encode_waveform(stream, params);
    let y = apply_multipath(&x, ch)?;
    Ok((x, y))
}

/// Noisy copy of `clean` at `snr_db`; `+∞` disables noise.
pub fn noisy(clean: &Waveform64, snr_db: f64, seed: u64) -> Waveform64 {
    add_awgn(clean, snr_db, seed).0
}

/// Unit-variance white Gaussian probe of `n` samples.
pub fn gaussian_probe(n: usize, samples_per_symbol: usize, seed: u64) -> Result<Waveform64> {
    Ok(Waveform64::new(
        gaussian_samples(n, 1.0, seed),
        samples_per_symbol,
        0.0,
    )?)
}

pub fn ls(probe: &Waveform64, received: &Waveform64, max_delay: usize) -> Result<LsEstimate<f64>> {
    let frame = ProbeFrame::new(probe.clone(), received.clone())?;
    Ok(ls_estimate(&frame, max_delay)?)
}
