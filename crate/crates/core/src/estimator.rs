//! Blind channel identification from the received-signal ACF.
//!
//! With unknown taps `α_1..α_M` (`α_0 = 1`) and noise power `R_ww(0)`, the
//! received ACF at lag `k` is a quadratic form in the taps:
//!
//! ```text
//! R_rr(k) = R_xx(0) c_k + Σ_{l=1}^{2M} R_xx(l) (c_{|k−l|} + c_{k+l}) + δ_{k0} R_ww(0)
//! ```
//!
//! where `c_d = Σ_i α_i α_{i+d}` is the tap autocorrelation (`c_d = 0` for
//! `d > M`). The `M + 1` equations for `k = 0..M` are solved for the `M + 1`
//! unknowns with a Levenberg-Marquardt iteration.

use crate::acf::AcfEstimate;
use crate::csf::{CsfParams, RxxTable};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, norm2, Matrix};
use crate::scalar::Real;

/// Default `α̂` threshold for declaring a path present.
pub const DEFAULT_DETECT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationProblem<T> {
    r_rr: AcfEstimate<T>,
    r_xx: RxxTable<T>,
    max_delay: usize,
}

impl<T: Real> IdentificationProblem<T> {
    /// Builds the problem with the authoritative `R_xx` table for `params`.
    pub fn new(r_rr: AcfEstimate<T>, params: &CsfParams<T>) -> Self {
        let max_delay = r_rr.max_lag();
        let r_xx = RxxTable::authoritative(params, 2 * max_delay);
        Self {
            r_rr,
            r_xx,
            max_delay,
        }
    }

    pub fn with_table(r_rr: AcfEstimate<T>, r_xx: RxxTable<T>) -> Result<Self> {
        let max_delay = r_rr.max_lag();
        if r_xx.max_lag() < 2 * max_delay {
            return Err(Error::DimensionMismatch(format!(
                "R_xx table covers lags 0..={}, need 0..={}",
                r_xx.max_lag(),
                2 * max_delay
            )));
        }
        Ok(Self {
            r_rr,
            r_xx,
            max_delay,
        })
    }

    pub fn max_delay(&self) -> usize {
        self.max_delay
    }

    pub fn r_rr(&self) -> &AcfEstimate<T> {
        &self.r_rr
    }

    pub fn r_xx(&self) -> &RxxTable<T> {
        &self.r_xx
    }

    /// Unknown count: `α_1..α_M` plus the noise power.
    pub fn dim(&self) -> usize {
        self.max_delay + 1
    }
}

/// Dense taps with `α_0 = 1` prepended.
fn full_taps<T: Real>(alpha: &[T]) -> Vec<T> {
    std::iter::once(T::one())
        .chain(alpha.iter().copied())
        .collect()
}

/// `c_d = Σ_i a_i a_{i+d}`, `d = 0..=M`.
fn tap_autocorrelation<T: Real>(a: &[T]) -> Vec<T> {
    (0..a.len())
        .map(|d| a[d..].iter().zip(a).map(|(&x, &y)| x * y).sum())
        .collect()
}

fn check_dims<T: Real>(alpha: &[T], prob: &IdentificationProblem<T>) {
    assert_eq!(
        alpha.len(),
        prob.max_delay,
        "expected {} taps, got {}",
        prob.max_delay,
        alpha.len()
    );
}

/// Model minus measurement at lags `0..=M`.
pub fn build_residuals<T: Real>(
    alpha: &[T],
    noise_var: T,
    prob: &IdentificationProblem<T>,
) -> Vec<T> {
    check_dims(alpha, prob);
    let m = prob.max_delay;
    let c = tap_autocorrelation(&full_taps(alpha));
    let cd = |d: usize| if d <= m { c[d] } else { T::zero() };
    let rxx = &prob.r_xx;
    (0..=m)
        .map(|k| {
            let mut v = rxx.get(0) * c[k];
            for l in 1..=2 * m {
                v += rxx.get(l as isize) * (cd(k.abs_diff(l)) + cd(k + l));
            }
            if k == 0 {
                v += noise_var;
            }
            v - prob.r_rr.values()[k]
        })
        .collect()
}

/// Exact Jacobian of [`build_residuals`] w.r.t. `(α_1..α_M, R_ww(0))`.
pub fn residual_jacobian<T: Real>(
    alpha: &[T],
    _noise_var: T,
    prob: &IdentificationProblem<T>,
) -> Matrix<T> {
    check_dims(alpha, prob);
    let m = prob.max_delay;
    let a = full_taps(alpha);
    // ∂c_d/∂a_j = a_{j−d} + a_{j+d}
    let dc = |d: usize, j: usize| {
        if d > m {
            return T::zero();
        }
        let lo = if j >= d { a[j - d] } else { T::zero() };
        let hi = if j + d <= m { a[j + d] } else { T::zero() };
        lo + hi
    };
    let rxx = &prob.r_xx;
    let mut jac = Matrix::zeros(m + 1, m + 1);
    for k in 0..=m {
        for j in 1..=m {
            let mut v = rxx.get(0) * dc(k, j);
            for l in 1..=2 * m {
                v += rxx.get(l as isize) * (dc(k.abs_diff(l), j) + dc(k + l, j));
            }
            jac.set(k, j - 1, v);
        }
    }
    jac.set(0, m, T::one());
    jac
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    pub max_iterations: usize,
    /// Residual 2-norm at which the solve counts as converged.
    pub tol: T,
    pub step_tol: T,
    pub initial_damping: T,
}

impl<T: Real> SolverOptions<T> {
    /// Tolerances for noise-free (analytic) ACF input.
    pub fn exact() -> Self {
        Self {
            max_iterations: 200,
            tol: T::lit(1e-10),
            step_tol: T::lit(1e-12),
            initial_damping: T::lit(1e-3),
        }
    }

    /// Tolerances for measured ACFs: `tol = 1e-6 · R_xx(0)`.
    pub fn empirical(rxx0: T) -> Self {
        Self {
            tol: T::lit(1e-6) * rxx0,
            ..Self::exact()
        }
    }
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self::exact()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ResidualTolerance,
    StepTolerance,
    /// Damping grew without finding a descent step.
    Stalled,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult<T> {
    /// `α̂_1..α̂_M`, unclamped.
    pub alpha_hat: Vec<T>,
    pub noise_var_hat: T,
    pub residual_norm: T,
    pub iterations: usize,
    /// Residual norm reached `tol`.
    pub converged: bool,
    pub termination: Termination,
}

/// `α⁰_k = max(0, r_rr[k]/R_xx(0))`, `σ²⁰ = max(0, r_rr[0] − R_xx(0)(1 + Σ α⁰²))`.
pub fn initial_guess<T: Real>(prob: &IdentificationProblem<T>) -> (Vec<T>, T) {
    let r = prob.r_rr.values();
    let r0 = prob.r_xx.get(0);
    let alpha: Vec<T> = r[1..].iter().map(|&v| (v / r0).max(T::zero())).collect();
    let energy: T = alpha.iter().map(|&a| a * a).sum();
    let noise = (r[0] - r0 * (T::one() + energy)).max(T::zero());
    (alpha, noise)
}

/// Levenberg-Marquardt on `(α_1..α_M, R_ww(0))` minimizing the squared
/// residual norm. Always returns the best iterate.
pub fn solve_channel<T: Real>(
    prob: &IdentificationProblem<T>,
    opts: &SolverOptions<T>,
) -> EstimationResult<T> {
    let m = prob.max_delay;
    let (alpha0, noise0) = initial_guess(prob);
    let mut x: Vec<T> = alpha0;
    x.push(noise0);

    let eval = |x: &[T]| build_residuals(&x[..m], x[m], prob);
    let mut r = eval(&x);
    let mut cost = norm2(&r);
    let mut lambda = opts.initial_damping;
    let lambda_max = T::lit(1e16);
    let lambda_min = T::lit(1e-20);
    let mut iterations = 0;
    let mut termination = Termination::MaxIterations;

    while iterations < opts.max_iterations {
        if cost <= opts.tol {
            termination = Termination::ResidualTolerance;
            break;
        }
        iterations += 1;
        let jac = residual_jacobian(&x[..m], x[m], prob);
        let jtj = jac.gram();
        let grad = jac.transpose_mul(&r);
        let neg_grad: Vec<T> = grad.iter().map(|&g| -g).collect();
        let max_diag = (0..=m).map(|i| jtj.get(i, i)).fold(T::zero(), T::max);
        let floor = max_diag * T::lit(1e-12) + T::min_positive_value();

        let mut accepted = false;
        let mut step_norm = T::zero();
        while lambda <= lambda_max {
            let mut damped = jtj.clone();
            for i in 0..=m {
                let d = jtj.get(i, i).max(floor);
                damped.set(i, i, jtj.get(i, i) + lambda * d);
            }
            let Some(step) = cholesky_solve(&damped, &neg_grad) else {
                lambda *= T::lit(10.0);
                continue;
            };
            let trial: Vec<T> = x.iter().zip(&step).map(|(&a, &b)| a + b).collect();
            let r_trial = eval(&trial);
            let cost_trial = norm2(&r_trial);
            if cost_trial.is_finite() && cost_trial < cost {
                step_norm = norm2(&step);
                x = trial;
                r = r_trial;
                cost = cost_trial;
                lambda = (lambda / T::lit(10.0)).max(lambda_min);
                accepted = true;
                break;
            }
            lambda *= T::lit(10.0);
        }
        if !accepted {
            termination = Termination::Stalled;
            break;
        }
        if cost <= opts.tol {
            termination = Termination::ResidualTolerance;
            break;
        }
        if step_norm <= opts.step_tol {
            termination = Termination::StepTolerance;
            break;
        }
    }

    let noise_var_hat = x[m];
    x.truncate(m);
    EstimationResult {
        alpha_hat: x,
        noise_var_hat,
        residual_norm: cost,
        iterations,
        converged: cost <= opts.tol,
        termination,
    }
}

/// Main path `(0, 1)` plus every delay whose `α̂` exceeds `threshold`.
/// Negative estimates are clamped to 0 and so never reported.
pub fn detect_paths<T: Real>(res: &EstimationResult<T>, threshold: T) -> Vec<(usize, T)> {
    std::iter::once((0, T::one()))
        .chain(
            res.alpha_hat
                .iter()
                .enumerate()
                .map(|(i, &a)| (i + 1, a.max(T::zero())))
                .filter(|&(_, a)| a > threshold),
        )
        .collect()
}

/// `(1/D) Σ_d ‖H_d − Ĥ_d‖² / L`.
pub fn mse<T: Real>(
    true_channels: &[Vec<T>],
    estimated: &[Vec<T>],
    path_count: usize,
) -> Result<T> {
    if true_channels.is_empty() {
        return Err(Error::Domain("need at least one trial".into()));
    }
    if true_channels.len() != estimated.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} true channels vs {} estimates",
            true_channels.len(),
            estimated.len()
        )));
    }
    if path_count == 0 {
        return Err(Error::Domain("path_count must be >= 1".into()));
    }
    let mut total = T::zero();
    for (d, (h, h_hat)) in true_channels.iter().zip(estimated).enumerate() {
        if h.len() != h_hat.len() {
            return Err(Error::DimensionMismatch(format!(
                "trial {d}: {} true taps vs {} estimated",
                h.len(),
                h_hat.len()
            )));
        }
        let sq: T = h.iter().zip(h_hat).map(|(&a, &b)| (a - b) * (a - b)).sum();
        total += sq / T::from_usize_lossy(path_count);
    }
    Ok(total / T::from_usize_lossy(true_channels.len()))
}
