use csf_core::{
    apply_multipath, base_pulse, build_residuals, encode_waveform, predicted_rx_acf,
    random_symbols, residual_jacobian, sample_random_channel, solve_channel, theoretical_acf,
    ChannelModel, CsfParams64, IdentificationProblem, SolverOptions, Waveform,
};
use proptest::prelude::*;

fn params() -> CsfParams64 {
    CsfParams64::default()
}

/// Trapezoidal `∫ p(ξ + η) p(ξ) dξ` on a uniform grid aligned with the integers.
fn trapezoid_acf(lag: f64, per_unit: usize) -> f64 {
    let p = params();
    let lo = -45.0f64;
    let n = (46.0 * per_unit as f64) as usize;
    let h = 1.0 / per_unit as f64;
    let f = |x: f64| base_pulse(x + lag, &p).unwrap() * base_pulse(x, &p).unwrap();
    let mut s = 0.5 * (f(lo) + f(lo + n as f64 * h));
    for i in 1..n {
        s += f(lo + i as f64 * h);
    }
    s * h
}

#[test]
fn closed_form_matches_trapezoid_oracle() {
    let p = params();
    for k in 0..=10 {
        let oracle = trapezoid_acf(k as f64, 512);
        let closed = theoretical_acf(k as f64, &p);
        assert!(
            (closed - oracle).abs() <= 1e-5 * oracle.abs().max(1e-3),
            "lag {k}: closed {closed} oracle {oracle}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pulse_support_and_tail(t in 0.0f64..60.0) {
        let p = params();
        prop_assert_eq!(base_pulse(1.0 + t, &p).unwrap(), 0.0);
        if t > 0.0 {
            let env = p.tail_envelope() * (-p.beta() * t).exp();
            prop_assert!(base_pulse(-t, &p).unwrap().abs() <= env * (1.0 + 1e-12));
        }
    }

    #[test]
    fn closed_form_is_even(eta in -12.0f64..12.0) {
        let p = params();
        prop_assert_eq!(theoretical_acf(eta, &p), theoretical_acf(-eta, &p));
    }

    #[test]
    fn multipath_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let p = params();
        let x = encode_waveform(&random_symbols(64, seed).unwrap(), &p);
        let y = encode_waveform(&random_symbols(64, seed ^ 1).unwrap(), &p);
        let ch = sample_random_channel(6, (0.3, 0.9), 4, seed).unwrap();
        let mix: Vec<f64> = x.samples().iter().zip(y.samples()).map(|(u, v)| a * u + b * v).collect();
        let mix = Waveform::new(mix, 16, x.t0()).unwrap();
        let lhs = apply_multipath(&mix, &ch).unwrap();
        let hx = apply_multipath(&x, &ch).unwrap();
        let hy = apply_multipath(&y, &ch).unwrap();
        for ((l, u), v) in lhs.samples().iter().zip(hx.samples()).zip(hy.samples()) {
            prop_assert!((l - (a * u + b * v)).abs() <= 1e-12 * (1.0 + l.abs()));
        }
    }

    #[test]
    fn jacobian_matches_central_differences(
        m in 1usize..=10,
        raw in prop::collection::vec(-0.3f64..1.0, 10),
        noise_var in 0.0f64..0.5,
        seed in any::<u64>(),
    ) {
        let p = params();
        let ch = sample_random_channel(m, (0.3, 0.9), (m + 1).min(6), seed).unwrap();
        let prob = IdentificationProblem::new(predicted_rx_acf(&ch, 0.1, &p, m).unwrap(), &p);
        let alpha = &raw[..m];
        let jac = residual_jacobian(alpha, noise_var, &prob);
        let h = 1e-6;
        for j in 0..=m {
            let mut plus: Vec<f64> = alpha.to_vec();
            let mut minus = plus.clone();
            let (np, nm) = if j < m {
                plus[j] += h;
                minus[j] -= h;
                (noise_var, noise_var)
            } else {
                (noise_var + h, noise_var - h)
            };
            let rp = build_residuals(&plus, np, &prob);
            let rm = build_residuals(&minus, nm, &prob);
            for k in 0..=m {
                let fd = (rp[k] - rm[k]) / (2.0 * h);
                let an = jac.get(k, j);
                prop_assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0), "k {} j {} fd {} an {}", k, j, fd, an);
            }
        }
    }

    #[test]
    fn exact_round_trip(
        m in 1usize..=10,
        paths in 1usize..=6,
        noise_var in 0.0f64..0.5,
        seed in any::<u64>(),
    ) {
        let p = params();
        let ch = sample_random_channel(m, (0.3, 0.9), paths.min(m + 1), seed).unwrap();
        let prob = IdentificationProblem::new(predicted_rx_acf(&ch, noise_var, &p, m).unwrap(), &p);
        let res = solve_channel(&prob, &SolverOptions::exact());
        prop_assert!(res.converged, "{:?}", res);
        for (a, b) in res.alpha_hat.iter().zip(ch.secondary_taps()) {
            prop_assert!((a - b).abs() <= 1e-6);
        }
        prop_assert!((res.noise_var_hat - noise_var).abs() <= 1e-6);
    }

    #[test]
    fn lag_zero_perturbation_moves_only_noise(delta in 0.0f64..0.3, seed in any::<u64>()) {
        let p = params();
        let ch = sample_random_channel(8, (0.3, 0.9), 5, seed).unwrap();
        let base = predicted_rx_acf(&ch, 0.1, &p, 8).unwrap();
        let mut bumped = base.values().to_vec();
        bumped[0] += delta;
        let bumped = csf_core::AcfEstimate::new(bumped, 0).unwrap();
        let a = solve_channel(&IdentificationProblem::new(base, &p), &SolverOptions::exact());
        let b = solve_channel(&IdentificationProblem::new(bumped, &p), &SolverOptions::exact());
        prop_assert!(a.converged && b.converged);
        for (x, y) in a.alpha_hat.iter().zip(&b.alpha_hat) {
            prop_assert!((x - y).abs() <= 1e-8);
        }
        prop_assert!((b.noise_var_hat - a.noise_var_hat - delta).abs() <= 1e-8);
    }
}

#[test]
fn empirical_noiseless_inversion() {
    let p = params();
    let ch = ChannelModel::exponential(0.6, &[2, 7], 10).unwrap();
    let x = encode_waveform(&random_symbols(1 << 15, 77).unwrap(), &p);
    let y = apply_multipath(&x, &ch).unwrap();
    let r_rr = csf_core::empirical_acf(&y, 10).unwrap();
    let prob = IdentificationProblem::new(r_rr, &p);
    let res = solve_channel(&prob, &SolverOptions::empirical(theoretical_acf(0.0, &p)));
    let err = res
        .alpha_hat
        .iter()
        .zip(ch.secondary_taps())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err <= 0.05, "max tap error {err}");
}

#[test]
fn symbol_independence_of_acf() {
    let p = params();
    let a = csf_core::empirical_acf(
        &encode_waveform(&random_symbols(1 << 16, 1).unwrap(), &p),
        10,
    )
    .unwrap();
    let b = csf_core::empirical_acf(
        &encode_waveform(&random_symbols(1 << 16, 2).unwrap(), &p),
        10,
    )
    .unwrap();
    assert!(a.max_abs_diff(&b) < 0.03);
}
