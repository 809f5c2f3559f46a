use super::*;
use proptest::prelude::*;

fn mp_identical(n: usize, rtt: f64, a: f64, b: f64, eb: f64) -> ModelParams {
    let ens = FlowEnsemble::aimd(&vec![rtt; n], 0.5);
    ModelParams::from_ensemble(&ens, a, b, eb, 1.0, 0.0)
}

#[test]
fn ensemble_aggregates_single_flow() {
    let ens = FlowEnsemble::aimd(&[0.2], 0.5);
    let (alpha_t, a_t, t_t) = ens.derive();
    assert!((alpha_t - 5.0).abs() < 1e-12);
    assert!((a_t - 25.0).abs() < 1e-12);
    assert!((t_t - 0.2).abs() < 1e-12);
}

#[test]
fn ensemble_aggregates_ten_identical_flows() {
    let ens = FlowEnsemble::aimd(&vec![0.2; 10], 0.5);
    let (alpha_t, a_t, t_t) = ens.derive();
    assert!((alpha_t - 50.0).abs() < 1e-12);
    assert!((a_t - 250.0).abs() < 1e-12);
    assert!((t_t - 0.2).abs() < 1e-12);
    let mp = ModelParams::from_ensemble(&ens, 10.0, 1.0, 1500.0, 1.0, 0.0);
    assert!((mp.rtt_ratio() - 1.0).abs() < 1e-12);
}

#[test]
fn lambda_e_vanishes_for_default_gains_single_flow() {
    // a=10, b=1, alpha_T=5, beta_T=0.5, identical RTTs: (5 - 5)/6 = 0.
    let mp = mp_identical(1, 0.2, 10.0, 1.0, 1500.0);
    let (lambda_e, lambda_f, gamma_e) = lambda_gamma(&mp);
    assert!(lambda_e.abs() < 1e-12);
    assert!((lambda_f - 5.0 / 6.0).abs() < 1e-12);
    assert!((gamma_e - 10.0 * 0.5 / 6.0).abs() < 1e-12);
}

#[test]
fn lambda_f_tends_to_one_as_delta_tends_to_one() {
    let mut mp = mp_identical(1, 0.2, 10.0, 1.0, 1500.0);
    mp.delta = 1.0 - 1e-9;
    let (_, lambda_f, _) = lambda_gamma(&mp);
    assert!(lambda_f < 1.0 && lambda_f > 1.0 - 1e-9);
}

#[test]
fn stability_examples() {
    let stable = is_stable(&mp_identical(1, 0.2, 10.0, 1.0, 1500.0));
    assert!(stable.stable && stable.practical);
    assert!((stable.margin - 1.0).abs() < 1e-12);

    let unstable = is_stable(&mp_identical(1, 0.2, 100.0, 1.0, 1500.0));
    assert!(!unstable.stable && !unstable.practical);
    assert!((unstable.margin + 89.0).abs() < 1e-12);

    // Boundary: a exactly 2*alpha_T + b is not stable by the strict test.
    let boundary = is_stable(&mp_identical(1, 0.2, 11.0, 1.0, 1500.0));
    assert!(!boundary.stable);
    assert_eq!(boundary.margin, 0.0);
}

#[test]
fn fixed_point_examples() {
    // b/a = 0 with beta 0.5 gives exactly the BDP.
    let mut mp = mp_identical(1, 0.2, 10.0, 0.0, 1500.0);
    mp.b = 0.0;
    let fp = fixed_point(&mp).unwrap();
    assert!((fp - 1500.0 * 0.2).abs() < 1e-9);

    // beta 0.5, b/a 0.1, E[B] 1500 pkt/s, T_T 0.2 s: (0.5/0.6)*300 = 250.
    let mp = mp_identical(1, 0.2, 10.0, 1.0, 1500.0);
    let fp = fixed_point(&mp).unwrap();
    assert!((fp - 250.0).abs() < 1e-9);

    // beta 1 (no flow ever backs off): no sawtooth, zero buffer needed.
    let ens = FlowEnsemble::aimd(&[0.2], 1.0);
    let mp = ModelParams::from_ensemble(&ens, 10.0, 1.0, 1500.0, 1.0, 0.0);
    assert!((fixed_point(&mp).unwrap() - 0.0).abs() < 1e-12);

    // b/a + beta_T = 0 is rejected.
    let mut degenerate = mp_identical(1, 0.2, 10.0, 0.0, 1500.0);
    degenerate.b = 0.0;
    degenerate.beta_t = 0.0;
    assert!(fixed_point(&degenerate).is_err());
}

#[test]
fn fixed_point_monotone_in_gain_ratio_and_beta() {
    let base = mp_identical(1, 0.2, 10.0, 1.0, 1500.0);
    let mut prev = f64::INFINITY;
    for b in [0.0, 0.5, 1.0, 2.0, 5.0] {
        let mut mp = base;
        mp.b = b;
        let fp = fixed_point(&mp).unwrap();
        assert!(fp < prev || b == 0.0 && fp <= prev);
        prev = fp;
    }
    let mut prev = f64::INFINITY;
    for beta in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let mut mp = base;
        mp.beta_t = beta;
        let fp = fixed_point(&mp).unwrap();
        assert!(fp < prev);
        prev = fp;
    }
}

#[test]
fn utilization_bound_examples() {
    let mp = mp_identical(1, 0.2, 10.0, 1.0, 1500.0);
    let (tight, loose) = utilization_bounds(&mp);
    assert!((tight - 1.0 / 1.1).abs() < 1e-12);
    assert!((loose - 1.0 / 1.1).abs() < 1e-12);

    let mut free = mp;
    free.b = 0.0;
    assert_eq!(utilization_bounds(&free), (1.0, 1.0));
}

#[test]
fn trajectory_converges_to_fixed_point_in_drain_regime() {
    // p_e = 1, delta = 0, identical RTTs: the affine recursion's limit is
    // the closed-form fixed point, from any starting buffer.
    let mp = mp_identical(1, 0.2, 10.0, 1.0, 1500.0);
    let fp = fixed_point(&mp).unwrap();
    for q0 in [0.0, 10.0, 250.0, 5000.0] {
        let traj = recursion_trajectory(&mp, q0, 200);
        let last = *traj.last().unwrap();
        assert!((last - fp).abs() < 1e-6 * fp.max(1.0), "q0 {q0}: {last} vs {fp}");
    }
}

#[test]
fn trajectory_with_zero_lambda_converges_in_one_step() {
    let mp = mp_identical(1, 0.2, 10.0, 1.0, 1500.0);
    let (lambda_e, _, gamma_e) = lambda_gamma(&mp);
    assert!(lambda_e.abs() < 1e-12);
    let traj = recursion_trajectory(&mp, 1000.0, 3);
    let expect = gamma_e * 1500.0 * 0.2;
    assert!((traj[1] - expect).abs() < 1e-9);
    assert!((traj[2] - expect).abs() < 1e-9);
}

#[test]
fn trajectory_stationary_at_fixed_point() {
    let mp = mp_identical(2, 0.15, 10.0, 1.0, 1200.0);
    let fp = fixed_point(&mp).unwrap();
    let traj = recursion_trajectory(&mp, fp, 20);
    for q in traj {
        assert!((q - fp).abs() < 1e-9);
    }
}

#[test]
fn trajectory_error_decays_geometrically_at_rate_lambda() {
    // Use gains with a non-zero multiplier so the rate is observable.
    let mut mp = mp_identical(1, 0.2, 4.0, 1.0, 1500.0);
    mp.p_e = 1.0;
    let (lambda_e, _, _) = lambda_gamma(&mp);
    assert!(lambda_e.abs() > 0.05 && lambda_e.abs() < 1.0);
    let fp_limit = {
        let t = recursion_trajectory(&mp, 100.0, 500);
        *t.last().unwrap()
    };
    let traj = recursion_trajectory(&mp, 100.0, 30);
    for k in 5..25 {
        let e0 = (traj[k] - fp_limit).abs();
        let e1 = (traj[k + 1] - fp_limit).abs();
        if e0 > 1e-9 {
            assert!(
                (e1 / e0 - lambda_e.abs()).abs() < 1e-6,
                "rate at k={k}: {} vs lambda {}",
                e1 / e0,
                lambda_e.abs()
            );
        }
    }
}

#[test]
fn oracle_synchronized_single_flow_equals_deterministic_recursion() {
    let ens = FlowEnsemble::aimd(&[0.2], 0.5);
    let mp = ModelParams::from_ensemble(&ens, 10.0, 1.0, 1500.0, 1.0, 0.0);
    let mut rng = RngStream::new(3, 0);
    let path = epoch_oracle(&ens, &mp, 100.0, 60, 1.0, &mut rng);
    let traj = recursion_trajectory(&mp, 100.0, 60);
    // With full participation and beta small enough to always drain the
    // queue, the sample path is deterministic and equals the recursion.
    assert_eq!(path.p_e_hat, 1.0);
    for (a, b) in path.q.iter().zip(&traj) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn oracle_mean_matches_trajectory_with_matching_branch_stats() {
    // Two unsynchronized flows; gains chosen so every event drains the
    // queue regardless of which subset backs off, making the averaged
    // recursion exact and the comparison a pure Monte-Carlo check.
    let ens = FlowEnsemble::aimd(&[0.2, 0.2], 0.5);
    let mut mp = ModelParams::from_ensemble(&ens, 10.0, 8.0, 1500.0, 1.0, 0.0);
    let paths = 10_000;
    let k_max = 120;
    let mut mean_q = vec![0.0; k_max + 1];
    let mut p_e_sum = 0.0;
    let mut delta_sum = 0.0;
    let mut beta_sum = 0.0;
    let mut rng = RngStream::new(17, 0);
    let mut beta_rng = RngStream::new(17, 99);
    for _ in 0..paths {
        let path = epoch_oracle(&ens, &mp, 40.0, k_max, 0.7, &mut rng);
        for (m, q) in mean_q.iter_mut().zip(&path.q) {
            *m += q / paths as f64;
        }
        p_e_sum += path.p_e_hat;
        delta_sum += path.delta_hat;
    }
    // Empirical mean of beta_T under the participation rule (resampling
    // when no flow participates), estimated independently.
    let draws = 200_000;
    for _ in 0..draws {
        let who = loop {
            let w = [beta_rng.chance(0.7), beta_rng.chance(0.7)];
            if w[0] || w[1] {
                break w;
            }
        };
        beta_sum += ens.aggregate_beta(&who);
    }
    mp.beta_t = beta_sum / draws as f64;
    mp.p_e = p_e_sum / paths as f64;
    mp.delta = delta_sum / paths as f64;
    assert!(mp.p_e > 0.999, "drain regime expected, p_e = {}", mp.p_e);

    let traj = recursion_trajectory(&mp, 40.0, k_max);
    let tail_mc: f64 = mean_q[k_max - 20..].iter().sum::<f64>() / 21.0;
    let tail_an: f64 = traj[k_max - 20..].iter().sum::<f64>() / 21.0;
    let gap = (tail_mc - tail_an).abs() / tail_an;
    assert!(gap < 0.02, "oracle {tail_mc} vs recursion {tail_an}: gap {gap}");
    // Mid-trajectory agreement too.
    let gap_mid = (mean_q[20] - traj[20]).abs() / traj[20];
    assert!(gap_mid < 0.02, "k=20: {} vs {}", mean_q[20], traj[20]);
}

#[test]
fn oracle_oscillates_without_settling_when_unstable() {
    let ens = FlowEnsemble::aimd(&[0.2], 0.5);
    let mp = ModelParams::from_ensemble(&ens, 100.0, 1.0, 1500.0, 1.0, 0.0);
    assert!(!is_stable(&mp).stable);
    let mut rng = RngStream::new(23, 0);
    let path = epoch_oracle(&ens, &mp, 400.0, 400, 1.0, &mut rng);
    let tail = &path.q[200..];
    let mean: f64 = tail.iter().sum::<f64>() / tail.len() as f64;
    let var: f64 = tail.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / tail.len() as f64;
    let cov = var.sqrt() / mean;
    assert!(cov > 0.2, "expected sustained oscillation, CoV {cov}");
    // And bounded: the clipping keeps the path finite.
    assert!(tail.iter().all(|q| q.is_finite() && *q >= 0.0));
}

#[test]
fn rtt_spread_approximation_gap_stays_small_for_2x_spread() {
    // The harmonic-mean substitution used to fold per-flow terms into
    // 1/T_T: with equal windows and RTT spread up to 2x the relative gap
    // of sum(w/(T_i + Q/E[B]) * 1/T_i) vs (1/T_T) sum(w/(T_i + Q/E[B]))
    // stays within a few percent.
    let mut rng = RngStream::new(7, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let n = 2 + rng.below(8) as usize;
        let base = 0.05 + 0.2 * rng.unit();
        let rtts: Vec<f64> = (0..n).map(|_| base * (1.0 + rng.unit())).collect();
        let t_t = n as f64 / rtts.iter().map(|t| 1.0 / t).sum::<f64>();
        let q_over_eb = 0.1 * rng.unit();
        let exact: f64 = rtts.iter().map(|t| 1.0 / (t + q_over_eb) / t).sum();
        let approx: f64 = rtts.iter().map(|t| 1.0 / (t + q_over_eb)).sum::<f64>() / t_t;
        worst = worst.max((exact - approx).abs() / exact);
    }
    assert!(worst < 0.09, "worst relative gap {worst}");
}

proptest! {
    #[test]
    fn lambda_f_strictly_inside_unit_interval_when_b_positive(
        alpha_t in 0.1f64..500.0,
        b in 1e-6f64..100.0,
        delta in 0.0f64..0.999_999,
    ) {
        let mp = ModelParams {
            a: 10.0, b, service_rate: 1000.0,
            alpha_t, a_t: alpha_t * 5.0, t_t: 0.2,
            beta_t: 0.5, delta, p_e: 0.0,
        };
        let (_, lambda_f, _) = lambda_gamma(&mp);
        prop_assert!(lambda_f > 0.0 && lambda_f < 1.0);
    }

    #[test]
    fn tight_bound_dominates_loose_bound(
        rtts in prop::collection::vec(0.01f64..1.0, 1..12),
        b_over_a in 0.0f64..2.0,
    ) {
        let ens = FlowEnsemble::aimd(&rtts, 0.5);
        let mp = ModelParams::from_ensemble(&ens, 10.0, 10.0 * b_over_a, 1000.0, 1.0, 0.0);
        let (tight, loose) = utilization_bounds(&mp);
        prop_assert!(tight >= loose - 1e-12);
        prop_assert!(loose > 0.0 && tight <= 1.0 + 1e-12);
    }

    #[test]
    fn rtt_ratio_within_unit_interval_over_n(
        rtts in prop::collection::vec(0.01f64..1.0, 1..12),
    ) {
        let ens = FlowEnsemble::aimd(&rtts, 0.5);
        let mp = ModelParams::from_ensemble(&ens, 10.0, 1.0, 1000.0, 1.0, 0.0);
        let r = mp.rtt_ratio();
        let n = rtts.len() as f64;
        prop_assert!(r <= 1.0 + 1e-9);
        prop_assert!(r >= 1.0 / n - 1e-9);
    }

    #[test]
    fn lambda_is_convex_combination(
        p_e in 0.0f64..1.0,
        beta_t in 0.5f64..1.0,
        delta in 0.0f64..0.999,
    ) {
        let mp = ModelParams {
            a: 10.0, b: 1.0, service_rate: 1000.0,
            alpha_t: 5.0, a_t: 25.0, t_t: 0.2,
            beta_t, delta, p_e,
        };
        let (le, lf, _) = lambda_gamma(&mp);
        let lambda = p_e * le + (1.0 - p_e) * lf;
        prop_assert!(lambda >= le.min(lf) - 1e-12 && lambda <= le.max(lf) + 1e-12);
    }
}
