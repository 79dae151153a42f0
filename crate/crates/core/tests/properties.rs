use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

use hdbandit::interpolate::{fit_min_norm, DesignData};
use hdbandit::policies::{round_robin_arm, ArmHistory};
use hdbandit::rng::{stream, Stream};
use hdbandit::spectrum::{
    coherent_rank, decay_rate, effective_ranks, empirical_top_eigs, empirical_trace,
    stop_condition, BenignFamily, EigenSequence, PlugInStats, SpectralEstimate,
};

fn gaussian(seed: u64, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut rng = stream(seed, Stream::Contexts);
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// `(N, p, seed)` with `p >= 2N`, so the design has full row rank.
fn wide_design() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..=20).prop_flat_map(|n| (Just(n), 2 * n..=60, any::<u64>()))
}

fn spectrum() -> impl Strategy<Value = EigenSequence> {
    prop::collection::vec(1e-3f64..100.0, 1..80)
        .prop_map(|v| EigenSequence::from_unsorted(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn min_norm_interpolates_and_is_shortest((n, p, seed) in wide_design()) {
        let x = gaussian(seed, n, p);
        let y = gaussian(seed ^ 1, n, 1).column(0).into_owned();
        let theta = fit_min_norm(&DesignData::new(x.clone(), y.clone()).unwrap()).unwrap().theta_hat;
        let scale = y.amax().max(1.0);
        prop_assert!((&x * &theta - &y).amax() / scale <= 1e-8);

        let pinv = x.clone().pseudo_inverse(1e-12).unwrap();
        prop_assert!((&theta - &pinv * &y).amax() <= 1e-8);
        for j in 0..20 {
            let z = gaussian(seed.wrapping_add(j + 2), p, 1).column(0).into_owned();
            let v = &z - &pinv * (&x * &z);
            prop_assert!((&theta + v).norm() >= theta.norm() - 1e-8);
        }
    }

    #[test]
    fn rank_ordering_and_definition(eigs in spectrum()) {
        let v = eigs.values();
        for k in 0..v.len() {
            let rp = effective_ranks(&eigs, k).unwrap();
            let tail = &v[k..];
            let sum: f64 = tail.iter().sum();
            let sum_sq: f64 = tail.iter().map(|x| x * x).sum();
            prop_assert!((rp.r - sum / tail[0]).abs() <= 1e-9 * rp.r);
            prop_assert!((rp.big_r - sum * sum / sum_sq).abs() <= 1e-9 * rp.big_r);
            prop_assert!(rp.r >= 1.0 - 1e-12 && rp.r <= rp.big_r * (1.0 + 1e-12));
        }
    }

    #[test]
    fn coherent_rank_is_minimal_and_monotone(eigs in spectrum()) {
        let len = eigs.len();
        let mut previous = 0usize;
        for n in 1..=len + 3 {
            let k = coherent_rank(&eigs, n);
            let key = k.unwrap_or(usize::MAX);
            prop_assert!(key >= previous);
            previous = key;
            if let Some(k) = k {
                prop_assert!(effective_ranks(&eigs, k).unwrap().r >= n as f64);
                for j in 0..k {
                    prop_assert!(effective_ranks(&eigs, j).unwrap().r < n as f64);
                }
            }
        }
    }

    #[test]
    fn stop_condition_never_flips_back(
        trace in 0.1f64..50.0,
        b in 0.0f64..1.0,
        v in 0.0f64..1.0,
        c_t in 0.1f64..4.0,
        arms in 1usize..5,
        horizon in 10usize..5000,
    ) {
        let est = SpectralEstimate {
            n: 1,
            trace_hat: trace,
            top_eigs: vec![1.0],
            beta_hat: 1.0,
            lambda1_hat: 1.0,
            tail_cap: 100,
            plug_in: Some(PlugInStats { k_hat: 1, b_hat: b, v_hat: v }),
        };
        let per_arm = vec![est; arms];
        let mut stopped = false;
        for n in 1..=horizon / arms {
            let now = stop_condition(n, arms, horizon, c_t, &per_arm);
            prop_assert!(!(stopped && !now), "flipped back at N = {}", n);
            stopped |= now;
        }
    }

    #[test]
    fn optimal_exploration_is_minimal(
        a in 0.05f64..0.95,
        horizon in 10usize..20_000,
        arms in 1usize..10,
    ) {
        prop_assume!(horizon >= arms);
        let family = BenignFamily::Example1 { a };
        if let Ok(n) = family.optimal_exploration(horizon, arms) {
            prop_assert!(family.exploration_sufficient(n, horizon, arms));
            prop_assert!(n == 1 || !family.exploration_sufficient(n - 1, horizon, arms));
        } else {
            prop_assert!(!family.exploration_sufficient(horizon / arms, horizon, arms));
        }
    }

    #[test]
    fn gram_eigenvalues_match_covariance(n in 1usize..=20, p in 1usize..=20, seed in any::<u64>()) {
        let x = gaussian(seed, n, p);
        let cov = x.transpose() * &x / n as f64;
        let mut direct: Vec<f64> = cov.symmetric_eigenvalues().iter().copied().collect();
        direct.sort_by(|a, b| b.total_cmp(a));
        let m = n.min(p);
        let top = empirical_top_eigs(&x, m).unwrap();
        for (a, b) in top.iter().zip(&direct) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
        let tr = empirical_trace(&x).unwrap();
        prop_assert!((tr - cov.trace()).abs() <= 1e-10 * cov.trace().max(1e-300));
    }

    #[test]
    fn gram_eigenvalues_invariant_under_rotation(n in 2usize..=15, p in 2usize..=15, seed in any::<u64>()) {
        let x = gaussian(seed, n, p);
        let q = gaussian(seed ^ 7, p, p).qr().q();
        let m = n.min(p);
        let before = empirical_top_eigs(&x, m).unwrap();
        let after = empirical_top_eigs(&(&x * q), m).unwrap();
        for (a, b) in before.iter().zip(&after) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn decay_rate_scale_invariant(beta in 0.1f64..3.0, scale in 1e-3f64..1e3, tau in 1usize..12) {
        let eigs: Vec<f64> = (1..=tau + 1).map(|k| (k as f64).powf(-beta)).collect();
        let scaled: Vec<f64> = eigs.iter().map(|v| v * scale).collect();
        let exact = decay_rate(&eigs, tau).unwrap();
        prop_assert!((exact - beta).abs() <= 1e-9);
        prop_assert!((decay_rate(&scaled, tau).unwrap() - exact).abs() <= 1e-9);
    }

    #[test]
    fn round_robin_counts_stay_balanced(arms in 1usize..8, rounds in 1usize..200) {
        let mut history = ArmHistory::new(arms, 1);
        let x = DVector::from_element(1, 1.0);
        for t in 1..=rounds {
            history.push(round_robin_arm(t, arms), &x, 0.0).unwrap();
            let counts = history.counts();
            let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            prop_assert!(hi - lo <= 1);
            prop_assert_eq!(counts.iter().sum::<usize>(), t);
        }
    }
}
