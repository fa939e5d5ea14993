use nalgebra::DMatrix;
use proptest::prelude::*;

use physector::extraction::{b_sub, multinomial_variance, sort_levels_by_hint};
use physector::numerics::{min_norm_solve, pseudoinverse, RealMatrix};
use physector::{
    build_decision_observable, decision_statistic, hybrid_pure_state, random_measurement,
    sample_frequencies, DiagonalState, SectorIndexSet,
};

fn matrix(max: usize) -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        (
            Just(r),
            Just(c),
            prop::collection::vec(-10.0f64..10.0, r * c),
        )
    })
}

fn diag_state(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, d).prop_filter_map("zero weight", |w| {
        let s: f64 = w.iter().sum();
        (s > 1e-6).then(|| w.iter().map(|x| x / s).collect())
    })
}

fn rel_close(a: &DMatrix<f64>, b: &DMatrix<f64>, scale: f64, tol: f64) -> bool {
    (a - b).amax() <= tol * scale.max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pseudoinverse_satisfies_penrose((r, c, e) in matrix(64)) {
        let a = RealMatrix::from_row_major(r, c, &e).unwrap();
        let p = pseudoinverse(&a, 0.0).unwrap();
        let (a, p) = (a.as_dmatrix(), p.as_dmatrix());
        let ap = a * p;
        let pa = p * a;
        let scale = a.amax() * p.amax() * (r.max(c) as f64);
        prop_assert!(rel_close(&(&ap * a), a, scale * a.amax(), 1e-9));
        prop_assert!(rel_close(&(&pa * p), p, scale * p.amax(), 1e-9));
        prop_assert!(rel_close(&ap.transpose(), &ap, scale, 1e-9));
        prop_assert!(rel_close(&pa.transpose(), &pa, scale, 1e-9));
    }

    #[test]
    fn min_norm_solves_consistent_systems((r, c, e) in matrix(24), seed in any::<u64>()) {
        let a = RealMatrix::from_row_major(r, c, &e).unwrap();
        let x: Vec<f64> = (0..c).map(|i| ((seed >> (i % 60)) & 7) as f64 - 3.5).collect();
        let b = a.mul_vec(&x).unwrap();
        let s = min_norm_solve(&a, &b, 0.0).unwrap();
        let bmax = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(s.residual_inf <= 1e-9 * bmax.max(1.0) * (c as f64));
        let xs: f64 = x.iter().map(|v| v * v).sum();
        prop_assert!(s.norm_sq <= xs * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn born_probabilities_sum_to_one_and_are_linear(
        d in 1usize..12,
        j in 2usize..20,
        seed in any::<u64>(),
        t in 0.0f64..1.0,
    ) {
        let m = random_measurement(d, j, seed).unwrap();
        prop_assert!(m.validate().is_empty());
        let a: Vec<f64> = (0..d).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
        let b = vec![1.0 / d as f64; d];
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| t * x + (1.0 - t) * y).collect();
        let pa = m.born_probabilities(&DiagonalState::new(a).unwrap()).unwrap();
        let pb = m.born_probabilities(&DiagonalState::new(b).unwrap()).unwrap();
        let pm = m.born_probabilities(&DiagonalState::new(mix).unwrap()).unwrap();
        prop_assert!((pm.total() - 1.0).abs() < 1e-12);
        for k in 0..j {
            let lin = t * pa.0[k] + (1.0 - t) * pb.0[k];
            prop_assert!((pm.0[k] - lin).abs() < 1e-12);
            prop_assert!(pm.0[k] >= 0.0);
        }
    }

    #[test]
    fn b_sub_is_scale_invariant(w in -1.0f64..1.0, var in 1e-8f64..1.0, s in 1e-3f64..1e3) {
        let a = b_sub(w, var, 1e-8);
        let b = b_sub(w * s, var * s * s, 1e-8 * s);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300) + 1e-300);
        prop_assert!((0.0..=2.0).contains(&a));
    }

    #[test]
    fn multinomial_variance_is_shift_invariant(
        y in prop::collection::vec(-5.0f64..5.0, 6),
        w in diag_state(6),
        shift in -3.0f64..3.0,
    ) {
        let shifted: Vec<f64> = y.iter().map(|v| v + shift).collect();
        let a = multinomial_variance(&y, &w, 100);
        let b = multinomial_variance(&shifted, &w, 100);
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a));
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn hybrid_states_are_normalized(t1 in -7.0f64..7.0, t2 in -7.0f64..7.0, t3 in -7.0f64..7.0) {
        let s = hybrid_pure_state(t1, t2, t3);
        let total: f64 = s.diag().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert_eq!(s.n_levels(), 4);
        prop_assert!(s.diag().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn observables_meet_their_targets(d in 1usize..10, extra in 0usize..10, seed in any::<u64>(), k in 0usize..10) {
        let m = random_measurement(d, (d + extra).max(2), seed).unwrap();
        prop_assume!(physector::numerics::rank(m.coefficients(), 0.0) == d);
        let sub = SectorIndexSet::range(k % d + 1);
        let fov = SectorIndexSet::range(d);
        let obs = build_decision_observable(&m, &sub, &fov, 1e-8).unwrap();
        for n in 0..d {
            let got: f64 = (0..m.n_outcomes()).map(|j| obs.y[j] * m.coefficient(j, n)).sum();
            let want = if n <= k % d { 0.0 } else { 1.0 };
            prop_assert!((got - want).abs() < 1e-8);
        }
        let ysq: f64 = obs.y.iter().map(|v| v * v).sum();
        prop_assert!((ysq - obs.sum_y_sq).abs() <= 1e-12 * ysq.max(1.0));
    }

    #[test]
    fn hint_sort_is_a_permutation(h in prop::collection::vec(-1.0f64..1.0, 1..30)) {
        let levels: Vec<usize> = (0..h.len()).collect();
        let order = sort_levels_by_hint(&h, &levels);
        let mut sorted = order.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, levels);
        for pair in order.windows(2) {
            prop_assert!(h[pair[0]] >= h[pair[1]] - 1e-12);
        }
    }

    #[test]
    fn sampled_counts_total_n(d in 1usize..8, j in 2usize..16, seed in any::<u64>(), n in 1u64..100_000) {
        let m = random_measurement(d, j, seed).unwrap();
        let p = m.born_probabilities(&DiagonalState::new(vec![1.0 / d as f64; d]).unwrap()).unwrap();
        let f = sample_frequencies(&p, n, seed).unwrap();
        prop_assert_eq!(f.counts().iter().sum::<u64>(), n);
        let again = sample_frequencies(&p, n, seed).unwrap();
        prop_assert_eq!(f.counts(), again.counts());
    }

    #[test]
    fn true_subspace_has_zero_mean_statistic(d in 2usize..8, seed in any::<u64>()) {
        let m = random_measurement(d, 2 * d, seed).unwrap();
        prop_assume!(physector::numerics::rank(m.coefficients(), 0.0) == d);
        let mut w = vec![0.0; d];
        w[0] = 0.5;
        w[1] = 0.5;
        let p = m.born_probabilities(&DiagonalState::new(w).unwrap()).unwrap();
        let sub = SectorIndexSet::new(vec![0, 1]).unwrap();
        let obs = build_decision_observable(&m, &sub, &SectorIndexSet::range(d), 1e-8).unwrap();
        let mean: f64 = obs.y.iter().zip(&p.0).map(|(y, p)| y * p).sum();
        prop_assert!(mean.abs() < 1e-9);
        let f = sample_frequencies(&p, 1000, seed).unwrap();
        let st = decision_statistic(&obs, &f).unwrap();
        prop_assert!(st.variance >= 0.0 && st.b_sub <= 2.0);
    }
}
