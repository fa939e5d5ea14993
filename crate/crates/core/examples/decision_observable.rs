//! Builds a decision observable by hand, evaluates it on simulated data
//! and asks how many events a given precision needs.
//!
//!     cargo run --release --example decision_observable

use physector::extraction::hoeffding_bound;
use physector::{
    build_decision_observable, decision_statistic, fock_mixture, hoeffding_sample_size,
    random_measurement, sample_frequencies, SectorIndexSet,
};

fn main() -> physector::Result<()> {
    let d = 6;
    let m = random_measurement(d, 12, 17)?;
    let state = fock_mixture(&[(0, 0.7), (3, 0.3)], Some(d))?;
    let p = m.born_probabilities(&state)?;
    let fov = SectorIndexSet::range(d);

    for levels in [vec![0], vec![0, 3], vec![0, 1, 3]] {
        let sub = SectorIndexSet::new(levels)?;
        let obs = build_decision_observable(&m, &sub, &fov, 1e-8)?;
        let f = sample_frequencies(&p, 100_000, 1)?;
        let st = decision_statistic(&obs, &f)?;
        println!(
            "sub {:<10} sum y^2 = {:>8.2}  w = {:>+.5}  B_sub = {:.3e}",
            sub.to_string(),
            obs.sum_y_sq,
            st.w,
            st.b_sub
        );
    }

    let obs = build_decision_observable(&m, &SectorIndexSet::new(vec![0, 3])?, &fov, 1e-8)?;
    for eps in [1e-2, 1e-3] {
        let n = hoeffding_sample_size(eps, 0.05, obs.sum_y_sq)?;
        println!(
            "eps = {eps:e}: N >= {n} events (bound at N: {:.4})",
            hoeffding_bound(eps, n, obs.sum_y_sq)
        );
    }
    Ok(())
}
