//! Compares the empirical tail of the decision statistic with its
//! Hoeffding bound for the vacuum state.
//!
//!     cargo run --release --example hoeffding_coverage

use physector::extraction::hoeffding_bound;
use physector::{
    build_decision_observable, decision_statistic, fock_mixture, random_measurement,
    sample_frequencies, SectorIndexSet,
};

fn main() -> physector::Result<()> {
    let m = random_measurement(6, 10, 4)?;
    let p = m.born_probabilities(&fock_mixture(&[(0, 1.0)], Some(6))?)?;
    let obs = build_decision_observable(
        &m,
        &SectorIndexSet::new(vec![0])?,
        &SectorIndexSet::range(6),
        1e-8,
    )?;
    let (n, trials) = (1000, 10_000);
    let ws = (0..trials)
        .map(|t| Ok(decision_statistic(&obs, &sample_frequencies(&p, n, t)?)?.w))
        .collect::<physector::Result<Vec<f64>>>()?;

    let eps_max = (2.0 * obs.sum_y_sq * 2000f64.ln() / n as f64).sqrt();
    println!("{:>10} {:>12} {:>12}", "eps", "empirical", "bound");
    for i in 1..=10 {
        let eps = eps_max * i as f64 / 10.0;
        let q = ws.iter().filter(|w| w.abs() >= eps).count() as f64 / trials as f64;
        println!(
            "{eps:>10.4} {q:>12.4} {:>12.4}",
            hoeffding_bound(eps, n, obs.sum_y_sq)
        );
    }
    Ok(())
}
