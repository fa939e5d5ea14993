//! A mixture of three far-apart Fock states. The hint ordering finds the
//! occupied levels first, so the search stops after three steps instead of
//! walking up to level 23.
//!
//!     cargo run --release --example fock_mixture_sector

use physector::campaign::{generate, psep_config, Demo};
use physector::{run_psep, BasisOrder};

fn main() -> physector::Result<()> {
    let config = Demo::Mixture.config();
    let data = generate(&config)?;

    for order in [BasisOrder::Hint, BasisOrder::Default] {
        let mut psep = psep_config(&config);
        psep.order = order;
        let report = run_psep(&data.sets, &data.data, &psep)?;
        println!(
            "{order:?} order: {} steps, sector {} ({:?})",
            report.steps.len(),
            report.extracted_sector,
            report.status
        );
    }

    let report = run_psep(&data.sets, &data.data, &psep_config(&config))?;
    let top: Vec<String> = report.sorted_order[..5]
        .iter()
        .map(|&l| format!("{l}:{:.3}", report.hint[l]))
        .collect();
    println!("largest hint entries: {}", top.join(" "));
    Ok(())
}
