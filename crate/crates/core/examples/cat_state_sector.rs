//! Extracts the sector of an even cat state from 200 simulated measurement
//! sets and prints every step of the search.
//!
//!     cargo run --release --example cat_state_sector [n_events]

use physector::campaign::{run_campaign, Demo};

fn main() -> physector::Result<()> {
    let mut config = Demo::Cat.config();
    if let Some(n) = std::env::args().nth(1) {
        config.n_events = physector::cli::parse_count(&n).map_err(physector::Error::Parse)?;
    }
    let (data, report) = run_campaign(&config)?;

    println!(
        "state: even cat, truncated at {} levels (discarded mass {:.1e})",
        config.fov_dim,
        data.state.truncation_mass()
    );
    println!("sorted levels: {:?}", &report.sorted_order[..6]);
    println!(
        "{:>3} {:>14} {:>12} {:>12}",
        "k", "subspace", "mean B_sub", "std B_sub"
    );
    for s in &report.steps {
        println!(
            "{:>3} {:>14} {:>12.4e} {:>12.4e}",
            s.k,
            s.subspace.to_string(),
            s.mean_b_sub,
            s.std_b_sub
        );
    }
    println!(
        "sector {} with d_phys = {} at alpha = {}",
        report.extracted_sector, report.d_phys, report.alpha
    );
    Ok(())
}
