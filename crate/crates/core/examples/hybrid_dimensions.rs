//! Four-level states set by three wave-plate angles, measured in the basis
//! and by 100 random eight-outcome sets.
//!
//!     cargo run --release --example hybrid_dimensions

use physector::campaign::{run_campaign, Demo};

fn main() -> physector::Result<()> {
    for demo in [Demo::HybridQubit, Demo::HybridQutrit, Demo::HybridQuquart] {
        let config = demo.config();
        let (data, report) = run_campaign(&config)?;
        let diag: Vec<String> = data
            .state
            .diag()
            .iter()
            .map(|p| format!("{p:.3}"))
            .collect();
        println!(
            "{:<15} diag [{}] -> sector {} (d_phys = {}, {:?})",
            demo.name(),
            diag.join(", "),
            report.extracted_sector,
            report.d_phys,
            report.status
        );
    }
    Ok(())
}
