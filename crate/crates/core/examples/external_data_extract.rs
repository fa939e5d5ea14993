//! One large measurement sampled once, written to disk, read back and
//! analyzed through random 60-outcome subsets, as one would with counts
//! from an experiment.
//!
//!     cargo run --release --example external_data_extract [dir]

use std::path::PathBuf;

use physector::campaign::subset_sets;
use physector::{
    fock_mixture, random_measurement, run_psep, sample_frequencies, CommutingMeasurement,
    FrequencyRecord, PsepConfig,
};

fn main() -> physector::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&dir)?;
    let (mpath, cpath) = (dir.join("measurement.json"), dir.join("counts.json"));

    let state = fock_mixture(&[(1, 0.6), (2, 0.3), (5, 0.1)], Some(12))?;
    let m = random_measurement(12, 256, 7)?;
    let f = sample_frequencies(&m.born_probabilities(&state)?, 9_600_000, 8)?;
    std::fs::write(&mpath, m.to_json()?)?;
    std::fs::write(&cpath, f.to_json()?)?;
    println!("wrote {} and {}", mpath.display(), cpath.display());

    let m = CommutingMeasurement::load(&mpath)?;
    let f = FrequencyRecord::load(&cpath)?;
    let (sets, data) = subset_sets(&m, &f, 50, 60, 1)?;
    let report = run_psep(&sets, &data, &PsepConfig::new(0.05))?;
    print!("{}", report.to_csv()?);
    println!("sector {} ({:?})", report.extracted_sector, report.status);
    Ok(())
}
