//! Finite-statistics frequency data via multinomial sampling.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{check_outcome_indices, ProbabilityVector};

const PROB_TOL: f64 = 1e-12;

/// Outcome counts from `n_events` detection events and the relative
/// frequencies f_j = counts_j / N.
///
/// Events that fell outside the recorded outcomes (no click, or outcomes
/// not in a measured subset) count toward N but not toward any f_j.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRecord {
    counts: Vec<u64>,
    n_events: u64,
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct FrequencyRecordFile {
    n_events: u64,
    #[serde(default = "unknown_seed")]
    seed: i128,
    counts: Vec<i64>,
}

fn unknown_seed() -> i128 {
    -1
}

impl FrequencyRecord {
    pub fn from_counts(counts: Vec<u64>, n_events: u64, seed: Option<u64>) -> Result<Self> {
        if n_events == 0 {
            return Err(Error::InvalidArgument(
                "record needs at least one event".into(),
            ));
        }
        if counts.is_empty() {
            return Err(Error::Shape("record has no outcomes".into()));
        }
        let total = counts.iter().try_fold(0u64, |acc, &c| acc.checked_add(c));
        match total {
            Some(t) if t <= n_events => {}
            _ => {
                return Err(Error::InvalidProbability(format!(
                    "counts exceed the {n_events} recorded events"
                )))
            }
        }
        Ok(Self {
            counts,
            n_events,
            seed,
        })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_events(&self) -> u64 {
        self.n_events
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn n_outcomes(&self) -> usize {
        self.counts.len()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.n_events as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Counts of the listed outcomes; N is unchanged.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        check_outcome_indices(indices, self.counts.len())?;
        Ok(Self {
            counts: indices.iter().map(|&i| self.counts[i]).collect(),
            n_events: self.n_events,
            seed: self.seed,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&FrequencyRecordFile {
            n_events: self.n_events,
            seed: self.seed.map_or(-1, i128::from),
            counts: self
                .counts
                .iter()
                .map(|&c| i64::try_from(c).expect("counts bounded by n_events"))
                .collect(),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: FrequencyRecordFile = serde_json::from_str(s)?;
        let counts = f
            .counts
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                u64::try_from(c).map_err(|_| {
                    Error::InvalidProbability(format!("negative count {c} at outcome {j}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let seed = match f.seed {
            -1 => None,
            s => Some(u64::try_from(s).map_err(|_| Error::Parse(format!("invalid seed {s}")))?),
        };
        Self::from_counts(counts, f.n_events, seed)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Draws N events from the multinomial law over the outcomes plus an
/// implicit bin holding 1 − Σ_j p_j.
///
/// Sequential conditional binomials: O(J) work regardless of N.
pub fn sample_frequencies(
    p: &ProbabilityVector,
    n_events: u64,
    seed: u64,
) -> Result<FrequencyRecord> {
    if n_events == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if p.is_empty() {
        return Err(Error::Shape("no outcomes to sample".into()));
    }
    let mut probs = Vec::with_capacity(p.len());
    for (j, &v) in p.as_slice().iter().enumerate() {
        if !v.is_finite() || v < -PROB_TOL {
            return Err(Error::InvalidProbability(format!("p[{j}] = {v}")));
        }
        probs.push(v.max(0.0));
    }
    let total: f64 = probs.iter().sum();
    if total > 1.0 + PROB_TOL {
        return Err(Error::InvalidProbability(format!(
            "probabilities sum to {total} > 1"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::with_capacity(probs.len());
    let mut remaining_events = n_events;
    // remaining mass includes the implicit deficit bin
    let mut remaining_mass = total.max(1.0);
    for &pj in &probs {
        if remaining_events == 0 || pj == 0.0 {
            counts.push(0);
            remaining_mass -= pj;
            continue;
        }
        let q = if remaining_mass > 0.0 {
            (pj / remaining_mass).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let c = if q >= 1.0 {
            remaining_events
        } else {
            Binomial::new(remaining_events, q)
                .map_err(|e| Error::InvalidProbability(e.to_string()))?
                .sample(&mut rng)
        };
        counts.push(c);
        remaining_events -= c;
        remaining_mass -= pj;
    }
    FrequencyRecord::from_counts(counts, n_events, Some(seed))
}
