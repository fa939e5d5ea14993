//! Seeded simulation campaigns: build a state, draw measurement sets,
//! sample frequency data for each and run the extraction.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::{run_psep, BasisOrder, ExtractionReport, PsepConfig};
use crate::measurement::{random_measurement, CommutingMeasurement};
use crate::simulate::{sample_frequencies, FrequencyRecord};
use crate::states::{even_cat_diagonal, fock_mixture, hybrid_pure_state, DiagonalState};

/// Printed cat-state amplitude.
pub const CAT_AMPLITUDE: f64 = 0.3536;

pub const SEED_SCHEME: &str =
    "splitmix64(master + (4*set + stream) * 0x9E3779B97F4A7C15) >> 1; stream 0 = measurement, 1 = data, 2/3 = shared parent measurement/data";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-set seed for one random stream. Always fits in 63 bits.
pub fn derive_seed(master: u64, set: usize, stream: u64) -> u64 {
    let offset = (set as u64).wrapping_mul(4).wrapping_add(stream);
    splitmix64(master.wrapping_add(offset.wrapping_mul(0x9E37_79B9_7F4A_7C15))) >> 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StateSpec {
    Cat {
        amplitude: f64,
    },
    Mixture {
        components: Vec<(usize, f64)>,
    },
    /// Wave-plate angles in radians.
    Hybrid {
        theta: [f64; 3],
    },
    File {
        path: PathBuf,
    },
}

impl StateSpec {
    pub fn hybrid_qubit() -> Self {
        StateSpec::Hybrid {
            theta: [PI / 4.0, 0.0, PI / 8.0],
        }
    }

    /// Equal weights on levels 0, 1, 2.
    pub fn hybrid_qutrit() -> Self {
        StateSpec::Hybrid {
            theta: [0.5 * (2.0f64 / 3.0).sqrt().asin(), 0.0, PI / 8.0],
        }
    }

    /// Equal weights on all four levels.
    pub fn hybrid_ququart() -> Self {
        StateSpec::Hybrid {
            theta: [PI / 8.0; 3],
        }
    }

    /// Fixed level count of this state, if it has one.
    pub fn natural_levels(&self) -> Option<usize> {
        match self {
            StateSpec::Hybrid { .. } => Some(4),
            _ => None,
        }
    }

    pub fn build(&self, n_levels: usize) -> Result<DiagonalState> {
        let state = match self {
            StateSpec::Cat { amplitude } => even_cat_diagonal(*amplitude, n_levels)?,
            StateSpec::Mixture { components } => fock_mixture(components, Some(n_levels))?,
            StateSpec::Hybrid { theta } => hybrid_pure_state(theta[0], theta[1], theta[2]),
            StateSpec::File { path } => DiagonalState::load(path)?,
        };
        if state.n_levels() != n_levels {
            return Err(Error::Shape(format!(
                "state has {} levels, campaign uses {n_levels}",
                state.n_levels()
            )));
        }
        Ok(state)
    }
}

/// Parses `cat`, `cat:<amplitude>`, `mixture:<level>=<weight>,...`,
/// `hybrid:<t1>,<t2>,<t3>`, `hybrid-qubit|qutrit|ququart`, or otherwise a
/// path to a state JSON file.
impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{v:?} in state spec: {e}")))
        };
        match (head, rest) {
            ("cat", None) => Ok(StateSpec::Cat {
                amplitude: CAT_AMPLITUDE,
            }),
            ("cat", Some(a)) => Ok(StateSpec::Cat { amplitude: num(a)? }),
            ("mixture", Some(list)) => {
                let components = list
                    .split(',')
                    .map(|item| {
                        let (l, w) = item.split_once('=').ok_or_else(|| {
                            Error::Parse(format!("expected level=weight, got {item:?}"))
                        })?;
                        let level = l
                            .trim()
                            .parse::<usize>()
                            .map_err(|e| Error::Parse(format!("level {l:?}: {e}")))?;
                        Ok((level, num(w)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(StateSpec::Mixture { components })
            }
            ("hybrid", Some(angles)) => {
                let t = angles.split(',').map(num).collect::<Result<Vec<_>>>()?;
                let theta: [f64; 3] = t
                    .try_into()
                    .map_err(|_| Error::Parse("hybrid state needs three angles".into()))?;
                Ok(StateSpec::Hybrid { theta })
            }
            ("hybrid-qubit", None) => Ok(Self::hybrid_qubit()),
            ("hybrid-qutrit", None) => Ok(Self::hybrid_qutrit()),
            ("hybrid-ququart", None) => Ok(Self::hybrid_ququart()),
            ("mixture" | "hybrid", None) => {
                Err(Error::Parse(format!("state {s:?} needs parameters")))
            }
            _ => Ok(StateSpec::File { path: s.into() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataMode {
    /// Independent measurement and data per set.
    #[default]
    Fresh,
    /// One large measurement sampled once; sets are random outcome subsets
    /// of the same counts.
    SharedSubsets,
}

fn default_parent_outcomes() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub state: StateSpec,
    /// Number of modeled basis levels D.
    pub fov_dim: usize,
    pub n_sets: usize,
    /// Outcomes per set J.
    pub outcomes: usize,
    pub n_events: u64,
    pub alpha: f64,
    pub seed: u64,
    #[serde(default)]
    pub data_mode: DataMode,
    /// Size of the parent measurement in shared-subset mode.
    #[serde(default = "default_parent_outcomes")]
    pub parent_outcomes: usize,
    /// Prepend the projective measurement in the basis itself as set 0.
    #[serde(default)]
    pub identity_set: bool,
    #[serde(default)]
    pub order: BasisOrder,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must be in (0, 1), got {}", self.alpha));
        }
        if self.n_sets == 0 {
            return bad("n_sets must be at least 1".into());
        }
        if self.n_events == 0 {
            return bad("n_events must be at least 1".into());
        }
        if self.fov_dim == 0 {
            return bad("fov_dim must be at least 1".into());
        }
        if self.outcomes < 2 {
            return bad(format!(
                "outcomes must be at least 2, got {}",
                self.outcomes
            ));
        }
        if let Some(d) = self.state.natural_levels() {
            if d != self.fov_dim {
                return bad(format!(
                    "this state lives on {d} levels, fov_dim is {}",
                    self.fov_dim
                ));
            }
        }
        if self.data_mode == DataMode::SharedSubsets {
            if self.identity_set {
                return bad("identity_set is only available with fresh data".into());
            }
            if self.outcomes > self.parent_outcomes {
                return bad(format!(
                    "subsets of {} outcomes cannot be drawn from {}",
                    self.outcomes, self.parent_outcomes
                ));
            }
        }
        Ok(())
    }

    fn preset(
        state: StateSpec,
        fov_dim: usize,
        n_sets: usize,
        outcomes: usize,
        n_events: u64,
    ) -> Self {
        Self {
            state,
            fov_dim,
            n_sets,
            outcomes,
            n_events,
            alpha: 0.05,
            seed: 1,
            data_mode: DataMode::Fresh,
            parent_outcomes: default_parent_outcomes(),
            identity_set: false,
            order: BasisOrder::Hint,
            out_dir: None,
        }
    }
}

/// Preconfigured campaigns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Demo {
    Cat,
    Mixture,
    HybridQubit,
    HybridQutrit,
    HybridQuquart,
}

impl Demo {
    pub const ALL: [Demo; 5] = [
        Demo::Cat,
        Demo::Mixture,
        Demo::HybridQubit,
        Demo::HybridQutrit,
        Demo::HybridQuquart,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Demo::Cat => "cat",
            Demo::Mixture => "mixture",
            Demo::HybridQubit => "hybrid-qubit",
            Demo::HybridQutrit => "hybrid-qutrit",
            Demo::HybridQuquart => "hybrid-ququart",
        }
    }

    /// Cat and mixture: 30 levels, 200 sets of 40 outcomes, 10⁷ events per
    /// set. Hybrids: 4 levels, the basis measurement plus 100 sets of 8
    /// outcomes, 2.5·10⁶ events per set.
    pub fn config(self) -> CampaignConfig {
        let hybrid = |state| {
            let mut c = CampaignConfig::preset(state, 4, 100, 8, 2_500_000);
            c.identity_set = true;
            c
        };
        match self {
            Demo::Cat => CampaignConfig::preset(
                StateSpec::Cat {
                    amplitude: CAT_AMPLITUDE,
                },
                30,
                200,
                40,
                10_000_000,
            ),
            Demo::Mixture => CampaignConfig::preset(
                StateSpec::Mixture {
                    components: vec![(4, 0.25), (9, 0.5), (23, 0.25)],
                },
                30,
                200,
                40,
                10_000_000,
            ),
            Demo::HybridQubit => hybrid(StateSpec::hybrid_qubit()),
            Demo::HybridQutrit => hybrid(StateSpec::hybrid_qutrit()),
            Demo::HybridQuquart => hybrid(StateSpec::hybrid_ququart()),
        }
    }
}

impl FromStr for Demo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Demo::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown demo {s:?}")))
    }
}

/// Measurement sets and their data, ready for extraction.
#[derive(Debug, Clone)]
pub struct CampaignData {
    pub state: DiagonalState,
    pub sets: Vec<CommutingMeasurement>,
    pub data: Vec<FrequencyRecord>,
}

pub fn generate(config: &CampaignConfig) -> Result<CampaignData> {
    config.validate()?;
    let state = config.state.build(config.fov_dim)?;
    let d = config.fov_dim;
    let (sets, data) = match config.data_mode {
        DataMode::Fresh => {
            let offset = usize::from(config.identity_set);
            let pairs: Vec<(CommutingMeasurement, FrequencyRecord)> = (0..config.n_sets + offset)
                .into_par_iter()
                .map(|i| {
                    let m = if i < offset {
                        CommutingMeasurement::identity(d)?
                    } else {
                        random_measurement(d, config.outcomes, derive_seed(config.seed, i, 0))?
                    };
                    let p = m.born_probabilities(&state)?;
                    let f =
                        sample_frequencies(&p, config.n_events, derive_seed(config.seed, i, 1))?;
                    Ok((m, f))
                })
                .collect::<Result<_>>()?;
            pairs.into_iter().unzip()
        }
        DataMode::SharedSubsets => {
            let parent =
                random_measurement(d, config.parent_outcomes, derive_seed(config.seed, 0, 2))?;
            let p = parent.born_probabilities(&state)?;
            let record = sample_frequencies(&p, config.n_events, derive_seed(config.seed, 0, 3))?;
            subset_sets(
                &parent,
                &record,
                config.n_sets,
                config.outcomes,
                config.seed,
            )?
        }
    };
    Ok(CampaignData { state, sets, data })
}

/// `n_sets` random selections of `outcomes` outcomes each, applied to one
/// measurement and its counts. Selections are sorted by outcome index.
pub fn subset_sets(
    m: &CommutingMeasurement,
    record: &FrequencyRecord,
    n_sets: usize,
    outcomes: usize,
    seed: u64,
) -> Result<(Vec<CommutingMeasurement>, Vec<FrequencyRecord>)> {
    if outcomes == 0 || outcomes > m.n_outcomes() {
        return Err(Error::InvalidArgument(format!(
            "cannot select {outcomes} of {} outcomes",
            m.n_outcomes()
        )));
    }
    let pairs: Vec<(CommutingMeasurement, FrequencyRecord)> = (0..n_sets)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i, 0));
            let mut idx = rand::seq::index::sample(&mut rng, m.n_outcomes(), outcomes).into_vec();
            idx.sort_unstable();
            Ok((m.subset(&idx)?, record.subset(&idx)?))
        })
        .collect::<Result<_>>()?;
    Ok(pairs.into_iter().unzip())
}

pub fn psep_config(config: &CampaignConfig) -> PsepConfig {
    let mut p = PsepConfig::new(config.alpha);
    p.order = config.order;
    p
}

/// Generates the campaign data and runs the extraction on it.
pub fn run_campaign(config: &CampaignConfig) -> Result<(CampaignData, ExtractionReport)> {
    let data = generate(config)?;
    let report = run_psep(&data.sets, &data.data, &psep_config(config))?;
    Ok((data, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::ExtractionStatus;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a: Vec<u64> = (0..100).map(|i| derive_seed(1, i, 0)).collect();
        let mut sorted = a.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 100);
        assert_ne!(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
        assert_eq!(derive_seed(7, 3, 1), derive_seed(7, 3, 1));
        assert!(a.iter().all(|&s| s <= i64::MAX as u64));
    }

    #[test]
    fn state_spec_parsing() {
        assert_eq!(
            "cat".parse::<StateSpec>().unwrap(),
            StateSpec::Cat {
                amplitude: CAT_AMPLITUDE
            }
        );
        assert_eq!(
            "mixture:4=0.25, 9=0.5,23=0.25"
                .parse::<StateSpec>()
                .unwrap(),
            StateSpec::Mixture {
                components: vec![(4, 0.25), (9, 0.5), (23, 0.25)]
            }
        );
        assert_eq!(
            "hybrid:0,1,2".parse::<StateSpec>().unwrap(),
            StateSpec::Hybrid {
                theta: [0.0, 1.0, 2.0]
            }
        );
        assert!("hybrid:0,1".parse::<StateSpec>().is_err());
        assert!("mixture".parse::<StateSpec>().is_err());
        assert!(matches!(
            "state.json".parse::<StateSpec>().unwrap(),
            StateSpec::File { .. }
        ));
    }

    #[test]
    fn hybrid_presets_have_intended_support() {
        let support = |s: StateSpec| s.build(4).unwrap().support(1e-12).as_slice().to_vec();
        assert_eq!(support(StateSpec::hybrid_qubit()), vec![0, 1]);
        assert_eq!(support(StateSpec::hybrid_qutrit()), vec![0, 1, 2]);
        assert_eq!(support(StateSpec::hybrid_ququart()), vec![0, 1, 2, 3]);
        let q = StateSpec::hybrid_qutrit().build(4).unwrap();
        for l in 0..3 {
            assert!((q.diag()[l] - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = Demo::Cat.config();
        assert!(c.validate().is_ok());
        c.alpha = 1.0;
        assert!(c.validate().is_err());
        let mut c = Demo::HybridQubit.config();
        c.fov_dim = 5;
        assert!(c.validate().is_err());
        let mut c = Demo::Mixture.config();
        c.data_mode = DataMode::SharedSubsets;
        c.outcomes = 300;
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let c = Demo::Mixture.config();
        let text = serde_json::to_string(&c).unwrap();
        let back: CampaignConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let minimal = r#"{"state": {"kind": "cat", "amplitude": 0.3536}, "fov_dim": 10,
            "n_sets": 3, "outcomes": 12, "n_events": 1000, "alpha": 0.05, "seed": 4}"#;
        let m: CampaignConfig = serde_json::from_str(minimal).unwrap();
        assert_eq!(m.data_mode, DataMode::Fresh);
        assert_eq!(m.parent_outcomes, 256);
    }

    #[test]
    fn small_campaign_is_deterministic() {
        let mut c = Demo::Mixture.config();
        c.n_sets = 6;
        let (d1, r1) = run_campaign(&c).unwrap();
        let (d2, r2) = run_campaign(&c).unwrap();
        assert_eq!(d1.data, d2.data);
        assert_eq!(r1, r2);
        assert!(r1.extracted_sector.same_levels(&[4, 9, 23]));
        assert_eq!(r1.status, ExtractionStatus::Accepted);
    }

    #[test]
    fn shared_subsets_reuse_one_dataset() {
        let mut c = Demo::Mixture.config();
        c.data_mode = DataMode::SharedSubsets;
        c.n_sets = 4;
        c.outcomes = 60;
        c.parent_outcomes = 256;
        let d = generate(&c).unwrap();
        assert_eq!(d.sets.len(), 4);
        let n = d.data[0].n_events();
        assert!(d
            .data
            .iter()
            .all(|r| r.n_events() == n && r.n_outcomes() == 60));
        assert!(d.sets.iter().all(|m| !m.is_complete()));
    }

    #[test]
    fn identity_set_is_prepended() {
        let d = generate(&Demo::HybridQubit.config()).unwrap();
        assert_eq!(d.sets.len(), 101);
        assert_eq!(d.sets[0], CommutingMeasurement::identity(4).unwrap());
        assert_eq!(d.sets[1].n_outcomes(), 8);
    }
}
