//! Commuting measurement outcomes Π_j = Σ_l c_jl |l⟩⟨l|, stored as the J×D
//! coefficient matrix.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Open01;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RealMatrix;
use crate::states::DiagonalState;

/// Tolerance on Σ_j c_jl = 1 for complete measurements.
pub const COMPLETENESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CommutingMeasurement {
    coefficients: RealMatrix,
    complete: bool,
}

/// One violated invariant reported by [`CommutingMeasurement::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    NegativeCoefficient {
        outcome: usize,
        level: usize,
        value: f64,
    },
    /// `defect` is 1 − Σ_j c_jl.
    CompletenessDefect { level: usize, defect: f64 },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::NegativeCoefficient {
                outcome,
                level,
                value,
            } => {
                write!(f, "negative coefficient at ({outcome},{level}): {value}")
            }
            Diagnostic::CompletenessDefect { level, defect } => {
                // printed at the completeness resolution
                let shown = format!("{defect:.12}");
                let shown = shown.trim_end_matches('0').trim_end_matches('.');
                write!(f, "completeness defect {shown} at level {level}")
            }
        }
    }
}

/// Born probabilities p_j for each outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(pub Vec<f64>);

impl ProbabilityVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

#[derive(Serialize, Deserialize)]
struct MeasurementFile {
    n_outcomes: usize,
    n_levels: usize,
    complete: bool,
    coefficients: Vec<Vec<f64>>,
}

impl CommutingMeasurement {
    /// Wraps a coefficient matrix. Invariants are not enforced here; see
    /// [`validate`](Self::validate).
    pub fn new(coefficients: RealMatrix, complete: bool) -> Self {
        Self {
            coefficients,
            complete,
        }
    }

    /// Projective measurement in the basis itself: c = I_D.
    pub fn identity(n_levels: usize) -> Result<Self> {
        Ok(Self::new(RealMatrix::identity(n_levels)?, true))
    }

    pub fn n_outcomes(&self) -> usize {
        self.coefficients.rows()
    }

    pub fn n_levels(&self) -> usize {
        self.coefficients.cols()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn coefficients(&self) -> &RealMatrix {
        &self.coefficients
    }

    pub fn coefficient(&self, outcome: usize, level: usize) -> f64 {
        self.coefficients.get(outcome, level)
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let c = self.coefficients.as_dmatrix();
        let mut out = Vec::new();
        for j in 0..c.nrows() {
            for l in 0..c.ncols() {
                let v = c[(j, l)];
                if v < 0.0 {
                    out.push(Diagnostic::NegativeCoefficient {
                        outcome: j,
                        level: l,
                        value: v,
                    });
                }
            }
        }
        if self.complete {
            for (l, col) in c.column_iter().enumerate() {
                let defect = 1.0 - col.sum();
                if defect.abs() > COMPLETENESS_TOL {
                    out.push(Diagnostic::CompletenessDefect { level: l, defect });
                }
            }
        }
        out
    }

    /// p_j = Σ_l c_jl ρ_ll
    pub fn born_probabilities(&self, state: &DiagonalState) -> Result<ProbabilityVector> {
        if state.n_levels() != self.n_levels() {
            return Err(Error::Shape(format!(
                "state has {} levels, measurement has {}",
                state.n_levels(),
                self.n_levels()
            )));
        }
        Ok(ProbabilityVector(self.coefficients.mul_vec(state.diag())?))
    }

    /// Row restriction to the listed outcomes. The result is never marked
    /// complete.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        check_outcome_indices(indices, self.n_outcomes())?;
        let c = self.coefficients.as_dmatrix().select_rows(indices);
        Ok(Self::new(RealMatrix::new(c)?, false))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&MeasurementFile {
            n_outcomes: self.n_outcomes(),
            n_levels: self.n_levels(),
            complete: self.complete,
            coefficients: self.coefficients.to_rows(),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: MeasurementFile = serde_json::from_str(s)?;
        if f.coefficients.len() != f.n_outcomes
            || f.coefficients.iter().any(|r| r.len() != f.n_levels)
        {
            return Err(Error::Shape(format!(
                "declared {}x{} but coefficient array does not match",
                f.n_outcomes, f.n_levels
            )));
        }
        Ok(Self::new(
            RealMatrix::from_rows(&f.coefficients)?,
            f.complete,
        ))
    }

    /// One outcome per row, no header. Completeness is inferred from the
    /// column sums.
    pub fn from_csv(s: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(s.as_bytes());
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("coefficient {v:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let c = RealMatrix::from_rows(&rows)?;
        let complete = c
            .as_dmatrix()
            .column_iter()
            .all(|col| (col.sum() - 1.0).abs() <= COMPLETENESS_TOL);
        Ok(Self::new(c, complete))
    }

    /// Loads JSON, or CSV when the extension is `.csv`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Self::from_csv(&text),
            _ => Self::from_json(&text),
        }
    }
}

pub(crate) fn check_outcome_indices(indices: &[usize], n_outcomes: usize) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::Index("empty outcome selection".into()));
    }
    let mut seen = vec![false; n_outcomes];
    for &i in indices {
        if i >= n_outcomes {
            return Err(Error::Index(format!(
                "outcome {i} out of range for {n_outcomes} outcomes"
            )));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::Index(format!("duplicate outcome {i}")));
        }
    }
    Ok(())
}

/// Complete random measurement: c_jl i.i.d. uniform on (0, 1), then each
/// level's column normalized to sum to one.
pub fn random_measurement(
    n_levels: usize,
    n_outcomes: usize,
    seed: u64,
) -> Result<CommutingMeasurement> {
    if n_levels == 0 {
        return Err(Error::InvalidArgument("need at least one level".into()));
    }
    if n_outcomes < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 outcomes for a non-trivial complete measurement, got {n_outcomes}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = nalgebra::DMatrix::<f64>::zeros(n_outcomes, n_levels);
    for mut col in c.column_iter_mut() {
        for v in col.iter_mut() {
            *v = rng.sample(Open01);
        }
        let s = col.sum();
        col /= s;
    }
    Ok(CommutingMeasurement::new(RealMatrix::new(c)?, true))
}
