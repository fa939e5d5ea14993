//! Reference diagonal states: the even cat state, Fock mixtures and the
//! three-wave-plate hybrid states on four levels.
//!
//! Only diagonals are kept. Commuting outcomes are blind to coherences.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// Diagonal of a density matrix on `n_levels` basis levels.
///
/// `truncation_mass` is the probability weight that lives outside the
/// modeled levels.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalState {
    diag: Vec<f64>,
    truncation_mass: f64,
}

#[derive(Serialize, Deserialize)]
struct DiagonalStateFile {
    n_levels: usize,
    diag: Vec<f64>,
}

impl DiagonalState {
    /// Builds a state from diagonal entries; the missing mass becomes the
    /// truncation mass.
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Shape("state needs at least one level".into()));
        }
        if let Some((l, v)) = diag
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidProbability(format!(
                "diagonal entry {v} at level {l}"
            )));
        }
        let total: f64 = diag.iter().sum();
        if total > 1.0 + SUM_TOL {
            return Err(Error::Normalization(format!(
                "diagonal sums to {total} > 1"
            )));
        }
        Ok(Self {
            diag,
            truncation_mass: (1.0 - total).max(0.0),
        })
    }

    fn with_tail(diag: Vec<f64>, truncation_mass: f64) -> Self {
        Self {
            diag,
            truncation_mass,
        }
    }

    pub fn n_levels(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn truncation_mass(&self) -> f64 {
        self.truncation_mass
    }

    /// Levels carrying weight above `threshold`, ascending.
    pub fn support(&self, threshold: f64) -> SectorIndexSet {
        SectorIndexSet::from_iter_unchecked(
            self.diag
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > threshold)
                .map(|(l, _)| l),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&DiagonalStateFile {
            n_levels: self.n_levels(),
            diag: self.diag.clone(),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: DiagonalStateFile = serde_json::from_str(s)?;
        if f.diag.len() != f.n_levels {
            return Err(Error::Shape(format!(
                "n_levels = {} but {} diagonal entries",
                f.n_levels,
                f.diag.len()
            )));
        }
        Self::new(f.diag)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Ordered set of distinct basis-level indices.
///
/// Insertion order is kept: subspaces built from a sorted basis are
/// prefixes of that ordering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SectorIndexSet(Vec<usize>);

impl SectorIndexSet {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &i in &indices {
            if !seen.insert(i) {
                return Err(Error::Index(format!("duplicate level {i}")));
            }
        }
        Ok(Self(indices))
    }

    /// Checks distinctness and that every index is below `n_levels`.
    pub fn within(indices: Vec<usize>, n_levels: usize) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= n_levels) {
            return Err(Error::Index(format!(
                "level {bad} out of range for {n_levels} levels"
            )));
        }
        Self::new(indices)
    }

    pub fn range(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub(crate) fn from_iter_unchecked(it: impl IntoIterator<Item = usize>) -> Self {
        Self(it.into_iter().collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, level: usize) -> bool {
        self.0.contains(&level)
    }

    pub fn is_subset_of(&self, other: &SectorIndexSet) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    pub fn prefix(&self, k: usize) -> SectorIndexSet {
        Self(self.0[..k.min(self.0.len())].to_vec())
    }

    /// Same levels, ascending.
    pub fn sorted(&self) -> SectorIndexSet {
        let mut v = self.0.clone();
        v.sort_unstable();
        Self(v)
    }

    /// Order-insensitive comparison.
    pub fn same_levels(&self, levels: &[usize]) -> bool {
        let mut a = self.0.clone();
        let mut b = levels.to_vec();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }
}

impl fmt::Display for SectorIndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

/// ln of Σ_{n even} xⁿ/n! = ln cosh x, stable for large x.
fn ln_cosh(x: f64) -> f64 {
    x + (0.5 * (1.0 + (-2.0 * x).exp())).ln()
}

/// Photon-number diagonal of the even cat state |α⟩ + |−α⟩ truncated to
/// `n_levels` levels.
///
/// Level n carries x^n / n! / cosh x with x = α² for even n and nothing
/// for odd n. The weight beyond the last level is summed explicitly into
/// the truncation mass.
#[allow(clippy::needless_range_loop)]
pub fn even_cat_diagonal(alpha: f64, n_levels: usize) -> Result<DiagonalState> {
    if n_levels == 0 {
        return Err(Error::Shape("state needs at least one level".into()));
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("amplitude {alpha}")));
    }
    let x = alpha * alpha;
    if x == 0.0 {
        let mut diag = vec![0.0; n_levels];
        diag[0] = 1.0;
        return Ok(DiagonalState::with_tail(diag, 0.0));
    }
    let ln_x = x.ln();
    let norm = ln_cosh(x);
    let weight = |n: usize, ln_fact: f64| (n as f64 * ln_x - ln_fact - norm).exp();

    let mut diag = vec![0.0; n_levels];
    let mut tail_terms = Vec::new();
    let mut ln_fact = 0.0;
    for n in 0.. {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        if n % 2 == 1 {
            continue;
        }
        let w = weight(n, ln_fact);
        if n < n_levels {
            diag[n] = w;
            continue;
        }
        // past the peak the terms only shrink
        if (n as f64) > x && w < f64::MIN_POSITIVE {
            break;
        }
        tail_terms.push(w);
    }
    // smallest first
    let truncation_mass = tail_terms.iter().rev().sum();
    Ok(DiagonalState::with_tail(diag, truncation_mass))
}

/// Incoherent mixture of Fock levels, `components` as (level, weight).
/// The state spans `max level + 1` levels unless `n_levels` asks for more.
pub fn fock_mixture(components: &[(usize, f64)], n_levels: Option<usize>) -> Result<DiagonalState> {
    if components.is_empty() {
        return Err(Error::Normalization("mixture has no components".into()));
    }
    SectorIndexSet::new(components.iter().map(|c| c.0).collect())?;
    if let Some(&(l, w)) = components.iter().find(|c| !c.1.is_finite() || c.1 <= 0.0) {
        return Err(Error::Normalization(format!(
            "weight {w} at level {l} is not positive"
        )));
    }
    let total: f64 = components.iter().map(|c| c.1).sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::Normalization(format!(
            "weights sum to {total}, expected 1"
        )));
    }
    let max_level = components.iter().map(|c| c.0).max().unwrap_or(0);
    let d = match n_levels {
        Some(d) if d <= max_level => {
            return Err(Error::Shape(format!(
                "level {max_level} does not fit in {d} levels"
            )))
        }
        Some(d) => d,
        None => max_level + 1,
    };
    let mut diag = vec![0.0; d];
    for &(l, w) in components {
        diag[l] = w;
    }
    Ok(DiagonalState::with_tail(diag, 0.0))
}

/// Squared amplitudes of the four-level pure state produced by three
/// half-wave plates at angles θ₁, θ₂, θ₃ (radians).
pub fn hybrid_pure_state(theta1: f64, theta2: f64, theta3: f64) -> DiagonalState {
    let (s1, c1) = (2.0 * theta1).sin_cos();
    let (s2, c2) = (2.0 * theta2).sin_cos();
    let (s3, c3) = (2.0 * theta3).sin_cos();
    let amps = [s1 * s3, -s1 * c3, c1 * c2, c1 * s2];
    DiagonalState::with_tail(amps.iter().map(|a| a * a).collect(), 0.0)
}
