//! Physical-sector extraction.
//!
//! Basis levels are ordered by a rough diagonal estimate C⁺f. Growing
//! prefixes of that order are then tested with decision observables
//! W = Σ_j y_j Π_j whose diagonal vanishes on the candidate subspace and is
//! positive elsewhere. The data-driven index B = 2 exp(−w²/(2Δ²)) of the
//! decision statistic w = Σ_j y_j f_j, averaged over measurement sets,
//! decides when to stop.

use std::cmp::Reverse;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::CommutingMeasurement;
use crate::numerics::{self, RealMatrix, SolveResult};
use crate::simulate::FrequencyRecord;
use crate::states::SectorIndexSet;

/// Default bound on |Σ_j y_j c_jn − t_n| for an observable to count as
/// constructed.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;

/// Variances at or below this are treated as zero.
const DEGENERATE_VARIANCE: f64 = 1e-300;

/// Relative resolution below which hint values count as tied.
const HINT_TIE_RESOLUTION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalHint {
    /// C⁺f, one entry per basis level. May be negative.
    pub hint: Vec<f64>,
    /// All levels by descending hint, ties by ascending index.
    pub sorted_order: Vec<usize>,
}

fn check_data(m: &CommutingMeasurement, f: &FrequencyRecord) -> Result<()> {
    if f.n_outcomes() != m.n_outcomes() {
        return Err(Error::Shape(format!(
            "{} frequencies for {} outcomes",
            f.n_outcomes(),
            m.n_outcomes()
        )));
    }
    Ok(())
}

pub fn diagonal_hint(m: &CommutingMeasurement, f: &FrequencyRecord) -> Result<DiagonalHint> {
    check_data(m, f)?;
    diagonal_hint_from(m, &f.frequencies())
}

/// Same as [`diagonal_hint`] for a raw frequency or probability vector.
pub fn diagonal_hint_from(m: &CommutingMeasurement, f: &[f64]) -> Result<DiagonalHint> {
    let pinv = numerics::pseudoinverse(m.coefficients(), 0.0)?;
    let hint = pinv.mul_vec(f)?;
    let levels: Vec<usize> = (0..hint.len()).collect();
    let sorted_order = sort_levels_by_hint(&hint, &levels);
    Ok(DiagonalHint { hint, sorted_order })
}

/// Orders `levels` by descending `hint[level]`; values equal up to
/// [`HINT_TIE_RESOLUTION`] relative to the largest magnitude are ordered by
/// ascending level index.
pub fn sort_levels_by_hint(hint: &[f64], levels: &[usize]) -> Vec<usize> {
    let scale = levels.iter().map(|&l| hint[l].abs()).fold(0.0, f64::max);
    let quantum = scale * HINT_TIE_RESOLUTION;
    let key = |l: usize| -> i64 {
        if quantum > 0.0 {
            (hint[l] / quantum).round() as i64
        } else {
            0
        }
    };
    let mut out = levels.to_vec();
    out.sort_by_key(|&l| (Reverse(key(l)), l));
    out
}

/// W = Σ_j y_j Π_j built for one candidate subspace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionObservable {
    pub y: Vec<f64>,
    pub target_subspace: SectorIndexSet,
    pub fov: SectorIndexSet,
    /// ⟨n|W|n⟩ for each fov level, in fov order.
    pub achieved_diag: Vec<f64>,
    pub residual_inf: f64,
    pub sum_y_sq: f64,
    /// Residual tolerance the observable was accepted under.
    pub tol: f64,
}

impl DecisionObservable {
    /// ⟨level|W|level⟩, or `None` outside the fov.
    pub fn diag_at(&self, level: usize) -> Option<f64> {
        self.fov
            .as_slice()
            .iter()
            .position(|&l| l == level)
            .map(|i| self.achieved_diag[i])
    }
}

/// The linear system Σ_j y_j c_jn = t_n over one measurement and fov.
///
/// The pseudoinverse depends only on the measurement and the fov, so one
/// system serves every candidate subspace.
#[derive(Debug, Clone)]
pub struct DecisionSystem {
    fov: SectorIndexSet,
    /// |fov| × J, row n holds c_{·, fov[n]}
    matrix: RealMatrix,
    pinv: RealMatrix,
}

impl DecisionSystem {
    pub fn new(m: &CommutingMeasurement, fov: &SectorIndexSet) -> Result<Self> {
        if fov.is_empty() {
            return Err(Error::Index("empty field of view".into()));
        }
        SectorIndexSet::within(fov.as_slice().to_vec(), m.n_levels())?;
        let c = m.coefficients().as_dmatrix();
        let matrix = RealMatrix::new(c.select_columns(fov.as_slice()).transpose())?;
        let pinv = numerics::pseudoinverse(&matrix, 0.0)?;
        Ok(Self {
            fov: fov.clone(),
            matrix,
            pinv,
        })
    }

    pub fn fov(&self) -> &SectorIndexSet {
        &self.fov
    }

    /// Number of linearly independent fov columns seen by the outcomes.
    pub fn rank(&self) -> usize {
        numerics::rank(&self.matrix, 0.0)
    }

    pub fn observable(&self, sub: &SectorIndexSet, tol: f64) -> Result<DecisionObservable> {
        if !sub.is_subset_of(&self.fov) {
            return Err(Error::Index(format!(
                "subspace {sub} is not inside the fov"
            )));
        }
        let targets: Vec<f64> = self
            .fov
            .as_slice()
            .iter()
            .map(|&n| if sub.contains(n) { 0.0 } else { 1.0 })
            .collect();
        let SolveResult {
            solution: y,
            residual_inf,
            norm_sq,
        } = numerics::solve_with_pinv(&self.matrix, &self.pinv, &targets);
        if residual_inf > tol {
            return Err(Error::OutsideFov {
                residual: residual_inf,
                tol,
            });
        }
        let achieved_diag = self.matrix.mul_vec(&y)?;
        for (i, &n) in self.fov.as_slice().iter().enumerate() {
            if !sub.contains(n) && achieved_diag[i] <= tol {
                return Err(Error::Positivity {
                    level: n,
                    value: achieved_diag[i],
                });
            }
        }
        Ok(DecisionObservable {
            y,
            target_subspace: sub.clone(),
            fov: self.fov.clone(),
            achieved_diag,
            residual_inf,
            sum_y_sq: norm_sq,
            tol,
        })
    }
}

/// Minimum-norm decision observable with ⟨n|W|n⟩ = 0 on `sub` and 1 on
/// the rest of `fov`.
pub fn build_decision_observable(
    m: &CommutingMeasurement,
    sub: &SectorIndexSet,
    fov: &SectorIndexSet,
    tol: f64,
) -> Result<DecisionObservable> {
    DecisionSystem::new(m, fov)?.observable(sub, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecisionStatistic {
    /// Σ_j y_j f_j
    pub w: f64,
    /// Plug-in multinomial variance of w.
    pub variance: f64,
    pub b_sub: f64,
    /// |w|, the truncation-error scale.
    pub epsilon: f64,
    pub n_events: u64,
}

/// Σ_jk y_j y_k (δ_jk p_j − p_j p_k) / N
pub fn multinomial_variance(y: &[f64], p: &[f64], n_events: u64) -> f64 {
    let first: f64 = y.iter().zip(p).map(|(y, p)| y * y * p).sum();
    let mean: f64 = y.iter().zip(p).map(|(y, p)| y * p).sum();
    ((first - mean * mean) / n_events as f64).max(0.0)
}

/// 2 exp(−w² / (2Δ²)), with zero variance resolved by whether |w| is
/// within `tol`.
pub fn b_sub(w: f64, variance: f64, tol: f64) -> f64 {
    if variance <= DEGENERATE_VARIANCE {
        if w.abs() <= tol {
            2.0
        } else {
            0.0
        }
    } else {
        2.0 * (-(w * w) / (2.0 * variance)).exp()
    }
}

pub fn decision_statistic(
    obs: &DecisionObservable,
    f: &FrequencyRecord,
) -> Result<DecisionStatistic> {
    if f.n_outcomes() != obs.y.len() {
        return Err(Error::Shape(format!(
            "{} frequencies for an observable over {} outcomes",
            f.n_outcomes(),
            obs.y.len()
        )));
    }
    let freq = f.frequencies();
    let w: f64 = obs.y.iter().zip(&freq).map(|(y, f)| y * f).sum();
    let variance = multinomial_variance(&obs.y, &freq, f.n_events());
    Ok(DecisionStatistic {
        w,
        variance,
        b_sub: b_sub(w, variance, obs.tol),
        epsilon: w.abs(),
        n_events: f.n_events(),
    })
}

/// 2 exp(−Nε² / (2 Σ_j y_j²))
pub fn hoeffding_bound(epsilon: f64, n_events: u64, sum_y_sq: f64) -> f64 {
    2.0 * (-(n_events as f64) * epsilon * epsilon / (2.0 * sum_y_sq)).exp()
}

/// Smallest N ≥ 1 with N ≥ −2 ln(α/2) Σ_j y_j² / ε².
pub fn hoeffding_sample_size(epsilon: f64, alpha: f64, sum_y_sq: f64) -> Result<u64> {
    if epsilon.is_nan() || epsilon <= 0.0 || sum_y_sq.is_nan() || sum_y_sq <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "epsilon and sum_y_sq must be positive, got {epsilon} and {sum_y_sq}"
        )));
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be in (0, 2], got {alpha}"
        )));
    }
    let n = -2.0 * (alpha / 2.0).ln() * sum_y_sq / (epsilon * epsilon);
    if !n.is_finite() || n > u64::MAX as f64 {
        return Err(Error::InvalidArgument(format!(
            "required sample size {n} overflows"
        )));
    }
    Ok((n.ceil() as u64).max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisOrder {
    /// Descending C⁺f.
    #[default]
    Hint,
    /// Ascending level index.
    Default,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsepConfig {
    pub alpha: f64,
    /// `None` picks [`default_fov`].
    pub fov: Option<SectorIndexSet>,
    pub order: BasisOrder,
    pub residual_tol: f64,
}

impl PsepConfig {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            fov: None,
            order: BasisOrder::Hint,
            residual_tol: DEFAULT_RESIDUAL_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtractionStatus {
    Accepted,
    /// No proper subspace of the fov passed; the sector is the whole fov.
    FovExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionStep {
    /// Subspace size minus one.
    pub k: usize,
    pub subspace: SectorIndexSet,
    pub mean_b_sub: f64,
    /// Population standard deviation over sets.
    pub std_b_sub: f64,
    pub mean_w: f64,
    pub mean_variance: f64,
    pub mean_sum_y_sq: f64,
    pub b_sub_per_set: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionReport {
    pub alpha: f64,
    pub acceptance_rule: &'static str,
    pub order: BasisOrder,
    pub n_sets: usize,
    pub fov: SectorIndexSet,
    /// Set-averaged C⁺f, one entry per basis level.
    pub hint: Vec<f64>,
    pub sorted_order: Vec<usize>,
    pub steps: Vec<ExtractionStep>,
    /// Ascending.
    pub extracted_sector: SectorIndexSet,
    pub d_phys: usize,
    pub status: ExtractionStatus,
    pub warnings: Vec<String>,
}

impl ExtractionReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Columns: k, subspace_levels, mean_b_sub, std_b_sub, mean_w,
    /// mean_variance. Levels are space separated.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "k",
            "subspace_levels",
            "mean_b_sub",
            "std_b_sub",
            "mean_w",
            "mean_variance",
        ])?;
        for s in &self.steps {
            let levels: Vec<String> = s
                .subspace
                .as_slice()
                .iter()
                .map(ToString::to_string)
                .collect();
            w.write_record([
                s.k.to_string(),
                levels.join(" "),
                s.mean_b_sub.to_string(),
                s.std_b_sub.to_string(),
                s.mean_w.to_string(),
                s.mean_variance.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Largest leading-level fov that every set can resolve. Emits a warning
/// when that is fewer than all levels.
pub fn default_fov(sets: &[CommutingMeasurement]) -> Result<(SectorIndexSet, Vec<String>)> {
    let d = common_levels(sets)?;
    let full_rank = |l: usize| {
        sets.par_iter().all(|m| {
            let c = m.coefficients().as_dmatrix().columns(0, l).into_owned();
            RealMatrix::new(c)
                .map(|c| numerics::rank(&c, 0.0) == l)
                .unwrap_or(false)
        })
    };
    if full_rank(d) {
        return Ok((SectorIndexSet::range(d), Vec::new()));
    }
    let min_rank = sets
        .iter()
        .map(|m| numerics::rank(m.coefficients(), 0.0))
        .min()
        .unwrap_or(0);
    let mut l = min_rank.min(d);
    while l > 0 && !full_rank(l) {
        l -= 1;
    }
    if l == 0 {
        return Err(Error::FovRank {
            requested: 1,
            rank: 0,
        });
    }
    let warning = format!(
        "measurement rank {min_rank} is below the {d} basis levels; field of view limited to levels 0..{}",
        l - 1
    );
    Ok((SectorIndexSet::range(l), vec![warning]))
}

fn common_levels(sets: &[CommutingMeasurement]) -> Result<usize> {
    let first = sets
        .first()
        .ok_or_else(|| Error::InvalidArgument("no measurement sets".into()))?;
    let d = first.n_levels();
    if let Some((i, m)) = sets.iter().enumerate().find(|(_, m)| m.n_levels() != d) {
        return Err(Error::InSet {
            set: i,
            source: Box::new(Error::Shape(format!(
                "{} levels, expected {d}",
                m.n_levels()
            ))),
        });
    }
    Ok(d)
}

fn in_set<T>(set: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::InSet {
        set,
        source: Box::new(e),
    })
}

fn mean(v: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = v.len() as f64;
    v.sum::<f64>() / n
}

/// Runs the extraction over several measurement sets, each with its own
/// frequency data.
///
/// Per-set work runs in parallel; all reductions are sequential in set
/// order so the report does not depend on the thread count.
pub fn run_psep(
    sets: &[CommutingMeasurement],
    data: &[FrequencyRecord],
    config: &PsepConfig,
) -> Result<ExtractionReport> {
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "significance level must be in (0, 1), got {}",
            config.alpha
        )));
    }
    let d = common_levels(sets)?;
    if data.len() != sets.len() {
        return Err(Error::Shape(format!(
            "{} data records for {} measurement sets",
            data.len(),
            sets.len()
        )));
    }
    for (i, (m, f)) in sets.iter().zip(data).enumerate() {
        in_set(i, check_data(m, f))?;
    }

    let (fov, warnings) = match &config.fov {
        Some(fov) => (
            SectorIndexSet::within(fov.as_slice().to_vec(), d)?,
            Vec::new(),
        ),
        None => default_fov(sets)?,
    };

    let systems: Vec<DecisionSystem> = sets
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            in_set(
                i,
                DecisionSystem::new(m, &fov).and_then(|s| {
                    let rank = s.rank();
                    if rank < fov.len() {
                        Err(Error::FovRank {
                            requested: fov.len(),
                            rank,
                        })
                    } else {
                        Ok(s)
                    }
                }),
            )
        })
        .collect::<Result<_>>()?;

    let hints: Vec<DiagonalHint> = sets
        .par_iter()
        .zip(data)
        .enumerate()
        .map(|(i, (m, f))| in_set(i, diagonal_hint(m, f)))
        .collect::<Result<_>>()?;
    let mut hint = vec![0.0; d];
    for h in &hints {
        for (acc, v) in hint.iter_mut().zip(&h.hint) {
            *acc += v;
        }
    }
    for v in &mut hint {
        *v /= sets.len() as f64;
    }
    let sorted_order = match config.order {
        BasisOrder::Hint => sort_levels_by_hint(&hint, fov.as_slice()),
        BasisOrder::Default => fov.sorted().as_slice().to_vec(),
    };
    let ordered = SectorIndexSet::from_iter_unchecked(sorted_order.iter().copied());

    let mut steps = Vec::new();
    let mut status = ExtractionStatus::FovExhausted;
    for size in 1..=fov.len() {
        let sub = ordered.prefix(size);
        let per_set: Vec<(DecisionStatistic, f64)> = systems
            .par_iter()
            .zip(data)
            .enumerate()
            .map(|(i, (sys, f))| {
                in_set(
                    i,
                    sys.observable(&sub, config.residual_tol)
                        .and_then(|obs| Ok((decision_statistic(&obs, f)?, obs.sum_y_sq))),
                )
            })
            .collect::<Result<_>>()?;

        let b: Vec<f64> = per_set.iter().map(|(s, _)| s.b_sub).collect();
        let mean_b = mean(b.iter().copied());
        let var_b = mean(b.iter().map(|v| (v - mean_b) * (v - mean_b)));
        steps.push(ExtractionStep {
            k: size - 1,
            subspace: sub,
            mean_b_sub: mean_b,
            std_b_sub: var_b.sqrt(),
            mean_w: mean(per_set.iter().map(|(s, _)| s.w)),
            mean_variance: mean(per_set.iter().map(|(s, _)| s.variance)),
            mean_sum_y_sq: mean(per_set.iter().map(|(_, y)| *y)),
            b_sub_per_set: b,
        });
        if mean_b >= config.alpha {
            // the whole-fov observable is identically zero and always passes
            if size < fov.len() {
                status = ExtractionStatus::Accepted;
            }
            break;
        }
    }

    let last = steps.last().expect("fov is non-empty");
    let extracted_sector = last.subspace.sorted();
    Ok(ExtractionReport {
        alpha: config.alpha,
        acceptance_rule: "mean_b_sub >= alpha",
        order: config.order,
        n_sets: sets.len(),
        fov,
        hint,
        sorted_order,
        d_phys: extracted_sector.len(),
        extracted_sector,
        steps,
        status,
        warnings,
    })
}
