//! M/G/1-type chain specification: level-homogeneous block sequences with
//! optional parametric power-law tails, exact tail sums via telescoping and
//! bracketed zeta tails, stability (drift) diagnostics, and the JSON chain
//! file format.
//!
//! A chain lives on levels 0,1,2,... with a phase coordinate. Level 0 has
//! `M0` phases, every other level has `M1`. Up-jump blocks from level 0 are
//! `B(k)` (k >= 0), the down block from level 1 is `B(-1)`, and all other
//! levels share the homogeneous blocks `A(k)` for k >= -1.

use serde::{Deserialize, Serialize};

use crate::linalg::{self, graph_analysis, gth_stationary, LinalgError, Matrix, ProbVector};
use crate::series::{self, zeta_tail, SeriesError};
use crate::tails::{IntegratedTail, SurvivalDist};

/// Absolute tolerance for stochastic row sums. Inputs are exact rationals or
/// closed forms; anything looser would mask spec bugs.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Default absolute error budget for infinite-series evaluation.
pub const SERIES_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("index {k} outside sequence domain (k_min = {k_min})")]
    IndexOutOfDomain { k: i64, k_min: i64 },
    #[error("invalid chain spec: {0}")]
    InvalidSpec(String),
    #[error("exponent mismatch: {0}")]
    ExponentMismatch(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("chain spec file: {0}")]
    File(String),
}

/// Parametric power-law tail: block `k` carries mass
/// `D * (k^-gamma - (k+1)^-gamma)` for `k >= k0`, so the lumped mass from
/// level increment `m` onward telescopes to `D * m^-gamma` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTailModel {
    pub gamma: f64,
    pub k0: u32,
    pub d: Matrix,
}

impl PowerTailModel {
    pub fn new(gamma: f64, k0: u32, d: Matrix) -> Self {
        Self { gamma, k0, d }
    }

    /// Block at increment `k`, `k >= k0`.
    pub fn block(&self, k: i64) -> Matrix {
        let k = k as f64;
        self.d
            .scale(k.powf(-self.gamma) - (k + 1.0).powf(-self.gamma))
    }

    /// Total mass of blocks at increments `>= m` (telescoped survivor).
    pub fn survivor(&self, m: i64) -> Matrix {
        let m = (m.max(self.k0 as i64)) as f64;
        self.d.scale(m.powf(-self.gamma))
    }
}

/// A block sequence `{block(k); k >= k_min}`: finitely many explicit blocks,
/// then (optionally) a parametric power tail. Gaps between the explicit
/// region and the tail region are zero blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSequence {
    k_min: i64,
    explicit: Vec<Matrix>,
    tail: Option<PowerTailModel>,
    rows: usize,
    cols_at_zero: usize,
    cols_bulk: usize,
}

impl BlockSequence {
    /// A-type sequence: k_min = -1, every block `m1 x m1`.
    pub fn a_sequence(explicit: Vec<Matrix>, tail: Option<PowerTailModel>, m1: usize) -> Self {
        Self {
            k_min: -1,
            explicit,
            tail,
            rows: m1,
            cols_at_zero: m1,
            cols_bulk: m1,
        }
    }

    /// B-type sequence: k_min = 0; the k = 0 block is `m0 x m0`, the rest are
    /// `m0 x m1`.
    pub fn b_sequence(
        explicit: Vec<Matrix>,
        tail: Option<PowerTailModel>,
        m0: usize,
        m1: usize,
    ) -> Self {
        Self {
            k_min: 0,
            explicit,
            tail,
            rows: m0,
            cols_at_zero: m0,
            cols_bulk: m1,
        }
    }

    pub fn k_min(&self) -> i64 {
        self.k_min
    }

    pub fn explicit_blocks(&self) -> &[Matrix] {
        &self.explicit
    }

    pub fn tail(&self) -> Option<&PowerTailModel> {
        self.tail.as_ref()
    }

    pub fn has_tail(&self) -> bool {
        self.tail.is_some()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    fn cols_at(&self, k: i64) -> usize {
        if k == 0 {
            self.cols_at_zero
        } else {
            self.cols_bulk
        }
    }

    /// Largest increment with a (possibly) nonzero block, or `None` for a
    /// parametric tail (unbounded support).
    pub fn support_max(&self) -> Option<i64> {
        match self.tail {
            Some(_) => None,
            None => Some(self.k_min + self.explicit.len() as i64 - 1),
        }
    }

    /// Block at increment `k`. Zero beyond a finite support and in the gap
    /// before a tail region.
    pub fn block_at(&self, k: i64) -> Result<Matrix, ModelError> {
        if k < self.k_min {
            return Err(ModelError::IndexOutOfDomain {
                k,
                k_min: self.k_min,
            });
        }
        let idx = (k - self.k_min) as usize;
        if idx < self.explicit.len() {
            return Ok(self.explicit[idx].clone());
        }
        if let Some(tail) = &self.tail {
            if k >= tail.k0 as i64 {
                return Ok(tail.block(k));
            }
        }
        Ok(Matrix::zeros(self.rows, self.cols_at(k)))
    }

    /// `sum_{l >= start} block(l)`. Exact: explicit part by finite summation,
    /// tail part by the telescoping survivor identity. The range must not
    /// straddle the k = 0 column-width boundary of a B-type sequence.
    fn sum_from(&self, start: i64) -> Matrix {
        let mut acc = Matrix::zeros(self.rows, self.cols_at(start.max(1)));
        for (i, block) in self.explicit.iter().enumerate() {
            let k = self.k_min + i as i64;
            if k >= start {
                acc.add_assign(block);
            }
        }
        if let Some(tail) = &self.tail {
            acc.add_assign(&tail.survivor(start));
        }
        acc
    }

    /// Lumped tail block `sum_{l >= n+1} block(l)`: the mass a level-increment
    /// truncation at `n+1` relocates onto increment `n+1`. Exact (telescoping
    /// closed form for power tails).
    pub fn tail_sum_bar(&self, n: i64) -> Result<Matrix, ModelError> {
        if n < self.k_min {
            return Err(ModelError::IndexOutOfDomain {
                k: n,
                k_min: self.k_min,
            });
        }
        Ok(self.sum_from(n + 1))
    }

    /// Integrated tail `sum_{l >= n+1} (sum_{j >= l+1} block(j))`, with
    /// certified absolute entry error at most `abs_tol`.
    pub fn tail_sum_doublebar(&self, n: i64, abs_tol: f64) -> Result<Matrix, ModelError> {
        if n < self.k_min {
            return Err(ModelError::IndexOutOfDomain {
                k: n,
                k_min: self.k_min,
            });
        }
        if abs_tol < series::MIN_ABS_TOL {
            return Err(SeriesError::ToleranceUnreachable {
                requested: abs_tol,
                floor: series::MIN_ABS_TOL,
            }
            .into());
        }
        let mut acc = Matrix::zeros(self.rows, self.cols_at((n + 1).max(1)));
        // Explicit block k enters bar(l) for l in [n+1, k-1]: k - n - 1 times.
        for (i, block) in self.explicit.iter().enumerate() {
            let k = self.k_min + i as i64;
            let count = k - n - 1;
            if count > 0 {
                acc.add_assign(&block.scale(count as f64));
            }
        }
        if let Some(tail) = &self.tail {
            let k0 = tail.k0 as i64;
            // bar(l) gains D * max(l+1, k0)^-gamma from the tail region.
            let flat_count = (k0 - n - 2).max(0);
            if flat_count > 0 {
                acc.add_assign(
                    &tail
                        .d
                        .scale(flat_count as f64 * (k0 as f64).powf(-tail.gamma)),
                );
            }
            let zeta_start = (n + 2).max(k0) as u64;
            let d_scale = tail.d.max_entry().max(1.0);
            let z = zeta_tail(tail.gamma, zeta_start, abs_tol / d_scale)?;
            acc.add_assign(&tail.d.scale(z.value));
        }
        Ok(acc)
    }

    /// Row sums of the total mass `sum_k block(k) e`.
    pub fn total_row_sums(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.rows];
        for block in &self.explicit {
            for (a, s) in acc.iter_mut().zip(block.row_sums()) {
                *a += s;
            }
        }
        if let Some(tail) = &self.tail {
            for (a, s) in acc.iter_mut().zip(tail.survivor(tail.k0 as i64).row_sums()) {
                *a += s;
            }
        }
        acc
    }

    /// First-moment vector `sum_k k * block(k) e`, entry error at most
    /// `abs_tol` on the tail contribution.
    pub fn first_moment_e(&self, abs_tol: f64) -> Result<Vec<f64>, ModelError> {
        let mut acc = vec![0.0; self.rows];
        for (i, block) in self.explicit.iter().enumerate() {
            let k = (self.k_min + i as i64) as f64;
            for (a, s) in acc.iter_mut().zip(block.row_sums()) {
                *a += k * s;
            }
        }
        if let Some(tail) = &self.tail {
            let d_scale = tail.d.max_entry().max(1.0);
            let moment =
                series::power_tail_first_moment(tail.gamma, tail.k0 as u64, abs_tol / d_scale)?;
            for (a, s) in acc.iter_mut().zip(tail.d.row_sums()) {
                *a += moment.value * s;
            }
        }
        Ok(acc)
    }
}

/// An M/G/1-type chain: boundary block `B(-1)`, level-0 sequence `B`, and
/// homogeneous sequence `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mg1Spec {
    pub m0: usize,
    pub m1: usize,
    pub b_minus1: Matrix,
    pub bseq: BlockSequence,
    pub aseq: BlockSequence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

impl std::fmt::Display for Severity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Severity::Error => write!(f, "error"),
            Severity::Warning => write!(f, "warning"),
        }
    }
}

/// One validation finding; an empty list means the spec is valid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub severity: Severity,
    pub message: String,
}

impl Violation {
    fn error(message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            message: message.into(),
        }
    }

    fn warning(message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            message: message.into(),
        }
    }
}

/// Stability diagnostics: the stationary phase distribution of
/// `A = sum_k A(k)`, the mean-increment vectors, and the drift
/// `sigma = varpi . mbar_A`.
#[derive(Debug, Clone)]
pub struct DriftReport {
    pub varpi: ProbVector,
    pub mbar_a: Vec<f64>,
    pub sigma: f64,
    pub mbar_b_e: Vec<f64>,
    pub a_irreducible: bool,
    pub mbar_b_finite: bool,
    pub drift_negative: bool,
    /// Sufficient-only irreducibility check of the full chain: `A`
    /// irreducible, `B(-1)` nonzero, some `B(k)` nonzero.
    pub p_irreducible_sufficient: bool,
    pub assumption1_ok: bool,
}

/// Tail-decay limit constants of the integrated block tails against a
/// reference integrated-tail distribution, with numeric ratio diagnostics.
#[derive(Debug, Clone)]
pub struct TailConstants {
    pub c_a: Vec<f64>,
    pub c_b: Vec<f64>,
    /// True when the corresponding sequence has a strictly lighter tail
    /// than the reference (finite support), forcing its constant to zero.
    pub a_lighter: bool,
    pub b_lighter: bool,
    /// Per-sequence ratios `doublebar(N) e / Fbar(N)` on the diagnostic grid.
    pub a_ratios: Vec<(u64, Vec<f64>)>,
    pub b_ratios: Vec<(u64, Vec<f64>)>,
}

impl Mg1Spec {
    /// Checks nonnegativity, dimensions, stochastic row sums, irreducibility
    /// of `A`, and tail-exponent ranges. Violations come back as data; an
    /// empty list means the spec is valid. Irreducibility of the full chain
    /// is checked by a sufficient condition only and reported as a warning
    /// when it fails.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let (m0, m1) = (self.m0, self.m1);

        if self.b_minus1.rows() != m1 || self.b_minus1.cols() != m0 {
            out.push(Violation::error(format!(
                "B(-1) must be {}x{}, got {}x{}",
                m1,
                m0,
                self.b_minus1.rows(),
                self.b_minus1.cols()
            )));
        }
        if !self.b_minus1.is_nonnegative(0.0) {
            out.push(Violation::error("B(-1) has a negative entry"));
        }

        self.check_sequence(&self.aseq, "A", m1, m1, m1, &mut out);
        self.check_sequence(&self.bseq, "B", m0, m0, m1, &mut out);

        // Row-sum stochasticity, tail mass included.
        for (i, s) in self.bseq.total_row_sums().iter().enumerate() {
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                out.push(Violation::error(format!(
                    "level-0 row {i} sums to {s:.17} (needs 1)"
                )));
            }
        }
        let a_from_zero = self.aseq.sum_from(0);
        for (i, (b, a)) in self
            .b_minus1
            .row_sums()
            .iter()
            .zip(a_from_zero.row_sums())
            .enumerate()
        {
            let s = b + a;
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                out.push(Violation::error(format!(
                    "level-1 row {i} sums to {s:.17} (needs 1)"
                )));
            }
        }
        let a_total = self.aseq.sum_from(-1);
        for (i, s) in a_total.row_sums().iter().enumerate() {
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                out.push(Violation::error(format!(
                    "repeating-level row {i} sums to {s:.17} (needs 1)"
                )));
            }
        }

        let a_irreducible = if a_total.is_square() {
            let g = graph_analysis(&a_total, linalg::DEFAULT_SUPPORT_TOL);
            if !g.is_strongly_connected {
                out.push(Violation::error(format!(
                    "A = sum A(k) is reducible ({} communicating classes)",
                    g.num_classes
                )));
            }
            g.is_strongly_connected
        } else {
            false
        };

        // Sufficient-only irreducibility screen for the full chain.
        let b_minus1_nonzero = !self.b_minus1.is_zero(0.0);
        let some_b_nonzero = self.bseq.total_row_sums().iter().any(|&s| s > 0.0);
        if !(a_irreducible && b_minus1_nonzero && some_b_nonzero) {
            out.push(Violation::warning(
                "cannot certify irreducibility of the full chain (sufficient condition: \
                 A irreducible, B(-1) nonzero, some B(k) nonzero); the condition is \
                 sufficient-only and its failure does not prove reducibility",
            ));
        }
        out
    }

    fn check_sequence(
        &self,
        seq: &BlockSequence,
        name: &str,
        rows: usize,
        cols_at_zero: usize,
        cols_bulk: usize,
        out: &mut Vec<Violation>,
    ) {
        for (i, block) in seq.explicit_blocks().iter().enumerate() {
            let k = seq.k_min() + i as i64;
            let want_cols = if k == 0 { cols_at_zero } else { cols_bulk };
            if block.rows() != rows || block.cols() != want_cols {
                out.push(Violation::error(format!(
                    "{name}({k}) must be {rows}x{want_cols}, got {}x{}",
                    block.rows(),
                    block.cols()
                )));
            }
            if !block.is_nonnegative(0.0) {
                out.push(Violation::error(format!(
                    "{name}({k}) has a negative entry"
                )));
            }
        }
        if let Some(tail) = seq.tail() {
            if tail.gamma <= 1.0 {
                out.push(Violation::error(format!(
                    "{name} tail exponent gamma = {} must exceed 1",
                    tail.gamma
                )));
            }
            if tail.k0 == 0 {
                out.push(Violation::error(format!("{name} tail k0 must be >= 1")));
            }
            if tail.d.rows() != rows || tail.d.cols() != cols_bulk {
                out.push(Violation::error(format!(
                    "{name} tail coefficient must be {rows}x{cols_bulk}, got {}x{}",
                    tail.d.rows(),
                    tail.d.cols()
                )));
            }
            if !tail.d.is_nonnegative(0.0) {
                out.push(Violation::error(format!(
                    "{name} tail coefficient has a negative entry"
                )));
            }
            let explicit_end = seq.k_min() + seq.explicit_blocks().len() as i64;
            if explicit_end > tail.k0 as i64 {
                out.push(Violation::error(format!(
                    "{name} explicit blocks run to k = {} but the tail starts at k0 = {}",
                    explicit_end - 1,
                    tail.k0
                )));
            }
        }
    }

    fn require_valid(&self) -> Result<(), ModelError> {
        let errors: Vec<String> = self
            .validate()
            .into_iter()
            .filter(|v| v.severity == Severity::Error)
            .map(|v| v.message)
            .collect();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ModelError::InvalidSpec(errors.join("; ")))
        }
    }

    /// Drift and stability report: `varpi` is the stationary distribution of
    /// `A = sum_k A(k)` (assembled exactly, tail mass included) and
    /// `sigma = varpi . mbar_A` the mean level increment in steady phase.
    pub fn drift_report(&self) -> Result<DriftReport, ModelError> {
        self.require_valid()?;
        let a_total = self.aseq.sum_from(-1);
        let varpi = gth_stationary(&a_total)?;
        let mbar_a = self.aseq.first_moment_e(SERIES_TOL)?;
        let sigma: f64 = varpi
            .as_slice()
            .iter()
            .zip(&mbar_a)
            .map(|(p, m)| p * m)
            .sum();
        let mbar_b_e = self.bseq.first_moment_e(SERIES_TOL)?;

        let a_irreducible =
            graph_analysis(&a_total, linalg::DEFAULT_SUPPORT_TOL).is_strongly_connected;
        let mbar_b_finite = mbar_b_e.iter().all(|v| v.is_finite());
        let drift_negative = sigma < 0.0;
        let p_irreducible_sufficient = a_irreducible
            && !self.b_minus1.is_zero(0.0)
            && self.bseq.total_row_sums().iter().any(|&s| s > 0.0);
        Ok(DriftReport {
            varpi,
            mbar_a,
            sigma,
            mbar_b_e,
            a_irreducible,
            mbar_b_finite,
            drift_negative,
            p_irreducible_sufficient,
            assumption1_ok: a_irreducible && mbar_b_finite && drift_negative,
        })
    }

    /// Limits `c_A = lim doublebar-A(N) e / Fbar(N)` and `c_B` alike against
    /// the integrated tail `f`. For power tails matched to `f`'s exponent the
    /// closed form is `D e / (gamma - 1)`; finite-support sequences give a
    /// zero vector (strictly lighter tail). Errors when a power tail's
    /// exponent differs from `f`'s (the limit is 0 or infinite) or when both
    /// constants vanish.
    pub fn tail_constants(&self, f: &IntegratedTail) -> Result<TailConstants, ModelError> {
        const DIAG_NS: [u64; 3] = [100, 1_000, 10_000];

        let closed_form = |seq: &BlockSequence,
                           name: &str|
         -> Result<(Vec<f64>, bool), ModelError> {
            match seq.tail() {
                Some(tail) if !tail.d.is_zero(0.0) => {
                    if (tail.gamma - f.source_gamma()).abs() > 1e-9 {
                        Err(ModelError::ExponentMismatch(format!(
                            "{name} tail exponent {} vs reference {}; the ratio limit is 0 or infinite",
                            tail.gamma,
                            f.source_gamma()
                        )))
                    } else {
                        let c = tail
                            .d
                            .row_sums()
                            .iter()
                            .map(|s| s / (tail.gamma - 1.0))
                            .collect();
                        Ok((c, false))
                    }
                }
                _ => Ok((vec![0.0; seq.rows()], true)),
            }
        };

        let (c_a, a_lighter) = closed_form(&self.aseq, "A")?;
        let (c_b, b_lighter) = closed_form(&self.bseq, "B")?;
        if a_lighter && b_lighter {
            return Err(ModelError::ExponentMismatch(
                "both sequences have strictly lighter tails than the reference; \
                 a non-zero limit vector is required"
                    .into(),
            ));
        }

        let ratios = |seq: &BlockSequence| -> Result<Vec<(u64, Vec<f64>)>, ModelError> {
            DIAG_NS
                .iter()
                .map(|&n| {
                    let dd = seq.tail_sum_doublebar(n as i64, SERIES_TOL)?;
                    let fbar = f.survival(n as f64).expect("grid point is nonnegative");
                    Ok((n, dd.row_sums().iter().map(|s| s / fbar).collect()))
                })
                .collect()
        };
        Ok(TailConstants {
            c_a,
            c_b,
            a_lighter,
            b_lighter,
            a_ratios: ratios(&self.aseq)?,
            b_ratios: ratios(&self.bseq)?,
        })
    }
}

// ---------------------------------------------------------------------------
// Chain-spec file format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TailFile {
    gamma: f64,
    k0: u32,
    #[serde(rename = "D")]
    d: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct SeqFile {
    explicit: Vec<Vec<Vec<f64>>>,
    tail: Option<TailFile>,
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    #[serde(rename = "M0")]
    m0: usize,
    #[serde(rename = "M1")]
    m1: usize,
    #[serde(rename = "B_minus1")]
    b_minus1: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: SeqFile,
    #[serde(rename = "A")]
    a: SeqFile,
}

fn rows_to_matrix(rows: &[Vec<f64>], what: &str) -> Result<Matrix, ModelError> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(ModelError::File(format!("{what}: empty matrix")));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(ModelError::File(format!("{what}: ragged rows")));
    }
    let data: Vec<f64> = rows.iter().flatten().copied().collect();
    Matrix::new(rows.len(), cols, data).map_err(|e| ModelError::File(format!("{what}: {e}")))
}

fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn seq_from_file(
    sf: &SeqFile,
    name: &str,
    is_a: bool,
    m0: usize,
    m1: usize,
) -> Result<BlockSequence, ModelError> {
    let explicit: Vec<Matrix> = sf
        .explicit
        .iter()
        .enumerate()
        .map(|(i, rows)| rows_to_matrix(rows, &format!("{name}.explicit[{i}]")))
        .collect::<Result<_, _>>()?;
    let tail = sf
        .tail
        .as_ref()
        .map(|t| -> Result<PowerTailModel, ModelError> {
            Ok(PowerTailModel::new(
                t.gamma,
                t.k0,
                rows_to_matrix(&t.d, &format!("{name}.tail.D"))?,
            ))
        })
        .transpose()?;
    Ok(if is_a {
        BlockSequence::a_sequence(explicit, tail, m1)
    } else {
        BlockSequence::b_sequence(explicit, tail, m0, m1)
    })
}

impl Mg1Spec {
    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        let sf: SpecFile =
            serde_json::from_str(text).map_err(|e| ModelError::File(e.to_string()))?;
        if sf.m0 == 0 || sf.m1 == 0 {
            return Err(ModelError::File("M0 and M1 must be positive".into()));
        }
        Ok(Mg1Spec {
            m0: sf.m0,
            m1: sf.m1,
            b_minus1: rows_to_matrix(&sf.b_minus1, "B_minus1")?,
            bseq: seq_from_file(&sf.b, "B", false, sf.m0, sf.m1)?,
            aseq: seq_from_file(&sf.a, "A", true, sf.m0, sf.m1)?,
        })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::File(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        let seq_to_file = |seq: &BlockSequence| SeqFile {
            explicit: seq.explicit_blocks().iter().map(matrix_to_rows).collect(),
            tail: seq.tail().map(|t| TailFile {
                gamma: t.gamma,
                k0: t.k0,
                d: matrix_to_rows(&t.d),
            }),
        };
        let sf = SpecFile {
            m0: self.m0,
            m1: self.m1,
            b_minus1: matrix_to_rows(&self.b_minus1),
            b: seq_to_file(&self.bseq),
            a: seq_to_file(&self.aseq),
        };
        serde_json::to_string_pretty(&sf).expect("spec serialization cannot fail")
    }
}

// ---------------------------------------------------------------------------
// Built-in chains (also shipped as JSON under chains/)
// ---------------------------------------------------------------------------

/// Scalar birth-death chain with bounded increments: down 0.6, up 0.4, at
/// every level. Its stationary law is the geometric `pi(k) = (1/3)(2/3)^k`.
pub fn scalar_birth_death() -> Mg1Spec {
    Mg1Spec {
        m0: 1,
        m1: 1,
        b_minus1: Matrix::scalar(0.6),
        bseq: BlockSequence::b_sequence(vec![Matrix::scalar(0.6), Matrix::scalar(0.4)], None, 1, 1),
        aseq: BlockSequence::a_sequence(
            vec![
                Matrix::scalar(0.6),
                Matrix::scalar(0.0),
                Matrix::scalar(0.4),
            ],
            None,
            1,
        ),
    }
}

/// Scalar heavy-tailed chain: down 0.7, up-jump masses
/// `0.3 (k^-gamma - (k+1)^-gamma)` for k >= 1. Boundary blocks mirror the
/// homogeneous ones, so level 0 behaves like a reflected copy.
pub fn scalar_power_tail(gamma: f64) -> Mg1Spec {
    let tail = || PowerTailModel::new(gamma, 1, Matrix::scalar(0.3));
    Mg1Spec {
        m0: 1,
        m1: 1,
        b_minus1: Matrix::scalar(0.7),
        bseq: BlockSequence::b_sequence(vec![Matrix::scalar(0.7)], Some(tail()), 1, 1),
        aseq: BlockSequence::a_sequence(
            vec![Matrix::scalar(0.7), Matrix::scalar(0.0)],
            Some(tail()),
            1,
        ),
    }
}

/// Two-phase heavy-tailed chain with a strictly positive tail coefficient
/// block (gamma = 3): exercises genuine phase structure while keeping the
/// boundary consistent with the repeating part.
pub fn two_phase_power_tail() -> Mg1Spec {
    let a_minus1 = Matrix::from_rows(&[vec![0.5, 0.2], vec![0.3, 0.4]]);
    let a0 = Matrix::from_rows(&[vec![0.10, 0.05], vec![0.05, 0.10]]);
    let d = Matrix::from_rows(&[vec![0.10, 0.05], vec![0.04, 0.11]]);
    let tail = || PowerTailModel::new(3.0, 1, d.clone());
    Mg1Spec {
        m0: 2,
        m1: 2,
        b_minus1: a_minus1.clone(),
        bseq: BlockSequence::b_sequence(vec![a_minus1.add(&a0)], Some(tail()), 2, 2),
        aseq: BlockSequence::a_sequence(vec![a_minus1, a0], Some(tail()), 2),
    }
}
