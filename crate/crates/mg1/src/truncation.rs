//! Level-increment (LI) truncation: replace jump blocks beyond increment `N`
//! by lumping their total mass at increment exactly `N`, producing a chain
//! with bounded level increments on which the stationary recursion has only
//! finite sums.

use crate::model::{BlockSequence, Mg1Spec, ModelError};

/// An LI-truncated chain: same boundary block, finite-support sequences
/// `A(k)` for `k = -1..N` and `B(k)` for `k = 0..N`, with
/// `A(N) = sum_{l >= N} A_orig(l)` (and likewise for `B`). Blocks are
/// materialized dense so every downstream sum is a finite loop.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSpec {
    n: usize,
    spec: Mg1Spec,
}

impl TruncatedSpec {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The truncated chain as an ordinary spec (finite support, no tail).
    pub fn spec(&self) -> &Mg1Spec {
        &self.spec
    }

    /// `A(k)` for `k = -1..=N`; index 0 holds `k = -1`.
    pub fn a_blocks(&self) -> &[crate::linalg::Matrix] {
        self.spec.aseq.explicit_blocks()
    }

    /// `B(k)` for `k = 0..=N`.
    pub fn b_blocks(&self) -> &[crate::linalg::Matrix] {
        self.spec.bseq.explicit_blocks()
    }

    pub fn a_block(&self, k: i64) -> &crate::linalg::Matrix {
        &self.a_blocks()[(k + 1) as usize]
    }

    pub fn b_block(&self, k: i64) -> &crate::linalg::Matrix {
        &self.b_blocks()[k as usize]
    }

    pub fn m0(&self) -> usize {
        self.spec.m0
    }

    pub fn m1(&self) -> usize {
        self.spec.m1
    }

    pub fn b_minus1(&self) -> &crate::linalg::Matrix {
        &self.spec.b_minus1
    }
}

/// LI truncation at increment `N >= 1`: keeps `A(k)` for `k < N`, lumps
/// `sum_{l >= N} A(l)` at `k = N`, zeroes everything beyond (same for `B`).
/// Mass is conserved row by row, so the output validates as a chain spec.
pub fn li_truncate(spec: &Mg1Spec, n: usize) -> Result<TruncatedSpec, ModelError> {
    if n == 0 {
        return Err(ModelError::InvalidSpec(
            "truncation increment must be at least 1".into(),
        ));
    }
    let errors: Vec<String> = spec
        .validate()
        .into_iter()
        .filter(|v| v.severity == crate::model::Severity::Error)
        .map(|v| v.message)
        .collect();
    if !errors.is_empty() {
        return Err(ModelError::InvalidSpec(errors.join("; ")));
    }

    let n_i = n as i64;
    let mut a_blocks = Vec::with_capacity(n + 2);
    for k in -1..n_i {
        a_blocks.push(spec.aseq.block_at(k)?);
    }
    a_blocks.push(spec.aseq.tail_sum_bar(n_i - 1)?);

    let mut b_blocks = Vec::with_capacity(n + 1);
    for k in 0..n_i {
        b_blocks.push(spec.bseq.block_at(k)?);
    }
    b_blocks.push(spec.bseq.tail_sum_bar(n_i - 1)?);

    Ok(TruncatedSpec {
        n,
        spec: Mg1Spec {
            m0: spec.m0,
            m1: spec.m1,
            b_minus1: spec.b_minus1.clone(),
            bseq: BlockSequence::b_sequence(b_blocks, None, spec.m0, spec.m1),
            aseq: BlockSequence::a_sequence(a_blocks, None, spec.m1),
        },
    })
}
