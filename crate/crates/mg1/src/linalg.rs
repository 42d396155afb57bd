//! Dense row-major matrix/vector primitives and the numerically stable
//! solvers the rest of the crate builds on: GTH elimination for stationary
//! vectors, an LU-based `(I - M)X = rhs` solver, and communicating-class /
//! period analysis of support digraphs.

use thiserror::Error;

/// Support edges `i -> j` are declared when `M[i,j]` exceeds this tolerance.
/// Entries below the LU pivot tolerance are numerically zero.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-14;

/// Pivot magnitude below which an LU factorization is declared singular.
pub const PIVOT_TOL: f64 = 1e-14;

/// Absolute row-sum tolerance for accepting a matrix as stochastic.
pub const ROW_SUM_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("not a stochastic matrix: {0}")]
    NotStochastic(String),
    #[error("reducible chain: {0}")]
    Reducible(String),
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry: {0}")]
    NonFinite(String),
}

/// Dense real matrix, row-major. Row = source state, column = destination.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{rows}x{cols} matrix from {} entries",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite(format!("entry {bad}")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds from nested rows. Panics on ragged input; intended for literals.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].len();
        assert!(cols > 0, "matrix needs at least one column");
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn scalar(v: f64) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![v],
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn same_shape(&self, other: &Matrix) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert!(self.same_shape(other), "add: shape mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// `self += other` without reallocating.
    pub fn add_assign(&mut self, other: &Matrix) {
        assert!(self.same_shape(other), "add_assign: shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul: inner dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// Row vector times matrix: `x * M`.
    pub fn left_mul(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "left_mul: dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(self.row(i)) {
                *o += xi * m;
            }
        }
        out
    }

    /// Matrix times column vector: `M * x`.
    pub fn mul_col(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mul_col: dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(m, v)| m * v).sum())
            .collect()
    }

    /// Row sums, i.e. `M e`.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert!(self.same_shape(other), "max_abs_diff: shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_nonnegative(&self, tol: f64) -> bool {
        self.data.iter().all(|&v| v >= -tol)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.data.iter().all(|&v| v.abs() <= tol)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Probability vector: entries in [0,1] summing to one when flagged as a
/// distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    entries: Vec<f64>,
}

impl ProbVector {
    pub fn new(entries: Vec<f64>) -> Self {
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// Sums to one within `tol` with entries in [0 - tol, 1 + tol].
    pub fn is_distribution(&self, tol: f64) -> bool {
        (self.sum() - 1.0).abs() <= tol && self.entries.iter().all(|&v| v >= -tol && v <= 1.0 + tol)
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

/// Stationary vector of an irreducible stochastic matrix via
/// Grassmann-Taksar-Heyman elimination. The elimination never subtracts
/// like-signed quantities, so the result carries high relative accuracy.
pub fn gth_stationary(p: &Matrix) -> Result<ProbVector, LinalgError> {
    if !p.is_square() {
        return Err(LinalgError::DimensionMismatch(format!(
            "stationary vector of a {}x{} matrix",
            p.rows(),
            p.cols()
        )));
    }
    let n = p.rows();
    for (i, s) in p.row_sums().iter().enumerate() {
        if (s - 1.0).abs() > ROW_SUM_TOL {
            return Err(LinalgError::NotStochastic(format!(
                "row {i} sums to {s:.17e}"
            )));
        }
    }
    if !p.is_nonnegative(0.0) {
        return Err(LinalgError::NotStochastic(
            "negative transition probability".into(),
        ));
    }

    let mut a = p.clone();
    // Censor states n-1, ..., 1 in turn. The exit mass s below is a sum of
    // nonnegative entries, standing in for 1 - a[k][k].
    for k in (1..n).rev() {
        let s: f64 = (0..k).map(|j| a[(k, j)]).sum();
        if s <= 0.0 {
            return Err(LinalgError::Reducible(format!(
                "state {k} cannot reach states below it (zero pivot column)"
            )));
        }
        for i in 0..k {
            a[(i, k)] /= s;
        }
        for i in 0..k {
            let f = a[(i, k)];
            if f == 0.0 {
                continue;
            }
            for j in 0..k {
                let add = f * a[(k, j)];
                a[(i, j)] += add;
            }
        }
    }

    // Unfold: x[k] accumulates the expected visits to state k between
    // returns to state 0 of the censored chains.
    let mut x = vec![0.0; n];
    x[0] = 1.0;
    for k in 1..n {
        x[k] = (0..k).map(|i| x[i] * a[(i, k)]).sum();
    }
    let total: f64 = x.iter().sum();
    for v in &mut x {
        *v /= total;
    }
    Ok(ProbVector::new(x))
}

struct LuFactors {
    lu: Matrix,
    perm: Vec<usize>,
}

fn lu_factor(a: Matrix) -> Result<LuFactors, LinalgError> {
    let n = a.rows();
    let mut lu = a;
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let (pivot_row, pivot_val) = (col..n)
            .map(|r| (r, lu[(r, col)].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty pivot search");
        if pivot_val < PIVOT_TOL {
            return Err(LinalgError::SingularSystem(format!(
                "pivot {pivot_val:.3e} below {PIVOT_TOL:.0e} at column {col}"
            )));
        }
        if pivot_row != col {
            perm.swap(pivot_row, col);
            for j in 0..n {
                let tmp = lu[(pivot_row, j)];
                lu[(pivot_row, j)] = lu[(col, j)];
                lu[(col, j)] = tmp;
            }
        }
        let inv_p = 1.0 / lu[(col, col)];
        for r in col + 1..n {
            let f = lu[(r, col)] * inv_p;
            lu[(r, col)] = f;
            if f == 0.0 {
                continue;
            }
            for j in col + 1..n {
                let sub = f * lu[(col, j)];
                lu[(r, j)] -= sub;
            }
        }
    }
    Ok(LuFactors { lu, perm })
}

impl LuFactors {
    fn solve_col(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                y[i] -= self.lu[(i, j)] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.lu[(i, j)] * y[j];
            }
            y[i] /= self.lu[(i, i)];
        }
        y
    }
}

/// Solves `(I - M) X = rhs` by LU with partial pivoting. The caller
/// guarantees the spectral radius of `M` is below one; violations surface
/// as a small pivot or a failed residual check.
pub fn solve_i_minus(m: &Matrix, rhs: &Matrix) -> Result<Matrix, LinalgError> {
    if !m.is_square() || m.rows() != rhs.rows() {
        return Err(LinalgError::DimensionMismatch(format!(
            "(I - M)X = rhs with M {}x{}, rhs {}x{}",
            m.rows(),
            m.cols(),
            rhs.rows(),
            rhs.cols()
        )));
    }
    let n = m.rows();
    let mut a = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] -= m[(i, j)];
        }
    }
    let factors = lu_factor(a)?;

    let mut x = Matrix::zeros(n, rhs.cols());
    let mut col = vec![0.0; n];
    for j in 0..rhs.cols() {
        for i in 0..n {
            col[i] = rhs[(i, j)];
        }
        let sol = factors.solve_col(&col);
        for i in 0..n {
            x[(i, j)] = sol[i];
        }
    }

    // Residual check guards against near-unit spectral radius that survived
    // the pivot threshold.
    let mx = m.matmul(&x);
    let mut resid = 0.0f64;
    for i in 0..n {
        for j in 0..rhs.cols() {
            resid = resid.max((x[(i, j)] - mx[(i, j)] - rhs[(i, j)]).abs());
        }
    }
    let scale = rhs.inf_norm().max(f64::MIN_POSITIVE);
    if resid > 1e-12 * scale.max(1.0) * n as f64 {
        return Err(LinalgError::SingularSystem(format!(
            "residual {resid:.3e} exceeds tolerance; spectral radius likely >= 1"
        )));
    }
    Ok(x)
}

/// Column-vector convenience wrapper for [`solve_i_minus`].
pub fn solve_i_minus_col(m: &Matrix, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let r = Matrix::new(rhs.len(), 1, rhs.to_vec())?;
    let x = solve_i_minus(m, &r)?;
    Ok((0..rhs.len()).map(|i| x[(i, 0)]).collect())
}

/// One communicating class of a support digraph.
#[derive(Debug, Clone, PartialEq)]
pub struct CommClass {
    pub states: Vec<usize>,
    /// No support edge leaves the class (closed = recurrent for finite chains).
    pub is_closed: bool,
    /// gcd of cycle lengths inside the class; 0 when the class has no cycle
    /// (transient singleton without self-loop).
    pub period: usize,
}

/// Communicating-class structure of the support digraph of a nonnegative
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphAnalysis {
    pub num_classes: usize,
    pub is_strongly_connected: bool,
    /// Period of the whole graph when it is a single class.
    pub period: Option<usize>,
    pub classes: Vec<CommClass>,
}

/// Communicating classes and periods of the support digraph of `m`
/// (edge `i -> j` iff `m[i,j] > support_tol`). Total on any square input;
/// depends on the support only, not on entry magnitudes.
pub fn graph_analysis(m: &Matrix, support_tol: f64) -> GraphAnalysis {
    assert!(m.is_square(), "graph_analysis: square matrix required");
    let n = m.rows();
    let mut adj = vec![Vec::new(); n];
    let mut radj = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if m[(i, j)] > support_tol {
                adj[i].push(j);
                radj[j].push(i);
            }
        }
    }

    // Kosaraju with explicit stacks.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        seen[start] = true;
        while let Some(&mut (v, ref mut idx)) = stack.last_mut() {
            if *idx < adj[v].len() {
                let u = adj[v][*idx];
                *idx += 1;
                if !seen[u] {
                    seen[u] = true;
                    stack.push((u, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }

    let mut comp = vec![usize::MAX; n];
    let mut num_classes = 0;
    for &start in order.iter().rev() {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = num_classes;
        while let Some(v) = stack.pop() {
            for &u in &radj[v] {
                if comp[u] == usize::MAX {
                    comp[u] = num_classes;
                    stack.push(u);
                }
            }
        }
        num_classes += 1;
    }

    let mut classes = Vec::with_capacity(num_classes);
    for c in 0..num_classes {
        let states: Vec<usize> = (0..n).filter(|&v| comp[v] == c).collect();
        let is_closed = states.iter().all(|&v| adj[v].iter().all(|&u| comp[u] == c));
        let period = class_period(&states, &adj, &comp, c);
        classes.push(CommClass {
            states,
            is_closed,
            period,
        });
    }

    let is_strongly_connected = num_classes == 1;
    let period = is_strongly_connected.then(|| classes[0].period);
    GraphAnalysis {
        num_classes,
        is_strongly_connected,
        period,
        classes,
    }
}

/// Period of one strongly connected class: gcd of `d(u) + 1 - d(v)` over its
/// internal edges, with `d` the BFS level from an arbitrary root.
fn class_period(states: &[usize], adj: &[Vec<usize>], comp: &[usize], c: usize) -> usize {
    let root = states[0];
    let mut dist = vec![i64::MIN; adj.len()];
    dist[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if comp[u] == c && dist[u] == i64::MIN {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    let mut g: u64 = 0;
    for &v in states {
        for &u in &adj[v] {
            if comp[u] == c {
                let diff = (dist[v] + 1 - dist[u]).unsigned_abs();
                g = gcd(g, diff);
            }
        }
    }
    g as usize
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
