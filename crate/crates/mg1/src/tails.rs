//! Heavy-tail distribution machinery: the power-law survival family, its
//! integrated tail, and executable membership diagnostics for the
//! long-tailed (L), subexponential (S), and p-th-order long-tailed (L^p)
//! classes.
//!
//! The class checks are finite-grid diagnostics, not proofs: each one
//! evaluates the defining ratio on an explicit grid and reports the trend
//! plus a verdict at a documented tolerance. A light-tailed control
//! distribution ships alongside so every check is falsifiable.

use thiserror::Error;

/// Default evaluation grid for the shift-ratio checks (closed-form cheap).
pub const DEFAULT_GRID: [f64; 4] = [1e3, 1e4, 1e5, 1e6];

/// Default grid for the self-convolution check; points must stay at or
/// below half the discretization cutoff.
pub const SUBEXP_GRID: [f64; 3] = [100.0, 1_000.0, 5_000.0];

/// Default discretization cutoff for the self-convolution check.
pub const SUBEXP_CUTOFF: usize = 10_000;

/// Verdict tolerance for the L / L^p ratio checks at the end of the grid.
pub const SHIFT_RATIO_TOL: f64 = 1e-2;

/// Verdict tolerance for the subexponential ratio against its limit 2.
pub const CONV_RATIO_TOL: f64 = 5e-2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TailError {
    #[error("negative argument {0} to a survival function")]
    NegativeArgument(f64),
    #[error("gamma = {0} too small: {1}")]
    GammaTooSmall(f64, &'static str),
    #[error("grid underflow: shifted argument {0} is negative")]
    GridUnderflow(f64),
    #[error("cutoff too small: {0}")]
    CutoffTooSmall(String),
}

/// A nonnegative distribution exposed through its survival function.
pub trait SurvivalDist {
    /// `P(Y > x)` for `x >= 0`.
    fn survival(&self, x: f64) -> Result<f64, TailError>;
}

/// Power-law distribution with survival `(x+1)^-gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTail {
    gamma: f64,
}

impl PowerTail {
    pub fn new(gamma: f64) -> Result<Self, TailError> {
        if gamma <= 0.0 {
            return Err(TailError::GammaTooSmall(
                gamma,
                "survival (x+1)^-gamma needs gamma > 0",
            ));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The integrated tail distribution, with survival `(x+1)^{1-gamma}`
    /// (this equals `(gamma-1) * integral_x^inf survival`). Requires a
    /// finite mean, i.e. `gamma > 1`.
    pub fn integrated_tail(&self) -> Result<IntegratedTail, TailError> {
        IntegratedTail::new(self.gamma)
    }
}

impl SurvivalDist for PowerTail {
    fn survival(&self, x: f64) -> Result<f64, TailError> {
        if x < 0.0 {
            return Err(TailError::NegativeArgument(x));
        }
        Ok((x + 1.0).powf(-self.gamma))
    }
}

/// Integrated tail of a [`PowerTail`]: survival `(x+1)^{1-gamma}` where
/// `gamma` is the source exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratedTail {
    source_gamma: f64,
}

impl IntegratedTail {
    pub fn new(source_gamma: f64) -> Result<Self, TailError> {
        if source_gamma <= 1.0 {
            return Err(TailError::GammaTooSmall(
                source_gamma,
                "the integrated tail diverges unless gamma > 1",
            ));
        }
        Ok(Self { source_gamma })
    }

    pub fn source_gamma(&self) -> f64 {
        self.source_gamma
    }
}

impl SurvivalDist for IntegratedTail {
    fn survival(&self, x: f64) -> Result<f64, TailError> {
        if x < 0.0 {
            return Err(TailError::NegativeArgument(x));
        }
        Ok((x + 1.0).powf(1.0 - self.source_gamma))
    }
}

/// Light-tailed negative control with survival `exp(-x)`. Memorylessness
/// makes every heavy-tail check fail on it.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LightTailControl;

impl SurvivalDist for LightTailControl {
    fn survival(&self, x: f64) -> Result<f64, TailError> {
        if x < 0.0 {
            return Err(TailError::NegativeArgument(x));
        }
        Ok((-x).exp())
    }
}

/// Grid diagnostics for one class-membership check.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDiagnostics {
    pub xs: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Ratio at the verdict point (the best finite-grid limit estimate).
    pub limit_estimate: f64,
    pub verdict: bool,
}

fn ratios_verdict(xs: &[f64], ratios: Vec<f64>, target: f64, tol: f64) -> ClassDiagnostics {
    let finite = ratios.iter().all(|r| r.is_finite() && *r > 0.0);
    let gaps: Vec<f64> = ratios.iter().map(|r| (r - target).abs()).collect();
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0] + 1e-15);
    let last = *ratios.last().unwrap_or(&f64::NAN);
    let verdict = finite && monotone && (last - target).abs() <= tol;
    ClassDiagnostics {
        xs: xs.to_vec(),
        ratios,
        limit_estimate: last,
        verdict,
    }
}

/// Long-tailed check: `survival(x+y) / survival(x)` must tend to 1. Verdict
/// is true when the final grid ratio is within 1e-2 of 1 and the ratios move
/// monotonically toward 1.
pub fn check_long_tailed<F: SurvivalDist>(
    f: &F,
    y: f64,
    xs: &[f64],
) -> Result<ClassDiagnostics, TailError> {
    assert!(y >= 0.0, "shift must be nonnegative");
    assert!(
        xs.windows(2).all(|w| w[0] < w[1]) && xs.first().is_some_and(|&x| x > 0.0),
        "grid must be increasing and positive"
    );
    let ratios = xs
        .iter()
        .map(|&x| Ok(f.survival(x + y)? / f.survival(x)?))
        .collect::<Result<Vec<_>, TailError>>()?;
    Ok(ratios_verdict(xs, ratios, 1.0, SHIFT_RATIO_TOL))
}

/// p-th-order long-tailed check via the shift criterion:
/// `survival(x - xi * x^{1-1/p}) / survival(x)` must tend to 1 for p >= 1.
pub fn check_p_order<F: SurvivalDist>(
    f: &F,
    p: f64,
    xi: f64,
    xs: &[f64],
) -> Result<ClassDiagnostics, TailError> {
    assert!(p >= 1.0, "order must be at least 1");
    assert!(
        xs.windows(2).all(|w| w[0] < w[1]) && xs.first().is_some_and(|&x| x > 0.0),
        "grid must be increasing and positive"
    );
    let ratios = xs
        .iter()
        .map(|&x| {
            let shifted = x - xi * x.powf(1.0 - 1.0 / p);
            if shifted < 0.0 {
                return Err(TailError::GridUnderflow(shifted));
            }
            Ok(f.survival(shifted)? / f.survival(x)?)
        })
        .collect::<Result<Vec<_>, TailError>>()?;
    Ok(ratios_verdict(xs, ratios, 1.0, SHIFT_RATIO_TOL))
}

/// Subexponential check by brute-force self-convolution. The distribution is
/// discretized on the integers with mass `p_k = survival(k-1) - survival(k)`
/// and the two-fold convolution tail `P(Y1 + Y2 > x)` is summed directly;
/// the reported ratios `P(Y1+Y2 > x) / P(Y > x)` must tend to 2. The verdict
/// is taken at the largest grid point at or below `cutoff / 2`, tolerance
/// 5e-2. This direct summation is the independent oracle for the class.
pub fn check_subexponential<F: SurvivalDist>(
    f: &F,
    cutoff: usize,
    xs: &[f64],
) -> Result<ClassDiagnostics, TailError> {
    let points: Vec<usize> = xs
        .iter()
        .filter(|&&x| x >= 1.0 && x <= cutoff as f64)
        .map(|&x| x.round() as usize)
        .collect();
    if points.is_empty() || !points.iter().any(|&x| x <= cutoff / 2) {
        return Err(TailError::CutoffTooSmall(format!(
            "no grid point at or below cutoff/2 = {}",
            cutoff / 2
        )));
    }
    let max_x = *points.iter().max().unwrap();

    // p_k = survival(k-1) - survival(k), with survival(-1) := 1.
    let mut mass = Vec::with_capacity(max_x + 1);
    let mut prev = 1.0;
    for k in 0..=max_x {
        let s = f.survival(k as f64)?;
        mass.push((prev - s).max(0.0));
        prev = s;
    }

    let mut ratios = Vec::with_capacity(points.len());
    let mut verdict_ratio = f64::NAN;
    for &x in &points {
        let sx = f.survival(x as f64)?;
        if sx <= 0.0 || !sx.is_finite() {
            return Err(TailError::CutoffTooSmall(format!(
                "survival vanishes at grid point {x}; the discretized tail is degenerate there"
            )));
        }
        // P(Y1+Y2 > x) = sum_{i<=x} p_i survival(x-i) + survival(x).
        let mut conv = sx;
        for (i, p) in mass.iter().enumerate().take(x + 1) {
            conv += p * f.survival((x - i) as f64)?;
        }
        let r = conv / sx;
        ratios.push(r);
        if x <= cutoff / 2 {
            verdict_ratio = r;
        }
    }
    let verdict = verdict_ratio.is_finite() && (verdict_ratio - 2.0).abs() <= CONV_RATIO_TOL;
    Ok(ClassDiagnostics {
        xs: points.iter().map(|&x| x as f64).collect(),
        ratios,
        limit_estimate: verdict_ratio,
        verdict,
    })
}
