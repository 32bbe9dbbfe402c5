//! Dense linear algebra helpers over `Complex64`.
//!
//! Ranks are decided from singular values against a relative threshold
//! `tol · σ_max`. A decision is flagged ambiguous when some singular value
//! sits within two decades of the threshold on either side.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Result, StrataError};

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;

/// Default relative rank threshold.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Width (as a factor) of the band around the threshold treated as ambiguous.
pub const AMBIGUITY_FACTOR: f64 = 1e2;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Outcome of a numerical rank decision.
#[derive(Clone, Debug, PartialEq)]
pub struct RankDecision {
    pub rank: usize,
    pub ambiguous: bool,
    pub sigma_max: f64,
    /// Smallest ratio `σ/σ_max` counted in the rank and largest ratio left out.
    pub kept_min_ratio: f64,
    pub dropped_max_ratio: f64,
}

/// Singular values in decreasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn singular_values_real(m: &RMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Counts singular values at or above `tol · σ_max`; zero when `σ_max = 0`.
pub fn rank_from_singular_values(sv: &[f64], tol: f64) -> RankDecision {
    let sigma_max = sv.iter().copied().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return RankDecision {
            rank: 0,
            ambiguous: false,
            sigma_max,
            kept_min_ratio: f64::INFINITY,
            dropped_max_ratio: 0.0,
        };
    }
    let lo = tol / AMBIGUITY_FACTOR;
    let hi = tol * AMBIGUITY_FACTOR;
    let mut rank = 0;
    let mut ambiguous = false;
    let mut kept_min_ratio = f64::INFINITY;
    let mut dropped_max_ratio: f64 = 0.0;
    for &s in sv {
        let ratio = s / sigma_max;
        if ratio >= tol {
            rank += 1;
            kept_min_ratio = kept_min_ratio.min(ratio);
        } else {
            dropped_max_ratio = dropped_max_ratio.max(ratio);
        }
        if ratio > lo && ratio < hi {
            ambiguous = true;
        }
    }
    RankDecision { rank, ambiguous, sigma_max, kept_min_ratio, dropped_max_ratio }
}

pub fn rank(m: &CMat, tol: f64) -> RankDecision {
    rank_from_singular_values(&singular_values(m), tol)
}

pub fn rank_real(m: &RMat, tol: f64) -> RankDecision {
    rank_from_singular_values(&singular_values_real(m), tol)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.norm()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_upper_triangular(m: &CMat) -> bool {
    (0..m.nrows()).all(|i| (0..i.min(m.ncols())).all(|j| m[(i, j)] == Complex64::new(0.0, 0.0)))
}

/// Eigenvalues through the complex Schur form; triangular input is read off
/// the diagonal exactly.
pub fn eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    if m.nrows() != m.ncols() {
        return Err(StrataError::SizeMismatch { expected: m.nrows(), found: m.ncols() });
    }
    if is_upper_triangular(m) {
        return Ok(m.diagonal().iter().copied().collect());
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(StrataError::Eigen("matrix has non-finite entries".into()));
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| StrataError::Eigen("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

/// Solves `a · x = b` by LU with partial pivoting.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(StrataError::SizeMismatch { expected: a.nrows(), found: b.nrows() });
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| StrataError::Precondition("singular linear system".into()))
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    a.clone()
        .try_inverse()
        .ok_or_else(|| StrataError::Precondition("matrix is singular".into()))
}

/// Block diagonal direct sum.
pub fn direct_sum(blocks: &[CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(n, m);
    let (mut r, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r, c0), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c0 += b.ncols();
    }
    out
}

/// Builds a matrix from rows of complex entries.
pub fn from_rows(rows: &[Vec<Complex64>]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    CMat::from_fn(n, m, |i, j| rows[i][j])
}

/// Builds a matrix from rows of real entries.
pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(n, m, |i, j| cr(rows[i][j]))
}

/// Jordan block `J_m(λ)` (ones on the superdiagonal).
pub fn jordan_block(size: usize, lambda: Complex64) -> CMat {
    CMat::from_fn(size, size, |i, j| {
        if i == j {
            lambda
        } else if j == i + 1 {
            cr(1.0)
        } else {
            cr(0.0)
        }
    })
}

/// Entries with independent uniform real and imaginary parts in [-1, 1].
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> CMat {
    CMat::from_fn(n, m, |_, _| c(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
}

/// Random matrix scaled to Frobenius norm `norm`.
pub fn random_with_norm<R: Rng + ?Sized>(rng: &mut R, n: usize, norm: f64) -> CMat {
    let e = random_matrix(rng, n, n);
    let f = e.norm();
    if f == 0.0 {
        e
    } else {
        e * cr(norm / f)
    }
}

/// `I + P` with `‖P‖₂ ≤ 1/2`, so the condition number is at most 3.
pub fn random_well_conditioned<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    CMat::identity(n, n) + random_with_norm(rng, n, 0.5)
}
