//! Canonical forms for congruence and *congruence.
//!
//! Under congruence `A ↦ SᵀAS` every matrix is a direct sum of blocks
//! `H(m, λ) = [[0, I_m], [J_m(λ), 0]]` (`λ ≠ 0, (−1)^{m+1}`, determined up to
//! `λ ↦ λ⁻¹`), the alternating ±1 blocks `Γ_n`, and nilpotent Jordan blocks
//! `N(k) = J_k(0)`.
//!
//! Under *congruence `A ↦ S*AS` the blocks are `H*(m, λ)` with `|λ| > 1`,
//! `U(n, μ) = μ·U_n` with `|μ| = 1`, and `N(k)`.

pub mod classify;
pub mod graphs;
pub mod templates;

use std::cmp::Ordering;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Result, StrataError};
use crate::linalg::{cr, direct_sum, jordan_block, CMat};
use crate::structure::format_complex;

/// Tolerance used when comparing parameters of canonical blocks.
pub const PARAM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CongruenceBlock {
    /// `[[0, I_m], [J_m(λ), 0]]`, of size `2m`.
    H { m: usize, lambda: Complex64 },
    /// The alternating ±1 block of size `n`.
    Gamma(usize),
    /// `J_k(0)`.
    N(usize),
}

impl CongruenceBlock {
    pub fn size(&self) -> usize {
        match *self {
            CongruenceBlock::H { m, .. } => 2 * m,
            CongruenceBlock::Gamma(n) | CongruenceBlock::N(n) => n,
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            CongruenceBlock::H { .. } => 0,
            CongruenceBlock::Gamma(_) => 1,
            CongruenceBlock::N(_) => 2,
        }
    }

    fn param(&self) -> Option<Complex64> {
        match *self {
            CongruenceBlock::H { lambda, .. } => Some(lambda),
            _ => None,
        }
    }

    pub fn matrix(&self) -> CMat {
        match *self {
            CongruenceBlock::H { m, lambda } => h_block(m, lambda),
            CongruenceBlock::Gamma(n) => gamma(n),
            CongruenceBlock::N(k) => jordan_block(k, cr(0.0)),
        }
    }

    pub fn to_json(&self) -> Value {
        match *self {
            CongruenceBlock::H { m, lambda } => {
                json!({"kind": "H", "size": m, "param": [lambda.re, lambda.im]})
            }
            CongruenceBlock::Gamma(n) => json!({"kind": "Gamma", "size": n}),
            CongruenceBlock::N(k) => json!({"kind": "N", "size": k}),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            CongruenceBlock::H { m, lambda } => format!("H{m}({})", format_complex(lambda)),
            CongruenceBlock::Gamma(n) => format!("Γ{n}"),
            CongruenceBlock::N(k) => format!("N{k}"),
        }
    }
}

/// `[[0, I_m], [J_m(λ), 0]]`.
pub fn h_block(m: usize, lambda: Complex64) -> CMat {
    let mut out = CMat::zeros(2 * m, 2 * m);
    for i in 0..m {
        out[(i, m + i)] = cr(1.0);
    }
    out.view_mut((m, 0), (m, m)).copy_from(&jordan_block(m, lambda));
    out
}

/// `Γ_n`: entries `(−1)^{n−i}` at 1-based positions `(i, n+1−i)` and
/// `(i, n+2−i)`.
pub fn gamma(n: usize) -> CMat {
    let mut out = CMat::zeros(n, n);
    for i in 1..=n {
        let sign = if (n - i).is_multiple_of(2) { 1.0 } else { -1.0 };
        out[(i - 1, n - i)] = cr(sign);
        if i >= 2 {
            out[(i - 1, n + 1 - i)] = cr(sign);
        }
    }
    out
}

/// `U_n`: ones on the antidiagonal and `i` just below it, scaled by `μ`.
pub fn u_block(n: usize, mu: Complex64) -> CMat {
    CMat::from_fn(n, n, |r, c| {
        if r + c + 1 == n {
            mu
        } else if r + c == n {
            mu * Complex64::new(0.0, 1.0)
        } else {
            cr(0.0)
        }
    })
}

fn cmp_param(a: Option<Complex64>, b: Option<Complex64>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)),
        _ => Ordering::Equal,
    }
}

/// Representative of `{λ, λ⁻¹}`: `|λ| ≥ 1`, and `Im λ ≥ 0` on the unit circle.
pub fn normalize_inversion(lambda: Complex64) -> Complex64 {
    let r = lambda.norm();
    if (r - 1.0).abs() <= PARAM_TOL {
        if lambda.im < 0.0 {
            lambda.conj() / (r * r)
        } else {
            lambda
        }
    } else if r < 1.0 {
        Complex64::new(1.0, 0.0) / lambda
    } else {
        lambda
    }
}

/// Direct sum of congruence blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct CongruenceCanonical {
    blocks: Vec<CongruenceBlock>,
}

impl CongruenceCanonical {
    /// Unnormalised block list.
    pub fn new(blocks: Vec<CongruenceBlock>) -> Self {
        Self { blocks }
    }

    /// Normalised form built from blocks.
    pub fn from_blocks(blocks: Vec<CongruenceBlock>) -> Result<Self> {
        normalize_congruence_canonical(&Self { blocks })
    }

    pub fn blocks(&self) -> &[CongruenceBlock] {
        &self.blocks
    }

    pub fn size(&self) -> usize {
        self.blocks.iter().map(CongruenceBlock::size).sum()
    }

    pub fn matrix(&self) -> CMat {
        direct_sum(&self.blocks.iter().map(CongruenceBlock::matrix).collect::<Vec<_>>())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.blocks.iter().map(CongruenceBlock::to_json).collect())
    }

    pub fn label(&self) -> String {
        self.blocks.iter().map(CongruenceBlock::label).collect::<Vec<_>>().join("⊕")
    }

    /// Equality with parameters compared to `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.blocks.len() == other.blocks.len()
            && self.blocks.iter().zip(&other.blocks).all(|(a, b)| match (a, b) {
                (CongruenceBlock::H { m, lambda }, CongruenceBlock::H { m: m2, lambda: l2 }) => {
                    m == m2 && (lambda - l2).norm() <= tol * (1.0 + lambda.norm())
                }
                _ => a == b,
            })
    }
}

/// Replaces each `λ` by its representative, rejects excluded values and
/// sorts blocks by size (descending), then kind `H < Γ < N`.
pub fn normalize_congruence_canonical(form: &CongruenceCanonical) -> Result<CongruenceCanonical> {
    let mut blocks = Vec::with_capacity(form.blocks.len());
    for b in &form.blocks {
        match *b {
            CongruenceBlock::H { m, lambda } => {
                if m == 0 {
                    return Err(StrataError::InvalidCanonical("H block of size 0".into()));
                }
                let excluded = cr(if m % 2 == 1 { 1.0 } else { -1.0 });
                if lambda.norm() <= PARAM_TOL || (lambda - excluded).norm() <= PARAM_TOL {
                    return Err(StrataError::InvalidCanonical(format!(
                        "H({m}, λ) requires λ ∉ {{0, {}}}, got {}",
                        format_complex(excluded),
                        format_complex(lambda)
                    )));
                }
                if !lambda.re.is_finite() || !lambda.im.is_finite() {
                    return Err(StrataError::InvalidCanonical("non-finite parameter".into()));
                }
                blocks.push(CongruenceBlock::H { m, lambda: normalize_inversion(lambda) });
            }
            CongruenceBlock::Gamma(0) | CongruenceBlock::N(0) => {
                return Err(StrataError::InvalidCanonical("block of size 0".into()));
            }
            other => blocks.push(other),
        }
    }
    blocks.sort_by(|a, b| {
        b.size()
            .cmp(&a.size())
            .then(a.kind_rank().cmp(&b.kind_rank()))
            .then(cmp_param(a.param(), b.param()))
    });
    Ok(CongruenceCanonical { blocks })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StarBlock {
    /// `[[0, I_m], [J_m(λ), 0]]` with `|λ| > 1`.
    H { m: usize, lambda: Complex64 },
    /// `μ·U_n` with `|μ| = 1`.
    U { n: usize, mu: Complex64 },
    /// `J_k(0)`.
    N(usize),
}

impl StarBlock {
    pub fn size(&self) -> usize {
        match *self {
            StarBlock::H { m, .. } => 2 * m,
            StarBlock::U { n, .. } => n,
            StarBlock::N(k) => k,
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            StarBlock::H { .. } => 0,
            StarBlock::U { .. } => 1,
            StarBlock::N(_) => 2,
        }
    }

    fn param(&self) -> Option<Complex64> {
        match *self {
            StarBlock::H { lambda, .. } => Some(lambda),
            StarBlock::U { mu, .. } => Some(mu),
            StarBlock::N(_) => None,
        }
    }

    pub fn matrix(&self) -> CMat {
        match *self {
            StarBlock::H { m, lambda } => h_block(m, lambda),
            StarBlock::U { n, mu } => u_block(n, mu),
            StarBlock::N(k) => jordan_block(k, cr(0.0)),
        }
    }

    pub fn to_json(&self) -> Value {
        match *self {
            StarBlock::H { m, lambda } => json!({"kind": "H", "size": m, "param": [lambda.re, lambda.im]}),
            StarBlock::U { n, mu } => json!({"kind": "U", "size": n, "param": [mu.re, mu.im]}),
            StarBlock::N(k) => json!({"kind": "N", "size": k}),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            StarBlock::H { m, lambda } => format!("H{m}({})", format_complex(lambda)),
            StarBlock::U { n, mu } => format!("U{n}({})", format_complex(mu)),
            StarBlock::N(k) => format!("N{k}"),
        }
    }
}

/// Direct sum of *congruence blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct StarCongruenceCanonical {
    blocks: Vec<StarBlock>,
}

impl StarCongruenceCanonical {
    pub fn new(blocks: Vec<StarBlock>) -> Self {
        Self { blocks }
    }

    pub fn from_blocks(blocks: Vec<StarBlock>) -> Result<Self> {
        normalize_star_canonical(&Self { blocks })
    }

    pub fn blocks(&self) -> &[StarBlock] {
        &self.blocks
    }

    pub fn size(&self) -> usize {
        self.blocks.iter().map(StarBlock::size).sum()
    }

    pub fn matrix(&self) -> CMat {
        direct_sum(&self.blocks.iter().map(StarBlock::matrix).collect::<Vec<_>>())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.blocks.iter().map(StarBlock::to_json).collect())
    }

    pub fn label(&self) -> String {
        self.blocks.iter().map(StarBlock::label).collect::<Vec<_>>().join("⊕")
    }
}

/// Maps `H*(m, λ)` with `0 < |λ| < 1` to `1/λ̄`, checks `|μ| = 1`, and sorts
/// blocks by size (descending), then kind `H < U < N`.
pub fn normalize_star_canonical(form: &StarCongruenceCanonical) -> Result<StarCongruenceCanonical> {
    let mut blocks = Vec::with_capacity(form.blocks.len());
    for b in &form.blocks {
        match *b {
            StarBlock::H { m, lambda } => {
                let r = lambda.norm();
                if m == 0 || r <= PARAM_TOL || (r - 1.0).abs() <= PARAM_TOL || !r.is_finite() {
                    return Err(StrataError::InvalidCanonical(format!(
                        "H*({m}, λ) requires 0 < |λ| ≠ 1, got {}",
                        format_complex(lambda)
                    )));
                }
                let lambda = if r < 1.0 { Complex64::new(1.0, 0.0) / lambda.conj() } else { lambda };
                blocks.push(StarBlock::H { m, lambda });
            }
            StarBlock::U { n, mu } => {
                if n == 0 || (mu.norm() - 1.0).abs() > PARAM_TOL {
                    return Err(StrataError::InvalidCanonical(format!(
                        "U({n}, μ) requires |μ| = 1, got |μ| = {}",
                        mu.norm()
                    )));
                }
                blocks.push(*b);
            }
            StarBlock::N(0) => return Err(StrataError::InvalidCanonical("block of size 0".into())),
            StarBlock::N(k) => blocks.push(StarBlock::N(k)),
        }
    }
    blocks.sort_by(|a, b| {
        b.size()
            .cmp(&a.size())
            .then(a.kind_rank().cmp(&b.kind_rank()))
            .then(cmp_param(a.param(), b.param()))
    });
    Ok(StarCongruenceCanonical { blocks })
}
