//! Numerical congruence classification of matrices of order 1, 2 and 3.
//!
//! Four congruence invariants separate almost all canonical families:
//! `rank A`, `rank(A + Aᵀ)`, `rank(A − Aᵀ)` and the dimension of the common
//! kernel of `A` and `Aᵀ`. The one collision in order 3, `Γ₃` against
//! `H(λ) ⊕ [1]`, is resolved through the cosquare `C = A⁻ᵀA`: it is similar
//! to `J₃(1)` for `Γ₃`, so `(C − I)²` has rank 1 there and 2 otherwise. The
//! parameter of an `H` block is read from `tr C = λ + λ⁻¹`.

use num_complex::Complex64;

use super::{normalize_inversion, CongruenceBlock, CongruenceCanonical};
use crate::error::{Result, StrataError};
use crate::linalg::{cr, rank, solve, CMat};

/// Rank invariants of a matrix under congruence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub rank: usize,
    pub sym_rank: usize,
    pub skew_rank: usize,
    pub common_kernel: usize,
}

fn decided_rank(m: &CMat, tol: f64, what: &str) -> Result<usize> {
    let d = rank(m, tol);
    if d.ambiguous {
        return Err(StrataError::Ambiguous(format!(
            "rank of {what} is undecided (kept {:.3e}, dropped {:.3e} relative to σ_max)",
            d.kept_min_ratio, d.dropped_max_ratio
        )));
    }
    Ok(d.rank)
}

fn stacked(a: &CMat) -> CMat {
    let n = a.nrows();
    let mut s = CMat::zeros(2 * n, n);
    s.view_mut((0, 0), (n, n)).copy_from(a);
    s.view_mut((n, 0), (n, n)).copy_from(&a.transpose());
    s
}

pub fn signature(a: &CMat, tol: f64) -> Result<Signature> {
    let n = a.nrows();
    let at = a.transpose();
    Ok(Signature {
        rank: decided_rank(a, tol, "A")?,
        sym_rank: decided_rank(&(a + &at), tol, "A + Aᵀ")?,
        skew_rank: decided_rank(&(a - &at), tol, "A − Aᵀ")?,
        common_kernel: n - decided_rank(&stacked(a), tol, "[A; Aᵀ]")?,
    })
}

/// Canonical families of order `n`; an `H` family is built from its
/// parameter and is listed with a generic sample value.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Family {
    Fixed(&'static [CongruenceBlock]),
    HPlus(&'static [CongruenceBlock]),
}

const SAMPLE_LAMBDA: Complex64 = Complex64::new(2.0, 0.5);

const FAMILIES_1: &[Family] = {
    use CongruenceBlock::*;
    &[Family::Fixed(&[N(1)]), Family::Fixed(&[Gamma(1)])]
};

const FAMILIES_2: &[Family] = {
    use CongruenceBlock::*;
    &[
        Family::Fixed(&[N(1), N(1)]),
        Family::Fixed(&[Gamma(1), N(1)]),
        Family::Fixed(&[Gamma(1), Gamma(1)]),
        Family::Fixed(&[H { m: 1, lambda: Complex64::new(-1.0, 0.0) }]),
        Family::Fixed(&[Gamma(2)]),
        Family::Fixed(&[N(2)]),
        Family::HPlus(&[]),
    ]
};

const FAMILIES_3: &[Family] = {
    use CongruenceBlock::*;
    &[
        Family::Fixed(&[N(1), N(1), N(1)]),
        Family::Fixed(&[Gamma(1), N(1), N(1)]),
        Family::Fixed(&[Gamma(1), Gamma(1), N(1)]),
        Family::Fixed(&[Gamma(1), Gamma(1), Gamma(1)]),
        Family::Fixed(&[H { m: 1, lambda: Complex64::new(-1.0, 0.0) }, N(1)]),
        Family::Fixed(&[N(2), N(1)]),
        Family::Fixed(&[Gamma(2), N(1)]),
        Family::Fixed(&[H { m: 1, lambda: Complex64::new(-1.0, 0.0) }, Gamma(1)]),
        Family::Fixed(&[N(2), Gamma(1)]),
        Family::Fixed(&[Gamma(2), Gamma(1)]),
        Family::Fixed(&[N(3)]),
        Family::Fixed(&[Gamma(3)]),
        Family::HPlus(&[N(1)]),
        Family::HPlus(&[Gamma(1)]),
    ]
};

impl Family {
    fn build(&self, lambda: Complex64) -> Result<CongruenceCanonical> {
        match self {
            Family::Fixed(blocks) => CongruenceCanonical::from_blocks(blocks.to_vec()),
            Family::HPlus(tail) => {
                let mut blocks = vec![CongruenceBlock::H { m: 1, lambda }];
                blocks.extend_from_slice(tail);
                CongruenceCanonical::from_blocks(blocks)
            }
        }
    }

    fn sample(&self) -> CongruenceCanonical {
        self.build(SAMPLE_LAMBDA).expect("catalog families are valid")
    }
}

fn families(n: usize) -> Result<&'static [Family]> {
    match n {
        1 => Ok(FAMILIES_1),
        2 => Ok(FAMILIES_2),
        3 => Ok(FAMILIES_3),
        _ => Err(StrataError::OutOfBounds { n, min: 1, max: 3 }),
    }
}

/// Canonical representatives of every family of order `n ≤ 3`, with a
/// generic parameter for `H` families.
pub fn family_samples(n: usize) -> Result<Vec<CongruenceCanonical>> {
    Ok(families(n)?.iter().map(Family::sample).collect())
}

/// Kernel-free part `V₁ᵀ A V₁`, where the columns of `V₁` complement the
/// common kernel of `A` and `Aᵀ`.
fn deflate(a: &CMat, keep: usize) -> CMat {
    let svd = stacked(a).svd(false, true);
    let v = svd.v_t.expect("requested").adjoint();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let v1 = CMat::from_fn(a.nrows(), keep, |r, k| v[(r, order[k])]);
    v1.transpose() * a * v1
}

fn cosquare(a: &CMat) -> Result<CMat> {
    solve(&a.transpose(), a)
}

/// `λ` with `λ + λ⁻¹ = c`, normalised to `|λ| ≥ 1`.
fn lambda_from_trace(c: Complex64) -> Complex64 {
    let disc = (c * c - cr(4.0)).sqrt();
    let root = (c + disc) / 2.0;
    let root = if root.norm() < 1.0 { (c - disc) / 2.0 } else { root };
    normalize_inversion(root)
}

/// Congruence canonical form of `a` for `n ≤ 3`; `Ambiguous` when a rank
/// decision falls within the ambiguity band.
pub fn classify_congruence_small(a: &CMat, tol: f64) -> Result<CongruenceCanonical> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(StrataError::SizeMismatch { expected: n, found: a.ncols() });
    }
    let fams = families(n)?;
    let sig = signature(a, tol)?;
    let matches: Vec<&Family> = fams.iter().filter(|f| signature(&f.sample().matrix(), tol).ok() == Some(sig)).collect();
    let family = match matches.as_slice() {
        [] => {
            return Err(StrataError::Ambiguous(format!("no congruence family has invariants {sig:?}")));
        }
        [f] => **f,
        _ => {
            let c = cosquare(a)?;
            let shifted = &c - CMat::identity(n, n);
            match decided_rank(&(&shifted * &shifted), tol, "(C − I)²")? {
                1 => Family::Fixed(&[CongruenceBlock::Gamma(3)]),
                2 => Family::HPlus(&[CongruenceBlock::Gamma(1)]),
                r => {
                    return Err(StrataError::Ambiguous(format!("(C − I)² has unexpected rank {r}")));
                }
            }
        }
    };
    match family {
        Family::Fixed(_) => family.build(cr(0.0)),
        Family::HPlus(tail) => {
            let core = if tail.contains(&CongruenceBlock::N(1)) { deflate(a, 2) } else { a.clone() };
            let mut trace = cosquare(&core)?.trace();
            if tail.contains(&CongruenceBlock::Gamma(1)) {
                trace -= cr(1.0);
            }
            family.build(lambda_from_trace(trace))
        }
    }
}
