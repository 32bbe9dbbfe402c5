//! Miniversal deformation templates for congruence and *congruence of
//! matrices of order at most 3.
//!
//! Under congruence every free entry is a complex star. Under *congruence an
//! entry can also be `ε` (real or purely imaginary, one real parameter) or
//! `δ`, which is a full complex parameter when the two unit parameters it
//! links satisfy `μ_l = ±μ_r` and zero otherwise.

use num_complex::Complex64;

use super::{CongruenceBlock, CongruenceCanonical, StarBlock, StarCongruenceCanonical, PARAM_TOL};
use crate::error::{Result, StrataError};
use crate::linalg::{cr, direct_sum, CMat};
use crate::template::{DeformationTemplate, EntryKind};

/// Compact description of a block list, used to look up the tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    H,
    Skew,
    Gamma,
    N,
    U,
}

const ROW2: &[(usize, usize)] = &[(2, 1), (2, 2), (2, 3)];
const ROW3: &[(usize, usize)] = &[(3, 1), (3, 2), (3, 3)];

fn with_stars(base: &CMat, stars: &[(usize, usize)]) -> DeformationTemplate {
    let mut t = DeformationTemplate::fixed(base);
    for &(i, j) in stars {
        t.set_kind(i - 1, j - 1, EntryKind::Star);
    }
    t
}

fn congruence_shapes(form: &CongruenceCanonical) -> Vec<(Shape, usize)> {
    form.blocks()
        .iter()
        .map(|b| match *b {
            CongruenceBlock::H { m, lambda } if m == 1 && (lambda + cr(1.0)).norm() <= PARAM_TOL => (Shape::Skew, 2),
            CongruenceBlock::H { m, .. } => (Shape::H, 2 * m),
            CongruenceBlock::Gamma(n) => (Shape::Gamma, n),
            CongruenceBlock::N(k) => (Shape::N, k),
        })
        .collect()
}

/// Template of a congruence canonical form of order 1, 2 or 3, free entries
/// given in 1-based positions by the catalog below.
pub fn congruence_template(form: &CongruenceCanonical) -> Result<DeformationTemplate> {
    use Shape::*;
    let n = form.size();
    let shapes = congruence_shapes(form);
    let stars: Vec<(usize, usize)> = match shapes.as_slice() {
        [(N, 1)] => vec![(1, 1)],
        [(Gamma, 1)] => vec![],
        [(N, 1), (N, 1)] => vec![(1, 1), (1, 2), (2, 1), (2, 2)],
        [(Gamma, 1), (N, 1)] => vec![(2, 1), (2, 2)],
        [(Gamma, 1), (Gamma, 1)] => vec![(2, 1)],
        [(Skew, 2)] => vec![(1, 1), (2, 1), (2, 2)],
        [(Gamma, 2)] => vec![(1, 1)],
        [(H, 2)] | [(N, 2)] => vec![(2, 1)],
        [(N, 1), (N, 1), (N, 1)] => (1..=3).flat_map(|i| (1..=3).map(move |j| (i, j))).collect(),
        [(Gamma, 1), (N, 1), (N, 1)] => [ROW2, ROW3].concat(),
        [(Gamma, 1), (Gamma, 1), (N, 1)] => vec![(2, 1), (3, 1), (3, 2), (3, 3)],
        [(Gamma, 1), (Gamma, 1), (Gamma, 1)] => vec![(2, 1), (3, 1), (3, 2)],
        [(Skew, 2), (N, 1)] => vec![(1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3)],
        [(H, 2), (N, 1)] => vec![(2, 1), (3, 1), (3, 2), (3, 3)],
        [(N, 2), (N, 1)] => vec![(2, 1), (2, 3), (3, 1), (3, 3)],
        [(Gamma, 2), (N, 1)] => vec![(1, 1), (3, 1), (3, 2), (3, 3)],
        [(Skew, 2), (Gamma, 1)] => vec![(1, 1), (2, 1), (2, 2)],
        [(H, 2), (Gamma, 1)] | [(N, 2), (Gamma, 1)] => vec![(2, 1)],
        [(Gamma, 2), (Gamma, 1)] => vec![(1, 1)],
        [(N, 3)] => vec![(3, 1), (3, 3)],
        [(Gamma, 3)] => vec![(2, 1)],
        _ => {
            return Err(StrataError::Unsupported(format!(
                "congruence templates are tabulated for orders 1 to 3, got {} of order {n}",
                form.label()
            )))
        }
    };
    Ok(with_stars(&form.matrix(), &stars))
}

fn eps_kind(mu: Complex64) -> EntryKind {
    if mu.im.abs() <= PARAM_TOL {
        EntryKind::EpsImag
    } else {
        EntryKind::EpsReal
    }
}

fn delta_kind(a: Complex64, b: Complex64) -> EntryKind {
    if (a - b).norm() <= PARAM_TOL || (a + b).norm() <= PARAM_TOL {
        EntryKind::Delta
    } else {
        EntryKind::Zero
    }
}

/// Matrix used as the base of *congruence templates: `H*(m, λ)` is written
/// with `σ = 1/λ̄`, `|σ| < 1`, which is *congruent to it.
pub fn star_template_base(form: &StarCongruenceCanonical) -> CMat {
    let blocks: Vec<CMat> = form
        .blocks()
        .iter()
        .map(|b| match *b {
            StarBlock::H { m, lambda } => super::h_block(m, Complex64::new(1.0, 0.0) / lambda.conj()),
            other => other.matrix(),
        })
        .collect();
    direct_sum(&blocks)
}

/// Template of a *congruence canonical form of order 1, 2 or 3.
pub fn star_template(form: &StarCongruenceCanonical) -> Result<DeformationTemplate> {
    use Shape::*;
    let n = form.size();
    let shapes: Vec<(Shape, usize)> = form
        .blocks()
        .iter()
        .map(|b| match *b {
            StarBlock::H { m, .. } => (H, 2 * m),
            StarBlock::U { n, .. } => (U, n),
            StarBlock::N(k) => (N, k),
        })
        .collect();
    let mus: Vec<Complex64> = form
        .blocks()
        .iter()
        .filter_map(|b| match *b {
            StarBlock::U { mu, .. } => Some(mu),
            _ => None,
        })
        .collect();
    let mut t = DeformationTemplate::fixed(&star_template_base(form));
    let star = |t: &mut DeformationTemplate, cells: &[(usize, usize)]| {
        for &(i, j) in cells {
            t.set_kind(i - 1, j - 1, EntryKind::Star);
        }
    };
    let set = |t: &mut DeformationTemplate, i: usize, j: usize, kind: EntryKind| t.set_kind(i - 1, j - 1, kind);
    match shapes.as_slice() {
        [(N, 1)] => star(&mut t, &[(1, 1)]),
        [(U, 1)] => set(&mut t, 1, 1, eps_kind(mus[0])),
        [(N, 1), (N, 1)] => star(&mut t, &[(1, 1), (1, 2), (2, 1), (2, 2)]),
        [(U, 1), (N, 1)] => {
            set(&mut t, 1, 1, eps_kind(mus[0]));
            star(&mut t, &[(2, 1), (2, 2)]);
        }
        [(U, 1), (U, 1)] => {
            set(&mut t, 1, 1, eps_kind(mus[0]));
            set(&mut t, 2, 1, delta_kind(mus[1], mus[0]));
            set(&mut t, 2, 2, eps_kind(mus[1]));
        }
        [(U, 2)] => star(&mut t, &[(1, 1)]),
        [(H, 2)] | [(N, 2)] => star(&mut t, &[(2, 1)]),
        [(N, 1), (N, 1), (N, 1)] => {
            let all: Vec<_> = (1..=3).flat_map(|i| (1..=3).map(move |j| (i, j))).collect();
            star(&mut t, &all);
        }
        [(U, 1), (N, 1), (N, 1)] => {
            set(&mut t, 1, 1, eps_kind(mus[0]));
            star(&mut t, &[ROW2, ROW3].concat());
        }
        [(U, 1), (U, 1), (N, 1)] => {
            set(&mut t, 1, 1, eps_kind(mus[0]));
            set(&mut t, 2, 1, delta_kind(mus[1], mus[0]));
            set(&mut t, 2, 2, eps_kind(mus[1]));
            star(&mut t, ROW3);
        }
        [(U, 1), (U, 1), (U, 1)] => {
            for l in 0..3 {
                set(&mut t, l + 1, l + 1, eps_kind(mus[l]));
                for r in 0..l {
                    set(&mut t, l + 1, r + 1, delta_kind(mus[l], mus[r]));
                }
            }
        }
        [(U, 2), (U, 1)] => {
            star(&mut t, &[(1, 1)]);
            set(&mut t, 3, 1, delta_kind(mus[1], mus[0]));
            set(&mut t, 3, 3, eps_kind(mus[1]));
        }
        [(U, 2), (N, 1)] => star(&mut t, &[[(1, 1)].as_slice(), ROW3].concat()),
        [(H, 2), (U, 1)] | [(N, 2), (U, 1)] => {
            star(&mut t, &[(2, 1)]);
            set(&mut t, 3, 3, eps_kind(mus[0]));
        }
        [(H, 2), (N, 1)] => star(&mut t, &[[(2, 1)].as_slice(), ROW3].concat()),
        [(N, 2), (N, 1)] => star(&mut t, &[(2, 1), (2, 3), (3, 1), (3, 3)]),
        [(N, 3)] => star(&mut t, &[(3, 1), (3, 3)]),
        [(U, 3)] => {
            star(&mut t, &[(1, 1)]);
            set(&mut t, 2, 2, eps_kind(mus[0]));
        }
        _ => {
            return Err(StrataError::Unsupported(format!(
                "*congruence templates are tabulated for orders 1 to 3, got {} of order {n}",
                form.label()
            )))
        }
    }
    Ok(t)
}
