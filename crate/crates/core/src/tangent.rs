//! Tangent spaces to orbits and their codimensions.
//!
//! The tangent space at `A` is the image of a linear map on `n × n` matrices:
//! `X ↦ XA − AX` (similarity), `X ↦ XᵀA + AX` (congruence) or
//! `X ↦ X*A + AX` (*congruence). The last one is only real-linear, so it is
//! assembled on the real basis `E_pq, iE_pq` and its codimension is real.

use crate::linalg::{rank, rank_real, CMat, RMat, RankDecision};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Group action on square matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Similarity,
    Congruence,
    StarCongruence,
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::Similarity => "sim",
            Action::Congruence => "congr",
            Action::StarCongruence => "star",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sim" | "similarity" => Some(Action::Similarity),
            "congr" | "congruence" => Some(Action::Congruence),
            "star" | "star_congruence" => Some(Action::StarCongruence),
            _ => None,
        }
    }

    /// Dimension of the ambient space, real for *congruence.
    pub fn ambient_dim(&self, n: usize) -> usize {
        match self {
            Action::StarCongruence => 2 * n * n,
            _ => n * n,
        }
    }
}

/// Matrix of the tangent map in a flattened basis.
#[derive(Clone, Debug)]
pub enum OperatorMatrix {
    Complex(CMat),
    Real(RMat),
}

impl OperatorMatrix {
    pub fn ncols(&self) -> usize {
        match self {
            OperatorMatrix::Complex(m) => m.ncols(),
            OperatorMatrix::Real(m) => m.ncols(),
        }
    }

    pub fn rank(&self, tol: f64) -> RankDecision {
        match self {
            OperatorMatrix::Complex(m) => rank(m, tol),
            OperatorMatrix::Real(m) => rank_real(m, tol),
        }
    }
}

fn unit(n: usize, p: usize, q: usize, value: Complex64) -> CMat {
    let mut x = CMat::zeros(n, n);
    x[(p, q)] = value;
    x
}

fn image(action: Action, a: &CMat, x: &CMat) -> CMat {
    match action {
        Action::Similarity => x * a - a * x,
        Action::Congruence => x.transpose() * a + a * x,
        Action::StarCongruence => x.adjoint() * a + a * x,
    }
}

/// Assembles the tangent map at `a`, one column per basis matrix.
pub fn operator_matrix(action: Action, a: &CMat) -> OperatorMatrix {
    let n = a.nrows();
    let n2 = n * n;
    match action {
        Action::Similarity | Action::Congruence => {
            let mut op = CMat::zeros(n2, n2);
            for q in 0..n {
                for p in 0..n {
                    let img = image(action, a, &unit(n, p, q, Complex64::new(1.0, 0.0)));
                    op.column_mut(p + n * q).copy_from_slice(img.as_slice());
                }
            }
            OperatorMatrix::Complex(op)
        }
        Action::StarCongruence => {
            let mut op = DMatrix::<f64>::zeros(2 * n2, 2 * n2);
            for (part, value) in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)].into_iter().enumerate() {
                for q in 0..n {
                    for p in 0..n {
                        let img = image(action, a, &unit(n, p, q, value));
                        let col = part * n2 + p + n * q;
                        for (k, z) in img.as_slice().iter().enumerate() {
                            op[(k, col)] = z.re;
                            op[(n2 + k, col)] = z.im;
                        }
                    }
                }
            }
            OperatorMatrix::Real(op)
        }
    }
}

/// Codimension of the tangent space with the underlying rank decision.
#[derive(Clone, Debug, PartialEq)]
pub struct Codim {
    pub codim: usize,
    pub rank: RankDecision,
}

pub fn codim_numeric(action: Action, a: &CMat, tol: f64) -> Codim {
    let op = operator_matrix(action, a);
    let rank = op.rank(tol);
    Codim { codim: op.ncols() - rank.rank, rank }
}

pub fn similarity_codim_numeric(a: &CMat, tol: f64) -> usize {
    codim_numeric(Action::Similarity, a, tol).codim
}

pub fn congruence_codim_numeric(a: &CMat, tol: f64) -> usize {
    codim_numeric(Action::Congruence, a, tol).codim
}

pub fn star_congruence_codim_numeric(a: &CMat, tol: f64) -> usize {
    codim_numeric(Action::StarCongruence, a, tol).codim
}
