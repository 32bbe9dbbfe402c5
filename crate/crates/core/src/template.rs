//! Miniversal deformation templates.
//!
//! A [`DeformationTemplate`] is the canonical matrix with some entries marked
//! free. Under similarity the free entries follow Arnold's pattern: for one
//! eigenvalue with blocks `m_1 ≥ … ≥ m_r`, the sub-block `(k, l)` of the
//! block grid carries stars along its bottom row when `k ≤ l` and along its
//! first column when `k > l`. Blocks of different eigenvalues stay zero.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Result, StrataError};
use crate::linalg::CMat;
use crate::structure::{format_complex, EigLabel, JordanType};

/// How an entry may vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EntryKind {
    /// Equal to its nonzero base value.
    Fixed,
    /// Equal to zero.
    Zero,
    /// Free complex parameter added to the base value.
    Star,
    /// Free real parameter added to the base value.
    EpsReal,
    /// Free purely imaginary parameter added to the base value.
    EpsImag,
    /// Free complex parameter attached to a pair of unimodular blocks.
    Delta,
}

impl EntryKind {
    pub fn name(&self) -> &'static str {
        match self {
            EntryKind::Fixed => "fixed",
            EntryKind::Zero => "zero",
            EntryKind::Star => "star",
            EntryKind::EpsReal => "eps_real",
            EntryKind::EpsImag => "eps_imag",
            EntryKind::Delta => "delta",
        }
    }

    pub fn is_free(&self) -> bool {
        !matches!(self, EntryKind::Fixed | EntryKind::Zero)
    }

    /// Real dimension contributed by the entry.
    pub fn real_parameters(&self) -> usize {
        match self {
            EntryKind::Star | EntryKind::Delta => 2,
            EntryKind::EpsReal | EntryKind::EpsImag => 1,
            EntryKind::Fixed | EntryKind::Zero => 0,
        }
    }
}

/// Base value of an entry: a number or an unevaluated eigenvalue label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Base {
    Value(Complex64),
    Label(EigLabel),
}

impl Base {
    pub fn zero() -> Self {
        Base::Value(Complex64::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Base::Value(z) if *z == Complex64::new(0.0, 0.0))
    }

    pub fn value(&self) -> Option<Complex64> {
        match self {
            Base::Value(z) => Some(*z),
            Base::Label(l) => l.value(),
        }
    }

    fn render(&self) -> String {
        match self {
            Base::Value(z) => format_complex(*z),
            Base::Label(l) => l.display_name(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TemplateEntry {
    pub kind: EntryKind,
    pub base: Base,
}

/// Result of checking a matrix against a template.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatternCheck {
    pub ok: bool,
    /// Largest violation of a constrained entry.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeformationTemplate {
    n: usize,
    entries: Vec<TemplateEntry>,
}

impl DeformationTemplate {
    /// Template with every entry fixed to `base`.
    pub fn fixed(base: &CMat) -> Self {
        let n = base.nrows();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = base[(i, j)];
                let kind = if z == Complex64::new(0.0, 0.0) { EntryKind::Zero } else { EntryKind::Fixed };
                entries.push(TemplateEntry { kind, base: Base::Value(z) });
            }
        }
        Self { n, entries }
    }

    fn blank(n: usize) -> Self {
        Self { n, entries: vec![TemplateEntry { kind: EntryKind::Zero, base: Base::zero() }; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> TemplateEntry {
        self.entries[i * self.n + j]
    }

    pub fn kind(&self, i: usize, j: usize) -> EntryKind {
        self.entry(i, j).kind
    }

    /// Marks `(i, j)` (0-based) with a free kind, keeping the base value.
    pub fn set_kind(&mut self, i: usize, j: usize, kind: EntryKind) {
        let e = &mut self.entries[i * self.n + j];
        e.kind = kind;
        if !kind.is_free() {
            e.kind = if e.base.is_zero() { EntryKind::Zero } else { EntryKind::Fixed };
        }
    }

    fn set_base(&mut self, i: usize, j: usize, base: Base) {
        let e = &mut self.entries[i * self.n + j];
        e.base = base;
        if !e.kind.is_free() {
            e.kind = if base.is_zero() { EntryKind::Zero } else { EntryKind::Fixed };
        }
    }

    /// Positions (0-based) of entries of the given kind, row-major.
    pub fn positions(&self, kind: EntryKind) -> Vec<(usize, usize)> {
        (0..self.n * self.n)
            .filter(|k| self.entries[*k].kind == kind)
            .map(|k| (k / self.n, k % self.n))
            .collect()
    }

    /// Positions of every free entry, row-major.
    pub fn free_positions(&self) -> Vec<(usize, usize)> {
        (0..self.n * self.n)
            .filter(|k| self.entries[*k].kind.is_free())
            .map(|k| (k / self.n, k % self.n))
            .collect()
    }

    pub fn star_count(&self) -> usize {
        self.entries.iter().filter(|e| e.kind == EntryKind::Star).count()
    }

    /// Real parameter count: stars and δ count 2, ε counts 1.
    pub fn real_parameter_count(&self) -> usize {
        self.entries.iter().map(|e| e.kind.real_parameters()).sum()
    }

    /// The canonical matrix; fails on symbolic labels.
    pub fn base_matrix(&self) -> Result<CMat> {
        let mut m = CMat::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self.entry(i, j).base.value().ok_or(StrataError::SymbolicLabel)?;
            }
        }
        Ok(m)
    }

    /// Checks the constrained entries of `m`; free entries are unconstrained
    /// except for the real or imaginary restriction of ε entries.
    pub fn pattern_check(&self, m: &CMat, tol: f64) -> Result<PatternCheck> {
        if m.nrows() != self.n || m.ncols() != self.n {
            return Err(StrataError::SizeMismatch { expected: self.n, found: m.nrows() });
        }
        let base = self.base_matrix()?;
        let mut residual: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let d = m[(i, j)] - base[(i, j)];
                let v = match self.kind(i, j) {
                    EntryKind::Fixed | EntryKind::Zero => d.norm(),
                    EntryKind::Star | EntryKind::Delta => 0.0,
                    EntryKind::EpsReal => d.im.abs(),
                    EntryKind::EpsImag => d.re.abs(),
                };
                residual = residual.max(v);
            }
        }
        Ok(PatternCheck { ok: residual <= tol, residual })
    }

    pub fn to_json(&self) -> Value {
        let mut entries = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                let e = self.entry(i, j);
                let mut obj = json!({"i": i, "j": j, "kind": e.kind.name()});
                if !e.base.is_zero() {
                    obj["value"] = match e.base {
                        Base::Value(z) => json!([z.re, z.im]),
                        Base::Label(l) => json!(l.to_string()),
                    };
                }
                entries.push(obj);
            }
        }
        json!({"n": self.n, "entries": entries})
    }

    /// Aligned text grid. Free entries print as `*`, `ε` or `δ`, prefixed by
    /// a nonzero base value (`λ+*`).
    pub fn to_ascii(&self) -> String {
        let cells: Vec<String> = self
            .entries
            .iter()
            .map(|e| {
                let mark = match e.kind {
                    EntryKind::Fixed => return e.base.render(),
                    EntryKind::Zero => return "0".to_string(),
                    EntryKind::Star => "*",
                    EntryKind::EpsReal => "ε∈ℝ",
                    EntryKind::EpsImag => "ε∈iℝ",
                    EntryKind::Delta => "δ",
                };
                if e.base.is_zero() {
                    mark.to_string()
                } else {
                    format!("{}+{}", e.base.render(), mark)
                }
            })
            .collect();
        let width = cells.iter().map(|c| c.chars().count()).max().unwrap_or(1);
        let mut out = String::new();
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| {
                    let c = &cells[i * self.n + j];
                    format!("{}{}", " ".repeat(width - c.chars().count()), c)
                })
                .collect();
            let _ = writeln!(out, "[ {} ]", row.join("  "));
        }
        out
    }
}

/// Arnold's miniversal deformation of the Jordan matrix of `t`.
pub fn arnold_template(t: &JordanType) -> DeformationTemplate {
    let n = t.order();
    let mut tmpl = DeformationTemplate::blank(n);
    for block in t.blocks() {
        for k in 0..block.size {
            let i = block.offset + k;
            let base = match block.label {
                EigLabel::Concrete(z) => Base::Value(z),
                label => Base::Label(label),
            };
            tmpl.set_base(i, i, base);
            if k + 1 < block.size {
                tmpl.set_base(i, i + 1, Base::Value(Complex64::new(1.0, 0.0)));
            }
        }
    }
    let blocks = t.blocks();
    for (bk, row_block) in blocks.iter().enumerate() {
        for (bl, col_block) in blocks.iter().enumerate() {
            if row_block.label != col_block.label {
                continue;
            }
            if bk <= bl {
                let i = row_block.offset + row_block.size - 1;
                for c in 0..col_block.size {
                    tmpl.set_kind(i, col_block.offset + c, EntryKind::Star);
                }
            } else {
                let j = col_block.offset;
                for r in 0..row_block.size {
                    tmpl.set_kind(row_block.offset + r, j, EntryKind::Star);
                }
            }
        }
    }
    tmpl
}

pub fn star_count(tmpl: &DeformationTemplate) -> usize {
    tmpl.star_count()
}

pub fn pattern_check(m: &CMat, tmpl: &DeformationTemplate, tol: f64) -> Result<PatternCheck> {
    tmpl.pattern_check(m, tol)
}
