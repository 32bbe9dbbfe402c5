//! Reduction of a perturbed Jordan matrix `J + E` to its miniversal form.
//!
//! Several eigenvalues are first split apart: the blocks below the block
//! diagonal are removed by repeated Sylvester solves against the exact
//! Jordan blocks, then the blocks above it are cleared exactly. Each
//! remaining diagonal block carries a single eigenvalue and is reduced by
//! sweeps of elementary similarity transformations until only the entries of
//! Arnold's template differ from `J`.
//!
//! Every transformation is applied to the running matrix and accumulated into
//! `S`, so `D = S⁻¹(J + E)S` holds up to roundoff and is certified by
//! `‖S·D − (J + E)·S‖`.

use num_complex::Complex64;

use crate::error::{Result, StrataError};
use crate::linalg::{eigenvalues, max_abs, solve, CMat};
use crate::structure::{EigLabel, JordanType, Partition};
use crate::template::{arnold_template, EntryKind};

/// Elementary similarity transformation `M ↦ T⁻¹MT` (0-based indices).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Elementary {
    /// Multiply column `i` by `a`, then divide row `i` by `a`.
    Scale { i: usize, a: Complex64 },
    /// Add `b` times column `from` to column `to`, then subtract `b` times
    /// row `to` from row `from`.
    AddCol { from: usize, to: usize, b: Complex64 },
    /// Swap columns `i` and `j`, then rows `i` and `j`.
    Swap { i: usize, j: usize },
}

impl Elementary {
    fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(StrataError::InvalidElementary(msg));
        match *self {
            Elementary::Scale { i, a } => {
                if i >= n {
                    return bad(format!("index {i} out of range for size {n}"));
                }
                if a == Complex64::new(0.0, 0.0) {
                    return bad("scale factor must be nonzero".into());
                }
            }
            Elementary::AddCol { from: i, to: j, .. } | Elementary::Swap { i, j } => {
                if i >= n || j >= n {
                    return bad(format!("index out of range for size {n}"));
                }
                if i == j {
                    return bad("indices must differ".into());
                }
            }
        }
        Ok(())
    }

    /// The matrix `T` of the transformation.
    pub fn matrix(&self, n: usize) -> Result<CMat> {
        self.validate(n)?;
        let mut t = CMat::identity(n, n);
        match *self {
            Elementary::Scale { i, a } => t[(i, i)] = a,
            Elementary::AddCol { from, to, b } => t[(from, to)] = b,
            Elementary::Swap { i, j } => t.swap_columns(i, j),
        }
        Ok(t)
    }
}

fn apply_in_place(m: &mut CMat, op: &Elementary) {
    match *op {
        Elementary::Scale { i, a } => {
            m.column_mut(i).apply(|x| *x *= a);
            m.row_mut(i).apply(|x| *x /= a);
        }
        Elementary::AddCol { from, to, b } => {
            let col = m.column(from).clone_owned() * b;
            m.column_mut(to).zip_apply(&col, |x, y| *x += y);
            let row = m.row(to).clone_owned() * b;
            m.row_mut(from).zip_apply(&row, |x, y| *x -= y);
        }
        Elementary::Swap { i, j } => {
            m.swap_columns(i, j);
            m.swap_rows(i, j);
        }
    }
}

fn apply_to_columns(s: &mut CMat, op: &Elementary) {
    match *op {
        Elementary::Scale { i, a } => s.column_mut(i).apply(|x| *x *= a),
        Elementary::AddCol { from, to, b } => {
            let col = s.column(from).clone_owned() * b;
            s.column_mut(to).zip_apply(&col, |x, y| *x += y);
        }
        Elementary::Swap { i, j } => s.swap_columns(i, j),
    }
}

/// Returns `T⁻¹MT` for the elementary `T` of `op`.
pub fn apply_elementary(m: &CMat, op: &Elementary) -> Result<CMat> {
    if m.nrows() != m.ncols() {
        return Err(StrataError::SizeMismatch { expected: m.nrows(), found: m.ncols() });
    }
    op.validate(m.nrows())?;
    let mut out = m.clone();
    apply_in_place(&mut out, op);
    Ok(out)
}

/// Running matrix together with the accumulated transformation.
#[derive(Clone, Debug)]
struct Work {
    x: CMat,
    s: CMat,
}

impl Work {
    fn new(x: CMat) -> Self {
        let n = x.nrows();
        Self { x, s: CMat::identity(n, n) }
    }

    fn apply(&mut self, op: Elementary) {
        apply_in_place(&mut self.x, &op);
        apply_to_columns(&mut self.s, &op);
    }

    /// Similarity by `I + N` where `N` is zero except `N[rows, cols] = m`,
    /// the two index ranges being disjoint.
    fn shear(&mut self, rows: (usize, usize), cols: (usize, usize), m: &CMat) {
        let (r0, p) = rows;
        let (c0, q) = cols;
        let n = self.x.nrows();
        let add = self.x.view((0, r0), (n, p)) * m;
        let mut target = self.x.view_mut((0, c0), (n, q));
        target += add;
        let sub = m * self.x.view((c0, 0), (q, n));
        let mut target = self.x.view_mut((r0, 0), (p, n));
        target -= sub;
        let add = self.s.view((0, r0), (n, p)) * m;
        let mut target = self.s.view_mut((0, c0), (n, q));
        target += add;
    }
}

/// Tunable parameters of the reduction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReductionOptions {
    /// Target size of the entries that must vanish.
    pub tol: f64,
    /// Sweep limit for both stages.
    pub max_iter: usize,
    /// Smallest superdiagonal pivot accepted before normalisation.
    pub pivot_min: f64,
    /// `‖E‖` must stay below this fraction of the eigenvalue gap.
    pub gap_fraction: f64,
    /// Smallest spectral separation accepted by the Sylvester solver.
    pub gap_threshold: f64,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self { tol: 1e-13, max_iter: 50, pivot_min: 0.5, gap_fraction: 0.1, gap_threshold: 1e-6 }
    }
}

/// Solution of a Sylvester equation with its diagnostics.
#[derive(Clone, Debug)]
pub struct SylvesterSolution {
    pub m: CMat,
    /// `‖J2·M − M·J1 + C‖_F`.
    pub residual: f64,
    /// `‖M‖_F / ‖C‖_F`, zero when `C = 0`.
    pub amplification: f64,
    /// Smallest distance between the two spectra.
    pub gap: f64,
}

fn spectral_gap(j1: &CMat, j2: &CMat) -> Result<f64> {
    let e1 = eigenvalues(j1)?;
    let e2 = eigenvalues(j2)?;
    Ok(e1
        .iter()
        .flat_map(|a| e2.iter().map(move |b| (a - b).norm()))
        .fold(f64::INFINITY, f64::min))
}

/// Solves `J2·M − M·J1 = −C` for `M` (`n2 × n1`).
pub fn sylvester_solve(j1: &CMat, j2: &CMat, c: &CMat, gap_threshold: f64) -> Result<SylvesterSolution> {
    let n1 = j1.nrows();
    let n2 = j2.nrows();
    if j1.ncols() != n1 || j2.ncols() != n2 {
        return Err(StrataError::SizeMismatch { expected: n1, found: j1.ncols() });
    }
    if c.nrows() != n2 || c.ncols() != n1 {
        return Err(StrataError::SizeMismatch { expected: n2 * n1, found: c.nrows() * c.ncols() });
    }
    let gap = spectral_gap(j1, j2)?;
    let scale = 1.0f64.max(max_abs(j1)).max(max_abs(j2));
    if gap < gap_threshold * scale {
        return Err(StrataError::SpectraOverlap { gap, threshold: gap_threshold * scale });
    }
    let norm_c = c.norm();
    if norm_c == 0.0 {
        return Ok(SylvesterSolution { m: CMat::zeros(n2, n1), residual: 0.0, amplification: 0.0, gap });
    }
    // Column-major vectorisation: (I ⊗ J2 − J1ᵀ ⊗ I) vec M = −vec C.
    let size = n1 * n2;
    let mut k = CMat::zeros(size, size);
    for col in 0..n1 {
        for r in 0..n2 {
            for r2 in 0..n2 {
                k[(col * n2 + r, col * n2 + r2)] += j2[(r, r2)];
            }
            for col2 in 0..n1 {
                k[(col * n2 + r, col2 * n2 + r)] -= j1[(col2, col)];
            }
        }
    }
    let rhs = CMat::from_iterator(size, 1, c.iter().map(|z| -z));
    let v = solve(&k, &rhs)?;
    let m = CMat::from_iterator(n2, n1, v.iter().copied());
    let residual = (j2 * &m - &m * j1 + c).norm();
    Ok(SylvesterSolution { amplification: m.norm() / norm_c, m, residual, gap })
}

/// Index range of one eigenvalue inside the Jordan matrix.
#[derive(Clone, Debug)]
struct LabelBlock {
    lambda: Complex64,
    partition: Partition,
    offset: usize,
    size: usize,
}

fn label_blocks(t: &JordanType) -> Result<Vec<LabelBlock>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for (label, p) in t.entries() {
        let lambda = label.value().ok_or(StrataError::SymbolicLabel)?;
        out.push(LabelBlock { lambda, partition: p.clone(), offset, size: p.total() });
        offset += p.total();
    }
    Ok(out)
}

fn jordan_of(lambda: Complex64, p: &Partition) -> CMat {
    JordanType::single(EigLabel::Concrete(lambda), p.parts().to_vec())
        .and_then(|t| t.matrix())
        .unwrap_or_else(|_| CMat::zeros(0, 0))
}

/// Outcome of the eigenvalue splitting stage.
#[derive(Clone, Debug)]
pub struct Split {
    pub s: CMat,
    /// `S⁻¹(J + E)S`; off-diagonal blocks are below the tolerance.
    pub x: CMat,
    /// Diagonal blocks `J_i + F_i`.
    pub blocks: Vec<CMat>,
    pub sweeps: usize,
}

/// Block-diagonalises `diag(J_1, …, J_t) + E` along its diagonal blocks.
pub fn split_by_eigenvalue(jblocks: &[CMat], e: &CMat, opts: &ReductionOptions) -> Result<Split> {
    let sizes: Vec<usize> = jblocks.iter().map(|b| b.nrows()).collect();
    let n: usize = sizes.iter().sum();
    if e.nrows() != n || e.ncols() != n {
        return Err(StrataError::SizeMismatch { expected: n, found: e.nrows() });
    }
    let offsets: Vec<usize> = sizes.iter().scan(0, |acc, s| {
        let o = *acc;
        *acc += s;
        Some(o)
    }).collect();
    let j = crate::linalg::direct_sum(jblocks);
    let mut work = Work::new(&j + e);
    let t = jblocks.len();
    let block = |x: &CMat, a: usize, b: usize| x.view((offsets[a], offsets[b]), (sizes[a], sizes[b])).clone_owned();
    let lower_norm = |x: &CMat| {
        let mut m: f64 = 0.0;
        for a in 0..t {
            for b in 0..a {
                m = m.max(max_abs(&block(x, a, b)));
            }
        }
        m
    };
    let mut sweeps = 0;
    while lower_norm(&work.x) > opts.tol {
        if sweeps == opts.max_iter {
            return Err(StrataError::NoConvergence { iterations: sweeps, residual: lower_norm(&work.x) });
        }
        sweeps += 1;
        for d in 1..t {
            for b in 0..t - d {
                let a = b + d;
                let c = block(&work.x, a, b);
                if c.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                    continue;
                }
                let sol = sylvester_solve(&jblocks[b], &jblocks[a], &c, opts.gap_threshold)?;
                work.shear((offsets[a], sizes[a]), (offsets[b], sizes[b]), &sol.m);
            }
        }
    }
    for d in 1..t {
        for a in 0..t - d {
            let b = a + d;
            let c = block(&work.x, a, b);
            if c.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                continue;
            }
            let sol = sylvester_solve(&block(&work.x, b, b), &block(&work.x, a, a), &c, opts.gap_threshold)?;
            work.shear((offsets[a], sizes[a]), (offsets[b], sizes[b]), &sol.m);
        }
    }
    let blocks = (0..t).map(|a| block(&work.x, a, a)).collect();
    Ok(Split { s: work.s, x: work.x, blocks, sweeps })
}

/// Which entries of a single-eigenvalue block may stay free.
fn free_mask(p: &Partition) -> Vec<Vec<bool>> {
    let t = JordanType::single(EigLabel::Symbolic(1), p.parts().to_vec())
        .map(|t| arnold_template(&t));
    let n = p.total();
    let mut mask = vec![vec![false; n]; n];
    if let Ok(t) = t {
        for (i, j) in t.positions(EntryKind::Star) {
            mask[i][j] = true;
        }
    }
    mask
}

fn nilpotent_residual(x: &CMat, j0: &CMat, mask: &[Vec<bool>]) -> f64 {
    let n = x.nrows();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if !mask[i][j] {
                r = r.max((x[(i, j)] - j0[(i, j)]).norm());
            }
        }
    }
    r
}

/// Reduced single-eigenvalue block.
#[derive(Clone, Debug)]
pub struct SingleReduction {
    pub s: CMat,
    pub d: CMat,
    pub sweeps: usize,
    pub residual: f64,
}

/// Reduces `J_λ + F` (blocks of `p`, eigenvalue `λ`) to Arnold's pattern.
pub fn reduce_single_eigenvalue(
    lambda: Complex64,
    p: &Partition,
    m: &CMat,
    opts: &ReductionOptions,
) -> Result<SingleReduction> {
    let n = p.total();
    if m.nrows() != n || m.ncols() != n {
        return Err(StrataError::SizeMismatch { expected: n, found: m.nrows() });
    }
    let shift = CMat::identity(n, n) * lambda;
    let mut work = Work::new(m - &shift);
    let j0 = jordan_of(Complex64::new(0.0, 0.0), p);
    let mask = free_mask(p);
    let mut starts = Vec::new();
    let mut acc = 0;
    for &size in p.parts() {
        starts.push((acc, size));
        acc += size;
    }
    let mut sweeps = 0;
    let mut residual = nilpotent_residual(&work.x, &j0, &mask);
    while residual > opts.tol {
        if sweeps == opts.max_iter {
            return Err(StrataError::NoConvergence { iterations: sweeps, residual });
        }
        sweeps += 1;
        sweep_rows(&mut work, &starts, &mask, opts)?;
        sweep_last_rows(&mut work, &starts);
        residual = nilpotent_residual(&work.x, &j0, &mask);
    }
    let d = &work.x + shift;
    Ok(SingleReduction { s: work.s, d, sweeps, residual })
}

/// Normalises every pivot of the non-last rows and clears those rows.
fn sweep_rows(work: &mut Work, starts: &[(usize, usize)], mask: &[Vec<bool>], opts: &ReductionOptions) -> Result<()> {
    let n = work.x.nrows();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    for &(start, size) in starts {
        for i in start..start + size - 1 {
            let pivot = work.x[(i, i + 1)];
            if pivot.norm() < opts.pivot_min {
                return Err(StrataError::PivotTooSmall { row: i, pivot: pivot.norm() });
            }
            if pivot != one {
                work.apply(Elementary::Scale { i: i + 1, a: one / pivot });
            }
            for c in 0..n {
                if c == i + 1 || mask[i][c] {
                    continue;
                }
                let v = work.x[(i, c)];
                if v != zero {
                    work.apply(Elementary::AddCol { from: i + 1, to: c, b: -v });
                }
            }
        }
    }
    Ok(())
}

/// Clears the entries of the last rows lying left of the first column of
/// an earlier block; each removal cascades diagonally up through the block.
fn sweep_last_rows(work: &mut Work, starts: &[(usize, usize)]) {
    let zero = Complex64::new(0.0, 0.0);
    for (l, &(first_l, size_l)) in starts.iter().enumerate() {
        for c in (first_l + 1..first_l + size_l).rev() {
            for &(first_k, size_k) in &starts[l + 1..] {
                let (mut r, mut col) = (first_k + size_k - 1, c);
                loop {
                    let v = work.x[(r, col)];
                    if v != zero {
                        work.apply(Elementary::AddCol { from: r, to: col - 1, b: v });
                    }
                    if r == first_k || col - 1 == first_l {
                        break;
                    }
                    r -= 1;
                    col -= 1;
                }
            }
        }
    }
}

/// Result of [`reduce_to_miniversal`].
#[derive(Clone, Debug)]
pub struct ReductionResult {
    pub s: CMat,
    pub d: CMat,
    /// Largest deviation of a constrained entry of `D` from the template.
    pub residual: f64,
    /// `‖S·D − (J + E)·S‖_F`.
    pub certificate: f64,
    /// `‖S − I‖_F`.
    pub s_distance: f64,
    /// `‖E‖_F`.
    pub e_norm: f64,
    pub split_sweeps: usize,
    pub block_sweeps: Vec<usize>,
    pub pattern_ok: bool,
}

/// Reduces `J + E` to `J + 𝒟` with `𝒟` supported on Arnold's template.
pub fn reduce_to_miniversal(t: &JordanType, e: &CMat, opts: &ReductionOptions) -> Result<ReductionResult> {
    let blocks = label_blocks(t)?;
    let n = t.order();
    if e.nrows() != n || e.ncols() != n {
        return Err(StrataError::SizeMismatch { expected: n, found: e.nrows() });
    }
    let e_norm = e.norm();
    let mut gap = f64::INFINITY;
    for (a, x) in blocks.iter().enumerate() {
        for y in &blocks[a + 1..] {
            gap = gap.min((x.lambda - y.lambda).norm());
        }
    }
    if blocks.len() > 1 && e_norm >= opts.gap_fraction * gap {
        return Err(StrataError::Precondition(format!(
            "perturbation norm {e_norm:.3e} is not below {} of the eigenvalue gap {gap:.3e}",
            opts.gap_fraction
        )));
    }
    let jblocks: Vec<CMat> = blocks.iter().map(|b| jordan_of(b.lambda, &b.partition)).collect();
    let split = split_by_eigenvalue(&jblocks, e, opts)?;
    let mut s = split.s;
    let mut d = split.x;
    let mut block_sweeps = Vec::new();
    for (b, m) in blocks.iter().zip(&split.blocks) {
        let single = reduce_single_eigenvalue(b.lambda, &b.partition, m, opts)?;
        block_sweeps.push(single.sweeps);
        let (o, k) = (b.offset, b.size);
        // Conjugating by diag(I, T, I) touches only this block row and column.
        let cols = d.view((0, o), (n, k)) * &single.s;
        d.view_mut((0, o), (n, k)).copy_from(&cols);
        let inv = crate::linalg::inverse(&single.s)?;
        let rows = &inv * d.view((o, 0), (k, n));
        d.view_mut((o, 0), (k, n)).copy_from(&rows);
        d.view_mut((o, o), (k, k)).copy_from(&single.d);
        let cols = s.view((0, o), (n, k)) * &single.s;
        s.view_mut((0, o), (n, k)).copy_from(&cols);
    }
    let j = t.matrix()?;
    let original = &j + e;
    let certificate = (&s * &d - &original * &s).norm();
    let tmpl = arnold_template(t);
    let check = tmpl.pattern_check(&d, opts.tol.max(1e-8))?;
    let s_distance = (&s - CMat::identity(n, n)).norm();
    Ok(ReductionResult {
        s,
        d,
        residual: check.residual,
        certificate,
        s_distance,
        e_norm,
        split_sweeps: split.sweeps,
        block_sweeps,
        pattern_ok: check.ok,
    })
}
