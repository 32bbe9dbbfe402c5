//! Exact combinatorics of Jordan structures.
//!
//! A Jordan matrix is described by a [`JordanType`]: a map from eigenvalue
//! labels to the [`Partition`] of its block sizes (the Segre characteristic).
//! The [`WeyrChar`] is the conjugate partition; `w[j]` counts the blocks of
//! size greater than `j`.
//!
//! Labels are either symbolic (`a`, `b`, ... standing for pairwise distinct
//! unspecified eigenvalues) or concrete complex numbers. The textual compact
//! notation writes one token per Jordan block, `a^3 a b` being
//! `J_3(a) ⊕ J_1(a) ⊕ J_1(b)`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, StrataError};

/// Weakly decreasing sequence of positive integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<usize>);

impl Partition {
    /// Validates an already sorted list of parts.
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(StrataError::InvalidPartition("empty partition".into()));
        }
        if parts.contains(&0) {
            return Err(StrataError::InvalidPartition(format!(
                "parts must be positive: {parts:?}"
            )));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(StrataError::InvalidPartition(format!(
                "parts must be weakly decreasing: {parts:?}"
            )));
        }
        Ok(Self(parts))
    }

    /// Sorts the parts and drops zeros.
    pub fn from_unsorted(mut parts: Vec<usize>) -> Result<Self> {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self::new(parts)
    }

    pub fn single(size: usize) -> Result<Self> {
        Self::new(vec![size])
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn conjugate(&self) -> Partition {
        Partition(conjugate_parts(&self.0))
    }

    /// Weyr characteristic of a Jordan matrix whose blocks for one
    /// eigenvalue have these sizes.
    pub fn weyr(&self) -> WeyrChar {
        WeyrChar(conjugate_parts(&self.0))
    }

    /// Part-wise sum, padding the shorter partition with zeros.
    pub fn partwise_sum(&self, other: &Partition) -> Partition {
        let len = self.len().max(other.len());
        let parts = (0..len)
            .map(|i| self.0.get(i).copied().unwrap_or(0) + other.0.get(i).copied().unwrap_or(0))
            .collect();
        Partition(parts)
    }

    /// Every partition of `n`, in reverse lexicographic order (`(n)` first).
    pub fn all(n: usize) -> Vec<Partition> {
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        let mut current = Vec::new();
        enumerate_partitions(n, n, &mut current, &mut out);
        out
    }
}

fn enumerate_partitions(rest: usize, max: usize, current: &mut Vec<usize>, out: &mut Vec<Partition>) {
    if rest == 0 {
        out.push(Partition(current.clone()));
        return;
    }
    for part in (1..=rest.min(max)).rev() {
        current.push(part);
        enumerate_partitions(rest - part, part, current, out);
        current.pop();
    }
}

fn conjugate_parts(parts: &[usize]) -> Vec<usize> {
    let longest = parts.first().copied().unwrap_or(0);
    (1..=longest)
        .map(|j| parts.iter().filter(|&&p| p >= j).count())
        .collect()
}

/// `result[j] = #{i : p[i] > j}`.
pub fn conjugate_partition(p: &Partition) -> Partition {
    p.conjugate()
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Weyr characteristic; trailing zeros are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct WeyrChar(Vec<usize>);

impl WeyrChar {
    pub fn new(mut w: Vec<usize>) -> Result<Self> {
        while w.last() == Some(&0) {
            w.pop();
        }
        if w.windows(2).any(|p| p[0] < p[1]) {
            return Err(StrataError::InvalidPartition(format!(
                "Weyr characteristic must be weakly decreasing: {w:?}"
            )));
        }
        Ok(Self(w))
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// Running sums `w_1, w_1 + w_2, ...`.
    pub fn prefix_sums(&self) -> Vec<usize> {
        self.0
            .iter()
            .scan(0, |acc, &w| {
                *acc += w;
                Some(*acc)
            })
            .collect()
    }

    /// Segre characteristic (block sizes). `None` for the empty sequence.
    pub fn segre(&self) -> Option<Partition> {
        if self.0.is_empty() {
            None
        } else {
            Some(Partition(conjugate_parts(&self.0)))
        }
    }

    /// True when every prefix sum of `self` is at least the matching prefix
    /// sum of `other` (sums past the end stay at the total).
    pub fn dominates(&self, other: &WeyrChar) -> bool {
        let a = self.prefix_sums();
        let b = other.prefix_sums();
        let len = a.len().max(b.len());
        let at = |v: &[usize], k: usize| -> usize {
            if v.is_empty() {
                0
            } else {
                v[k.min(v.len() - 1)]
            }
        };
        (0..len).all(|k| at(&a, k) >= at(&b, k))
    }
}

impl fmt::Display for WeyrChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Eigenvalue label. Symbolic ids are 1-based: `a` is `Symbolic(1)`.
#[derive(Clone, Copy, Debug)]
pub enum EigLabel {
    Symbolic(u8),
    Concrete(Complex64),
}

impl EigLabel {
    pub fn letter(ch: char) -> Option<Self> {
        if ch.is_ascii_lowercase() {
            Some(EigLabel::Symbolic(ch as u8 - b'a' + 1))
        } else {
            None
        }
    }

    pub fn value(&self) -> Option<Complex64> {
        match self {
            EigLabel::Concrete(z) => Some(*z),
            EigLabel::Symbolic(_) => None,
        }
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, EigLabel::Symbolic(_))
    }

    /// Greek rendering: a→λ, b→μ, c→ν, d→ξ, then π, ρ, σ, τ.
    pub fn display_name(&self) -> String {
        match self {
            EigLabel::Symbolic(id) => match id {
                1 => "λ".to_string(),
                2 => "μ".to_string(),
                3 => "ν".to_string(),
                4 => "ξ".to_string(),
                5 => "π".to_string(),
                6 => "ρ".to_string(),
                7 => "σ".to_string(),
                8 => "τ".to_string(),
                _ => ascii_letter(*id),
            },
            EigLabel::Concrete(z) => format_complex(*z),
        }
    }

    fn sort_key(&self) -> (u8, u8, f64, f64) {
        match self {
            EigLabel::Symbolic(id) => (0, *id, 0.0, 0.0),
            EigLabel::Concrete(z) => (1, 0, z.re, z.im),
        }
    }
}

fn ascii_letter(id: u8) -> String {
    if (1..=26).contains(&id) {
        ((b'a' + id - 1) as char).to_string()
    } else {
        format!("s{id}")
    }
}

impl PartialEq for EigLabel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for EigLabel {}

impl PartialOrd for EigLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EigLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a0, a1, a2, a3) = self.sort_key();
        let (b0, b1, b2, b3) = other.sort_key();
        a0.cmp(&b0)
            .then(a1.cmp(&b1))
            .then(a2.total_cmp(&b2))
            .then(a3.total_cmp(&b3))
    }
}

impl Hash for EigLabel {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let (a, b, c, d) = self.sort_key();
        a.hash(state);
        b.hash(state);
        c.to_bits().hash(state);
        d.to_bits().hash(state);
    }
}

impl fmt::Display for EigLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EigLabel::Symbolic(id) => write!(f, "{}", ascii_letter(*id)),
            EigLabel::Concrete(z) => write!(f, "({})", format_complex(*z)),
        }
    }
}

/// Shortest round-trip rendering: `2`, `-0.5`, `1+2i`, `-3i`.
pub fn format_complex(z: Complex64) -> String {
    let re = if z.re == 0.0 { 0.0 } else { z.re };
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    if im == 0.0 {
        format!("{re}")
    } else if re == 0.0 {
        format!("{im}i")
    } else if im < 0.0 {
        format!("{re}{im}i")
    } else {
        format!("{re}+{im}i")
    }
}

/// Parses `1`, `-2.5`, `i`, `-i`, `3i`, `1+2i`, `1e-3-4i`.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some(body) = s.strip_suffix('i') {
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        let (re_text, im_text) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let im = match im_text {
            "" | "+" => 1.0,
            "-" => -1.0,
            t => t.parse::<f64>().ok()?,
        };
        let re = if re_text.is_empty() {
            0.0
        } else {
            re_text.parse::<f64>().ok()?
        };
        if !re.is_finite() || !im.is_finite() {
            return None;
        }
        Some(Complex64::new(re, im))
    } else {
        let re = s.parse::<f64>().ok()?;
        re.is_finite().then_some(Complex64::new(re, 0.0))
    }
}

/// Jordan structure: eigenvalue label ↦ block sizes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JordanType {
    entries: BTreeMap<EigLabel, Partition>,
}

impl JordanType {
    pub fn new(entries: BTreeMap<EigLabel, Partition>) -> Result<Self> {
        if entries.is_empty() {
            return Err(StrataError::InvalidJordanType("no eigenvalues".into()));
        }
        Ok(Self { entries })
    }

    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (EigLabel, Vec<usize>)>,
    {
        let mut entries = BTreeMap::new();
        for (label, parts) in pairs {
            let p = Partition::from_unsorted(parts)?;
            if entries.insert(label, p).is_some() {
                return Err(StrataError::InvalidJordanType(format!(
                    "label {label} listed twice"
                )));
            }
        }
        Self::new(entries)
    }

    /// Single eigenvalue with the given block sizes.
    pub fn single(label: EigLabel, parts: Vec<usize>) -> Result<Self> {
        Self::from_pairs([(label, parts)])
    }

    pub fn entries(&self) -> &BTreeMap<EigLabel, Partition> {
        &self.entries
    }

    pub fn labels(&self) -> impl Iterator<Item = &EigLabel> {
        self.entries.keys()
    }

    pub fn label_count(&self) -> usize {
        self.entries.len()
    }

    pub fn partition(&self, label: &EigLabel) -> Option<&Partition> {
        self.entries.get(label)
    }

    pub fn order(&self) -> usize {
        self.entries.values().map(Partition::total).sum()
    }

    pub fn is_symbolic(&self) -> bool {
        self.entries.keys().all(EigLabel::is_symbolic)
    }

    pub fn is_concrete(&self) -> bool {
        self.entries.keys().all(|l| !l.is_symbolic())
    }

    /// Conjugate of the partition at `label`; empty when absent.
    pub fn weyr(&self, label: &EigLabel) -> WeyrChar {
        self.entries.get(label).map(Partition::weyr).unwrap_or_default()
    }

    /// `Σ_λ Σ_j w_{λj}²`.
    pub fn orbit_codim(&self) -> usize {
        self.entries
            .values()
            .map(|p| p.weyr().values().iter().map(|w| w * w).sum::<usize>())
            .sum()
    }

    pub fn orbit_dim(&self) -> usize {
        let n = self.order();
        n * n - self.orbit_codim()
    }

    /// Same structure with every label replaced through `map`.
    pub fn relabel<F>(&self, mut map: F) -> Result<Self>
    where
        F: FnMut(&EigLabel) -> EigLabel,
    {
        Self::from_pairs(
            self.entries
                .iter()
                .map(|(l, p)| (map(l), p.parts().to_vec())),
        )
    }

    /// Jordan blocks in matrix order: labels ascending, sizes descending.
    pub fn blocks(&self) -> Vec<JordanBlock> {
        let mut out = Vec::new();
        let mut offset = 0;
        for (label, p) in &self.entries {
            for &size in p.parts() {
                out.push(JordanBlock { label: *label, size, offset });
                offset += size;
            }
        }
        out
    }

    /// The Jordan matrix; requires concrete labels.
    pub fn matrix(&self) -> Result<DMatrix<Complex64>> {
        let n = self.order();
        let mut m = DMatrix::zeros(n, n);
        for block in self.blocks() {
            let value = block.label.value().ok_or(StrataError::SymbolicLabel)?;
            for k in 0..block.size {
                let i = block.offset + k;
                m[(i, i)] = value;
                if k + 1 < block.size {
                    m[(i, i + 1)] = Complex64::new(1.0, 0.0);
                }
            }
        }
        Ok(m)
    }

    /// Compact notation: one token per block, `a^2 a b`.
    pub fn to_compact(&self) -> String {
        format_compact(self)
    }

    /// Compact notation with Greek letters and superscripts.
    pub fn display(&self) -> String {
        let mut out = String::new();
        for (label, p) in &self.entries {
            for &size in p.parts() {
                out.push_str(&label.display_name());
                if size > 1 {
                    out.push_str(&superscript(size));
                }
            }
        }
        out
    }
}

fn superscript(k: usize) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    k.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap_or(0) as usize])
        .collect()
}

impl fmt::Display for JordanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_compact(self))
    }
}

/// One Jordan block inside a Jordan matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JordanBlock {
    pub label: EigLabel,
    pub size: usize,
    pub offset: usize,
}

/// Weyr characteristic of `t` at `label` (empty when absent).
pub fn weyr_of(t: &JordanType, label: &EigLabel) -> WeyrChar {
    t.weyr(label)
}

pub fn orbit_codim(t: &JordanType) -> usize {
    t.orbit_codim()
}

pub fn orbit_dim(t: &JordanType) -> usize {
    t.orbit_dim()
}

pub fn format_compact(t: &JordanType) -> String {
    let mut tokens = Vec::new();
    for (label, p) in &t.entries {
        for &size in p.parts() {
            if size == 1 {
                tokens.push(label.to_string());
            } else {
                tokens.push(format!("{label}^{size}"));
            }
        }
    }
    tokens.join(" ")
}

/// Parses whitespace separated `<label>` / `<label>^<k>` tokens, where a
/// label is a lowercase letter or a parenthesised complex literal.
pub fn parse_compact(s: &str) -> Result<JordanType> {
    let mut blocks: BTreeMap<EigLabel, Vec<usize>> = BTreeMap::new();
    let mut pos = 0;
    let bytes = s.as_bytes();
    let err = |position: usize, message: String| StrataError::Parse { position, message };
    while pos < bytes.len() {
        if bytes[pos].is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        let start = pos;
        let label = if bytes[pos] == b'(' {
            let close = s[pos..]
                .find(')')
                .map(|k| pos + k)
                .ok_or_else(|| err(start, "unclosed '('".into()))?;
            let literal = &s[pos + 1..close];
            let z = parse_complex(literal)
                .ok_or_else(|| err(start + 1, format!("bad complex literal '{literal}'")))?;
            pos = close + 1;
            EigLabel::Concrete(z)
        } else {
            let ch = s[pos..].chars().next().unwrap_or(' ');
            let label = EigLabel::letter(ch)
                .ok_or_else(|| err(start, format!("unexpected character '{ch}'")))?;
            pos += ch.len_utf8();
            label
        };
        let mut size = 1;
        if pos < bytes.len() && bytes[pos] == b'^' {
            pos += 1;
            let digits_start = pos;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            if digits_start == pos {
                return Err(err(digits_start, "missing exponent after '^'".into()));
            }
            size = s[digits_start..pos]
                .parse::<usize>()
                .map_err(|e| err(digits_start, e.to_string()))?;
            if size < 1 {
                return Err(err(digits_start, "block size must be at least 1".into()));
            }
        }
        if pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            return Err(err(pos, "expected whitespace between tokens".into()));
        }
        blocks.entry(label).or_default().push(size);
    }
    if blocks.is_empty() {
        return Err(err(0, "empty notation".into()));
    }
    JordanType::from_pairs(blocks)
}

/// Jordan type modulo renaming of eigenvalues, labelled canonically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BundleType(JordanType);

impl BundleType {
    pub fn jordan(&self) -> &JordanType {
        &self.0
    }

    pub fn into_jordan(self) -> JordanType {
        self.0
    }

    pub fn order(&self) -> usize {
        self.0.order()
    }

    pub fn orbit_dim(&self) -> usize {
        self.0.orbit_dim()
    }

    /// Orbit dimension plus the number of free eigenvalues.
    pub fn dim(&self) -> usize {
        self.0.orbit_dim() + self.0.label_count()
    }

    /// Sorted partitions, the complete invariant of the bundle.
    pub fn partitions(&self) -> Vec<&Partition> {
        self.0.entries.values().collect()
    }
}

impl fmt::Display for BundleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Key ordering used for canonical labels: partitions lexicographically
/// descending, then by total.
fn bundle_key_order(a: &Partition, b: &Partition) -> Ordering {
    b.parts().cmp(a.parts()).then(b.total().cmp(&a.total()))
}

/// Renumbers labels `a, b, ...` by sorting the partitions.
pub fn canonical_bundle_labeling(t: &JordanType) -> BundleType {
    let mut parts: Vec<Partition> = t.entries.values().cloned().collect();
    parts.sort_by(bundle_key_order);
    BundleType::from_sorted(parts)
}

impl BundleType {
    fn from_sorted(parts: Vec<Partition>) -> Self {
        let entries = parts
            .into_iter()
            .enumerate()
            .map(|(i, p)| (EigLabel::Symbolic(i as u8 + 1), p))
            .collect();
        BundleType(JordanType { entries })
    }

    /// Builds a bundle from any list of partitions.
    pub fn from_partitions(mut parts: Vec<Partition>) -> Result<Self> {
        if parts.is_empty() {
            return Err(StrataError::InvalidJordanType("no eigenvalues".into()));
        }
        parts.sort_by(bundle_key_order);
        Ok(Self::from_sorted(parts))
    }
}

pub fn bundle_dim(b: &BundleType) -> usize {
    b.dim()
}

/// Every bundle (Jordan type up to relabelling) of order `n`, sorted.
pub fn all_bundles(n: usize) -> Vec<BundleType> {
    let mut out = BTreeSet::new();
    for multiplicities in Partition::all(n) {
        let choices: Vec<Vec<Partition>> = multiplicities
            .parts()
            .iter()
            .map(|&m| Partition::all(m))
            .collect();
        let mut pick = Vec::new();
        product(&choices, &mut pick, &mut |parts| {
            if let Ok(b) = BundleType::from_partitions(parts.to_vec()) {
                out.insert(b);
            }
        });
    }
    out.into_iter().collect()
}

/// Every Jordan type whose label `labels[i]` has algebraic multiplicity
/// `multiplicities[i]`.
pub fn jordan_types_with(labels: &[EigLabel], multiplicities: &[usize]) -> Result<Vec<JordanType>> {
    if labels.len() != multiplicities.len() {
        return Err(StrataError::SizeMismatch {
            expected: labels.len(),
            found: multiplicities.len(),
        });
    }
    let choices: Vec<Vec<Partition>> = multiplicities.iter().map(|&m| Partition::all(m)).collect();
    if choices.iter().any(Vec::is_empty) {
        return Err(StrataError::InvalidJordanType("zero multiplicity".into()));
    }
    let mut out = Vec::new();
    let mut pick = Vec::new();
    let mut failure = None;
    product(&choices, &mut pick, &mut |parts| {
        let entries = labels.iter().copied().zip(parts.iter().cloned()).collect();
        match JordanType::new(entries) {
            Ok(t) => out.push(t),
            Err(e) => failure = Some(e),
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

fn product<T: Clone>(choices: &[Vec<T>], pick: &mut Vec<T>, visit: &mut dyn FnMut(&[T])) {
    if pick.len() == choices.len() {
        visit(pick);
        return;
    }
    for item in &choices[pick.len()] {
        pick.push(item.clone());
        product(choices, pick, visit);
        pick.pop();
    }
}
