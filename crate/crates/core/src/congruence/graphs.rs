//! Closure graphs with parametric vertices.
//!
//! A vertex is a family of orbits (or a bundle) indexed by a few complex
//! parameters. An edge `F → G` says that every orbit of `F` whose parameters
//! satisfy the edge predicate together with those of `G` lies in the closure
//! of the corresponding orbit of `G`. Edges point from lower to higher
//! dimension.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write;

use num_complex::Complex64;
use serde_json::{json, Value};

use super::{
    normalize_inversion, CongruenceBlock, CongruenceCanonical, StarBlock, StarCongruenceCanonical, PARAM_TOL,
};
use crate::error::{Result, StrataError};
use crate::order::GraphKind;
use crate::structure::format_complex;

/// Tolerance for parameter comparisons inside predicates.
pub const PREDICATE_TOL: f64 = 1e-9;

/// Admissible parameter values of a family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// No parameter.
    Fixed,
    /// `λ ∉ {1, −1}` taken up to `λ ↦ λ⁻¹`; `0` stands for the nilpotent member.
    Inversion,
    /// `|λ| = 1`.
    Unit,
    /// `|λ| = 1` up to sign.
    UnitUpToSign,
    /// An unordered pair of unit numbers with `μ ≠ ±ν`.
    UnitPair,
    /// `|σ| < 1`.
    OpenDisk,
}

impl Domain {
    pub fn arity(&self) -> usize {
        match self {
            Domain::Fixed => 0,
            Domain::UnitPair => 2,
            _ => 1,
        }
    }

    fn contains(&self, p: &[Complex64]) -> bool {
        let unit = |z: Complex64| (z.norm() - 1.0).abs() <= PARAM_TOL.max(1e-10);
        if p.len() != self.arity() || p.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return false;
        }
        match self {
            Domain::Fixed => true,
            Domain::Inversion => (p[0] - 1.0).norm() > PARAM_TOL && (p[0] + 1.0).norm() > PARAM_TOL,
            Domain::Unit | Domain::UnitUpToSign => unit(p[0]),
            Domain::UnitPair => {
                unit(p[0]) && unit(p[1]) && (p[0] - p[1]).norm() > PARAM_TOL && (p[0] + p[1]).norm() > PARAM_TOL
            }
            Domain::OpenDisk => p[0].norm() < 1.0 - PARAM_TOL,
        }
    }

    fn canonical(&self, p: &[Complex64]) -> Vec<Complex64> {
        let key = |z: &Complex64| (z.re, z.im);
        match self {
            Domain::Inversion if p[0].norm() > PARAM_TOL => vec![normalize_inversion(p[0])],
            Domain::UnitUpToSign => {
                let (a, b) = (p[0], -p[0]);
                vec![if key(&a) <= key(&b) { a } else { b }]
            }
            Domain::UnitPair => {
                let mut v = p.to_vec();
                v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
                v
            }
            _ => p.to_vec(),
        }
    }
}

/// Condition on the parameters `p` of the source and `q` of the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Predicate {
    Always,
    /// `p₀ = q₀`.
    Equal,
    /// `p₀ = ±q₀`.
    PlusMinus,
    /// `p₀ = a·q₀ + b·q₁` with `a, b ≥ 0`.
    Cone,
    /// `Im(p₀ · q̄₀) ≥ 0`.
    HalfPlane,
}

impl Predicate {
    pub fn holds(&self, p: &[Complex64], q: &[Complex64]) -> bool {
        let tol = PREDICATE_TOL;
        match self {
            Predicate::Always => true,
            Predicate::Equal => (p[0] - q[0]).norm() <= tol,
            Predicate::PlusMinus => (p[0] - q[0]).norm() <= tol || (p[0] + q[0]).norm() <= tol,
            Predicate::Cone => {
                let (m, n, l) = (q[0], q[1], p[0]);
                let det = m.re * n.im - m.im * n.re;
                if det.abs() <= tol {
                    return false;
                }
                let a = (l.re * n.im - l.im * n.re) / det;
                let b = (m.re * l.im - m.im * l.re) / det;
                a >= -tol && b >= -tol
            }
            Predicate::HalfPlane => (p[0] * q[0].conj()).im >= -tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Family {
    pub key: String,
    pub label: String,
    pub dim: usize,
    pub domain: Domain,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamEdge {
    pub from: usize,
    pub to: usize,
    pub predicate: Predicate,
    /// Human-readable form of the predicate, empty when it always holds.
    pub condition: String,
}

/// A family together with admissible parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub family: usize,
    pub params: Vec<Complex64>,
}

/// Which action and order a graph describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Congruence(usize),
    StarCongruence(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParametricGraph {
    pub space: Space,
    pub kind: GraphKind,
    /// True when dimensions are real.
    pub real_dims: bool,
    pub families: Vec<Family>,
    pub edges: Vec<ParamEdge>,
}

impl ParametricGraph {
    fn new(space: Space, kind: GraphKind, real_dims: bool, fams: &[(&str, &str, usize, Domain)]) -> Self {
        let families = fams
            .iter()
            .map(|&(key, label, dim, domain)| Family { key: key.into(), label: label.into(), dim, domain })
            .collect();
        Self { space, kind, real_dims, families, edges: Vec::new() }
    }

    fn edge(&mut self, from: &str, to: &str, predicate: Predicate, condition: &str) {
        let from = self.family_index(from).expect("known family");
        let to = self.family_index(to).expect("known family");
        self.edges.push(ParamEdge { from, to, predicate, condition: condition.into() });
    }

    fn always(&mut self, list: &[(&str, &str)]) {
        for (a, b) in list {
            self.edge(a, b, Predicate::Always, "");
        }
    }

    pub fn family_index(&self, key: &str) -> Option<usize> {
        self.families.iter().position(|f| f.key == key || f.label == key)
    }

    /// Validated instance with parameters in canonical position.
    pub fn instance(&self, family: usize, params: &[Complex64]) -> Result<Instance> {
        let f = self
            .families
            .get(family)
            .ok_or_else(|| StrataError::InvalidCanonical(format!("no family with index {family}")))?;
        if !f.domain.contains(params) {
            return Err(StrataError::InvalidCanonical(format!(
                "parameters {} are not admissible for {}",
                params.iter().map(|z| format_complex(*z)).collect::<Vec<_>>().join(", "),
                f.label
            )));
        }
        Ok(Instance { family, params: f.domain.canonical(params) })
    }

    pub fn instance_by_key(&self, key: &str, params: &[Complex64]) -> Result<Instance> {
        let i = self
            .family_index(key)
            .ok_or_else(|| StrataError::InvalidCanonical(format!("unknown family {key}")))?;
        self.instance(i, params)
    }

    fn same(&self, a: &Instance, b: &Instance) -> bool {
        a.family == b.family && a.params.iter().zip(&b.params).all(|(x, y)| (x - y).norm() <= PREDICATE_TOL)
    }

    /// True when some edge joins the two instances directly.
    pub fn has_arrow(&self, a: &Instance, b: &Instance) -> bool {
        self.edges
            .iter()
            .any(|e| e.from == a.family && e.to == b.family && e.predicate.holds(&a.params, &b.params))
    }

    fn candidates(&self, family: usize, seeds: &[Complex64]) -> Vec<Instance> {
        let domain = self.families[family].domain;
        let mut values: Vec<Complex64> = vec![Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.5), Complex64::new(0.5, 0.25)];
        for k in 0..24 {
            values.push(Complex64::from_polar(1.0, k as f64 * std::f64::consts::PI / 12.0 + 0.1));
        }
        for &s in seeds {
            values.extend([s, -s, s.conj(), -s.conj()]);
            if s.norm() > PARAM_TOL {
                values.extend([1.0 / s, 1.0 / s.conj(), s / s.norm()]);
            }
            for &t in seeds {
                let sum = s + t;
                if sum.norm() > PARAM_TOL {
                    values.push(sum / sum.norm());
                }
            }
        }
        let tuples: Vec<Vec<Complex64>> = match domain.arity() {
            0 => vec![Vec::new()],
            1 => values.iter().map(|&v| vec![v]).collect(),
            _ => values.iter().flat_map(|&x| values.iter().map(move |&y| vec![x, y])).collect(),
        };
        tuples.into_iter().filter_map(|p| self.instance(family, &p).ok()).collect()
    }

    /// Whether `b` lies in the closure of `a`'s orbit reversed, that is,
    /// whether a directed path leads from `a` to `b`. Reflexive.
    pub fn path_exists(&self, a: &Instance, b: &Instance) -> bool {
        if self.same(a, b) {
            return true;
        }
        let seeds: Vec<Complex64> = a.params.iter().chain(&b.params).copied().collect();
        let mut seen: BTreeSet<(usize, Vec<(u64, u64)>)> = BTreeSet::new();
        let key = |i: &Instance| (i.family, i.params.iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect());
        let mut queue = VecDeque::from([a.clone()]);
        seen.insert(key(a));
        while let Some(x) = queue.pop_front() {
            for e in self.edges.iter().filter(|e| e.from == x.family) {
                if e.to == b.family && e.predicate.holds(&x.params, &b.params) {
                    return true;
                }
                for y in self.candidates(e.to, &seeds) {
                    if e.predicate.holds(&x.params, &y.params) && seen.insert(key(&y)) {
                        queue.push_back(y);
                    }
                }
            }
        }
        false
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph closure {\n  rankdir=BT;\n");
        let unit = if self.real_dims { "real dim" } else { "dim" };
        for (i, f) in self.families.iter().enumerate() {
            let _ = writeln!(out, "  v{i} [label=\"{} ({unit} {})\"];", f.label, f.dim);
        }
        for e in &self.edges {
            if e.condition.is_empty() {
                let _ = writeln!(out, "  v{} -> v{};", e.from, e.to);
            } else {
                let _ = writeln!(out, "  v{} -> v{} [label=\"{}\"];", e.from, e.to, e.condition);
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kind": match self.kind { GraphKind::Classes => "classes", GraphKind::Bundles => "bundles" },
            "real_dims": self.real_dims,
            "vertices": self.families.iter().enumerate().map(|(i, f)| json!({
                "id": i, "key": f.key, "label": f.label, "dim": f.dim, "parameters": f.domain.arity(),
            })).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|e| json!({
                "from": e.from, "to": e.to, "condition": e.condition,
            })).collect::<Vec<_>>(),
        })
    }

    /// The canonical matrix of an instance.
    pub fn canonical_matrix(&self, inst: &Instance) -> Result<crate::linalg::CMat> {
        match self.space {
            Space::Congruence(_) => Ok(self.congruence_form(inst)?.matrix()),
            Space::StarCongruence(_) => Ok(self.star_form(inst)?.matrix()),
        }
    }

    /// Representative congruence form of an instance; bundles use a generic
    /// parameter.
    pub fn congruence_form(&self, inst: &Instance) -> Result<CongruenceCanonical> {
        use CongruenceBlock::*;
        let lam = inst.params.first().copied().unwrap_or(Complex64::new(2.0, 0.5));
        let h = |lam: Complex64| if lam.norm() <= PARAM_TOL { N(2) } else { H { m: 1, lambda: lam } };
        let skew = H { m: 1, lambda: Complex64::new(-1.0, 0.0) };
        let key = self.families[inst.family].key.as_str();
        let blocks = match key {
            "0" if self.space == Space::Congruence(2) => vec![N(1), N(1)],
            "0" => vec![N(1), N(1), N(1)],
            "skew" => vec![skew],
            "diag(1,0)" => vec![Gamma(1), N(1)],
            "I2" => vec![Gamma(1), Gamma(1)],
            "Gamma2" => vec![Gamma(2)],
            "H(l)" => vec![h(lam)],
            "diag(1,0,0)" => vec![Gamma(1), N(1), N(1)],
            "skew+0" => vec![skew, N(1)],
            "diag(1,1,0)" => vec![Gamma(1), Gamma(1), N(1)],
            "H(l)+0" => vec![h(lam), N(1)],
            "Gamma2+0" => vec![Gamma(2), N(1)],
            "I3" => vec![Gamma(1), Gamma(1), Gamma(1)],
            "skew+1" => vec![skew, Gamma(1)],
            "N3" => vec![N(3)],
            "Gamma3" => vec![Gamma(3)],
            "H(l)+1" => vec![h(lam), Gamma(1)],
            "Gamma2+1" => vec![Gamma(2), Gamma(1)],
            _ => return Err(StrataError::InvalidCanonical(format!("{key} is not a congruence family"))),
        };
        CongruenceCanonical::from_blocks(blocks)
    }

    /// Representative *congruence form of an instance.
    pub fn star_form(&self, inst: &Instance) -> Result<StarCongruenceCanonical> {
        use StarBlock::*;
        let p = &inst.params;
        let key = self.families[inst.family].key.as_str();
        let blocks = match key {
            "0" => vec![N(1), N(1)],
            "diag(l,0)" => vec![U { n: 1, mu: p[0] }, N(1)],
            "diag(l,l)" => vec![U { n: 1, mu: p[0] }, U { n: 1, mu: p[0] }],
            "diag(l,-l)" => vec![U { n: 1, mu: p[0] }, U { n: 1, mu: -p[0] }],
            "diag(m,n)" => vec![U { n: 1, mu: p[0] }, U { n: 1, mu: p[1] }],
            "H(s)" if p[0].norm() <= PARAM_TOL => vec![N(2)],
            "H(s)" => vec![H { m: 1, lambda: Complex64::new(1.0, 0.0) / p[0].conj() }],
            "U2(t)" => vec![U { n: 2, mu: p[0] }],
            _ => return Err(StrataError::InvalidCanonical(format!("{key} is not a *congruence family"))),
        };
        StarCongruenceCanonical::from_blocks(blocks)
    }

    /// Vertex of a congruence canonical form.
    pub fn locate_congruence(&self, form: &CongruenceCanonical) -> Result<Instance> {
        use CongruenceBlock::*;
        let bundles = self.kind == GraphKind::Bundles;
        let is_skew = |l: Complex64| (l + 1.0).norm() <= PARAM_TOL;
        let (key, params): (&str, Vec<Complex64>) = match form.blocks() {
            [N(1), N(1)] => ("0", vec![]),
            [N(1), N(1), N(1)] => ("0", vec![]),
            [H { m: 1, lambda }] if is_skew(*lambda) => ("skew", vec![]),
            [Gamma(1), N(1)] => ("diag(1,0)", vec![]),
            [Gamma(1), Gamma(1)] => ("I2", vec![]),
            [Gamma(2)] => ("Gamma2", vec![]),
            [H { m: 1, lambda }] => ("H(l)", vec![*lambda]),
            [N(2)] => ("H(l)", vec![Complex64::new(0.0, 0.0)]),
            [Gamma(1), N(1), N(1)] => ("diag(1,0,0)", vec![]),
            [H { m: 1, lambda }, N(1)] if is_skew(*lambda) => ("skew+0", vec![]),
            [Gamma(1), Gamma(1), N(1)] => ("diag(1,1,0)", vec![]),
            [H { m: 1, lambda }, N(1)] => ("H(l)+0", vec![*lambda]),
            [N(2), N(1)] => ("H(l)+0", vec![Complex64::new(0.0, 0.0)]),
            [Gamma(2), N(1)] => ("Gamma2+0", vec![]),
            [Gamma(1), Gamma(1), Gamma(1)] => ("I3", vec![]),
            [H { m: 1, lambda }, Gamma(1)] if is_skew(*lambda) => ("skew+1", vec![]),
            [N(3)] => ("N3", vec![]),
            [Gamma(3)] => ("Gamma3", vec![]),
            [H { m: 1, lambda }, Gamma(1)] => ("H(l)+1", vec![*lambda]),
            [N(2), Gamma(1)] => ("H(l)+1", vec![Complex64::new(0.0, 0.0)]),
            [Gamma(2), Gamma(1)] => ("Gamma2+1", vec![]),
            _ => return Err(StrataError::Unsupported(format!("{} has no vertex in this graph", form.label()))),
        };
        let params = if bundles { vec![] } else { params };
        match self.space {
            Space::Congruence(n) if n == form.size() => self.instance_by_key(key, &params),
            _ => Err(StrataError::SizeMismatch { expected: self.order(), found: form.size() }),
        }
    }

    /// Vertex of a *congruence canonical form.
    pub fn locate_star(&self, form: &StarCongruenceCanonical) -> Result<Instance> {
        use StarBlock::*;
        if self.space != Space::StarCongruence(form.size()) {
            return Err(StrataError::SizeMismatch { expected: self.order(), found: form.size() });
        }
        let tol = PREDICATE_TOL;
        let (key, params): (&str, Vec<Complex64>) = match *form.blocks() {
            [N(1), N(1)] => ("0", vec![]),
            [U { n: 1, mu }, N(1)] => ("diag(l,0)", vec![mu]),
            [U { n: 1, mu: a }, U { n: 1, mu: b }] if (a - b).norm() <= tol => ("diag(l,l)", vec![a]),
            [U { n: 1, mu: a }, U { n: 1, mu: b }] if (a + b).norm() <= tol => ("diag(l,-l)", vec![a]),
            [U { n: 1, mu: a }, U { n: 1, mu: b }] => ("diag(m,n)", vec![a, b]),
            [H { m: 1, lambda }] => ("H(s)", vec![Complex64::new(1.0, 0.0) / lambda.conj()]),
            [N(2)] => ("H(s)", vec![Complex64::new(0.0, 0.0)]),
            [U { n: 2, mu }] => ("U2(t)", vec![mu]),
            _ => return Err(StrataError::Unsupported(format!("{} has no vertex in this graph", form.label()))),
        };
        self.instance_by_key(key, &params)
    }

    fn order(&self) -> usize {
        match self.space {
            Space::Congruence(n) | Space::StarCongruence(n) => n,
        }
    }
}

/// Closure graph of congruence classes or bundles of `n × n` matrices,
/// `n ∈ {2, 3}`.
pub fn congruence_graph(n: usize, kind: GraphKind) -> Result<ParametricGraph> {
    use Domain::*;
    let classes = kind == GraphKind::Classes;
    let h = if classes { Inversion } else { Fixed };
    let bump = usize::from(!classes);
    let mut g = match n {
        2 => ParametricGraph::new(
            Space::Congruence(2),
            kind,
            false,
            &[
                ("0", "0₂", 0, Fixed),
                ("skew", "H(−1)", 1, Fixed),
                ("diag(1,0)", "diag(1,0)", 2, Fixed),
                ("I2", "I₂", 3, Fixed),
                ("Gamma2", "Γ₂", 3, Fixed),
                ("H(l)", if classes { "H(λ)" } else { "H(·)" }, 3 + bump, h),
            ],
        ),
        3 => ParametricGraph::new(
            Space::Congruence(3),
            kind,
            false,
            &[
                ("0", "0₃", 0, Fixed),
                ("diag(1,0,0)", "diag(1,0,0)", 3, Fixed),
                ("skew+0", "H(−1)⊕0", 3, Fixed),
                ("diag(1,1,0)", "diag(1,1,0)", 5, Fixed),
                ("H(l)+0", if classes { "H(λ)⊕0" } else { "H(·)⊕0" }, 5 + bump, h),
                ("Gamma2+0", "Γ₂⊕0", 5, Fixed),
                ("I3", "I₃", 6, Fixed),
                ("skew+1", "H(−1)⊕1", 6, Fixed),
                ("N3", "J₃(0)", 7, Fixed),
                ("Gamma3", "Γ₃", 8, Fixed),
                ("H(l)+1", if classes { "H(μ)⊕1" } else { "H(·)⊕1" }, 8 + bump, h),
                ("Gamma2+1", "Γ₂⊕1", 8, Fixed),
            ],
        ),
        _ => return Err(StrataError::OutOfBounds { n, min: 2, max: 3 }),
    };
    match (n, classes) {
        (2, true) => g.always(&[
            ("diag(1,0)", "H(l)"),
            ("diag(1,0)", "Gamma2"),
            ("diag(1,0)", "I2"),
            ("skew", "Gamma2"),
            ("0", "skew"),
            ("0", "diag(1,0)"),
        ]),
        (2, false) => g.always(&[
            ("Gamma2", "H(l)"),
            ("I2", "H(l)"),
            ("diag(1,0)", "I2"),
            ("diag(1,0)", "Gamma2"),
            ("skew", "Gamma2"),
            ("0", "skew"),
            ("0", "diag(1,0)"),
        ]),
        (_, true) => g.always(&[
            ("N3", "Gamma3"),
            ("N3", "Gamma2+1"),
            ("N3", "H(l)+1"),
            ("skew+1", "Gamma2+1"),
            ("I3", "Gamma3"),
            ("Gamma2+0", "N3"),
            ("Gamma2+0", "skew+1"),
            ("H(l)+0", "N3"),
            ("diag(1,1,0)", "N3"),
            ("diag(1,1,0)", "I3"),
            ("skew+0", "Gamma2+0"),
            ("diag(1,0,0)", "H(l)+0"),
            ("diag(1,0,0)", "Gamma2+0"),
            ("diag(1,0,0)", "diag(1,1,0)"),
            ("0", "skew+0"),
            ("0", "diag(1,0,0)"),
        ]),
        (_, false) => g.always(&[
            ("Gamma2+1", "H(l)+1"),
            ("Gamma3", "H(l)+1"),
            ("N3", "Gamma3"),
            ("N3", "Gamma2+1"),
            ("skew+1", "Gamma2+1"),
            ("H(l)+0", "N3"),
            ("I3", "Gamma3"),
            ("Gamma2+0", "H(l)+0"),
            ("Gamma2+0", "skew+1"),
            ("diag(1,1,0)", "H(l)+0"),
            ("diag(1,1,0)", "I3"),
            ("skew+0", "Gamma2+0"),
            ("diag(1,0,0)", "Gamma2+0"),
            ("diag(1,0,0)", "diag(1,1,0)"),
            ("0", "skew+0"),
            ("0", "diag(1,0,0)"),
        ]),
    }
    Ok(g)
}

/// Closure graph of *congruence classes of `2 × 2` matrices, with real
/// dimensions.
pub fn star_graph_2x2() -> ParametricGraph {
    use Domain::*;
    let mut g = ParametricGraph::new(
        Space::StarCongruence(2),
        GraphKind::Classes,
        true,
        &[
            ("0", "0₂", 0, Fixed),
            ("diag(l,0)", "diag(λ,0)", 3, Unit),
            ("diag(l,l)", "diag(λ,λ)", 4, Unit),
            ("diag(l,-l)", "diag(λ,−λ)", 4, UnitUpToSign),
            ("diag(m,n)", "diag(μ,ν)", 6, UnitPair),
            ("H(s)", "H(σ)", 6, OpenDisk),
            ("U2(t)", "τU₂", 6, Unit),
        ],
    );
    g.edge("diag(l,-l)", "U2(t)", Predicate::PlusMinus, "τ = ±λ");
    g.edge("diag(l,0)", "diag(l,l)", Predicate::Equal, "λ = λ'");
    g.edge("diag(l,0)", "diag(l,-l)", Predicate::PlusMinus, "λ = ±λ'");
    g.edge("diag(l,0)", "H(s)", Predicate::Always, "");
    g.edge("diag(l,0)", "diag(m,n)", Predicate::Cone, "λ = aμ + bν, a, b ≥ 0");
    g.edge("diag(l,0)", "U2(t)", Predicate::HalfPlane, "Im(λτ̄) ≥ 0");
    g.always(&[("0", "diag(l,0)"), ("0", "diag(m,n)"), ("0", "U2(t)")]);
    g
}
