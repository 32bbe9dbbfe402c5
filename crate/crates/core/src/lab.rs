//! Numerical Jordan structure of perturbed matrices.
//!
//! Eigenvalues are grouped by single linkage. Each group is then read
//! through the rank sequence of powers of `A − λI`. Groups whose Weyr total
//! disagrees with their size are split again at a tenth of the radius,
//! until the radius floor is reached.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Result, StrataError};
use crate::linalg::{cr, eigenvalues, random_matrix, singular_values, spectral_norm, CMat, AMBIGUITY_FACTOR};
use crate::order::{build_bundle_graph, closure_leq, ClosureGraph};
use crate::structure::{canonical_bundle_labeling, EigLabel, JordanType, Partition, WeyrChar};

/// Smallest radius tried by adaptive reclustering.
pub const RADIUS_FLOOR: f64 = 1e-12;

/// Scale of the round-off floor under which a matrix power counts as zero.
pub const NOISE_FACTOR: f64 = 1e2;

/// `max(10·ε^{1/n}, 1e-6)`.
pub fn default_cluster_radius(eps: f64, n: usize) -> f64 {
    (10.0 * eps.powf(1.0 / n.max(1) as f64)).max(1e-6)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    /// Mean of the members.
    pub center: Complex64,
    pub multiplicity: usize,
    pub members: Vec<Complex64>,
}

fn single_linkage(values: &[Complex64], radius: f64) -> Vec<Cluster> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= radius {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
    for i in 0..n {
        let r = root(&mut parent, i);
        groups.entry(r).or_default().push(values[i]);
    }
    let mut out: Vec<Cluster> = groups
        .into_values()
        .map(|members| {
            let center = members.iter().sum::<Complex64>() / members.len() as f64;
            Cluster { center, multiplicity: members.len(), members }
        })
        .collect();
    out.sort_by(|a, b| a.center.re.total_cmp(&b.center.re).then(a.center.im.total_cmp(&b.center.im)));
    out
}

/// Eigenvalues of `a` grouped by single linkage at `radius`.
pub fn numeric_eigen_clusters(a: &CMat, radius: f64) -> Result<Vec<Cluster>> {
    if !(radius > 0.0) {
        return Err(StrataError::Precondition(format!("cluster radius must be positive, got {radius}")));
    }
    Ok(single_linkage(&eigenvalues(a)?, radius))
}

/// Rank sequence of the powers of `A − λI` and the Weyr characteristic it
/// implies.
#[derive(Clone, Debug, PartialEq)]
pub struct WeyrEstimate {
    pub weyr: WeyrChar,
    /// `rank((A − λI)^k)` for `k = 0, 1, …` until the sequence stabilises.
    pub ranks: Vec<usize>,
    pub ambiguous: bool,
}

pub fn numeric_weyr_detailed(a: &CMat, lambda: Complex64, tol: f64) -> Result<WeyrEstimate> {
    weyr_estimate(a, lambda, tol, a.nrows())
}

/// Rank sequence that stops once the nullity reaches `max_nullity`, the
/// number of eigenvalues near `lambda`. Further powers cannot add nullity.
fn weyr_estimate(a: &CMat, lambda: Complex64, tol: f64, max_nullity: usize) -> Result<WeyrEstimate> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(StrataError::SizeMismatch { expected: n, found: a.ncols() });
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(StrataError::Precondition(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    let b = a - CMat::identity(n, n) * lambda;
    let norm_b = spectral_norm(&b);
    let eta = n as f64 * f64::EPSILON * (spectral_norm(a) + lambda.norm());
    let mut ranks = vec![n];
    let mut ambiguous = false;
    let mut power = CMat::identity(n, n);
    for k in 1..=n {
        power = &power * &b;
        let sv = singular_values(&power);
        let sigma_max = sv.first().copied().unwrap_or(0.0);
        let floor = NOISE_FACTOR * k as f64 * eta * norm_b.max(eta).powi(k as i32 - 1);
        let threshold = (tol * sigma_max).max(floor);
        let mut r = 0;
        for &s in &sv {
            if s >= threshold && s > 0.0 {
                r += 1;
            }
            if s > floor && s > threshold / AMBIGUITY_FACTOR && s < threshold * AMBIGUITY_FACTOR && threshold > floor {
                ambiguous = true;
            }
        }
        let r = r.min(*ranks.last().expect("nonempty"));
        let stable = r == *ranks.last().expect("nonempty");
        ranks.push(r);
        if stable || r == 0 || n - r >= max_nullity {
            break;
        }
    }
    let weyr: Vec<usize> = ranks.windows(2).map(|w| w[0] - w[1]).take_while(|&d| d > 0).collect();
    Ok(WeyrEstimate { weyr: WeyrChar::new(weyr)?, ranks, ambiguous })
}

/// Weyr characteristic of `a` at `lambda`; `Ambiguous` when a rank decision
/// falls in the ambiguity band.
pub fn numeric_weyr(a: &CMat, lambda: Complex64, tol: f64) -> Result<WeyrChar> {
    let est = numeric_weyr_detailed(a, lambda, tol)?;
    if est.ambiguous {
        return Err(StrataError::Ambiguous(format!(
            "rank sequence {:?} of (A − λI)^k has singular values near the threshold",
            est.ranks
        )));
    }
    Ok(est.weyr)
}

fn resolve_cluster(a: &CMat, cluster: Cluster, radius: f64, tol: f64, out: &mut Vec<(Complex64, Partition)>) -> Result<()> {
    let est = weyr_estimate(a, cluster.center, tol, cluster.multiplicity)?;
    if !est.ambiguous && est.weyr.total() == cluster.multiplicity {
        let p = est.weyr.segre().ok_or_else(|| StrataError::Ambiguous("Weyr sequence is not a partition".into()))?;
        out.push((cluster.center, p));
        return Ok(());
    }
    let finer = radius / 10.0;
    if cluster.multiplicity > 1 && finer >= RADIUS_FLOOR {
        for sub in single_linkage(&cluster.members, finer) {
            resolve_cluster(a, sub, finer, tol, out)?;
        }
        return Ok(());
    }
    Err(StrataError::Ambiguous(format!(
        "eigenvalue cluster at {} of size {} gives Weyr {} (ranks {:?})",
        crate::structure::format_complex(cluster.center),
        cluster.multiplicity,
        est.weyr,
        est.ranks
    )))
}

/// Jordan type of `a` with concrete labels at the cluster centres.
pub fn jordan_type_numeric(a: &CMat, radius: f64, tol: f64) -> Result<JordanType> {
    let clusters = numeric_eigen_clusters(a, radius)?;
    let mut found = Vec::new();
    for c in clusters {
        resolve_cluster(a, c, radius, tol, &mut found)?;
    }
    JordanType::from_pairs(found.into_iter().map(|(z, p)| (EigLabel::Concrete(z), p.parts().to_vec())))
}

/// Shape of random perturbations in a survey.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerturbationKind {
    Dense,
    /// Strictly upper triangular, so the spectrum is unchanged.
    StrictlyUpper,
}

impl PerturbationKind {
    pub fn name(&self) -> &'static str {
        match self {
            PerturbationKind::Dense => "dense",
            PerturbationKind::StrictlyUpper => "strictly-upper",
        }
    }
}

/// Random perturbation with unit Frobenius norm.
pub fn random_perturbation(rng: &mut ChaCha8Rng, n: usize, kind: PerturbationKind) -> CMat {
    let mut e = random_matrix(rng, n, n);
    if kind == PerturbationKind::StrictlyUpper {
        for i in 0..n {
            for j in 0..=i {
                e[(i, j)] = cr(0.0);
            }
        }
    }
    let f = e.norm();
    if f > 0.0 {
        e /= cr(f);
    }
    e
}

/// Seed of trial `k` in a survey seeded with `seed`.
pub fn trial_seed(seed: u64, k: usize) -> u64 {
    let mut z = seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub seed: u64,
    /// Jordan type found numerically, `None` when the decision was ambiguous.
    pub observed: Option<JordanType>,
    /// Bundle notation of the observed type.
    pub bundle: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbReport {
    pub base: JordanType,
    pub eps: f64,
    pub kind: PerturbationKind,
    pub trials: Vec<TrialRecord>,
    /// Indices of trials whose observed bundle is not above the base bundle.
    pub violations: Vec<usize>,
    /// Indices of trials with an ambiguous numerical decision.
    pub ambiguous: Vec<usize>,
}

impl PerturbReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }

    /// Count of trials per observed bundle.
    pub fn histogram(&self) -> BTreeMap<String, usize> {
        let mut h = BTreeMap::new();
        for t in &self.trials {
            *h.entry(t.bundle.clone().unwrap_or_else(|| "ambiguous".into())).or_insert(0) += 1;
        }
        h
    }

    /// Most frequent observed bundle.
    pub fn dominant(&self) -> Option<String> {
        self.histogram().into_iter().max_by_key(|(_, c)| *c).map(|(b, _)| b)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "base": self.base.to_compact(),
            "base_bundle": canonical_bundle_labeling(&self.base).jordan().display(),
            "eps": self.eps,
            "kind": self.kind.name(),
            "trials": self.trials.len(),
            "passes": self.passes(),
            "histogram": self.histogram(),
            "violations": self.violations.iter().map(|&k| json!({
                "trial": k,
                "seed": self.trials[k].seed,
                "observed": self.trials[k].observed.as_ref().map(JordanType::to_compact),
                "bundle": self.trials[k].bundle,
            })).collect::<Vec<_>>(),
            "ambiguous": self.ambiguous.iter().map(|&k| json!({"trial": k, "seed": self.trials[k].seed})).collect::<Vec<_>>(),
            "records": self.trials.iter().map(|t| json!({
                "seed": t.seed,
                "observed": t.observed.as_ref().map(JordanType::to_compact),
                "bundle": t.bundle,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Options of [`random_survey_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurveyOptions {
    pub kind: PerturbationKind,
    pub tol: f64,
    /// Cluster radius; `None` selects [`default_cluster_radius`].
    pub radius: Option<f64>,
}

impl Default for SurveyOptions {
    fn default() -> Self {
        Self { kind: PerturbationKind::Dense, tol: crate::linalg::DEFAULT_TOL, radius: None }
    }
}

pub fn random_survey(t: &JordanType, eps: f64, trials: usize, seed: u64) -> Result<PerturbReport> {
    random_survey_with(t, eps, trials, seed, SurveyOptions::default())
}

/// Perturbs `J(t)` by `ε·E` with seeded unit-norm `E` and checks that each
/// observed bundle lies above the bundle of `t`.
pub fn random_survey_with(
    t: &JordanType,
    eps: f64,
    trials: usize,
    seed: u64,
    opts: SurveyOptions,
) -> Result<PerturbReport> {
    if trials == 0 {
        return Err(StrataError::Precondition("a survey needs at least one trial".into()));
    }
    if !(eps >= 0.0) {
        return Err(StrataError::Precondition(format!("ε must be nonnegative, got {eps}")));
    }
    let j = t.matrix()?;
    let n = t.order();
    let graph = build_bundle_graph(n)?;
    let base = graph
        .find(t)
        .ok_or_else(|| StrataError::Precondition(format!("{} has no bundle vertex", t.to_compact())))?;
    let radius = opts.radius.unwrap_or_else(|| default_cluster_radius(eps, n));
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let s = trial_seed(seed, k);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let a = &j + random_perturbation(&mut rng, n, opts.kind) * cr(eps);
            let observed = jordan_type_numeric(&a, radius, opts.tol).ok();
            let bundle = observed.as_ref().map(|o| canonical_bundle_labeling(o).jordan().display());
            TrialRecord { seed: s, observed, bundle }
        })
        .collect();
    let mut violations = Vec::new();
    let mut ambiguous = Vec::new();
    for (k, r) in records.iter().enumerate() {
        match &r.observed {
            None => ambiguous.push(k),
            Some(o) => {
                if !above(&graph, base, o) {
                    violations.push(k);
                }
            }
        }
    }
    Ok(PerturbReport { base: t.clone(), eps, kind: opts.kind, trials: records, violations, ambiguous })
}

fn above(graph: &ClosureGraph, base: usize, observed: &JordanType) -> bool {
    graph.find(observed).is_some_and(|o| graph.reachable(base, o))
}

/// A sparse perturbation realising an arrow of the nilpotent class graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    /// 1-based positions of the nonzero entries.
    pub positions: Vec<(usize, usize)>,
    pub e: CMat,
    pub observed: JordanType,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessSearch {
    pub from: JordanType,
    pub to: JordanType,
    pub eps: f64,
    pub witness: Option<Witness>,
    /// Candidate patterns examined.
    pub tried: usize,
}

impl WitnessSearch {
    pub fn to_json(&self) -> Value {
        json!({
            "from": self.from.to_compact(),
            "to": self.to.to_compact(),
            "eps": self.eps,
            "found": self.witness.is_some(),
            "tried": self.tried,
            "entries": self.witness.as_ref().map(|w| w.positions.iter().map(|&(i, j)| json!({
                "i": i, "j": j, "value": [w.e[(i - 1, j - 1)].re, w.e[(i - 1, j - 1)].im],
            })).collect::<Vec<_>>()),
        })
    }
}

fn nilpotent_partition(t: &JordanType) -> Option<&Partition> {
    let (label, p) = t.entries().iter().next()?;
    let zero = match label {
        EigLabel::Symbolic(_) => true,
        EigLabel::Concrete(z) => *z == Complex64::new(0.0, 0.0),
    };
    (t.label_count() == 1 && zero).then_some(p)
}

/// Structure of `J(from) + E` for the given sparse `E`.
pub fn check_witness(from: &JordanType, e: &CMat, tol: f64) -> Result<JordanType> {
    let p = nilpotent_partition(from)
        .ok_or_else(|| StrataError::Precondition("witness search needs a single eigenvalue 0".into()))?;
    let j = JordanType::single(EigLabel::Concrete(Complex64::new(0.0, 0.0)), p.parts().to_vec())?.matrix()?;
    jordan_type_numeric(&(j + e), 1e-6, tol)
}

/// Searches single strictly upper entries in row-major order, then pairs,
/// for `E` with `‖E‖_F = ε` such that `J(from) + E` has type `to`.
pub fn arrow_realization_search(from: &JordanType, to: &JordanType, eps: f64, tol: f64) -> Result<WitnessSearch> {
    let p = nilpotent_partition(from)
        .ok_or_else(|| StrataError::Precondition(format!("{} is not nilpotent with one label", from.to_compact())))?;
    let q = nilpotent_partition(to)
        .ok_or_else(|| StrataError::Precondition(format!("{} is not nilpotent with one label", to.to_compact())))?;
    let zero = EigLabel::Concrete(Complex64::new(0.0, 0.0));
    let a = JordanType::single(zero, p.parts().to_vec())?;
    let b = JordanType::single(zero, q.parts().to_vec())?;
    if !closure_leq(&a, &b)? {
        return Err(StrataError::Precondition(format!(
            "{} is not in the closure order below {}",
            from.to_compact(),
            to.to_compact()
        )));
    }
    let n = a.order();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut patterns: Vec<Vec<(usize, usize)>> = cells.iter().map(|&c| vec![c]).collect();
    for x in 0..cells.len() {
        for y in x + 1..cells.len() {
            patterns.push(vec![cells[x], cells[y]]);
        }
    }
    let mut tried = 0;
    for pat in patterns {
        tried += 1;
        let value = cr(eps / (pat.len() as f64).sqrt());
        let mut e = CMat::zeros(n, n);
        for &(i, j) in &pat {
            e[(i, j)] = value;
        }
        let Ok(observed) = check_witness(&a, &e, tol) else { continue };
        if observed.partition(&zero) == Some(q) {
            let positions = pat.iter().map(|&(i, j)| (i + 1, j + 1)).collect();
            return Ok(WitnessSearch {
                from: from.clone(),
                to: to.clone(),
                eps,
                witness: Some(Witness { positions, e, observed }),
                tried,
            });
        }
    }
    Ok(WitnessSearch { from: from.clone(), to: to.clone(), eps, witness: None, tried })
}
