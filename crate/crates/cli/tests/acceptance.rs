//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines are always shown.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use strata_core::congruence::graphs::{star_graph_2x2, Instance, ParametricGraph};
use strata_core::congruence::templates::{congruence_template, star_template};
use strata_core::congruence::{CongruenceBlock, CongruenceCanonical, StarBlock, StarCongruenceCanonical};
use strata_core::lab::{arrow_realization_search, numeric_weyr, random_survey};
use strata_core::linalg::{c, cr, random_with_norm, DEFAULT_TOL};
use strata_core::order::{build_class_graph, LabelPattern};
use strata_core::reduction::{reduce_to_miniversal, ReductionOptions};
use strata_core::structure::{
    all_bundles, format_compact, jordan_types_with, orbit_codim, parse_compact, EigLabel, JordanType,
};
use strata_core::tangent::{congruence_codim_numeric, similarity_codim_numeric, star_congruence_codim_numeric};
use strata_core::template::arnold_template;

/// Rank tolerance used by every numerical criterion.
const RANK_TOL: f64 = 1e-8;
/// Pattern residual bound of the reduction engine.
const REDUCTION_RESIDUAL: f64 = 1e-8;
/// Similarity certificate bound `‖S·D − (J+E)·S‖_F`.
const REDUCTION_CERTIFICATE: f64 = 1e-10;
/// `‖S − I‖ ≤ factor · ‖E‖`.
const REDUCTION_S_FACTOR: f64 = 100.0;
const REDUCTION_E_NORM: f64 = 1e-4;
const REDUCTION_SAMPLES: usize = 100;
const SURVEY_EPS: f64 = 1e-3;
const SURVEY_TRIALS: usize = 1000;
const SURVEY_SEED: u64 = 42;
const WITNESS_EPS: f64 = 1e-2;

type Outcome = Result<String, String>;

struct Criterion {
    id: usize,
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Runs the command-line tool in process and parses its JSON output.
fn cli_json(args: &[&str]) -> Result<Value, String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("strata").chain(args.iter().copied());
    let code = strata_cli::run_with(argv, &mut out, &mut err);
    if code != 0 {
        return Err(format!("strata {} exited {code}: {}", args.join(" "), String::from_utf8_lossy(&err)));
    }
    serde_json::from_slice(&out).map_err(|e| format!("strata {}: bad JSON: {e}", args.join(" ")))
}

struct JsonGraph {
    names: Vec<String>,
    dims: Vec<u64>,
    edges: BTreeSet<(String, String)>,
}

fn json_graph(v: &Value) -> Result<JsonGraph, String> {
    let vertices = v["vertices"].as_array().ok_or("missing vertices")?;
    let names: Vec<String> = vertices.iter().map(|x| x["display"].as_str().unwrap_or("").to_string()).collect();
    let dims = vertices.iter().map(|x| x["dim"].as_u64().unwrap_or(u64::MAX)).collect();
    let mut edges = BTreeSet::new();
    for e in v["edges"].as_array().ok_or("missing edges")? {
        let a = e[0].as_u64().ok_or("bad edge")? as usize;
        let b = e[1].as_u64().ok_or("bad edge")? as usize;
        edges.insert((names[a].clone(), names[b].clone()));
    }
    Ok(JsonGraph { names, dims, edges })
}

fn pairs(list: &[(&str, &str)]) -> BTreeSet<(String, String)> {
    list.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn sorted_desc(mut v: Vec<u64>) -> Vec<u64> {
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

fn similarity_classes() -> Outcome {
    let g = json_graph(&cli_json(&["graph", "sim", "--n", "4", "--nilpotent", "--format", "json"])?)?;
    let chain = pairs(&[("0000", "0²00"), ("0²00", "0²0²"), ("0²0²", "0³0"), ("0³0", "0⁴")]);
    ensure(g.names.len() == 5 && g.edges == chain, || format!("4×4 nilpotent graph is {:?}", g.edges))?;

    let g = json_graph(&cli_json(&["graph", "sim", "--n", "6", "--nilpotent", "--format", "json"])?)?;
    let expected = pairs(&[
        ("0⁵0", "0⁶"),
        ("0⁴0²", "0⁵0"),
        ("0³0³", "0⁴0²"),
        ("0⁴00", "0⁴0²"),
        ("0³0²0", "0³0³"),
        ("0³0²0", "0⁴00"),
        ("0²0²0²", "0³0²0"),
        ("0³000", "0³0²0"),
        ("0²0²00", "0²0²0²"),
        ("0²0²00", "0³000"),
        ("0²0000", "0²0²00"),
        ("000000", "0²0000"),
    ]);
    ensure(g.edges == expected, || format!("6×6 edges differ: {:?}", g.edges))?;
    let dims = sorted_desc(g.dims.clone());
    ensure(dims == [30, 28, 26, 24, 24, 22, 18, 18, 16, 10, 0], || format!("6×6 dims {dims:?}"))?;
    let six = (g.names.len(), g.edges.len());

    let g = json_graph(&cli_json(&["graph", "sim", "--n", "4", "--format", "json"])?)?;
    let expected = pairs(&[
        ("λ³λ", "λ⁴"),
        ("λ²λμ", "λ³μ"),
        ("λ²μμ", "λ²μ²"),
        ("λλμν", "λ²μν"),
        ("λ²λ²", "λ³λ"),
        ("λλμμ", "λ²μμ"),
        ("λ²λλ", "λ²λ²"),
        ("λλλμ", "λ²λμ"),
        ("λλλλ", "λ²λλ"),
    ]);
    ensure(g.names.len() == 14 && g.edges == expected, || format!("4×4 class graph {:?}", g.edges))?;
    let levels: BTreeSet<u64> = g.dims.iter().copied().collect();
    ensure(levels.is_superset(&BTreeSet::from([0, 6, 8, 10, 12])), || format!("levels {levels:?}"))?;
    Ok(format!(
        "chain of 5; 6×6 has {} vertices (the dimension list has 11 entries), {} edges; 4×4 has 14 vertices, 9 edges",
        six.0, six.1
    ))
}

fn bundles() -> Outcome {
    let g = json_graph(&cli_json(&["graph", "bundle", "--n", "4", "--format", "json"])?)?;
    ensure(g.names.len() == 14 && g.edges.len() == 20, || {
        format!("{} vertices, {} edges", g.names.len(), g.edges.len())
    })?;
    let dims = sorted_desc(g.dims.clone());
    ensure(dims == [16, 15, 14, 14, 13, 13, 12, 12, 11, 10, 9, 8, 7, 1], || format!("dims {dims:?}"))?;
    let has = |a: &str, b: &str| g.edges.contains(&(a.to_string(), b.to_string()));
    ensure(has("λ²λλ", "λλλμ"), || "missing λ²λλ→λλλμ".into())?;
    ensure(has("λ⁴", "λ²μ²"), || "missing λ⁴→λ²μ²".into())?;
    // No path λ³λ → λλλμ: every edge out of λ³λ must avoid it and nothing above λ³λ leads to it.
    let mut above = BTreeSet::from(["λ³λ".to_string()]);
    loop {
        let next: BTreeSet<String> =
            g.edges.iter().filter(|(a, _)| above.contains(a)).map(|(_, b)| b.clone()).collect();
        let before = above.len();
        above.extend(next);
        if above.len() == before {
            break;
        }
    }
    ensure(!above.contains("λλλμ"), || "λ³λ reaches λλλμ".into())?;
    Ok("14 vertices, 20 edges, spot edges present, λ³λ ↛ λλλμ".into())
}

fn codim_triple() -> Outcome {
    let labels = [EigLabel::Concrete(cr(0.0)), EigLabel::Concrete(cr(1.0)), EigLabel::Concrete(c(2.0, 1.0))];
    let mut count = 0;
    for m0 in 0..=5usize {
        for m1 in 0..=5 - m0 {
            for m2 in 0..=5 - m0 - m1 {
                let used: Vec<(EigLabel, usize)> =
                    labels.iter().copied().zip([m0, m1, m2]).filter(|&(_, m)| m > 0).collect();
                if used.is_empty() {
                    continue;
                }
                let (ls, ms): (Vec<_>, Vec<_>) = used.into_iter().unzip();
                for t in jordan_types_with(&ls, &ms).map_err(|e| e.to_string())? {
                    let formula = orbit_codim(&t);
                    let stars = arnold_template(&t).star_count();
                    let numeric = similarity_codim_numeric(&t.matrix().map_err(|e| e.to_string())?, RANK_TOL);
                    ensure(formula == stars && stars == numeric, || {
                        format!("{}: formula {formula}, stars {stars}, numeric {numeric}", format_compact(&t))
                    })?;
                    count += 1;
                }
            }
        }
    }
    let spot = parse_compact("(0)^2 (0) (1)").map_err(|e| e.to_string())?;
    ensure(orbit_codim(&spot) == 6, || format!("spot codim {}", orbit_codim(&spot)))?;
    Ok(format!("{count} types agree; spot value 6"))
}

fn congruence_entries() -> Vec<Vec<CongruenceBlock>> {
    use CongruenceBlock::*;
    let skew = H { m: 1, lambda: cr(-1.0) };
    let mut lists = vec![
        vec![N(1), N(1)],
        vec![Gamma(1), N(1)],
        vec![Gamma(1), Gamma(1)],
        vec![skew],
        vec![Gamma(2)],
        vec![N(2)],
        vec![N(1), N(1), N(1)],
        vec![Gamma(1), N(1), N(1)],
        vec![Gamma(1), Gamma(1), N(1)],
        vec![Gamma(1), Gamma(1), Gamma(1)],
        vec![skew, N(1)],
        vec![N(2), N(1)],
        vec![Gamma(2), N(1)],
        vec![skew, Gamma(1)],
        vec![N(2), Gamma(1)],
        vec![Gamma(2), Gamma(1)],
        vec![N(3)],
        vec![Gamma(3)],
    ];
    for lambda in [cr(2.0), c(3.0, 1.0), cr(0.5)] {
        let h = H { m: 1, lambda };
        lists.extend([vec![h], vec![h, N(1)], vec![h, Gamma(1)]]);
    }
    lists
}

fn congruence_tables() -> Outcome {
    let mut count = 0;
    for blocks in congruence_entries() {
        let f = CongruenceCanonical::from_blocks(blocks).map_err(|e| e.to_string())?;
        let stars = congruence_template(&f).map_err(|e| e.to_string())?.star_count();
        let numeric = congruence_codim_numeric(&f.matrix(), RANK_TOL);
        ensure(stars == numeric, || format!("{}: stars {stars}, codim {numeric}", f.label()))?;
        count += 1;
    }
    use CongruenceBlock::*;
    let stars = |b: Vec<CongruenceBlock>| -> Result<usize, String> {
        let f = CongruenceCanonical::from_blocks(b).map_err(|e| e.to_string())?;
        Ok(congruence_template(&f).map_err(|e| e.to_string())?.star_count())
    };
    let spots = [
        stars(vec![H { m: 1, lambda: cr(2.0) }])?,
        stars(vec![N(1), N(1)])?,
        stars(vec![N(1), N(1), N(1)])?,
    ];
    ensure(spots == [1, 4, 9], || format!("spot values {spots:?}"))?;
    Ok(format!("{count} entries agree; [[0,1],[λ,0]] → 1, 0₂ → 4, 0₃ → 9"))
}

fn star_entries() -> Vec<Vec<StarBlock>> {
    use StarBlock::*;
    let mus = [cr(1.0), cr(-1.0), c(0.0, 1.0), Complex64::from_polar(1.0, PI / 3.0)];
    let lambdas = [cr(0.3), c(0.0, 0.5)];
    let mut lists = vec![vec![N(1), N(1)], vec![N(2)], vec![N(1), N(1), N(1)], vec![N(2), N(1)], vec![N(3)]];
    for &m1 in &mus {
        let u = |n| U { n, mu: m1 };
        lists.extend([vec![u(1), N(1)], vec![u(2)], vec![u(1), N(1), N(1)], vec![u(2), N(1)], vec![N(2), u(1)], vec![u(3)]]);
        for &l in &lambdas {
            lists.push(vec![H { m: 1, lambda: l }, u(1)]);
        }
        for &m2 in &mus {
            let v = U { n: 1, mu: m2 };
            lists.extend([vec![u(1), v], vec![u(1), v, N(1)], vec![u(2), v]]);
            for &m3 in &mus {
                lists.push(vec![u(1), v, U { n: 1, mu: m3 }]);
            }
        }
    }
    for &l in &lambdas {
        lists.extend([vec![H { m: 1, lambda: l }], vec![H { m: 1, lambda: l }, N(1)]]);
    }
    lists
}

fn star_tables() -> Outcome {
    let mut count = 0;
    for blocks in star_entries() {
        let f = StarCongruenceCanonical::from_blocks(blocks).map_err(|e| e.to_string())?;
        let t = star_template(&f).map_err(|e| e.to_string())?;
        let base = t.base_matrix().map_err(|e| e.to_string())?;
        let params = t.real_parameter_count();
        let numeric = star_congruence_codim_numeric(&base, RANK_TOL);
        ensure(params == numeric, || format!("{}: parameters {params}, codim {numeric}", f.label()))?;
        count += 1;
    }
    let u2 = StarCongruenceCanonical::from_blocks(vec![StarBlock::U { n: 2, mu: c(0.0, 1.0) }])
        .map_err(|e| e.to_string())?;
    let params = star_template(&u2).map_err(|e| e.to_string())?.real_parameter_count();
    let g = star_graph_2x2();
    let dim = g.families[g.family_index("U2(t)").ok_or("no U2 family")?].dim;
    ensure(params == 2 && dim == 8 - params, || format!("U(2,τ): {params} parameters, graph dimension {dim}"))?;
    Ok(format!("{count} entries agree; U(2,τ) → 2, real dim 6 = 8 − 2"))
}

fn reduction() -> Outcome {
    let configs = ["(0)^3 (0)^2", "(0)^3 (0)^2 (1)", "(0)^2 (0) (1)"];
    let opts = ReductionOptions::default();
    let (mut worst_res, mut worst_cert, mut worst_ratio) = (0.0f64, 0.0f64, 0.0f64);
    for (k, notation) in configs.iter().enumerate() {
        let t = parse_compact(notation).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + k as u64);
        for sample in 0..REDUCTION_SAMPLES {
            let e = random_with_norm(&mut rng, t.order(), REDUCTION_E_NORM);
            let r = reduce_to_miniversal(&t, &e, &opts).map_err(|err| format!("{notation} #{sample}: {err}"))?;
            ensure(r.pattern_ok && r.residual <= REDUCTION_RESIDUAL, || {
                format!("{notation} #{sample}: residual {:.3e}", r.residual)
            })?;
            ensure(r.certificate <= REDUCTION_CERTIFICATE, || {
                format!("{notation} #{sample}: certificate {:.3e}", r.certificate)
            })?;
            ensure(r.s_distance <= REDUCTION_S_FACTOR * r.e_norm, || {
                format!("{notation} #{sample}: ‖S − I‖ = {:.3e}", r.s_distance)
            })?;
            worst_res = worst_res.max(r.residual);
            worst_cert = worst_cert.max(r.certificate);
            worst_ratio = worst_ratio.max(r.s_distance / r.e_norm);
        }
    }
    Ok(format!(
        "300 reductions; worst residual {worst_res:.2e}, certificate {worst_cert:.2e}, ‖S−I‖/‖E‖ {worst_ratio:.2}"
    ))
}

fn fixtures() -> Outcome {
    for lambda in [cr(0.0), cr(1.0)] {
        for eps in [1e-3, 1e-5] {
            let t = JordanType::single(EigLabel::Concrete(lambda), vec![2, 2]).map_err(|e| e.to_string())?;
            let j = t.matrix().map_err(|e| e.to_string())?;
            for (col, expected) in [(3, vec![2, 1, 1]), (2, vec![1, 1, 1, 1])] {
                let mut a = j.clone();
                a[(1, col)] = cr(eps);
                let w = numeric_weyr(&a, lambda, RANK_TOL).map_err(|e| e.to_string())?;
                ensure(w.values() == expected.as_slice(), || {
                    format!("λ={lambda}, ε={eps}, e(2,{}): Weyr {:?}", col + 1, w.values())
                })?;
            }
        }
    }
    Ok("e₂₄ → (2,1,1), e₂₃ → (1,1,1,1) for λ ∈ {0,1}, ε ∈ {1e-3,1e-5}".into())
}

fn star_predicates() -> Outcome {
    let g = star_graph_2x2();
    let inst = |key: &str, p: &[Complex64]| -> Result<Instance, String> {
        g.instance_by_key(key, p).map_err(|e| e.to_string())
    };
    let i = c(0.0, 1.0);
    let one = cr(1.0);
    let mu = Complex64::from_polar(1.0, PI / 4.0);
    let nu = Complex64::from_polar(1.0, -PI / 4.0);
    let battery: Vec<(&str, Instance, Instance, bool)> = vec![
        ("diag(1,0)→U(2,i)", inst("diag(l,0)", &[one])?, inst("U2(t)", &[i])?, false),
        ("diag(1,0)→U(2,1)", inst("diag(l,0)", &[one])?, inst("U2(t)", &[one])?, true),
        ("diag(i,−i)→U(2,i)", inst("diag(l,-l)", &[i])?, inst("U2(t)", &[i])?, true),
        ("diag(1,0)→diag(1,1)", inst("diag(l,0)", &[one])?, inst("diag(l,l)", &[one])?, true),
        ("diag(1,0)→diag(i,i)", inst("diag(l,0)", &[one])?, inst("diag(l,l)", &[i])?, false),
        ("diag(1,0)→diag(μ,ν)", inst("diag(l,0)", &[one])?, inst("diag(m,n)", &[mu, nu])?, true),
    ];
    let check = |g: &ParametricGraph, a: &Instance, b: &Instance| g.has_arrow(a, b);
    for (name, a, b, expected) in &battery {
        let got = check(&g, a, b);
        ensure(got == *expected, || format!("{name}: got {got}, expected {expected}"))?;
    }
    Ok(format!("{} queries match", battery.len()))
}

fn concrete(t: &JordanType) -> Result<JordanType, String> {
    t.relabel(|l| match l {
        EigLabel::Symbolic(k) => EigLabel::Concrete(cr(f64::from(*k) - 1.0)),
        other => *other,
    })
    .map_err(|e| e.to_string())
}

fn survey() -> Outcome {
    let mut total_violations = 0;
    let mut total_ambiguous = 0;
    let mut bases = 0;
    for b in all_bundles(4) {
        let t = concrete(b.jordan())?;
        let r = random_survey(&t, SURVEY_EPS, SURVEY_TRIALS, SURVEY_SEED).map_err(|e| e.to_string())?;
        ensure(r.violations.is_empty(), || {
            format!("{}: {} violations, first {:?}", t.to_compact(), r.violations.len(), r.trials[r.violations[0]])
        })?;
        total_violations += r.violations.len();
        total_ambiguous += r.ambiguous.len();
        bases += 1;
    }
    Ok(format!(
        "{bases} types × {SURVEY_TRIALS} trials: {total_violations} violations, {total_ambiguous} ambiguous trials"
    ))
}

fn witnesses() -> Outcome {
    let mut singles = 0;
    let mut fallbacks = Vec::new();
    for n in [4, 6] {
        let g = build_class_graph(n, &LabelPattern::nilpotent(n)).map_err(|e| e.to_string())?;
        for &(a, b) in &g.edges {
            let (from, to) = (&g.vertices[a], &g.vertices[b]);
            let s = arrow_realization_search(&from.jordan, &to.jordan, WITNESS_EPS, DEFAULT_TOL)
                .map_err(|e| e.to_string())?;
            let w = s.witness.ok_or_else(|| format!("no witness for {} → {}", from.display, to.display))?;
            if w.positions.len() == 1 {
                singles += 1;
            } else {
                fallbacks.push(format!("{}→{} {:?}", from.display, to.display, w.positions));
            }
        }
    }
    let fallback_text = if fallbacks.is_empty() { "none".to_string() } else { fallbacks.join(", ") };
    Ok(format!("{singles} single-entry witnesses; pair fallbacks: {fallback_text}"))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "similarity class graphs", budget: Duration::from_secs(1), check: similarity_classes },
        Criterion { id: 2, name: "bundle graph", budget: Duration::from_secs(5), check: bundles },
        Criterion { id: 3, name: "codimension triple agreement", budget: Duration::from_secs(30), check: codim_triple },
        Criterion { id: 4, name: "congruence tables", budget: Duration::from_secs(30), check: congruence_tables },
        Criterion { id: 5, name: "*congruence tables", budget: Duration::from_secs(30), check: star_tables },
        Criterion { id: 6, name: "reduction engine", budget: Duration::from_secs(60), check: reduction },
        Criterion { id: 7, name: "perturbed J₂⊕J₂ fixtures", budget: Duration::from_secs(5), check: fixtures },
        Criterion { id: 8, name: "2×2 *congruence predicates", budget: Duration::from_secs(5), check: star_predicates },
        Criterion { id: 9, name: "bundle survey soundness", budget: Duration::from_secs(60), check: survey },
        Criterion { id: 10, name: "nilpotent witnesses", budget: Duration::from_secs(60), check: witnesses },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => {
                Err(format!("{detail}; took {:.2} s, budget {} s", elapsed.as_secs_f64(), c.budget.as_secs()))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {} [{:.2} s] {detail}", c.id, c.name, elapsed.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {} [{:.2} s] {detail}", c.id, c.name, elapsed.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
