use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use strata_core::congruence::classify::classify_congruence_small;
use strata_core::congruence::graphs::{congruence_graph, star_graph_2x2, Domain, Instance, ParametricGraph, Space};
use strata_core::congruence::templates::{congruence_template, star_template};
use strata_core::congruence::{CongruenceBlock, CongruenceCanonical, StarBlock, StarCongruenceCanonical};
use strata_core::linalg::{c, cr, rank_real, random_well_conditioned, CMat, RMat, DEFAULT_TOL};
use strata_core::order::GraphKind;
use strata_core::tangent::{congruence_codim_numeric, operator_matrix, star_congruence_codim_numeric, Action, OperatorMatrix};
use strata_core::template::{DeformationTemplate, EntryKind};

fn congruence_catalog() -> Vec<CongruenceCanonical> {
    use CongruenceBlock::*;
    let skew = H { m: 1, lambda: cr(-1.0) };
    let mut lists: Vec<Vec<CongruenceBlock>> = vec![
        vec![N(1)],
        vec![Gamma(1)],
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
        lists.push(vec![h]);
        lists.push(vec![h, N(1)]);
        lists.push(vec![h, Gamma(1)]);
    }
    lists.into_iter().map(|b| CongruenceCanonical::from_blocks(b).unwrap()).collect()
}

fn star_catalog() -> Vec<StarCongruenceCanonical> {
    use StarBlock::*;
    let mus = [cr(1.0), cr(-1.0), c(0.0, 1.0), Complex64::from_polar(1.0, PI / 3.0)];
    let lambdas = [cr(0.3), c(0.0, 0.5)];
    let mut lists: Vec<Vec<StarBlock>> =
        vec![vec![N(1)], vec![N(1), N(1)], vec![N(2)], vec![N(1), N(1), N(1)], vec![N(2), N(1)], vec![N(3)]];
    for &m1 in &mus {
        lists.push(vec![U { n: 1, mu: m1 }]);
        lists.push(vec![U { n: 1, mu: m1 }, N(1)]);
        lists.push(vec![U { n: 2, mu: m1 }]);
        lists.push(vec![U { n: 1, mu: m1 }, N(1), N(1)]);
        lists.push(vec![U { n: 2, mu: m1 }, N(1)]);
        lists.push(vec![N(2), U { n: 1, mu: m1 }]);
        lists.push(vec![U { n: 3, mu: m1 }]);
        for &l in &lambdas {
            lists.push(vec![H { m: 1, lambda: l }, U { n: 1, mu: m1 }]);
        }
        for &m2 in &mus {
            lists.push(vec![U { n: 1, mu: m1 }, U { n: 1, mu: m2 }]);
            lists.push(vec![U { n: 1, mu: m1 }, U { n: 1, mu: m2 }, N(1)]);
            lists.push(vec![U { n: 2, mu: m1 }, U { n: 1, mu: m2 }]);
            for &m3 in &mus {
                lists.push(vec![U { n: 1, mu: m1 }, U { n: 1, mu: m2 }, U { n: 1, mu: m3 }]);
            }
        }
    }
    for &l in &lambdas {
        lists.push(vec![H { m: 1, lambda: l }]);
        lists.push(vec![H { m: 1, lambda: l }, N(1)]);
    }
    lists.into_iter().map(|b| StarCongruenceCanonical::from_blocks(b).unwrap()).collect()
}

/// Real coordinates of a complex matrix, real parts first.
fn realify(m: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = m.as_slice().iter().map(|z| z.re).collect();
    v.extend(m.as_slice().iter().map(|z| z.im));
    v
}

/// Real directions spanned by the free entries of a template.
fn template_directions(t: &DeformationTemplate) -> Vec<CMat> {
    let n = t.n();
    let unit = |i: usize, j: usize, z: Complex64| {
        let mut m = CMat::zeros(n, n);
        m[(i, j)] = z;
        m
    };
    let mut out = Vec::new();
    for (i, j) in t.free_positions() {
        match t.kind(i, j) {
            EntryKind::Star | EntryKind::Delta => {
                out.push(unit(i, j, cr(1.0)));
                out.push(unit(i, j, c(0.0, 1.0)));
            }
            EntryKind::EpsReal => out.push(unit(i, j, cr(1.0))),
            EntryKind::EpsImag => out.push(unit(i, j, c(0.0, 1.0))),
            _ => {}
        }
    }
    out
}

/// The template directions together with the tangent space span everything.
fn transversal(action: Action, a: &CMat, t: &DeformationTemplate) -> bool {
    let n = a.nrows();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    match operator_matrix(action, a) {
        OperatorMatrix::Real(op) => cols.extend(op.column_iter().map(|c| c.iter().copied().collect())),
        OperatorMatrix::Complex(op) => {
            for col in op.column_iter() {
                let m = CMat::from_column_slice(n, n, col.as_slice());
                cols.push(realify(&m));
                cols.push(realify(&(m * c(0.0, 1.0))));
            }
        }
    }
    cols.extend(template_directions(t).iter().map(realify));
    let m = RMat::from_fn(2 * n * n, cols.len(), |r, k| cols[k][r]);
    rank_real(&m, DEFAULT_TOL).rank == 2 * n * n
}

#[test]
fn congruence_templates_match_codimension() {
    for f in congruence_catalog() {
        let t = congruence_template(&f).unwrap();
        let a = f.matrix();
        assert_eq!(t.star_count(), congruence_codim_numeric(&a, DEFAULT_TOL), "{}", f.label());
        assert!(transversal(Action::Congruence, &a, &t), "{} template is not transversal", f.label());
    }
}

#[test]
fn congruence_spot_values() {
    use CongruenceBlock::*;
    let one = |b: Vec<CongruenceBlock>| congruence_template(&CongruenceCanonical::from_blocks(b).unwrap()).unwrap().star_count();
    assert_eq!(one(vec![H { m: 1, lambda: cr(2.0) }]), 1);
    assert_eq!(one(vec![N(1), N(1)]), 4);
    assert_eq!(one(vec![N(1), N(1), N(1)]), 9);
}

#[test]
fn star_templates_match_codimension() {
    let catalog = star_catalog();
    assert!(catalog.len() > 100);
    for f in catalog {
        let t = star_template(&f).unwrap();
        let base = t.base_matrix().unwrap();
        let codim = star_congruence_codim_numeric(&base, DEFAULT_TOL);
        assert_eq!(t.real_parameter_count(), codim, "{}", f.label());
        assert_eq!(star_congruence_codim_numeric(&f.matrix(), DEFAULT_TOL), codim, "{}", f.label());
        assert!(transversal(Action::StarCongruence, &base, &t), "{} template is not transversal", f.label());
    }
}

#[test]
fn star_template_kinds() {
    use StarBlock::*;
    let f = StarCongruenceCanonical::new(vec![U { n: 1, mu: cr(1.0) }, U { n: 1, mu: c(0.0, 1.0) }]);
    let t = star_template(&f).unwrap();
    assert_eq!(t.kind(0, 0), EntryKind::EpsImag);
    assert_eq!(t.kind(1, 1), EntryKind::EpsReal);
    assert_eq!(t.kind(1, 0), EntryKind::Zero);
    let f = StarCongruenceCanonical::from_blocks(vec![U { n: 1, mu: cr(1.0) }, U { n: 1, mu: cr(1.0) }]).unwrap();
    let t = star_template(&f).unwrap();
    assert_eq!(t.kind(1, 0), EntryKind::Delta);
    assert_eq!(t.real_parameter_count(), 4);
    let f = StarCongruenceCanonical::from_blocks(vec![U { n: 2, mu: cr(1.0) }]).unwrap();
    assert_eq!(star_template(&f).unwrap().real_parameter_count(), 2);
}

#[test]
fn classification_is_idempotent_and_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for f in congruence_catalog().into_iter().filter(|f| f.size() >= 2) {
        let got = classify_congruence_small(&f.matrix(), DEFAULT_TOL).unwrap();
        assert!(got.approx_eq(&f, 1e-12), "{} → {}", f.label(), got.label());
        for _ in 0..100 {
            let s = random_well_conditioned(&mut rng, f.size());
            let a = s.transpose() * f.matrix() * &s;
            let got = classify_congruence_small(&a, DEFAULT_TOL).unwrap();
            assert!(got.approx_eq(&f, 1e-7), "{} → {}", f.label(), got.label());
        }
    }
}

#[test]
fn classification_examples() {
    let a = CMat::from_row_slice(2, 2, &[cr(0.0), cr(2.0), cr(1.0), cr(0.0)]);
    let got = classify_congruence_small(&a, DEFAULT_TOL).unwrap();
    let expected = CongruenceCanonical::from_blocks(vec![CongruenceBlock::H { m: 1, lambda: cr(2.0) }]).unwrap();
    assert!(got.approx_eq(&expected, 1e-12));
    let got = classify_congruence_small(&CMat::identity(2, 2), DEFAULT_TOL).unwrap();
    assert_eq!(got.blocks(), &[CongruenceBlock::Gamma(1), CongruenceBlock::Gamma(1)]);
    let skew = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(-1.0), cr(0.0)]);
    let got = classify_congruence_small(&skew, DEFAULT_TOL).unwrap();
    assert_eq!(got.blocks(), &[CongruenceBlock::H { m: 1, lambda: cr(-1.0) }]);
}

fn sample_params(domain: Domain) -> Vec<Complex64> {
    match domain {
        Domain::Fixed => vec![],
        Domain::Inversion => vec![c(2.0, 0.5)],
        Domain::Unit | Domain::UnitUpToSign => vec![Complex64::from_polar(1.0, 0.7)],
        Domain::UnitPair => vec![Complex64::from_polar(1.0, 0.7), Complex64::from_polar(1.0, 2.0)],
        Domain::OpenDisk => vec![c(0.3, 0.2)],
    }
}

fn check_dimensions(g: &ParametricGraph) {
    for (i, f) in g.families.iter().enumerate() {
        let inst = g.instance(i, &sample_params(f.domain)).unwrap();
        let a = g.canonical_matrix(&inst).unwrap();
        let n = a.nrows();
        let (ambient, codim) = match g.space {
            Space::Congruence(_) => (n * n, congruence_codim_numeric(&a, DEFAULT_TOL)),
            Space::StarCongruence(_) => (2 * n * n, star_congruence_codim_numeric(&a, DEFAULT_TOL)),
        };
        let bump = match (g.kind, &f.key[..]) {
            (GraphKind::Bundles, k) if k.starts_with("H(") => 1,
            _ => 0,
        };
        assert_eq!(f.dim, ambient - codim + bump, "{}", f.label);
    }
    for e in &g.edges {
        assert!(g.families[e.from].dim < g.families[e.to].dim, "{} → {}", g.families[e.from].label, g.families[e.to].label);
    }
}

#[test]
fn graph_dimensions_match_numeric_codimension() {
    for n in [2, 3] {
        for kind in [GraphKind::Classes, GraphKind::Bundles] {
            check_dimensions(&congruence_graph(n, kind).unwrap());
        }
    }
    check_dimensions(&star_graph_2x2());
    for key in ["H(l)+0", "H(l)+1"] {
        let g = congruence_graph(3, GraphKind::Classes).unwrap();
        let inst = g.instance_by_key(key, &[cr(0.0)]).unwrap();
        let a = g.canonical_matrix(&inst).unwrap();
        assert_eq!(g.families[inst.family].dim, 9 - congruence_codim_numeric(&a, DEFAULT_TOL));
    }
}

#[test]
fn small_congruence_graphs() {
    let g = congruence_graph(2, GraphKind::Bundles).unwrap();
    let mut dims: Vec<usize> = g.families.iter().map(|f| f.dim).collect();
    dims.sort_unstable_by(|a, b| b.cmp(a));
    assert_eq!(dims, vec![4, 3, 3, 2, 1, 0]);
    assert_eq!(g.edges.len(), 7);

    let g = congruence_graph(2, GraphKind::Classes).unwrap();
    let diag = g.instance_by_key("diag(1,0)", &[]).unwrap();
    for lambda in [cr(2.0), c(3.0, 1.0), cr(0.5), cr(0.0), c(0.0, 1.0)] {
        let h = g.instance_by_key("H(l)", &[lambda]).unwrap();
        assert!(g.has_arrow(&diag, &h));
    }
    let zero = g.instance_by_key("0", &[]).unwrap();
    let h5 = g.instance_by_key("H(l)", &[cr(5.0)]).unwrap();
    assert!(!g.has_arrow(&zero, &h5));
    assert!(g.path_exists(&zero, &h5));
    assert!(!g.path_exists(&h5, &zero));
    let h3 = g.instance_by_key("H(l)", &[cr(3.0)]).unwrap();
    assert!(!g.path_exists(&h5, &h3));
    assert!(g.path_exists(&h5, &g.instance_by_key("H(l)", &[cr(0.2)]).unwrap()));

    let g = congruence_graph(3, GraphKind::Bundles).unwrap();
    let mut dims: Vec<usize> = g.families.iter().map(|f| f.dim).collect();
    dims.sort_unstable_by(|a, b| b.cmp(a));
    assert_eq!(dims, vec![9, 8, 8, 7, 6, 6, 6, 5, 5, 3, 3, 0]);

    let g = congruence_graph(3, GraphKind::Classes).unwrap();
    let h0 = g.instance_by_key("H(l)+0", &[cr(2.0)]).unwrap();
    let h1 = g.instance_by_key("H(l)+1", &[c(4.0, 1.0)]).unwrap();
    assert!(!g.has_arrow(&h0, &h1));
    assert!(g.path_exists(&h0, &h1));
    assert!(congruence_graph(4, GraphKind::Classes).is_err());
}

#[test]
fn located_vertices_match_classification() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2, 3] {
        let g = congruence_graph(n, GraphKind::Classes).unwrap();
        for f in congruence_catalog().into_iter().filter(|f| f.size() == n) {
            let inst = g.locate_congruence(&f).unwrap();
            let s = random_well_conditioned(&mut rng, n);
            let got = classify_congruence_small(&(s.transpose() * f.matrix() * &s), DEFAULT_TOL).unwrap();
            let again = g.locate_congruence(&got).unwrap();
            assert_eq!(inst.family, again.family);
        }
    }
}

fn star(g: &ParametricGraph, key: &str, params: &[Complex64]) -> Instance {
    g.instance_by_key(key, params).unwrap()
}

#[test]
fn star_two_by_two_query_battery() {
    let g = star_graph_2x2();
    let i = c(0.0, 1.0);
    let one = cr(1.0);
    assert!(!g.has_arrow(&star(&g, "diag(l,0)", &[one]), &star(&g, "U2(t)", &[i])));
    assert!(g.has_arrow(&star(&g, "diag(l,0)", &[one]), &star(&g, "U2(t)", &[one])));
    assert!(g.has_arrow(&star(&g, "diag(l,-l)", &[i]), &star(&g, "U2(t)", &[i])));
    assert!(g.has_arrow(&star(&g, "diag(l,0)", &[one]), &star(&g, "diag(l,l)", &[one])));
    assert!(!g.has_arrow(&star(&g, "diag(l,0)", &[one]), &star(&g, "diag(l,l)", &[i])));
    let mu = Complex64::from_polar(1.0, PI / 4.0);
    let nu = Complex64::from_polar(1.0, -PI / 4.0);
    assert!(g.has_arrow(&star(&g, "diag(l,0)", &[one]), &star(&g, "diag(m,n)", &[mu, nu])));
    assert!(!g.has_arrow(&star(&g, "diag(l,0)", &[-one]), &star(&g, "diag(m,n)", &[mu, nu])));
    let zero = star(&g, "0", &[]);
    assert!(g.path_exists(&zero, &star(&g, "diag(m,n)", &[mu, nu])));
    assert!(g.path_exists(&zero, &star(&g, "diag(l,-l)", &[i])));
    assert!(g.path_exists(&zero, &star(&g, "H(s)", &[c(0.1, 0.4)])));
    let u = star(&g, "U2(t)", &[i]);
    assert!(g.path_exists(&u, &u));
    assert!(!g.path_exists(&u, &zero));
    let mut dims: Vec<usize> = g.families.iter().map(|f| f.dim).collect();
    dims.sort_unstable_by(|a, b| b.cmp(a));
    assert_eq!(dims, vec![6, 6, 6, 4, 4, 3, 0]);
}

#[test]
fn star_forms_locate_in_two_by_two_graph() {
    use StarBlock::*;
    let g = star_graph_2x2();
    let w = Complex64::from_polar(1.0, 0.3);
    let cases = [
        (vec![U { n: 1, mu: w }, U { n: 1, mu: -w }], "diag(l,-l)"),
        (vec![U { n: 1, mu: w }, U { n: 1, mu: w }], "diag(l,l)"),
        (vec![U { n: 1, mu: w }, U { n: 1, mu: cr(1.0) }], "diag(m,n)"),
        (vec![H { m: 1, lambda: c(0.0, 4.0) }], "H(s)"),
        (vec![N(2)], "H(s)"),
        (vec![U { n: 2, mu: w }], "U2(t)"),
    ];
    for (blocks, key) in cases {
        let f = StarCongruenceCanonical::from_blocks(blocks).unwrap();
        let inst = g.locate_star(&f).unwrap();
        assert_eq!(g.families[inst.family].key, key);
    }
}

#[test]
fn dot_output_labels_predicates() {
    let dot = star_graph_2x2().to_dot();
    assert!(dot.contains("Im(λτ̄) ≥ 0"));
    assert!(dot.contains("τ = ±λ"));
    assert!(dot.starts_with("digraph"));
}
