//! Amalgam enumeration, equivalence of amalgams, pushouts, pullbacks,
//! regular monos and effective squares on the small configurations with
//! hand-checkable answers.

use std::collections::BTreeMap;
use std::sync::Arc;

use sil_core::budget::SearchBudget;
use sil_core::catalog::classes::{class_from_name, cyclic_product, graph_structure};
use sil_core::colimits::{
    check_effective_unions, is_effective_square, is_pullback_square, is_regular_mono, pullback,
    pushout, verify_ringel,
};
use sil_core::diagrams::{
    amalgamation_at_bound, amalgams_equivalent, enumerate_amalgams, spans_up_to, EquivCtx, Span,
};
use sil_core::report::Verdict;
use sil_core::structures::map::{enumerate_embeddings, Embedding, StructMap};
use sil_core::structures::structure::FinStructure;
use sil_core::structures::vocab::Vocabulary;

fn pure_set(elems: &[u32]) -> Arc<FinStructure> {
    Arc::new(
        FinStructure::relational(
            Arc::new(Vocabulary::default()),
            elems.iter().copied().collect(),
            vec![],
        )
        .unwrap(),
    )
}

fn span_over_empty(left: Arc<FinStructure>, right: Arc<FinStructure>) -> Span {
    let base = match left.vocab().relations().len() {
        0 => pure_set(&[]),
        _ => Arc::new(graph_structure(&[], &[])),
    };
    let f1 = Embedding::from_parts(base.clone(), left, BTreeMap::new()).unwrap();
    let f2 = Embedding::from_parts(base, right, BTreeMap::new()).unwrap();
    Span::new(f1, f2).unwrap()
}

#[test]
fn finset_point_amalgams_over_empty() {
    let finset = class_from_name("finset").unwrap();
    let span = span_over_empty(pure_set(&[0]), pure_set(&[0]));
    let budget = SearchBudget { max_codomain_size: 2, max_depth: 2 };
    let amalgams = enumerate_amalgams(&span, &finset, budget).unwrap();
    // Identified point (size 1) and disjoint pair (size 2).
    assert_eq!(amalgams.len(), 2);
    assert_eq!(amalgams[0].codomain().size(), 1);
    assert_eq!(amalgams[1].codomain().size(), 2);
}

#[test]
fn graph_vertex_amalgams_over_empty() {
    let graph = class_from_name("graph").unwrap();
    let span = span_over_empty(
        Arc::new(graph_structure(&[0], &[])),
        Arc::new(graph_structure(&[0], &[])),
    );
    let budget = SearchBudget { max_codomain_size: 2, max_depth: 2 };
    let amalgams = enumerate_amalgams(&span, &graph, budget).unwrap();
    // Identified, disjoint without edge, disjoint with edge.
    assert_eq!(amalgams.len(), 3);
}

#[test]
fn iso_leg_span_always_has_an_amalgam() {
    let graph = class_from_name("graph").unwrap();
    let edge = Arc::new(graph_structure(&[0, 1], &[(0, 1)]));
    let path = Arc::new(graph_structure(&[0, 1, 2], &[(0, 1), (1, 2)]));
    let f1 = Embedding::identity(edge.clone());
    for f2 in enumerate_embeddings(&edge, &path) {
        let span = Span::new(f1.clone(), f2).unwrap();
        let budget = SearchBudget { max_codomain_size: 5, max_depth: 2 };
        assert!(!enumerate_amalgams(&span, &graph, budget).unwrap().is_empty());
    }
}

#[test]
fn degree_bound_forces_identification() {
    // Base: isolated vertex v; sides: v with one pendant each. Any amalgam
    // of degree-bounded graphs (bound 2) must identify the two pendants.
    let klocal = class_from_name("klocal_graph:2").unwrap();
    let v = Arc::new(graph_structure(&[0], &[]));
    let m1 = Arc::new(graph_structure(&[0, 1], &[(0, 1)]));
    let m2 = Arc::new(graph_structure(&[0, 2], &[(0, 2)]));
    let f1 = Embedding::from_parts(v.clone(), m1.clone(), [(0, 0)].into()).unwrap();
    let f2 = Embedding::from_parts(v.clone(), m2.clone(), [(0, 0)].into()).unwrap();
    let span = Span::new(f1, f2).unwrap();
    let budget = SearchBudget { max_codomain_size: 4, max_depth: 2 };
    let amalgams = enumerate_amalgams(&span, &klocal, budget).unwrap();
    assert_eq!(amalgams.len(), 1);
    assert_eq!(amalgams[0].codomain().size(), 2);
    // In plain graphs the same span has more amalgams.
    let graph = class_from_name("graph").unwrap();
    assert!(enumerate_amalgams(&span, &graph, budget).unwrap().len() > 1);
}

#[test]
fn equivalence_is_reflexive_and_respects_renaming() {
    let finset = class_from_name("finset").unwrap();
    let span = span_over_empty(pure_set(&[0]), pure_set(&[1]));
    let budget = SearchBudget { max_codomain_size: 4, max_depth: 2 };
    let amalgams = enumerate_amalgams(&span, &finset, budget).unwrap();
    let mut ctx = EquivCtx::new();
    for d in &amalgams {
        let (v, w) = amalgams_equivalent(d, d, &finset, budget, &mut ctx).unwrap();
        assert_eq!(v, Verdict::Holds);
        assert!(w.is_some());
    }
    // Two disjoint amalgams that differ only in the fresh element's id.
    let disjoint = amalgams.iter().find(|d| d.codomain().size() == 2).unwrap();
    let renamed_codomain = Arc::new(
        disjoint
            .codomain()
            .relabeled(&disjoint.codomain().elements().map(|e| (e, e + 10)).collect()),
    );
    let g1 = Embedding::from_parts(
        disjoint.left().clone(),
        renamed_codomain.clone(),
        disjoint.g1().map().iter().map(|(k, v)| (*k, v + 10)).collect(),
    )
    .unwrap();
    let g2 = Embedding::from_parts(
        disjoint.right().clone(),
        renamed_codomain,
        disjoint.g2().map().iter().map(|(k, v)| (*k, v + 10)).collect(),
    )
    .unwrap();
    let renamed =
        sil_core::diagrams::AmalgamationDiagram::new(span.clone(), g1, g2).unwrap();
    let (v, _) = amalgams_equivalent(disjoint, &renamed, &finset, budget, &mut ctx).unwrap();
    assert_eq!(v, Verdict::Holds);
}

#[test]
fn edge_and_no_edge_amalgams_are_inequivalent() {
    let graph = class_from_name("graph").unwrap();
    let span = span_over_empty(
        Arc::new(graph_structure(&[0], &[])),
        Arc::new(graph_structure(&[0], &[])),
    );
    let budget = SearchBudget { max_codomain_size: 4, max_depth: 2 };
    let amalgams = enumerate_amalgams(&span, &graph, budget).unwrap();
    let edge_am = amalgams
        .iter()
        .find(|d| d.codomain().size() == 2 && !d.codomain().relation(0).is_empty())
        .unwrap();
    let no_edge_am = amalgams
        .iter()
        .find(|d| d.codomain().size() == 2 && d.codomain().relation(0).is_empty())
        .unwrap();
    let mut ctx = EquivCtx::new();
    let (v, _) = amalgams_equivalent(edge_am, no_edge_am, &graph, budget, &mut ctx).unwrap();
    assert_eq!(v, Verdict::Fails, "no cocone can both keep and reflect away the cross edge");
}

#[test]
fn span_mismatch_is_an_error() {
    let finset = class_from_name("finset").unwrap();
    let s1 = span_over_empty(pure_set(&[0]), pure_set(&[0]));
    let s2 = span_over_empty(pure_set(&[1]), pure_set(&[1]));
    let budget = SearchBudget { max_codomain_size: 3, max_depth: 2 };
    let d1 = enumerate_amalgams(&s1, &finset, budget).unwrap().remove(0);
    let d2 = enumerate_amalgams(&s2, &finset, budget).unwrap().remove(0);
    let mut ctx = EquivCtx::new();
    assert!(amalgams_equivalent(&d1, &d2, &finset, budget, &mut ctx).is_err());
}

#[test]
fn dual_is_an_involution() {
    let graph = class_from_name("graph").unwrap();
    let budget = SearchBudget { max_codomain_size: 4, max_depth: 2 };
    for span in spans_up_to(&graph, 2) {
        for d in enumerate_amalgams(&span, &graph, budget).unwrap() {
            assert_eq!(d.dual().dual(), d);
        }
    }
}

#[test]
fn amalgamation_at_small_bounds() {
    let mut ctx = EquivCtx::new();
    for name in ["finset", "graph", "klocal_graph:2", "vecspace:2"] {
        let class = class_from_name(name).unwrap();
        assert!(amalgamation_at_bound(&class, 3, &mut ctx), "{name} has amalgams at bound 3");
        ctx = EquivCtx::new();
    }
}

#[test]
fn finset_pushout_is_disjoint_union() {
    let finset = class_from_name("finset").unwrap();
    let span = span_over_empty(pure_set(&[0]), pure_set(&[1]));
    let p = pushout(&span, &finset).unwrap();
    assert_eq!(p.apex().size(), 2);
    assert!(is_pullback_square(&p.cocone));
}

#[test]
fn graph_pushout_adds_no_edges() {
    let graph = class_from_name("graph").unwrap();
    let span = span_over_empty(
        Arc::new(graph_structure(&[0], &[])),
        Arc::new(graph_structure(&[0], &[])),
    );
    let p = pushout(&span, &graph).unwrap();
    assert_eq!(p.apex().size(), 2);
    assert!(p.apex().relation(0).is_empty());
}

#[test]
fn vecspace_pushout_dimension_count() {
    // Two planes over a shared line: dim 2 + 2 - 1 = 3, so 8 elements.
    let vec2 = class_from_name("vecspace:2").unwrap();
    let line = Arc::new(cyclic_product(&[2]));
    let plane = Arc::new(cyclic_product(&[2, 2]));
    let f1 = enumerate_embeddings(&line, &plane).into_iter().next().unwrap();
    let span = Span::new(f1.clone(), f1).unwrap();
    let p = pushout(&span, &vec2).unwrap();
    assert_eq!(p.apex().size(), 8);
    assert!(is_pullback_square(&p.cocone));
}

#[test]
fn degree_bounded_pushout_merges_pendants() {
    let klocal = class_from_name("klocal_graph:2").unwrap();
    let v = Arc::new(graph_structure(&[0], &[]));
    let m1 = Arc::new(graph_structure(&[0, 1], &[(0, 1)]));
    let m2 = Arc::new(graph_structure(&[0, 2], &[(0, 2)]));
    let f1 = Embedding::from_parts(v.clone(), m1, [(0, 0)].into()).unwrap();
    let f2 = Embedding::from_parts(v, m2, [(0, 0)].into()).unwrap();
    let span = Span::new(f1, f2).unwrap();
    let p = pushout(&span, &klocal).unwrap();
    assert_eq!(p.apex().size(), 2, "the two pendants are forced together");
}

#[test]
fn pushout_mediates_to_every_amalgam() {
    // Universal property, checked against exhaustive map enumeration.
    let graph = class_from_name("graph").unwrap();
    let budget = SearchBudget { max_codomain_size: 4, max_depth: 2 };
    for span in spans_up_to(&graph, 2) {
        let Ok(p) = pushout(&span, &graph) else { continue };
        for competitor in enumerate_amalgams(&span, &graph, budget).unwrap() {
            let mediator = p.mediator(&competitor).expect("mediator exists");
            // Oracle: enumerate all maps apex -> competitor codomain that
            // commute with the legs; exactly one, and it is the mediator.
            let apex_elems: Vec<u32> = p.apex().elements().collect();
            let cod_elems: Vec<u32> = competitor.codomain().elements().collect();
            let mut commuting = 0usize;
            let mut stack: Vec<BTreeMap<u32, u32>> = vec![BTreeMap::new()];
            while let Some(partial) = stack.pop() {
                if partial.len() == apex_elems.len() {
                    let candidate = StructMap::new(
                        p.apex().clone(),
                        competitor.codomain().clone(),
                        partial.clone(),
                    )
                    .unwrap();
                    let commutes = p
                        .cocone
                        .g1()
                        .map()
                        .iter()
                        .all(|(x, v)| candidate.apply(*v) == competitor.g1().apply(*x))
                        && p.cocone
                            .g2()
                            .map()
                            .iter()
                            .all(|(y, v)| candidate.apply(*v) == competitor.g2().apply(*y));
                    if commutes {
                        commuting += 1;
                        assert_eq!(candidate.map(), mediator.map());
                    }
                    continue;
                }
                let next = apex_elems[partial.len()];
                for &t in &cod_elems {
                    let mut ext = partial.clone();
                    ext.insert(next, t);
                    stack.push(ext);
                }
            }
            assert_eq!(commuting, 1, "the mediator is unique");
        }
    }
}

#[test]
fn two_vertices_of_an_edge_pull_back_to_empty() {
    let edge = Arc::new(graph_structure(&[0, 1], &[(0, 1)]));
    let a = Arc::new(graph_structure(&[0], &[]));
    let b = Arc::new(graph_structure(&[1], &[]));
    let g1 = Embedding::from_parts(a, edge.clone(), [(0, 0)].into()).unwrap();
    let g2 = Embedding::from_parts(b, edge, [(1, 1)].into()).unwrap();
    let pb = pullback(&g1, &g2).unwrap();
    assert_eq!(pb.apex.size(), 0);
}

#[test]
fn pullback_along_equal_legs_is_the_source() {
    let graph = class_from_name("graph").unwrap();
    for m in graph.members_up_to(3) {
        let triangle = Arc::new(graph_structure(&[0, 1, 2], &[(0, 1), (1, 2), (0, 2)]));
        for g in enumerate_embeddings(&m, &triangle) {
            let pb = pullback(&g, &g).unwrap();
            assert_eq!(pb.apex.size(), m.size());
        }
    }
}

#[test]
fn distinct_lines_pull_back_to_zero() {
    let plane = Arc::new(cyclic_product(&[2, 2]));
    let line = Arc::new(cyclic_product(&[2]));
    let embs = enumerate_embeddings(&line, &plane);
    // Oracle: linear algebra gives three distinct lines in F_2^2; any two
    // distinct ones meet in the zero space.
    let mut images: Vec<std::collections::BTreeSet<u32>> =
        embs.iter().map(|e| e.image()).collect();
    images.dedup();
    let (e1, e2) = {
        let mut found = None;
        'outer: for x in &embs {
            for y in &embs {
                if x.image() != y.image() {
                    found = Some((x.clone(), y.clone()));
                    break 'outer;
                }
            }
        }
        found.expect("two distinct lines exist")
    };
    let pb = pullback(&e1, &e2).unwrap();
    assert_eq!(pb.apex.size(), 1, "distinct lines meet only in zero");
}

#[test]
fn regular_monos_per_class() {
    let graph = class_from_name("graph").unwrap();
    let finset = class_from_name("finset").unwrap();
    // Non-full subgraph map: two isolated vertices onto the ends of an edge.
    let pair = Arc::new(graph_structure(&[0, 1], &[]));
    let edge = Arc::new(graph_structure(&[0, 1], &[(0, 1)]));
    let not_full = StructMap::new(pair, edge.clone(), [(0, 0), (1, 1)].into()).unwrap();
    assert_eq!(is_regular_mono(&not_full, &graph), Verdict::Fails);
    // Any injection of pure sets is regular.
    let inj = StructMap::new(pure_set(&[0]), pure_set(&[0, 1]), [(0, 0)].into()).unwrap();
    assert_eq!(is_regular_mono(&inj, &finset), Verdict::Holds);
    // A full inclusion of a vertex into a triangle is regular.
    let v = Arc::new(graph_structure(&[0], &[]));
    let triangle = Arc::new(graph_structure(&[0, 1, 2], &[(0, 1), (1, 2), (0, 2)]));
    let full = StructMap::new(v, triangle, [(0, 0)].into()).unwrap();
    assert_eq!(is_regular_mono(&full, &graph), Verdict::Holds);
}

#[test]
fn edge_amalgam_is_pullback_but_not_effective() {
    let graph = class_from_name("graph").unwrap();
    let span = span_over_empty(
        Arc::new(graph_structure(&[0], &[])),
        Arc::new(graph_structure(&[0], &[])),
    );
    let budget = SearchBudget { max_codomain_size: 2, max_depth: 2 };
    let amalgams = enumerate_amalgams(&span, &graph, budget).unwrap();
    let edge_am = amalgams
        .iter()
        .find(|d| d.codomain().size() == 2 && !d.codomain().relation(0).is_empty())
        .unwrap();
    let verdict = is_effective_square(edge_am, &graph).unwrap();
    assert!(verdict.is_pullback);
    assert_eq!(verdict.induced_map_regular, Verdict::Fails);
    let no_edge_am = amalgams
        .iter()
        .find(|d| d.codomain().size() == 2 && d.codomain().relation(0).is_empty())
        .unwrap();
    assert!(is_effective_square(no_edge_am, &graph).unwrap().holds());
}

#[test]
fn finset_pullback_squares_are_effective() {
    let finset = class_from_name("finset").unwrap();
    let budget = SearchBudget { max_codomain_size: 4, max_depth: 2 };
    for span in spans_up_to(&finset, 2) {
        for d in sil_core::diagrams::span_diagrams(&span, &finset, budget).unwrap() {
            if is_pullback_square(&d) {
                assert!(is_effective_square(&d, &finset).unwrap().holds());
            }
        }
    }
}

#[test]
fn ringel_small_bounds() {
    for name in ["finset", "graph", "vecspace:2"] {
        let class = class_from_name(name).unwrap();
        let report = verify_ringel(&class, 3);
        assert_eq!(report.verdict, Verdict::Holds, "{name}");
        assert!(report.stats.configurations > 0);
    }
}

#[test]
fn effective_unions_verdicts_small() {
    let graph = class_from_name("graph").unwrap();
    let report = check_effective_unions(&graph, 2);
    assert_eq!(report.verdict, Verdict::Fails);
    // The witness is the two-vertices-of-an-edge square.
    let Some(sil_core::report::Witness::Diagram { diagram, .. }) = report.witnesses.first()
    else {
        panic!("expected a diagram witness");
    };
    assert_eq!(diagram.codomain().size(), 2);
    assert_eq!(diagram.codomain().relation(0).len(), 2); // one undirected edge
    assert_eq!(diagram.left().size(), 1);
    assert_eq!(diagram.right().size(), 1);
    assert_eq!(diagram.base().size(), 0);

    let finset = class_from_name("finset").unwrap();
    assert_eq!(check_effective_unions(&finset, 3).verdict, Verdict::Holds);
    let multigraph = class_from_name("multigraph").unwrap();
    assert_eq!(check_effective_unions(&multigraph, 2).verdict, Verdict::Holds);
}
