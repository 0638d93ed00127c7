//! Type machinery: equality certificates against the amalgam-search oracle,
//! type counting, tameness, and the order-property search.

use std::collections::BTreeSet;
use std::sync::Arc;

use sil_core::budget::SearchBudget;
use sil_core::catalog::classes::{class_from_name, graph_structure};
use sil_core::diagrams::EquivCtx;
use sil_core::galois::{
    configurations_isomorphic, count_types, check_tameness, find_order_property, gtp_equal,
    gtp_equal_by_search, pointed_extensions, validate_order_witness, PointedExtension,
};
use sil_core::report::Verdict;
use sil_core::structures::map::Embedding;
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

#[test]
fn equal_pointed_extensions_have_equal_types() {
    let graph = class_from_name("graph").unwrap();
    let m = Arc::new(graph_structure(&[0], &[]));
    let n = Arc::new(graph_structure(&[0, 1], &[(0, 1)]));
    let ext = Embedding::from_parts(m.clone(), n, [(0, 0)].into()).unwrap();
    let p = PointedExtension::new(ext, vec![1]).unwrap();
    let mut ctx = EquivCtx::new();
    let budget = SearchBudget { max_codomain_size: 4, max_depth: 2 };
    assert_eq!(gtp_equal(&p, &p, &graph, budget, &mut ctx).unwrap(), Verdict::Holds);
}

#[test]
fn adjacency_to_the_base_separates_types() {
    // One fresh vertex adjacent to the base point, one not.
    let graph = class_from_name("graph").unwrap();
    let m = Arc::new(graph_structure(&[0], &[]));
    let adjacent = Arc::new(graph_structure(&[0, 1], &[(0, 1)]));
    let apart = Arc::new(graph_structure(&[0, 1], &[]));
    let p = PointedExtension::new(
        Embedding::from_parts(m.clone(), adjacent, [(0, 0)].into()).unwrap(),
        vec![1],
    )
    .unwrap();
    let q = PointedExtension::new(
        Embedding::from_parts(m.clone(), apart, [(0, 0)].into()).unwrap(),
        vec![1],
    )
    .unwrap();
    let mut ctx = EquivCtx::new();
    let budget = SearchBudget { max_codomain_size: 4, max_depth: 2 };
    assert_eq!(gtp_equal(&p, &q, &graph, budget, &mut ctx).unwrap(), Verdict::Fails);
    assert_eq!(
        gtp_equal_by_search(&p, &q, &graph, budget, &mut ctx).unwrap(),
        Verdict::Fails
    );
}

#[test]
fn fresh_elements_of_pure_sets_share_one_type() {
    let finset = class_from_name("finset").unwrap();
    let m = pure_set(&[0]);
    let n1 = pure_set(&[0, 5]);
    let n2 = pure_set(&[0, 9]);
    let p = PointedExtension::new(
        Embedding::from_parts(m.clone(), n1, [(0, 0)].into()).unwrap(),
        vec![5],
    )
    .unwrap();
    let q = PointedExtension::new(
        Embedding::from_parts(m.clone(), n2, [(0, 0)].into()).unwrap(),
        vec![9],
    )
    .unwrap();
    let mut ctx = EquivCtx::new();
    let budget = SearchBudget { max_codomain_size: 4, max_depth: 2 };
    assert_eq!(gtp_equal(&p, &q, &finset, budget, &mut ctx).unwrap(), Verdict::Holds);
}

#[test]
fn certificates_agree_with_search_on_small_configurations() {
    // The certificate (configuration isomorphism) must agree with the
    // definitional amalgam search wherever the latter concludes.
    for name in ["finset", "graph", "klocal_graph:2"] {
        let class = class_from_name(name).unwrap();
        let mut ctx = EquivCtx::new();
        for m in class.members_up_to(2) {
            for alpha in 0..=2usize {
                let points = pointed_extensions(&class, &m, alpha, m.size() + 2);
                let budget = SearchBudget { max_codomain_size: 5, max_depth: 2 };
                for (i, p) in points.iter().enumerate() {
                    for q in points.iter().skip(i) {
                        let cert = configurations_isomorphic(p, q);
                        let search = gtp_equal_by_search(p, q, &class, budget, &mut ctx).unwrap();
                        if search != Verdict::Inconclusive {
                            assert_eq!(
                                cert,
                                search == Verdict::Holds,
                                "{name}: certificate and search disagree (alpha={alpha})"
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn type_counts_match_closed_forms() {
    let finset = class_from_name("finset").unwrap();
    let graph = class_from_name("graph").unwrap();
    for size in 0..=3usize {
        let m = pure_set(&(0..size as u32).collect::<Vec<_>>());
        let budget = SearchBudget { max_codomain_size: size + 2, max_depth: 2 };
        let count = count_types(&finset, &m, 1, budget);
        assert_eq!(count.count, size + 1, "pure set of size {size}");
        assert!(count.stable);
    }
    for g in graph.members_up_to(3) {
        let n = g.size();
        let budget = SearchBudget { max_codomain_size: n + 2, max_depth: 2 };
        let count = count_types(&graph, &g, 1, budget);
        assert_eq!(count.count, (1 << n) + n, "graph on {n} vertices");
        assert!(count.stable);
    }
}

#[test]
fn degree_bound_caps_fresh_neighbour_types() {
    // Over a single edge in the degree < 2 class: the two endpoint types
    // plus one fresh isolated vertex; no fresh adjacent vertex can exist.
    let klocal = class_from_name("klocal_graph:2").unwrap();
    let edge = Arc::new(graph_structure(&[0, 1], &[(0, 1)]));
    let budget = SearchBudget { max_codomain_size: 4, max_depth: 2 };
    let count = count_types(&klocal, &edge, 1, budget);
    assert_eq!(count.count, 3);
}

#[test]
fn tameness_with_singleton_restrictions() {
    let graph = class_from_name("graph").unwrap();
    let finset = class_from_name("finset").unwrap();
    for class in [&graph, &finset] {
        for m in class.members_up_to(3) {
            let budget = SearchBudget { max_codomain_size: m.size() + 2, max_depth: 2 };
            let report = check_tameness(class, &m, 1, 2, budget);
            assert_eq!(report.verdict, Verdict::Holds, "{} base size {}", class.name(), m.size());
        }
    }
}

#[test]
fn tameness_trivial_when_chi_exceeds_base() {
    let graph = class_from_name("graph").unwrap();
    let m = Arc::new(graph_structure(&[0, 1], &[]));
    let budget = SearchBudget { max_codomain_size: 4, max_depth: 2 };
    let report = check_tameness(&graph, &m, 1, 5, budget);
    assert_eq!(report.verdict, Verdict::Holds);
}

#[test]
fn half_graph_witnesses_the_order_property() {
    let graph = class_from_name("graph").unwrap();
    // The standard half-graph on 6 vertices: b_i -- c_j iff i < j.
    let half = Arc::new(graph_structure(
        &[0, 1, 2, 10, 11, 12],
        &[(0, 11), (0, 12), (1, 12)],
    ));
    let witness = sil_core::galois::OrderWitness {
        structure: half,
        tuples: vec![vec![0, 10], vec![1, 11], vec![2, 12]],
    };
    assert!(validate_order_witness(&graph, &witness, 2));
}

#[test]
fn order_property_search_finds_a_graph_witness() {
    let graph = class_from_name("graph").unwrap();
    let found = find_order_property(&graph, 2, 3, 6).expect("graphs have the order pattern");
    assert!(validate_order_witness(&graph, &found, 2));
    assert!(found.structure.size() <= 6);
}

#[test]
fn no_order_property_in_tame_classes_small() {
    let finset = class_from_name("finset").unwrap();
    assert!(find_order_property(&finset, 1, 3, 6).is_none());
    let klocal = class_from_name("klocal_graph:2").unwrap();
    assert!(find_order_property(&klocal, 1, 3, 6).is_none());
    let vec2 = class_from_name("vecspace:2").unwrap();
    assert!(find_order_property(&vec2, 1, 3, 4).is_none());
    assert!(find_order_property(&vec2, 2, 3, 4).is_none());
}

#[test]
fn degree_bounded_graphs_carry_a_short_pair_pattern_but_not_longer() {
    // Perhaps surprisingly, matchings admit a genuine length-3 pattern of
    // pair types (one asymmetric cross edge plus one internal edge do it).
    // The degree bound starves longer sequences of asymmetric patterns, so
    // the pattern stops at length 3, which is what stability predicts.
    let klocal = class_from_name("klocal_graph:2").unwrap();
    let found = find_order_property(&klocal, 2, 3, 6).expect("length-3 pattern exists");
    assert!(validate_order_witness(&klocal, &found, 2));
    assert!(find_order_property(&klocal, 2, 4, 8).is_none());
}

#[test]
fn restricted_types_distinguish_by_one_base_vertex() {
    use sil_core::galois::restricted_types_equal;
    let graph = class_from_name("graph").unwrap();
    let m = Arc::new(graph_structure(&[0, 1], &[]));
    let n1 = Arc::new(graph_structure(&[0, 1, 2], &[(0, 2)]));
    let n2 = Arc::new(graph_structure(&[0, 1, 2], &[(1, 2)]));
    let p = PointedExtension::new(
        Embedding::from_parts(m.clone(), n1, [(0, 0), (1, 1)].into()).unwrap(),
        vec![2],
    )
    .unwrap();
    let q = PointedExtension::new(
        Embedding::from_parts(m.clone(), n2, [(0, 0), (1, 1)].into()).unwrap(),
        vec![2],
    )
    .unwrap();
    let mut ctx = EquivCtx::new();
    let budget = SearchBudget { max_codomain_size: 5, max_depth: 2 };
    assert_eq!(gtp_equal(&p, &q, &graph, budget, &mut ctx).unwrap(), Verdict::Fails);
    // Restriction to vertex 0 separates them; restriction to empty does not.
    let zero: BTreeSet<u32> = [0].into();
    assert_eq!(
        restricted_types_equal(&graph, &p, &q, &zero, budget, &mut ctx).unwrap(),
        Verdict::Fails
    );
    let empty: BTreeSet<u32> = [].into();
    assert_eq!(
        restricted_types_equal(&graph, &p, &q, &empty, budget, &mut ctx).unwrap(),
        Verdict::Holds
    );
}
