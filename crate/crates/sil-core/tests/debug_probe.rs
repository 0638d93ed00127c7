//! Scratch probe (removed before release).

use std::collections::BTreeMap;
use std::sync::Arc;

use sil_core::budget::SearchBudget;
use sil_core::catalog::classes::{class_from_name, graph_structure};
use sil_core::diagrams::{enumerate_amalgams, enumerate_cocones, spans_up_to, Span};
use sil_core::structures::map::Embedding;

#[test]
fn probe_cocones_edge_vs_no_edge() {
    let graph = class_from_name("graph").unwrap();
    let base = Arc::new(graph_structure(&[], &[]));
    let m1 = Arc::new(graph_structure(&[0], &[]));
    let m2 = Arc::new(graph_structure(&[0], &[]));
    let f1 = Embedding::from_parts(base.clone(), m1, BTreeMap::new()).unwrap();
    let f2 = Embedding::from_parts(base, m2, BTreeMap::new()).unwrap();
    let span = Span::new(f1, f2).unwrap();
    let budget = SearchBudget { max_codomain_size: 4, max_depth: 2 };
    let amalgams = enumerate_amalgams(&span, &graph, budget).unwrap();
    for (i, d) in amalgams.iter().enumerate() {
        println!(
            "amalgam {i}: |N|={} edges={:?} g1={:?} g2={:?}",
            d.codomain().size(),
            d.codomain().relation(0),
            d.g1().map(),
            d.g2().map()
        );
    }
    let edge_am = amalgams
        .iter()
        .find(|d| d.codomain().size() == 2 && !d.codomain().relation(0).is_empty())
        .unwrap();
    let no_edge_am = amalgams
        .iter()
        .find(|d| d.codomain().size() == 2 && d.codomain().relation(0).is_empty())
        .unwrap();
    let mut seed: BTreeMap<u32, u32> = BTreeMap::new();
    for x in edge_am.left().elements() {
        seed.insert(edge_am.g1().apply(x), no_edge_am.g1().apply(x));
    }
    for y in edge_am.right().elements() {
        seed.insert(edge_am.g2().apply(y), no_edge_am.g2().apply(y));
    }
    println!("seed: {seed:?}");
    let (cocones, complete) =
        enumerate_cocones(edge_am.codomain(), no_edge_am.codomain(), &seed, &graph, 4, false)
            .unwrap();
    println!("complete={complete} cocones={}", cocones.len());
    for c in &cocones {
        println!(
            "cocone |N*|={} edges={:?} left={:?} right={:?}",
            c.codomain.size(),
            c.codomain.relation(0),
            c.left.map(),
            c.right.map()
        );
    }
}

#[test]
fn probe_vec_spans() {
    let vec2 = class_from_name("vecspace:2").unwrap();
    for span in spans_up_to(&vec2, 3) {
        let budget = SearchBudget { max_codomain_size: 3, max_depth: 1 };
        let n = enumerate_amalgams(&span, &vec2, budget).unwrap().len();
        println!(
            "span base={} left={} right={} amalgams={}",
            span.base().size(),
            span.left().target().size(),
            span.right().target().size(),
            n
        );
    }
}
