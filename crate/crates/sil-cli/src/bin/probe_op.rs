use sil_core::catalog::classes::class_from_name;
use sil_core::galois::find_order_property;
fn main() {
    let klocal = class_from_name("klocal_graph:2").unwrap();
    if let Some(w) = find_order_property(&klocal, 2, 3, 6) {
        println!("structure universe: {:?}", w.structure.universe());
        println!("edges: {:?}", w.structure.relation(0));
        println!("tuples: {:?}", w.tuples);
    } else {
        println!("none");
    }
}
