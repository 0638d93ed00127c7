//! Built-in classes and the named independence relations over them.

pub mod classes;
pub mod relations;

pub use classes::{
    check_coherence, class_from_name, cyclic_product, graph_structure, make_class,
    multigraph_structure, ClassHandle, ClassKind, LambdaFn, StrongMode,
};
pub use relations::{make_relation, relation_from_name, RelationKind, RelationSpec};
