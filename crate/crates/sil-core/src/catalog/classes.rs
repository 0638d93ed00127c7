//! Built-in abstract classes: membership, strong embeddings, and
//! enumeration of members, extensions and substructures up to isomorphism.

use crate::error::EngineError;
use crate::structures::canon::{Coloring, IsoClasses};
use crate::structures::map::{enumerate_embeddings, Embedding, StructMap};
use crate::structures::structure::{subsets_of, FinStructure};
use crate::structures::vocab::{Elem, Vocabulary};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

/// Strong-embedding mode for user-supplied classes. With embeddings that
/// reflect relations the two modes coincide; both are accepted for the sake
/// of the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrongMode {
    InducedSubstructure,
    AllEmbeddings,
}

/// Which built-in class a handle denotes.
#[derive(Debug, Clone)]
pub enum ClassKind {
    /// Pure sets; every embedding is strong.
    FinSet,
    /// Undirected simple graphs ordered by full (induced) subgraph.
    Graph,
    /// Graphs all of whose vertices have degree strictly below `kappa`.
    KLocalGraph { kappa: u32 },
    /// Directed multigraphs: a vertex sort and an edge sort with endpoint
    /// functions (a presheaf category, so every mono is regular).
    Multigraph,
    /// Vector spaces over the prime field F_p, ordered by subspace.
    VecSpace { p: u32 },
    /// Z/n-modules: abelian groups of exponent dividing `n`.
    Module { n: u32 },
    /// A user-supplied class: the isomorphism closure of a finite list of
    /// structures.
    User { members: Vec<Arc<FinStructure>>, strong: StrongMode, label: String },
}

/// A class of finite structures together with its capabilities.
#[derive(Debug, Clone)]
pub struct ClassHandle {
    kind: ClassKind,
    vocab: Arc<Vocabulary>,
}

/// Default size budget for the substructure a local-character base is
/// allowed to have, as a function of the type length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaFn {
    Linear { mul: u32, add: u32 },
    Exp { base: u32 },
}

impl LambdaFn {
    pub fn eval(&self, alpha: usize) -> usize {
        match self {
            LambdaFn::Linear { mul, add } => alpha * (*mul as usize) + (*add as usize),
            LambdaFn::Exp { base } => (*base as usize).pow(alpha as u32),
        }
    }
}

pub fn graph_vocab() -> Arc<Vocabulary> {
    Arc::new(Vocabulary::new(alloc::vec![("E".to_string(), 2)], Vec::new()).unwrap())
}

pub fn multigraph_vocab() -> Arc<Vocabulary> {
    Arc::new(
        Vocabulary::new(
            alloc::vec![("V".to_string(), 1), ("Ed".to_string(), 1)],
            alloc::vec![("src".to_string(), 1), ("tgt".to_string(), 1)],
        )
        .unwrap(),
    )
}

pub fn abelian_vocab() -> Arc<Vocabulary> {
    Arc::new(
        Vocabulary::new(
            Vec::new(),
            alloc::vec![
                ("add".to_string(), 2),
                ("neg".to_string(), 1),
                ("zero".to_string(), 0)
            ],
        )
        .unwrap(),
    )
}

/// Build an undirected graph; edges are stored in both orientations.
pub fn graph_structure(universe: &[Elem], edges: &[(Elem, Elem)]) -> FinStructure {
    let mut table: BTreeSet<Vec<Elem>> = BTreeSet::new();
    for &(a, b) in edges {
        assert_ne!(a, b, "simple graphs have no loops");
        table.insert(alloc::vec![a, b]);
        table.insert(alloc::vec![b, a]);
    }
    FinStructure::relational(
        graph_vocab(),
        universe.iter().copied().collect(),
        alloc::vec![table],
    )
    .expect("valid graph")
}

/// Build a directed multigraph from vertex ids and (edge id, src, tgt) rows.
pub fn multigraph_structure(vertices: &[Elem], edges: &[(Elem, Elem, Elem)]) -> FinStructure {
    let mut universe: BTreeSet<Elem> = vertices.iter().copied().collect();
    let vs: BTreeSet<Vec<Elem>> = vertices.iter().map(|v| alloc::vec![*v]).collect();
    let mut es: BTreeSet<Vec<Elem>> = BTreeSet::new();
    let mut src: BTreeMap<Vec<Elem>, Elem> = vertices.iter().map(|v| (alloc::vec![*v], *v)).collect();
    let mut tgt = src.clone();
    for &(e, s, t) in edges {
        universe.insert(e);
        es.insert(alloc::vec![e]);
        src.insert(alloc::vec![e], s);
        tgt.insert(alloc::vec![e], t);
    }
    FinStructure::new(
        multigraph_vocab(),
        universe,
        alloc::vec![vs, es],
        alloc::vec![src, tgt],
    )
    .expect("valid multigraph")
}

/// The direct product of cyclic groups Z/d for the given factors, with
/// universe `0..product` in mixed-radix encoding. No factors gives the zero
/// group.
pub fn cyclic_product(factors: &[u32]) -> FinStructure {
    let order: u64 = factors.iter().map(|&d| d as u64).product();
    let order = order as u32;
    let decode = |x: u32| -> Vec<u32> {
        let mut digits = Vec::with_capacity(factors.len());
        let mut rest = x;
        for &d in factors {
            digits.push(rest % d);
            rest /= d;
        }
        digits
    };
    let encode = |digits: &[u32]| -> u32 {
        let mut x = 0u32;
        for (i, &v) in digits.iter().enumerate().rev() {
            x = x * factors[i] + v;
        }
        x
    };
    let universe: BTreeSet<Elem> = (0..order).collect();
    let mut add = BTreeMap::new();
    let mut neg = BTreeMap::new();
    for a in 0..order {
        let da = decode(a);
        let dn: Vec<u32> = da.iter().zip(factors).map(|(&v, &d)| (d - v) % d).collect();
        neg.insert(alloc::vec![a], encode(&dn));
        for b in 0..order {
            let db = decode(b);
            let ds: Vec<u32> =
                da.iter().zip(&db).zip(factors).map(|((&x, &y), &d)| (x + y) % d).collect();
            add.insert(alloc::vec![a, b], encode(&ds));
        }
    }
    let zero = BTreeMap::from([(Vec::new(), 0)]);
    FinStructure::new(abelian_vocab(), universe, Vec::new(), alloc::vec![add, neg, zero])
        .expect("valid abelian group")
}

/// `m x (product of extra cyclic factors)`, with the embedding of `m` as the
/// first coordinate. Fresh element ids extend `m`'s.
pub fn abelian_product_with_embedding(
    m: &Arc<FinStructure>,
    extra: &[u32],
) -> (Arc<FinStructure>, Embedding) {
    let tail = cyclic_product(extra);
    let tail_order = tail.size() as u32;
    let m_elems: Vec<Elem> = m.elements().collect();
    // Pair (a, t); keep `a`'s id when t == 0 so the embedding is an inclusion.
    let mut fresh = m.fresh_elem();
    let mut id_of: BTreeMap<(Elem, Elem), Elem> = BTreeMap::new();
    for &a in &m_elems {
        id_of.insert((a, 0), a);
    }
    for t in 1..tail_order {
        for &a in &m_elems {
            id_of.insert((a, t), fresh);
            fresh += 1;
        }
    }
    let universe: BTreeSet<Elem> = id_of.values().copied().collect();
    let add_idx = m.vocab().function_index("add").unwrap();
    let neg_idx = m.vocab().function_index("neg").unwrap();
    let zero_idx = m.vocab().function_index("zero").unwrap();
    let mut add = BTreeMap::new();
    let mut neg = BTreeMap::new();
    for (&(a1, t1), &x1) in &id_of {
        let na = m.apply(neg_idx, &[a1]);
        let nt = tail.apply(neg_idx, &[t1]);
        neg.insert(alloc::vec![x1], id_of[&(na, nt)]);
        for (&(a2, t2), &x2) in &id_of {
            let sa = m.apply(add_idx, &[a1, a2]);
            let st = tail.apply(add_idx, &[t1, t2]);
            add.insert(alloc::vec![x1, x2], id_of[&(sa, st)]);
        }
    }
    let zero = BTreeMap::from([(Vec::new(), id_of[&(m.apply(zero_idx, &[]), 0)])]);
    let product = Arc::new(
        FinStructure::new(m.vocab().clone(), universe, Vec::new(), alloc::vec![add, neg, zero])
            .expect("valid abelian product"),
    );
    let emb = Embedding::from_parts(
        m.clone(),
        product.clone(),
        m_elems.iter().map(|&a| (a, a)).collect(),
    )
    .expect("first-coordinate inclusion is an embedding");
    (product, emb)
}

/// The direct sum of two abelian-group structures, as (structure, left
/// injection map, right injection map) over fresh contiguous ids.
pub fn abelian_direct_sum(
    a: &FinStructure,
    b: &FinStructure,
) -> (FinStructure, BTreeMap<Elem, Elem>, BTreeMap<Elem, Elem>) {
    let vocab = a.vocab().clone();
    let add = vocab.function_index("add").unwrap();
    let neg = vocab.function_index("neg").unwrap();
    let zero = vocab.function_index("zero").unwrap();
    let (za, zb) = (a.apply(zero, &[]), b.apply(zero, &[]));
    let a_elems: Vec<Elem> = a.elements().collect();
    let b_elems: Vec<Elem> = b.elements().collect();
    let mut id_of: BTreeMap<(Elem, Elem), Elem> = BTreeMap::new();
    for (i, &x) in a_elems.iter().enumerate() {
        for (j, &y) in b_elems.iter().enumerate() {
            id_of.insert((x, y), (i * b_elems.len() + j) as Elem);
        }
    }
    let mut add_t = BTreeMap::new();
    let mut neg_t = BTreeMap::new();
    for (&(x1, y1), &e1) in &id_of {
        neg_t.insert(
            alloc::vec![e1],
            id_of[&(a.apply(neg, &[x1]), b.apply(neg, &[y1]))],
        );
        for (&(x2, y2), &e2) in &id_of {
            add_t.insert(
                alloc::vec![e1, e2],
                id_of[&(a.apply(add, &[x1, x2]), b.apply(add, &[y1, y2]))],
            );
        }
    }
    let zero_t = BTreeMap::from([(Vec::new(), id_of[&(za, zb)])]);
    let sum = FinStructure::new(
        vocab,
        id_of.values().copied().collect(),
        Vec::new(),
        alloc::vec![add_t, neg_t, zero_t],
    )
    .expect("valid direct sum");
    let left = a_elems.iter().map(|&x| (x, id_of[&(x, zb)])).collect();
    let right = b_elems.iter().map(|&y| (y, id_of[&(za, y)])).collect();
    (sum, left, right)
}

/// Quotient of an abelian-group structure by a subgroup: cosets are labeled
/// by their least element. Returns the quotient and the projection.
pub fn abelian_quotient(
    p: &FinStructure,
    d: &BTreeSet<Elem>,
) -> (FinStructure, BTreeMap<Elem, Elem>) {
    let add = p.vocab().function_index("add").unwrap();
    let neg = p.vocab().function_index("neg").unwrap();
    let zero = p.vocab().function_index("zero").unwrap();
    let mut rep: BTreeMap<Elem, Elem> = BTreeMap::new();
    for x in p.elements() {
        if rep.contains_key(&x) {
            continue;
        }
        let coset: BTreeSet<Elem> = d.iter().map(|&h| p.apply(add, &[x, h])).collect();
        let r = *coset.iter().next().unwrap();
        for y in coset {
            rep.insert(y, r);
        }
    }
    let universe: BTreeSet<Elem> = rep.values().copied().collect();
    let mut add_t = BTreeMap::new();
    let mut neg_t = BTreeMap::new();
    for &x in &universe {
        neg_t.insert(alloc::vec![x], rep[&p.apply(neg, &[x])]);
        for &y in &universe {
            add_t.insert(alloc::vec![x, y], rep[&p.apply(add, &[x, y])]);
        }
    }
    let zero_t = BTreeMap::from([(Vec::new(), rep[&p.apply(zero, &[])])]);
    let q = FinStructure::new(p.vocab().clone(), universe, Vec::new(), alloc::vec![
        add_t, neg_t, zero_t
    ])
    .expect("valid quotient group");
    (q, rep)
}

/// All subgroups of an abelian-group structure, as element subsets.
pub fn subgroups(m: &FinStructure) -> Vec<BTreeSet<Elem>> {
    let zero_idx = m.vocab().function_index("zero").unwrap();
    let zero = m.apply(zero_idx, &[]);
    let trivial: BTreeSet<Elem> = BTreeSet::from([zero]);
    let mut known: BTreeSet<BTreeSet<Elem>> = BTreeSet::from([trivial]);
    loop {
        let mut grew = false;
        let snapshot: Vec<BTreeSet<Elem>> = known.iter().cloned().collect();
        for h in snapshot {
            for x in m.elements() {
                if h.contains(&x) {
                    continue;
                }
                let mut seed = h.clone();
                seed.insert(x);
                let closed = m.generated_subset(&seed);
                grew |= known.insert(closed);
            }
        }
        if !grew {
            let mut out: Vec<BTreeSet<Elem>> = known.into_iter().collect();
            out.sort_by_key(|s| (s.len(), s.iter().copied().collect::<Vec<_>>()));
            return out;
        }
    }
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Construct a built-in class handle.
pub fn make_class(kind: ClassKind) -> Result<ClassHandle, EngineError> {
    let vocab = match &kind {
        ClassKind::FinSet => Arc::new(Vocabulary::default()),
        ClassKind::Graph => graph_vocab(),
        ClassKind::KLocalGraph { kappa } => {
            if *kappa < 2 {
                return Err(EngineError::BadParameter("klocal_graph needs kappa >= 2".into()));
            }
            graph_vocab()
        }
        ClassKind::Multigraph => multigraph_vocab(),
        ClassKind::VecSpace { p } => {
            if !is_prime(*p) {
                return Err(EngineError::BadParameter(format!(
                    "vecspace characteristic {p} is not prime"
                )));
            }
            abelian_vocab()
        }
        ClassKind::Module { n } => {
            if *n == 0 {
                return Err(EngineError::BadParameter("module needs n >= 1".into()));
            }
            abelian_vocab()
        }
        ClassKind::User { members, .. } => {
            let Some(first) = members.first() else {
                return Err(EngineError::BadParameter("user class needs at least one member".into()));
            };
            if members.iter().any(|m| m.vocab() != first.vocab()) {
                return Err(EngineError::VocabMismatch);
            }
            first.vocab().clone()
        }
    };
    Ok(ClassHandle { kind, vocab })
}

/// Parse a class name of the form `name` or `name:param`.
pub fn class_from_name(spec: &str) -> Result<ClassHandle, EngineError> {
    let (name, param) = match spec.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (spec, None),
    };
    let num = |p: Option<&str>| -> Result<u32, EngineError> {
        p.ok_or_else(|| EngineError::BadParameter(format!("class `{name}` needs a parameter")))?
            .parse::<u32>()
            .map_err(|_| EngineError::BadParameter(format!("bad parameter for class `{name}`")))
    };
    match name {
        "finset" => make_class(ClassKind::FinSet),
        "graph" => make_class(ClassKind::Graph),
        "multigraph" => make_class(ClassKind::Multigraph),
        "klocal_graph" => make_class(ClassKind::KLocalGraph { kappa: num(param)? }),
        "vecspace" => make_class(ClassKind::VecSpace { p: num(param)? }),
        "module" => make_class(ClassKind::Module { n: num(param)? }),
        other => Err(EngineError::UnknownName(other.to_string())),
    }
}

impl ClassHandle {
    pub fn kind(&self) -> &ClassKind {
        &self.kind
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn name(&self) -> String {
        match &self.kind {
            ClassKind::FinSet => "finset".into(),
            ClassKind::Graph => "graph".into(),
            ClassKind::KLocalGraph { kappa } => format!("klocal_graph:{kappa}"),
            ClassKind::Multigraph => "multigraph".into(),
            ClassKind::VecSpace { p } => format!("vecspace:{p}"),
            ClassKind::Module { n } => format!("module:{n}"),
            ClassKind::User { label, .. } => format!("user:{label}"),
        }
    }

    /// Membership decision procedure.
    pub fn contains(&self, m: &FinStructure) -> bool {
        if m.vocab() != &self.vocab {
            return false;
        }
        match &self.kind {
            ClassKind::FinSet => true,
            ClassKind::Graph => is_graph(m),
            ClassKind::KLocalGraph { kappa } => {
                is_graph(m) && m.elements().all(|v| graph_degree(m, v) < *kappa as usize)
            }
            ClassKind::Multigraph => is_multigraph(m),
            ClassKind::VecSpace { p } => is_bounded_exponent_abelian(m, *p),
            ClassKind::Module { n } => is_bounded_exponent_abelian(m, *n),
            ClassKind::User { members, .. } => members
                .iter()
                .any(|cand| crate::structures::canon::are_isomorphic(&Arc::new(m.clone()), cand).is_some()),
        }
    }

    /// Is this embedding a strong (class) embedding? Embeddings already
    /// reflect relations, so for every built-in the answer is membership of
    /// both endpoints.
    pub fn is_strong(&self, e: &Embedding) -> bool {
        self.contains(e.source()) && self.contains(e.target())
    }

    /// Members up to isomorphism with universe size at most `max_size`, in a
    /// fixed order (by size, then discovery order).
    pub fn members_up_to(&self, max_size: usize) -> Vec<Arc<FinStructure>> {
        match &self.kind {
            ClassKind::FinSet => (0..=max_size)
                .map(|k| {
                    Arc::new(
                        FinStructure::relational(
                            self.vocab.clone(),
                            (0..k as Elem).collect(),
                            Vec::new(),
                        )
                        .unwrap(),
                    )
                })
                .collect(),
            ClassKind::Graph | ClassKind::KLocalGraph { .. } => self.graphs_up_to(max_size),
            ClassKind::Multigraph => self.multigraphs_up_to(max_size),
            ClassKind::VecSpace { p } => {
                let mut out = Vec::new();
                let mut order = 1usize;
                let mut dim = 0u32;
                while order <= max_size {
                    out.push(Arc::new(cyclic_product(&alloc::vec![*p; dim as usize])));
                    dim += 1;
                    order *= *p as usize;
                }
                out
            }
            ClassKind::Module { n } => {
                let factors: Vec<u32> =
                    (2..=*n).filter(|d| n % d == 0 && is_prime_power(*d)).collect();
                let mut shapes: Vec<Vec<u32>> = alloc::vec![Vec::new()];
                let mut frontier: Vec<Vec<u32>> = alloc::vec![Vec::new()];
                while let Some(shape) = frontier.pop() {
                    let start = shape.last().copied().unwrap_or(2);
                    for &d in factors.iter().filter(|&&d| d >= start) {
                        let order: usize = shape.iter().map(|&x| x as usize).product::<usize>()
                            * d as usize;
                        if order <= max_size {
                            let mut next = shape.clone();
                            next.push(d);
                            shapes.push(next.clone());
                            frontier.push(next);
                        }
                    }
                }
                shapes.sort_by_key(|s| {
                    (s.iter().map(|&x| x as usize).product::<usize>(), s.clone())
                });
                shapes.iter().map(|s| Arc::new(cyclic_product(s))).collect()
            }
            ClassKind::User { members, .. } => {
                let mut classes = IsoClasses::new();
                let mut out = Vec::new();
                let mut sized: Vec<Arc<FinStructure>> =
                    members.iter().filter(|m| m.size() <= max_size).cloned().collect();
                sized.sort_by_key(|m| m.size());
                for m in sized {
                    if classes.classify(&m, &Coloring::new()).1 {
                        out.push(m);
                    }
                }
                out
            }
        }
    }

    fn graphs_up_to(&self, max_size: usize) -> Vec<Arc<FinStructure>> {
        let degree_cap: Option<usize> = match &self.kind {
            ClassKind::KLocalGraph { kappa } => Some(*kappa as usize - 1),
            _ => None,
        };
        let empty = Arc::new(
            FinStructure::relational(self.vocab.clone(), BTreeSet::new(), alloc::vec![BTreeSet::new()])
                .unwrap(),
        );
        let mut out: Vec<Arc<FinStructure>> = alloc::vec![empty.clone()];
        let mut level: Vec<Arc<FinStructure>> = alloc::vec![empty];
        for size in 1..=max_size {
            let mut classes = IsoClasses::new();
            let mut next: Vec<Arc<FinStructure>> = Vec::new();
            let fresh = (size - 1) as Elem;
            for g in &level {
                let verts: Vec<Elem> = g.elements().collect();
                for nbhd in subsets_of(&verts) {
                    if let Some(cap) = degree_cap {
                        if nbhd.len() > cap
                            || nbhd.iter().any(|&v| graph_degree(g, v) + 1 > cap)
                        {
                            continue;
                        }
                    }
                    let mut universe: BTreeSet<Elem> = g.universe().clone();
                    universe.insert(fresh);
                    let mut table = g.relation(0).clone();
                    for &v in &nbhd {
                        table.insert(alloc::vec![v, fresh]);
                        table.insert(alloc::vec![fresh, v]);
                    }
                    let cand = Arc::new(
                        FinStructure::relational(self.vocab.clone(), universe, alloc::vec![table])
                            .unwrap(),
                    );
                    if classes.classify(&cand, &Coloring::new()).1 {
                        next.push(cand);
                    }
                }
            }
            out.extend(next.iter().cloned());
            level = next;
        }
        out
    }

    fn multigraphs_up_to(&self, max_size: usize) -> Vec<Arc<FinStructure>> {
        let mut out = Vec::new();
        let mut classes = IsoClasses::new();
        for total in 0..=max_size {
            for nv in (0..=total).rev() {
                let ne = total - nv;
                if nv == 0 && ne > 0 {
                    continue;
                }
                let vertices: Vec<Elem> = (0..nv as Elem).collect();
                // Each edge id gets an ordered endpoint pair.
                let mut assignments: Vec<Vec<(Elem, Elem)>> = alloc::vec![Vec::new()];
                for _ in 0..ne {
                    let mut grown = Vec::new();
                    for partial in &assignments {
                        for &s in &vertices {
                            for &t in &vertices {
                                let mut next = partial.clone();
                                next.push((s, t));
                                grown.push(next);
                            }
                        }
                    }
                    assignments = grown;
                }
                for rows in assignments {
                    let edges: Vec<(Elem, Elem, Elem)> = rows
                        .iter()
                        .enumerate()
                        .map(|(i, &(s, t))| ((nv + i) as Elem, s, t))
                        .collect();
                    let cand = Arc::new(multigraph_structure(&vertices, &edges));
                    if classes.classify(&cand, &Coloring::new()).1 {
                        out.push(cand);
                    }
                }
            }
        }
        out.sort_by_key(|m| m.size());
        out
    }

    /// Strong extensions `m -> N` with `|N| <= max_size`, up to isomorphism
    /// over `m` (fixing `m` pointwise). The identity extension comes first.
    pub fn extensions(&self, m: &Arc<FinStructure>, max_size: usize) -> Vec<Embedding> {
        let mut out = alloc::vec![Embedding::identity(m.clone())];
        if m.size() >= max_size {
            return out;
        }
        match &self.kind {
            ClassKind::FinSet => {
                let mut current = m.clone();
                while current.size() < max_size {
                    let mut universe = current.universe().clone();
                    universe.insert(current.fresh_elem());
                    current = Arc::new(
                        FinStructure::relational(self.vocab.clone(), universe, Vec::new()).unwrap(),
                    );
                    out.push(
                        Embedding::from_parts(
                            m.clone(),
                            current.clone(),
                            m.elements().map(|e| (e, e)).collect(),
                        )
                        .unwrap(),
                    );
                }
                out
            }
            ClassKind::Graph | ClassKind::KLocalGraph { .. } => {
                let degree_cap: Option<usize> = match &self.kind {
                    ClassKind::KLocalGraph { kappa } => Some(*kappa as usize - 1),
                    _ => None,
                };
                let mut classes = IsoClasses::new();
                let base_colors = |g: &Arc<FinStructure>| -> Coloring {
                    g.elements()
                        .map(|e| (e, if m.universe().contains(&e) { e as u64 + 1 } else { 0 }))
                        .collect()
                };
                classes.classify(m, &base_colors(m));
                let mut level: Vec<Arc<FinStructure>> = alloc::vec![m.clone()];
                while let Some(g) = level.first().map(|g| g.size()) {
                    if g >= max_size {
                        break;
                    }
                    let mut next = Vec::new();
                    for g in &level {
                        let fresh = g.fresh_elem();
                        let verts: Vec<Elem> = g.elements().collect();
                        for nbhd in subsets_of(&verts) {
                            if let Some(cap) = degree_cap {
                                if nbhd.len() > cap
                                    || nbhd.iter().any(|&v| graph_degree(g, v) + 1 > cap)
                                {
                                    continue;
                                }
                            }
                            let mut universe = g.universe().clone();
                            universe.insert(fresh);
                            let mut table = g.relation(0).clone();
                            for &v in &nbhd {
                                table.insert(alloc::vec![v, fresh]);
                                table.insert(alloc::vec![fresh, v]);
                            }
                            let cand = Arc::new(
                                FinStructure::relational(
                                    self.vocab.clone(),
                                    universe,
                                    alloc::vec![table],
                                )
                                .unwrap(),
                            );
                            if classes.classify(&cand, &base_colors(&cand)).1 {
                                out.push(
                                    Embedding::from_parts(
                                        m.clone(),
                                        cand.clone(),
                                        m.elements().map(|e| (e, e)).collect(),
                                    )
                                    .unwrap(),
                                );
                                next.push(cand);
                            }
                        }
                    }
                    level = next;
                }
                out
            }
            ClassKind::Multigraph => {
                let mut classes = IsoClasses::new();
                let base_colors = |g: &Arc<FinStructure>| -> Coloring {
                    g.elements()
                        .map(|e| (e, if m.universe().contains(&e) { e as u64 + 1 } else { 0 }))
                        .collect()
                };
                classes.classify(m, &base_colors(m));
                let mut level: Vec<Arc<FinStructure>> = alloc::vec![m.clone()];
                while level.first().map(|g| g.size()).is_some_and(|s| s < max_size) {
                    let mut next = Vec::new();
                    for g in &level {
                        for cand in multigraph_one_point_extensions(g) {
                            let cand = Arc::new(cand);
                            if classes.classify(&cand, &base_colors(&cand)).1 {
                                out.push(
                                    Embedding::from_parts(
                                        m.clone(),
                                        cand.clone(),
                                        m.elements().map(|e| (e, e)).collect(),
                                    )
                                    .unwrap(),
                                );
                                next.push(cand);
                            }
                        }
                    }
                    level = next;
                }
                out
            }
            ClassKind::VecSpace { p } => {
                let mut factors: Vec<u32> = Vec::new();
                loop {
                    factors.push(*p);
                    let order = m.size() * factors.iter().map(|&x| x as usize).product::<usize>();
                    if order > max_size {
                        break;
                    }
                    let (prod, emb) = abelian_product_with_embedding(m, &factors);
                    let _ = prod;
                    out.push(emb);
                }
                out
            }
            ClassKind::Module { n } => {
                let factors: Vec<u32> =
                    (2..=*n).filter(|d| n % d == 0 && is_prime_power(*d)).collect();
                let mut shapes: Vec<Vec<u32>> = alloc::vec![Vec::new()];
                let mut frontier: Vec<Vec<u32>> = alloc::vec![Vec::new()];
                while let Some(shape) = frontier.pop() {
                    let start = shape.last().copied().unwrap_or(2);
                    for &d in factors.iter().filter(|&&d| d >= start) {
                        let order: usize = m.size()
                            * shape.iter().map(|&x| x as usize).product::<usize>()
                            * d as usize;
                        if order <= max_size {
                            let mut nxt = shape.clone();
                            nxt.push(d);
                            shapes.push(nxt.clone());
                            frontier.push(nxt);
                        }
                    }
                }
                shapes.sort_by_key(|s| {
                    (s.iter().map(|&x| x as usize).product::<usize>(), s.clone())
                });
                for shape in shapes.iter().skip(1) {
                    out.push(abelian_product_with_embedding(m, shape).1);
                }
                out
            }
            ClassKind::User { .. } => {
                let mut classes = IsoClasses::new();
                let m_colors: Coloring = m.elements().map(|e| (e, e as u64 + 1)).collect();
                classes.classify(m, &m_colors);
                for member in self.members_up_to(max_size) {
                    if member.size() <= m.size() {
                        continue;
                    }
                    for emb in enumerate_embeddings(m, &member) {
                        let colors: Coloring = member
                            .elements()
                            .map(|e| (e, emb.preimage(e).map_or(0, |p| p as u64 + 1)))
                            .collect();
                        if classes.classify(&member, &colors).1 {
                            out.push(emb);
                        }
                    }
                }
                out
            }
        }
    }

    /// Subsets of `n`'s universe that carry strong substructures, smallest
    /// first. For the algebraic classes these are the subgroups; for the
    /// relational ones, the induced subsets that satisfy membership.
    pub fn strong_subsets(&self, n: &FinStructure) -> Vec<BTreeSet<Elem>> {
        match &self.kind {
            ClassKind::VecSpace { .. } | ClassKind::Module { .. } => subgroups(n),
            _ => {
                let elems: Vec<Elem> = n.elements().collect();
                subsets_of(&elems)
                    .into_iter()
                    .filter(|s| {
                        n.substructure_on(s)
                            .is_some_and(|sub| self.contains(&sub))
                    })
                    .collect()
            }
        }
    }

    /// The smallest strong substructure of `n` containing `seed`, if any:
    /// the induced structure on the function closure of the seed (for the
    /// algebraic classes that closure is the generated subgroup).
    pub fn tight_substructure(
        &self,
        n: &FinStructure,
        seed: &BTreeSet<Elem>,
    ) -> Option<FinStructure> {
        let closed = n.generated_subset(seed);
        let sub = n.substructure_on(&closed)?;
        if self.contains(&sub) {
            Some(sub)
        } else {
            None
        }
    }

    /// The minimal member every structure maps out of: the empty structure
    /// for relational classes, the zero group for the algebraic ones.
    pub fn initial_member(&self) -> Option<Arc<FinStructure>> {
        match &self.kind {
            ClassKind::FinSet | ClassKind::Graph | ClassKind::KLocalGraph { .. } => Some(Arc::new(
                FinStructure::relational(self.vocab.clone(), BTreeSet::new(), alloc::vec![
                    BTreeSet::new();
                    self.vocab.relations().len()
                ])
                .unwrap(),
            )),
            ClassKind::Multigraph => Some(Arc::new(multigraph_structure(&[], &[]))),
            ClassKind::VecSpace { .. } | ClassKind::Module { .. } => {
                Some(Arc::new(cyclic_product(&[])))
            }
            ClassKind::User { .. } => None,
        }
    }

    /// Does the class provide a pushout construction? (The degree-bounded
    /// graphs only do for kappa = 2, where overloaded vertices force a
    /// unique pairwise merge of their pendant neighbours.)
    pub fn has_pushouts(&self) -> bool {
        matches!(
            &self.kind,
            ClassKind::FinSet
                | ClassKind::Graph
                | ClassKind::Multigraph
                | ClassKind::VecSpace { .. }
                | ClassKind::Module { .. }
                | ClassKind::KLocalGraph { kappa: 2 }
        )
    }

    /// Size of a codomain that suffices to glue two structures of sizes `a`
    /// and `b` along a common part: the sum for the relational classes, the
    /// product for the algebraic ones (the glue is generated, not a union).
    pub fn joint_size_bound(&self, a: usize, b: usize) -> usize {
        match &self.kind {
            ClassKind::VecSpace { .. } | ClassKind::Module { .. } => (a * b).max(1),
            _ => a + b,
        }
    }

    /// Can amalgams be enumerated as quotients of the set-level glue (no
    /// fresh elements ever needed)? True for the relational classes; user
    /// classes qualify only with a purely relational vocabulary (function
    /// congruences beyond unary are not propagated by the glue engine).
    pub fn glue_enumerable(&self) -> bool {
        match &self.kind {
            ClassKind::FinSet
            | ClassKind::Graph
            | ClassKind::KLocalGraph { .. }
            | ClassKind::Multigraph => true,
            ClassKind::User { .. } => self.vocab.functions().is_empty(),
            ClassKind::VecSpace { .. } | ClassKind::Module { .. } => false,
        }
    }

    /// Relation indices that membership forces to be symmetric (used to
    /// group free slots during glue enumeration).
    pub fn symmetric_binary_relations(&self) -> Vec<usize> {
        match &self.kind {
            ClassKind::Graph | ClassKind::KLocalGraph { .. } => alloc::vec![0],
            _ => Vec::new(),
        }
    }

    /// Default local-character size budget registered for the class.
    pub fn registered_lambda(&self) -> LambdaFn {
        match &self.kind {
            ClassKind::FinSet => LambdaFn::Linear { mul: 1, add: 0 },
            ClassKind::Graph => LambdaFn::Linear { mul: 2, add: 0 },
            ClassKind::KLocalGraph { kappa } => LambdaFn::Linear { mul: *kappa, add: 0 },
            ClassKind::Multigraph => LambdaFn::Linear { mul: 3, add: 0 },
            ClassKind::VecSpace { p } => LambdaFn::Exp { base: *p },
            ClassKind::Module { n } => LambdaFn::Exp { base: *n },
            ClassKind::User { .. } => LambdaFn::Linear { mul: 1, add: 1 },
        }
    }

    /// Are the per-class Galois-type certificates exact for this class?
    pub fn certificates_complete(&self) -> bool {
        match &self.kind {
            ClassKind::FinSet
            | ClassKind::Graph
            | ClassKind::Multigraph
            | ClassKind::VecSpace { .. }
            | ClassKind::Module { .. } => true,
            ClassKind::KLocalGraph { kappa } => *kappa == 2,
            ClassKind::User { .. } => false,
        }
    }
}

fn is_prime_power(d: u32) -> bool {
    let mut d = d;
    for p in 2..=d {
        if d % p == 0 {
            while d % p == 0 {
                d /= p;
            }
            return d == 1;
        }
    }
    false
}

/// Abelian group axioms plus exponent dividing `n` (so an F_n-vector space
/// when `n` is prime, a Z/n-module in general).
fn is_bounded_exponent_abelian(m: &FinStructure, n: u32) -> bool {
    let (Some(add), Some(neg), Some(zero)) = (
        m.vocab().function_index("add"),
        m.vocab().function_index("neg"),
        m.vocab().function_index("zero"),
    ) else {
        return false;
    };
    if m.universe().is_empty() {
        return false;
    }
    let z = m.apply(zero, &[]);
    let elems: Vec<Elem> = m.elements().collect();
    for &x in &elems {
        if m.apply(add, &[x, z]) != x || m.apply(add, &[x, m.apply(neg, &[x])]) != z {
            return false;
        }
        let mut acc = z;
        for _ in 0..n {
            acc = m.apply(add, &[acc, x]);
        }
        if acc != z {
            return false;
        }
        for &y in &elems {
            if m.apply(add, &[x, y]) != m.apply(add, &[y, x]) {
                return false;
            }
            for &w in &elems {
                if m.apply(add, &[m.apply(add, &[x, y]), w])
                    != m.apply(add, &[x, m.apply(add, &[y, w])])
                {
                    return false;
                }
            }
        }
    }
    true
}

pub fn is_graph(m: &FinStructure) -> bool {
    let e = 0;
    m.relation(e).iter().all(|t| {
        t[0] != t[1] && m.has_tuple(e, &[t[1], t[0]])
    })
}

pub fn graph_degree(m: &FinStructure, v: Elem) -> usize {
    m.relation(0).iter().filter(|t| t[0] == v).count()
}

pub fn graph_adjacent(m: &FinStructure, a: Elem, b: Elem) -> bool {
    m.has_tuple(0, &[a, b])
}

fn is_multigraph(m: &FinStructure) -> bool {
    let (v_rel, e_rel) = (0, 1);
    let (src, tgt) = (0, 1);
    m.elements().all(|x| {
        let is_v = m.has_tuple(v_rel, &[x]);
        let is_e = m.has_tuple(e_rel, &[x]);
        if is_v == is_e {
            return false; // sorts must partition the universe
        }
        if is_v {
            m.apply(src, &[x]) == x && m.apply(tgt, &[x]) == x
        } else {
            let s = m.apply(src, &[x]);
            let t = m.apply(tgt, &[x]);
            m.has_tuple(v_rel, &[s]) && m.has_tuple(v_rel, &[t])
        }
    })
}

fn multigraph_one_point_extensions(g: &FinStructure) -> Vec<FinStructure> {
    let fresh = g.fresh_elem();
    let mut out = Vec::new();
    let verts: Vec<Elem> = g
        .elements()
        .filter(|&x| g.has_tuple(0, &[x]))
        .collect();
    let mut push = |vertex: bool, s: Elem, t: Elem| {
        let mut universe = g.universe().clone();
        universe.insert(fresh);
        let mut vs = g.relation(0).clone();
        let mut es = g.relation(1).clone();
        let mut src = g.function(0).clone();
        let mut tgt = g.function(1).clone();
        if vertex {
            vs.insert(alloc::vec![fresh]);
            src.insert(alloc::vec![fresh], fresh);
            tgt.insert(alloc::vec![fresh], fresh);
        } else {
            es.insert(alloc::vec![fresh]);
            src.insert(alloc::vec![fresh], s);
            tgt.insert(alloc::vec![fresh], t);
        }
        out.push(
            FinStructure::new(
                g.vocab().clone(),
                universe,
                alloc::vec![vs, es],
                alloc::vec![src, tgt],
            )
            .unwrap(),
        );
    };
    push(true, fresh, fresh);
    for &s in &verts {
        for &t in &verts {
            push(false, s, t);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn finset_members_bound_two() {
        let c = make_class(ClassKind::FinSet).unwrap();
        assert_eq!(c.members_up_to(2).len(), 3); // sizes 0, 1, 2
    }

    #[test]
    fn graph_member_counts_match_unlabeled_counts() {
        // 1, 1, 2, 4, 11 graphs on 0..=4 unlabeled vertices.
        let c = make_class(ClassKind::Graph).unwrap();
        assert_eq!(c.members_up_to(3).len(), 1 + 1 + 2 + 4);
        assert_eq!(c.members_up_to(4).len(), 1 + 1 + 2 + 4 + 11);
    }

    #[test]
    fn degree_bounded_graphs_are_matchings() {
        let c = make_class(ClassKind::KLocalGraph { kappa: 2 }).unwrap();
        let members = c.members_up_to(3);
        // Oracle: filter the full graph enumeration by max degree <= 1.
        let g = make_class(ClassKind::Graph).unwrap();
        let filtered = g
            .members_up_to(3)
            .iter()
            .filter(|m| m.elements().all(|v| graph_degree(m, v) <= 1))
            .count();
        assert_eq!(members.len(), filtered);
        assert!(members.iter().all(|m| c.contains(m)));
    }

    #[test]
    fn vecspace_members_are_one_per_dimension() {
        let c = make_class(ClassKind::VecSpace { p: 2 }).unwrap();
        let members = c.members_up_to(4);
        assert_eq!(
            members.iter().map(|m| m.size()).collect::<Vec<_>>(),
            vec![1, 2, 4]
        );
        assert!(members.iter().all(|m| c.contains(m)));
    }

    #[test]
    fn module_members_by_invariant_factors() {
        let c = make_class(ClassKind::Module { n: 4 }).unwrap();
        let sizes: Vec<usize> = c.members_up_to(16).iter().map(|m| m.size()).collect();
        assert_eq!(sizes, vec![1, 2, 4, 4, 8, 8, 16, 16, 16]);
    }

    #[test]
    fn multigraph_members_small() {
        let c = make_class(ClassKind::Multigraph).unwrap();
        // empty; one vertex; (two vertices | vertex with loop edge).
        assert_eq!(c.members_up_to(2).len(), 4);
        assert!(c.members_up_to(3).iter().all(|m| c.contains(m)));
    }

    #[test]
    fn composite_characteristic_rejected() {
        assert!(make_class(ClassKind::VecSpace { p: 4 }).is_err());
        assert!(class_from_name("vecspace:5").is_ok());
        assert!(class_from_name("nosuch").is_err());
    }

    #[test]
    fn strong_embeddings_accept_identities_and_compose() {
        for name in ["finset", "graph", "klocal_graph:2", "vecspace:2"] {
            let c = class_from_name(name).unwrap();
            let members = c.members_up_to(3);
            for m in &members {
                assert!(c.is_strong(&Embedding::identity(m.clone())));
            }
            for a in &members {
                for b in &members {
                    for f in crate::structures::map::enumerate_embeddings(a, b) {
                        for m3 in &members {
                            for g in crate::structures::map::enumerate_embeddings(b, m3) {
                                assert!(c.is_strong(&f.then(&g).unwrap()));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn subgroup_count_of_klein_four() {
        let v = cyclic_product(&[2, 2]);
        assert_eq!(subgroups(&v).len(), 5);
    }

    #[test]
    fn cyclic_product_is_a_module() {
        let c = make_class(ClassKind::Module { n: 4 }).unwrap();
        assert!(c.contains(&cyclic_product(&[2, 4])));
        // Exponent 8 is not allowed for module:4.
        assert!(!c.contains(&cyclic_product(&[8])));
    }

    #[test]
    fn graph_extensions_fix_the_base_pointwise() {
        let c = make_class(ClassKind::Graph).unwrap();
        let edge = Arc::new(graph_structure(&[0, 1], &[(0, 1)]));
        let exts = c.extensions(&edge, 3);
        // identity, then one-vertex extensions: fresh vertex adjacent to
        // {}, {0}, {1}, {0,1} -- but {0} and {1} are isomorphic over the
        // edge... they are not: the colors pin base elements individually,
        // and indeed swapping 0 and 1 is an automorphism of the edge, so
        // the two pendant extensions are isomorphic over the base only via
        // that automorphism, which the pointwise colors forbid. Expect 5.
        assert_eq!(exts.len(), 5);
        for e in &exts {
            assert!(edge.elements().all(|x| e.apply(x) == x));
            assert!(c.is_strong(e));
        }
    }

    #[test]
    fn coherence_holds_for_builtins_small() {
        for name in ["finset", "graph", "vecspace:2"] {
            let c = class_from_name(name).unwrap();
            let report = check_coherence(&c, 3);
            assert_eq!(report.verdict, crate::report::Verdict::Holds, "{name}");
        }
    }
}

/// Exhaustive coherence check: whenever `M0` is a substructure of `M1`, both
/// strongly embed in some `M2`, and the `M0 -> M2` composite is strong, the
/// inclusion `M0 -> M1` must be strong as well. For the built-ins this is
/// immediate (strong = embedding); the sweep documents it and guards user
/// classes.
pub fn check_coherence(
    class: &ClassHandle,
    max_size: usize,
) -> crate::report::CheckReport {
    use crate::report::{BoundCertificate, CheckReport, Witness};
    let mut configs = 0u64;
    for m2 in class.members_up_to(max_size) {
        for subset1 in class.strong_subsets(&m2) {
            let Some(m1) = m2.substructure_on(&subset1) else { continue };
            if !class.contains(&m1) {
                continue;
            }
            let m1 = Arc::new(m1);
            for subset0 in subsets_of(&subset1.iter().copied().collect::<Vec<_>>()) {
                let Some(m0) = m2.substructure_on(&subset0) else { continue };
                if !class.contains(&m0) {
                    continue;
                }
                configs += 1;
                let m0 = Arc::new(m0);
                // m0 <= m2 strong and m0 a substructure of m1: coherence
                // demands m0 <= m1 strong, i.e. the inclusion is an embedding
                // and is strong.
                let incl = StructMap::new(
                    m0.clone(),
                    m1.clone(),
                    m0.elements().map(|e| (e, e)).collect(),
                );
                let ok = incl.is_ok_and(|map| {
                    map.is_injective()
                        && map.is_homomorphism()
                        && map.reflects_relations()
                        && class.contains(&m0)
                        && class.contains(&m1)
                });
                if !ok {
                    return CheckReport::fails(
                        alloc::vec![Witness::structures(
                            "coherence violation: inner inclusion is not strong",
                            alloc::vec![
                                ("M0".into(), (*m0).clone()),
                                ("M1".into(), (*m1).clone()),
                                ("M2".into(), (*m2).clone())
                            ],
                        )],
                        configs,
                        Some(BoundCertificate::sizes(max_size)),
                    );
                }
            }
        }
    }
    CheckReport::holds(BoundCertificate::sizes(max_size), configs)
}
