//! Rooted planar trees, subtrees, grafting and vertex substitution.
//!
//! A tree is either [`PlanarTree::Eta`], the tree with a single edge and no
//! vertex, or a rooted vertex whose ordered inputs are leaves or further
//! vertices. Vertices and leaves carry integer identifiers that survive
//! grafting and substitution, so vertex sets (brackets, images of corollas)
//! can be transported along compositions.

use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LeafId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// An edge, named by the vertex it leaves or by the leaf it is.
///
/// The root edge of a rooted tree is `Out(root)`; the root edge of `Eta` is
/// its unique leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Edge {
    Out(VertexId),
    Leaf(LeafId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: VertexId,
    pub inputs: Vec<Input>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Input {
    Leaf(LeafId),
    Vertex(Vertex),
}

impl Input {
    pub fn edge(&self) -> Edge {
        match self {
            Input::Leaf(l) => Edge::Leaf(*l),
            Input::Vertex(v) => Edge::Out(v.id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanarTree {
    Eta(LeafId),
    Rooted(Vertex),
}

/// Identifier-free shape of a planar tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Shape {
    Eta,
    Node(Vec<ShapeInput>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ShapeInput {
    Leaf,
    Node(Vec<ShapeInput>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("leaf index {index} out of range for a tree with {leaves} leaves")]
    LeafOutOfRange { index: usize, leaves: usize },
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("arity mismatch: vertex has {vertex} inputs, inserted tree has {leaves} leaves")]
    ArityMismatch { vertex: usize, leaves: usize },
    #[error("not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("vertex set is not a subtree: {0}")]
    NotASubtree(String),
    #[error("subtrees belong to different trees")]
    DifferentParents,
    #[error("malformed tree json: {0}")]
    Json(String),
}

/// Lookup tables for one tree, built by a single traversal.
#[derive(Debug, Clone)]
pub struct TreeIndex {
    /// Vertices in planar depth-first (pre-)order.
    pub vertices: Vec<VertexId>,
    /// Leaves in planar order.
    pub leaves: Vec<LeafId>,
    pub root: Edge,
    parent: BTreeMap<VertexId, Option<(VertexId, usize)>>,
    inputs: BTreeMap<VertexId, Vec<Edge>>,
    leaf_parent: BTreeMap<LeafId, Option<(VertexId, usize)>>,
}

impl TreeIndex {
    pub fn contains(&self, v: VertexId) -> bool {
        self.inputs.contains_key(&v)
    }

    pub fn arity(&self, v: VertexId) -> usize {
        self.inputs[&v].len()
    }

    /// Input edges of `v` in planar order.
    pub fn inputs(&self, v: VertexId) -> &[Edge] {
        &self.inputs[&v]
    }

    /// The vertex below `v` together with the slot `v` occupies there.
    pub fn parent(&self, v: VertexId) -> Option<(VertexId, usize)> {
        self.parent[&v]
    }

    /// The vertex an edge enters from above (its lower end), if any.
    pub fn below(&self, e: Edge) -> Option<(VertexId, usize)> {
        match e {
            Edge::Out(v) => self.parent[&v],
            Edge::Leaf(l) => self.leaf_parent[&l],
        }
    }

    /// The vertex an edge leaves (its upper end), if any.
    pub fn above(&self, e: Edge) -> Option<VertexId> {
        match e {
            Edge::Out(v) => Some(v),
            Edge::Leaf(_) => None,
        }
    }

    pub fn leaf_position(&self, l: LeafId) -> Option<usize> {
        self.leaves.iter().position(|x| *x == l)
    }

    pub fn vertex_position(&self, v: VertexId) -> Option<usize> {
        self.vertices.iter().position(|x| *x == v)
    }

    /// All edges: the root first, then inner edges and leaves in preorder.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = vec![self.root];
        for v in &self.vertices {
            out.extend(self.inputs[v].iter().copied());
        }
        out
    }

    pub fn inner_edges(&self) -> Vec<Edge> {
        self.vertices
            .iter()
            .filter(|v| self.parent[v].is_some())
            .map(|v| Edge::Out(*v))
            .collect()
    }

    /// Vertices strictly above `v` (the vertices of the branch it carries).
    pub fn descendants(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            for e in self.inputs[&x].iter().rev() {
                if let Edge::Out(c) = e {
                    out.push(*c);
                    stack.push(*c);
                }
            }
        }
        out
    }
}

impl PlanarTree {
    pub fn eta() -> PlanarTree {
        PlanarTree::Eta(LeafId(0))
    }

    /// The corolla `C_n` with vertex 0 and leaves 0..n.
    pub fn corolla(n: usize) -> PlanarTree {
        PlanarTree::Rooted(Vertex {
            id: VertexId(0),
            inputs: (0..n).map(|i| Input::Leaf(LeafId(i as u32))).collect(),
        })
    }

    /// Builds a tree from a shape, numbering vertices in preorder and
    /// leaves in planar order, both from 0.
    pub fn from_shape(shape: &Shape) -> PlanarTree {
        fn build(inputs: &[ShapeInput], nv: &mut u32, nl: &mut u32) -> Vertex {
            let id = VertexId(*nv);
            *nv += 1;
            let inputs = inputs
                .iter()
                .map(|s| match s {
                    ShapeInput::Leaf => {
                        let l = LeafId(*nl);
                        *nl += 1;
                        Input::Leaf(l)
                    }
                    ShapeInput::Node(ch) => Input::Vertex(build(ch, nv, nl)),
                })
                .collect();
            Vertex { id, inputs }
        }
        match shape {
            Shape::Eta => PlanarTree::eta(),
            Shape::Node(inputs) => PlanarTree::Rooted(build(inputs, &mut 0, &mut 0)),
        }
    }

    pub fn shape(&self) -> Shape {
        fn go(v: &Vertex) -> Vec<ShapeInput> {
            v.inputs
                .iter()
                .map(|i| match i {
                    Input::Leaf(_) => ShapeInput::Leaf,
                    Input::Vertex(c) => ShapeInput::Node(go(c)),
                })
                .collect()
        }
        match self {
            PlanarTree::Eta(_) => Shape::Eta,
            PlanarTree::Rooted(v) => Shape::Node(go(v)),
        }
    }

    pub fn is_eta(&self) -> bool {
        matches!(self, PlanarTree::Eta(_))
    }

    pub fn root_vertex(&self) -> Option<&Vertex> {
        match self {
            PlanarTree::Eta(_) => None,
            PlanarTree::Rooted(v) => Some(v),
        }
    }

    pub fn root_edge(&self) -> Edge {
        match self {
            PlanarTree::Eta(l) => Edge::Leaf(*l),
            PlanarTree::Rooted(v) => Edge::Out(v.id),
        }
    }

    pub fn index(&self) -> TreeIndex {
        let mut ix = TreeIndex {
            vertices: Vec::new(),
            leaves: Vec::new(),
            root: self.root_edge(),
            parent: BTreeMap::new(),
            inputs: BTreeMap::new(),
            leaf_parent: BTreeMap::new(),
        };
        fn go(v: &Vertex, parent: Option<(VertexId, usize)>, ix: &mut TreeIndex) {
            ix.vertices.push(v.id);
            ix.parent.insert(v.id, parent);
            ix.inputs
                .insert(v.id, v.inputs.iter().map(Input::edge).collect());
            for (slot, inp) in v.inputs.iter().enumerate() {
                match inp {
                    Input::Leaf(l) => {
                        ix.leaves.push(*l);
                        ix.leaf_parent.insert(*l, Some((v.id, slot)));
                    }
                    Input::Vertex(c) => go(c, Some((v.id, slot)), ix),
                }
            }
        }
        match self {
            PlanarTree::Eta(l) => {
                ix.leaves.push(*l);
                ix.leaf_parent.insert(*l, None);
            }
            PlanarTree::Rooted(v) => go(v, None, &mut ix),
        }
        ix
    }

    /// Vertices in preorder.
    pub fn vertices(&self) -> Vec<VertexId> {
        fn go(v: &Vertex, out: &mut Vec<VertexId>) {
            out.push(v.id);
            for i in &v.inputs {
                if let Input::Vertex(c) = i {
                    go(c, out);
                }
            }
        }
        let mut out = Vec::new();
        if let PlanarTree::Rooted(r) = self {
            go(r, &mut out);
        }
        out
    }

    /// Leaves in planar order.
    pub fn leaves(&self) -> Vec<LeafId> {
        fn go(v: &Vertex, out: &mut Vec<LeafId>) {
            for i in &v.inputs {
                match i {
                    Input::Leaf(l) => out.push(*l),
                    Input::Vertex(c) => go(c, out),
                }
            }
        }
        match self {
            PlanarTree::Eta(l) => vec![*l],
            PlanarTree::Rooted(r) => {
                let mut out = Vec::new();
                go(r, &mut out);
                out
            }
        }
    }

    pub fn vertex_count(&self) -> usize {
        fn go(v: &Vertex) -> usize {
            1 + v
                .inputs
                .iter()
                .map(|i| match i {
                    Input::Leaf(_) => 0,
                    Input::Vertex(c) => go(c),
                })
                .sum::<usize>()
        }
        self.root_vertex().map_or(0, go)
    }

    pub fn leaf_count(&self) -> usize {
        fn go(v: &Vertex) -> usize {
            v.inputs
                .iter()
                .map(|i| match i {
                    Input::Leaf(_) => 1,
                    Input::Vertex(c) => go(c),
                })
                .sum()
        }
        self.root_vertex().map_or(1, go)
    }

    /// Large trees have at least two vertices.
    pub fn is_large(&self) -> bool {
        self.vertex_count() >= 2
    }

    pub fn find(&self, id: VertexId) -> Option<&Vertex> {
        fn go(v: &Vertex, id: VertexId) -> Option<&Vertex> {
            if v.id == id {
                return Some(v);
            }
            v.inputs.iter().find_map(|i| match i {
                Input::Vertex(c) => go(c, id),
                Input::Leaf(_) => None,
            })
        }
        self.root_vertex().and_then(|r| go(r, id))
    }

    fn find_mut(&mut self, id: VertexId) -> Option<&mut Vertex> {
        fn go(v: &mut Vertex, id: VertexId) -> Option<&mut Vertex> {
            if v.id == id {
                return Some(v);
            }
            v.inputs.iter_mut().find_map(|i| match i {
                Input::Vertex(c) => go(c, id),
                Input::Leaf(_) => None,
            })
        }
        match self {
            PlanarTree::Eta(_) => None,
            PlanarTree::Rooted(r) => go(r, id),
        }
    }

    pub fn arity(&self, id: VertexId) -> Result<usize, TreeError> {
        self.find(id)
            .map(|v| v.inputs.len())
            .ok_or(TreeError::UnknownVertex(id))
    }

    pub fn next_vertex_id(&self) -> u32 {
        self.vertices().iter().map(|v| v.0 + 1).max().unwrap_or(0)
    }

    pub fn next_leaf_id(&self) -> u32 {
        self.leaves().iter().map(|l| l.0 + 1).max().unwrap_or(0)
    }

    /// Shifts every vertex id by `dv` and every leaf id by `dl`.
    pub fn shifted(&self, dv: u32, dl: u32) -> PlanarTree {
        self.relabelled(&|v| VertexId(v.0 + dv), &|l| LeafId(l.0 + dl))
    }

    pub fn relabelled(
        &self,
        fv: &dyn Fn(VertexId) -> VertexId,
        fl: &dyn Fn(LeafId) -> LeafId,
    ) -> PlanarTree {
        fn go(v: &Vertex, fv: &dyn Fn(VertexId) -> VertexId, fl: &dyn Fn(LeafId) -> LeafId) -> Vertex {
            Vertex {
                id: fv(v.id),
                inputs: v
                    .inputs
                    .iter()
                    .map(|i| match i {
                        Input::Leaf(l) => Input::Leaf(fl(*l)),
                        Input::Vertex(c) => Input::Vertex(go(c, fv, fl)),
                    })
                    .collect(),
            }
        }
        match self {
            PlanarTree::Eta(l) => PlanarTree::Eta(fl(*l)),
            PlanarTree::Rooted(v) => PlanarTree::Rooted(go(v, fv, fl)),
        }
    }

    /// Renumbers vertices in preorder and leaves in planar order, returning
    /// the old-to-new maps.
    pub fn renumbered(&self) -> (PlanarTree, BTreeMap<VertexId, VertexId>, BTreeMap<LeafId, LeafId>) {
        let vmap: BTreeMap<_, _> = self
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, v)| (*v, VertexId(i as u32)))
            .collect();
        let lmap: BTreeMap<_, _> = self
            .leaves()
            .iter()
            .enumerate()
            .map(|(i, l)| (*l, LeafId(i as u32)))
            .collect();
        let t = self.relabelled(&|v| vmap[&v], &|l| lmap[&l]);
        (t, vmap, lmap)
    }

    /// Whether ids are exactly the preorder / planar numbering from 0.
    pub fn is_canonically_numbered(&self) -> bool {
        let ix = self.index();
        ix.vertices.iter().enumerate().all(|(i, v)| v.0 == i as u32)
            && ix.leaves.iter().enumerate().all(|(i, l)| l.0 == i as u32)
    }

    /// Grafting `T ∘_i T2`: the root of `t2` is attached at the leaf in
    /// planar position `i`. Vertices and leaves of `t2` get fresh ids.
    pub fn graft(&self, i: usize, t2: &PlanarTree) -> Result<Graft, TreeError> {
        let leaves = self.leaves();
        if i >= leaves.len() {
            return Err(TreeError::LeafOutOfRange { index: i, leaves: leaves.len() });
        }
        let target = leaves[i];
        if let PlanarTree::Eta(_) = t2 {
            return Ok(Graft {
                tree: self.clone(),
                vertex_map: BTreeMap::new(),
                leaf_map: t2.leaves().into_iter().map(|l| (l, target)).collect(),
            });
        }
        let dv = self.next_vertex_id();
        let dl = self.next_leaf_id();
        let moved = t2.shifted(dv, dl);
        let vertex_map = t2.vertices().into_iter().map(|v| (v, VertexId(v.0 + dv))).collect();
        let leaf_map = t2.leaves().into_iter().map(|l| (l, LeafId(l.0 + dl))).collect();
        let PlanarTree::Rooted(new_root) = moved else { unreachable!() };
        let tree = match self {
            PlanarTree::Eta(_) => PlanarTree::Rooted(new_root),
            PlanarTree::Rooted(_) => {
                let mut t = self.clone();
                let ix = self.index();
                let (p, slot) = ix.below(Edge::Leaf(target)).expect("leaf of a rooted tree");
                t.find_mut(p).unwrap().inputs[slot] = Input::Vertex(new_root);
                t
            }
        };
        Ok(Graft { tree, vertex_map, leaf_map })
    }

    /// Permutes the inputs of `v`: the input in position `j` moves to
    /// position `perm[j]`, carrying its branch along.
    pub fn permute_inputs(&self, v: VertexId, perm: &[usize]) -> Result<PlanarTree, TreeError> {
        let mut t = self.clone();
        let node = t.find_mut(v).ok_or(TreeError::UnknownVertex(v))?;
        check_permutation(perm, node.inputs.len())?;
        let mut slots: Vec<Option<Input>> = vec![None; perm.len()];
        for (j, inp) in node.inputs.drain(..).enumerate() {
            slots[perm[j]] = Some(inp);
        }
        node.inputs = slots.into_iter().map(Option::unwrap).collect();
        Ok(t)
    }

    /// Vertex substitution `T •_v T2`: `v` is removed and replaced by `t2`,
    /// whose leaves are identified in planar order with the inputs of `v`.
    /// Vertices of `t2` get fresh ids; all other ids are preserved.
    pub fn substitute(&self, v: VertexId, t2: &PlanarTree) -> Result<Substitution, TreeError> {
        let node = self.find(v).ok_or(TreeError::UnknownVertex(v))?;
        let l2 = t2.leaf_count();
        if node.inputs.len() != l2 {
            return Err(TreeError::ArityMismatch { vertex: node.inputs.len(), leaves: l2 });
        }
        let (replacement, inserted) = match t2 {
            PlanarTree::Eta(_) => (node.inputs[0].clone(), BTreeMap::new()),
            PlanarTree::Rooted(r2) => {
                let dv = self.next_vertex_id();
                let mut hanging = node.inputs.iter().cloned();
                fn go(
                    x: &Vertex,
                    dv: u32,
                    hanging: &mut dyn Iterator<Item = Input>,
                    map: &mut BTreeMap<VertexId, VertexId>,
                ) -> Vertex {
                    let id = VertexId(x.id.0 + dv);
                    map.insert(x.id, id);
                    let inputs = x
                        .inputs
                        .iter()
                        .map(|i| match i {
                            Input::Leaf(_) => hanging.next().expect("leaf count checked"),
                            Input::Vertex(c) => Input::Vertex(go(c, dv, hanging, map)),
                        })
                        .collect();
                    Vertex { id, inputs }
                }
                let mut map = BTreeMap::new();
                let root = go(r2, dv, &mut hanging, &mut map);
                (Input::Vertex(root), map)
            }
        };
        let tree = if self.root_vertex().is_some_and(|r| r.id == v) {
            match replacement {
                Input::Leaf(l) => PlanarTree::Eta(l),
                Input::Vertex(x) => PlanarTree::Rooted(x),
            }
        } else {
            fn put(x: &mut Vertex, v: VertexId, replacement: &mut Option<Input>) -> bool {
                for i in x.inputs.iter_mut() {
                    if let Input::Vertex(c) = i {
                        if c.id == v {
                            *i = replacement.take().expect("replaced once");
                            return true;
                        }
                        if put(c, v, replacement) {
                            return true;
                        }
                    }
                }
                false
            }
            let mut t = self.clone();
            if let PlanarTree::Rooted(r) = &mut t {
                put(r, v, &mut Some(replacement));
            }
            t
        };
        Ok(Substitution { tree, inserted })
    }

    /// `(τ2)_v T •_v T2`: first the inputs of `v` are permuted so that the
    /// input in position `j` lands on the leaf of `t2` labelled `j`, that
    /// is at planar position `tau2[j]`; then `t2` is substituted.
    pub fn substitute_labelled(
        &self,
        v: VertexId,
        tau2: &[usize],
        t2: &PlanarTree,
    ) -> Result<Substitution, TreeError> {
        let arity = self.arity(v)?;
        let l2 = t2.leaf_count();
        if arity != l2 {
            return Err(TreeError::ArityMismatch { vertex: arity, leaves: l2 });
        }
        let permuted = self.permute_inputs(v, tau2)?;
        permuted.substitute(v, t2)
    }

    /// Parses the JSON tree format: `"eta"`, or `{"node":[...]}` whose
    /// children are `"leaf"` or nested nodes. Nodes may carry an `"id"`.
    pub fn from_json(v: &Value) -> Result<PlanarTree, TreeError> {
        fn node(v: &Value, nv: &mut u32, nl: &mut u32, seen: &mut BTreeSet<u32>) -> Result<Vertex, TreeError> {
            let obj = v
                .as_object()
                .ok_or_else(|| TreeError::Json(format!("expected node object, got {v}")))?;
            let children = obj
                .get("node")
                .and_then(Value::as_array)
                .ok_or_else(|| TreeError::Json("node without \"node\" array".into()))?;
            let id = match obj.get("id") {
                Some(x) => x
                    .as_u64()
                    .map(|x| x as u32)
                    .ok_or_else(|| TreeError::Json("non-integer id".into()))?,
                None => *nv,
            };
            *nv = (*nv).max(id + 1);
            if !seen.insert(id) {
                return Err(TreeError::Json(format!("duplicate vertex id {id}")));
            }
            let mut inputs = Vec::new();
            for c in children {
                if c.as_str() == Some("leaf") {
                    inputs.push(Input::Leaf(LeafId(*nl)));
                    *nl += 1;
                } else {
                    inputs.push(Input::Vertex(node(c, nv, nl, seen)?));
                }
            }
            Ok(Vertex { id: VertexId(id), inputs })
        }
        if v.as_str() == Some("eta") {
            return Ok(PlanarTree::eta());
        }
        Ok(PlanarTree::Rooted(node(v, &mut 0, &mut 0, &mut BTreeSet::new())?))
    }

    /// Canonical JSON. Vertex ids are written only when they differ from
    /// the preorder numbering.
    pub fn to_json(&self) -> Value {
        let with_ids = !self.is_canonically_numbered();
        fn go(v: &Vertex, with_ids: bool) -> Value {
            let children: Vec<Value> = v
                .inputs
                .iter()
                .map(|i| match i {
                    Input::Leaf(_) => Value::String("leaf".into()),
                    Input::Vertex(c) => go(c, with_ids),
                })
                .collect();
            if with_ids {
                json!({"id": v.id.0, "node": children})
            } else {
                json!({ "node": children })
            }
        }
        match self {
            PlanarTree::Eta(_) => Value::String("eta".into()),
            PlanarTree::Rooted(v) => go(v, with_ids),
        }
    }
}

impl fmt::Display for PlanarTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(v: &Vertex, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "{}(", v.id.0)?;
            for (k, i) in v.inputs.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                match i {
                    Input::Leaf(_) => write!(f, "|")?,
                    Input::Vertex(c) => go(c, f)?,
                }
            }
            write!(f, ")")
        }
        match self {
            PlanarTree::Eta(_) => write!(f, "eta"),
            PlanarTree::Rooted(v) => go(v, f),
        }
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<(), TreeError> {
    if perm.len() != n {
        return Err(TreeError::NotAPermutation(n));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(TreeError::NotAPermutation(n));
        }
    }
    Ok(())
}

pub(crate) fn is_permutation(perm: &[usize], n: usize) -> bool {
    check_permutation(perm, n).is_ok()
}

#[derive(Debug, Clone)]
pub struct Graft {
    pub tree: PlanarTree,
    pub vertex_map: BTreeMap<VertexId, VertexId>,
    pub leaf_map: BTreeMap<LeafId, LeafId>,
}

#[derive(Debug, Clone)]
pub struct Substitution {
    pub tree: PlanarTree,
    /// Ids given to the vertices of the inserted tree.
    pub inserted: BTreeMap<VertexId, VertexId>,
}

/// A subtree, given by its (nonempty, connected) vertex set. Subtrees keep
/// every half-edge of their vertices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subtree {
    vertices: BTreeSet<VertexId>,
}

impl Subtree {
    pub fn new(tree: &PlanarTree, vertices: BTreeSet<VertexId>) -> Result<Subtree, TreeError> {
        Self::check(&tree.index(), &vertices)?;
        Ok(Subtree { vertices })
    }

    pub(crate) fn check(ix: &TreeIndex, vertices: &BTreeSet<VertexId>) -> Result<VertexId, TreeError> {
        if vertices.is_empty() {
            return Err(TreeError::NotASubtree("empty vertex set".into()));
        }
        if let Some(v) = vertices.iter().find(|v| !ix.contains(**v)) {
            return Err(TreeError::UnknownVertex(*v));
        }
        let roots: Vec<_> = vertices
            .iter()
            .filter(|v| match ix.parent(**v) {
                Some((p, _)) => !vertices.contains(&p),
                None => true,
            })
            .collect();
        match roots.as_slice() {
            [r] => Ok(**r),
            _ => Err(TreeError::NotASubtree("vertex set is disconnected".into())),
        }
    }

    /// Unchecked constructor for sets already known to be connected.
    pub(crate) fn from_set(vertices: BTreeSet<VertexId>) -> Subtree {
        Subtree { vertices }
    }

    pub fn vertices(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    pub fn into_vertices(self) -> BTreeSet<VertexId> {
        self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_large(&self) -> bool {
        self.vertices.len() >= 2
    }

    pub fn root_vertex(&self, ix: &TreeIndex) -> VertexId {
        Self::check(ix, &self.vertices).expect("valid subtree")
    }

    pub fn root_edge(&self, ix: &TreeIndex) -> Edge {
        Edge::Out(self.root_vertex(ix))
    }

    /// Boundary input edges in planar order.
    pub fn leaves(&self, ix: &TreeIndex) -> Vec<Edge> {
        let mut out = Vec::new();
        fn go(v: VertexId, set: &BTreeSet<VertexId>, ix: &TreeIndex, out: &mut Vec<Edge>) {
            for e in ix.inputs(v) {
                match e {
                    Edge::Out(c) if set.contains(c) => go(*c, set, ix, out),
                    _ => out.push(*e),
                }
            }
        }
        go(self.root_vertex(ix), &self.vertices, ix, &mut out);
        out
    }

    /// Vertices in the planar preorder of the ambient tree.
    pub fn preorder(&self, ix: &TreeIndex) -> Vec<VertexId> {
        ix.vertices.iter().copied().filter(|v| self.vertices.contains(v)).collect()
    }

    /// The subtree as a tree of its own. Vertex ids are kept; leaves are
    /// numbered in planar order and the returned vector names, for each
    /// leaf, the ambient edge it stands for.
    pub fn extract(&self, tree: &PlanarTree) -> (PlanarTree, Vec<Edge>) {
        let ix = tree.index();
        let root = self.root_vertex(&ix);
        let mut boundary = Vec::new();
        fn go(v: VertexId, set: &BTreeSet<VertexId>, ix: &TreeIndex, boundary: &mut Vec<Edge>) -> Vertex {
            let inputs = ix
                .inputs(v)
                .iter()
                .map(|e| match e {
                    Edge::Out(c) if set.contains(c) => Input::Vertex(go(*c, set, ix, boundary)),
                    _ => {
                        boundary.push(*e);
                        Input::Leaf(LeafId(boundary.len() as u32 - 1))
                    }
                })
                .collect();
            Vertex { id: v, inputs }
        }
        let r = go(root, &self.vertices, &ix, &mut boundary);
        (PlanarTree::Rooted(r), boundary)
    }

    pub fn is_nested_with(&self, other: &Subtree) -> bool {
        let common = self.vertices.intersection(&other.vertices).count();
        common == 0 || common == self.len() || common == other.len()
    }
}

/// Whether two subtrees of the same tree are nested or disjoint.
pub fn is_nested(tree_a: &PlanarTree, a: &Subtree, tree_b: &PlanarTree, b: &Subtree) -> Result<bool, TreeError> {
    if tree_a != tree_b {
        return Err(TreeError::DifferentParents);
    }
    Ok(a.is_nested_with(b))
}

/// Replaces the subtree `s` by a single vertex with the same root edge and
/// leaves. The new vertex takes the id of the root vertex of `s`.
pub fn collapse(tree: &PlanarTree, s: &Subtree) -> PlanarTree {
    let ix = tree.index();
    let root = s.root_vertex(&ix);
    fn rebuild(v: &Vertex, s: &BTreeSet<VertexId>, root: VertexId) -> Vertex {
        if v.id == root {
            let mut inputs = Vec::new();
            fn gather(v: &Vertex, s: &BTreeSet<VertexId>, root: VertexId, out: &mut Vec<Input>) {
                for i in &v.inputs {
                    match i {
                        Input::Vertex(c) if s.contains(&c.id) => gather(c, s, root, out),
                        Input::Vertex(c) => out.push(Input::Vertex(rebuild(c, s, root))),
                        Input::Leaf(l) => out.push(Input::Leaf(*l)),
                    }
                }
            }
            gather(v, s, root, &mut inputs);
            return Vertex { id: root, inputs };
        }
        Vertex {
            id: v.id,
            inputs: v
                .inputs
                .iter()
                .map(|i| match i {
                    Input::Vertex(c) => Input::Vertex(rebuild(c, s, root)),
                    Input::Leaf(l) => Input::Leaf(*l),
                })
                .collect(),
        }
    }
    match tree {
        PlanarTree::Eta(_) => tree.clone(),
        PlanarTree::Rooted(r) => PlanarTree::Rooted(rebuild(r, s.vertices(), root)),
    }
}

/// All subtrees with at least `min_vertices` vertices, ordered by their
/// sorted vertex lists.
pub fn enumerate_subtrees(tree: &PlanarTree, min_vertices: usize) -> Vec<Subtree> {
    let ix = tree.index();
    // connected sets having `v` as lowest vertex
    fn rooted(v: VertexId, ix: &TreeIndex) -> Vec<BTreeSet<VertexId>> {
        let mut acc = vec![BTreeSet::from([v])];
        for e in ix.inputs(v) {
            if let Edge::Out(c) = e {
                let above = rooted(*c, ix);
                let mut next = acc.clone();
                for base in &acc {
                    for a in &above {
                        let mut s = base.clone();
                        s.extend(a.iter().copied());
                        next.push(s);
                    }
                }
                acc = next;
            }
        }
        acc
    }
    let mut all: Vec<BTreeSet<VertexId>> = ix
        .vertices
        .iter()
        .flat_map(|v| rooted(*v, &ix))
        .filter(|s| s.len() >= min_vertices.max(1))
        .collect();
    all.sort();
    all.into_iter().map(Subtree::from_set).collect()
}

/// All planar shapes with exactly `n` vertices whose arities lie in
/// `arities`. Inputs may be leaves or vertices.
pub fn enumerate_shapes(n: usize, arities: &[usize]) -> Vec<Shape> {
    fn trees(n: usize, arities: &[usize]) -> Vec<Vec<ShapeInput>> {
        if n == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for &a in arities {
            out.extend(forests(a, n - 1, arities));
        }
        out
    }
    // sequences of `slots` inputs containing exactly `n` vertices in total
    fn forests(slots: usize, n: usize, arities: &[usize]) -> Vec<Vec<ShapeInput>> {
        if slots == 0 {
            return if n == 0 { vec![Vec::new()] } else { Vec::new() };
        }
        let mut out = Vec::new();
        for rest in forests(slots - 1, n, arities) {
            let mut s = vec![ShapeInput::Leaf];
            s.extend(rest);
            out.push(s);
        }
        for k in 1..=n {
            for first in trees(k, arities) {
                for rest in forests(slots - 1, n - k, arities) {
                    let mut s = vec![ShapeInput::Node(first.clone())];
                    s.extend(rest);
                    out.push(s);
                }
            }
        }
        out
    }
    if n == 0 {
        return vec![Shape::Eta];
    }
    trees(n, arities).into_iter().map(Shape::Node).collect()
}

/// All planar trees with `n` vertices and no leaves: every input of a
/// vertex is another vertex.
pub fn enumerate_vertex_trees(n: usize) -> Vec<Shape> {
    fn trees(n: usize) -> Vec<Vec<ShapeInput>> {
        forests(n - 1)
    }
    fn forests(n: usize) -> Vec<Vec<ShapeInput>> {
        if n == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for k in 1..=n {
            for first in trees(k) {
                for rest in forests(n - k) {
                    let mut s = vec![ShapeInput::Node(first.clone())];
                    s.extend(rest);
                    out.push(s);
                }
            }
        }
        out
    }
    if n == 0 {
        return Vec::new();
    }
    trees(n).into_iter().map(Shape::Node).collect()
}

/// The caterpillar with `n` vertices: vertex `j+1` sits on the first input
/// of vertex `j`, and every vertex has `leaves_each` further leaves.
pub fn caterpillar(n: usize, leaves_each: usize) -> PlanarTree {
    let mut inputs: Vec<ShapeInput> = vec![ShapeInput::Leaf; leaves_each + 1];
    for _ in 1..n {
        let mut next = vec![ShapeInput::Node(inputs)];
        next.extend(std::iter::repeat(ShapeInput::Leaf).take(leaves_each));
        inputs = next;
    }
    PlanarTree::from_shape(&Shape::Node(inputs))
}

/// A root vertex carrying `arms` corollas of arity `arm_arity`.
pub fn star(arms: usize, arm_arity: usize) -> PlanarTree {
    let arm = ShapeInput::Node(vec![ShapeInput::Leaf; arm_arity]);
    PlanarTree::from_shape(&Shape::Node(vec![arm; arms]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> PlanarTree {
        PlanarTree::from_json(&serde_json::from_str(s).unwrap()).unwrap()
    }

    #[test]
    fn json_roundtrip_is_stable() {
        let src = r#"{"node":["leaf",{"node":["leaf","leaf"]},{"node":[]}]}"#;
        let t = parse(src);
        assert_eq!(serde_json::to_string(&t.to_json()).unwrap(), src);
        assert_eq!(PlanarTree::from_json(&Value::String("eta".into())).unwrap(), PlanarTree::eta());
    }

    #[test]
    fn graft_corollas() {
        let t = PlanarTree::corolla(2).graft(0, &PlanarTree::corolla(3)).unwrap().tree;
        assert_eq!(t.vertex_count(), 2);
        assert_eq!(t.leaf_count(), 4);
        assert_eq!(
            t.shape(),
            Shape::Node(vec![
                ShapeInput::Node(vec![ShapeInput::Leaf; 3]),
                ShapeInput::Leaf
            ])
        );
    }

    #[test]
    fn graft_eta_is_identity() {
        let t = caterpillar(3, 1);
        for i in 0..t.leaf_count() {
            assert_eq!(t.graft(i, &PlanarTree::eta()).unwrap().tree, t);
        }
        assert!(matches!(t.graft(9, &PlanarTree::eta()), Err(TreeError::LeafOutOfRange { .. })));
    }

    #[test]
    fn substitute_units() {
        let t2 = caterpillar(2, 1);
        let c = PlanarTree::corolla(3);
        assert_eq!(c.substitute(VertexId(0), &t2).unwrap().tree.shape(), t2.shape());
        let t = caterpillar(3, 2);
        for v in t.vertices() {
            let a = t.arity(v).unwrap();
            assert_eq!(t.substitute(v, &PlanarTree::corolla(a)).unwrap().tree.shape(), t.shape());
        }
        assert!(matches!(
            t.substitute(VertexId(0), &PlanarTree::corolla(1)),
            Err(TreeError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn subtree_counts() {
        assert!(enumerate_subtrees(&PlanarTree::corolla(4), 2).is_empty());
        let cat = caterpillar(3, 1);
        let subs: Vec<Vec<u32>> = enumerate_subtrees(&cat, 2)
            .iter()
            .map(|s| s.vertices().iter().map(|v| v.0).collect())
            .collect();
        assert_eq!(subs, vec![vec![0, 1], vec![0, 1, 2], vec![1, 2]]);
        assert_eq!(enumerate_subtrees(&star(3, 2), 2).len(), 7);
    }

    #[test]
    fn nesting() {
        let cat = caterpillar(3, 1);
        let a = Subtree::new(&cat, [VertexId(0), VertexId(1)].into()).unwrap();
        let b = Subtree::new(&cat, [VertexId(1), VertexId(2)].into()).unwrap();
        let c = Subtree::new(&cat, [VertexId(0), VertexId(1), VertexId(2)].into()).unwrap();
        assert!(!is_nested(&cat, &a, &cat, &b).unwrap());
        assert!(is_nested(&cat, &a, &cat, &c).unwrap());
        assert!(Subtree::new(&cat, [VertexId(0), VertexId(2)].into()).is_err());
        assert_eq!(
            is_nested(&cat, &a, &PlanarTree::corolla(2), &a),
            Err(TreeError::DifferentParents)
        );
    }

    #[test]
    fn shape_counts() {
        // planar trees with n unlabelled nodes: Catalan(n-1)
        let counts: Vec<usize> = (1..=6).map(|n| enumerate_vertex_trees(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 14, 42]);
        // binary planar trees with 3 vertices: 5 internal shapes, times leaf placements
        assert_eq!(enumerate_shapes(1, &[2]).len(), 1);
        assert_eq!(enumerate_shapes(2, &[2]).len(), 2);
        assert_eq!(enumerate_shapes(3, &[2]).len(), 5);
    }
}
