//! The Boardman–Vogt W-construction on `O`, its quotient `W₀O`, and the
//! isomorphism `Ψ: W₀O → BO`.
//!
//! A [`WTree`] is a planar "blackboard" tree whose vertices are decorated by
//! elements of `O` and whose inner edges carry lengths in `[0,1]`. The leaves
//! of the blackboard tree are the inputs of the element; `leaf_order[i]` is
//! the leaf carrying input `i`. Input slot `q` of a blackboard vertex
//! corresponds to input label `q` of its decoration.

use crate::bracketings::WeightedBracketing;
use crate::operad::{BOElement, OElement, OperadError};
use crate::rational::{one, q_from_json, q_to_json, zero, Q};
use crate::trees::{collapse, Edge, Input, LeafId, PlanarTree, Subtree, TreeError, TreeIndex, Vertex, VertexId};
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WError {
    #[error("vertex {0} has no decoration")]
    MissingDecoration(VertexId),
    #[error("vertex {vertex} has {inputs} inputs but its decoration has arity {arity}")]
    ArityMismatch { vertex: VertexId, inputs: usize, arity: usize },
    #[error("edge {edge:?} is colored both {first} and {second}")]
    ColorMismatch { edge: Edge, first: usize, second: usize },
    #[error("lengths must be given for exactly the inner edges, within [0,1]")]
    BadLengths,
    #[error("leaf order is not a bijection onto the leaves")]
    BadLeafOrder,
    #[error("slot {slot} out of range for an element with {arity} inputs")]
    SlotOutOfRange { slot: usize, arity: usize },
    #[error("representative is not reduced")]
    NotReduced,
    #[error(transparent)]
    Operad(#[from] OperadError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("malformed W-tree json: {0}")]
    Json(String),
}

/// Which relations are imposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WMode {
    /// Zero-length edges collapse and identity-decorated unary vertices vanish.
    W,
    /// Additionally, every unary and every nullary vertex is absorbed.
    W0,
}

/// A representative `(𝕋, f, λ, s, p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WTree {
    pub shape: PlanarTree,
    pub colors: BTreeMap<Edge, usize>,
    pub leaf_order: Vec<LeafId>,
    /// Keyed by `Edge::Out(v)` for each non-root vertex `v`.
    pub lengths: BTreeMap<Edge, Q>,
    pub decorations: BTreeMap<VertexId, OElement>,
}

impl WTree {
    /// Builds and validates a representative, deriving the edge colors from
    /// the decorations. The shape must have a vertex.
    pub fn new(
        shape: PlanarTree,
        leaf_order: Vec<LeafId>,
        lengths: BTreeMap<Edge, Q>,
        decorations: BTreeMap<VertexId, OElement>,
    ) -> Result<WTree, WError> {
        let colors = derive_colors(&shape, &decorations)?;
        let w = WTree { shape, colors, leaf_order, lengths, decorations };
        w.validate()?;
        Ok(w)
    }

    /// The tree with no vertex: the identity of color `c`.
    pub fn eta(c: usize) -> WTree {
        let shape = PlanarTree::eta();
        let leaf = shape.leaves()[0];
        WTree {
            colors: BTreeMap::from([(Edge::Leaf(leaf), c)]),
            leaf_order: vec![leaf],
            lengths: BTreeMap::new(),
            decorations: BTreeMap::new(),
            shape,
        }
    }

    /// A single vertex decorated by `p`, inputs in label order.
    pub fn corolla(p: OElement) -> WTree {
        let shape = PlanarTree::corolla(p.arity());
        let root = shape.root_vertex().expect("corolla").id;
        let leaf_order = shape.leaves();
        WTree::new(shape, leaf_order, BTreeMap::new(), BTreeMap::from([(root, p)])).expect("corolla is valid")
    }

    pub fn validate(&self) -> Result<(), WError> {
        let ix = self.shape.index();
        let mut sorted: Vec<LeafId> = self.leaf_order.clone();
        sorted.sort();
        let mut leaves = ix.leaves.clone();
        leaves.sort();
        if sorted != leaves || self.leaf_order.len() != leaves.len() {
            return Err(WError::BadLeafOrder);
        }
        if self.shape.is_eta() {
            if self.colors.len() != 1 || !self.decorations.is_empty() || !self.lengths.is_empty() {
                return Err(WError::BadLengths);
            }
            return Ok(());
        }
        let derived = derive_colors(&self.shape, &self.decorations)?;
        if let Some((e, c)) = derived.iter().find(|(e, c)| self.colors.get(*e) != Some(*c)) {
            return Err(WError::ColorMismatch { edge: *e, first: *c, second: self.colors.get(e).copied().unwrap_or(0) });
        }
        let inner: BTreeSet<Edge> = ix.inner_edges().into_iter().collect();
        let keys: BTreeSet<Edge> = self.lengths.keys().copied().collect();
        if inner != keys || self.lengths.values().any(|s| *s < zero() || *s > one()) {
            return Err(WError::BadLengths);
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.leaf_order.len()
    }

    pub fn output_color(&self) -> usize {
        self.colors[&self.shape.root_edge()]
    }

    pub fn input_colors(&self) -> Vec<usize> {
        self.leaf_order.iter().map(|l| self.colors[&Edge::Leaf(*l)]).collect()
    }

    pub fn length(&self, v: VertexId) -> Option<&Q> {
        self.lengths.get(&Edge::Out(v))
    }

    /// Composes all decorations along the shape.
    pub fn project_to_o(&self) -> OElement {
        let PlanarTree::Rooted(root) = &self.shape else {
            return OElement::unit(self.output_color());
        };
        fn fold(v: &Vertex, decorations: &BTreeMap<VertexId, OElement>) -> OElement {
            let mut value = decorations[&v.id].clone();
            for (slot, input) in v.inputs.iter().enumerate().rev() {
                if let Input::Vertex(c) = input {
                    value = value.compose(slot, &fold(c, decorations)).expect("colors validated");
                }
            }
            value
        }
        let value = fold(root, &self.decorations);
        let ix = self.shape.index();
        let sigma = self
            .leaf_order
            .iter()
            .map(|l| value.sigma[ix.leaf_position(*l).expect("leaf of the shape")])
            .collect();
        OElement { tree: value.tree, sigma, tau: value.tau }
    }

    pub fn to_json(&self) -> Value {
        let c = self.canonically_numbered();
        let ix = c.shape.index();
        let edges = ix.edges();
        json!({
            "shape": c.shape.to_json(),
            "leaf_order": c.leaf_order.iter().map(|l| ix.leaf_position(*l).unwrap()).collect::<Vec<_>>(),
            "colors": edges.iter().map(|e| c.colors[e]).collect::<Vec<_>>(),
            "lengths": ix.inner_edges().iter().map(|e| q_to_json(&c.lengths[e])).collect::<Vec<_>>(),
            "decorations": ix.vertices.iter().map(|v| c.decorations[v].to_json()).collect::<Vec<_>>(),
        })
    }

    /// Reads the format written by [`WTree::to_json`]: the shape, the leaf
    /// order as planar positions, edge colors in root-then-preorder order
    /// (needed only for `eta`), lengths of the inner edges and decorations
    /// in vertex preorder.
    pub fn from_json(v: &Value) -> Result<WTree, WError> {
        let field = |k: &str| v.get(k).ok_or_else(|| WError::Json(format!("missing {k}")));
        let shape = PlanarTree::from_json(field("shape")?)?;
        let ix = shape.index();
        let arr = |k: &str| -> Result<Vec<Value>, WError> {
            match v.get(k) {
                None => Ok(Vec::new()),
                Some(x) => x.as_array().cloned().ok_or_else(|| WError::Json(format!("{k} must be an array"))),
            }
        };
        let leaf_order = arr("leaf_order")?
            .iter()
            .map(|x| {
                x.as_u64()
                    .and_then(|p| ix.leaves.get(p as usize).copied())
                    .ok_or(WError::BadLeafOrder)
            })
            .collect::<Result<Vec<_>, _>>()?;
        if shape.is_eta() {
            let c = arr("colors")?
                .first()
                .and_then(Value::as_u64)
                .ok_or_else(|| WError::Json("eta needs its color".into()))?;
            let mut w = WTree::eta(c as usize);
            if leaf_order.len() != 1 {
                return Err(WError::BadLeafOrder);
            }
            w.leaf_order = leaf_order;
            return Ok(w);
        }
        let lengths = ix
            .inner_edges()
            .into_iter()
            .zip(arr("lengths")?)
            .map(|(e, x)| Ok((e, q_from_json(&x).map_err(|e| WError::Json(e.to_string()))?)))
            .collect::<Result<BTreeMap<_, _>, WError>>()?;
        let decorations = ix
            .vertices
            .iter()
            .copied()
            .zip(arr("decorations")?)
            .map(|(v, x)| Ok((v, OElement::from_json(&x)?)))
            .collect::<Result<BTreeMap<_, _>, WError>>()?;
        let w = WTree::new(shape, leaf_order, lengths, decorations)?;
        if let Some(colors) = v.get("colors").and_then(Value::as_array) {
            let given: Vec<Option<u64>> = colors.iter().map(Value::as_u64).collect();
            let expected: Vec<Option<u64>> = ix.edges().iter().map(|e| Some(w.colors[e] as u64)).collect();
            if given != expected {
                return Err(WError::Json("colors disagree with decorations".into()));
            }
        }
        Ok(w)
    }

    /// Renumbers vertices in preorder and leaves in planar order.
    fn canonically_numbered(&self) -> WTree {
        let (shape, vmap, lmap) = self.shape.renumbered();
        let edge = |e: &Edge| match e {
            Edge::Out(v) => Edge::Out(vmap[v]),
            Edge::Leaf(l) => Edge::Leaf(lmap[l]),
        };
        WTree {
            shape,
            colors: self.colors.iter().map(|(e, c)| (edge(e), *c)).collect(),
            leaf_order: self.leaf_order.iter().map(|l| lmap[l]).collect(),
            lengths: self.lengths.iter().map(|(e, s)| (edge(e), s.clone())).collect(),
            decorations: self.decorations.iter().map(|(v, p)| (vmap[v], p.canonical())).collect(),
        }
    }
}

fn derive_colors(shape: &PlanarTree, decorations: &BTreeMap<VertexId, OElement>) -> Result<BTreeMap<Edge, usize>, WError> {
    let ix = shape.index();
    let mut colors: BTreeMap<Edge, usize> = BTreeMap::new();
    let mut put = |e: Edge, c: usize| -> Result<(), WError> {
        match colors.insert(e, c) {
            Some(old) if old != c => Err(WError::ColorMismatch { edge: e, first: old, second: c }),
            _ => Ok(()),
        }
    };
    for v in &ix.vertices {
        let p = decorations.get(v).ok_or(WError::MissingDecoration(*v))?;
        if p.arity() != ix.arity(*v) {
            return Err(WError::ArityMismatch { vertex: *v, inputs: ix.arity(*v), arity: p.arity() });
        }
        put(Edge::Out(*v), p.output_color())?;
        for (e, c) in ix.inputs(*v).iter().zip(p.input_colors()) {
            put(*e, c)?;
        }
    }
    if decorations.len() != ix.vertices.len() {
        return Err(WError::Json("decorations for unknown vertices".into()));
    }
    Ok(colors)
}

/// A single application of a relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Redex {
    /// The edge leaving this vertex has length 0.
    ZeroEdge(VertexId),
    /// A unary vertex that can be absorbed.
    Unary(VertexId),
    /// A lone vertex decorated by an identity.
    LoneIdentity(VertexId),
    /// A non-root vertex without inputs.
    Nullary(VertexId),
}

fn is_identity(p: &OElement) -> bool {
    p.arity() == 1 && p.tau_positions().iter().enumerate().all(|(i, x)| i == *x)
}

fn redexes(w: &WTree, mode: WMode) -> Vec<Redex> {
    let ix = w.shape.index();
    let mut out = Vec::new();
    for v in &ix.vertices {
        let p = &w.decorations[v];
        let parent = ix.parent(*v);
        if parent.is_some() && w.lengths[&Edge::Out(*v)] == zero() {
            out.push(Redex::ZeroEdge(*v));
        }
        let arity = ix.arity(*v);
        let has_neighbour = parent.is_some() || matches!(ix.inputs(*v).first(), Some(Edge::Out(_)));
        if arity == 1 && has_neighbour && (mode == WMode::W0 || is_identity(p)) {
            out.push(Redex::Unary(*v));
        }
        if arity == 1 && !has_neighbour && is_identity(p) {
            out.push(Redex::LoneIdentity(*v));
        }
        if mode == WMode::W0 && arity == 0 && parent.is_some() {
            out.push(Redex::Nullary(*v));
        }
    }
    out
}

/// Merges the non-root vertex `u` into the vertex below it.
fn collapse_down(w: &mut WTree, ix: &TreeIndex, u: VertexId) {
    let (p, slot) = ix.parent(u).expect("non-root vertex");
    let merged = w.decorations[&p].compose(slot, &w.decorations[&u]).expect("colors validated");
    w.decorations.insert(p, merged);
    w.decorations.remove(&u);
    w.shape = collapse(&w.shape, &Subtree::from_set(BTreeSet::from([p, u])));
    w.lengths.remove(&Edge::Out(u));
    w.colors.remove(&Edge::Out(u));
}

/// Merges the only child `c` of the root `u` into `u`.
fn collapse_up(w: &mut WTree, u: VertexId, c: VertexId) {
    let merged = w.decorations[&u].compose(0, &w.decorations[&c]).expect("colors validated");
    w.decorations.insert(u, merged);
    w.decorations.remove(&c);
    w.shape = collapse(&w.shape, &Subtree::from_set(BTreeSet::from([u, c])));
    w.lengths.remove(&Edge::Out(c));
    w.colors.remove(&Edge::Out(c));
}

fn apply(w: &mut WTree, redex: Redex) {
    let ix = w.shape.index();
    match redex {
        Redex::ZeroEdge(u) | Redex::Nullary(u) => collapse_down(w, &ix, u),
        Redex::Unary(u) => {
            let input = ix.inputs(u)[0];
            match (ix.parent(u), input) {
                (Some(_), Edge::Out(c)) => {
                    let outer = w.lengths[&Edge::Out(u)].clone();
                    let inner = w.lengths.get_mut(&Edge::Out(c)).expect("inner edge");
                    if outer > *inner {
                        *inner = outer;
                    }
                    collapse_down(w, &ix, u);
                }
                (Some(_), Edge::Leaf(_)) => collapse_down(w, &ix, u),
                (None, Edge::Out(c)) => collapse_up(w, u, c),
                (None, Edge::Leaf(_)) => unreachable!("lone vertices are not unary redexes"),
            }
        }
        Redex::LoneIdentity(u) => {
            let leaf = w.shape.leaves()[0];
            let c = w.colors[&Edge::Out(u)];
            w.shape = PlanarTree::Eta(leaf);
            w.decorations.clear();
            w.colors = BTreeMap::from([(Edge::Leaf(leaf), c)]);
        }
    }
}

/// Applies relations until none applies, choosing among the applicable ones
/// with `pick(n)` (which must return an index below `n`), then puts the
/// result in canonical form.
pub fn normalize_with(w: &WTree, mode: WMode, pick: &mut dyn FnMut(usize) -> usize) -> WTree {
    let mut w = w.clone();
    loop {
        let rs = redexes(&w, mode);
        if rs.is_empty() {
            break;
        }
        let r = rs[pick(rs.len()).min(rs.len() - 1)];
        apply(&mut w, r);
    }
    canonicalize(&w, mode)
}

/// The canonical reduced representative of `w`.
pub fn normalize_w(w: &WTree, mode: WMode) -> WTree {
    normalize_with(w, mode, &mut |_| 0)
}

/// Whether no relation applies to `w`.
pub fn is_reduced(w: &WTree, mode: WMode) -> bool {
    redexes(w, mode).is_empty()
}

fn canonicalize(w: &WTree, mode: WMode) -> WTree {
    if w.shape.is_eta() {
        return w.canonically_numbered();
    }
    let mut w = w.clone();
    if mode == WMode::W0 {
        // Leaf labellings of non-root decorations move into the parent as
        // a permutation corolla.
        let ix = w.shape.index();
        for v in ix.vertices.iter().rev() {
            let Some((p, slot)) = ix.parent(*v) else { continue };
            let dec = w.decorations[v].clone();
            let positions = dec.tau_positions();
            if positions.iter().enumerate().all(|(i, x)| i == *x) {
                continue;
            }
            let corolla = PlanarTree::corolla(positions.len());
            let cix = corolla.index();
            let rho = OElement {
                sigma: cix.vertices.clone(),
                tau: positions.iter().map(|x| cix.leaves[*x]).collect(),
                tree: corolla,
            };
            let parent = w.decorations[&p].compose(slot, &rho).expect("colors agree");
            w.decorations.insert(p, parent);
            let tau = dec.tree.leaves();
            w.decorations.insert(*v, OElement { tau, ..dec });
        }
    }
    let ix = w.shape.index();
    for v in &ix.vertices {
        let dec = w.decorations[v].clone();
        let dix = dec.tree.index();
        let perm: Vec<usize> = dec.sigma.iter().map(|x| dix.vertex_position(*x).unwrap()).collect();
        w.shape = w.shape.permute_inputs(*v, &perm).expect("arity checked");
        w.decorations.insert(*v, OElement { sigma: dix.vertices.clone(), ..dec });
    }
    w.canonically_numbered()
}

/// `a ∘_i b`: grafting with a new edge of length 1, then normalization.
pub fn compose_w(a: &WTree, i: usize, b: &WTree, mode: WMode) -> Result<WTree, WError> {
    if i >= a.arity() {
        return Err(WError::SlotOutOfRange { slot: i, arity: a.arity() });
    }
    let expected = a.input_colors()[i];
    if expected != b.output_color() {
        return Err(OperadError::ColorMismatch { slot: i, expected, found: b.output_color() }.into());
    }
    if a.shape.is_eta() {
        return Ok(normalize_w(b, mode));
    }
    if b.shape.is_eta() {
        return Ok(normalize_w(a, mode));
    }
    let target = a.leaf_order[i];
    let pos = a.shape.index().leaf_position(target).expect("leaf of the shape");
    let g = a.shape.graft(pos, &b.shape)?;
    let vmap = |v: &VertexId| g.vertex_map[v];
    let edge = |e: &Edge| match e {
        Edge::Out(v) => Edge::Out(vmap(v)),
        Edge::Leaf(l) => Edge::Leaf(g.leaf_map[l]),
    };
    let mut lengths = a.lengths.clone();
    lengths.extend(b.lengths.iter().map(|(e, s)| (edge(e), s.clone())));
    let b_root = b.shape.root_vertex().expect("rooted").id;
    lengths.insert(Edge::Out(vmap(&b_root)), one());
    let mut decorations = a.decorations.clone();
    decorations.extend(b.decorations.iter().map(|(v, p)| (vmap(v), p.clone())));
    let mut leaf_order = a.leaf_order[..i].to_vec();
    leaf_order.extend(b.leaf_order.iter().map(|l| g.leaf_map[l]));
    leaf_order.extend_from_slice(&a.leaf_order[i + 1..]);
    let grafted = WTree::new(g.tree, leaf_order, lengths, decorations)?;
    Ok(normalize_w(&grafted, mode))
}

/// `Ψ` on a reduced `W₀` representative: the projection to `O`, with one
/// bracket per non-root vertex, collecting the inputs above it and weighted
/// by the length of its outgoing edge.
pub fn psi(w: &WTree) -> Result<BOElement, WError> {
    if !is_reduced(w, WMode::W0) {
        return Err(WError::NotReduced);
    }
    let base = w.project_to_o();
    let ix = w.shape.index();
    let mut weights = BTreeMap::new();
    for v in &ix.vertices {
        if ix.parent(*v).is_none() {
            continue;
        }
        let mut above: BTreeSet<LeafId> = BTreeSet::new();
        for x in std::iter::once(*v).chain(ix.descendants(*v)) {
            above.extend(ix.inputs(x).iter().filter_map(|e| match e {
                Edge::Leaf(l) => Some(*l),
                Edge::Out(_) => None,
            }));
        }
        let bracket: BTreeSet<VertexId> = w
            .leaf_order
            .iter()
            .enumerate()
            .filter(|(_, l)| above.contains(l))
            .map(|(i, _)| base.sigma[i])
            .collect();
        weights.insert(bracket, w.lengths[&Edge::Out(*v)].clone());
    }
    let weighted = WeightedBracketing::new(weights).map_err(OperadError::from)?;
    Ok(BOElement::new(base, weighted)?)
}

/// The reduced `W₀` representative with `Ψ(w) = x`, built from the nesting
/// forest of the brackets.
pub fn psi_inverse(x: &BOElement) -> WTree {
    let base = &x.base;
    if base.tree.vertex_count() == 1 && is_identity(base) && x.weighted.weights().is_empty() {
        return WTree::eta(base.output_color());
    }
    let brackets: Vec<BTreeSet<VertexId>> = x.weighted.weights().keys().cloned().collect();
    // smallest bracket strictly containing each bracket, `None` for the whole tree
    let parent_of = |s: &BTreeSet<VertexId>| -> Option<usize> {
        (0..brackets.len())
            .filter(|j| brackets[*j].len() > s.len() && s.is_subset(&brackets[*j]))
            .min_by_key(|j| brackets[*j].len())
    };
    let parents: Vec<Option<usize>> = brackets.iter().map(parent_of).collect();
    let children = |node: Option<usize>| -> Vec<usize> { (0..brackets.len()).filter(|j| parents[*j] == node).collect() };

    struct Builder<'a> {
        base: &'a OElement,
        brackets: &'a [BTreeSet<VertexId>],
        next: u32,
        decorations: BTreeMap<VertexId, OElement>,
        lengths: BTreeMap<Edge, Q>,
        weights: &'a BTreeMap<BTreeSet<VertexId>, Q>,
    }
    impl Builder<'_> {
        fn node(&mut self, node: Option<usize>, kids: &dyn Fn(Option<usize>) -> Vec<usize>) -> Vertex {
            let id = VertexId(self.next);
            self.next += 1;
            let (local, tau_of): (PlanarTree, Option<Vec<LeafId>>) = match node {
                None => (self.base.tree.clone(), Some(self.base.tau.clone())),
                Some(j) => (Subtree::from_set(self.brackets[j].clone()).extract(&self.base.tree).0, None),
            };
            let lix = local.index();
            let mut quotient = local.clone();
            let mut roots: BTreeMap<VertexId, usize> = BTreeMap::new();
            for c in kids(node) {
                let s = Subtree::from_set(self.brackets[c].clone());
                roots.insert(s.root_vertex(&lix), c);
                quotient = collapse(&quotient, &s);
            }
            let qix = quotient.index();
            let mut inputs = Vec::new();
            for v in &qix.vertices {
                match roots.get(v) {
                    Some(c) => {
                        let child = self.node(Some(*c), kids);
                        self.lengths.insert(Edge::Out(child.id), self.weights[&self.brackets[*c]].clone());
                        inputs.push(Input::Vertex(child));
                    }
                    None => {
                        let label = self.base.label_of(*v).expect("vertex of the base tree");
                        inputs.push(Input::Leaf(LeafId(label as u32)));
                    }
                }
            }
            let tau = tau_of.unwrap_or_else(|| qix.leaves.clone());
            self.decorations.insert(id, OElement { sigma: qix.vertices.clone(), tau, tree: quotient });
            Vertex { id, inputs }
        }
    }
    let mut b = Builder {
        base,
        brackets: &brackets,
        next: 0,
        decorations: BTreeMap::new(),
        lengths: BTreeMap::new(),
        weights: x.weighted.weights(),
    };
    let root = b.node(None, &children);
    let shape = PlanarTree::Rooted(root);
    let leaf_order = (0..base.arity()).map(|i| LeafId(i as u32)).collect();
    let w = WTree::new(shape, leaf_order, b.lengths, b.decorations).expect("construction is well colored");
    normalize_w(&w, WMode::W0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::trees::{caterpillar, ShapeInput, Shape};

    fn two_vertex(len: Q) -> WTree {
        // blackboard tree: root with two inputs, the first a vertex with two leaves
        let shape = PlanarTree::from_shape(&Shape::Node(vec![
            ShapeInput::Node(vec![ShapeInput::Leaf, ShapeInput::Leaf]),
            ShapeInput::Leaf,
        ]));
        let ix = shape.index();
        let (r, u) = (ix.vertices[0], ix.vertices[1]);
        let top = OElement::planar(caterpillar(2, 1));
        let bottom = OElement::planar(PlanarTree::from_shape(&Shape::Node(vec![
            ShapeInput::Node(vec![ShapeInput::Leaf, ShapeInput::Leaf]),
            ShapeInput::Leaf,
            ShapeInput::Leaf,
        ])));
        let leaf_order = ix.leaves.clone();
        WTree::new(shape, leaf_order, BTreeMap::from([(Edge::Out(u), len)]), BTreeMap::from([(r, bottom), (u, top)]))
            .unwrap()
    }

    #[test]
    fn corolla_is_normal_and_projects_to_its_decoration() {
        let p = OElement::planar(caterpillar(3, 1));
        let w = WTree::corolla(p.clone());
        assert_eq!(normalize_w(&w, WMode::W0), w.canonically_numbered());
        assert_eq!(w.project_to_o(), p);
        assert!(psi(&w).unwrap().weighted.weights().is_empty());
    }

    #[test]
    fn zero_edge_collapses_to_composite() {
        let w = two_vertex(zero());
        let n = normalize_w(&w, WMode::W);
        assert_eq!(n.shape.vertex_count(), 1);
        let ix = w.shape.index();
        let expected = w.decorations[&ix.vertices[0]].compose(0, &w.decorations[&ix.vertices[1]]).unwrap();
        assert_eq!(n.decorations.values().next().unwrap(), &expected);
        assert_eq!(n.project_to_o(), w.project_to_o());
    }

    #[test]
    fn one_bracket_roundtrip() {
        let w = normalize_w(&two_vertex(q(1, 2)), WMode::W0);
        let x = psi(&w).unwrap();
        assert_eq!(x.weighted.weights().len(), 1);
        assert_eq!(x.weighted.weights().values().next().unwrap(), &q(1, 2));
        assert_eq!(psi_inverse(&x), w);
        assert_eq!(psi(&psi_inverse(&x)).unwrap(), x);
    }

    #[test]
    fn eta_is_a_unit() {
        let w = normalize_w(&two_vertex(q(1, 3)), WMode::W0);
        for i in 0..w.arity() {
            let c = w.input_colors()[i];
            assert_eq!(compose_w(&w, i, &WTree::eta(c), WMode::W0).unwrap(), w);
        }
        let c = w.output_color();
        assert_eq!(compose_w(&WTree::eta(c), 0, &w, WMode::W0).unwrap(), w);
        assert_eq!(normalize_w(&WTree::corolla(OElement::unit(3)), WMode::W), WTree::eta(3));
    }

    #[test]
    fn json_roundtrip() {
        let w = normalize_w(&two_vertex(q(2, 3)), WMode::W0);
        assert_eq!(WTree::from_json(&w.to_json()).unwrap(), w);
        let e = WTree::eta(4);
        assert_eq!(WTree::from_json(&e.to_json()).unwrap(), e);
    }
}
