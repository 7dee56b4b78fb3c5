//! The dendroidal category `Ω`, its bracketed thickening `Ω̃₀` and the
//! nerve `Φ` of a BO-algebra.
//!
//! A morphism `S → T` of `Ω` is an operad map between the free operads on
//! the two trees. Since `Ω(S)` is free on the vertices of `S`, such a map is
//! determined by its action on edges, and an edge map is a morphism exactly
//! when every vertex `v` is sent to an operation: the images of the inputs of
//! `v` are distinct and form the leaf set of a subtree of `T` rooted at the
//! image of the output of `v`. That subtree is `g(C_v)`; it has no vertices
//! when `v` is unary and both of its edges go to the same edge.

use crate::bo_action::{lambda, ActionContext, ActionError};
use crate::bracketings::{BracketError, Bracketing, WeightedBracketing};
use crate::cacti::Cactus;
use crate::operad::{act, BOElement, FoldOrder, OElement, OperadError, StrictOperad};
use crate::rational::{fmt_q, one, parse_q};
use crate::trees::{collapse, Edge, Input, LeafId, PlanarTree, Subtree, TreeError, TreeIndex, Vertex, VertexId};
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DendroidalError {
    #[error("edge map is not defined on exactly the edges of the source")]
    EdgeDomain,
    #[error("edge {0:?} is not an edge of the target")]
    UnknownEdge(Edge),
    #[error("vertex {0} is not sent to an operation of the target")]
    NotAnOperation(VertexId),
    #[error("vertex {0} is not a vertex of the tree")]
    UnknownVertex(VertexId),
    #[error("target of the first morphism differs from the source of the second")]
    NotComposable,
    #[error("empty list of morphisms")]
    EmptyFactorization,
    #[error("enumeration exceeded its budget of {0} search steps")]
    BudgetExceeded(usize),
    #[error("vertex {vertex}: {source}")]
    Bracketing { vertex: VertexId, source: BracketError },
    #[error("bracketing given for a vertex {0} outside the source")]
    StrayBracketing(VertexId),
    #[error("value for vertex {vertex} has arity {found}, expected {expected}")]
    TypeMismatch { vertex: VertexId, expected: usize, found: usize },
    #[error("values are not indexed by the vertices of the target")]
    MissingValues,
    #[error("algebra evaluation failed: {0}")]
    Algebra(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("malformed morphism json: {0}")]
    Json(String),
}

impl From<ActionError> for DendroidalError {
    fn from(e: ActionError) -> Self {
        DendroidalError::Algebra(e.to_string())
    }
}

impl From<OperadError> for DendroidalError {
    fn from(e: OperadError) -> Self {
        DendroidalError::Algebra(e.to_string())
    }
}

/// The vertex set of the subtree with root edge `root` and leaf set
/// `leaves`, if there is one. A single leaf equal to the root gives the
/// empty subtree.
pub fn operation(ix: &TreeIndex, root: Edge, leaves: &[Edge]) -> Option<BTreeSet<VertexId>> {
    if leaves.len() == 1 && leaves[0] == root {
        return Some(BTreeSet::new());
    }
    let Edge::Out(r) = root else { return None };
    let distinct: BTreeSet<Edge> = leaves.iter().copied().collect();
    if distinct.len() != leaves.len() {
        return None;
    }
    let mut set: BTreeSet<VertexId> = std::iter::once(r).chain(ix.descendants(r)).collect();
    for e in leaves {
        if let Edge::Out(x) = e {
            if !set.contains(x) {
                return None;
            }
            set.remove(x);
            for d in ix.descendants(*x) {
                set.remove(&d);
            }
        }
    }
    if !set.contains(&r) {
        return None;
    }
    let boundary: BTreeSet<Edge> = Subtree::from_set(set.clone()).leaves(ix).into_iter().collect();
    (boundary == distinct).then_some(set)
}

/// A morphism of `Ω`, stored extensionally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaMorphism {
    pub source: PlanarTree,
    pub target: PlanarTree,
    pub edge_map: BTreeMap<Edge, Edge>,
    pub vertex_image: BTreeMap<VertexId, BTreeSet<VertexId>>,
}

impl OmegaMorphism {
    /// Checks the edge map and derives the vertex images.
    pub fn new(source: PlanarTree, target: PlanarTree, edge_map: BTreeMap<Edge, Edge>) -> Result<OmegaMorphism, DendroidalError> {
        let sx = source.index();
        let tx = target.index();
        let domain: BTreeSet<Edge> = sx.edges().into_iter().collect();
        if edge_map.keys().copied().collect::<BTreeSet<_>>() != domain {
            return Err(DendroidalError::EdgeDomain);
        }
        let codomain: BTreeSet<Edge> = tx.edges().into_iter().collect();
        if let Some(e) = edge_map.values().find(|e| !codomain.contains(e)) {
            return Err(DendroidalError::UnknownEdge(*e));
        }
        let mut vertex_image = BTreeMap::new();
        for v in &sx.vertices {
            let leaves: Vec<Edge> = sx.inputs(*v).iter().map(|e| edge_map[e]).collect();
            let image = operation(&tx, edge_map[&Edge::Out(*v)], &leaves).ok_or(DendroidalError::NotAnOperation(*v))?;
            vertex_image.insert(*v, image);
        }
        Ok(OmegaMorphism { source, target, edge_map, vertex_image })
    }

    pub fn identity(t: &PlanarTree) -> OmegaMorphism {
        let edge_map = t.index().edges().into_iter().map(|e| (e, e)).collect();
        OmegaMorphism::new(t.clone(), t.clone(), edge_map).expect("identity is a morphism")
    }

    /// The vertex set of `g(C_v)`.
    pub fn corolla_image(&self, v: VertexId) -> Result<&BTreeSet<VertexId>, DendroidalError> {
        self.vertex_image.get(&v).ok_or(DendroidalError::UnknownVertex(v))
    }

    /// `g(C_v)` as a tree of its own, with the target edge each of its
    /// leaves stands for. Vertex ids are those of the target.
    pub fn image_tree(&self, v: VertexId) -> Result<(PlanarTree, Vec<Edge>), DendroidalError> {
        let image = self.corolla_image(v)?;
        if image.is_empty() {
            return Ok((PlanarTree::eta(), vec![self.edge_map[&Edge::Out(v)]]));
        }
        Ok(Subtree::from_set(image.clone()).extract(&self.target))
    }

    /// Whether the map is a composite of inner and outer faces alone:
    /// injective on edges, no vertex collapsed to an edge, and every input
    /// order preserved.
    pub fn is_planar_face(&self) -> bool {
        let values: BTreeSet<&Edge> = self.edge_map.values().collect();
        if values.len() != self.edge_map.len() {
            return false;
        }
        let sx = self.source.index();
        let tx = self.target.index();
        sx.vertices.iter().all(|v| {
            let image = &self.vertex_image[v];
            if image.is_empty() {
                return false;
            }
            let ordered = Subtree::from_set(image.clone()).leaves(&tx);
            let mapped: Vec<Edge> = sx.inputs(*v).iter().map(|e| self.edge_map[e]).collect();
            ordered == mapped
        })
    }

    pub fn to_json(&self) -> Value {
        let (sx, tx) = (self.source.index(), self.target.index());
        let edge_map: Vec<Value> = sx
            .edges()
            .into_iter()
            .map(|e| json!([edge_name(&sx, e), edge_name(&tx, self.edge_map[&e])]))
            .collect();
        let vertex_image: Vec<Value> = sx
            .vertices
            .iter()
            .map(|v| {
                let image: Vec<String> = self.vertex_image[v].iter().map(|u| format!("v{}", u.0)).collect();
                json!([format!("v{}", v.0), image])
            })
            .collect();
        json!({
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "edge_map": edge_map,
            "vertex_image": vertex_image,
        })
    }

    /// Reads a morphism; `vertex_image`, if present, must agree with the
    /// images derived from the edge map.
    pub fn from_json(v: &Value) -> Result<OmegaMorphism, DendroidalError> {
        let field = |k: &str| v.get(k).ok_or_else(|| DendroidalError::Json(format!("missing field {k}")));
        let source = PlanarTree::from_json(field("source")?)?;
        let target = PlanarTree::from_json(field("target")?)?;
        let (sx, tx) = (source.index(), target.index());
        let pairs = field("edge_map")?.as_array().ok_or_else(|| DendroidalError::Json("edge_map must be an array".into()))?;
        let mut edge_map = BTreeMap::new();
        for p in pairs {
            let [a, b] = p.as_array().map(Vec::as_slice).unwrap_or_default() else {
                return Err(DendroidalError::Json(format!("bad edge pair {p}")));
            };
            edge_map.insert(parse_edge(&sx, a)?, parse_edge(&tx, b)?);
        }
        let m = OmegaMorphism::new(source, target, edge_map)?;
        if let Some(images) = v.get("vertex_image") {
            let given = images.as_array().ok_or_else(|| DendroidalError::Json("vertex_image must be an array".into()))?;
            for item in given {
                let parsed = (|| {
                    let [name, set] = item.as_array()?.as_slice() else { return None };
                    let v = parse_vertex(name.as_str()?)?;
                    let set: Option<BTreeSet<VertexId>> =
                        set.as_array()?.iter().map(|x| x.as_str().and_then(parse_vertex)).collect();
                    Some((v, set?))
                })()
                .ok_or_else(|| DendroidalError::Json(format!("bad vertex image {item}")))?;
                if m.vertex_image.get(&parsed.0) != Some(&parsed.1) {
                    return Err(DendroidalError::Json(format!("vertex image of v{} disagrees with edge map", parsed.0 .0)));
                }
            }
        }
        Ok(m)
    }
}

fn edge_name(ix: &TreeIndex, e: Edge) -> String {
    match e {
        Edge::Out(v) => format!("v{}", v.0),
        Edge::Leaf(l) => format!("l{}", ix.leaf_position(l).expect("leaf of the tree")),
    }
}

fn parse_vertex(s: &str) -> Option<VertexId> {
    s.strip_prefix('v')?.parse().ok().map(VertexId)
}

fn parse_edge(ix: &TreeIndex, v: &Value) -> Result<Edge, DendroidalError> {
    let bad = || DendroidalError::Json(format!("bad edge name {v}"));
    let s = v.as_str().ok_or_else(bad)?;
    if let Some(vid) = parse_vertex(s) {
        return Ok(Edge::Out(vid));
    }
    let pos: usize = s.strip_prefix('l').and_then(|p| p.parse().ok()).ok_or_else(bad)?;
    ix.leaves.get(pos).map(|l| Edge::Leaf(*l)).ok_or_else(bad)
}

impl fmt::Display for OmegaMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sx = self.source.index();
        write!(f, "{} -> {}:", self.source, self.target)?;
        for v in &sx.vertices {
            let image: Vec<String> = self.vertex_image[v].iter().map(|u| u.to_string()).collect();
            write!(f, " {v}↦{{{}}}", image.join(","))?;
        }
        Ok(())
    }
}

/// `g ∘ f`.
pub fn compose_omega(g: &OmegaMorphism, f: &OmegaMorphism) -> Result<OmegaMorphism, DendroidalError> {
    if f.target != g.source {
        return Err(DendroidalError::NotComposable);
    }
    let edge_map = f.edge_map.iter().map(|(e, m)| (*e, g.edge_map[m])).collect();
    let composite = OmegaMorphism::new(f.source.clone(), g.target.clone(), edge_map)?;
    debug_assert!(composite.vertex_image.iter().all(|(w, image)| {
        let glued: BTreeSet<VertexId> = f.vertex_image[w].iter().flat_map(|v| g.vertex_image[v].iter().copied()).collect();
        glued == *image
    }));
    Ok(composite)
}

fn identity_edges(t: &PlanarTree) -> BTreeMap<Edge, Edge> {
    t.index().edges().into_iter().map(|e| (e, e)).collect()
}

/// The inner face `∂_e: T/e → T` for the inner edge leaving `upper`.
pub fn inner_face(t: &PlanarTree, upper: VertexId) -> Result<OmegaMorphism, DendroidalError> {
    let ix = t.index();
    let (lower, _) = ix.parent(upper).ok_or(DendroidalError::UnknownVertex(upper))?;
    let source = collapse(t, &Subtree::from_set(BTreeSet::from([lower, upper])));
    let edge_map = identity_edges(&source);
    OmegaMorphism::new(source, t.clone(), edge_map)
}

/// The inclusion of the subtree with the given vertices. Covers outer faces,
/// corolla inclusions and, composed, every injective planar map.
pub fn subtree_inclusion(t: &PlanarTree, vertices: &BTreeSet<VertexId>) -> Result<OmegaMorphism, DendroidalError> {
    let sub = Subtree::new(t, vertices.clone())?;
    let (source, boundary) = sub.extract(t);
    let sx = source.index();
    let mut edge_map: BTreeMap<Edge, Edge> = sx.vertices.iter().map(|v| (Edge::Out(*v), Edge::Out(*v))).collect();
    for (l, e) in sx.leaves.iter().zip(boundary) {
        edge_map.insert(Edge::Leaf(*l), e);
    }
    OmegaMorphism::new(source, t.clone(), edge_map)
}

/// The corolla inclusion `ι_v: C_v → T`.
pub fn corolla_inclusion(t: &PlanarTree, v: VertexId) -> Result<OmegaMorphism, DendroidalError> {
    subtree_inclusion(t, &BTreeSet::from([v]))
}

/// The edge inclusion `η → T`.
pub fn edge_inclusion(t: &PlanarTree, e: Edge) -> Result<OmegaMorphism, DendroidalError> {
    let source = PlanarTree::eta();
    let edge_map = BTreeMap::from([(source.root_edge(), e)]);
    OmegaMorphism::new(source, t.clone(), edge_map)
}

/// Inserts a fresh unary vertex on edge `e` of `t`.
fn insert_unary(t: &PlanarTree, e: Edge, fresh: VertexId) -> PlanarTree {
    fn go(input: Input, e: Edge, fresh: VertexId) -> Input {
        let wrapped = input.edge() == e;
        let input = match input {
            Input::Vertex(v) => Input::Vertex(Vertex {
                id: v.id,
                inputs: v.inputs.into_iter().map(|i| go(i, e, fresh)).collect(),
            }),
            leaf => leaf,
        };
        if wrapped {
            Input::Vertex(Vertex { id: fresh, inputs: vec![input] })
        } else {
            input
        }
    }
    let root = match t.clone() {
        PlanarTree::Eta(l) => Input::Leaf(l),
        PlanarTree::Rooted(v) => Input::Vertex(v),
    };
    match go(root, e, fresh) {
        Input::Vertex(v) => PlanarTree::Rooted(v),
        Input::Leaf(l) => PlanarTree::Eta(l),
    }
}

/// The degeneracy collapsing a unary vertex inserted on edge `e` of `t`:
/// the source is `t` with the extra vertex, and both edges of that vertex
/// go to `e`.
pub fn degeneracy(t: &PlanarTree, e: Edge) -> Result<OmegaMorphism, DendroidalError> {
    if !t.index().edges().contains(&e) {
        return Err(DendroidalError::UnknownEdge(e));
    }
    let fresh = VertexId(t.next_vertex_id());
    let source = insert_unary(t, e, fresh);
    let mut edge_map = identity_edges(&source);
    edge_map.insert(Edge::Out(fresh), e);
    OmegaMorphism::new(source, t.clone(), edge_map)
}

/// The isomorphism `t → t'` where `t'` has the inputs of `v` permuted as in
/// [`PlanarTree::permute_inputs`].
pub fn isomorphism(t: &PlanarTree, v: VertexId, perm: &[usize]) -> Result<OmegaMorphism, DendroidalError> {
    let target = t.permute_inputs(v, perm)?;
    OmegaMorphism::new(t.clone(), target, identity_edges(t))
}

/// Which morphisms [`enumerate_morphisms`] lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphismClass {
    All,
    /// Injective planar maps, i.e. composites of faces alone.
    PlanarFaces,
}

/// All morphisms `S → T` of the given class. The search visits the source
/// vertices in preorder and chooses, for each, a subtree of the target and
/// a matching of its inputs with the subtree's leaves. `budget` bounds the
/// number of search steps.
pub fn enumerate_morphisms(
    s: &PlanarTree,
    t: &PlanarTree,
    class: MorphismClass,
    budget: usize,
) -> Result<Vec<OmegaMorphism>, DendroidalError> {
    let sx = s.index();
    let tx = t.index();
    let mut by_root: BTreeMap<Edge, Vec<(BTreeSet<VertexId>, Vec<Edge>)>> = BTreeMap::new();
    for e in tx.edges() {
        let mut ops = vec![(BTreeSet::new(), vec![e])];
        if let Edge::Out(r) = e {
            for sub in rooted_subtrees(&tx, r) {
                let leaves = Subtree::from_set(sub.clone()).leaves(&tx);
                ops.push((sub, leaves));
            }
        }
        by_root.insert(e, ops);
    }
    struct Search<'a> {
        sx: &'a TreeIndex,
        by_root: &'a BTreeMap<Edge, Vec<(BTreeSet<VertexId>, Vec<Edge>)>>,
        class: MorphismClass,
        budget: usize,
        steps: usize,
        found: Vec<BTreeMap<Edge, Edge>>,
    }
    impl Search<'_> {
        fn go(&mut self, k: usize, map: &mut BTreeMap<Edge, Edge>, used: &BTreeSet<VertexId>) -> Result<(), DendroidalError> {
            self.steps += 1;
            if self.steps > self.budget {
                return Err(DendroidalError::BudgetExceeded(self.budget));
            }
            let Some(v) = self.sx.vertices.get(k).copied() else {
                self.found.push(map.clone());
                return Ok(());
            };
            let inputs = self.sx.inputs(v).to_vec();
            let out = map[&Edge::Out(v)];
            for (sub, leaves) in &self.by_root[&out] {
                if leaves.len() != inputs.len() || !sub.is_disjoint(used) {
                    continue;
                }
                if self.class == MorphismClass::PlanarFaces && sub.is_empty() {
                    continue;
                }
                let orders = match self.class {
                    MorphismClass::All => permutations(leaves.len()),
                    MorphismClass::PlanarFaces => vec![(0..leaves.len()).collect()],
                };
                let mut now_used = used.clone();
                now_used.extend(sub.iter().copied());
                for order in orders {
                    for (e, p) in inputs.iter().zip(&order) {
                        map.insert(*e, leaves[*p]);
                    }
                    self.go(k + 1, map, &now_used)?;
                }
                for e in &inputs {
                    map.remove(e);
                }
            }
            Ok(())
        }
    }
    let mut search = Search { sx: &sx, by_root: &by_root, class, budget, steps: 0, found: Vec::new() };
    for e in tx.edges() {
        let mut map = BTreeMap::from([(sx.root, e)]);
        search.go(0, &mut map, &BTreeSet::new())?;
    }
    let mut out = Vec::new();
    for map in search.found {
        let m = OmegaMorphism::new(s.clone(), t.clone(), map)?;
        if class == MorphismClass::PlanarFaces && !m.is_planar_face() {
            continue;
        }
        out.push(m);
    }
    Ok(out)
}

/// Connected vertex sets whose lowest vertex is `r`.
fn rooted_subtrees(ix: &TreeIndex, r: VertexId) -> Vec<BTreeSet<VertexId>> {
    let mut acc = vec![BTreeSet::from([r])];
    for e in ix.inputs(r) {
        if let Edge::Out(c) = e {
            let above = rooted_subtrees(ix, *c);
            let mut next = acc.clone();
            for base in &acc {
                for a in &above {
                    next.push(base.union(a).copied().collect());
                }
            }
            acc = next;
        }
    }
    acc
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for at in 0..=p.len() {
            let mut q = p.clone();
            q.insert(at, n - 1);
            out.push(q);
        }
    }
    out
}

/// A morphism of `Ω̃₀`: a morphism `g` of `Ω` together with a point of
/// `L_g`, a weighted bracketing of each `g(C_v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaTildeMorphism {
    pub base: OmegaMorphism,
    brackets: BTreeMap<VertexId, WeightedBracketing>,
}

impl OmegaTildeMorphism {
    pub fn new(base: OmegaMorphism, brackets: BTreeMap<VertexId, WeightedBracketing>) -> Result<OmegaTildeMorphism, DendroidalError> {
        let mut kept = BTreeMap::new();
        for (v, wb) in brackets {
            let (image, _) = base.image_tree(v).map_err(|_| DendroidalError::StrayBracketing(v))?;
            wb.validate(&image).map_err(|source| DendroidalError::Bracketing { vertex: v, source })?;
            if !wb.is_empty() {
                kept.insert(v, wb);
            }
        }
        Ok(OmegaTildeMorphism { base, brackets: kept })
    }

    pub fn unbracketed(base: OmegaMorphism) -> OmegaTildeMorphism {
        OmegaTildeMorphism { base, brackets: BTreeMap::new() }
    }

    pub fn identity(t: &PlanarTree) -> OmegaTildeMorphism {
        OmegaTildeMorphism::unbracketed(OmegaMorphism::identity(t))
    }

    /// The bracketing of `g(C_v)`; empty unless set.
    pub fn bracketing(&self, v: VertexId) -> WeightedBracketing {
        self.brackets.get(&v).cloned().unwrap_or_default()
    }

    pub fn brackets(&self) -> &BTreeMap<VertexId, WeightedBracketing> {
        &self.brackets
    }

    pub fn to_json(&self) -> Value {
        let brackets: Vec<Value> = self
            .brackets
            .iter()
            .map(|(v, wb)| {
                let items: Vec<Value> = wb
                    .weights()
                    .iter()
                    .map(|(b, w)| {
                        let names: Vec<String> = b.iter().map(|u| format!("v{}", u.0)).collect();
                        json!({"bracket": names, "weight": fmt_q(w)})
                    })
                    .collect();
                json!([format!("v{}", v.0), items])
            })
            .collect();
        json!({"base": self.base.to_json(), "brackets": brackets})
    }

    pub fn from_json(v: &Value) -> Result<OmegaTildeMorphism, DendroidalError> {
        let base = OmegaMorphism::from_json(v.get("base").ok_or_else(|| DendroidalError::Json("missing field base".into()))?)?;
        let mut brackets = BTreeMap::new();
        let empty = Vec::new();
        let items = match v.get("brackets") {
            None => &empty,
            Some(b) => b.as_array().ok_or_else(|| DendroidalError::Json("brackets must be an array".into()))?,
        };
        for item in items {
            let parsed = (|| {
                let [name, list] = item.as_array()?.as_slice() else { return None };
                let vertex = parse_vertex(name.as_str()?)?;
                let mut weights = BTreeMap::new();
                for entry in list.as_array()? {
                    let set: Option<BTreeSet<VertexId>> =
                        entry.get("bracket")?.as_array()?.iter().map(|x| x.as_str().and_then(parse_vertex)).collect();
                    let w = match entry.get("weight") {
                        None => one(),
                        Some(w) => parse_q(w.as_str()?).ok()?,
                    };
                    weights.insert(set?, w);
                }
                Some((vertex, weights))
            })()
            .ok_or_else(|| DendroidalError::Json(format!("bad bracketing entry {item}")))?;
            let wb = WeightedBracketing::new(parsed.1).map_err(|source| DendroidalError::Bracketing { vertex: parsed.0, source })?;
            brackets.insert(parsed.0, wb);
        }
        OmegaTildeMorphism::new(base, brackets)
    }
}

/// `G ∘ F` in `Ω̃₀`. For a vertex `w` of the source the bracketing of
/// `(g∘f)(C_w)` collects the brackets of `G` on the corollas of `f(C_w)`,
/// the large proper images `g(C_v)` of those corollas with weight one, and
/// the large proper images of the brackets of `F` on `w`. Coinciding
/// brackets keep the larger weight.
pub fn compose_omega_tilde(g: &OmegaTildeMorphism, f: &OmegaTildeMorphism) -> Result<OmegaTildeMorphism, DendroidalError> {
    let base = compose_omega(&g.base, &f.base)?;
    let mut brackets = BTreeMap::new();
    for (w, total) in &base.vertex_image {
        let proper_large = |s: &BTreeSet<VertexId>| s.len() >= 2 && s.len() < total.len();
        let mut wb = WeightedBracketing::empty();
        for v in &f.base.vertex_image[w] {
            for (b, t) in g.bracketing(*v).weights() {
                wb.insert_max(b.clone(), t.clone());
            }
            let image = &g.base.vertex_image[v];
            if proper_large(image) {
                wb.insert_max(image.clone(), one());
            }
        }
        for (s, t) in f.bracketing(*w).weights() {
            let image: BTreeSet<VertexId> = s.iter().flat_map(|v| g.base.vertex_image[v].iter().copied()).collect();
            if proper_large(&image) {
                wb.insert_max(image, t.clone());
            }
        }
        brackets.insert(*w, wb);
    }
    OmegaTildeMorphism::new(base, brackets)
}

/// Composes `gs`, applied first to last.
pub fn compose_chain(gs: &[OmegaMorphism]) -> Result<OmegaMorphism, DendroidalError> {
    let (first, rest) = gs.split_first().ok_or(DendroidalError::EmptyFactorization)?;
    rest.iter().try_fold(first.clone(), |acc, g| compose_omega(g, &acc))
}

/// The bracketing of `(g_n ∘ … ∘ g_1)(C_v)` assigned to the factorization
/// `gs = [g_1, …, g_n]`: for each intermediate stage `i` and each vertex `w`
/// of `(g_i ∘ … ∘ g_1)(C_v)`, the image of `C_w` under the remaining maps,
/// when it is large and proper.
pub fn factorization_bracketing(gs: &[OmegaMorphism], v: VertexId) -> Result<Bracketing, DendroidalError> {
    let total = compose_chain(gs)?;
    let (image_tree, _) = total.image_tree(v)?;
    let whole = total.corolla_image(v)?;
    let mut set = BTreeSet::new();
    for i in 1..gs.len() {
        let prefix = compose_chain(&gs[..i])?;
        let suffix = compose_chain(&gs[i..])?;
        for w in prefix.corolla_image(v)? {
            let s = suffix.corolla_image(*w)?;
            if s.len() >= 2 && s.len() < whole.len() {
                set.insert(s.clone());
            }
        }
    }
    Bracketing::new(&image_tree, set).map_err(|source| DendroidalError::Bracketing { vertex: v, source })
}

/// The morphism of `Ω̃₀` that `q_g` assigns to a factorization, with every
/// bracket of weight one.
pub fn factorization_morphism(gs: &[OmegaMorphism]) -> Result<OmegaTildeMorphism, DendroidalError> {
    let total = compose_chain(gs)?;
    let mut brackets = BTreeMap::new();
    for v in total.source.index().vertices {
        brackets.insert(v, WeightedBracketing::with_unit_weights(&factorization_bracketing(gs, v)?));
    }
    OmegaTildeMorphism::new(total, brackets)
}

/// An algebra over `BO`.
pub trait BoAlgebra {
    type Value: Clone + PartialEq + fmt::Debug;

    fn arity(&self, x: &Self::Value) -> usize;

    fn evaluate(&self, x: &BOElement, inputs: &[Self::Value]) -> Result<Self::Value, DendroidalError>;
}

/// A strict operad, viewed as a `BO`-algebra through `BO → O`.
#[derive(Debug, Clone, Copy, Default)]
pub struct StrictAlgebra<P>(pub P);

impl<P> BoAlgebra for StrictAlgebra<P>
where
    P: StrictOperad,
    P::Element: PartialEq + fmt::Debug,
    P::Error: fmt::Display,
{
    type Value = P::Element;

    fn arity(&self, x: &P::Element) -> usize {
        self.0.arity(x)
    }

    fn evaluate(&self, x: &BOElement, inputs: &[P::Element]) -> Result<P::Element, DendroidalError> {
        act(&self.0, &x.base, inputs, FoldOrder::Preorder).map_err(|e| DendroidalError::Algebra(e.to_string()))
    }
}

/// Normalized cacti with the action `λ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CactusAlgebra;

impl BoAlgebra for CactusAlgebra {
    type Value = Cactus;

    fn arity(&self, x: &Cactus) -> usize {
        x.k()
    }

    fn evaluate(&self, x: &BOElement, inputs: &[Cactus]) -> Result<Cactus, DendroidalError> {
        if x.base.tree.is_eta() {
            return Ok(Cactus::unit());
        }
        Ok(lambda(&ActionContext::new(x.clone(), inputs.to_vec())?)?)
    }
}

/// A presheaf on `Ω̃₀`: values at a tree are tuples indexed by its
/// vertices.
pub trait DendroidalDiagram {
    type Value;

    /// The arities of the factors at `t`, in preorder.
    fn object(&self, t: &PlanarTree) -> Vec<usize>;

    /// Pulls values on the target back to the source.
    fn morphism(
        &self,
        m: &OmegaTildeMorphism,
        values: &BTreeMap<VertexId, Self::Value>,
    ) -> Result<BTreeMap<VertexId, Self::Value>, DendroidalError>;
}

/// The nerve `Φ(P)` of a `BO`-algebra.
#[derive(Debug, Clone, Copy, Default)]
pub struct Phi<P>(pub P);

impl<P: BoAlgebra> DendroidalDiagram for Phi<P> {
    type Value = P::Value;

    fn object(&self, t: &PlanarTree) -> Vec<usize> {
        phi_object(t)
    }

    fn morphism(
        &self,
        m: &OmegaTildeMorphism,
        values: &BTreeMap<VertexId, P::Value>,
    ) -> Result<BTreeMap<VertexId, P::Value>, DendroidalError> {
        phi_morphism(&self.0, m, values)
    }
}

/// `Φ(P)(T) = ∏_w P(|w|)`, as the list of arities in preorder.
pub fn phi_object(t: &PlanarTree) -> Vec<usize> {
    let ix = t.index();
    ix.vertices.iter().map(|v| ix.arity(*v)).collect()
}

/// The order in which the vertices of `g(C_v)` are fed to the algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputOrder {
    #[default]
    Preorder,
    ReversePreorder,
}

pub fn phi_morphism<P: BoAlgebra>(
    p: &P,
    m: &OmegaTildeMorphism,
    values: &BTreeMap<VertexId, P::Value>,
) -> Result<BTreeMap<VertexId, P::Value>, DendroidalError> {
    phi_morphism_ordered(p, m, values, InputOrder::Preorder)
}

/// `Φ(P)(g)`: each source vertex `v` gets the value of the algebra on
/// `g(C_v)` with its bracketing, fed with the target values on `g(C_v)`.
/// Input `j` of `v` is matched with the leaf of `g(C_v)` that the edge map
/// sends it to.
pub fn phi_morphism_ordered<P: BoAlgebra>(
    p: &P,
    m: &OmegaTildeMorphism,
    values: &BTreeMap<VertexId, P::Value>,
    order: InputOrder,
) -> Result<BTreeMap<VertexId, P::Value>, DendroidalError> {
    let tx = m.base.target.index();
    if values.keys().ne(tx.vertices.iter().collect::<BTreeSet<_>>()) {
        return Err(DendroidalError::MissingValues);
    }
    for (u, x) in values {
        let expected = tx.arity(*u);
        if p.arity(x) != expected {
            return Err(DendroidalError::TypeMismatch { vertex: *u, expected, found: p.arity(x) });
        }
    }
    let sx = m.base.source.index();
    let mut out = BTreeMap::new();
    for v in &sx.vertices {
        let (tree, boundary) = m.base.image_tree(*v)?;
        let ux = tree.index();
        let mut sigma = ux.vertices.clone();
        if order == InputOrder::ReversePreorder {
            sigma.reverse();
        }
        let tau: Vec<LeafId> = sx
            .inputs(*v)
            .iter()
            .map(|e| {
                let pos = boundary.iter().position(|b| *b == m.base.edge_map[e]).expect("inputs map onto the boundary");
                ux.leaves[pos]
            })
            .collect();
        let base = OElement::new(tree, sigma.clone(), tau)?;
        let x = BOElement::new(base, m.bracketing(*v))?;
        let inputs: Vec<P::Value> = sigma.iter().map(|u| values[u].clone()).collect();
        out.insert(*v, p.evaluate(&x, &inputs)?);
    }
    Ok(out)
}

/// Recomputes the Segal map of `Φ(P)` at `t` through the corolla
/// inclusions and compares it with the values.
pub fn segal_check<P: BoAlgebra>(p: &P, t: &PlanarTree, values: &BTreeMap<VertexId, P::Value>) -> Result<bool, DendroidalError> {
    for v in t.vertices() {
        let iota = OmegaTildeMorphism::unbracketed(corolla_inclusion(t, v)?);
        let pulled = phi_morphism(p, &iota, values)?;
        if pulled.len() != 1 || pulled.get(&v) != values.get(&v) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bracketings::maximal_bracketings;
    use crate::rational::q;
    use crate::trees::{caterpillar, Shape, ShapeInput};


    fn ids(xs: &[u32]) -> BTreeSet<VertexId> {
        xs.iter().map(|x| VertexId(*x)).collect()
    }

    /// The unique planar face with the prescribed vertex images.
    fn face_with_images(s: &PlanarTree, t: &PlanarTree, images: &[(u32, &[u32])]) -> OmegaMorphism {
        let found: Vec<_> = enumerate_morphisms(s, t, MorphismClass::PlanarFaces, 100_000)
            .unwrap()
            .into_iter()
            .filter(|m| images.iter().all(|(v, set)| m.vertex_image[&VertexId(*v)] == ids(set)))
            .collect();
        assert_eq!(found.len(), 1);
        found.into_iter().next().unwrap()
    }

    #[test]
    fn worked_composite_bracketing() {
        use ShapeInput::{Leaf as L, Node as N};
        // u0[u1,L,L,L], u1[u2,L], u2[u3,L], u3[u4,L], u4[u5,L,L], u5[L,L]
        let t = PlanarTree::from_shape(&Shape::Node(vec![
            N(vec![N(vec![N(vec![N(vec![N(vec![L, L]), L, L]), L]), L]), L]),
            L,
            L,
            L,
        ]));
        // v0[v1,L,L,L], v1[v2,L,L,L], v2[v3,L,L], v3[L,L]
        let s = PlanarTree::from_shape(&Shape::Node(vec![
            N(vec![N(vec![N(vec![L, L]), L, L]), L, L, L]),
            L,
            L,
            L,
        ]));
        let r = PlanarTree::corolla(9);
        let f = face_with_images(&r, &s, &[(0, &[0, 1, 2])]);
        let g = face_with_images(&s, &t, &[(0, &[0]), (1, &[1, 2, 3]), (2, &[4]), (3, &[5])]);
        let gf = compose_omega(&g, &f).unwrap();
        assert_eq!(gf.vertex_image[&VertexId(0)], ids(&[0, 1, 2, 3, 4]));

        let b1 = WeightedBracketing::new(BTreeMap::from([(ids(&[0, 1]), q(1, 2))])).unwrap();
        let b2 = WeightedBracketing::new(BTreeMap::from([(ids(&[2, 3]), q(1, 3))])).unwrap();
        let ft = OmegaTildeMorphism::new(f, BTreeMap::from([(VertexId(0), b1)])).unwrap();
        let gt = OmegaTildeMorphism::new(g, BTreeMap::from([(VertexId(1), b2)])).unwrap();
        let composite = compose_omega_tilde(&gt, &ft).unwrap();
        let expected = BTreeMap::from([(ids(&[2, 3]), q(1, 3)), (ids(&[1, 2, 3]), one()), (ids(&[0, 1, 2, 3]), q(1, 2))]);
        assert_eq!(composite.bracketing(VertexId(0)).weights(), &expected);
    }

    #[test]
    fn prism_of_a_map_with_two_large_images() {
        use ShapeInput::{Leaf as L, Node as N};
        // u1-u2-u3 is a chain, u4 the centre of a star with arms u5, u6, u7
        let t = PlanarTree::from_shape(&Shape::Node(vec![
            N(vec![N(vec![N(vec![L, L]), L]), L]),
            L,
            N(vec![N(vec![L, L]), N(vec![L, L]), N(vec![L, L])]),
        ]));
        let s = collapse(&collapse(&t, &Subtree::from_set(ids(&[1, 2, 3]))), &Subtree::from_set(ids(&[4, 5, 6, 7])));
        let g = OmegaMorphism::new(s.clone(), t.clone(), identity_edges(&s)).unwrap();
        let sizes: Vec<usize> = s.vertices().iter().map(|v| g.corolla_image(*v).unwrap().len()).collect();
        assert_eq!(sizes, vec![1, 3, 4]);
        let counts: Vec<usize> = s
            .vertices()
            .iter()
            .map(|v| maximal_bracketings(&g.image_tree(*v).unwrap().0).unwrap().len())
            .collect();
        assert_eq!(counts, vec![1, 2, 6]);
        assert_eq!(counts.iter().product::<usize>(), 12);
    }

    #[test]
    fn corolla_into_caterpillar_has_one_face() {
        for n in 1..=4 {
            let t = caterpillar(n, 1);
            let faces = enumerate_morphisms(&PlanarTree::corolla(n + 1), &t, MorphismClass::PlanarFaces, 100_000).unwrap();
            assert_eq!(faces.len(), 1);
        }
    }

    #[test]
    fn json_roundtrip() {
        let t = caterpillar(3, 2);
        let m = inner_face(&t, VertexId(1)).unwrap();
        let back = OmegaMorphism::from_json(&m.to_json()).unwrap();
        assert_eq!(back.vertex_image, m.vertex_image);
        assert_eq!(back.to_json(), m.to_json());
    }
}
