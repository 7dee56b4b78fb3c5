//! The operad of operads `O` and the bracketed operad `BO`.
//!
//! An element of `O` is a planar tree `T` with a labelling `σ` of its
//! vertices (the inputs of the operation) and a labelling `τ` of its leaves.
//! Labels are 0-based here: `sigma[i]` is the vertex carrying input `i` and
//! `tau[j]` is the leaf labelled `j`.

use crate::bracketings::{check_bracket, Bracket, BracketError, WeightedBracketing};
use crate::rational::one;
use crate::trees::{is_permutation, LeafId, PlanarTree, TreeError, VertexId};
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OperadError {
    #[error("slot {slot} out of range for an operation with {arity} inputs")]
    SlotOutOfRange { slot: usize, arity: usize },
    #[error("color mismatch in slot {slot}: vertex has arity {expected}, inserted element has {found} leaves")]
    ColorMismatch { slot: usize, expected: usize, found: usize },
    #[error("permutation of size {found} does not act on {expected} labels")]
    BadPermutation { expected: usize, found: usize },
    #[error("labelling is not a bijection: {0}")]
    BadLabelling(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Bracket(#[from] BracketError),
    #[error("malformed element json: {0}")]
    Json(String),
}

/// A labelled planar tree `(T, σ, τ)`.
///
/// Equality is equality of labelled planar trees up to renaming of vertex
/// and leaf ids.
#[derive(Debug, Clone)]
pub struct OElement {
    pub tree: PlanarTree,
    pub sigma: Vec<VertexId>,
    pub tau: Vec<LeafId>,
}

impl PartialEq for OElement {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (self.canonical(), other.canonical());
        a.tree == b.tree && a.sigma == b.sigma && a.tau == b.tau
    }
}

impl Eq for OElement {}

impl OElement {
    pub fn new(tree: PlanarTree, sigma: Vec<VertexId>, tau: Vec<LeafId>) -> Result<OElement, OperadError> {
        let e = OElement { tree, sigma, tau };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<(), OperadError> {
        let ix = self.tree.index();
        let vs: BTreeSet<_> = self.sigma.iter().collect();
        if vs.len() != self.sigma.len() || vs != ix.vertices.iter().collect() {
            return Err(OperadError::BadLabelling("sigma".into()));
        }
        let ls: BTreeSet<_> = self.tau.iter().collect();
        if ls.len() != self.tau.len() || ls != ix.leaves.iter().collect() {
            return Err(OperadError::BadLabelling("tau".into()));
        }
        Ok(())
    }

    /// The tree labelled in preorder and planar leaf order.
    pub fn planar(tree: PlanarTree) -> OElement {
        let ix = tree.index();
        OElement { sigma: ix.vertices, tau: ix.leaves, tree }
    }

    /// The corolla `C_n` with its canonical labelling: the unit of `O(n;n)`.
    pub fn unit(n: usize) -> OElement {
        OElement::planar(PlanarTree::corolla(n))
    }

    pub fn eta() -> OElement {
        OElement::planar(PlanarTree::eta())
    }

    /// Number of inputs (vertices).
    pub fn arity(&self) -> usize {
        self.sigma.len()
    }

    /// The output color `n = |L(T)|`.
    pub fn output_color(&self) -> usize {
        self.tau.len()
    }

    /// The input colors `m_i = |σ(i)|`.
    pub fn input_colors(&self) -> Vec<usize> {
        self.sigma.iter().map(|v| self.tree.arity(*v).expect("sigma names vertices")).collect()
    }

    pub fn label_of(&self, v: VertexId) -> Option<usize> {
        self.sigma.iter().position(|x| *x == v)
    }

    /// For each planar leaf position, the label of that leaf.
    pub fn leaf_labels_in_planar_order(&self) -> Vec<usize> {
        self.tree
            .leaves()
            .iter()
            .map(|l| self.tau.iter().position(|x| x == l).expect("tau is a bijection"))
            .collect()
    }

    /// For each label, the planar position of its leaf.
    pub fn tau_positions(&self) -> Vec<usize> {
        let leaves = self.tree.leaves();
        self.tau.iter().map(|l| leaves.iter().position(|x| x == l).expect("tau is a bijection")).collect()
    }

    /// Renumbers ids in preorder and planar order.
    pub fn canonical(&self) -> OElement {
        let (tree, vmap, lmap) = self.tree.renumbered();
        OElement {
            tree,
            sigma: self.sigma.iter().map(|v| vmap[v]).collect(),
            tau: self.tau.iter().map(|l| lmap[l]).collect(),
        }
    }

    /// `a ∘_i b`, together with the ids given to the vertices of `b`.
    pub fn compose_tracked(&self, i: usize, b: &OElement) -> Result<(OElement, BTreeMap<VertexId, VertexId>), OperadError> {
        let k = self.arity();
        if i >= k {
            return Err(OperadError::SlotOutOfRange { slot: i, arity: k });
        }
        let v = self.sigma[i];
        let expected = self.tree.arity(v)?;
        if expected != b.output_color() {
            return Err(OperadError::ColorMismatch { slot: i, expected, found: b.output_color() });
        }
        let sub = self.tree.substitute_labelled(v, &b.tau_positions(), &b.tree)?;
        let mut sigma = Vec::with_capacity(k - 1 + b.arity());
        sigma.extend_from_slice(&self.sigma[..i]);
        sigma.extend(b.sigma.iter().map(|x| sub.inserted[x]));
        sigma.extend_from_slice(&self.sigma[i + 1..]);
        let out = OElement { tree: sub.tree, sigma, tau: self.tau.clone() };
        Ok((out, sub.inserted))
    }

    pub fn compose(&self, i: usize, b: &OElement) -> Result<OElement, OperadError> {
        Ok(self.compose_tracked(i, b)?.0)
    }

    /// Right action on input labels: the new `σ` is `σ∘perm`.
    pub fn sigma_act(&self, perm: &[usize]) -> Result<OElement, OperadError> {
        if !is_permutation(perm, self.arity()) {
            return Err(OperadError::BadPermutation { expected: self.arity(), found: perm.len() });
        }
        Ok(OElement {
            tree: self.tree.clone(),
            sigma: perm.iter().map(|p| self.sigma[*p]).collect(),
            tau: self.tau.clone(),
        })
    }

    pub fn to_json(&self) -> Value {
        let c = self.canonical();
        json!({
            "tree": c.tree.to_json(),
            "sigma": c.sigma.iter().map(|v| v.0).collect::<Vec<_>>(),
            "tau": c.tau.iter().map(|l| l.0).collect::<Vec<_>>(),
        })
    }

    /// Reads `{"tree":…, "sigma":[…], "tau":[…]}`. `sigma` lists vertex
    /// ids, `tau` lists planar leaf positions; both default to planar order.
    pub fn from_json(v: &Value) -> Result<OElement, OperadError> {
        let tree = PlanarTree::from_json(v.get("tree").ok_or_else(|| OperadError::Json("missing tree".into()))?)?;
        let ix = tree.index();
        let read = |key: &str| -> Result<Option<Vec<u32>>, OperadError> {
            match v.get(key) {
                None => Ok(None),
                Some(arr) => arr
                    .as_array()
                    .ok_or_else(|| OperadError::Json(format!("{key} must be an array")))?
                    .iter()
                    .map(|x| x.as_u64().map(|x| x as u32).ok_or_else(|| OperadError::Json(format!("bad entry in {key}"))))
                    .collect::<Result<Vec<_>, _>>()
                    .map(Some),
            }
        };
        let sigma = match read("sigma")? {
            Some(s) => s.into_iter().map(VertexId).collect(),
            None => ix.vertices.clone(),
        };
        let tau = match read("tau")? {
            Some(t) => t
                .into_iter()
                .map(|p| ix.leaves.get(p as usize).copied().ok_or_else(|| OperadError::BadLabelling("tau".into())))
                .collect::<Result<Vec<_>, _>>()?,
            None => ix.leaves.clone(),
        };
        OElement::new(tree, sigma, tau)
    }
}

/// A point of `BO`: a labelled tree with a weighted bracketing.
#[derive(Debug, Clone)]
pub struct BOElement {
    pub base: OElement,
    pub weighted: WeightedBracketing,
}

impl PartialEq for BOElement {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (self.canonical(), other.canonical());
        a.base.tree == b.base.tree && a.base.sigma == b.base.sigma && a.base.tau == b.base.tau && a.weighted == b.weighted
    }
}

impl Eq for BOElement {}

impl BOElement {
    pub fn new(base: OElement, weighted: WeightedBracketing) -> Result<BOElement, OperadError> {
        base.validate()?;
        weighted.validate(&base.tree)?;
        Ok(BOElement { base, weighted })
    }

    pub fn unbracketed(base: OElement) -> BOElement {
        BOElement { base, weighted: WeightedBracketing::empty() }
    }

    /// `(C_n, id, planar, ∅)`.
    pub fn unit(n: usize) -> BOElement {
        BOElement::unbracketed(OElement::unit(n))
    }

    pub fn arity(&self) -> usize {
        self.base.arity()
    }

    pub fn canonical(&self) -> BOElement {
        let (tree, vmap, lmap) = self.base.tree.renumbered();
        let base = OElement {
            tree,
            sigma: self.base.sigma.iter().map(|v| vmap[v]).collect(),
            tau: self.base.tau.iter().map(|l| lmap[l]).collect(),
        };
        let weights = self
            .weighted
            .weights()
            .iter()
            .map(|(b, w)| (b.iter().map(|v| vmap[v]).collect(), w.clone()))
            .collect();
        BOElement { base, weighted: WeightedBracketing::new(weights).expect("weights already normal") }
    }

    /// `a ∘_i b`: brackets of `a` are transported, brackets of `b` are
    /// injected, and `V(b)` becomes a new weight-1 bracket when it is large
    /// and proper. Colliding brackets keep the larger weight.
    pub fn compose(&self, i: usize, b: &BOElement) -> Result<BOElement, OperadError> {
        let v = *self
            .base
            .sigma
            .get(i)
            .ok_or(OperadError::SlotOutOfRange { slot: i, arity: self.arity() })?;
        let (base, inserted) = self.base.compose_tracked(i, &b.base)?;
        let total = base.tree.vertex_count();
        let image: Bracket = inserted.values().copied().collect();
        let mut weighted = WeightedBracketing::empty();
        let keep = |s: Bracket, w, weighted: &mut WeightedBracketing| {
            if s.len() >= 2 && s.len() < total {
                debug_assert!(check_bracket(&base.tree, &s).is_ok());
                weighted.insert_max(s, w);
            }
        };
        for (s, w) in self.weighted.weights() {
            let moved = if s.contains(&v) {
                s.iter().filter(|x| **x != v).copied().chain(image.iter().copied()).collect()
            } else {
                s.clone()
            };
            keep(moved, w.clone(), &mut weighted);
        }
        for (s, w) in b.weighted.weights() {
            keep(s.iter().map(|x| inserted[x]).collect(), w.clone(), &mut weighted);
        }
        keep(image, one(), &mut weighted);
        Ok(BOElement { base, weighted })
    }

    pub fn sigma_act(&self, perm: &[usize]) -> Result<BOElement, OperadError> {
        Ok(BOElement { base: self.base.sigma_act(perm)?, weighted: self.weighted.clone() })
    }

    /// Forgets the brackets.
    pub fn forget(&self) -> OElement {
        self.base.clone()
    }

    pub fn to_json(&self) -> Value {
        let c = self.canonical();
        let mut v = c.base.to_json();
        v["brackets"] = c.weighted.to_json();
        v
    }

    pub fn from_json(v: &Value) -> Result<BOElement, OperadError> {
        let base = OElement::from_json(v)?;
        let weighted = match v.get("brackets") {
            Some(b) => WeightedBracketing::from_json(b)?,
            None => WeightedBracketing::empty(),
        };
        BOElement::new(base, weighted)
    }
}

/// A strict symmetric operad, used as a coefficient system for the action
/// of `O` by iterated composition.
pub trait StrictOperad {
    type Element: Clone;
    type Error: From<OperadError>;

    fn arity(&self, x: &Self::Element) -> usize;

    fn unit(&self) -> Self::Element;

    fn compose(&self, a: &Self::Element, i: usize, b: &Self::Element) -> Result<Self::Element, Self::Error>;

    /// Relabels inputs: old input `p` becomes input `perm[p]`.
    fn relabel(&self, x: &Self::Element, perm: &[usize]) -> Result<Self::Element, Self::Error>;
}

/// Order in which [`act`] visits the vertices of the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldOrder {
    /// Root first, then each branch in planar order.
    Preorder,
    /// Level by level.
    Breadth,
}

/// The action of `O` on a strict operad: composes the inputs along the
/// tree, then applies `τ`.
pub fn act<P: StrictOperad>(
    p: &P,
    element: &OElement,
    inputs: &[P::Element],
    order: FoldOrder,
) -> Result<P::Element, P::Error> {
    let colors = element.input_colors();
    if inputs.len() != colors.len() {
        return Err(OperadError::BadPermutation { expected: colors.len(), found: inputs.len() }.into());
    }
    for (slot, (x, c)) in inputs.iter().zip(&colors).enumerate() {
        if p.arity(x) != *c {
            return Err(OperadError::ColorMismatch { slot, expected: *c, found: p.arity(x) }.into());
        }
    }
    let ix = element.tree.index();
    let Some(root) = element.tree.root_vertex().map(|r| r.id) else {
        return Ok(p.unit());
    };
    let visit: Vec<VertexId> = match order {
        FoldOrder::Preorder => ix.vertices.clone(),
        FoldOrder::Breadth => {
            let mut out = Vec::new();
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                out.push(v);
                for e in ix.inputs(v) {
                    if let crate::trees::Edge::Out(c) = e {
                        queue.push_back(*c);
                    }
                }
            }
            out
        }
    };
    let input_of = |v: VertexId| &inputs[element.label_of(v).expect("sigma is a bijection")];
    let mut value = input_of(root).clone();
    let mut open: Vec<crate::trees::Edge> = ix.inputs(root).to_vec();
    for v in visit.into_iter().skip(1) {
        let pos = open
            .iter()
            .position(|e| *e == crate::trees::Edge::Out(v))
            .expect("parents are visited first");
        value = p.compose(&value, pos, input_of(v))?;
        open.splice(pos..=pos, ix.inputs(v).iter().copied());
    }
    p.relabel(&value, &element.leaf_labels_in_planar_order())
}

/// The associative operad: `Ass(n)` is the set of words using each of
/// `0..n` once.
#[derive(Debug, Clone, Copy, Default)]
pub struct Associative;

impl StrictOperad for Associative {
    type Element = Vec<usize>;
    type Error = OperadError;

    fn arity(&self, x: &Vec<usize>) -> usize {
        x.len()
    }

    fn unit(&self) -> Vec<usize> {
        vec![0]
    }

    fn compose(&self, a: &Vec<usize>, i: usize, b: &Vec<usize>) -> Result<Vec<usize>, OperadError> {
        if i >= a.len() {
            return Err(OperadError::SlotOutOfRange { slot: i, arity: a.len() });
        }
        let m = b.len();
        let mut out = Vec::with_capacity(a.len() + m - 1);
        for &letter in a {
            match letter.cmp(&i) {
                std::cmp::Ordering::Less => out.push(letter),
                std::cmp::Ordering::Equal => out.extend(b.iter().map(|x| x + i)),
                std::cmp::Ordering::Greater => out.push(letter + m - 1),
            }
        }
        Ok(out)
    }

    fn relabel(&self, x: &Vec<usize>, perm: &[usize]) -> Result<Vec<usize>, OperadError> {
        if !is_permutation(perm, x.len()) {
            return Err(OperadError::BadPermutation { expected: x.len(), found: perm.len() });
        }
        Ok(x.iter().map(|l| perm[*l]).collect())
    }
}

/// The terminal operad: one operation in each arity.
#[derive(Debug, Clone, Copy, Default)]
pub struct Terminal;

impl StrictOperad for Terminal {
    type Element = usize;
    type Error = OperadError;

    fn arity(&self, x: &usize) -> usize {
        *x
    }

    fn unit(&self) -> usize {
        1
    }

    fn compose(&self, a: &usize, i: usize, b: &usize) -> Result<usize, OperadError> {
        if i >= *a {
            return Err(OperadError::SlotOutOfRange { slot: i, arity: *a });
        }
        Ok(a + b - 1)
    }

    fn relabel(&self, x: &usize, perm: &[usize]) -> Result<usize, OperadError> {
        if !is_permutation(perm, *x) {
            return Err(OperadError::BadPermutation { expected: *x, found: perm.len() });
        }
        Ok(*x)
    }
}
