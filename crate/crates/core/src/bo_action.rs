//! The action of `BO` on normalized cacti.
//!
//! Each vertex `v` of a bracketed tree is decorated by its input cactus
//! `x_v` together with the inverse of a scaling map `g(x_v; ξ_v)`, each
//! bracket `S` contributes an extra unary vertex on its root edge decorated
//! by the unit cactus and the inverse of a correcting map `H_S`, and the
//! decorated tree is evaluated in `MS⁺`. Forgetting the reparametrization
//! gives the result. Weighted bracketings interpolate the scaling maps
//! along the chain of the bracketing with barycentric coefficients.

use crate::bracketings::{weights_to_chain, Bracket, BracketChain, BracketError, Bracketing};
use crate::cacti::{ms_compose_cactus, scaling_map, Cactus, CactusError, MSElement, MsOperad};
use crate::operad::{act, BOElement, FoldOrder, OElement, OperadError, StrictOperad};
use crate::plmaps::{MonotoneReparam, PlError};
use crate::rational::Q;
use crate::trees::{Edge, Input, PlanarTree, Subtree, TreeIndex, Vertex, VertexId};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ActionError {
    #[error("{found} inputs given for an element with {expected} vertices")]
    InputCount { expected: usize, found: usize },
    #[error("input {label} has {found} lobes but its vertex has arity {expected}")]
    ArityMismatch { label: usize, expected: usize, found: usize },
    #[error("vertex {0} has arity 0; nullary cacti are not supported")]
    NullaryVertex(VertexId),
    #[error(transparent)]
    Cactus(#[from] CactusError),
    #[error(transparent)]
    Operad(#[from] OperadError),
    #[error(transparent)]
    Map(#[from] PlError),
    #[error(transparent)]
    Bracket(#[from] BracketError),
}

/// A bracketed tree together with one cactus per vertex label.
#[derive(Debug, Clone)]
pub struct ActionContext {
    pub element: BOElement,
    pub inputs: Vec<Cactus>,
}

impl ActionContext {
    pub fn new(element: BOElement, inputs: Vec<Cactus>) -> Result<ActionContext, ActionError> {
        let colors = element.base.input_colors();
        if colors.len() != inputs.len() {
            return Err(ActionError::InputCount { expected: colors.len(), found: inputs.len() });
        }
        for (label, (c, x)) in colors.iter().zip(&inputs).enumerate() {
            if *c == 0 {
                return Err(ActionError::NullaryVertex(element.base.sigma[label]));
            }
            if x.k() != *c {
                return Err(ActionError::ArityMismatch { label, expected: *c, found: x.k() });
            }
        }
        Ok(ActionContext { element, inputs })
    }

    fn decorations(&self) -> BTreeMap<VertexId, Cactus> {
        self.element.base.sigma.iter().copied().zip(self.inputs.iter().cloned()).collect()
    }
}

/// Intermediate data of one evaluation, for inspection.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    /// Interpolated vertex scaling `G_v`, by vertex of the reduced tree.
    pub vertex_scalings: BTreeMap<VertexId, MonotoneReparam>,
    /// Interpolated bracket scaling `H_S`.
    pub bracket_scalings: BTreeMap<Bracket, MonotoneReparam>,
    /// The `MS⁺` value before forgetting the reparametrization.
    pub ms_value: Option<MSElement>,
}

fn leaf_count(ix: &TreeIndex, s: &Bracket) -> usize {
    s.iter().map(|v| ix.arity(*v)).sum::<usize>() + 1 - s.len()
}

/// `ξ` for the input edges `edges`, relative to the container `container`
/// (`None` for the whole tree) and the brackets `level`.
fn xi_for_edges(ix: &TreeIndex, level: &Bracketing, container: Option<&Bracket>, edges: &[Edge]) -> Vec<usize> {
    edges
        .iter()
        .map(|e| {
            let w = match e {
                Edge::Leaf(_) => return 1,
                Edge::Out(w) => *w,
            };
            if container.is_some_and(|c| !c.contains(&w)) {
                return 1;
            }
            let rooted = level
                .brackets()
                .iter()
                .filter(|s| s.contains(&w) && ix.parent(w).map_or(true, |(p, _)| !s.contains(&p)))
                .filter(|s| container.map_or(true, |c| s.is_subset(c) && *s != c))
                .max_by_key(|s| s.len());
            match rooted {
                Some(s) => leaf_count(ix, s),
                None => ix.arity(w),
            }
        })
        .collect()
}

fn smallest_container<'a>(level: &'a Bracketing, pred: impl Fn(&Bracket) -> bool) -> Option<&'a Bracket> {
    level.brackets().iter().filter(|s| pred(s)).min_by_key(|s| s.len())
}

/// `ξ_v` at the vertex `v` of `tree` for the bracketing `b`, in planar
/// order of the inputs of `v`.
pub fn xi_map(tree: &PlanarTree, b: &Bracketing, v: VertexId) -> Result<Vec<usize>, ActionError> {
    let ix = tree.index();
    if !ix.contains(v) {
        return Err(OperadError::from(crate::trees::TreeError::UnknownVertex(v)).into());
    }
    let container = smallest_container(b, |s| s.contains(&v));
    Ok(xi_for_edges(&ix, b, container, ix.inputs(v)))
}

fn xi_for_bracket(ix: &TreeIndex, level: &Bracketing, s: &Bracket) -> Vec<usize> {
    let container = smallest_container(level, |c| s.is_subset(c) && c != s);
    let leaves = Subtree::from_set(s.clone()).leaves(ix);
    xi_for_edges(ix, level, container, &leaves)
}

/// Removes the unary vertices (whose input is necessarily the unit cactus)
/// and transports the brackets of every level of the chain.
fn reduce(
    tree: &PlanarTree,
    inputs: &BTreeMap<VertexId, Cactus>,
    chain: &BracketChain,
) -> Result<(PlanarTree, BTreeMap<VertexId, Cactus>, BracketChain), ActionError> {
    let ix = tree.index();
    if let Some(v) = ix.vertices.iter().find(|v| ix.arity(**v) == 0) {
        return Err(ActionError::NullaryVertex(*v));
    }
    let unary: Vec<VertexId> = ix.vertices.iter().copied().filter(|v| ix.arity(*v) == 1).collect();
    let mut t = tree.clone();
    for u in &unary {
        t = t.substitute(*u, &PlanarTree::eta()).map_err(OperadError::from)?.tree;
    }
    let total = t.vertex_count();
    let levels = chain
        .levels
        .iter()
        .map(|level| {
            Bracketing::from_set(
                level
                    .brackets()
                    .iter()
                    .map(|s| s.iter().copied().filter(|v| !unary.contains(v)).collect::<Bracket>())
                    .filter(|s| s.len() >= 2 && s.len() < total)
                    .collect(),
            )
        })
        .collect();
    let inputs = inputs.iter().filter(|(v, _)| !unary.contains(v)).map(|(v, x)| (*v, x.clone())).collect();
    Ok((t, inputs, BracketChain { levels, coords: chain.coords.clone() }))
}

/// The chain seen from inside the bracket `s`: each level keeps the
/// brackets strictly contained in `s`. Levels may repeat.
fn restrict(chain: &BracketChain, s: &Bracket) -> BracketChain {
    let levels = chain
        .levels
        .iter()
        .map(|level| Bracketing::from_set(level.brackets().iter().filter(|b| b.is_subset(s) && *b != s).cloned().collect()))
        .collect();
    BracketChain { levels, coords: chain.coords.clone() }
}

/// Evaluates a reduced bracketed tree (all arities ≥ 2) in `MS⁺`; the
/// lobes of the result follow the planar order of the leaves.
fn evaluate(
    tree: &PlanarTree,
    inputs: &BTreeMap<VertexId, Cactus>,
    chain: &BracketChain,
    mut trace: Option<&mut Trace>,
    reparam: bool,
) -> Result<MSElement, ActionError> {
    let ix = tree.index();
    let coeffs: Vec<Q> = chain.barycentric();
    let brackets = chain.levels.last().map(|l| l.brackets().clone()).unwrap_or_default();

    let mut decorations: BTreeMap<VertexId, MSElement> = BTreeMap::new();
    for v in &ix.vertices {
        let x = &inputs[v];
        let mut seen: Vec<(Vec<usize>, MonotoneReparam)> = Vec::new();
        let mut maps = Vec::with_capacity(chain.levels.len());
        for level in &chain.levels {
            let container = smallest_container(level, |s| s.contains(v));
            let xi = xi_for_edges(&ix, level, container, ix.inputs(*v));
            match seen.iter().find(|(known, _)| *known == xi) {
                Some((_, g)) => maps.push(g.clone()),
                None => {
                    let g = scaling_map(x, &xi)?;
                    seen.push((xi, g.clone()));
                    maps.push(g);
                }
            }
        }
        let g = MonotoneReparam::convex_combination(&coeffs, &maps)?;
        decorations.insert(*v, MSElement::new(x.clone(), g.inverse()));
        if let Some(t) = trace.as_deref_mut() {
            t.vertex_scalings.insert(*v, g);
        }
    }

    let mut bracket_ids: BTreeMap<Bracket, VertexId> = BTreeMap::new();
    let mut next = tree.next_vertex_id();
    for s in &brackets {
        let (sub, _) = Subtree::from_set(s.clone()).extract(tree);
        let inner = evaluate(&sub, inputs, &restrict(chain, s), None, true)?;
        let maps = chain
            .levels
            .iter()
            .map(|level| {
                if level.contains(s) {
                    Ok(scaling_map(&inner.cactus, &xi_for_bracket(&ix, level, s))?.compose(&inner.reparam))
                } else {
                    Ok(MonotoneReparam::identity())
                }
            })
            .collect::<Result<Vec<_>, ActionError>>()?;
        let h = MonotoneReparam::convex_combination(&coeffs, &maps)?;
        let id = VertexId(next);
        next += 1;
        bracket_ids.insert(s.clone(), id);
        decorations.insert(id, MSElement::new(Cactus::unit(), h.inverse()));
        if let Some(t) = trace.as_deref_mut() {
            t.bracket_scalings.insert(s.clone(), h);
        }
    }

    let augmented = augment(tree, &ix, &bracket_ids);
    let labelled = OElement::planar(augmented);
    let ordered: Vec<MSElement> = labelled.sigma.iter().map(|v| decorations[v].clone()).collect();
    let value = if reparam || trace.is_some() {
        act(&MsOperad, &labelled, &ordered, FoldOrder::Preorder)?
    } else {
        act(&CactusPart, &labelled, &ordered, FoldOrder::Preorder)?
    };
    if let Some(t) = trace {
        t.ms_value = Some(value.clone());
    }
    Ok(value)
}

/// `T′`: one unary vertex on the root edge of each bracket, the vertex of a
/// larger bracket below that of a smaller one with the same root.
fn augment(tree: &PlanarTree, ix: &TreeIndex, bracket_ids: &BTreeMap<Bracket, VertexId>) -> PlanarTree {
    let mut by_root: BTreeMap<VertexId, Vec<(usize, VertexId)>> = BTreeMap::new();
    for (s, id) in bracket_ids {
        let root = Subtree::from_set(s.clone()).root_vertex(ix);
        by_root.entry(root).or_default().push((s.len(), *id));
    }
    for list in by_root.values_mut() {
        list.sort();
    }
    fn go(v: &Vertex, by_root: &BTreeMap<VertexId, Vec<(usize, VertexId)>>) -> Vertex {
        let inputs = v
            .inputs
            .iter()
            .map(|i| match i {
                Input::Leaf(l) => Input::Leaf(*l),
                Input::Vertex(c) => Input::Vertex(go(c, by_root)),
            })
            .collect();
        let mut out = Vertex { id: v.id, inputs };
        if let Some(list) = by_root.get(&v.id) {
            for (_, id) in list {
                out = Vertex { id: *id, inputs: vec![Input::Vertex(out)] };
            }
        }
        out
    }
    match tree {
        PlanarTree::Eta(_) => tree.clone(),
        PlanarTree::Rooted(r) => PlanarTree::Rooted(go(r, &by_root)),
    }
}

/// `λ`, with its intermediate data.
pub fn lambda_traced(ctx: &ActionContext) -> Result<(Cactus, Trace), ActionError> {
    let mut trace = Trace::default();
    let out = on_chain(ctx, &weights_to_chain(&ctx.element.weighted), Some(&mut trace))?;
    Ok((out, trace))
}

fn on_chain(ctx: &ActionContext, chain: &BracketChain, trace: Option<&mut Trace>) -> Result<Cactus, ActionError> {
    let base = &ctx.element.base;
    let (tree, inputs, chain) = reduce(&base.tree, &ctx.decorations(), chain)?;
    if tree.is_eta() {
        return Ok(Cactus::unit());
    }
    let value = evaluate(&tree, &inputs, &chain, trace, false)?;
    let labels = base.leaf_labels_in_planar_order();
    Ok(value.cactus.relabel(&labels)?)
}

/// `MS⁺` with the reparametrization of the accumulated value dropped.
/// Folding a tree from its root only ever composes into the accumulated
/// value, whose reparametrization never affects the cactus.
struct CactusPart;

impl StrictOperad for CactusPart {
    type Element = MSElement;
    type Error = CactusError;

    fn arity(&self, x: &MSElement) -> usize {
        x.k()
    }

    fn unit(&self) -> MSElement {
        MSElement::unit()
    }

    fn compose(&self, a: &MSElement, i: usize, b: &MSElement) -> Result<MSElement, CactusError> {
        Ok(MSElement::plain(ms_compose_cactus(&a.cactus, i, b)?))
    }

    fn relabel(&self, x: &MSElement, perm: &[usize]) -> Result<MSElement, CactusError> {
        MsOperad.relabel(x, perm)
    }
}

/// `λ` at an explicit point of the realization of the bracketing poset:
/// the chain may end in coordinate 0, and its levels replace the
/// bracketing of `ctx.element`.
pub fn lambda_on_chain(ctx: &ActionContext, chain: &BracketChain) -> Result<Cactus, ActionError> {
    chain.validate()?;
    for level in &chain.levels {
        level.validate(&ctx.element.base.tree)?;
    }
    on_chain(ctx, chain, None)
}

/// `λ(T, σ, τ, B; x_1,…,x_k)`.
pub fn lambda(ctx: &ActionContext) -> Result<Cactus, ActionError> {
    on_chain(ctx, &weights_to_chain(&ctx.element.weighted), None)
}

/// The interpolated scaling map of the vertex carrying input `i` (the
/// identity for unary vertices).
pub fn vertex_scaling(ctx: &ActionContext, i: usize) -> Result<MonotoneReparam, ActionError> {
    let v = *ctx
        .element
        .base
        .sigma
        .get(i)
        .ok_or(OperadError::SlotOutOfRange { slot: i, arity: ctx.inputs.len() })?;
    let (_, trace) = lambda_traced(ctx)?;
    Ok(trace.vertex_scalings.get(&v).cloned().unwrap_or_else(MonotoneReparam::identity))
}

/// The interpolated correcting map of the `j`-th bracket in canonical order.
pub fn bracket_scaling(ctx: &ActionContext, j: usize) -> Result<MonotoneReparam, ActionError> {
    let (_, trace) = lambda_traced(ctx)?;
    trace
        .bracket_scalings
        .values()
        .nth(j)
        .cloned()
        .ok_or_else(|| OperadError::SlotOutOfRange { slot: j, arity: trace.bracket_scalings.len() }.into())
}

/// `λ_{MS⁺}`: composes the inputs along the labelled tree, then applies `τ`.
pub fn lambda_ms(element: &OElement, inputs: &[MSElement]) -> Result<MSElement, ActionError> {
    Ok(act(&MsOperad, element, inputs, FoldOrder::Preorder)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bracketings::WeightedBracketing;
    use crate::cacti::cact1_compose;
    use crate::rational::{one, q};
    use crate::trees::{caterpillar, Shape, ShapeInput};

    fn ids(v: &[u32]) -> Bracket {
        v.iter().map(|x| VertexId(*x)).collect()
    }

    fn wedge() -> Cactus {
        Cactus::from_triples(2, &[(q(0, 1), q(1, 4), 0), (q(1, 4), q(3, 4), 1), (q(3, 4), one(), 0)]).unwrap()
    }

    #[test]
    fn xi_worked_example() {
        use ShapeInput::{Leaf, Node};
        // root with five inputs; a two-vertex bracket with five leaves on the second
        let shape = Shape::Node(vec![
            Leaf,
            Node(vec![Node(vec![Leaf, Leaf, Leaf]), Leaf, Leaf]),
            Leaf,
            Node(vec![Leaf, Leaf]),
            Leaf,
        ]);
        let t = PlanarTree::from_shape(&shape);
        let b = Bracketing::new(&t, [ids(&[1, 2])].into()).unwrap();
        assert_eq!(xi_map(&t, &b, VertexId(0)).unwrap(), vec![1, 5, 1, 2, 1]);
        assert_eq!(xi_map(&t, &Bracketing::empty(), VertexId(0)).unwrap(), vec![1, 3, 1, 2, 1]);
    }

    #[test]
    fn xi_prefers_outer_bracket() {
        let t = caterpillar(4, 1);
        let b = Bracketing::new(&t, [ids(&[1, 2]), ids(&[1, 2, 3])].into()).unwrap();
        assert_eq!(xi_map(&t, &b, VertexId(0)).unwrap(), vec![4, 1]);
    }

    #[test]
    fn corolla_relabels() {
        let x = wedge();
        let e = BOElement::unbracketed(OElement { tau: vec![crate::trees::LeafId(1), crate::trees::LeafId(0)], ..OElement::unit(2) });
        let out = lambda(&ActionContext::new(e, vec![x.clone()]).unwrap()).unwrap();
        assert_eq!(out, x.relabel(&[1, 0]).unwrap());
    }

    #[test]
    fn two_vertex_tree_is_cact1_composition() {
        let t = caterpillar(2, 1);
        let e = BOElement::unbracketed(OElement::planar(t));
        let (x, y) = (wedge(), Cactus::linear(2));
        let out = lambda(&ActionContext::new(e, vec![x.clone(), y.clone()]).unwrap()).unwrap();
        assert_eq!(out, cact1_compose(&x, 0, &y).unwrap());
    }

    #[test]
    fn caterpillar_corners() {
        let t = caterpillar(3, 1);
        let base = OElement::planar(t.clone());
        let (x, y, z) = (wedge(), Cactus::linear(2), wedge().relabel(&[1, 0]).unwrap());
        let inputs = vec![x.clone(), y.clone(), z.clone()];
        let lower = BOElement::new(base.clone(), WeightedBracketing::with_unit_weights(&Bracketing::new(&t, [ids(&[0, 1])].into()).unwrap())).unwrap();
        let upper = BOElement::new(base, WeightedBracketing::with_unit_weights(&Bracketing::new(&t, [ids(&[1, 2])].into()).unwrap())).unwrap();
        let left = cact1_compose(&cact1_compose(&x, 0, &y).unwrap(), 0, &z).unwrap();
        let right = cact1_compose(&x, 0, &cact1_compose(&y, 0, &z).unwrap()).unwrap();
        assert_eq!(lambda(&ActionContext::new(lower, inputs.clone()).unwrap()).unwrap(), left);
        assert_eq!(lambda(&ActionContext::new(upper, inputs).unwrap()).unwrap(), right);
    }

    #[test]
    fn rejects_nullary_and_mismatch() {
        let e = BOElement::unit(0);
        assert!(matches!(ActionContext::new(e, vec![Cactus::unit()]), Err(ActionError::NullaryVertex(_))));
        let e = BOElement::unit(2);
        assert!(matches!(ActionContext::new(e, vec![Cactus::unit()]), Err(ActionError::ArityMismatch { .. })));
    }
}
