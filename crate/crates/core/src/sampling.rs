//! Seeded random generators for trees, elements and cacti.

use crate::bracketings::{enumerate_bracketings, WeightedBracketing};
use crate::cacti::{Arc, Cactus, MSElement};
use crate::dendroidal::{compose_chain, degeneracy, inner_face, isomorphism, subtree_inclusion, OmegaMorphism, OmegaTildeMorphism};
use crate::operad::{BOElement, OElement};
use crate::plmaps::MonotoneReparam;
use crate::rational::{one, q, qi, zero, Q};
use crate::trees::{Edge, Input, LeafId, PlanarTree, Vertex, VertexId};
use crate::wconstruction::WTree;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random cactus with `k` lobes. Lobes are inserted one at a time, each
/// either between two arcs or inside an existing arc, which keeps the label
/// word non-interleaved; piece lengths are random and normalized per lobe.
pub fn random_cactus<R: Rng>(rng: &mut R, k: usize) -> Cactus {
    assert!(k >= 1);
    let mut word: Vec<usize> = vec![0];
    for lobe in 1..k {
        let pos = rng.gen_range(0..=word.len());
        if pos > 0 && rng.gen_bool(0.5) {
            // split the arc before `pos` around the new lobe; the word is
            // read cyclically from the base point, so the last arc may split too
            let host = word[pos - 1];
            word.splice(pos..pos, [lobe, host]);
        } else {
            word.insert(pos, lobe);
        }
    }
    let mut merged: Vec<usize> = Vec::new();
    for l in word {
        if merged.last() != Some(&l) {
            merged.push(l);
        }
    }
    let raw: Vec<i64> = merged.iter().map(|_| rng.gen_range(1..=6)).collect();
    let mut totals = vec![0i64; k];
    for (l, w) in merged.iter().zip(&raw) {
        totals[*l] += w;
    }
    let kq = qi(k as i64);
    let mut pos = zero();
    let mut arcs = Vec::new();
    for (l, w) in merged.iter().zip(&raw) {
        let len = qi(*w) / (qi(totals[*l]) * &kq);
        arcs.push(Arc { start: pos.clone(), end: &pos + &len, lobe: *l });
        pos += len;
    }
    Cactus::new(k, arcs).expect("generator produces valid cacti")
}

/// A random strictly monotone map with up to three interior breakpoints.
pub fn random_reparam<R: Rng>(rng: &mut R) -> MonotoneReparam {
    let n = rng.gen_range(0..=3);
    let pick = |rng: &mut R| -> BTreeSet<Q> {
        let mut s = BTreeSet::new();
        while s.len() < n {
            let d = rng.gen_range(2..=12);
            s.insert(q(rng.gen_range(1..d), d));
        }
        s
    };
    let mut xs: Vec<Q> = pick(rng).into_iter().collect();
    let mut ys: Vec<Q> = pick(rng).into_iter().collect();
    xs.insert(0, zero());
    xs.push(one());
    ys.insert(0, zero());
    ys.push(one());
    MonotoneReparam::from_points(xs, ys).expect("sorted distinct values")
}

pub fn random_ms<R: Rng>(rng: &mut R, k: usize) -> MSElement {
    MSElement::new(random_cactus(rng, k), random_reparam(rng))
}

/// A random planar tree with `n` vertices whose arities are drawn from
/// `lo..=hi`, grown by grafting corollas onto random leaves.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize, lo: usize, hi: usize) -> PlanarTree {
    if n == 0 {
        return PlanarTree::eta();
    }
    assert!(hi >= 1 || n == 1);
    let mut t = PlanarTree::corolla(rng.gen_range(lo.max(if n > 1 { 1 } else { 0 })..=hi));
    for placed in 1..n {
        let leaves = t.leaf_count();
        let remaining = n - placed - 1;
        let min = if remaining > 0 { lo.max(1) } else { lo };
        let a = rng.gen_range(min..=hi.max(min));
        t = t.graft(rng.gen_range(0..leaves), &PlanarTree::corolla(a)).expect("leaf in range").tree;
    }
    t.renumbered().0
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// A labelled tree with random `σ` and `τ`.
pub fn random_oelement<R: Rng>(rng: &mut R, tree: PlanarTree) -> OElement {
    let ix = tree.index();
    let mut sigma = ix.vertices.clone();
    sigma.shuffle(rng);
    let mut tau = ix.leaves.clone();
    tau.shuffle(rng);
    OElement { tree, sigma, tau }
}

/// A uniformly chosen bracketing of `tree`, each bracket weighted by a
/// random entry of `weights`.
pub fn random_weighted_bracketing<R: Rng>(rng: &mut R, tree: &PlanarTree, weights: &[Q]) -> WeightedBracketing {
    let poset = enumerate_bracketings(tree).expect("small tree");
    let pick = poset.elements[rng.gen_range(0..poset.elements.len())];
    let b = poset.bracketing(pick);
    let map: BTreeMap<_, _> = b
        .brackets()
        .iter()
        .map(|s| (s.clone(), weights[rng.gen_range(0..weights.len())].clone()))
        .collect();
    WeightedBracketing::new(map).expect("weights in (0,1]")
}

pub fn random_bo<R: Rng>(rng: &mut R, tree: PlanarTree, weights: &[Q]) -> BOElement {
    let wb = random_weighted_bracketing(rng, &tree, weights);
    BOElement { base: random_oelement(rng, tree), weighted: wb }
}

/// Random cactus inputs matching the input colors of an element.
pub fn random_inputs<R: Rng>(rng: &mut R, element: &OElement) -> Vec<Cactus> {
    element.input_colors().into_iter().map(|c| random_cactus(rng, c)).collect()
}

/// A random planar tree with `vertices` vertices of arity at most
/// `max_arity` and exactly `leaves` leaves, or `None` if impossible.
///
/// The arities are drawn first; the preorder word of vertices and leaves is
/// then shuffled and rotated into the unique valid position.
pub fn random_tree_with_leaves<R: Rng>(rng: &mut R, vertices: usize, leaves: usize, max_arity: usize) -> Option<PlanarTree> {
    if vertices == 0 {
        return (leaves == 1).then(PlanarTree::eta);
    }
    let total = leaves + vertices - 1;
    if total > vertices * max_arity {
        return None;
    }
    let mut arities = vec![0usize; vertices];
    for _ in 0..total {
        let open: Vec<usize> = (0..vertices).filter(|i| arities[*i] < max_arity).collect();
        arities[open[rng.gen_range(0..open.len())]] += 1;
    }
    let mut word: Vec<Option<usize>> = arities.into_iter().map(Some).collect();
    word.extend(std::iter::repeat(None).take(leaves));
    word.shuffle(rng);
    let mut sum = 0i64;
    let (mut min, mut at) = (i64::MAX, 0);
    for (i, x) in word.iter().enumerate() {
        sum += x.map_or(0, |a| a as i64) - 1;
        if sum < min {
            min = sum;
            at = i + 1;
        }
    }
    let n = word.len();
    word.rotate_left(at % n);
    fn build(word: &[Option<usize>], pos: &mut usize, nv: &mut u32, nl: &mut u32) -> Input {
        let item = word[*pos];
        *pos += 1;
        match item {
            None => {
                *nl += 1;
                Input::Leaf(LeafId(*nl - 1))
            }
            Some(a) => {
                let id = VertexId(*nv);
                *nv += 1;
                let inputs = (0..a).map(|_| build(word, pos, nv, nl)).collect();
                Input::Vertex(Vertex { id, inputs })
            }
        }
    }
    match build(&word, &mut 0, &mut 0, &mut 0) {
        Input::Vertex(root) => Some(PlanarTree::Rooted(root)),
        Input::Leaf(_) => unreachable!("a vertex exists"),
    }
}

/// A random, generally unreduced, W-tree with at most `budget` blackboard
/// vertices. Decorations have at most three vertices of arity at most
/// three; lengths are drawn from `lengths`.
pub fn random_wtree<R: Rng>(rng: &mut R, budget: usize, lengths: &[Q]) -> WTree {
    assert!(budget >= 1);
    struct Gen<'a, R: Rng> {
        rng: &'a mut R,
        budget: usize,
        next_vertex: u32,
        next_leaf: u32,
        decorations: BTreeMap<VertexId, OElement>,
        lengths: BTreeMap<Edge, Q>,
        pool: &'a [Q],
    }
    impl<R: Rng> Gen<'_, R> {
        fn vertex(&mut self, color: Option<usize>, inner: bool) -> Vertex {
            self.budget -= 1;
            let feasible: Vec<usize> = (0..=3)
                .filter(|a| match color {
                    Some(c) => (*a == 0 && c == 1) || (*a >= 1 && c <= 2 * a + 1),
                    None => true,
                })
                .collect();
            let a = feasible[self.rng.gen_range(0..feasible.len())];
            let c = color.unwrap_or_else(|| if a == 0 { 1 } else { self.rng.gen_range(0..=(2 * a + 1).min(4)) });
            let tree = random_tree_with_leaves(self.rng, a, c, 3).expect("feasible");
            let p = random_oelement(self.rng, tree);
            let id = VertexId(self.next_vertex);
            self.next_vertex += 1;
            if inner {
                let s = self.pool[self.rng.gen_range(0..self.pool.len())].clone();
                self.lengths.insert(Edge::Out(id), s);
            }
            let colors = p.input_colors();
            let inputs = colors
                .into_iter()
                .map(|c| {
                    if self.budget > 0 && self.rng.gen_bool(0.5) {
                        Input::Vertex(self.vertex(Some(c), true))
                    } else {
                        self.next_leaf += 1;
                        Input::Leaf(LeafId(self.next_leaf - 1))
                    }
                })
                .collect();
            self.decorations.insert(id, p);
            Vertex { id, inputs }
        }
    }
    let mut g = Gen {
        rng,
        budget,
        next_vertex: 0,
        next_leaf: 0,
        decorations: BTreeMap::new(),
        lengths: BTreeMap::new(),
        pool: lengths,
    };
    let root = g.vertex(None, false);
    let shape = PlanarTree::Rooted(root);
    let mut leaf_order = shape.leaves();
    leaf_order.shuffle(g.rng);
    WTree::new(shape, leaf_order, g.lengths, g.decorations).expect("generator respects colors")
}

/// A random generating morphism of `Ω` with target `t`: an inner face, an
/// outer face, an isomorphism or, while the source stays within
/// `max_vertices`, a degeneracy. Falls back to the identity if none exists.
pub fn random_generator_into<R: Rng>(rng: &mut R, t: &PlanarTree, max_vertices: usize) -> OmegaMorphism {
    let ix = t.index();
    let mut options: Vec<OmegaMorphism> = Vec::new();
    for e in ix.inner_edges() {
        if let Edge::Out(u) = e {
            options.push(inner_face(t, u).expect("inner edge"));
        }
    }
    if ix.vertices.len() >= 2 {
        let all: BTreeSet<VertexId> = ix.vertices.iter().copied().collect();
        for v in &ix.vertices {
            let top = ix.parent(*v).is_some() && ix.inputs(*v).iter().all(|e| matches!(e, Edge::Leaf(_)));
            let bottom = ix.parent(*v).is_none() && ix.inputs(*v).iter().filter(|e| matches!(e, Edge::Out(_))).count() == 1;
            if top || bottom {
                let mut rest = all.clone();
                rest.remove(v);
                options.push(subtree_inclusion(t, &rest).expect("connected after removing an outer vertex"));
            }
        }
    }
    for v in &ix.vertices {
        let n = ix.arity(*v);
        if n >= 2 {
            let perm = random_permutation(rng, n);
            let mut inverse = vec![0; n];
            for (j, p) in perm.iter().enumerate() {
                inverse[*p] = j;
            }
            let source = t.permute_inputs(*v, &inverse).expect("permutation");
            options.push(isomorphism(&source, *v, &perm).expect("permutation"));
        }
    }
    if ix.vertices.len() < max_vertices {
        let edges = ix.edges();
        let e = edges[rng.gen_range(0..edges.len())];
        options.push(degeneracy(t, e).expect("edge of the tree"));
    }
    if options.is_empty() {
        return OmegaMorphism::identity(t);
    }
    let k = rng.gen_range(0..options.len());
    options.swap_remove(k)
}

/// A composable list `[g_1, …, g_steps]` ending in `t`, each factor a
/// composite of one or two generators.
pub fn random_factorization<R: Rng>(rng: &mut R, t: &PlanarTree, steps: usize, max_vertices: usize) -> Vec<OmegaMorphism> {
    let mut out = Vec::new();
    let mut current = t.clone();
    for _ in 0..steps {
        let mut parts = vec![random_generator_into(rng, &current, max_vertices)];
        if rng.gen_bool(0.5) {
            parts.push(random_generator_into(rng, &parts[0].source, max_vertices));
        }
        parts.reverse();
        let g = compose_chain(&parts).expect("generators compose");
        current = g.source.clone();
        out.push(g);
    }
    out.reverse();
    out
}

/// A random morphism into `t`, a composite of `steps` generators.
pub fn random_morphism_into<R: Rng>(rng: &mut R, t: &PlanarTree, steps: usize, max_vertices: usize) -> OmegaMorphism {
    let mut gs = Vec::new();
    let mut current = t.clone();
    for _ in 0..steps.max(1) {
        let g = random_generator_into(rng, &current, max_vertices);
        current = g.source.clone();
        gs.push(g);
    }
    gs.reverse();
    compose_chain(&gs).expect("generators compose")
}

/// Random weighted bracketings on the corolla images of `base`.
pub fn random_tilde<R: Rng>(rng: &mut R, base: OmegaMorphism, weights: &[Q]) -> OmegaTildeMorphism {
    let mut brackets = BTreeMap::new();
    for v in base.source.vertices() {
        let (image, _) = base.image_tree(v).expect("source vertex");
        if image.vertex_count() >= 3 {
            brackets.insert(v, random_weighted_bracketing(rng, &image, weights));
        }
    }
    OmegaTildeMorphism::new(base, brackets).expect("bracketings of the images")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic_and_valid() {
        let (mut a, mut b) = (seeded(7), seeded(7));
        for k in 1..=5 {
            for _ in 0..20 {
                assert_eq!(random_cactus(&mut a, k), random_cactus(&mut b, k));
            }
        }
        for _ in 0..20 {
            let t = random_tree(&mut a, 4, 1, 3);
            assert_eq!(t.vertex_count(), 4);
            assert!(t.vertices().iter().all(|v| (1..=3).contains(&t.arity(*v).unwrap())));
            assert!(!random_reparam(&mut a).map().breakpoints().is_empty());
        }
        for v in 0..4 {
            for l in 0..6 {
                match random_tree_with_leaves(&mut a, v, l, 3) {
                    Some(t) => assert_eq!((t.vertex_count(), t.leaf_count()), (v, l)),
                    None => assert!((v == 0 && l != 1) || (v > 0 && l + v - 1 > 3 * v)),
                }
            }
        }
        for _ in 0..50 {
            let t = random_tree(&mut a, 3, 0, 3);
            let gs = random_factorization(&mut a, &t, 3, 5);
            assert_eq!(gs.last().unwrap().target, t);
            assert!(gs.iter().all(|g| g.source.vertex_count() <= 5));
            random_wtree(&mut a, 4, &[zero(), q(1, 2), one()]).validate().unwrap();
        }
    }
}
