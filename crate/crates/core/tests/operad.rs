use bocacti::bracketings::{enumerate_bracketings, WeightedBracketing};
use bocacti::operad::{act, Associative, BOElement, FoldOrder, OElement, StrictOperad, Terminal};
use bocacti::rational::{one, q, Q};
use bocacti::sampling::{random_oelement, random_permutation, seeded, SeededRng};
use bocacti::trees::{enumerate_shapes, LeafId, PlanarTree, VertexId};
use proptest::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

/// Every weighted bracketing of `tree` with weights from `pool`.
fn weightings(tree: &PlanarTree, pool: &[Q]) -> Vec<WeightedBracketing> {
    let mut out = Vec::new();
    for b in enumerate_bracketings(tree).unwrap().bracketings() {
        let bs: Vec<_> = b.brackets().iter().cloned().collect();
        let total = pool.len().pow(bs.len() as u32);
        for code in 0..total {
            let mut c = code;
            let map: BTreeMap<_, _> = bs
                .iter()
                .map(|s| {
                    let w = pool[c % pool.len()].clone();
                    c /= pool.len();
                    (s.clone(), w)
                })
                .collect();
            out.push(WeightedBracketing::new(map).unwrap());
        }
    }
    out
}

/// Elements over trees with at most `n` vertices: the planar labelling and
/// one seeded random labelling of each shape, with every weighting.
fn grid(n: usize, arities: &[usize], pool: &[Q], seed: u64) -> Vec<BOElement> {
    let mut rng = seeded(seed);
    let mut trees = vec![PlanarTree::eta()];
    for k in 1..=n {
        trees.extend(enumerate_shapes(k, arities).iter().map(PlanarTree::from_shape));
    }
    let mut out = Vec::new();
    for t in trees {
        let mut labellings = vec![OElement::planar(t.clone())];
        let r = random_oelement(&mut rng, t.clone());
        if r != labellings[0] {
            labellings.push(r);
        }
        for base in labellings {
            for w in weightings(&t, pool) {
                out.push(BOElement::new(base.clone(), w).unwrap());
            }
        }
    }
    out
}

fn slots_for(a: &BOElement, b: &BOElement) -> Vec<usize> {
    let c = b.base.output_color();
    a.base.input_colors().iter().enumerate().filter(|(_, x)| **x == c).map(|(i, _)| i).collect()
}

#[test]
fn bo_composition_is_associative() {
    let pool = [one(), q(1, 2)];
    let elements = grid(3, &[0, 1, 2], &pool, 5);
    let small = grid(2, &[0, 1, 2], &pool, 6);
    let (mut sequential, mut parallel, mut discards) = (0usize, 0usize, 0usize);
    for a in &elements {
        for b in &small {
            for i in slots_for(a, b) {
                let ab = a.compose(i, b).unwrap();
                if b.base.tree.is_eta() {
                    discards += a.weighted.len() - ab.weighted.len().min(a.weighted.len());
                }
                for c in &small {
                    for j in slots_for(b, c) {
                        let lhs = ab.compose(i + j, c).unwrap();
                        let rhs = a.compose(i, &b.compose(j, c).unwrap()).unwrap();
                        assert_eq!(lhs, rhs, "sequential {i} {j}");
                        sequential += 1;
                    }
                    for k in slots_for(a, c).into_iter().filter(|k| *k > i) {
                        let lhs = ab.compose(k + b.arity() - 1, c).unwrap();
                        let rhs = a.compose(k, c).unwrap().compose(i, b).unwrap();
                        assert_eq!(lhs, rhs, "parallel {i} {k}");
                        parallel += 1;
                    }
                }
            }
        }
    }
    assert!(sequential > 10_000 && parallel > 10_000, "{sequential} {parallel}");
    assert!(discards > 0);
}

#[test]
fn bo_composition_with_three_vertex_factors() {
    let pool = [one(), q(1, 2)];
    let elements = grid(3, &[1, 2], &pool, 7);
    let mut checked = 0;
    for a in elements.iter().filter(|x| x.base.tree.vertex_count() == 3) {
        for b in elements.iter().filter(|x| x.base.tree.vertex_count() == 3) {
            for i in slots_for(a, b) {
                let ab = a.compose(i, b).unwrap();
                for c in elements.iter().filter(|x| x.base.tree.vertex_count() == 3).step_by(17) {
                    for j in slots_for(b, c) {
                        assert_eq!(ab.compose(i + j, c).unwrap(), a.compose(i, &b.compose(j, c).unwrap()).unwrap());
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 1000, "{checked}");
}

/// The block permutation induced on `a ∘ b` by relabelling `a` with `perm`
/// before inserting `b` at slot `i`.
fn block(perm: &[usize], i: usize, kb: usize) -> Vec<usize> {
    let target = perm[i];
    let shift = |x: usize| if x < target { x } else { x + kb - 1 };
    let mut out = Vec::new();
    for (p, x) in perm.iter().enumerate() {
        if p == i {
            out.extend((0..kb).map(|j| target + j));
        } else {
            out.push(shift(*x));
        }
    }
    out
}

#[test]
fn bo_composition_is_equivariant() {
    let pool = [one(), q(1, 2)];
    let elements = grid(3, &[0, 1, 2], &pool, 8);
    let small = grid(2, &[0, 1, 2], &pool, 9);
    let mut rng = seeded(10);
    let mut checked = 0;
    for a in &elements {
        for b in &small {
            for _ in 0..2 {
                let perm = random_permutation(&mut rng, a.arity());
                let acted = a.sigma_act(&perm).unwrap();
                for i in slots_for(&acted, b) {
                    let lhs = acted.compose(i, b).unwrap();
                    let rhs = a.compose(perm[i], b).unwrap().sigma_act(&block(&perm, i, b.arity())).unwrap();
                    assert_eq!(lhs, rhs);
                    let rho = random_permutation(&mut rng, b.arity());
                    let mut inner: Vec<usize> = (0..lhs.arity()).collect();
                    for (j, r) in rho.iter().enumerate() {
                        inner[i + j] = i + r;
                    }
                    assert_eq!(acted.compose(i, &b.sigma_act(&rho).unwrap()).unwrap(), lhs.sigma_act(&inner).unwrap());
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 1000, "{checked}");
}

#[test]
fn units_and_forgetting() {
    let pool = [one(), q(1, 2)];
    let elements = grid(3, &[0, 1, 2, 3], &pool, 11);
    let small = grid(2, &[0, 1, 2], &pool, 12);
    for a in &elements {
        assert_eq!(BOElement::unit(a.base.output_color()).compose(0, a).unwrap(), *a);
        for (i, c) in a.base.input_colors().into_iter().enumerate() {
            assert_eq!(a.compose(i, &BOElement::unit(c)).unwrap(), *a);
        }
        for b in &small {
            for i in slots_for(a, b) {
                assert_eq!(a.compose(i, b).unwrap().forget(), a.forget().compose(i, &b.forget()).unwrap());
            }
        }
    }
    let u0 = BOElement::unit(0);
    assert_eq!((u0.base.tree.vertex_count(), u0.base.tau.len()), (1, 0));
}

fn contains(big: &WeightedBracketing, small: &WeightedBracketing) -> bool {
    small.weights().keys().all(|b| big.weights().contains_key(b))
}

#[test]
fn bo_composition_is_a_poset_map() {
    let elements = grid(3, &[0, 1, 2], &[one()], 13);
    let mut checked = 0;
    for a in &elements {
        for a2 in elements.iter().filter(|x| x.base == a.base && contains(&x.weighted, &a.weighted)) {
            for b in elements.iter().step_by(3) {
                for b2 in elements.iter().filter(|x| x.base == b.base && contains(&x.weighted, &b.weighted)).take(2) {
                    for i in slots_for(a, b) {
                        let lo = a.compose(i, b).unwrap().canonical();
                        let hi = a2.compose(i, b2).unwrap().canonical();
                        assert!(contains(&hi.weighted, &lo.weighted));
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 1000, "{checked}");
}

#[test]
fn two_vertex_insert_creates_one_bracket() {
    let two = PlanarTree::corolla(2).graft(0, &PlanarTree::corolla(2)).unwrap().tree;
    let b = BOElement::unbracketed(OElement::planar(two));
    let a = BOElement::unit(3);
    let out = BOElement::unbracketed(OElement::planar(PlanarTree::corolla(2))).compose(0, &BOElement::unit(2)).unwrap();
    assert!(out.weighted.is_empty());
    let c = BOElement::unbracketed(OElement::planar(PlanarTree::corolla(2).graft(0, &PlanarTree::corolla(3)).unwrap().tree));
    let d = c.compose(1, &b).unwrap();
    assert_eq!(d.weighted.len(), 1);
    assert_eq!(d.weighted.weights().values().next(), Some(&one()));
    assert_eq!(a.compose(0, &b).unwrap().weighted.len(), 0);
}

#[test]
fn eta_discards_a_two_vertex_bracket() {
    // a unary root below u, whose first input carries the unary vertex v
    let t = PlanarTree::corolla(2).graft(0, &PlanarTree::corolla(1)).unwrap().tree;
    let root = PlanarTree::corolla(1).graft(0, &t).unwrap().tree;
    let ix = root.index();
    let (u, v) = (ix.vertices[1], ix.vertices[2]);
    let weights = BTreeMap::from([(BTreeSet::from([u, v]), q(1, 2))]);
    let a = BOElement::new(OElement::planar(root), WeightedBracketing::new(weights).unwrap()).unwrap();
    let slot = a.base.label_of(v).unwrap();
    let v_arity = a.base.input_colors()[slot];
    assert_eq!(v_arity, 1);
    // inserting η deletes v, and {u} is too small to stay a bracket
    let eta = BOElement::unbracketed(OElement::eta());
    let pre = a.compose(slot, &BOElement::unit(1)).unwrap();
    assert_eq!(pre.weighted.len(), 1);
    let out = a.compose(slot, &eta).unwrap();
    assert!(out.weighted.is_empty());
    assert_eq!(out.base.tree.vertex_count(), 2);
}

#[test]
fn sigma_action_basics() {
    let mut rng = seeded(14);
    for _ in 0..100 {
        let t = bocacti::sampling::random_tree(&mut rng, 4, 0, 3);
        let a = random_oelement(&mut rng, t);
        let n = a.arity();
        let id: Vec<usize> = (0..n).collect();
        assert_eq!(a.sigma_act(&id).unwrap(), a);
        if n >= 2 {
            let mut swap = id.clone();
            swap.swap(0, 1);
            assert_eq!(a.sigma_act(&swap).unwrap().sigma_act(&swap).unwrap(), a);
        }
        assert!(a.sigma_act(&[0; 7]).is_err());
    }
}

fn words(rng: &mut SeededRng, x: &BOElement) -> Vec<Vec<usize>> {
    x.base.input_colors().into_iter().map(|c| random_permutation(rng, c)).collect()
}

#[test]
fn strict_actions_are_operad_maps() {
    let elements = grid(3, &[0, 1, 2], &[one()], 15);
    let mut rng = seeded(16);
    for a in &elements {
        for b in elements.iter().step_by(5) {
            for i in slots_for(a, b) {
                let (wa, wb) = (words(&mut rng, a), words(&mut rng, b));
                let composite = a.base.compose(i, &b.base).unwrap();
                let mut inputs = wa[..i].to_vec();
                inputs.extend(wb.iter().cloned());
                inputs.extend(wa[i + 1..].iter().cloned());
                let lhs = act(&Associative, &composite, &inputs, FoldOrder::Preorder).unwrap();
                let inner = act(&Associative, &b.base, &wb, FoldOrder::Preorder).unwrap();
                let mut outer = wa.clone();
                outer[i] = inner;
                assert_eq!(lhs, act(&Associative, &a.base, &outer, FoldOrder::Preorder).unwrap());
                assert_eq!(lhs, act(&Associative, &composite, &inputs, FoldOrder::Breadth).unwrap());
                let arities: Vec<usize> = inputs.iter().map(Vec::len).collect();
                assert_eq!(act(&Terminal, &composite, &arities, FoldOrder::Preorder).unwrap(), Associative.arity(&lhs));
            }
        }
    }
}

#[test]
fn labelled_composition_example() {
    // a 2-vertex element whose second input is the top vertex, composed
    // with a corolla whose τ swaps its two leaves
    let t = PlanarTree::corolla(2).graft(1, &PlanarTree::corolla(2)).unwrap().tree;
    let ix = t.index();
    let a = OElement::new(t, vec![ix.vertices[0], ix.vertices[1]], ix.leaves.clone()).unwrap();
    let swapped = OElement::new(PlanarTree::corolla(2), vec![VertexId(0)], vec![LeafId(1), LeafId(0)]).unwrap();
    let out = a.compose(0, &swapped).unwrap();
    let planar = a.compose(0, &OElement::unit(2)).unwrap();
    assert_eq!(planar, a);
    assert_ne!(out, a);
    // the branch of the root moves from its second to its first input
    let root = out.tree.root_vertex().unwrap();
    assert!(matches!(root.inputs[0], bocacti::trees::Input::Vertex(_)));
}

proptest! {
    #[test]
    fn json_roundtrip(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let t = bocacti::sampling::random_tree(&mut rng, 4, 0, 3);
        let x = bocacti::sampling::random_bo(&mut rng, t, &[one(), q(1, 2), q(1, 3)]);
        prop_assert_eq!(BOElement::from_json(&x.to_json()).unwrap(), x.clone());
        prop_assert_eq!(OElement::from_json(&x.base.to_json()).unwrap(), x.base);
    }
}
