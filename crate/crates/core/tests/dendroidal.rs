use bocacti::cacti::{cact1_compose, Cactus};
use bocacti::dendroidal::{
    compose_chain, compose_omega, compose_omega_tilde, corolla_inclusion, enumerate_morphisms, factorization_bracketing,
    factorization_morphism, inner_face, phi_morphism, phi_morphism_ordered, phi_object, segal_check, BoAlgebra,
    CactusAlgebra, DendroidalDiagram, InputOrder, MorphismClass, OmegaMorphism, OmegaTildeMorphism, Phi, StrictAlgebra,
};
use bocacti::operad::{Associative, Terminal};
use bocacti::rational::{one, q, Q};
use bocacti::sampling::{random_cactus, random_factorization, random_permutation, random_tilde, random_tree, seeded, SeededRng};
use bocacti::trees::{caterpillar, enumerate_shapes, star, Edge, PlanarTree, Shape, ShapeInput, VertexId};
use rand::Rng;
use std::collections::BTreeMap;

fn weights() -> Vec<Q> {
    vec![q(1, 3), q(2, 3), one()]
}

fn small_trees(max_vertices: usize, arities: &[usize]) -> Vec<PlanarTree> {
    let mut out = vec![PlanarTree::eta()];
    for n in 1..=max_vertices {
        out.extend(enumerate_shapes(n, arities).iter().map(PlanarTree::from_shape));
    }
    out
}

fn some_tree(rng: &mut SeededRng, lo: usize) -> PlanarTree {
    let n = rng.gen_range(1..=4);
    random_tree(rng, n, lo, 3)
}

/// Trees with three or four vertices and no nullary ones, so that
/// factorizations have room for several inner faces.
fn rich_tree(rng: &mut SeededRng) -> PlanarTree {
    let n = rng.gen_range(3..=4);
    random_tree(rng, n, 1, 3)
}

fn hom(s: &PlanarTree, t: &PlanarTree) -> Vec<OmegaMorphism> {
    enumerate_morphisms(s, t, MorphismClass::All, 1_000_000).unwrap()
}

/// Size of the automorphism group of the underlying non-planar tree.
fn automorphisms(t: &PlanarTree) -> usize {
    fn go(ix: &bocacti::trees::TreeIndex, e: Edge) -> (String, usize) {
        let Edge::Out(v) = e else { return ("L".into(), 1) };
        let mut kids: Vec<(String, usize)> = ix.inputs(v).iter().map(|c| go(ix, *c)).collect();
        kids.sort();
        let mut count: usize = kids.iter().map(|k| k.1).product();
        let mut run = 1;
        for w in kids.windows(2) {
            if w[0].0 == w[1].0 {
                run += 1;
                count *= run;
            } else {
                run = 1;
            }
        }
        let names: Vec<&str> = kids.iter().map(|k| k.0.as_str()).collect();
        (format!("({})", names.join(",")), count)
    }
    let ix = t.index();
    go(&ix, ix.root).1
}

#[test]
fn identity_is_neutral() {
    let mut rng = seeded(60);
    for _ in 0..100 {
        let t = some_tree(&mut rng, 0);
        let g = bocacti::sampling::random_morphism_into(&mut rng, &t, 3, 5);
        assert_eq!(compose_omega(&OmegaMorphism::identity(&t), &g).unwrap(), g);
        assert_eq!(compose_omega(&g, &OmegaMorphism::identity(&g.source)).unwrap(), g);
    }
}

#[test]
fn composition_is_associative_on_small_trees() {
    let trees = small_trees(2, &[0, 1, 2]);
    let mut homs = BTreeMap::new();
    for (i, a) in trees.iter().enumerate() {
        for (j, b) in trees.iter().enumerate() {
            homs.insert((i, j), hom(a, b));
        }
    }
    let n = trees.len();
    let mut checked = 0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    for f in &homs[&(a, b)] {
                        for g in &homs[&(b, c)] {
                            let gf = compose_omega(g, f).unwrap();
                            for h in &homs[&(c, d)] {
                                let lhs = compose_omega(h, &gf).unwrap();
                                let rhs = compose_omega(&compose_omega(h, g).unwrap(), f).unwrap();
                                assert_eq!(lhs, rhs);
                                checked += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    assert!(checked > 10_000, "{checked}");
}

#[test]
fn disjoint_inner_faces_commute() {
    for t in small_trees(4, &[1, 2, 3]) {
        let ix = t.index();
        let inner: Vec<VertexId> = ix
            .inner_edges()
            .into_iter()
            .map(|e| match e {
                Edge::Out(u) => u,
                Edge::Leaf(_) => unreachable!(),
            })
            .collect();
        for &a in &inner {
            for &b in &inner {
                let (pa, pb) = (ix.parent(a).unwrap().0, ix.parent(b).unwrap().0);
                if a == b || pa == b || pb == a || pa == pb {
                    continue;
                }
                let first_a = inner_face(&t, a).unwrap();
                let lhs = compose_omega(&first_a, &inner_face(&first_a.source, b).unwrap()).unwrap();
                let first_b = inner_face(&t, b).unwrap();
                let rhs = compose_omega(&first_b, &inner_face(&first_b.source, a).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }
}

#[test]
fn inner_face_image_is_the_edge_neighbourhood() {
    let t = caterpillar(3, 1);
    for u in [VertexId(1), VertexId(2)] {
        let d = inner_face(&t, u).unwrap();
        let lower = t.index().parent(u).unwrap().0;
        assert_eq!(d.corolla_image(lower).unwrap(), &[lower, u].into_iter().collect());
    }
}

#[test]
fn hom_from_eta_counts_edges() {
    for t in small_trees(3, &[0, 1, 2, 3]) {
        let edges = t.index().edges().len();
        assert_eq!(hom(&PlanarTree::eta(), &t).len(), edges);
    }
}

#[test]
fn endomorphisms_are_automorphisms() {
    for t in small_trees(4, &[0, 2, 3]) {
        let ends = hom(&t, &t);
        assert!(ends.iter().all(|m| m.vertex_image.values().all(|s| s.len() == 1)));
        assert_eq!(ends.len(), automorphisms(&t), "{t}");
    }
}

#[test]
fn corolla_faces_into_caterpillars() {
    for n in 1..=5 {
        let t = caterpillar(n, 2);
        let arity = t.leaf_count();
        let faces = enumerate_morphisms(&PlanarTree::corolla(arity), &t, MorphismClass::PlanarFaces, 1_000_000).unwrap();
        assert_eq!(faces.len(), 1);
        assert_eq!(faces[0].vertex_image[&VertexId(0)].len(), n);
    }
}

fn tilde_triple(rng: &mut SeededRng) -> (OmegaTildeMorphism, OmegaTildeMorphism, OmegaTildeMorphism) {
    let t = rich_tree(rng);
    let gs = random_factorization(rng, &t, 3, 4);
    let mut it = gs.into_iter().map(|g| random_tilde(rng, g, &weights()));
    (it.next().unwrap(), it.next().unwrap(), it.next().unwrap())
}

#[test]
fn tilde_composition_is_associative_and_projects() {
    let mut rng = seeded(61);
    let mut bracketed = 0;
    for _ in 0..200 {
        let (f, g, h) = tilde_triple(&mut rng);
        let hg = compose_omega_tilde(&h, &g).unwrap();
        let gf = compose_omega_tilde(&g, &f).unwrap();
        let lhs = compose_omega_tilde(&hg, &f).unwrap();
        let rhs = compose_omega_tilde(&h, &gf).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(gf.base, compose_omega(&g.base, &f.base).unwrap());
        assert_eq!(lhs.base, compose_chain(&[f.base.clone(), g.base.clone(), h.base.clone()]).unwrap());
        bracketed += usize::from(!lhs.brackets().is_empty());
    }
    assert!(bracketed > 20, "{bracketed}");
}

#[test]
fn unbracketed_small_images_compose_unbracketed() {
    let t = caterpillar(3, 1);
    let f = OmegaTildeMorphism::identity(&t);
    let g = OmegaTildeMorphism::unbracketed(corolla_inclusion(&t, VertexId(1)).unwrap());
    let c = compose_omega_tilde(&f, &g).unwrap();
    assert!(c.brackets().is_empty());
}

#[test]
fn factorization_bracketing_concatenates() {
    let mut rng = seeded(62);
    let mut nonempty = 0;
    for _ in 0..200 {
        let t = rich_tree(&mut rng);
        let n = rng.gen_range(2..=4);
        let gs = random_factorization(&mut rng, &t, n, 4);
        let k = rng.gen_range(1..n);
        let whole = factorization_morphism(&gs).unwrap();
        let glued = compose_omega_tilde(&factorization_morphism(&gs[k..]).unwrap(), &factorization_morphism(&gs[..k]).unwrap())
            .unwrap();
        assert_eq!(whole, glued);
        nonempty += usize::from(!whole.brackets().is_empty());
    }
    assert!(nonempty > 20, "{nonempty}");
}

#[test]
fn factorization_bracketing_is_monotone() {
    let mut rng = seeded(63);
    for _ in 0..200 {
        let t = some_tree(&mut rng, 0);
        let n = rng.gen_range(2..=4);
        let fine = random_factorization(&mut rng, &t, n, 4);
        let k = rng.gen_range(0..n - 1);
        let mut coarse = fine[..k].to_vec();
        coarse.push(compose_omega(&fine[k + 1], &fine[k]).unwrap());
        coarse.extend(fine[k + 2..].iter().cloned());
        for v in fine[0].source.vertices() {
            let small = factorization_bracketing(&coarse, v).unwrap();
            let large = factorization_bracketing(&fine, v).unwrap();
            assert!(small.is_subset(&large));
        }
    }
}

#[test]
fn single_factor_gives_no_brackets() {
    let t = caterpillar(4, 1);
    let g = enumerate_morphisms(&PlanarTree::corolla(5), &t, MorphismClass::PlanarFaces, 100_000).unwrap().remove(0);
    assert!(factorization_bracketing(&[g], VertexId(0)).unwrap().is_empty());
}

#[test]
fn two_step_factorization_through_one_face() {
    for t in [caterpillar(3, 1), star(2, 2), caterpillar(4, 1)] {
        let ix = t.index();
        for e in ix.inner_edges() {
            let Edge::Out(upper) = e else { unreachable!() };
            let lower = ix.parent(upper).unwrap().0;
            let face = inner_face(&t, upper).unwrap();
            let corolla = PlanarTree::corolla(t.leaf_count());
            let rest = enumerate_morphisms(&corolla, &face.source, MorphismClass::PlanarFaces, 100_000).unwrap().remove(0);
            let b = factorization_bracketing(&[rest, face], VertexId(0)).unwrap();
            let expected = [lower, upper].into_iter().collect();
            if t.vertex_count() == 2 {
                assert!(b.is_empty());
            } else {
                assert_eq!(b.brackets().iter().collect::<Vec<_>>(), vec![&expected]);
            }
        }
    }
}

fn cactus_values(rng: &mut SeededRng, t: &PlanarTree) -> BTreeMap<VertexId, Cactus> {
    let ix = t.index();
    ix.vertices.iter().map(|v| (*v, random_cactus(rng, ix.arity(*v)))).collect()
}

fn terminal_values(t: &PlanarTree) -> BTreeMap<VertexId, usize> {
    let ix = t.index();
    ix.vertices.iter().map(|v| (*v, ix.arity(*v))).collect()
}

fn word_values(rng: &mut SeededRng, t: &PlanarTree) -> BTreeMap<VertexId, Vec<usize>> {
    let ix = t.index();
    ix.vertices.iter().map(|v| (*v, random_permutation(rng, ix.arity(*v)))).collect()
}

#[test]
fn phi_objects() {
    assert!(phi_object(&PlanarTree::eta()).is_empty());
    assert_eq!(phi_object(&PlanarTree::corolla(4)), vec![4]);
    let t = PlanarTree::from_shape(&Shape::Node(vec![
        ShapeInput::Node(vec![ShapeInput::Leaf; 3]),
        ShapeInput::Node(vec![ShapeInput::Leaf]),
    ]));
    assert_eq!(phi_object(&t), vec![2, 3, 1]);
    assert_eq!(Phi(CactusAlgebra).object(&t), vec![2, 3, 1]);
}

#[test]
fn phi_of_identity_is_identity() {
    let mut rng = seeded(64);
    for _ in 0..50 {
        let t = some_tree(&mut rng, 1);
        let values = cactus_values(&mut rng, &t);
        let id = OmegaTildeMorphism::identity(&t);
        assert_eq!(phi_morphism(&CactusAlgebra, &id, &values).unwrap(), values);
    }
}

#[test]
fn inner_face_composes_two_cacti() {
    let mut rng = seeded(65);
    for _ in 0..50 {
        let (a, b) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let slot = rng.gen_range(0..a);
        let t = PlanarTree::corolla(a).graft(slot, &PlanarTree::corolla(b)).unwrap().tree;
        let ix = t.index();
        let (lower, upper) = (ix.vertices[0], ix.vertices[1]);
        let values = cactus_values(&mut rng, &t);
        let d = OmegaTildeMorphism::unbracketed(inner_face(&t, upper).unwrap());
        let out = phi_morphism(&CactusAlgebra, &d, &values).unwrap();
        assert_eq!(out[&lower], cact1_compose(&values[&lower], slot, &values[&upper]).unwrap());
    }
}

fn functorial<P: BoAlgebra>(
    p: &P,
    pairs: usize,
    seed: u64,
    lo: usize,
    values: &mut dyn FnMut(&mut SeededRng, &PlanarTree) -> BTreeMap<VertexId, P::Value>,
) {
    let mut rng = seeded(seed);
    for _ in 0..pairs {
        let t = some_tree(&mut rng, lo);
        let gs = random_factorization(&mut rng, &t, 2, 4);
        let f = random_tilde(&mut rng, gs[0].clone(), &weights());
        let g = random_tilde(&mut rng, gs[1].clone(), &weights());
        let x = values(&mut rng, &t);
        let gf = compose_omega_tilde(&g, &f).unwrap();
        let lhs = phi_morphism(p, &gf, &x).unwrap();
        let rhs = phi_morphism(p, &f, &phi_morphism(p, &g, &x).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn phi_is_functorial_for_the_terminal_operad() {
    functorial(&StrictAlgebra(Terminal), 200, 66, 0, &mut |_, t| terminal_values(t));
}

#[test]
fn phi_is_functorial_for_cacti() {
    functorial(&CactusAlgebra, 200, 67, 1, &mut cactus_values);
}

#[test]
fn phi_is_functorial_for_the_associative_operad() {
    functorial(&StrictAlgebra(Associative), 200, 68, 0, &mut word_values);
}

#[test]
fn segal_condition_holds() {
    for t in small_trees(5, &[0, 1, 2, 3]).into_iter().filter(|t| !t.is_eta()) {
        assert!(segal_check(&StrictAlgebra(Terminal), &t, &terminal_values(&t)).unwrap());
    }
    let mut rng = seeded(69);
    for t in small_trees(4, &[1, 2, 3]).into_iter().filter(|t| !t.is_eta()) {
        let values = cactus_values(&mut rng, &t);
        assert!(segal_check(&CactusAlgebra, &t, &values).unwrap());
    }
}

#[test]
fn strict_algebras_ignore_weights() {
    let mut rng = seeded(70);
    for _ in 0..200 {
        let t = some_tree(&mut rng, 0);
        let g = bocacti::sampling::random_morphism_into(&mut rng, &t, 3, 5);
        let bracketed = random_tilde(&mut rng, g.clone(), &weights());
        let plain = OmegaTildeMorphism::unbracketed(g);
        let x = word_values(&mut rng, &t);
        let p = StrictAlgebra(Associative);
        assert_eq!(phi_morphism(&p, &bracketed, &x).unwrap(), phi_morphism(&p, &plain, &x).unwrap());
    }
}

#[test]
fn input_order_is_immaterial() {
    let mut rng = seeded(71);
    for _ in 0..200 {
        let t = some_tree(&mut rng, 1);
        let g = bocacti::sampling::random_morphism_into(&mut rng, &t, 3, 5);
        let m = random_tilde(&mut rng, g, &weights());
        let x = cactus_values(&mut rng, &t);
        let a = phi_morphism_ordered(&CactusAlgebra, &m, &x, InputOrder::Preorder).unwrap();
        let b = phi_morphism_ordered(&CactusAlgebra, &m, &x, InputOrder::ReversePreorder).unwrap();
        assert_eq!(a, b);
        let w = word_values(&mut rng, &t);
        let p = StrictAlgebra(Associative);
        assert_eq!(
            phi_morphism_ordered(&p, &m, &w, InputOrder::Preorder).unwrap(),
            phi_morphism_ordered(&p, &m, &w, InputOrder::ReversePreorder).unwrap()
        );
    }
}

#[test]
fn ill_typed_values_are_rejected() {
    let t = caterpillar(2, 1);
    let mut x = terminal_values(&t);
    x.insert(VertexId(1), 5);
    let id = OmegaTildeMorphism::identity(&t);
    assert!(phi_morphism(&StrictAlgebra(Terminal), &id, &x).is_err());
}

#[test]
fn morphism_json_roundtrip() {
    let mut rng = seeded(72);
    for _ in 0..100 {
        let t = some_tree(&mut rng, 0);
        let g = bocacti::sampling::random_morphism_into(&mut rng, &t, 3, 5);
        let m = random_tilde(&mut rng, g, &weights());
        let (a, back) = (m.to_json(), OmegaTildeMorphism::from_json(&m.to_json()).unwrap());
        let b = back.to_json();
        assert_eq!(a["brackets"], b["brackets"]);
        for key in ["edge_map", "vertex_image"] {
            assert_eq!(a["base"][key], b["base"][key]);
        }
        assert_eq!(back.base.source.shape(), m.base.source.shape());
        assert_eq!(OmegaTildeMorphism::from_json(&b).unwrap(), back);
    }
}
