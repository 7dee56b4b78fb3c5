//! Named verification suites. Each suite runs a list of checks and reports,
//! per check, how many cases ran, how many failed, and the first failing
//! case.

use crate::bo_action::{lambda, lambda_on_chain, ActionContext};
use crate::bracketings::{
    enumerate_bracketings, maximal_bracketings, nerve_statistics, weights_to_chain, Bracket, BracketChain, Bracketing,
    WeightedBracketing,
};
use crate::cacti::{
    cact1_compose, cactus_from_maps, gamma_ms, ms_compose, non_associativity_witness, rescaling_identity_check,
    scaling_map, Cactus, MSElement,
};
use crate::dendroidal::{
    compose_chain, compose_omega_tilde, enumerate_morphisms, factorization_morphism, phi_morphism,
    segal_check, BoAlgebra, CactusAlgebra, MorphismClass, OmegaMorphism, OmegaTildeMorphism, StrictAlgebra,
};
use crate::operad::{BOElement, OElement, Terminal};
use crate::plmaps::{average_of_steps, MonotoneReparam, PLMap};
use crate::rational::{fmt_q, one, q, Q};
use crate::sampling::{
    random_cactus, random_factorization, random_inputs, random_ms, random_oelement, random_permutation, random_tilde,
    random_tree, random_weighted_bracketing, random_wtree, seeded, SeededRng,
};
use crate::trees::{caterpillar, enumerate_shapes, enumerate_vertex_trees, star, Edge, PlanarTree, Shape, ShapeInput, Subtree, VertexId};
use crate::wconstruction::{compose_w, normalize_w, psi, psi_inverse, WMode, WTree};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};

pub const SUITES: &[&str] = &[
    "bracket-counts",
    "contractibility",
    "bo-associativity",
    "psi-roundtrip",
    "omega-tilde",
    "phi-nerve",
    "coend",
    "rescaling",
    "nonassoc",
    "bo-action-coherence",
    "weight-zero-seam",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub seed: u64,
    /// Vertex bound for bracketing enumeration.
    pub limit: usize,
    /// Size of the randomized suites.
    pub samples: usize,
    /// Random cactus tuples per configuration in the action suite.
    pub tuples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { seed: 42, limit: 7, samples: 1000, tuples: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SuiteError {
    #[error("unknown suite {0:?}")]
    Unknown(String),
    #[error("bounds must be positive")]
    BadConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub id: String,
    pub cases: usize,
    pub failures: usize,
    pub counterexample: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Value>,
}

impl CheckReport {
    fn new(id: &str) -> CheckReport {
        CheckReport { id: id.to_string(), cases: 0, failures: 0, counterexample: None, values: None }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }

    /// Records one case. Errors count as failures.
    fn case<E: std::fmt::Display>(&mut self, outcome: Result<bool, E>, describe: impl FnOnce() -> String) {
        self.cases += 1;
        let failure = match outcome {
            Ok(true) => return,
            Ok(false) => describe(),
            Err(e) => format!("error: {e}; {}", describe()),
        };
        self.failures += 1;
        self.counterexample.get_or_insert(failure);
    }

    fn with_values(mut self, v: Value) -> CheckReport {
        self.values = Some(v);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub limit: usize,
    pub samples: usize,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

pub fn run_suite(name: &str, cfg: &RunConfig) -> Result<SuiteReport, SuiteError> {
    if cfg.limit == 0 || cfg.samples == 0 || cfg.tuples == 0 {
        return Err(SuiteError::BadConfig);
    }
    let mut checks = match name {
        "bracket-counts" => bracket_counts(cfg),
        "contractibility" => contractibility(cfg),
        "bo-associativity" => bo_associativity(cfg),
        "psi-roundtrip" => psi_roundtrip(cfg),
        "omega-tilde" => omega_tilde(cfg),
        "phi-nerve" => phi_nerve(cfg),
        "coend" => coend(cfg),
        "rescaling" => rescaling(cfg),
        "nonassoc" => nonassoc(),
        "bo-action-coherence" => bo_action_coherence(cfg),
        "weight-zero-seam" => weight_zero_seam(cfg),
        other => return Err(SuiteError::Unknown(other.to_string())),
    };
    checks.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(SuiteReport {
        suite: name.to_string(),
        seed: cfg.seed,
        limit: cfg.limit,
        samples: cfg.samples,
        passed: checks.iter().all(CheckReport::passed),
        checks,
    })
}

fn catalan(n: usize) -> usize {
    let mut c = vec![1usize; n + 1];
    for m in 1..=n {
        c[m] = (0..m).map(|i| c[i] * c[m - 1 - i]).sum();
    }
    c[n]
}

fn bracket_counts(cfg: &RunConfig) -> Vec<CheckReport> {
    let mut cat = CheckReport::new("caterpillar-corners");
    let mut found = BTreeMap::new();
    for n in 3..=5 {
        let count = maximal_bracketings(&caterpillar(n, 1)).map(|m| m.len());
        if let Ok(c) = &count {
            found.insert(n.to_string(), *c);
        }
        cat.case(count.map(|c| c == catalan(n - 1)), || format!("caterpillar with {n} vertices"));
    }
    let mut st = CheckReport::new("star-corners");
    let count = maximal_bracketings(&star(3, 2)).map(|m| m.len());
    let star_count = count.clone().unwrap_or(0);
    st.case(count.map(|c| c == 6), || "star with three arms".into());
    let mut nerve = CheckReport::new("caterpillar-dimension");
    for n in 3..=5usize {
        let stats = nerve_statistics(&caterpillar(n, 1), cfg.limit);
        nerve.case(stats.map(|s| s.f_vector.len() == n - 1), || format!("caterpillar with {n} vertices"));
    }
    vec![cat.with_values(json!(found)), st.with_values(json!({"star-3": star_count})), nerve]
}

fn contractibility(cfg: &RunConfig) -> Vec<CheckReport> {
    let mut euler = CheckReport::new("euler-characteristic");
    let mut per_size = BTreeMap::new();
    for n in 1..=6.min(cfg.limit) {
        let shapes = enumerate_vertex_trees(n);
        per_size.insert(n.to_string(), shapes.len());
        for shape in shapes {
            let t = PlanarTree::from_shape(&shape);
            euler.case(nerve_statistics(&t, cfg.limit).map(|s| s.euler_characteristic == 1), || t.to_string());
        }
    }
    vec![euler.with_values(json!({"trees": per_size}))]
}

/// Every weighted bracketing of `tree` with weights from `pool`.
pub fn weightings(tree: &PlanarTree, pool: &[Q]) -> Vec<WeightedBracketing> {
    let mut out = Vec::new();
    for b in enumerate_bracketings(tree).expect("small tree").bracketings() {
        let bs: Vec<Bracket> = b.brackets().iter().cloned().collect();
        let total = pool.len().pow(bs.len() as u32);
        for code in 0..total {
            let mut c = code;
            let map: BTreeMap<Bracket, Q> = bs
                .iter()
                .map(|s| {
                    let w = pool[c % pool.len()].clone();
                    c /= pool.len();
                    (s.clone(), w)
                })
                .collect();
            out.push(WeightedBracketing::new(map).expect("weights in (0,1]"));
        }
    }
    out
}

/// `η` and every tree with at most `n` vertices and arities from `arities`.
pub fn trees_up_to(n: usize, arities: &[usize]) -> Vec<PlanarTree> {
    let mut out = vec![PlanarTree::eta()];
    for k in 1..=n {
        out.extend(enumerate_shapes(k, arities).iter().map(PlanarTree::from_shape));
    }
    out
}

/// All planar-labelled elements over `trees`, with every weighting.
pub fn planar_grid(trees: &[PlanarTree], pool: &[Q]) -> Vec<BOElement> {
    trees
        .iter()
        .flat_map(|t| {
            let base = OElement::planar(t.clone());
            weightings(t, pool).into_iter().map(move |w| BOElement { base: base.clone(), weighted: w })
        })
        .collect()
}

fn slots_for(a: &BOElement, b: &BOElement) -> Vec<usize> {
    let c = b.base.output_color();
    a.base.input_colors().iter().enumerate().filter(|(_, x)| **x == c).map(|(i, _)| i).collect()
}

/// The permutation of `a ∘_{perm[i]} b` matching `(a·perm) ∘_i b`.
fn block_permutation(perm: &[usize], i: usize, kb: usize) -> Vec<usize> {
    let target = perm[i];
    let mut out = Vec::with_capacity(perm.len() + kb - 1);
    for (p, x) in perm.iter().enumerate() {
        if p == i {
            out.extend((0..kb).map(|j| target + j));
        } else {
            out.push(if *x < target { *x } else { x + kb - 1 });
        }
    }
    out
}

/// Brackets expected after inserting `η` at the unary vertex `v`.
fn eta_oracle(a: &BOElement, v: VertexId) -> WeightedBracketing {
    let total = a.base.tree.vertex_count() - 1;
    let mut out = WeightedBracketing::empty();
    for (s, w) in a.weighted.weights() {
        let s: Bracket = s.iter().copied().filter(|x| *x != v).collect();
        if s.len() >= 2 && s.len() < total {
            out.insert_max(s, w.clone());
        }
    }
    out
}

fn describe_triple(a: &BOElement, i: usize, b: &BOElement, j: usize, c: &BOElement) -> String {
    format!("a={} i={i} b={} j={j} c={}", a.to_json(), b.to_json(), c.to_json())
}

fn bo_associativity(cfg: &RunConfig) -> Vec<CheckReport> {
    let pool = [one(), q(1, 2)];
    let trees = trees_up_to(3, &[0, 1, 2]);
    let grid = planar_grid(&trees, &pool);
    let mut sequential = CheckReport::new("sequential-associativity");
    let mut parallel = CheckReport::new("parallel-associativity");
    let mut inner: BTreeMap<(usize, usize, usize), BOElement> = BTreeMap::new();
    for (bi, b) in grid.iter().enumerate() {
        for (ci, c) in grid.iter().enumerate() {
            for j in slots_for(b, c) {
                inner.insert((bi, j, ci), b.compose(j, c).expect("matching colors"));
            }
        }
    }
    for a in &grid {
        for (bi, b) in grid.iter().enumerate() {
            for i in slots_for(a, b) {
                let ab = a.compose(i, b).expect("matching colors");
                for (ci, c) in grid.iter().enumerate() {
                    for j in slots_for(b, c) {
                        let lhs = ab.compose(i + j, c);
                        let rhs = a.compose(i, &inner[&(bi, j, ci)]);
                        sequential.case(lhs.and_then(|l| Ok(l == rhs?)), || describe_triple(a, i, b, j, c));
                    }
                    for k in slots_for(a, c).into_iter().filter(|k| *k > i) {
                        let lhs = ab.compose(k + b.arity() - 1, c);
                        let rhs = a.compose(k, c).and_then(|ac| ac.compose(i, b));
                        parallel.case(lhs.and_then(|l| Ok(l == rhs?)), || describe_triple(a, i, b, k, c));
                    }
                }
            }
        }
    }

    // labelled elements: every tree with a seeded random labelling
    let mut rng = seeded(cfg.seed);
    let labelled: Vec<BOElement> = trees
        .iter()
        .flat_map(|t| {
            let base = random_oelement(&mut rng, t.clone());
            weightings(t, &pool).into_iter().map(move |w| BOElement { base: base.clone(), weighted: w })
        })
        .collect();
    let mut equivariance = CheckReport::new("equivariance");
    let mut unit = CheckReport::new("unit");
    let mut eta = CheckReport::new("eta-discard");
    let mut forget = CheckReport::new("forgetful-projection");
    let eta_element = BOElement::unbracketed(OElement::eta());
    for a in grid.iter().chain(&labelled) {
        let left = BOElement::unit(a.base.output_color()).compose(0, a);
        let right = a.base.input_colors().into_iter().enumerate().map(|(i, c)| a.compose(i, &BOElement::unit(c)));
        let mut ok = left.as_ref().is_ok_and(|l| l == a);
        for r in right {
            ok &= r.is_ok_and(|r| r == *a);
        }
        unit.case(Ok::<bool, String>(ok), || a.to_json().to_string());
        for (i, c) in a.base.input_colors().into_iter().enumerate() {
            if c != 1 {
                continue;
            }
            let v = a.base.sigma[i];
            let out = a.compose(i, &eta_element);
            eta.case(out.map(|o| o.weighted == eta_oracle(a, v) && o.base.tree.vertex_count() + 1 == a.base.tree.vertex_count()), || {
                format!("a={} i={i}", a.to_json())
            });
        }
        for b in labelled.iter().step_by(7) {
            for i in slots_for(a, b) {
                let perms: Vec<Vec<usize>> = crate::dendroidal::permutations(a.arity());
                for perm in &perms {
                    let acted = match a.sigma_act(perm) {
                        Ok(x) => x,
                        Err(e) => {
                            equivariance.case(Err::<bool, _>(e), || "sigma action".into());
                            continue;
                        }
                    };
                    let pos = perm.iter().position(|p| *p == i).expect("permutation");
                    let lhs = acted.compose(pos, b);
                    let rhs = a.compose(i, b).and_then(|x| x.sigma_act(&block_permutation(perm, pos, b.arity())));
                    equivariance.case(lhs.and_then(|l| Ok(l == rhs?)), || format!("a={} perm={perm:?} b={}", a.to_json(), b.to_json()));
                }
                let rho = random_permutation(&mut rng, b.arity());
                let mut shifted: Vec<usize> = (0..a.arity() + b.arity() - 1).collect();
                for (j, r) in rho.iter().enumerate() {
                    shifted[i + j] = i + r;
                }
                let lhs = b.sigma_act(&rho).and_then(|br| a.compose(i, &br));
                let rhs = a.compose(i, b).and_then(|x| x.sigma_act(&shifted));
                equivariance.case(lhs.and_then(|l| Ok(l == rhs?)), || format!("a={} b={} rho={rho:?}", a.to_json(), b.to_json()));
                let projected = a.compose(i, b).map(|x| x.forget());
                let direct = a.forget().compose(i, &b.forget());
                forget.case(projected.and_then(|p| Ok(p == direct?)), || format!("a={} b={}", a.to_json(), b.to_json()));
            }
        }
    }

    let mut labelled_assoc = CheckReport::new("labelled-associativity");
    while labelled_assoc.cases < cfg.samples {
        let a = &labelled[rng.gen_range(0..labelled.len())];
        let b = &labelled[rng.gen_range(0..labelled.len())];
        let c = &labelled[rng.gen_range(0..labelled.len())];
        let (si, sj) = (slots_for(a, b), slots_for(b, c));
        if si.is_empty() || sj.is_empty() {
            continue;
        }
        let (i, j) = (si[rng.gen_range(0..si.len())], sj[rng.gen_range(0..sj.len())]);
        let lhs = a.compose(i, b).and_then(|ab| ab.compose(i + j, c));
        let rhs = b.compose(j, c).and_then(|bc| a.compose(i, &bc));
        labelled_assoc.case(lhs.and_then(|l| Ok(l == rhs?)), || describe_triple(a, i, b, j, c));
    }
    let sizes = json!({"planar": grid.len(), "labelled": labelled.len()});
    vec![sequential.with_values(sizes), parallel, equivariance, unit, eta, forget, labelled_assoc]
}

fn w_lengths() -> Vec<Q> {
    vec![crate::rational::zero(), q(1, 3), q(1, 2), q(2, 3), one()]
}

fn composable_w(rng: &mut SeededRng, budget: usize) -> (WTree, usize, WTree) {
    loop {
        let a = random_wtree(rng, budget, &w_lengths());
        let b = random_wtree(rng, budget, &w_lengths());
        let slots: Vec<usize> = (0..a.arity()).filter(|i| a.input_colors()[*i] == b.output_color()).collect();
        if !slots.is_empty() {
            let i = slots[rng.gen_range(0..slots.len())];
            return (a, i, b);
        }
    }
}

fn psi_roundtrip(cfg: &RunConfig) -> Vec<CheckReport> {
    let mut rng = seeded(cfg.seed);
    let pool = [one(), q(2, 3), q(1, 3)];
    let mut there = CheckReport::new("psi-after-inverse");
    let mut back = CheckReport::new("inverse-after-psi");
    let mut normal = CheckReport::new("inverse-is-normal");
    for n in 0..=4 {
        for shape in enumerate_shapes(n, &[0, 1, 2, 3]) {
            let tree = PlanarTree::from_shape(&shape);
            let ws = weightings(&tree, &pool);
            let mut labellings = vec![OElement::planar(tree.clone())];
            labellings.push(random_oelement(&mut rng, tree.clone()));
            for base in labellings {
                for wb in &ws {
                    let x = BOElement { base: base.clone(), weighted: wb.clone() };
                    let w = psi_inverse(&x);
                    there.case(psi(&w).map(|y| y == x), || x.to_json().to_string());
                    back.case(psi(&w).map(|y| psi_inverse(&y) == w), || x.to_json().to_string());
                    normal.case(Ok::<bool, String>(normalize_w(&w, WMode::W0) == w), || x.to_json().to_string());
                }
            }
        }
    }
    let mut operad_map = CheckReport::new("psi-is-an-operad-map");
    for _ in 0..cfg.samples {
        let (a, i, b) = composable_w(&mut rng, 3);
        let (a, b) = (normalize_w(&a, WMode::W0), normalize_w(&b, WMode::W0));
        let outcome = (|| -> Result<bool, String> {
            let lhs = psi(&compose_w(&a, i, &b, WMode::W0).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            let pa = psi(&a).map_err(|e| e.to_string())?;
            let pb = psi(&b).map_err(|e| e.to_string())?;
            Ok(lhs == pa.compose(i, &pb).map_err(|e| e.to_string())?)
        })();
        operad_map.case(outcome, || format!("a={} i={i} b={}", a.to_json(), b.to_json()));
    }
    vec![there, back, normal, operad_map]
}

fn ids(xs: &[u32]) -> BTreeSet<VertexId> {
    xs.iter().map(|x| VertexId(*x)).collect()
}

/// The composite bracketing of the worked example: a face of `C_9` into a
/// four-vertex tree, followed by a face into a six-vertex caterpillar-like
/// tree, each carrying one weighted bracket.
pub fn worked_tilde_example() -> Result<(OmegaTildeMorphism, OmegaTildeMorphism, BTreeMap<Bracket, Q>), String> {
    use ShapeInput::{Leaf as L, Node as N};
    let t = PlanarTree::from_shape(&Shape::Node(vec![
        N(vec![N(vec![N(vec![N(vec![N(vec![L, L]), L, L]), L]), L]), L]),
        L,
        L,
        L,
    ]));
    let s = PlanarTree::from_shape(&Shape::Node(vec![N(vec![N(vec![N(vec![L, L]), L, L]), L, L, L]), L, L, L]));
    let r = PlanarTree::corolla(9);
    let face = |src: &PlanarTree, dst: &PlanarTree, images: &[(u32, &[u32])]| -> Result<OmegaMorphism, String> {
        let mut found: Vec<OmegaMorphism> = enumerate_morphisms(src, dst, MorphismClass::PlanarFaces, 100_000)
            .map_err(|e| e.to_string())?
            .into_iter()
            .filter(|m| images.iter().all(|(v, set)| m.vertex_image[&VertexId(*v)] == ids(set)))
            .collect();
        if found.len() != 1 {
            return Err(format!("{} faces with the prescribed images", found.len()));
        }
        Ok(found.remove(0))
    };
    let f = face(&r, &s, &[(0, &[0, 1, 2])])?;
    let g = face(&s, &t, &[(0, &[0]), (1, &[1, 2, 3]), (2, &[4]), (3, &[5])])?;
    let b1 = WeightedBracketing::new(BTreeMap::from([(ids(&[0, 1]), q(1, 2))])).map_err(|e| e.to_string())?;
    let b2 = WeightedBracketing::new(BTreeMap::from([(ids(&[2, 3]), q(1, 3))])).map_err(|e| e.to_string())?;
    let ft = OmegaTildeMorphism::new(f, BTreeMap::from([(VertexId(0), b1)])).map_err(|e| e.to_string())?;
    let gt = OmegaTildeMorphism::new(g, BTreeMap::from([(VertexId(1), b2)])).map_err(|e| e.to_string())?;
    let expected = BTreeMap::from([(ids(&[2, 3]), q(1, 3)), (ids(&[1, 2, 3]), one()), (ids(&[0, 1, 2, 3]), q(1, 2))]);
    Ok((ft, gt, expected))
}

fn tilde_weights() -> Vec<Q> {
    vec![q(1, 3), q(2, 3), one()]
}

fn rich_tree(rng: &mut SeededRng) -> PlanarTree {
    let n = rng.gen_range(3..=4);
    random_tree(rng, n, 1, 3)
}

fn small_tree(rng: &mut SeededRng, lo: usize) -> PlanarTree {
    let n = rng.gen_range(1..=4);
    random_tree(rng, n, lo, 3)
}

fn omega_tilde(cfg: &RunConfig) -> Vec<CheckReport> {
    let mut worked = CheckReport::new("worked-example");
    let outcome = worked_tilde_example().and_then(|(f, g, expected)| {
        let c = compose_omega_tilde(&g, &f).map_err(|e| e.to_string())?;
        Ok(c.bracketing(VertexId(0)).weights() == &expected)
    });
    worked.case(outcome, || "composite bracketing of the worked example".into());

    let mut rng = seeded(cfg.seed);
    let mut assoc = CheckReport::new("associativity");
    let mut bracketed = 0;
    for _ in 0..200 {
        let t = rich_tree(&mut rng);
        let gs = random_factorization(&mut rng, &t, 3, 4);
        let ms: Vec<OmegaTildeMorphism> = gs.into_iter().map(|g| random_tilde(&mut rng, g, &tilde_weights())).collect();
        let (f, g, h) = (&ms[0], &ms[1], &ms[2]);
        let outcome = (|| -> Result<bool, String> {
            let e = |x: crate::dendroidal::DendroidalError| x.to_string();
            let lhs = compose_omega_tilde(&compose_omega_tilde(h, g).map_err(e)?, f).map_err(e)?;
            let rhs = compose_omega_tilde(h, &compose_omega_tilde(g, f).map_err(e)?).map_err(e)?;
            let base = compose_chain(&[f.base.clone(), g.base.clone(), h.base.clone()]).map_err(e)?;
            bracketed += usize::from(!lhs.brackets().is_empty());
            Ok(lhs == rhs && lhs.base == base)
        })();
        assoc.case(outcome, || format!("f={} g={} h={}", f.to_json(), g.to_json(), h.to_json()));
    }
    let mut concat = CheckReport::new("factorization-concatenation");
    let mut nonempty = 0;
    for _ in 0..200 {
        let t = rich_tree(&mut rng);
        let n = rng.gen_range(2..=4);
        let gs = random_factorization(&mut rng, &t, n, 4);
        let k = rng.gen_range(1..n);
        let outcome = (|| -> Result<bool, String> {
            let e = |x: crate::dendroidal::DendroidalError| x.to_string();
            let whole = factorization_morphism(&gs).map_err(e)?;
            let tail = factorization_morphism(&gs[k..]).map_err(e)?;
            let head = factorization_morphism(&gs[..k]).map_err(e)?;
            nonempty += usize::from(!whole.brackets().is_empty());
            Ok(whole == compose_omega_tilde(&tail, &head).map_err(e)?)
        })();
        concat.case(outcome, || format!("{} factors split at {k}", gs.len()));
    }
    vec![
        worked,
        assoc.with_values(json!({"bracketed": bracketed})),
        concat.with_values(json!({"bracketed": nonempty})),
    ]
}

fn cactus_values(rng: &mut SeededRng, t: &PlanarTree) -> BTreeMap<VertexId, Cactus> {
    let ix = t.index();
    ix.vertices.iter().map(|v| (*v, random_cactus(rng, ix.arity(*v)))).collect()
}

fn terminal_values(t: &PlanarTree) -> BTreeMap<VertexId, usize> {
    let ix = t.index();
    ix.vertices.iter().map(|v| (*v, ix.arity(*v))).collect()
}

fn functoriality<P: BoAlgebra>(
    id: &str,
    p: &P,
    rng: &mut SeededRng,
    lo: usize,
    values: &mut dyn FnMut(&mut SeededRng, &PlanarTree) -> BTreeMap<VertexId, P::Value>,
) -> CheckReport {
    let mut check = CheckReport::new(id);
    for _ in 0..200 {
        let t = small_tree(rng, lo);
        let gs = random_factorization(rng, &t, 2, 4);
        let f = random_tilde(rng, gs[0].clone(), &tilde_weights());
        let g = random_tilde(rng, gs[1].clone(), &tilde_weights());
        let x = values(rng, &t);
        let outcome = (|| -> Result<bool, crate::dendroidal::DendroidalError> {
            let gf = compose_omega_tilde(&g, &f)?;
            let lhs = phi_morphism(p, &gf, &x)?;
            let rhs = phi_morphism(p, &f, &phi_morphism(p, &g, &x)?)?;
            let identity = phi_morphism(p, &OmegaTildeMorphism::identity(&t), &x)? == x;
            Ok(lhs == rhs && identity)
        })();
        check.case(outcome, || format!("f={} g={}", f.to_json(), g.to_json()));
    }
    check
}

fn phi_nerve(cfg: &RunConfig) -> Vec<CheckReport> {
    let mut rng = seeded(cfg.seed);
    let terminal = functoriality("functorial-terminal", &StrictAlgebra(Terminal), &mut rng, 0, &mut |_, t| terminal_values(t));
    let cacti = functoriality("functorial-cacti", &CactusAlgebra, &mut rng, 1, &mut cactus_values);
    let mut segal_terminal = CheckReport::new("segal-terminal");
    for t in trees_up_to(4, &[0, 1, 2, 3]).into_iter().filter(|t| !t.is_eta()) {
        segal_terminal.case(segal_check(&StrictAlgebra(Terminal), &t, &terminal_values(&t)), || t.to_string());
    }
    let mut segal_cacti = CheckReport::new("segal-cacti");
    for t in trees_up_to(4, &[1, 2, 3]).into_iter().filter(|t| !t.is_eta()) {
        let values = cactus_values(&mut rng, &t);
        segal_cacti.case(segal_check(&CactusAlgebra, &t, &values), || t.to_string());
    }
    vec![terminal, cacti, segal_terminal, segal_cacti]
}

fn sample_point(rng: &mut SeededRng) -> Q {
    let d = rng.gen_range(1..=97i64);
    q(rng.gen_range(0..=d), d)
}

fn coend(cfg: &RunConfig) -> Vec<CheckReport> {
    let mut rng = seeded(cfg.seed);
    let mut average = CheckReport::new("average-is-identity");
    let mut roundtrip = CheckReport::new("maps-roundtrip");
    for _ in 0..cfg.samples {
        let k = rng.gen_range(1..=5);
        let x = random_cactus(&mut rng, k);
        let maps = x.cactus_maps();
        average.case(average_of_steps(&maps).map(|m| m == PLMap::identity()), || x.to_string());
        roundtrip.case(cactus_from_maps(&maps).map(|y| y == x), || x.to_string());
    }
    let mut pointwise = CheckReport::new("composition-pointwise");
    for _ in 0..cfg.samples {
        let (ka, kb) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let a = random_ms(&mut rng, ka);
        let b = random_ms(&mut rng, kb);
        let i = rng.gen_range(0..ka);
        let points: Vec<Q> = (0..50).map(|_| sample_point(&mut rng)).collect();
        let outcome = ms_compose(&a, i, &b).map(|ab| {
            let (lhs, rhs) = (ab.phi(), a.phi().compose(i, &b.phi()));
            points.iter().all(|t| lhs.eval(t) == rhs.eval(t))
        });
        pointwise.case(outcome, || format!("a={} i={i} b={}", a.to_json(), b.to_json()));
    }
    vec![average, roundtrip, pointwise]
}

fn rescaling(cfg: &RunConfig) -> Vec<CheckReport> {
    let mut rng = seeded(cfg.seed);
    let mut identity = CheckReport::new("rescaling-identity");
    for _ in 0..cfg.samples {
        let k = rng.gen_range(1..=4);
        let x = random_cactus(&mut rng, k);
        let ys: Vec<Cactus> = (0..k)
            .map(|_| {
                let m = rng.gen_range(1..=4);
                random_cactus(&mut rng, m)
            })
            .collect();
        identity.case(rescaling_identity_check(&x, &ys), || {
            format!("x={x} ys=[{}]", ys.iter().map(|y| y.to_string()).collect::<Vec<_>>().join("; "))
        });
    }
    let mut control = CheckReport::new("perturbed-control");
    let x = Cactus::linear(2);
    let plain = vec![MSElement::plain(Cactus::linear(2)), MSElement::unit()];
    let outcome = scaling_map(&x, &[2, 1]).and_then(|g| {
        let bump = MonotoneReparam::from_points(vec![q(0, 1), q(1, 2), one()], vec![q(0, 1), q(1, 3), one()])?;
        let out = gamma_ms(&MSElement::new(x.clone(), bump.compose(&g.inverse())), &plain)?;
        Ok(!out.reparam.is_identity())
    });
    control.case(outcome, || "a perturbed reparametrization still gave the identity".into());
    vec![identity, control]
}

fn nonassoc() -> Vec<CheckReport> {
    let w = non_associativity_witness();
    let mut distinct = CheckReport::new("bracketings-differ");
    distinct.case(Ok::<bool, String>(w.left != w.right && w.left.k() == 4), || "the two composites agree".into());
    let mut distance = CheckReport::new("distance-one-quarter");
    distance.case(Ok::<bool, String>(w.distance == q(1, 4)), || format!("distance {}", fmt_q(&w.distance)));
    let values = json!({"left": w.left.to_json(), "right": w.right.to_json(), "distance": fmt_q(&w.distance)});
    vec![distinct, distance.with_values(values)]
}

/// Weighted elements over trees with at most `n` vertices of arity 1–3.
fn action_elements(n: usize, pool: &[Q]) -> Vec<(PlanarTree, Vec<WeightedBracketing>)> {
    trees_up_to(n, &[1, 2, 3]).into_iter().map(|t| {
        let ws = weightings(&t, pool);
        (t, ws)
    }).collect()
}

fn coherence(id: &str, pool: &[Q], cfg: &RunConfig, rng: &mut SeededRng) -> CheckReport {
    let mut check = CheckReport::new(id);
    let all = action_elements(3, pool);
    for (ta, was) in all.iter().filter(|(t, _)| !t.is_eta()) {
        for (tb, wbs) in &all {
            if ta.vertex_count() + tb.vertex_count() > 4 {
                continue;
            }
            let a0 = random_oelement(rng, ta.clone());
            let b0 = random_oelement(rng, tb.clone());
            for i in 0..a0.arity() {
                if a0.input_colors()[i] != b0.output_color() {
                    continue;
                }
                for _ in 0..cfg.tuples {
                    let xa = random_inputs(rng, &a0);
                    let xb = random_inputs(rng, &b0);
                    let mut joined: Vec<Cactus> = xa[..i].to_vec();
                    joined.extend(xb.iter().cloned());
                    joined.extend_from_slice(&xa[i + 1..]);
                    for wb in wbs {
                        let b = BOElement { base: b0.clone(), weighted: wb.clone() };
                        let inner = ActionContext::new(b.clone(), xb.clone()).and_then(|c| lambda(&c));
                        for wa in was {
                            let a = BOElement { base: a0.clone(), weighted: wa.clone() };
                            let outcome = (|| {
                                let mut outer = xa.clone();
                                outer[i] = inner.clone()?;
                                let rhs = lambda(&ActionContext::new(a.clone(), outer)?)?;
                                let c = a.compose(i, &b)?;
                                let lhs = lambda(&ActionContext::new(c, joined.clone())?)?;
                                Ok::<bool, crate::bo_action::ActionError>(lhs == rhs)
                            })();
                            check.case(outcome, || format!("a={} i={i} b={}", a.to_json(), b.to_json()));
                        }
                    }
                }
            }
        }
    }
    check
}

/// The parenthesized iterate of `cact1_compose` prescribed by a maximal
/// bracketing of the chain `vs` (preorder of a caterpillar).
fn corner_value(
    ix: &crate::trees::TreeIndex,
    vs: &[VertexId],
    b: &Bracketing,
    inputs: &BTreeMap<VertexId, Cactus>,
) -> Result<Cactus, crate::cacti::CactusError> {
    if vs.len() == 1 {
        return Ok(inputs[&vs[0]].clone());
    }
    // the split point: the largest proper initial or final segment that is a bracket
    let as_set = |xs: &[VertexId]| xs.iter().copied().collect::<Bracket>();
    let cut = (1..vs.len())
        .find(|c| {
            let (lo, hi) = (as_set(&vs[..*c]), as_set(&vs[*c..]));
            (lo.len() < 2 || b.contains(&lo)) && (hi.len() < 2 || b.contains(&hi))
        })
        .expect("maximal bracketings split every chain");
    let lower = corner_value(ix, &vs[..cut], b, inputs)?;
    let upper = corner_value(ix, &vs[cut..], b, inputs)?;
    let boundary = Subtree::from_set(as_set(&vs[..cut])).leaves(ix);
    let slot = boundary.iter().position(|e| *e == Edge::Out(vs[cut])).expect("the chain continues");
    cact1_compose(&lower, slot, &upper)
}

fn corners(rng: &mut SeededRng) -> CheckReport {
    let mut check = CheckReport::new("caterpillar-corners");
    for n in 1..=4 {
        let t = caterpillar(n, 1);
        let ix = t.index();
        let base = OElement::planar(t.clone());
        let maximal = match maximal_bracketings(&t) {
            Ok(m) => m,
            Err(e) => {
                check.case(Err::<bool, _>(e), || format!("caterpillar {n}"));
                continue;
            }
        };
        for b in maximal {
            for _ in 0..10 {
                let inputs = cactus_values(rng, &t);
                let ordered: Vec<Cactus> = base.sigma.iter().map(|v| inputs[v].clone()).collect();
                let element = BOElement { base: base.clone(), weighted: WeightedBracketing::with_unit_weights(&b) };
                let outcome = (|| -> Result<bool, String> {
                    let got = lambda(&ActionContext::new(element.clone(), ordered).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
                    let want = corner_value(&ix, &ix.vertices, &b, &inputs).map_err(|e| e.to_string())?;
                    Ok(got == want)
                })();
                check.case(outcome, || format!("caterpillar {n} bracketing {}", b.to_json()));
            }
        }
    }
    check
}

fn bo_action_coherence(cfg: &RunConfig) -> Vec<CheckReport> {
    let mut rng = seeded(cfg.seed);
    let unit = coherence("coherence-unit-weights", &[one()], cfg, &mut rng);
    let interpolated = coherence("coherence-interpolated-weights", &[q(1, 3), q(2, 3)], cfg, &mut rng);
    vec![unit, interpolated, corners(&mut rng)]
}

fn weight_zero_seam(cfg: &RunConfig) -> Vec<CheckReport> {
    let mut rng = seeded(cfg.seed);
    let pool = [q(1, 3), q(1, 2), q(2, 3), one()];
    let mut seam = CheckReport::new("zero-weight-equals-deletion");
    let mut done = 0;
    while done < 200 {
        let n = rng.gen_range(3..=4);
        let t = random_tree(&mut rng, n, 1, 3);
        let w = random_weighted_bracketing(&mut rng, &t, &pool);
        if w.is_empty() {
            continue;
        }
        done += 1;
        let keys: Vec<Bracket> = w.weights().keys().cloned().collect();
        let dropped = keys[rng.gen_range(0..keys.len())].clone();
        let mut kept = w.weights().clone();
        kept.remove(&dropped);
        let base = random_oelement(&mut rng, t.clone());
        let inputs = random_inputs(&mut rng, &base);
        let outcome = (|| -> Result<bool, String> {
            let err = |e: crate::bo_action::ActionError| e.to_string();
            let kept = WeightedBracketing::new(kept).map_err(|e| e.to_string())?;
            let deleted = BOElement { base: base.clone(), weighted: kept.clone() };
            let ctx = ActionContext::new(deleted, inputs.clone()).map_err(err)?;
            let mut chain = weights_to_chain(&kept);
            let mut last: BTreeSet<Bracket> = chain.levels.last().expect("nonempty chain").brackets().clone();
            last.insert(dropped.clone());
            chain.levels.push(Bracketing::new(&t, last).map_err(|e| e.to_string())?);
            chain.coords.push(crate::rational::zero());
            let chain = BracketChain::new(chain.levels, chain.coords).map_err(|e| e.to_string())?;
            Ok(lambda_on_chain(&ctx, &chain).map_err(err)? == lambda(&ctx).map_err(err)?)
        })();
        seam.case(outcome, || format!("tree={t} weights={} dropped={dropped:?}", w.to_json()));
    }
    vec![seam]
}
