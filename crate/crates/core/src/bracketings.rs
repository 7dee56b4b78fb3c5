//! Bracketings of planar trees, the poset `B(T)`, its nerve, and weighted
//! bracketings as points of the realization `|B(T)|`.

use crate::rational::{fmt_q, one, q_from_json, q_to_json, zero, Q};
use crate::trees::{enumerate_subtrees, PlanarTree, Subtree, TreeError, VertexId};
use num_traits::{One, Zero};
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};

/// A bracket is the vertex set of a large proper subtree.
pub type Bracket = BTreeSet<VertexId>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BracketError {
    #[error("bracket {0:?} is not a subtree")]
    NotASubtree(Vec<u32>, #[source] TreeError),
    #[error("bracket {0:?} has fewer than two vertices")]
    NotLarge(Vec<u32>),
    #[error("bracket {0:?} is the whole tree")]
    NotProper(Vec<u32>),
    #[error("brackets {0:?} and {1:?} overlap without nesting")]
    NotNested(Vec<u32>, Vec<u32>),
    #[error("weight {0} outside (0,1]")]
    WeightOutOfRange(String),
    #[error("tree has {vertices} vertices, above the enumeration limit {limit}")]
    LimitExceeded { vertices: usize, limit: usize },
    #[error("tree has {0} large proper subtrees; at most 128 are supported")]
    TooManySubtrees(usize),
    #[error("malformed chain: {0}")]
    BadChain(String),
    #[error("malformed bracketing json: {0}")]
    Json(String),
}

pub(crate) fn ids(b: &Bracket) -> Vec<u32> {
    b.iter().map(|v| v.0).collect()
}

/// Checks that `b` is a large proper subtree of `tree`.
pub fn check_bracket(tree: &PlanarTree, b: &Bracket) -> Result<(), BracketError> {
    Subtree::new(tree, b.clone()).map_err(|e| BracketError::NotASubtree(ids(b), e))?;
    if b.len() < 2 {
        return Err(BracketError::NotLarge(ids(b)));
    }
    if b.len() == tree.vertex_count() {
        return Err(BracketError::NotProper(ids(b)));
    }
    Ok(())
}

pub fn nested(a: &Bracket, b: &Bracket) -> bool {
    let common = a.intersection(b).count();
    common == 0 || common == a.len() || common == b.len()
}

/// A set of pairwise nested large proper subtrees.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bracketing {
    brackets: BTreeSet<Bracket>,
}

impl Bracketing {
    pub fn empty() -> Bracketing {
        Bracketing::default()
    }

    pub fn new(tree: &PlanarTree, brackets: BTreeSet<Bracket>) -> Result<Bracketing, BracketError> {
        let b = Bracketing { brackets };
        b.validate(tree)?;
        Ok(b)
    }

    pub(crate) fn from_set(brackets: BTreeSet<Bracket>) -> Bracketing {
        Bracketing { brackets }
    }

    pub fn validate(&self, tree: &PlanarTree) -> Result<(), BracketError> {
        for b in &self.brackets {
            check_bracket(tree, b)?;
        }
        for (i, a) in self.brackets.iter().enumerate() {
            for b in self.brackets.iter().skip(i + 1) {
                if !nested(a, b) {
                    return Err(BracketError::NotNested(ids(a), ids(b)));
                }
            }
        }
        Ok(())
    }

    pub fn brackets(&self) -> &BTreeSet<Bracket> {
        &self.brackets
    }

    pub fn len(&self) -> usize {
        self.brackets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.brackets.is_empty()
    }

    pub fn contains(&self, b: &Bracket) -> bool {
        self.brackets.contains(b)
    }

    pub fn is_subset(&self, other: &Bracketing) -> bool {
        self.brackets.is_subset(&other.brackets)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.brackets.iter().map(|b| json!(ids(b))).collect())
    }

    pub fn from_json(v: &Value) -> Result<Bracketing, BracketError> {
        let arr = v.as_array().ok_or_else(|| BracketError::Json("expected array".into()))?;
        let brackets = arr
            .iter()
            .map(parse_vertex_list)
            .collect::<Result<BTreeSet<_>, _>>()?;
        Ok(Bracketing { brackets })
    }
}

fn parse_vertex_list(v: &Value) -> Result<Bracket, BracketError> {
    v.as_array()
        .ok_or_else(|| BracketError::Json(format!("expected vertex list, got {v}")))?
        .iter()
        .map(|x| {
            x.as_u64()
                .map(|x| VertexId(x as u32))
                .ok_or_else(|| BracketError::Json(format!("bad vertex id {x}")))
        })
        .collect()
}

/// The poset `B(T)`: every bracketing of a tree, encoded as bitmasks over
/// the list of large proper subtrees.
#[derive(Debug, Clone)]
pub struct BracketPoset {
    pub subtrees: Vec<Bracket>,
    /// Elements in canonical order: by size, then lexicographically.
    pub elements: Vec<u128>,
}

impl BracketPoset {
    pub fn bracketing(&self, mask: u128) -> Bracketing {
        Bracketing::from_set(
            (0..self.subtrees.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| self.subtrees[i].clone())
                .collect(),
        )
    }

    pub fn bracketings(&self) -> Vec<Bracketing> {
        self.elements.iter().map(|m| self.bracketing(*m)).collect()
    }

    pub fn maximal(&self) -> Vec<u128> {
        self.elements
            .iter()
            .copied()
            .filter(|x| !self.elements.iter().any(|y| y != x && y & x == *x))
            .collect()
    }
}

fn large_proper_subtrees(tree: &PlanarTree) -> Vec<Bracket> {
    let n = tree.vertex_count();
    enumerate_subtrees(tree, 2)
        .into_iter()
        .filter(|s| s.len() < n)
        .map(Subtree::into_vertices)
        .collect()
}

pub fn enumerate_bracketings(tree: &PlanarTree) -> Result<BracketPoset, BracketError> {
    let subtrees = large_proper_subtrees(tree);
    let m = subtrees.len();
    if m > 128 {
        return Err(BracketError::TooManySubtrees(m));
    }
    let compatible: Vec<u128> = (0..m)
        .map(|i| {
            (0..m)
                .filter(|j| *j != i && nested(&subtrees[i], &subtrees[*j]))
                .fold(0u128, |acc, j| acc | 1 << j)
        })
        .collect();
    let mut elements = Vec::new();
    // cliques of the compatibility graph, each built from increasing indices
    fn grow(mask: u128, allowed: u128, from: usize, m: usize, compatible: &[u128], out: &mut Vec<u128>) {
        out.push(mask);
        for i in from..m {
            if allowed >> i & 1 == 1 {
                grow(mask | 1 << i, allowed & compatible[i], i + 1, m, compatible, out);
            }
        }
    }
    let all = if m == 128 { u128::MAX } else { (1u128 << m) - 1 };
    grow(0, all, 0, m, &compatible, &mut elements);
    let key = |x: &u128| {
        let bs: Vec<Vec<u32>> = (0..m).filter(|i| x >> i & 1 == 1).map(|i| ids(&subtrees[i])).collect();
        (bs.len(), bs)
    };
    elements.sort_by_cached_key(key);
    Ok(BracketPoset { subtrees, elements })
}

pub fn maximal_bracketings(tree: &PlanarTree) -> Result<Vec<Bracketing>, BracketError> {
    let p = enumerate_bracketings(tree)?;
    Ok(p.maximal().into_iter().map(|m| p.bracketing(m)).collect())
}

/// Chain counts of the order complex of `B(T)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NerveStatistics {
    /// `f_vector[r]` counts chains `B_0 ⊊ … ⊊ B_r`.
    pub f_vector: Vec<u128>,
    pub euler_characteristic: i128,
}

pub const DEFAULT_ENUMERATION_LIMIT: usize = 7;

pub fn nerve_statistics(tree: &PlanarTree, limit: usize) -> Result<NerveStatistics, BracketError> {
    let n = tree.vertex_count();
    if n > limit {
        return Err(BracketError::LimitExceeded { vertices: n, limit });
    }
    let p = enumerate_bracketings(tree)?;
    let els = &p.elements;
    // elements are sorted by size, so strict subsets come earlier
    let below: Vec<Vec<usize>> = (0..els.len())
        .map(|j| (0..j).filter(|i| els[*i] & els[j] == els[*i] && els[*i] != els[j]).collect())
        .collect();
    let mut counts: Vec<u128> = vec![1; els.len()];
    let mut f_vector = Vec::new();
    loop {
        let total: u128 = counts.iter().sum();
        if total == 0 {
            break;
        }
        f_vector.push(total);
        counts = (0..els.len()).map(|j| below[j].iter().map(|i| counts[*i]).sum()).collect();
    }
    let euler_characteristic = f_vector
        .iter()
        .enumerate()
        .map(|(r, f)| if r % 2 == 0 { *f as i128 } else { -(*f as i128) })
        .sum();
    Ok(NerveStatistics { f_vector, euler_characteristic })
}

/// A bracketing with weights in `(0,1]`. Weight-zero brackets are dropped
/// on construction, so equality is equality of normal forms.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeightedBracketing {
    weights: BTreeMap<Bracket, Q>,
}

impl WeightedBracketing {
    pub fn empty() -> WeightedBracketing {
        WeightedBracketing::default()
    }

    /// Normalizes and checks the weights; nesting is checked by
    /// [`WeightedBracketing::validate`].
    pub fn new(weights: BTreeMap<Bracket, Q>) -> Result<WeightedBracketing, BracketError> {
        let mut out = BTreeMap::new();
        for (b, w) in weights {
            if w < zero() || w > one() {
                return Err(BracketError::WeightOutOfRange(fmt_q(&w)));
            }
            if !w.is_zero() {
                out.insert(b, w);
            }
        }
        Ok(WeightedBracketing { weights: out })
    }

    pub fn with_unit_weights(b: &Bracketing) -> WeightedBracketing {
        WeightedBracketing {
            weights: b.brackets().iter().map(|s| (s.clone(), one())).collect(),
        }
    }

    pub fn validate(&self, tree: &PlanarTree) -> Result<(), BracketError> {
        self.bracketing().validate(tree)
    }

    pub fn bracketing(&self) -> Bracketing {
        Bracketing::from_set(self.weights.keys().cloned().collect())
    }

    pub fn weights(&self) -> &BTreeMap<Bracket, Q> {
        &self.weights
    }

    pub fn weight(&self, b: &Bracket) -> Option<&Q> {
        self.weights.get(b)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Inserts a bracket; on a collision the larger weight is kept.
    pub fn insert_max(&mut self, b: Bracket, w: Q) {
        if w.is_zero() {
            return;
        }
        match self.weights.get_mut(&b) {
            Some(old) if *old >= w => {}
            Some(old) => *old = w,
            None => {
                self.weights.insert(b, w);
            }
        }
    }

    pub fn remove(&mut self, b: &Bracket) -> Option<Q> {
        self.weights.remove(b)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.weights
                .iter()
                .map(|(b, w)| json!({"vertices": ids(b), "w": q_to_json(w)}))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<WeightedBracketing, BracketError> {
        let arr = v.as_array().ok_or_else(|| BracketError::Json("expected array".into()))?;
        let mut weights = BTreeMap::new();
        for item in arr {
            let verts = item
                .get("vertices")
                .ok_or_else(|| BracketError::Json("missing \"vertices\"".into()))?;
            let w = match item.get("w") {
                Some(w) => q_from_json(w).map_err(|e| BracketError::Json(e.to_string()))?,
                None => one(),
            };
            weights.insert(parse_vertex_list(verts)?, w);
        }
        WeightedBracketing::new(weights)
    }
}

/// A chain `B_0 ⊊ … ⊊ B_r` with coordinates `1 = t_0 ≥ … ≥ t_r ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketChain {
    pub levels: Vec<Bracketing>,
    pub coords: Vec<Q>,
}

impl BracketChain {
    pub fn new(levels: Vec<Bracketing>, coords: Vec<Q>) -> Result<BracketChain, BracketError> {
        let c = BracketChain { levels, coords };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), BracketError> {
        let bad = |s: &str| Err(BracketError::BadChain(s.into()));
        if self.levels.is_empty() || self.levels.len() != self.coords.len() {
            return bad("levels and coordinates must be nonempty and of equal length");
        }
        if !self.coords[0].is_one() {
            return bad("first coordinate must be 1");
        }
        for w in self.coords.windows(2) {
            if w[1] > w[0] {
                return bad("coordinates must be non-increasing");
            }
        }
        if self.coords.last().unwrap() < &zero() {
            return bad("coordinates must be nonnegative");
        }
        for w in self.levels.windows(2) {
            if !w[0].is_subset(&w[1]) || w[0] == w[1] {
                return bad("inclusions must be strict");
            }
        }
        Ok(())
    }

    /// Barycentric coefficients `s_l = t_l − t_{l+1}` with `t_{r+1} = 0`.
    pub fn barycentric(&self) -> Vec<Q> {
        (0..self.coords.len())
            .map(|l| {
                let next = self.coords.get(l + 1).cloned().unwrap_or_else(zero);
                &self.coords[l] - next
            })
            .collect()
    }
}

pub fn weights_to_chain(w: &WeightedBracketing) -> BracketChain {
    let mut values: Vec<Q> = w.weights.values().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    values.reverse();
    if values.first().map_or(true, |t| !t.is_one()) {
        values.insert(0, one());
    }
    let levels = values
        .iter()
        .map(|t| {
            Bracketing::from_set(
                w.weights
                    .iter()
                    .filter(|(_, x)| *x >= t)
                    .map(|(b, _)| b.clone())
                    .collect(),
            )
        })
        .collect();
    BracketChain { levels, coords: values }
}

pub fn chain_to_weights(c: &BracketChain) -> Result<WeightedBracketing, BracketError> {
    c.validate()?;
    let mut weights = BTreeMap::new();
    for (l, level) in c.levels.iter().enumerate() {
        for b in level.brackets() {
            weights.entry(b.clone()).or_insert_with(|| c.coords[l].clone());
        }
    }
    WeightedBracketing::new(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::trees::{caterpillar, star};

    fn set(v: &[u32]) -> Bracket {
        v.iter().map(|x| VertexId(*x)).collect()
    }

    #[test]
    fn corolla_and_two_vertex_trees_have_only_empty() {
        for n in 0..4 {
            let p = enumerate_bracketings(&PlanarTree::corolla(n)).unwrap();
            assert_eq!(p.bracketings(), vec![Bracketing::empty()]);
        }
        let p = enumerate_bracketings(&caterpillar(2, 1)).unwrap();
        assert_eq!(p.bracketings(), vec![Bracketing::empty()]);
    }

    #[test]
    fn three_caterpillar_is_an_interval() {
        let t = caterpillar(3, 1);
        let p = enumerate_bracketings(&t).unwrap();
        let got = p.bracketings();
        assert_eq!(got.len(), 3);
        assert_eq!(p.maximal().len(), 2);
        let s = nerve_statistics(&t, DEFAULT_ENUMERATION_LIMIT).unwrap();
        assert_eq!(s.f_vector, vec![3, 2]);
        assert_eq!(s.euler_characteristic, 1);
    }

    #[test]
    fn polygon_counts() {
        assert_eq!(maximal_bracketings(&caterpillar(4, 1)).unwrap().len(), 5);
        assert_eq!(maximal_bracketings(&star(3, 1)).unwrap().len(), 6);
        assert_eq!(maximal_bracketings(&caterpillar(5, 1)).unwrap().len(), 14);
    }

    #[test]
    fn limit_is_enforced() {
        assert!(matches!(
            nerve_statistics(&caterpillar(8, 1), 7),
            Err(BracketError::LimitExceeded { .. })
        ));
    }

    #[test]
    fn chain_conversion_examples() {
        let c = weights_to_chain(&WeightedBracketing::empty());
        assert_eq!(c.levels, vec![Bracketing::empty()]);
        assert_eq!(c.coords, vec![one()]);

        let (s1, s2) = (set(&[0, 1]), set(&[0, 1, 2]));
        let w = WeightedBracketing::new([(s1.clone(), one()), (s2.clone(), q(1, 2))].into()).unwrap();
        let c = weights_to_chain(&w);
        assert_eq!(c.coords, vec![one(), q(1, 2)]);
        assert_eq!(c.levels[0].brackets(), &BTreeSet::from([s1.clone()]));
        assert_eq!(c.levels[1].len(), 2);
        assert_eq!(chain_to_weights(&c).unwrap(), w);

        let both = WeightedBracketing::new([(s1.clone(), one()), (s2.clone(), one())].into()).unwrap();
        assert_eq!(weights_to_chain(&both).levels.len(), 1);

        let single = Bracketing::from_set([s1.clone()].into());
        let drop = BracketChain::new(vec![Bracketing::empty(), single.clone()], vec![one(), zero()]).unwrap();
        assert!(chain_to_weights(&drop).unwrap().is_empty());
        let keep = BracketChain::new(vec![Bracketing::empty(), single], vec![one(), one()]).unwrap();
        assert_eq!(chain_to_weights(&keep).unwrap().weight(&s1), Some(&one()));
    }

    #[test]
    fn padding_when_no_unit_weight() {
        let w = WeightedBracketing::new([(set(&[0, 1]), q(2, 3))].into()).unwrap();
        let c = weights_to_chain(&w);
        assert_eq!(c.coords, vec![one(), q(2, 3)]);
        assert!(c.levels[0].is_empty());
        assert_eq!(c.barycentric(), vec![q(1, 3), q(2, 3)]);
    }

    #[test]
    fn validation_errors() {
        let t = caterpillar(3, 1);
        assert!(matches!(
            Bracketing::new(&t, [set(&[0, 1]), set(&[1, 2])].into()),
            Err(BracketError::NotNested(..))
        ));
        assert!(matches!(Bracketing::new(&t, [set(&[0, 1, 2])].into()), Err(BracketError::NotProper(_))));
        assert!(matches!(Bracketing::new(&t, [set(&[1])].into()), Err(BracketError::NotLarge(_))));
        assert!(WeightedBracketing::new([(set(&[0, 1]), q(3, 2))].into()).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let w = WeightedBracketing::new([(set(&[0, 1]), q(1, 3))].into()).unwrap();
        assert_eq!(WeightedBracketing::from_json(&w.to_json()).unwrap(), w);
        let b = w.bracketing();
        assert_eq!(Bracketing::from_json(&b.to_json()).unwrap(), b);
    }
}
