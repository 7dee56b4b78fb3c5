//! Normalized cacti `F(k)`, cactus maps, the operad `MS⁺ = F × Mon⁺(I,∂I)`
//! and the (non-associative) composition of `cact¹`.
//!
//! A cactus with `k` lobes is a partition of the circle `[0,1]/∂` into
//! consecutive arcs labelled by lobes `0..k`, each lobe of total length
//! `1/k`, with no two lobes interleaved. Arcs never wrap: the circle is cut
//! at 0. Lobes are 0-based in the API and 1-based in JSON.

use crate::operad::{OperadError, StrictOperad};
use crate::plmaps::{MonotoneReparam, PLMap, PlError};
use crate::rational::{fmt_q, one, q, q_from_json, q_to_json, qi, zero, Q};
use crate::trees::is_permutation;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CactusError {
    #[error("a cactus needs at least one lobe")]
    NoLobes,
    #[error("arcs must be consecutive, nondegenerate and cover [0,1]")]
    Coverage,
    #[error("lobe {0} out of range")]
    LabelOutOfRange(usize),
    #[error("lobe {lobe} has length {length}, expected 1/{k}")]
    Length { lobe: usize, length: String, k: usize },
    #[error("lobes {0} and {1} interleave")]
    Interleaved(usize, usize),
    #[error("maps are not cactus maps: {0}")]
    NotCactusMaps(String),
    #[error("lobe counts differ: {0} and {1}")]
    ArityMismatch(usize, usize),
    #[error("slot {slot} out of range for {k} lobes")]
    SlotOutOfRange { slot: usize, k: usize },
    #[error("scaling weights must be positive and one per lobe")]
    BadWeights,
    #[error(transparent)]
    Map(#[from] PlError),
    #[error(transparent)]
    Operad(#[from] OperadError),
    #[error("malformed cactus json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Arc {
    pub start: Q,
    pub end: Q,
    pub lobe: usize,
}

impl Arc {
    pub fn len(&self) -> Q {
        &self.end - &self.start
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cactus {
    k: usize,
    arcs: Vec<Arc>,
}

impl Cactus {
    /// Validates and canonicalizes (merging adjacent arcs of one lobe).
    pub fn new(k: usize, arcs: Vec<Arc>) -> Result<Cactus, CactusError> {
        if k == 0 {
            return Err(CactusError::NoLobes);
        }
        if arcs.is_empty() || !arcs[0].start.is_zero() || !arcs.last().unwrap().end.is_one() {
            return Err(CactusError::Coverage);
        }
        for w in arcs.windows(2) {
            if w[0].end != w[1].start {
                return Err(CactusError::Coverage);
            }
        }
        if arcs.iter().any(|a| a.start >= a.end) {
            return Err(CactusError::Coverage);
        }
        if let Some(a) = arcs.iter().find(|a| a.lobe >= k) {
            return Err(CactusError::LabelOutOfRange(a.lobe));
        }
        let c = Cactus { k, arcs: merge(arcs) };
        let target = one() / qi(k as i64);
        for lobe in 0..k {
            let length = c.lobe_length(lobe);
            if length != target {
                return Err(CactusError::Length { lobe, length: fmt_q(&length), k });
            }
        }
        c.check_interleaving()?;
        Ok(c)
    }

    /// Builds from `(start, end, lobe)` triples.
    pub fn from_triples(k: usize, arcs: &[(Q, Q, usize)]) -> Result<Cactus, CactusError> {
        Cactus::new(
            k,
            arcs.iter().map(|(s, e, l)| Arc { start: s.clone(), end: e.clone(), lobe: *l }).collect(),
        )
    }

    /// The cactus with one lobe.
    pub fn unit() -> Cactus {
        Cactus { k: 1, arcs: vec![Arc { start: zero(), end: one(), lobe: 0 }] }
    }

    /// `k` consecutive arcs of length `1/k`, labelled in order.
    pub fn linear(k: usize) -> Cactus {
        let step = one() / qi(k as i64);
        Cactus {
            k,
            arcs: (0..k)
                .map(|j| Arc { start: &step * qi(j as i64), end: &step * qi(j as i64 + 1), lobe: j })
                .collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn lobe_arcs(&self, lobe: usize) -> impl Iterator<Item = &Arc> {
        self.arcs.iter().filter(move |a| a.lobe == lobe)
    }

    fn lobe_length(&self, lobe: usize) -> Q {
        self.lobe_arcs(lobe).map(Arc::len).sum()
    }

    fn check_interleaving(&self) -> Result<(), CactusError> {
        let word: Vec<usize> = self.arcs.iter().map(|a| a.lobe).collect();
        for i in 0..self.k {
            for j in i + 1..self.k {
                let mut seq: Vec<usize> = Vec::new();
                for &l in word.iter().filter(|l| **l == i || **l == j) {
                    if seq.last() != Some(&l) {
                        seq.push(l);
                    }
                }
                if seq.len() > 1 && seq.first() == seq.last() {
                    seq.pop();
                }
                if seq.len() >= 4 {
                    return Err(CactusError::Interleaved(i, j));
                }
            }
        }
        Ok(())
    }

    /// The cactus maps `c^j(t) = k·ℓ(I_j ∩ [0,t])`, one per lobe.
    pub fn cactus_maps(&self) -> Vec<PLMap> {
        let k = qi(self.k as i64);
        (0..self.k)
            .map(|j| {
                let mut xs = vec![zero()];
                let mut ys = vec![zero()];
                let mut acc = zero();
                for a in &self.arcs {
                    if a.lobe == j {
                        acc += a.len() * &k;
                    }
                    xs.push(a.end.clone());
                    ys.push(acc.clone());
                }
                PLMap::new(xs, ys).expect("cactus maps are monotone")
            })
            .collect()
    }

    /// Position along lobe `j` of the circle point `t`: `c^j(t)`.
    pub fn lobe_coordinate(&self, j: usize, t: &Q) -> Q {
        let k = qi(self.k as i64);
        self.lobe_arcs(j)
            .map(|a| {
                if t <= &a.start {
                    zero()
                } else if t >= &a.end {
                    a.len()
                } else {
                    t - &a.start
                }
            })
            .sum::<Q>()
            * k
    }

    /// Relabels lobes: lobe `p` becomes lobe `perm[p]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Cactus, CactusError> {
        if !is_permutation(perm, self.k) {
            return Err(OperadError::BadPermutation { expected: self.k, found: perm.len() }.into());
        }
        Ok(Cactus {
            k: self.k,
            arcs: self.arcs.iter().map(|a| Arc { lobe: perm[a.lobe], ..a.clone() }).collect(),
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "arcs": self.arcs.iter().map(|a| json!([q_to_json(&a.start), q_to_json(&a.end), a.lobe + 1])).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Cactus, CactusError> {
        let bad = |s: &str| CactusError::Json(s.to_string());
        let k = v.get("k").and_then(Value::as_u64).ok_or_else(|| bad("missing k"))? as usize;
        let arcs = v
            .get("arcs")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing arcs"))?
            .iter()
            .map(|a| {
                let t = a.as_array().filter(|t| t.len() == 3).ok_or_else(|| bad("arc must be [a,b,label]"))?;
                let start = q_from_json(&t[0]).map_err(|e| bad(&e.to_string()))?;
                let end = q_from_json(&t[1]).map_err(|e| bad(&e.to_string()))?;
                let label = t[2].as_u64().filter(|l| *l >= 1).ok_or_else(|| bad("labels start at 1"))?;
                Ok(Arc { start, end, lobe: label as usize - 1 })
            })
            .collect::<Result<Vec<_>, CactusError>>()?;
        Cactus::new(k, arcs)
    }
}

impl fmt::Display for Cactus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, a) in self.arcs.iter().enumerate() {
            if n > 0 {
                write!(f, " ")?;
            }
            write!(f, "[{},{}]:{}", fmt_q(&a.start), fmt_q(&a.end), a.lobe + 1)?;
        }
        Ok(())
    }
}

fn merge(arcs: Vec<Arc>) -> Vec<Arc> {
    let mut out: Vec<Arc> = Vec::with_capacity(arcs.len());
    for a in arcs {
        match out.last_mut() {
            Some(last) if last.lobe == a.lobe && last.end == a.start => last.end = a.end,
            _ => out.push(a),
        }
    }
    out
}

/// Recovers a cactus from its cactus maps: lobe `j` is where `c^j` has
/// slope `k`.
pub fn cactus_from_maps(maps: &[PLMap]) -> Result<Cactus, CactusError> {
    let k = maps.len();
    if k == 0 {
        return Err(CactusError::NoLobes);
    }
    let kq = qi(k as i64);
    for (j, m) in maps.iter().enumerate() {
        if let Some(s) = m.slopes().into_iter().find(|s| !s.is_zero() && *s != kq) {
            return Err(CactusError::NotCactusMaps(format!("map {} has slope {}", j + 1, fmt_q(&s))));
        }
    }
    let cuts: BTreeSet<Q> = maps.iter().flat_map(|m| m.breakpoints().iter().cloned()).collect();
    let cuts: Vec<Q> = cuts.into_iter().collect();
    let mut arcs = Vec::new();
    for w in cuts.windows(2) {
        let mid = (&w[0] + &w[1]) / qi(2);
        let rising: Vec<usize> = (0..k)
            .filter(|j| {
                let m = &maps[*j];
                let h = (&w[1] - &w[0]) / qi(4);
                m.eval(&(&mid + &h)) > m.eval(&(&mid - &h))
            })
            .collect();
        match rising.as_slice() {
            [j] => arcs.push(Arc { start: w[0].clone(), end: w[1].clone(), lobe: *j }),
            _ => {
                return Err(CactusError::NotCactusMaps(format!(
                    "{} maps rise on [{},{}]",
                    rising.len(),
                    fmt_q(&w[0]),
                    fmt_q(&w[1])
                )))
            }
        }
    }
    Cactus::new(k, arcs)
}

/// `d(x,y) = 1 − Σ_j ℓ(I_j(x) ∩ I_j(y))`.
pub fn cactus_metric(x: &Cactus, y: &Cactus) -> Result<Q, CactusError> {
    if x.k != y.k {
        return Err(CactusError::ArityMismatch(x.k, y.k));
    }
    let mut overlap = zero();
    for a in &x.arcs {
        for b in y.arcs.iter().filter(|b| b.lobe == a.lobe) {
            let lo = if a.start > b.start { &a.start } else { &b.start };
            let hi = if a.end < b.end { &a.end } else { &b.end };
            if lo < hi {
                overlap += hi - lo;
            }
        }
    }
    Ok(one() - overlap)
}

/// `g(x; m_1,…,m_k)`: rescales `I_j(x)` by `k·m_j / Σm`.
pub fn scaling_map(x: &Cactus, m: &[usize]) -> Result<MonotoneReparam, CactusError> {
    if m.len() != x.k || m.iter().any(|v| *v == 0) {
        return Err(CactusError::BadWeights);
    }
    // lobe j is stretched by the factor k·m_j/M
    let total = m.iter().sum::<usize>() as i64;
    let slope: Vec<Q> = m.iter().map(|mj| q(x.k as i64 * *mj as i64, total)).collect();
    let mut xs = vec![zero()];
    let mut ys = vec![zero()];
    let mut acc = zero();
    for (n, a) in x.arcs.iter().enumerate() {
        acc += a.len() * &slope[a.lobe];
        // a breakpoint only where the slope changes
        if x.arcs.get(n + 1).is_none_or(|b| slope[b.lobe] != slope[a.lobe]) {
            xs.push(a.end.clone());
            ys.push(acc.clone());
        }
    }
    Ok(MonotoneReparam::from_canonical_points(xs, ys))
}

/// Simultaneous composition in `cact¹`: lobe `j` of `x` is rescaled to
/// `m_j/M` of the circle and subdivided according to `ys[j]`; the lobes of
/// `ys[j]` are numbered after those of `ys[0..j]`.
pub fn gamma_cact1(x: &Cactus, ys: &[Cactus]) -> Result<Cactus, CactusError> {
    if ys.len() != x.k {
        return Err(CactusError::ArityMismatch(x.k, ys.len()));
    }
    let ms: Vec<usize> = ys.iter().map(Cactus::k).collect();
    let total_lobes: usize = ms.iter().sum();
    let total = qi(total_lobes as i64);
    let offsets: Vec<usize> = ms.iter().scan(0, |acc, m| {
        let o = *acc;
        *acc += m;
        Some(o)
    }).collect();
    let k = qi(x.k as i64);
    let mut travelled = vec![zero(); x.k];
    let mut pos = zero();
    let mut arcs = Vec::new();
    for a in &x.arcs {
        let j = a.lobe;
        let scale = qi(ms[j] as i64) / &total;
        let u0 = travelled[j].clone();
        let u1 = &u0 + a.len() * &k;
        for b in &ys[j].arcs {
            let lo = if b.start > u0 { &b.start } else { &u0 };
            let hi = if b.end < u1 { &b.end } else { &u1 };
            if lo < hi {
                arcs.push(Arc {
                    start: &pos + (lo - &u0) * &scale,
                    end: &pos + (hi - &u0) * &scale,
                    lobe: offsets[j] + b.lobe,
                });
            }
        }
        pos += (&u1 - &u0) * &scale;
        travelled[j] = u1;
    }
    Cactus::new(total_lobes, arcs)
}

/// `x ∘_i y` in `cact¹`.
pub fn cact1_compose(x: &Cactus, i: usize, y: &Cactus) -> Result<Cactus, CactusError> {
    if i >= x.k {
        return Err(CactusError::SlotOutOfRange { slot: i, k: x.k });
    }
    let ys: Vec<Cactus> = (0..x.k).map(|j| if j == i { y.clone() } else { Cactus::unit() }).collect();
    gamma_cact1(x, &ys)
}

/// A point `(x, f)` of `MS⁺(k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MSElement {
    pub cactus: Cactus,
    pub reparam: MonotoneReparam,
}

impl MSElement {
    pub fn new(cactus: Cactus, reparam: MonotoneReparam) -> MSElement {
        MSElement { cactus, reparam }
    }

    pub fn plain(cactus: Cactus) -> MSElement {
        MSElement { cactus, reparam: MonotoneReparam::identity() }
    }

    pub fn unit() -> MSElement {
        MSElement::plain(Cactus::unit())
    }

    pub fn k(&self) -> usize {
        self.cactus.k
    }

    /// Forgets the reparametrization.
    pub fn renormalize(&self) -> Cactus {
        self.cactus.clone()
    }

    /// The embedding into `CoEnd(S¹)`: components `c^j_x ∘ f`.
    pub fn phi(&self) -> CoEndElement {
        CoEndElement(self.cactus.cactus_maps().iter().map(|c| c.compose(self.reparam.map())).collect())
    }

    pub fn to_json(&self) -> Value {
        json!({"cactus": self.cactus.to_json(), "reparam": self.reparam.map().to_json()})
    }

    pub fn from_json(v: &Value) -> Result<MSElement, CactusError> {
        let cactus = Cactus::from_json(v.get("cactus").ok_or_else(|| CactusError::Json("missing cactus".into()))?)?;
        let reparam = match v.get("reparam") {
            Some(r) => MonotoneReparam::new(PLMap::from_json(r)?)?,
            None => MonotoneReparam::identity(),
        };
        Ok(MSElement { cactus, reparam })
    }
}

struct Absorbed {
    cactus: Cactus,
    /// The arcs of `x̃`, one for each arc of `x`.
    arcs: Vec<Arc>,
    /// For each arc of lobe `i`: its entry point `p` in lobe coordinates and `g(p)`.
    entry: Vec<Option<(Q, Q)>>,
}

/// First step of `•_i`: lobe `i` of `x` absorbs `g`.
fn absorb(x: &Cactus, i: usize, g: &MonotoneReparam) -> Result<Absorbed, CactusError> {
    if i >= x.k {
        return Err(CactusError::SlotOutOfRange { slot: i, k: x.k });
    }
    let k = qi(x.k as i64);
    // each arc J of lobe i with c^i(J) = [p, q] gets length (g(q) − g(p))/k
    let mut new_arcs = Vec::with_capacity(x.arcs.len());
    let mut entry: Vec<Option<(Q, Q)>> = Vec::with_capacity(x.arcs.len());
    let mut pos = zero();
    let mut travelled = zero();
    let mut g_travelled = zero();
    for arc in &x.arcs {
        let len = if arc.lobe == i {
            let (p, gp) = (travelled.clone(), g_travelled.clone());
            travelled += arc.len() * &k;
            g_travelled = g.eval(&travelled);
            let len = (&g_travelled - &gp) / &k;
            entry.push(Some((p, gp)));
            len
        } else {
            entry.push(None);
            arc.len()
        };
        new_arcs.push(Arc { start: pos.clone(), end: &pos + &len, lobe: arc.lobe });
        pos += len;
    }
    Ok(Absorbed { cactus: Cactus::new(x.k, new_arcs.clone())?, arcs: new_arcs, entry })
}

/// The cactus component of `(x, f) •_i (y, g)`, which does not depend on `f`.
pub fn ms_compose_cactus(x: &Cactus, i: usize, b: &MSElement) -> Result<Cactus, CactusError> {
    cact1_compose(&absorb(x, i, &b.reparam)?.cactus, i, &b.cactus)
}

/// `(x, f) •_i (y, g)`, built in two steps: first `g` is absorbed into lobe
/// `i` of `x`, producing `(x̃, g̃)`; then `y` is inserted and the
/// rescaling of lobe `i` is recorded in the reparametrization.
pub fn ms_compose(a: &MSElement, i: usize, b: &MSElement) -> Result<MSElement, CactusError> {
    let x = &a.cactus;
    let g = &b.reparam;
    let k = qi(x.k as i64);
    let Absorbed { cactus: x_tilde, arcs: new_arcs, entry } = absorb(x, i, g)?;

    // g̃ on the breakpoints: arc endpoints and preimages of g's breakpoints
    let mut ts: BTreeSet<Q> = x.arcs.iter().flat_map(|a| [a.start.clone(), a.end.clone()]).collect();
    for (arc, e) in x.arcs.iter().zip(&entry) {
        if let Some((p, _)) = e {
            let q_end = p + arc.len() * &k;
            for u in g.map().breakpoints() {
                if p < u && u < &q_end {
                    ts.insert(&arc.start + (u - p) / &k);
                }
            }
        }
    }
    let xs: Vec<Q> = ts.into_iter().collect();
    let mut n = 0;
    let ys: Vec<Q> = xs
        .iter()
        .map(|t| {
            while t > &x.arcs[n].end {
                n += 1;
            }
            let (old, new) = (&x.arcs[n], &new_arcs[n]);
            match &entry[n] {
                Some((p, gp)) => {
                    let here = p + (t - &old.start) * &k;
                    &new.start + (g.eval(&here) - gp) / &k
                }
                None => &new.start + (t - &old.start),
            }
        })
        .collect();
    let g_tilde = MonotoneReparam::from_points(xs, ys)?;

    let z = cact1_compose(&x_tilde, i, &b.cactus)?;
    let mut weights = vec![1; x.k];
    weights[i] = b.cactus.k;
    let h = scaling_map(&x_tilde, &weights)?;
    let reparam = h.compose(&g_tilde).compose(&a.reparam);
    Ok(MSElement { cactus: z, reparam })
}

/// `γ_{MS⁺}(a; b_1,…,b_k)` by composing from the last slot down.
pub fn gamma_ms(a: &MSElement, bs: &[MSElement]) -> Result<MSElement, CactusError> {
    if bs.len() != a.k() {
        return Err(CactusError::ArityMismatch(a.k(), bs.len()));
    }
    let mut out = a.clone();
    for (i, b) in bs.iter().enumerate().rev() {
        out = ms_compose(&out, i, b)?;
    }
    Ok(out)
}

/// Checks `γ_{MS⁺}((x, g(x;m)⁻¹); (y_j, id)) = (γ_{cact¹}(x; y), id)` where
/// `m_j` is the lobe count of `y_j`.
pub fn rescaling_identity_check(x: &Cactus, ys: &[Cactus]) -> Result<bool, CactusError> {
    let m: Vec<usize> = ys.iter().map(Cactus::k).collect();
    let start = MSElement::new(x.clone(), scaling_map(x, &m)?.inverse());
    let plain: Vec<MSElement> = ys.iter().cloned().map(MSElement::plain).collect();
    let lhs = gamma_ms(&start, &plain)?;
    Ok(lhs.reparam.is_identity() && lhs.cactus == gamma_cact1(x, ys)?)
}

/// A tuple of maps `S¹ → S¹`, a point of the coendomorphism operad.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoEndElement(pub Vec<PLMap>);

impl CoEndElement {
    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// `(F_1,…,F_{i−1}, G_1∘F_i,…, G_m∘F_i, F_{i+1},…)`.
    pub fn compose(&self, i: usize, other: &CoEndElement) -> CoEndElement {
        let mut out = self.0[..i].to_vec();
        out.extend(other.0.iter().map(|g| g.compose(&self.0[i])));
        out.extend_from_slice(&self.0[i + 1..]);
        CoEndElement(out)
    }

    /// Values of all components at `t`.
    pub fn eval(&self, t: &Q) -> Vec<Q> {
        self.0.iter().map(|m| m.eval(t)).collect()
    }

    /// The inverse of `φ` on its image: the reparametrization is the
    /// average of the components.
    pub fn to_ms(&self) -> Result<MSElement, CactusError> {
        let f = crate::plmaps::average_of_steps(&self.0)?;
        let f = MonotoneReparam::new(f)?;
        let finv = f.inverse();
        let maps: Vec<PLMap> = self.0.iter().map(|c| c.compose(finv.map())).collect();
        Ok(MSElement { cactus: cactus_from_maps(&maps)?, reparam: f })
    }
}

/// `MS⁺` as a strict operad.
#[derive(Debug, Clone, Copy, Default)]
pub struct MsOperad;

impl StrictOperad for MsOperad {
    type Element = MSElement;
    type Error = CactusError;

    fn arity(&self, x: &MSElement) -> usize {
        x.k()
    }

    fn unit(&self) -> MSElement {
        MSElement::unit()
    }

    fn compose(&self, a: &MSElement, i: usize, b: &MSElement) -> Result<MSElement, CactusError> {
        ms_compose(a, i, b)
    }

    fn relabel(&self, x: &MSElement, perm: &[usize]) -> Result<MSElement, CactusError> {
        Ok(MSElement { cactus: x.cactus.relabel(perm)?, reparam: x.reparam.clone() })
    }
}

/// The recorded pair of bracketings of `x ∘_1 a ∘_1 a` that disagree.
pub struct NonAssociativityWitness {
    pub x: Cactus,
    pub a: Cactus,
    pub left: Cactus,
    pub right: Cactus,
    pub distance: Q,
}

/// `x = ([0,1/4]∪[3/4,1], [1/4,3/4])`, `a` the halves cactus; compares
/// `(x∘_1a)∘_1a` with `x∘_1(a∘_1a)`.
pub fn non_associativity_witness() -> NonAssociativityWitness {
    let q = crate::rational::q;
    let x = Cactus::from_triples(2, &[(zero(), q(1, 4), 0), (q(1, 4), q(3, 4), 1), (q(3, 4), one(), 0)])
        .expect("valid witness");
    let a = Cactus::linear(2);
    let left = cact1_compose(&cact1_compose(&x, 0, &a).unwrap(), 0, &a).unwrap();
    let right = cact1_compose(&x, 0, &cact1_compose(&a, 0, &a).unwrap()).unwrap();
    let distance = cactus_metric(&left, &right).unwrap();
    NonAssociativityWitness { x, a, left, right, distance }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn cactus(k: usize, arcs: &[((i64, i64), (i64, i64), usize)]) -> Cactus {
        Cactus::from_triples(k, &arcs.iter().map(|(s, e, l)| (q(s.0, s.1), q(e.0, e.1), *l)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn validation() {
        assert_eq!(Cactus::from_triples(1, &[(zero(), one(), 0)]).unwrap(), Cactus::unit());
        let inter = Cactus::from_triples(
            2,
            &[(zero(), q(1, 4), 0), (q(1, 4), q(1, 2), 1), (q(1, 2), q(3, 4), 0), (q(3, 4), one(), 1)],
        );
        assert_eq!(inter, Err(CactusError::Interleaved(0, 1)));
        assert!(Cactus::from_triples(2, &[(zero(), q(1, 4), 0), (q(1, 4), q(3, 4), 1), (q(3, 4), one(), 0)]).is_ok());
        assert!(matches!(
            Cactus::from_triples(2, &[(zero(), q(1, 3), 0), (q(1, 3), one(), 1)]),
            Err(CactusError::Length { .. })
        ));
        assert_eq!(
            Cactus::from_triples(2, &[(zero(), q(1, 2), 0), (q(2, 3), one(), 1)]),
            Err(CactusError::Coverage)
        );
    }

    #[test]
    fn halves_maps() {
        let maps = Cactus::linear(2).cactus_maps();
        assert_eq!(maps[0].slopes(), vec![qi(2), qi(0)]);
        assert_eq!(maps[1].slopes(), vec![qi(0), qi(2)]);
        assert_eq!(Cactus::unit().cactus_maps(), vec![PLMap::identity()]);
        assert_eq!(cactus_from_maps(&maps).unwrap(), Cactus::linear(2));
    }

    #[test]
    fn rejects_wrong_slopes() {
        let bad = PLMap::new(vec![zero(), q(1, 3), one()], vec![zero(), one(), one()]).unwrap();
        assert!(matches!(cactus_from_maps(&[bad, PLMap::identity()]), Err(CactusError::NotCactusMaps(_))));
    }

    #[test]
    fn metric_examples() {
        let h = Cactus::linear(2);
        assert_eq!(cactus_metric(&h, &h).unwrap(), zero());
        assert_eq!(cactus_metric(&h, &h.relabel(&[1, 0]).unwrap()).unwrap(), one());
        assert!(cactus_metric(&h, &Cactus::unit()).is_err());
    }

    #[test]
    fn scaling_examples() {
        let h = Cactus::linear(2);
        assert!(scaling_map(&h, &[1, 1]).unwrap().is_identity());
        let g = scaling_map(&h, &[3, 1]).unwrap();
        assert_eq!(g.map().slopes(), vec![q(3, 2), q(1, 2)]);
        assert_eq!(g.eval(&q(1, 2)), q(3, 4));
        assert_eq!(scaling_map(&h, &[0, 1]), Err(CactusError::BadWeights));
    }

    #[test]
    fn halves_compose_to_thirds() {
        let h = Cactus::linear(2);
        assert_eq!(cact1_compose(&h, 0, &h).unwrap(), Cactus::linear(3));
        let r = ms_compose(&MSElement::plain(h.clone()), 0, &MSElement::plain(h.clone())).unwrap();
        assert_eq!(r.cactus, Cactus::linear(3));
        assert_eq!(r.reparam.eval(&q(1, 2)), q(2, 3));
        assert_eq!(r.reparam.map().breakpoints().len(), 3);
    }

    #[test]
    fn witness_distance() {
        let w = non_associativity_witness();
        let left = cactus(4, &[((0, 1), (1, 4), 0), ((1, 4), (1, 2), 1), ((1, 2), (3, 4), 3), ((3, 4), (1, 1), 2)]);
        let right = cactus(
            4,
            &[((0, 1), (1, 4), 0), ((1, 4), (3, 8), 1), ((3, 8), (5, 8), 3), ((5, 8), (3, 4), 1), ((3, 4), (1, 1), 2)],
        );
        assert_eq!(w.left, left);
        assert_eq!(w.right, right);
        assert_eq!(w.distance, q(1, 4));
    }

    #[test]
    fn units() {
        let x = cactus(2, &[((0, 1), (1, 4), 0), ((1, 4), (3, 4), 1), ((3, 4), (1, 1), 0)]);
        let a = MSElement::new(x.clone(), scaling_map(&x, &[2, 1]).unwrap());
        assert_eq!(ms_compose(&MSElement::unit(), 0, &a).unwrap(), a);
        assert_eq!(ms_compose(&a, 1, &MSElement::unit()).unwrap(), a);
        assert_eq!(cact1_compose(&x, 1, &Cactus::unit()).unwrap(), x);
    }

    #[test]
    fn rescaling_small() {
        let x = cactus(2, &[((0, 1), (1, 4), 0), ((1, 4), (3, 4), 1), ((3, 4), (1, 1), 0)]);
        assert!(rescaling_identity_check(&x, &[Cactus::linear(2), Cactus::linear(3)]).unwrap());
        assert!(rescaling_identity_check(&x, &[Cactus::unit(), Cactus::unit()]).unwrap());
    }

    #[test]
    fn coend_roundtrip() {
        let x = cactus(2, &[((0, 1), (1, 4), 0), ((1, 4), (3, 4), 1), ((3, 4), (1, 1), 0)]);
        let a = MSElement::new(x.clone(), scaling_map(&x, &[2, 1]).unwrap());
        assert_eq!(a.phi().to_ms().unwrap(), a);
        let b = MSElement::plain(Cactus::linear(3));
        let direct = ms_compose(&a, 0, &b).unwrap();
        assert_eq!(a.phi().compose(0, &b.phi()), direct.phi());
    }

    #[test]
    fn json_roundtrip() {
        let x = cactus(2, &[((0, 1), (1, 4), 0), ((1, 4), (3, 4), 1), ((3, 4), (1, 1), 0)]);
        assert_eq!(Cactus::from_json(&x.to_json()).unwrap(), x);
        let m = MSElement::new(x.clone(), scaling_map(&x, &[1, 2]).unwrap());
        assert_eq!(MSElement::from_json(&m.to_json()).unwrap(), m);
    }
}
