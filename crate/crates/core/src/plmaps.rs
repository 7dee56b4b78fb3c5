//! Exact piecewise-linear maps `[0,1] → [0,1]`.
//!
//! A [`PLMap`] is stored as its breakpoints and values, always in canonical
//! form (no interior breakpoint between collinear segments), so structural
//! equality is equality of functions. [`MonotoneReparam`] is the subspace of
//! strictly increasing maps fixing both endpoints.

use crate::rational::{one, q_from_json, q_to_json, qi, zero, Q};
use num_traits::{One, Zero};
use serde_json::{json, Value};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlError {
    #[error("breakpoints must be strictly increasing from 0 to 1")]
    BadBreakpoints,
    #[error("{0} breakpoints but {1} values")]
    LengthMismatch(usize, usize),
    #[error("values must be weakly increasing within [0,1]")]
    NotMonotone,
    #[error("map is not a strictly increasing self-map fixing 0 and 1")]
    NotStrictlyMonotone,
    #[error("coefficients must be nonnegative, sum to 1, and match the maps")]
    BadCoefficients,
    #[error("malformed map json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PLMap {
    xs: Vec<Q>,
    ys: Vec<Q>,
}

impl PLMap {
    pub fn new(xs: Vec<Q>, ys: Vec<Q>) -> Result<PLMap, PlError> {
        if xs.len() != ys.len() {
            return Err(PlError::LengthMismatch(xs.len(), ys.len()));
        }
        if xs.len() < 2 || !xs[0].is_zero() || !xs.last().unwrap().is_one() || xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PlError::BadBreakpoints);
        }
        if ys.windows(2).any(|w| w[0] > w[1]) || ys[0] < zero() || *ys.last().unwrap() > one() {
            return Err(PlError::NotMonotone);
        }
        Ok(PLMap::canonical(xs, ys))
    }

    fn canonical(xs: Vec<Q>, ys: Vec<Q>) -> PLMap {
        let mut cx = vec![xs[0].clone()];
        let mut cy = vec![ys[0].clone()];
        for i in 1..xs.len() {
            cx.push(xs[i].clone());
            cy.push(ys[i].clone());
            let n = cx.len();
            if n >= 3 {
                let s1 = (&cy[n - 2] - &cy[n - 3]) * (&cx[n - 1] - &cx[n - 2]);
                let s2 = (&cy[n - 1] - &cy[n - 2]) * (&cx[n - 2] - &cx[n - 3]);
                if s1 == s2 {
                    cx.remove(n - 2);
                    cy.remove(n - 2);
                }
            }
        }
        PLMap { xs: cx, ys: cy }
    }

    pub fn identity() -> PLMap {
        PLMap { xs: vec![zero(), one()], ys: vec![zero(), one()] }
    }

    pub fn breakpoints(&self) -> &[Q] {
        &self.xs
    }

    pub fn values(&self) -> &[Q] {
        &self.ys
    }

    pub fn segments(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn slopes(&self) -> Vec<Q> {
        (0..self.segments())
            .map(|i| (&self.ys[i + 1] - &self.ys[i]) / (&self.xs[i + 1] - &self.xs[i]))
            .collect()
    }

    /// Value at `t ∈ [0,1]`.
    pub fn eval(&self, t: &Q) -> Q {
        let i = match self.xs.binary_search(t) {
            Ok(i) => return self.ys[i].clone(),
            Err(i) => i.clamp(1, self.xs.len() - 1),
        };
        let (x0, x1) = (&self.xs[i - 1], &self.xs[i]);
        let (y0, y1) = (&self.ys[i - 1], &self.ys[i]);
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }

    /// All `t` with `self(t) = y` lying on a non-constant segment.
    fn preimages(&self, y: &Q) -> Vec<Q> {
        let mut out = Vec::new();
        for i in 0..self.segments() {
            let (y0, y1) = (&self.ys[i], &self.ys[i + 1]);
            if y0 < y1 && y0 <= y && y <= y1 {
                let (x0, x1) = (&self.xs[i], &self.xs[i + 1]);
                out.push(x0 + (x1 - x0) * (y - y0) / (y1 - y0));
            }
        }
        out
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PLMap) -> PLMap {
        let mut ts: BTreeSet<Q> = inner.xs.iter().cloned().collect();
        for x in &self.xs {
            ts.extend(inner.preimages(x));
        }
        let xs: Vec<Q> = ts.into_iter().collect();
        let ys = xs.iter().map(|t| self.eval(&inner.eval(t))).collect();
        PLMap::canonical(xs, ys)
    }

    /// `Σ c_l f_l` on the merged breakpoint set.
    pub fn combination(coeffs: &[Q], maps: &[PLMap]) -> Result<PLMap, PlError> {
        if coeffs.len() != maps.len() || maps.is_empty() || coeffs.iter().any(|c| c < &zero()) {
            return Err(PlError::BadCoefficients);
        }
        if coeffs.iter().sum::<Q>() != one() {
            return Err(PlError::BadCoefficients);
        }
        if maps.len() == 1 {
            return Ok(maps[0].clone());
        }
        let xs: Vec<Q> = maps
            .iter()
            .flat_map(|m| m.xs.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let ys = xs
            .iter()
            .map(|t| coeffs.iter().zip(maps).map(|(c, m)| c * m.eval(t)).sum())
            .collect();
        Ok(PLMap::canonical(xs, ys))
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.ys.windows(2).all(|w| w[0] < w[1])
    }

    pub fn to_json(&self) -> Value {
        json!({
            "x": self.xs.iter().map(q_to_json).collect::<Vec<_>>(),
            "y": self.ys.iter().map(q_to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<PLMap, PlError> {
        let read = |key: &str| -> Result<Vec<Q>, PlError> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| PlError::Json(format!("missing array {key}")))?
                .iter()
                .map(|x| q_from_json(x).map_err(|e| PlError::Json(e.to_string())))
                .collect()
        };
        PLMap::new(read("x")?, read("y")?)
    }
}

/// Pointwise average of maps.
pub fn average_of_steps(maps: &[PLMap]) -> Result<PLMap, PlError> {
    let k = maps.len() as i64;
    let coeffs = vec![Q::one() / qi(k); maps.len()];
    PLMap::combination(&coeffs, maps)
}

/// A strictly increasing piecewise-linear map fixing 0 and 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MonotoneReparam(PLMap);

impl MonotoneReparam {
    pub fn new(map: PLMap) -> Result<MonotoneReparam, PlError> {
        if !map.is_strictly_increasing() || !map.ys[0].is_zero() || !map.ys.last().unwrap().is_one() {
            return Err(PlError::NotStrictlyMonotone);
        }
        Ok(MonotoneReparam(map))
    }

    pub fn from_points(xs: Vec<Q>, ys: Vec<Q>) -> Result<MonotoneReparam, PlError> {
        MonotoneReparam::new(PLMap::new(xs, ys)?)
    }

    /// Trusts that the points are strictly increasing from `(0,0)` to
    /// `(1,1)` with distinct slopes on neighbouring segments.
    pub(crate) fn from_canonical_points(xs: Vec<Q>, ys: Vec<Q>) -> MonotoneReparam {
        debug_assert!(MonotoneReparam::from_points(xs.clone(), ys.clone()).is_ok_and(|m| m.0.xs == xs));
        MonotoneReparam(PLMap { xs, ys })
    }

    pub fn identity() -> MonotoneReparam {
        MonotoneReparam(PLMap::identity())
    }

    pub fn is_identity(&self) -> bool {
        self.0 == PLMap::identity()
    }

    pub fn map(&self) -> &PLMap {
        &self.0
    }

    pub fn into_map(self) -> PLMap {
        self.0
    }

    pub fn eval(&self, t: &Q) -> Q {
        self.0.eval(t)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &MonotoneReparam) -> MonotoneReparam {
        MonotoneReparam(self.0.compose(&inner.0))
    }

    pub fn inverse(&self) -> MonotoneReparam {
        MonotoneReparam(PLMap::canonical(self.0.ys.clone(), self.0.xs.clone()))
    }

    pub fn convex_combination(coeffs: &[Q], maps: &[MonotoneReparam]) -> Result<MonotoneReparam, PlError> {
        let plain: Vec<PLMap> = maps.iter().map(|m| m.0.clone()).collect();
        MonotoneReparam::new(PLMap::combination(coeffs, &plain)?)
    }
}

/// Inverts a map given as a general [`PLMap`], checking strict monotonicity.
pub fn pl_invert(f: &PLMap) -> Result<MonotoneReparam, PlError> {
    Ok(MonotoneReparam::new(f.clone())?.inverse())
}
