//! Search-space model: ordered variable descriptors and the two vector
//! encodings solvers work in.
//!
//! * **Normalized** encoding: every scalar is centred and divided by its
//!   scale, categoricals become a block of `arity` logits. Continuous solvers
//!   live here; the all-zero vector is the domain center.
//! * **Native** encoding: one scalar per variable holding the actual value
//!   (category index, integer, real). Discrete solvers live here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Logit given to the selected category when a native point is lifted into
/// the normalized encoding.
pub const ONE_HOT_LOGIT: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VariableKind {
    Continuous {
        #[serde(default)]
        lower: Option<f64>,
        #[serde(default)]
        upper: Option<f64>,
        #[serde(default = "unit_scale")]
        scale: f64,
    },
    Integer {
        low: i64,
        high: i64,
    },
    Categorical {
        arity: usize,
    },
    UnboundedInteger,
}

fn unit_scale() -> f64 {
    1.0
}

impl VariableKind {
    pub fn real() -> Self {
        VariableKind::Continuous { lower: None, upper: None, scale: 1.0 }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, VariableKind::Continuous { .. })
    }

    /// Number of scalars in the normalized encoding.
    pub fn encoded_width(&self) -> usize {
        match self {
            VariableKind::Categorical { arity } => *arity,
            _ => 1,
        }
    }

    /// Number of admissible values for finite discrete variables.
    pub fn arity(&self) -> Option<usize> {
        match self {
            VariableKind::Categorical { arity } => Some(*arity),
            VariableKind::Integer { low, high } => Some((high - low) as usize + 1),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            VariableKind::Continuous { lower, upper, scale } => {
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(Error::InvalidDomain(format!("scale must be positive, got {scale}")));
                }
                if let (Some(l), Some(u)) = (lower, upper) {
                    if !(l < u) {
                        return Err(Error::InvalidDomain(format!("empty interval [{l}, {u}]")));
                    }
                }
                if lower.is_some_and(|l| !l.is_finite()) || upper.is_some_and(|u| !u.is_finite()) {
                    return Err(Error::InvalidDomain("bounds must be finite".into()));
                }
                Ok(())
            }
            VariableKind::Integer { low, high } if low > high => {
                Err(Error::InvalidDomain(format!("empty integer range {low}..={high}")))
            }
            VariableKind::Categorical { arity } if arity < 2 => {
                Err(Error::InvalidDomain(format!("categorical arity must be >= 2, got {arity}")))
            }
            _ => Ok(()),
        }
    }

    /// Center and step of the normalized coordinate for scalar variables.
    fn affine(&self) -> (f64, f64) {
        match *self {
            VariableKind::Continuous { lower, upper, scale } => {
                let center = match (lower, upper) {
                    (Some(l), Some(u)) => 0.5 * (l + u),
                    (Some(l), None) => l + scale,
                    (None, Some(u)) => u - scale,
                    (None, None) => 0.0,
                };
                (center, scale)
            }
            VariableKind::Integer { low, high } => {
                let mid = 0.5 * (low as f64 + high as f64);
                (mid, ((high - low) as f64 / 4.0).max(1.0))
            }
            VariableKind::UnboundedInteger => (0.0, 1.0),
            VariableKind::Categorical { .. } => (0.0, 1.0),
        }
    }

    /// Clamps/rounds a native scalar into the variable's admissible set.
    fn native_value(&self, raw: f64) -> Value {
        match *self {
            VariableKind::Continuous { lower, upper, .. } => {
                let mut v = raw;
                if let Some(l) = lower {
                    v = v.max(l);
                }
                if let Some(u) = upper {
                    v = v.min(u);
                }
                Value::Real(v)
            }
            VariableKind::Integer { low, high } => Value::Int((round_half_down(raw) as i64).clamp(low, high)),
            VariableKind::UnboundedInteger => Value::Int(round_half_down(raw) as i64),
            VariableKind::Categorical { arity } => {
                Value::Category((raw.round().max(0.0) as usize).min(arity - 1))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub kind: VariableKind,
    pub position: usize,
}

/// One coordinate of a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Real(f64),
    Int(i64),
    Category(usize),
}

impl Value {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Value::Real(v) => v,
            Value::Int(v) => v as f64,
            Value::Category(c) => c as f64,
        }
    }
}

/// A mixed-value vector, one entry per domain variable.
pub type Point = Vec<Value>;

/// Converts a point to plain reals (categories become their index).
pub fn to_reals(point: &[Value]) -> Vec<f64> {
    point.iter().map(Value::as_f64).collect()
}

/// Per-coordinate box in an encoded space; infinite entries mean unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SearchBox {
    pub fn unbounded(dim: usize) -> Self {
        Self { lower: vec![f64::NEG_INFINITY; dim], upper: vec![f64::INFINITY; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn clip(&self, x: &mut [f64]) {
        for ((xi, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *xi = xi.clamp(*lo, *hi);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(&self.lower).zip(&self.upper).all(|((v, lo), hi)| *v >= *lo && *v <= *hi)
    }

    /// Sub-box over the given coordinates.
    pub fn select(&self, coords: &[usize]) -> Self {
        Self {
            lower: coords.iter().map(|&i| self.lower[i]).collect(),
            upper: coords.iter().map(|&i| self.upper[i]).collect(),
        }
    }
}

/// Ordered list of variables defining the search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    variables: Vec<VariableSpec>,
}

impl DomainSpec {
    /// Builds a domain from kinds, assigning positions in declaration order.
    pub fn new(kinds: Vec<VariableKind>) -> Result<Self> {
        let variables =
            kinds.into_iter().enumerate().map(|(position, kind)| VariableSpec { kind, position }).collect();
        Self::from_variables(variables)
    }

    pub fn from_variables(variables: Vec<VariableSpec>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::InvalidDomain("domain has no variables".into()));
        }
        for (i, v) in variables.iter().enumerate() {
            if v.position != i {
                return Err(Error::InvalidDomain(format!(
                    "variable at index {i} declares position {}",
                    v.position
                )));
            }
            v.kind.validate()?;
        }
        Ok(Self { variables })
    }

    /// `d` unbounded reals with scale 1.
    pub fn continuous(d: usize) -> Result<Self> {
        Self::new(vec![VariableKind::real(); d])
    }

    pub fn bounded(d: usize, lower: f64, upper: f64) -> Result<Self> {
        let scale = (upper - lower) / 4.0;
        Self::new(vec![VariableKind::Continuous { lower: Some(lower), upper: Some(upper), scale }; d])
    }

    /// `d` binary variables.
    pub fn binary(d: usize) -> Result<Self> {
        Self::new(vec![VariableKind::Integer { low: 0, high: 1 }; d])
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn kinds(&self) -> impl Iterator<Item = &VariableKind> {
        self.variables.iter().map(|v| &v.kind)
    }

    /// Number of declared variables.
    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    /// Scalar dimension after encoding (categoricals count `arity`).
    pub fn dimension(&self) -> usize {
        self.kinds().map(VariableKind::encoded_width).sum()
    }

    pub fn all_continuous(&self) -> bool {
        self.kinds().all(VariableKind::is_continuous)
    }

    pub fn has_discrete(&self) -> bool {
        !self.all_continuous()
    }

    pub fn all_discrete(&self) -> bool {
        self.kinds().all(|k| !k.is_continuous())
    }

    pub fn has_categorical(&self) -> bool {
        self.kinds().any(|k| matches!(k, VariableKind::Categorical { .. }))
    }

    pub fn has_unbounded_discrete(&self) -> bool {
        self.kinds().any(|k| matches!(k, VariableKind::UnboundedInteger))
    }

    /// Largest finite alphabet size (integer ranges count their number of
    /// values); 0 when there are no finite discrete variables.
    pub fn max_arity(&self) -> usize {
        self.kinds().filter_map(VariableKind::arity).max().unwrap_or(0)
    }

    /// Midpoint of the domain: the decoding of the all-zero normalized vector
    /// (categoricals with uniform logits decode to index 0).
    pub fn center(&self) -> Point {
        self.decode_normalized(&vec![0.0; self.dimension()])
    }

    pub fn contains(&self, point: &[Value]) -> bool {
        point.len() == self.len()
            && self.kinds().zip(point).all(|(k, v)| match (k, v) {
                (VariableKind::Continuous { lower, upper, .. }, Value::Real(x)) => {
                    x.is_finite()
                        && lower.is_none_or(|l| *x >= l)
                        && upper.is_none_or(|u| *x <= u)
                }
                (VariableKind::Integer { low, high }, Value::Int(x)) => x >= low && x <= high,
                (VariableKind::UnboundedInteger, Value::Int(_)) => true,
                (VariableKind::Categorical { arity }, Value::Category(c)) => c < arity,
                _ => false,
            })
    }

    /// Box of the normalized encoding.
    pub fn normalized_box(&self) -> SearchBox {
        let mut lower = Vec::with_capacity(self.dimension());
        let mut upper = Vec::with_capacity(self.dimension());
        for kind in self.kinds() {
            let (center, step) = kind.affine();
            match *kind {
                VariableKind::Continuous { lower: l, upper: u, .. } => {
                    lower.push(l.map_or(f64::NEG_INFINITY, |l| (l - center) / step));
                    upper.push(u.map_or(f64::INFINITY, |u| (u - center) / step));
                }
                VariableKind::Integer { low, high } => {
                    lower.push((low as f64 - center) / step);
                    upper.push((high as f64 - center) / step);
                }
                VariableKind::UnboundedInteger => {
                    lower.push(f64::NEG_INFINITY);
                    upper.push(f64::INFINITY);
                }
                VariableKind::Categorical { arity } => {
                    lower.extend(std::iter::repeat_n(f64::NEG_INFINITY, arity));
                    upper.extend(std::iter::repeat_n(f64::INFINITY, arity));
                }
            }
        }
        SearchBox { lower, upper }
    }

    /// Decodes a normalized vector; categoricals decode by argmax of their
    /// logits (ties go to the lowest index).
    pub fn decode_normalized(&self, u: &[f64]) -> Point {
        assert_eq!(u.len(), self.dimension(), "normalized vector has wrong length");
        let mut out = Vec::with_capacity(self.len());
        let mut offset = 0;
        for kind in self.kinds() {
            match *kind {
                VariableKind::Categorical { arity } => {
                    out.push(Value::Category(argmax(&u[offset..offset + arity])));
                    offset += arity;
                }
                _ => {
                    let (center, step) = kind.affine();
                    out.push(kind.native_value(center + step * u[offset]));
                    offset += 1;
                }
            }
        }
        out
    }

    /// Decodes one scalar (non-categorical) variable from its normalized
    /// coordinate.
    pub fn decode_scalar(&self, var: usize, u: f64) -> Value {
        let kind = &self.variables[var].kind;
        let (center, step) = kind.affine();
        kind.native_value(center + step * u)
    }

    /// Lifts a point into the normalized encoding; categoricals become
    /// one-hot logits scaled by [`ONE_HOT_LOGIT`].
    pub fn encode_normalized(&self, point: &[Value]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dimension());
        for (kind, value) in self.kinds().zip(point) {
            match *kind {
                VariableKind::Categorical { arity } => {
                    let c = value.as_f64() as usize;
                    out.extend((0..arity).map(|j| if j == c { ONE_HOT_LOGIT } else { 0.0 }));
                }
                _ => {
                    let (center, step) = kind.affine();
                    out.push((value.as_f64() - center) / step);
                }
            }
        }
        out
    }

    /// Decodes a native vector (one scalar per variable), clamping and
    /// rounding into the admissible set.
    pub fn decode_native(&self, x: &[f64]) -> Point {
        assert_eq!(x.len(), self.len(), "native vector has wrong length");
        self.kinds().zip(x).map(|(k, v)| k.native_value(*v)).collect()
    }

    pub fn encode_native(&self, point: &[Value]) -> Vec<f64> {
        to_reals(point)
    }

    /// Native vector of the center.
    pub fn native_center(&self) -> Vec<f64> {
        to_reals(&self.center())
    }
}

/// Rounds to the nearest integer, halves towards negative infinity (so the
/// midpoint of `{0, 1}` is 0).
fn round_half_down(x: f64) -> f64 {
    (x - 0.5).ceil()
}

/// Index of the largest entry; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
