//! Set rings over three universes and the pre-measures living on them.
//!
//! * finite universes of labelled points, every subset is a ring element;
//! * the real line, ring elements are finite unions of bounded half-open
//!   intervals with rational endpoints;
//! * path space, ring elements are finite disjoint unions of cylinders
//!   (algebra lives in [`crate::wiener`]).

mod interval;

use std::fmt;
use std::sync::Arc;

use num_traits::Signed;
use serde_json::{json, Value};

pub use interval::{BoolOp, Interval, IntervalSet};

use crate::error::{Error, Result};
use crate::lattice::ExtReal;
use crate::rational::{self, Rational};
use crate::wiener::{CylinderUnion, SampledPath};

/// The ground set the functions live on.
#[derive(Clone, Debug)]
pub enum Universe {
    Finite(Arc<[String]>),
    RealLine,
    PathSpace,
}

impl PartialEq for Universe {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Universe::Finite(a), Universe::Finite(b)) => Arc::ptr_eq(a, b) || a == b,
            (Universe::RealLine, Universe::RealLine) => true,
            (Universe::PathSpace, Universe::PathSpace) => true,
            _ => false,
        }
    }
}

impl Eq for Universe {}

impl Universe {
    pub fn finite<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut sorted = labels.clone();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Domain(format!("duplicate label {:?} in finite universe", w[0])));
        }
        Ok(Universe::Finite(labels.into()))
    }

    /// Finite universe with labels `p1, ..., pn`.
    pub fn points(n: usize) -> Self {
        Universe::Finite((1..=n).map(|i| format!("p{i}")).collect::<Vec<_>>().into())
    }

    pub fn size(&self) -> Option<usize> {
        match self {
            Universe::Finite(l) => Some(l.len()),
            _ => None,
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        match self {
            Universe::Finite(l) => Some(l),
            _ => None,
        }
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels()
            .and_then(|l| l.iter().position(|x| x == label))
            .ok_or_else(|| Error::Domain(format!("no point labelled {label:?}")))
    }

    pub fn ensure_same(&self, other: &Universe) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::UniverseMismatch(format!("{self} vs {other}")))
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Universe::Finite(l) => json!({ "finite": l.iter().collect::<Vec<_>>() }),
            Universe::RealLine => json!("real"),
            Universe::PathSpace => json!("path"),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) if s == "real" => Ok(Universe::RealLine),
            Value::String(s) if s == "path" => Ok(Universe::PathSpace),
            Value::Object(o) => {
                let labels = o
                    .get("finite")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Malformed("finite universe needs a label list".into()))?;
                let labels = labels
                    .iter()
                    .map(|l| match l {
                        Value::String(s) => Ok(s.clone()),
                        other => Err(Error::Malformed(format!("bad label {other}"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Universe::finite(labels)
            }
            other => Err(Error::Malformed(format!("unknown universe {other}"))),
        }
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Universe::Finite(l) => write!(f, "finite({} points)", l.len()),
            Universe::RealLine => write!(f, "real line"),
            Universe::PathSpace => write!(f, "path space"),
        }
    }
}

/// A point of some universe.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Atom(usize),
    Real(Rational),
    Path(SampledPath),
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Atom(i) => write!(f, "atom #{i}"),
            Point::Real(t) => write!(f, "{}", rational::display(t)),
            Point::Path(p) => write!(f, "path with {} samples", p.len()),
        }
    }
}

/// Element of a set ring, always held in canonical form.
#[derive(Clone, Debug, PartialEq)]
pub enum RingSet {
    Finite { universe: Universe, points: Vec<usize> },
    Real(IntervalSet),
    Path(CylinderUnion),
}

impl RingSet {
    pub fn finite(universe: &Universe, points: impl IntoIterator<Item = usize>) -> Result<Self> {
        let n = universe
            .size()
            .ok_or_else(|| Error::UniverseMismatch(format!("{universe} is not finite")))?;
        let mut points: Vec<usize> = points.into_iter().collect();
        if let Some(bad) = points.iter().find(|&&p| p >= n) {
            return Err(Error::Domain(format!("point index {bad} outside universe of {n}")));
        }
        points.sort_unstable();
        points.dedup();
        Ok(RingSet::Finite {
            universe: universe.clone(),
            points,
        })
    }

    /// Subset of a finite universe encoded by the bits of `mask`.
    pub fn from_mask(universe: &Universe, mask: u64) -> Result<Self> {
        let n = universe.size().unwrap_or(0);
        RingSet::finite(universe, (0..n).filter(|i| mask >> i & 1 == 1))
    }

    pub fn real(set: IntervalSet) -> Result<Self> {
        if !set.is_bounded() {
            return Err(Error::Domain(format!(
                "real-line ring elements must be bounded, got {set}"
            )));
        }
        Ok(RingSet::Real(set))
    }

    /// `[a, b)`; empty when `a >= b`.
    pub fn interval(a: Rational, b: Rational) -> Self {
        RingSet::Real(IntervalSet::single(a, b))
    }

    pub fn empty(universe: &Universe) -> Self {
        match universe {
            Universe::Finite(_) => RingSet::Finite {
                universe: universe.clone(),
                points: Vec::new(),
            },
            Universe::RealLine => RingSet::Real(IntervalSet::empty()),
            Universe::PathSpace => RingSet::Path(CylinderUnion::empty()),
        }
    }

    /// The whole universe, when it is itself a ring element.
    pub fn whole(universe: &Universe) -> Result<Self> {
        match universe {
            Universe::Finite(l) => RingSet::finite(universe, 0..l.len()),
            Universe::PathSpace => Ok(RingSet::Path(CylinderUnion::whole())),
            Universe::RealLine => Err(Error::Domain(
                "the real line is not an element of the bounded interval ring".into(),
            )),
        }
    }

    pub fn universe(&self) -> Universe {
        match self {
            RingSet::Finite { universe, .. } => universe.clone(),
            RingSet::Real(_) => Universe::RealLine,
            RingSet::Path(_) => Universe::PathSpace,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            RingSet::Finite { points, .. } => points.is_empty(),
            RingSet::Real(s) => s.is_empty(),
            RingSet::Path(c) => c.is_empty(),
        }
    }

    pub fn contains(&self, p: &Point) -> Result<bool> {
        match (self, p) {
            (RingSet::Finite { universe, points }, Point::Atom(i)) => {
                if *i >= universe.size().unwrap_or(0) {
                    return Err(Error::Domain(format!("{p} outside {universe}")));
                }
                Ok(points.binary_search(i).is_ok())
            }
            (RingSet::Real(s), Point::Real(t)) => Ok(s.contains(t)),
            (RingSet::Path(c), Point::Path(path)) => c.contains(path),
            _ => Err(Error::UniverseMismatch(format!(
                "point {p} is not in {}",
                self.universe()
            ))),
        }
    }

    pub fn combine(&self, op: BoolOp, other: &RingSet) -> Result<RingSet> {
        boolean_combine(op, self, other)
    }

    pub fn union(&self, other: &RingSet) -> Result<RingSet> {
        boolean_combine(BoolOp::Union, self, other)
    }

    pub fn intersect(&self, other: &RingSet) -> Result<RingSet> {
        boolean_combine(BoolOp::Intersect, self, other)
    }

    pub fn difference(&self, other: &RingSet) -> Result<RingSet> {
        boolean_combine(BoolOp::Difference, self, other)
    }

    pub fn is_subset(&self, other: &RingSet) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    /// Some member of the set, if nonempty.
    pub fn witness(&self) -> Option<Point> {
        match self {
            RingSet::Finite { points, .. } => points.first().map(|&i| Point::Atom(i)),
            RingSet::Real(s) => s.witness().map(Point::Real),
            RingSet::Path(c) => c.witness().map(Point::Path),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            RingSet::Finite { universe, points } => {
                let labels = universe.labels().unwrap_or(&[]);
                json!({
                    "universe": universe.to_json(),
                    "points": points.iter().map(|&i| labels[i].clone()).collect::<Vec<_>>(),
                })
            }
            RingSet::Real(s) => {
                let intervals: Vec<Value> = s
                    .intervals()
                    .iter()
                    .map(|iv| {
                        let (a, b) = (iv.lo.finite().unwrap(), iv.hi.finite().unwrap());
                        json!([
                            rational::rational_to_json(a)[0],
                            rational::rational_to_json(a)[1],
                            rational::rational_to_json(b)[0],
                            rational::rational_to_json(b)[1]
                        ])
                    })
                    .collect();
                json!({ "universe": "real", "intervals": intervals })
            }
            RingSet::Path(c) => json!({ "universe": "path", "cylinders": c.to_json() }),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let universe = Universe::from_json(
            v.get("universe")
                .ok_or_else(|| Error::Malformed("ring set needs a universe".into()))?,
        )?;
        match &universe {
            Universe::Finite(_) => {
                let pts = v
                    .get("points")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Malformed("finite ring set needs points".into()))?;
                let idx = pts
                    .iter()
                    .map(|p| match p {
                        Value::String(s) => universe.index_of(s),
                        Value::Number(n) => n
                            .as_u64()
                            .map(|i| i as usize)
                            .ok_or_else(|| Error::Malformed(format!("bad point {n}"))),
                        other => Err(Error::Malformed(format!("bad point {other}"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                RingSet::finite(&universe, idx)
            }
            Universe::RealLine => {
                let ivs = v
                    .get("intervals")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Malformed("real ring set needs intervals".into()))?;
                let mut out = Vec::with_capacity(ivs.len());
                for iv in ivs {
                    out.push(parse_interval_json(iv)?);
                }
                RingSet::real(IntervalSet::from_intervals(out))
            }
            Universe::PathSpace => {
                let cyl = v
                    .get("cylinders")
                    .ok_or_else(|| Error::Malformed("path ring set needs cylinders".into()))?;
                Ok(RingSet::Path(CylinderUnion::from_json(cyl)?))
            }
        }
    }
}

/// `[a_num, a_den, b_num, b_den]` or `[a, b]` with rational-like entries.
fn parse_interval_json(v: &Value) -> Result<Interval> {
    let parts = v
        .as_array()
        .ok_or_else(|| Error::Malformed(format!("interval must be an array, got {v}")))?;
    let (a, b) = match parts.len() {
        4 => (
            rational::rational_from_json(&Value::Array(parts[0..2].to_vec()))?,
            rational::rational_from_json(&Value::Array(parts[2..4].to_vec()))?,
        ),
        2 => (
            rational::rational_from_json(&parts[0])?,
            rational::rational_from_json(&parts[1])?,
        ),
        _ => return Err(Error::Malformed(format!("bad interval {v}"))),
    };
    Ok(Interval::finite(a, b))
}

impl fmt::Display for RingSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSet::Finite { universe, points } => {
                let labels = universe.labels().unwrap_or(&[]);
                let names: Vec<&str> = points.iter().map(|&i| labels[i].as_str()).collect();
                write!(f, "{{{}}}", names.join(", "))
            }
            RingSet::Real(s) => write!(f, "{s}"),
            RingSet::Path(c) => write!(f, "{c}"),
        }
    }
}

/// Union, intersection or difference of two ring elements over the same
/// universe. The result is canonical.
pub fn boolean_combine(op: BoolOp, a: &RingSet, b: &RingSet) -> Result<RingSet> {
    match (a, b) {
        (
            RingSet::Finite { universe: ua, points: pa },
            RingSet::Finite { universe: ub, points: pb },
        ) => {
            ua.ensure_same(ub)?;
            let n = ua.size().unwrap_or(0);
            let mut ina = vec![false; n];
            let mut inb = vec![false; n];
            pa.iter().for_each(|&i| ina[i] = true);
            pb.iter().for_each(|&i| inb[i] = true);
            RingSet::finite(ua, (0..n).filter(|&i| op.apply(ina[i], inb[i])))
        }
        (RingSet::Real(x), RingSet::Real(y)) => Ok(RingSet::Real(x.combine(op, y))),
        (RingSet::Path(x), RingSet::Path(y)) => Ok(RingSet::Path(x.combine(op, y))),
        _ => Err(Error::UniverseMismatch(format!(
            "{} vs {}",
            a.universe(),
            b.universe()
        ))),
    }
}

/// A nonnegative, finitely additive set function with `mu(empty) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum PreMeasure {
    /// Total length of a finite union of intervals.
    Length,
    /// Point weights on a finite universe; weights may be `+inf`.
    PointMass {
        universe: Universe,
        weights: Vec<ExtReal>,
    },
}

impl PreMeasure {
    pub fn counting(universe: &Universe) -> Self {
        let n = universe.size().unwrap_or(0);
        PreMeasure::PointMass {
            universe: universe.clone(),
            weights: vec![ExtReal::from_int(1); n],
        }
    }

    pub fn point_masses(universe: &Universe, weights: Vec<ExtReal>) -> Result<Self> {
        let n = universe
            .size()
            .ok_or_else(|| Error::UniverseMismatch(format!("{universe} is not finite")))?;
        if weights.len() != n {
            return Err(Error::Domain(format!("{} weights for {n} points", weights.len())));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_nonnegative()) {
            return Err(Error::Domain(format!("negative point weight {w}")));
        }
        Ok(PreMeasure::PointMass {
            universe: universe.clone(),
            weights,
        })
    }

    pub fn universe(&self) -> Universe {
        match self {
            PreMeasure::Length => Universe::RealLine,
            PreMeasure::PointMass { universe, .. } => universe.clone(),
        }
    }

    pub fn eval(&self, e: &RingSet) -> Result<ExtReal> {
        premeasure_eval(self, e)
    }

    pub fn to_json(&self) -> Value {
        match self {
            PreMeasure::Length => json!({ "kind": "length" }),
            PreMeasure::PointMass { universe, weights } => json!({
                "kind": "point_mass",
                "universe": universe.to_json(),
                "weights": weights.iter().map(ExtReal::to_json).collect::<Vec<_>>(),
            }),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        match v.get("kind").and_then(Value::as_str) {
            Some("length") => Ok(PreMeasure::Length),
            Some("point_mass") => {
                let universe = Universe::from_json(
                    v.get("universe")
                        .ok_or_else(|| Error::Malformed("point_mass needs a universe".into()))?,
                )?;
                let weights = v
                    .get("weights")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Malformed("point_mass needs weights".into()))?
                    .iter()
                    .map(ExtReal::from_json)
                    .collect::<Result<Vec<_>>>()?;
                PreMeasure::point_masses(&universe, weights)
            }
            other => Err(Error::Malformed(format!("unknown pre-measure kind {other:?}"))),
        }
    }
}

/// `mu(e)`: total length on the real line, sum of point weights on a finite
/// universe.
pub fn premeasure_eval(mu: &PreMeasure, e: &RingSet) -> Result<ExtReal> {
    match (mu, e) {
        (PreMeasure::Length, RingSet::Real(s)) => Ok(s.length()),
        (PreMeasure::PointMass { universe, weights }, RingSet::Finite { universe: ue, points }) => {
            universe.ensure_same(ue)?;
            Ok(ExtReal::sum(points.iter().map(|&i| &weights[i])))
        }
        _ => Err(Error::UniverseMismatch(format!(
            "pre-measure on {} applied to a set in {}",
            mu.universe(),
            e.universe()
        ))),
    }
}

/// Signed point masses on a finite universe.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedPreMeasure {
    universe: Universe,
    weights: Vec<Rational>,
}

impl SignedPreMeasure {
    pub fn new(universe: &Universe, weights: Vec<Rational>) -> Result<Self> {
        let n = universe.size().ok_or_else(|| {
            Error::Domain("signed pre-measures are only supported on finite universes".into())
        })?;
        if weights.len() != n {
            return Err(Error::Domain(format!("{} weights for {n} points", weights.len())));
        }
        Ok(SignedPreMeasure {
            universe: universe.clone(),
            weights,
        })
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn eval(&self, e: &RingSet) -> Result<Rational> {
        match e {
            RingSet::Finite { universe, points } => {
                self.universe.ensure_same(universe)?;
                Ok(points.iter().map(|&i| self.weights[i].clone()).sum())
            }
            other => Err(Error::UniverseMismatch(format!(
                "signed pre-measure applied to a set in {}",
                other.universe()
            ))),
        }
    }

    /// The variation `|nu|` as an ordinary pre-measure.
    pub fn variation(&self) -> PreMeasure {
        PreMeasure::PointMass {
            universe: self.universe.clone(),
            weights: self.weights.iter().map(|w| ExtReal::Finite(w.abs())).collect(),
        }
    }
}

/// Outcome of comparing `mu(union of parts)` with the sum of `mu(part)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdditivityReport {
    pub lhs: ExtReal,
    pub rhs: ExtReal,
    pub pass: bool,
}

impl AdditivityReport {
    pub fn to_json(&self) -> Value {
        json!({ "lhs": self.lhs.to_json(), "rhs": self.rhs.to_json(), "pass": self.pass })
    }
}

/// Checks finite additivity of `mu` on a family of pairwise disjoint sets.
/// Overlapping parts are rejected with a witness point.
pub fn check_additivity(mu: &PreMeasure, parts: &[RingSet]) -> Result<AdditivityReport> {
    let universe = mu.universe();
    for p in parts {
        universe.ensure_same(&p.universe())?;
    }
    for (i, a) in parts.iter().enumerate() {
        for b in &parts[i + 1..] {
            let common = a.intersect(b)?;
            if let Some(w) = common.witness() {
                return Err(Error::Overlap {
                    witness: w.to_string(),
                });
            }
        }
    }
    let union = parts
        .iter()
        .try_fold(RingSet::empty(&universe), |acc, p| acc.union(p))?;
    let lhs = premeasure_eval(mu, &union)?;
    let values = parts
        .iter()
        .map(|p| premeasure_eval(mu, p))
        .collect::<Result<Vec<_>>>()?;
    let rhs = ExtReal::sum(values.iter());
    Ok(AdditivityReport {
        pass: lhs == rhs,
        lhs,
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn iv(a: i64, b: i64) -> RingSet {
        RingSet::interval(int(a), int(b))
    }

    #[test]
    fn union_merges() {
        assert_eq!(iv(0, 2).union(&iv(1, 3)).unwrap(), iv(0, 3));
    }

    #[test]
    fn intersect_with_empty() {
        let e = RingSet::empty(&Universe::RealLine);
        assert!(iv(0, 5).intersect(&e).unwrap().is_empty());
    }

    #[test]
    fn mismatched_universes() {
        let u = Universe::points(3);
        let a = RingSet::finite(&u, [0]).unwrap();
        assert!(matches!(
            a.union(&iv(0, 1)),
            Err(Error::UniverseMismatch(_))
        ));
        let v = Universe::points(4);
        let b = RingSet::finite(&v, [0]).unwrap();
        assert!(matches!(a.union(&b), Err(Error::UniverseMismatch(_))));
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(Universe::finite(["a", "b", "a"]).is_err());
    }

    #[test]
    fn premeasure_examples() {
        let s = iv(0, 1).union(&iv(2, 4)).unwrap();
        assert_eq!(premeasure_eval(&PreMeasure::Length, &s).unwrap(), ExtReal::from_int(3));
        let u = Universe::points(3);
        let c = PreMeasure::counting(&u);
        let s = RingSet::finite(&u, [0, 2]).unwrap();
        assert_eq!(c.eval(&s).unwrap(), ExtReal::from_int(2));
        assert_eq!(
            PreMeasure::Length.eval(&RingSet::empty(&Universe::RealLine)).unwrap(),
            ExtReal::zero()
        );
    }

    #[test]
    fn additivity_and_overlap() {
        let r = check_additivity(&PreMeasure::Length, &[iv(0, 1), iv(1, 2)]).unwrap();
        assert_eq!(r.lhs, ExtReal::from_int(2));
        assert!(r.pass);
        let err = check_additivity(&PreMeasure::Length, &[iv(0, 2), iv(1, 3)]).unwrap_err();
        assert_eq!(
            err,
            Error::Overlap {
                witness: "1".into()
            }
        );
    }

    #[test]
    fn unbounded_real_sets_rejected() {
        let ray = IntervalSet::from_intervals([Interval::new(ExtReal::zero(), ExtReal::PosInf).unwrap()]);
        assert!(RingSet::real(ray).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let s = iv(0, 1).union(&iv(2, 4)).unwrap();
        let v = s.to_json();
        assert_eq!(
            v.to_string(),
            r#"{"intervals":[[0,1,1,1],[2,1,4,1]],"universe":"real"}"#
        );
        assert_eq!(RingSet::from_json(&v).unwrap(), s);
        let u = Universe::finite(["a", "b", "c"]).unwrap();
        let f = RingSet::finite(&u, [2, 0]).unwrap();
        assert_eq!(RingSet::from_json(&f.to_json()).unwrap(), f);
        let mu = PreMeasure::point_masses(&u, vec![ExtReal::from_int(1), ExtReal::PosInf, ExtReal::zero()]).unwrap();
        assert_eq!(PreMeasure::from_json(&mu.to_json()).unwrap(), mu);
    }
}
