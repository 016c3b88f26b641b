use std::fmt;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lattice::ExtReal;
use crate::rational::{self, Rational};
use crate::rings::{BoolOp, Interval, IntervalSet};

/// A path observed at finitely many times, e.g. one row of
/// [`super::sample_paths`]. The implicit value at time 0 is 0.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPath {
    times: Vec<Rational>,
    values: Vec<f64>,
}

impl SampledPath {
    pub fn new(times: Vec<Rational>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Domain(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("sample times must increase strictly".into()));
        }
        Ok(SampledPath { times, values })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[Rational] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, t: &Rational) -> Result<f64> {
        if t.is_zero() {
            return Ok(0.0);
        }
        self.times
            .binary_search(t)
            .map(|i| self.values[i])
            .map_err(|_| Error::Domain(format!("path not sampled at t = {}", rational::display(t))))
    }
}

/// The cylinder `{f : f(t_i) in B_i, i = 1..n}` over a partition
/// `0 = t_0 < t_1 < ... < t_n = 1`.
///
/// Held in reduced form: interior times constrained to all of R are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct Cylinder {
    times: Vec<Rational>,
    sets: Vec<IntervalSet>,
}

impl Cylinder {
    /// `times` must run from 0 to 1, strictly increasing, with one set per
    /// positive time.
    pub fn new(times: Vec<Rational>, sets: Vec<IntervalSet>) -> Result<Self> {
        if times.len() < 2 || !times[0].is_zero() || !times[times.len() - 1].is_one() {
            return Err(Error::Domain(
                "cylinder partitions must start at 0 and end at 1".into(),
            ));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("partition times must increase strictly".into()));
        }
        if sets.len() + 1 != times.len() {
            return Err(Error::Domain(format!(
                "{} sets for a partition with {} steps",
                sets.len(),
                times.len() - 1
            )));
        }
        Ok(Cylinder { times, sets }.reduced())
    }

    /// The whole path space `D({0, 1}, (R))`.
    pub fn whole() -> Self {
        Cylinder {
            times: vec![Rational::zero(), Rational::one()],
            sets: vec![IntervalSet::whole_line()],
        }
    }

    /// Cylinder constraining a single time `t` in `(0, 1]`.
    pub fn at(t: Rational, set: IntervalSet) -> Result<Self> {
        if t.is_one() {
            return Cylinder::new(vec![Rational::zero(), t], vec![set]);
        }
        Cylinder::new(
            vec![Rational::zero(), t, Rational::one()],
            vec![set, IntervalSet::whole_line()],
        )
    }

    fn reduced(mut self) -> Self {
        let n = self.sets.len();
        let mut times = vec![self.times[0].clone()];
        let mut sets = Vec::with_capacity(n);
        for (i, s) in self.sets.drain(..).enumerate() {
            let last = i + 1 == n;
            if last || s != IntervalSet::whole_line() {
                times.push(self.times[i + 1].clone());
                sets.push(s);
            }
        }
        Cylinder { times, sets }
    }

    /// Partition `0 = t_0 < ... < t_n = 1`.
    pub fn times(&self) -> &[Rational] {
        &self.times
    }

    /// Constraint sets `B_1..B_n`.
    pub fn sets(&self) -> &[IntervalSet] {
        &self.sets
    }

    pub fn steps(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.iter().any(IntervalSet::is_empty)
    }

    /// Constraint at time `t`; all of R when `t` is not in the partition.
    pub fn constraint_at(&self, t: &Rational) -> IntervalSet {
        match self.times.binary_search(t) {
            Ok(i) if i > 0 => self.sets[i - 1].clone(),
            _ => IntervalSet::whole_line(),
        }
    }

    pub fn contains(&self, path: &SampledPath) -> Result<bool> {
        for (t, s) in self.times[1..].iter().zip(&self.sets) {
            if !s.contains_f64(path.value_at(t)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn merged_times(&self, other: &Cylinder) -> Vec<Rational> {
        let mut t: Vec<Rational> = self.times.iter().chain(&other.times).cloned().collect();
        t.sort();
        t.dedup();
        t
    }

    /// Intersection over the merged partition: `B_j` where only `self`
    /// constrains, `C_k` where only `other` does, `B_j n C_k` on shared times.
    pub fn intersect(&self, other: &Cylinder) -> Cylinder {
        let times = self.merged_times(other);
        let sets = times[1..]
            .iter()
            .map(|t| self.constraint_at(t).intersect(&other.constraint_at(t)))
            .collect();
        Cylinder { times, sets }.reduced()
    }

    /// Disjoint cylinders whose union is the complement of `self`:
    /// the k-th piece keeps `B_1..B_{k-1}` and puts `R \ B_k` at `t_k`.
    pub fn complement_parts(&self) -> Vec<Cylinder> {
        let mut out = Vec::new();
        for k in 0..self.sets.len() {
            let comp = self.sets[k].complement();
            if comp.is_empty() {
                continue;
            }
            let sets = (0..self.sets.len())
                .map(|j| match j.cmp(&k) {
                    std::cmp::Ordering::Less => self.sets[j].clone(),
                    std::cmp::Ordering::Equal => comp.clone(),
                    std::cmp::Ordering::Greater => IntervalSet::whole_line(),
                })
                .collect();
            let c = Cylinder {
                times: self.times.clone(),
                sets,
            }
            .reduced();
            if !c.is_empty() {
                out.push(c);
            }
        }
        out
    }

    /// `self \ other` as a disjoint family. A single time constrained in
    /// `other` gives at most one cylinder with `B_j \ C_k` there.
    pub fn difference(&self, other: &Cylinder) -> Vec<Cylinder> {
        other
            .complement_parts()
            .iter()
            .map(|c| self.intersect(c))
            .filter(|c| !c.is_empty())
            .collect()
    }

    /// Some path inside the cylinder, sampled on its partition.
    pub fn witness(&self) -> Option<SampledPath> {
        if self.is_empty() {
            return None;
        }
        let values = self
            .sets
            .iter()
            .map(|s| {
                let w = s.witness().unwrap_or_else(Rational::zero);
                // midpoint of the first interval is safer than an endpoint under f64
                let first = &s.intervals()[0];
                match (&first.lo, &first.hi) {
                    (ExtReal::Finite(a), ExtReal::Finite(b)) => rational::to_f64(&((a + b) / rational::int(2))),
                    _ => rational::to_f64(&w) + if first.lo.is_finite() { 0.5 } else { -0.5 },
                }
            })
            .collect();
        SampledPath::new(self.times[1..].to_vec(), values).ok()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "times": self.times.iter().map(rational::rational_to_json).collect::<Vec<_>>(),
            "sets": self.sets.iter().map(borel_to_json).collect::<Vec<_>>(),
        })
    }

    /// Accepts `times` with or without the leading 0.
    pub fn from_json(v: &Value) -> Result<Self> {
        let times = v
            .get("times")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Malformed("cylinder needs a times array".into()))?
            .iter()
            .map(rational::rational_from_json)
            .collect::<Result<Vec<_>>>()?;
        let mut times = times;
        if times.first().map(|t| !t.is_zero()).unwrap_or(true) {
            times.insert(0, Rational::zero());
        }
        let sets = v
            .get("sets")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Malformed("cylinder needs a sets array".into()))?
            .iter()
            .map(borel_from_json)
            .collect::<Result<Vec<_>>>()?;
        Cylinder::new(times, sets)
    }
}

fn endpoint_json(e: &ExtReal) -> Value {
    match e {
        ExtReal::Finite(r) if r.is_integer() => match num_traits::ToPrimitive::to_i64(r.numer()) {
            Some(n) => json!(n),
            None => json!(r.numer().to_string()),
        },
        ExtReal::Finite(r) => json!(rational::display(r)),
        other => other.to_json(),
    }
}

/// A Borel set as `[lo, hi]`, or a list of such pairs for unions.
/// Endpoints are numbers, strings such as `"1/3"`, or `"-inf"`/`"+inf"`.
pub fn borel_to_json(s: &IntervalSet) -> Value {
    let ivs: Vec<Value> = s
        .intervals()
        .iter()
        .map(|i| json!([endpoint_json(&i.lo), endpoint_json(&i.hi)]))
        .collect();
    if ivs.len() == 1 {
        ivs.into_iter().next().unwrap()
    } else {
        Value::Array(ivs)
    }
}

fn is_scalar(v: &Value) -> bool {
    v.is_number() || v.is_string()
}

pub fn borel_from_json(v: &Value) -> Result<IntervalSet> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Malformed(format!("Borel set must be an array, got {v}")))?;
    let pieces: Vec<&Value> = if arr.len() == 2 && arr.iter().all(is_scalar) {
        vec![v]
    } else {
        arr.iter().collect()
    };
    let intervals = pieces
        .into_iter()
        .map(|p| {
            let pr = p
                .as_array()
                .filter(|a| a.len() == 2 && a.iter().all(is_scalar))
                .ok_or_else(|| Error::Malformed(format!("bad interval {p}")))?;
            Interval::new(ExtReal::from_json(&pr[0])?, ExtReal::from_json(&pr[1])?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IntervalSet::from_intervals(intervals))
}

impl fmt::Display for Cylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.times[1..]
            .iter()
            .zip(&self.sets)
            .map(|(t, s)| format!("f({}) in {s}", rational::display(t)))
            .collect();
        write!(f, "D[{}]", parts.join(", "))
    }
}

/// A ring element of path space: a finite disjoint union of cylinders.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CylinderUnion {
    parts: Vec<Cylinder>,
}

impl CylinderUnion {
    pub fn empty() -> Self {
        CylinderUnion::default()
    }

    pub fn whole() -> Self {
        CylinderUnion::single(Cylinder::whole())
    }

    pub fn single(c: Cylinder) -> Self {
        if c.is_empty() {
            CylinderUnion::empty()
        } else {
            CylinderUnion { parts: vec![c] }
        }
    }

    /// Disjoint union of arbitrary (possibly overlapping) cylinders.
    pub fn from_cylinders(cs: impl IntoIterator<Item = Cylinder>) -> Self {
        cs.into_iter().fold(CylinderUnion::empty(), |acc, c| {
            acc.union(&CylinderUnion::single(c))
        })
    }

    pub fn parts(&self) -> &[Cylinder] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, path: &SampledPath) -> Result<bool> {
        for c in &self.parts {
            if c.contains(path)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn intersect(&self, other: &CylinderUnion) -> CylinderUnion {
        let parts = self
            .parts
            .iter()
            .flat_map(|a| other.parts.iter().map(move |b| a.intersect(b)))
            .filter(|c| !c.is_empty())
            .collect();
        CylinderUnion { parts }
    }

    pub fn difference(&self, other: &CylinderUnion) -> CylinderUnion {
        let mut parts = Vec::new();
        for a in &self.parts {
            let mut rest = vec![a.clone()];
            for b in &other.parts {
                rest = rest.iter().flat_map(|r| r.difference(b)).collect();
                if rest.is_empty() {
                    break;
                }
            }
            parts.extend(rest);
        }
        CylinderUnion { parts }
    }

    pub fn union(&self, other: &CylinderUnion) -> CylinderUnion {
        let mut parts = self.parts.clone();
        parts.extend(other.difference(self).parts);
        CylinderUnion { parts }
    }

    pub fn combine(&self, op: BoolOp, other: &CylinderUnion) -> CylinderUnion {
        match op {
            BoolOp::Union => self.union(other),
            BoolOp::Intersect => self.intersect(other),
            BoolOp::Difference => self.difference(other),
        }
    }

    pub fn witness(&self) -> Option<SampledPath> {
        self.parts.first().and_then(Cylinder::witness)
    }

    /// Every partition time used by some part.
    pub fn all_times(&self) -> Vec<Rational> {
        let mut t: Vec<Rational> = self
            .parts
            .iter()
            .flat_map(|c| c.times[1..].iter().cloned())
            .collect();
        t.sort();
        t.dedup();
        t
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.parts.iter().map(Cylinder::to_json).collect())
    }

    /// A list of cylinders; overlapping input is made disjoint.
    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Malformed("expected a list of cylinders".into()))?;
        let cs = arr.iter().map(Cylinder::from_json).collect::<Result<Vec<_>>>()?;
        Ok(CylinderUnion::from_cylinders(cs))
    }
}

impl fmt::Display for CylinderUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self.parts.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(" u "))
    }
}
