//! Finite unions of half-open intervals `[lo, hi)` with extended endpoints.

use std::fmt;

use crate::error::{Error, Result};
use crate::lattice::ExtReal;
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: ExtReal,
    pub hi: ExtReal,
}

impl Interval {
    pub fn new(lo: ExtReal, hi: ExtReal) -> Result<Self> {
        if lo == ExtReal::PosInf || hi == ExtReal::NegInf {
            return Err(Error::Domain(format!("bad interval endpoints [{lo}, {hi})")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn finite(lo: Rational, hi: Rational) -> Self {
        Interval {
            lo: ExtReal::Finite(lo),
            hi: ExtReal::Finite(hi),
        }
    }

    pub fn contains(&self, t: &Rational) -> bool {
        self.lo.cmp_rational(t).is_le() && self.hi.cmp_rational(t).is_gt()
    }

    pub fn contains_f64(&self, t: f64) -> bool {
        self.lo.to_f64() <= t && t < self.hi.to_f64()
    }

    /// `hi - lo`, infinite for rays.
    pub fn length(&self) -> ExtReal {
        self.hi.ext_add(&self.lo.neg())
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = match &self.lo {
            ExtReal::NegInf => "(-inf".to_string(),
            other => format!("[{other}"),
        };
        write!(f, "{lo}, {})", self.hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoolOp {
    Union,
    Intersect,
    Difference,
}

impl BoolOp {
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            BoolOp::Union => a || b,
            BoolOp::Intersect => a && b,
            BoolOp::Difference => a && !b,
        }
    }
}

/// Canonical finite union of half-open intervals: sorted, pairwise
/// disjoint, non-adjacent and nonempty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    pub fn whole_line() -> Self {
        IntervalSet {
            intervals: vec![Interval {
                lo: ExtReal::NegInf,
                hi: ExtReal::PosInf,
            }],
        }
    }

    /// Canonicalizes an arbitrary list of intervals (overlaps and empty
    /// pieces allowed).
    pub fn from_intervals(raw: impl IntoIterator<Item = Interval>) -> Self {
        let mut v: Vec<Interval> = raw.into_iter().filter(|i| i.lo < i.hi).collect();
        v.sort_by(|a, b| a.lo.cmp(&b.lo).then(a.hi.cmp(&b.hi)));
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn single(lo: Rational, hi: Rational) -> Self {
        IntervalSet::from_intervals([Interval::finite(lo, hi)])
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals
            .iter()
            .all(|i| i.lo.is_finite() && i.hi.is_finite())
    }

    pub fn contains(&self, t: &Rational) -> bool {
        // intervals are sorted: binary search on lo
        let idx = self
            .intervals
            .partition_point(|i| i.lo.cmp_rational(t).is_le());
        idx > 0 && self.intervals[idx - 1].contains(t)
    }

    pub fn contains_f64(&self, t: f64) -> bool {
        self.intervals.iter().any(|i| i.contains_f64(t))
    }

    pub fn length(&self) -> ExtReal {
        ExtReal::sum(self.intervals.iter().map(|i| i.length()).collect::<Vec<_>>().iter())
    }

    pub fn combine(&self, op: BoolOp, other: &IntervalSet) -> IntervalSet {
        let mut cuts: Vec<&ExtReal> = self
            .intervals
            .iter()
            .chain(other.intervals.iter())
            .flat_map(|i| [&i.lo, &i.hi])
            .collect();
        cuts.sort();
        cuts.dedup();
        let mut out = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if op.apply(self.covers_from(lo), other.covers_from(lo)) {
                out.push(Interval {
                    lo: lo.clone(),
                    hi: hi.clone(),
                });
            }
        }
        IntervalSet::from_intervals(out)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        self.combine(BoolOp::Union, other)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        self.combine(BoolOp::Intersect, other)
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        self.combine(BoolOp::Difference, other)
    }

    pub fn complement(&self) -> IntervalSet {
        IntervalSet::whole_line().difference(self)
    }

    /// Whether the elementary segment starting at cut point `e` lies in the set.
    fn covers_from(&self, e: &ExtReal) -> bool {
        self.intervals.iter().any(|i| &i.lo <= e && e < &i.hi)
    }

    /// Some point of the intersection, when nonempty.
    pub fn witness(&self) -> Option<Rational> {
        let first = self.intervals.first()?;
        Some(match (&first.lo, &first.hi) {
            (ExtReal::Finite(lo), _) => lo.clone(),
            (ExtReal::NegInf, ExtReal::Finite(hi)) => hi - rational::int(1),
            _ => rational::int(0),
        })
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self.intervals.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join(" u "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn iv(a: i64, b: i64) -> IntervalSet {
        IntervalSet::single(int(a), int(b))
    }

    #[test]
    fn merges_overlapping_and_adjacent() {
        let s = IntervalSet::from_intervals([
            Interval::finite(int(2), int(3)),
            Interval::finite(int(0), int(1)),
            Interval::finite(int(1), int(2)),
            Interval::finite(int(5), int(5)),
        ]);
        assert_eq!(s, iv(0, 3));
    }

    #[test]
    fn boolean_examples() {
        assert_eq!(iv(0, 2).union(&iv(1, 3)), iv(0, 3));
        assert_eq!(
            iv(0, 3).difference(&iv(1, 2)),
            IntervalSet::from_intervals([
                Interval::finite(int(0), int(1)),
                Interval::finite(int(2), int(3))
            ])
        );
        assert!(iv(0, 1).intersect(&IntervalSet::empty()).is_empty());
    }

    #[test]
    fn rays_and_complement() {
        let pos = IntervalSet::from_intervals([Interval::new(ExtReal::zero(), ExtReal::PosInf).unwrap()]);
        let neg = pos.complement();
        assert_eq!(
            neg.intervals(),
            &[Interval::new(ExtReal::NegInf, ExtReal::zero()).unwrap()]
        );
        assert!(neg.contains(&rat(-1, 2)));
        assert!(!neg.contains(&int(0)));
        assert_eq!(pos.union(&neg), IntervalSet::whole_line());
        assert_eq!(pos.length(), ExtReal::PosInf);
    }

    #[test]
    fn half_open_membership() {
        let s = iv(0, 1);
        assert!(s.contains(&int(0)));
        assert!(!s.contains(&int(1)));
    }
}
