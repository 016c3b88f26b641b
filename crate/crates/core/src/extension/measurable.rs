use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{ExtReal, SimpleFunction, VectorLattice};
use crate::rational::{self, Rational};
use crate::rings::{Interval, IntervalSet, Point, RingSet, Universe};

/// An extended-real function given through its strict level sets.
///
/// `above(c)` is `{x > c}` for `c >= 0` and `below(c)` is `{x < c}` for
/// `c <= 0`; both must be ring elements. Since the level set at
/// `k 2^-n` depends only on the threshold, `E_{j,n} = E_{2j,n+1}` holds by
/// construction and only monotonicity in `c` can fail.
pub trait MeasurableFunction: Send + Sync {
    fn universe(&self) -> Universe;
    fn value_at(&self, p: &Point) -> Result<ExtReal>;
    fn above(&self, c: &Rational) -> Result<RingSet>;
    fn below(&self, c: &Rational) -> Result<RingSet>;

    /// Every finite value the function takes, when there are finitely many.
    fn level_breaks(&self) -> Option<Vec<Rational>> {
        None
    }

    /// Points where the function is compared against others.
    fn probe_points(&self) -> Vec<Point>;

    fn is_nonnegative(&self) -> Result<bool> {
        for p in self.probe_points() {
            if self.value_at(&p)? < ExtReal::zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn as_simple(&self) -> Option<SimpleFunction> {
        None
    }
}

fn require_nonneg(c: &Rational) -> Result<()> {
    if c.is_negative() {
        return Err(Error::Domain(format!(
            "{{x > {}}} is not a ring element",
            rational::display(c)
        )));
    }
    Ok(())
}

fn require_nonpos(c: &Rational) -> Result<()> {
    if c.is_positive() {
        return Err(Error::Domain(format!(
            "{{x < {}}} is not a ring element",
            rational::display(c)
        )));
    }
    Ok(())
}

impl MeasurableFunction for SimpleFunction {
    fn universe(&self) -> Universe {
        SimpleFunction::universe(self).clone()
    }

    fn value_at(&self, p: &Point) -> Result<ExtReal> {
        self.eval(p).map(ExtReal::Finite)
    }

    fn above(&self, c: &Rational) -> Result<RingSet> {
        self.level_set(c, true)
    }

    fn below(&self, c: &Rational) -> Result<RingSet> {
        self.level_set(c, false)
    }

    fn level_breaks(&self) -> Option<Vec<Rational>> {
        Some(self.range())
    }

    fn probe_points(&self) -> Vec<Point> {
        VectorLattice::probe_points(self)
    }

    fn is_nonnegative(&self) -> Result<bool> {
        Ok(SimpleFunction::is_nonnegative(self))
    }

    fn as_simple(&self) -> Option<SimpleFunction> {
        Some(self.clone())
    }
}

/// Arbitrary extended-real values on a finite universe.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteFunction {
    universe: Universe,
    values: Vec<ExtReal>,
}

impl FiniteFunction {
    pub fn new(universe: &Universe, values: Vec<ExtReal>) -> Result<Self> {
        let n = universe
            .size()
            .ok_or_else(|| Error::UniverseMismatch(format!("{universe} is not finite")))?;
        if values.len() != n {
            return Err(Error::Domain(format!("{} values for {n} points", values.len())));
        }
        Ok(FiniteFunction {
            universe: universe.clone(),
            values,
        })
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    fn select(&self, keep: impl Fn(&ExtReal) -> bool) -> Result<RingSet> {
        RingSet::finite(
            &self.universe,
            self.values
                .iter()
                .enumerate()
                .filter(|(_, v)| keep(v))
                .map(|(i, _)| i),
        )
    }
}

impl MeasurableFunction for FiniteFunction {
    fn universe(&self) -> Universe {
        self.universe.clone()
    }

    fn value_at(&self, p: &Point) -> Result<ExtReal> {
        match p {
            Point::Atom(i) if *i < self.values.len() => Ok(self.values[*i].clone()),
            other => Err(Error::Domain(format!("{other} is not a point of {}", self.universe))),
        }
    }

    fn above(&self, c: &Rational) -> Result<RingSet> {
        self.select(|v| v.cmp_rational(c).is_gt())
    }

    fn below(&self, c: &Rational) -> Result<RingSet> {
        self.select(|v| v.cmp_rational(c).is_lt())
    }

    fn level_breaks(&self) -> Option<Vec<Rational>> {
        let mut v: Vec<Rational> = self.values.iter().filter_map(|x| x.finite().cloned()).collect();
        v.push(Rational::zero());
        v.sort();
        v.dedup();
        Some(v)
    }

    fn probe_points(&self) -> Vec<Point> {
        (0..self.values.len()).map(Point::Atom).collect()
    }

    fn as_simple(&self) -> Option<SimpleFunction> {
        let vals: Option<Vec<Rational>> = self.values.iter().map(|v| v.finite().cloned()).collect();
        SimpleFunction::from_values(&self.universe, &vals?).ok()
    }
}

/// `slope * t + intercept` on `[lo, hi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineCell {
    pub lo: Rational,
    pub hi: Rational,
    pub slope: Rational,
    pub intercept: Rational,
}

impl AffineCell {
    fn at(&self, t: &Rational) -> Rational {
        &self.slope * t + &self.intercept
    }

    /// `{t in [lo, hi) : f(t) > c}` (or `< c`), realized with closed-up
    /// endpoints; the difference is at most one point.
    fn strict_set(&self, c: &Rational, above: bool) -> Option<Interval> {
        let (lo, hi) = if self.slope.is_zero() {
            let hit = if above { self.intercept > *c } else { self.intercept < *c };
            if !hit {
                return None;
            }
            (self.lo.clone(), self.hi.clone())
        } else {
            let root = (c - &self.intercept) / &self.slope;
            // f > c to the right of the root when the slope is positive
            let right = self.slope.is_positive() == above;
            if right {
                (rational::max(&self.lo, &root), self.hi.clone())
            } else {
                (self.lo.clone(), rational::min(&self.hi, &root))
            }
        };
        (lo < hi).then(|| Interval::finite(lo, hi))
    }
}

/// A compactly supported piecewise-affine function on the line, with
/// optional isolated point values ("spikes") that level sets ignore.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PiecewiseAffine {
    cells: Vec<AffineCell>,
    spikes: Vec<(Rational, Rational)>,
}

impl PiecewiseAffine {
    /// Cells must be sorted and disjoint with `lo < hi`.
    pub fn new(cells: Vec<AffineCell>) -> Result<Self> {
        for c in &cells {
            if c.lo >= c.hi {
                return Err(Error::Domain(format!(
                    "empty cell [{}, {})",
                    rational::display(&c.lo),
                    rational::display(&c.hi)
                )));
            }
        }
        if cells.windows(2).any(|w| w[0].hi > w[1].lo) {
            return Err(Error::Domain("cells must be sorted and disjoint".into()));
        }
        Ok(PiecewiseAffine {
            cells,
            spikes: Vec::new(),
        })
    }

    /// `x(t) = t` on `[a, b)`, zero elsewhere.
    pub fn identity_on(a: Rational, b: Rational) -> Result<Self> {
        Self::new(vec![AffineCell {
            lo: a,
            hi: b,
            slope: rational::int(1),
            intercept: Rational::zero(),
        }])
    }

    /// `c` on `[a, b)`, zero elsewhere.
    pub fn constant_on(c: Rational, a: Rational, b: Rational) -> Result<Self> {
        Self::new(vec![AffineCell {
            lo: a,
            hi: b,
            slope: Rational::zero(),
            intercept: c,
        }])
    }

    /// The value `v` at the single point `t`, zero elsewhere.
    pub fn spike(t: Rational, v: Rational) -> Self {
        PiecewiseAffine {
            cells: Vec::new(),
            spikes: vec![(t, v)],
        }
    }

    pub fn cells(&self) -> &[AffineCell] {
        &self.cells
    }

    fn real(t: &Point) -> Result<&Rational> {
        match t {
            Point::Real(t) => Ok(t),
            other => Err(Error::Domain(format!("{other} is not a real number"))),
        }
    }

    fn level(&self, c: &Rational, above: bool) -> RingSet {
        let ivs = self.cells.iter().filter_map(|cell| cell.strict_set(c, above));
        RingSet::Real(IntervalSet::from_intervals(ivs))
    }
}

impl MeasurableFunction for PiecewiseAffine {
    fn universe(&self) -> Universe {
        Universe::RealLine
    }

    fn value_at(&self, p: &Point) -> Result<ExtReal> {
        let t = Self::real(p)?;
        if let Some((_, v)) = self.spikes.iter().find(|(s, _)| s == t) {
            return Ok(ExtReal::Finite(v.clone()));
        }
        let v = self
            .cells
            .iter()
            .find(|c| &c.lo <= t && t < &c.hi)
            .map(|c| c.at(t))
            .unwrap_or_else(Rational::zero);
        Ok(ExtReal::Finite(v))
    }

    fn above(&self, c: &Rational) -> Result<RingSet> {
        require_nonneg(c)?;
        Ok(self.level(c, true))
    }

    fn below(&self, c: &Rational) -> Result<RingSet> {
        require_nonpos(c)?;
        Ok(self.level(c, false))
    }

    fn level_breaks(&self) -> Option<Vec<Rational>> {
        if self.cells.iter().any(|c| !c.slope.is_zero()) {
            return None;
        }
        let mut v: Vec<Rational> = self
            .cells
            .iter()
            .map(|c| c.intercept.clone())
            .chain(self.spikes.iter().map(|(_, v)| v.clone()))
            .collect();
        v.push(Rational::zero());
        v.sort();
        v.dedup();
        Some(v)
    }

    fn probe_points(&self) -> Vec<Point> {
        let mut pts: Vec<Rational> = self
            .cells
            .iter()
            .flat_map(|c| [c.lo.clone(), (&c.lo + &c.hi) / rational::int(2), c.hi.clone()])
            .chain(self.spikes.iter().map(|(t, _)| t.clone()))
            .collect();
        pts.sort();
        pts.dedup();
        pts.into_iter().map(Point::Real).collect()
    }

    fn is_nonnegative(&self) -> Result<bool> {
        let cells_ok = self
            .cells
            .iter()
            .all(|c| !c.at(&c.lo).is_negative() && !c.at(&c.hi).is_negative());
        Ok(cells_ok && self.spikes.iter().all(|(_, v)| !v.is_negative()))
    }
}

type ValueFn = Arc<dyn Fn(&Point) -> Result<ExtReal> + Send + Sync>;
type LevelFn = Arc<dyn Fn(&Rational) -> Result<RingSet> + Send + Sync>;

/// A function given by user-supplied closures, with no consistency
/// guarantees; the level-set machinery checks what it can.
#[derive(Clone)]
pub struct OracleFunction {
    pub universe: Universe,
    pub value: ValueFn,
    pub above: LevelFn,
    pub below: LevelFn,
    pub probes: Vec<Point>,
}

impl fmt::Debug for OracleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OracleFunction").field("universe", &self.universe).finish()
    }
}

impl MeasurableFunction for OracleFunction {
    fn universe(&self) -> Universe {
        self.universe.clone()
    }
    fn value_at(&self, p: &Point) -> Result<ExtReal> {
        (self.value)(p)
    }
    fn above(&self, c: &Rational) -> Result<RingSet> {
        (self.above)(c)
    }
    fn below(&self, c: &Rational) -> Result<RingSet> {
        (self.below)(c)
    }
    fn probe_points(&self) -> Vec<Point> {
        self.probes.clone()
    }
}

fn merged_breaks(a: Option<Vec<Rational>>, b: Option<Vec<Rational>>) -> Option<Vec<Rational>> {
    let mut v = a?;
    v.extend(b?);
    v.sort();
    v.dedup();
    Some(v)
}

fn merged_probes(a: &dyn MeasurableFunction, b: &dyn MeasurableFunction) -> Vec<Point> {
    let mut p = a.probe_points();
    for q in b.probe_points() {
        if !p.contains(&q) {
            p.push(q);
        }
    }
    p
}

/// `a ^ b`
pub struct Meet<'a>(pub &'a dyn MeasurableFunction, pub &'a dyn MeasurableFunction);

impl MeasurableFunction for Meet<'_> {
    fn universe(&self) -> Universe {
        self.0.universe()
    }
    fn value_at(&self, p: &Point) -> Result<ExtReal> {
        Ok(ExtReal::min(&self.0.value_at(p)?, &self.1.value_at(p)?))
    }
    fn above(&self, c: &Rational) -> Result<RingSet> {
        self.0.above(c)?.intersect(&self.1.above(c)?)
    }
    fn below(&self, c: &Rational) -> Result<RingSet> {
        self.0.below(c)?.union(&self.1.below(c)?)
    }
    fn level_breaks(&self) -> Option<Vec<Rational>> {
        merged_breaks(self.0.level_breaks(), self.1.level_breaks())
    }
    fn probe_points(&self) -> Vec<Point> {
        merged_probes(self.0, self.1)
    }
}

/// `a v b`
pub struct Join<'a>(pub &'a dyn MeasurableFunction, pub &'a dyn MeasurableFunction);

impl MeasurableFunction for Join<'_> {
    fn universe(&self) -> Universe {
        self.0.universe()
    }
    fn value_at(&self, p: &Point) -> Result<ExtReal> {
        Ok(ExtReal::max(&self.0.value_at(p)?, &self.1.value_at(p)?))
    }
    fn above(&self, c: &Rational) -> Result<RingSet> {
        self.0.above(c)?.union(&self.1.above(c)?)
    }
    fn below(&self, c: &Rational) -> Result<RingSet> {
        self.0.below(c)?.intersect(&self.1.below(c)?)
    }
    fn level_breaks(&self) -> Option<Vec<Rational>> {
        merged_breaks(self.0.level_breaks(), self.1.level_breaks())
    }
    fn probe_points(&self) -> Vec<Point> {
        merged_probes(self.0, self.1)
    }
}

/// `-a`
pub struct Neg<'a>(pub &'a dyn MeasurableFunction);

impl MeasurableFunction for Neg<'_> {
    fn universe(&self) -> Universe {
        self.0.universe()
    }
    fn value_at(&self, p: &Point) -> Result<ExtReal> {
        Ok(self.0.value_at(p)?.neg())
    }
    fn above(&self, c: &Rational) -> Result<RingSet> {
        self.0.below(&-c)
    }
    fn below(&self, c: &Rational) -> Result<RingSet> {
        self.0.above(&-c)
    }
    fn level_breaks(&self) -> Option<Vec<Rational>> {
        let mut v: Vec<Rational> = self.0.level_breaks()?.into_iter().map(|r| -r).collect();
        v.sort();
        Some(v)
    }
    fn probe_points(&self) -> Vec<Point> {
        self.0.probe_points()
    }
}

/// `a v 0`
pub struct PosPart<'a>(pub &'a dyn MeasurableFunction);

impl MeasurableFunction for PosPart<'_> {
    fn universe(&self) -> Universe {
        self.0.universe()
    }
    fn value_at(&self, p: &Point) -> Result<ExtReal> {
        Ok(ExtReal::max(&self.0.value_at(p)?, &ExtReal::zero()))
    }
    fn above(&self, c: &Rational) -> Result<RingSet> {
        require_nonneg(c)?;
        self.0.above(c)
    }
    fn below(&self, c: &Rational) -> Result<RingSet> {
        require_nonpos(c)?;
        Ok(RingSet::empty(&self.0.universe()))
    }
    fn level_breaks(&self) -> Option<Vec<Rational>> {
        let mut v: Vec<Rational> = self
            .0
            .level_breaks()?
            .into_iter()
            .filter(|r| !r.is_negative())
            .collect();
        v.push(Rational::zero());
        v.sort();
        v.dedup();
        Some(v)
    }
    fn probe_points(&self) -> Vec<Point> {
        self.0.probe_points()
    }
    fn is_nonnegative(&self) -> Result<bool> {
        Ok(true)
    }
}

/// `|a|`
pub struct AbsPart<'a>(pub &'a dyn MeasurableFunction);

impl MeasurableFunction for AbsPart<'_> {
    fn universe(&self) -> Universe {
        self.0.universe()
    }
    fn value_at(&self, p: &Point) -> Result<ExtReal> {
        Ok(self.0.value_at(p)?.abs())
    }
    fn above(&self, c: &Rational) -> Result<RingSet> {
        require_nonneg(c)?;
        self.0.above(c)?.union(&self.0.below(&-c)?)
    }
    fn below(&self, c: &Rational) -> Result<RingSet> {
        require_nonpos(c)?;
        Ok(RingSet::empty(&self.0.universe()))
    }
    fn level_breaks(&self) -> Option<Vec<Rational>> {
        let mut v: Vec<Rational> = self.0.level_breaks()?.into_iter().map(|r| r.abs()).collect();
        v.push(Rational::zero());
        v.sort();
        v.dedup();
        Some(v)
    }
    fn probe_points(&self) -> Vec<Point> {
        self.0.probe_points()
    }
    fn is_nonnegative(&self) -> Result<bool> {
        Ok(true)
    }
}
