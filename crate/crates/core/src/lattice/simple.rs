use std::fmt;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use super::{ExtReal, VectorLattice};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::rings::{Point, RingSet, Universe};

/// One summand `coeff * chi_set`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: Rational,
    pub set: RingSet,
}

/// A finite rational combination of ring-set indicators.
///
/// The canonical form has pairwise disjoint sets and nonzero coefficients,
/// so the zero function is the empty term list.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleFunction {
    universe: Universe,
    terms: Vec<Term>,
    canonical: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeOp {
    Plus,
    Scale,
    Meet,
    Join,
    Abs,
}

impl SimpleFunction {
    pub fn new(universe: &Universe, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            universe.ensure_same(&t.set.universe())?;
        }
        Ok(SimpleFunction {
            universe: universe.clone(),
            terms,
            canonical: false,
        })
    }

    pub fn zero(universe: &Universe) -> Self {
        SimpleFunction {
            universe: universe.clone(),
            terms: Vec::new(),
            canonical: true,
        }
    }

    pub fn indicator(set: &RingSet) -> Self {
        Self::term(Rational::one(), set)
    }

    pub fn term(coeff: Rational, set: &RingSet) -> Self {
        SimpleFunction {
            universe: set.universe(),
            terms: vec![Term {
                coeff,
                set: set.clone(),
            }],
            canonical: false,
        }
    }

    /// Function on a finite universe given by its value at every atom.
    pub fn from_values(universe: &Universe, values: &[Rational]) -> Result<Self> {
        let n = universe
            .size()
            .ok_or_else(|| Error::UniverseMismatch(format!("{universe} is not finite")))?;
        if values.len() != n {
            return Err(Error::Domain(format!("{} values for {n} points", values.len())));
        }
        let terms = values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| {
                Ok(Term {
                    coeff: v.clone(),
                    set: RingSet::finite(universe, [i])?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SimpleFunction {
            universe: universe.clone(),
            terms,
            canonical: true,
        })
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    pub fn is_zero(&self) -> bool {
        self.canonicalize().terms.is_empty()
    }

    /// Canonical form via the disjoint refinement: each new term `c chi_R`
    /// splits every existing cell `B` into `B \ R` and `B n R` and adds the
    /// uncovered remainder `R \ (union of cells)`.
    pub fn canonicalize(&self) -> SimpleFunction {
        if self.canonical {
            return self.clone();
        }
        let mut cells: Vec<Term> = Vec::new();
        for t in &self.terms {
            if t.set.is_empty() {
                continue;
            }
            let mut outside = Vec::with_capacity(cells.len());
            let mut inside = Vec::with_capacity(cells.len());
            let mut covered = RingSet::empty(&self.universe);
            for b in &cells {
                let d = b.set.difference(&t.set).expect("same universe");
                let e = b.set.intersect(&t.set).expect("same universe");
                if !d.is_empty() {
                    outside.push(Term {
                        coeff: b.coeff.clone(),
                        set: d,
                    });
                }
                if !e.is_empty() {
                    inside.push(Term {
                        coeff: &b.coeff + &t.coeff,
                        set: e,
                    });
                }
                covered = covered.union(&b.set).expect("same universe");
            }
            let f = t.set.difference(&covered).expect("same universe");
            outside.extend(inside);
            if !f.is_empty() {
                outside.push(Term {
                    coeff: t.coeff.clone(),
                    set: f,
                });
            }
            cells = outside;
        }
        cells.retain(|c| !c.coeff.is_zero());
        SimpleFunction {
            universe: self.universe.clone(),
            terms: cells,
            canonical: true,
        }
    }

    /// Exact value at `p`.
    pub fn eval(&self, p: &Point) -> Result<Rational> {
        let mut acc = Rational::zero();
        for t in &self.terms {
            if t.set.contains(p)? {
                acc += &t.coeff;
            }
        }
        Ok(acc)
    }

    /// Values at every atom of a finite universe.
    pub fn values(&self) -> Result<Vec<Rational>> {
        let n = self
            .universe
            .size()
            .ok_or_else(|| Error::UniverseMismatch(format!("{} is not finite", self.universe)))?;
        (0..n).map(|i| self.eval(&Point::Atom(i))).collect()
    }

    /// Union of the sets carrying nonzero values.
    pub fn support(&self) -> RingSet {
        self.canonicalize()
            .terms
            .iter()
            .fold(RingSet::empty(&self.universe), |acc, t| {
                acc.union(&t.set).expect("same universe")
            })
    }

    /// `{t : x(t) > c}` for `c >= 0` and `{t : x(t) < c}` for `c <= 0`;
    /// any other threshold describes a set outside the ring.
    pub fn level_set(&self, c: &Rational, above: bool) -> Result<RingSet> {
        if (above && c.is_negative()) || (!above && c.is_positive()) {
            return Err(Error::Domain(format!(
                "level set at {} is not a ring element",
                rational::display(c)
            )));
        }
        let canon = self.canonicalize();
        canon
            .terms
            .iter()
            .filter(|t| if above { &t.coeff > c } else { &t.coeff < c })
            .try_fold(RingSet::empty(&self.universe), |acc, t| acc.union(&t.set))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.canonicalize().terms.iter().all(|t| !t.coeff.is_negative())
    }

    /// Distinct values taken, including 0.
    pub fn range(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = self
            .canonicalize()
            .terms
            .iter()
            .map(|t| t.coeff.clone())
            .collect();
        v.push(Rational::zero());
        v.sort();
        v.dedup();
        v
    }

    /// Pointwise equality as functions.
    pub fn same_function(&self, other: &SimpleFunction) -> Result<bool> {
        Ok(self.minus(other)?.canonicalize().terms.is_empty())
    }

    /// `self <= other` everywhere.
    pub fn le(&self, other: &SimpleFunction) -> Result<bool> {
        Ok(other.minus(self)?.is_nonnegative())
    }

    /// Common disjoint refinement of two functions: cells carrying the
    /// value pair `(x, y)`, with `0` where a function vanishes.
    fn refine_pair(&self, other: &SimpleFunction) -> Result<Vec<(Rational, Rational, RingSet)>> {
        self.universe.ensure_same(&other.universe)?;
        let a = self.canonicalize();
        let b = other.canonicalize();
        let mut cells = Vec::new();
        let sup_a = a.support();
        let sup_b = b.support();
        for ta in &a.terms {
            for tb in &b.terms {
                let s = ta.set.intersect(&tb.set)?;
                if !s.is_empty() {
                    cells.push((ta.coeff.clone(), tb.coeff.clone(), s));
                }
            }
            let s = ta.set.difference(&sup_b)?;
            if !s.is_empty() {
                cells.push((ta.coeff.clone(), Rational::zero(), s));
            }
        }
        for tb in &b.terms {
            let s = tb.set.difference(&sup_a)?;
            if !s.is_empty() {
                cells.push((Rational::zero(), tb.coeff.clone(), s));
            }
        }
        Ok(cells)
    }

    fn pointwise(&self, other: &SimpleFunction, f: impl Fn(&Rational, &Rational) -> Rational) -> Result<SimpleFunction> {
        let terms = self
            .refine_pair(other)?
            .into_iter()
            .map(|(x, y, set)| Term { coeff: f(&x, &y), set })
            .filter(|t| !t.coeff.is_zero())
            .collect();
        Ok(SimpleFunction {
            universe: self.universe.clone(),
            terms,
            canonical: true,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "universe": self.universe.to_json(),
            "terms": self.terms.iter().map(|t| json!({
                "coeff": rational::rational_to_json(&t.coeff),
                "set": t.set.to_json(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Malformed("simple function needs a terms array".into()))?
            .iter()
            .map(|t| {
                let coeff = rational::rational_from_json(
                    t.get("coeff")
                        .ok_or_else(|| Error::Malformed("term needs a coeff".into()))?,
                )?;
                let set = RingSet::from_json(
                    t.get("set")
                        .ok_or_else(|| Error::Malformed("term needs a set".into()))?,
                )?;
                Ok(Term { coeff, set })
            })
            .collect::<Result<Vec<_>>>()?;
        let universe = match (v.get("universe"), terms.first()) {
            (Some(u), _) => Universe::from_json(u)?,
            (None, Some(t)) => t.set.universe(),
            (None, None) => {
                return Err(Error::Malformed(
                    "an empty simple function needs an explicit universe".into(),
                ))
            }
        };
        SimpleFunction::new(&universe, terms)
    }
}

impl VectorLattice for SimpleFunction {
    fn zero_like(&self) -> Self {
        SimpleFunction::zero(&self.universe)
    }

    fn plus(&self, other: &Self) -> Result<Self> {
        self.pointwise(other, |a, b| a + b)
    }

    fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return SimpleFunction::zero(&self.universe);
        }
        SimpleFunction {
            universe: self.universe.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: &t.coeff * c,
                    set: t.set.clone(),
                })
                .collect(),
            canonical: self.canonical,
        }
    }

    fn meet(&self, other: &Self) -> Result<Self> {
        self.pointwise(other, rational::min)
    }

    fn join(&self, other: &Self) -> Result<Self> {
        self.pointwise(other, rational::max)
    }

    fn abs(&self) -> Self {
        let c = self.canonicalize();
        SimpleFunction {
            universe: c.universe,
            terms: c
                .terms
                .into_iter()
                .map(|t| Term {
                    coeff: t.coeff.abs(),
                    set: t.set,
                })
                .collect(),
            canonical: true,
        }
    }

    fn value_at(&self, p: &Point) -> Result<Rational> {
        self.eval(p)
    }

    fn probe_points(&self) -> Vec<Point> {
        match &self.universe {
            Universe::Finite(labels) => (0..labels.len()).map(Point::Atom).collect(),
            Universe::RealLine => {
                let mut cuts: Vec<Rational> = self
                    .terms
                    .iter()
                    .flat_map(|t| match &t.set {
                        RingSet::Real(s) => s
                            .intervals()
                            .iter()
                            .flat_map(|i| [i.lo.finite().cloned(), i.hi.finite().cloned()])
                            .flatten()
                            .collect::<Vec<_>>(),
                        _ => Vec::new(),
                    })
                    .collect();
                cuts.sort();
                cuts.dedup();
                cuts.into_iter().map(Point::Real).collect()
            }
            Universe::PathSpace => self
                .terms
                .iter()
                .filter_map(|t| t.set.witness())
                .collect(),
        }
    }
}

impl fmt::Display for SimpleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| format!("{}*chi{}", rational::display(&t.coeff), t.set))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Free-function form of [`SimpleFunction::canonicalize`].
pub fn canonicalize(x: &SimpleFunction) -> SimpleFunction {
    x.canonicalize()
}

/// Exact value of `x` at `t` as an extended real.
pub fn eval(x: &SimpleFunction, t: &Point) -> Result<ExtReal> {
    x.eval(t).map(ExtReal::Finite)
}

/// Applies a lattice operation. `Scale` takes `c`, the binary operations
/// take `y`; every result is canonical.
pub fn lattice_op(
    op: LatticeOp,
    x: &SimpleFunction,
    y: Option<&SimpleFunction>,
    c: Option<&Rational>,
) -> Result<SimpleFunction> {
    let need_y = || y.ok_or_else(|| Error::Precondition(format!("{op:?} needs a second operand")));
    match op {
        LatticeOp::Plus => x.plus(need_y()?),
        LatticeOp::Meet => x.meet(need_y()?),
        LatticeOp::Join => x.join(need_y()?),
        LatticeOp::Abs => Ok(x.abs()),
        LatticeOp::Scale => {
            let c = c.ok_or_else(|| Error::Precondition("Scale needs a coefficient".into()))?;
            Ok(x.scale(c).canonicalize())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn chi(a: i64, b: i64) -> SimpleFunction {
        SimpleFunction::indicator(&RingSet::interval(int(a), int(b)))
    }

    fn term(c: i64, a: i64, b: i64) -> Term {
        Term {
            coeff: int(c),
            set: RingSet::interval(int(a), int(b)),
        }
    }

    #[test]
    fn canonicalize_overlapping_indicators() {
        let x = SimpleFunction::new(
            &Universe::RealLine,
            vec![term(1, 0, 2), term(1, 1, 3)],
        )
        .unwrap();
        let c = x.canonicalize();
        assert_eq!(c.terms(), &[term(1, 0, 1), term(2, 1, 2), term(1, 2, 3)]);
    }

    #[test]
    fn single_term_is_fixed() {
        let x = SimpleFunction::term(int(3), &RingSet::interval(int(0), int(1)));
        assert_eq!(x.canonicalize().terms(), x.terms());
    }

    #[test]
    fn cancellation_gives_empty_terms() {
        let a = chi(0, 1);
        let z = a.minus(&a).unwrap();
        assert!(z.canonicalize().terms().is_empty());
    }

    #[test]
    fn lattice_examples() {
        let j = lattice_op(LatticeOp::Join, &chi(0, 1), Some(&chi(0, 1).scale(&int(2))), None).unwrap();
        assert_eq!(j.terms(), &[term(2, 0, 1)]);
        let m = lattice_op(LatticeOp::Meet, &chi(0, 2), Some(&chi(1, 3)), None).unwrap();
        assert_eq!(m.terms(), &[term(1, 1, 2)]);
        let d = chi(0, 1).minus(&chi(0, 1).scale(&int(2))).unwrap();
        assert_eq!(d.abs().terms(), &[term(1, 0, 1)]);
    }

    #[test]
    fn half_open_evaluation() {
        let x = SimpleFunction::new(&Universe::RealLine, vec![term(1, 0, 1), term(2, 1, 2)]).unwrap();
        assert_eq!(x.eval(&Point::Real(int(1))).unwrap(), int(2));
        assert_eq!(x.eval(&Point::Real(rat(1, 2))).unwrap(), int(1));
        assert_eq!(
            SimpleFunction::zero(&Universe::RealLine).eval(&Point::Real(int(7))).unwrap(),
            int(0)
        );
    }

    #[test]
    fn point_outside_universe() {
        let u = Universe::points(2);
        let x = SimpleFunction::indicator(&RingSet::finite(&u, [0]).unwrap());
        assert!(x.eval(&Point::Atom(5)).is_err());
        assert!(x.eval(&Point::Real(int(0))).is_err());
    }

    #[test]
    fn missing_operands() {
        assert!(lattice_op(LatticeOp::Join, &chi(0, 1), None, None).is_err());
        assert!(lattice_op(LatticeOp::Scale, &chi(0, 1), None, None).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let x = SimpleFunction::new(&Universe::RealLine, vec![term(3, 0, 1), term(-1, 0, 2)]).unwrap();
        let back = SimpleFunction::from_json(&x.to_json()).unwrap();
        assert_eq!(back, x);
        let z = SimpleFunction::zero(&Universe::points(3));
        assert_eq!(SimpleFunction::from_json(&z.to_json()).unwrap().universe(), z.universe());
    }
}
