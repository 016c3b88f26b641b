//! Elementary integrals on simple functions, their axioms, and the
//! decomposition of a signed functional into positive parts.

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::extension::MonotoneSequence;
use crate::lattice::{ExtReal, SimpleFunction, VectorLattice};
use crate::rational::{self, Rational};
use crate::rings::{PreMeasure, SignedPreMeasure, Universe};

/// A real-valued linear functional on a lattice of functions `F`.
pub trait Functional<F>: Send + Sync {
    fn apply(&self, x: &F) -> Result<Rational>;
}

/// A functional with a monotone bound `M` on nonnegative arguments such
/// that `|S(x)| <= M(|x|)`.
pub trait Bounded<F>: Functional<F> {
    fn bound(&self, x: &F) -> Result<Rational>;
}

/// `I(sum c_i chi_{R_i}) = sum c_i mu(R_i)` for a pre-measure `mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementaryIntegral {
    measure: PreMeasure,
}

impl ElementaryIntegral {
    pub fn new(measure: PreMeasure) -> Self {
        ElementaryIntegral { measure }
    }

    /// Riemann integral of step functions on the line.
    pub fn length() -> Self {
        Self::new(PreMeasure::Length)
    }

    pub fn counting(universe: &Universe) -> Self {
        Self::new(PreMeasure::counting(universe))
    }

    pub fn point_masses(universe: &Universe, weights: Vec<ExtReal>) -> Result<Self> {
        Ok(Self::new(PreMeasure::point_masses(universe, weights)?))
    }

    pub fn measure(&self) -> &PreMeasure {
        &self.measure
    }

    pub fn universe(&self) -> Universe {
        self.measure.universe()
    }

    /// Integrates the canonical form, so the value does not depend on how
    /// `x` was written down.
    pub fn integrate_simple(&self, x: &SimpleFunction) -> Result<Rational> {
        self.universe().ensure_same(x.universe())?;
        let canon = x.canonicalize();
        let mut total = Rational::zero();
        for t in canon.terms() {
            match self.measure.eval(&t.set)? {
                ExtReal::Finite(m) => total += &t.coeff * m,
                _ => {
                    return Err(Error::Domain(format!(
                        "term {}*chi{} has infinite measure",
                        rational::display(&t.coeff),
                        t.set
                    )))
                }
            }
        }
        Ok(total)
    }
}

impl Functional<SimpleFunction> for ElementaryIntegral {
    fn apply(&self, x: &SimpleFunction) -> Result<Rational> {
        self.integrate_simple(x)
    }
}

impl Bounded<SimpleFunction> for ElementaryIntegral {
    fn bound(&self, x: &SimpleFunction) -> Result<Rational> {
        self.integrate_simple(x)
    }
}

pub fn integrate_simple(i: &ElementaryIntegral, x: &SimpleFunction) -> Result<Rational> {
    i.integrate_simple(x)
}

/// `S(x) = sum_a x(a) nu({a})` for signed point masses on a finite universe.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedFunctional {
    measure: SignedPreMeasure,
}

fn nonnegative_values(x: &SimpleFunction) -> Result<Vec<Rational>> {
    let v = x.values()?;
    if let Some(a) = v.iter().position(|c| c.is_negative()) {
        return Err(Error::Precondition(format!(
            "argument is negative at atom {a} (value {})",
            rational::display(&v[a])
        )));
    }
    Ok(v)
}

impl SignedFunctional {
    pub fn new(universe: &Universe, weights: Vec<Rational>) -> Result<Self> {
        Ok(SignedFunctional {
            measure: SignedPreMeasure::new(universe, weights)?,
        })
    }

    /// Integer weights on the universe `p1..pn`.
    pub fn from_ints(weights: &[i64]) -> Self {
        let u = Universe::points(weights.len());
        Self::new(&u, weights.iter().map(|&w| rational::int(w)).collect()).expect("sizes agree")
    }

    pub fn universe(&self) -> &Universe {
        self.measure.universe()
    }

    pub fn weights(&self) -> &[Rational] {
        self.measure.weights()
    }

    fn dot(&self, w: impl Fn(&Rational) -> Rational, x: &[Rational]) -> Rational {
        self.weights().iter().zip(x).map(|(n, v)| w(n) * v).sum()
    }

    pub fn apply(&self, x: &SimpleFunction) -> Result<Rational> {
        self.universe().ensure_same(x.universe())?;
        Ok(self.dot(Clone::clone, &x.values()?))
    }

    /// `M(x) = sum |nu_a| x(a)` for `x >= 0`.
    pub fn bound(&self, x: &SimpleFunction) -> Result<Rational> {
        self.universe().ensure_same(x.universe())?;
        Ok(self.dot(|n| n.abs(), &nonnegative_values(x)?))
    }

    /// `P(x) = sup { S(phi) : 0 <= phi <= x }`, attained at the atoms where
    /// `nu` is positive.
    pub fn positive_part(&self, x: &SimpleFunction) -> Result<Rational> {
        self.universe().ensure_same(x.universe())?;
        Ok(self.dot(|n| rational::max(n, &Rational::zero()), &nonnegative_values(x)?))
    }

    /// The same supremum by enumerating all `phi` with `phi(a)` in
    /// `{0, x(a)}`. Exponential; refuses more than 20 atoms.
    pub fn positive_part_bruteforce(&self, x: &SimpleFunction) -> Result<Rational> {
        self.universe().ensure_same(x.universe())?;
        let v = nonnegative_values(x)?;
        if v.len() > 20 {
            return Err(Error::Precondition(format!("{} atoms is too many to enumerate", v.len())));
        }
        let mut best = Rational::zero();
        for mask in 0u32..(1 << v.len()) {
            let s: Rational = (0..v.len())
                .filter(|a| mask >> a & 1 == 1)
                .map(|a| &self.weights()[a] * &v[a])
                .sum();
            if s > best {
                best = s;
            }
        }
        Ok(best)
    }

    /// `S+(x) = P(x v 0) - P((-x) v 0)`.
    pub fn s_plus(&self, x: &SimpleFunction) -> Result<Rational> {
        Ok(self.positive_part(&x.positive_part()?)? - self.positive_part(&x.negative_part()?)?)
    }

    /// `S+` through an arbitrary splitting `x = phi - psi`, `phi, psi >= 0`.
    pub fn s_plus_split(&self, phi: &SimpleFunction, psi: &SimpleFunction) -> Result<Rational> {
        Ok(self.positive_part(phi)? - self.positive_part(psi)?)
    }

    pub fn jordan_decompose(&self) -> DecomposedFunctional {
        let u = self.universe().clone();
        let mk = |f: &dyn Fn(&Rational) -> Rational| {
            ElementaryIntegral::new(PreMeasure::PointMass {
                universe: u.clone(),
                weights: self.weights().iter().map(|w| ExtReal::Finite(f(w))).collect(),
            })
        };
        DecomposedFunctional {
            plus: mk(&|w| rational::max(w, &Rational::zero())),
            minus: mk(&|w| rational::max(&-w, &Rational::zero())),
            abs: mk(&|w| w.abs()),
        }
    }
}

impl Functional<SimpleFunction> for SignedFunctional {
    fn apply(&self, x: &SimpleFunction) -> Result<Rational> {
        SignedFunctional::apply(self, x)
    }
}

impl Bounded<SimpleFunction> for SignedFunctional {
    fn bound(&self, x: &SimpleFunction) -> Result<Rational> {
        SignedFunctional::bound(self, x)
    }
}

/// `S = S+ - S-` and `|S| = S+ + S-`, each an elementary integral.
#[derive(Clone, Debug, PartialEq)]
pub struct DecomposedFunctional {
    pub plus: ElementaryIntegral,
    pub minus: ElementaryIntegral,
    pub abs: ElementaryIntegral,
}

impl DecomposedFunctional {
    /// Values `(S+(x), S-(x), |S|(x))`.
    pub fn evaluate(&self, x: &SimpleFunction) -> Result<(Rational, Rational, Rational)> {
        Ok((
            self.plus.integrate_simple(x)?,
            self.minus.integrate_simple(x)?,
            self.abs.integrate_simple(x)?,
        ))
    }

    /// Whether `S+ - S- = S` and `S+ + S- = |S|` hold at `x`.
    pub fn identities_hold(&self, s: &SignedFunctional, x: &SimpleFunction) -> Result<bool> {
        let (p, m, a) = self.evaluate(x)?;
        Ok(&p - &m == s.apply(x)? && p + m == a)
    }
}

pub fn jordan_decompose(s: &SignedFunctional) -> DecomposedFunctional {
    s.jordan_decompose()
}

/// One line of an axiom check.
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    pub axiom: String,
    pub depth: Option<usize>,
    pub achieved: Value,
    pub tol: Option<Value>,
    pub pass: bool,
    pub witness: Option<String>,
}

impl AxiomReport {
    pub fn to_json(&self) -> Value {
        json!({
            "axiom": self.axiom,
            "depth": self.depth,
            "achieved": self.achieved,
            "tol": self.tol,
            "pass": self.pass,
            "witness": self.witness,
        })
    }
}

const LINEAR_COEFFS: [(i64, i64, i64, i64); 3] = [(2, 1, 3, 1), (-1, 2, 5, 3), (0, 1, -7, 4)];

fn linearity<F: VectorLattice, I: Functional<F>>(i: &I, fuzz: &[(F, F)], name: &str) -> Result<AxiomReport> {
    let mut worst = Rational::zero();
    let mut witness = None;
    for (k, (x, y)) in fuzz.iter().enumerate() {
        for &(an, ad, bn, bd) in &LINEAR_COEFFS {
            let (a, b) = (rational::rat(an, ad), rational::rat(bn, bd));
            let combo = x.scale(&a).plus(&y.scale(&b))?;
            let r = i.apply(&combo)? - &a * i.apply(x)? - &b * i.apply(y)?;
            if r.abs() > worst {
                worst = r.abs();
                witness.get_or_insert_with(|| format!("pair {k}, coefficients ({}, {})", rational::display(&a), rational::display(&b)));
            }
        }
    }
    Ok(AxiomReport {
        axiom: name.into(),
        depth: None,
        achieved: rational::rational_to_json(&worst),
        tol: Some(json!(0)),
        pass: worst.is_zero(),
        witness,
    })
}

fn continuity<F: VectorLattice, I: Functional<F>>(
    i: &I,
    seqs: &[MonotoneSequence<F>],
    depth: usize,
    tol: &Rational,
    name: &str,
) -> Result<AxiomReport> {
    let mut worst = Rational::zero();
    let mut witness = None;
    for (k, s) in seqs.iter().enumerate() {
        let terms = s.verify_decreasing_nonnegative(depth)?;
        let v = match terms.last() {
            Some(x) => i.apply(x)?.abs(),
            None => Rational::zero(),
        };
        if v >= *tol && witness.is_none() {
            witness = Some(format!("sequence {k}"));
        }
        if v > worst {
            worst = v;
        }
    }
    Ok(AxiomReport {
        axiom: name.into(),
        depth: Some(depth),
        achieved: rational::rational_to_json(&worst),
        tol: Some(rational::rational_to_json(tol)),
        pass: witness.is_none(),
        witness,
    })
}

/// Linearity (D1) on fuzzed pairs, continuity along decreasing sequences
/// (D2) at finite depth, positivity (D3) on `|x|` for every fuzzed `x`.
pub fn verify_i_axioms<F: VectorLattice, I: Functional<F>>(
    i: &I,
    seqs: &[MonotoneSequence<F>],
    fuzz: &[(F, F)],
    depth: usize,
    tol: &Rational,
) -> Result<Vec<AxiomReport>> {
    let d1 = linearity(i, fuzz, "D1")?;
    let d2 = continuity(i, seqs, depth, tol, "D2")?;
    let mut lowest: Option<Rational> = None;
    let mut witness = None;
    for (k, (x, y)) in fuzz.iter().enumerate() {
        for f in [x, y] {
            let v = i.apply(&f.abs())?;
            if v.is_negative() && witness.is_none() {
                witness = Some(format!("pair {k}"));
            }
            if lowest.as_ref().map(|l| &v < l).unwrap_or(true) {
                lowest = Some(v);
            }
        }
    }
    let d3 = AxiomReport {
        axiom: "D3".into(),
        depth: None,
        achieved: rational::rational_to_json(&lowest.unwrap_or_else(Rational::zero)),
        tol: None,
        pass: witness.is_none(),
        witness,
    };
    Ok(vec![d1, d2, d3])
}

/// (S1) and (S2) as for I-integrals, plus the bound `|S(x)| <= M(|x|)` (S3).
pub fn verify_s_axioms<F: VectorLattice, S: Bounded<F>>(
    s: &S,
    seqs: &[MonotoneSequence<F>],
    fuzz: &[(F, F)],
    depth: usize,
    tol: &Rational,
) -> Result<Vec<AxiomReport>> {
    let s1 = linearity(s, fuzz, "S1")?;
    let s2 = continuity(s, seqs, depth, tol, "S2")?;
    let mut slack: Option<Rational> = None;
    let mut witness = None;
    for (k, (x, y)) in fuzz.iter().enumerate() {
        for f in [x, y] {
            let d = s.bound(&f.abs())? - s.apply(f)?.abs();
            if d.is_negative() && witness.is_none() {
                witness = Some(format!("pair {k}"));
            }
            if slack.as_ref().map(|l| &d < l).unwrap_or(true) {
                slack = Some(d);
            }
        }
    }
    let s3 = AxiomReport {
        axiom: "S3".into(),
        depth: None,
        achieved: rational::rational_to_json(&slack.unwrap_or_else(Rational::zero)),
        tol: None,
        pass: witness.is_none(),
        witness,
    };
    Ok(vec![s1, s2, s3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::rings::RingSet;

    fn iv(a: i64, b: i64) -> RingSet {
        RingSet::interval(int(a), int(b))
    }

    #[test]
    fn length_integral_of_overlapping_terms() {
        let x = SimpleFunction::term(int(3), &iv(0, 1))
            .plus(&SimpleFunction::term(int(-1), &iv(0, 2)))
            .unwrap();
        assert_eq!(ElementaryIntegral::length().integrate_simple(&x).unwrap(), int(1));
    }

    #[test]
    fn counting_integral() {
        let u = Universe::finite(["a", "b", "c"]).unwrap();
        let x = SimpleFunction::indicator(&RingSet::finite(&u, [0, 1]).unwrap());
        assert_eq!(ElementaryIntegral::counting(&u).integrate_simple(&x).unwrap(), int(2));
        let z = SimpleFunction::zero(&u);
        assert_eq!(ElementaryIntegral::counting(&u).integrate_simple(&z).unwrap(), int(0));
    }

    #[test]
    fn infinite_measure_term_is_rejected() {
        let u = Universe::points(2);
        let i = ElementaryIntegral::point_masses(&u, vec![ExtReal::PosInf, ExtReal::from_int(1)]).unwrap();
        let x = SimpleFunction::indicator(&RingSet::finite(&u, [0]).unwrap());
        assert!(matches!(i.integrate_simple(&x), Err(Error::Domain(_))));
        let y = SimpleFunction::indicator(&RingSet::finite(&u, [1]).unwrap());
        assert_eq!(i.integrate_simple(&y).unwrap(), int(1));
    }

    #[test]
    fn decomposition_of_two_point_functional() {
        let s = SignedFunctional::from_ints(&[2, -1]);
        let u = s.universe().clone();
        let x = SimpleFunction::from_values(&u, &[int(1), int(1)]).unwrap();
        assert_eq!(s.positive_part(&x).unwrap(), int(2));
        assert_eq!(s.positive_part_bruteforce(&x).unwrap(), int(2));
        let d = s.jordan_decompose();
        assert_eq!(d.evaluate(&x).unwrap(), (int(2), int(1), int(3)));
        assert!(d.identities_hold(&s, &x).unwrap());
        let y = SimpleFunction::from_values(&u, &[int(1), int(-1)]).unwrap();
        assert_eq!(s.apply(&y).unwrap().abs(), int(3));
        assert_eq!(s.bound(&y.abs()).unwrap(), int(3));
    }

    #[test]
    fn negative_argument_to_p_is_rejected() {
        let s = SignedFunctional::from_ints(&[1, 1]);
        let y = SimpleFunction::from_values(s.universe(), &[int(1), int(-1)]).unwrap();
        assert!(matches!(s.positive_part(&y), Err(Error::Precondition(_))));
    }

    #[test]
    fn doubling_weights_doubles_parts() {
        let s = SignedFunctional::from_ints(&[3, -2, 0, 1]);
        let t = SignedFunctional::from_ints(&[6, -4, 0, 2]);
        let x = SimpleFunction::from_values(s.universe(), &[int(1), rat(1, 2), int(-3), int(2)]).unwrap();
        assert_eq!(t.s_plus(&x).unwrap(), int(2) * s.s_plus(&x).unwrap());
    }

    #[test]
    fn i_axioms_on_length() {
        let i = ElementaryIntegral::length();
        let seqs = vec![
            MonotoneSequence::decreasing(|n| SimpleFunction::term(rat(1, n as i64), &iv(0, 1))),
            MonotoneSequence::decreasing(|n| {
                SimpleFunction::indicator(&RingSet::interval(int(0), rat(1, n as i64)))
            }),
        ];
        let mut rng = crate::fuzz::rng(1);
        let fuzz: Vec<_> = (0..30)
            .map(|_| {
                (
                    crate::fuzz::simple_function(&mut rng, &Universe::RealLine, 4).unwrap(),
                    crate::fuzz::simple_function(&mut rng, &Universe::RealLine, 4).unwrap(),
                )
            })
            .collect();
        let r = verify_i_axioms(&i, &seqs, &fuzz, 100, &rat(1, 50)).unwrap();
        assert!(r.iter().all(|a| a.pass), "{r:?}");
        assert_eq!(r[1].achieved, rational::rational_to_json(&rat(1, 100)));
    }

    #[test]
    fn increasing_sequence_is_not_accepted_for_d2() {
        let i = ElementaryIntegral::length();
        let seqs = vec![MonotoneSequence::decreasing(|n| {
            SimpleFunction::term(int(n as i64), &iv(0, 1))
        })];
        match verify_i_axioms(&i, &seqs, &[], 5, &rat(1, 2)) {
            Err(Error::NonMonotone { index: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn s_axioms_on_signed_point_masses() {
        let s = SignedFunctional::from_ints(&[2, -1, 0]);
        let u = s.universe().clone();
        let seqs = vec![MonotoneSequence::decreasing(move |n| {
            let v = if n >= 4 { int(0) } else { rat(1, n as i64) };
            SimpleFunction::from_values(&u, &[v.clone(), v.clone(), v]).unwrap()
        })];
        let mut rng = crate::fuzz::rng(2);
        let fuzz: Vec<_> = (0..30)
            .map(|_| {
                (
                    crate::fuzz::simple_function(&mut rng, s.universe(), 4).unwrap(),
                    crate::fuzz::simple_function(&mut rng, s.universe(), 4).unwrap(),
                )
            })
            .collect();
        let r = verify_s_axioms(&s, &seqs, &fuzz, 10, &rat(1, 1000)).unwrap();
        assert!(r.iter().all(|a| a.pass), "{r:?}");
    }
}
