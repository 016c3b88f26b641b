//! Exact upper and lower integrals on finite universes, and seeded suites
//! for the convergence theorems and structural properties of the
//! extension.
//!
//! On a finite universe the infimum over majorants is attained: `T_0`
//! consists of functions vanishing on atoms of infinite weight, so a
//! majorant exists only if `x <= 0` there, and on atoms of finite positive
//! weight the best majorant is `x` itself.

use num_traits::{Signed, Zero};
use rand::Rng;
use serde_json::{json, Value};

use super::{is_daniell_measurable, level_set_integral, null_test, FiniteFunction, LevelConfig, MeasurableFunction, MonotoneSequence};
use crate::error::{Error, Result};
use crate::functional::{ElementaryIntegral, Functional};
use crate::fuzz;
use crate::lattice::{ExtReal, SimpleFunction, VectorLattice};
use crate::rational::{self, rat, Rational};
use crate::rings::{PreMeasure, RingSet, Universe};

/// Upper and lower integrals for point masses on a finite universe.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteExtension {
    universe: Universe,
    weights: Vec<ExtReal>,
}

impl FiniteExtension {
    pub fn new(i: &ElementaryIntegral) -> Result<Self> {
        match i.measure() {
            PreMeasure::PointMass { universe, weights } => Ok(FiniteExtension {
                universe: universe.clone(),
                weights: weights.clone(),
            }),
            PreMeasure::Length => Err(Error::Domain("exact extension needs a finite universe".into())),
        }
    }

    pub fn from_weights(weights: Vec<ExtReal>) -> Result<Self> {
        let u = Universe::points(weights.len());
        Self::new(&ElementaryIntegral::point_masses(&u, weights)?)
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn weights(&self) -> &[ExtReal] {
        &self.weights
    }

    /// `inf { I_1(phi) : x <= phi, phi in T_1 }`.
    pub fn upper(&self, x: &[ExtReal]) -> ExtReal {
        let mut plus = false;
        let mut minus = false;
        let mut sum = Rational::zero();
        for (w, v) in self.weights.iter().zip(x) {
            match w {
                ExtReal::Finite(wf) if wf.is_zero() => {}
                ExtReal::PosInf => {
                    if *v > ExtReal::zero() {
                        plus = true;
                    }
                }
                ExtReal::Finite(wf) => match v {
                    ExtReal::PosInf => plus = true,
                    ExtReal::NegInf => minus = true,
                    ExtReal::Finite(r) => sum += wf * r,
                },
                ExtReal::NegInf => unreachable!("weights are nonnegative"),
            }
        }
        if plus {
            ExtReal::PosInf
        } else if minus {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(sum)
        }
    }

    /// `-upper(-x)`.
    pub fn lower(&self, x: &[ExtReal]) -> ExtReal {
        let neg: Vec<ExtReal> = x.iter().map(ExtReal::neg).collect();
        self.upper(&neg).neg()
    }

    /// The common finite value of the upper and lower integrals, if any.
    pub fn integral(&self, x: &[ExtReal]) -> Option<Rational> {
        match (self.upper(x), self.lower(x)) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) if a == b => Some(a),
            _ => None,
        }
    }

    pub fn elementary(&self) -> ElementaryIntegral {
        ElementaryIntegral::new(PreMeasure::PointMass {
            universe: self.universe.clone(),
            weights: self.weights.clone(),
        })
    }
}

/// Outcome of one seeded property suite.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Cases excluded because a side of the inequality is `inf - inf`.
    pub skipped: usize,
    pub witness: Option<String>,
}

impl SuiteReport {
    pub fn new(name: &str) -> Self {
        SuiteReport {
            name: name.into(),
            cases: 0,
            failures: 0,
            skipped: 0,
            witness: None,
        }
    }

    pub fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }

    pub fn pass(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.name,
            "cases": self.cases,
            "failures": self.failures,
            "skipped": self.skipped,
            "pass": self.pass(),
            "witness": self.witness,
        })
    }
}

fn fin(r: Rational) -> ExtReal {
    ExtReal::Finite(r)
}

fn pick<T: Clone>(rng: &mut impl Rng, xs: &[T]) -> T {
    xs[rng.random_range(0..xs.len())].clone()
}

fn finite_weights(rng: &mut impl Rng, n: usize) -> Vec<ExtReal> {
    (0..n)
        .map(|_| fin(pick(rng, &[rat(0, 1), rat(1, 2), rat(1, 1), rat(2, 1), rat(3, 1)])))
        .collect()
}

fn show(v: &[ExtReal]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

fn simple_of(u: &Universe, v: &[Rational]) -> SimpleFunction {
    SimpleFunction::from_values(u, v).expect("sizes agree")
}

/// Increasing sequences that settle at a finite depth (and grow without
/// bound on weightless atoms): the limit of the integrals equals the
/// integral of the pointwise limit.
pub fn monotone_convergence_suite(seed: u64, cases: usize) -> Result<SuiteReport> {
    let mut rng = fuzz::rng(seed);
    let mut rep = SuiteReport::new("monotone convergence");
    for case in 0..cases {
        let n = rng.random_range(1..=6);
        let weights = finite_weights(&mut rng, n);
        let ext = FiniteExtension::from_weights(weights.clone())?;
        let u = ext.universe().clone();
        let settle = rng.random_range(1..=6usize);
        // per atom: Some((limit, step)) or None for growth to +inf
        let plan: Vec<Option<(Rational, Rational)>> = weights
            .iter()
            .map(|w| {
                if w.is_zero() && rng.random_bool(0.5) {
                    None
                } else {
                    Some((fuzz::small_rational(&mut rng, 3, 2), pick(&mut rng, &[rat(0, 1), rat(1, 3), rat(1, 1), rat(2, 1)])))
                }
            })
            .collect();
        let limit: Vec<ExtReal> = plan
            .iter()
            .map(|p| p.as_ref().map(|(l, _)| fin(l.clone())).unwrap_or(ExtReal::PosInf))
            .collect();
        let gen_plan = plan.clone();
        let gen_u = u.clone();
        let seq = MonotoneSequence::increasing(move |k| {
            let vals: Vec<Rational> = gen_plan
                .iter()
                .map(|p| match p {
                    Some((l, d)) => l - d * rational::int(settle.saturating_sub(k) as i64),
                    None => rational::int(k as i64),
                })
                .collect();
            simple_of(&gen_u, &vals)
        });
        let depth = settle + 3;
        let terms = seq.verify(depth)?;
        let i = ext.elementary();
        let last = i.apply(&terms[depth - 1])?;
        let prev = i.apply(&terms[depth - 2])?;
        let expected = ext.integral(&limit);
        rep.record(prev == last && expected.as_ref() == Some(&last), || {
            format!("case {case}: weights {}, limit {}, lim I = {}", show(&weights), show(&limit), rational::display(&last))
        });
    }
    Ok(rep)
}

/// Nonnegative eventually periodic sequences: the integral of the liminf
/// is at most the liminf of the integrals.
pub fn fatou_suite(seed: u64, cases: usize) -> Result<SuiteReport> {
    let mut rng = fuzz::rng(seed);
    let mut rep = SuiteReport::new("fatou");
    let grid = [rat(0, 1), rat(1, 2), rat(1, 1), rat(2, 1), rat(3, 1)];
    for case in 0..cases {
        let n = rng.random_range(1..=6);
        let weights = finite_weights(&mut rng, n);
        let ext = FiniteExtension::from_weights(weights.clone())?;
        let u = ext.universe().clone();
        let period = rng.random_range(1..=4);
        let cycle: Vec<Vec<Rational>> = (0..period)
            .map(|_| (0..n).map(|_| pick(&mut rng, &grid)).collect())
            .collect();
        let liminf: Vec<ExtReal> = (0..n)
            .map(|a| fin(cycle.iter().map(|v| v[a].clone()).min().expect("nonempty period")))
            .collect();
        let i = ext.elementary();
        let mut rhs: Option<Rational> = None;
        for v in &cycle {
            let val = i.apply(&simple_of(&u, v))?;
            rhs = Some(match rhs {
                Some(r) if r <= val => r,
                _ => val,
            });
        }
        let rhs = rhs.expect("nonempty period");
        let lhs = ext.integral(&liminf);
        rep.record(lhs.as_ref().map(|l| l <= &rhs).unwrap_or(false), || {
            format!("case {case}: weights {}, liminf {}", show(&weights), show(&liminf))
        });
    }
    Ok(rep)
}

/// Alternating indicators of two unit atoms: the integral of the liminf
/// is 0 while every integral in the sequence is 1.
pub fn strict_fatou_witness() -> Result<(Rational, Rational)> {
    let ext = FiniteExtension::from_weights(vec![ExtReal::from_int(1), ExtReal::from_int(1)])?;
    let u = ext.universe().clone();
    let x = |k: usize| {
        if k % 2 == 1 {
            simple_of(&u, &[rat(1, 1), rat(0, 1)])
        } else {
            simple_of(&u, &[rat(0, 1), rat(1, 1)])
        }
    };
    let i = ext.elementary();
    let mut rhs = i.apply(&x(1))?;
    for k in 2..=10 {
        rhs = rational::min(&rhs, &i.apply(&x(k))?);
    }
    let liminf: Vec<ExtReal> = (0..2)
        .map(|a| {
            let m = (1..=10).map(|k| x(k).values().expect("finite")[a].clone()).min().expect("nonempty");
            fin(m)
        })
        .collect();
    let lhs = ext.integral(&liminf).expect("finite values are integrable");
    Ok((lhs, rhs))
}

/// Sequences bounded by an integrable `z`, settling on atoms of positive
/// weight and oscillating on weightless ones: limits and integrals commute.
pub fn dominated_convergence_suite(seed: u64, cases: usize) -> Result<SuiteReport> {
    let mut rng = fuzz::rng(seed);
    let mut rep = SuiteReport::new("dominated convergence");
    for case in 0..cases {
        let n = rng.random_range(1..=6);
        let weights = finite_weights(&mut rng, n);
        let ext = FiniteExtension::from_weights(weights.clone())?;
        let u = ext.universe().clone();
        let z: Vec<Rational> = weights
            .iter()
            .map(|w| {
                let lo = if w.is_zero() { 1 } else { 0 };
                rational::int(rng.random_range(lo..=3))
            })
            .collect();
        let settle = rng.random_range(1..=6usize);
        let within = |rng: &mut rand_chacha::ChaCha8Rng, b: &Rational| -> Rational {
            let k = rng.random_range(-4..=4);
            b * rat(k, 4)
        };
        let limit: Vec<Rational> = z.iter().map(|b| within(&mut rng, b)).collect();
        let early: Vec<Vec<Rational>> = (0..settle)
            .map(|_| z.iter().map(|b| within(&mut rng, b)).collect())
            .collect();
        let x = |k: usize| -> Vec<Rational> {
            (0..n)
                .map(|a| {
                    if weights[a].is_zero() {
                        if k % 2 == 0 { z[a].clone() } else { -z[a].clone() }
                    } else if k <= settle {
                        early[k - 1][a].clone()
                    } else {
                        limit[a].clone()
                    }
                })
                .collect()
        };
        let dominated = (1..=settle + 2).all(|k| x(k).iter().zip(&z).all(|(v, b)| v.abs() <= *b));
        let i = ext.elementary();
        let a = i.apply(&simple_of(&u, &x(settle + 1)))?;
        let b = i.apply(&simple_of(&u, &x(settle + 2)))?;
        let ae_limit: Vec<ExtReal> = (0..n)
            .map(|a| if weights[a].is_zero() { ExtReal::zero() } else { fin(limit[a].clone()) })
            .collect();
        let z_int = ext.integral(&z.iter().cloned().map(fin).collect::<Vec<_>>());
        let ok = dominated && z_int.is_some() && a == b && ext.integral(&ae_limit).as_ref() == Some(&a);
        rep.record(ok, || format!("case {case}: weights {}, z {:?}", show(&weights), z));
    }
    Ok(rep)
}

fn ext_grid() -> Vec<ExtReal> {
    vec![
        ExtReal::NegInf,
        fin(rat(-2, 1)),
        fin(rat(-1, 2)),
        ExtReal::zero(),
        fin(rat(1, 1)),
        fin(rat(3, 1)),
        ExtReal::PosInf,
    ]
}

fn ambiguous(a: &ExtReal, b: &ExtReal) -> bool {
    matches!((a, b), (ExtReal::PosInf, ExtReal::NegInf) | (ExtReal::NegInf, ExtReal::PosInf))
}

/// Homogeneity, subadditivity, monotonicity, `lower <= upper`, the
/// join/meet inequality and the bound for `|x|`, exactly on finite
/// universes; subadditivity and the join/meet inequality also on the
/// certified upper brackets of level-set integrals on the line.
pub fn big_lemma_suite(seed: u64, cases: usize) -> Result<SuiteReport> {
    let mut rng = fuzz::rng(seed);
    let mut rep = SuiteReport::new("upper integral properties");
    let grid = ext_grid();
    let wgrid = [ExtReal::zero(), fin(rat(1, 2)), ExtReal::from_int(1), ExtReal::from_int(2), ExtReal::PosInf];
    for case in 0..cases {
        let n = rng.random_range(1..=5);
        let weights: Vec<ExtReal> = (0..n).map(|_| pick(&mut rng, &wgrid)).collect();
        let ext = FiniteExtension::from_weights(weights.clone())?;
        let x1: Vec<ExtReal> = (0..n).map(|_| pick(&mut rng, &grid)).collect();
        let x2: Vec<ExtReal> = (0..n).map(|_| pick(&mut rng, &grid)).collect();
        let c = pick(&mut rng, &[rat(0, 1), rat(1, 2), rat(2, 1)]);
        let up = |v: &[ExtReal]| ext.upper(v);
        let lo = |v: &[ExtReal]| ext.lower(v);
        let w = || format!("case {case}: weights {}, x1 {}, x2 {}", show(&weights), show(&x1), show(&x2));

        let cx: Vec<ExtReal> = x1.iter().map(|v| v.scale(&c)).collect();
        rep.record(up(&cx) == up(&x1).scale(&c), || format!("(i) {}", w()));

        let sum: Vec<ExtReal> = x1.iter().zip(&x2).map(|(a, b)| a.ext_add(b)).collect();
        let (u1, u2) = (up(&x1), up(&x2));
        if ambiguous(&u1, &u2) {
            rep.skipped += 1;
        } else {
            rep.record(up(&sum) <= u1.ext_add(&u2), || format!("(ii) {}", w()));
        }

        let big: Vec<ExtReal> = x1.iter().zip(&x2).map(|(a, b)| ExtReal::max(a, b)).collect();
        let small: Vec<ExtReal> = x1.iter().zip(&x2).map(|(a, b)| ExtReal::min(a, b)).collect();
        rep.record(up(&x1) <= up(&big), || format!("(iii) {}", w()));

        let l1 = lo(&x1);
        if l1.is_finite() {
            rep.record(l1 <= up(&x1), || format!("(iv) {}", w()));
        }

        let (ub, us) = (up(&big), up(&small));
        if ambiguous(&ub, &us) || ambiguous(&u1, &u2) {
            rep.skipped += 1;
        } else {
            rep.record(ub.ext_add(&us) <= u1.ext_add(&u2), || format!("(v) {}", w()));
        }

        let ax: Vec<ExtReal> = x1.iter().map(ExtReal::abs).collect();
        let (ua, la) = (up(&ax), lo(&ax));
        if ambiguous(&ua, &la.neg()) || ambiguous(&u1, &l1.neg()) {
            rep.skipped += 1;
        } else {
            let gap_abs = ua.ext_add(&la.neg());
            let gap = u1.ext_add(&l1.neg());
            rep.record(ExtReal::zero() <= gap_abs && gap_abs <= gap, || format!("(vi) {}", w()));
        }
    }
    // the same inequalities on level-set brackets for step functions
    let length = ElementaryIntegral::length();
    let cfg = LevelConfig {
        n_max: 4,
        ..LevelConfig::default()
    };
    for case in 0..cases / 10 {
        let a = fuzz::nonnegative_simple(&mut rng, &Universe::RealLine, 3)?;
        let b = fuzz::nonnegative_simple(&mut rng, &Universe::RealLine, 3)?;
        let ua = level_set_integral(&a, &length, &cfg)?.upper;
        let ub = level_set_integral(&b, &length, &cfg)?.upper;
        // lower ends bound the upper integral from below
        let us = level_set_integral(&a.plus(&b)?, &length, &cfg)?.lower;
        let uj = level_set_integral(&a.join(&b)?, &length, &cfg)?.lower;
        let um = level_set_integral(&a.meet(&b)?, &length, &cfg)?.lower;
        let rhs = ua.ext_add(&ub);
        rep.record(us <= rhs, || format!("bracket (ii), line case {case}: {a} and {b}"));
        rep.record(uj.ext_add(&um) <= rhs, || format!("bracket (v), line case {case}: {a} and {b}"));
    }
    Ok(rep)
}

/// Every function dominated in absolute value by a null function is null;
/// exhaustive over `{-inf, -1, 0, 1, +inf}^3` for the given weights.
pub fn null_domination_suite(weights: &[ExtReal]) -> Result<SuiteReport> {
    let ext = FiniteExtension::from_weights(weights.to_vec())?;
    let u = ext.universe().clone();
    let engine = ext.elementary();
    let cfg = LevelConfig {
        n_max: 3,
        ..LevelConfig::default()
    };
    let grid = [ExtReal::NegInf, ExtReal::from_int(-1), ExtReal::zero(), ExtReal::from_int(1), ExtReal::PosInf];
    let n = weights.len();
    let all: Vec<Vec<ExtReal>> = (0..grid.len().pow(n as u32))
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let v = grid[code % grid.len()].clone();
                    code /= grid.len();
                    v
                })
                .collect()
        })
        .collect();
    let mut rep = SuiteReport::new("null domination");
    let is_null = |v: &Vec<ExtReal>| -> Result<bool> {
        let f = FiniteFunction::new(&u, v.clone())?;
        Ok(null_test(&f, &engine, &Rational::zero(), &cfg)?.is_null)
    };
    for x in &all {
        let abs: Vec<ExtReal> = x.iter().map(ExtReal::abs).collect();
        let exact_null = ext.upper(&abs).is_zero();
        let nx = is_null(x)?;
        rep.record(nx == exact_null, || format!("null test disagrees with the exact integral at {}", show(x)));
        if !nx {
            continue;
        }
        for y in &all {
            if y.iter().zip(x).all(|(a, b)| a.abs() <= b.abs()) {
                let ny = is_null(y)?;
                rep.record(ny, || format!("{} is dominated by null {} but not null", show(y), show(x)));
            }
        }
    }
    Ok(rep)
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..(1 << n)).map(move |m| (0..n).filter(|i| m >> i & 1 == 1).collect())
}

/// The Daniell measurable sets found by probing every subset are closed
/// under difference and union.
pub fn sigma_ring_suite(weights: &[ExtReal]) -> Result<SuiteReport> {
    let ext = FiniteExtension::from_weights(weights.to_vec())?;
    let u = ext.universe().clone();
    let engine = ext.elementary();
    let cfg = LevelConfig {
        n_max: 3,
        ..LevelConfig::default()
    };
    let probes = super::MeasureEngine::probes(&engine);
    let refs: Vec<&dyn MeasurableFunction> = probes.iter().map(|p| p.as_ref()).collect();
    let n = weights.len();
    let mut measurable = vec![false; 1 << n];
    for (mask, pts) in subsets(n).enumerate() {
        let chi = SimpleFunction::indicator(&RingSet::finite(&u, pts)?);
        measurable[mask] = is_daniell_measurable(&chi, &refs, &engine, &cfg)?.pass();
    }
    let mut rep = SuiteReport::new("sigma-ring closure");
    rep.record(measurable[0], || "the empty set is not measurable".into());
    for a in 0..(1usize << n) {
        for b in 0..(1usize << n) {
            if measurable[a] && measurable[b] {
                rep.record(measurable[a & !b] && measurable[a | b], || format!("sets {a:#b} and {b:#b}"));
            }
        }
    }
    Ok(rep)
}

/// Every subset of a null set is null.
pub fn completeness_suite(weights: &[ExtReal]) -> Result<SuiteReport> {
    let ext = FiniteExtension::from_weights(weights.to_vec())?;
    let u = ext.universe().clone();
    let engine = ext.elementary();
    let cfg = LevelConfig {
        n_max: 2,
        ..LevelConfig::default()
    };
    let n = weights.len();
    let mut null = vec![false; 1 << n];
    for (mask, pts) in subsets(n).enumerate() {
        let chi = SimpleFunction::indicator(&RingSet::finite(&u, pts)?);
        null[mask] = null_test(&chi, &engine, &Rational::zero(), &cfg)?.is_null;
    }
    let mut rep = SuiteReport::new("completeness");
    for a in 0..(1usize << n) {
        if !null[a] {
            continue;
        }
        for b in 0..(1usize << n) {
            if b & !a == 0 {
                rep.record(null[b], || format!("{b:#b} is inside null {a:#b} but not null"));
            }
        }
    }
    Ok(rep)
}

/// Random weights with zeros and infinities for the exhaustive suites.
pub fn structural_weights(seed: u64, n: usize) -> Vec<ExtReal> {
    let mut rng = fuzz::rng(seed);
    (0..n)
        .map(|_| pick(&mut rng, &[ExtReal::zero(), ExtReal::zero(), fin(rat(1, 2)), ExtReal::from_int(2), ExtReal::PosInf]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(xs: &[i64]) -> Vec<ExtReal> {
        xs.iter().map(|&x| ExtReal::from_int(x)).collect()
    }

    #[test]
    fn upper_integral_cases() {
        let ext = FiniteExtension::from_weights(vec![ExtReal::from_int(1), ExtReal::zero(), ExtReal::PosInf]).unwrap();
        assert_eq!(ext.upper(&w(&[2, 100, 0])), ExtReal::from_int(2));
        assert_eq!(ext.upper(&w(&[2, 100, -5])), ExtReal::from_int(2));
        assert_eq!(ext.upper(&w(&[2, 100, 1])), ExtReal::PosInf);
        assert_eq!(ext.upper(&[ExtReal::NegInf, ExtReal::PosInf, ExtReal::zero()]), ExtReal::NegInf);
        assert_eq!(ext.integral(&w(&[2, 100, -5])), None);
        assert_eq!(ext.integral(&[ExtReal::from_int(3), ExtReal::PosInf, ExtReal::zero()]), Some(rational::int(3)));
    }

    #[test]
    fn suites_pass() {
        for r in [
            monotone_convergence_suite(1, 200).unwrap(),
            fatou_suite(2, 200).unwrap(),
            dominated_convergence_suite(3, 200).unwrap(),
            big_lemma_suite(4, 200).unwrap(),
        ] {
            assert!(r.pass(), "{r:?}");
        }
    }

    #[test]
    fn strict_fatou() {
        let (l, r) = strict_fatou_witness().unwrap();
        assert!(l < r);
        assert_eq!((l, r), (rational::int(0), rational::int(1)));
    }

    #[test]
    fn structural_suites_pass() {
        let weights = vec![ExtReal::zero(), ExtReal::from_int(1), ExtReal::PosInf];
        assert!(null_domination_suite(&weights).unwrap().pass());
        let weights = structural_weights(5, 4);
        assert!(sigma_ring_suite(&weights).unwrap().pass());
        assert!(completeness_suite(&[ExtReal::zero(), ExtReal::zero(), ExtReal::from_int(1)]).unwrap().pass());
    }
}
