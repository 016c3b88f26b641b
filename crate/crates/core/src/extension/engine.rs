use std::sync::Arc;

use num_traits::Zero;
use serde_json::{json, Value};

use super::levels::{level_runs, level_set_integral, LevelConfig};
use super::{IntegralResult, MeasurableFunction, Meet, Neg, PosPart};
use crate::error::{Error, Result};
use crate::functional::ElementaryIntegral;
use crate::lattice::{ExtReal, SimpleFunction, Term};
use crate::rational::{self, Rational};
use crate::rings::{RingSet, Universe};

/// `lower <= value <= upper`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bracket {
    pub value: ExtReal,
    pub lower: ExtReal,
    pub upper: ExtReal,
}

impl Bracket {
    pub fn exact(v: ExtReal) -> Self {
        Bracket {
            value: v.clone(),
            lower: v.clone(),
            upper: v,
        }
    }

    /// Scales by `c >= 0`.
    pub fn scale(&self, c: &Rational) -> Self {
        Bracket {
            value: self.value.scale(c),
            lower: self.lower.scale(c),
            upper: self.upper.scale(c),
        }
    }

    pub fn add(&self, other: &Bracket) -> Self {
        Bracket {
            value: self.value.ext_add(&other.value),
            lower: self.lower.ext_add(&other.lower),
            upper: self.upper.ext_add(&other.upper),
        }
    }

    pub fn contains(&self, v: &ExtReal) -> bool {
        &self.lower <= v && v <= &self.upper
    }

    pub fn to_json(&self) -> Value {
        json!({
            "value": self.value.to_json(),
            "lower": self.lower.to_json(),
            "upper": self.upper.to_json(),
        })
    }
}

/// Anything that assigns certified measure brackets to ring sets.
pub trait MeasureEngine: Send + Sync {
    fn universe(&self) -> Universe;
    fn measure(&self, e: &RingSet) -> Result<Bracket>;
    /// Integrable test functions for measurability checks.
    fn probes(&self) -> Vec<Arc<dyn MeasurableFunction>>;
    fn name(&self) -> String;
}

impl MeasureEngine for ElementaryIntegral {
    fn universe(&self) -> Universe {
        ElementaryIntegral::universe(self)
    }

    fn measure(&self, e: &RingSet) -> Result<Bracket> {
        Ok(Bracket::exact(self.measure().eval(e)?))
    }

    fn probes(&self) -> Vec<Arc<dyn MeasurableFunction>> {
        let u = ElementaryIntegral::universe(self);
        match &u {
            Universe::Finite(labels) => {
                let finite: Vec<usize> = (0..labels.len())
                    .filter(|&i| {
                        self.measure()
                            .eval(&RingSet::finite(&u, [i]).expect("atom"))
                            .map(|m| m.is_finite())
                            .unwrap_or(false)
                    })
                    .collect();
                let mut out: Vec<Arc<dyn MeasurableFunction>> = finite
                    .iter()
                    .map(|&i| {
                        Arc::new(SimpleFunction::indicator(&RingSet::finite(&u, [i]).expect("atom")))
                            as Arc<dyn MeasurableFunction>
                    })
                    .collect();
                let values: Vec<Rational> = (0..labels.len())
                    .map(|i| {
                        if finite.contains(&i) {
                            rational::rat(2 * i as i64 - 3, 2)
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect();
                if let Ok(f) = SimpleFunction::from_values(&u, &values) {
                    out.push(Arc::new(f));
                }
                out
            }
            Universe::RealLine => (-4..4)
                .map(|k| {
                    Arc::new(SimpleFunction::term(
                        rational::rat(k + 5, 2),
                        &RingSet::interval(rational::rat(k, 2), rational::rat(k + 3, 2)),
                    )) as Arc<dyn MeasurableFunction>
                })
                .collect(),
            Universe::PathSpace => Vec::new(),
        }
    }

    fn name(&self) -> String {
        match self.measure() {
            crate::rings::PreMeasure::Length => "length".into(),
            crate::rings::PreMeasure::PointMass { .. } => "point-mass".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurabilityReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl MeasurabilityReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({"checked": self.checked, "failures": self.failures, "pass": self.pass()})
    }
}

/// Checks that `phi ^ x` is integrable for every probe `phi` by bracketing
/// the integrals of its positive and negative parts.
pub fn is_daniell_measurable(
    x: &dyn MeasurableFunction,
    probes: &[&dyn MeasurableFunction],
    engine: &dyn MeasureEngine,
    cfg: &LevelConfig,
) -> Result<MeasurabilityReport> {
    if !x.is_nonnegative()? {
        return Err(Error::Precondition("measurability is defined for x >= 0".into()));
    }
    let mut failures = Vec::new();
    for (i, phi) in probes.iter().enumerate() {
        let m = Meet(*phi, x);
        let neg = Neg(&m);
        let parts: [(&str, &dyn MeasurableFunction); 2] = [("positive", &PosPart(&m)), ("negative", &PosPart(&neg))];
        for (label, part) in parts {
            let r = level_set_integral(part, engine, cfg)?;
            if !r.upper.is_finite() {
                failures.push(format!("probe {i}: {label} part of phi ^ x has upper bound {}", r.upper));
            }
        }
    }
    Ok(MeasurabilityReport {
        checked: probes.len(),
        failures,
    })
}

/// `mu(e) = integral of chi_e`, after checking `chi_e` against the
/// engine's probes. Infinite when the indicator is not integrable.
pub fn measure_from_integral(engine: &dyn MeasureEngine, e: &RingSet, cfg: &LevelConfig) -> Result<Bracket> {
    engine.universe().ensure_same(&e.universe())?;
    let chi = SimpleFunction::indicator(e);
    let probes = engine.probes();
    let refs: Vec<&dyn MeasurableFunction> = probes.iter().map(|p| p.as_ref()).collect();
    let report = is_daniell_measurable(&chi, &refs, engine, cfg)?;
    if let Some(f) = report.failures.first() {
        return Err(Error::Precondition(format!("indicator is not measurable: {f}")));
    }
    engine.measure(e)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NullCertificate {
    pub is_null: bool,
    pub integral: IntegralResult,
}

impl NullCertificate {
    pub fn to_json(&self) -> Value {
        json!({"null": self.is_null, "integral": self.integral.to_json()})
    }
}

/// `x` is null when the certified upper bound of the integral of `|x|` is
/// zero or below `tol`.
pub fn null_test(
    x: &dyn MeasurableFunction,
    engine: &dyn MeasureEngine,
    tol: &Rational,
    cfg: &LevelConfig,
) -> Result<NullCertificate> {
    let a = super::AbsPart(x);
    let integral = level_set_integral(&a, engine, cfg)?;
    let is_null = integral.upper.is_zero() || integral.upper < ExtReal::Finite(tol.clone());
    Ok(NullCertificate { is_null, integral })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Approximation {
    pub function: SimpleFunction,
    /// Dyadic depth used; `None` when the input was already simple.
    pub depth: Option<u32>,
    /// Certified bound on the integral of `|x - function|`.
    pub distance_bound: ExtReal,
}

fn dyadic_approximant(
    x: &dyn MeasurableFunction,
    engine: &dyn MeasureEngine,
    eps: &Rational,
    cfg: &LevelConfig,
) -> Result<(SimpleFunction, u32, Rational)> {
    let support = engine.measure(&x.above(&Rational::zero())?)?.upper;
    let mut best = ExtReal::PosInf;
    for n in 1..=cfg.n_max {
        let h = rational::dyadic(n);
        let exceed = x.above(&Rational::from_integer(rational::pow2(n)))?;
        if !(exceed.is_empty() || engine.measure(&exceed)?.upper.is_zero()) {
            continue;
        }
        let width = support.scale(&h);
        if let ExtReal::Finite(w) = &width {
            if w < eps {
                let runs = level_runs(x, n, cfg.budget)?;
                let terms = runs
                    .into_iter()
                    .filter(|r| !r.set.is_empty())
                    .map(|r| Term {
                        coeff: Rational::from_integer(r.count().into()) * &h,
                        set: r.set,
                    })
                    .collect();
                let f = SimpleFunction::new(&x.universe(), terms)?.canonicalize();
                return Ok((f, n, w.clone()));
            }
        }
        best = width;
    }
    Err(Error::Unreachable {
        tol: rational::display(eps),
        achieved: best.to_string(),
    })
}

/// A simple function within `eps` of `x` in the integral of the
/// difference, built from the dyadic approximants of `x+` and `x-`.
pub fn approximate_in_t0(
    x: &dyn MeasurableFunction,
    engine: &dyn MeasureEngine,
    eps: &Rational,
    cfg: &LevelConfig,
) -> Result<Approximation> {
    if let Some(s) = x.as_simple() {
        return Ok(Approximation {
            function: s,
            depth: None,
            distance_bound: ExtReal::zero(),
        });
    }
    if x.is_nonnegative()? {
        let (f, n, d) = dyadic_approximant(x, engine, eps, cfg)?;
        return Ok(Approximation {
            function: f,
            depth: Some(n),
            distance_bound: ExtReal::Finite(d),
        });
    }
    let half = eps / rational::int(2);
    let (p, np, dp) = dyadic_approximant(&PosPart(x), engine, &half, cfg)?;
    let neg = Neg(x);
    let (m, nm, dm) = dyadic_approximant(&PosPart(&neg), engine, &half, cfg)?;
    use crate::lattice::VectorLattice;
    Ok(Approximation {
        function: p.minus(&m)?,
        depth: Some(np.max(nm)),
        distance_bound: ExtReal::Finite(dp + dm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{FiniteFunction, PiecewiseAffine};
    use crate::rational::{int, rat};

    fn cfg(n: u32) -> LevelConfig {
        LevelConfig {
            n_max: n,
            ..LevelConfig::default()
        }
    }

    #[test]
    fn null_tests() {
        let len = ElementaryIntegral::length();
        let spike = PiecewiseAffine::spike(rat(1, 3), int(5));
        assert!(null_test(&spike, &len, &Rational::zero(), &cfg(4)).unwrap().is_null);
        let zero = SimpleFunction::zero(&Universe::RealLine);
        assert!(null_test(&zero, &len, &Rational::zero(), &cfg(4)).unwrap().is_null);
        let chi = SimpleFunction::indicator(&RingSet::interval(int(0), int(1)));
        let c = null_test(&chi, &len, &Rational::zero(), &cfg(4)).unwrap();
        assert!(!c.is_null);
        assert_eq!(c.integral.upper, ExtReal::from_int(1));
    }

    #[test]
    fn measures_from_integrals() {
        let len = ElementaryIntegral::length();
        let m = measure_from_integral(&len, &RingSet::interval(int(0), int(1)), &cfg(3)).unwrap();
        assert_eq!(m, Bracket::exact(ExtReal::from_int(1)));
        let e = RingSet::empty(&Universe::RealLine);
        assert_eq!(measure_from_integral(&len, &e, &cfg(3)).unwrap().value, ExtReal::zero());
    }

    #[test]
    fn finite_measures_match_weights_exhaustively() {
        let u = Universe::points(4);
        let w = vec![ExtReal::from_int(1), ExtReal::zero(), ExtReal::Finite(rat(5, 2)), ExtReal::PosInf];
        let i = ElementaryIntegral::point_masses(&u, w.clone()).unwrap();
        for mask in 0..16u64 {
            let e = RingSet::from_mask(&u, mask).unwrap();
            let expected = ExtReal::sum((0..4).filter(|k| mask >> k & 1 == 1).map(|k| &w[k]));
            assert_eq!(measure_from_integral(&i, &e, &cfg(2)).unwrap().value, expected);
        }
    }

    #[test]
    fn infinite_function_on_finite_universe_is_measurable() {
        let u = Universe::points(3);
        let i = ElementaryIntegral::counting(&u);
        let x = FiniteFunction::new(&u, vec![ExtReal::PosInf; 3]).unwrap();
        let probes = i.probes();
        let refs: Vec<&dyn MeasurableFunction> = probes.iter().map(|p| p.as_ref()).collect();
        assert!(is_daniell_measurable(&x, &refs, &i, &cfg(3)).unwrap().pass());
    }

    #[test]
    fn approximation_of_identity() {
        let len = ElementaryIntegral::length();
        let x = PiecewiseAffine::identity_on(int(0), int(1)).unwrap();
        let a = approximate_in_t0(&x, &len, &rat(1, 8), &cfg(16)).unwrap();
        assert_eq!(a.depth, Some(4));
        assert_eq!(a.distance_bound, ExtReal::Finite(rat(1, 16)));
        assert_eq!(a.function.eval(&crate::rings::Point::Real(rat(15, 32))).unwrap(), rat(7, 16));
        let s = SimpleFunction::indicator(&RingSet::interval(int(0), int(1)));
        let same = approximate_in_t0(&s, &len, &rat(1, 8), &cfg(16)).unwrap();
        assert_eq!((same.function, same.depth), (s, None));
    }

    #[test]
    fn approximation_out_of_reach() {
        let len = ElementaryIntegral::length();
        let x = PiecewiseAffine::identity_on(int(0), int(1)).unwrap();
        let err = approximate_in_t0(&x, &len, &rat(1, 1 << 20), &cfg(4)).unwrap_err();
        assert!(matches!(err, Error::Unreachable { .. }));
    }
}
