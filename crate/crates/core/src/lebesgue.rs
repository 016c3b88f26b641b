//! Compactly supported piecewise-linear functions on the line with the
//! exact Riemann integral, and interval length recovered through monotone
//! limits of ramps.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::extension::{
    i1_limit, AffineCell, Bracket, IntegralResult, LimitConfig, MeasurableFunction, MeasureEngine, MonotoneSequence,
    PiecewiseAffine,
};
use crate::functional::{verify_i_axioms, AxiomReport, Functional};
use crate::fuzz;
use crate::lattice::{ExtReal, VectorLattice};
use crate::rational::{self, int, Rational};
use crate::rings::{Point, RingSet, Universe};

/// Linear interpolation through `(xs[i], ys[i])`, zero outside
/// `[xs[0], xs[last]]`. Stored without redundant breakpoints, so equal
/// functions have equal representations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PiecewiseLinear {
    xs: Vec<Rational>,
    ys: Vec<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlOp {
    Meet,
    Join,
    Sum,
    Difference,
}

impl PlOp {
    fn apply(self, a: &Rational, b: &Rational) -> Rational {
        match self {
            PlOp::Meet => rational::min(a, b),
            PlOp::Join => rational::max(a, b),
            PlOp::Sum => a + b,
            PlOp::Difference => a - b,
        }
    }
}

impl std::str::FromStr for PlOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "meet" => Ok(PlOp::Meet),
            "join" => Ok(PlOp::Join),
            "sum" => Ok(PlOp::Sum),
            "difference" => Ok(PlOp::Difference),
            other => Err(Error::Malformed(format!("unknown operation {other:?}"))),
        }
    }
}

impl PiecewiseLinear {
    pub fn zero() -> Self {
        PiecewiseLinear::default()
    }

    /// Breakpoints must increase strictly and the end values must be zero.
    pub fn new(xs: Vec<Rational>, ys: Vec<Rational>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Malformed(format!("{} breakpoints but {} values", xs.len(), ys.len())));
        }
        if xs.len() == 1 {
            return Err(Error::Domain("a single breakpoint has no support".into()));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("breakpoints must increase strictly".into()));
        }
        if let (Some(a), Some(b)) = (ys.first(), ys.last()) {
            if !a.is_zero() || !b.is_zero() {
                return Err(Error::Domain("values at the end breakpoints must be 0".into()));
            }
        }
        Ok(Self::simplify(xs, ys))
    }

    /// The tent `(a,0) - (m,h) - (b,0)`.
    pub fn tent(a: Rational, m: Rational, b: Rational, h: Rational) -> Result<Self> {
        Self::new(vec![a, m, b], vec![Rational::zero(), h, Rational::zero()])
    }

    fn simplify(xs: Vec<Rational>, ys: Vec<Rational>) -> Self {
        let mut px: Vec<Rational> = Vec::with_capacity(xs.len());
        let mut py: Vec<Rational> = Vec::with_capacity(ys.len());
        for (x, y) in xs.into_iter().zip(ys) {
            while px.len() >= 2 {
                let k = px.len();
                let s1 = (&py[k - 1] - &py[k - 2]) / (&px[k - 1] - &px[k - 2]);
                let s2 = (&y - &py[k - 1]) / (&x - &px[k - 1]);
                if s1 == s2 {
                    px.pop();
                    py.pop();
                } else {
                    break;
                }
            }
            px.push(x);
            py.push(y);
        }
        let lead = py.windows(2).take_while(|w| w[0].is_zero() && w[1].is_zero()).count();
        px.drain(..lead);
        py.drain(..lead);
        while py.len() >= 2 && py[py.len() - 1].is_zero() && py[py.len() - 2].is_zero() {
            px.pop();
            py.pop();
        }
        if px.len() < 2 {
            return PiecewiseLinear::zero();
        }
        PiecewiseLinear { xs: px, ys: py }
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.xs
    }

    pub fn values(&self) -> &[Rational] {
        &self.ys
    }

    pub fn is_zero(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        if self.xs.is_empty() || t <= &self.xs[0] || t >= &self.xs[self.xs.len() - 1] {
            return Rational::zero();
        }
        let i = self.xs.partition_point(|x| x <= t) - 1;
        let (x0, x1, y0, y1) = (&self.xs[i], &self.xs[i + 1], &self.ys[i], &self.ys[i + 1]);
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        PiecewiseLinear {
            xs: self.xs.clone(),
            ys: self.ys.iter().map(|y| y * c).collect(),
        }
    }

    /// `max |f|`.
    pub fn sup(&self) -> Rational {
        self.ys.iter().map(|y| y.abs()).max().unwrap_or_else(Rational::zero)
    }

    /// Length of `[first, last]`.
    pub fn support_width(&self) -> Rational {
        match (self.xs.first(), self.xs.last()) {
            (Some(a), Some(b)) => b - a,
            _ => Rational::zero(),
        }
    }

    /// `|integral of f| <= width * sup`.
    pub fn sup_bound(&self) -> Rational {
        self.support_width() * self.sup()
    }

    fn affine(&self) -> PiecewiseAffine {
        let cells = self
            .xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| {
                let slope = (&y[1] - &y[0]) / (&x[1] - &x[0]);
                AffineCell {
                    intercept: &y[0] - &slope * &x[0],
                    slope,
                    lo: x[0].clone(),
                    hi: x[1].clone(),
                }
            })
            .collect();
        PiecewiseAffine::new(cells).expect("breakpoints increase")
    }

    pub fn to_json(&self) -> Value {
        let pts: Vec<Value> = self
            .xs
            .iter()
            .zip(&self.ys)
            .map(|(x, y)| json!([rational::rational_to_json(x), rational::rational_to_json(y)]))
            .collect();
        json!({ "points": pts })
    }

    /// `{"points": [[x, y], ...]}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let pts = v
            .get("points")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Malformed("expected {\"points\": [[x, y], ...]}".into()))?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for p in pts {
            let pair = p
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::Malformed(format!("point {p} is not a pair")))?;
            xs.push(rational::rational_from_json(&pair[0])?);
            ys.push(rational::rational_from_json(&pair[1])?);
        }
        Self::new(xs, ys)
    }
}

impl fmt::Display for PiecewiseLinear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let pts: Vec<String> = self
            .xs
            .iter()
            .zip(&self.ys)
            .map(|(x, y)| format!("({}, {})", rational::display(x), rational::display(y)))
            .collect();
        write!(f, "{}", pts.join(" - "))
    }
}

/// Exact trapezoid sum.
pub fn riemann_integral(f: &PiecewiseLinear) -> Rational {
    let half = rational::rat(1, 2);
    f.xs
        .windows(2)
        .zip(f.ys.windows(2))
        .map(|(x, y)| &half * (&y[0] + &y[1]) * (&x[1] - &x[0]))
        .sum()
}

/// The ramp rising over `[a, a + (b-a)/2n]`, equal to 1 up to
/// `b - (b-a)/2n`, and falling back to 0 at `b`.
pub fn ramp_sequence(a: &Rational, b: &Rational, n: usize) -> Result<PiecewiseLinear> {
    if a >= b {
        return Err(Error::Domain(format!(
            "ramp needs a < b, got [{}, {}]",
            rational::display(a),
            rational::display(b)
        )));
    }
    if n == 0 {
        return Err(Error::Precondition("ramp index starts at 1".into()));
    }
    let w = (b - a) / int(2 * n as i64);
    let (zero, one) = (Rational::zero(), Rational::one());
    PiecewiseLinear::new(
        vec![a.clone(), a + &w, b - &w, b.clone()],
        vec![zero.clone(), one.clone(), one, zero],
    )
    .or_else(|_| PiecewiseLinear::tent(a.clone(), (a + b) / int(2), b.clone(), Rational::one()))
}

/// Pointwise `op(f, g)` on the union of breakpoints, plus the crossing
/// points of `f - g` for meet and join.
pub fn pl_lattice_op(op: PlOp, f: &PiecewiseLinear, g: &PiecewiseLinear) -> PiecewiseLinear {
    let mut xs: Vec<Rational> = f.xs.iter().chain(&g.xs).cloned().collect();
    xs.sort();
    xs.dedup();
    if matches!(op, PlOp::Meet | PlOp::Join) {
        let mut crossings = Vec::new();
        for w in xs.windows(2) {
            let d0 = f.eval(&w[0]) - g.eval(&w[0]);
            let d1 = f.eval(&w[1]) - g.eval(&w[1]);
            if (d0.is_positive() && d1.is_negative()) || (d0.is_negative() && d1.is_positive()) {
                crossings.push(&w[0] + (&w[1] - &w[0]) * &d0 / (&d0 - &d1));
            }
        }
        xs.extend(crossings);
        xs.sort();
    }
    let ys: Vec<Rational> = xs.iter().map(|t| op.apply(&f.eval(t), &g.eval(t))).collect();
    PiecewiseLinear::simplify(xs, ys)
}

impl VectorLattice for PiecewiseLinear {
    fn zero_like(&self) -> Self {
        Self::zero()
    }

    fn plus(&self, other: &Self) -> Result<Self> {
        Ok(pl_lattice_op(PlOp::Sum, self, other))
    }

    fn scale(&self, c: &Rational) -> Self {
        PiecewiseLinear::scale(self, c)
    }

    fn meet(&self, other: &Self) -> Result<Self> {
        Ok(pl_lattice_op(PlOp::Meet, self, other))
    }

    fn join(&self, other: &Self) -> Result<Self> {
        Ok(pl_lattice_op(PlOp::Join, self, other))
    }

    fn abs(&self) -> Self {
        pl_lattice_op(PlOp::Join, self, &self.scale(&-Rational::one()))
    }

    fn value_at(&self, p: &Point) -> Result<Rational> {
        match p {
            Point::Real(t) => Ok(self.eval(t)),
            other => Err(Error::Domain(format!("{other} is not a real number"))),
        }
    }

    fn probe_points(&self) -> Vec<Point> {
        self.xs.iter().cloned().map(Point::Real).collect()
    }
}

impl MeasurableFunction for PiecewiseLinear {
    fn universe(&self) -> Universe {
        Universe::RealLine
    }

    fn value_at(&self, p: &Point) -> Result<ExtReal> {
        VectorLattice::value_at(self, p).map(ExtReal::Finite)
    }

    fn above(&self, c: &Rational) -> Result<RingSet> {
        self.affine().above(c)
    }

    fn below(&self, c: &Rational) -> Result<RingSet> {
        self.affine().below(c)
    }

    fn level_breaks(&self) -> Option<Vec<Rational>> {
        self.affine().level_breaks()
    }

    fn probe_points(&self) -> Vec<Point> {
        MeasurableFunction::probe_points(&self.affine())
    }

    fn is_nonnegative(&self) -> Result<bool> {
        Ok(self.ys.iter().all(|y| !y.is_negative()))
    }
}

/// The Riemann integral as an I-integral on piecewise-linear functions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RiemannIntegral;

impl Functional<PiecewiseLinear> for RiemannIntegral {
    fn apply(&self, x: &PiecewiseLinear) -> Result<Rational> {
        Ok(riemann_integral(x))
    }
}

/// The increasing ramps for `[a, b)` with the exact tail `(b-a)/2n`.
pub fn ramps(a: &Rational, b: &Rational) -> Result<MonotoneSequence<PiecewiseLinear>> {
    ramp_sequence(a, b, 1)?;
    let (ga, gb) = (a.clone(), b.clone());
    let width = b - a;
    Ok(MonotoneSequence::increasing(move |n| ramp_sequence(&ga, &gb, n).expect("a < b"))
        .with_tail_bound(move |n| &width / int(2 * n as i64)))
}

/// `I_1(chi_[a,b))` as the limit of ramp integrals.
pub fn interval_length_via_daniell(a: &Rational, b: &Rational, n_max: usize) -> Result<IntegralResult> {
    let seq = ramps(a, b)?;
    let cfg = LimitConfig {
        depth: n_max,
        ..LimitConfig::default()
    };
    i1_limit(&RiemannIntegral, &seq, &cfg)
}

/// Measures of interval unions read off ramp integrals at a fixed depth:
/// `[L (1 - 1/2d), L]` for each bounded component of length `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LebesgueEngine {
    pub depth: usize,
}

impl Default for LebesgueEngine {
    fn default() -> Self {
        LebesgueEngine { depth: 1000 }
    }
}

impl MeasureEngine for LebesgueEngine {
    fn universe(&self) -> Universe {
        Universe::RealLine
    }

    fn measure(&self, e: &RingSet) -> Result<Bracket> {
        let set = match e {
            RingSet::Real(s) => s,
            other => return Err(Error::UniverseMismatch(format!("{} is not a set of reals", other.universe()))),
        };
        let mut total = Bracket::exact(ExtReal::zero());
        for iv in set.intervals() {
            let part = match (iv.lo.finite(), iv.hi.finite()) {
                (Some(a), Some(b)) => {
                    let lo = riemann_integral(&ramp_sequence(a, b, self.depth)?);
                    let gap = (b - a) / int(2 * self.depth as i64);
                    Bracket {
                        value: ExtReal::Finite(lo.clone()),
                        lower: ExtReal::Finite(lo.clone()),
                        upper: ExtReal::Finite(lo + gap),
                    }
                }
                _ => Bracket::exact(ExtReal::PosInf),
            };
            total = total.add(&part);
        }
        Ok(total)
    }

    fn probes(&self) -> Vec<Arc<dyn MeasurableFunction>> {
        (-4..4)
            .map(|k| {
                let a = rational::rat(k, 2);
                let b = rational::rat(k + 3, 2);
                let f = ramp_sequence(&a, &b, 2).expect("a < b").scale(&rational::rat(k + 5, 2));
                Arc::new(f) as Arc<dyn MeasurableFunction>
            })
            .collect()
    }

    fn name(&self) -> String {
        format!("lebesgue(depth {})", self.depth)
    }
}

/// A random piecewise-linear function with quarter-grid breakpoints in
/// `[-4, 4]` and small rational values.
pub fn fuzz_piecewise_linear(rng: &mut impl Rng, max_points: usize) -> PiecewiseLinear {
    let inner = rng.random_range(0..=max_points);
    let mut xs: Vec<Rational> = (0..inner + 2).map(|_| rational::rat(rng.random_range(-16..=16), 4)).collect();
    xs.sort();
    xs.dedup();
    if xs.len() < 2 {
        return PiecewiseLinear::zero();
    }
    let n = xs.len();
    let ys: Vec<Rational> = (0..n)
        .map(|i| if i == 0 || i == n - 1 { Rational::zero() } else { fuzz::small_rational(rng, 4, 3) })
        .collect();
    PiecewiseLinear::new(xs, ys).expect("sorted, zero ends")
}

/// (D1)-(D3) for the Riemann integral on fuzzed pairs, with (D2) along
/// shrinking tents `1/n`-scaled and narrowing, plus the sup-norm bound
/// `width * sup` achieved at `depth`.
pub fn verify_riemann_axioms(seed: u64, pairs: usize, depth: usize) -> Result<Vec<AxiomReport>> {
    let mut rng = fuzz::rng(seed);
    let fuzz: Vec<(PiecewiseLinear, PiecewiseLinear)> = (0..pairs)
        .map(|_| (fuzz_piecewise_linear(&mut rng, 5), fuzz_piecewise_linear(&mut rng, 5)))
        .collect();
    let seqs = d2_sequences();
    let tol = rational::rat(1, depth as i64);
    let mut reports = verify_i_axioms(&RiemannIntegral, &seqs, &fuzz, depth, &tol)?;
    let worst = seqs
        .iter()
        .map(|s| s.term(depth).sup_bound())
        .max()
        .unwrap_or_else(Rational::zero);
    reports.push(AxiomReport {
        axiom: "D2 sup bound".into(),
        depth: Some(depth),
        achieved: rational::rational_to_json(&worst),
        tol: Some(rational::rational_to_json(&tol)),
        pass: worst <= tol,
        witness: None,
    });
    Ok(reports)
}

fn d2_sequences() -> Vec<MonotoneSequence<PiecewiseLinear>> {
    let shrink = MonotoneSequence::decreasing(|n| {
        PiecewiseLinear::tent(int(0), int(1), int(2), rational::rat(1, 2 * n as i64)).expect("tent")
    });
    let narrow = MonotoneSequence::decreasing(|n| {
        let r = rational::rat(1, n as i64);
        PiecewiseLinear::tent(-r.clone(), Rational::zero(), r.clone(), r).expect("tent")
    });
    vec![shrink, narrow]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{is_daniell_measurable, level_set_integral, measure_from_integral, LevelConfig};
    use crate::lattice::SimpleFunction;
    use crate::rational::rat;
    use crate::rings::IntervalSet;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest};

    #[test]
    fn triangle_and_zero() {
        let t = PiecewiseLinear::tent(int(0), int(1), int(2), int(1)).unwrap();
        assert_eq!(riemann_integral(&t), int(1));
        assert_eq!(riemann_integral(&PiecewiseLinear::zero()), int(0));
    }

    #[test]
    fn ramp_integrals() {
        let f1 = ramp_sequence(&int(0), &int(1), 1).unwrap();
        assert_eq!(riemann_integral(&f1), rat(1, 2));
        assert_eq!(f1.eval(&rat(1, 2)), int(1));
        for n in 1..40 {
            let f = ramp_sequence(&int(2), &int(5), n).unwrap();
            let expected = int(3) * (int(1) - rat(1, 2 * n as i64));
            assert_eq!(riemann_integral(&f), expected);
        }
        assert!(ramp_sequence(&int(1), &int(1), 1).is_err());
    }

    #[test]
    fn ramps_increase() {
        let f1 = ramp_sequence(&int(0), &int(1), 1).unwrap();
        let f2 = ramp_sequence(&int(0), &int(1), 2).unwrap();
        for k in 0..=100 {
            let t = rat(k, 100);
            assert!(f2.eval(&t) >= f1.eval(&t));
            assert!(f2.eval(&t) <= int(1));
        }
    }

    #[test]
    fn meet_adds_crossing() {
        let up = PiecewiseLinear::new(vec![int(0), int(2), int(3)], vec![int(0), int(2), int(0)]).unwrap();
        let down = PiecewiseLinear::new(vec![int(-1), int(0), int(2)], vec![int(0), int(2), int(0)]).unwrap();
        let m = pl_lattice_op(PlOp::Meet, &up, &down);
        assert!(m.breakpoints().contains(&int(1)));
        for k in -20..=40 {
            let t = rat(k, 10);
            assert_eq!(m.eval(&t), rational::min(&up.eval(&t), &down.eval(&t)));
        }
        assert_eq!(pl_lattice_op(PlOp::Join, &up, &up), up);
        assert_eq!(pl_lattice_op(PlOp::Sum, &up, &PiecewiseLinear::zero()), up);
    }

    #[test]
    fn interval_lengths() {
        let r = interval_length_via_daniell(&int(0), &int(1), 100).unwrap();
        assert_eq!(r.value, ExtReal::Finite(int(1) - rat(1, 200)));
        assert!(r.contains(&ExtReal::from_int(1)));
        let r = interval_length_via_daniell(&int(2), &int(5), 100).unwrap();
        assert!(r.contains(&ExtReal::from_int(3)));
        assert_eq!(r.upper, ExtReal::from_int(3));
        assert!(interval_length_via_daniell(&int(1), &int(1), 10).is_err());
    }

    #[test]
    fn riemann_axioms() {
        for r in verify_riemann_axioms(3, 50, 64).unwrap() {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn engine_measures() {
        let e = LebesgueEngine { depth: 50 };
        let cfg = LevelConfig {
            n_max: 3,
            ..LevelConfig::default()
        };
        let m = measure_from_integral(&e, &RingSet::interval(int(0), int(1)), &cfg).unwrap();
        assert!(m.contains(&ExtReal::from_int(1)));
        assert_eq!(m.upper, ExtReal::from_int(1));
        let u = RingSet::Real(IntervalSet::from_intervals([
            crate::rings::Interval::finite(int(0), rat(1, 2)),
            crate::rings::Interval::finite(int(2), rat(13, 4)),
        ]));
        let m = e.measure(&u).unwrap();
        assert_eq!(m.upper, ExtReal::Finite(rat(7, 4)));
        assert_eq!(m.lower, ExtReal::Finite(rat(7, 4) * (int(1) - rat(1, 100))));
    }

    #[test]
    fn indicator_measurable_under_ramp_probes() {
        let e = LebesgueEngine { depth: 20 };
        let chi = SimpleFunction::indicator(&RingSet::interval(int(0), int(1)));
        let probes = e.probes();
        let refs: Vec<&dyn MeasurableFunction> = probes.iter().map(|p| p.as_ref()).collect();
        let cfg = LevelConfig {
            n_max: 3,
            ..LevelConfig::default()
        };
        assert!(is_daniell_measurable(&chi, &refs, &e, &cfg).unwrap().pass());
    }

    #[test]
    fn level_sets_of_a_ramp() {
        let f = ramp_sequence(&int(0), &int(1), 2).unwrap();
        let len = crate::functional::ElementaryIntegral::length();
        let cfg = LevelConfig {
            n_max: 8,
            ..LevelConfig::default()
        };
        let r = level_set_integral(&f, &len, &cfg).unwrap();
        assert!(r.contains(&ExtReal::Finite(riemann_integral(&f))));
    }

    proptest! {
        #[test]
        fn lattice_ops_match_pointwise(seed in any::<u64>()) {
            let mut rng = fuzz::rng(seed);
            let f = fuzz_piecewise_linear(&mut rng, 5);
            let g = fuzz_piecewise_linear(&mut rng, 5);
            for op in [PlOp::Meet, PlOp::Join, PlOp::Sum, PlOp::Difference] {
                let h = pl_lattice_op(op, &f, &g);
                for _ in 0..200 {
                    let t = rat(rng.random_range(-1000..=1000), 199);
                    prop_assert_eq!(h.eval(&t), op.apply(&f.eval(&t), &g.eval(&t)));
                }
            }
        }

        #[test]
        fn level_bracket_contains_riemann(seed in any::<u64>()) {
            let mut rng = fuzz::rng(seed);
            let f = fuzz_piecewise_linear(&mut rng, 4).abs();
            let len = crate::functional::ElementaryIntegral::length();
            let cfg = LevelConfig { n_max: 5, ..LevelConfig::default() };
            let r = level_set_integral(&f, &len, &cfg).unwrap();
            prop_assert!(r.contains(&ExtReal::Finite(riemann_integral(&f))));
        }
    }
}
