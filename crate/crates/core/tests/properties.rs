//! Property tests across the public API: rings, lattices, functionals and
//! the Wiener premeasure.

use daniell::functional::{ElementaryIntegral, Functional, SignedFunctional};
use daniell::fuzz;
use daniell::lattice::{ExtReal, SimpleFunction, VectorLattice};
use daniell::rational::{rat, Rational};
use daniell::rings::{BoolOp, IntervalSet, Point, PreMeasure, RingSet, Universe};
use daniell::wiener::{self, Cylinder, Method, PremeasureConfig};
use proptest::prelude::*;

fn interval_set() -> impl Strategy<Value = IntervalSet> {
    prop::collection::vec((-8i64..8, 1i64..6), 0..4).prop_map(|v| {
        IntervalSet::from_intervals(v.into_iter().map(|(a, w)| daniell::rings::Interval::finite(rat(a, 2), rat(a + w, 2))))
    })
}

fn ext_real() -> impl Strategy<Value = ExtReal> {
    prop_oneof![
        Just(ExtReal::NegInf),
        Just(ExtReal::PosInf),
        (-20i64..20, 1i64..5).prop_map(|(n, d)| ExtReal::Finite(rat(n, d))),
    ]
}

fn line_function() -> impl Strategy<Value = SimpleFunction> {
    any::<u64>().prop_map(|s| fuzz::simple_function(&mut fuzz::rng(s), &Universe::RealLine, 4).unwrap())
}

fn probes(fs: &[&SimpleFunction]) -> Vec<Point> {
    let mut p: Vec<Point> = fs.iter().flat_map(|f| f.probe_points()).collect();
    p.push(Point::Real(rat(-101, 3)));
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn boolean_ops_are_pointwise(a in interval_set(), b in interval_set()) {
        for k in -20..24 {
            let t = rat(k, 4);
            for op in [BoolOp::Union, BoolOp::Intersect, BoolOp::Difference] {
                let c = a.combine(op, &b);
                prop_assert_eq!(c.contains(&t), op.apply(a.contains(&t), b.contains(&t)));
            }
        }
    }

    #[test]
    fn interval_length_is_additive(a in interval_set(), b in interval_set()) {
        let u = a.union(&b).length();
        let split = a.length().ext_add(&b.difference(&a).length());
        prop_assert_eq!(u, split);
    }

    #[test]
    fn point_masses_are_monotone(w in prop::collection::vec(ext_real(), 1..7), m1 in any::<u64>(), m2 in any::<u64>()) {
        let n = w.len();
        let w: Vec<ExtReal> = w.into_iter().map(|x| x.abs()).collect();
        let u = Universe::points(n);
        let mu = PreMeasure::point_masses(&u, w).unwrap();
        let mask = (1u64 << n) - 1;
        let small = RingSet::from_mask(&u, m1 & m2 & mask).unwrap();
        let big = RingSet::from_mask(&u, (m1 | m2) & mask).unwrap();
        prop_assert!(mu.eval(&small).unwrap() <= mu.eval(&big).unwrap());
    }

    #[test]
    fn extended_addition_commutes(a in ext_real(), b in ext_real()) {
        prop_assert_eq!(a.ext_add(&b), b.ext_add(&a));
        prop_assert_eq!(a.neg().neg(), a.clone());
        prop_assert_eq!(a.ext_add(&a.neg()), ExtReal::zero());
    }

    #[test]
    fn lattice_identities(x in line_function(), y in line_function()) {
        let lhs = x.meet(&y).unwrap().plus(&x.join(&y).unwrap()).unwrap();
        prop_assert!(lhs.same_function(&x.plus(&y).unwrap()).unwrap());
        prop_assert!(x.abs().same_function(&x.join(&x.scale(&rat(-1, 1))).unwrap()).unwrap());
        let c = x.canonicalize();
        prop_assert!(c.is_canonical());
        prop_assert_eq!(c.canonicalize(), c.clone());
        prop_assert_eq!(SimpleFunction::from_json(&c.to_json()).unwrap().canonicalize(), c);
        for p in probes(&[&x, &y]) {
            let m = x.meet(&y).unwrap().value_at(&p).unwrap();
            prop_assert_eq!(m, x.value_at(&p).unwrap().min(y.value_at(&p).unwrap()));
        }
    }

    #[test]
    fn length_integral_is_linear_and_positive(x in line_function(), y in line_function(), c in -6i64..6) {
        let i = ElementaryIntegral::length();
        let c = rat(c, 3);
        let combo = x.scale(&c).plus(&y).unwrap();
        prop_assert_eq!(i.apply(&combo).unwrap(), &c * i.apply(&x).unwrap() + i.apply(&y).unwrap());
        prop_assert!(i.apply(&x.abs()).unwrap() >= Rational::from_integer(0.into()));
        if x.le(&y).unwrap() {
            prop_assert!(i.apply(&x).unwrap() <= i.apply(&y).unwrap());
        }
    }

    #[test]
    fn positive_part_is_additive_on_the_cone(w in prop::collection::vec(-5i64..=5, 1..8), s in any::<u64>()) {
        let sf = SignedFunctional::from_ints(&w);
        let mut rng = fuzz::rng(s);
        let x = fuzz::nonnegative_simple(&mut rng, sf.universe(), 3).unwrap();
        let y = fuzz::nonnegative_simple(&mut rng, sf.universe(), 3).unwrap();
        let sum = sf.positive_part(&x.plus(&y).unwrap()).unwrap();
        prop_assert_eq!(sum, sf.positive_part(&x).unwrap() + sf.positive_part(&y).unwrap());
        let zero = Rational::from_integer(0.into());
        prop_assert!(sf.positive_part(&x).unwrap() >= sf.apply(&x).unwrap().max(zero));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn single_time_cylinder_is_gaussian(t in 1i64..8, a in -6i64..6, w in 1i64..6) {
        let t = rat(t, 8);
        let (lo, hi) = (rat(a, 2), rat(a + w, 2));
        let c = Cylinder::at(t.clone(), IntervalSet::single(lo.clone(), hi.clone())).unwrap();
        let e = wiener::wiener_premeasure(&c, Method::Quadrature, &PremeasureConfig::default()).unwrap();
        let sd = daniell::rational::to_f64(&t).sqrt();
        let phi = |z: f64| 0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2);
        let oracle = phi(daniell::rational::to_f64(&hi) / sd) - phi(daniell::rational::to_f64(&lo) / sd);
        prop_assert!((e.value - oracle).abs() < 1e-9, "{} vs {}", e.value, oracle);
    }
}
