//! Invariant suites for every module and the combined `verify_all` run.

use num_traits::{Signed, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::dirichlet::{self, BoundarySequence, DiskDomain, DirichletConfig, DirichletFunctional, ExtendConfig, Shape};
use crate::error::Result;
use crate::extension::theorems::{self, FiniteExtension, SuiteReport};
use crate::functional::{verify_i_axioms, ElementaryIntegral, SignedFunctional};
use crate::fuzz;
use crate::lattice::{ExtReal, LatticeOp, SimpleFunction, Term, VectorLattice};
use crate::lebesgue;
use crate::rational::{self, int, rat, Rational};
use crate::rings::{check_additivity, Interval, IntervalSet, Point, PreMeasure, RingSet, Universe};
use crate::wiener::{self, Cylinder, Method, PremeasureConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    /// Smaller case counts and coarser grids.
    pub quick: bool,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { quick: true, seed: 0 }
    }
}

/// One line of the summary table.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckRecord {
    pub module: String,
    pub check: String,
    pub pass: bool,
    pub detail: Value,
}

impl CheckRecord {
    fn from_suite(module: &str, r: SuiteReport) -> Self {
        CheckRecord {
            module: module.into(),
            check: r.name.clone(),
            pass: r.pass(),
            detail: r.to_json(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"module": self.module, "check": self.check, "pass": self.pass, "detail": self.detail})
    }
}

/// Every two-term simple function `a chi_A + b chi_B` over all subsets of
/// universes with up to `max_points` atoms: the canonical form has
/// disjoint nonzero terms and agrees with the input at every atom.
pub fn canonicalize_suite(max_points: usize) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("canonicalize (exhaustive)");
    let coeffs = [int(1), int(-1), rat(3, 2)];
    for n in 1..=max_points {
        let u = Universe::points(n);
        let sets: Vec<RingSet> = (0..1u64 << n).map(|m| RingSet::from_mask(&u, m)).collect::<Result<_>>()?;
        for a in &sets {
            for b in &sets {
                for ca in &coeffs {
                    for cb in &coeffs {
                        let x = SimpleFunction::new(
                            &u,
                            vec![
                                Term { coeff: ca.clone(), set: a.clone() },
                                Term { coeff: cb.clone(), set: b.clone() },
                            ],
                        )?;
                        let c = x.canonicalize();
                        let mut ok = c.is_canonical();
                        for p in 0..n {
                            let pt = Point::Atom(p);
                            ok &= c.eval(&pt)? == x.eval(&pt)?;
                        }
                        let disjoint = c.terms().iter().enumerate().all(|(i, s)| {
                            !s.coeff.is_zero()
                                && c.terms()[i + 1..].iter().all(|t| s.set.intersect(&t.set).map(|m| m.is_empty()).unwrap_or(false))
                        });
                        rep.record(ok && disjoint, || format!("{x}"));
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// Restricted growth strings: every partition of `0..n` into blocks.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn go(i: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max + 1 {
            cur[i] = b;
            go(i + 1, max.max(b), cur, out);
        }
    }
    if n == 0 {
        return vec![Vec::new()];
    }
    go(1, 0, &mut cur, &mut out);
    out
}

/// Finite additivity on every partition of a `points`-atom universe (the
/// blocks of a partition of a subset, so every disjoint family appears),
/// against weights with zeros and infinities; overlapping families must
/// be rejected.
pub fn additivity_suite(points: usize, seed: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("pre-measure additivity (exhaustive)");
    let mut rng = fuzz::rng(seed);
    let u = Universe::points(points);
    let weights: Vec<ExtReal> = (0..points)
        .map(|_| match rng.random_range(0..4) {
            0 => ExtReal::zero(),
            1 => ExtReal::PosInf,
            _ => ExtReal::Finite(fuzz::small_rational(&mut rng, 3, 2).abs()),
        })
        .collect();
    let mu = PreMeasure::point_masses(&u, weights.clone())?;
    // label points+1 drops an atom, so families need not cover the universe
    for labels in set_partitions(points + 1) {
        let dropped = labels[points];
        let blocks = labels.iter().take(points).copied().max().map_or(0, |m| m + 1);
        let parts: Vec<RingSet> = (0..blocks)
            .filter(|&b| b != dropped)
            .map(|b| RingSet::finite(&u, (0..points).filter(|&p| labels[p] == b)))
            .collect::<Result<_>>()?;
        let r = check_additivity(&mu, &parts)?;
        let oracle = ExtReal::sum(
            (0..points)
                .filter(|&p| labels[p] != dropped)
                .map(|p| &weights[p])
                .collect::<Vec<_>>(),
        );
        rep.record(r.pass && r.lhs == oracle, || format!("partition {labels:?}"));
    }
    let a = RingSet::finite(&u, [0, 1])?;
    let b = RingSet::finite(&u, [1])?;
    rep.record(check_additivity(&mu, &[a, b]).is_err(), || "overlap accepted".into());
    Ok(rep)
}

/// Closed-form `S+` against the `2^n`-candidate supremum for fuzzed
/// integer weights in `[-5, 5]` on universes of `1..=max_atoms` atoms.
pub fn jordan_bruteforce_suite(seed: u64, max_atoms: usize, cases_per_size: usize) -> Result<SuiteReport> {
    let mut rng = fuzz::rng(seed);
    let mut rep = SuiteReport::new("S+ closed form vs brute force");
    for n in 1..=max_atoms {
        for _ in 0..cases_per_size {
            let w: Vec<i64> = (0..n).map(|_| rng.random_range(-5..=5)).collect();
            let s = SignedFunctional::from_ints(&w);
            let x = fuzz::nonnegative_simple(&mut rng, s.universe(), 4)?;
            let a = s.positive_part(&x)?;
            let b = s.positive_part_bruteforce(&x)?;
            rep.record(a == b, || format!("weights {w:?}, x = {x}"));
        }
    }
    Ok(rep)
}

/// `S = S+ - S-` and `|S| = S+ + S-` on fuzzed simple functions.
pub fn jordan_identity_suite(seed: u64, cases: usize) -> Result<SuiteReport> {
    let mut rng = fuzz::rng(seed);
    let mut rep = SuiteReport::new("S = S+ - S-, |S| = S+ + S-");
    for _ in 0..cases {
        let n = rng.random_range(1..=10);
        let w: Vec<i64> = (0..n).map(|_| rng.random_range(-5..=5)).collect();
        let s = SignedFunctional::from_ints(&w);
        let d = s.jordan_decompose();
        let x = fuzz::simple_function(&mut rng, s.universe(), 4)?;
        let split = s.s_plus(&x)? == d.plus.integrate_simple(&x)?;
        rep.record(split && d.identities_hold(&s, &x)?, || format!("weights {w:?}, x = {x}"));
    }
    Ok(rep)
}

/// On every universe of up to `max_atoms` atoms, every weight vector in
/// `[-b, b]^n` and every function with values in
/// `{-inf, -1, 0, 2, +inf}^n`: integrable for `|S|` exactly when integrable
/// for `S+` and `S-`, and then `|S| = S+ + S-` and `S = S+ - S-`.
pub fn integrability_suite(max_atoms: usize, b: i64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("L(S+) and L(S-) meet in L(|S|)");
    let grid = [ExtReal::NegInf, ExtReal::from_int(-1), ExtReal::zero(), ExtReal::from_int(2), ExtReal::PosInf];
    let side = (2 * b + 1) as usize;
    for n in 1..=max_atoms {
        let functions: Vec<Vec<ExtReal>> = (0..grid.len().pow(n as u32))
            .map(|mut c| {
                (0..n)
                    .map(|_| {
                        let v = grid[c % grid.len()].clone();
                        c /= grid.len();
                        v
                    })
                    .collect()
            })
            .collect();
        for code in 0..side.pow(n as u32) {
            let mut c = code;
            let w: Vec<i64> = (0..n)
                .map(|_| {
                    let v = (c % side) as i64 - b;
                    c /= side;
                    v
                })
                .collect();
            let ext = |f: fn(i64) -> i64| FiniteExtension::from_weights(w.iter().map(|&x| ExtReal::from_int(f(x))).collect());
            let plus = ext(|x| x.max(0))?;
            let minus = ext(|x| (-x).max(0))?;
            let abs = ext(|x| x.abs())?;
            for x in &functions {
                let (p, m, a) = (plus.integral(x), minus.integral(x), abs.integral(x));
                let ok = match (&p, &m, &a) {
                    (Some(p), Some(m), Some(a)) => {
                        let s: Rational = w
                            .iter()
                            .zip(x)
                            .filter(|(wi, _)| **wi != 0)
                            .map(|(wi, v)| v.finite().map(|r| r * int(*wi)).unwrap_or_else(Rational::zero))
                            .sum();
                        &(p + m) == a && p - m == s
                    }
                    (_, _, None) => p.is_none() || m.is_none(),
                    _ => false,
                };
                rep.record(ok, || format!("weights {w:?}, x = {x:?}"));
            }
        }
    }
    Ok(rep)
}

/// Pointwise agreement of lattice operations on the line with the oracle
/// at every probe point, and `x = x+ - x-`, `|x| = x+ + x-`.
pub fn lattice_suite(seed: u64, cases: usize) -> Result<SuiteReport> {
    let mut rng = fuzz::rng(seed);
    let mut rep = SuiteReport::new("lattice operations pointwise");
    for case in 0..cases {
        let x = fuzz::simple_function(&mut rng, &Universe::RealLine, 4)?;
        let y = fuzz::simple_function(&mut rng, &Universe::RealLine, 4)?;
        let c = fuzz::small_rational(&mut rng, 3, 4);
        let mut probes = x.probe_points();
        probes.extend(y.probe_points());
        probes.push(Point::Real(rat(1, 7)));
        let ops = [
            crate::lattice::lattice_op(LatticeOp::Plus, &x, Some(&y), None)?,
            crate::lattice::lattice_op(LatticeOp::Meet, &x, Some(&y), None)?,
            crate::lattice::lattice_op(LatticeOp::Join, &x, Some(&y), None)?,
            crate::lattice::lattice_op(LatticeOp::Abs, &x, None, None)?,
            crate::lattice::lattice_op(LatticeOp::Scale, &x, None, Some(&c))?,
        ];
        let mut ok = ops.iter().all(|f| f.is_canonical());
        for p in &probes {
            let (a, b) = (x.eval(p)?, y.eval(p)?);
            let expect = [&a + &b, rational::min(&a, &b), rational::max(&a, &b), a.abs(), &a * &c];
            for (f, e) in ops.iter().zip(&expect) {
                ok &= &f.eval(p)? == e;
            }
        }
        let parts = x.positive_part()?.minus(&x.negative_part()?)?;
        let abs = x.positive_part()?.plus(&x.negative_part()?)?;
        ok &= parts.same_function(&x)? && abs.same_function(&x.abs())?;
        rep.record(ok, || format!("case {case}: x = {x}, y = {y}"));
    }
    Ok(rep)
}

/// `mu(whole) = sum mu(cells)` for random product partitions of the
/// line at up to `max_times` times.
pub fn wiener_additivity_suite(seed: u64, cases: usize, max_times: usize, cfg: &PremeasureConfig) -> Result<SuiteReport> {
    let mut rng = fuzz::rng(seed);
    let mut rep = SuiteReport::new("wiener additivity on product partitions");
    let pool = [rat(1, 4), rat(1, 2), rat(3, 4)];
    for case in 0..cases {
        let k = rng.random_range(1..=max_times);
        let mut times: Vec<Rational> = fuzz::subset(&mut rng, pool.len()).into_iter().map(|i| pool[i].clone()).collect();
        times.truncate(k - 1);
        times.push(int(1));
        // each time gets cut points; the cells are products of pieces
        let pieces: Vec<Vec<IntervalSet>> = times
            .iter()
            .map(|_| {
                let cuts = rng.random_range(1..=2);
                let mut cs: Vec<Rational> = (0..cuts).map(|_| fuzz::small_rational(&mut rng, 2, 2)).collect();
                cs.sort();
                cs.dedup();
                let mut ends: Vec<ExtReal> = vec![ExtReal::NegInf];
                ends.extend(cs.into_iter().map(ExtReal::Finite));
                ends.push(ExtReal::PosInf);
                ends.windows(2)
                    .map(|w| IntervalSet::from_intervals([Interval { lo: w[0].clone(), hi: w[1].clone() }]))
                    .collect()
            })
            .collect();
        // a random block of the first time's pieces, the rest whole
        let first: Vec<usize> = (0..pieces[0].len()).filter(|_| rng.random_bool(0.6)).collect();
        let first = if first.is_empty() { vec![0] } else { first };
        let mut whole_sets: Vec<IntervalSet> = pieces.iter().map(|_| IntervalSet::whole_line()).collect();
        whole_sets[0] = first.iter().fold(IntervalSet::empty(), |acc, &i| acc.union(&pieces[0][i]));
        let grid: Vec<Rational> = std::iter::once(int(0)).chain(times.iter().cloned()).collect();
        let whole = Cylinder::new(grid.clone(), whole_sets)?;
        let mut cells: Vec<Vec<usize>> = first.iter().map(|&i| vec![i]).collect();
        for p in &pieces[1..] {
            cells = cells
                .into_iter()
                .flat_map(|c| (0..p.len()).map(move |j| [c.clone(), vec![j]].concat()))
                .collect();
        }
        let parts: Vec<Cylinder> = cells
            .iter()
            .map(|c| Cylinder::new(grid.clone(), c.iter().enumerate().map(|(t, &j)| pieces[t][j].clone()).collect()))
            .collect::<Result<_>>()?;
        let r = wiener::check_additivity_numeric(&whole, &parts, cfg)?;
        rep.record(r.pass, || format!("case {case}: {} parts, lhs {}, rhs {}", parts.len(), r.lhs, r.rhs));
    }
    Ok(rep)
}

fn bool_record(module: &str, check: &str, pass: bool, detail: Value) -> CheckRecord {
    CheckRecord {
        module: module.into(),
        check: check.into(),
        pass,
        detail,
    }
}

/// Runs every module's invariant suite.
pub fn verify_all(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let q = cfg.quick;
    let s = cfg.seed;
    let scale = |quick: usize, full: usize| if q { quick } else { full };
    let mut out = Vec::new();

    out.push(CheckRecord::from_suite("rings", additivity_suite(5, s)?));
    out.push(CheckRecord::from_suite("lattice", canonicalize_suite(scale(4, 6))?));
    out.push(CheckRecord::from_suite("lattice", lattice_suite(s, scale(50, 500))?));

    let mut rng = fuzz::rng(s);
    let pairs: Vec<(SimpleFunction, SimpleFunction)> = (0..scale(20, 200))
        .map(|_| {
            Ok((
                fuzz::simple_function(&mut rng, &Universe::RealLine, 3)?,
                fuzz::simple_function(&mut rng, &Universe::RealLine, 3)?,
            ))
        })
        .collect::<Result<_>>()?;
    let seqs = vec![crate::extension::MonotoneSequence::decreasing(|n| {
        SimpleFunction::term(rat(1, n as i64), &RingSet::interval(int(0), int(1)))
    })];
    for r in verify_i_axioms(&ElementaryIntegral::length(), &seqs, &pairs, 100, &rat(1, 50))? {
        out.push(bool_record("functional", &format!("length {}", r.axiom), r.pass, r.to_json()));
    }
    out.push(CheckRecord::from_suite("functional", jordan_bruteforce_suite(s, scale(8, 10), scale(10, 100))?));
    out.push(CheckRecord::from_suite("functional", jordan_identity_suite(s, scale(100, 1000))?));
    out.push(CheckRecord::from_suite("functional", integrability_suite(scale(2, 3), 2)?));

    let cases = scale(100, 1000);
    out.push(CheckRecord::from_suite("extension", theorems::monotone_convergence_suite(s, cases)?));
    out.push(CheckRecord::from_suite("extension", theorems::fatou_suite(s, cases)?));
    out.push(CheckRecord::from_suite("extension", theorems::dominated_convergence_suite(s, cases)?));
    out.push(CheckRecord::from_suite("extension", theorems::big_lemma_suite(s, cases)?));
    let (l, r) = theorems::strict_fatou_witness()?;
    out.push(bool_record(
        "extension",
        "strict fatou witness",
        l < r,
        json!({"lhs": rational::rational_to_json(&l), "rhs": rational::rational_to_json(&r)}),
    ));
    let w = theorems::structural_weights(s, scale(4, 5));
    out.push(CheckRecord::from_suite("extension", theorems::null_domination_suite(&w[..3])?));
    out.push(CheckRecord::from_suite("extension", theorems::sigma_ring_suite(&w)?));
    out.push(CheckRecord::from_suite("extension", theorems::completeness_suite(&w)?));
    let x = crate::extension::PiecewiseAffine::identity_on(int(0), int(1))?;
    let lc = crate::extension::LevelConfig {
        n_max: scale(10, 16) as u32,
        ..Default::default()
    };
    let li = crate::extension::level_set_integral(&x, &ElementaryIntegral::length(), &lc)?;
    out.push(bool_record(
        "extension",
        "level-set bracket contains 1/2",
        li.contains(&ExtReal::Finite(rat(1, 2))),
        li.to_json(),
    ));

    for r in lebesgue::verify_riemann_axioms(s, scale(20, 200), 100)? {
        out.push(bool_record("lebesgue", &format!("riemann {}", r.axiom), r.pass, r.to_json()));
    }
    let il = lebesgue::interval_length_via_daniell(&int(0), &int(1), 100)?;
    out.push(bool_record("lebesgue", "length of [0,1)", il.contains(&ExtReal::from_int(1)), il.to_json()));

    let pc = PremeasureConfig::default();
    let whole = wiener::wiener_premeasure(&Cylinder::whole(), Method::Quadrature, &pc)?;
    out.push(bool_record("wiener", "mu(X) = 1", (whole.value - 1.0).abs() < 1e-8, whole.to_json()));
    let half = wiener::wiener_premeasure(&Cylinder::at(int(1), wiener::ray_above(int(0)))?, Method::Quadrature, &pc)?;
    out.push(bool_record("wiener", "half line = 1/2", (half.value - 0.5).abs() < 1e-8, half.to_json()));
    out.push(CheckRecord::from_suite("wiener", wiener_additivity_suite(s, scale(3, 10), scale(2, 3), &pc)?));

    let h = if q { 1.0 / 32.0 } else { 1.0 / 128.0 };
    let disk = DiskDomain::new(Shape::UnitDisk, h)?;
    let dc = DirichletConfig {
        wos: dirichlet::WosConfig {
            walks: scale(10_000, 100_000),
            seed: s,
            ..Default::default()
        },
        ..Default::default()
    };
    out.push(CheckRecord::from_suite("dirichlet", dirichlet::maximum_principle_suite(&disk, s, scale(10, 50), &dc.sor)?));
    out.push(CheckRecord::from_suite("dirichlet", dirichlet::d2_suite(&disk, s, scale(10, 50), &dc)?));
    out.push(CheckRecord::from_suite("dirichlet", dirichlet::agreement_suite(&disk, s, scale(3, 10), &dc)?));
    let ix = DirichletFunctional::new(&disk, (0.0, 0.0), &dc)?;
    let ext = dirichlet::extend_boundary(
        &ix,
        &BoundarySequence::arc(0.0, std::f64::consts::PI)?,
        &ExtendConfig {
            depth: scale(16, 64),
            ..Default::default()
        },
    )?;
    out.push(bool_record(
        "dirichlet",
        "half-circle harmonic measure at the center",
        (ext.value - 0.5).abs() < if q { 5e-3 } else { 1e-3 },
        ext.to_json(),
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_are_counted_by_bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203];
        for (n, b) in bell.iter().enumerate() {
            assert_eq!(set_partitions(n).len(), *b);
        }
    }

    #[test]
    fn structural_suites() {
        assert!(canonicalize_suite(3).unwrap().pass());
        assert!(additivity_suite(4, 1).unwrap().pass());
        assert!(jordan_bruteforce_suite(1, 6, 10).unwrap().pass());
        assert!(jordan_identity_suite(1, 50).unwrap().pass());
        assert!(integrability_suite(2, 2).unwrap().pass());
        assert!(lattice_suite(1, 30).unwrap().pass());
    }

    #[test]
    fn wiener_additivity() {
        let r = wiener_additivity_suite(1, 3, 2, &PremeasureConfig::default()).unwrap();
        assert!(r.pass(), "{r:?}");
    }

    #[test]
    fn quick_run_passes() {
        let recs = verify_all(&VerifyConfig { quick: true, seed: 3 }).unwrap();
        let failed: Vec<_> = recs.iter().filter(|r| !r.pass).map(|r| r.to_json()).collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert!(recs.len() > 20);
    }
}
