use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use super::engine::{Bracket, MeasureEngine};
use super::{IntegralResult, MeasurableFunction};
use crate::error::{Error, Result};
use crate::lattice::ExtReal;
use crate::rational::{self, Rational};
use crate::rings::RingSet;

pub const DEFAULT_MAX_LEVEL: u32 = 16;

/// `E_{k,n} = set` for every `k` in `first..=last`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRun {
    pub first: u64,
    pub last: u64,
    pub set: RingSet,
}

impl LevelRun {
    pub fn count(&self) -> u64 {
        self.last - self.first + 1
    }
}

/// The list `E_{1,n}, ..., E_{4^n,n}`, stored as runs of equal sets.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicLevels {
    pub n: u32,
    runs: Vec<LevelRun>,
}

impl DyadicLevels {
    /// Always `4^n`.
    pub fn len(&self) -> u64 {
        1u64 << (2 * self.n)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn runs(&self) -> &[LevelRun] {
        &self.runs
    }

    /// `E_{k,n}` for `1 <= k <= 4^n`.
    pub fn get(&self, k: u64) -> Option<&RingSet> {
        let i = self.runs.partition_point(|r| r.last < k);
        self.runs.get(i).filter(|r| r.first <= k).map(|r| &r.set)
    }
}

fn ceil_u64(r: &Rational) -> u64 {
    rational::ceil_int(r).to_u64().unwrap_or(u64::MAX)
}

fn threshold(k: u64, n: u32) -> Rational {
    Rational::new(BigInt::from(k), rational::pow2(n))
}

/// Default cap on level sets built per depth when the function has no
/// finite range to group by.
const DEFAULT_BUDGET: u64 = 1 << 22;
const CHUNK: u64 = 2048;

pub(crate) fn level_runs(x: &dyn MeasurableFunction, n: u32, budget: u64) -> Result<Vec<LevelRun>> {
    let top = 1u64 << (2 * n);
    let scale = Rational::from_integer(rational::pow2(n));
    let mut runs = Vec::new();
    if let Some(mut breaks) = x.level_breaks() {
        breaks.retain(|b| *b >= Rational::zero());
        if breaks.first().map(|b| !b.is_zero()).unwrap_or(true) {
            breaks.insert(0, Rational::zero());
        }
        for (i, b) in breaks.iter().enumerate() {
            let first = ceil_u64(&(b * &scale)).max(1);
            let last = match breaks.get(i + 1) {
                Some(next) => ceil_u64(&(next * &scale)).saturating_sub(1).min(top),
                None => top,
            };
            if first > last || first > top {
                continue;
            }
            runs.push(LevelRun {
                first,
                last,
                set: x.above(b)?,
            });
        }
    } else {
        let mut k = 1u64;
        'outer: while k <= top {
            if k > budget {
                return Err(Error::NoConvergence(format!(
                    "more than {budget} nonempty level sets at depth {n}"
                )));
            }
            let end = (k + CHUNK - 1).min(top);
            let sets = (k..=end)
                .into_par_iter()
                .map(|j| x.above(&threshold(j, n)))
                .collect::<Result<Vec<_>>>()?;
            for (off, set) in sets.into_iter().enumerate() {
                let j = k + off as u64;
                if set.is_empty() {
                    runs.push(LevelRun { first: j, last: top, set });
                    break 'outer;
                }
                runs.push(LevelRun { first: j, last: j, set });
            }
            k = end + 1;
        }
    }
    for w in runs.windows(2) {
        if !w[1].set.is_subset(&w[0].set)? {
            return Err(Error::Nesting(format!(
                "E_{{{},{n}}} is not contained in E_{{{},{n}}}",
                w[1].first, w[0].last
            )));
        }
    }
    Ok(runs)
}

/// Dyadic level sets `E_{k,n} = {x > k 2^-n}`, `k = 1..4^n`, with nesting
/// `E_{k+1,n} c E_{k,n}` verified.
pub fn dyadic_levels(x: &dyn MeasurableFunction, n: u32) -> Result<DyadicLevels> {
    if n > DEFAULT_MAX_LEVEL {
        return Err(Error::Precondition(format!(
            "depth {n} exceeds the maximum {DEFAULT_MAX_LEVEL}"
        )));
    }
    if !x.is_nonnegative()? {
        return Err(Error::Precondition("level sets need a nonnegative function".into()));
    }
    Ok(DyadicLevels {
        n,
        runs: level_runs(x, n, DEFAULT_BUDGET)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelConfig {
    pub n_max: u32,
    /// Stop once successive partial sums differ by less than this; zero
    /// runs to `n_max`.
    pub tol: Rational,
    pub ceiling: Rational,
    /// Most level sets enumerated per depth for functions without a
    /// finite range.
    pub budget: u64,
}

impl Default for LevelConfig {
    fn default() -> Self {
        LevelConfig {
            n_max: DEFAULT_MAX_LEVEL,
            tol: Rational::zero(),
            ceiling: rational::int(1_000_000_000),
            budget: DEFAULT_BUDGET,
        }
    }
}

fn weighted_sum(runs: &[LevelRun], engine: &dyn MeasureEngine) -> Result<Bracket> {
    let parts = runs
        .par_iter()
        .filter(|r| !r.set.is_empty())
        .map(|r| {
            let m = engine.measure(&r.set)?;
            let c = Rational::from_integer(r.count().into());
            Ok(m.scale(&c))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.iter().fold(Bracket::exact(ExtReal::zero()), |acc, b| acc.add(b)))
}

/// The partial sums `S_n = 2^-n sum_k mu(E_{k,n})` for `n = 1..n_max`.
///
/// `S_n` is the integral of `phi_n <= x`, and where `x <= 2^n` the gap
/// `x - phi_n` is below `2^-n` on the support, so the bracket is
/// `[S_n, S_n + 2^-n mu({x > 0})]`. If `{x > 2^n}` has positive measure the
/// upper end is `+inf`.
pub fn level_set_integral(
    x: &dyn MeasurableFunction,
    engine: &dyn MeasureEngine,
    cfg: &LevelConfig,
) -> Result<IntegralResult> {
    engine.universe().ensure_same(&x.universe())?;
    if !x.is_nonnegative()? {
        return Err(Error::Precondition("level-set integration needs x >= 0".into()));
    }
    if cfg.n_max == 0 || cfg.n_max > 31 {
        return Err(Error::Precondition(format!("depth {} out of range 1..=31", cfg.n_max)));
    }
    let support = engine.measure(&x.above(&Rational::zero())?)?;
    let mut history: Vec<ExtReal> = Vec::new();
    let mut last: Option<IntegralResult> = None;
    for n in 1..=cfg.n_max {
        let runs = level_runs(x, n, cfg.budget)?;
        let h = rational::dyadic(n);
        let sum = weighted_sum(&runs, engine)?.scale(&h);
        let exceed = x.above(&Rational::from_integer(rational::pow2(n)))?;
        let exceed_null = exceed.is_empty() || engine.measure(&exceed)?.upper.is_zero();
        let upper = if exceed_null {
            sum.upper.ext_add(&support.upper.scale(&h))
        } else {
            ExtReal::PosInf
        };
        history.push(sum.value.clone());
        let too_big = match &sum.value {
            ExtReal::Finite(v) => v > &cfg.ceiling,
            ExtReal::PosInf => true,
            ExtReal::NegInf => false,
        };
        if too_big {
            return Ok(IntegralResult {
                value: ExtReal::PosInf,
                lower: sum.lower,
                upper: ExtReal::PosInf,
                depth: n as usize,
                converged: false,
                history,
            });
        }
        let settled = match (&last, cfg.tol.is_zero()) {
            (Some(prev), false) => {
                let d = sum.value.ext_add(&prev.value.neg()).abs();
                d < ExtReal::Finite(cfg.tol.clone())
            }
            _ => false,
        };
        let converged = upper.is_finite();
        last = Some(IntegralResult {
            value: sum.value,
            lower: sum.lower,
            upper,
            depth: n as usize,
            converged,
            history: Vec::new(),
        });
        if settled {
            break;
        }
    }
    let mut r = last.expect("at least one level");
    r.history = history;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{OracleFunction, PiecewiseAffine};
    use crate::functional::ElementaryIntegral;
    use crate::lattice::SimpleFunction;
    use crate::rational::{int, rat};
    use crate::rings::Universe;
    use std::sync::Arc;

    fn cfg(n: u32) -> LevelConfig {
        LevelConfig {
            n_max: n,
            ..LevelConfig::default()
        }
    }

    #[test]
    fn identity_partial_sums() {
        let x = PiecewiseAffine::identity_on(int(0), int(1)).unwrap();
        let len = ElementaryIntegral::length();
        let r = level_set_integral(&x, &len, &cfg(16)).unwrap();
        assert_eq!(r.history[0], ExtReal::Finite(rat(1, 4)));
        assert_eq!(r.history[1], ExtReal::Finite(rat(3, 8)));
        for (n, s) in r.history.iter().enumerate() {
            let gap = ExtReal::Finite(rat(1, 2)).ext_add(&s.neg());
            assert!(gap < ExtReal::Finite(rational::dyadic(n as u32 + 1)));
        }
        assert!(r.contains(&ExtReal::Finite(rat(1, 2))));
    }

    #[test]
    fn level_sets_of_identity() {
        let x = PiecewiseAffine::identity_on(int(0), int(1)).unwrap();
        let l = dyadic_levels(&x, 1).unwrap();
        assert_eq!(l.len(), 4);
        assert_eq!(l.get(1), Some(&RingSet::interval(rat(1, 2), int(1))));
        assert!(l.get(2).unwrap().is_empty());
        assert!(l.get(5).is_none());
    }

    #[test]
    fn scaled_indicator() {
        let x = SimpleFunction::term(int(2), &RingSet::interval(int(0), int(3)));
        let len = ElementaryIntegral::length();
        let r = level_set_integral(&x, &len, &cfg(5)).unwrap();
        assert_eq!(r.value, ExtReal::Finite(int(6) - rat(3, 32)));
        assert_eq!(r.upper, ExtReal::from_int(6));
    }

    #[test]
    fn unit_function_misses_the_top_level() {
        let x = SimpleFunction::indicator(&RingSet::interval(int(0), int(1)));
        let len = ElementaryIntegral::length();
        let r = level_set_integral(&x, &len, &cfg(3)).unwrap();
        assert_eq!(r.value, ExtReal::Finite(rat(7, 8)));
        assert_eq!(r.upper, ExtReal::from_int(1));
    }

    #[test]
    fn infinite_atom_grows_like_two_to_the_n() {
        let u = Universe::points(2);
        let x = crate::extension::FiniteFunction::new(&u, vec![ExtReal::PosInf, ExtReal::zero()]).unwrap();
        let l = dyadic_levels(&x, 3).unwrap();
        let total: u64 = l.runs().iter().filter(|r| !r.set.is_empty()).map(|r| r.count()).sum();
        assert_eq!(total, 64);
        let c = ElementaryIntegral::counting(&u);
        let r = level_set_integral(&x, &c, &cfg(3)).unwrap();
        assert_eq!(r.history[2], ExtReal::from_int(8));
        assert_eq!(r.upper, ExtReal::PosInf);
    }

    #[test]
    fn divergence_reports_infinity() {
        let u = Universe::points(1);
        let x = crate::extension::FiniteFunction::new(&u, vec![ExtReal::PosInf]).unwrap();
        let c = ElementaryIntegral::counting(&u);
        let cfg = LevelConfig {
            n_max: 10,
            ceiling: int(100),
            ..LevelConfig::default()
        };
        let r = level_set_integral(&x, &c, &cfg).unwrap();
        assert_eq!(r.value, ExtReal::PosInf);
        assert!(!r.converged);
    }

    #[test]
    fn broken_nesting_is_an_error() {
        let bad = OracleFunction {
            universe: Universe::RealLine,
            value: Arc::new(|_| Ok(ExtReal::zero())),
            above: Arc::new(|c| {
                // grows with the threshold
                Ok(RingSet::interval(int(0), c + int(1)))
            }),
            below: Arc::new(|_| Ok(RingSet::empty(&Universe::RealLine))),
            probes: Vec::new(),
        };
        let err = dyadic_levels(&bad, 2).unwrap_err();
        assert!(matches!(err, Error::Nesting(_)), "{err:?}");
    }

    #[test]
    fn negative_input_rejected() {
        let x = SimpleFunction::term(int(-1), &RingSet::interval(int(0), int(1)));
        let len = ElementaryIntegral::length();
        assert!(matches!(level_set_integral(&x, &len, &cfg(2)), Err(Error::Precondition(_))));
    }
}
