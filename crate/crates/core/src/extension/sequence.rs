use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use super::IntegralResult;
use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::lattice::{ExtReal, VectorLattice};
use crate::rational::{self, Rational};
use crate::rings::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
}

type Generator<F> = Arc<dyn Fn(usize) -> F + Send + Sync>;
type TailBound = Arc<dyn Fn(usize) -> Rational + Send + Sync>;

/// A lazily generated monotone sequence `x_1, x_2, ...` of lattice
/// elements. Monotonicity is a claim until [`MonotoneSequence::verify`]
/// checks it.
#[derive(Clone)]
pub struct MonotoneSequence<F> {
    generator: Generator<F>,
    direction: Direction,
    tail_bound: Option<TailBound>,
    probes: Vec<Point>,
}

impl<F> fmt::Debug for MonotoneSequence<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneSequence")
            .field("direction", &self.direction)
            .field("tail_bound", &self.tail_bound.is_some())
            .field("probes", &self.probes.len())
            .finish()
    }
}

impl<F: VectorLattice> MonotoneSequence<F> {
    pub fn new(direction: Direction, generator: impl Fn(usize) -> F + Send + Sync + 'static) -> Self {
        MonotoneSequence {
            generator: Arc::new(generator),
            direction,
            tail_bound: None,
            probes: Vec::new(),
        }
    }

    pub fn increasing(generator: impl Fn(usize) -> F + Send + Sync + 'static) -> Self {
        Self::new(Direction::Increasing, generator)
    }

    pub fn decreasing(generator: impl Fn(usize) -> F + Send + Sync + 'static) -> Self {
        Self::new(Direction::Decreasing, generator)
    }

    /// A certified bound on `lim I(x_m) - I(x_n)`, used in place of the
    /// observed slack by [`i1_limit`].
    pub fn with_tail_bound(mut self, bound: impl Fn(usize) -> Rational + Send + Sync + 'static) -> Self {
        self.tail_bound = Some(Arc::new(bound));
        self
    }

    /// Extra comparison points on top of each term's own probes.
    pub fn with_probes(mut self, probes: Vec<Point>) -> Self {
        self.probes = probes;
        self
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// `x_n`, one-based.
    pub fn term(&self, n: usize) -> F {
        (self.generator)(n.max(1))
    }

    pub fn terms(&self, depth: usize) -> Vec<F> {
        (1..=depth).into_par_iter().map(|n| (self.generator)(n)).collect()
    }

    fn pair_violation(&self, n: usize, a: &F, b: &F) -> Result<Option<Error>> {
        let mut probes = a.probe_points();
        probes.extend(b.probe_points());
        probes.extend(self.probes.iter().cloned());
        for p in &probes {
            let (va, vb) = (a.value_at(p)?, b.value_at(p)?);
            let ok = match self.direction {
                Direction::Increasing => va <= vb,
                Direction::Decreasing => va >= vb,
            };
            if !ok {
                return Ok(Some(Error::NonMonotone {
                    index: n,
                    probe: p.to_string(),
                }));
            }
        }
        Ok(None)
    }

    /// Checks `x_n <= x_{n+1}` (or `>=`) for `n < depth` and returns the
    /// terms. The first failing index is reported.
    pub fn verify(&self, depth: usize) -> Result<Vec<F>> {
        let terms = self.terms(depth);
        let bad = (1..terms.len())
            .into_par_iter()
            .map(|n| self.pair_violation(n, &terms[n - 1], &terms[n]).map(|e| e.map(|e| (n, e))))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .min_by_key(|(n, _)| *n);
        match bad {
            Some((_, e)) => Err(e),
            None => Ok(terms),
        }
    }

    /// [`verify`](Self::verify) for a decreasing sequence of nonnegative
    /// functions, the hypothesis of continuity along `x_n -> 0`.
    pub fn verify_decreasing_nonnegative(&self, depth: usize) -> Result<Vec<F>> {
        if self.direction != Direction::Decreasing {
            return Err(Error::Precondition("sequence is not declared decreasing".into()));
        }
        let terms = self.verify(depth)?;
        if let Some(last) = terms.last() {
            let mut probes = last.probe_points();
            probes.extend(self.probes.iter().cloned());
            for p in probes {
                if last.value_at(&p)?.is_negative() {
                    return Err(Error::NonMonotone {
                        index: terms.len(),
                        probe: format!("{p} (negative value)"),
                    });
                }
            }
        }
        Ok(terms)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitConfig {
    pub depth: usize,
    /// Gap below which the sequence of values counts as settled.
    pub cauchy_tol: Rational,
    /// Values above this without a settled tail are reported as `+inf`.
    pub ceiling: Rational,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig {
            depth: 1000,
            cauchy_tol: rational::rat(1, 1_000_000),
            ceiling: rational::int(1_000_000_000),
        }
    }
}

/// `I_1(x) = lim I(x_n)` along an increasing sequence, evaluated at
/// `cfg.depth`. The bracket is `[I(x_d), I(x_d) + gap]` where `gap` is the
/// sequence's tail bound if it has one, otherwise the observed slack
/// `I(x_d) - I(x_{d/2})`.
pub fn i1_limit<F, I>(i: &I, seq: &MonotoneSequence<F>, cfg: &LimitConfig) -> Result<IntegralResult>
where
    F: VectorLattice,
    I: Functional<F>,
{
    if seq.direction() != Direction::Increasing {
        return Err(Error::Precondition("i1_limit needs an increasing sequence".into()));
    }
    if cfg.depth == 0 {
        return Err(Error::Precondition("depth must be positive".into()));
    }
    let terms = seq.verify(cfg.depth)?;
    let values = terms
        .par_iter()
        .map(|x| i.apply(x))
        .collect::<Result<Vec<_>>>()?;
    let last = values[values.len() - 1].clone();
    let gap = match &seq.tail_bound {
        Some(t) => t(cfg.depth),
        None => {
            let half = (cfg.depth / 2).max(1);
            &last - &values[half - 1]
        }
    };
    let history: Vec<ExtReal> = values.iter().cloned().map(ExtReal::Finite).collect();
    let settled = gap < cfg.cauchy_tol;
    if last > cfg.ceiling && !settled {
        return Ok(IntegralResult {
            value: ExtReal::PosInf,
            lower: ExtReal::Finite(last),
            upper: ExtReal::PosInf,
            depth: cfg.depth,
            converged: false,
            history,
        });
    }
    debug_assert!(!gap.is_negative() || gap.is_zero());
    Ok(IntegralResult {
        value: ExtReal::Finite(last.clone()),
        lower: ExtReal::Finite(last.clone()),
        upper: ExtReal::Finite(last + gap),
        depth: cfg.depth,
        converged: settled,
        history,
    })
}
