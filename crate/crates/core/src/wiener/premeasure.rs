use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde_json::{json, Value};
use statrs::function::erf::erfc;

use super::quad;
use super::{Cylinder, CylinderUnion};
use crate::error::{Error, Result};
use crate::lattice::ExtReal;
use crate::rational::{self, Rational};
use crate::rings::IntervalSet;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Most constrained times the quadrature path accepts; beyond this the
/// nested integrals get too expensive and Monte Carlo is the tool.
pub const MAX_QUADRATURE_STEPS: usize = 5;

/// Transition kernel for Brownian increments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Kernel {
    /// `exp(-dx^2 / (2 dt)) / sqrt(2 pi dt)`, a probability density.
    #[default]
    Standard,
    /// `exp(-dx^2 / dt) / sqrt(2 pi dt)`, which integrates to `1/sqrt 2`.
    HalfVariance,
}

impl Kernel {
    /// Variance multiplier `s` and amplitude `a` such that the kernel is
    /// `a` times the centered normal density with variance `s * dt`.
    fn params(self) -> (f64, f64) {
        match self {
            Kernel::Standard => (1.0, 1.0),
            Kernel::HalfVariance => (0.5, std::f64::consts::FRAC_1_SQRT_2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Standard => "standard",
            Kernel::HalfVariance => "half-variance",
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Kernel::Standard),
            "paper" | "half-variance" => Ok(Kernel::HalfVariance),
            _ => Err(Error::Malformed(format!("unknown kernel {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Quadrature,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quad" | "quadrature" => Ok(Method::Quadrature),
            "mc" | "monte-carlo" | "montecarlo" => Ok(Method::MonteCarlo),
            _ => Err(Error::Malformed(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PremeasureConfig {
    pub kernel: Kernel,
    /// Absolute tolerance for quadrature.
    pub tol: f64,
    pub max_segments: usize,
    /// Monte Carlo sample size.
    pub paths: u64,
    pub seed: u64,
}

impl Default for PremeasureConfig {
    fn default() -> Self {
        PremeasureConfig {
            kernel: Kernel::Standard,
            tol: 1e-10,
            max_segments: 4000,
            paths: 1_000_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Quadrature: estimated absolute error. Monte Carlo: three standard errors.
    pub error_bound: f64,
    pub method: Method,
    pub stderr: Option<f64>,
    pub quad_error: Option<f64>,
}

impl Estimate {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "value": self.value,
            "error_bound": self.error_bound,
            "method": self.method.name(),
        });
        if let Some(s) = self.stderr {
            v["stderr"] = json!(s);
        }
        if let Some(q) = self.quad_error {
            v["quad_error"] = json!(q);
        }
        v
    }
}

fn f64_intervals(s: &IntervalSet) -> Vec<(f64, f64)> {
    s.intervals()
        .iter()
        .map(|i| (i.lo.to_f64(), i.hi.to_f64()))
        .collect()
}

fn upper_tail(z: f64) -> f64 {
    0.5 * erfc(z * std::f64::consts::FRAC_1_SQRT_2)
}

/// `P(N(mean, sd^2) in [lo, hi))` evaluated on the tail that avoids
/// cancellation.
pub fn normal_interval_prob(mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    if !(lo < hi) {
        return 0.0;
    }
    let za = (lo - mean) / sd;
    let zb = (hi - mean) / sd;
    let p = if za >= 0.0 {
        upper_tail(za) - upper_tail(zb)
    } else if zb <= 0.0 {
        upper_tail(-zb) - upper_tail(-za)
    } else {
        1.0 - upper_tail(-za) - upper_tail(zb)
    };
    p.max(0.0)
}

fn set_prob(mean: f64, sd: f64, set: &[(f64, f64)]) -> f64 {
    set.iter()
        .map(|&(a, b)| normal_interval_prob(mean, sd, a, b))
        .sum()
}

fn density(x: f64, var: f64) -> f64 {
    FRAC_1_SQRT_2PI / var.sqrt() * (-x * x / (2.0 * var)).exp()
}

struct Chain {
    s: f64,
    amp: f64,
    /// cumulative times `T_1 < ... < T_n`
    times: Vec<f64>,
    sets: Vec<Vec<(f64, f64)>>,
    tol: f64,
    max_segments: usize,
}

impl Chain {
    fn dt(&self, k: usize) -> f64 {
        if k == 0 {
            self.times[0]
        } else {
            self.times[k] - self.times[k - 1]
        }
    }

    /// Integrates `f` over a union of intervals, standardizing infinite
    /// pieces by `scale` so the range map sees unit-width mass.
    fn integrate_over(
        &self,
        f: &(dyn Fn(f64) -> (f64, f64) + Sync),
        set: &[(f64, f64)],
        scale: f64,
        tol: f64,
    ) -> Result<(f64, f64)> {
        let mut v = 0.0;
        let mut e = 0.0;
        let per = tol / set.len().max(1) as f64;
        for &(a, b) in set {
            let r = if a.is_finite() && b.is_finite() {
                quad::integrate(&|x| f(x), a, b, per, self.max_segments)?
            } else {
                let g = |u: f64| {
                    let (fv, fe) = f(u * scale);
                    (fv * scale, fe * scale)
                };
                quad::integrate(&g, a / scale, b / scale, per, self.max_segments)?
            };
            v += r.value;
            e += r.error;
        }
        Ok((v, e))
    }

    /// Sub-density of `W_{T_k}` at `y` over paths meeting `B_0..B_{k-1}`
    /// (zero-based `k`), with the `x_1` layer done in closed form.
    fn density_at(&self, k: usize, y: f64, tol: f64) -> Result<(f64, f64)> {
        let (s, a) = (self.s, self.amp);
        match k {
            0 => Ok((a * density(y, s * self.times[0]), 0.0)),
            1 => {
                let (t1, t2) = (self.times[0], self.times[1]);
                let d2 = t2 - t1;
                let mean = y * t1 / t2;
                let sd = (s * t1 * d2 / t2).sqrt();
                Ok((a * a * density(y, s * t2) * set_prob(mean, sd, &self.sets[0]), 0.0))
            }
            _ => {
                let var = s * self.dt(k);
                let f = |x: f64| -> (f64, f64) {
                    match self.density_at(k - 1, x, tol) {
                        Ok((g, e)) => {
                            let w = a * density(y - x, var);
                            (g * w, e * w)
                        }
                        Err(_) => (f64::NAN, f64::INFINITY),
                    }
                };
                let scale = (s * self.times[k - 1]).sqrt();
                self.integrate_over(&f, &self.sets[k - 1], scale, tol)
            }
        }
    }

    fn mass(&self) -> Result<(f64, f64)> {
        let n = self.times.len();
        let (s, a) = (self.s, self.amp);
        if n == 1 {
            let p = set_prob(0.0, (s * self.times[0]).sqrt(), &self.sets[0]);
            return Ok((a * p, 0.0));
        }
        let last_sd = (s * self.dt(n - 1)).sqrt();
        let inner_tol = self.tol * 1e-2;
        let f = |x: f64| -> (f64, f64) {
            match self.density_at(n - 2, x, inner_tol) {
                Ok((g, e)) => {
                    let h = a * set_prob(x, last_sd, &self.sets[n - 1]);
                    (g * h, e * h)
                }
                Err(_) => (f64::NAN, f64::INFINITY),
            }
        };
        let scale = (s * self.times[n - 2]).sqrt();
        let (v, e) = self.integrate_over(&f, &self.sets[n - 2], scale, self.tol / 2.0)?;
        if !v.is_finite() {
            return Err(Error::Unreachable {
                tol: format!("{:e}", self.tol),
                achieved: "inner quadrature failed".into(),
            });
        }
        Ok((v, e))
    }
}

/// The integration chain for `d` plus the number of trailing
/// unconstrained steps that were dropped from it.
fn chain_for(d: &Cylinder, cfg: &PremeasureConfig) -> Result<(Chain, usize)> {
    let (s, amp) = cfg.kernel.params();
    let mut times: Vec<f64> = d.times()[1..].iter().map(rational::to_f64).collect();
    let mut sets: Vec<Vec<(f64, f64)>> = d.sets().iter().map(f64_intervals).collect();
    let mut dropped = 0;
    while sets.len() > 1 && d.sets()[sets.len() - 1] == IntervalSet::whole_line() {
        sets.pop();
        times.pop();
        dropped += 1;
    }
    if sets.len() > MAX_QUADRATURE_STEPS {
        return Err(Error::Domain(format!(
            "quadrature handles at most {MAX_QUADRATURE_STEPS} constrained times, got {}; use Monte Carlo",
            sets.len()
        )));
    }
    let chain = Chain {
        s,
        amp,
        times,
        sets,
        tol: cfg.tol,
        max_segments: cfg.max_segments,
    };
    Ok((chain, dropped))
}

fn quadrature_cylinder(d: &Cylinder, cfg: &PremeasureConfig) -> Result<(f64, f64)> {
    if d.is_empty() {
        return Ok((0.0, 0.0));
    }
    let (chain, dropped) = chain_for(d, cfg)?;
    let (v, e) = chain.mass()?;
    // each dropped whole-line step contributes the kernel's total mass
    let factor = chain.amp.powi(dropped as i32);
    Ok((v * factor, e * factor))
}

/// Premeasure of a single cylinder.
pub fn wiener_premeasure(d: &Cylinder, method: Method, cfg: &PremeasureConfig) -> Result<Estimate> {
    premeasure_union(&CylinderUnion::single(d.clone()), method, cfg)
}

/// Premeasure of a ring element (disjoint union of cylinders).
pub fn premeasure_union(
    u: &CylinderUnion,
    method: Method,
    cfg: &PremeasureConfig,
) -> Result<Estimate> {
    if !(cfg.tol > 0.0) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    match method {
        Method::Quadrature => {
            let mut v = 0.0;
            let mut e = 0.0;
            let n = u.parts().len().max(1) as f64;
            let part_cfg = PremeasureConfig {
                tol: cfg.tol / n,
                ..cfg.clone()
            };
            for c in u.parts() {
                let (pv, pe) = quadrature_cylinder(c, &part_cfg)?;
                v += pv;
                e += pe;
            }
            if e > cfg.tol {
                return Err(Error::Unreachable {
                    tol: format!("{:e}", cfg.tol),
                    achieved: format!("{e:e}"),
                });
            }
            Ok(Estimate {
                value: v,
                error_bound: e,
                method,
                stderr: None,
                quad_error: Some(e),
            })
        }
        Method::MonteCarlo => {
            let (value, stderr) = monte_carlo(u, cfg)?;
            Ok(Estimate {
                value,
                error_bound: 3.0 * stderr,
                method,
                stderr: Some(stderr),
                quad_error: None,
            })
        }
    }
}

const BATCH: u64 = 1 << 16;

fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// Fills `row` with `W_{t_1}, ..., W_{t_n}` from Gaussian increments.
fn fill_path(rng: &mut ChaCha8Rng, sds: &[f64], row: &mut [f64]) {
    let mut w = 0.0;
    for (x, sd) in row.iter_mut().zip(sds) {
        let z: f64 = StandardNormal.sample(rng);
        w += sd * z;
        *x = w;
    }
}

fn increment_sds(times: &[f64], s: f64) -> Vec<f64> {
    let mut prev = 0.0;
    times
        .iter()
        .map(|&t| {
            let sd = (s * (t - prev)).sqrt();
            prev = t;
            sd
        })
        .collect()
}

struct PartCheck {
    slots: Vec<usize>,
    sets: Vec<Vec<(f64, f64)>>,
    weight: f64,
}

impl PartCheck {
    fn hit(&self, row: &[f64]) -> bool {
        self.slots.iter().zip(&self.sets).all(|(&i, set)| {
            let x = row[i];
            set.iter().any(|&(a, b)| a <= x && x < b)
        })
    }
}

fn monte_carlo(u: &CylinderUnion, cfg: &PremeasureConfig) -> Result<(f64, f64)> {
    if cfg.paths == 0 {
        return Err(Error::Precondition("need at least one path".into()));
    }
    if u.is_empty() {
        return Ok((0.0, 0.0));
    }
    let (s, amp) = cfg.kernel.params();
    let grid = u.all_times();
    let grid_f: Vec<f64> = grid.iter().map(rational::to_f64).collect();
    let sds = increment_sds(&grid_f, s);
    let checks: Vec<PartCheck> = u
        .parts()
        .iter()
        .map(|c| PartCheck {
            slots: c.times()[1..]
                .iter()
                .map(|t| grid.binary_search(t).expect("grid holds every part time"))
                .collect(),
            sets: c.sets().iter().map(f64_intervals).collect(),
            weight: amp.powi(c.steps() as i32),
        })
        .collect();
    let batches = cfg.paths.div_ceil(BATCH);
    let counts: Vec<Vec<u64>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(cfg.seed, b);
            let size = BATCH.min(cfg.paths - b * BATCH);
            let mut row = vec![0.0; grid_f.len()];
            let mut hits = vec![0u64; checks.len()];
            for _ in 0..size {
                fill_path(&mut rng, &sds, &mut row);
                if let Some(i) = checks.iter().position(|c| c.hit(&row)) {
                    hits[i] += 1;
                }
            }
            hits
        })
        .collect();
    let mut hits = vec![0u64; checks.len()];
    for c in &counts {
        for (h, x) in hits.iter_mut().zip(c) {
            *h += x;
        }
    }
    let n = cfg.paths as f64;
    let mut mean = 0.0;
    let mut second = 0.0;
    for (c, &h) in checks.iter().zip(&hits) {
        let p = h as f64 / n;
        mean += c.weight * p;
        second += c.weight * c.weight * p;
    }
    let var = (second - mean * mean).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// Sampled Brownian values: row `r` holds `W_{t_1}, ..., W_{t_n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathMatrix {
    pub times: Vec<Rational>,
    pub data: Vec<f64>,
}

impl PathMatrix {
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.times.len().max(1))
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.times.len().max(1)
    }

    /// Column `j`, i.e. all samples of `W_{t_j}`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }
}

/// Deterministic for a fixed seed, independent of thread count.
pub fn sample_paths(times: &[Rational], count: usize, seed: u64, kernel: Kernel) -> Result<PathMatrix> {
    if count == 0 {
        return Err(Error::Precondition("count must be at least 1".into()));
    }
    if times.is_empty() || times[0] <= Rational::from_integer(0.into()) || times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("sample times must be positive and increasing".into()));
    }
    let (s, _) = kernel.params();
    let tf: Vec<f64> = times.iter().map(rational::to_f64).collect();
    let sds = increment_sds(&tf, s);
    let m = times.len();
    let mut data = vec![0.0; count * m];
    data.par_chunks_mut(BATCH as usize * m)
        .enumerate()
        .for_each(|(b, chunk)| {
            let mut rng = batch_rng(seed, b as u64);
            for row in chunk.chunks_mut(m) {
                fill_path(&mut rng, &sds, row);
            }
        });
    Ok(PathMatrix {
        times: times.to_vec(),
        data,
    })
}

/// Numeric additivity `mu(D) = sum mu(D_k)` for a cylinder split into
/// disjoint pieces.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericAdditivity {
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
    pub pass: bool,
}

impl NumericAdditivity {
    pub fn to_json(&self) -> Value {
        json!({"lhs": self.lhs, "rhs": self.rhs, "tol": self.tol, "pass": self.pass})
    }
}

pub fn check_additivity_numeric(
    whole: &Cylinder,
    parts: &[Cylinder],
    cfg: &PremeasureConfig,
) -> Result<NumericAdditivity> {
    for (i, a) in parts.iter().enumerate() {
        for b in &parts[i + 1..] {
            let meet = a.intersect(b);
            if !meet.is_empty() {
                let w = meet
                    .witness()
                    .map(|p| format!("{:?}", p.values()))
                    .unwrap_or_default();
                return Err(Error::Overlap { witness: w });
            }
        }
    }
    let w = CylinderUnion::single(whole.clone());
    let u = CylinderUnion::from_cylinders(parts.iter().cloned());
    if !w.difference(&u).is_empty() || !u.difference(&w).is_empty() {
        return Err(Error::Precondition("parts do not cover the cylinder exactly".into()));
    }
    let lhs = wiener_premeasure(whole, Method::Quadrature, cfg)?.value;
    let mut rhs = 0.0;
    for p in parts {
        rhs += wiener_premeasure(p, Method::Quadrature, cfg)?.value;
    }
    let tol = cfg.tol * (parts.len() + 1) as f64;
    Ok(NumericAdditivity {
        lhs,
        rhs,
        tol,
        pass: (lhs - rhs).abs() <= tol,
    })
}

/// `1/4 + asin(sqrt(t1/t2)) / (2 pi)`: probability that `W_{t1} >= 0` and
/// `W_{t2} >= 0`.
pub fn orthant_probability(t1: f64, t2: f64) -> f64 {
    0.25 + (t1 / t2).sqrt().asin() / (2.0 * std::f64::consts::PI)
}

/// Ray `[c, +inf)`.
pub fn ray_above(c: Rational) -> IntervalSet {
    IntervalSet::from_intervals([crate::rings::Interval {
        lo: ExtReal::Finite(c),
        hi: ExtReal::PosInf,
    }])
}

/// Ray `(-inf, c)`.
pub fn ray_below(c: Rational) -> IntervalSet {
    IntervalSet::from_intervals([crate::rings::Interval {
        lo: ExtReal::NegInf,
        hi: ExtReal::Finite(c),
    }])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn cfg() -> PremeasureConfig {
        PremeasureConfig::default()
    }

    #[test]
    fn whole_space_has_mass_one() {
        let e = wiener_premeasure(&Cylinder::whole(), Method::Quadrature, &cfg()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_line_at_one() {
        let d = Cylinder::at(int(1), ray_above(int(0))).unwrap();
        let e = wiener_premeasure(&d, Method::Quadrature, &cfg()).unwrap();
        assert!((e.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn orthant_matches_arcsine_formula() {
        let d = Cylinder::new(
            vec![int(0), rat(1, 2), int(1)],
            vec![ray_above(int(0)), ray_above(int(0))],
        )
        .unwrap();
        let e = wiener_premeasure(&d, Method::Quadrature, &cfg()).unwrap();
        assert!((e.value - orthant_probability(0.5, 1.0)).abs() < 1e-9, "{}", e.value);
        assert!((orthant_probability(0.5, 1.0) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn three_times_agree_with_monte_carlo() {
        let d = Cylinder::new(
            vec![int(0), rat(1, 4), rat(1, 2), int(1)],
            vec![ray_above(int(0)), IntervalSet::single(rat(-1, 2), int(1)), ray_below(rat(1, 2))],
        )
        .unwrap();
        let q = wiener_premeasure(&d, Method::Quadrature, &PremeasureConfig { tol: 1e-7, ..cfg() }).unwrap();
        let m = wiener_premeasure(&d, Method::MonteCarlo, &PremeasureConfig { paths: 400_000, seed: 3, ..cfg() }).unwrap();
        let se = m.stderr.unwrap();
        assert!((q.value - m.value).abs() < 4.0 * se, "{} vs {} (se {se})", q.value, m.value);
    }

    #[test]
    fn half_variance_kernel_mass() {
        let c = PremeasureConfig { kernel: Kernel::HalfVariance, ..cfg() };
        let e = wiener_premeasure(&Cylinder::whole(), Method::Quadrature, &c).unwrap();
        assert!((e.value - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic() {
        let t = vec![rat(1, 2), int(1)];
        let a = sample_paths(&t, 70_000, 9, Kernel::Standard).unwrap();
        let b = sample_paths(&t, 70_000, 9, Kernel::Standard).unwrap();
        assert_eq!(a, b);
        let c = sample_paths(&t, 70_000, 10, Kernel::Standard).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn split_is_additive() {
        let whole = Cylinder::at(rat(1, 2), IntervalSet::single(int(-1), int(2))).unwrap();
        let parts = vec![
            Cylinder::at(rat(1, 2), IntervalSet::single(int(-1), int(0))).unwrap(),
            Cylinder::at(rat(1, 2), IntervalSet::single(int(0), int(2))).unwrap(),
        ];
        let r = check_additivity_numeric(&whole, &parts, &cfg()).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn tail_probabilities_keep_precision() {
        let p = normal_interval_prob(0.0, 1.0, 10.0, f64::INFINITY);
        assert!((p / 7.619853024160527e-24 - 1.0).abs() < 1e-10, "{p:e}");
    }
}
