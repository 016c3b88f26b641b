use std::f64::consts::TAU;
use std::sync::Arc;

use rand::Rng;
use serde_json::{json, Value};

use super::{
    BoundaryFunction, DiskDomain, DirichletConfig, DirichletFunctional, GridSystem, PointEstimate, Shape, SorConfig,
};
use crate::error::{Error, Result};
use crate::extension::theorems::SuiteReport;
use crate::fuzz;

type Gen = Arc<dyn Fn(usize) -> BoundaryFunction + Send + Sync>;

/// Continuous boundary data `f_n` increasing to a target, optionally with
/// continuous majorants `F_n` decreasing to it, so that
/// `I_x(f_n) <= v_f(x) <= I_x(F_n)`.
#[derive(Clone)]
pub struct BoundarySequence {
    pub name: String,
    lower: Gen,
    upper: Option<Gen>,
}

impl std::fmt::Debug for BoundarySequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BoundarySequence({})", self.name)
    }
}

impl BoundarySequence {
    pub fn increasing(name: impl Into<String>, lower: impl Fn(usize) -> BoundaryFunction + Send + Sync + 'static) -> Self {
        BoundarySequence {
            name: name.into(),
            lower: Arc::new(lower),
            upper: None,
        }
    }

    pub fn with_majorants(mut self, upper: impl Fn(usize) -> BoundaryFunction + Send + Sync + 'static) -> Self {
        self.upper = Some(Arc::new(upper));
        self
    }

    /// `f_n = F_n = g`.
    pub fn constant(g: BoundaryFunction) -> Self {
        let (a, b) = (g.clone(), g.clone());
        Self::increasing(g.name.clone(), move |_| a.clone()).with_majorants(move |_| b.clone())
    }

    /// Ramps under and over the indicator of the arc `[lo, hi]`, with edges
    /// of width `min(L, 2 pi - L) / 2n` for the arc length `L`.
    pub fn arc(lo: f64, hi: f64) -> Result<Self> {
        let target = BoundaryFunction::arc(lo, hi)?;
        let l = (hi - lo).min(TAU);
        if l >= TAU {
            return Ok(Self::constant(BoundaryFunction::constant(1.0)));
        }
        let w = move |n: usize| l.min(TAU - l) / (2 * n) as f64;
        Ok(Self::increasing(target.name, move |n| BoundaryFunction::arc_ramp(lo, hi, w(n)))
            .with_majorants(move |n| BoundaryFunction::arc_ramp(lo, hi, -w(n))))
    }

    pub fn lower(&self, n: usize) -> BoundaryFunction {
        (self.lower)(n)
    }

    pub fn upper(&self, n: usize) -> Option<BoundaryFunction> {
        self.upper.as_ref().map(|u| u(n))
    }

    /// `f_n <= f_{n+1}`, `F_{n+1} <= F_n` and `f_n <= F_n` at boundary
    /// probes, for `n < depth`.
    pub fn verify(&self, depth: usize, probes: usize) -> Result<()> {
        let thetas: Vec<f64> = (0..probes).map(|k| (k as f64 + 0.5) * TAU / probes as f64).collect();
        let slack = 1e-12;
        let mut prev_lo: Option<Vec<f64>> = None;
        let mut prev_up: Option<Vec<f64>> = None;
        for n in 1..=depth {
            let lo: Vec<f64> = thetas.iter().map(|t| self.lower(n).eval(*t)).collect();
            let up: Option<Vec<f64>> = self.upper(n).map(|g| thetas.iter().map(|t| g.eval(*t)).collect());
            let bad = |k: usize| Error::NonMonotone {
                index: n,
                probe: format!("theta = {}", thetas[k]),
            };
            if let Some(p) = &prev_lo {
                if let Some(k) = (0..probes).find(|&k| lo[k] < p[k] - slack) {
                    return Err(bad(k));
                }
            }
            if let (Some(u), Some(p)) = (&up, &prev_up) {
                if let Some(k) = (0..probes).find(|&k| u[k] > p[k] + slack) {
                    return Err(bad(k));
                }
            }
            if let Some(u) = &up {
                if let Some(k) = (0..probes).find(|&k| lo[k] > u[k] + slack) {
                    return Err(bad(k));
                }
            }
            prev_lo = Some(lo);
            prev_up = up;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtendConfig {
    pub depth: usize,
    /// Widest bracket accepted at `depth`.
    pub tol: f64,
    pub probes: usize,
}

impl Default for ExtendConfig {
    fn default() -> Self {
        ExtendConfig {
            depth: 64,
            tol: 0.05,
            probes: 4096,
        }
    }
}

/// `v_f(x)` with the bracket `[I_x(f_d), I_x(F_d)]`; `harnack_gap` is its
/// width, the value of the nonnegative harmonic function `u_{F_d - f_d}` at `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionResult {
    pub point: (f64, f64),
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub harnack_gap: f64,
    pub stderr: Option<f64>,
    pub depth: usize,
    pub converged: bool,
    /// `(n, I_x(f_n))` at doubling depths.
    pub history: Vec<(usize, f64)>,
}

impl ExtensionResult {
    pub fn to_json(&self) -> Value {
        json!({
            "point": [self.point.0, self.point.1],
            "value": self.value,
            "lower": self.lower,
            "upper": self.upper,
            "harnack_gap": self.harnack_gap,
            "stderr": self.stderr,
            "depth": self.depth,
            "converged": self.converged,
            "history": self.history,
        })
    }
}

/// The limit of `I_x(f_n)` along a verified monotone sequence. With
/// majorants the value is the bracket midpoint; without, it is
/// `I_x(f_d)` and the bracket uses the slack `I_x(f_d) - I_x(f_{d/2})`.
pub fn extend_boundary(ix: &DirichletFunctional, seq: &BoundarySequence, cfg: &ExtendConfig) -> Result<ExtensionResult> {
    if cfg.depth == 0 {
        return Err(Error::Precondition("depth must be positive".into()));
    }
    seq.verify(cfg.depth, cfg.probes)?;
    let eval = |g: &BoundaryFunction| -> Result<PointEstimate> { ix.apply(g) };
    let mut history = Vec::new();
    let mut n = 1;
    while n < cfg.depth {
        history.push((n, eval(&seq.lower(n))?.value));
        n *= 2;
    }
    let f_d = seq.lower(cfg.depth);
    let lower = eval(&f_d)?.value;
    history.push((cfg.depth, lower));
    let (upper, value, stderr) = match seq.upper(cfg.depth) {
        Some(big) => {
            let upper = eval(&big)?.value;
            let mid = ix.apply_fn(|t| 0.5 * (f_d.eval(t) + big.eval(t)));
            (upper, mid.value, mid.stderr)
        }
        None => {
            let half = eval(&seq.lower((cfg.depth / 2).max(1)))?.value;
            let e = eval(&f_d)?;
            (lower + (lower - half).max(0.0), lower, e.stderr)
        }
    };
    let gap = upper - lower;
    if gap > cfg.tol {
        return Err(Error::Unreachable {
            tol: cfg.tol.to_string(),
            achieved: gap.to_string(),
        });
    }
    Ok(ExtensionResult {
        point: ix.point(),
        value,
        lower,
        upper,
        harnack_gap: gap,
        stderr,
        depth: cfg.depth,
        converged: true,
        history,
    })
}

fn ball_samples(center: (f64, f64), radius: f64) -> Vec<(f64, f64)> {
    let mut pts = vec![center];
    for ring in [radius, radius / 2.0] {
        for k in 0..8 {
            let a = k as f64 * TAU / 8.0;
            pts.push((center.0 + ring * a.cos(), center.1 + ring * a.sin()));
        }
    }
    pts
}

/// An empirical Harnack constant for the closed ball `B(center, radius)`:
/// the largest ratio `max_y k(y, zeta) / min_y k(y, zeta)` of the Poisson
/// kernel (disk) or grid harmonic-measure weights (square) over sample
/// points `y` of the ball. Every nonnegative harmonic function is a
/// nonnegative mix of these kernels, so the ratio bounds `sup u / inf u`.
pub fn harnack_constant(dom: &DiskDomain, center: (f64, f64), radius: f64) -> Result<f64> {
    if !(radius > 0.0) || dom.distance(center) <= radius {
        return Err(Error::Domain(format!("ball of radius {radius} is not compactly inside the {}", dom.shape)));
    }
    let ys = ball_samples(center, radius);
    let kernels: Vec<Vec<f64>> = match dom.shape {
        Shape::UnitDisk => {
            let zetas: Vec<f64> = (0..1440).map(|k| k as f64 * TAU / 1440.0).collect();
            ys.iter()
                .map(|y| {
                    let r2 = y.0 * y.0 + y.1 * y.1;
                    zetas
                        .iter()
                        .map(|t| (1.0 - r2) / ((t.cos() - y.0).powi(2) + (t.sin() - y.1).powi(2)))
                        .collect()
                })
                .collect()
        }
        Shape::UnitSquare => {
            let coarse = dom.with_h(dom.h.max(1.0 / 32.0))?;
            let sys = GridSystem::new(&coarse);
            ys.iter()
                .map(|y| Ok(sys.harmonic_measure(*y, &SorConfig::default())?.weights))
                .collect::<Result<_>>()?
        }
    };
    let mut c: f64 = 1.0;
    for k in 0..kernels[0].len() {
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        for row in &kernels {
            hi = hi.max(row[k]);
            lo = lo.min(row[k]);
        }
        if lo > 0.0 {
            c = c.max(hi / lo);
        }
    }
    Ok(c)
}

/// Gaps of the extension at several points of one ball.
#[derive(Clone, Debug, PartialEq)]
pub struct HarnackReport {
    pub center: (f64, f64),
    pub radius: f64,
    pub constant: f64,
    pub results: Vec<ExtensionResult>,
    /// `sup gap <= C inf gap` over the points, up to solver error.
    pub pass: bool,
}

impl HarnackReport {
    pub fn to_json(&self) -> Value {
        json!({
            "center": [self.center.0, self.center.1],
            "radius": self.radius,
            "constant": self.constant,
            "gaps": self.results.iter().map(|r| r.harnack_gap).collect::<Vec<_>>(),
            "values": self.results.iter().map(|r| r.value).collect::<Vec<_>>(),
            "pass": self.pass,
        })
    }
}

/// Runs the extension at every point of `points` (all inside the ball)
/// and checks that the gaps are comparable with the calibrated constant.
pub fn domain_independence(
    dom: &DiskDomain,
    seq: &BoundarySequence,
    center: (f64, f64),
    radius: f64,
    points: &[(f64, f64)],
    dcfg: &DirichletConfig,
    cfg: &ExtendConfig,
) -> Result<HarnackReport> {
    let constant = harnack_constant(dom, center, radius)?;
    let mut results = Vec::new();
    for p in points {
        if (p.0 - center.0).hypot(p.1 - center.1) > radius {
            return Err(Error::Domain(format!("({}, {}) lies outside the ball", p.0, p.1)));
        }
        let ix = DirichletFunctional::new(dom, *p, dcfg)?;
        results.push(extend_boundary(&ix, seq, cfg)?);
    }
    let noise = results.iter().map(|r| 3.0 * r.stderr.unwrap_or(0.0)).fold(1e-9, f64::max);
    let hi = results.iter().map(|r| r.harnack_gap).fold(f64::NEG_INFINITY, f64::max);
    let lo = results.iter().map(|r| r.harnack_gap).fold(f64::INFINITY, f64::min);
    Ok(HarnackReport {
        center,
        radius,
        constant,
        pass: results.iter().all(|r| r.converged) && hi <= constant * lo + noise,
        results,
    })
}

/// A trigonometric polynomial of degree at most 3 with coefficients in
/// `[-1, 1]`.
pub fn fuzz_boundary(rng: &mut impl Rng) -> BoundaryFunction {
    let deg = rng.random_range(1..=3);
    let a0 = rng.random_range(-1.0..=1.0);
    let terms = (0..deg)
        .map(|_| (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
        .collect();
    BoundaryFunction::trig(a0, terms)
}

/// Grid fields stay within the range of their boundary values.
pub fn maximum_principle_suite(dom: &DiskDomain, seed: u64, cases: usize, sor: &SorConfig) -> Result<SuiteReport> {
    let mut rng = fuzz::rng(seed);
    let sys = GridSystem::new(dom);
    let mut rep = SuiteReport::new("maximum principle");
    let tol = 10.0 * sor.tol;
    for case in 0..cases {
        let g = if case % 2 == 0 {
            fuzz_boundary(&mut rng)
        } else {
            let lo = rng.random_range(0.0..TAU);
            let len = rng.random_range(0.3..5.0);
            BoundaryFunction::arc_ramp(lo, lo + len, rng.random_range(0.05..0.3))
        };
        let f = sys.solve(&g, sor)?;
        rep.record(f.max() <= f.boundary_max() + tol && f.min() >= f.boundary_min() - tol, || {
            format!("case {case}: {} gives [{}, {}] inside, [{}, {}] on the boundary", g.name, f.min(), f.max(), f.boundary_min(), f.boundary_max())
        });
    }
    Ok(rep)
}

/// For `g_n = min(g+, M/n)` decreasing to 0, `I_x(g_n)` is nonincreasing
/// and lies in `[0, max g_n]`, the maximum taken over the boundary
/// points the functional sees.
pub fn d2_suite(dom: &DiskDomain, seed: u64, cases: usize, dcfg: &DirichletConfig) -> Result<SuiteReport> {
    let mut rng = fuzz::rng(seed);
    let mut rep = SuiteReport::new("D2 for the Dirichlet functional");
    let points: Vec<(f64, f64)> = (0..4)
        .map(|k| {
            let c = dom.center();
            let a = k as f64 * 1.7;
            (c.0 + 0.35 * a.cos(), c.1 + 0.35 * a.sin())
        })
        .collect();
    let functionals = points
        .iter()
        .map(|p| DirichletFunctional::new(dom, *p, dcfg))
        .collect::<Result<Vec<_>>>()?;
    let tol = 1e-9;
    for case in 0..cases {
        let ix = &functionals[case % functionals.len()];
        let g = fuzz_boundary(&mut rng);
        let m = 1.0 + rng.random_range(0.0..2.0);
        let mut prev = f64::INFINITY;
        let mut ok = true;
        for n in 1..=8 {
            let cap = m / n as f64;
            let gn = |t: f64| g.eval(t).max(0.0).min(cap);
            let v = ix.apply_fn(gn).value;
            let max_gn = ix.support().iter().map(|t| gn(*t)).fold(0.0, f64::max);
            ok &= v <= prev + tol && v >= -tol && v <= max_gn + tol;
            prev = v;
        }
        rep.record(ok, || format!("case {case}: {}", g.name));
    }
    Ok(rep)
}

/// Grid and walk-on-spheres values agree within three standard errors.
pub fn agreement_suite(dom: &DiskDomain, seed: u64, cases: usize, dcfg: &DirichletConfig) -> Result<SuiteReport> {
    let mut rng = fuzz::rng(seed);
    let mut rep = SuiteReport::new("grid and walk-on-spheres agreement");
    let grid = GridSystem::new(dom);
    for case in 0..cases {
        let c = dom.center();
        let r = rng.random_range(0.0..0.35);
        let a = rng.random_range(0.0..TAU);
        let x = (c.0 + r * a.cos(), c.1 + r * a.sin());
        let g = fuzz_boundary(&mut rng);
        let hm = grid.harmonic_measure(x, &dcfg.sor)?;
        let wcfg = super::WosConfig {
            seed: dcfg.wos.seed.wrapping_add(case as u64),
            ..dcfg.wos
        };
        let w = super::sample_exits(dom, x, &wcfg)?.estimate(&g);
        let gv = hm.integrate(&g);
        rep.record((gv - w.value).abs() <= 3.0 * w.stderr, || {
            format!("case {case}: {} at ({:.4}, {:.4}): grid {gv}, walks {} +- {}", g.name, x.0, x.1, w.value, w.stderr)
        });
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::{arc_harmonic_measure, Solver, WosConfig};
    use std::f64::consts::PI;

    fn disk(h: f64) -> DiskDomain {
        DiskDomain::new(Shape::UnitDisk, h).unwrap()
    }

    #[test]
    fn half_circle_at_center() {
        let d = disk(1.0 / 64.0);
        let ix = DirichletFunctional::new(&d, (0.0, 0.0), &DirichletConfig::default()).unwrap();
        let seq = BoundarySequence::arc(0.0, PI).unwrap();
        let r = extend_boundary(&ix, &seq, &ExtendConfig { depth: 32, ..ExtendConfig::default() }).unwrap();
        assert!((r.value - 0.5).abs() < 2e-3, "{r:?}");
        assert!(r.lower <= 0.5 && 0.5 <= r.upper);
        assert!(r.history.windows(2).all(|w| w[0].1 <= w[1].1 + 1e-12));
    }

    #[test]
    fn sixth_of_circle_by_walks() {
        let d = DiskDomain::unit_disk();
        let cfg = DirichletConfig {
            solver: Solver::WalkOnSpheres,
            wos: WosConfig {
                walks: 40_000,
                seed: 5,
                ..WosConfig::default()
            },
            ..DirichletConfig::default()
        };
        let ix = DirichletFunctional::new(&d, (0.0, 0.0), &cfg).unwrap();
        let seq = BoundarySequence::arc(0.0, PI / 3.0).unwrap();
        let r = extend_boundary(&ix, &seq, &ExtendConfig::default()).unwrap();
        let se = r.stderr.unwrap();
        assert!((r.value - 1.0 / 6.0).abs() < 3.0 * se, "{r:?}");
    }

    #[test]
    fn constant_one() {
        let d = disk(1.0 / 16.0);
        let ix = DirichletFunctional::new(&d, (0.1, 0.1), &DirichletConfig::default()).unwrap();
        let seq = BoundarySequence::constant(BoundaryFunction::constant(1.0));
        let r = extend_boundary(&ix, &seq, &ExtendConfig::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9 && r.harnack_gap.abs() < 1e-9);
    }

    #[test]
    fn non_monotone_rejected() {
        let seq = BoundarySequence::increasing("shrinking", |n| BoundaryFunction::constant(1.0 / n as f64));
        assert!(matches!(seq.verify(3, 16), Err(Error::NonMonotone { index: 2, .. })));
    }

    #[test]
    fn wide_bracket_is_unreachable() {
        let d = disk(1.0 / 16.0);
        let ix = DirichletFunctional::new(&d, (0.0, 0.0), &DirichletConfig::default()).unwrap();
        let seq = BoundarySequence::arc(0.0, PI).unwrap();
        let cfg = ExtendConfig {
            depth: 2,
            tol: 1e-3,
            ..ExtendConfig::default()
        };
        assert!(matches!(extend_boundary(&ix, &seq, &cfg), Err(Error::Unreachable { .. })));
    }

    #[test]
    fn off_center_matches_poisson() {
        let d = disk(1.0 / 64.0);
        let p = (0.3, -0.2);
        let ix = DirichletFunctional::new(&d, p, &DirichletConfig::default()).unwrap();
        let seq = BoundarySequence::arc(0.5, 2.0).unwrap();
        let r = extend_boundary(&ix, &seq, &ExtendConfig::default()).unwrap();
        let exact = arc_harmonic_measure(p, 0.5, 2.0);
        assert!((r.value - exact).abs() < 3e-3, "{} vs {exact}", r.value);
    }

    #[test]
    fn harnack_constant_matches_the_classical_bound() {
        let d = DiskDomain::unit_disk();
        let c = harnack_constant(&d, (0.0, 0.0), 0.5).unwrap();
        // ((1 + r) / (1 - r))^2 for r = 1/2
        assert!(c <= 9.0 + 1e-9 && c > 8.0, "{c}");
        assert!(harnack_constant(&d, (0.6, 0.0), 0.5).is_err());
    }

    #[test]
    fn gaps_are_comparable() {
        let d = disk(1.0 / 32.0);
        let seq = BoundarySequence::arc(0.0, PI / 2.0).unwrap();
        let pts = [(0.0, 0.0), (0.2, 0.1), (-0.3, 0.0), (0.0, -0.35)];
        let r = domain_independence(&d, &seq, (0.0, 0.0), 0.4, &pts, &DirichletConfig::default(), &ExtendConfig::default())
            .unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn suites_pass_on_a_coarse_grid() {
        let d = disk(1.0 / 32.0);
        let cfg = DirichletConfig::default();
        assert!(maximum_principle_suite(&d, 1, 10, &cfg.sor).unwrap().pass());
        assert!(d2_suite(&d, 2, 20, &cfg).unwrap().pass());
        let sq = DiskDomain::new(Shape::UnitSquare, 1.0 / 32.0).unwrap();
        assert!(maximum_principle_suite(&sq, 3, 6, &cfg.sor).unwrap().pass());
    }
}
