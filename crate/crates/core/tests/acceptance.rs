//! Acceptance criteria: one PASS/FAIL line each, nonzero exit on any failure.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use daniell::dirichlet::{
    self, extend_boundary, BoundaryFunction, BoundarySequence, DiskDomain, DirichletConfig, DirichletFunctional,
    ExtendConfig, Shape, Solver, WosConfig,
};
use daniell::extension::theorems;
use daniell::extension::{level_set_integral, LevelConfig, PiecewiseAffine};
use daniell::functional::ElementaryIntegral;
use daniell::fuzz;
use daniell::lattice::ExtReal;
use daniell::lebesgue::{interval_length_via_daniell, ramp_sequence};
use daniell::rational::{int, rat, Rational};
use daniell::verify;
use daniell::wiener::{self, Cylinder, Kernel, Method, PremeasureConfig};
use num_traits::{One, Signed, Zero};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { pass: true, notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, note: impl Into<String>) {
        if !ok {
            self.pass = false;
        }
        self.notes.push(format!("{} {}", if ok { "ok  " } else { "FAIL" }, note.into()));
    }
}

type Criterion = fn() -> daniell::Result<Outcome>;

fn pow2(n: u32) -> Rational {
    Rational::from_integer((1i64 << n).into())
}

fn level_sets() -> daniell::Result<Outcome> {
    let mut o = Outcome::new();
    let start = Instant::now();
    let x = PiecewiseAffine::identity_on(int(0), int(1))?;
    let cfg = LevelConfig { n_max: 16, ..LevelConfig::default() };
    let r = level_set_integral(&x, &ElementaryIntegral::length(), &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    let half = rat(1, 2);
    for (i, s) in r.history.iter().enumerate() {
        let n = i as u32 + 1;
        // 2^-n sum_{k<2^n} (1 - k 2^-n) = (1 - 2^-n) / 2
        let oracle = (Rational::one() - pow2(n).recip()) / int(2);
        let s = s.finite().cloned().unwrap_or_else(Rational::zero);
        let close = (&s - &half).abs() < pow2(n).recip();
        o.check(s == oracle && close, format!("S_{n} = {s}"));
    }
    o.check(r.history.len() == 16, format!("{} partial sums", r.history.len()));
    o.check(r.history.first() == Some(&ExtReal::Finite(rat(1, 4))), "S_1 = 1/4");
    o.check(r.history.get(1) == Some(&ExtReal::Finite(rat(3, 8))), "S_2 = 3/8");
    o.check(elapsed < 5.0, format!("runtime {elapsed:.3} s"));
    Ok(o)
}

fn lebesgue_recovery() -> daniell::Result<Outcome> {
    let mut o = Outcome::new();
    let mut rng = fuzz::rng(SEED);
    let mut contained = 0;
    for _ in 0..50 {
        let a = fuzz::small_rational(&mut rng, 4, 6);
        let mut b = fuzz::small_rational(&mut rng, 4, 6);
        if b <= a {
            b = &a + Rational::one() + b.abs();
        }
        let r = interval_length_via_daniell(&a, &b, 200)?;
        if r.contains(&ExtReal::Finite(&b - &a)) {
            contained += 1;
        } else {
            o.check(false, format!("[{a}, {b}): {}", r.to_json()));
        }
    }
    o.check(contained == 50, format!("{contained}/50 brackets contain b - a"));
    let mut exact = 0;
    let total = 5 * 12;
    let mut rng = fuzz::rng(SEED + 1);
    for _ in 0..5 {
        let a = fuzz::small_rational(&mut rng, 3, 5);
        let b = &a + fuzz::small_rational(&mut rng, 3, 5).abs() + rat(1, 3);
        for n in 1..=12usize {
            let f = ramp_sequence(&a, &b, n)?;
            // trapezoid sum over the breakpoints
            let t: Rational = f
                .breakpoints()
                .windows(2)
                .zip(f.values().windows(2))
                .map(|(x, y)| (&x[1] - &x[0]) * (&y[0] + &y[1]) / int(2))
                .sum();
            let oracle = (&b - &a) * (Rational::one() - Rational::new(1.into(), (2 * n as i64).into()));
            if t == oracle {
                exact += 1;
            } else {
                o.check(false, format!("ramp [{a}, {b}) n = {n}: {t} vs {oracle}"));
            }
        }
    }
    o.check(exact == total, format!("{exact}/{total} ramp integrals exact"));
    Ok(o)
}

fn suite_note(o: &mut Outcome, r: theorems::SuiteReport) {
    o.check(r.pass(), format!("{}: {} cases, {} failures, {} skipped", r.name, r.cases, r.failures, r.skipped));
}

fn jordan() -> daniell::Result<Outcome> {
    let mut o = Outcome::new();
    suite_note(&mut o, verify::jordan_bruteforce_suite(SEED, 10, 100)?);
    suite_note(&mut o, verify::jordan_identity_suite(SEED, 1000)?);
    suite_note(&mut o, verify::integrability_suite(3, 2)?);
    Ok(o)
}

fn convergence() -> daniell::Result<Outcome> {
    let mut o = Outcome::new();
    suite_note(&mut o, theorems::monotone_convergence_suite(SEED, 1000)?);
    suite_note(&mut o, theorems::fatou_suite(SEED, 1000)?);
    suite_note(&mut o, theorems::dominated_convergence_suite(SEED, 1000)?);
    let (l, r) = theorems::strict_fatou_witness()?;
    o.check(l < r, format!("strict Fatou witness: {l} < {r}"));
    Ok(o)
}

fn wiener_premeasure() -> daniell::Result<Outcome> {
    let mut o = Outcome::new();
    let q = PremeasureConfig::default();
    let whole = wiener::wiener_premeasure(&Cylinder::whole(), Method::Quadrature, &q)?;
    o.check((whole.value - 1.0).abs() < 1e-8, format!("mu(X) = {}", whole.value));
    let half = wiener::wiener_premeasure(&Cylinder::at(int(1), wiener::ray_above(int(0)))?, Method::Quadrature, &q)?;
    o.check((half.value - 0.5).abs() < 1e-8, format!("mu(f(1) > 0) = {}", half.value));
    let orthant = Cylinder::new(
        vec![int(0), rat(1, 2), int(1)],
        vec![wiener::ray_above(int(0)), wiener::ray_above(int(0))],
    )?;
    // 1/4 + arcsin(sqrt(1/2)) / (2 pi)
    let oracle = 0.25 + (0.5f64).sqrt().asin() / (2.0 * PI);
    o.check((oracle - 0.375).abs() < 1e-15, format!("orthant oracle {oracle}"));
    let quad = wiener::wiener_premeasure(&orthant, Method::Quadrature, &q)?;
    o.check((quad.value - 0.375).abs() < 1e-4, format!("orthant quadrature {}", quad.value));
    let mc_cfg = PremeasureConfig { paths: 10_000_000, seed: SEED, ..q.clone() };
    let start = Instant::now();
    let mc = wiener::wiener_premeasure(&orthant, Method::MonteCarlo, &mc_cfg)?;
    let se = mc.stderr.unwrap_or(f64::NAN);
    o.check(
        (mc.value - 0.375).abs() <= 3.0 * se,
        format!("orthant Monte Carlo {} +- {se} ({:.1} s)", mc.value, start.elapsed().as_secs_f64()),
    );
    suite_note(&mut o, verify::wiener_additivity_suite(SEED, 10, 3, &q)?);
    let halved = PremeasureConfig { kernel: Kernel::HalfVariance, ..q };
    let p = wiener::wiener_premeasure(&Cylinder::whole(), Method::Quadrature, &halved)?;
    o.check((p.value - FRAC_1_SQRT_2).abs() < 1e-8, format!("printed kernel total mass {}", p.value));
    Ok(o)
}

fn dirichlet_functional() -> daniell::Result<Outcome> {
    let mut o = Outcome::new();
    let disk = DiskDomain::new(Shape::UnitDisk, 1.0 / 128.0)?;
    let grid = DirichletConfig::default();
    let one = BoundaryFunction::constant(1.0);
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let r = 0.08 * k as f64;
        let a = 2.0 * PI * k as f64 / 10.0 + 0.3;
        let v = DirichletFunctional::new(&disk, (r * a.cos(), r * a.sin()), &grid)?.apply(&one)?;
        worst = worst.max((v.value - 1.0).abs());
    }
    o.check(worst < 1e-6, format!("g = 1 at 10 points: max error {worst:e}"));
    let centre = DirichletFunctional::new(&disk, (0.0, 0.0), &grid)?;
    let walks = DirichletConfig {
        solver: Solver::WalkOnSpheres,
        wos: WosConfig { walks: 100_000, seed: SEED, ..WosConfig::default() },
        ..DirichletConfig::default()
    };
    let walker = DirichletFunctional::new(&disk, (0.0, 0.0), &walks)?;
    for (lo, hi) in [(0.0, PI), (0.0, PI / 3.0), (PI / 2.0, 7.0 * PI / 4.0)] {
        let fraction = (hi - lo) / (2.0 * PI);
        let seq = BoundarySequence::arc(lo, hi)?;
        let g = extend_boundary(&centre, &seq, &ExtendConfig::default())?;
        o.check(
            (g.value - fraction).abs() < 1e-3,
            format!("arc [{lo:.4}, {hi:.4}) grid {} vs {fraction:.6}", g.value),
        );
        let w = extend_boundary(&walker, &seq, &ExtendConfig::default())?;
        let se = w.stderr.unwrap_or(f64::NAN);
        o.check(
            (w.value - fraction).abs() <= 3.0 * se,
            format!("arc [{lo:.4}, {hi:.4}) walks {} +- {se}", w.value),
        );
    }
    suite_note(&mut o, dirichlet::maximum_principle_suite(&disk, SEED, 50, &grid.sor)?);
    suite_note(&mut o, dirichlet::d2_suite(&disk, SEED, 50, &grid)?);
    let agree = DirichletConfig { wos: walks.wos, ..grid };
    suite_note(&mut o, dirichlet::agreement_suite(&disk, SEED, 10, &agree)?);
    Ok(o)
}

fn structural() -> daniell::Result<Outcome> {
    let mut o = Outcome::new();
    suite_note(&mut o, verify::canonicalize_suite(6)?);
    for n in 1..=5 {
        let w = theorems::structural_weights(SEED + n as u64, n);
        suite_note(&mut o, theorems::sigma_ring_suite(&w)?);
        suite_note(&mut o, theorems::completeness_suite(&w)?);
    }
    suite_note(&mut o, verify::additivity_suite(5, SEED)?);
    Ok(o)
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 7] = [
        ("1 dyadic level-set integration", level_sets),
        ("2 Lebesgue recovery", lebesgue_recovery),
        ("3 Jordan decomposition", jordan),
        ("4 convergence theorems", convergence),
        ("5 Wiener premeasure", wiener_premeasure),
        ("6 Dirichlet functional", dirichlet_functional),
        ("7 structural suites", structural),
    ];
    let verbose = std::env::var_os("ACCEPTANCE_VERBOSE").is_some();
    let mut all = true;
    for (name, run) in criteria {
        let start = Instant::now();
        let (pass, notes) = match run() {
            Ok(o) => (o.pass, o.notes),
            Err(e) => (false, vec![format!("FAIL error: {e}")]),
        };
        all &= pass;
        println!("{} {name} ({:.1} s)", if pass { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
        for n in notes.iter().filter(|n| verbose || n.starts_with("FAIL")) {
            println!("    {n}");
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
