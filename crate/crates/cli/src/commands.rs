//! One function per subcommand, each producing a [`Record`].

use std::str::FromStr;

use serde_json::{json, Value};

use daniell::dirichlet::{
    self, extend_boundary, parse_point, BoundaryFunction, BoundaryKind, BoundarySequence, DiskDomain, DirichletConfig,
    DirichletFunctional, ExtendConfig, Shape, Solver, WosConfig,
};
use daniell::extension::{level_set_integral, AffineCell, LevelConfig, PiecewiseAffine};
use daniell::functional::{ElementaryIntegral, SignedFunctional};
use daniell::lattice::{lattice_op, ExtReal, LatticeOp, SimpleFunction, VectorLattice};
use daniell::lebesgue::{interval_length_via_daniell, ramp_sequence, riemann_integral};
use daniell::rational::{self, parse_rational, rational_to_json, Rational};
use daniell::rings::{check_additivity, BoolOp, PreMeasure, RingSet, Universe};
use daniell::verify::{verify_all, VerifyConfig};
use daniell::wiener::{self, Cylinder, Kernel, Method, PremeasureConfig};
use daniell::{Error, Result};

use crate::{
    Cli, Command, DecomposeArgs, DirichletArgs, DomainArg, IntegrateArgs, KernelArg, LatticeArgs, LatticeOpArg,
    LebesgueArgs, MethodArg, RingsArgs, SetOp, SolverArg, VerifyArgs, WienerArgs,
};

/// Header and rows for the CSV projection of tabular results.
pub type Table = (Vec<String>, Vec<Vec<String>>);

/// Everything a subcommand emits.
pub struct Record {
    pub command: &'static str,
    pub config: Value,
    pub result: Value,
    pub pass: bool,
    pub table: Option<Table>,
}

pub fn run(cli: &Cli) -> Result<Record> {
    let config = json!({
        "command": serde_json::to_value(&cli.command).map_err(|e| Error::Malformed(e.to_string()))?,
        "seed": cli.seed,
        "format": cli.format,
        "output": cli.output,
    });
    let (command, result, pass, table) = match &cli.command {
        Command::Rings(a) => ("rings", rings(a)?),
        Command::Lattice(a) => ("lattice", lattice(a)?),
        Command::Decompose(a) => ("decompose", decompose(a)?),
        Command::Integrate(a) => ("integrate", integrate(a)?),
        Command::Lebesgue(a) => ("lebesgue", lebesgue(a)?),
        Command::Wiener(a) => ("wiener", wiener_cmd(a, cli.seed)?),
        Command::Dirichlet(a) => ("dirichlet", dirichlet_cmd(a, cli.seed)?),
        Command::VerifyAll(a) => ("verify-all", verify(a, cli.seed)?),
    }
    .into_parts();
    Ok(Record {
        command,
        config,
        result,
        pass,
        table,
    })
}

struct Outcome {
    result: Value,
    pass: bool,
    table: Option<Table>,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome {
            result,
            pass: true,
            table: None,
        }
    }
}

trait IntoParts {
    fn into_parts(self) -> (&'static str, Value, bool, Option<Table>);
}

impl IntoParts for (&'static str, Outcome) {
    fn into_parts(self) -> (&'static str, Value, bool, Option<Table>) {
        (self.0, self.1.result, self.1.pass, self.1.table)
    }
}

/// Inline JSON, or `@path` to read it from a file.
fn load_json(s: &str) -> Result<Value> {
    let text = match s.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::Malformed(format!("{path}: {e}")))?,
        None => s.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| Error::Malformed(format!("invalid JSON: {e}")))
}

fn rationals(v: &[String]) -> Result<Vec<Rational>> {
    v.iter().map(|s| parse_rational(s.trim())).collect()
}

fn rings(a: &RingsArgs) -> Result<Outcome> {
    let x = RingSet::from_json(&load_json(&a.a)?)?;
    let set = match (&a.b, a.op) {
        (Some(b), Some(op)) => {
            let b = RingSet::from_json(&load_json(b)?)?;
            let op = match op {
                SetOp::Union => BoolOp::Union,
                SetOp::Intersect => BoolOp::Intersect,
                SetOp::Difference => BoolOp::Difference,
            };
            x.combine(op, &b)?
        }
        _ => x,
    };
    let universe = set.universe();
    let mu = match (&universe, &a.weights) {
        (Universe::Finite(_), Some(w)) => PreMeasure::point_masses(
            &universe,
            w.iter().map(|s| ExtReal::from_str(s.trim())).collect::<Result<_>>()?,
        )?,
        (Universe::Finite(_), None) => PreMeasure::counting(&universe),
        (Universe::RealLine, None) => PreMeasure::Length,
        (Universe::RealLine, Some(_)) => return Err(Error::Domain("weights need a finite universe".into())),
        (Universe::PathSpace, _) => {
            return Err(Error::Domain("use the wiener subcommand for path space".into()));
        }
    };
    let mut result = json!({
        "set": set.to_json(),
        "display": set.to_string(),
        "measure": mu.eval(&set)?.to_json(),
    });
    let mut pass = true;
    if let Some(p) = &a.partition {
        let parts = match load_json(p)? {
            Value::Array(items) => items.iter().map(RingSet::from_json).collect::<Result<Vec<_>>>()?,
            _ => return Err(Error::Malformed("partition must be a JSON array of ring sets".into())),
        };
        let report = check_additivity(&mu, &parts)?;
        pass = report.pass;
        result["additivity"] = report.to_json();
    }
    Ok(Outcome {
        result,
        pass,
        table: None,
    })
}

fn lattice(a: &LatticeArgs) -> Result<Outcome> {
    let x = SimpleFunction::from_json(&load_json(&a.x)?)?;
    let y = a.y.as_deref().map(load_json).transpose()?.map(|v| SimpleFunction::from_json(&v)).transpose()?;
    let c = a.c.as_deref().map(parse_rational).transpose()?;
    let op = match a.op {
        LatticeOpArg::Plus => LatticeOp::Plus,
        LatticeOpArg::Meet => LatticeOp::Meet,
        LatticeOpArg::Join => LatticeOp::Join,
        LatticeOpArg::Abs => LatticeOp::Abs,
        LatticeOpArg::Scale => LatticeOp::Scale,
    };
    let f = lattice_op(op, &x, y.as_ref(), c.as_ref())?;
    Ok(Outcome::ok(json!({"function": f.to_json(), "display": f.to_string()})))
}

fn decompose(a: &DecomposeArgs) -> Result<Outcome> {
    let w = rationals(&a.weights)?;
    let u = Universe::points(w.len());
    let s = SignedFunctional::new(&u, w.clone())?;
    let values = match &a.x {
        Some(v) => rationals(v)?,
        None => vec![rational::int(1); w.len()],
    };
    let x = SimpleFunction::from_values(&u, &values)?;
    let d = s.jordan_decompose();
    let (plus, minus, abs) = d.evaluate(&x)?;
    let brute = s.positive_part_bruteforce(&x.positive_part()?)? - s.positive_part_bruteforce(&x.negative_part()?)?;
    let identities = d.identities_hold(&s, &x)?;
    let pass = brute == plus && identities;
    Ok(Outcome {
        result: json!({
            "S": rational_to_json(&s.apply(&x)?),
            "Splus": rational_to_json(&plus),
            "Sminus": rational_to_json(&minus),
            "abs": rational_to_json(&abs),
            "Splus_bruteforce": rational_to_json(&brute),
            "identities_hold": identities,
            "plus": d.plus.measure().to_json(),
            "minus": d.minus.measure().to_json(),
            "variation": d.abs.measure().to_json(),
        }),
        pass,
        table: None,
    })
}

fn integrate(a: &IntegrateArgs) -> Result<Outcome> {
    let (lo, hi) = (parse_rational(&a.interval[0])?, parse_rational(&a.interval[1])?);
    let f = a.function.trim();
    let x = if f == "t" {
        PiecewiseAffine::identity_on(lo, hi)?
    } else if let Some(rest) = f.strip_prefix("affine:") {
        let (m, b) = rest
            .split_once(':')
            .ok_or_else(|| Error::Malformed(format!("expected affine:slope:intercept, got {f:?}")))?;
        PiecewiseAffine::new(vec![AffineCell {
            lo,
            hi,
            slope: parse_rational(m)?,
            intercept: parse_rational(b)?,
        }])?
    } else {
        PiecewiseAffine::constant_on(parse_rational(f)?, lo, hi)?
    };
    let cfg = LevelConfig {
        n_max: a.depth,
        tol: parse_rational(&a.tol)?,
        ceiling: parse_rational(&a.ceiling)?,
        ..LevelConfig::default()
    };
    let r = level_set_integral(&x, &ElementaryIntegral::length(), &cfg)?;
    Ok(Outcome::ok(r.to_json()))
}

fn lebesgue(a: &LebesgueArgs) -> Result<Outcome> {
    let (lo, hi) = (parse_rational(&a.interval[0])?, parse_rational(&a.interval[1])?);
    let r = interval_length_via_daniell(&lo, &hi, a.depth)?;
    let length = ExtReal::Finite(&hi - &lo);
    let mut result = r.to_json();
    result["ramp_integral"] = rational_to_json(&riemann_integral(&ramp_sequence(&lo, &hi, a.depth)?));
    result["contains_length"] = json!(r.contains(&length));
    Ok(Outcome {
        pass: r.contains(&length),
        result,
        table: None,
    })
}

fn wiener_cmd(a: &WienerArgs, seed: u64) -> Result<Outcome> {
    let raw = a.cylinder.to_string_lossy();
    let spec = if raw.trim_start().starts_with('{') {
        load_json(&raw)?
    } else {
        load_json(&format!("@{raw}"))?
    };
    let c = Cylinder::from_json(&spec)?;
    let cfg = PremeasureConfig {
        kernel: match a.kernel {
            KernelArg::Standard => Kernel::Standard,
            KernelArg::HalfVariance => Kernel::HalfVariance,
        },
        tol: a.tol,
        paths: a.paths,
        seed,
        ..PremeasureConfig::default()
    };
    let method = match a.method {
        MethodArg::Quad => Method::Quadrature,
        MethodArg::Mc => Method::MonteCarlo,
    };
    let e = wiener::wiener_premeasure(&c, method, &cfg)?;
    let mut result = e.to_json();
    result["cylinder"] = c.to_json();
    result["kernel"] = json!(cfg.kernel.name());
    Ok(Outcome::ok(result))
}

fn dirichlet_cmd(a: &DirichletArgs, seed: u64) -> Result<Outcome> {
    let shape = match a.domain {
        DomainArg::Disk => Shape::UnitDisk,
        DomainArg::Square => Shape::UnitSquare,
    };
    if a.cells == 0 {
        return Err(Error::Domain("--cells must be positive".into()));
    }
    let dom = DiskDomain::new(shape, 1.0 / a.cells as f64)?;
    let g = BoundaryFunction::from_str(&a.g)?;
    let x = parse_point(&a.x)?;
    let cfg = DirichletConfig {
        solver: match a.solver {
            SolverArg::Grid => Solver::Grid,
            SolverArg::Wos => Solver::WalkOnSpheres,
        },
        wos: WosConfig {
            walks: a.walks,
            seed,
            ..WosConfig::default()
        },
        ..DirichletConfig::default()
    };
    let result = if g.is_continuous() {
        let e = dirichlet::ix_eval(&dom, x, &g, &cfg)?;
        let mut v = e.to_json();
        v["harnack_gap"] = json!(0.0);
        v
    } else if let BoundaryKind::ArcIndicator { lo, hi } = g.kind {
        let ix = DirichletFunctional::new(&dom, x, &cfg)?;
        let ecfg = ExtendConfig {
            depth: a.depth,
            tol: a.tol,
            ..ExtendConfig::default()
        };
        extend_boundary(&ix, &BoundarySequence::arc(lo, hi)?, &ecfg)?.to_json()
    } else {
        return Err(Error::Domain(format!("no monotone approximation for {}", g.name)));
    };
    Ok(Outcome::ok(json!({
        "domain": dom.shape.to_string(),
        "h": 1.0 / a.cells as f64,
        "g": g.name,
        "solver": cfg.solver.to_string(),
        "estimate": result,
        "value": result["value"],
        "stderr": result["stderr"],
        "harnack_gap": result["harnack_gap"],
    })))
}

fn verify(a: &VerifyArgs, seed: u64) -> Result<Outcome> {
    let records = verify_all(&VerifyConfig { quick: a.quick, seed })?;
    let failed = records.iter().filter(|r| !r.pass).count();
    let rows = records
        .iter()
        .map(|r| vec![r.module.clone(), r.check.clone(), if r.pass { "PASS" } else { "FAIL" }.to_string()])
        .collect();
    Ok(Outcome {
        result: json!({
            "checks": records.len(),
            "failed": failed,
            "records": records.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        }),
        pass: failed == 0,
        table: Some((vec!["module".into(), "check".into(), "status".into()], rows)),
    })
}
