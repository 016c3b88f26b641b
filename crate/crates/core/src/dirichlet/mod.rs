//! The Dirichlet functional `I_x(g) = u_g(x)` on boundary data of the unit
//! disk and square, its monotone extension to discontinuous data, and the
//! harmonic-measure checks built on it.

mod boundary;
mod domain;
mod extend;
mod grid;
mod wos;

pub use boundary::{arc_harmonic_measure, parse_angle, BoundaryFunction, BoundaryKind};
pub use domain::{parse_point, DiskDomain, Shape, DEFAULT_H};
pub use extend::{
    agreement_suite, d2_suite, domain_independence, extend_boundary, fuzz_boundary, harnack_constant,
    maximum_principle_suite, BoundarySequence, ExtendConfig, ExtensionResult, HarnackReport,
};
pub use grid::{GridSystem, HarmonicField, HarmonicMeasure, SorConfig};
pub use wos::{sample_exits, ExitSample, MeanEstimate, WosConfig};

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    Grid,
    WalkOnSpheres,
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Solver::Grid),
            "wos" => Ok(Solver::WalkOnSpheres),
            other => Err(Error::Malformed(format!("unknown solver {other:?}; expected grid or wos"))),
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Grid => "grid",
            Solver::WalkOnSpheres => "wos",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirichletConfig {
    pub solver: Solver,
    pub sor: SorConfig,
    pub wos: WosConfig,
}

impl Default for DirichletConfig {
    fn default() -> Self {
        DirichletConfig {
            solver: Solver::Grid,
            sor: SorConfig::default(),
            wos: WosConfig::default(),
        }
    }
}

impl DirichletConfig {
    pub fn to_json(&self) -> Value {
        json!({
            "solver": self.solver.to_string(),
            "sor_tol": self.sor.tol,
            "max_iter": self.sor.max_iter,
            "walks": self.wos.walks,
            "eps": self.wos.eps,
            "seed": self.wos.seed,
        })
    }
}

/// `u_g(x)` with the solver's error information.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointEstimate {
    pub value: f64,
    /// Standard error of a walk-on-spheres mean.
    pub stderr: Option<f64>,
    /// Scaled SOR residual of a grid solve.
    pub residual: Option<f64>,
}

impl PointEstimate {
    pub fn to_json(&self) -> Value {
        json!({"value": self.value, "stderr": self.stderr, "residual": self.residual})
    }
}

/// `I_x` for one interior point: harmonic-measure weights from the grid,
/// or walk exits, either of which integrates any boundary function.
#[derive(Clone, Debug)]
pub enum DirichletFunctional {
    Grid(HarmonicMeasure),
    Walks(ExitSample),
}

impl DirichletFunctional {
    pub fn new(dom: &DiskDomain, x: (f64, f64), cfg: &DirichletConfig) -> Result<Self> {
        dom.require_interior(x)?;
        Ok(match cfg.solver {
            Solver::Grid => DirichletFunctional::Grid(GridSystem::new(dom).harmonic_measure(x, &cfg.sor)?),
            Solver::WalkOnSpheres => DirichletFunctional::Walks(sample_exits(dom, x, &cfg.wos)?),
        })
    }

    pub fn point(&self) -> (f64, f64) {
        match self {
            DirichletFunctional::Grid(h) => h.point,
            DirichletFunctional::Walks(w) => w.start,
        }
    }

    /// Boundary parameters the functional integrates over.
    pub fn support(&self) -> &[f64] {
        match self {
            DirichletFunctional::Grid(h) => &h.thetas,
            DirichletFunctional::Walks(w) => &w.thetas,
        }
    }

    /// `I_x(g)` for continuous `g`.
    pub fn apply(&self, g: &BoundaryFunction) -> Result<PointEstimate> {
        if !g.is_continuous() {
            return Err(Error::Domain(format!(
                "{} is discontinuous; approach it with a monotone continuous sequence",
                g.name
            )));
        }
        Ok(self.apply_fn(|t| g.eval(t)))
    }

    pub(crate) fn apply_fn(&self, f: impl Fn(f64) -> f64 + Sync) -> PointEstimate {
        match self {
            DirichletFunctional::Grid(h) => PointEstimate {
                value: h.thetas.iter().zip(&h.weights).map(|(t, w)| w * f(*t)).sum(),
                stderr: None,
                residual: Some(h.residual),
            },
            DirichletFunctional::Walks(w) => {
                let e = w.estimate_by(f);
                PointEstimate {
                    value: e.value,
                    stderr: Some(e.stderr),
                    residual: None,
                }
            }
        }
    }
}

/// A grid field, or a walk-on-spheres evaluator for single points.
#[derive(Clone, Debug)]
pub enum Solution {
    Field(HarmonicField),
    Walker {
        domain: DiskDomain,
        g: BoundaryFunction,
        cfg: WosConfig,
    },
}

impl Solution {
    pub fn eval(&self, x: (f64, f64)) -> Result<PointEstimate> {
        match self {
            Solution::Field(f) => {
                let value = GridSystem::new(&f.domain).interpolate(f, x)?;
                Ok(PointEstimate {
                    value,
                    stderr: None,
                    residual: Some(f.residual),
                })
            }
            Solution::Walker { domain, g, cfg } => {
                let e = sample_exits(domain, x, cfg)?.estimate(g);
                Ok(PointEstimate {
                    value: e.value,
                    stderr: Some(e.stderr),
                    residual: None,
                })
            }
        }
    }
}

/// The harmonic extension of continuous `g`.
pub fn solve_dirichlet(dom: &DiskDomain, g: &BoundaryFunction, cfg: &DirichletConfig) -> Result<Solution> {
    if !g.is_continuous() {
        return Err(Error::Domain(format!(
            "{} is discontinuous; use extend_boundary",
            g.name
        )));
    }
    match cfg.solver {
        Solver::Grid => Ok(Solution::Field(GridSystem::new(dom).solve(g, &cfg.sor)?)),
        Solver::WalkOnSpheres => Ok(Solution::Walker {
            domain: *dom,
            g: g.clone(),
            cfg: cfg.wos,
        }),
    }
}

/// `I_x(g) = u_g(x)`.
pub fn ix_eval(dom: &DiskDomain, x: (f64, f64), g: &BoundaryFunction, cfg: &DirichletConfig) -> Result<PointEstimate> {
    DirichletFunctional::new(dom, x, cfg)?.apply(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse() -> DiskDomain {
        DiskDomain::new(Shape::UnitDisk, 1.0 / 32.0).unwrap()
    }

    #[test]
    fn center_values() {
        let cfg = DirichletConfig::default();
        let c = ix_eval(&coarse(), (0.0, 0.0), &BoundaryFunction::constant(2.5), &cfg).unwrap();
        assert!((c.value - 2.5).abs() < 1e-9);
        let cos = ix_eval(&coarse(), (0.0, 0.0), &BoundaryFunction::cosine(), &cfg).unwrap();
        assert!(cos.value.abs() < 1e-9);
    }

    #[test]
    fn linearity_through_weights() {
        let cfg = DirichletConfig::default();
        let f = DirichletFunctional::new(&coarse(), (0.2, 0.1), &cfg).unwrap();
        let g1 = BoundaryFunction::trig(0.1, vec![(0.3, 0.2)]);
        let g2 = BoundaryFunction::arc_ramp(0.0, 2.0, 0.3);
        let combo = BoundaryFunction::combination(vec![(2.0, g1.clone()), (3.0, g2.clone())]);
        let lhs = f.apply(&combo).unwrap().value;
        let rhs = 2.0 * f.apply(&g1).unwrap().value + 3.0 * f.apply(&g2).unwrap().value;
        assert!((lhs - rhs).abs() < 2e-12);
    }

    #[test]
    fn discontinuous_data_is_refused() {
        let arc = BoundaryFunction::arc(0.0, 1.0).unwrap();
        assert!(matches!(solve_dirichlet(&coarse(), &arc, &DirichletConfig::default()), Err(Error::Domain(_))));
        assert!(ix_eval(&coarse(), (0.0, 0.0), &arc, &DirichletConfig::default()).is_err());
        assert!(ix_eval(&coarse(), (1.0, 0.0), &BoundaryFunction::constant(1.0), &DirichletConfig::default()).is_err());
    }

    #[test]
    fn nonnegative_data_gives_nonnegative_field() {
        let g = BoundaryFunction::arc_ramp(1.0, 3.0, 0.2);
        match solve_dirichlet(&coarse(), &g, &DirichletConfig::default()).unwrap() {
            Solution::Field(f) => assert!(f.min() >= -1e-12),
            Solution::Walker { .. } => unreachable!(),
        }
    }
}
