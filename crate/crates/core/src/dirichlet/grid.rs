use std::collections::HashMap;

use serde_json::{json, Value};

use super::{BoundaryFunction, DiskDomain};
use crate::error::{Error, Result};

const DIRS: [(i8, i8); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Nodes closer to the boundary than this fraction of `h` are treated as
/// boundary points.
const MARGIN: f64 = 1e-3;

#[derive(Clone, Debug)]
struct Row {
    diag: f64,
    interior: Vec<(usize, f64)>,
    boundary: Vec<(usize, f64)>,
}

/// The Shortley-Weller five-point Laplacian on the grid nodes inside a
/// domain: `diag u_P = sum a_Q u_Q + sum b_k g(theta_k)`.
#[derive(Clone, Debug)]
pub struct GridSystem {
    pub domain: DiskDomain,
    nodes: Vec<(f64, f64)>,
    index: HashMap<(i64, i64), usize>,
    rows: Vec<Row>,
    /// Boundary parameters referenced by the stencil.
    thetas: Vec<f64>,
    /// Transposed interior couplings, for the adjoint solve.
    columns: Vec<Vec<(usize, f64)>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SorConfig {
    /// Bound on the largest update `|u_P - (sum a u + b g)/diag|` relative
    /// to `max |u|`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SorConfig {
    fn default() -> Self {
        SorConfig {
            tol: 1e-12,
            max_iter: 50_000,
        }
    }
}

/// Grid values of the discrete harmonic extension.
#[derive(Clone, Debug)]
pub struct HarmonicField {
    pub domain: DiskDomain,
    pub nodes: Vec<(f64, f64)>,
    pub values: Vec<f64>,
    /// Largest relative update at exit.
    pub residual: f64,
    pub iterations: usize,
    /// The boundary values the stencil used.
    pub boundary_values: Vec<f64>,
}

impl HarmonicField {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn boundary_max(&self) -> f64 {
        self.boundary_values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn boundary_min(&self) -> f64 {
        self.boundary_values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "domain": self.domain.shape.to_string(),
            "h": self.domain.h,
            "nodes": self.nodes.len(),
            "residual": self.residual,
            "iterations": self.iterations,
            "max": self.max(),
            "min": self.min(),
            "boundary_max": self.boundary_max(),
            "boundary_min": self.boundary_min(),
        })
    }
}

/// Discrete harmonic measure seen from one point: `u_g(x) = sum w_k g(theta_k)`.
#[derive(Clone, Debug)]
pub struct HarmonicMeasure {
    pub point: (f64, f64),
    pub thetas: Vec<f64>,
    pub weights: Vec<f64>,
    pub residual: f64,
}

impl HarmonicMeasure {
    pub fn integrate(&self, g: &BoundaryFunction) -> f64 {
        self.thetas.iter().zip(&self.weights).map(|(t, w)| w * g.eval(*t)).sum()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

impl GridSystem {
    pub fn new(domain: &DiskDomain) -> Self {
        let h = domain.h;
        let m = domain.cells();
        let range = match domain.shape {
            super::Shape::UnitDisk => -m..=m,
            super::Shape::UnitSquare => 0..=m,
        };
        let inside = |i: i64, j: i64| domain.distance((i as f64 * h, j as f64 * h)) > MARGIN * h;
        let mut nodes = Vec::new();
        let mut index = HashMap::new();
        for j in range.clone() {
            for i in range.clone() {
                if inside(i, j) {
                    index.insert((i, j), nodes.len());
                    nodes.push((i as f64 * h, j as f64 * h));
                }
            }
        }
        let mut thetas = Vec::new();
        let mut rows = Vec::with_capacity(nodes.len());
        for &(x, y) in &nodes {
            let (i, j) = ((x / h).round() as i64, (y / h).round() as i64);
            // arm lengths and what sits at their ends
            let mut arms: [(f64, Option<usize>, Option<usize>); 4] = [(h, None, None); 4];
            for (k, d) in DIRS.iter().enumerate() {
                let q = (i + d.0 as i64, j + d.1 as i64);
                match index.get(&q) {
                    Some(&n) => arms[k] = (h, Some(n), None),
                    None => {
                        let (s, theta) = domain.axis_hit((x, y), *d);
                        let s = s.clamp(MARGIN * h, h);
                        arms[k] = (s, None, Some(thetas.len()));
                        thetas.push(theta);
                    }
                }
            }
            let mut row = Row {
                diag: 0.0,
                interior: Vec::new(),
                boundary: Vec::new(),
            };
            for axis in [(0, 1), (2, 3)] {
                let (sp, sm) = (arms[axis.0].0, arms[axis.1].0);
                for (k, s) in [(axis.0, sp), (axis.1, sm)] {
                    let c = 2.0 / (s * (sp + sm));
                    row.diag += c;
                    match (arms[k].1, arms[k].2) {
                        (Some(n), _) => row.interior.push((n, c)),
                        (_, Some(b)) => row.boundary.push((b, c)),
                        _ => unreachable!("every arm ends somewhere"),
                    }
                }
            }
            rows.push(row);
        }
        let mut columns = vec![Vec::new(); nodes.len()];
        for (p, row) in rows.iter().enumerate() {
            for &(q, c) in &row.interior {
                columns[q].push((p, c));
            }
        }
        GridSystem {
            domain: *domain,
            nodes,
            index,
            rows,
            thetas,
            columns,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    fn omega(&self) -> f64 {
        let h = self.domain.h;
        let rho = 1.0 - self.domain.first_eigenvalue() * h * h / 4.0;
        2.0 / (1.0 + (1.0 - rho * rho).max(0.0).sqrt())
    }

    /// SOR on `diag_P u_P = sum_{(Q,c) in links[P]} c u_Q + rhs_P`.
    fn sor(&self, links: &[Vec<(usize, f64)>], diag: &[f64], rhs: &[f64], cfg: &SorConfig) -> Result<(Vec<f64>, f64, usize)> {
        let omega = self.omega();
        let mut u = vec![0.0; self.len()];
        let mut residual = f64::INFINITY;
        for it in 1..=cfg.max_iter {
            residual = 0.0;
            let mut scale: f64 = 0.0;
            for p in 0..u.len() {
                let s: f64 = links[p].iter().map(|&(q, c)| c * u[q]).sum::<f64>() + rhs[p];
                let target = s / diag[p];
                let r = target - u[p];
                residual = f64::max(residual, r.abs());
                u[p] += omega * r;
                scale = scale.max(u[p].abs());
            }
            residual /= scale.max(f64::MIN_POSITIVE);
            if residual < cfg.tol {
                return Ok((u, residual, it));
            }
        }
        Err(Error::NoConvergence(format!(
            "SOR residual {residual:e} above {:e} after {} sweeps",
            cfg.tol, cfg.max_iter
        )))
    }

    /// Grid values of the discrete harmonic extension of `g`.
    pub fn solve(&self, g: &BoundaryFunction, cfg: &SorConfig) -> Result<HarmonicField> {
        let gb: Vec<f64> = self.thetas.iter().map(|t| g.eval(*t)).collect();
        let rhs: Vec<f64> = self
            .rows
            .iter()
            .map(|r| r.boundary.iter().map(|&(b, c)| c * gb[b]).sum())
            .collect();
        let links: Vec<Vec<(usize, f64)>> = self.rows.iter().map(|r| r.interior.clone()).collect();
        let diag: Vec<f64> = self.rows.iter().map(|r| r.diag).collect();
        let (values, residual, iterations) = self.sor(&links, &diag, &rhs, cfg)?;
        Ok(HarmonicField {
            domain: self.domain,
            nodes: self.nodes.clone(),
            values,
            residual,
            iterations,
            boundary_values: gb,
        })
    }

    /// Bilinear interpolation weights of `p` over grid nodes.
    fn stencil_of(&self, p: (f64, f64)) -> Result<Vec<(usize, f64)>> {
        self.domain.require_interior(p)?;
        let h = self.domain.h;
        let (fx, fy) = (p.0 / h, p.1 / h);
        let (i0, j0) = (fx.floor() as i64, fy.floor() as i64);
        let (tx, ty) = (fx - i0 as f64, fy - j0 as f64);
        let mut out = Vec::new();
        for (di, dj, w) in [
            (0, 0, (1.0 - tx) * (1.0 - ty)),
            (1, 0, tx * (1.0 - ty)),
            (0, 1, (1.0 - tx) * ty),
            (1, 1, tx * ty),
        ] {
            if w == 0.0 {
                continue;
            }
            match self.index.get(&(i0 + di, j0 + dj)) {
                Some(&n) => out.push((n, w)),
                None => {
                    return Err(Error::Domain(format!(
                        "({}, {}) is within one grid cell of the boundary at h = {h}; use walk-on-spheres",
                        p.0, p.1
                    )))
                }
            }
        }
        Ok(out)
    }

    /// Interpolated value of a solved field at `p`.
    pub fn interpolate(&self, field: &HarmonicField, p: (f64, f64)) -> Result<f64> {
        Ok(self.stencil_of(p)?.iter().map(|&(n, w)| w * field.values[n]).sum())
    }

    /// Weights `w_k` with `u_g(p) = sum w_k g(theta_k)` for every `g`, from
    /// one solve of the transposed system.
    pub fn harmonic_measure(&self, p: (f64, f64), cfg: &SorConfig) -> Result<HarmonicMeasure> {
        let mut rhs = vec![0.0; self.len()];
        for (n, w) in self.stencil_of(p)? {
            rhs[n] = w;
        }
        let diag: Vec<f64> = self.rows.iter().map(|r| r.diag).collect();
        let (z, residual, _) = self.sor(&self.columns, &diag, &rhs, cfg)?;
        let mut weights = vec![0.0; self.thetas.len()];
        for (row, zp) in self.rows.iter().zip(&z) {
            for &(b, c) in &row.boundary {
                weights[b] += zp * c;
            }
        }
        Ok(HarmonicMeasure {
            point: p,
            thetas: self.thetas.clone(),
            weights,
            residual,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::Shape;

    fn disk(h: f64) -> DiskDomain {
        DiskDomain::new(Shape::UnitDisk, h).unwrap()
    }

    #[test]
    fn constants_are_reproduced() {
        let g = GridSystem::new(&disk(1.0 / 16.0));
        let f = g.solve(&BoundaryFunction::constant(1.0), &SorConfig::default()).unwrap();
        assert!(f.values.iter().all(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn cosine_error_is_second_order() {
        let err = |h: f64, g: &BoundaryFunction| {
            let sys = GridSystem::new(&disk(h));
            let f = sys.solve(g, &SorConfig::default()).unwrap();
            f.nodes
                .iter()
                .zip(&f.values)
                .map(|(p, v)| (v - g.disk_extension(*p).unwrap()).abs())
                .fold(0.0, f64::max)
        };
        // r cos(theta) = x is linear, which the stencil reproduces
        assert!(err(1.0 / 16.0, &BoundaryFunction::cosine()) < 1e-9);
        let cos3 = BoundaryFunction::trig(0.0, vec![(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let (e1, e2, e3) = (err(1.0 / 8.0, &cos3), err(1.0 / 16.0, &cos3), err(1.0 / 32.0, &cos3));
        assert!(e3 < 2e-3, "{e3}");
        assert!(e1 / e2 > 2.5 && e2 / e3 > 2.5, "{e1} {e2} {e3}");
    }

    #[test]
    fn adjoint_weights_match_direct_solve() {
        let g = GridSystem::new(&disk(1.0 / 16.0));
        let b = BoundaryFunction::trig(0.2, vec![(0.5, -1.0), (0.0, 0.7)]);
        let f = g.solve(&b, &SorConfig::default()).unwrap();
        let p = (0.21, -0.33);
        let hm = g.harmonic_measure(p, &SorConfig::default()).unwrap();
        assert!((hm.total() - 1.0).abs() < 1e-9);
        assert!(hm.weights.iter().all(|w| *w >= -1e-14));
        let direct = g.interpolate(&f, p).unwrap();
        assert!((hm.integrate(&b) - direct).abs() < 1e-9);
    }

    #[test]
    fn square_is_solved_exactly_for_linear_data() {
        let d = DiskDomain::new(Shape::UnitSquare, 1.0 / 8.0).unwrap();
        let g = GridSystem::new(&d);
        let lin = BoundaryFunction::continuous("x + 2y", move |t| {
            let (x, y) = d.boundary_point(t);
            x + 2.0 * y
        });
        let f = g.solve(&lin, &SorConfig::default()).unwrap();
        for (p, v) in f.nodes.iter().zip(&f.values) {
            assert!((v - (p.0 + 2.0 * p.1)).abs() < 1e-10);
        }
    }
}
