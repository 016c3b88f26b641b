use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// `x^2 + y^2 < 1`, boundary parameterized by the polar angle.
    UnitDisk,
    /// `(0,1)^2`, boundary parameterized counterclockwise from the origin
    /// with each side spanning a quarter turn of "angle".
    UnitSquare,
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disk" => Ok(Shape::UnitDisk),
            "square" => Ok(Shape::UnitSquare),
            other => Err(Error::Malformed(format!("unknown domain {other:?}; expected disk or square"))),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::UnitDisk => "disk",
            Shape::UnitSquare => "square",
        })
    }
}

/// A bounded planar domain with the finite-difference spacing `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskDomain {
    pub shape: Shape,
    pub h: f64,
}

pub const DEFAULT_H: f64 = 1.0 / 128.0;

impl DiskDomain {
    /// `1/h` must be a whole number so the grid meets the boundary of the
    /// square exactly.
    pub fn new(shape: Shape, h: f64) -> Result<Self> {
        let m = (1.0 / h).round();
        if !(h > 0.0) || m < 2.0 || ((m * h) - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("grid spacing {h} must be 1/m for a whole m >= 2")));
        }
        Ok(DiskDomain { shape, h })
    }

    pub fn unit_disk() -> Self {
        DiskDomain {
            shape: Shape::UnitDisk,
            h: DEFAULT_H,
        }
    }

    pub fn unit_square() -> Self {
        DiskDomain {
            shape: Shape::UnitSquare,
            h: DEFAULT_H,
        }
    }

    pub fn with_h(self, h: f64) -> Result<Self> {
        Self::new(self.shape, h)
    }

    /// Grid cells per unit length.
    pub fn cells(&self) -> i64 {
        (1.0 / self.h).round() as i64
    }

    pub fn center(&self) -> (f64, f64) {
        match self.shape {
            Shape::UnitDisk => (0.0, 0.0),
            Shape::UnitSquare => (0.5, 0.5),
        }
    }

    /// Distance to the boundary; negative outside.
    pub fn distance(&self, p: (f64, f64)) -> f64 {
        match self.shape {
            Shape::UnitDisk => 1.0 - p.0.hypot(p.1),
            Shape::UnitSquare => p.0.min(1.0 - p.0).min(p.1).min(1.0 - p.1),
        }
    }

    pub fn contains(&self, p: (f64, f64)) -> bool {
        self.distance(p) > 0.0
    }

    /// Boundary parameter (in `[0, 2 pi)`) of the boundary point nearest `p`.
    pub fn nearest_boundary(&self, p: (f64, f64)) -> f64 {
        match self.shape {
            Shape::UnitDisk => p.1.atan2(p.0).rem_euclid(TAU),
            Shape::UnitSquare => {
                let (x, y) = (p.0.clamp(0.0, 1.0), p.1.clamp(0.0, 1.0));
                let d = [y, 1.0 - x, 1.0 - y, x];
                let side = (0..4).min_by(|&a, &b| d[a].total_cmp(&d[b])).expect("four sides");
                let along = match side {
                    0 => x,
                    1 => y,
                    2 => 1.0 - x,
                    _ => 1.0 - y,
                };
                (side as f64 + along) * FRAC_PI_2
            }
        }
    }

    /// The boundary point with parameter `theta`.
    pub fn boundary_point(&self, theta: f64) -> (f64, f64) {
        let theta = theta.rem_euclid(TAU);
        match self.shape {
            Shape::UnitDisk => (theta.cos(), theta.sin()),
            Shape::UnitSquare => {
                let s = theta / FRAC_PI_2;
                let side = (s.floor() as i64).clamp(0, 3);
                let t = s - side as f64;
                match side {
                    0 => (t, 0.0),
                    1 => (1.0, t),
                    2 => (1.0 - t, 1.0),
                    _ => (0.0, 1.0 - t),
                }
            }
        }
    }

    /// Where the ray from interior `p` along an axis direction first meets
    /// the boundary: the distance and the boundary parameter.
    pub fn axis_hit(&self, p: (f64, f64), dir: (i8, i8)) -> (f64, f64) {
        let (x, y) = p;
        let (dx, dy) = (dir.0 as f64, dir.1 as f64);
        match self.shape {
            Shape::UnitDisk => {
                let q = if dx != 0.0 {
                    let xb = dx * (1.0 - y * y).max(0.0).sqrt();
                    (xb, y)
                } else {
                    let yb = dy * (1.0 - x * x).max(0.0).sqrt();
                    (x, yb)
                };
                let d = ((q.0 - x) * dx + (q.1 - y) * dy).max(0.0);
                (d, q.1.atan2(q.0).rem_euclid(TAU))
            }
            Shape::UnitSquare => {
                let q = match dir {
                    (1, _) => (1.0, y),
                    (-1, _) => (0.0, y),
                    (_, 1) => (x, 1.0),
                    _ => (x, 0.0),
                };
                let d = ((q.0 - x) * dx + (q.1 - y) * dy).max(0.0);
                (d, self.nearest_boundary(q))
            }
        }
    }

    /// Smallest eigenvalue of the Dirichlet Laplacian, for the relaxation
    /// factor.
    pub(crate) fn first_eigenvalue(&self) -> f64 {
        match self.shape {
            Shape::UnitDisk => 5.783_185_962_946_784,
            Shape::UnitSquare => 2.0 * std::f64::consts::PI * std::f64::consts::PI,
        }
    }

    pub fn require_interior(&self, p: (f64, f64)) -> Result<()> {
        if !p.0.is_finite() || !p.1.is_finite() || !self.contains(p) {
            return Err(Error::Domain(format!(
                "({}, {}) is not an interior point of the {}",
                p.0, p.1, self.shape
            )));
        }
        Ok(())
    }
}

/// Parses `x,y`.
pub fn parse_point(s: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::Malformed(format!("expected x,y but got {s:?}")));
    }
    let num = |t: &str| t.parse::<f64>().map_err(|_| Error::Malformed(format!("{t:?} is not a number")));
    Ok((num(parts[0])?, num(parts[1])?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_parameterization_round_trips() {
        let d = DiskDomain::unit_square();
        for k in 0..40 {
            let theta = k as f64 * TAU / 40.0 + 0.01;
            let p = d.boundary_point(theta);
            assert!((d.nearest_boundary(p) - theta).abs() < 1e-12, "{theta}");
        }
    }

    #[test]
    fn disk_axis_hits() {
        let d = DiskDomain::unit_disk();
        let (s, th) = d.axis_hit((0.0, 0.0), (1, 0));
        assert!((s - 1.0).abs() < 1e-15 && th.abs() < 1e-15);
        let (s, th) = d.axis_hit((0.0, 0.6), (-1, 0));
        assert!((s - 0.8).abs() < 1e-12);
        assert!((th - (0.6f64).atan2(-0.8)).abs() < 1e-12);
    }

    #[test]
    fn spacing_must_divide_one() {
        assert!(DiskDomain::new(Shape::UnitDisk, 0.3).is_err());
        assert!(DiskDomain::new(Shape::UnitDisk, 0.25).is_ok());
    }
}
