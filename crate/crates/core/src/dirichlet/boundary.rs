use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

type Eval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum BoundaryKind {
    Constant(f64),
    /// `a0 + sum_k (a_k cos k theta + b_k sin k theta)`.
    Trig { a0: f64, terms: Vec<(f64, f64)> },
    /// 1 on the arc `[lo, hi]` (angles mod `2 pi`), 0 elsewhere.
    ArcIndicator { lo: f64, hi: f64 },
    /// Continuous, piecewise linear in the angle: 0 outside `[lo, hi]`,
    /// 1 on `[lo + w, hi - w]`.
    ArcRamp { lo: f64, hi: f64, w: f64 },
    Continuous(Eval),
    Discontinuous(Eval),
}

/// Boundary data `g` as a function of the boundary parameter.
#[derive(Clone)]
pub struct BoundaryFunction {
    pub name: String,
    pub kind: BoundaryKind,
}

impl fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoundaryFunction({})", self.name)
    }
}

/// Position of `theta` along the arc starting at `lo`, in `[0, 2 pi)`.
fn offset(theta: f64, lo: f64) -> f64 {
    (theta - lo).rem_euclid(TAU)
}

fn arc_len(lo: f64, hi: f64) -> f64 {
    let l = hi - lo;
    if l >= TAU {
        TAU
    } else {
        l.rem_euclid(TAU)
    }
}

impl BoundaryFunction {
    pub fn constant(c: f64) -> Self {
        BoundaryFunction {
            name: format!("const:{c}"),
            kind: BoundaryKind::Constant(c),
        }
    }

    pub fn cosine() -> Self {
        Self::trig(0.0, vec![(1.0, 0.0)])
    }

    pub fn trig(a0: f64, terms: Vec<(f64, f64)>) -> Self {
        let mut name = format!("trig:{a0}");
        for (a, b) in &terms {
            name.push_str(&format!(",{a},{b}"));
        }
        BoundaryFunction {
            name,
            kind: BoundaryKind::Trig { a0, terms },
        }
    }

    pub fn arc(lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Domain(format!("arc needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(BoundaryFunction {
            name: format!("arc:{lo}:{hi}"),
            kind: BoundaryKind::ArcIndicator { lo, hi },
        })
    }

    /// The ramp under the arc indicator with edges of width `w`; with
    /// `w < 0` the ramp lies over it, rising outside the arc.
    pub fn arc_ramp(lo: f64, hi: f64, w: f64) -> Self {
        BoundaryFunction {
            name: format!("ramp:{lo}:{hi}:{w}"),
            kind: BoundaryKind::ArcRamp { lo, hi, w },
        }
    }

    pub fn continuous(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        BoundaryFunction {
            name: name.into(),
            kind: BoundaryKind::Continuous(Arc::new(f)),
        }
    }

    pub fn discontinuous(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        BoundaryFunction {
            name: name.into(),
            kind: BoundaryKind::Discontinuous(Arc::new(f)),
        }
    }

    /// `sum c_i g_i`, continuous when every `g_i` is.
    pub fn combination(parts: Vec<(f64, BoundaryFunction)>) -> Self {
        let continuous = parts.iter().all(|(_, g)| g.is_continuous());
        let name = parts
            .iter()
            .map(|(c, g)| format!("{c}*({})", g.name))
            .collect::<Vec<_>>()
            .join(" + ");
        let f = move |t: f64| parts.iter().map(|(c, g)| c * g.eval(t)).sum();
        if continuous {
            Self::continuous(name, f)
        } else {
            Self::discontinuous(name, f)
        }
    }

    pub fn is_continuous(&self) -> bool {
        match &self.kind {
            BoundaryKind::ArcIndicator { lo, hi } => arc_len(*lo, *hi) >= TAU,
            BoundaryKind::Discontinuous(_) => false,
            _ => true,
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match &self.kind {
            BoundaryKind::Constant(c) => *c,
            BoundaryKind::Trig { a0, terms } => {
                a0 + terms
                    .iter()
                    .enumerate()
                    .map(|(k, (a, b))| {
                        let kt = (k + 1) as f64 * theta;
                        a * kt.cos() + b * kt.sin()
                    })
                    .sum::<f64>()
            }
            BoundaryKind::ArcIndicator { lo, hi } => {
                let l = arc_len(*lo, *hi);
                if l >= TAU || offset(theta, *lo) <= l {
                    1.0
                } else {
                    0.0
                }
            }
            BoundaryKind::ArcRamp { lo, hi, w } => ramp_value(theta, *lo, *hi, *w),
            BoundaryKind::Continuous(f) | BoundaryKind::Discontinuous(f) => f(theta),
        }
    }

    /// The harmonic extension into the unit disk, when it has a closed form.
    pub fn disk_extension(&self, p: (f64, f64)) -> Option<f64> {
        let r = p.0.hypot(p.1);
        let t = p.1.atan2(p.0);
        match &self.kind {
            BoundaryKind::Constant(c) => Some(*c),
            BoundaryKind::Trig { a0, terms } => Some(
                a0 + terms
                    .iter()
                    .enumerate()
                    .map(|(k, (a, b))| {
                        let kk = (k + 1) as f64;
                        r.powf(kk) * (a * (kk * t).cos() + b * (kk * t).sin())
                    })
                    .sum::<f64>(),
            ),
            BoundaryKind::ArcIndicator { lo, hi } => Some(arc_harmonic_measure(p, *lo, *hi)),
            _ => None,
        }
    }
}

fn ramp_value(theta: f64, lo: f64, hi: f64, w: f64) -> f64 {
    let (lo, hi, w) = if w < 0.0 { (lo + w, hi - w, -w) } else { (lo, hi, w) };
    let l = arc_len(lo, hi);
    if l >= TAU {
        return 1.0;
    }
    let s = offset(theta, lo);
    if s > l {
        return 0.0;
    }
    if w <= 0.0 {
        return 1.0;
    }
    (s / w).min((l - s) / w).min(1.0)
}

/// Harmonic measure of the arc `[lo, hi]` seen from `p` in the unit disk:
/// `(phi(hi) - phi(lo)) / 2 pi` where `phi` is the angle subtended through
/// the Poisson kernel, `2 atan((1+r)/(1-r) tan((t - theta)/2))`.
pub fn arc_harmonic_measure(p: (f64, f64), lo: f64, hi: f64) -> f64 {
    let l = arc_len(lo, hi);
    if l >= TAU {
        return 1.0;
    }
    let r = p.0.hypot(p.1);
    let t = p.1.atan2(p.0);
    let k = (1.0 + r) / (1.0 - r);
    // conformal angle of a boundary offset d in [-pi, pi] from the point
    // antipodal to p; monotone in d
    let phi = |d: f64| 2.0 * (k * (d / 2.0).tan()).atan();
    let d_lo = (lo - t + PI).rem_euclid(TAU) - PI;
    let d_hi = d_lo + l;
    let a = phi(d_lo);
    let b = if d_hi <= PI { phi(d_hi) } else { phi(d_hi - TAU) + TAU };
    (b - a) / TAU
}

/// Parses an angle such as `0`, `pi`, `pi/3`, `2pi/3`, `-pi/2`, `1.5`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t = s.trim().replace('*', "");
    let bad = || Error::Malformed(format!("{s:?} is not an angle"));
    if let Some(i) = t.find("pi") {
        let coeff = match &t[..i] {
            "" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        let rest = &t[i + 2..];
        let den = if rest.is_empty() {
            1.0
        } else {
            rest.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?
        };
        if den == 0.0 {
            return Err(bad());
        }
        Ok(coeff * PI / den)
    } else {
        t.parse::<f64>().map_err(|_| bad())
    }
}

impl FromStr for BoundaryFunction {
    type Err = Error;

    /// `const:c`, `cos`, `trig:a0,a1,b1,...`, `arc:lo:hi`, `ramp:lo:hi:w`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::Malformed(format!("{t:?} is not a number")));
        match (head, rest.as_slice()) {
            ("const", [c]) => Ok(Self::constant(num(c)?)),
            ("cos", []) => Ok(Self::cosine()),
            ("trig", [coeffs]) => {
                let v = coeffs.split(',').map(num).collect::<Result<Vec<f64>>>()?;
                if v.len() % 2 == 0 {
                    return Err(Error::Malformed("trig needs a0 then pairs a_k,b_k".into()));
                }
                Ok(Self::trig(v[0], v[1..].chunks(2).map(|c| (c[0], c[1])).collect()))
            }
            ("arc", [lo, hi]) => Self::arc(parse_angle(lo)?, parse_angle(hi)?),
            ("ramp", [lo, hi, w]) => Ok(Self::arc_ramp(parse_angle(lo)?, parse_angle(hi)?, parse_angle(w)?)),
            _ => Err(Error::Malformed(format!(
                "unknown boundary function {s:?}; expected const:c, cos, trig:a0,a1,b1,..., arc:lo:hi or ramp:lo:hi:w"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("2pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert!(parse_angle("pie").is_err());
        let g: BoundaryFunction = "arc:0:pi".parse().unwrap();
        assert!(!g.is_continuous());
        assert_eq!(g.eval(1.0), 1.0);
        assert_eq!(g.eval(4.0), 0.0);
        let t: BoundaryFunction = "trig:1,0,2".parse().unwrap();
        assert!((t.eval(PI / 2.0) - 3.0).abs() < 1e-12);
        assert!("trig:1,2".parse::<BoundaryFunction>().is_err());
    }

    #[test]
    fn ramps_bracket_the_arc() {
        let arc = BoundaryFunction::arc(1.0, 2.5).unwrap();
        let under = BoundaryFunction::arc_ramp(1.0, 2.5, 0.1);
        let over = BoundaryFunction::arc_ramp(1.0, 2.5, -0.1);
        for k in 0..1000 {
            let t = k as f64 * TAU / 1000.0;
            assert!(under.eval(t) <= arc.eval(t) && arc.eval(t) <= over.eval(t), "{t}");
        }
        assert_eq!(under.eval(1.75), 1.0);
        assert!((under.eval(1.05) - 0.5).abs() < 1e-12);
        assert!((over.eval(0.95) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn harmonic_measure_closed_form() {
        assert!((arc_harmonic_measure((0.0, 0.0), 0.0, PI) - 0.5).abs() < 1e-15);
        assert!((arc_harmonic_measure((0.0, 0.0), 0.0, PI / 3.0) - 1.0 / 6.0).abs() < 1e-15);
        // complementary arcs add up to one from any point
        let p = (0.3, -0.5);
        let a = arc_harmonic_measure(p, 0.4, 2.0);
        let b = arc_harmonic_measure(p, 2.0, 0.4 + TAU);
        assert!((a + b - 1.0).abs() < 1e-12);
        // quadrature of the Poisson kernel as an independent check
        let n = 200_000;
        let r2 = p.0 * p.0 + p.1 * p.1;
        let q: f64 = (0..n)
            .map(|i| {
                let th = 0.4 + (i as f64 + 0.5) * 1.6 / n as f64;
                let (c, s) = (th.cos(), th.sin());
                (1.0 - r2) / ((c - p.0).powi(2) + (s - p.1).powi(2))
            })
            .sum::<f64>()
            * 1.6
            / n as f64
            / TAU;
        assert!((a - q).abs() < 1e-8, "{a} vs {q}");
    }
}
