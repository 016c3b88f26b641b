use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{BoundaryFunction, DiskDomain};
use crate::error::{Error, Result};

const CHUNK: usize = 4096;
const MAX_STEPS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WosConfig {
    pub walks: usize,
    /// Walks stop inside this shell around the boundary.
    pub eps: f64,
    pub seed: u64,
}

impl Default for WosConfig {
    fn default() -> Self {
        WosConfig {
            walks: 100_000,
            eps: 1e-6,
            seed: 0,
        }
    }
}

/// Boundary parameters where the walks from one starting point ended.
/// Every estimate drawn from the same exits uses the same randomness.
#[derive(Clone, Debug)]
pub struct ExitSample {
    pub start: (f64, f64),
    pub thetas: Vec<f64>,
    pub mean_steps: f64,
}

/// A sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanEstimate {
    pub value: f64,
    pub stderr: f64,
}

impl ExitSample {
    pub fn estimate(&self, g: &BoundaryFunction) -> MeanEstimate {
        self.estimate_by(|t| g.eval(t))
    }

    pub fn estimate_by(&self, f: impl Fn(f64) -> f64 + Sync) -> MeanEstimate {
        let n = self.thetas.len() as f64;
        let (s, s2) = self
            .thetas
            .par_iter()
            .map(|&t| {
                let v = f(t);
                (v, v * v)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        let mean = s / n;
        let var = if n > 1.0 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        MeanEstimate {
            value: mean,
            stderr: (var / n).sqrt(),
        }
    }
}

fn walk(dom: &DiskDomain, start: (f64, f64), eps: f64, rng: &mut ChaCha8Rng) -> (f64, usize) {
    let mut p = start;
    for step in 0..MAX_STEPS {
        let d = dom.distance(p);
        if d < eps {
            return (dom.nearest_boundary(p), step);
        }
        let a = rng.random::<f64>() * TAU;
        p = (p.0 + d * a.cos(), p.1 + d * a.sin());
    }
    (dom.nearest_boundary(p), MAX_STEPS)
}

/// Runs `cfg.walks` walks from `start`. Chunk `k` draws from the ChaCha8
/// stream `k` of `cfg.seed`, so the result does not depend on scheduling.
pub fn sample_exits(dom: &DiskDomain, start: (f64, f64), cfg: &WosConfig) -> Result<ExitSample> {
    dom.require_interior(start)?;
    if cfg.walks == 0 {
        return Err(Error::Precondition("at least one walk is needed".into()));
    }
    if !(cfg.eps > 0.0) {
        return Err(Error::Precondition("the stopping shell must be positive".into()));
    }
    let chunks = cfg.walks.div_ceil(CHUNK);
    let parts: Vec<(Vec<f64>, usize)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            let n = CHUNK.min(cfg.walks - k * CHUNK);
            let mut steps = 0;
            let thetas = (0..n)
                .map(|_| {
                    let (t, s) = walk(dom, start, cfg.eps, &mut rng);
                    steps += s;
                    t
                })
                .collect();
            (thetas, steps)
        })
        .collect();
    let steps: usize = parts.iter().map(|p| p.1).sum();
    let thetas: Vec<f64> = parts.into_iter().flat_map(|p| p.0).collect();
    Ok(ExitSample {
        start,
        mean_steps: steps as f64 / thetas.len() as f64,
        thetas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_unbiased_at_center() {
        let d = DiskDomain::unit_disk();
        let cfg = WosConfig {
            walks: 20_000,
            seed: 3,
            ..WosConfig::default()
        };
        let a = sample_exits(&d, (0.0, 0.0), &cfg).unwrap();
        let b = sample_exits(&d, (0.0, 0.0), &cfg).unwrap();
        assert_eq!(a.thetas, b.thetas);
        let e = a.estimate(&BoundaryFunction::cosine());
        assert!(e.value.abs() < 4.0 * e.stderr, "{e:?}");
        let one = a.estimate(&BoundaryFunction::constant(1.0));
        assert_eq!((one.value, one.stderr), (1.0, 0.0));
    }

    #[test]
    fn off_center_matches_closed_form() {
        let d = DiskDomain::unit_disk();
        let cfg = WosConfig {
            walks: 50_000,
            seed: 11,
            ..WosConfig::default()
        };
        let p = (0.4, 0.3);
        let g = BoundaryFunction::trig(0.0, vec![(1.0, 0.5), (0.0, -0.3)]);
        let e = sample_exits(&d, p, &cfg).unwrap().estimate(&g);
        let exact = g.disk_extension(p).unwrap();
        assert!((e.value - exact).abs() < 4.0 * e.stderr + 1e-5, "{e:?} vs {exact}");
    }

    #[test]
    fn boundary_start_rejected() {
        let d = DiskDomain::unit_disk();
        assert!(sample_exits(&d, (1.0, 0.0), &WosConfig::default()).is_err());
    }
}
