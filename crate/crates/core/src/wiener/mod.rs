//! Path space: the cylinder ring and the Gaussian premeasure on it.

mod cylinder;
mod premeasure;
pub mod quad;

pub use cylinder::{borel_from_json, borel_to_json, Cylinder, CylinderUnion, SampledPath};
pub use premeasure::{
    check_additivity_numeric, normal_interval_prob, orthant_probability, premeasure_union,
    ray_above, ray_below, sample_paths, wiener_premeasure, Estimate, Kernel, Method,
    NumericAdditivity, PathMatrix, PremeasureConfig, MAX_QUADRATURE_STEPS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CylinderOp {
    Intersect,
    Difference,
}

/// Intersection is always a single cylinder; a difference comes back as
/// a disjoint family, empty when nothing remains.
pub fn cylinder_combine(op: CylinderOp, d1: &Cylinder, d2: &Cylinder) -> Vec<Cylinder> {
    match op {
        CylinderOp::Intersect => {
            let c = d1.intersect(d2);
            if c.is_empty() {
                Vec::new()
            } else {
                vec![c]
            }
        }
        CylinderOp::Difference => d1.difference(d2),
    }
}
