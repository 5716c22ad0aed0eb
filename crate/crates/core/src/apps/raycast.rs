//! Ray–patch intersection through the expanded implicit polynomial.

use serde::Serialize;

use super::invert::{invert_point, Inversion};
use super::roots::{find_roots, horner};
use crate::dixon::{build_cayley_matrix, CayleyMatrix};
use crate::error::{Error, Result};
use crate::expand::{expand_resultant, TrivariatePoly};
use crate::geometry::{ControlNet, DomainPoint, Point3};
use crate::normalize::{normalize_net, NormalizationTransform};
use crate::numeric::{det_eval, tolerance_scale, DEFAULT_REL_TOL};

// Fractions of the inflated bounding box used to probe for a determinant
// that vanishes everywhere.
const PROBES: [[f64; 3]; 6] = [
    [0.13, 0.71, 0.37],
    [0.89, 0.23, 0.61],
    [0.47, 0.94, 0.08],
    [0.31, 0.05, 0.83],
    [0.76, 0.52, 0.19],
    [0.02, 0.38, 0.97],
];

fn determinant_vanishes(net: &ControlNet, cayley: &CayleyMatrix) -> bool {
    let pts = net.points();
    let lo = pts.iter().fold(pts[0], |a, p| Point3 { x: a.x.min(p.x), y: a.y.min(p.y), z: a.z.min(p.z) });
    let hi = pts.iter().fold(pts[0], |a, p| Point3 { x: a.x.max(p.x), y: a.y.max(p.y), z: a.z.max(p.z) });
    let pad = net.diameter();
    PROBES.iter().all(|f| {
        let q = Point3 {
            x: lo.x - pad + f[0] * (hi.x - lo.x + 2.0 * pad),
            y: lo.y - pad + f[1] * (hi.y - lo.y + 2.0 * pad),
            z: lo.z - pad + f[2] * (hi.z - lo.z + 2.0 * pad),
        };
        det_eval(cayley, q).abs() <= tolerance_scale(cayley, q, DEFAULT_REL_TOL)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ray {
    pub origin: Point3,
    direction: Point3,
}

impl Ray {
    /// The direction is normalized; a zero or non-finite direction is rejected.
    pub fn new(origin: Point3, direction: Point3) -> Result<Self> {
        let n = direction.norm();
        if !origin.is_finite() || !n.is_finite() {
            return Err(Error::InvalidInput("ray must be finite".into()));
        }
        if n == 0.0 {
            return Err(Error::DegenerateDirection);
        }
        Ok(Ray { origin, direction: direction * (1.0 / n) })
    }

    pub fn direction(&self) -> Point3 {
        self.direction
    }

    pub fn at(&self, t: f64) -> Point3 {
        self.origin + self.direction * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaycastOptions {
    /// Expand the polynomial in the canonical pose of the net.
    pub normalize: bool,
    /// Hits must be reconstructed within this many patch diameters.
    pub validation_rel: f64,
}

impl Default for RaycastOptions {
    fn default() -> Self {
        RaycastOptions { normalize: true, validation_rel: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hit {
    pub t: f64,
    pub point: Point3,
    pub inversion: Inversion,
}

impl Hit {
    pub fn domain(&self) -> DomainPoint {
        self.inversion.domain
    }
}

/// A net together with its implicit form, built once and reused across
/// queries.
#[derive(Debug, Clone)]
pub struct ImplicitPatch {
    net: ControlNet,
    transform: NormalizationTransform,
    cayley: CayleyMatrix,
    poly: TrivariatePoly,
}

impl ImplicitPatch {
    pub fn new(net: &ControlNet, normalize: bool) -> Result<Self> {
        let (frame_net, transform) = if normalize {
            normalize_net(net)?
        } else {
            (net.clone(), NormalizationTransform::identity())
        };
        let cayley = build_cayley_matrix(&frame_net)?;
        if cayley.is_identically_zero() {
            return Err(Error::DegenerateSurface("the Cayley matrix vanishes identically".into()));
        }
        if determinant_vanishes(&frame_net, &cayley) {
            return Err(Error::DegenerateSurface("the resultant vanishes identically".into()));
        }
        let poly = expand_resultant(&cayley)?;
        Ok(ImplicitPatch { net: net.clone(), transform, cayley, poly })
    }

    pub fn net(&self) -> &ControlNet {
        &self.net
    }

    pub fn transform(&self) -> &NormalizationTransform {
        &self.transform
    }

    pub fn cayley(&self) -> &CayleyMatrix {
        &self.cayley
    }

    pub fn poly(&self) -> &TrivariatePoly {
        &self.poly
    }

    /// The implicit polynomial restricted to the ray, ascending in `t`.
    /// The parameter is the world-space ray parameter in either frame.
    pub fn ray_polynomial(&self, ray: &Ray) -> Vec<f64> {
        let o = self.transform.to_normalized(ray.origin);
        let d = self.transform.vector_to_normalized(ray.direction);
        self.poly.along_line(o, d)
    }

    /// Real roots of the restricted polynomial in `[t0, t1]`, before any
    /// validation against the patch.
    pub fn algebraic_roots(&self, ray: &Ray, t0: f64, t1: f64) -> Result<Vec<f64>> {
        if !t0.is_finite() || !t1.is_finite() || t0 >= t1 {
            return Err(Error::InvalidInput(format!("bad parameter range [{t0}, {t1}]")));
        }
        let coeffs = self.ray_polynomial(ray);
        Ok(find_roots(|t| horner(&coeffs, t), t0, t1))
    }

    pub fn raycast(&self, ray: &Ray, t0: f64, t1: f64, validation_rel: f64) -> Result<Vec<Hit>> {
        let threshold = validation_rel * self.net.diameter();
        let mut hits = Vec::new();
        for t in self.algebraic_roots(ray, t0, t1)? {
            let point = ray.at(t);
            let inversion = invert_point(&self.net, point);
            if inversion.residual <= threshold {
                hits.push(Hit { t, point, inversion });
            }
        }
        Ok(hits)
    }
}

/// Intersections of `ray` with the patch for `t` in `t_range`, sorted by `t`.
pub fn raycast(net: &ControlNet, ray: &Ray, t_range: [f64; 2], opts: RaycastOptions) -> Result<Vec<Hit>> {
    ImplicitPatch::new(net, opts.normalize)?.raycast(ray, t_range[0], t_range[1], opts.validation_rel)
}
