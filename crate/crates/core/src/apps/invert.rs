//! Closest-point parameter recovery (point inversion).

use serde::Serialize;

use crate::geometry::{ControlNet, DomainPoint, PatchKind, Point3};

/// Grid resolution of the seeding pass (points per axis).
pub const SEED_GRID: usize = 33;

/// Default on-patch threshold, in patch diameters.
pub const ON_PATCH_REL: f64 = 1e-6;

const SEEDS_REFINED: usize = 4;
const MAX_ITERS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inversion {
    #[serde(serialize_with = "ser_domain")]
    pub domain: DomainPoint,
    pub point: Point3,
    /// Distance from the query to `point`.
    pub residual: f64,
    pub on_patch: bool,
}

fn ser_domain<S: serde::Serializer>(d: &DomainPoint, s: S) -> Result<S::Ok, S::Error> {
    [d.u(), d.v()].serialize(s)
}

/// Nearest point of the parameter domain.
pub fn project_to_domain(kind: PatchKind, u: f64, v: f64) -> (f64, f64) {
    match kind {
        PatchKind::Quad => (u.clamp(0.0, 1.0), v.clamp(0.0, 1.0)),
        PatchKind::Triangle => {
            if u >= 0.0 && v >= 0.0 && u + v <= 1.0 {
                return (u, v);
            }
            let t = ((u - v + 1.0) * 0.5).clamp(0.0, 1.0);
            let candidates = [(0.0, v.clamp(0.0, 1.0)), (u.clamp(0.0, 1.0), 0.0), (t, 1.0 - t)];
            candidates
                .into_iter()
                .min_by(|a, b| {
                    let da = (a.0 - u).powi(2) + (a.1 - v).powi(2);
                    let db = (b.0 - u).powi(2) + (b.1 - v).powi(2);
                    da.total_cmp(&db)
                })
                .unwrap()
        }
    }
}

fn seeds(net: &ControlNet, q: Point3) -> Vec<(f64, f64, f64)> {
    let kind = net.kind();
    let n = SEED_GRID - 1;
    let mut all = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            if kind == PatchKind::Triangle && i + j > n {
                continue;
            }
            let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
            all.push((u, v, net.eval_extended(u, v).distance(q)));
        }
    }
    all.sort_by(|a, b| a.2.total_cmp(&b.2));
    all.truncate(SEEDS_REFINED);
    all
}

// Projected Gauss–Newton with step halving on |P(u,v) - q|².
fn refine(net: &ControlNet, q: Point3, mut u: f64, mut v: f64) -> (f64, f64, f64) {
    let kind = net.kind();
    let mut dist = net.eval_extended(u, v).distance(q);
    for _ in 0..MAX_ITERS {
        let r = net.eval_extended(u, v) - q;
        let (pu, pv) = net.jacobian(u, v);
        let (a, b, c) = (pu.dot(pu), pu.dot(pv), pv.dot(pv));
        let (gu, gv) = (pu.dot(r), pv.dot(r));
        let reg = 1e-14 * (a + c);
        let (a, c) = (a + reg, c + reg);
        let det = a * c - b * b;
        if det <= 0.0 || !det.is_finite() {
            break;
        }
        let du = -(c * gu - b * gv) / det;
        let dv = -(a * gv - b * gu) / det;
        let mut step = 1.0;
        let mut improved = false;
        while step > 1e-6 {
            let (nu, nv) = project_to_domain(kind, u + step * du, v + step * dv);
            let nd = net.eval_extended(nu, nv).distance(q);
            if nd < dist {
                let moved = (nu - u).abs() + (nv - v).abs();
                u = nu;
                v = nv;
                dist = nd;
                improved = moved > 1e-16;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (u, v, dist)
}

/// Closest patch point to `q`, tagged on-patch when the residual is at most
/// `ON_PATCH_REL` patch diameters.
pub fn invert_point(net: &ControlNet, q: Point3) -> Inversion {
    invert_point_with(net, q, ON_PATCH_REL * net.diameter())
}

pub fn invert_point_with(net: &ControlNet, q: Point3, threshold: f64) -> Inversion {
    let (u, v, residual) = seeds(net, q)
        .into_iter()
        .map(|(u, v, _)| refine(net, q, u, v))
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .expect("at least one seed");
    let domain = DomainPoint::new(net.kind(), u, v).expect("projected parameters are in the domain");
    Inversion { domain, point: net.eval_extended(u, v), residual, on_patch: residual <= threshold }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tests::octant_net;

    #[test]
    fn recovers_interior_parameter() {
        let net = octant_net();
        let q = net.eval(DomainPoint::triangle(0.33, 0.33).unwrap()).unwrap();
        let inv = invert_point(&net, q);
        assert!(inv.on_patch);
        assert!((inv.domain.u() - 0.33).abs() < 1e-8 && (inv.domain.v() - 0.33).abs() < 1e-8);
    }

    #[test]
    fn recovers_corners() {
        let net = octant_net();
        for d in DomainPoint::corners(PatchKind::Triangle) {
            let inv = invert_point(&net, net.eval(d).unwrap());
            assert!(inv.on_patch);
            assert!((inv.domain.u() - d.u()).abs() < 1e-8 && (inv.domain.v() - d.v()).abs() < 1e-8);
        }
    }

    #[test]
    fn far_point_residual_matches_dense_sampling() {
        let net = octant_net();
        let q = Point3 { x: 2.0, y: -1.0, z: 0.5 };
        let mut best = f64::INFINITY;
        let n = 400;
        for i in 0..=n {
            for j in 0..=(n - i) {
                best = best.min(net.eval_extended(i as f64 / n as f64, j as f64 / n as f64).distance(q));
            }
        }
        let inv = invert_point(&net, q);
        assert!(!inv.on_patch);
        assert!((inv.residual - best).abs() <= 0.01 * best, "{} vs {best}", inv.residual);
    }

    #[test]
    fn projection_lands_in_triangle() {
        for (u, v) in [(0.8, 0.7), (-0.2, 0.5), (0.4, -1.0), (-1.0, -1.0), (2.0, -0.5)] {
            let (pu, pv) = project_to_domain(PatchKind::Triangle, u, v);
            assert!(DomainPoint::triangle(pu, pv).is_ok(), "({pu}, {pv})");
        }
    }
}
