//! Similarity transform to a canonical anchor pose.
//!
//! With anchors `c1, c2, c3` (`b200, b020, b002` for a triangle, `p00, p02,
//! p20` for a quad) the forward map is
//!
//! ```text
//! f(p) = R2 · R1 · (p - c1) / s,      s = |c1 - c2|
//! ```
//!
//! where `R1` takes the anchor-plane normal `(c1 - c2) × (c3 - c2)` to `+z`
//! and `R2` rotates about `z` so that `f(c2)` lies on `+x`. Hence
//! `f(c1) = 0`, `f(c2) = (1, 0, 0)` and `f(c3)` lies in `z = 0`.
//!
//! The translation is applied before rotating and scaling. Subtracting `c1`
//! first cancels any large common offset exactly (Sterbenz), which is what
//! makes the normalized frame robust for far-from-origin patches.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ControlNet, PatchKind, Point3};

pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Anchors are collinear when `|n| ≤ COLLINEAR_REL · |c1 - c2| · |c3 - c2|`.
pub const COLLINEAR_REL: f64 = 1e-9;

// Largest pre-snap deviation of an anchor coordinate from its target.
const SNAP_TOL: f64 = 1e-9;

fn mat_vec(m: &Mat3, p: Point3) -> Point3 {
    Point3 {
        x: m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z,
        y: m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z,
        z: m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z,
    }
}

fn mat_t_vec(m: &Mat3, p: Point3) -> Point3 {
    Point3 {
        x: m[0][0] * p.x + m[1][0] * p.y + m[2][0] * p.z,
        y: m[0][1] * p.x + m[1][1] * p.y + m[2][1] * p.z,
        z: m[0][2] * p.x + m[1][2] * p.y + m[2][2] * p.z,
    }
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat_det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Half-turn about the x-axis.
const FLIP_X: Mat3 = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];

/// Minimal rotation taking unit vector `a` to `+z` (Rodrigues form).
/// Vectors in the lower hemisphere are first flipped about x so the
/// `1 / (1 + cos θ)` factor stays bounded.
fn rotation_to_z(a: Point3) -> Mat3 {
    if a.z < 0.0 {
        let flipped = mat_vec(&FLIP_X, a);
        return mat_mul(&rotation_to_z(flipped), &FLIP_X);
    }
    let z = Point3 { x: 0.0, y: 0.0, z: 1.0 };
    let v = a.cross(z);
    let c = a.dot(z);
    if v.x == 0.0 && v.y == 0.0 && v.z == 0.0 {
        return IDENTITY;
    }
    let k = [[0.0, -v.z, v.y], [v.z, 0.0, -v.x], [-v.y, v.x, 0.0]];
    let k2 = mat_mul(&k, &k);
    let f = 1.0 / (1.0 + c);
    let mut r = IDENTITY;
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] += k[i][j] + k2[i][j] * f;
        }
    }
    r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationTransform {
    #[serde(rename = "R1", with = "row_major")]
    pub r1: Mat3,
    #[serde(rename = "R2", with = "row_major")]
    pub r2: Mat3,
    pub c1: Point3,
    pub s: f64,
}

mod row_major {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &super::Mat3, ser: S) -> Result<S::Ok, S::Error> {
        let flat: Vec<f64> = m.iter().flatten().copied().collect();
        flat.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<super::Mat3, D::Error> {
        let flat: [f64; 9] = Deserialize::deserialize(de)?;
        Ok([[flat[0], flat[1], flat[2]], [flat[3], flat[4], flat[5]], [flat[6], flat[7], flat[8]]])
    }
}

impl NormalizationTransform {
    /// Build the transform from the three anchors.
    pub fn from_anchors(c1: Point3, c2: Point3, c3: Point3) -> Result<Self> {
        let e12 = c1 - c2;
        let e32 = c3 - c2;
        let s = e12.norm();
        if s == 0.0 {
            return Err(Error::DegenerateAnchors("first two anchors coincide".into()));
        }
        let n = e12.cross(e32);
        let nn = n.norm();
        if nn <= COLLINEAR_REL * s * e32.norm() {
            return Err(Error::DegenerateAnchors("anchors are collinear".into()));
        }
        let r1 = rotation_to_z(n * (1.0 / nn));
        let d = mat_vec(&r1, (c2 - c1) * (1.0 / s));
        let h = d.x.hypot(d.y);
        let (cos, sin) = (d.x / h, d.y / h);
        let r2 = [[cos, sin, 0.0], [-sin, cos, 0.0], [0.0, 0.0, 1.0]];
        Ok(NormalizationTransform { r1, r2, c1, s })
    }

    pub fn identity() -> Self {
        NormalizationTransform { r1: IDENTITY, r2: IDENTITY, c1: Point3::ORIGIN, s: 1.0 }
    }

    /// `f(q) = R2 · R1 · (q - c1) / s`.
    pub fn to_normalized(&self, q: Point3) -> Point3 {
        mat_vec(&self.r2, mat_vec(&self.r1, (q - self.c1) * (1.0 / self.s)))
    }

    /// Inverse map `c1 + s · R1ᵀ · R2ᵀ · q`.
    pub fn from_normalized(&self, q: Point3) -> Point3 {
        self.c1 + mat_t_vec(&self.r1, mat_t_vec(&self.r2, q)) * self.s
    }

    /// Image of a displacement (no translation): `R2 · R1 · v / s`.
    pub fn vector_to_normalized(&self, v: Point3) -> Point3 {
        mat_vec(&self.r2, mat_vec(&self.r1, v * (1.0 / self.s)))
    }

    pub fn vector_from_normalized(&self, v: Point3) -> Point3 {
        mat_t_vec(&self.r1, mat_t_vec(&self.r2, v)) * self.s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("transform serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("transform JSON: {e}")))
    }
}

fn anchor_indices(kind: PatchKind) -> [usize; 3] {
    // positions in ControlNet::points()
    match kind {
        PatchKind::Triangle => [0, 1, 2],
        PatchKind::Quad => [0, 2, 6],
    }
}

/// Map a net into the canonical pose. Anchor coordinates are snapped to
/// their exact targets: `c1 → (0,0,0)`, `c2 → (1,0,0)`, `c3.z → 0`.
pub fn normalize_net(net: &ControlNet) -> Result<(ControlNet, NormalizationTransform)> {
    let [c1, c2, c3] = net.anchors();
    let t = NormalizationTransform::from_anchors(c1, c2, c3)?;
    let mut pts: Vec<Point3> = net.points().into_iter().map(|p| t.to_normalized(p)).collect();
    let [i1, i2, i3] = anchor_indices(net.kind());

    let targets = [(i1, Some(Point3::ORIGIN)), (i2, Some(Point3 { x: 1.0, y: 0.0, z: 0.0 })), (i3, None)];
    for (idx, target) in targets {
        let p = pts[idx];
        let off = match target {
            Some(t) => (p - t).norm(),
            None => p.z.abs(),
        };
        if off > SNAP_TOL {
            return Err(Error::Internal(format!("normalized anchor {idx} is {off} from its target")));
        }
        pts[idx] = match target {
            Some(t) => t,
            None => Point3 { z: 0.0, ..p },
        };
    }
    Ok((net.with_points(&pts)?, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tests::octant_net;
    use crate::geometry::TriangleNet;
    use proptest::prelude::*;

    fn pt(x: f64, y: f64, z: f64) -> Point3 {
        Point3 { x, y, z }
    }

    #[test]
    fn octant_anchors_land_on_targets() {
        let (n, t) = normalize_net(&octant_net()).unwrap();
        let a = n.anchors();
        assert_eq!(a[0], Point3::ORIGIN);
        assert_eq!(a[1], pt(1.0, 0.0, 0.0));
        assert_eq!(a[2].z, 0.0);
        assert!((t.s - 2f64.sqrt()).abs() < 1e-15);
        // Unsnapped images agree with the snapped anchors to 1e-12.
        let [c1, c2, c3] = octant_net().anchors();
        assert!(t.to_normalized(c1).norm() <= 1e-12);
        assert!(t.to_normalized(c2).distance(pt(1.0, 0.0, 0.0)) <= 1e-12);
        assert!(t.to_normalized(c3).z.abs() <= 1e-12);
    }

    #[test]
    fn canonical_net_is_fixed() {
        // Normal (c1-c2)×(c3-c2) points to +z when c3 is below the x-axis.
        let pts = [
            pt(0.0, 0.0, 0.0),
            pt(1.0, 0.0, 0.0),
            pt(0.3, -0.8, 0.0),
            pt(0.5, 0.1, 0.4),
            pt(0.2, -0.3, -0.2),
            pt(0.7, -0.5, 0.3),
        ];
        let net = ControlNet::Triangle(TriangleNet::from_points(pts).unwrap());
        let (n, t) = normalize_net(&net).unwrap();
        assert_eq!(t, NormalizationTransform::identity());
        assert_eq!(n, net);
    }

    #[test]
    fn collinear_anchors_rejected() {
        let pts = [pt(0.0, 0.0, 0.0), pt(1.0, 0.0, 0.0), pt(2.0, 0.0, 0.0), pt(0.0, 1.0, 0.0), pt(0.0, 0.0, 1.0), pt(1.0, 1.0, 1.0)];
        let net = ControlNet::Triangle(TriangleNet::from_points(pts).unwrap());
        assert!(matches!(normalize_net(&net), Err(Error::DegenerateAnchors(_))));
        let mut same = pts;
        same[1] = same[0];
        let net = ControlNet::Triangle(TriangleNet::from_points(same).unwrap());
        assert!(matches!(normalize_net(&net), Err(Error::DegenerateAnchors(_))));
    }

    #[test]
    fn antiparallel_normal_uses_half_turn() {
        let t = NormalizationTransform::from_anchors(pt(0.0, 0.0, 0.0), pt(1.0, 0.0, 0.0), pt(0.3, 0.8, 0.0)).unwrap();
        assert_eq!(t.r1, FLIP_X);
        assert_eq!(t.r2, IDENTITY);
    }

    #[test]
    fn json_layout() {
        let (_, t) = normalize_net(&octant_net()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["R1"].as_array().unwrap().len(), 9);
        assert_eq!(v["R2"].as_array().unwrap().len(), 9);
        assert_eq!(v["c1"], serde_json::json!([1.0, 0.0, 0.0]));
        assert_eq!(NormalizationTransform::from_json(&t.to_json()).unwrap(), t);
    }

    fn coord() -> impl Strategy<Value = f64> {
        -10.0..10.0f64
    }

    fn point() -> impl Strategy<Value = Point3> {
        (coord(), coord(), coord()).prop_map(|(x, y, z)| pt(x, y, z))
    }

    proptest! {
        #[test]
        fn rotations_are_proper_and_map_is_similarity(
            c1 in point(), c2 in point(), c3 in point(), p in point(), q in point()
        ) {
            let t = match NormalizationTransform::from_anchors(c1, c2, c3) {
                Ok(t) => t,
                Err(_) => return Ok(()),
            };
            for r in [&t.r1, &t.r2] {
                prop_assert!((mat_det(r) - 1.0).abs() <= 1e-12);
                let rtr = mat_mul(&[[r[0][0], r[1][0], r[2][0]], [r[0][1], r[1][1], r[2][1]], [r[0][2], r[1][2], r[2][2]]], r);
                for i in 0..3 {
                    for j in 0..3 {
                        let want = if i == j { 1.0 } else { 0.0 };
                        prop_assert!((rtr[i][j] - want).abs() <= 1e-12);
                    }
                }
            }
            let d = t.to_normalized(p).distance(t.to_normalized(q));
            let want = p.distance(q) / t.s;
            prop_assert!((d - want).abs() <= 1e-12 * want.max(1.0));
            let back = t.from_normalized(t.to_normalized(p));
            prop_assert!(back.distance(p) <= 1e-12 * (1.0 + p.norm()));
            prop_assert!(t.from_normalized(Point3::ORIGIN).distance(c1) <= 1e-12 * (1.0 + c1.norm()));
            prop_assert!(t.from_normalized(pt(1.0, 0.0, 0.0)).distance(c2) <= 1e-12 * t.s.max(1.0) * (1.0 + c2.norm()));
        }
    }
}
