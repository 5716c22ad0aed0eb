//! Control nets, parametric evaluation and the residual systems `f_x, f_y, f_z`.
//!
//! Two patch kinds are supported:
//!
//! * the biquadratic Bézier triangle over barycentric `(u, v)` with
//!   `w = 1 - u - v`, six control points `b200 … b011`;
//! * the biquadratic tensor-product quadrilateral over the unit square,
//!   a 3×3 grid `p00 … p22`.
//!
//! Residual polynomials are stored expanded in the monomial basis
//! `u^a v^b`, which is what the Dixon construction consumes.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form::LinearForm;

/// A point (or vector) in world space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    /// Checked constructor; rejects NaN and infinities.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() && z.is_finite() {
            Ok(Point3 { x, y, z })
        } else {
            Err(Error::InvalidInput(format!("non-finite point ({x}, {y}, {z})")))
        }
    }

    pub fn from_array(a: [f64; 3]) -> Result<Self> {
        Point3::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn dot(self, o: Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Point3) -> Point3 {
        Point3 {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Point3) -> f64 {
        (self - o).norm()
    }

    pub fn component(self, k: usize) -> f64 {
        match k {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("component index {k} out of range"),
        }
    }
}

impl From<[f64; 3]> for Point3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Point3 { x, y, z }
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        p.to_array()
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Add for Point3 {
    type Output = Point3;
    #[inline]
    fn add(self, o: Point3) -> Point3 {
        Point3 { x: self.x + o.x, y: self.y + o.y, z: self.z + o.z }
    }
}

impl Sub for Point3 {
    type Output = Point3;
    #[inline]
    fn sub(self, o: Point3) -> Point3 {
        Point3 { x: self.x - o.x, y: self.y - o.y, z: self.z - o.z }
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    #[inline]
    fn mul(self, s: f64) -> Point3 {
        Point3 { x: self.x * s, y: self.y * s, z: self.z * s }
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3 { x: -self.x, y: -self.y, z: -self.z }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatchKind {
    Triangle,
    Quad,
}

impl PatchKind {
    /// Cayley matrix order: 5 for triangles, 8 for quads.
    pub fn cayley_order(self) -> usize {
        match self {
            PatchKind::Triangle => 5,
            PatchKind::Quad => 8,
        }
    }

    /// Upper bound on the total degree of the implicit equation.
    pub fn implicit_degree_bound(self) -> u32 {
        self.cayley_order() as u32
    }
}

impl fmt::Display for PatchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatchKind::Triangle => "triangle",
            PatchKind::Quad => "quad",
        })
    }
}

/// Parameter-domain point. For triangles `(u, v)` are barycentric and
/// `w = 1 - u - v` is derived on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainPoint {
    kind: PatchKind,
    u: f64,
    v: f64,
}

// Slack for u + v <= 1 so that projected boundary points (v = 1 - u) pass.
const BARYCENTRIC_SLACK: f64 = 4.0 * f64::EPSILON;

impl DomainPoint {
    pub fn new(kind: PatchKind, u: f64, v: f64) -> Result<Self> {
        let ok = u.is_finite()
            && v.is_finite()
            && match kind {
                PatchKind::Triangle => u >= 0.0 && v >= 0.0 && u + v <= 1.0 + BARYCENTRIC_SLACK,
                PatchKind::Quad => (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v),
            };
        if ok {
            Ok(DomainPoint { kind, u, v })
        } else {
            Err(Error::InvalidInput(format!("({u}, {v}) is outside the {kind} domain")))
        }
    }

    pub fn triangle(u: f64, v: f64) -> Result<Self> {
        DomainPoint::new(PatchKind::Triangle, u, v)
    }

    pub fn quad(u: f64, v: f64) -> Result<Self> {
        DomainPoint::new(PatchKind::Quad, u, v)
    }

    pub fn kind(&self) -> PatchKind {
        self.kind
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    /// Third barycentric coordinate; only meaningful for triangles.
    pub fn w(&self) -> f64 {
        1.0 - self.u - self.v
    }

    /// Corners of the domain, in a fixed order.
    pub fn corners(kind: PatchKind) -> Vec<DomainPoint> {
        let uv: &[(f64, f64)] = match kind {
            PatchKind::Triangle => &[(1.0, 0.0), (0.0, 1.0), (0.0, 0.0)],
            PatchKind::Quad => &[(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)],
        };
        uv.iter().map(|&(u, v)| DomainPoint { kind, u, v }).collect()
    }
}

/// Biquadratic Bézier triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleNet {
    // b200, b020, b002, b110, b101, b011
    pts: [Point3; 6],
}

pub const TRIANGLE_KEYS: [&str; 6] = ["b200", "b020", "b002", "b110", "b101", "b011"];
pub const QUAD_KEYS: [&str; 9] = ["p00", "p01", "p02", "p10", "p11", "p12", "p20", "p21", "p22"];

impl TriangleNet {
    pub fn new(
        b200: Point3,
        b020: Point3,
        b002: Point3,
        b110: Point3,
        b101: Point3,
        b011: Point3,
    ) -> Result<Self> {
        TriangleNet::from_points([b200, b020, b002, b110, b101, b011])
    }

    /// Points in `TRIANGLE_KEYS` order.
    pub fn from_points(pts: [Point3; 6]) -> Result<Self> {
        check_finite(&pts)?;
        Ok(TriangleNet { pts })
    }

    pub fn points(&self) -> &[Point3; 6] {
        &self.pts
    }

    pub fn b200(&self) -> Point3 {
        self.pts[0]
    }
    pub fn b020(&self) -> Point3 {
        self.pts[1]
    }
    pub fn b002(&self) -> Point3 {
        self.pts[2]
    }
    pub fn b110(&self) -> Point3 {
        self.pts[3]
    }
    pub fn b101(&self) -> Point3 {
        self.pts[4]
    }
    pub fn b011(&self) -> Point3 {
        self.pts[5]
    }

    /// `b200·u² + b020·v² + b002·w² + 2·b110·uv + 2·b101·uw + 2·b011·vw`
    /// without any domain check.
    pub fn eval_extended(&self, u: f64, v: f64) -> Point3 {
        let w = 1.0 - u - v;
        let [b200, b020, b002, b110, b101, b011] = self.pts;
        b200 * (u * u)
            + b020 * (v * v)
            + b002 * (w * w)
            + b110 * (2.0 * u * v)
            + b101 * (2.0 * u * w)
            + b011 * (2.0 * v * w)
    }

    /// Monomial coefficients `c[a][b]` of `u^a v^b`, from expanding `w = 1 - u - v`.
    pub fn monomial_coefficients(&self) -> [[Point3; 3]; 3] {
        let [b200, b020, b002, b110, b101, b011] = self.pts;
        let z = Point3::ORIGIN;
        let mut c = [[z; 3]; 3];
        c[0][0] = b002;
        c[1][0] = (b101 - b002) * 2.0;
        c[0][1] = (b011 - b002) * 2.0;
        c[2][0] = b200 + b002 - b101 * 2.0;
        c[0][2] = b020 + b002 - b011 * 2.0;
        c[1][1] = (b002 + b110 - b101 - b011) * 2.0;
        c
    }
}

/// Biquadratic tensor-product Bézier quadrilateral.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadNet {
    grid: [[Point3; 3]; 3],
}

/// Degree-2 Bernstein basis in the monomial basis: `B_i(t) = Σ_a BERNSTEIN2[i][a] t^a`.
const BERNSTEIN2: [[f64; 3]; 3] = [[1.0, -2.0, 1.0], [0.0, 2.0, -2.0], [0.0, 0.0, 1.0]];

#[inline]
fn bernstein2(t: f64) -> [f64; 3] {
    let s = 1.0 - t;
    [s * s, 2.0 * t * s, t * t]
}

impl QuadNet {
    /// `grid[i][j]` is `p_ij`; `i` runs along `u`, `j` along `v`.
    pub fn new(grid: [[Point3; 3]; 3]) -> Result<Self> {
        for row in &grid {
            check_finite(row)?;
        }
        Ok(QuadNet { grid })
    }

    pub fn grid(&self) -> &[[Point3; 3]; 3] {
        &self.grid
    }

    pub fn get(&self, i: usize, j: usize) -> Point3 {
        self.grid[i][j]
    }

    pub fn eval_extended(&self, u: f64, v: f64) -> Point3 {
        let bu = bernstein2(u);
        let bv = bernstein2(v);
        let mut acc = Point3::ORIGIN;
        for i in 0..3 {
            let mut row = Point3::ORIGIN;
            for j in 0..3 {
                row = row + self.grid[i][j] * bv[j];
            }
            acc = acc + row * bu[i];
        }
        acc
    }

    pub fn monomial_coefficients(&self) -> [[Point3; 3]; 3] {
        let mut c = [[Point3::ORIGIN; 3]; 3];
        for (a, ca) in c.iter_mut().enumerate() {
            for (b, cab) in ca.iter_mut().enumerate() {
                for i in 0..3 {
                    for j in 0..3 {
                        let w = BERNSTEIN2[i][a] * BERNSTEIN2[j][b];
                        if w != 0.0 {
                            *cab = *cab + self.grid[i][j] * w;
                        }
                    }
                }
            }
        }
        c
    }
}

fn check_finite(pts: &[Point3]) -> Result<()> {
    match pts.iter().find(|p| !p.is_finite()) {
        Some(p) => Err(Error::InvalidInput(format!("non-finite control point {p}"))),
        None => Ok(()),
    }
}

/// Either patch kind.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlNet {
    Triangle(TriangleNet),
    Quad(QuadNet),
}

impl ControlNet {
    pub fn kind(&self) -> PatchKind {
        match self {
            ControlNet::Triangle(_) => PatchKind::Triangle,
            ControlNet::Quad(_) => PatchKind::Quad,
        }
    }

    /// All control points; triangle order follows `TRIANGLE_KEYS`, quad is row-major.
    pub fn points(&self) -> Vec<Point3> {
        match self {
            ControlNet::Triangle(t) => t.pts.to_vec(),
            ControlNet::Quad(q) => q.grid.iter().flatten().copied().collect(),
        }
    }

    /// Rebuild a net of the same kind from points in `points()` order.
    pub fn with_points(&self, pts: &[Point3]) -> Result<ControlNet> {
        match self {
            ControlNet::Triangle(_) => {
                let arr: [Point3; 6] = pts
                    .try_into()
                    .map_err(|_| Error::InvalidInput("triangle needs 6 points".into()))?;
                Ok(ControlNet::Triangle(TriangleNet::from_points(arr)?))
            }
            ControlNet::Quad(_) => {
                if pts.len() != 9 {
                    return Err(Error::InvalidInput("quad needs 9 points".into()));
                }
                let mut grid = [[Point3::ORIGIN; 3]; 3];
                for (k, p) in pts.iter().enumerate() {
                    grid[k / 3][k % 3] = *p;
                }
                Ok(ControlNet::Quad(QuadNet::new(grid)?))
            }
        }
    }

    /// Apply `f` to every control point.
    pub fn map_points(&self, f: impl Fn(Point3) -> Point3) -> Result<ControlNet> {
        let pts: Vec<Point3> = self.points().into_iter().map(f).collect();
        self.with_points(&pts)
    }

    /// Surface point at an in-domain parameter.
    pub fn eval(&self, d: DomainPoint) -> Result<Point3> {
        if d.kind != self.kind() {
            return Err(Error::InvalidInput(format!(
                "{} domain point used with a {} net",
                d.kind,
                self.kind()
            )));
        }
        Ok(self.eval_extended(d.u, d.v))
    }

    /// The polynomial map at any `(u, v)`, including outside the patch domain.
    pub fn eval_extended(&self, u: f64, v: f64) -> Point3 {
        match self {
            ControlNet::Triangle(t) => t.eval_extended(u, v),
            ControlNet::Quad(q) => q.eval_extended(u, v),
        }
    }

    /// Partial derivatives `(∂P/∂u, ∂P/∂v)` of the polynomial map.
    pub fn jacobian(&self, u: f64, v: f64) -> (Point3, Point3) {
        let c = self.monomial_coefficients();
        let mut du = Point3::ORIGIN;
        let mut dv = Point3::ORIGIN;
        for a in 0..3 {
            for b in 0..3 {
                if a > 0 {
                    du = du + c[a][b] * (a as f64 * u.powi(a as i32 - 1) * v.powi(b as i32));
                }
                if b > 0 {
                    dv = dv + c[a][b] * (b as f64 * u.powi(a as i32) * v.powi(b as i32 - 1));
                }
            }
        }
        (du, dv)
    }

    pub fn monomial_coefficients(&self) -> [[Point3; 3]; 3] {
        match self {
            ControlNet::Triangle(t) => t.monomial_coefficients(),
            ControlNet::Quad(q) => q.monomial_coefficients(),
        }
    }

    /// Diagonal of the control points' bounding box; the patch length scale.
    pub fn diameter(&self) -> f64 {
        let pts = self.points();
        let mut lo = pts[0];
        let mut hi = pts[0];
        for p in &pts[1..] {
            lo = Point3 { x: lo.x.min(p.x), y: lo.y.min(p.y), z: lo.z.min(p.z) };
            hi = Point3 { x: hi.x.max(p.x), y: hi.y.max(p.y), z: hi.z.max(p.z) };
        }
        (hi - lo).norm()
    }

    /// The three anchors used by normalization: `b200, b020, b002` or `p00, p02, p20`.
    pub fn anchors(&self) -> [Point3; 3] {
        match self {
            ControlNet::Triangle(t) => [t.b200(), t.b020(), t.b002()],
            ControlNet::Quad(q) => [q.get(0, 0), q.get(0, 2), q.get(2, 0)],
        }
    }

    pub fn residual_system(&self) -> ResidualSystem {
        ResidualSystem::new(self)
    }

    pub fn from_json(text: &str) -> Result<ControlNet> {
        let doc: NetDocument = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("control net JSON: {e}")))?;
        doc.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&NetDocument::from(self)).expect("net serialization")
    }
}

/// Wire format: `{"kind": "triangle"|"quad", "points": {"b200": [x, y, z], ...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetDocument {
    pub kind: PatchKind,
    pub points: BTreeMap<String, [f64; 3]>,
}

impl TryFrom<NetDocument> for ControlNet {
    type Error = Error;

    fn try_from(doc: NetDocument) -> Result<ControlNet> {
        let keys: &[&str] = match doc.kind {
            PatchKind::Triangle => &TRIANGLE_KEYS,
            PatchKind::Quad => &QUAD_KEYS,
        };
        if let Some(k) = doc.points.keys().find(|k| !keys.contains(&k.as_str())) {
            return Err(Error::InvalidInput(format!("unknown {} point key {k:?}", doc.kind)));
        }
        let pts = keys
            .iter()
            .map(|k| {
                let a = doc
                    .points
                    .get(*k)
                    .ok_or_else(|| Error::InvalidInput(format!("missing point key {k:?}")))?;
                Point3::from_array(*a)
            })
            .collect::<Result<Vec<_>>>()?;
        match doc.kind {
            PatchKind::Triangle => Ok(ControlNet::Triangle(TriangleNet::from_points(
                pts.try_into().expect("six keys"),
            )?)),
            PatchKind::Quad => {
                let mut grid = [[Point3::ORIGIN; 3]; 3];
                for (k, p) in pts.into_iter().enumerate() {
                    grid[k / 3][k % 3] = p;
                }
                Ok(ControlNet::Quad(QuadNet::new(grid)?))
            }
        }
    }
}

impl From<&ControlNet> for NetDocument {
    fn from(net: &ControlNet) -> Self {
        let keys: &[&str] = match net.kind() {
            PatchKind::Triangle => &TRIANGLE_KEYS,
            PatchKind::Quad => &QUAD_KEYS,
        };
        let points = keys
            .iter()
            .zip(net.points())
            .map(|(k, p)| (k.to_string(), p.to_array()))
            .collect();
        NetDocument { kind: net.kind(), points }
    }
}

/// `f_k(u, v) = P_k(u, v) - q_k` for `k ∈ {x, y, z}`.
///
/// `coeffs[k][a][b]` is the coefficient of `u^a v^b` in `f_k`, as an affine
/// form in the query point. Only `coeffs[k][0][0]` has a nonzero linear part,
/// and it is exactly `-1` on axis `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSystem {
    kind: PatchKind,
    coeffs: [[[LinearForm; 3]; 3]; 3],
}

impl ResidualSystem {
    fn new(net: &ControlNet) -> Self {
        let c = net.monomial_coefficients();
        let mut coeffs = [[[LinearForm::ZERO; 3]; 3]; 3];
        for (k, ck) in coeffs.iter_mut().enumerate() {
            for a in 0..3 {
                for b in 0..3 {
                    ck[a][b] = LinearForm::constant(c[a][b].component(k));
                }
            }
            let mut lin = [0.0; 3];
            lin[k] = -1.0;
            ck[0][0] = LinearForm::new(lin[0], lin[1], lin[2], ck[0][0].d);
        }
        ResidualSystem { kind: net.kind(), coeffs }
    }

    pub fn kind(&self) -> PatchKind {
        self.kind
    }

    /// Coefficient of `u^a v^b` in the residual for axis `k`.
    pub fn coefficient(&self, k: usize, a: usize, b: usize) -> LinearForm {
        self.coeffs[k][a][b]
    }

    pub fn coefficients(&self) -> &[[[LinearForm; 3]; 3]; 3] {
        &self.coeffs
    }

    /// Largest absolute numeric coefficient (ignoring the unit query terms).
    pub fn coefficient_scale(&self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .flatten()
            .map(|f| f.d.abs())
            .fold(0.0, f64::max)
    }

    /// `(f_x, f_y, f_z)` at the query point `q` and parameters `(u, v)`.
    pub fn evaluate(&self, q: Point3, u: f64, v: f64) -> [f64; 3] {
        let up = [1.0, u, u * u];
        let vp = [1.0, v, v * v];
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            for a in 0..3 {
                for b in 0..3 {
                    *o += self.coeffs[k][a][b].eval(q) * up[a] * vp[b];
                }
            }
        }
        out
    }
}
