use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::geometry::Point3;

/// `a·x + b·y + c·z + d`, an affine form in the query point.
///
/// Every Cayley matrix entry is one of these; residual polynomial
/// coefficients use them too, with `(a, b, c)` nonzero only on the constant
/// monomial.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct LinearForm {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl LinearForm {
    pub const ZERO: LinearForm = LinearForm { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        LinearForm { a, b, c, d }
    }

    pub const fn constant(d: f64) -> Self {
        LinearForm { a: 0.0, b: 0.0, c: 0.0, d }
    }

    #[inline]
    pub fn eval(&self, q: Point3) -> f64 {
        self.a * q.x + self.b * q.y + self.c * q.z + self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0.0 && self.b == 0.0 && self.c == 0.0 && self.d == 0.0
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

impl From<[f64; 4]> for LinearForm {
    fn from([a, b, c, d]: [f64; 4]) -> Self {
        LinearForm { a, b, c, d }
    }
}

impl From<LinearForm> for [f64; 4] {
    fn from(f: LinearForm) -> Self {
        f.to_array()
    }
}

impl Add for LinearForm {
    type Output = LinearForm;
    fn add(self, o: LinearForm) -> LinearForm {
        LinearForm::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for LinearForm {
    type Output = LinearForm;
    fn sub(self, o: LinearForm) -> LinearForm {
        LinearForm::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Neg for LinearForm {
    type Output = LinearForm;
    fn neg(self) -> LinearForm {
        LinearForm::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl Mul<f64> for LinearForm {
    type Output = LinearForm;
    fn mul(self, s: f64) -> LinearForm {
        LinearForm::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }
}
