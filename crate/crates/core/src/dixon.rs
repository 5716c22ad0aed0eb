//! Dixon δ polynomial and the Cayley matrix.
//!
//! With auxiliary variables `α, β`, the determinant
//!
//! ```text
//!     | f_x(u,v)  f_y(u,v)  f_z(u,v) |
//! det | f_x(u,β)  f_y(u,β)  f_z(u,β) |
//!     | f_x(α,β)  f_y(α,β)  f_z(α,β) |
//! ```
//!
//! vanishes at `α = u` and at `β = v`, so it is divisible by
//! `(u - α)(v - β)`. The quotient δ is bilinear in the row monomials
//! (in `α, β`) and the column monomials (in `u, v`), and its coefficient
//! grid is the Cayley matrix. Each coefficient is an affine form in the
//! query point.
//!
//! The construction runs over a generic coefficient field. In `f64`, every
//! coefficient carries a magnitude bound (the permanent-style sum of the
//! absolute values of the products it came from); coefficients below
//! `64·ε` of their bound are rounding noise and are cleared, which makes
//! algebraically-zero cells exactly zero.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form::LinearForm;
use crate::geometry::{ControlNet, PatchKind, Point3, ResidualSystem};
use crate::numeric::DenseMatrix;
use crate::poly::{Coeff, SparsePoly};

const U: usize = 0;
const V: usize = 1;
const ALPHA: usize = 2;
const BETA: usize = 3;
const X: usize = 4;

type Poly7<C> = SparsePoly<C, 7>;

/// Relative size below which a float coefficient is treated as cancellation noise.
const NOISE_REL: f64 = 64.0 * f64::EPSILON;

/// Largest admissible division remainder, relative to its magnitude bound.
pub const EXACT_DIVISION_TOL: f64 = 1e-12;

/// Row basis `(α^i, β^j)` for triangles: `1, α, β, β², αβ`.
pub const TRIANGLE_ROWS: [[u8; 2]; 5] = [[0, 0], [1, 0], [0, 1], [0, 2], [1, 1]];
/// Column basis `(u^i, v^j)` for triangles: `1, u, v, u², uv`.
pub const TRIANGLE_COLS: [[u8; 2]; 5] = [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1]];
/// Quad rows: `1, β, β², β³, α, αβ, αβ², αβ³`.
pub const QUAD_ROWS: [[u8; 2]; 8] =
    [[0, 0], [0, 1], [0, 2], [0, 3], [1, 0], [1, 1], [1, 2], [1, 3]];
/// Quad columns: `1, u, u², u³, v, uv, u²v, u³v`.
pub const QUAD_COLS: [[u8; 2]; 8] =
    [[0, 0], [1, 0], [2, 0], [3, 0], [0, 1], [1, 1], [2, 1], [3, 1]];

pub fn row_basis(kind: PatchKind) -> &'static [[u8; 2]] {
    match kind {
        PatchKind::Triangle => &TRIANGLE_ROWS,
        PatchKind::Quad => &QUAD_ROWS,
    }
}

pub fn col_basis(kind: PatchKind) -> &'static [[u8; 2]] {
    match kind {
        PatchKind::Triangle => &TRIANGLE_COLS,
        PatchKind::Quad => &QUAD_COLS,
    }
}

fn monomial_name(exp: [u8; 2], names: [&str; 2]) -> String {
    let parts: Vec<String> = exp
        .iter()
        .zip(names)
        .filter(|(&k, _)| k > 0)
        .map(|(&k, n)| if k == 1 { n.to_string() } else { format!("{n}^{k}") })
        .collect();
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

/// δ as a map from `(u, v, α, β)` exponents to coefficients `[A, B, C, D]`.
type DixonTerms<C> = BTreeMap<[u8; 4], [C; 4]>;

fn form_to_poly<C: Coeff>(f: &LinearForm, a_var: usize, a_exp: usize, b_var: usize, b_exp: usize) -> Poly7<C> {
    let mut base = [0u8; 7];
    base[a_var] = a_exp as u8;
    base[b_var] += b_exp as u8;
    let mut p = Poly7::zero();
    p.add_term(base, C::from_f64(f.d));
    for (axis, v) in [f.a, f.b, f.c].into_iter().enumerate() {
        let mut e = base;
        e[X + axis] = 1;
        p.add_term(e, C::from_f64(v));
    }
    p
}

fn dixon_terms<C: Coeff>(rs: &ResidualSystem) -> Result<DixonTerms<C>> {
    // rows[r][k]: residual k with (u, v) replaced per row r
    let subs = [(U, V), (U, BETA), (ALPHA, BETA)];
    let rows: Vec<Vec<Poly7<C>>> = subs
        .iter()
        .map(|&(first, second)| {
            (0..3)
                .map(|k| {
                    let mut p = Poly7::zero();
                    for a in 0..3 {
                        for b in 0..3 {
                            let f = rs.coefficient(k, a, b);
                            if !f.is_zero() {
                                p = &p + &form_to_poly(&f, first, a, second, b);
                            }
                        }
                    }
                    p
                })
                .collect()
        })
        .collect();
    let mags: Vec<Vec<SparsePoly<f64, 7>>> =
        rows.iter().map(|r| r.iter().map(|p| p.magnitudes()).collect()).collect();

    // Cofactor expansion along the first row, with the matching magnitude bound.
    let minor = |i: usize, j: usize| &(&rows[1][i] * &rows[2][j]) - &(&rows[1][j] * &rows[2][i]);
    let minor_bound = |i: usize, j: usize| &(&mags[1][i] * &mags[2][j]) + &(&mags[1][j] * &mags[2][i]);
    let mut det = &rows[0][0] * &minor(1, 2);
    det = &det - &(&rows[0][1] * &minor(0, 2));
    det = &det + &(&rows[0][2] * &minor(0, 1));
    let mut bound = &mags[0][0] * &minor_bound(1, 2);
    bound = &bound + &(&mags[0][1] * &minor_bound(0, 2));
    bound = &bound + &(&mags[0][2] * &minor_bound(0, 1));
    det.drop_negligible(&bound, NOISE_REL);

    let mut quotient = det;
    for (main, aux, label) in [(U, ALPHA, "u - alpha"), (V, BETA, "v - beta")] {
        let (q, r) = quotient.divide_by_difference(main, aux);
        let (qb, rb) = bound.divide_by_difference(main, aux);
        if let Some((e, c)) = r
            .terms()
            .find(|(e, c)| !c.negligible(rb.coefficient(e), EXACT_DIVISION_TOL))
        {
            return Err(Error::Internal(format!(
                "nonzero remainder {c:?} at {e:?} dividing by ({label})"
            )));
        }
        quotient = q;
        quotient.drop_negligible(&qb, NOISE_REL);
        bound = qb;
    }

    let mut terms: DixonTerms<C> = BTreeMap::new();
    for (e, c) in quotient.terms() {
        let key = [e[U], e[V], e[ALPHA], e[BETA]];
        let slot = match (e[X], e[X + 1], e[X + 2]) {
            (0, 0, 0) => 3,
            (1, 0, 0) => 0,
            (0, 1, 0) => 1,
            (0, 0, 1) => 2,
            other => {
                return Err(Error::Internal(format!(
                    "query-point degree {other:?} survived in the Dixon polynomial"
                )))
            }
        };
        terms
            .entry(key)
            .or_insert_with(|| [C::zero(), C::zero(), C::zero(), C::zero()])[slot] = c.clone();
    }
    Ok(terms)
}

/// δ with `LinearForm` coefficients, keyed by `(u, v, α, β)` exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct DixonPoly {
    kind: PatchKind,
    terms: BTreeMap<[u8; 4], LinearForm>,
}

impl DixonPoly {
    pub fn kind(&self) -> PatchKind {
        self.kind
    }

    pub fn terms(&self) -> &BTreeMap<[u8; 4], LinearForm> {
        &self.terms
    }

    /// Number of distinct (row monomial, column monomial) pairs present.
    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    pub fn eval(&self, u: f64, v: f64, alpha: f64, beta: f64, q: Point3) -> f64 {
        self.terms
            .iter()
            .map(|(e, f)| {
                f.eval(q)
                    * u.powi(e[0] as i32)
                    * v.powi(e[1] as i32)
                    * alpha.powi(e[2] as i32)
                    * beta.powi(e[3] as i32)
            })
            .sum()
    }
}

/// Build δ = det(...) / ((u - α)(v - β)) from a residual system.
pub fn build_dixon_delta(rs: &ResidualSystem) -> Result<DixonPoly> {
    let terms = dixon_terms::<f64>(rs)?
        .into_iter()
        .map(|(e, [a, b, c, d])| (e, LinearForm::new(a, b, c, d)))
        .filter(|(_, f)| !f.is_zero())
        .collect();
    Ok(DixonPoly { kind: rs.kind(), terms })
}

fn cell_of(kind: PatchKind, e: &[u8; 4]) -> Result<(usize, usize)> {
    let row = row_basis(kind).iter().position(|r| *r == [e[2], e[3]]);
    let col = col_basis(kind).iter().position(|c| *c == [e[0], e[1]]);
    match (row, col) {
        (Some(r), Some(c)) => Ok((r, c)),
        _ => Err(Error::Internal(format!(
            "Dixon monomial u^{} v^{} a^{} b^{} lies outside the {kind} Cayley basis",
            e[0], e[1], e[2], e[3]
        ))),
    }
}

/// The Cayley matrix: `entries[r·n + c]` multiplies row monomial `r`
/// (in `α, β`) and column monomial `c` (in `u, v`).
#[derive(Debug, Clone, PartialEq)]
pub struct CayleyMatrix {
    kind: PatchKind,
    entries: Vec<LinearForm>,
}

impl CayleyMatrix {
    pub fn from_dixon(delta: &DixonPoly) -> Result<Self> {
        let n = delta.kind.cayley_order();
        let mut entries = vec![LinearForm::ZERO; n * n];
        for (e, f) in &delta.terms {
            let (r, c) = cell_of(delta.kind, e)?;
            entries[r * n + c] = *f;
        }
        Ok(CayleyMatrix { kind: delta.kind, entries })
    }

    pub fn kind(&self) -> PatchKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.kind.cayley_order()
    }

    pub fn entry(&self, row: usize, col: usize) -> LinearForm {
        self.entries[row * self.n() + col]
    }

    pub fn entries(&self) -> &[LinearForm] {
        &self.entries
    }

    pub fn row_basis(&self) -> &'static [[u8; 2]] {
        row_basis(self.kind)
    }

    pub fn col_basis(&self) -> &'static [[u8; 2]] {
        col_basis(self.kind)
    }

    /// Cells whose entry is exactly the zero form.
    pub fn zero_cells(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n * n)
            .filter(|&i| self.entries[i].is_zero())
            .map(|i| (i / n, i % n))
            .collect()
    }

    pub fn is_identically_zero(&self) -> bool {
        self.entries.iter().all(LinearForm::is_zero)
    }

    /// Largest absolute coefficient over all entries.
    pub fn coefficient_scale(&self) -> f64 {
        self.entries.iter().map(LinearForm::max_abs).fold(0.0, f64::max)
    }

    /// Substitute the query point into every entry.
    pub fn matrix_at(&self, q: Point3) -> DenseMatrix {
        DenseMatrix::from_vec(self.n(), self.entries.iter().map(|f| f.eval(q)).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&CayleyDocument::from(self)).expect("cayley serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CayleyDocument = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("Cayley JSON: {e}")))?;
        let kind = match doc.n {
            5 => PatchKind::Triangle,
            8 => PatchKind::Quad,
            n => return Err(Error::InvalidInput(format!("unsupported Cayley order {n}"))),
        };
        let cm = CayleyDocument::from(&CayleyMatrix { kind, entries: Vec::new() });
        if doc.rows != cm.rows || doc.cols != cm.cols {
            return Err(Error::InvalidInput("Cayley basis does not match the frozen ordering".into()));
        }
        if doc.entries.len() != doc.n || doc.entries.iter().any(|r| r.len() != doc.n) {
            return Err(Error::InvalidInput("Cayley entries are not n×n".into()));
        }
        let entries: Vec<LinearForm> = doc.entries.into_iter().flatten().collect();
        if entries.iter().any(|f| !f.to_array().iter().all(|x| x.is_finite())) {
            return Err(Error::InvalidInput("non-finite Cayley entry".into()));
        }
        Ok(CayleyMatrix { kind, entries })
    }
}

/// Wire format: `{"n", "rows", "cols", "entries": n×n of [A, B, C, D]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CayleyDocument {
    pub n: usize,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub entries: Vec<Vec<LinearForm>>,
}

impl From<&CayleyMatrix> for CayleyDocument {
    fn from(cm: &CayleyMatrix) -> Self {
        let n = cm.n();
        CayleyDocument {
            n,
            rows: cm.row_basis().iter().map(|e| monomial_name(*e, ["alpha", "beta"])).collect(),
            cols: cm.col_basis().iter().map(|e| monomial_name(*e, ["u", "v"])).collect(),
            entries: cm.entries.chunks(n.max(1)).map(|r| r.to_vec()).collect(),
        }
    }
}

/// Residual system → δ → Cayley matrix.
pub fn build_cayley_matrix(net: &ControlNet) -> Result<CayleyMatrix> {
    let delta = build_dixon_delta(&net.residual_system())?;
    CayleyMatrix::from_dixon(&delta)
}

/// Same construction over arbitrary-precision rationals. Every `f64`
/// control coordinate converts exactly, so this is the exact Cayley matrix
/// of the given net.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCayleyMatrix {
    kind: PatchKind,
    entries: Vec<[BigRational; 4]>,
}

impl ExactCayleyMatrix {
    pub fn build(net: &ControlNet) -> Result<Self> {
        let kind = net.kind();
        let n = kind.cayley_order();
        let zero = || [BigRational::zero(), BigRational::zero(), BigRational::zero(), BigRational::zero()];
        let mut entries: Vec<[BigRational; 4]> = (0..n * n).map(|_| zero()).collect();
        for (e, f) in dixon_terms::<BigRational>(&net.residual_system())? {
            let (r, c) = cell_of(kind, &e)?;
            entries[r * n + c] = f;
        }
        Ok(ExactCayleyMatrix { kind, entries })
    }

    pub fn n(&self) -> usize {
        self.kind.cayley_order()
    }

    pub fn entry(&self, row: usize, col: usize) -> &[BigRational; 4] {
        &self.entries[row * self.n() + col]
    }

    pub fn zero_cells(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n * n)
            .filter(|&i| self.entries[i].iter().all(Zero::is_zero))
            .map(|i| (i / n, i % n))
            .collect()
    }

    /// Round every coefficient to `f64`.
    pub fn to_f64(&self) -> CayleyMatrix {
        CayleyMatrix {
            kind: self.kind,
            entries: self
                .entries
                .iter()
                .map(|[a, b, c, d]| LinearForm::new(a.to_f64(), b.to_f64(), c.to_f64(), d.to_f64()))
                .collect(),
        }
    }
}
