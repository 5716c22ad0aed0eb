//! Explicit implicit equation: the Cayley determinant expanded into a sparse
//! trivariate polynomial in `(x, y, z)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dixon::CayleyMatrix;
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::poly::SparsePoly;

/// Coefficients with `|c| ≤ CLEANUP_REL · max|c|` are dropped after expansion.
pub const CLEANUP_REL: f64 = 1e-12;

type Poly3 = SparsePoly<f64, 3>;

/// x-exponent groups (descending), each holding y-exponent groups
/// (descending), each holding `(k, c)` (descending k).
type Layout = Vec<(u8, Vec<(u8, Vec<(u8, f64)>)>)>;

/// `Σ c_ijk x^i y^j z^k` in canonical sparse form (no stored zeros).
#[derive(Debug, Clone, PartialEq)]
pub struct TrivariatePoly {
    max_degree: u32,
    terms: BTreeMap<[u8; 3], f64>,
    layout: Layout,
}

impl TrivariatePoly {
    /// Build from terms; zero coefficients are discarded and duplicate
    /// exponents are summed.
    pub fn from_terms(max_degree: u32, terms: impl IntoIterator<Item = ([u8; 3], f64)>) -> Result<Self> {
        let mut map: BTreeMap<[u8; 3], f64> = BTreeMap::new();
        for (e, c) in terms {
            if !c.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite coefficient at {e:?}")));
            }
            let deg: u32 = e.iter().map(|&k| k as u32).sum();
            if deg > max_degree {
                return Err(Error::InvalidInput(format!(
                    "term {e:?} exceeds declared max degree {max_degree}"
                )));
            }
            *map.entry(e).or_insert(0.0) += c;
        }
        map.retain(|_, c| *c != 0.0);
        Ok(TrivariatePoly::assemble(max_degree, map))
    }

    pub fn zero(max_degree: u32) -> Self {
        TrivariatePoly::assemble(max_degree, BTreeMap::new())
    }

    /// Declared bound on the total degree.
    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Actual total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().map(|&k| k as u32).sum()).max()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, e: [u8; 3]) -> f64 {
        self.terms.get(&e).copied().unwrap_or(0.0)
    }

    /// Terms in lexicographic `(i, j, k)` order.
    pub fn terms(&self) -> impl Iterator<Item = ([u8; 3], f64)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, *c))
    }

    /// Terms in graded-lex order: ascending total degree, then ascending `(i, j, k)`.
    pub fn graded_terms(&self) -> Vec<([u8; 3], f64)> {
        let mut v: Vec<_> = self.terms().collect();
        v.sort_by_key(|(e, _)| (e[0] as u32 + e[1] as u32 + e[2] as u32, *e));
        v
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn assemble(max_degree: u32, terms: BTreeMap<[u8; 3], f64>) -> Self {
        let layout = Self::build_layout(&terms);
        TrivariatePoly { max_degree, terms, layout }
    }

    fn build_layout(terms: &BTreeMap<[u8; 3], f64>) -> Layout {
        let mut out: Layout = Vec::new();
        for (e, c) in terms.iter().rev() {
            let [i, j, k] = *e;
            if out.last().map(|g| g.0) != Some(i) {
                out.push((i, Vec::new()));
            }
            let ys = &mut out.last_mut().unwrap().1;
            if ys.last().map(|g| g.0) != Some(j) {
                ys.push((j, Vec::new()));
            }
            ys.last_mut().unwrap().1.push((k, *c));
        }
        out
    }

    /// Nested Horner layout shared by [`TrivariatePoly::evaluate`] and the
    /// straight-line program emitter.
    pub(crate) fn horner_layout(&self) -> &Layout {
        &self.layout
    }

    /// Evaluate by nested Horner (x outermost, then y, then z). Exponent
    /// gaps are bridged by repeated multiplication; absent coefficients are
    /// never added. The operation sequence is exactly what
    /// [`crate::slp::emit_slp`] emits.
    pub fn evaluate(&self, q: Point3) -> f64 {
        fn horner<T>(levels: &[(u8, T)], var: f64, mut inner: impl FnMut(&T) -> f64) -> f64 {
            let (mut prev, first) = (levels[0].0, &levels[0].1);
            let mut acc = inner(first);
            for (e, child) in &levels[1..] {
                for _ in *e..prev {
                    acc *= var;
                }
                acc += inner(child);
                prev = *e;
            }
            for _ in 0..prev {
                acc *= var;
            }
            acc
        }
        if self.terms.is_empty() {
            return 0.0;
        }
        horner(&self.layout, q.x, |ys| horner(ys, q.y, |zs| horner(zs, q.z, |c| *c)))
    }

    /// Restriction to the line `origin + t·dir`, as ascending coefficients in `t`.
    pub fn along_line(&self, origin: Point3, dir: Point3) -> Vec<f64> {
        let deg = self.degree().unwrap_or(0) as usize;
        let powers = |o: f64, d: f64| {
            let mut p: Vec<Vec<f64>> = vec![vec![1.0]];
            for k in 1..=deg {
                let prev = &p[k - 1];
                let mut next = vec![0.0; k + 1];
                for (m, c) in prev.iter().enumerate() {
                    next[m] += c * o;
                    next[m + 1] += c * d;
                }
                p.push(next);
            }
            p
        };
        let (px, py, pz) = (powers(origin.x, dir.x), powers(origin.y, dir.y), powers(origin.z, dir.z));
        let mut out = vec![0.0; deg + 1];
        for (e, c) in &self.terms {
            let a = &px[e[0] as usize];
            let b = &py[e[1] as usize];
            let z = &pz[e[2] as usize];
            let mut ab = vec![0.0; a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    ab[i + j] += x * y;
                }
            }
            for (i, x) in ab.iter().enumerate() {
                for (j, y) in z.iter().enumerate() {
                    out[i + j] += c * x * y;
                }
            }
        }
        while out.len() > 1 && *out.last().unwrap() == 0.0 {
            out.pop();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PolyDocument::from(self)).expect("poly serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PolyDocument = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("polynomial JSON: {e}")))?;
        let terms = doc
            .terms
            .into_iter()
            .map(|(i, j, k, c)| {
                let e = [i, j, k].map(|x| u8::try_from(x).unwrap_or(u8::MAX));
                ([e[0], e[1], e[2]], c)
            });
        TrivariatePoly::from_terms(doc.max_degree, terms)
    }
}

/// Wire format: `{"max_degree": d, "terms": [[i, j, k, c], ...]}` in graded-lex order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyDocument {
    pub max_degree: u32,
    pub terms: Vec<(u32, u32, u32, f64)>,
}

impl From<&TrivariatePoly> for PolyDocument {
    fn from(p: &TrivariatePoly) -> Self {
        PolyDocument {
            max_degree: p.max_degree,
            terms: p
                .graded_terms()
                .into_iter()
                .map(|(e, c)| (e[0] as u32, e[1] as u32, e[2] as u32, c))
                .collect(),
        }
    }
}

/// Evaluate `p` at `q`; see [`TrivariatePoly::evaluate`].
pub fn evaluate_poly(p: &TrivariatePoly, q: Point3) -> f64 {
    p.evaluate(q)
}

/// Expand `det(cm)` over polynomial entries.
///
/// Laplace expansion with minors memoized by column subset: the minor on the
/// bottom `k` rows and column set `S` is computed once from the minors on
/// `S` minus one column. No division is needed.
pub fn expand_resultant(cm: &CayleyMatrix) -> Result<TrivariatePoly> {
    let n = cm.n();
    let lifted: Vec<Poly3> = cm
        .entries()
        .iter()
        .map(|f| {
            Poly3::from_terms([
                ([0, 0, 0], f.d),
                ([1, 0, 0], f.a),
                ([0, 1, 0], f.b),
                ([0, 0, 1], f.c),
            ])
        })
        .collect();

    let mut minors: Vec<Option<Poly3>> = vec![None; 1 << n];
    minors[0] = Some(Poly3::constant(1.0));
    for size in 1..=n {
        let row = n - size;
        for mask in 0usize..(1 << n) {
            if mask.count_ones() as usize != size {
                continue;
            }
            let mut acc = Poly3::zero();
            for (pos, col) in (0..n).filter(|c| mask & (1 << c) != 0).enumerate() {
                let entry = &lifted[row * n + col];
                if entry.is_zero() {
                    continue;
                }
                let sub = minors[mask & !(1 << col)].as_ref().expect("smaller minor computed");
                if sub.is_zero() {
                    continue;
                }
                let term = entry * sub;
                acc = if pos % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            minors[mask] = Some(acc);
        }
        // minors of size - 1 are no longer needed
        if size >= 2 {
            for mask in 0usize..(1 << n) {
                if mask.count_ones() as usize == size - 1 {
                    minors[mask] = None;
                }
            }
        }
    }
    let det = minors[(1 << n) - 1].take().expect("full determinant");

    let largest = det.terms().fold(0.0_f64, |m, (_, c)| m.max(c.abs()));
    let cutoff = CLEANUP_REL * largest;
    let kept: Vec<([u8; 3], f64)> =
        det.terms().filter(|(_, c)| c.abs() > cutoff).map(|(e, c)| (*e, *c)).collect();
    if kept.is_empty() {
        return Err(Error::DegenerateSurface(
            "Cayley determinant is identically zero".into(),
        ));
    }
    let bound = cm.kind().implicit_degree_bound();
    if let Some((e, _)) = kept.iter().find(|(e, _)| e.iter().map(|&k| k as u32).sum::<u32>() > bound) {
        return Err(Error::Internal(format!("implicit term {e:?} exceeds degree bound {bound}")));
    }
    TrivariatePoly::from_terms(bound, kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dixon::build_cayley_matrix;
    use crate::geometry::tests::octant_net;
    use crate::geometry::{ControlNet, DomainPoint, QuadNet, TriangleNet};
    use crate::numeric::det_eval;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rp(rng: &mut ChaCha8Rng) -> Point3 {
        Point3 { x: rng.gen_range(-1.0..1.0), y: rng.gen_range(-1.0..1.0), z: rng.gen_range(-1.0..1.0) }
    }

    #[test]
    fn hand_checked_evaluations() {
        assert_eq!(TrivariatePoly::zero(5).evaluate(Point3 { x: 1.0, y: 2.0, z: 3.0 }), 0.0);
        let p = TrivariatePoly::from_terms(2, [([2, 0, 0], 1.0), ([0, 0, 0], -1.0)]).unwrap();
        assert_eq!(p.evaluate(Point3 { x: 3.0, y: 0.0, z: 0.0 }), 8.0);
        let p = TrivariatePoly::from_terms(3, [([1, 1, 0], 2.0), ([0, 0, 3], -0.5), ([0, 2, 1], 4.0)]).unwrap();
        let q = Point3 { x: 0.5, y: -1.5, z: 2.0 };
        let want = 2.0 * 0.5 * -1.5 - 0.5 * 8.0 + 4.0 * 2.25 * 2.0;
        assert!((p.evaluate(q) - want).abs() < 1e-14);
    }

    #[test]
    fn octant_triangle_expansion() {
        let net = octant_net();
        let cm = build_cayley_matrix(&net).unwrap();
        let p = expand_resultant(&cm).unwrap();
        assert_eq!(p.max_degree(), 5);
        assert!(p.degree().unwrap() <= 5);
        let q = net.eval(DomainPoint::triangle(0.33, 0.33).unwrap()).unwrap();
        assert!(p.evaluate(q).abs() <= 1e-9 * p.max_abs_coefficient());
    }

    #[test]
    fn expansion_matches_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let tri = ControlNet::Triangle(TriangleNet::from_points([(); 6].map(|_| rp(&mut rng))).unwrap());
        let quad = ControlNet::Quad(QuadNet::new([[(); 3]; 3].map(|r| r.map(|_| rp(&mut rng)))).unwrap());
        for net in [tri, quad] {
            let cm = build_cayley_matrix(&net).unwrap();
            let p = expand_resultant(&cm).unwrap();
            assert!(p.len() <= if net.kind() == crate::PatchKind::Quad { 165 } else { 56 });
            for _ in 0..200 {
                let q = rp(&mut rng) * 2.0;
                let d = det_eval(&cm, q);
                let e = p.evaluate(q);
                assert!((d - e).abs() <= 1e-9 * d.abs().max(1.0), "{d} vs {e}");
            }
        }
    }

    #[test]
    fn degenerate_expansion_is_an_error() {
        let c = Point3 { x: 0.5, y: 0.5, z: 0.5 };
        let net = ControlNet::Triangle(TriangleNet::from_points([c; 6]).unwrap());
        let cm = build_cayley_matrix(&net).unwrap();
        assert!(matches!(expand_resultant(&cm), Err(Error::DegenerateSurface(_))));
    }

    #[test]
    fn along_line_matches_pointwise() {
        let cm = build_cayley_matrix(&octant_net()).unwrap();
        let p = expand_resultant(&cm).unwrap();
        let o = Point3 { x: 0.1, y: -0.3, z: 0.8 };
        let d = Point3 { x: 0.6, y: 0.0, z: -0.8 };
        let coeffs = p.along_line(o, d);
        for t in [-1.0, -0.3, 0.0, 0.7, 2.0] {
            let direct = p.evaluate(o + d * t);
            let via: f64 = coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c);
            assert!((direct - via).abs() <= 1e-12 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn json_is_graded_lex_and_round_trips() {
        let p = TrivariatePoly::from_terms(
            3,
            [([0, 0, 1], 1.5), ([2, 0, 0], -2.0), ([0, 0, 0], 0.1), ([1, 1, 1], 3.0), ([0, 1, 0], 7.0)],
        )
        .unwrap();
        let text = p.to_json();
        assert_eq!(
            text,
            r#"{"max_degree":3,"terms":[[0,0,0,0.1],[0,0,1,1.5],[0,1,0,7.0],[2,0,0,-2.0],[1,1,1,3.0]]}"#
        );
        assert_eq!(TrivariatePoly::from_json(&text).unwrap(), p);
        assert!(TrivariatePoly::from_json(r#"{"max_degree":1,"terms":[[2,0,0,1.0]]}"#).is_err());
    }

    /// Solve a dense square system by Gaussian elimination with partial pivoting.
    fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for r in k + 1..n {
                let f = a[r][k] / a[k][k];
                for c in k..n {
                    a[r][c] -= f * a[k][c];
                }
                b[r] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|c| a[k][c] * x[c]).sum();
            x[k] = (b[k] - s) / a[k][k];
        }
        x
    }

    // Interpolation oracle: recover all coefficients of total degree ≤ d from
    // determinant samples on the principal lattice {(i, j, k)/d : i+j+k ≤ d},
    // which is unisolvent for trivariate polynomials of degree ≤ d.
    fn interpolate(cm: &CayleyMatrix, d: u8) -> Vec<([u8; 3], f64)> {
        let mut monos = Vec::new();
        for i in 0..=d {
            for j in 0..=(d - i) {
                for k in 0..=(d - i - j) {
                    monos.push([i, j, k]);
                }
            }
        }
        let scale = 2.0 / d as f64;
        let rows: Vec<Point3> = monos
            .iter()
            .map(|e| Point3 { x: e[0] as f64 * scale - 1.0, y: e[1] as f64 * scale - 1.0, z: e[2] as f64 * scale - 1.0 })
            .collect();
        let a: Vec<Vec<f64>> = rows
            .iter()
            .map(|q| monos.iter().map(|e| q.x.powi(e[0] as i32) * q.y.powi(e[1] as i32) * q.z.powi(e[2] as i32)).collect())
            .collect();
        let b: Vec<f64> = rows.iter().map(|q| det_eval(cm, *q)).collect();
        monos.into_iter().zip(solve(a, b)).collect()
    }

    #[test]
    fn expansion_matches_interpolation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let tri = ControlNet::Triangle(TriangleNet::from_points([(); 6].map(|_| rp(&mut rng))).unwrap());
        let quad = ControlNet::Quad(QuadNet::new([[(); 3]; 3].map(|r| r.map(|_| rp(&mut rng)))).unwrap());
        for (net, d) in [(octant_net(), 5u8), (tri, 5), (quad, 8)] {
            let cm = build_cayley_matrix(&net).unwrap();
            let p = expand_resultant(&cm).unwrap();
            let scale = p.max_abs_coefficient();
            for (e, c) in interpolate(&cm, d) {
                assert!((p.coefficient(e) - c).abs() <= 1e-6 * scale, "{e:?}: {} vs {c}", p.coefficient(e));
            }
        }
    }
}
