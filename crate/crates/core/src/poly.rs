//! Sparse multivariate polynomials over a generic coefficient field.
//!
//! Exponents are fixed-width arrays so the same code serves the
//! seven-variable Dixon construction `(u, v, α, β, x, y, z)` and the
//! trivariate implicit equation `(x, y, z)`.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Coefficient field. `f64` is the production path, `BigRational` the exact
/// test path.
pub trait Coeff:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    /// Whether the value is rounding noise given `bound`, the sum of the
    /// magnitudes of everything that was added into it. Exact fields only
    /// accept true zeros.
    fn negligible(&self, bound: f64, rel: f64) -> bool;
}

impl Coeff for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn negligible(&self, bound: f64, rel: f64) -> bool {
        self.abs() <= rel * bound
    }
}

impl Coeff for BigRational {
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite coefficient")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Fallback for huge numerators/denominators.
            let n = self.numer().to_f64().unwrap_or(f64::INFINITY);
            let d = self.denom().to_f64().unwrap_or(f64::INFINITY);
            n / d
        })
    }

    fn magnitude(&self) -> f64 {
        Coeff::to_f64(&self.abs())
    }

    fn negligible(&self, _bound: f64, _rel: f64) -> bool {
        self.is_zero()
    }
}

/// Exact conversion helper used by tests and the exact Cayley path.
pub fn rational(v: f64) -> BigRational {
    <BigRational as Coeff>::from_f64(v)
}

pub fn rational_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `Σ c_e · Π var_i^{e_i}` with zero coefficients never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePoly<C, const N: usize> {
    terms: BTreeMap<[u8; N], C>,
}

impl<C: Coeff, const N: usize> Default for SparsePoly<C, N> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff, const N: usize> SparsePoly<C, N> {
    pub fn zero() -> Self {
        SparsePoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial([0; N], c)
    }

    pub fn monomial(exp: [u8; N], c: C) -> Self {
        let mut p = Self::zero();
        p.add_term(exp, c);
        p
    }

    /// The variable with index `i`.
    pub fn var(i: usize) -> Self {
        let mut e = [0; N];
        e[i] = 1;
        Self::monomial(e, C::one())
    }

    pub fn add_term(&mut self, exp: [u8; N], c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exp) {
            Some(slot) => {
                let sum = slot.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&exp);
                } else {
                    *slot = sum;
                }
            }
            None => {
                self.terms.insert(exp, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8; N], &C)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> BTreeMap<[u8; N], C> {
        self.terms
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ([u8; N], C)>) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn coefficient(&self, exp: &[u8; N]) -> C {
        self.terms.get(exp).cloned().unwrap_or_else(C::zero)
    }

    /// Total degree over all variables, `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&k| k as u32).sum())
            .max()
    }

    pub fn degree_in(&self, var: usize) -> Option<u8> {
        self.terms.keys().map(|e| e[var]).max()
    }

    pub fn scale(&self, s: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| (*e, c.clone() * s.clone())))
    }

    /// Polynomial whose coefficients are the magnitudes of this one's.
    pub fn magnitudes(&self) -> SparsePoly<f64, N> {
        SparsePoly { terms: self.terms.iter().map(|(e, c)| (*e, c.magnitude())).collect() }
    }

    /// Drop every coefficient that is negligible against the matching
    /// coefficient of `bound`.
    pub fn drop_negligible(&mut self, bound: &SparsePoly<f64, N>, rel: f64) {
        self.terms
            .retain(|e, c| !c.negligible(bound.terms.get(e).copied().unwrap_or(0.0), rel));
    }

    /// Divide by `(var_main - var_aux)` treating the polynomial as univariate in
    /// `var_main` (synthetic division). Returns `(quotient, remainder)`; the
    /// remainder is free of `var_main` and equals the polynomial with
    /// `var_main := var_aux`.
    pub fn divide_by_difference(&self, var_main: usize, var_aux: usize) -> (Self, Self) {
        let Some(top) = self.degree_in(var_main) else {
            return (Self::zero(), Self::zero());
        };
        // slices[k] = coefficient of var_main^k, with that exponent stripped
        let mut slices: Vec<Self> = vec![Self::zero(); top as usize + 1];
        for (e, c) in &self.terms {
            let mut stripped = *e;
            let k = stripped[var_main] as usize;
            stripped[var_main] = 0;
            slices[k].add_term(stripped, c.clone());
        }
        let shift = |p: &Self| -> Self {
            Self::from_terms(p.terms.iter().map(|(e, c)| {
                let mut s = *e;
                s[var_aux] += 1;
                (s, c.clone())
            }))
        };
        // q_{k-1} = p_k + aux·q_k, remainder = p_0 + aux·q_0
        let mut quotient = Self::zero();
        let mut carry = Self::zero();
        for k in (1..=top as usize).rev() {
            carry = &slices[k] + &shift(&carry);
            for (e, c) in &carry.terms {
                let mut full = *e;
                full[var_main] = (k - 1) as u8;
                quotient.add_term(full, c.clone());
            }
        }
        let remainder = &slices[0] + &shift(&carry);
        (quotient, remainder)
    }

    /// Evaluate at a point with `f64` coordinates.
    pub fn eval_f64(&self, at: &[f64; N]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = c.to_f64();
                for (x, &k) in at.iter().zip(e) {
                    t *= x.powi(k as i32);
                }
                t
            })
            .sum()
    }
}

impl<C: Coeff, const N: usize> Add for &SparsePoly<C, N> {
    type Output = SparsePoly<C, N>;
    fn add(self, o: &SparsePoly<C, N>) -> SparsePoly<C, N> {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl<C: Coeff, const N: usize> Sub for &SparsePoly<C, N> {
    type Output = SparsePoly<C, N>;
    fn sub(self, o: &SparsePoly<C, N>) -> SparsePoly<C, N> {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl<C: Coeff, const N: usize> Neg for &SparsePoly<C, N> {
    type Output = SparsePoly<C, N>;
    fn neg(self) -> SparsePoly<C, N> {
        SparsePoly { terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect() }
    }
}

impl<C: Coeff, const N: usize> Mul for &SparsePoly<C, N> {
    type Output = SparsePoly<C, N>;
    fn mul(self, o: &SparsePoly<C, N>) -> SparsePoly<C, N> {
        let mut out = SparsePoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let mut e = *ea;
                for (x, y) in e.iter_mut().zip(eb) {
                    *x += *y;
                }
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }
}
