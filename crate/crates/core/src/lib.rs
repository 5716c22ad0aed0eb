//! Implicit equations for biquadratic Bézier triangles and quadrilateral
//! patches.
//!
//! A control net is turned into three residual polynomials in `(u, v)`,
//! the Dixon construction eliminates `(u, v)` and yields a Cayley matrix of
//! affine forms in the query point, and the determinant of that matrix is
//! the implicit function. It can be evaluated numerically
//! ([`numeric::det_eval`]) or expanded once into an explicit trivariate
//! polynomial ([`expand::expand_resultant`]).

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod form;
pub mod geometry;
pub mod poly;
pub mod dixon;
pub mod numeric;
pub mod expand;
pub mod slp;
pub mod normalize;
pub mod apps;

pub use dixon::{build_cayley_matrix, build_dixon_delta, CayleyMatrix, DixonPoly, ExactCayleyMatrix};
pub use error::{Error, Result};
pub use form::LinearForm;
pub use geometry::{ControlNet, DomainPoint, PatchKind, Point3, QuadNet, ResidualSystem, TriangleNet};
pub use numeric::{classify, det_eval, ClassificationResult, DenseMatrix, Verdict};
pub use expand::{evaluate_poly, expand_resultant, TrivariatePoly};
pub use slp::{emit_slp, StraightLineProgram};
pub use normalize::{normalize_net, NormalizationTransform};
pub use apps::{invert_point, precision_study, raycast, scan_line, ImplicitPatch, Inversion, Ray, ScanRecord};
