//! Numerical toolkit for cubic projective special real (PSR) hypersurfaces.
//!
//! The crate decides closedness of PSR manifolds defined by cubic forms in
//! standard form `x³ − x⟨y,y⟩ + P3(y)`, transports such a form to standard
//! form along curves running to the boundary of the cone, extracts the limit
//! polynomial and matches it against the catalog of possible limits.
//!
//! Coordinates on the ambient space are `(x, y_1, …, y_n)`; index `0` is always
//! `x`. A [`cubic::StandardFormPoly`] stores only the `P3` part on `R^n`.

pub mod catalog;
pub mod cubic;
pub mod error;
pub mod evolution;
pub mod hyperbolicity;
pub mod linalg;
pub mod metric;
pub mod registry;
pub mod standard_form;

pub use error::{PsrError, Result};

/// `2/(3√3)`, the largest value `P3` may take on the unit sphere for a closed manifold.
pub const BOUND: f64 = 0.384_900_179_459_750_5;

/// `√3`.
pub const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Absolute floor used together with relative tolerances.
pub const ABS_FLOOR: f64 = 1e-12;

/// `|a − b| ≤ tol·max(|a|, |b|)` with an absolute floor of [`ABS_FLOOR`].
pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= (tol * a.abs().max(b.abs())).max(ABS_FLOOR)
}
