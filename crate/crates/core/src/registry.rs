//! Named example polynomials.

use nalgebra::DMatrix;

use crate::catalog::{canonical_polynomial, LimitForm};
use crate::cubic::{CubicForm, StandardFormPoly, Triple};
use crate::error::{PsrError, Result};
use crate::{BOUND, SQRT_3};

pub const EXAMPLE_NAMES: &[&str] = &[
    "dim1_homogeneous",
    "motivating",
    "ker01",
    "ker01_reduced",
    "sqrt2_family",
    "kerm1",
    "kerm1_reduced",
    "catalog_dim1",
    "catalog_dim2_a",
    "catalog_dim2_b",
    "catalog_ge3",
    "eq110",
];

/// Optional parameters shared by the examples.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExampleParams {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub b: Option<f64>,
    pub c: Option<f64>,
}

fn form(n: usize, terms: Vec<(Triple, f64)>) -> Result<StandardFormPoly> {
    Ok(StandardFormPoly::new(CubicForm::from_terms(n, terms)?))
}

fn need_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(PsrError::OutOfRange(format!("n = {n} must be at least {min}")));
    }
    Ok(())
}

fn need_m(n: usize, m: usize) -> Result<()> {
    if m < 1 || m + 2 > n {
        return Err(PsrError::OutOfRange(format!("m = {m} not in [1, {}]", n.saturating_sub(2))));
    }
    Ok(())
}

/// `P3 = −(2/(3√3)) y³`.
pub fn dim1_homogeneous() -> StandardFormPoly {
    form(1, vec![((0, 0, 0), -BOUND)]).expect("dim 1")
}

/// `h = x³ − x(y² + z²) + (2/(3√3)) y³`.
pub fn motivating() -> StandardFormPoly {
    form(2, vec![((0, 0, 0), BOUND)]).expect("dim 2")
}

/// `P3|_t = (2/(3√3)) y³ − (2t/3) yz²` along the `y`-ray.
pub fn motivating_at(t: f64) -> StandardFormPoly {
    form(2, vec![((0, 0, 0), BOUND), ((0, 1, 1), -2.0 * t / 3.0)]).expect("dim 2")
}

/// `P3 = −(2/(3√3)) v_{n-1}³ + (2/√3) v_{n-1} w²` on `(v_1..v_{n-1}, w)`.
pub fn ker01(n: usize) -> Result<StandardFormPoly> {
    need_n(n, 2)?;
    let (v, w) = (n - 2, n - 1);
    form(n, vec![((v, v, v), -BOUND), ((v, w, w), 2.0 / SQRT_3)])
}

/// `−(2/(3√3)) c³ v³ + (2/√3) c v w²` on `(v, w)`.
pub fn ker01_reduced(c: f64) -> StandardFormPoly {
    form(2, vec![((0, 0, 0), -BOUND * c.powi(3)), ((0, 1, 1), 2.0 / SQRT_3 * c)]).expect("dim 2")
}

/// `P3 = −2b|s|²u_last + (1/√2)|s|²w + b u_last w² + (1/(2√2)) w³` on `(s_1..s_m, u, w)`.
pub fn sqrt2_family(n: usize, m: usize, b: f64) -> Result<StandardFormPoly> {
    need_n(n, 3)?;
    need_m(n, m)?;
    let (u, w) = (n - 2, n - 1);
    let r2 = 2f64.sqrt();
    let mut terms = Vec::new();
    for i in 0..m {
        terms.push(((i, i, u), -2.0 * b));
        terms.push(((i, i, w), 1.0 / r2));
    }
    terms.push(((u, w, w), b));
    terms.push(((w, w, w), 1.0 / (2.0 * r2)));
    form(n, terms)
}

/// `P3 = −(1/√3)|s|²u_last − (2/(3√3)) u_last³ + |s|²w + (2/√3) u_last w²` on `(s_1..s_m, u, w)`.
pub fn kerm1(n: usize, m: usize) -> Result<StandardFormPoly> {
    need_n(n, 3)?;
    need_m(n, m)?;
    let (u, w) = (n - 2, n - 1);
    let mut terms = Vec::new();
    for i in 0..m {
        terms.push(((i, i, u), -1.0 / SQRT_3));
        terms.push(((i, i, w), 1.0));
    }
    terms.push(((u, u, u), -BOUND));
    terms.push(((u, w, w), 2.0 / SQRT_3));
    form(n, terms)
}

/// `−(1/√3) c s²u − (2/(3√3)) c³u³ + s²w + (2/√3) c u w²` on `(s, u, w)`.
pub fn kerm1_reduced(c: f64) -> StandardFormPoly {
    form(
        3,
        vec![
            ((0, 0, 1), -c / SQRT_3),
            ((1, 1, 1), -BOUND * c.powi(3)),
            ((0, 0, 2), 1.0),
            ((1, 2, 2), 2.0 / SQRT_3 * c),
        ],
    )
    .expect("dim 3")
}

/// The generic limit `−(1/√3)|s|²w − (2/(3√3)) w³`.
pub fn eq110(n: usize) -> Result<StandardFormPoly> {
    need_n(n, 2)?;
    canonical_polynomial(&LimitForm::DimGe3 { m: 0, f: vec![] }, n.max(3)).and_then(|p| {
        if n == 2 {
            canonical_polynomial(&LimitForm::Dim2A, 2)
        } else {
            Ok(p)
        }
    })
}

/// Catalog form with every `F_i = scale · 1`.
pub fn catalog_ge3(n: usize, m: usize, scale: f64) -> Result<StandardFormPoly> {
    need_n(n, 3)?;
    if m > n - 1 {
        return Err(PsrError::OutOfRange(format!("m = {m} not in [0, {}]", n - 1)));
    }
    let d = n - 1 - m;
    let f = vec![DMatrix::identity(d, d) * scale; m];
    canonical_polynomial(&LimitForm::DimGe3 { m, f }, n)
}

/// Looks up a named example.
pub fn example(name: &str, p: &ExampleParams) -> Result<StandardFormPoly> {
    let n = p.n.unwrap_or(3);
    let m = p.m.unwrap_or(1);
    match name {
        "dim1_homogeneous" => Ok(dim1_homogeneous()),
        "motivating" => Ok(motivating()),
        "ker01" => ker01(n),
        "ker01_reduced" => Ok(ker01_reduced(p.c.unwrap_or(1.0))),
        "sqrt2_family" => sqrt2_family(n, m, p.b.unwrap_or(0.2)),
        "kerm1" => kerm1(n, m),
        "kerm1_reduced" => Ok(kerm1_reduced(p.c.unwrap_or(1.0))),
        "catalog_dim1" => canonical_polynomial(&LimitForm::Dim1, 1),
        "catalog_dim2_a" => canonical_polynomial(&LimitForm::Dim2A, 2),
        "catalog_dim2_b" => canonical_polynomial(&LimitForm::Dim2B, 2),
        "catalog_ge3" => catalog_ge3(n, p.m.unwrap_or(0), p.b.unwrap_or(0.0)),
        "eq110" => eq110(n),
        other => Err(PsrError::UnknownName(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolicity::{closedness, ClosednessStatus, DEFAULT_SING_TOL};

    #[test]
    fn all_names_resolve() {
        for name in EXAMPLE_NAMES {
            example(name, &ExampleParams::default()).unwrap();
        }
        assert!(matches!(
            example("nope", &ExampleParams::default()),
            Err(PsrError::UnknownName(_))
        ));
    }

    #[test]
    fn singular_examples() {
        for sf in [motivating(), ker01(3).unwrap(), sqrt2_family(3, 1, 0.2).unwrap(), kerm1(4, 2).unwrap()] {
            assert_eq!(
                closedness(&sf, DEFAULT_SING_TOL).status,
                ClosednessStatus::ClosedSingularAtInfinity
            );
        }
    }
}
