//! The transformation `A(p)` moving a hyperbolic point `p` of `{h = 1}` to
//! `(1, 0, …, 0)` so that `A(p)^*h = x³ − x⟨y,y⟩ + P3(y)`.
//!
//! `A(p) = [p | C·E]`, where the columns of `C` span `ker dh_p` and `E`
//! satisfies `Eᵀ B E = 1` for `B = −½ Cᵀ ∂²h_p C`. `E` is fixed only up to
//! `O(n)`; the choice is delegated to a [`Gauge`].

use nalgebra::{DMatrix, DVector};

use crate::cubic::{extract_standard, standard_shape_defect, CubicForm, FrameTransform, StandardFormPoly, SHAPE_TOL};
use crate::error::{PsrError, Result};
use crate::linalg::{fix_column_signs, inv_sqrt_spd, polar_factor, sym_eigen_desc};

/// Eigenvalues of the bilinear form at or below this value signal a non-hyperbolic point.
pub const HYPERBOLIC_EIG_TOL: f64 = 1e-10;

/// A rule fixing the `O(n)` freedom in `E`.
pub trait Gauge: Send + Sync {
    fn name(&self) -> &'static str;

    /// A matrix `E` with `Eᵀ B E = 1`. `prev` is the frame used at the previous
    /// point of a curve, if any.
    fn frame(&self, b: &DMatrix<f64>, prev: Option<&DMatrix<f64>>) -> DMatrix<f64>;
}

/// `E = B^{-1/2}`: symmetric, depends only on `B`, and equals `1` at a point already in standard form.
#[derive(Clone, Copy, Debug, Default)]
pub struct SymmetricGauge;

impl Gauge for SymmetricGauge {
    fn name(&self) -> &'static str {
        "symmetric"
    }

    fn frame(&self, b: &DMatrix<f64>, _prev: Option<&DMatrix<f64>>) -> DMatrix<f64> {
        inv_sqrt_spd(b)
    }
}

/// `E = V Λ^{-1/2}` with eigenvalues sorted descending and each eigenvector's
/// first nonzero component positive.
#[derive(Clone, Copy, Debug, Default)]
pub struct FixedGauge;

impl Gauge for FixedGauge {
    fn name(&self) -> &'static str {
        "fixed"
    }

    fn frame(&self, b: &DMatrix<f64>, _prev: Option<&DMatrix<f64>>) -> DMatrix<f64> {
        let (vals, mut vecs) = sym_eigen_desc(b);
        fix_column_signs(&mut vecs);
        let scale = DMatrix::from_diagonal(&vals.map(|v| 1.0 / v.sqrt()));
        vecs * scale
    }
}

/// The valid frame `B^{-1/2}·O` closest to the previous frame in Frobenius norm,
/// `O = polar(B^{-1/2}·E_prev)`. Without a previous frame it falls back to
/// [`SymmetricGauge`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ContinuousGauge;

impl Gauge for ContinuousGauge {
    fn name(&self) -> &'static str {
        "continuous"
    }

    fn frame(&self, b: &DMatrix<f64>, prev: Option<&DMatrix<f64>>) -> DMatrix<f64> {
        let s = inv_sqrt_spd(b);
        match prev {
            Some(e_prev) if e_prev.shape() == b.shape() => {
                let o = polar_factor(&(&s * e_prev));
                s * o
            }
            _ => s,
        }
    }
}

/// Every registered gauge, in a fixed order.
pub fn gauge_registry() -> Vec<Box<dyn Gauge>> {
    vec![Box::new(SymmetricGauge), Box::new(FixedGauge), Box::new(ContinuousGauge)]
}

/// Look a gauge up by name.
pub fn gauge_by_name(name: &str) -> Result<Box<dyn Gauge>> {
    gauge_registry()
        .into_iter()
        .find(|g| g.name() == name)
        .ok_or_else(|| PsrError::UnknownName(format!("gauge '{name}'")))
}

/// Checks `h(p) = 1` up to `1e-9` relative to the size of the monomials at `p`.
fn check_level(h: &CubicForm, p: &DVector<f64>) -> Result<()> {
    let v = h.evaluate(p)?;
    let scale: f64 = h.terms().map(|((i, j, k), c)| (c * p[i] * p[j] * p[k]).abs()).sum();
    if (v - 1.0).abs() > 1e-9 * scale.max(1.0) {
        return Err(PsrError::NotOnLevelSet(v));
    }
    Ok(())
}

/// Columns `(−∂_{y_i}h/∂_x h, e_i)` spanning `ker dh_p`, solved for the
/// ambient coordinate `chart`.
pub fn tangent_frame_in_chart(h: &CubicForm, p: &DVector<f64>, chart: usize) -> Result<DMatrix<f64>> {
    let dim = h.dim();
    if chart >= dim {
        return Err(PsrError::OutOfRange(format!("chart {chart} for dimension {dim}")));
    }
    let g = h.gradient(p)?;
    let gk = g[chart];
    if gk.abs() <= 1e-12 * g.norm() || gk == 0.0 {
        return Err(PsrError::DegenerateChart(gk));
    }
    let mut c = DMatrix::zeros(dim, dim - 1);
    for (col, i) in (0..dim).filter(|&i| i != chart).enumerate() {
        c[(i, col)] = 1.0;
        c[(chart, col)] = -g[i] / gk;
    }
    Ok(c)
}

/// Tangent frame in the `x`-chart.
pub fn tangent_frame(h: &CubicForm, p: &DVector<f64>) -> Result<DMatrix<f64>> {
    check_level(h, p)?;
    tangent_frame_in_chart(h, p, 0)
}

fn bilinear_on(h: &CubicForm, p: &DVector<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let hess = h.hessian(p)?;
    let b = c.transpose() * hess * c * -0.5;
    let b = (&b + b.transpose()) * 0.5;
    let (vals, _) = sym_eigen_desc(&b);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > HYPERBOLIC_EIG_TOL) {
        return Err(PsrError::NotHyperbolic(format!("smallest eigenvalue {min:e}")));
    }
    Ok(b)
}

/// `−½ ∂²h_p` restricted to the tangent frame; positive definite at hyperbolic points.
pub fn eq13_bilinear(h: &CubicForm, p: &DVector<f64>) -> Result<DMatrix<f64>> {
    let c = tangent_frame(h, p)?;
    bilinear_on(h, p, &c)
}

/// Standard form of `h` at a point, with the data that produced it.
#[derive(Clone, Debug)]
pub struct StandardFormAtPoint {
    pub transform: FrameTransform,
    pub sf: StandardFormPoly,
    pub base_point: DVector<f64>,
    /// Ambient coordinate solved for in the tangent frame (`0` is the `x`-chart).
    pub chart: usize,
    pub frame: DMatrix<f64>,
    /// The positive definite form `B` whose normalization `E` is.
    pub bilinear: DMatrix<f64>,
}

/// `A(e_0 g^{-1/3})` with the symmetric gauge, where `g` is the `x³`
/// coefficient of a nearly standard `h`.
fn local_frame(h: &CubicForm) -> Result<DMatrix<f64>> {
    let dim = h.dim();
    let g = h.coeff(0, 0, 0);
    if !(g > 0.0) {
        return Err(PsrError::NotOnLevelSet(g));
    }
    let mut p = DVector::zeros(dim);
    p[0] = g.cbrt().recip();
    let c = tangent_frame_in_chart(h, &p, 0)?;
    let e = SymmetricGauge.frame(&bilinear_on(h, &p, &c)?, None);
    let mut a = DMatrix::zeros(dim, dim);
    a.set_column(0, &p);
    a.view_mut((0, 1), (dim, dim - 1)).copy_from(&(c * e));
    Ok(a)
}

/// `A(p)` and `A(p)^*h` with the given gauge.
///
/// When `∂_x h` vanishes at `p` the tangent frame is solved for the ambient
/// coordinate with the largest partial derivative instead.
pub fn standard_form_at(
    h: &CubicForm,
    p: &DVector<f64>,
    gauge: &dyn Gauge,
    prev: Option<&DMatrix<f64>>,
) -> Result<StandardFormAtPoint> {
    check_level(h, p)?;
    let (chart, c) = match tangent_frame_in_chart(h, p, 0) {
        Ok(c) => (0, c),
        Err(PsrError::DegenerateChart(_)) => {
            let g = h.gradient(p)?;
            let k = g.iamax();
            (k, tangent_frame_in_chart(h, p, k)?)
        }
        Err(e) => return Err(e),
    };
    let b = bilinear_on(h, p, &c)?;
    let e = gauge.frame(&b, prev);
    let ce = &c * &e;
    let dim = h.dim();
    let mut a = DMatrix::zeros(dim, dim);
    a.set_column(0, p);
    a.view_mut((0, 1), (dim, dim - 1)).copy_from(&ce);
    // The frame is only accurate to roundoff relative to its (possibly
    // large) entries; re-standardizing the compensated pullback at `e_0`
    // removes the resulting shape defect.
    let coarse = h.pullback_matrix_compensated(&a)?;
    let local = local_frame(&coarse)?;
    let pulled = coarse.pullback_matrix(&local)?;
    let transform = FrameTransform::new(a * local)?;
    let sf = match extract_standard(&pulled, SHAPE_TOL) {
        Ok(sf) => sf,
        Err(err) => {
            // Roundoff grows with the size of the frame; accept defects at that scale.
            let (_, value, expected) = standard_shape_defect(&pulled)?;
            let scale = p.amax().max(1.0).powi(2) * ce.amax().max(1.0).powi(2);
            if (value - expected).abs() <= SHAPE_TOL * scale {
                extract_standard(&pulled, f64::INFINITY)?
            } else {
                return Err(err);
            }
        }
    };
    Ok(StandardFormAtPoint {
        transform,
        sf,
        base_point: p.clone(),
        chart,
        frame: e,
        bilinear: b,
    })
}
