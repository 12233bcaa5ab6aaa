//! The domain `dom(H)` in the `y`-chart, its boundary, the centro-affine
//! metric in local coordinates, and convergence of the metric along a curve.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::cubic::StandardFormPoly;
use crate::error::{PsrError, Result};
use crate::evolution::{evolve, extract_limit_with, horizon_r, ExtrapolationOptions};
use crate::hyperbolicity::{start_directions, DEFAULT_SEED};
use crate::linalg::{inv_sqrt_spd, sym_eigen_desc, sym_norm2};
use crate::standard_form::{Gauge, SymmetricGauge};
use crate::{BOUND, SQRT_3};

/// Grid points per axis for the sup-norm estimate.
pub const GRID_PER_AXIS: usize = 9;

#[derive(Clone, Debug, PartialEq)]
pub struct DomBoundarySample {
    /// Polar angle for `n = 2`.
    pub theta: Option<f64>,
    pub direction: DVector<f64>,
    pub radius: f64,
}

/// Smallest positive zero of `1 − s² + s³ P3(q)`.
pub fn dom_boundary_radius(sf: &StandardFormPoly, q: &DVector<f64>) -> Result<f64> {
    if q.len() != sf.n {
        return Err(PsrError::DimensionMismatch {
            expected: sf.n,
            got: q.len(),
        });
    }
    let norm = q.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(PsrError::OutOfRange(format!("direction must be a unit vector, norm {norm}")));
    }
    let a = sf.p3.value(q.as_slice());
    if a.abs() > BOUND + 1e-12 {
        return Err(PsrError::NotClosed(a));
    }
    horizon_r(a.clamp(-BOUND, BOUND))
}

/// Deterministic boundary samples: uniform angles for `n = 2`, `±1` for
/// `n = 1`, and quasi-random directions otherwise.
pub fn dom_boundary_emit(sf: &StandardFormPoly, resolution: usize) -> Result<Vec<DomBoundarySample>> {
    if resolution == 0 {
        return Err(PsrError::OutOfRange("resolution must be positive".into()));
    }
    let dirs: Vec<(Option<f64>, DVector<f64>)> = match sf.n {
        1 => vec![
            (None, DVector::from_vec(vec![1.0])),
            (None, DVector::from_vec(vec![-1.0])),
        ],
        2 => (0..resolution)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / resolution as f64;
                (Some(th), DVector::from_vec(vec![th.cos(), th.sin()]))
            })
            .collect(),
        n => start_directions(n, resolution, DEFAULT_SEED)
            .into_iter()
            .take(resolution)
            .map(|d| (None, d))
            .collect(),
    };
    dirs.into_iter()
        .map(|(theta, direction)| {
            let radius = dom_boundary_radius(sf, &direction)?;
            Ok(DomBoundarySample {
                theta,
                direction,
                radius,
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct MetricSample {
    pub base_y: DVector<f64>,
    pub g: DMatrix<f64>,
}

fn check_inside(sf: &StandardFormPoly, y: &DVector<f64>) -> Result<f64> {
    if y.len() != sf.n {
        return Err(PsrError::DimensionMismatch {
            expected: sf.n,
            got: y.len(),
        });
    }
    let f = sf.affine_value(y.as_slice());
    if !(f > 0.0) {
        return Err(PsrError::OutsideDomain(f));
    }
    let r = y.norm();
    if r > 0.0 {
        let q = y / r;
        let a = sf.p3.value(q.as_slice());
        if a.abs() <= BOUND + 1e-12 && r >= horizon_r(a.clamp(-BOUND, BOUND))? {
            return Err(PsrError::OutsideDomain(f));
        }
    }
    Ok(f)
}

/// `g = −∂²f/(3f) + 2 df⊗df/(9f²)` with `f(y) = h(1, y)`.
pub fn centro_affine_metric(sf: &StandardFormPoly, y: &DVector<f64>) -> Result<MetricSample> {
    let f = check_inside(sf, y)?;
    let df = sf.p3.gradient(y)? - y * 2.0;
    let ddf = sf.p3.hessian(y)? - DMatrix::identity(sf.n, sf.n) * 2.0;
    let g = -ddf / (3.0 * f) + (&df * df.transpose()) * (2.0 / (9.0 * f * f));
    Ok(MetricSample {
        base_y: y.clone(),
        g,
    })
}

/// `−(1/3) dpᵀ ∂²h|_p dp` for `p(y) = f(y)^{-1/3}(1, y)`.
pub fn intrinsic_metric(sf: &StandardFormPoly, y: &DVector<f64>) -> Result<DMatrix<f64>> {
    let f = check_inside(sf, y)?;
    let n = sf.n;
    let df = sf.p3.gradient(y)? - y * 2.0;
    let h = sf.assemble();
    let mut lifted = DVector::zeros(n + 1);
    lifted[0] = 1.0;
    lifted.rows_mut(1, n).copy_from(y);
    let scale = f.powf(-1.0 / 3.0);
    let p = &lifted * scale;
    let mut dp = DMatrix::zeros(n + 1, n);
    dp.view_mut((1, 0), (n, n)).fill_with_identity();
    dp *= scale;
    dp -= (&lifted * df.transpose()) * (scale / (3.0 * f));
    let hess = h.hessian(&p)?;
    Ok(-(dp.transpose() * hess * dp) / 3.0)
}

/// Points of the tensor grid with `per_axis` points on `[−r, r]` lying in the closed ball.
pub fn ball_grid(n: usize, radius: f64, per_axis: usize) -> Vec<DVector<f64>> {
    let axis: Vec<f64> = if per_axis <= 1 {
        vec![0.0]
    } else {
        (0..per_axis)
            .map(|k| -radius + 2.0 * radius * k as f64 / (per_axis - 1) as f64)
            .collect()
    };
    let total = axis.len().pow(n as u32);
    (0..total)
        .map(|mut idx| {
            DVector::from_fn(n, |_, _| {
                let v = axis[idx % axis.len()];
                idx /= axis.len();
                v
            })
        })
        .filter(|y| y.norm() <= radius * (1.0 + 1e-12))
        .collect()
}

/// `max_y ‖g_lim^{-1/2}(g − g_lim)g_lim^{-1/2}‖₂` over `grid`.
pub fn metric_discrepancy(a: &StandardFormPoly, limit: &StandardFormPoly, grid: &[DVector<f64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for y in grid {
        let gl = centro_affine_metric(limit, y)?.g;
        let g = centro_affine_metric(a, y)?.g;
        let s = inv_sqrt_spd(&gl);
        worst = worst.max(sym_norm2(&(&s * (g - &gl) * &s)));
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct MetricConvergence {
    pub achieved_t: f64,
    /// `(t, discrepancy)` for every sampled `t`.
    pub curve: Vec<(f64, f64)>,
    pub horizon: f64,
}

/// Options for [`metric_convergence_check_with`].
#[derive(Clone, Debug)]
pub struct MetricOptions {
    pub per_axis: usize,
    /// Samples `t_j = R(1 − 4^{-j})`, `j = 0..samples`.
    pub samples: usize,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            per_axis: GRID_PER_AXIS,
            samples: 10,
        }
    }
}

pub fn metric_convergence_check(
    sf: &StandardFormPoly,
    v: &DVector<f64>,
    u_radius: f64,
    eps: f64,
) -> Result<MetricConvergence> {
    metric_convergence_check_with(sf, v, u_radius, eps, &MetricOptions::default(), &SymmetricGauge)
}

/// Smallest sampled `t` after which the metric of `P3|_t` stays within `eps`
/// of the limit metric on the ball of radius `u_radius`, in the shared `y`-chart.
pub fn metric_convergence_check_with(
    sf: &StandardFormPoly,
    v: &DVector<f64>,
    u_radius: f64,
    eps: f64,
    opts: &MetricOptions,
    gauge: &dyn Gauge,
) -> Result<MetricConvergence> {
    if !(eps > 0.0) {
        return Err(PsrError::OutOfRange(format!("eps must be positive, got {eps}")));
    }
    // Every closed domain contains the open ball of radius √3/2.
    if !(u_radius > 0.0 && u_radius < 0.5 * SQRT_3) {
        return Err(PsrError::OutOfRange(format!("ball radius {u_radius} not in (0, √3/2)")));
    }
    let limit = extract_limit_with(sf, v, &ExtrapolationOptions::default(), gauge)?;
    let limit_sf = StandardFormPoly::new(limit.limit_p3);
    let r = limit.horizon;
    let schedule: Vec<f64> = (0..opts.samples).map(|j| r * (1.0 - 0.25_f64.powi(j as i32))).collect();
    let trace = evolve(sf, v, &schedule, gauge)?;
    let grid = ball_grid(sf.n, u_radius, opts.per_axis);
    for y in &grid {
        let (vals, _) = sym_eigen_desc(&centro_affine_metric(&limit_sf, y)?.g);
        if vals[vals.len() - 1] <= 0.0 {
            return Err(PsrError::OutsideDomain(vals[vals.len() - 1]));
        }
    }
    let curve: Vec<(f64, f64)> = trace
        .samples
        .iter()
        .map(|s| Ok((s.t, metric_discrepancy(&s.sf, &limit_sf, &grid)?)))
        .collect::<Result<_>>()?;
    let mut achieved = None;
    for &(t, d) in curve.iter().rev() {
        if d < eps {
            achieved = Some(t);
        } else {
            break;
        }
    }
    match achieved {
        Some(achieved_t) => Ok(MetricConvergence {
            achieved_t,
            curve,
            horizon: r,
        }),
        None => Err(PsrError::NotConverged(format!(
            "discrepancy curve {:?}",
            curve.iter().map(|c| c.1).collect::<Vec<_>>()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubic::CubicForm;

    #[test]
    fn flat_radius_and_metric() {
        let sf = StandardFormPoly::zero(2);
        let q = DVector::from_vec(vec![0.6, 0.8]);
        assert_eq!(dom_boundary_radius(&sf, &q).unwrap(), 1.0);
        let g = centro_affine_metric(&sf, &DVector::zeros(2)).unwrap().g;
        assert!((g - DMatrix::identity(2, 2) * (2.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn local_formula_matches_intrinsic() {
        let p3 = CubicForm::from_terms(2, [((0, 0, 0), 0.2), ((0, 1, 1), -0.3), ((1, 1, 1), 0.1)]).unwrap();
        let sf = StandardFormPoly::new(p3);
        for y in [vec![0.0, 0.0], vec![0.3, -0.2], vec![-0.5, 0.4]] {
            let y = DVector::from_vec(y);
            let a = centro_affine_metric(&sf, &y).unwrap().g;
            let b = intrinsic_metric(&sf, &y).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn outside_rejected() {
        let sf = StandardFormPoly::zero(1);
        assert!(matches!(
            centro_affine_metric(&sf, &DVector::from_vec(vec![1.5])),
            Err(PsrError::OutsideDomain(_))
        ));
    }

    #[test]
    fn grid_size() {
        assert_eq!(ball_grid(1, 0.2, 9).len(), 9);
        assert!(ball_grid(2, 0.2, 9).len() < 81);
    }
}
