//! Evolution of the standard form along the ray curve `γ(t) = β(t)^{-1/3}(1, t·v)`,
//! the horizon `R`, limit extraction, and closed-form oracles in dimensions 1 and 2.

use nalgebra::{DMatrix, DVector};

use crate::cubic::{triples, CubicForm, FrameTransform, StandardFormPoly};
use crate::error::{PsrError, Result};
use crate::hyperbolicity::{critical_points_with_norms, sphere_max, CriticalSolution, DEFAULT_SING_TOL};
use crate::linalg::{householder_to, polyfit_at_zero, sym_condition};
use crate::standard_form::{standard_form_at, tangent_frame, Gauge, SymmetricGauge};
use crate::{BOUND, SQRT_3};

/// `β(r) = 1 − r² + a r³`, the value of `h` along the ray.
pub fn beta(a: f64, r: f64) -> f64 {
    1.0 - r * r + a * r * r * r
}

/// `a = (R² − 1)/R³`.
pub fn a_from_horizon(r: f64) -> f64 {
    (r * r - 1.0) / (r * r * r)
}

fn check_a(a: f64) -> Result<()> {
    if !a.is_finite() || a.abs() > BOUND + 1e-12 {
        return Err(PsrError::NoClosedHorizon(a));
    }
    Ok(())
}

/// Smallest positive zero of `β`, always in `[√3/2, √3]`.
///
/// On that interval `β` is nonincreasing with `β(√3/2) ≥ 0 ≥ β(√3)`, so a
/// bracketed Newton iteration converges to the unique zero.
pub fn horizon_r(a: f64) -> Result<f64> {
    check_a(a)?;
    let (mut lo, mut hi) = (0.5 * SQRT_3, SQRT_3);
    if a >= BOUND - 4.0 * f64::EPSILON || beta(a, hi) >= 0.0 {
        return Ok(hi);
    }
    if a <= -BOUND + 4.0 * f64::EPSILON || beta(a, lo) <= 0.0 {
        return Ok(lo);
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = beta(a, r);
        if f == 0.0 {
            return Ok(r);
        }
        if f > 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        let df = r * (3.0 * a * r - 2.0);
        let newton = r - f / df;
        r = if df != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(r)
}

/// Real zeros of `β`, sorted ascending (a double zero appears twice).
///
/// The zeros closest to the origin are `R(a)` and `−R(−a)`; for `a ≠ 0` the
/// third follows from the product of the roots, `−1/a`.
pub fn beta_roots(a: f64) -> Result<Vec<f64>> {
    check_a(a)?;
    let rp = horizon_r(a)?;
    let rm = -horizon_r(-a)?;
    let mut roots = vec![rm, rp];
    if a != 0.0 {
        roots.push(-1.0 / (a * rp * rm));
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

/// The `y³` coefficient of the evolved form in dimension 1 at `r`, for `P3 = a y³`.
pub fn dim1_closed_form(a: f64, r: f64) -> f64 {
    let num = 27.0 * a - 18.0 * r + 27.0 * a * r * r + (2.0 - 27.0 * a * a) * r * r * r;
    let d = 3.0 - 9.0 * a * r + r * r;
    num / (3.0 * SQRT_3 * d * d.sqrt())
}

fn check_unit(v: &DVector<f64>) -> Result<()> {
    if (v.norm() - 1.0).abs() > 1e-10 {
        return Err(PsrError::OutOfRange(format!("direction must be a unit vector, norm {}", v.norm())));
    }
    Ok(())
}

/// `P3 ∘ O` for the Householder reflection `O` mapping the last axis to `v`.
pub fn reorient(sf: &StandardFormPoly, v: &DVector<f64>) -> Result<(StandardFormPoly, DMatrix<f64>)> {
    if v.len() != sf.n {
        return Err(PsrError::DimensionMismatch {
            expected: sf.n,
            got: v.len(),
        });
    }
    check_unit(v)?;
    let o = householder_to(v);
    if o == DMatrix::identity(sf.n, sf.n) {
        return Ok((sf.clone(), o));
    }
    let p3 = sf.p3.pullback_matrix(&o)?;
    Ok((StandardFormPoly::new(p3), o))
}

/// `β(r)` in factored form, accurate near its zeros.
pub fn beta_factored(a: f64, r: f64) -> f64 {
    match beta_roots(a.clamp(-BOUND, BOUND)) {
        Ok(roots) if a != 0.0 => a * roots.iter().map(|z| r - z).product::<f64>(),
        _ => beta(a, r),
    }
}

/// `γ(t) = β(t)^{-1/3}(1, t·v)` with `a = P3(v)`.
pub fn curve_point(a: f64, v: &DVector<f64>, t: f64) -> DVector<f64> {
    let s = beta_factored(a, t).powf(-1.0 / 3.0);
    let mut p = DVector::zeros(v.len() + 1);
    p[0] = s;
    for i in 0..v.len() {
        p[i + 1] = s * t * v[i];
    }
    p
}

#[derive(Clone, Debug)]
pub struct EvolutionSample {
    pub t: f64,
    pub sf: StandardFormPoly,
    pub transform: FrameTransform,
    /// Condition number of the bilinear form normalized at this point.
    pub condition: f64,
}

#[derive(Clone, Debug)]
pub struct EvolutionTrace {
    pub direction: DVector<f64>,
    pub samples: Vec<EvolutionSample>,
    /// Horizon in the direction `v`.
    pub horizon: f64,
    /// Horizon in the direction `−v`; the curve is defined for `t ∈ (−horizon_back, horizon)`.
    pub horizon_back: f64,
}

fn require_closed(sf: &StandardFormPoly) -> Result<()> {
    let max = sphere_max(&sf.p3).max_value;
    if max > BOUND + DEFAULT_SING_TOL {
        return Err(PsrError::NotClosed(max));
    }
    Ok(())
}

/// Standard forms `A(γ(t))^*h` along the curve in direction `v`.
///
/// The gauge is applied with the previous frame of the schedule, starting from
/// the identity frame at `t = 0`.
pub fn evolve(sf: &StandardFormPoly, v: &DVector<f64>, schedule: &[f64], gauge: &dyn Gauge) -> Result<EvolutionTrace> {
    if v.len() != sf.n {
        return Err(PsrError::DimensionMismatch {
            expected: sf.n,
            got: v.len(),
        });
    }
    check_unit(v)?;
    require_closed(sf)?;
    let a = sf.p3.value(v.as_slice());
    let horizon = horizon_r(a.clamp(-BOUND, BOUND))?;
    let horizon_back = horizon_r((-a).clamp(-BOUND, BOUND))?;
    for w in schedule.windows(2) {
        if w[1] <= w[0] {
            return Err(PsrError::OutOfRange("t schedule must be strictly increasing".into()));
        }
    }
    if let (Some(&first), Some(&last)) = (schedule.first(), schedule.last()) {
        if first <= -horizon_back || last >= horizon {
            return Err(PsrError::OutOfRange(format!(
                "t must lie in ({}, {}), got [{first}, {last}]",
                -horizon_back, horizon
            )));
        }
    }
    let h = sf.assemble();
    let mut prev = DMatrix::identity(sf.n, sf.n);
    let mut samples = Vec::with_capacity(schedule.len());
    for &t in schedule {
        let p = curve_point(a, v, t);
        let at = standard_form_at(&h, &p, gauge, Some(&prev))?;
        prev = at.frame.clone();
        samples.push(EvolutionSample {
            t,
            condition: sym_condition(&at.bilinear),
            sf: at.sf,
            transform: at.transform,
        });
    }
    Ok(EvolutionTrace {
        direction: v.clone(),
        samples,
        horizon,
        horizon_back,
    })
}

#[derive(Clone, Debug)]
pub struct ExtrapolationOptions {
    /// `σ₀ = sigma0_frac · R`.
    pub sigma0_frac: f64,
    pub samples: usize,
    pub fit_degree: usize,
    pub check_degree: usize,
    pub tolerance: f64,
    /// Closest allowed approach `R − t`.
    pub min_gap: f64,
    pub max_condition: f64,
}

impl Default for ExtrapolationOptions {
    fn default() -> Self {
        Self {
            sigma0_frac: 0.3,
            samples: 7,
            fit_degree: 5,
            check_degree: 4,
            tolerance: 1e-4,
            min_gap: 1e-6,
            max_condition: 1e10,
        }
    }
}

impl ExtrapolationOptions {
    /// `t_k = R − σ₀² 4^{-k}`, capped at `R − min_gap`.
    pub fn schedule(&self, horizon: f64) -> Vec<f64> {
        let s0 = self.sigma0_frac * horizon;
        let mut out: Vec<f64> = (0..self.samples)
            .map(|k| horizon - (s0 * 0.5_f64.powi(k as i32)).powi(2))
            .map(|t| t.min(horizon - self.min_gap))
            .collect();
        out.dedup();
        out
    }
}

/// Value at `σ = 0` of the degree-`fit` fit and `|fit − check|` as error estimate.
pub fn extrapolate_sigma(sigmas: &[f64], values: &[f64], opts: &ExtrapolationOptions) -> (f64, f64) {
    let fit = polyfit_at_zero(sigmas, values, opts.fit_degree);
    let check = polyfit_at_zero(sigmas, values, opts.check_degree);
    (fit, (fit - check).abs())
}

#[derive(Clone, Debug)]
pub struct LimitExtraction {
    pub limit_p3: CubicForm,
    pub extrapolation_error_estimate: f64,
    /// Error estimates per monomial, in lexicographic triple order.
    pub per_coefficient: Vec<f64>,
    pub samples_used: usize,
    pub horizon: f64,
}

/// Limit of `P3|_t` as `t → R` along `v` with default options and gauge.
pub fn extract_limit(sf: &StandardFormPoly, v: &DVector<f64>) -> Result<LimitExtraction> {
    extract_limit_with(sf, v, &ExtrapolationOptions::default(), &SymmetricGauge)
}

/// Fits every coefficient of `P3|_t` as a polynomial in `σ = √(R − t)` and
/// evaluates the fit at `σ = 0`.
pub fn extract_limit_with(
    sf: &StandardFormPoly,
    v: &DVector<f64>,
    opts: &ExtrapolationOptions,
    gauge: &dyn Gauge,
) -> Result<LimitExtraction> {
    if v.len() != sf.n {
        return Err(PsrError::DimensionMismatch {
            expected: sf.n,
            got: v.len(),
        });
    }
    check_unit(v)?;
    let a = sf.p3.value(v.as_slice());
    let horizon = horizon_r(a.clamp(-BOUND, BOUND))?;
    let schedule = opts.schedule(horizon);
    let trace = evolve(sf, v, &schedule, gauge)?;
    let kept: Vec<&EvolutionSample> = trace
        .samples
        .iter()
        .filter(|s| s.condition <= opts.max_condition)
        .collect();
    if kept.len() < opts.fit_degree.max(opts.check_degree) + 1 {
        return Err(PsrError::ExtrapolationUnstable {
            estimate: f64::INFINITY,
            per_coefficient: Vec::new(),
        });
    }
    let sigmas: Vec<f64> = kept.iter().map(|s| (horizon - s.t).sqrt()).collect();
    let mut terms = Vec::new();
    let mut per_coefficient = Vec::new();
    for (i, j, k) in triples(sf.n) {
        let values: Vec<f64> = kept.iter().map(|s| s.sf.p3.coeff(i, j, k)).collect();
        let (value, est) = extrapolate_sigma(&sigmas, &values, opts);
        terms.push(((i, j, k), value));
        per_coefficient.push(est);
    }
    let estimate = per_coefficient.iter().copied().fold(0.0, f64::max);
    if !(estimate <= opts.tolerance) {
        return Err(PsrError::ExtrapolationUnstable { estimate, per_coefficient });
    }
    Ok(LimitExtraction {
        limit_p3: CubicForm::from_terms(sf.n, terms)?,
        extrapolation_error_estimate: estimate,
        per_coefficient,
        samples_used: kept.len(),
        horizon,
    })
}

/// Coefficients of `x³ − x(λv² + χvw + μw²) + Θ_{v³}v³ + Θ_{v²w}v²w + Θ_{vw²}vw² + Θ_{w³}w³`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dim2Coefficients {
    pub lambda: f64,
    pub chi: f64,
    pub mu: f64,
    pub theta_vvv: f64,
    pub theta_vvw: f64,
    pub theta_vww: f64,
    pub theta_www: f64,
}

impl Dim2Coefficients {
    pub fn as_array(&self) -> [f64; 7] {
        [
            self.lambda,
            self.chi,
            self.mu,
            self.theta_vvv,
            self.theta_vvw,
            self.theta_vww,
            self.theta_www,
        ]
    }
}

fn check_dim2_r(a: f64, r: f64) -> Result<f64> {
    let horizon = horizon_r(a)?;
    if !(r >= 0.0 && r < horizon) {
        return Err(PsrError::OutOfRange(format!("r = {r} not in [0, {horizon})")));
    }
    Ok(horizon)
}

/// `P3 = c v³ + q v²w + b vw² + a w³` on coordinates `(v, w)`.
pub fn dim2_p3(a: f64, b: f64, c: f64, q: f64) -> CubicForm {
    CubicForm::from_terms(2, [((0, 0, 0), c), ((0, 0, 1), q), ((0, 1, 1), b), ((1, 1, 1), a)]).expect("dim 2")
}

/// Closed-form coefficients of the dimension-2 form transported along the
/// `w`-ray with the unnormalized frame `E₁ = β^{1/6}(3 − r²)·1`.
pub fn dim2_intermediate_oracle(a: f64, b: f64, c: f64, q: f64, r: f64) -> Result<Dim2Coefficients> {
    check_dim2_r(a, r)?;
    let be = beta(a, r);
    let sb = be.sqrt();
    let k = 3.0 - r * r;
    let k2 = k * k;
    let k3 = k2 * k;
    let r2 = r * r;
    let r3 = r2 * r;
    Ok(Dim2Coefficients {
        lambda: -3.0 * b * b * r2 * r2 + (1.0 - q * r) * k2,
        chi: -18.0 * b * r * be,
        mu: 3.0 * (3.0 - 9.0 * a * r + r2) * be,
        theta_vvv: (-b * b * b * r3 * r3 + b * r2 * k2 + c * k3) * sb,
        theta_vvw: (3.0 * b * b * r3 * r2 * (2.0 - 3.0 * a * r) - r * (2.0 - 3.0 * a * r) * k2 + q * k3) * sb,
        theta_vww: 9.0 * b * (3.0 + r2 - 3.0 * a * r3) * be * sb,
        theta_www: ((2.0 - 27.0 * a * a) * r3 + 27.0 * a * r2 - 18.0 * r + 27.0 * a) * be * sb,
    })
}

/// The same coefficients computed by pulling `h` back through `[γ(r) | C·E₁]`.
pub fn dim2_e1_pullback(a: f64, b: f64, c: f64, q: f64, r: f64) -> Result<Dim2Coefficients> {
    check_dim2_r(a, r)?;
    let h = StandardFormPoly::new(dim2_p3(a, b, c, q)).assemble();
    let w = DVector::from_vec(vec![0.0, 1.0]);
    let p = curve_point(a, &w, r);
    let frame = tangent_frame(&h, &p)? * (beta(a, r).powf(1.0 / 6.0) * (3.0 - r * r));
    let mut m = DMatrix::zeros(3, 3);
    m.set_column(0, &p);
    m.view_mut((0, 1), (3, 2)).copy_from(&frame);
    let g = h.pullback_matrix(&m)?;
    Ok(Dim2Coefficients {
        lambda: -g.coeff(0, 1, 1),
        chi: -g.coeff(0, 1, 2),
        mu: -g.coeff(0, 2, 2),
        theta_vvv: g.coeff(1, 1, 1),
        theta_vvw: g.coeff(1, 1, 2),
        theta_vww: g.coeff(1, 2, 2),
        theta_www: g.coeff(2, 2, 2),
    })
}

/// `(a, q, c)` for which `λ` vanishes at `r = R`.
pub fn dim2_lambda_zero_params(b: f64, horizon: f64) -> (f64, f64, f64) {
    let r = horizon;
    let k = 3.0 - r * r;
    let r4 = r.powi(4);
    let a = a_from_horizon(r);
    let q = (-3.0 * b * b * r4 + k * k) / (r * k * k);
    let c = b * r * r * (b * b * r4 - k * k) / (k * k * k);
    (a, q, c)
}

/// Limit of `χ²/(λμ)` at `r → R` when `λ(R) = 0`.
pub fn dim2_ratio_limit(b: f64, horizon: f64) -> f64 {
    let r = horizon;
    let r4 = r.powi(4);
    108.0 * b * b * r4 / (3.0 * b * b * r4 * (9.0 + r * r) + (3.0 - r * r).powi(3))
}

/// Largest `b` for which the `λ(R) = 0` family stays closed.
pub fn dim2_b_bound(horizon: f64) -> f64 {
    let r = horizon;
    (3.0 - r * r) * (12.0 * r * r - 9.0).sqrt() / (3.0 * r.powi(3))
}

/// The rotation `M(f) = (1/√(1+f²)) [[f, −1], [1, f]]`.
pub fn rotation_m(f: f64) -> DMatrix<f64> {
    let s = 1.0 / (1.0 + f * f).sqrt();
    DMatrix::from_row_slice(2, 2, &[f * s, -s, s, f * s])
}

/// Rotated form and critical-point data for the `λ(R) = 0` family.
#[derive(Clone, Debug)]
pub struct RotationCertificate {
    pub f: f64,
    pub original: CubicForm,
    pub rotated: CubicForm,
    /// Closed-form `v²w` and `w³` coefficients of the rotated form.
    pub predicted_vvw: f64,
    pub predicted_www: f64,
    /// Closed-form isolated solution on the `w`-axis.
    pub predicted_first: DVector<f64>,
    /// Closed-form symmetric pair `(±v, w)`; `NaN` entries if not real.
    pub predicted_pair: [DVector<f64>; 2],
    /// Solutions of `∇P̃3(p) = (2/√3) p` found numerically.
    pub computed: Vec<CriticalSolution>,
    pub b_bound: f64,
}

impl RotationCertificate {
    pub fn first_norm(&self) -> f64 {
        self.predicted_first.norm()
    }

    pub fn pair_norm(&self) -> f64 {
        self.predicted_pair[0].norm()
    }
}

/// Rotates `P3` of the `λ(R) = 0` family by `M(f)`, `f = (3 − R²)/(bR³)`, which
/// removes the `vw²` term, and solves for the critical points of the result.
pub fn dim2_rotation_oracle(b: f64, horizon: f64) -> Result<RotationCertificate> {
    let r = horizon;
    if !(b > 0.0) {
        return Err(PsrError::OutOfRange(format!("b must be positive, got {b}")));
    }
    if !(r > 0.5 * SQRT_3 && r < SQRT_3) {
        return Err(PsrError::OutOfRange(format!("R = {r} not in (√3/2, √3)")));
    }
    let (a, q, c) = dim2_lambda_zero_params(b, r);
    let original = dim2_p3(a, b, c, q);
    let f = (3.0 - r * r) / (b * r.powi(3));
    let rotated = original.pullback_matrix(&rotation_m(f))?;
    let r2 = r * r;
    let r4 = r2 * r2;
    let r6 = r4 * r2;
    let k = 3.0 - r2;
    let kk = (9.0 - 6.0 * r2 + r4 + b * b * r6).sqrt();
    let poly = 9.0 - 15.0 * r2 + 7.0 * r4 + (b * b - 1.0) * r6;
    let predicted_vvw = kk / (k * r);
    let predicted_www = -poly * kk / (k.powi(3) * r.powi(3));
    let first_w = -2.0 * k.powi(3) * r.powi(3) / (3.0 * SQRT_3 * poly * kk);
    let pv = (27.0 - 27.0 * r2 + 9.0 * r4 + (3.0 * b * b - 1.0) * r6).sqrt() / (SQRT_3 * kk);
    let pw = k * r / (SQRT_3 * kk);
    let computed = critical_points_with_norms(&rotated, BOUND)?;
    Ok(RotationCertificate {
        f,
        original,
        rotated,
        predicted_vvw,
        predicted_www,
        predicted_first: DVector::from_vec(vec![0.0, first_w]),
        predicted_pair: [DVector::from_vec(vec![pv, pw]), DVector::from_vec(vec![-pv, pw])],
        computed,
        b_bound: dim2_b_bound(r),
    })
}
