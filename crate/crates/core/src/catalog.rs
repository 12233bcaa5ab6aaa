//! The catalog of limit polynomials, the eigenvalue bound on the `F_i`,
//! classification of extracted limits, the transitive group action on the
//! generic limit, and the first-variation symmetry bound.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use crate::cubic::{triples, CubicForm, StandardFormPoly};
use crate::error::{PsrError, Result};
use crate::hyperbolicity::{newton_sphere, sphere_max, start_directions, DEFAULT_SEED};
use crate::linalg::{householder_to, sym_eigen_desc};
use crate::{BOUND, SQRT_3};

/// Default tolerance for classification residuals and eigenvalue targets.
pub const CLASS_TOL: f64 = 1e-4;

/// Slack allowed on the eigenvalue bound when assembling catalog forms.
pub const F_BOUND_TOL: f64 = 1e-8;

const W_SLICE_HIGH: f64 = 2.0 / SQRT_3;
const W_SLICE_LOW: f64 = -1.0 / SQRT_3;

/// A catalog entry.
///
/// Coordinates are ordered `(s_1..s_m, u_1..u_{n-1-m}, w)` for `DimGe3`; the
/// two-dimensional forms use `(y, z)` with `y` first.
#[derive(Clone, Debug, PartialEq)]
pub enum LimitForm {
    Dim1,
    Dim2A,
    Dim2B,
    DimGe3 { m: usize, f: Vec<DMatrix<f64>> },
}

impl LimitForm {
    pub fn variant_name(&self) -> &'static str {
        match self {
            LimitForm::Dim1 => "DIM1",
            LimitForm::Dim2A => "DIM2_A",
            LimitForm::Dim2B => "DIM2_B",
            LimitForm::DimGe3 { .. } => "DIM_GE3",
        }
    }

    pub fn m(&self) -> usize {
        match self {
            LimitForm::Dim1 | LimitForm::Dim2A => 0,
            LimitForm::Dim2B => 1,
            LimitForm::DimGe3 { m, .. } => *m,
        }
    }

    pub fn f(&self) -> &[DMatrix<f64>] {
        match self {
            LimitForm::DimGe3 { f, .. } => f,
            _ => &[],
        }
    }
}

/// `Σ s_i⟨u, F_i u⟩ + ((2/√3)|s|² − (1/√3)|u|²) w − (2/(3√3)) w³` without validating `F`.
fn assemble_ge3(n: usize, m: usize, f: &[DMatrix<f64>]) -> Result<CubicForm> {
    if n == 0 || m > n - 1 {
        return Err(PsrError::OutOfRange(format!("m = {m} not in [0, {}]", n.saturating_sub(1))));
    }
    if f.len() != m {
        return Err(PsrError::DimensionMismatch { expected: m, got: f.len() });
    }
    let d = n - 1 - m;
    for fi in f {
        if fi.nrows() != d || fi.ncols() != d {
            return Err(PsrError::DimensionMismatch {
                expected: d,
                got: fi.nrows().max(fi.ncols()),
            });
        }
    }
    let w = n - 1;
    let mut terms = Vec::new();
    for (i, fi) in f.iter().enumerate() {
        for a in 0..d {
            terms.push(((i, m + a, m + a), fi[(a, a)]));
            for b in a + 1..d {
                terms.push(((i, m + a, m + b), fi[(a, b)] + fi[(b, a)]));
            }
        }
        terms.push(((i, i, w), W_SLICE_HIGH));
    }
    for a in 0..d {
        terms.push(((m + a, m + a, w), W_SLICE_LOW));
    }
    terms.push(((w, w, w), -BOUND));
    CubicForm::from_terms(n, terms)
}

/// The standard-form polynomial of a catalog entry in dimension `n`.
pub fn canonical_polynomial(form: &LimitForm, n: usize) -> Result<StandardFormPoly> {
    let p3 = match form {
        LimitForm::Dim1 => {
            if n != 1 {
                return Err(PsrError::DimensionMismatch { expected: 1, got: n });
            }
            CubicForm::from_terms(1, [((0, 0, 0), -BOUND)])?
        }
        LimitForm::Dim2A | LimitForm::Dim2B => {
            if n != 2 {
                return Err(PsrError::DimensionMismatch { expected: 2, got: n });
            }
            let yzz = if *form == LimitForm::Dim2A { W_SLICE_LOW } else { W_SLICE_HIGH };
            CubicForm::from_terms(2, [((0, 0, 0), -BOUND), ((0, 1, 1), yzz)])?
        }
        LimitForm::DimGe3 { m, f } => {
            if n < 3 {
                return Err(PsrError::DimensionMismatch { expected: 3, got: n });
            }
            let p3 = assemble_ge3(n, *m, f)?;
            let bound = validate_f(f)?;
            if bound.max_abs_eigenvalue > 1.0 + F_BOUND_TOL {
                return Err(PsrError::InvalidF(format!(
                    "spectral radius {} exceeds 1 at c = {:?}",
                    bound.max_abs_eigenvalue,
                    bound.witness_c.as_slice()
                )));
            }
            p3
        }
    };
    Ok(StandardFormPoly::new(p3))
}

/// Certified supremum over unit `c` of the spectral radius of `Σ c_i F_i`.
#[derive(Clone, Debug)]
pub struct FBound {
    pub max_abs_eigenvalue: f64,
    pub witness_c: DVector<f64>,
}

fn combination(f: &[DMatrix<f64>], c: &DVector<f64>) -> DMatrix<f64> {
    let d = f[0].nrows();
    f.iter().zip(c.iter()).fold(DMatrix::zeros(d, d), |acc, (fi, &ci)| acc + fi * ci)
}

/// Spectral radius of `Σ c_i F_i` and a unit eigenvector attaining it.
fn extremal_pair(f: &[DMatrix<f64>], c: &DVector<f64>) -> (f64, DVector<f64>) {
    let (vals, vecs) = sym_eigen_desc(&combination(f, c));
    let last = vals.len() - 1;
    let k = if vals[0].abs() >= vals[last].abs() { 0 } else { last };
    (vals[k].abs(), vecs.column(k).into_owned())
}

/// Supremum of the spectral radius of `Σ c_i F_i` over the unit sphere in `c`.
///
/// Grid samples seed an alternating ascent `c ← (xᵀF_i x)_i / ‖·‖`, where `x`
/// is the extremal eigenvector, which never decreases the objective.
pub fn validate_f(f: &[DMatrix<f64>]) -> Result<FBound> {
    let m = f.len();
    if m == 0 {
        return Ok(FBound {
            max_abs_eigenvalue: 0.0,
            witness_c: DVector::zeros(0),
        });
    }
    let d = f[0].nrows();
    for fi in f {
        if fi.nrows() != d || fi.ncols() != d {
            return Err(PsrError::DimensionMismatch {
                expected: d,
                got: fi.nrows().max(fi.ncols()),
            });
        }
    }
    let mut e1 = DVector::zeros(m);
    e1[0] = 1.0;
    if d == 0 {
        return Ok(FBound {
            max_abs_eigenvalue: 0.0,
            witness_c: e1,
        });
    }
    let mut scored: Vec<(f64, DVector<f64>)> = start_directions(m, 4096, DEFAULT_SEED)
        .into_iter()
        .map(|c| (extremal_pair(f, &c).0, c))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = scored[0].clone();
    for (_, c0) in scored.iter().take(8) {
        let mut c = c0.clone();
        let (mut val, mut x) = extremal_pair(f, &c);
        for _ in 0..500 {
            let g = DVector::from_iterator(m, f.iter().map(|fi| x.dot(&(fi * &x))));
            let gn = g.norm();
            if gn == 0.0 {
                break;
            }
            let next = g / gn;
            let (nv, nx) = extremal_pair(f, &next);
            if nv <= val * (1.0 + 1e-15) {
                if nv > val {
                    val = nv;
                    c = next;
                }
                break;
            }
            val = nv;
            x = nx;
            c = next;
        }
        if val > best.0 {
            best = (val, c);
        }
    }
    Ok(FBound {
        max_abs_eigenvalue: best.0,
        witness_c: best.1,
    })
}

/// Result of matching a limit polynomial against the catalog.
#[derive(Clone, Debug)]
pub struct ClassificationResult {
    pub form: LimitForm,
    /// Orthogonal `O` with `limit_p3 ∘ O ≈ canonical_polynomial(form)`.
    pub aligning_map: DMatrix<f64>,
    pub residual: f64,
}

struct Candidate {
    m: usize,
    f: Vec<DMatrix<f64>>,
    map: DMatrix<f64>,
    residual: f64,
    key: Vec<f64>,
}

fn reflect_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Cayley map of the skew matrix built from `coords`, an orthogonal matrix.
fn cayley(n: usize, coords: &[f64]) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(n, n);
    let mut idx = 0;
    for i in 0..n {
        for j in i + 1..n {
            k[(i, j)] = coords[idx];
            k[(j, i)] = -coords[idx];
            idx += 1;
        }
    }
    let id = DMatrix::<f64>::identity(n, n);
    let inv = (&id - &k * 0.5).try_inverse().expect("I − K/2 is invertible for skew K");
    inv * (&id + &k * 0.5)
}

/// `m`, `F` and the coefficient defect of `p3 ∘ map` against the catalog form it reads off.
fn alignment_defect(p3: &CubicForm, map: &DMatrix<f64>, m: usize) -> Result<(Vec<DMatrix<f64>>, DVector<f64>)> {
    let n = p3.dim();
    let aligned = p3.pullback_matrix(map)?;
    let d = n - 1 - m;
    let f: Vec<DMatrix<f64>> = (0..m)
        .map(|i| DMatrix::from_fn(d, d, |a, b| 3.0 * aligned.tensor_entry(i, m + a, m + b)))
        .collect();
    let canonical = assemble_ge3(n, m, &f)?;
    let defect = DVector::from_iterator(
        triples(n).len(),
        triples(n).into_iter().map(|(i, j, k)| aligned.coeff(i, j, k) - canonical.coeff(i, j, k)),
    );
    Ok((f, defect))
}

/// Gauss–Newton on `map ← map · cayley(K)` minimizing the coefficient defect.
///
/// The extremal direction of a limit polynomial is a degenerate maximum, so
/// the initial axis is only accurate to the square root of the coefficient
/// error; the defect itself depends linearly on the rotation.
fn refine_alignment(p3: &CubicForm, map: DMatrix<f64>, m: usize) -> Result<DMatrix<f64>> {
    let n = p3.dim();
    let dof = n * (n - 1) / 2;
    if dof == 0 {
        return Ok(map);
    }
    const STEP: f64 = 1e-5;
    let mut map = map;
    let mut defect = alignment_defect(p3, &map, m)?.1;
    for _ in 0..30 {
        let size = defect.norm();
        if size == 0.0 {
            break;
        }
        let mut jac = DMatrix::zeros(defect.len(), dof);
        for col in 0..dof {
            let mut coords = vec![0.0; dof];
            coords[col] = STEP;
            let plus = alignment_defect(p3, &(&map * cayley(n, &coords)), m)?.1;
            coords[col] = -STEP;
            let minus = alignment_defect(p3, &(&map * cayley(n, &coords)), m)?.1;
            jac.set_column(col, &((plus - minus) / (2.0 * STEP)));
        }
        let delta = crate::linalg::lstsq(&jac, &(-&defect), 1e-3);
        let mut scale = 1.0;
        let mut improved = false;
        for _ in 0..20 {
            let coords: Vec<f64> = delta.iter().map(|x| x * scale).collect();
            let trial = &map * cayley(n, &coords);
            let trial_defect = alignment_defect(p3, &trial, m)?.1;
            if trial_defect.norm() < size {
                map = trial;
                defect = trial_defect;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if !improved || defect.norm() > 0.999 * size {
            break;
        }
    }
    Ok(map)
}

/// Tries the unit vector `e` with `P3(e) = −2/(3√3)` as the `w`-axis.
fn try_axis(p3: &CubicForm, e: &DVector<f64>, tol: f64) -> std::result::Result<Candidate, String> {
    let n = p3.dim();
    let o1 = householder_to(e);
    let rotated = p3.pullback_matrix(&o1).map_err(|e| e.to_string())?;
    let w = n - 1;
    let q = DMatrix::from_fn(w, w, |a, b| 3.0 * rotated.tensor_entry(a, b, w));
    let (vals, vecs) = sym_eigen_desc(&q);
    let threshold = 0.5 * (W_SLICE_HIGH + W_SLICE_LOW);
    let m = vals.iter().filter(|&&x| x > threshold).count();
    let mut o2 = DMatrix::identity(n, n);
    o2.view_mut((0, 0), (w, w)).copy_from(&vecs);
    let map = refine_alignment(p3, &o1 * &o2, m).map_err(|e| e.to_string())?;
    let aligned = p3.pullback_matrix(&map).map_err(|e| e.to_string())?;
    let q = DMatrix::from_fn(w, w, |a, b| 3.0 * aligned.tensor_entry(a, b, w));
    let (vals, _) = sym_eigen_desc(&q);
    for (k, &x) in vals.iter().enumerate() {
        let target = if k < m { W_SLICE_HIGH } else { W_SLICE_LOW };
        if (x - target).abs() > tol {
            return Err(format!("w-slice eigenvalue {x} is not within {tol} of {target}"));
        }
    }
    let (f, defect) = alignment_defect(p3, &map, m).map_err(|e| e.to_string())?;
    let residual = defect.amax();
    if residual > tol {
        return Err(format!("residual {residual} after alignment with m = {m}"));
    }
    let bound = validate_f(&f).map_err(|e| e.to_string())?;
    if bound.max_abs_eigenvalue > 1.0 + tol {
        return Err(format!("F violates the eigenvalue bound: {}", bound.max_abs_eigenvalue));
    }
    let key = map.column(w).iter().copied().collect();
    Ok(Candidate {
        m,
        f,
        map,
        residual,
        key,
    })
}

/// Unit vectors with `P3(e) = −2/(3√3)` up to `tol`, Newton-refined.
fn w_axis_candidates(p3: &CubicForm, tol: f64) -> Vec<DVector<f64>> {
    let res = sphere_max(p3);
    let mut out: Vec<DVector<f64>> = Vec::new();
    let mut pts: Vec<DVector<f64>> = res.argmax_points.clone();
    pts.extend(res.critical_points.iter().map(|c| c.direction.clone()));
    for u in pts {
        let refined = newton_sphere(p3, &u, 50);
        let u = if p3.value(refined.as_slice()) >= p3.value(u.as_slice()) - 1e-12 {
            refined
        } else {
            u
        };
        if p3.value(u.as_slice()) < BOUND - tol {
            continue;
        }
        let e = -u;
        if out.iter().all(|o| (o - &e).norm() > 1e-6) {
            out.push(e);
        }
    }
    out
}

/// Classifies with the default tolerance.
pub fn classify(limit_p3: &CubicForm) -> Result<ClassificationResult> {
    classify_with(limit_p3, CLASS_TOL)
}

/// Matches `limit_p3` against the catalog.
///
/// Every extremal direction is tried as the `w`-axis. Among consistent
/// candidates the largest `m` wins, then the smallest residual, then the
/// lexicographically smallest axis.
pub fn classify_with(limit_p3: &CubicForm, tol: f64) -> Result<ClassificationResult> {
    let n = limit_p3.dim();
    if n == 0 {
        return Err(PsrError::NoCatalogMatch("dimension 0".into()));
    }
    let max = sphere_max(limit_p3).max_value;
    if (max - BOUND).abs() > tol {
        return Err(PsrError::NoCatalogMatch(format!(
            "sphere maximum {max} is not within {tol} of {BOUND}"
        )));
    }
    let axes = w_axis_candidates(limit_p3, tol);
    let mut first_failure = None;
    let mut best: Option<Candidate> = None;
    for e in &axes {
        match try_axis(limit_p3, e, tol) {
            Ok(c) => {
                let better = match &best {
                    None => true,
                    Some(b) => c
                        .m
                        .cmp(&b.m)
                        .then(b.residual.total_cmp(&c.residual))
                        .then(reflect_cmp(&b.key, &c.key))
                        .is_gt(),
                };
                if better {
                    best = Some(c);
                }
            }
            Err(msg) => {
                first_failure.get_or_insert(msg);
            }
        }
    }
    let Some(best) = best else {
        return Err(PsrError::NoCatalogMatch(
            first_failure.unwrap_or_else(|| "no extremal direction found".into()),
        ));
    };
    let (form, map) = match n {
        1 => (LimitForm::Dim1, best.map),
        2 => {
            let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
            let form = if best.m == 0 { LimitForm::Dim2A } else { LimitForm::Dim2B };
            (form, best.map * swap)
        }
        _ => (LimitForm::DimGe3 { m: best.m, f: best.f }, best.map),
    };
    Ok(ClassificationResult {
        form,
        aligning_map: map,
        residual: best.residual,
    })
}

/// `h̄ = x³ − x(|s|² + w²) − (1/√3)|s|²w − (2/(3√3))w³` on `(x, s, w)`, `n = 1 + |s| + 1` variables.
pub fn eq110_ambient(n: usize) -> Result<CubicForm> {
    let p3 = assemble_ge3(n, 0, &[])?;
    Ok(StandardFormPoly::new(p3).assemble())
}

/// Product in `R_{>0} ⋉ R^{n-1}`: `(λ₁, v₁)(λ₂, v₂) = (λ₁λ₂, v₁ + λ₁^{3/2} v₂)`.
pub fn group_multiply(g1: (f64, &DVector<f64>), g2: (f64, &DVector<f64>)) -> Result<(f64, DVector<f64>)> {
    let ((l1, v1), (l2, v2)) = (g1, g2);
    if !(l1 > 0.0 && l2 > 0.0) {
        return Err(PsrError::OutOfRange(format!("λ must be positive, got {l1}, {l2}")));
    }
    if v1.len() != v2.len() {
        return Err(PsrError::DimensionMismatch {
            expected: v1.len(),
            got: v2.len(),
        });
    }
    Ok((l1 * l2, v1 + v2 * l1.powf(1.5)))
}

/// Matrix of the action of `(λ, v)` on `(x, s, w)`.
pub fn group_action_matrix(lambda: f64, v: &DVector<f64>) -> Result<DMatrix<f64>> {
    if !(lambda > 0.0) {
        return Err(PsrError::OutOfRange(format!("λ must be positive, got {lambda}")));
    }
    let k = v.len();
    let dim = k + 2;
    let wi = k + 1;
    let vv = v.norm_squared();
    let l = lambda;
    let li = lambda.powi(-2);
    let lh = lambda.powf(-0.5);
    let s3 = SQRT_3;
    let r2 = 2f64.sqrt();
    let q2 = 2f64.powf(0.25);
    let c54 = 2f64.powf(1.25);
    let mut a = DMatrix::zeros(dim, dim);
    a[(0, 0)] = l * 2.0 / 3.0 + li * (1.0 / 3.0 + vv * r2 / 3.0);
    a[(0, wi)] = l * 2.0 / (3.0 * s3) + li * (-2.0 / (3.0 * s3) + vv * r2 / (3.0 * s3));
    a[(wi, 0)] = l / s3 + li * (-1.0 / s3 - vv * r2 / s3);
    a[(wi, wi)] = l / 3.0 + li * (2.0 / 3.0 - vv * r2 / 3.0);
    for i in 0..k {
        a[(0, 1 + i)] = -li * c54 / 3.0 * v[i];
        a[(wi, 1 + i)] = li * c54 / s3 * v[i];
        a[(1 + i, 1 + i)] = lh;
        a[(1 + i, 0)] = -lh * q2 * v[i];
        a[(1 + i, wi)] = -lh * q2 / s3 * v[i];
    }
    Ok(a)
}

/// Image of `p = (x, s, w)` under `(λ, v)`; leaves `h̄` invariant.
pub fn group_action(lambda: f64, v: &DVector<f64>, p: &DVector<f64>) -> Result<DVector<f64>> {
    if p.len() != v.len() + 2 {
        return Err(PsrError::DimensionMismatch {
            expected: v.len() + 2,
            got: p.len(),
        });
    }
    Ok(group_action_matrix(lambda, v)? * p)
}

/// Linear map `e ↦ δP3(·)(e)` with `L = 0`, as a matrix with one row per cubic
/// monomial of `y` and one column per direction `e_j`.
pub fn first_variation_matrix(sf: &StandardFormPoly) -> DMatrix<f64> {
    let n = sf.n;
    let t = |a: usize, b: usize, c: usize| sf.p3.tensor_entry(a, b, c);
    // S_abc(j) = −(2/3) δ_ab δ_cj + (9/2) Σ_k T_abk T_cjk before symmetrization in (a, b, c).
    let raw = |a: usize, b: usize, c: usize, j: usize| {
        let mut s = if a == b && c == j { -2.0 / 3.0 } else { 0.0 };
        s += 4.5 * (0..n).map(|k| t(a, b, k) * t(c, j, k)).sum::<f64>();
        s
    };
    let monomials = triples(n);
    DMatrix::from_fn(monomials.len(), n, |row, j| {
        let (a, b, c) = monomials[row];
        let perms = [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)];
        perms.iter().map(|&(p, q, r)| raw(p, q, r, j)).sum::<f64>()
    })
}

/// Kernel dimension of the first-variation map, a lower bound on the
/// dimension of the continuous symmetry group.
///
/// Singular values count as zero below `1e-8` relative to the larger of `σ_max`
/// and the unit scale of the `⟨y,y⟩⟨y,e⟩` term, so that a map which vanishes
/// identically has full kernel.
pub fn symmetry_dim_lower_bound(sf: &StandardFormPoly) -> usize {
    let m = first_variation_matrix(sf);
    let sv = m.singular_values();
    let smax = sv.iter().copied().fold(1.0, f64::max);
    sf.n - sv.iter().filter(|&&s| s > 1e-8 * smax).count()
}
