//! Hyperbolicity of points, closedness and singularity at infinity.
//!
//! A standard-form cubic `x³ − x⟨y,y⟩ + P3(y)` defines a closed manifold iff
//! `max_{‖y‖=1} P3(y) ≤ 2/(3√3)`, and the manifold is singular at infinity iff
//! the maximum is attained with equality.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::cubic::{CubicForm, StandardFormPoly};
use crate::error::{PsrError, Result};
use crate::linalg::{lstsq, sym_eigen_desc};
use crate::BOUND;

/// Default seed for the random part of the multi-start schedule.
pub const DEFAULT_SEED: u64 = 0x5053_5231;

/// Default tolerance on `|max − 2/(3√3)|` for singularity at infinity.
pub const DEFAULT_SING_TOL: f64 = 1e-6;

/// Residual bound for a point to be reported as a critical point.
pub const CRITICAL_RESIDUAL_TOL: f64 = 1e-8;

/// Distance below which two critical points are identified.
pub const DEDUP_DIST: f64 = 1e-6;

/// Relative radius within which critical solutions are merged.
pub const CLUSTER_DIST: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct SphereMaxOptions {
    /// Number of starts; at least `64·n` are always used.
    pub starts: usize,
    pub seed: u64,
}

impl Default for SphereMaxOptions {
    fn default() -> Self {
        Self {
            starts: 0,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoint {
    pub direction: DVector<f64>,
    pub value: f64,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct SphereMaxResult {
    pub max_value: f64,
    pub argmax_points: Vec<DVector<f64>>,
    pub critical_points: Vec<CriticalPoint>,
    pub starts_used: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClosednessStatus {
    ClosedRegular,
    ClosedSingularAtInfinity,
    NotClosed,
}

impl ClosednessStatus {
    pub fn is_closed(self) -> bool {
        self != ClosednessStatus::NotClosed
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClosednessStatus::ClosedRegular => "CLOSED_REGULAR",
            ClosednessStatus::ClosedSingularAtInfinity => "CLOSED_SINGULAR_AT_INFINITY",
            ClosednessStatus::NotClosed => "NOT_CLOSED",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClosednessVerdict {
    pub status: ClosednessStatus,
    pub max_value: f64,
    /// `max_value − 2/(3√3)`.
    pub margin: f64,
    pub argmax: Vec<DVector<f64>>,
}

/// Counts of positive, negative and zero eigenvalues of `−∂²h_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signature {
    pub pos: usize,
    pub neg: usize,
    pub zero: usize,
}

impl Signature {
    /// Lorentz signature: exactly one negative and no zero eigenvalue.
    pub fn is_hyperbolic(&self) -> bool {
        self.neg == 1 && self.zero == 0
    }
}

/// Signature of `−∂²h_p` with zero threshold `1e-9·‖∂²h_p‖`.
pub fn hessian_signature(h: &CubicForm, p: &DVector<f64>) -> Result<Signature> {
    let value = h.evaluate(p)?;
    if value <= 0.0 {
        return Err(PsrError::NonPositiveValue(value));
    }
    let neg_hess = -h.hessian(p)?;
    let (vals, _) = sym_eigen_desc(&neg_hess);
    let scale = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let thr = 1e-9 * scale;
    let mut sig = Signature { pos: 0, neg: 0, zero: 0 };
    for &v in vals.iter() {
        if v > thr {
            sig.pos += 1;
        } else if v < -thr {
            sig.neg += 1;
        } else {
            sig.zero += 1;
        }
    }
    Ok(sig)
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut c = 2u64;
    while primes.len() < count {
        if primes.iter().take_while(|&&p| p * p <= c).all(|&p| c % p != 0) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base) as f64 * inv;
        k /= base;
        inv /= base as f64;
    }
    out
}

/// Deterministic start directions on the unit sphere of `R^n`: the signed
/// coordinate axes, Halton points mapped through Box–Muller, then Gaussian
/// draws from a seeded ChaCha generator.
pub fn start_directions(n: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let count = count.max(2 * n);
    let mut out = Vec::with_capacity(count);
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = DVector::zeros(n);
            e[i] = s;
            out.push(e);
        }
    }
    let halton = (count - out.len()) / 2;
    let pairs = n.div_ceil(2);
    let primes = first_primes(2 * pairs);
    for k in 1..=halton as u64 {
        let mut v = DVector::zeros(n);
        for p in 0..pairs {
            let u1 = radical_inverse(k, primes[2 * p]).max(1e-300);
            let u2 = radical_inverse(k, primes[2 * p + 1]);
            let r = (-2.0 * u1.ln()).sqrt();
            let a = std::f64::consts::TAU * u2;
            v[2 * p] = r * a.cos();
            if 2 * p + 1 < n {
                v[2 * p + 1] = r * a.sin();
            }
        }
        push_normalized(&mut out, v);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        let v = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        push_normalized(&mut out, v);
    }
    out
}

fn push_normalized(out: &mut Vec<DVector<f64>>, v: DVector<f64>) {
    let norm = v.norm();
    if norm > 1e-12 {
        out.push(v / norm);
    }
}

fn tensor_norm(p3: &CubicForm) -> f64 {
    let n = p3.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                s += p3.tensor_entry(i, j, k).powi(2);
            }
        }
    }
    s.sqrt()
}

/// `‖∇P3(x) − 3 P3(x) x‖`.
pub fn lagrange_residual(p3: &CubicForm, x: &DVector<f64>) -> f64 {
    let g = p3.grad(x.as_slice());
    let v = p3.value(x.as_slice());
    (g - x * (3.0 * v)).norm()
}

/// Shifted power iteration `x ← (∇P3(x) + αx)/‖·‖`, monotone for `α ≥ 6‖T‖`.
fn ascend(p3: &CubicForm, x0: &DVector<f64>, alpha: f64, iters: usize) -> DVector<f64> {
    let mut x = x0.clone();
    for _ in 0..iters {
        let g = p3.grad(x.as_slice());
        let mut y = g + &x * alpha;
        let norm = y.norm();
        if norm == 0.0 {
            break;
        }
        y /= norm;
        let step = (&y - &x).norm();
        x = y;
        if step < 1e-13 {
            break;
        }
    }
    x
}

/// Newton's method on the Lagrange system `∇P3(x) = μx`, `‖x‖ = 1`,
/// with an SVD pseudo-inverse so that degenerate critical sets are tolerated.
pub fn newton_sphere(p3: &CubicForm, x0: &DVector<f64>, iters: usize) -> DVector<f64> {
    let n = p3.dim();
    let mut x = x0.normalize();
    let mut best = x.clone();
    let mut best_res = lagrange_residual(p3, &x);
    for _ in 0..iters {
        if best_res < 1e-15 {
            break;
        }
        let g = p3.grad(x.as_slice());
        let h = p3.hess(x.as_slice());
        let mu = g.dot(&x);
        let mut j = DMatrix::zeros(n + 1, n + 1);
        j.view_mut((0, 0), (n, n)).copy_from(&(h - DMatrix::identity(n, n) * mu));
        for i in 0..n {
            j[(i, n)] = -x[i];
            j[(n, i)] = -x[i];
        }
        let mut f = DVector::zeros(n + 1);
        f.rows_mut(0, n).copy_from(&(g - &x * mu));
        f[n] = 0.5 * (1.0 - x.norm_squared());
        let d = lstsq(&j, &(-f), 1e-13);
        let next = (&x + d.rows(0, n)).normalize();
        if !next.iter().all(|v| v.is_finite()) {
            break;
        }
        x = next;
        let res = lagrange_residual(p3, &x);
        if res < best_res {
            best_res = res;
            best = x.clone();
        }
    }
    best
}

fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Greedy deduplication at Euclidean distance `tol`, keeping first occurrences.
fn dedup_points<T>(items: Vec<T>, key: impl Fn(&T) -> &DVector<f64>, tol: f64) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(items.len());
    for it in items {
        if out.iter().all(|o| (key(o) - key(&it)).norm() > tol) {
            out.push(it);
        }
    }
    out
}

/// Maximum of `P3` on the unit sphere with the default options.
pub fn sphere_max(p3: &CubicForm) -> SphereMaxResult {
    sphere_max_with(p3, &SphereMaxOptions::default())
}

/// Multi-start maximization of `P3` on the unit sphere.
///
/// Each start is driven uphill by a shifted power iteration and then polished
/// by Newton's method on the Lagrange system. Results do not depend on the
/// order in which starts are processed.
pub fn sphere_max_with(p3: &CubicForm, opts: &SphereMaxOptions) -> SphereMaxResult {
    let n = p3.dim();
    let count = opts.starts.max(64 * n);
    let starts = start_directions(n, count, opts.seed);
    let tnorm = tensor_norm(p3);
    if tnorm == 0.0 {
        let mut critical: Vec<CriticalPoint> = starts
            .iter()
            .map(|d| CriticalPoint {
                direction: d.clone(),
                value: 0.0,
                residual: 0.0,
            })
            .collect();
        critical.sort_by(|a, b| lex_cmp(&a.direction, &b.direction));
        return SphereMaxResult {
            max_value: 0.0,
            argmax_points: critical.iter().map(|c| c.direction.clone()).collect(),
            critical_points: critical,
            starts_used: starts.len(),
        };
    }
    let alpha = 6.0 * tnorm;
    let mut found: Vec<CriticalPoint> = starts
        .iter()
        .map(|s| {
            let a = ascend(p3, s, alpha, 400);
            let va = p3.value(a.as_slice());
            let b = newton_sphere(p3, &a, 80);
            let vb = p3.value(b.as_slice());
            let x = if vb >= va - 1e-12 * tnorm { b } else { a };
            CriticalPoint {
                value: p3.value(x.as_slice()),
                residual: lagrange_residual(p3, &x),
                direction: x,
            }
        })
        .collect();
    found.sort_by(|a, b| b.value.total_cmp(&a.value).then_with(|| lex_cmp(&a.direction, &b.direction)));
    let max_value = found[0].value;
    let mut critical: Vec<CriticalPoint> = dedup_points(
        found.into_iter().filter(|c| c.residual <= CRITICAL_RESIDUAL_TOL).collect(),
        |c| &c.direction,
        DEDUP_DIST,
    );
    let argmax_tol = 1e-9 * max_value.abs().max(1e-3);
    let mut argmax_points: Vec<DVector<f64>> = critical
        .iter()
        .filter(|c| c.value >= max_value - argmax_tol)
        .map(|c| c.direction.clone())
        .collect();
    argmax_points.sort_by(lex_cmp);
    critical.sort_by(|a, b| lex_cmp(&a.direction, &b.direction));
    SphereMaxResult {
        max_value,
        argmax_points,
        critical_points: critical,
        starts_used: starts.len(),
    }
}

/// Closedness verdict with the default optimizer options.
pub fn closedness(sf: &StandardFormPoly, sing_tol: f64) -> ClosednessVerdict {
    closedness_with(sf, sing_tol, &SphereMaxOptions::default())
}

pub fn closedness_with(sf: &StandardFormPoly, sing_tol: f64, opts: &SphereMaxOptions) -> ClosednessVerdict {
    let res = sphere_max_with(&sf.p3, opts);
    let margin = res.max_value - BOUND;
    let status = if margin.abs() <= sing_tol {
        ClosednessStatus::ClosedSingularAtInfinity
    } else if margin < 0.0 {
        ClosednessStatus::ClosedRegular
    } else {
        ClosednessStatus::NotClosed
    };
    ClosednessVerdict {
        status,
        max_value: res.max_value,
        margin,
        argmax: res.argmax_points,
    }
}

/// A nonzero solution of `∇P3(p) = 3·level·p` with its Euclidean norm.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalSolution {
    pub point: DVector<f64>,
    pub norm: f64,
}

/// All real nonzero solutions of `∇P3(p) = 3·level·p` with default options.
pub fn critical_points_with_norms(p3: &CubicForm, level: f64) -> Result<Vec<CriticalSolution>> {
    critical_points_with_norms_with(p3, level, &SphereMaxOptions::default())
}

/// All real nonzero solutions of `∇P3(p) = 3·level·p`.
///
/// Solutions are in bijection with critical points `u` of `P3` on the unit
/// sphere with `P3(u) > 0`, via `p = (level / P3(u))·u`. Sphere critical points
/// of every type are located by Newton's method from many starts; each scaled
/// candidate is then polished by Newton's method on the unconstrained system.
pub fn critical_points_with_norms_with(
    p3: &CubicForm,
    level: f64,
    opts: &SphereMaxOptions,
) -> Result<Vec<CriticalSolution>> {
    if !(level > 0.0) {
        return Err(PsrError::OutOfRange(format!("level must be positive, got {level}")));
    }
    let n = p3.dim();
    let tnorm = tensor_norm(p3);
    if tnorm == 0.0 {
        return Ok(Vec::new());
    }
    let count = opts.starts.max(256 * n);
    let starts = start_directions(n, count, opts.seed);
    let alpha = 6.0 * tnorm;
    let mut sphere_pts = Vec::with_capacity(2 * starts.len());
    for s in &starts {
        sphere_pts.push(newton_sphere(p3, s, 100));
        let a = ascend(p3, s, alpha, 400);
        sphere_pts.push(newton_sphere(p3, &a, 80));
    }
    let mut sols: Vec<CriticalSolution> = Vec::new();
    for u in sphere_pts {
        if lagrange_residual(p3, &u) > 1e-9 * tnorm.max(1.0) {
            continue;
        }
        let v = p3.value(u.as_slice());
        if v.abs() <= 1e-12 * tnorm {
            continue;
        }
        let dir = if v > 0.0 { u } else { -u };
        let p = polish_scaled(p3, level, dir * (level / v.abs()));
        let residual = (p3.grad(p.as_slice()) - &p * (3.0 * level)).norm();
        if residual > 1e-9 * p.norm().powi(2).max(1.0) * tnorm.max(1.0) {
            continue;
        }
        sols.push(CriticalSolution { norm: p.norm(), point: p });
    }
    sols.sort_by(|a, b| lex_cmp(&a.point, &b.point));
    let mut sols = cluster_means(sols);
    sols.sort_by(|a, b| lex_cmp(&a.point, &b.point));
    Ok(sols)
}

/// Merges solutions within `CLUSTER_DIST · max(1, |p|)` of a cluster's first
/// member and reports each cluster's mean.
///
/// Degenerate solutions are only located to a fractional power of the
/// roundoff, and the copies scatter around the true point.
fn cluster_means(sols: Vec<CriticalSolution>) -> Vec<CriticalSolution> {
    let mut clusters: Vec<(DVector<f64>, DVector<f64>, usize)> = Vec::new();
    for s in sols {
        let tol = CLUSTER_DIST * s.norm.max(1.0);
        match clusters.iter_mut().find(|(seed, _, _)| (seed - &s.point).norm() <= tol) {
            Some((_, sum, count)) => {
                *sum += &s.point;
                *count += 1;
            }
            None => clusters.push((s.point.clone(), s.point, 1)),
        }
    }
    clusters
        .into_iter()
        .map(|(_, sum, count)| {
            let point = sum / count as f64;
            CriticalSolution { norm: point.norm(), point }
        })
        .collect()
}

fn polish_scaled(p3: &CubicForm, level: f64, mut p: DVector<f64>) -> DVector<f64> {
    let n = p3.dim();
    let shift = DMatrix::identity(n, n) * (3.0 * level);
    let mut res = (p3.grad(p.as_slice()) - &p * (3.0 * level)).norm();
    // Degenerate solutions converge only linearly.
    for _ in 0..100 {
        if res < 1e-15 * p.norm().max(1.0) {
            break;
        }
        let g = p3.grad(p.as_slice()) - &p * (3.0 * level);
        let j = p3.hess(p.as_slice()) - &shift;
        let next = &p - lstsq(&j, &g, 1e-13);
        let next_res = (p3.grad(next.as_slice()) - &next * (3.0 * level)).norm();
        if !(next_res < res) {
            break;
        }
        p = next;
        res = next_res;
    }
    p
}
