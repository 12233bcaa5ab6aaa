//! Cubic homogeneous polynomials stored as symmetric trilinear forms.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{PsrError, Result};

/// A point of the ambient space `R^{n+1}` (or of `R^n` for `P3`).
pub type AmbientPoint = DVector<f64>;

/// Monomial key `(i, j, k)` with `i ≤ j ≤ k`.
pub type Triple = (usize, usize, usize);

fn sort3(i: usize, j: usize, k: usize) -> Triple {
    let mut t = [i, j, k];
    t.sort_unstable();
    (t[0], t[1], t[2])
}

/// Number of distinct orderings of the triple.
fn multiplicity(t: Triple) -> f64 {
    match (t.0 == t.1, t.1 == t.2) {
        (true, true) => 1.0,
        (false, false) if t.0 != t.2 => 6.0,
        _ => 3.0,
    }
}

/// All nondecreasing triples over `0..dim` in lexicographic order.
pub fn triples(dim: usize) -> Vec<Triple> {
    let mut out = Vec::new();
    for i in 0..dim {
        for j in i..dim {
            for k in j..dim {
                out.push((i, j, k));
            }
        }
    }
    out
}

/// Cubic form `h(p) = Σ c_{ijk} p_i p_j p_k` over nondecreasing triples.
///
/// The monomial coefficients are the source of truth; a dense symmetric tensor
/// `T` with `h(p) = T(p, p, p)` is kept alongside for polarization.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicForm {
    dim: usize,
    coeffs: BTreeMap<Triple, f64>,
    tensor: Vec<f64>,
}

impl CubicForm {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            coeffs: BTreeMap::new(),
            tensor: vec![0.0; dim * dim * dim],
        }
    }

    /// Build from monomial coefficients. Indices may come in any order;
    /// repeated monomials are summed.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Triple, f64)>,
    {
        let mut coeffs = BTreeMap::new();
        for ((i, j, k), c) in terms {
            if i >= dim || j >= dim || k >= dim {
                return Err(PsrError::DimensionMismatch {
                    expected: dim,
                    got: i.max(j).max(k) + 1,
                });
            }
            *coeffs.entry(sort3(i, j, k)).or_insert(0.0) += c;
        }
        coeffs.retain(|_, c| *c != 0.0);
        Ok(Self::from_coeff_map(dim, coeffs))
    }

    fn from_coeff_map(dim: usize, coeffs: BTreeMap<Triple, f64>) -> Self {
        let mut tensor = vec![0.0; dim * dim * dim];
        for (&t, &c) in &coeffs {
            let v = c / multiplicity(t);
            let (i, j, k) = t;
            for (a, b, d) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                tensor[(a * dim + b) * dim + d] = v;
            }
        }
        Self { dim, coeffs, tensor }
    }

    /// Build from a dense tensor (row-major `T[i][j][k]`), symmetrizing it.
    pub fn from_tensor(dim: usize, tensor: &[f64]) -> Result<Self> {
        if tensor.len() != dim * dim * dim {
            return Err(PsrError::DimensionMismatch {
                expected: dim * dim * dim,
                got: tensor.len(),
            });
        }
        let at = |i: usize, j: usize, k: usize| tensor[(i * dim + j) * dim + k];
        let mut coeffs = BTreeMap::new();
        for t in triples(dim) {
            let (i, j, k) = t;
            let sum = at(i, j, k) + at(i, k, j) + at(j, i, k) + at(j, k, i) + at(k, i, j) + at(k, j, i);
            let c = sum / 6.0 * multiplicity(t);
            if c != 0.0 {
                coeffs.insert(t, c);
            }
        }
        Ok(Self::from_coeff_map(dim, coeffs))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficient of the monomial `p_i p_j p_k` (indices in any order).
    pub fn coeff(&self, i: usize, j: usize, k: usize) -> f64 {
        self.coeffs.get(&sort3(i, j, k)).copied().unwrap_or(0.0)
    }

    /// Nonzero monomial coefficients in lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (Triple, f64)> + '_ {
        self.coeffs.iter().map(|(&t, &c)| (t, c))
    }

    /// Symmetric tensor entry `T_{ijk}`.
    pub fn tensor_entry(&self, i: usize, j: usize, k: usize) -> f64 {
        self.tensor[(i * self.dim + j) * self.dim + k]
    }

    fn check(&self, p: &DVector<f64>) -> Result<()> {
        if p.len() != self.dim {
            return Err(PsrError::DimensionMismatch {
                expected: self.dim,
                got: p.len(),
            });
        }
        Ok(())
    }

    /// `h(p)` by direct monomial evaluation.
    pub fn evaluate(&self, p: &DVector<f64>) -> Result<f64> {
        self.check(p)?;
        Ok(self.value(p.as_slice()))
    }

    /// `h(p)` on a raw slice; the caller guarantees the length.
    pub fn value(&self, p: &[f64]) -> f64 {
        self.coeffs.iter().map(|(&(i, j, k), &c)| c * p[i] * p[j] * p[k]).sum()
    }

    /// Symmetric trilinear form `h(p, q, r)`.
    pub fn polarize(&self, p: &DVector<f64>, q: &DVector<f64>, r: &DVector<f64>) -> Result<f64> {
        self.check(p)?;
        self.check(q)?;
        self.check(r)?;
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let base = (i * n + j) * n;
                let pq = p[i] * q[j];
                if pq == 0.0 {
                    continue;
                }
                for k in 0..n {
                    acc += self.tensor[base + k] * pq * r[k];
                }
            }
        }
        Ok(acc)
    }

    /// Matrix `T(p, ·, ·)`.
    fn contract1(&self, p: &[f64]) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |j, k| (0..n).map(|i| self.tensor[(i * n + j) * n + k] * p[i]).sum())
    }

    /// `∂h_p`, with `grad_i = 3 h(p, p, e_i)`.
    pub fn gradient(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(p)?;
        Ok(self.grad(p.as_slice()))
    }

    pub(crate) fn grad(&self, p: &[f64]) -> DVector<f64> {
        let m = self.contract1(p);
        let pv = DVector::from_column_slice(p);
        (m * pv) * 3.0
    }

    /// `∂²h_p`, with `hess_ij = 6 h(p, e_i, e_j)`.
    pub fn hessian(&self, p: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check(p)?;
        Ok(self.hess(p.as_slice()))
    }

    pub(crate) fn hess(&self, p: &[f64]) -> DMatrix<f64> {
        self.contract1(p) * 6.0
    }

    /// `h ∘ T` for a square invertible transform.
    pub fn pullback(&self, t: &FrameTransform) -> Result<CubicForm> {
        self.pullback_matrix(t.matrix())
    }

    /// `h ∘ M` for any `dim × m` matrix; the result lives on `R^m`.
    pub fn pullback_matrix(&self, m: &DMatrix<f64>) -> Result<CubicForm> {
        let n = self.dim;
        if m.nrows() != n {
            return Err(PsrError::DimensionMismatch {
                expected: n,
                got: m.nrows(),
            });
        }
        let q = m.ncols();
        // contract one index at a time: T[i][j][k] → T[i][j][c] → T[i][b][c] → T[a][b][c]
        let mut t1 = vec![0.0; n * n * q];
        for i in 0..n {
            for j in 0..n {
                for c in 0..q {
                    let mut s = 0.0;
                    for k in 0..n {
                        s += self.tensor[(i * n + j) * n + k] * m[(k, c)];
                    }
                    t1[(i * n + j) * q + c] = s;
                }
            }
        }
        let mut t2 = vec![0.0; n * q * q];
        for i in 0..n {
            for b in 0..q {
                for c in 0..q {
                    let mut s = 0.0;
                    for j in 0..n {
                        s += t1[(i * n + j) * q + c] * m[(j, b)];
                    }
                    t2[(i * q + b) * q + c] = s;
                }
            }
        }
        let mut t3 = vec![0.0; q * q * q];
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    let mut s = 0.0;
                    for i in 0..n {
                        s += t2[(i * q + b) * q + c] * m[(i, a)];
                    }
                    t3[(a * q + b) * q + c] = s;
                }
            }
        }
        CubicForm::from_tensor(q, &t3)
    }

    /// `h ∘ M` accumulated in double-double arithmetic and rounded once.
    ///
    /// Near the boundary of the domain the entries of `M` are large while
    /// the pulled-back coefficients stay of order one.
    pub fn pullback_matrix_compensated(&self, m: &DMatrix<f64>) -> Result<CubicForm> {
        let n = self.dim;
        if m.nrows() != n {
            return Err(PsrError::DimensionMismatch {
                expected: n,
                got: m.nrows(),
            });
        }
        let q = m.ncols();
        let zero = TwoFloat::from(0.0);
        let mut t1 = vec![zero; n * n * q];
        for i in 0..n {
            for j in 0..n {
                for c in 0..q {
                    let mut s = zero;
                    for k in 0..n {
                        s += TwoFloat::new_mul(self.tensor[(i * n + j) * n + k], m[(k, c)]);
                    }
                    t1[(i * n + j) * q + c] = s;
                }
            }
        }
        let mut t2 = vec![zero; n * q * q];
        for i in 0..n {
            for b in 0..q {
                for c in 0..q {
                    let mut s = zero;
                    for j in 0..n {
                        s += t1[(i * n + j) * q + c] * m[(j, b)];
                    }
                    t2[(i * q + b) * q + c] = s;
                }
            }
        }
        let mut t3 = vec![0.0; q * q * q];
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    let mut s = zero;
                    for i in 0..n {
                        s += t2[(i * q + b) * q + c] * m[(i, a)];
                    }
                    t3[(a * q + b) * q + c] = f64::from(s);
                }
            }
        }
        CubicForm::from_tensor(q, &t3)
    }

    pub fn scaled(&self, lambda: f64) -> CubicForm {
        let coeffs = self.coeffs.iter().map(|(&t, &c)| (t, c * lambda)).collect();
        Self::from_coeff_map(self.dim, coeffs)
    }

    /// Largest absolute difference over all monomial coefficients.
    pub fn max_abs_diff(&self, other: &CubicForm) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        triples(self.dim)
            .into_iter()
            .map(|(i, j, k)| (self.coeff(i, j, k) - other.coeff(i, j, k)).abs())
            .fold(0.0, f64::max)
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

/// Human-readable monomial name, with `x` for index 0 and `y1..yn` otherwise.
pub fn ambient_monomial_name(t: Triple) -> String {
    let name = |i: usize| if i == 0 { "x".to_string() } else { format!("y{i}") };
    format!("{}*{}*{}", name(t.0), name(t.1), name(t.2))
}

/// Cubic `x³ − x⟨y,y⟩ + P3(y)` on `R^{n+1}`, stored through `P3` on `R^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardFormPoly {
    pub n: usize,
    pub p3: CubicForm,
}

impl StandardFormPoly {
    pub fn new(p3: CubicForm) -> Self {
        Self { n: p3.dim(), p3 }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(CubicForm::zero(n))
    }

    /// The full ambient cubic.
    pub fn assemble(&self) -> CubicForm {
        let n = self.n;
        let mut terms: Vec<(Triple, f64)> = vec![((0, 0, 0), 1.0)];
        terms.extend((1..=n).map(|i| ((0, i, i), -1.0)));
        terms.extend(self.p3.terms().map(|((i, j, k), c)| ((i + 1, j + 1, k + 1), c)));
        CubicForm::from_terms(n + 1, terms).expect("indices in range")
    }

    /// `h(1, y)`.
    pub fn affine_value(&self, y: &[f64]) -> f64 {
        let yy: f64 = y.iter().map(|v| v * v).sum();
        1.0 - yy + self.p3.value(y)
    }
}

/// Default shape tolerance for [`extract_standard`].
pub const SHAPE_TOL: f64 = 1e-9;

/// Read `P3` off an ambient cubic, failing if the standard-form shape is violated.
///
/// Expected coefficients: `1` on `x³`, `0` on every `x²y_i`, `−δ_ij` on `x y_i y_j`.
/// Deviations must stay within `tol · max(1, |expected|)`.
pub fn extract_standard(h: &CubicForm, tol: f64) -> Result<StandardFormPoly> {
    let (worst, value, expected) = standard_shape_defect(h)?;
    if (value - expected).abs() > tol * expected.abs().max(1.0) {
        return Err(PsrError::NotStandardForm {
            monomial: ambient_monomial_name(worst),
            value,
            expected,
        });
    }
    let n = h.dim() - 1;
    let p3 = CubicForm::from_terms(
        n,
        h.terms()
            .filter(|&((i, _, _), _)| i > 0)
            .map(|((i, j, k), c)| ((i - 1, j - 1, k - 1), c)),
    )?;
    Ok(StandardFormPoly::new(p3))
}

/// The worst shape violation `(monomial, value, expected)` of an ambient cubic.
pub fn standard_shape_defect(h: &CubicForm) -> Result<(Triple, f64, f64)> {
    if h.dim() < 2 {
        return Err(PsrError::DimensionMismatch {
            expected: 2,
            got: h.dim(),
        });
    }
    let n = h.dim() - 1;
    let mut worst = ((0, 0, 0), h.coeff(0, 0, 0), 1.0);
    let mut worst_dev = (worst.1 - 1.0).abs();
    let mut consider = |t: Triple, expected: f64| {
        let v = h.coeff(t.0, t.1, t.2);
        let dev = (v - expected).abs() / expected.abs().max(1.0);
        if dev > worst_dev {
            worst_dev = dev;
            worst = (t, v, expected);
        }
    };
    for i in 1..=n {
        consider((0, 0, i), 0.0);
        for j in i..=n {
            consider((0, i, j), if i == j { -1.0 } else { 0.0 });
        }
    }
    Ok(worst)
}

/// Invertible linear map of the ambient space with its cached inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameTransform {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl FrameTransform {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(PsrError::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let n = matrix.nrows();
        let inverse = matrix.clone().try_inverse().ok_or(PsrError::SingularTransform)?;
        let cond = matrix.norm() * inverse.norm();
        let defect = (&matrix * &inverse - DMatrix::identity(n, n)).amax();
        if !defect.is_finite() || defect > 1e-12 * cond.max(1.0) {
            return Err(PsrError::SingularTransform);
        }
        Ok(Self { matrix, inverse })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
            inverse: DMatrix::identity(n, n),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn apply(&self, p: &DVector<f64>) -> DVector<f64> {
        &self.matrix * p
    }

    /// `self · other`.
    pub fn compose(&self, other: &FrameTransform) -> FrameTransform {
        FrameTransform {
            matrix: &self.matrix * &other.matrix,
            inverse: &other.inverse * &self.inverse,
        }
    }
}

/// JSON term `{"monomial": [e_x, e_y1, …], "coeff": c}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermJson {
    pub monomial: Vec<u32>,
    pub coeff: f64,
}

/// JSON polynomial `{"n": n, "terms": [...]}` on `R^{n+1}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PolyJson {
    pub n: usize,
    pub terms: Vec<TermJson>,
}

impl PolyJson {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| PsrError::Parse(e.to_string()))
    }

    /// The ambient cubic on `R^{n+1}`.
    pub fn to_cubic(&self) -> Result<CubicForm> {
        let dim = self.n + 1;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (idx, t) in self.terms.iter().enumerate() {
            if t.monomial.len() != dim {
                return Err(PsrError::Schema(format!(
                    "term {idx}: monomial has {} exponents, expected {dim}",
                    t.monomial.len()
                )));
            }
            if t.monomial.iter().sum::<u32>() != 3 {
                return Err(PsrError::Schema(format!("term {idx}: exponents must sum to 3")));
            }
            if !t.coeff.is_finite() {
                return Err(PsrError::Schema(format!("term {idx}: coefficient is not finite")));
            }
            let mut idxs = Vec::with_capacity(3);
            for (var, &e) in t.monomial.iter().enumerate() {
                idxs.extend(std::iter::repeat_n(var, e as usize));
            }
            terms.push(((idxs[0], idxs[1], idxs[2]), t.coeff));
        }
        CubicForm::from_terms(dim, terms)
    }

    pub fn from_cubic(h: &CubicForm) -> Self {
        let dim = h.dim();
        let terms = h
            .terms()
            .map(|((i, j, k), coeff)| {
                let mut monomial = vec![0u32; dim];
                for v in [i, j, k] {
                    monomial[v] += 1;
                }
                TermJson { monomial, coeff }
            })
            .collect();
        PolyJson { n: dim.saturating_sub(1), terms }
    }

    pub fn from_standard(sf: &StandardFormPoly) -> Self {
        Self::from_cubic(&sf.assemble())
    }
}

/// JSON description of a `P3` alone, using the same schema with a leading zero `x` exponent.
pub fn p3_to_json(p3: &CubicForm) -> PolyJson {
    let shifted = CubicForm::from_terms(
        p3.dim() + 1,
        p3.terms().map(|((i, j, k), c)| ((i + 1, j + 1, k + 1), c)),
    )
    .expect("indices in range");
    PolyJson::from_cubic(&shifted)
}
