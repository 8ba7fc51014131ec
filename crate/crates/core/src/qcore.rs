//! Dense complex Hermitian matrix primitives.
//!
//! Everything downstream (divergences, Nussbaum–Szkoła pairs, Neyman–Pearson
//! tests) is expressed through the spectral calculus here. Eigenvalues at or
//! below [`SUPPORT_CUTOFF`] are treated as exact zeros, so supports, logarithms
//! and fractional powers all agree on what "the support" of an operator is.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result, Violation};

/// Eigenvalues at or below this are exact zeros.
pub const SUPPORT_CUTOFF: f64 = 1e-12;
/// Elementwise tolerance for `A[i][j] == conj(A[j][i])`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted for a positive-semidefinite operator.
pub const PSD_TOL: f64 = 1e-12;
/// Allowed deviation of a density operator's trace from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Frobenius tolerance for unitarity and cyclic order.
pub const UNITARY_TOL: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;

/// A square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

/// Spectral decomposition with ascending eigenvalues and orthonormal
/// eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

fn max_hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

impl HermitianMatrix {
    /// Validates squareness and Hermiticity.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Validation(vec![Violation::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            }]));
        }
        let dev = max_hermitian_deviation(&m);
        if dev > HERMITIAN_TOL {
            return Err(Error::Validation(vec![Violation::NotHermitian {
                deviation: dev,
            }]));
        }
        Ok(Self::hermitized(m))
    }

    /// Builds from a square matrix known to be Hermitian up to rounding,
    /// replacing it by `(M + M†)/2`.
    pub(crate) fn hermitized(m: CMatrix) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        let adj = m.adjoint();
        Self { m: (m + adj) * Complex64::new(0.5, 0.0) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: CMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: CMatrix::zeros(dim, dim) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        Self { m }
    }

    /// Projector `|v⟩⟨v|` onto a normalized copy of `v`.
    pub fn projector(v: &[Complex64]) -> Self {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let n = v.len();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj() / (norm * norm);
            }
        }
        Self::hermitized(m)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    pub fn eigh(&self) -> Eigh {
        eigh(self)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { m: &self.m * Complex64::new(c, 0.0) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self { m: &self.m + &other.m })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self { m: &self.m - &other.m })
    }

    /// `U A U†` for a (not necessarily validated) square matrix `U`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self::hermitized(u * &self.m * u.adjoint())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self { m: self.m.kronecker(&other.m) }
    }

    /// `Tr[A B]` for Hermitian A, B.
    pub fn trace_product(&self, other: &Self) -> Result<f64> {
        trace_product(self, other)
    }

    /// Applies `f` to the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        self.eigh().reconstruct(f)
    }

    pub fn frac_power(&self, a: f64) -> Result<Self> {
        frac_power(self, a)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `Σ f(λᵢ) |uᵢ⟩⟨uᵢ|`.
    pub fn reconstruct(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let c = f(lam);
            scaled.column_mut(j).scale_mut(c);
        }
        debug_assert_eq!(scaled.ncols(), n);
        HermitianMatrix::hermitized(scaled * self.vectors.adjoint())
    }

    /// `Σ cᵢ |uᵢ⟩⟨uᵢ|` with explicit coefficients in eigenvector order.
    pub fn reconstruct_with(&self, coeffs: &[f64]) -> HermitianMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &c) in coeffs.iter().enumerate() {
            scaled.column_mut(j).scale_mut(c);
        }
        HermitianMatrix::hermitized(scaled * self.vectors.adjoint())
    }

    /// Sum of projectors on eigenvectors whose eigenvalue satisfies `keep`.
    pub fn spectral_projector(&self, keep: impl Fn(f64) -> bool) -> HermitianMatrix {
        self.reconstruct(|l| if keep(l) { 1.0 } else { 0.0 })
    }

    /// Smallest and largest eigenvalue.
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Eigendecomposition with ascending eigenvalues. Real-valued inputs use a
/// real symmetric solver; the result is deterministic for identical input.
pub fn eigh(h: &HermitianMatrix) -> Eigh {
    let n = h.dim();
    if n == 0 {
        return Eigh { values: vec![], vectors: CMatrix::zeros(0, 0) };
    }
    let (vals, vecs): (Vec<f64>, CMatrix) = if h.m.iter().all(|z| z.im == 0.0) {
        let real = DMatrix::from_fn(n, n, |i, j| h.m[(i, j)].re);
        let se = SymmetricEigen::new(real);
        let vecs = se.eigenvectors.map(|x| Complex64::new(x, 0.0));
        (se.eigenvalues.iter().copied().collect(), vecs)
    } else {
        let se = SymmetricEigen::new(h.m.clone());
        (se.eigenvalues.iter().copied().collect(), se.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let values = order.iter().map(|&i| vals[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| vecs[(r, order[c])]);
    Eigh { values, vectors }
}

/// `ρ^a` with `0^a := 0` for `a > 0`; `a = 0` yields the support projector.
pub fn frac_power(rho: &HermitianMatrix, a: f64) -> Result<HermitianMatrix> {
    frac_power_eigh(&rho.eigh(), a)
}

pub(crate) fn frac_power_eigh(e: &Eigh, a: f64) -> Result<HermitianMatrix> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameter {
            name: "exponent".into(),
            value: a,
            reason: "fractional power requires a finite a >= 0",
        });
    }
    if let Some(&lo) = e.values.first() {
        if lo < -PSD_TOL {
            return Err(Error::NegativeEigenvalue { value: lo });
        }
    }
    Ok(e.reconstruct(|l| power_scalar(l, a)))
}

#[inline]
pub(crate) fn power_scalar(l: f64, a: f64) -> f64 {
    if l <= SUPPORT_CUTOFF {
        0.0
    } else if a == 0.0 {
        1.0
    } else if a == 1.0 {
        l
    } else {
        l.powf(a)
    }
}

/// Natural logarithm on the support, zero on the kernel.
pub(crate) fn log_support(e: &Eigh) -> HermitianMatrix {
    e.reconstruct(|l| if l > SUPPORT_CUTOFF { l.ln() } else { 0.0 })
}

/// Real part of `Tr[A B]`.
pub fn trace_product(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let n = a.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a.m[(i, k)] * b.m[(k, i)];
        }
    }
    let scale = 1.0 + a.frobenius_norm() * b.frobenius_norm();
    debug_assert!(acc.im.abs() <= 1e-10 * scale, "Tr[AB] imaginary part {}", acc.im);
    Ok(acc.re)
}

/// Trace distance `½‖A − B‖₁`.
pub fn trace_distance(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    let d = a.sub(b)?;
    Ok(0.5 * d.eigh().values.iter().map(|l| l.abs()).sum::<f64>())
}

/// A validated density operator together with its cached spectrum.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: HermitianMatrix,
    eig: Eigh,
}

impl DensityOperator {
    /// Validates PSD (eigenvalues ≥ −1e−12, clamped) and unit trace.
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let mut violations = Vec::new();
        let tr = matrix.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            violations.push(Violation::NonUnitTrace { trace: tr });
        }
        let eig = matrix.eigh();
        if eig.min() < -PSD_TOL {
            violations.push(Violation::NegativeEigenvalue { value: eig.min() });
        }
        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }
        Ok(Self::from_parts(matrix, eig))
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// Normalizes a PSD operator with positive trace.
    pub fn normalized(h: HermitianMatrix) -> Result<Self> {
        let tr = h.trace();
        if !(tr > 0.0) {
            return Err(Error::CheckFailed(format!("cannot normalize operator with trace {tr}")));
        }
        Self::new(h.scale(1.0 / tr))
    }

    fn from_parts(matrix: HermitianMatrix, mut eig: Eigh) -> Self {
        for l in eig.values.iter_mut() {
            if *l < 0.0 {
                *l = 0.0;
            }
        }
        Self { matrix, eig }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new(HermitianMatrix::identity(dim).scale(1.0 / dim as f64))
            .expect("maximally mixed state is valid")
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(diag))
    }

    pub fn pure(v: &[Complex64]) -> Self {
        Self::new(HermitianMatrix::projector(v)).expect("projector is a valid state")
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn matrix(&self) -> &CMatrix {
        self.matrix.matrix()
    }

    pub fn eigen(&self) -> &Eigh {
        &self.eig
    }

    pub fn power(&self, a: f64) -> HermitianMatrix {
        frac_power_eigh(&self.eig, a).expect("density spectrum is clamped nonnegative")
    }

    pub fn support_projector(&self) -> HermitianMatrix {
        self.power(0.0)
    }

    pub fn rank(&self) -> usize {
        self.eig.values.iter().filter(|&&l| l > SUPPORT_CUTOFF).count()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dim()
    }

    pub fn log(&self) -> HermitianMatrix {
        log_support(&self.eig)
    }

    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        Self::new(self.matrix.conjugate_by(u))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::new(self.matrix.kron(&other.matrix)).expect("tensor product of states is a state")
    }
}

/// A unitary `V` with `V^K = I`.
#[derive(Debug, Clone)]
pub struct CyclicUnitary {
    matrix: CMatrix,
    order: usize,
}

impl CyclicUnitary {
    pub fn new(matrix: CMatrix, order: usize) -> Result<Self> {
        let v = unitary_violations(&matrix, order);
        if v.is_empty() {
            Ok(Self { matrix, order })
        } else {
            Err(Error::Validation(v))
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `V^k`.
    pub fn power(&self, k: usize) -> CMatrix {
        let n = self.dim();
        let mut acc = CMatrix::identity(n, n);
        for _ in 0..k {
            acc = &acc * &self.matrix;
        }
        acc
    }
}

fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn unitary_violations(v: &CMatrix, order: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    if v.nrows() != v.ncols() {
        out.push(Violation::NotSquare { rows: v.nrows(), cols: v.ncols() });
        return out;
    }
    if order == 0 {
        out.push(Violation::EmptyAlphabet);
        return out;
    }
    let n = v.nrows();
    let id = CMatrix::identity(n, n);
    let dev = frobenius(&(v.adjoint() * v - &id)).max(frobenius(&(v * v.adjoint() - &id)));
    if dev > UNITARY_TOL {
        out.push(Violation::NotUnitary { deviation: dev });
    }
    let mut p = id.clone();
    for _ in 0..order {
        p = &p * v;
    }
    let dev_k = frobenius(&(p - id));
    if dev_k > UNITARY_TOL {
        out.push(Violation::OrderViolation { order, deviation: dev_k });
    }
    out
}

/// Validates the generator state and cyclic unitary of a symmetric channel,
/// collecting every violated invariant.
pub fn validate(w1: &CMatrix, v: &CMatrix, k: usize) -> Result<(DensityOperator, CyclicUnitary)> {
    let mut violations = Vec::new();
    if w1.nrows() != w1.ncols() {
        violations.push(Violation::NotSquare { rows: w1.nrows(), cols: w1.ncols() });
    }
    if v.nrows() != v.ncols() {
        violations.push(Violation::NotSquare { rows: v.nrows(), cols: v.ncols() });
    }
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    if w1.nrows() != v.nrows() {
        return Err(Error::Validation(vec![Violation::DimensionMismatch {
            expected: w1.nrows(),
            found: v.nrows(),
        }]));
    }

    let mut state = None;
    let dev = max_hermitian_deviation(w1);
    if dev > HERMITIAN_TOL {
        violations.push(Violation::NotHermitian { deviation: dev });
    } else {
        match DensityOperator::new(HermitianMatrix::hermitized(w1.clone())) {
            Ok(s) => state = Some(s),
            Err(Error::Validation(v)) => violations.extend(v),
            Err(e) => return Err(e),
        }
    }
    violations.extend(unitary_violations(v, k));

    match (state, violations.is_empty()) {
        (Some(s), true) => Ok((s, CyclicUnitary { matrix: v.clone(), order: k })),
        _ => Err(Error::Validation(violations)),
    }
}

/// Builds a complex matrix from rows of `(re, im)` pairs.
pub fn cmatrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    let m = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

/// Builds a complex matrix from real rows.
pub fn cmatrix_from_real(rows: &[&[f64]]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map(|r| r.len()).unwrap_or(0);
    CMatrix::from_fn(n, m, |i, j| Complex64::new(rows[i][j], 0.0))
}
