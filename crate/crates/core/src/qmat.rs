//! Dense complex linear algebra.
//!
//! [`ComplexMatrix`] is the single carrier for every operator in the crate:
//! Hamiltonians, Lindblad operators, density matrices and vectorized
//! superoperators. Storage is delegated to `nalgebra`; the public contract is
//! only the logical row/column layout.
//!
//! Besides the arithmetic, this module provides the decompositions the rest of
//! the crate needs: matrix exponentials, SVD null spaces, eigendecompositions
//! of non-normal matrices and pseudo-inverses restricted to a subspace.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Default relative tolerance for [`nullspace`].
pub const DEFAULT_NULL_TOL: f64 = 1e-9;

/// Eigenvector condition number above which [`expm`] abandons
/// diagonalization for scaling-and-squaring.
pub const EXPM_CONDITION_LIMIT: f64 = 1e6;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Dense complex matrix with explicit dimensions.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { data: DMatrix::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        Self { data: DMatrix::identity(n, n) }
    }

    /// Builds a matrix from entries listed in row-major order.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { data: DMatrix::from_row_slice(rows, cols, entries) })
    }

    /// Real-valued convenience constructor, row-major.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let flat: Vec<C64> = rows.iter().flat_map(|r| r.iter().map(|&x| C64::new(x, 0.0))).collect();
        Self::from_row_slice(n, m, &flat)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        Self { data: DMatrix::from_fn(rows, cols, |i, j| f(i, j)) }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO })
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let c: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&c)
    }

    /// Column vector.
    pub fn column(entries: &[C64]) -> Self {
        Self { data: DMatrix::from_column_slice(entries.len(), 1, entries) }
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
    }

    pub fn from_nalgebra(data: DMatrix<C64>) -> Self {
        Self { data }
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_nalgebra(self) -> DMatrix<C64> {
        self.data
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::NotSquare { rows: self.rows(), cols: self.cols() })
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self { data: self.data.adjoint() }
    }

    pub fn transpose(&self) -> Self {
        Self { data: self.data.transpose() }
    }

    pub fn conj(&self) -> Self {
        Self { data: self.data.map(|z| z.conj()) }
    }

    pub fn trace(&self) -> C64 {
        self.data.diagonal().iter().sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { data: &self.data * s }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn kron(&self, other: &Self) -> Self {
        kron(self, other)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_one(&self) -> f64 {
        self.data
            .column_iter()
            .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |A - A^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (self - &self.dagger()).max_abs()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.dagger()).scale_real(0.5)
    }

    /// `A - tr(A)/n`, the traceless part of a square matrix.
    pub fn traceless_part(&self) -> Self {
        let n = self.rows();
        let shift = self.trace() / n as f64;
        self - &Self::identity(n).scale(shift)
    }

    /// Column-stacking vectorization: `vec(A)[i + j*rows] = A[i, j]`.
    pub fn vectorize(&self) -> Vec<C64> {
        self.data.as_slice().to_vec()
    }

    /// Inverse of [`vectorize`](Self::vectorize) for a square `dim x dim` matrix.
    pub fn unvectorize(dim: usize, v: &[C64]) -> Result<Self> {
        if v.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "vector of length {} is not a vectorized {dim}x{dim} matrix",
                v.len()
            )));
        }
        Ok(Self { data: DMatrix::from_column_slice(dim, dim, v) })
    }

    /// Matrix-vector product on a plain slice.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols() {
            return Err(Error::Dimension(format!(
                "cannot apply a {}x{} matrix to a vector of length {}",
                self.rows(),
                self.cols(),
                v.len()
            )));
        }
        let out = &self.data * DVector::from_column_slice(v);
        Ok(out.as_slice().to_vec())
    }

    /// Checked product (the `*` operator panics on mismatch).
    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Self { data: &self.data * &rhs.data })
    }

    /// Sub-matrix `B^dagger A B` for an isometry `B` (columns orthonormal).
    pub fn compress(&self, basis: &Self) -> Self {
        &(&basis.dagger() * self) * basis
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = self.hermitian_part();
        let mut ev: Vec<f64> = h.data.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Ordinary inverse via LU.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.require_square()?;
        let sv = singular_values(self)?;
        let smin = sv.last().copied().unwrap_or(0.0);
        let smax = sv.first().copied().unwrap_or(0.0);
        if n > 0 && (smax == 0.0 || smin <= smax * 1e-14) {
            return Err(Error::RankDeficient(format!(
                "condition number exceeds 1e14 (sigma_min = {smin:e})"
            )));
        }
        self.data
            .clone()
            .try_inverse()
            .map(Self::from_nalgebra)
            .ok_or_else(|| Error::RankDeficient("LU pivot breakdown".into()))
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        self.require_square()?;
        if b.len() != self.rows() {
            return Err(Error::Dimension("right-hand side length".into()));
        }
        let lu = self.data.clone().lu();
        lu.solve(&DVector::from_column_slice(b))
            .map(|x| x.as_slice().to_vec())
            .ok_or_else(|| Error::RankDeficient("singular linear system".into()))
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.data[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.data[idx]
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix { data: &self.data $op &rhs.data }
            }
        }
        impl $trait<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                &self $op &rhs
            }
        }
        impl $trait<&ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                &self $op rhs
            }
        }
        impl $trait<ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                self $op &rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.data += &rhs.data;
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        self.data -= &rhs.data;
    }
}

impl Mul<C64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: C64) -> ComplexMatrix {
        self.scale(rhs)
    }
}

impl Mul<C64> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: C64) -> ComplexMatrix {
        self.scale(rhs)
    }
}

impl Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: f64) -> ComplexMatrix {
        self.scale_real(rhs)
    }
}

impl Mul<f64> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: f64) -> ComplexMatrix {
        self.scale_real(rhs)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix { data: -self.data }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix { data: -&self.data }
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix { data: a.data.kronecker(&b.data) }
}

/// Conjugate transpose.
pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    a.dagger()
}

const SVD_MAX_ITER: usize = 10_000;

fn svd(a: &ComplexMatrix, compute_v: bool) -> Result<nalgebra::SVD<C64, nalgebra::Dyn, nalgebra::Dyn>> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    a.data
        .clone()
        .try_svd(false, compute_v, 5.0 * f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::instability("qmat", "SVD did not converge"))
}

/// Singular values in descending order.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(Vec::new());
    }
    let mut sv: Vec<f64> = svd(a, false)?.singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

/// Output of [`nullspace`].
#[derive(Clone, Debug)]
pub struct NullspaceResult {
    /// Orthonormal basis vectors of the (numerical) null space.
    pub basis: Vec<Vec<C64>>,
    /// `‖A v‖` for each basis vector.
    pub residuals: Vec<f64>,
    /// Absolute cutoff: `tol` times the largest singular value.
    pub tolerance_used: f64,
    /// Full singular spectrum, descending.
    pub singular_values: Vec<f64>,
}

impl NullspaceResult {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }
}

/// Right-singular vectors whose singular value is at most `tol · σ_max`.
///
/// Degenerate null spaces are returned whole.
pub fn nullspace(a: &ComplexMatrix, tol: f64) -> Result<NullspaceResult> {
    let n = a.require_square()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("null-space tolerance must be positive, got {tol}")));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let dec = svd(a, true)?;
    let v_t = dec.v_t.expect("requested V^H");
    let sv: Vec<f64> = dec.singular_values.iter().copied().collect();
    let smax = sv.first().copied().unwrap_or(0.0);
    let cutoff = tol * smax;

    let mut basis = Vec::new();
    let mut residuals = Vec::new();
    for (k, &s) in sv.iter().enumerate() {
        if s <= cutoff {
            // Row k of V^H is the conjugate of the k-th right-singular vector.
            let v: Vec<C64> = (0..n).map(|j| v_t[(k, j)].conj()).collect();
            let av = a.apply(&v)?;
            residuals.push(av.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
            basis.push(v);
        }
    }
    // Residuals equal the singular values up to rounding; report the cutoff
    // with that slack so the result is self-consistent.
    let tolerance_used = cutoff.max(residuals.iter().copied().fold(0.0, f64::max));
    Ok(NullspaceResult { basis, residuals, tolerance_used, singular_values: sv })
}

/// Eigendecomposition `A = V diag(λ) V⁻¹` of a general complex matrix.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<C64>,
    /// Columns are unit-norm right eigenvectors.
    pub vectors: ComplexMatrix,
    pub inverse: ComplexMatrix,
    /// 2-norm condition number of `vectors`.
    pub condition: f64,
}

impl Eigen {
    /// `V f(Λ) V⁻¹` for a scalar function applied to the eigenvalues.
    pub fn map(&self, f: impl Fn(C64) -> C64) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let fj = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        &scaled * &self.inverse
    }
}

/// Eigendecomposition through the complex Schur form.
///
/// Eigenvectors of the triangular factor come from back-substitution; near
/// coincident eigenvalues are perturbed to `ε‖A‖`, which shows up as a large
/// [`Eigen::condition`] rather than a failure.
pub fn eigen(a: &ComplexMatrix) -> Result<Eigen> {
    let n = a.require_square()?;
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    if n == 0 {
        return Ok(Eigen {
            values: vec![],
            vectors: ComplexMatrix::zeros(0, 0),
            inverse: ComplexMatrix::zeros(0, 0),
            condition: 1.0,
        });
    }
    let schur = nalgebra::linalg::Schur::try_new(a.data.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::instability("qmat", "Schur iteration did not converge"))?;
    let (q, t) = schur.unpack();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for j in 0..n {
        for i in (j + 1)..n {
            if t[(i, j)].norm() > 1e-10 * scale {
                return Err(Error::instability("qmat", "Schur factor is not triangular"));
            }
        }
    }
    let values: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let smin = (f64::EPSILON * scale).max(f64::EPSILON);

    let mut w = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lambda = values[k];
        w[(k, k)] = ONE;
        for j in (0..k).rev() {
            let mut acc = ZERO;
            for m in (j + 1)..=k {
                acc += t[(j, m)] * w[(m, k)];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < smin {
                denom = C64::new(smin, 0.0);
            }
            w[(j, k)] = -acc / denom;
        }
    }
    let mut v = q * w;
    for mut col in v.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= C64::new(nrm, 0.0);
        }
    }
    let vectors = ComplexMatrix::from_nalgebra(v);
    let sv = singular_values(&vectors)?;
    let condition = match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    };
    let inverse = if condition.is_finite() && condition < 1e14 {
        vectors.inverse()?
    } else {
        return Ok(Eigen { values, inverse: ComplexMatrix::zeros(n, n), vectors, condition: f64::INFINITY });
    };
    Ok(Eigen { values, vectors, inverse, condition })
}

/// Matrix exponential.
///
/// Diagonalizes when the eigenvector basis is well conditioned
/// (κ < [`EXPM_CONDITION_LIMIT`]); otherwise uses scaling-and-squaring with a
/// degree-13 Padé approximant.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.require_square()?;
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    if let Ok(eig) = eigen(a) {
        if eig.condition < EXPM_CONDITION_LIMIT {
            let out = eig.map(|z| z.exp());
            if out.is_finite() {
                return Ok(out);
            }
        }
    }
    expm_pade(a)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Scaling-and-squaring with a [13/13] Padé approximant.
pub fn expm_pade(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.require_square()?;
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    const THETA13: f64 = 5.371920351148152;
    let norm = a.norm_one();
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scaled = a.scale_real(2f64.powi(-s)).data;

    let id = DMatrix::<C64>::identity(n, n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| C64::new(PADE13[k], 0.0);

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9));
    let u = &scaled * (u_inner + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1));
    let v_inner = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8));
    let v = v_inner + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::instability("qmat", "Padé denominator is singular"))?;
    for _ in 0..s {
        r = &r * &r;
    }
    let out = ComplexMatrix::from_nalgebra(r);
    if !out.is_finite() {
        return Err(Error::instability("qmat", "matrix exponential overflowed"));
    }
    Ok(out)
}

/// Pseudo-inverse of `y` restricted to the range of an orthogonal projector.
///
/// Returns `Ỹ` with `Ỹ y = y Ỹ = projector` and `Ỹ (I - projector) = 0`.
/// `y` must leave the range of the projector invariant (in both directions,
/// `(I-P) y P = P y (I-P) = 0`) and be invertible there.
pub fn subspace_pseudo_inverse(y: &ComplexMatrix, projector: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = y.require_square()?;
    if projector.rows() != n || projector.cols() != n {
        return Err(Error::Dimension("projector and operator sizes differ".into()));
    }
    let basis = projector_range(projector)?;
    let id = ComplexMatrix::identity(n);
    let comp = &id - projector;
    let scale = y.max_abs().max(1.0);
    let leak = (&(&comp * y) * projector).max_abs().max((&(projector * y) * &comp).max_abs());
    if leak > 1e-10 * scale {
        return Err(Error::Dimension(format!(
            "operator does not preserve the projector's range (leak {leak:e})"
        )));
    }
    if basis.cols() == 0 {
        return Ok(ComplexMatrix::zeros(n, n));
    }
    let restricted = y.compress(&basis);
    let sv = singular_values(&restricted)?;
    let (hi, lo) = (sv[0], *sv.last().unwrap());
    if hi == 0.0 || lo <= 1e-12 * hi {
        return Err(Error::RankDeficient(format!(
            "restricted operator has sigma_min/sigma_max = {:e}",
            if hi == 0.0 { 0.0 } else { lo / hi }
        )));
    }
    let inv = restricted.inverse()?;
    Ok(&(&basis * &inv) * &basis.dagger())
}

/// Orthonormal basis (as columns) of the range of an orthogonal projector.
pub fn projector_range(projector: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = projector.require_square()?;
    if !projector.is_hermitian(1e-10) {
        return Err(Error::InvalidParams("projector is not Hermitian".into()));
    }
    if (&(projector * projector) - projector).max_abs() > 1e-10 {
        return Err(Error::InvalidParams("projector is not idempotent".into()));
    }
    let eig = projector.hermitian_part().into_nalgebra().symmetric_eigen();
    let cols: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > 0.5).collect();
    Ok(ComplexMatrix::from_fn(n, cols.len(), |i, j| eig.eigenvectors[(i, cols[j])]))
}
