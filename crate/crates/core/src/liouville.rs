//! Master equation: Liouvillian assembly, steady states, propagation and
//! state functionals.
//!
//! Density matrices are vectorized by stacking columns, so that
//! `vec(AXB) = (Bᵀ ⊗ A) vec(X)`. With this convention
//!
//! ```text
//! −i[H, ρ]  ↦  −i(I ⊗ H − Hᵀ ⊗ I)
//! D[X]ρ     ↦  X̄ ⊗ X − ½ I ⊗ X†X − ½ (X†X)ᵀ ⊗ I
//! ```

use std::f64::consts::SQRT_2;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qmat::{eigen, expm_pade, kron, nullspace, ComplexMatrix, DEFAULT_NULL_TOL, EXPM_CONDITION_LIMIT, I, ONE, ZERO};
use crate::slh::{build_cascade, sym, sym_ket, DiodeParams, SlhTriple};

/// Tolerance on Hermiticity and trace of a [`DensityMatrix`].
pub const STATE_TOL: f64 = 1e-10;
/// Most negative eigenvalue tolerated in a [`DensityMatrix`].
pub const POSITIVITY_TOL: f64 = 1e-8;
/// Relative size below which a Liouvillian eigenvalue is treated as exactly 0.
pub const ZERO_MODE_TOL: f64 = 1e-13;
/// Hermiticity and trace drift accepted after propagation. Eigenmode
/// propagation with condition numbers up to `10⁶` costs about `10⁻¹⁰`.
pub const PROPAGATION_TOL: f64 = 1e-8;

/// Matrix of the generator `ρ̇ = Lρ` acting on column-stacked `vec(ρ)`.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    dim: usize,
    mat: ComplexMatrix,
}

impl Liouvillian {
    /// `−i[H,ρ] + Σₖ D[Lₖ]ρ`.
    pub fn assemble(t: &SlhTriple) -> Result<Self> {
        Self::from_parts(&t.h, &t.l)
    }

    pub fn from_parts(h: &ComplexMatrix, jumps: &[ComplexMatrix]) -> Result<Self> {
        let d = h.require_square()?;
        let defect = h.hermiticity_defect();
        if defect > STATE_TOL * h.max_abs().max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        let id = ComplexMatrix::identity(d);
        let mut mat = (kron(&id, h) - kron(&h.transpose(), &id)) * (-I);
        for x in jumps {
            if x.rows() != d || x.cols() != d {
                return Err(Error::Dimension("jump operator size differs from the Hamiltonian".into()));
            }
            let xdx = x.dagger() * x;
            mat += &kron(&x.conj(), x);
            mat -= &(kron(&id, &xdx) + kron(&xdx.transpose(), &id)).scale_real(0.5);
        }
        Ok(Self { dim: d, mat })
    }

    /// Liouvillian of the diode at the given parameters.
    pub fn diode(p: &DiodeParams) -> Result<Self> {
        Self::assemble(&build_cascade(p)?)
    }

    /// Hilbert-space dimension `d`; the matrix is `d² × d²`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    /// `L` applied to an operator.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let v = self.mat.apply(&x.vectorize())?;
        ComplexMatrix::unvectorize(self.dim, &v)
    }

    /// `max |vec(I)† L|`, zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for col in 0..n * n {
            let s: C64 = (0..n).map(|k| self.mat[(k + k * n, col)]).sum();
            worst = worst.max(s.norm());
        }
        worst
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    rho: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates the state invariants (Hermiticity and trace within
    /// [`STATE_TOL`], eigenvalues above `−POSITIVITY_TOL`).
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        rho.require_square()?;
        if !rho.is_finite() {
            return Err(Error::NonFinite);
        }
        let herm = rho.hermiticity_defect();
        if herm > STATE_TOL {
            return Err(Error::instability("liouville", format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = rho.trace();
        if (tr - ONE).norm() > STATE_TOL {
            return Err(Error::instability("liouville", format!("density matrix trace {tr}")));
        }
        let min_ev = rho.hermitian_eigenvalues().first().copied().unwrap_or(0.0);
        if min_ev < -POSITIVITY_TOL {
            return Err(Error::instability("liouville", format!("negative eigenvalue {min_ev:e}")));
        }
        Ok(Self { rho: rho.hermitian_part() })
    }

    /// Hermitian part, scaled to unit trace, then validated.
    pub fn normalized(rho: ComplexMatrix) -> Result<Self> {
        let tr = rho.trace();
        if tr.norm() < f64::MIN_POSITIVE {
            return Err(Error::instability("liouville", "zero-trace operator cannot be normalized"));
        }
        Self::new((rho * tr.inv()).hermitian_part())
    }

    pub fn pure(ket: &[C64]) -> Result<Self> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidParams("zero ket".into()));
        }
        let k: Vec<C64> = ket.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&k, &k))
    }

    /// `|gg⟩⟨gg|`
    pub fn ground() -> Self {
        Self::symmetric(sym::G)
    }

    /// Projector onto a symmetric-basis state (see [`sym`]).
    pub fn symmetric(index: usize) -> Self {
        Self::pure(&sym_ket(index)).expect("basis kets are normalized")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    /// `Tr{Xρ}`
    pub fn expect(&self, x: &ComplexMatrix) -> C64 {
        (x * &self.rho).trace()
    }

    /// Populations of `|G⟩, |D⟩, |B⟩, |E⟩`.
    pub fn symmetric_populations(&self) -> Result<[f64; 4]> {
        if self.dim() != 4 {
            return Err(Error::Dimension("symmetric populations need a two-atom state".into()));
        }
        let mut out = [0.0; 4];
        for (k, slot) in out.iter_mut().enumerate() {
            let ket = sym_ket(k);
            let rk = self.rho.apply(&ket)?;
            *slot = ket.iter().zip(&rk).map(|(a, b)| a.conj() * b).sum::<C64>().re;
        }
        Ok(out)
    }
}

/// Result of [`steady_state`].
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// True when the null space was more than one-dimensional and the state was
    /// obtained by propagating the fallback.
    pub degenerate: bool,
    pub null_dim: usize,
    /// `‖L vec(ρ)‖_max`
    pub residual: f64,
}

/// Knobs for [`steady_state_with`].
#[derive(Clone, Copy, Debug)]
pub struct SteadyStateOptions {
    /// Relative singular-value cutoff for the null space.
    pub null_tol: f64,
    /// Degenerate case: propagate to `horizon / (slowest nonzero |Re λ|)`.
    pub horizon: f64,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self { null_tol: DEFAULT_NULL_TOL, horizon: 1e5 }
    }
}

/// Stationary state of `l`.
///
/// A one-dimensional null space gives the state directly. A degenerate null
/// space means the long-time state depends on the initial condition, so
/// `fallback` is propagated to `10⁵` times the slowest decay time instead.
pub fn steady_state(l: &Liouvillian, fallback: &DensityMatrix) -> Result<SteadyState> {
    steady_state_with(l, fallback, SteadyStateOptions::default())
}

pub fn steady_state_with(l: &Liouvillian, fallback: &DensityMatrix, opts: SteadyStateOptions) -> Result<SteadyState> {
    if fallback.dim() != l.dim {
        return Err(Error::Dimension("fallback state does not match the Liouvillian".into()));
    }
    let ns = nullspace(&l.mat, opts.null_tol)?;
    let rho = match ns.dim() {
        0 => return Err(Error::EmptyNullspace),
        1 => DensityMatrix::normalized(ComplexMatrix::unvectorize(l.dim, &ns.basis[0])?)?,
        _ => {
            let prop = Propagator::new(l)?;
            let t = match prop.slowest_rate() {
                Some(rate) => opts.horizon / rate,
                None => 0.0,
            };
            let out = prop.evolve(fallback.matrix(), t)?;
            DensityMatrix::normalized(out)?
        }
    };
    let residual = l.mat.apply(&rho.matrix().vectorize())?.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(SteadyState { rho, degenerate: ns.dim() > 1, null_dim: ns.dim(), residual })
}

/// Steady state of the diode, falling back to the ground state when degenerate.
pub fn diode_steady_state(p: &DiodeParams) -> Result<SteadyState> {
    steady_state(&Liouvillian::diode(p)?, &DensityMatrix::ground())
}

enum Engine {
    Modes { values: Vec<C64>, vectors: ComplexMatrix, inverse: ComplexMatrix },
    Dense { mat: ComplexMatrix },
}

/// `e^{Lt}` for many `t`, reusing one eigendecomposition of `L`.
///
/// Eigenvalues with `|λ| ≤ 10⁻¹³ max|λ|` are set to exactly zero and positive
/// real parts are clamped to zero, so stationary components stay stationary at
/// very long times. Non-diagonalizable generators fall back to Padé
/// exponentials.
pub struct Propagator {
    dim: usize,
    spectrum: Vec<C64>,
    engine: Engine,
}

impl Propagator {
    pub fn new(l: &Liouvillian) -> Result<Self> {
        let eig = eigen(&l.mat);
        let scale = l.mat.max_abs();
        let snap = |z: C64| {
            if z.norm() <= ZERO_MODE_TOL * scale {
                ZERO
            } else {
                C64::new(z.re.min(0.0), z.im)
            }
        };
        match eig {
            Ok(e) if e.condition < EXPM_CONDITION_LIMIT => {
                let values: Vec<C64> = e.values.iter().map(|&z| snap(z)).collect();
                Ok(Self {
                    dim: l.dim,
                    spectrum: values.clone(),
                    engine: Engine::Modes { values, vectors: e.vectors, inverse: e.inverse },
                })
            }
            other => {
                let spectrum = other.map(|e| e.values.iter().map(|&z| snap(z)).collect()).unwrap_or_default();
                Ok(Self { dim: l.dim, spectrum, engine: Engine::Dense { mat: l.mat.clone() } })
            }
        }
    }

    /// Snapped eigenvalues of `L`.
    pub fn spectrum(&self) -> &[C64] {
        &self.spectrum
    }

    /// True when the eigendecomposition is in use.
    pub fn is_diagonalized(&self) -> bool {
        matches!(self.engine, Engine::Modes { .. })
    }

    /// Smallest nonzero `|Re λ|`.
    pub fn slowest_rate(&self) -> Option<f64> {
        self.spectrum.iter().map(|z| -z.re).filter(|&r| r > 0.0).min_by(f64::total_cmp)
    }

    fn check_time(t: f64) -> Result<()> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParams(format!("propagation time must be finite and nonnegative, got {t}")));
        }
        Ok(())
    }

    /// `e^{Lt} vec(x)`.
    pub fn apply(&self, v: &[C64], t: f64) -> Result<Vec<C64>> {
        Self::check_time(t)?;
        match &self.engine {
            Engine::Modes { values, vectors, inverse } => {
                let mut c = inverse.apply(v)?;
                for (ck, lam) in c.iter_mut().zip(values) {
                    *ck *= (lam * t).exp();
                }
                vectors.apply(&c)
            }
            Engine::Dense { mat } => expm_pade(&mat.scale_real(t))?.apply(v),
        }
    }

    /// `e^{Lt}` applied to an arbitrary operator (not necessarily a state).
    pub fn evolve(&self, x: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
        ComplexMatrix::unvectorize(self.dim, &self.apply(&x.vectorize(), t)?)
    }

    /// `∫₀ᵗ e^{Ls} x ds`.
    pub fn integrate(&self, x: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
        Self::check_time(t)?;
        let v = x.vectorize();
        let out = match &self.engine {
            Engine::Modes { values, vectors, inverse } => {
                let mut c = inverse.apply(&v)?;
                for (ck, &lam) in c.iter_mut().zip(values) {
                    *ck *= if lam == ZERO { C64::new(t, 0.0) } else { ((lam * t).exp() - ONE) / lam };
                }
                vectors.apply(&c)?
            }
            Engine::Dense { mat } => {
                // Top-right block of exp([[L, I], [0, 0]] t).
                let n = mat.rows();
                let mut aug = ComplexMatrix::zeros(2 * n, 2 * n);
                for i in 0..n {
                    for j in 0..n {
                        aug[(i, j)] = mat[(i, j)] * t;
                    }
                    aug[(i, n + i)] = C64::new(t, 0.0);
                }
                let e = expm_pade(&aug)?;
                let block = ComplexMatrix::from_fn(n, n, |i, j| e[(i, n + j)]);
                block.apply(&v)?
            }
        };
        ComplexMatrix::unvectorize(self.dim, &out)
    }

    /// `f(t) = Tr{A e^{Lt}(x)}` prepared for repeated evaluation.
    pub fn scalar_series(&self, observable: &ComplexMatrix, x: &ComplexMatrix) -> Result<ScalarSeries> {
        // Tr{A Y} = vec(Aᵀ) · vec(Y)
        let a = observable.transpose().vectorize();
        match &self.engine {
            Engine::Modes { values, vectors, inverse } => {
                let c = inverse.apply(&x.vectorize())?;
                let n = values.len();
                let weights = (0..n)
                    .map(|k| {
                        let proj: C64 = (0..n).map(|i| a[i] * vectors[(i, k)]).sum();
                        proj * c[k]
                    })
                    .collect();
                Ok(ScalarSeries::Modes { values: values.clone(), weights })
            }
            Engine::Dense { mat } => Ok(ScalarSeries::Dense { mat: mat.clone(), observable: a, x: x.vectorize() }),
        }
    }
}

/// Scalar time trace produced by [`Propagator::scalar_series`].
pub enum ScalarSeries {
    Modes { values: Vec<C64>, weights: Vec<C64> },
    Dense { mat: ComplexMatrix, observable: Vec<C64>, x: Vec<C64> },
}

impl ScalarSeries {
    pub fn at(&self, t: f64) -> Result<C64> {
        Propagator::check_time(t)?;
        match self {
            Self::Modes { values, weights } => Ok(values.iter().zip(weights).map(|(l, w)| w * (l * t).exp()).sum()),
            Self::Dense { mat, observable, x } => {
                let y = expm_pade(&mat.scale_real(t))?.apply(x)?;
                Ok(observable.iter().zip(&y).map(|(a, b)| a * b).sum())
            }
        }
    }

    /// Value as `t → ∞`: the sum over zero modes.
    pub fn limit(&self) -> Option<C64> {
        match self {
            Self::Modes { values, weights } => {
                if values.iter().any(|l| l.re == 0.0 && *l != ZERO) {
                    return None;
                }
                Some(values.iter().zip(weights).filter(|(l, _)| **l == ZERO).map(|(_, w)| *w).sum())
            }
            Self::Dense { .. } => None,
        }
    }
}

/// `ρ(t)` from `ρ(0)` under `l`.
pub fn propagate(l: &Liouvillian, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if rho0.dim() != l.dim {
        return Err(Error::Dimension("state does not match the Liouvillian".into()));
    }
    Propagator::check_time(t)?;
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let out = Propagator::new(l)?.evolve(rho0.matrix(), t)?;
    let herm = out.hermiticity_defect();
    let drift = (out.trace() - ONE).norm();
    if herm > PROPAGATION_TOL || drift > PROPAGATION_TOL {
        return Err(Error::instability("liouville", format!("propagation lost hermiticity ({herm:e}) or trace ({drift:e})")));
    }
    DensityMatrix::normalized(out)
}

/// Drive configuration covered by the perturbative tables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Drive {
    Left(f64),
    Right(f64),
}

/// `ρ_ss ≈ ρ̄₀ + iδρ̄₁` for single-sided driving on the optimal slice.
#[derive(Clone, Debug)]
pub struct PerturbativeSolution {
    pub rho0: ComplexMatrix,
    pub rho1: ComplexMatrix,
    pub drive: Drive,
    pub delta: f64,
    pub order: u32,
    /// `a₀ = 6 + 4α² + 8α⁴` or `b₀ = 2(1 + 2β² + 4β⁴)`.
    pub normalizer: f64,
}

impl PerturbativeSolution {
    /// `ρ̄₀` at order 0, `ρ̄₀ + iδρ̄₁` at order 1.
    pub fn state(&self) -> ComplexMatrix {
        if self.order == 0 {
            self.rho0.clone()
        } else {
            &self.rho0 + &(&self.rho1 * C64::new(0.0, self.delta))
        }
    }

    /// `normalizer · ρ̄₀[ge, ge]`, which equals `2 + α² + 2α⁴` (left drive) or
    /// `β² + 2β⁴` (right drive).
    pub fn single_excitation_weight(&self) -> f64 {
        self.normalizer * self.rho0[(1, 1)].re
    }

    /// Population ratio `p_D/p_G` of `ρ̄₀`.
    pub fn dark_ground_ratio(&self) -> f64 {
        let d = sym_ket(sym::D);
        let rd = self.rho0.apply(&d).expect("4x4");
        let pd: C64 = d.iter().zip(&rd).map(|(a, b)| a.conj() * b).sum();
        pd.re / self.rho0[(0, 0)].re
    }
}

/// Tabulated leading-order steady states.
pub fn perturbative_steady_state(p: &DiodeParams, order: u32) -> Result<PerturbativeSolution> {
    if order > 1 {
        return Err(Error::UnsupportedOrder(order));
    }
    let delta = p
        .optimal_delta()
        .ok_or_else(|| Error::InvalidParams("perturbative tables hold on the optimal slice only".into()))?;
    if p.alpha.im != 0.0 || p.beta.im != 0.0 {
        return Err(Error::InvalidParams("perturbative tables assume real drive amplitudes".into()));
    }
    let (a, b) = (p.alpha.re, p.beta.re);
    let drive = match (a != 0.0, b != 0.0) {
        (true, false) => Drive::Left(a),
        (false, true) => Drive::Right(b),
        _ => {
            return Err(Error::InvalidParams("exactly one of alpha, beta must be nonzero".into()));
        }
    };
    let (rho0, rho1, normalizer) = match drive {
        Drive::Left(a) => left_tables(a),
        Drive::Right(b) => right_tables(b),
    };
    Ok(PerturbativeSolution { rho0, rho1, drive, delta, order, normalizer })
}

fn table(rows: [[f64; 4]; 4], norm: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(4, 4, |i, j| C64::new(rows[i][j] / norm, 0.0))
}

fn left_tables(a: f64) -> (ComplexMatrix, ComplexMatrix, f64) {
    let (a2, a3, a4) = (a * a, a * a * a, a * a * a * a);
    let a0 = 6.0 + 4.0 * a2 + 8.0 * a4;
    let r = SQRT_2;
    let rho0 = [
        [2.0 + 2.0 * a2 + 2.0 * a4, r * a * (1.0 + a2), -r * a * (1.0 + a2), -2.0 * a2],
        [r * a * (1.0 + a2), 2.0 + a2 + 2.0 * a4, 2.0 - a2, -r * a3],
        [-r * a * (1.0 + a2), 2.0 - a2, 2.0 + a2 + 2.0 * a4, r * a3],
        [-2.0 * a2, -r * a3, r * a3, 2.0 * a4],
    ];
    let rho1 = [
        [0.0, r / a * (1.0 + a4), r / a * (1.0 + a2 + 2.0 * a4), 2.0 * a2],
        [-r / a * (1.0 + a4), 0.0, a2, r * a * (1.0 + 2.0 * a2)],
        [-r / a * (1.0 + a4), -a2, 0.0, r * a * (1.0 + 2.0 * a2)],
        [-2.0 * a2, -r * a * (1.0 + 2.0 * a2), -r * a * (1.0 + 2.0 * a2), 0.0],
    ];
    (table(rho0, a0), table(rho1, a0), a0)
}

fn right_tables(b: f64) -> (ComplexMatrix, ComplexMatrix, f64) {
    let (b2, b3, b4) = (b * b, b * b * b, b * b * b * b);
    let b0 = 2.0 * (1.0 + 2.0 * b2 + 4.0 * b4);
    let r = SQRT_2;
    let rho0 = [
        [2.0 * (1.0 + b2 + b4), -r * b * (1.0 + b2), r * b * (1.0 + b2), -2.0 * b2],
        [-r * b * (1.0 + b2), b2 + 2.0 * b4, -b2, r * b3],
        [r * b * (1.0 + b2), -b2, b2 + 2.0 * b4, -r * b3],
        [-2.0 * b2, r * b3, -r * b3, 2.0 * b4],
    ];
    let rho1 = [
        [0.0, 0.0, -r * b * (1.0 + b2), 2.0 * b2],
        [0.0, 0.0, b2, -r * b3],
        [r * b * (1.0 + b2), -2.0 * b2, 0.0, 0.0],
        [-b2, r * b3, 0.0, 0.0],
    ];
    (table(rho0, b0), table(rho1, b0), b0)
}

fn spin_flip(rho: &ComplexMatrix) -> ComplexMatrix {
    let sy = ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]).expect("static shape");
    let yy = kron(&sy, &sy);
    &(&yy * &rho.conj()) * &yy
}

fn hermitian_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    let eig = m.hermitian_part().into_nalgebra().symmetric_eigen();
    let n = eig.eigenvalues.len();
    ComplexMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| eig.eigenvectors[(i, k)] * eig.eigenvalues[k].max(0.0).sqrt() * eig.eigenvectors[(j, k)].conj())
            .sum()
    })
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)` of a two-qubit state.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::Dimension(format!("concurrence needs a 4x4 state, got {0}x{0}", rho.dim())));
    }
    let s = hermitian_sqrt(rho.matrix());
    let r = &(&s * &spin_flip(rho.matrix())) * &s;
    let mut lam: Vec<f64> = r.hermitian_eigenvalues().into_iter().map(|x| x.max(0.0).sqrt()).collect();
    lam.sort_by(|a, b| b.total_cmp(a));
    Ok((lam[0] - lam[1] - lam[2] - lam[3]).max(0.0))
}

/// Tangle `C²`.
pub fn tangle(rho: &DensityMatrix) -> Result<f64> {
    concurrence(rho).map(|c| c * c)
}
