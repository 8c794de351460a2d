//! Operator content of the bidirectionally cascaded two-atom network.
//!
//! Two two-level atoms sit on a waveguide. Each emits into both directions, the
//! field emitted by one is fed into the other with a propagation phase `φ`, and
//! coherent drives `α` (from the left, moving right) and `β` (from the right,
//! moving left) enter the chain. The cascade reduces to one SLH triple on the
//! four-dimensional two-atom space.
//!
//! Conventions used everywhere in the crate:
//!
//! * single-atom basis `(g, e)`, `σ₋ = |g⟩⟨e|`, `σ_z = |g⟩⟨g| − |e⟩⟨e|`;
//! * two-atom basis `{|gg⟩, |ge⟩, |eg⟩, |ee⟩}`, atom 1 is the left tensor factor;
//! * Lindblad operator index 0 is the right-moving output `L_→`, index 1 the
//!   left-moving output `L_←`;
//! * rates in units of γ, times in 1/γ, amplitudes in √γ.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qmat::{kron, projector_range, singular_values, subspace_pseudo_inverse, ComplexMatrix, I, ONE, ZERO};

/// Indices of the symmetric basis `{|G⟩, |D⟩, |B⟩, |E⟩}`.
pub mod sym {
    /// `|gg⟩`
    pub const G: usize = 0;
    /// `(|ge⟩ + |eg⟩)/√2`, dark on the optimal slice.
    pub const D: usize = 1;
    /// `(|ge⟩ − |eg⟩)/√2`
    pub const B: usize = 2;
    /// `|ee⟩`
    pub const E: usize = 3;
}

/// Physical parameters of the two-atom diode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiodeParams {
    pub gamma1: f64,
    pub gamma2: f64,
    /// Detuning of atom 1 from the carrier.
    pub domega1: f64,
    /// Detuning of atom 2 from the carrier.
    pub domega2: f64,
    /// Propagation phase minus π.
    pub dphi: f64,
    /// Drive entering from the left.
    pub alpha: C64,
    /// Drive entering from the right.
    pub beta: C64,
}

impl Default for DiodeParams {
    fn default() -> Self {
        Self {
            gamma1: 1.0,
            gamma2: 1.0,
            domega1: 0.0,
            domega2: 0.0,
            dphi: 0.0,
            alpha: ZERO,
            beta: ZERO,
        }
    }
}

impl DiodeParams {
    /// The optimal slice: `domega1 = −δ`, `domega2 = 0`, `dphi = −δ`, unit
    /// decay rates and no drive.
    pub fn optimal(delta: f64) -> Self {
        Self { domega1: -delta, dphi: -delta, ..Self::default() }
    }

    pub fn with_alpha(self, alpha: impl Into<C64>) -> Self {
        Self { alpha: alpha.into(), ..self }
    }

    pub fn with_beta(self, beta: impl Into<C64>) -> Self {
        Self { beta: beta.into(), ..self }
    }

    /// Drives removed.
    pub fn undriven(self) -> Self {
        Self { alpha: ZERO, beta: ZERO, ..self }
    }

    /// Full propagation phase `φ = π + dphi`.
    pub fn phi(&self) -> f64 {
        PI + self.dphi
    }

    /// `δ` if the parameters lie on the optimal slice with unit rates.
    pub fn optimal_delta(&self) -> Option<f64> {
        let on_slice = self.domega2 == 0.0
            && self.dphi == self.domega1
            && self.gamma1 == 1.0
            && self.gamma2 == 1.0;
        on_slice.then_some(-self.domega1)
    }

    /// Atoms exchanged together with the driving sides.
    pub fn mirrored(&self) -> Self {
        Self {
            gamma1: self.gamma2,
            gamma2: self.gamma1,
            domega1: self.domega2,
            domega2: self.domega1,
            dphi: self.dphi,
            alpha: self.beta,
            beta: self.alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let reals = [self.gamma1, self.gamma2, self.domega1, self.domega2, self.dphi];
        let cplx = [self.alpha.re, self.alpha.im, self.beta.re, self.beta.im];
        if reals.iter().chain(&cplx).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if !(self.gamma1 > 0.0 && self.gamma2 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "decay rates must be positive (gamma1 = {}, gamma2 = {})",
                self.gamma1, self.gamma2
            )));
        }
        Ok(())
    }
}

/// `(S, L, H)` for one network.
///
/// `s` is carried for completeness and is always the identity: the drives are
/// folded into `l` and `h`, so nothing downstream reads it.
#[derive(Clone, Debug)]
pub struct SlhTriple {
    pub s: ComplexMatrix,
    pub l: Vec<ComplexMatrix>,
    pub h: ComplexMatrix,
}

impl SlhTriple {
    pub fn new(l: Vec<ComplexMatrix>, h: ComplexMatrix) -> Result<Self> {
        let d = h.require_square()?;
        if let Some(bad) = l.iter().find(|x| x.rows() != d || x.cols() != d) {
            return Err(Error::Dimension(format!(
                "Lindblad operator is {}x{}, Hamiltonian is {d}x{d}",
                bad.rows(),
                bad.cols()
            )));
        }
        let defect = h.hermiticity_defect();
        if defect > 1e-12 * h.max_abs().max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        let n = l.len();
        Ok(Self { s: ComplexMatrix::identity(n), l, h })
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    /// `Σₖ Lₖ†Lₖ`
    pub fn decay_operator(&self) -> ComplexMatrix {
        let d = self.dim();
        self.l.iter().fold(ComplexMatrix::zeros(d, d), |acc, x| acc + x.dagger() * x)
    }
}

/// `σ₋ = |g⟩⟨e|` in the `(g, e)` basis.
pub fn sigma_minus() -> ComplexMatrix {
    ComplexMatrix::outer(&[ONE, ZERO], &[ZERO, ONE])
}

/// `σ_z = diag(1, −1)` in the `(g, e)` basis.
pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::diag_real(&[1.0, -1.0])
}

/// Lifts a single-atom operator onto atom `k` (1 or 2) of the pair.
pub fn on_atom(op: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    match k {
        1 => kron(op, &id),
        2 => kron(&id, op),
        _ => panic!("atom index must be 1 or 2, got {k}"),
    }
}

/// Bare atomic jump operators `Lₖ = √(γₖ/2) σ₋⁽ᵏ⁾`.
pub fn atomic_jumps(p: &DiodeParams) -> [ComplexMatrix; 2] {
    let sm = sigma_minus();
    [
        on_atom(&sm, 1).scale_real((p.gamma1 / 2.0).sqrt()),
        on_atom(&sm, 2).scale_real((p.gamma2 / 2.0).sqrt()),
    ]
}

fn bare_hamiltonian(p: &DiodeParams) -> ComplexMatrix {
    let sz = sigma_z();
    on_atom(&sz, 1).scale_real(-p.domega1 / 2.0) + on_atom(&sz, 2).scale_real(-p.domega2 / 2.0)
}

/// Total Hamiltonian and both output operators of the cascaded network.
pub fn build_cascade(p: &DiodeParams) -> Result<SlhTriple> {
    p.validate()?;
    let [l1, l2] = atomic_jumps(p);
    let id = ComplexMatrix::identity(4);
    let e = C64::from_polar(1.0, p.phi());
    let (a, b) = (p.alpha, p.beta);
    let minus_half_i = C64::new(0.0, -0.5);

    let drive1 = (l1.dagger() * a - &l1 * a.conj()) * minus_half_i;
    let drive2 = (l2.dagger() * b - &l2 * b.conj()) * minus_half_i;
    let l1a = &l1 + &id * a;
    let l2b = &l2 + &id * b;
    let feed12 = ((l2.dagger() * &l1a) * e - (l1a.dagger() * &l2) * e.conj()) * minus_half_i;
    let feed21 = ((l1.dagger() * &l2b) * e - (l2b.dagger() * &l1) * e.conj()) * minus_half_i;

    let h = bare_hamiltonian(p) + drive1 + drive2 + feed12 + feed21;
    let right = &l2 + &l1 * e + &id * (e * a);
    let left = &l1 + &l2 * e + &id * (e * b);
    // Rounding can leave an anti-Hermitian residue of order ε‖H‖.
    SlhTriple::new(vec![right, left], h.hermitian_part())
}

/// The cascaded model split into bare, coupling and drive Hamiltonians and
/// collective jump operators.
#[derive(Clone, Debug)]
pub struct Refactored {
    pub h0: ComplexMatrix,
    /// Exchange coupling `½√(γ₁γ₂) sin φ (σ₋¹σ₊² + σ₊¹σ₋²)`.
    pub hc: ComplexMatrix,
    pub hd: ComplexMatrix,
    /// `L̄₁ = L₁ + e^{iφ}L₂`, `L̄₂ = L₂ + e^{iφ}L₁`.
    pub lbar: Vec<ComplexMatrix>,
}

impl Refactored {
    pub fn hamiltonian(&self) -> ComplexMatrix {
        &self.h0 + &self.hc + &self.hd
    }

    pub fn triple(&self) -> Result<SlhTriple> {
        SlhTriple::new(self.lbar.clone(), self.hamiltonian().hermitian_part())
    }
}

/// Refactors the cascade so that the drives appear only in the Hamiltonian.
///
/// The master equation generated by [`Refactored::triple`] is identical to the
/// one generated by [`build_cascade`].
pub fn refactor(p: &DiodeParams) -> Result<Refactored> {
    p.validate()?;
    let [l1, l2] = atomic_jumps(p);
    let sm = sigma_minus();
    let (s1, s2) = (on_atom(&sm, 1), on_atom(&sm, 2));
    let phi = p.phi();
    let e = C64::from_polar(1.0, phi);
    let (a, b) = (p.alpha, p.beta);

    let coupling = 0.5 * (p.gamma1 * p.gamma2).sqrt() * phi.sin();
    let hc = (&s1 * s2.dagger() + s1.dagger() * &s2).scale_real(coupling);

    let drive_on_1 = a + e * b;
    let drive_on_2 = b + e * a;
    let hd = ((&s1 * drive_on_1.conj() - s1.dagger() * drive_on_1) * I).scale_real((p.gamma1 / 2.0).sqrt())
        + ((&s2 * drive_on_2.conj() - s2.dagger() * drive_on_2) * I).scale_real((p.gamma2 / 2.0).sqrt());

    let lbar = vec![&l1 + &l2 * e, &l2 + &l1 * e];
    Ok(Refactored { h0: bare_hamiltonian(p), hc, hd, lbar })
}

/// Unitary whose columns are `|G⟩, |D⟩, |B⟩, |E⟩` in the local basis.
pub fn symmetric_basis() -> ComplexMatrix {
    let r = FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, r, r, 0.0],
        &[0.0, r, -r, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
    ])
    .expect("static shape")
}

/// `U† m U`: matrix elements in the `{|G⟩, |D⟩, |B⟩, |E⟩}` basis.
pub fn to_symmetric_basis(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_two_atom(m)?;
    let u = symmetric_basis();
    Ok(m.compress(&u))
}

/// Inverse of [`to_symmetric_basis`].
pub fn from_symmetric_basis(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_two_atom(m)?;
    let u = symmetric_basis();
    Ok(&(&u * m) * &u.dagger())
}

fn require_two_atom(m: &ComplexMatrix) -> Result<()> {
    if m.rows() != 4 || m.cols() != 4 {
        return Err(Error::Dimension(format!("expected a 4x4 two-atom operator, got {}x{}", m.rows(), m.cols())));
    }
    Ok(())
}

/// Symmetric-basis state as a local-basis ket.
pub fn sym_ket(index: usize) -> Vec<C64> {
    let u = symmetric_basis();
    (0..4).map(|i| u[(i, index)]).collect()
}

/// `|s⟩⟨s|` for a symmetric-basis state, in the local basis.
pub fn sym_projector(index: usize) -> ComplexMatrix {
    let k = sym_ket(index);
    ComplexMatrix::outer(&k, &k)
}

/// Decay rates of the single-excitation states out of the undriven model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayRates {
    /// `Σₖ |⟨G|Lₖ|B⟩|²`
    pub bright: f64,
    /// `Σₖ |⟨G|Lₖ|D⟩|²` from the full jump operators. Equals `γ(1 + cos φ)`
    /// for identical atoms, `≈ δ²/2` on the optimal slice.
    pub dark_dissipator: f64,
    /// `δ²`, the rate quoted alongside the rate equations.
    pub dark_rate_equation: f64,
    /// `|⟨G|L̃_←|D⟩|²` of the adiabatically eliminated model.
    pub dark_eliminated: f64,
}

/// Dark- and bright-state decay rates for a given δ on the optimal slice.
pub fn decay_rates(delta: f64) -> Result<DecayRates> {
    let p = DiodeParams::optimal(delta);
    let t = build_cascade(&p)?;
    let g = sym_ket(sym::G);
    let rate = |idx: usize| -> Result<f64> {
        let ket = sym_ket(idx);
        let mut r = 0.0;
        for l in &t.l {
            let out = l.apply(&ket)?;
            let amp: C64 = g.iter().zip(&out).map(|(x, y)| x.conj() * y).sum();
            r += amp.norm_sqr();
        }
        Ok(r)
    };
    let elim = adiabatic_eliminate(&t, &SlowSubspace::ground_dark())?;
    let dark_eliminated = elim.triple.l.iter().map(|l| l[(0, 1)].norm_sqr()).sum();
    Ok(DecayRates {
        bright: rate(sym::B)?,
        dark_dissipator: rate(sym::D)?,
        dark_rate_equation: delta * delta,
        dark_eliminated,
    })
}

/// Slow subspace for adiabatic elimination, held as an orthonormal basis.
///
/// The basis fixes the matrix representation of the eliminated operators.
#[derive(Clone, Debug)]
pub struct SlowSubspace {
    basis: ComplexMatrix,
}

impl SlowSubspace {
    /// `{|G⟩, |D⟩}`, in that order.
    pub fn ground_dark() -> Self {
        let u = symmetric_basis();
        Self { basis: ComplexMatrix::from_fn(4, 2, |i, j| u[(i, j)]) }
    }

    /// Basis from an arbitrary orthogonal projector (ordering and phases are
    /// those of its eigenvectors).
    pub fn from_projector(projector: &ComplexMatrix) -> Result<Self> {
        Ok(Self { basis: projector_range(projector)? })
    }

    /// Basis given explicitly as columns; must be orthonormal.
    pub fn from_basis(basis: ComplexMatrix) -> Result<Self> {
        let gram = basis.dagger() * &basis;
        if (gram - ComplexMatrix::identity(basis.cols())).max_abs() > 1e-12 {
            return Err(Error::InvalidParams("slow basis is not orthonormal".into()));
        }
        Ok(Self { basis })
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn projector(&self) -> ComplexMatrix {
        &self.basis * self.basis.dagger()
    }
}

/// Diagnostics of an elimination.
#[derive(Clone, Debug)]
pub struct ValidityReport {
    /// `‖YΠ₀‖_max`
    pub y_pi0: f64,
    /// `‖FₖΠ₀‖_max` per jump operator.
    pub f_pi0: Vec<f64>,
    /// `‖Π₀AΠ₀‖_max`
    pub pi0_a_pi0: f64,
    /// `σ_min/σ_max` of `Y` restricted to the fast subspace.
    pub y_conditioning: f64,
    /// Anti-Hermitian residue of the reconstructed Hamiltonian.
    pub hermiticity_defect: f64,
}

/// Result of [`adiabatic_eliminate`].
#[derive(Clone, Debug)]
pub struct Eliminated {
    /// Operators on the slow subspace, in its basis.
    pub triple: SlhTriple,
    pub report: ValidityReport,
}

/// Tolerance on the elimination preconditions.
pub const ELIMINATION_TOL: f64 = 1e-8;

/// Adiabatically eliminates the complement of `slow`.
///
/// With `K = −(iH + ½ΣL†L)`, `Y = Π₁KΠ₁`, `A = Π₁KΠ₀ + Π₀KΠ₁`,
/// `B = Π₀KΠ₀`, `Fₖ = Π₁LₖΠ₁ + Π₀LₖΠ₁`, `Gₖ = Π₁LₖΠ₀ + Π₀LₖΠ₀` and `Ỹ`
/// the inverse of `Y` on the fast subspace, the reduced generator is
/// `K̃ = Π₀(B − AỸA)Π₀` and the reduced jumps are `L̃ₖ = (Gₖ − FₖỸA)Π₀`.
/// The Hamiltonian is recovered as `H̃ = i(K̃ + ½ΣL̃†L̃)`.
pub fn adiabatic_eliminate(t: &SlhTriple, slow: &SlowSubspace) -> Result<Eliminated> {
    let d = t.dim();
    if slow.basis.rows() != d {
        return Err(Error::Dimension(format!(
            "slow basis lives in dimension {}, operators in {d}",
            slow.basis.rows()
        )));
    }
    let p0 = slow.projector();
    let p1 = ComplexMatrix::identity(d) - &p0;
    let k = -(&t.h * I + t.decay_operator().scale_real(0.5));
    let y = &(&p1 * &k) * &p1;
    let a = &(&p1 * &k) * &p0 + &(&p0 * &k) * &p1;
    let b = &(&p0 * &k) * &p0;

    let y_pi0 = (&y * &p0).max_abs();
    let pi0_a_pi0 = (&(&p0 * &a) * &p0).max_abs();
    let mut f_pi0 = Vec::with_capacity(t.l.len());
    let mut fs = Vec::with_capacity(t.l.len());
    let mut gs = Vec::with_capacity(t.l.len());
    for l in &t.l {
        let f = &(&p1 * l) * &p1 + &(&p0 * l) * &p1;
        let g = &(&p1 * l) * &p0 + &(&p0 * l) * &p0;
        f_pi0.push((&f * &p0).max_abs());
        fs.push(f);
        gs.push(g);
    }
    let worst = f_pi0.iter().copied().fold(y_pi0.max(pi0_a_pi0), f64::max);
    if worst > ELIMINATION_TOL {
        return Err(Error::EliminationCondition(format!("max violation {worst:e}")));
    }

    let fast = projector_range(&p1)?;
    let y_conditioning = if fast.cols() == 0 {
        1.0
    } else {
        let sv = singular_values(&y.compress(&fast))?;
        if sv[0] == 0.0 { 0.0 } else { sv[sv.len() - 1] / sv[0] }
    };
    let yt = subspace_pseudo_inverse(&y, &p1)?;

    let ay = &a * &yt;
    let k_red = &(&p0 * &(&b - &(&ay * &a))) * &p0;
    let w = &slow.basis;
    let l_red: Vec<ComplexMatrix> = fs
        .iter()
        .zip(&gs)
        .map(|(f, g)| (&(g - &(&(f * &yt) * &a)) * &p0).compress(w))
        .collect();
    let k_small = k_red.compress(w);
    let n = w.cols();
    let decay = l_red.iter().fold(ComplexMatrix::zeros(n, n), |acc, x| acc + x.dagger() * x);
    let h_raw = (&k_small + &decay.scale_real(0.5)) * I;
    let hermiticity_defect = h_raw.hermiticity_defect();

    let triple = SlhTriple::new(l_red, h_raw.hermitian_part())?;
    Ok(Eliminated {
        triple,
        report: ValidityReport { y_pi0, f_pi0, pi0_a_pi0, y_conditioning, hermiticity_defect },
    })
}

/// Leading-order eliminated operators on `{|G⟩, |D⟩}` for real drive
/// amplitudes on the optimal slice:
/// `H̃ = αδσ̃ₓ/2`, `L̃_→ = ½((α−β)σ̃_z − (α+β))`,
/// `L̃_← = iδσ̃₋ − ½((α−β)σ̃_z + (α+β))`.
pub fn eliminated_closed_form(alpha: f64, beta: f64, delta: f64) -> SlhTriple {
    let sx = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("static shape");
    let sz = sigma_z();
    let sm = sigma_minus();
    let id = ComplexMatrix::identity(2);
    let h = sx.scale_real(alpha * delta / 2.0);
    let right = (sz.scale_real(alpha - beta) - id.scale_real(alpha + beta)).scale_real(0.5);
    let left = sm.scale(C64::new(0.0, delta)) - (sz.scale_real(alpha - beta) + id.scale_real(alpha + beta)).scale_real(0.5);
    SlhTriple::new(vec![right, left], h).expect("closed form is Hermitian")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::Liouvillian;
    use approx::assert_abs_diff_eq;

    fn random_params(seed: u64) -> DiodeParams {
        // Small deterministic generator so the test does not depend on rand.
        let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        DiodeParams {
            gamma1: 0.5 + next().abs(),
            gamma2: 0.5 + next().abs(),
            domega1: next(),
            domega2: next(),
            dphi: 3.0 * next(),
            alpha: C64::new(next(), next()),
            beta: C64::new(next(), next()),
        }
    }

    #[test]
    fn optimal_slice_mapping() {
        let p = DiodeParams::optimal(0.01);
        assert_eq!((p.domega1, p.domega2, p.dphi), (-0.01, 0.0, -0.01));
        assert_abs_diff_eq!(p.phi(), PI - 0.01, epsilon = 1e-15);
        assert_eq!(p.optimal_delta(), Some(0.01));
        assert_eq!(p.with_alpha(0.1).optimal_delta(), Some(0.01));
        assert_eq!(DiodeParams { domega2: 0.1, ..p }.optimal_delta(), None);
    }

    #[test]
    fn validate_rejects_nonpositive_rates() {
        let p = DiodeParams { gamma1: 0.0, ..DiodeParams::default() };
        assert!(matches!(build_cascade(&p), Err(Error::InvalidParams(_))));
        let p = DiodeParams { dphi: f64::NAN, ..DiodeParams::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn undriven_hamiltonian_matches_bright_dark_display() {
        for delta in [1e-2, 1e-3] {
            let t = build_cascade(&DiodeParams::optimal(delta)).unwrap();
            let hs = to_symmetric_basis(&t.h).unwrap();
            let want = ComplexMatrix::from_real_rows(&[
                &[delta, 0.0, 0.0, 0.0],
                &[0.0, delta, delta, 0.0],
                &[0.0, delta, -delta, 0.0],
                &[0.0, 0.0, 0.0, -delta],
            ])
            .unwrap()
            .scale_real(0.5);
            assert!((hs - want).max_abs() < delta * delta, "delta = {delta}");
        }
    }

    #[test]
    fn right_output_at_phi_pi_is_bright_coupling() {
        let t = build_cascade(&DiodeParams::default()).unwrap();
        let [l1, l2] = atomic_jumps(&DiodeParams::default());
        assert!((&t.l[0] - &(&l2 - &l1)).max_abs() < 1e-15);
        // Only |B⟩ couples: ⟨G|L_→|D⟩ = 0.
        let ls = to_symmetric_basis(&t.l[0]).unwrap();
        assert_abs_diff_eq!(ls[(sym::G, sym::D)].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ls[(sym::G, sym::B)].norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn drive_offset_on_ground_state() {
        for seed in 0..8 {
            let p = random_params(seed);
            let t = build_cascade(&p).unwrap();
            let e = C64::from_polar(1.0, p.phi());
            assert!((t.l[0][(0, 0)] - e * p.alpha).norm() < 1e-15);
            assert!((t.l[1][(0, 0)] - e * p.beta).norm() < 1e-15);
        }
    }

    #[test]
    fn coupling_coefficient() {
        let p = DiodeParams { gamma1: 0.7, gamma2: 1.3, dphi: 0.4, ..DiodeParams::default() };
        let r = refactor(&p).unwrap();
        // ⟨ge|H_C|eg⟩ is the σ₋¹σ₊² matrix element.
        let want = 0.5 * (0.7f64 * 1.3).sqrt() * p.phi().sin();
        assert_abs_diff_eq!(r.hc[(1, 2)].re, want, epsilon = 1e-15);
        let at_pi = refactor(&DiodeParams::default()).unwrap();
        assert!(at_pi.hc.max_abs() < 1e-16);
    }

    #[test]
    fn undriven_refactor_has_no_drive() {
        let r = refactor(&DiodeParams::optimal(0.02)).unwrap();
        assert_eq!(r.hd.max_abs(), 0.0);
    }

    #[test]
    fn refactored_liouvillian_matches_cascade() {
        for seed in 0..16 {
            let p = random_params(seed);
            let a = Liouvillian::assemble(&build_cascade(&p).unwrap()).unwrap();
            let b = Liouvillian::assemble(&refactor(&p).unwrap().triple().unwrap()).unwrap();
            let d = (a.mat() - b.mat()).max_abs();
            assert!(d < 1e-10, "seed {seed}: {d:e}");
        }
    }

    #[test]
    fn symmetric_basis_transform() {
        let id = to_symmetric_basis(&ComplexMatrix::identity(4)).unwrap();
        assert!((id - ComplexMatrix::identity(4)).max_abs() < 1e-15);

        let sm = sigma_minus();
        let collective = on_atom(&sm, 1) + on_atom(&sm, 2);
        let cs = to_symmetric_basis(&collective).unwrap();
        let s2 = 2f64.sqrt();
        // √2 |G⟩⟨D| + √2 |D⟩⟨E|, nothing touches |B⟩.
        let mut want = ComplexMatrix::zeros(4, 4);
        want[(sym::G, sym::D)] = C64::new(s2, 0.0);
        want[(sym::D, sym::E)] = C64::new(s2, 0.0);
        assert!((cs - want).max_abs() < 1e-15);

        assert!(matches!(to_symmetric_basis(&ComplexMatrix::identity(2)), Err(Error::Dimension(_))));
        let m = ComplexMatrix::from_fn(4, 4, |i, j| C64::new(i as f64, j as f64));
        let back = from_symmetric_basis(&to_symmetric_basis(&m).unwrap()).unwrap();
        assert!((back - m).max_abs() < 1e-14);
    }

    #[test]
    fn decay_rates_side_by_side() {
        for delta in [0.02, 0.005] {
            let r = decay_rates(delta).unwrap();
            let eps_sq = delta * delta / 4.0;
            assert_abs_diff_eq!(r.dark_dissipator, 1.0 - delta.cos(), epsilon = 1e-15);
            assert_abs_diff_eq!(r.dark_dissipator, 2.0 * eps_sq, epsilon = delta.powi(4));
            assert_abs_diff_eq!(r.bright, 1.0 + delta.cos(), epsilon = 1e-15);
            assert_abs_diff_eq!(r.bright, 2.0 * (1.0 + eps_sq), epsilon = delta.powi(2));
            assert_eq!(r.dark_rate_equation, delta * delta);
            assert_abs_diff_eq!(r.dark_eliminated, delta * delta, epsilon = 10.0 * delta.powi(3));
        }
    }

    #[test]
    fn elimination_conditions_hold_on_the_diode() {
        for (a, b, d) in [(0.03, 0.0, 1e-3), (0.0, 0.03, 1e-3), (0.05, 0.02, 0.05), (0.0, 0.0, 0.0)] {
            let t = build_cascade(&DiodeParams::optimal(d).with_alpha(a).with_beta(b)).unwrap();
            let e = adiabatic_eliminate(&t, &SlowSubspace::ground_dark()).unwrap();
            let rep = &e.report;
            assert!(rep.y_pi0 <= ELIMINATION_TOL && rep.pi0_a_pi0 <= ELIMINATION_TOL);
            assert!(rep.f_pi0.iter().all(|&x| x <= ELIMINATION_TOL));
            assert!(rep.y_conditioning > 0.1);
        }
    }

    #[test]
    fn eliminated_operators_match_closed_forms() {
        for (a, b, d) in [(0.01, 0.0, 1e-3), (0.0, 0.02, 0.01), (0.05, 0.05, 0.05), (0.03, 0.01, 0.02)] {
            let t = build_cascade(&DiodeParams::optimal(d).with_alpha(a).with_beta(b)).unwrap();
            let got = adiabatic_eliminate(&t, &SlowSubspace::ground_dark()).unwrap().triple;
            let want = eliminated_closed_form(a, b, d);
            let bound = 5.0 * (a + b + d) * (a + b + d);
            // H̃ carries an identity shift, which has no dynamical effect.
            let dh = (got.h.traceless_part() - want.h.traceless_part()).max_abs();
            assert!(dh <= bound, "H: {dh:e} > {bound:e}");
            for k in 0..2 {
                let dl = (&got.l[k] - &want.l[k]).max_abs();
                assert!(dl <= bound, "L[{k}]: {dl:e} > {bound:e}");
            }
        }
    }

    #[test]
    fn fully_decoupled_dark_state() {
        let t = build_cascade(&DiodeParams::default()).unwrap();
        let e = adiabatic_eliminate(&t, &SlowSubspace::ground_dark()).unwrap().triple;
        assert!(e.h.max_abs() < 1e-15);
        for l in &e.l {
            assert!(l[(0, 1)].norm() < 1e-15);
        }
    }

    #[test]
    fn misuse_slow_ground_only() {
        let t = build_cascade(&DiodeParams::default()).unwrap();
        let slow = SlowSubspace::from_projector(&sym_projector(sym::G)).unwrap();
        assert!(matches!(adiabatic_eliminate(&t, &slow), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn mirrored_params_swap_outputs() {
        let p = random_params(3);
        let t = build_cascade(&p).unwrap();
        let m = build_cascade(&p.mirrored()).unwrap();
        // Swapping atoms is the permutation ge <-> eg.
        let swap = ComplexMatrix::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        let conj = |x: &ComplexMatrix| &(&swap * x) * &swap;
        assert!((conj(&t.h) - &m.h).max_abs() < 1e-14);
        assert!((conj(&t.l[0]) - &m.l[1]).max_abs() < 1e-14);
        assert!((conj(&t.l[1]) - &m.l[0]).max_abs() < 1e-14);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn params() -> impl Strategy<Value = DiodeParams> {
            (
                0.1..3.0f64,
                0.1..3.0f64,
                -2.0..2.0f64,
                -2.0..2.0f64,
                -PI..PI,
                (-1.0..1.0f64, -1.0..1.0f64),
                (-1.0..1.0f64, -1.0..1.0f64),
            )
                .prop_map(|(g1, g2, w1, w2, ph, a, b)| DiodeParams {
                    gamma1: g1,
                    gamma2: g2,
                    domega1: w1,
                    domega2: w2,
                    dphi: ph,
                    alpha: C64::new(a.0, a.1),
                    beta: C64::new(b.0, b.1),
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn cascade_hamiltonian_is_hermitian(p in params()) {
                let t = build_cascade(&p).unwrap();
                prop_assert!(t.h.hermiticity_defect() <= 1e-12);
            }

            #[test]
            fn refactor_equivalence(p in params()) {
                let a = Liouvillian::assemble(&build_cascade(&p).unwrap()).unwrap();
                let b = Liouvillian::assemble(&refactor(&p).unwrap().triple().unwrap()).unwrap();
                prop_assert!((a.mat() - b.mat()).max_abs() < 1e-10);
            }

            #[test]
            fn elimination_validity(delta in 0.0..0.05f64, a in 0.0..0.05f64, b in 0.0..0.05f64) {
                let t = build_cascade(&DiodeParams::optimal(delta).with_alpha(a).with_beta(b)).unwrap();
                let e = adiabatic_eliminate(&t, &SlowSubspace::ground_dark()).unwrap();
                prop_assert!(e.report.y_pi0 <= ELIMINATION_TOL);
                prop_assert!(e.report.pi0_a_pi0 <= ELIMINATION_TOL);
                prop_assert!(e.report.f_pi0.iter().all(|&x| x <= ELIMINATION_TOL));
                let want = eliminated_closed_form(a, b, delta);
                let bound = 5.0 * (a + b + delta).powi(2);
                prop_assert!((e.triple.h.traceless_part() - want.h.traceless_part()).max_abs() <= bound);
                for k in 0..2 {
                    prop_assert!((&e.triple.l[k] - &want.l[k]).max_abs() <= bound);
                }
            }
        }
    }
}
