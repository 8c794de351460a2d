//! Output fields and their two-time correlation functions.
//!
//! A Lindblad operator `L` of the network is also the output field in that
//! channel, so amplitudes are `Tr{Lρ}` and fluxes `Tr{L†Lρ}`. Two-time
//! correlators follow the quantum regression recipe at stationarity:
//!
//! ```text
//! g⁽¹⁾(τ) = Tr{L e^{𝓛τ}(ρ L†)} / Tr{L†L ρ}
//! g⁽²⁾(τ) = Tr{L†L e^{𝓛τ}(L ρ L†)} / Tr{L†L ρ}²
//! ```

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::liouville::{DensityMatrix, Liouvillian, Propagator, ScalarSeries};
use crate::qmat::ComplexMatrix;
use crate::slh::{build_cascade, DiodeParams, SlhTriple};

/// Fluxes below this are treated as zero.
pub const MIN_FLUX: f64 = 1e-30;

/// Relative size of the imaginary residue tolerated in `g⁽²⁾`. Dividing by the
/// squared flux amplifies round-off: at flux `~10⁻⁸` a residue of `10⁻⁸` is
/// plain double-precision noise.
pub const G2_REAL_TOL: f64 = 1e-6;

/// Output channel. Index 0 of an [`SlhTriple`] is right-moving, index 1 left-moving.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Right,
    Left,
}

impl Direction {
    pub fn index(self) -> usize {
        match self {
            Direction::Right => 0,
            Direction::Left => 1,
        }
    }

    pub fn operator(self, t: &SlhTriple) -> &ComplexMatrix {
        &t.l[self.index()]
    }
}

/// Amplitudes and fluxes of both outputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluxRecord {
    /// `Tr{L_← ρ}`
    pub amp_left: C64,
    /// `Tr{L_→ ρ}`
    pub amp_right: C64,
    /// `Tr{L_←†L_← ρ}`
    pub flux_left: f64,
    /// `Tr{L_→†L_→ ρ}`
    pub flux_right: f64,
}

impl FluxRecord {
    pub fn total_flux(&self) -> f64 {
        self.flux_left + self.flux_right
    }
}

/// Output amplitudes and fluxes for state `rho`.
pub fn output_fields(t: &SlhTriple, rho: &DensityMatrix) -> Result<FluxRecord> {
    if t.l.len() != 2 || rho.dim() != t.dim() {
        return Err(Error::Dimension("need a two-port network matching the state".into()));
    }
    let right = Direction::Right.operator(t);
    let left = Direction::Left.operator(t);
    Ok(FluxRecord {
        amp_left: rho.expect(left),
        amp_right: rho.expect(right),
        flux_left: rho.expect(&(left.dagger() * left)).re,
        flux_right: rho.expect(&(right.dagger() * right)).re,
    })
}

/// Stationary correlators of one output channel, ready for evaluation at any τ.
pub struct Correlator {
    flux: f64,
    amplitude: C64,
    g1_num: ScalarSeries,
    g2_num: ScalarSeries,
}

impl Correlator {
    /// `prop` must be the propagator of the Liouvillian that `rho_ss` is
    /// stationary under.
    pub fn new(prop: &Propagator, lop: &ComplexMatrix, rho_ss: &DensityMatrix) -> Result<Self> {
        if lop.rows() != rho_ss.dim() || lop.cols() != rho_ss.dim() {
            return Err(Error::Dimension("output operator does not match the state".into()));
        }
        let rho = rho_ss.matrix();
        let ldl = lop.dagger() * lop;
        let flux = (&ldl * rho).trace().re;
        if !(flux > MIN_FLUX) {
            return Err(Error::ZeroFlux);
        }
        let amplitude = (lop * rho).trace();
        let g1_num = prop.scalar_series(lop, &(rho * &lop.dagger()))?;
        let g2_num = prop.scalar_series(&ldl, &(&(lop * rho) * &lop.dagger()))?;
        Ok(Self { flux, amplitude, g1_num, g2_num })
    }

    pub fn flux(&self) -> f64 {
        self.flux
    }

    pub fn amplitude(&self) -> C64 {
        self.amplitude
    }

    pub fn g1(&self, tau: f64) -> Result<C64> {
        Ok(self.g1_num.at(tau)? / self.flux)
    }

    /// Real part of the normalized intensity correlation; fails if the
    /// imaginary residue or negativity exceed [`G2_REAL_TOL`].
    pub fn g2(&self, tau: f64) -> Result<f64> {
        let z = self.g2_num.at(tau)? / (self.flux * self.flux);
        if z.im.abs() > G2_REAL_TOL * z.re.abs().max(1.0) || z.re < -G2_REAL_TOL {
            return Err(Error::instability("correlations", format!("g2({tau}) = {z} is not a nonnegative real")));
        }
        Ok(z.re)
    }

    /// `|Tr{Lρ}|² / Tr{L†Lρ}`, the coherent fraction of the flux.
    pub fn g1_infinity(&self) -> C64 {
        C64::new(self.amplitude.norm_sqr() / self.flux, 0.0)
    }
}

/// τ grid with both normalized correlators.
#[derive(Clone, Debug)]
pub struct CorrelationSeries {
    pub tau: Vec<f64>,
    pub g1: Vec<C64>,
    pub g2: Vec<f64>,
    pub g1_infinity: C64,
    pub g2_zero: f64,
}

/// Both correlators of output `lop` on `tau`.
pub fn correlation_series(
    l: &Liouvillian,
    lop: &ComplexMatrix,
    rho_ss: &DensityMatrix,
    tau: &[f64],
) -> Result<CorrelationSeries> {
    let prop = Propagator::new(l)?;
    series_with(&prop, lop, rho_ss, tau)
}

/// As [`correlation_series`] with a propagator shared between channels.
pub fn series_with(prop: &Propagator, lop: &ComplexMatrix, rho_ss: &DensityMatrix, tau: &[f64]) -> Result<CorrelationSeries> {
    let c = Correlator::new(prop, lop, rho_ss)?;
    let g1 = tau.iter().map(|&t| c.g1(t)).collect::<Result<Vec<_>>>()?;
    let g2 = tau.iter().map(|&t| c.g2(t)).collect::<Result<Vec<_>>>()?;
    Ok(CorrelationSeries { tau: tau.to_vec(), g1, g2, g1_infinity: c.g1_infinity(), g2_zero: c.g2(0.0)? })
}

/// `g⁽¹⁾(τ)` of output `lop`.
pub fn g1(l: &Liouvillian, lop: &ComplexMatrix, rho_ss: &DensityMatrix, tau: &[f64]) -> Result<Vec<C64>> {
    let c = Correlator::new(&Propagator::new(l)?, lop, rho_ss)?;
    tau.iter().map(|&t| c.g1(t)).collect()
}

/// `g⁽²⁾(τ)` of output `lop`.
pub fn g2(l: &Liouvillian, lop: &ComplexMatrix, rho_ss: &DensityMatrix, tau: &[f64]) -> Result<Vec<f64>> {
    let c = Correlator::new(&Propagator::new(l)?, lop, rho_ss)?;
    tau.iter().map(|&t| c.g2(t)).collect()
}

/// Leading-order correlator limits for left driving on the optimal slice.
pub mod closed_form {
    /// `(6α² + δ²)/(2α² + δ²)`
    pub fn g2_reflected_zero(alpha: f64, delta: f64) -> f64 {
        let (a2, d2) = (alpha * alpha, delta * delta);
        (6.0 * a2 + d2) / (2.0 * a2 + d2)
    }

    /// `3/2 + δ²/(4α²)`
    pub fn g2_transmitted_zero(alpha: f64, delta: f64) -> f64 {
        1.5 + delta * delta / (4.0 * alpha * alpha)
    }

    /// `(2α² − δ²)² / ((4α² + δ²)² − 4α⁴)`
    pub fn g1_reflected_infinity(alpha: f64, delta: f64) -> f64 {
        let (a2, d2) = (alpha * alpha, delta * delta);
        (2.0 * a2 - d2).powi(2) / ((4.0 * a2 + d2).powi(2) - 4.0 * a2 * a2)
    }

    /// `4α² / (6α² + δ²)`
    pub fn g1_transmitted_infinity(alpha: f64, delta: f64) -> f64 {
        let (a2, d2) = (alpha * alpha, delta * delta);
        4.0 * a2 / (6.0 * a2 + d2)
    }
}

/// Directional fluxes during free decay from `rho0`.
pub fn emission_profile(p: &DiodeParams, rho0: &DensityMatrix, t: &[f64]) -> Result<Vec<FluxRecord>> {
    let (triple, prop) = free_decay(p)?;
    t.iter()
        .map(|&ti| {
            let rho = DensityMatrix::new(prop.evolve(rho0.matrix(), ti)?)?;
            output_fields(&triple, &rho)
        })
        .collect()
}

/// Energy emitted to the left and right during free decay over `[0, t]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmittedEnergy {
    pub left: f64,
    pub right: f64,
}

impl EmittedEnergy {
    pub fn total(&self) -> f64 {
        self.left + self.right
    }

    pub fn left_fraction(&self) -> f64 {
        self.left / self.total()
    }
}

/// `∫₀ᵗ` of both fluxes, computed exactly from the propagator.
pub fn integrated_emission(p: &DiodeParams, rho0: &DensityMatrix, t: f64) -> Result<EmittedEnergy> {
    let (triple, prop) = free_decay(p)?;
    let acc = prop.integrate(rho0.matrix(), t)?;
    let flux = |d: Direction| {
        let l = d.operator(&triple);
        (&(l.dagger() * l) * &acc).trace().re
    };
    Ok(EmittedEnergy { left: flux(Direction::Left), right: flux(Direction::Right) })
}

fn free_decay(p: &DiodeParams) -> Result<(SlhTriple, Propagator)> {
    if p.alpha.norm() != 0.0 || p.beta.norm() != 0.0 {
        return Err(Error::InvalidParams("emission profiles describe free decay; set alpha = beta = 0".into()));
    }
    let triple = build_cascade(p)?;
    let prop = Propagator::new(&Liouvillian::assemble(&triple)?)?;
    Ok((triple, prop))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::diode_steady_state;
    use crate::slh::sym;
    use approx::assert_abs_diff_eq;

    fn driven(alpha: f64, beta: f64, delta: f64) -> (SlhTriple, Propagator, DensityMatrix) {
        let p = DiodeParams::optimal(delta).with_alpha(alpha).with_beta(beta);
        let t = build_cascade(&p).unwrap();
        let prop = Propagator::new(&Liouvillian::assemble(&t).unwrap()).unwrap();
        let rho = diode_steady_state(&p).unwrap().rho;
        (t, prop, rho)
    }

    #[test]
    fn undriven_ground_state_is_dark() {
        let t = build_cascade(&DiodeParams::optimal(1e-3)).unwrap();
        let f = output_fields(&t, &DensityMatrix::ground()).unwrap();
        assert_eq!(f, FluxRecord { amp_left: C64::new(0.0, 0.0), amp_right: C64::new(0.0, 0.0), flux_left: 0.0, flux_right: 0.0 });
        let prop = Propagator::new(&Liouvillian::assemble(&t).unwrap()).unwrap();
        assert!(matches!(Correlator::new(&prop, &t.l[0], &DensityMatrix::ground()), Err(Error::ZeroFlux)));
    }

    #[test]
    fn right_drive_is_reflected() {
        let beta = 1e-3;
        let (t, _, rho) = driven(0.0, beta, 1e-3);
        let f = output_fields(&t, &rho).unwrap();
        assert_abs_diff_eq!(f.flux_right / (beta * beta), 1.0, epsilon = 1e-3);
        assert!(f.flux_left / (beta * beta) < 1e-3);
    }

    #[test]
    fn left_drive_fluxes() {
        let (alpha, delta) = (0.01, 1e-5);
        let (t, _, rho) = driven(alpha, 0.0, delta);
        let f = output_fields(&t, &rho).unwrap();
        let (a2, d2) = (alpha * alpha, delta * delta);
        let refl = (2.0 * a2 + d2) / (6.0 * a2 + d2);
        assert_abs_diff_eq!(f.flux_left / a2, refl, epsilon = 2e-3);
        assert_abs_diff_eq!(f.flux_right / a2, 1.0 - refl, epsilon = 2e-3);
        for (flux, amp) in [(f.flux_left, f.amp_left), (f.flux_right, f.amp_right)] {
            assert!(flux >= amp.norm_sqr() - 1e-10);
        }
    }

    #[test]
    fn normalization_and_limits() {
        let (alpha, delta) = (0.01, 1e-3);
        let (t, prop, rho) = driven(alpha, 0.0, delta);
        let slow = 3.0 * delta * delta;
        for d in [Direction::Left, Direction::Right] {
            let c = Correlator::new(&prop, d.operator(&t), &rho).unwrap();
            assert_abs_diff_eq!(c.g1(0.0).unwrap().re, 1.0, epsilon = 1e-8);
            assert_abs_diff_eq!(c.g1(0.0).unwrap().im, 0.0, epsilon = 1e-8);
            assert_abs_diff_eq!(c.g2(20.0 / slow).unwrap(), 1.0, epsilon = 1e-6);
            let late = c.g1(40.0 / slow).unwrap();
            assert!((late - c.g1_infinity()).norm() < 1e-6);
        }
        let refl = Correlator::new(&prop, Direction::Left.operator(&t), &rho).unwrap();
        assert_abs_diff_eq!(refl.g1_infinity().re, closed_form::g1_reflected_infinity(alpha, delta), epsilon = 5e-3);
        let trans = Correlator::new(&prop, Direction::Right.operator(&t), &rho).unwrap();
        assert_abs_diff_eq!(trans.g1_infinity().re, closed_form::g1_transmitted_infinity(alpha, delta), epsilon = 5e-3);
    }

    #[test]
    fn bunching_at_zero_delay() {
        let (alpha, delta) = (0.01, 1e-3);
        let (t, prop, rho) = driven(alpha, 0.0, delta);
        let refl = Correlator::new(&prop, Direction::Left.operator(&t), &rho).unwrap();
        let trans = Correlator::new(&prop, Direction::Right.operator(&t), &rho).unwrap();
        assert_abs_diff_eq!(refl.g2(0.0).unwrap(), closed_form::g2_reflected_zero(alpha, delta), epsilon = 2e-2);
        assert_abs_diff_eq!(trans.g2(0.0).unwrap(), closed_form::g2_transmitted_zero(alpha, delta), epsilon = 2e-2);
    }

    #[test]
    fn right_drive_is_coherent() {
        let (beta, delta) = (0.01, 1e-3);
        let (t, prop, rho) = driven(0.0, beta, delta);
        let c = Correlator::new(&prop, Direction::Right.operator(&t), &rho).unwrap();
        for tau in [0.0, 1.0, 1e3, 1e6] {
            assert_abs_diff_eq!(c.g2(tau).unwrap(), 1.0, epsilon = 1e-3);
        }
    }

    #[test]
    fn emission_from_ground_is_zero() {
        let out = emission_profile(&DiodeParams::optimal(0.1), &DensityMatrix::ground(), &[0.0, 1.0, 10.0]).unwrap();
        assert!(out.iter().all(|f| f.total_flux() == 0.0));
    }

    #[test]
    fn emission_requires_free_decay() {
        let p = DiodeParams::optimal(0.1).with_alpha(0.1);
        assert!(matches!(emission_profile(&p, &DensityMatrix::ground(), &[0.0]), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn dark_state_emits_left() {
        let delta = 0.1;
        let p = DiodeParams::optimal(delta);
        let e = integrated_emission(&p, &DensityMatrix::symmetric(sym::D), 20.0 / (delta * delta)).unwrap();
        assert!(e.left_fraction() >= 0.9, "{e:?}");
        assert_abs_diff_eq!(e.total(), 1.0, epsilon = 0.02);
        let profile = emission_profile(&p, &DensityMatrix::symmetric(sym::D), &[0.0, 10.0, 100.0, 1000.0]).unwrap();
        assert!(profile.iter().all(|f| f.flux_left >= 0.0 && f.flux_right >= 0.0));
    }
}
