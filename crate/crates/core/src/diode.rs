//! Scattering matrices, transmittance sweeps and diode efficiency.
//!
//! Both matrices map inputs `(left, right)` to outputs `(left-moving,
//! right-moving)`:
//!
//! ```text
//! T = [[R_α, T_β],
//!      [T_α, R_β]]
//! ```
//!
//! Column 0 is populated by driving from the left only, column 1 by driving
//! from the right only.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::correlations::output_fields;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::liouville::diode_steady_state;
use crate::slh::{build_cascade, DiodeParams};

/// Largest δ and drive amplitude accepted by the closed forms.
pub const ADIABATIC_LIMIT: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Closed forms of the eliminated two-level model.
    Adiabatic,
    /// Steady states of the full four-level model.
    FullNumeric,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Adiabatic => "adiabatic-closed-form",
            Regime::FullNumeric => "full-numeric",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatteringMatrices {
    /// Output amplitude over input amplitude.
    pub s: [[C64; 2]; 2],
    /// Output flux over input flux.
    pub t: [[f64; 2]; 2],
    pub regime: Regime,
}

impl ScatteringMatrices {
    pub fn r_alpha(&self) -> f64 {
        self.t[0][0]
    }
    pub fn t_alpha(&self) -> f64 {
        self.t[1][0]
    }
    pub fn t_beta(&self) -> f64 {
        self.t[0][1]
    }
    pub fn r_beta(&self) -> f64 {
        self.t[1][1]
    }
}

/// Scattering matrices at `p`.
///
/// Each column is driven from its own side only. If one of `alpha`, `beta` is
/// zero, that column is evaluated at the other amplitude's magnitude (equal
/// input power).
pub fn scattering(p: &DiodeParams, regime: Regime) -> Result<ScatteringMatrices> {
    p.validate()?;
    let (a, b) = column_amplitudes(p)?;
    match regime {
        Regime::Adiabatic => adiabatic(p, a.norm(), b.norm()),
        Regime::FullNumeric => {
            let left = single_sided(&p.with_alpha(a).with_beta(0.0), a)?;
            let right = single_sided(&p.with_alpha(0.0).with_beta(b), b)?;
            Ok(ScatteringMatrices {
                s: [[left.0[0], right.0[0]], [left.0[1], right.0[1]]],
                t: [[left.1[0], right.1[0]], [left.1[1], right.1[1]]],
                regime,
            })
        }
    }
}

fn column_amplitudes(p: &DiodeParams) -> Result<(C64, C64)> {
    let (na, nb) = (p.alpha.norm(), p.beta.norm());
    match (na > 0.0, nb > 0.0) {
        (true, true) => Ok((p.alpha, p.beta)),
        (true, false) => Ok((p.alpha, C64::new(na, 0.0))),
        (false, true) => Ok((C64::new(nb, 0.0), p.beta)),
        (false, false) => Err(Error::InvalidParams("scattering needs a nonzero drive amplitude".into())),
    }
}

/// Amplitude ratios and flux ratios `(left-moving, right-moving)` for one drive.
fn single_sided(p: &DiodeParams, amp: C64) -> Result<([C64; 2], [f64; 2])> {
    let triple = build_cascade(p)?;
    let ss = diode_steady_state(p)?;
    let f = output_fields(&triple, &ss.rho)?;
    let power = amp.norm_sqr();
    Ok(([f.amp_left / amp, f.amp_right / amp], [f.flux_left / power, f.flux_right / power]))
}

fn adiabatic(p: &DiodeParams, a: f64, b: f64) -> Result<ScatteringMatrices> {
    let delta = p
        .optimal_delta()
        .ok_or_else(|| Error::Regime("closed forms hold on the optimal slice only".into()))?;
    if delta.abs() > ADIABATIC_LIMIT || a > ADIABATIC_LIMIT || b > ADIABATIC_LIMIT {
        return Err(Error::Regime(format!(
            "need |alpha|, |beta|, |delta| <= {ADIABATIC_LIMIT} (got {a}, {b}, {delta})"
        )));
    }
    let (a2, d2) = (a * a, delta * delta);
    let den = 6.0 * a2 + d2;
    // Left column of the reduced steady state at beta = 0; right column at alpha = 0.
    let p_g_left = (2.0 * a2 + d2) / den;
    let p_d_left = 4.0 * a2 / den;
    let s = [
        [C64::new(-(2.0 * a2 - d2) / den, 0.0), C64::new(0.0, 0.0)],
        [C64::new(-4.0 * a2 / den, 0.0), C64::new(-1.0, 0.0)],
    ];
    let t = [[p_g_left, 0.0], [p_d_left, 1.0]];
    Ok(ScatteringMatrices { s, t, regime: Regime::Adiabatic })
}

/// `E = T_α(T_α − T_β)/(T_α + T_β)`.
pub fn efficiency_from(t_alpha: f64, t_beta: f64) -> Result<f64> {
    let den = t_alpha + t_beta;
    if den == 0.0 || !den.is_finite() {
        return Err(Error::UndefinedEfficiency);
    }
    // `+ 0.0` turns a negative zero into zero.
    Ok(t_alpha * (t_alpha - t_beta) / den + 0.0)
}

/// Diode efficiency from full-numeric transmittances.
pub fn efficiency(p: &DiodeParams) -> Result<f64> {
    let m = scattering(p, Regime::FullNumeric)?;
    efficiency_from(m.t_alpha(), m.t_beta())
}

/// One point of a transmittance sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransmittancePoint {
    /// Input flux `|α|² = |β|²`.
    pub power: f64,
    pub t_alpha: f64,
    pub r_alpha: f64,
    pub t_beta: f64,
    pub r_beta: f64,
    pub efficiency: f64,
}

/// Full-numeric transmittances against input power on the optimal slice.
pub fn transmittance_curve(delta: f64, powers: &[f64]) -> Result<Vec<TransmittancePoint>> {
    if let Some(bad) = powers.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParams(format!("powers must be positive, got {bad}")));
    }
    powers
        .par_iter()
        .map(|&power| {
            let amp = power.sqrt();
            let m = scattering(&DiodeParams::optimal(delta).with_alpha(amp).with_beta(amp), Regime::FullNumeric)?;
            Ok(TransmittancePoint {
                power,
                t_alpha: m.t_alpha(),
                r_alpha: m.r_alpha(),
                t_beta: m.t_beta(),
                r_beta: m.r_beta(),
                efficiency: efficiency_from(m.t_alpha(), m.t_beta())?,
            })
        })
        .collect()
}

/// Efficiency tabulated over `(dphi, domega1)` at `domega2 = 0`.
#[derive(Clone, Debug)]
pub struct EfficiencyMap {
    pub dphi: Vec<f64>,
    pub domega1: Vec<f64>,
    /// `eff[i][j]` at `domega1[i]`, `dphi[j]`.
    pub eff: Vec<Vec<f64>>,
    /// `(dphi, domega1, E)` at the first maximum in row-major order.
    pub argmax: (f64, f64, f64),
}

impl EfficiencyMap {
    pub fn dphi_step(&self) -> f64 {
        step(&self.dphi)
    }

    pub fn domega1_step(&self) -> f64 {
        step(&self.domega1)
    }

    /// `|dphi + domega1|` at the maximum.
    pub fn argmax_antidiagonal_offset(&self) -> f64 {
        (self.argmax.0 + self.argmax.1).abs()
    }

    /// `|dphi − domega1|` at the maximum.
    pub fn argmax_diagonal_offset(&self) -> f64 {
        (self.argmax.0 - self.argmax.1).abs()
    }

    /// Largest efficiency among cells with `|dphi − s·domega1|` at most half
    /// a grid step, for `s = +1` (diagonal) or `s = −1` (anti-diagonal).
    pub fn max_along(&self, sign: f64) -> f64 {
        let tol = 0.5 * self.dphi_step().max(self.domega1_step());
        let mut best = f64::NEG_INFINITY;
        for (i, &w) in self.domega1.iter().enumerate() {
            for (j, &ph) in self.dphi.iter().enumerate() {
                if (ph - sign * w).abs() <= tol {
                    best = best.max(self.eff[i][j]);
                }
            }
        }
        best
    }
}

fn step(v: &[f64]) -> f64 {
    if v.len() < 2 {
        0.0
    } else {
        (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64
    }
}

/// Grid search of the efficiency with equal drive `alpha` from both sides.
///
/// Points are evaluated in parallel and assembled in grid order, so the result
/// does not depend on the number of worker threads.
pub fn efficiency_map(dphi_range: (f64, f64), domega1_range: (f64, f64), alpha: f64, resolution: usize) -> Result<EfficiencyMap> {
    if resolution < 8 {
        return Err(Error::InvalidParams(format!("resolution must be at least 8, got {resolution}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidParams("efficiency map needs a positive drive amplitude".into()));
    }
    let dphi = GridSpec::linear(dphi_range.0, dphi_range.1, resolution).values()?;
    let domega1 = GridSpec::linear(domega1_range.0, domega1_range.1, resolution).values()?;
    let cells: Vec<(usize, usize)> = (0..resolution).flat_map(|i| (0..resolution).map(move |j| (i, j))).collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| {
            let p = DiodeParams { domega1: domega1[i], dphi: dphi[j], ..DiodeParams::default() }
                .with_alpha(alpha)
                .with_beta(alpha);
            efficiency(&p)
        })
        .collect::<Result<_>>()?;
    let eff: Vec<Vec<f64>> = values.chunks(resolution).map(|r| r.to_vec()).collect();
    let mut argmax = (dphi[0], domega1[0], f64::NEG_INFINITY);
    for (i, row) in eff.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            if e > argmax.2 {
                argmax = (dphi[j], domega1[i], e);
            }
        }
    }
    Ok(EfficiencyMap { dphi, domega1, eff, argmax })
}
