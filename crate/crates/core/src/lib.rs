//! Open-system simulation of two cascaded atoms coupled to a waveguide.
//!
//! The crate builds the network model, solves its Lindblad dynamics, reduces
//! it to a slow two-level model and finally to a classical flapping mirror.
//! All quantities use the decay rate `γ = 1` as the unit: times in `1/γ`,
//! frequencies in `γ`, field amplitudes in `√γ`.
//!
//! ```
//! use atomdiode::{diode, DiodeParams, Regime};
//!
//! let p = DiodeParams::optimal(1e-3).with_alpha(0.01).with_beta(0.01);
//! let m = diode::scattering(&p, Regime::FullNumeric)?;
//! assert!((m.t_alpha() - 400.0 / 601.0).abs() < 1e-3);
//! assert!(m.t_beta() < 1e-3);
//! # Ok::<(), atomdiode::Error>(())
//! ```

pub mod correlations;
pub mod diode;
pub mod error;
pub mod flapper;
pub mod grid;
pub mod liouville;
pub mod qmat;
pub mod slh;

pub use diode::{Regime, ScatteringMatrices};
pub use error::{Error, Result};
pub use flapper::{Mirror, RateModel, Trajectory};
pub use grid::{GridSpec, Scale};
pub use liouville::{DensityMatrix, Liouvillian, Propagator, SteadyState};
pub use num_complex::Complex64 as C64;
pub use qmat::ComplexMatrix;
pub use slh::{DiodeParams, SlhTriple};

// The guide's code blocks run as doc-tests through these empty modules.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/steady-state.md")]
    mod steady_state {}
    #[doc = include_str!("../../../book/src/scattering.md")]
    mod scattering {}
    #[doc = include_str!("../../../book/src/correlations.md")]
    mod correlations {}
    #[doc = include_str!("../../../book/src/flapper.md")]
    mod flapper {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/numerics.md")]
    mod numerics {}
}
