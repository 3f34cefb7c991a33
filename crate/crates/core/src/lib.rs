//! Relativistic decay kinematics of unstable quantons.
//!
//! * [`minkowski`]: four-vectors, boosts, unit time-like normals and the
//!   no-decay hyperplanes they define.
//! * [`spectra`]: normalized mass spectral densities on quadrature grids.
//! * [`dynamics`]: survival amplitudes, lifetimes (closed form and by direct
//!   time integration), Shirokov's contracted lifetime, velocity
//!   expectations.
//! * [`relations`]: classification of hyperplane-normal triples and of
//!   velocity-eigenstate pairs by their linear relations.
//!
//! Natural units `c = 1`; `hbar` is an explicit argument wherever it enters.
//!
//! ```
//! use slmdecay::prelude::*;
//!
//! let d = make_breit_wigner(1.0, 0.05, 200.0, 4096)?;
//! let rest = lifetime_closed_form(&d, 0.0, 1.0)?.value;
//! let moving = lifetime_closed_form(&d, 1.0, 1.0)?.value;
//! assert!(moving > rest);
//!
//! let u = Velocity3::new(0.6, 0.0, 0.0)?;
//! assert!((shirokov_time(rest, &u)? - 0.8 * rest).abs() < 1e-12);
//! # Ok::<(), slmdecay::Error>(())
//! ```

// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod fmt;
pub mod minkowski;
pub mod relations;
pub mod spectra;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::dynamics::{
        instantaneous_velocity_expectation, lifetime_closed_form, lifetime_numeric, mean_inverse_energy, shirokov_time,
        survival_amplitude, survival_curve, velocity_eigenstate_survival, velocity_expectation_and_spread,
        LifetimeMethod, LifetimeResult, SlmLabel, SurvivalCurve,
    };
    pub use crate::minkowski::{
        boost, eta_from_velocity, lorentz_inner, orthogonal_spacelike_family, project_spacelike,
        time_gap_between_parallel, velocity_from_eta, FourVector, Hyperplane, UnitTimelike, Velocity3,
    };
    pub use crate::relations::{
        classify_triple, classify_velocity_pair, support_condition_check, CaseId, CaseReport, PairCategory,
        VelocityPairVerdict,
    };
    pub use crate::spectra::{make_breit_wigner, make_gaussian, make_tabulated, SpectralDensity};
}

// The guide's code blocks run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/minkowski.md")]
    mod minkowski {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/survival.md")]
    mod survival {}
    #[doc = include_str!("../../../book/src/lifetimes.md")]
    mod lifetimes {}
    #[doc = include_str!("../../../book/src/shirokov.md")]
    mod shirokov {}
    #[doc = include_str!("../../../book/src/relations.md")]
    mod relations {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
