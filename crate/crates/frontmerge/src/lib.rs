//! Two converging fronts in a radial phase-field model: the inner-layer integrals, the
//! interaction ODE for the front gap, a sharp-interface Stefan solver, the assembled
//! approximate solution, a reference phase-field solver and weak residual diagnostics.

pub mod ansatz;
pub mod calculus;
pub mod convolutions;
pub mod error;
pub mod interaction;
pub mod numerics;
pub mod phasefield;
pub mod profiles;
pub mod residuals;
pub mod stefan;

pub use error::{Error, NumericsError, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/profiles.md")]
    mod profiles {}
    #[doc = include_str!("../../../book/src/table.md")]
    mod table {}
    #[doc = include_str!("../../../book/src/interaction.md")]
    mod interaction {}
    #[doc = include_str!("../../../book/src/fronts.md")]
    mod fronts {}
    #[doc = include_str!("../../../book/src/ansatz.md")]
    mod ansatz {}
    #[doc = include_str!("../../../book/src/phasefield.md")]
    mod phasefield {}
    #[doc = include_str!("../../../book/src/residuals.md")]
    mod residuals {}
}
