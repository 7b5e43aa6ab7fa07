//! Spectral Budyko–Widiasih energy balance model with a bare-ice band.
//!
//! The zonally averaged surface temperature is expanded in even Legendre
//! polynomials and coupled to a slowly moving ice line. The crate provides
//! the resulting nonsmooth discrete map, its reduced ice-line dynamics,
//! equilibrium branches in the radiation and transport parameters, and a
//! numerical graph transform for the persisting invariant manifold.

pub mod bifurcation;
pub mod dynamics;
pub mod error;
pub mod forcing;
pub mod manifold;
pub mod params;
pub mod reduced;
pub mod spectral;

pub use dynamics::{Admissible, SystemState, Trajectory};
pub use error::{Error, Result};
pub use forcing::{Branch, ForcingTable, Side};
pub use manifold::{GraphFn, ManifoldConstants};
pub use params::ModelParams;
pub use reduced::{Equilibrium, Location, Stability};
pub use spectral::SpectralTable;
