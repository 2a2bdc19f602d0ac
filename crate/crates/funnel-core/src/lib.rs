//! Solution funnels of continuous (possibly non-uniquely-solvable) ODEs and
//! the resistance geometry of Jordan curves.
//!
//! The crate is organized as:
//! - [`surface`]: points, polylines and Jordan curves on the plane, the
//!   cylinder and the unit sphere, with crossing and separation predicates.
//! - [`resistance`]: region graphs and two-leg constrained shortest paths
//!   estimating the resistance of a Jordan curve, with witness polar paths.
//! - [`constructions`]: S-strips, zipper strips, button curves, zippered
//!   resistor curves, finite stages of the infinite-resistance limit curve,
//!   and horned-sphere stages.
//! - [`field`]: time-dependent vector fields with declared compact support.
//! - [`funnel`]: bracketed funnel-section estimates (ensemble inner set,
//!   grid outer set) and the explicit funnel constructions: eye maps,
//!   pierced curves, projections, Peano sections, unions one dimension up.
//! - [`diffeotopy`]: sampled diffeotopies, the diffeotopy/ODE dictionary,
//!   bounded-speed reparameterization and transfer-map metrics.

pub mod constructions;
pub mod diffeotopy;
pub mod error;
pub mod field;
pub mod funnel;

pub mod io;
pub mod resistance;
pub mod surface;

pub use error::{Error, Result};
