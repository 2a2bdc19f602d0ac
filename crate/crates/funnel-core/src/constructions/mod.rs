//! Explicit geometric constructions: S-strips, zipper strips, button
//! curves, zippered resistor curves, finite stages of the
//! infinite-resistance limit curve, and horned-sphere stages.

mod horned;
mod resistor;
mod slide;
mod stages;
mod strip;

pub use horned::{horned_sphere_stage, HornedStage, TriMesh, MAX_HORNED_STAGE};
pub use resistor::{button_curve, resistor_curve, ResistorParams};
pub use slide::{BandMap, BandOp, MovingAxis, PiecewiseLinear, Trapezoid};
pub use stages::{infinite_resistance_stage, StageLogEntry, StageResult};
pub use strip::{point_in_polygon, s_strip, zipper, StripMap};
