//! Funnel-section estimation and the explicit funnel constructions.

mod catalog;
mod estimate;
mod eye;
mod ops;

pub use catalog::{catalog, CatalogEntry};
pub use estimate::{
    bracketing_holds, estimate_funnel, funnel_inner, funnel_outer, kneser_check, CellSet,
    FunnelEstimate, InnerParams, OuterParams,
};
pub use eye::{closing_flow, eye_maps, BumpProfile, EyeRegion};
pub use ops::{
    arc_funnel, arc_tube_field, compress_to_unit_window, patch_fields, peano_section,
    pierce_to_funnel, project_funnel, union_one_up, verify_section_bounded, GraphArc,
    UnionField, UnionParams,
};
