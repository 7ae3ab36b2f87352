mod generator;
pub mod ops;
mod set;
pub mod spec;

pub use generator::{Ball, GeneratorSet, Projection};
pub use ops::{
    chebyshev_center, check_interior, conv_union_segments_check, distance, inner_radius, minkowski,
    refine_sequence, slice_subspace, support, Refinement,
};
pub use set::{ConvexSet, Halfspace, ImplicitSet, Intersection, MembershipOracle};
pub use spec::{ImplicitSpec, SetRef, SetSpec};
