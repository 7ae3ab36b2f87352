mod infconv;
mod radial;

pub use infconv::{lipschitz_convex_extend, InfConvolution};
pub use radial::{
    agreement_certificate, dc_extend_radial, finite_dim_extend, radial_project, ExtendOptions, ExtensionResult,
    RadialProjection, StageRecord,
};
