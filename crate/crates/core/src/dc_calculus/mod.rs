mod checks;
mod convex_fn;
mod mapping;
mod rules;

pub use checks::{
    control_check, control_check_parts, convexity_check, convexity_check_with, lipschitz_estimate,
    lipschitz_estimate_with, mapping_lipschitz_estimate, ndc_witness_check, sup_norm_estimate, CheckOptions, DcFn,
    WitnessBall, UNBOUNDED_CAP,
};
pub use convex_fn::{ConvexFn, Family, Univariate};
pub use mapping::{BilinearForm, CustomMap, Elementwise, Mapping};
pub use rules::{
    bilinear_combine, c11_to_dc, compose_dc, glue_dc, FactorBounds, OuterConstants, ESTIMATE_INFLATION,
    MAX_ESCALATIONS,
};
