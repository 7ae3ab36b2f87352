//! Extending convex functions from a subspace `Y ⊂ ℝⁿ`.

mod hartman;
mod lifting;
mod majorant;
mod pair;
mod quotient;
mod sequences;

pub use hartman::{hartman_majorant, sup_on_set, HartmanLimit, HartmanOptions, HartmanResult, HartmanStage};
pub use lifting::{lift_sequence, sets_from_extension};
pub use majorant::{dc_to_majorant, domination_certificate, majorant_to_extension, MajorantExtension, MajorantOptions};
pub use pair::SubspacePair;
pub use quotient::{
    kuzeliky_point, separable_quotient_extend_sets, KuzelikyOptions, KuzelikyPoint, QuotientConstruction, QuotientOptions,
};
pub use sequences::{grid, separation_certificate, seq_separating_function, SeparatingSeries, SetSequence};
