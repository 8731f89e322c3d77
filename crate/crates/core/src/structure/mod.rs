//! Construction of discrete gradient pairs and verification of scheme
//! equivalences.

mod colspace;
mod equivalence;
mod pairs;

pub use colspace::{check_colspace, ColspaceCheck};
pub use equivalence::{
    compare_trajectories, verify_sedg_dgp_equivalence, verify_transformation_invariance,
    EquivalenceReport,
};
pub use pairs::{
    build_pair_constant_e, build_pair_invertible_e, build_pair_semi_explicit, transform_approx,
    transform_pair, SvdReduction, RANK_AMBIGUITY_BAND, RANK_CUT,
};
