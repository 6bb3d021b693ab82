//! Exact configuration LP: minimal-configuration columns, phase-1 simplex
//! feasibility, `T*`, and dual certificates.

mod clp;
mod dual;
mod simplex;
pub mod subsets;

pub use clp::{
    clp_feasible, compute_t_star, enumerate_configurations, t_star_candidates, ClpCaps, ClpModel,
    Configuration, LpFeasibilityResult, TStarResult,
};
pub use dual::{
    basic_hypothesis_holds, build_dual_basic, build_dual_refined, fat_for_players,
    refined_hypothesis_holds, thin_configurations, verify_dual, DualSolution, DualVerdict,
};
pub use simplex::{Phase1, Phase1Outcome, Sense};
