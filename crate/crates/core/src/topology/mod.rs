//! Graphs, independence complexes, η, and deletion/explosion sequences.

mod de;
mod driver;
mod graph;
mod homology;
mod search;

pub use de::{
    average_cost, basic_cover, classify_edge, execute_sequence, is_cheap, is_gamma, min_cover, verify_star,
    CoverRecord, CoverWeight, DeSequence, DeStep, EdgeClass, Execution, StepRecord, TraceOp, TraceStep,
};
pub use driver::{
    four_phase_driver, hall_eta_check, phase_bound_coefficients, CoverChecks, DriverOutcome, HallReport,
    PhaseLedger, PhaseReport,
};
pub use graph::{Edge, Graph, GraphDocument, PartitionedGraph};
pub use homology::{
    eta, eta_at_least, independence_complex, reduced_homology, Eta, EtaCaps, EtaEngine, HomologyProfile,
    SimplicialComplex,
};
pub use search::{search_de_sequence, Found, Objective, SearchBudget, SearchContext, SearchOutcome};
