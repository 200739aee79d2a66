//! Constrained-equilibrium predicates and one-variable-decomposable (OVD)
//! objectives for the constrained solver.

mod checks;
mod ovd;

pub use checks::{check, CheckOutcome, ConstraintCheck, ConstraintError, EquilibriumKind, Problem};
pub use ovd::{
    add_context_terms, better, ovd_max_prob, ovd_min_payoff, ovd_min_support, ovd_player_support, ovd_total_support,
    ovd_validate, ovd_welfare, AddContext, FrontierTerm, Ovd, OvdConstraint, OvdKind, OvdReport,
    OvdValue, Sense,
};
