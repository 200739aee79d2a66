//! Monotone 1-in-3 SAT formulas and the gadget games built from them.

mod formula;
mod gadgets;

pub use formula::{
    check_1in3, cubic_no_instance, cubic_yes_instance, label, Formula, Label, EXHAUSTIVE_LIMIT,
};
pub use gadgets::{
    all_out_profile, all_out_profile_exact, assignment_profile, assignment_profile_exact, build_g,
    build_gprime, build_gtilde, parse_rational, pick_constants, GadgetConstants, GadgetKind,
    LabeledGame, Role,
};

use thiserror::Error;

use crate::game::GameError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("clause {clause}: variable {var} outside 1..={n_vars}")]
    VariableOutOfRange { clause: usize, var: usize, n_vars: usize },
    #[error("clause {clause} repeats a variable")]
    RepeatedVariable { clause: usize },
    #[error("{n_vars} variables exceed the exhaustive limit of {limit}")]
    TooLarge { n_vars: usize, limit: usize },
    #[error("assignment is not 1-in-3 satisfying")]
    NotOneInThree,
    #[error("epsilon must lie in (0, 1), got {0}")]
    BadEpsilon(String),
    #[error("{0}")]
    BadConstant(String),
    #[error("half/half splits need the duplicated game")]
    SplitNeedsDuplicates,
    #[error("this gadget has no Out strategy")]
    NoOutStrategy,
    #[error(transparent)]
    Game(#[from] GameError),
}
