use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{location}: {message}")]
    Parse { location: String, message: String },

    #[error("constraint {constraint}: non-linear term `{term}`")]
    NonLinear { constraint: usize, term: String },

    #[error("epsilon must be strictly positive")]
    NonPositiveEpsilon,

    #[error("invalid variable ordering: {0}")]
    InvalidOrdering(String),

    #[error("crossover needs a lower and an upper bound of the same variable")]
    CrossoverMismatch,

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("the system is contradictory")]
    Contradictory,

    #[error("redundancy policy {0} cannot be used when enumerating all contradictions")]
    PolicyNotAllowed(&'static str),

    #[error("criterion `{0}` has an empty performance domain")]
    DegenerateCriterion(String),

    #[error("performance {value} of `{alternative}` on `{criterion}` lies outside the criterion domain")]
    OutOfDomain { criterion: String, alternative: String, value: String },

    #[error("unknown alternative `{0}`")]
    UnknownAlternative(String),

    #[error("unknown criterion `{0}`")]
    UnknownCriterion(String),

    #[error("alternative `{0}` is compared with itself")]
    SelfComparison(String),

    #[error("comparison `{0}` is given more than once")]
    DuplicateComparison(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("the preference information is inconsistent; run the consistency check for explanations")]
    Inconsistent,

    #[error("relation not necessary: {0} is not necessarily at least as good as {1}")]
    RelationNotNecessary(String, String),

    #[error("relation already possible: {0} is possibly at least as good as {1}")]
    RelationAlreadyPossible(String, String),

    #[error("oracle supports at most {max} variables, got {got}")]
    OracleTooLarge { max: usize, got: usize },
}
