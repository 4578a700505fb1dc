//! Segmenting-description elimination with genealogy labels.

mod inequality;
mod ops;
mod ordering;
mod redundancy;
mod system;

pub use inequality::{canonicalize, detect_contradiction, Candidate, IneqId, Label, LabeledInequality};
pub use ops::{cro, iso, Bound, BoundKind, IsoOutcome};
pub use ordering::{order_variables, Ordering, OrderingStrategy};
pub use redundancy::{is_redundant_bounds_method, BoxBounds};
pub use system::{
    segment, segment_with_epsilon, AdjoinOutcome, ContradictionRecord, Mode, Policy, ProjectedBounds,
    SDSystem, SegmentOptions, SegmentStats, DEFAULT_MAX_CONTRADICTIONS,
};
