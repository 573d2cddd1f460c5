//! Recovery of sparse signals under sparse corruption.
//!
//! The observation model is `z = A x + B e`: a signal `x` that is sparse in a
//! dictionary `A` is corrupted by an interference `e` that is sparse in a
//! second dictionary `B`. This crate provides
//!
//! * dictionary construction and exact coherence/spectral diagnostics
//!   ([`dictionary`]),
//! * probabilistic recovery-feasibility conditions for every combination of
//!   support-set knowledge (both, one, or neither support known) and
//!   support-set randomness ([`guarantees`]),
//! * samplers for random signal/interference instances ([`signals`]),
//! * the recovery programs themselves: pseudo-inverse recovery for known
//!   supports, equality-constrained l1 minimization (basis pursuit) with
//!   optional support restriction, an exhaustive l0 search at toy scale, and
//!   optimality certificates ([`solvers`]),
//! * a Monte-Carlo harness that sweeps sparsity grids and compares empirical
//!   recovery rates against the predicted feasibility region ([`montecarlo`]).
//!
//! Formula-level evaluation works for problem sizes up to `m = 10^12` without
//! materializing matrices; simulation-level code targets desk scale
//! (`m <= 512`). All matrix computations are dense, double-precision complex.

pub mod dictionary;
pub mod error;
pub mod guarantees;
pub mod linalg;
pub mod montecarlo;
pub mod signals;
pub mod solvers;

pub use dictionary::{CoherenceProfile, DictSpec, Dictionary};
pub use error::{Error, Result};
pub use guarantees::{BetaRule, Condition, GuaranteeResult, Program, Scenario, SparsityPoint};
pub use montecarlo::{CellResult, NeRule, Prediction, SweepGrid, SweepResult};
pub use signals::Instance;
pub use solvers::{AdmmOptions, CertificateReport, SolveOutcome, SolverReport, SupportMode, WhichUnknown};
