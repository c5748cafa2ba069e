//! Information complementarity in qubit state discrimination.
//!
//! A sender encodes independent uniform bits into a small family of qubit
//! states — a *which-way* bit along z, a *which-phase* bit along y, and
//! optionally a *which-mixedness* bit along x — and a receiver measures a
//! single copy with an arbitrary POVM, then guesses. This crate computes
//! everything about that game exactly:
//!
//! * optimal per-bit and joint guessing probabilities, from the joint table
//!   and in closed form ([`discrimination`]);
//! * the Pareto frontier of simultaneously achievable probabilities — an
//!   ellipse (pure mode) or ellipsoid (mixed mode) that every POVM obeys and
//!   a one-parameter measurement family saturates ([`povm`],
//!   [`discrimination::frontier_lhs`]);
//! * the mutual-information bookkeeping, including the cross term that makes
//!   per-bit information add up to the label-level information exactly, and
//!   the Holevo cap ([`information`]);
//! * brute-force checks of all of the above: random-POVM sweeps, a
//!   joint-success maximiser, and a Monte Carlo game with deterministic
//!   seeding ([`oracle`]).
//!
//! # Example
//!
//! ```
//! use pathphase::{joint_distribution, EnsembleGeometry, Povm};
//!
//! let geometry = EnsembleGeometry::pure(0.65, 0.6)?;
//! let povm = Povm::optimal_family(0.5, 0.6)?;
//! let probs = joint_distribution(&geometry, &povm)?.guess_probabilities();
//! assert!((probs.p_ww - 0.695).abs() < 1e-12);
//! assert!((probs.p_wp - 0.74).abs() < 1e-12);
//! // This member sits exactly on the frontier ellipse.
//! let lhs = pathphase::frontier_lhs(&geometry, &probs);
//! assert!((lhs - 1.0).abs() < 1e-12);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod bloch;
pub mod discrimination;
pub mod information;
pub mod oracle;
pub mod povm;

pub use bloch::{
    trace_distance, Bit, BlochVector, EnsembleGeometry, GeometryError, InputLabel, Mode, Sign,
};
pub use discrimination::{
    closed_form_probabilities, frontier_lhs, joint_distribution, DiscriminationError,
    GuessProbabilities, JointDistribution, MlRule,
};
pub use information::{
    binary_entropy, conditional_total_correlation, holevo_bound, indicator_distribution,
    indicator_joint, info_report, mutual_information, shannon_entropy, InfoError, InfoReport,
};
pub use oracle::{
    identity_sweep, maximize_joint_correct, monte_carlo_game, pareto_sweep, random_povm, shard_rng,
    GameResult, IdentityReport, SweepReport,
};
pub use povm::{Povm, PovmElement, PovmError};
