//! Combining bodies of evidence expressed as belief functions.
//!
//! Each basic probability assignment is read as a probability function on
//! an abstract evidence frame plus a compatibility relation to the target
//! frame. Combining two of them means choosing a joint distribution on the
//! product of the evidence frames:
//!
//! - [`fusion::dempster_combine`] takes the renormalized product, which may
//!   break the marginals;
//! - [`fusion::bayes_combine`] uses supplied conditionals `P(s'|s)`;
//! - [`fusion::min_gain_combine`] picks, among all joints consistent with
//!   the marginals, the compatibility relation and any known conditionals,
//!   the one with the least information gain (maximum joint entropy). When
//!   no consistent joint exists the evidence is in conflict, and a
//!   certificate says why.
//!
//! ```
//! use mingain::{Bpa, Frame, fusion::{min_gain_combine, MinGainOptions}};
//!
//! let t = Frame::new(["t1", "t2", "t3"])?;
//! let a = Bpa::from_labels(&t, [(vec!["t1", "t2"], 0.8), (vec!["t1", "t2", "t3"], 0.2)])?;
//! let b = Bpa::from_labels(&t, [(vec!["t2", "t3"], 0.7), (vec!["t3"], 0.2), (vec!["t1", "t2", "t3"], 0.1)])?;
//! let combined = min_gain_combine(&a, &b, &MinGainOptions::default())?;
//! assert!((combined.bpa.mass(&t.proposition(["t2"])?) - 0.7).abs() < 1e-9);
//! # Ok::<(), mingain::Error>(())
//! ```

#![allow(clippy::needless_range_loop)]

pub mod bpa;
pub mod cli;
pub mod constraints;
pub mod error;
pub mod evidence;
pub mod frame;
pub mod fusion;
pub mod infomeasures;
pub mod maxent;
pub mod par;

pub use bpa::{belief_table, BeliefRow, Bpa, ProbabilityFunction};
pub use constraints::{
    assemble, check_feasible, Certificate, Conditional, ConstraintSystem, Feasibility,
};
pub use error::{Error, Result};
pub use evidence::{
    abstract_evidence, bpa_from_evidence, default_joint_compatibility, CompatibilityRelation,
    EvidenceBody, JointCompatibility,
};
pub use frame::{Frame, Proposition};
pub use fusion::{CombinedResult, Rule};
pub use maxent::{joint_entropy, solve_maxent, JointDistribution, SolverOptions, SolverReport};
