//! Robust quadratic optimization with one uncertain quadratic constraint.
//!
//! The constraint matrix and linear term depend affinely on two interval
//! parameters, so robust feasibility reduces to the four rectangle corners.
//! Optimality and infeasibility are certified through S-lemma style
//! multipliers and checked by an independent brute-force oracle.

pub mod certificates;
pub mod convexity;
pub mod error;
pub mod gap_example;
pub mod homogenization;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod search;

pub use certificates::{
    AlternativeCertificate, OneSidedCertificate, OptimalityCertificate, VerificationReport,
};
pub use error::{Error, Result};
pub use linalg::SymmetricMatrix;
pub use model::{
    Corner, FeasibilityReport, Interval, LowerBound, QuadraticFunction, RobustInstance,
    UncertainConstraint,
};
pub use search::{AlternativeOutcome, SearchBudget};
