//! Exact isometric embeddings of strongly concave metric spaces into
//! coordinate spaces carrying norms close to the sup norm.
//!
//! The pipeline: represent a finite metric space ([`metric`]), compute its
//! concavity gap, map it through the distance-to-reference-points embedding
//! ([`frechet`]) — already an isometry under the sup norm — and, for a norm
//! that only approximates the sup norm ([`norms`]), correct the embedding by
//! per-pair slack variables solved to a fixed point ([`fixed_point`]). Two
//! specializations sit on top: equilateral point sets from the discrete
//! metric ([`equilateral`]) and extraction of coordinate-convergent subsets
//! from lazily presented countable spaces ([`diagonal`]).
//!
//! Every claimed isometry is verified numerically: embeddings carry their
//! maximum pairwise residual, and the solver reports non-convergence as data
//! rather than masking it.

// Negated comparisons are how the argument guards reject NaN alongside
// out-of-range values; index loops are clearer than iterator chains for the
// symmetric-matrix code.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagonal;
pub mod equilateral;
pub mod error;
pub mod fixed_point;
pub mod frechet;
pub mod metric;
pub mod norms;

pub use error::{Error, Result};
pub use fixed_point::{EmbeddingResult, IterationDiagnostics, PerturbationState, SolverConfig};
pub use frechet::Embedding;
pub use metric::{ConcavityReport, FiniteMetricSpace, ValidationReport, Violation};
pub use norms::{DistortionCertificate, NormSpec};
