//! Convex representations of monotone operators on finite grids.

#[cfg(feature = "cli")]
pub mod cli;
pub mod closed_form;
pub mod enlargements;
pub mod conjugation;
pub mod error;
pub mod ext;
pub mod fixedpoint;
pub mod function;
pub mod graph;
pub mod grid;
pub mod hull;
pub mod io;
pub mod representations;
pub mod suites;
mod par;

pub use closed_form::{sample_function, ClosedFormConvexFunction};
pub use conjugation::{clconv, conjugate_bruteforce, conjugate_fast, j_transform, phi_coupling, ConjugateResult};
pub use error::{Error, Result};
pub use ext::ExtReal;
pub use function::{pi_bifunction, Bifunction, GridFunction};
pub use graph::{check_monotone, indicator_of_graph, pairing, MonotoneViolation, OperatorGraph};
pub use grid::{Axis, Grid};
