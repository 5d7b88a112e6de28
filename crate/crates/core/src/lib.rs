//! Rearrangement transforms, shape-basis mean-oscillation seminorms, and
//! Calderón–Zygmund decompositions on discretized functions, with a
//! verification harness that checks the associated inequalities (with their
//! explicit constants) on a deterministic corpus at desk scale.
//!
//! The building blocks:
//!
//! * [`grid`] — piecewise-constant functions on uniform n-dimensional grids
//!   and exact box aggregates over an n-dimensional prefix-sum table;
//! * [`shape`] — cell-aligned boxes, balls, and annular sectors, enumerable
//!   bases (cubes, rectangles, false cubes), and containment witnesses;
//! * [`rearrange`] — distribution functions, decreasing rearrangements,
//!   symmetrization, and the radial-to-interval reduction;
//! * [`oscillation`] — mean oscillation, BMO/BLO seminorms, endpoint
//!   refinement, and the subcube-mean bounds;
//! * [`cz`] — dyadic, bisection, and rising-sun decompositions with an
//!   independent validator;
//! * [`concentration`] — the exact L1 bounded-differences bound on the
//!   hypercube;
//! * [`verify`] — the corpus, the suite catalog, the constants table, and
//!   report writers.

pub mod concentration;
pub mod cz;
pub mod grid;
pub mod oscillation;
pub mod rearrange;
pub mod shape;
pub mod verify;

pub use concentration::ConcentrationInstance;
pub use cz::{CzDecomposition, CzMethod, CzPair, CzValidation};
pub use grid::{GridFunction, GridGeometry, PrefixSumTable};
pub use oscillation::{OscillationReport, ScanDomain};
pub use rearrange::{Interval, RadialFunction, StepFunction1D};
pub use shape::{BasisDescriptor, BasisFamily, EquivalenceWitness, Shape};
pub use verify::{run_suite, SuiteConfig, SuiteId, SuiteReport};
