//! Census engine for closed geodesics of a fixed topological type on cusped
//! hyperbolic tori.
// `!(x > 0.0)` style checks reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
mod dirichlet;
pub mod domain;
pub mod error;
pub mod hyperbolic;
pub mod oracle;
pub mod orbits;
pub mod phase;
pub mod stats;
pub mod verify;
pub mod words;

pub use compare::{compare, isometry_test, length_ratio_extremes, rn_weight, CompareReport, Verdict};
pub use error::{CensusError, CompareError, GeometryError, PhaseError, StatsError, VerifyError, WordError};
pub use hyperbolic::{build_surface, modular_torus, Moebius, SurfaceStructure, UpperHalfPoint};
pub use orbits::{enumerate_all_primitive, enumerate_simple, enumerate_type, Census, CensusEntry, CensusMode, MCGMove};
pub use phase::{build_histogram, sample_orbit, tv_distance, BinningSpec, PhaseHistogram, PhaseSample};
pub use words::{CurveClass, CyclicWord, Letter, Slope};
