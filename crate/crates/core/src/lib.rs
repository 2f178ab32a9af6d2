//! Workbench for finite set systems viewed as monotone DNFs.
//!
//! The crate provides exact (rational-arithmetic) tooling for:
//!
//! * set systems and their monotone-DNF semantics ([`set_system`]),
//! * weighted families, regular distributions and exact regularity
//!   certification via LP feasibility ([`weighted`], [`regular`]),
//! * p-biased satisfaction probabilities and approximate sunflowers
//!   ([`eval`]),
//! * disjoint-set and sunflower search ([`sunflower`]),
//! * the iterative disjoint-tuple mass-extraction process and its star-system
//!   analysis ([`process`]),
//! * generators for block, intersecting-block, complete-uniform and subspace
//!   families ([`families`]).
//!
//! All probability arithmetic is exact. Quantities defined as suprema are
//! reported as certified intervals, never as attained points.

pub mod error;
pub mod eval;
pub mod families;
pub mod gf;
pub mod interval;
pub mod io;
pub mod lp;
pub mod process;
pub mod rational;
pub mod regular;
pub mod set_system;
pub mod sunflower;
pub mod weighted;

pub use error::{Error, Result};
pub use rational::Rational;
pub use set_system::{Assignment, ElementSet, ProperUpperCheck, SetSystem};
pub use weighted::{RegularityCertificate, WeightedFamily};
