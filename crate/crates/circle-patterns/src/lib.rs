//! Circle patterns with prescribed Delaunay intersection angles on
//! triangulated lattice tori.
//!
//! The crate builds quotient triangulations with crossing indices, solves
//! the circumradius system for a given holonomy stretch, develops patterns
//! into the plane, extracts cross ratios and conformal data, computes
//! discrete harmonic 1-forms and their period map, and evaluates the
//! pulled-back Weil-Petersson symplectic form two independent ways.

pub mod error;
pub mod hodge;
pub mod io;
pub mod lattice;
pub mod mesh;
pub mod moduli;
pub mod pattern;
pub mod penner;
pub mod svg;

pub use error::{Error, Result};
