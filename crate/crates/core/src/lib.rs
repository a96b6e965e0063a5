//! Exact computation of twisted modules and orbifold characters for lattice
//! vertex operator algebras.
//!
//! The crate is organized bottom-up:
//!
//! - [`intmat`] / [`ratmat`]: exact integer and rational linear algebra
//!   (Smith normal form, characteristic polynomials, LDL forms);
//! - [`cyclotomic`]: arithmetic in Q(ξ_M);
//! - [`lattice`]: Gram lattices, automorphism analysis, torsion quotients;
//! - [`enumerate`]: bounded short-vector enumeration;
//! - [`qseries`]: fractional-power q-series, eta products, theta functions;
//! - [`lifting`]: lifts of lattice automorphisms to VOA automorphisms;
//! - [`twisted`]: twisted-module data (defect representation, U operators);
//! - [`centralizer`]: the projective centralizer action on a twisted module;
//! - [`characters`]: twining characters, anomaly checks, orbifold assembly.
//!
//! All computational paths are exact (big rationals / cyclotomic numbers);
//! floating point appears only in numeric cross-checks of modular behaviour.

pub mod cyclotomic;
pub mod error;
pub mod intmat;
pub mod lattice;
pub mod ratmat;
pub mod znum;

pub mod enumerate;
pub mod qseries;

pub mod lifting;
pub mod twisted;

pub mod centralizer;
pub mod characters;

pub mod standard;

pub use error::{Error, Result};
