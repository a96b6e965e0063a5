//! Command-line front end: lattice file parsing, group specifications,
//! report rendering, and the on-disk character cache.

pub mod cache;
pub mod groupspec;
pub mod lattice_file;
pub mod report;

use orbifold_core::Error;

/// Map engine errors onto process exit codes.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::ParseError(_) | Error::ValidationError(_) | Error::NotAnAutomorphism(_)
        | Error::NotPositiveDefinite | Error::OddLattice | Error::NotCommuting
        | Error::NotCoinvariant => 2,
        Error::AnomalousOrbifold(_) => 3,
        Error::ObstructionNonzero(_) | Error::OrderDoubled(_) | Error::ProjectiveObstruction(_) => 4,
        Error::SolutionSpaceNotOneDim(_) | Error::InternalInconsistency(_)
        | Error::DegenerateForm | Error::NonSquareQuotient(_) => 5,
        _ => 2,
    }
}
