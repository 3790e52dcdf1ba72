//! Function representations: quilt-affine pieces, recursive specs, 1D
//! semilinear functions, and their bounded structural checks.

pub mod json;
pub mod quilt;
pub mod semilinear;
pub mod spec;

pub use quilt::{Classes, QuiltAffine, QuiltReport};
pub use semilinear::{
    extract_eventual_1d, superadditive_check, Domain1D, Eventual1DForm, Piece1D, Semilinear1D,
};
pub use spec::{scaled_sample, scaled_spec_sample, ObliviousSpec, Reference, Restriction, SpecViolation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FuncError {
    #[error("expected {expected} coordinates, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("non-integer value {value} at {point:?}")]
    NonIntegerValue { point: Vec<u64>, value: String },
    #[error("negative value {value} at {point:?}")]
    NegativeValue { point: Vec<u64>, value: i64 },
    #[error("axis {} is fixed to {expected}, got {actual}", axis + 1)]
    FixedAxisViolation { axis: usize, expected: u64, actual: u64 },
    #[error("no piece covers x = {0}")]
    NoPiece(u64),
    #[error("pieces {first} and {second} overlap at x = {x}")]
    OverlappingPieces { x: u64, first: usize, second: usize },
    #[error("not nondecreasing: f({x}) = {value} > f({}) = {next}", x + 1)]
    NotNondecreasing { x: u64, value: u64, next: u64 },
    #[error("finite differences are not periodic past the threshold (x = {x})")]
    InconsistentPeriod { x: u64 },
    #[error("f(0) = {0}, but a leaderless construction needs f(0) = 0")]
    NonzeroAtOrigin(u64),
    #[error("not superadditive: f({x}) + f({z}) > f({})", x + z)]
    NotSuperadditive { x: u64, z: u64 },
    #[error("invalid quilt-affine function: {0}")]
    InvalidQuilt(String),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("invalid semilinear function: {0}")]
    InvalidSemilinear(String),
    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },
}
