use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid rotation axis: the axis vector has zero length")]
    InvalidAxis,
    #[error("matrix is not a proper rotation (orthogonality defect {orthogonality:.3e}, det {det})")]
    NotARotation { orthogonality: f64, det: f64 },
    #[error("invalid group tolerance {0}: must lie in (0, 0.1)")]
    InvalidTolerance(f64),
    #[error("group closure exceeded {cap} elements; the generators do not generate a finite group")]
    NonFiniteClosure { cap: usize },
    #[error("product of group elements {0} and {1} is not in the element list")]
    NotClosed(usize, usize),
    #[error("group is not the proper icosahedral group: {0}")]
    NotIcosahedral(String),
    #[error("element index {index} out of range for group of order {order}")]
    IndexOutOfRange { index: usize, order: usize },

    #[error("invalid generator set: {0}")]
    InvalidGenerator(String),
    #[error("vertex {to} is unreachable from {from}; the generating set does not generate the group")]
    Unreachable { from: usize, to: usize },

    #[error("algebra elements live over different groups")]
    GroupMismatch,
    #[error("block dimension mismatch: {0} vs {1}")]
    BlockDimMismatch(usize, usize),
    #[error("block at element {index} has shape {rows}x{cols}, expected {dim}x{dim}")]
    BadBlockShape { index: usize, rows: usize, cols: usize, dim: usize },

    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix shape {rows}x{cols} does not match the expected dimension {expected}")]
    DimensionMismatch { rows: usize, cols: usize, expected: usize },
    #[error("cluster index {index} out of range ({count} clusters)")]
    ClusterOutOfRange { index: usize, count: usize },
    #[error("operator is not a projection (defect {0:.3e})")]
    NotAProjection(f64),
    #[error("level character is not constant on conjugacy class {class} (spread {spread:.3e})")]
    ClassInconsistent { class: usize, spread: f64 },
    #[error("operator does not commute with the translation unitaries (defect {0:.3e}); it is not in the group algebra")]
    NotInAlgebra(f64),
    #[error("pairing for irrep {label} is not an integer: {value}")]
    NonIntegerPairing { label: String, value: f64 },
    #[error("character table does not match the group: {0}")]
    TableMismatch(String),
    #[error("unknown irrep label {0:?}")]
    UnknownIrrep(String),

    #[error("spectrum has a single cluster; no gap to rescale")]
    NoGap,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("orbit of the seed pose collapses: poses {0} and {1} coincide (nontrivial stabilizer)")]
    FixedPoint(usize, usize),
    #[error("coupling spec is not self-adjoint at element {index} (defect {defect:.3e})")]
    NonHermitianSpec { index: usize, defect: f64 },
    #[error("mass matrix is not positive definite (min eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("driving frequency is resonant: omega^2 = {omega_sq} is within {distance:.3e} of eigenvalue {eigenvalue}")]
    Resonance { omega_sq: f64, eigenvalue: f64, distance: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
