use thiserror::Error;

pub type Result<T> = std::result::Result<T, QkaError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QkaError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("quaternion is not a unit (|q| - 1 = {deviation:.3e})")]
    NotUnitQuaternion { deviation: f64 },

    #[error("matrix is not quaternionic unitary (max |A*A - I| = {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("matrix is not a rotation (orthogonality residual {residual:.3e}, det {det:.6})")]
    NotRotation { residual: f64, det: f64 },

    #[error("spanning set is rank deficient (smallest singular value {smallest:.3e})")]
    RankDeficient { smallest: f64 },

    #[error("basis is not orthonormal (max |B^T B - I| = {residual:.3e})")]
    NotOrthonormal { residual: f64 },

    #[error("vector does not lie in the subspace (relative residual {residual:.3e})")]
    NotInSubspace { residual: f64 },

    #[error("vector is not a unit vector (|v| = {norm})")]
    NotUnit { norm: f64 },

    #[error("angle is pi/2, so the normalized operator is undefined")]
    RightAngle,

    #[error("normalized operator is not an orthogonal complex structure on V (residual {residual:.3e})")]
    NotInvariant { residual: f64 },

    #[error("invalid angle triple: {0}")]
    InvalidAngles(String),

    #[error("formula is singular at phi_1 = 0")]
    SingularAtZero,

    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    #[error("ambient space too small: needs n >= {needed}, got n = {got}")]
    AmbientTooSmall { needed: usize, got: usize },

    #[error("Kahler angle is not constant (spread {spread:.3e})")]
    NotConstant { spread: f64 },

    #[error("rank of the distribution varies across samples ({0:?})")]
    RankVaries(Vec<usize>),

    #[error("no common canonical basis (joint diagonalization residual {residual:.3e})")]
    NoCommonBasis { residual: f64 },

    #[error("dimension {0} is not a positive multiple of 4")]
    NotMultipleOfFour(usize),

    #[error("kernel dimensions ({plus}, {minus}) are inconsistent with dim {dim}")]
    InconsistentType { plus: usize, minus: usize, dim: usize },

    #[error("block decomposition failed: {0}")]
    Factorization(String),

    #[error("the two branches merge at this angle")]
    BranchesMerge,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("oracle criteria disagree: {0}")]
    OracleDisagreement(String),
}
