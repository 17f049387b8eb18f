//! Pairwise operators (cotangent stiffness, consistent mass) and pointwise
//! signatures (SHOT-style, heat kernel, geodesic).

mod assemble;
mod hks;
mod shot;
mod signature;
mod sparse;

pub use assemble::{assemble_mass, assemble_operators, assemble_stiffness};
pub(crate) use assemble::{edge_weights, ordered_sum, warn_big_cot, with_diagonal};
pub use hks::{hks, hks_cross, LaplaceSpectrum, HKS_MAX_VERTICES};
pub use shot::{shot_like_descriptor, ShotParams};
pub use signature::{geodesic_signature, geodesic_signature_scaled, PointSignature, SignatureKind};
pub use sparse::{OperatorKind, SparseOperator};
