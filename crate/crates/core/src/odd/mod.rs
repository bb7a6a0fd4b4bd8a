//! Spectrum and eigenvectors of self-adjoint odd elements
//! `sum_j alpha_j e_0j + conj(alpha_j) e_j0`.

mod branch;
mod ebasis;
mod eigen;
mod identity;
mod oracle;
mod rotation;

pub use branch::{
    branch, level_counts, spectrum, spectrum_from_components, BranchingComponent, SpectrumLevel,
    SpectrumReport,
};
pub use ebasis::{rotated_highest_weight, EBasis, RotatedHighest};
pub use eigen::{
    build_intertwiner, eigenvectors, momentum_variant, Combination, EigenSystem,
    EigenvectorExpansion, Intertwiner,
};
pub use identity::{normalization_identity, telescoping_identity_check};
pub use oracle::{cluster, oracle_diagonalize, OracleResult};
pub use rotation::{build_rotation, RotationU};
