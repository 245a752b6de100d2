//! Community detection inside a single group: regularized spherical spectral
//! clustering, SCORE, and variational EM for the SBM, together with the
//! eigensolver and k-means they share.

pub mod eigen;
mod kmeans;
mod spectral;
mod vsbm;

pub use eigen::{top_eigenpairs, EigenPairs, SymmetricOperator};
pub use kmeans::{kmeans, KMeans};
pub use spectral::{detect_score, detect_ssp, ScoreEmbedding, SpectralConfig, SspEmbedding, SspFit};
pub use vsbm::{detect_vsbm, vsbm_m_step, VemConfig, VemInit, VsbmFit};

/// Within-group detection method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Detector {
    Ssp,
    Score,
    Vsbm,
}
