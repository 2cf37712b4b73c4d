//! Spectral embeddings of random dot product graphs: sampling, adjacency and
//! Laplacian spectral embeddings, their limit theory, Chernoff-based
//! comparison, clustering, and Monte Carlo experiments.

pub mod chernoff;
pub mod cli;
pub mod cluster;
pub mod eigen;
pub mod embed;
pub mod error;
pub mod gaussian;
pub mod harness;
pub mod limits;
pub mod model;
pub mod output;

pub use chernoff::{
    gaussian_chernoff_divergence, gaussian_chernoff_information, rho_ase, rho_lse, ChernoffEval,
    Divergence,
};
pub use cluster::{error_rate, gmm_em, kmeans, oracle_rates, ClusteringResult, OracleRates};
pub use eigen::{symmetric_eig_top, EigenOrder, EigenPairs};
pub use embed::{
    ase, lse, normalized_laplacian, procrustes_align, tilde_latents, AlignmentResult, Embedding,
    EmbeddingMethod,
};
pub use error::{Error, Result};
pub use gaussian::GaussianParams;
pub use limits::RhoRegime;
pub use model::{
    mixture_from_block_model, probability_matrix, sample_graph, sample_latents, BlockModelParams,
    MixtureOfPointMasses, RdpgSample,
};
