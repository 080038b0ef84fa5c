//! Joint embedding of two datasets through the singular vectors of their
//! entropic optimal transport plan.
//!
//! ```
//! use eotmaps::{eot_eigenmaps, simulate_preset, EigenmapOptions, EmbeddingDimension, Preset};
//!
//! let pair = simulate_preset(Preset::Setting1 { tau: 1.0 }, 40, 50, 10, 7).unwrap();
//! let options = EigenmapOptions {
//!     dimension: EmbeddingDimension::Fixed(3),
//!     ..Default::default()
//! };
//! let result = eot_eigenmaps(&pair.x, &pair.y, &options).unwrap();
//! assert_eq!(result.embedding.x.shape(), (40, 3));
//! assert_eq!(result.embedding.y.shape(), (50, 3));
//! ```

pub mod baselines;
pub mod diffusion;
pub mod embedding;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod simulate;
pub mod spectral_graph;
pub mod transport;

pub use baselines::{joint_pca_embed, pca_embed};
pub use diffusion::{truncation_bound, DiffusionContext, DistanceKind};
pub use embedding::{
    eot_eigenmaps, select_dimension, spectral_model, EigenmapOptions, EigenmapResult,
    EmbeddingDimension, JointEmbedding, SpectralModel,
};
pub use error::{Error, Result};
pub use linalg::{symmetric_eigen, truncated_svd, DataMatrix};
pub use metrics::{
    davies_bouldin, jaccard_concordance, kmeans, knn, neighbor_purity, rand_index, silhouette_mean,
    KMeansOptions,
};
pub use simulate::{simulate_preset, Dataset, Preset, SimulatedPair};
pub use spectral_graph::{build_operators, predicted_spectrum, BipartiteOperators};
pub use transport::{transport_plan, Bandwidth, SinkhornOptions, TransportPlan};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/transport.md")]
    mod transport {}
    #[doc = include_str!("../../../book/src/embedding.md")]
    mod embedding {}
    #[doc = include_str!("../../../book/src/diffusion.md")]
    mod diffusion {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
