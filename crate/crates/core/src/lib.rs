//! Correlation-aware cache-aided coded multicast: library model, cache
//! placement, augmented conflict graphs, greedy group coloring, codeword
//! assembly with a peeling decoder, closed-form rate bounds, and the
//! Monte Carlo harness that ties them together.

pub mod bounds;
pub mod coloring;
pub mod corrlib;
pub mod delivery;
pub mod error;
pub mod graph;
pub mod harness;
pub mod placement;

pub use coloring::{ggc, ggc1, ggc2, oracle_min_rate, GroupColoring};
pub use corrlib::{cond_entropy, delta_correlated, ensemble, LibraryModel, PacketRef, UpdateFlags, Version};
pub use delivery::{assemble_codeword, decode_verify, Codeword};
pub use error::{Error, Result};
pub use graph::{build_demand, ConflictGraph, DemandConfig};
pub use placement::{deterministic_place, random_fractional_place, CacheConfig, CachingDistribution};
