//! Hardness constructions: SPECIAL-3DS from cubic graphs, the solution
//! mappings between the two problems, geometric embeddings and edge
//! subdivision.

pub mod embed;
pub mod graph;
pub mod regions;
pub mod special3ds;

pub use embed::{
    embed_a1, embed_a3_strips, embed_a5_shadows, embed_circles_from_cubic_is,
    embed_triangles_from_cubic_is, incidence_matches, CircleEmbedding,
};
pub use graph::{CubicGraph, GeneralGraph};
pub use regions::{Region, RegionInstance};
pub use special3ds::{backward_solution, forward_solution, special3ds_from_cubic, SetSystem};
