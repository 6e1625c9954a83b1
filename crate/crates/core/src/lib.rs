//! Well-separated pair decompositions and approximate distance oracles for
//! low-density graphs embedded in the plane.
//!
//! The pipeline: a compressed quadtree and its Euclidean WSPD ([`quadtree`]), a
//! hierarchy of graph-metric nets ([`net_tree`]), the graph WSPD assembled from both
//! ([`graph_wspd`]), a constant-time membership oracle ([`membership`], built on the
//! ancestor queries of [`ancestry`]), an exact separator-based distance structure
//! ([`exact`]) and the approximate distance oracle on top ([`ado`]). Oracles are saved
//! and loaded by [`io`].

pub mod error;
pub mod geometry;
pub mod graph;
pub mod generate;
pub mod density;
pub mod rng;
pub mod quadtree;
pub mod net_tree;
pub mod range_tree;
pub mod graph_wspd;
pub mod constants;
pub mod level_ancestor;
pub mod ancestry;
pub mod membership;
pub mod separator;
pub mod exact;
pub mod ado;
pub mod io;

pub use error::{Error, Result};
pub use geometry::{euclidean_distance, Point2, Rect};
pub use graph::{all_pairs_shortest_paths, graph_distance, DistanceMatrix, EmbeddedGraph};
pub use ado::{build_ado, Ado, AdoSet};
pub use exact::ExactOracle;
pub use generate::{generate, GraphKind};
pub use graph_wspd::{build_graph_wspd, ClusterHandle, GraphPair, GraphWspd};
pub use membership::MembershipOracle;
