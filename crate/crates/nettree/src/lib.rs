//! Semi-compressed local net-trees on doubling metrics.
//!
//! A net-tree stores a point set in a hierarchy of metric nets, one per
//! level, with the scale growing by a factor `tau` between levels. Nodes are
//! (point, level) pairs; points are leaves at level `-inf`, the root sits at
//! `+inf`, and same-level nodes within the relative radius are linked as
//! relatives. This crate builds the semi-compressed variant — chains compress
//! away only when they carry no relative links — by randomized incremental
//! insertion: each new point is located via an eagerly maintained
//! center map (an approximate Voronoi diagram over nodes), inserted at the
//! level its distance dictates, and promoted upward until the covering
//! invariant holds again.
//!
//! The crate exposes:
//!
//! * [`metric`]: points, Euclidean distance, CSV ingestion;
//! * [`tree`]: the node store and structural edit primitives;
//! * [`construct`]: insertion, propagation, and the seeded build;
//! * [`ploc`]: the point-location cells, center maintenance, and touch
//!   accounting;
//! * [`query`]: approximate nearest neighbor and per-level nets;
//! * [`validate`]: executable checkers for every invariant plus brute-force
//!   oracles;
//! * [`snapshot`]: JSON serialization;
//! * [`faults`]: deliberate invariant breakers for checker tests.

pub mod construct;
pub mod error;
pub mod faults;
pub mod level;
pub mod metric;
pub mod params;
pub mod ploc;
pub mod query;
pub mod rng;
pub mod snapshot;
pub mod stats;
pub mod tree;
pub mod validate;

pub use construct::{build, build_with_inspector, insertion_level, InsertOutcome};
pub use error::{Error, Result};
pub use level::Level;
pub use metric::{distance, load_points, parse_points, DistanceKind, MetricSpace, Point, PointId};
pub use params::Params;
pub use ploc::{brute_force_center, CellAssignment, CellRing};
pub use query::{ann, center_descend, materialized_levels, net_at_level, AnnResult};
pub use snapshot::{load_tree, save_tree, TreeSnapshot};
pub use stats::StatsRecord;
pub use tree::{NetTree, NodeKey, NodeRecord, TouchCounters};
pub use validate::{
    brute_force_nn, check_centers, check_global, check_local, check_local_parent_net,
    check_nets, check_relative_completeness, size_stats, SizeStats, ValidationReport,
};
