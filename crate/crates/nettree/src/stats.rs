//! Machine-readable build statistics.

use crate::rng::SHUFFLE_ALGORITHM;
use crate::tree::NetTree;
use crate::validate::size_stats;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TouchStats {
    pub basic: u64,
    pub split: u64,
    pub merge: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamStats {
    pub tau: f64,
    pub cp: f64,
    pub cc: f64,
    pub cr: f64,
}

/// One build's worth of counters and sizes, as written to stats JSON. All
/// fields except `build_wall_time_ms` are deterministic for a fixed input
/// file and seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsRecord {
    pub n: usize,
    pub dim: usize,
    pub params: ParamStats,
    pub seed: u64,
    pub shuffle_algorithm: String,
    pub nodes: usize,
    pub relative_edges: usize,
    pub compressed_nodes: usize,
    pub touches: TouchStats,
    pub distance_total: u64,
    pub build_wall_time_ms: f64,
    pub promotions_total: u64,
    pub structural_ops: u64,
    pub max_pair_touches: u32,
}

impl StatsRecord {
    pub fn of(tree: &NetTree, seed: u64, build_wall_time_ms: f64) -> StatsRecord {
        let sizes = size_stats(tree);
        let c = tree.counters();
        let p = tree.params();
        StatsRecord {
            n: tree.space().len(),
            dim: tree.space().dim(),
            params: ParamStats {
                tau: p.tau,
                cp: p.cp,
                cc: p.cc,
                cr: p.cr,
            },
            seed,
            shuffle_algorithm: SHUFFLE_ALGORITHM.into(),
            nodes: sizes.nodes,
            relative_edges: sizes.relative_edges,
            compressed_nodes: sizes.compressed_nodes,
            touches: TouchStats {
                basic: c.basic,
                split: c.split,
                merge: c.merge,
            },
            distance_total: c.distance_total,
            build_wall_time_ms,
            promotions_total: tree.promotions_total(),
            structural_ops: tree.structural_ops(),
            max_pair_touches: tree.max_pair_touches(),
        }
    }

    /// Total point-location touches.
    pub fn touches_total(&self) -> u64 {
        self.touches.basic + self.touches.split + self.touches.merge
    }
}
