//! JSON snapshots of a tree: parameters, the point coordinates, and the full
//! node/link structure. Level structure round-trips bit-exactly; coordinates
//! are stored at full double precision. Node order and link order are sorted,
//! so identical trees serialize to identical bytes.

use crate::error::{Error, Result};
use crate::level::Level;
use crate::metric::{MetricSpace, PointId};
use crate::params::Params;
use crate::tree::{NetTree, NodeKey, NodeRecord, TouchCounters};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeSnapshot {
    pub point: PointId,
    pub level: Level,
    pub parent: Option<(PointId, Level)>,
    pub children: Vec<(PointId, Level)>,
    pub relatives: Vec<(PointId, Level)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeSnapshot {
    pub params: Params,
    pub n: usize,
    pub dim: usize,
    pub distance: String,
    pub points: Vec<Vec<f64>>,
    pub nodes: Vec<NodeSnapshot>,
}

impl TreeSnapshot {
    pub fn of(tree: &NetTree) -> TreeSnapshot {
        let mut keys: Vec<NodeKey> = tree.node_keys().collect();
        keys.sort_unstable();
        let nodes = keys
            .into_iter()
            .map(|k| {
                let rec = tree.node(k).unwrap();
                NodeSnapshot {
                    point: k.point,
                    level: k.level,
                    parent: rec.parent().map(|p| (p.point, p.level)),
                    children: rec.children().iter().map(|c| (c.point, c.level)).collect(),
                    relatives: rec.relatives().iter().map(|r| (r.point, r.level)).collect(),
                }
            })
            .collect();
        TreeSnapshot {
            params: *tree.params(),
            n: tree.space().len(),
            dim: tree.space().dim(),
            distance: tree.space().kind().to_string(),
            points: tree
                .space()
                .points()
                .iter()
                .map(|p| p.coords.clone())
                .collect(),
            nodes,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serializes")
    }

    pub fn from_json(text: &str) -> Result<TreeSnapshot> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("malformed snapshot: {e}")))
    }

    /// Reconstructs a tree for validation and queries. Accepts relaxed
    /// parameters; the point-location state is not part of a snapshot, so the
    /// result cannot continue an unfinished construction.
    pub fn restore(&self) -> Result<NetTree> {
        if self.distance != "euclidean" {
            return Err(Error::Input(format!(
                "unknown distance kind '{}'",
                self.distance
            )));
        }
        let params = Params::relaxed(self.params.tau, self.params.cp, self.params.cc, self.params.cr)?;
        if self.points.len() != self.n {
            return Err(Error::Input(format!(
                "snapshot claims n = {} but carries {} points",
                self.n,
                self.points.len()
            )));
        }
        let space = MetricSpace::from_rows(self.points.clone(), self.dim)?;

        let mut nodes: HashMap<NodeKey, NodeRecord> = HashMap::new();
        let mut root = None;
        let mut leaf_of = HashMap::new();
        let mut span: HashMap<PointId, (i32, i32)> = HashMap::new();
        for snap in &self.nodes {
            if snap.point as usize >= self.n {
                return Err(Error::Input(format!(
                    "node references point {} outside 0..{}",
                    snap.point, self.n
                )));
            }
            let key = NodeKey::new(snap.point, snap.level);
            let rec = NodeRecord {
                parent: snap.parent.map(|(p, l)| NodeKey::new(p, l)),
                children: snap
                    .children
                    .iter()
                    .map(|&(p, l)| NodeKey::new(p, l))
                    .collect::<BTreeSet<_>>(),
                relatives: snap
                    .relatives
                    .iter()
                    .map(|&(p, l)| NodeKey::new(p, l))
                    .collect::<BTreeSet<_>>(),
                ..NodeRecord::default()
            };
            if nodes.insert(key, rec).is_some() {
                return Err(Error::Input(format!("duplicate node {key}")));
            }
            match key.level {
                Level::PosInf => {
                    if root.replace(key).is_some() {
                        return Err(Error::Input("snapshot has two roots".into()));
                    }
                }
                Level::NegInf => {
                    leaf_of.insert(key.point, key);
                }
                Level::Finite(l) => {
                    span.entry(key.point)
                        .and_modify(|(lo, hi)| {
                            *lo = (*lo).min(l);
                            *hi = (*hi).max(l);
                        })
                        .or_insert((l, l));
                }
            }
        }
        let root = root.ok_or_else(|| Error::Input("snapshot has no root".into()))?;
        // link consistency
        for (key, rec) in &nodes {
            if let Some(p) = rec.parent {
                let ok = nodes
                    .get(&p)
                    .map(|pr| pr.children.contains(key))
                    .unwrap_or(false);
                if !ok {
                    return Err(Error::Input(format!(
                        "snapshot edge {p} -> {key} is not mutual"
                    )));
                }
            } else if *key != root {
                return Err(Error::Input(format!("non-root node {key} has no parent")));
            }
            for c in &rec.children {
                let ok = nodes
                    .get(c)
                    .map(|cr| cr.parent == Some(*key))
                    .unwrap_or(false);
                if !ok {
                    return Err(Error::Input(format!(
                        "snapshot child link {key} -> {c} is not mutual"
                    )));
                }
            }
            for r in &rec.relatives {
                if !nodes.contains_key(r) {
                    return Err(Error::Input(format!("dangling relative {r} of {key}")));
                }
            }
        }
        Ok(NetTree {
            params,
            space,
            nodes,
            root,
            leaf_of,
            span,
            center_of: HashMap::new(),
            counters: TouchCounters::default(),
            structural_ops: 0,
            promotions_total: 0,
            max_pair_touches: 0,
            pair_tally: HashMap::new(),
        })
    }
}

pub fn save_tree(tree: &NetTree, path: &Path) -> Result<()> {
    std::fs::write(path, TreeSnapshot::of(tree).to_json())?;
    Ok(())
}

pub fn load_tree(path: &Path) -> Result<NetTree> {
    let text = std::fs::read_to_string(path)?;
    TreeSnapshot::from_json(&text)?.restore()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::build;
    use crate::metric::parse_points;
    use crate::validate::check_local;

    #[test]
    fn snapshot_round_trip_preserves_structure() {
        let space = parse_points("0\n2\n11\n28\n", 1).unwrap();
        let tree = build(space, Params::new(6.0, 1.0, 1.0).unwrap(), 3).unwrap();
        let snap = TreeSnapshot::of(&tree);
        let json = snap.to_json();
        let restored = TreeSnapshot::from_json(&json).unwrap().restore().unwrap();
        assert_eq!(restored.node_count(), tree.node_count());
        for k in tree.node_keys() {
            let a = tree.node(k).unwrap();
            let b = restored.node(k).expect("node survives the round trip");
            assert_eq!(a.parent(), b.parent());
            assert_eq!(a.children(), b.children());
            assert_eq!(a.relatives(), b.relatives());
        }
        // byte-identical re-serialization
        assert_eq!(json, TreeSnapshot::of(&restored).to_json());
        assert!(check_local(&restored).passed());
    }

    #[test]
    fn malformed_snapshot_is_rejected() {
        assert!(TreeSnapshot::from_json("{\"nope\":1}").is_err());
        let space = parse_points("0\n2\n", 1).unwrap();
        let tree = build(space, Params::new(6.0, 1.0, 1.0).unwrap(), 3).unwrap();
        let mut snap = TreeSnapshot::of(&tree);
        snap.nodes[0].children.push((0, Level::Finite(99)));
        assert!(snap.restore().is_err());
    }
}
