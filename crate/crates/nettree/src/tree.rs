//! The semi-compressed tree representation: nodes keyed by (point, level),
//! parent/children/relative links, jumps, and the structural edit primitives
//! used by construction.
//!
//! Structural invariants maintained here and relied on everywhere else:
//!
//! * exactly one root, at level `+inf`, keyed by the first inserted point;
//! * every inserted point has one leaf at `-inf` and its non-leaf nodes form
//!   a vertical chain (each node's same-point child is the next node down);
//! * edges between nodes of different points span exactly one level, so the
//!   only multi-level edges (jumps) connect nodes of the same point;
//! * stored relatives are same-level and symmetric;
//! * no non-root, non-leaf node is simultaneously an only child, a single
//!   parent, and relative-free (`try_remove_node` is the single place this
//!   rule is enforced).

use crate::error::{Error, Result};
use crate::level::Level;
use crate::metric::{MetricSpace, PointId};
use crate::params::Params;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// Identity of a node: its associated point and its level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeKey {
    pub point: PointId,
    pub level: Level,
}

impl NodeKey {
    pub fn new(point: PointId, level: Level) -> NodeKey {
        NodeKey { point, level }
    }
}

impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}@{}", self.point, self.level)
    }
}

/// Per-node state: tree links, relative links, and the point-location cell.
///
/// The cell sets hold uninserted points only and are empty once construction
/// finishes. Relatives exclude the node itself; the self-relation is implicit.
#[derive(Debug, Clone, Default)]
pub struct NodeRecord {
    pub(crate) parent: Option<NodeKey>,
    pub(crate) children: BTreeSet<NodeKey>,
    pub(crate) relatives: BTreeSet<NodeKey>,
    pub(crate) cell_in: BTreeSet<PointId>,
    pub(crate) cell_out: BTreeSet<PointId>,
}

impl NodeRecord {
    pub fn parent(&self) -> Option<NodeKey> {
        self.parent
    }

    pub fn children(&self) -> &BTreeSet<NodeKey> {
        &self.children
    }

    pub fn relatives(&self) -> &BTreeSet<NodeKey> {
        &self.relatives
    }

    pub fn cell_in(&self) -> &BTreeSet<PointId> {
        &self.cell_in
    }

    pub fn cell_out(&self) -> &BTreeSet<PointId> {
        &self.cell_out
    }

    pub fn cell_len(&self) -> usize {
        self.cell_in.len() + self.cell_out.len()
    }
}

/// Distance computations counted during construction, split by the
/// point-location event that caused them. `distance_total` also includes the
/// computations construction performs outside point location, so it is at
/// least `basic + split + merge`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TouchCounters {
    pub basic: u64,
    pub split: u64,
    pub merge: u64,
    pub distance_total: u64,
}

impl TouchCounters {
    pub fn touches(&self) -> u64 {
        self.basic + self.split + self.merge
    }
}

/// Which point-location event a counted distance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TouchKind {
    Basic,
    Split,
    Merge,
}

/// The mutable semi-compressed tree plus the center map for uninserted
/// points. Single-writer during construction; read-only afterwards.
#[derive(Debug, Clone)]
pub struct NetTree {
    pub(crate) params: Params,
    pub(crate) space: MetricSpace,
    pub(crate) nodes: HashMap<NodeKey, NodeRecord>,
    pub(crate) root: NodeKey,
    pub(crate) leaf_of: HashMap<PointId, NodeKey>,
    /// Lowest and highest finite-level node per point; absent when a point
    /// currently has sentinel nodes only.
    pub(crate) span: HashMap<PointId, (i32, i32)>,
    pub(crate) center_of: HashMap<PointId, NodeKey>,
    pub(crate) counters: TouchCounters,
    pub(crate) structural_ops: u64,
    pub(crate) promotions_total: u64,
    pub(crate) max_pair_touches: u32,
    /// Touches charged to the insertion currently in progress, per touched
    /// point. Drained into `max_pair_touches` when the insertion completes.
    pub(crate) pair_tally: HashMap<PointId, u32>,
}

impl NetTree {
    /// Bootstraps a tree: a root at `+inf` and a leaf at `-inf` for
    /// `first_point`, connected by a jump; every other point's center is the
    /// root.
    pub fn new(params: Params, space: MetricSpace, first_point: PointId) -> Result<NetTree> {
        if !params.is_construction_grade() {
            // Re-run the strict constructor to surface the violated constraint.
            Params::new(params.tau, params.cp, params.cc)?;
            return Err(Error::Params(format!(
                "cr = {} does not match the derived value 2*cc*tau/(tau-4)",
                params.cr
            )));
        }
        if space.is_empty() {
            return Err(Error::Input("cannot build on an empty point set".into()));
        }
        if first_point as usize >= space.len() {
            return Err(Error::Input(format!(
                "first point id {first_point} out of range (n = {})",
                space.len()
            )));
        }
        let root = NodeKey::new(first_point, Level::PosInf);
        let leaf = NodeKey::new(first_point, Level::NegInf);
        let mut nodes = HashMap::new();
        nodes.insert(
            root,
            NodeRecord {
                parent: None,
                children: BTreeSet::from([leaf]),
                ..NodeRecord::default()
            },
        );
        nodes.insert(
            leaf,
            NodeRecord {
                parent: Some(root),
                ..NodeRecord::default()
            },
        );
        let mut tree = NetTree {
            params,
            space,
            nodes,
            root,
            leaf_of: HashMap::from([(first_point, leaf)]),
            span: HashMap::new(),
            center_of: HashMap::new(),
            counters: TouchCounters::default(),
            structural_ops: 2,
            promotions_total: 0,
            max_pair_touches: 0,
            pair_tally: HashMap::new(),
        };
        for p in 0..tree.space.len() as PointId {
            if p != first_point {
                tree.center_of.insert(p, root);
                tree.nodes.get_mut(&root).unwrap().cell_out.insert(p);
            }
        }
        Ok(tree)
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn root(&self) -> NodeKey {
        self.root
    }

    pub fn counters(&self) -> &TouchCounters {
        &self.counters
    }

    pub fn structural_ops(&self) -> u64 {
        self.structural_ops
    }

    pub fn promotions_total(&self) -> u64 {
        self.promotions_total
    }

    /// Largest number of touches any single insertion charged to any single
    /// uninserted point.
    pub fn max_pair_touches(&self) -> u32 {
        self.max_pair_touches
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, key: NodeKey) -> bool {
        self.nodes.contains_key(&key)
    }

    pub fn node(&self, key: NodeKey) -> Option<&NodeRecord> {
        self.nodes.get(&key)
    }

    pub fn node_keys(&self) -> impl Iterator<Item = NodeKey> + '_ {
        self.nodes.keys().copied()
    }

    pub fn parent_of(&self, key: NodeKey) -> Option<NodeKey> {
        self.nodes.get(&key).and_then(|r| r.parent)
    }

    pub fn leaf_of(&self, point: PointId) -> Option<NodeKey> {
        self.leaf_of.get(&point).copied()
    }

    pub fn is_inserted(&self, point: PointId) -> bool {
        self.leaf_of.contains_key(&point)
    }

    pub fn inserted_count(&self) -> usize {
        self.leaf_of.len()
    }

    /// Lowest and highest finite-level node of a point, if it has any.
    pub fn finite_span(&self, point: PointId) -> Option<(i32, i32)> {
        self.span.get(&point).copied()
    }

    /// Maintained center of an uninserted point.
    pub fn center_of(&self, point: PointId) -> Option<NodeKey> {
        self.center_of.get(&point).copied()
    }

    pub fn uninserted(&self) -> impl Iterator<Item = (PointId, NodeKey)> + '_ {
        self.center_of.iter().map(|(&p, &k)| (p, k))
    }

    /// Counted distance between two points of the space (construction path).
    pub(crate) fn dist(&mut self, a: PointId, b: PointId) -> f64 {
        self.counters.distance_total += 1;
        self.space.dist(a, b)
    }

    /// Counted distance tagged with the point-location event that caused it;
    /// also charges the touch to the insertion in progress.
    pub(crate) fn touch_dist(&mut self, kind: TouchKind, touched: PointId, node_point: PointId) -> f64 {
        self.counters.distance_total += 1;
        match kind {
            TouchKind::Basic => self.counters.basic += 1,
            TouchKind::Split => self.counters.split += 1,
            TouchKind::Merge => self.counters.merge += 1,
        }
        *self.pair_tally.entry(touched).or_insert(0) += 1;
        self.space.dist(touched, node_point)
    }

    pub(crate) fn finish_insertion_tally(&mut self) {
        for &t in self.pair_tally.values() {
            self.max_pair_touches = self.max_pair_touches.max(t);
        }
        self.pair_tally.clear();
    }

    /// The child of `key` associated with the same point, if any. For
    /// internal nodes the nesting property guarantees one exists (the leaf
    /// counts as the bottommost such child).
    pub fn nesting_child(&self, key: NodeKey) -> Option<NodeKey> {
        self.nodes
            .get(&key)?
            .children
            .iter()
            .copied()
            .find(|c| c.point == key.point)
    }

    pub(crate) fn record_mut(&mut self, key: NodeKey) -> &mut NodeRecord {
        self.nodes.get_mut(&key).expect("node must exist")
    }

    fn span_on_create(&mut self, key: NodeKey) {
        if let Level::Finite(k) = key.level {
            self.span
                .entry(key.point)
                .and_modify(|(lo, hi)| {
                    *lo = (*lo).min(k);
                    *hi = (*hi).max(k);
                })
                .or_insert((k, k));
        }
    }

    fn span_on_remove(&mut self, key: NodeKey, parent: NodeKey, child: NodeKey) {
        let Level::Finite(k) = key.level else { return };
        let Some(&(lo, hi)) = self.span.get(&key.point) else {
            return;
        };
        if lo == k && hi == k {
            self.span.remove(&key.point);
        } else if k == lo {
            // the merged child must be the leaf here; the next finite node up
            // is the parent
            if let Level::Finite(pk) = parent.level {
                self.span.insert(key.point, (pk.min(hi), hi));
            } else {
                self.span.remove(&key.point);
            }
        } else if k == hi {
            if let Level::Finite(ck) = child.level {
                self.span.insert(key.point, (lo, ck.max(lo)));
            } else {
                self.span.remove(&key.point);
            }
        }
    }

    /// Creates a bare node under `parent`. Links both directions; relatives
    /// and cells start empty.
    pub(crate) fn create_node(&mut self, key: NodeKey, parent: NodeKey) -> Result<()> {
        if self.nodes.contains_key(&key) {
            return Err(Error::Structural(format!("node {key} already exists")));
        }
        if !self.nodes.contains_key(&parent) {
            return Err(Error::Structural(format!("parent {parent} does not exist")));
        }
        if parent.level <= key.level {
            return Err(Error::Structural(format!(
                "parent {parent} is not above {key}"
            )));
        }
        self.nodes.insert(
            key,
            NodeRecord {
                parent: Some(parent),
                ..NodeRecord::default()
            },
        );
        self.record_mut(parent).children.insert(key);
        self.span_on_create(key);
        self.structural_ops += 1;
        Ok(())
    }

    /// Moves `child` from its current parent to `new_parent`. The caller is
    /// responsible for testing the old parent against the semi-compressed
    /// condition afterwards.
    pub(crate) fn reparent(&mut self, child: NodeKey, new_parent: NodeKey) -> NodeKey {
        let old = self.record_mut(child).parent.replace(new_parent).expect("child had a parent");
        self.record_mut(old).children.remove(&child);
        self.record_mut(new_parent).children.insert(child);
        self.structural_ops += 1;
        old
    }

    /// Links `a` and `b` as relatives (both directions).
    pub(crate) fn link_relatives(&mut self, a: NodeKey, b: NodeKey) {
        debug_assert_eq!(a.level, b.level);
        debug_assert_ne!(a, b);
        if self.record_mut(a).relatives.insert(b) {
            self.structural_ops += 1;
        }
        if self.record_mut(b).relatives.insert(a) {
            self.structural_ops += 1;
        }
    }

    /// Splits the jump of `point` that spans `at_level`, materializing the
    /// node `(point, at_level)` between the two ends. Returns the new node
    /// and the upper end of the split edge. Point-location cell updates are
    /// the caller's job.
    pub fn split_jump(&mut self, point: PointId, at_level: i32) -> Result<(NodeKey, NodeKey)> {
        let target = Level::Finite(at_level);
        let mut below = self
            .leaf_of(point)
            .ok_or_else(|| Error::Structural(format!("point {point} has no leaf")))?;
        let top = loop {
            let above = self
                .parent_of(below)
                .ok_or_else(|| Error::Structural(format!("no jump of point {point} spans level {at_level}")))?;
            if above.point != point {
                return Err(Error::Structural(format!(
                    "no jump of point {point} spans level {at_level}"
                )));
            }
            if above.level == target {
                return Err(Error::Structural(format!(
                    "point {point} already has a node at level {at_level}"
                )));
            }
            if above.level > target {
                break above;
            }
            below = above;
        };
        let key = NodeKey::new(point, target);
        self.nodes.insert(
            key,
            NodeRecord {
                parent: Some(top),
                children: BTreeSet::from([below]),
                ..NodeRecord::default()
            },
        );
        let top_rec = self.record_mut(top);
        top_rec.children.remove(&below);
        top_rec.children.insert(key);
        self.record_mut(below).parent = Some(key);
        self.span_on_create(key);
        self.structural_ops += 1;
        Ok((key, top))
    }

    /// Removes `key` and merges its two incident edges into a jump iff it is
    /// its parent's only child, has exactly one child, and has no relatives.
    /// Migrates the node's cell to its parent first. Returns whether the node
    /// was removed.
    pub fn try_remove_node(&mut self, key: NodeKey) -> bool {
        if key == self.root || key.level == Level::NegInf {
            return false;
        }
        let Some(rec) = self.nodes.get(&key) else {
            return false;
        };
        if !rec.relatives.is_empty() || rec.children.len() != 1 {
            return false;
        }
        let parent = rec.parent.expect("non-root node has a parent");
        if self.nodes[&parent].children.len() != 1 {
            return false;
        }
        // Only-child plus nesting means the parent shares the point, so the
        // merged edge is again a same-point jump.
        debug_assert_eq!(parent.point, key.point);
        self.on_node_removed(key, parent);
        let rec = self.nodes.remove(&key).expect("checked above");
        let child = *rec.children.iter().next().expect("exactly one child");
        let parent_rec = self.record_mut(parent);
        parent_rec.children.remove(&key);
        parent_rec.children.insert(child);
        self.record_mut(child).parent = Some(parent);
        self.span_on_remove(key, parent, child);
        self.structural_ops += 1;
        true
    }

    /// Number of nodes the fully compressed representation would have
    /// (relatives ignored). Does not mutate the tree.
    ///
    /// Removability under full compression is a local predicate: a non-root,
    /// non-leaf node goes iff it is an only child with a single child.
    /// Removing one chain node changes neither count for its neighbors, so
    /// the predicate can be evaluated against the current tree.
    pub fn compressed_node_count(&self) -> usize {
        let removable = self
            .nodes
            .iter()
            .filter(|(key, rec)| {
                key.level.is_finite()
                    && rec.children.len() == 1
                    && rec
                        .parent
                        .map(|p| self.nodes[&p].children.len() == 1)
                        .unwrap_or(false)
            })
            .count();
        self.nodes.len() - removable
    }

    /// Undirected count of stored relative links.
    pub fn relative_edge_count(&self) -> usize {
        let total: usize = self.nodes.values().map(|r| r.relatives.len()).sum();
        debug_assert_eq!(total % 2, 0);
        total / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::parse_points;

    fn params() -> Params {
        Params::new(6.0, 1.0, 1.0).unwrap()
    }

    fn line_space() -> MetricSpace {
        parse_points("0\n2\n11\n28\n", 1).unwrap()
    }

    #[test]
    fn bootstrap_tree() {
        let tree = NetTree::new(params(), line_space(), 0).unwrap();
        assert_eq!(tree.node_count(), 2);
        assert_eq!(tree.root().point, 0);
        assert_eq!(tree.root().level, Level::PosInf);
        let leaf = tree.leaf_of(0).unwrap();
        assert_eq!(tree.parent_of(leaf), Some(tree.root()));
        // every other point starts centered at the root, in the outer ring
        assert_eq!(tree.center_of(1), Some(tree.root()));
        assert_eq!(tree.node(tree.root()).unwrap().cell_out().len(), 3);
        assert_eq!(tree.counters().touches(), 0);
    }

    #[test]
    fn bootstrap_rejects_bad_params() {
        let err = NetTree::new(
            Params::relaxed(4.0, 1.0, 1.0, 6.0).unwrap(),
            line_space(),
            0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Params(_)));
    }

    #[test]
    fn bootstrap_rejects_empty_space() {
        let empty = parse_points("", 1).unwrap();
        assert!(matches!(
            NetTree::new(params(), empty, 0),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn split_bootstrap_jump() {
        let mut tree = NetTree::new(params(), line_space(), 0).unwrap();
        let (node, top) = tree.split_jump(0, 3).unwrap();
        assert_eq!(node, NodeKey::new(0, Level::Finite(3)));
        assert_eq!(top, tree.root());
        let leaf = tree.leaf_of(0).unwrap();
        assert_eq!(tree.parent_of(leaf), Some(node));
        assert_eq!(tree.parent_of(node), Some(tree.root()));
        assert_eq!(tree.finite_span(0), Some((3, 3)));
    }

    #[test]
    fn split_twice_keeps_jumps() {
        let mut tree = NetTree::new(params(), line_space(), 0).unwrap();
        tree.split_jump(0, 1).unwrap();
        let (n5, top) = tree.split_jump(0, 5).unwrap();
        assert_eq!(top, tree.root());
        let (n3, top) = tree.split_jump(0, 3).unwrap();
        assert_eq!(top, n5);
        assert_eq!(
            tree.parent_of(NodeKey::new(0, Level::Finite(1))),
            Some(n3)
        );
        assert_eq!(tree.finite_span(0), Some((1, 5)));
    }

    #[test]
    fn split_occupied_level_fails() {
        let mut tree = NetTree::new(params(), line_space(), 0).unwrap();
        tree.split_jump(0, 3).unwrap();
        assert!(matches!(
            tree.split_jump(0, 3),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn split_foreign_point_fails() {
        let mut tree = NetTree::new(params(), line_space(), 0).unwrap();
        assert!(tree.split_jump(1, 3).is_err());
    }

    #[test]
    fn remove_single_chain_node() {
        let mut tree = NetTree::new(params(), line_space(), 0).unwrap();
        let (n1, _) = tree.split_jump(0, 1).unwrap();
        let (n5, _) = tree.split_jump(0, 5).unwrap();
        // n5: only child of the root, one child (n1), no relatives
        assert!(tree.try_remove_node(n5));
        assert_eq!(tree.parent_of(n1), Some(tree.root()));
        assert_eq!(tree.finite_span(0), Some((1, 1)));
        assert!(tree.try_remove_node(n1));
        assert_eq!(tree.node_count(), 2);
        assert_eq!(tree.finite_span(0), None);
    }

    #[test]
    fn remove_respects_relatives_and_degree() {
        let mut tree = NetTree::new(params(), line_space(), 0).unwrap();
        let (n3, _) = tree.split_jump(0, 3).unwrap();
        // a relative keeps the node alive even when chain-compressible
        crate::faults::add_one_way_relative(&mut tree, n3, NodeKey::new(1, Level::Finite(3)));
        assert!(!tree.try_remove_node(n3));
        assert!(!tree.try_remove_node(tree.root()));
        assert!(!tree.try_remove_node(tree.leaf_of(0).unwrap()));
    }

    #[test]
    fn compressed_count_bootstrap() {
        let tree = NetTree::new(params(), line_space(), 0).unwrap();
        assert_eq!(tree.compressed_node_count(), 2);
    }

    #[test]
    fn compressed_count_skips_chains() {
        let mut tree = NetTree::new(params(), line_space(), 0).unwrap();
        for l in [1, 2, 3] {
            tree.split_jump(0, l).unwrap();
        }
        // root -> 0@3 -> 0@2 -> 0@1 -> leaf: the three chain nodes compress away
        assert_eq!(tree.node_count(), 5);
        assert_eq!(tree.compressed_node_count(), 2);
    }
}
