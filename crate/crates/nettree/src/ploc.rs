//! Eager point location: every uninserted point is mapped to its center node
//! and parked in that node's inner or outer cell; cells are updated whenever
//! a node is added or removed, and every distance computation these updates
//! perform is counted as a touch.
//!
//! A node at level `l` can own a point only if the point lies within the
//! relative radius `cr * tau^l` of the node's point. Among owning candidates
//! the center is the lexicographic minimizer of (distance, level, point id);
//! the id component is not part of the scoring function proper, it is the
//! deterministic tie rule that makes the incremental state reproducible and
//! comparable against the brute-force oracle.

use crate::error::{Error, Result};
use crate::level::Level;
use crate::metric::PointId;
use crate::tree::{NetTree, NodeKey, TouchKind};
use std::cmp::Ordering;
use std::collections::BTreeSet;

/// Inner or outer ring of a cell. Inner means the point lies within
/// `cp * tau^(l-1) / 2` of the center node's point; at the root everything
/// counts as outer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellRing {
    Inner,
    Outer,
}

/// A point's full assignment: center node plus ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellAssignment {
    pub point: PointId,
    pub center: NodeKey,
    pub ring: CellRing,
}

/// Score of a node as a center candidate: finite only when the point is
/// within the node's relative radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterScore {
    pub dist: f64,
    pub level: Level,
    pub point: PointId,
}

impl CenterScore {
    fn cmp_key(&self) -> (f64, Level, PointId) {
        (self.dist, self.level, self.point)
    }
}

impl Eq for CenterScore {}

impl PartialOrd for CenterScore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CenterScore {
    fn cmp(&self, other: &Self) -> Ordering {
        let (d1, l1, p1) = self.cmp_key();
        let (d2, l2, p2) = other.cmp_key();
        d1.partial_cmp(&d2)
            .expect("distances are finite")
            .then(l1.cmp(&l2))
            .then(p1.cmp(&p2))
    }
}

/// The center scoring function: `(distance, level)` when the distance is
/// within the node's relative radius, ineligible otherwise.
pub fn center_score(tree: &NetTree, dist: f64, node: NodeKey) -> Option<CenterScore> {
    if dist <= tree.params().relative_radius(node.level) {
        Some(CenterScore {
            dist,
            level: node.level,
            point: node.point,
        })
    } else {
        None
    }
}

/// Full-scan center of an arbitrary coordinate vector: the lexicographic
/// minimizer of the scoring function over all nodes, ties broken by smaller
/// distance, then lower level, then smaller point id. Testing oracle and
/// query-time fallback; never used by construction.
pub fn brute_force_center_coords(tree: &NetTree, coords: &[f64]) -> Option<NodeKey> {
    let mut best: Option<(CenterScore, NodeKey)> = None;
    for key in tree.node_keys() {
        let d = tree.space().dist_to(coords, key.point);
        if let Some(score) = center_score(tree, d, key) {
            if best.as_ref().map(|(b, _)| score < *b).unwrap_or(true) {
                best = Some((score, key));
            }
        }
    }
    best.map(|(_, k)| k)
}

/// Full-scan center of an uninserted point of the space.
pub fn brute_force_center(tree: &NetTree, point: PointId) -> Option<NodeKey> {
    brute_force_center_coords(tree, tree.space().coords(point))
}

impl NetTree {
    /// Ring classification of a point against a center node at the given
    /// distance. At the root everything is outer.
    pub(crate) fn classify_ring(&self, dist: f64, center: NodeKey) -> CellRing {
        if center.level == Level::PosInf {
            return CellRing::Outer;
        }
        if dist <= self.params.inner_ring_radius(center.level) {
            CellRing::Inner
        } else {
            CellRing::Outer
        }
    }

    /// The ring a point currently sits in, if its center is `node`.
    pub fn ring_of(&self, point: PointId, node: NodeKey) -> Option<CellRing> {
        let rec = self.node(node)?;
        if rec.cell_in().contains(&point) {
            Some(CellRing::Inner)
        } else if rec.cell_out().contains(&point) {
            Some(CellRing::Outer)
        } else {
            None
        }
    }

    pub(crate) fn put_in_cell(&mut self, point: PointId, center: NodeKey, ring: CellRing) {
        let rec = self.record_mut(center);
        match ring {
            CellRing::Inner => rec.cell_in.insert(point),
            CellRing::Outer => rec.cell_out.insert(point),
        };
        self.center_of.insert(point, center);
    }

    pub(crate) fn pull_from_cell(&mut self, point: PointId, center: NodeKey) {
        let rec = self.record_mut(center);
        if !rec.cell_in.remove(&point) {
            let removed = rec.cell_out.remove(&point);
            debug_assert!(removed, "point {point} was not in the cell of {center}");
        }
    }

    /// O(1) center lookup that also removes the point from its cell; the
    /// point is about to be inserted.
    pub fn take_center(&mut self, point: PointId) -> Result<NodeKey> {
        if self.is_inserted(point) {
            return Err(Error::State(format!("point {point} is already inserted")));
        }
        let center = self
            .center_of
            .remove(&point)
            .ok_or_else(|| Error::State(format!("point {point} has no center")))?;
        self.pull_from_cell(point, center);
        Ok(center)
    }

    /// Cell update after a jump split: every point in the cell of the upper
    /// end is re-evaluated against the new node (one split touch each) and
    /// moves when the new, lower node scores better. Both nodes belong to the
    /// same point, so a move is exactly the within-radius test.
    pub(crate) fn on_node_added_split(&mut self, new_node: NodeKey, jump_top: NodeKey) {
        debug_assert_eq!(new_node.point, jump_top.point);
        let candidates: Vec<PointId> = {
            let rec = &self.nodes[&jump_top];
            rec.cell_in.iter().chain(rec.cell_out.iter()).copied().collect()
        };
        let radius = self.params.relative_radius(new_node.level);
        for x in candidates {
            let d = self.touch_dist(TouchKind::Split, x, new_node.point);
            if d <= radius {
                let ring = self.classify_ring(d, new_node);
                self.pull_from_cell(x, jump_top);
                self.put_in_cell(x, new_node, ring);
            }
        }
    }

    /// Cell update after a node is inserted as a child of `parent`: scan the
    /// outer cells of the parent's neighborhood (the parent and its
    /// relatives, their children, and the children of the new node's
    /// relatives) and move every point the new node now scores best for.
    /// Inner cells are never scanned; one basic touch per scanned point.
    pub(crate) fn on_node_added_child(&mut self, new_node: NodeKey, parent: NodeKey) {
        let mut scan: BTreeSet<NodeKey> = BTreeSet::new();
        let mut around = |tree: &NetTree, k: NodeKey, scan: &mut BTreeSet<NodeKey>| {
            scan.insert(k);
            for c in tree.nodes[&k].children.iter() {
                scan.insert(*c);
            }
        };
        around(self, parent, &mut scan);
        for r in self.nodes[&parent].relatives.clone() {
            around(self, r, &mut scan);
        }
        around(self, new_node, &mut scan);
        for r in self.nodes[&new_node].relatives.clone() {
            around(self, r, &mut scan);
        }

        let candidates: Vec<(PointId, NodeKey)> = scan
            .iter()
            .flat_map(|k| {
                self.nodes[k]
                    .cell_out
                    .iter()
                    .map(move |&x| (x, *k))
            })
            .collect();
        for (x, current) in candidates {
            if current == new_node {
                continue;
            }
            let d_new = self.touch_dist(TouchKind::Basic, x, new_node.point);
            let Some(new_score) = center_score(self, d_new, new_node) else {
                continue;
            };
            let d_cur = self.dist(x, current.point);
            let cur_score =
                center_score(self, d_cur, current).expect("stored assignment is eligible");
            if new_score < cur_score {
                let ring = self.classify_ring(d_new, new_node);
                self.pull_from_cell(x, current);
                self.put_in_cell(x, new_node, ring);
            }
        }
    }

    /// Cell migration ahead of a node removal: the inner cell joins the
    /// parent's inner cell with no distance computations, and each outer
    /// point is re-ringed against the parent with one merge touch. When the
    /// parent is the root no distance is needed: everything lands in the
    /// outer ring there.
    pub(crate) fn on_node_removed(&mut self, dying: NodeKey, parent: NodeKey) {
        debug_assert_eq!(dying.point, parent.point);
        let inner: Vec<PointId> = self.nodes[&dying].cell_in.iter().copied().collect();
        let outer: Vec<PointId> = self.nodes[&dying].cell_out.iter().copied().collect();
        if parent.level == Level::PosInf {
            for x in inner.into_iter().chain(outer) {
                self.pull_from_cell(x, dying);
                self.put_in_cell(x, parent, CellRing::Outer);
            }
            return;
        }
        for x in inner {
            self.pull_from_cell(x, dying);
            self.put_in_cell(x, parent, CellRing::Inner);
        }
        for x in outer {
            let d = self.touch_dist(TouchKind::Merge, x, parent.point);
            let ring = self.classify_ring(d, parent);
            self.pull_from_cell(x, dying);
            self.put_in_cell(x, parent, ring);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::parse_points;
    use crate::params::Params;

    fn tree_with_points(text: &str) -> NetTree {
        let space = parse_points(text, 1).unwrap();
        NetTree::new(Params::new(6.0, 1.0, 1.0).unwrap(), space, 0).unwrap()
    }

    #[test]
    fn score_eligibility() {
        let tree = tree_with_points("0\n5\n7\n");
        let n0 = NodeKey::new(0, Level::Finite(0));
        // threshold cr * tau^0 = 6
        assert_eq!(
            center_score(&tree, 5.0, n0),
            Some(CenterScore {
                dist: 5.0,
                level: Level::Finite(0),
                point: 0
            })
        );
        assert_eq!(center_score(&tree, 7.0, n0), None);
        // the root is always eligible
        assert!(center_score(&tree, 1e300, tree.root()).is_some());
    }

    #[test]
    fn brute_force_center_on_bootstrap() {
        let tree = tree_with_points("0\n5\n7\n");
        assert_eq!(brute_force_center(&tree, 1), Some(tree.root()));
        assert_eq!(brute_force_center(&tree, 2), Some(tree.root()));
    }

    #[test]
    fn lower_node_wins_at_equal_distance() {
        let mut tree = tree_with_points("0\n5\n40\n");
        tree.split_jump(0, 1).unwrap();
        // same point, same distance: the level-1 node beats the root
        assert_eq!(
            brute_force_center(&tree, 1),
            Some(NodeKey::new(0, Level::Finite(1)))
        );
        // 40 exceeds cr*tau = 36, so point 2 stays with the root
        assert_eq!(brute_force_center(&tree, 2), Some(tree.root()));
    }

    #[test]
    fn take_center_contract() {
        let mut tree = tree_with_points("0\n5\n7\n");
        assert_eq!(tree.take_center(1).unwrap(), tree.root());
        assert!(matches!(tree.take_center(1), Err(Error::State(_))));
        assert!(matches!(tree.take_center(0), Err(Error::State(_))));
    }

    #[test]
    fn split_hook_moves_points_and_counts() {
        let mut tree = tree_with_points("0\n5\n40\n");
        let (node, top) = tree.split_jump(0, 1).unwrap();
        tree.on_node_added_split(node, top);
        // both uninserted points re-evaluated: two split touches
        assert_eq!(tree.counters().split, 2);
        // 5 <= 36 moves down; ring: 5 > cp*tau^0/2 = 0.5, so outer
        assert_eq!(tree.center_of(1), Some(node));
        assert_eq!(tree.ring_of(1, node), Some(CellRing::Outer));
        // 40 > 36 stays at the root
        assert_eq!(tree.center_of(2), Some(tree.root()));
    }

    #[test]
    fn split_hook_empty_cell_is_free() {
        let mut tree = tree_with_points("0\n5\n");
        tree.take_center(1).unwrap();
        let (node, top) = tree.split_jump(0, 2).unwrap();
        tree.on_node_added_split(node, top);
        assert_eq!(tree.counters().touches(), 0);
    }
}
