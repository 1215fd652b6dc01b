//! Randomized incremental construction: per-point insertion at the correct
//! level and bottom-up propagation restoring the covering property, with
//! semi-compression maintained throughout.
//!
//! Insertion of a point `p` with center node `q^l`:
//!
//! 1. compute the insertion level `h` from `d(p, q)` so that
//!    `cr*tau^(h-1) < d <= cr*tau^h`, and drop one level when the packing
//!    test `d <= cp*tau^h` fails;
//! 2. materialize `q^h` (splitting the jump of `q` that spans `h`) and, when
//!    the parent of `q^h` is again a node of `q`, also `q^(h+1)`, so the new
//!    node's first parent sits exactly one level up;
//! 3. create `p^h` under the closest candidate among that parent and its
//!    relatives, compute its relatives from the children of the parent's
//!    relatives, adopt the children it now covers best, and test every node
//!    that lost a child against the semi-compressed condition;
//! 4. while the new top of `p`'s chain violates local covering, promote it
//!    one level and repeat the same local search one level up.
//!
//! Every structural event fires the point-location cell hooks, so the center
//! invariant holds after each insertion.

use crate::error::{Error, Result};
use crate::level::Level;
use crate::metric::{MetricSpace, PointId};
use crate::params::Params;
use crate::rng::shuffled_ids;
use crate::tree::{NetTree, NodeKey};

/// Outcome of one insertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InsertOutcome {
    /// The node the point was first inserted at (before any promotion).
    pub inserted_node: NodeKey,
    /// Number of propagation iterations the insertion needed.
    pub promotions: u32,
    /// Nodes materialized during the insertion, leaf and jump splits included.
    pub nodes_created: u32,
    /// Nodes removed by semi-compression during the insertion.
    pub nodes_removed: u32,
}

/// The level `h` with `cr*tau^(h-1) < d <= cr*tau^h`.
///
/// Computed by a floating log then corrected by direct comparison, so the
/// bracketing inequality holds exactly under double arithmetic even when the
/// log lands on a boundary.
pub fn insertion_level(d: f64, params: &Params) -> Result<i32> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Input(format!(
            "insertion level requires a positive finite distance, got {d}"
        )));
    }
    let mut h = (d / params.cr).ln() / params.tau.ln();
    if !h.is_finite() {
        h = 0.0;
    }
    let mut h = h.ceil() as i32;
    while d > params.relative_radius(Level::Finite(h)) {
        h += 1;
    }
    while d <= params.relative_radius(Level::Finite(h - 1)) {
        h -= 1;
    }
    Ok(h)
}

impl NetTree {
    /// Closest candidate among `first` and its relatives, ties broken by
    /// smaller point id.
    fn closest_parent_candidate(&mut self, point: PointId, first: NodeKey) -> NodeKey {
        let mut candidates = vec![first];
        candidates.extend(self.node(first).expect("parent exists").relatives().iter().copied());
        let mut best = first;
        let mut best_key = (self.dist(point, first.point), first.point);
        for cand in candidates.into_iter().skip(1) {
            let key = (self.dist(point, cand.point), cand.point);
            if key < best_key {
                best_key = key;
                best = cand;
            }
        }
        best
    }

    /// Creates `(point, level)` with its parent chosen as the closest node
    /// among `initial_parent` and its relatives, then computes its relatives
    /// from the children of the parent's neighborhood.
    fn attach_new_node(&mut self, point: PointId, level: i32, initial_parent: NodeKey) -> Result<NodeKey> {
        let parent = self.closest_parent_candidate(point, initial_parent);
        let key = NodeKey::new(point, Level::Finite(level));
        self.create_node(key, parent)?;

        let mut neighborhood = vec![parent];
        neighborhood.extend(self.node(parent).unwrap().relatives().iter().copied());
        let radius = self.params.relative_radius(key.level);
        let mut links = Vec::new();
        for nb in neighborhood {
            for cand in self.node(nb).unwrap().children().iter().copied() {
                if cand != key && cand.level == key.level {
                    links.push(cand);
                }
            }
        }
        for cand in links {
            if self.dist(point, cand.point) <= radius {
                self.link_relatives(key, cand);
            }
        }
        Ok(key)
    }

    /// Re-parents every child of the new node's neighborhood that the new
    /// node now covers best (strictly closer, ties to the smaller point id),
    /// testing each previous parent against the semi-compressed condition.
    /// Returns the number of nodes removed.
    fn adopt_children(&mut self, node: NodeKey) -> u32 {
        let mut candidates: Vec<NodeKey> = Vec::new();
        let mut sources = vec![node];
        sources.extend(self.node(node).unwrap().relatives().iter().copied());
        for src in sources {
            candidates.extend(self.node(src).unwrap().children().iter().copied());
        }
        candidates.sort_unstable();
        candidates.dedup();

        let mut removed = 0;
        for cand in candidates {
            if !self.contains(cand) {
                continue;
            }
            let current = self.parent_of(cand).expect("candidate has a parent");
            if current == node {
                continue;
            }
            let d_new = self.dist(cand.point, node.point);
            let d_cur = self.dist(cand.point, current.point);
            if (d_new, node.point) < (d_cur, current.point) {
                self.reparent(cand, node);
                if self.try_remove_node(current) {
                    removed += 1;
                }
            }
        }
        removed
    }

    /// Ensures the node `(point, level)` exists, splitting the spanning jump
    /// when absent, and fires the split cell hook. Returns the key and
    /// whether a node was created.
    fn ensure_node(&mut self, point: PointId, level: i32) -> Result<(NodeKey, bool)> {
        let key = NodeKey::new(point, Level::Finite(level));
        if self.contains(key) {
            return Ok((key, false));
        }
        let (node, top) = self.split_jump(point, level)?;
        self.on_node_added_split(node, top);
        Ok((node, true))
    }

    /// Ensures `parent(of)` sits exactly one level above `of` by splitting
    /// the same-point jump above it when necessary.
    fn normalize_parent(&mut self, of: NodeKey, created: &mut u32) -> Result<NodeKey> {
        let parent = self.parent_of(of).expect("node has a parent");
        let want = of.level.succ();
        if parent.point == of.point && parent.level > want {
            let Level::Finite(k) = want else {
                return Err(Error::Internal(format!("cannot normalize above {of}")));
            };
            let (node, top) = self.split_jump(of.point, k)?;
            self.on_node_added_split(node, top);
            *created += 1;
            return Ok(node);
        }
        Ok(parent)
    }

    /// Inserts an uninserted point at its correct level and restores local
    /// covering by bottom-up propagation.
    pub fn insert_point(&mut self, point: PointId) -> Result<InsertOutcome> {
        if self.is_inserted(point) {
            return Err(Error::State(format!("point {point} is already inserted")));
        }
        let center = self.take_center(point)?;
        let mut created = 0u32;
        let mut removed = 0u32;

        let q = center.point;
        let d_center = self.dist(point, q);
        if d_center > self.params.relative_radius(center.level) {
            return Err(Error::Internal(format!(
                "stale center {center} for point {point}: distance {d_center} exceeds the relative radius"
            )));
        }
        if d_center <= 0.0 {
            return Err(Error::Internal(format!(
                "coincident points {point} and {q} survived ingestion"
            )));
        }

        let mut h = insertion_level(d_center, &self.params)?;
        if d_center <= self.params.packing_radius(Level::Finite(h)) {
            h -= 1;
        }

        let (qh, split) = self.ensure_node(q, h)?;
        created += split as u32;
        let initial_parent = self.normalize_parent(qh, &mut created)?;

        let ph = self.attach_new_node(point, h, initial_parent)?;
        created += 1;
        let leaf = NodeKey::new(point, Level::NegInf);
        self.create_node(leaf, ph)?;
        self.leaf_of.insert(point, leaf);
        created += 1;
        removed += self.adopt_children(ph);
        let parent = self.parent_of(ph).expect("new node has a parent");
        self.on_node_added_child(ph, parent);

        let promotions = self.propagate(ph, &mut created, &mut removed)?;
        self.promotions_total += promotions as u64;
        self.finish_insertion_tally();

        Ok(InsertOutcome {
            inserted_node: ph,
            promotions,
            nodes_created: created,
            nodes_removed: removed,
        })
    }

    /// Bottom-up propagation: while the top node of the chain violates local
    /// covering against its parent, create the next node up and redo the
    /// local search there. Returns the number of promotion iterations.
    fn propagate(&mut self, from: NodeKey, created: &mut u32, removed: &mut u32) -> Result<u32> {
        let mut top = from;
        let mut promotions = 0u32;
        loop {
            let parent = self.parent_of(top).expect("chain top has a parent");
            let d = self.dist(top.point, parent.point);
            if d <= self.params.covering_radius(top.level) {
                break;
            }
            if d > self.params.relaxed_covering_radius(top.level) {
                return Err(Error::Internal(format!(
                    "covering violation at {top} exceeds the propagation bound: {d}"
                )));
            }
            let Level::Finite(k) = top.level else {
                return Err(Error::Internal(format!("cannot promote sentinel node {top}")));
            };
            let initial = self.normalize_parent(parent, created)?;
            let new_top = self.attach_new_node(top.point, k + 1, initial)?;
            *created += 1;
            // Adoption re-parents `top` under the new node (zero distance
            // always wins) and checks the old parent for removal.
            *removed += self.adopt_children(new_top);
            debug_assert_eq!(self.parent_of(top), Some(new_top));
            let new_parent = self.parent_of(new_top).expect("promoted node has a parent");
            self.on_node_added_child(new_top, new_parent);
            top = new_top;
            promotions += 1;
        }
        Ok(promotions)
    }

    /// Promotion entry point for a single violating node, exposed for tests:
    /// checks the precondition and runs the loop.
    pub fn propagate_from(&mut self, violating: NodeKey) -> Result<u32> {
        if !self.contains(violating) {
            return Err(Error::State(format!("node {violating} does not exist")));
        }
        let (mut created, mut removed) = (0, 0);
        let promotions = self.propagate(violating, &mut created, &mut removed)?;
        self.promotions_total += promotions as u64;
        self.finish_insertion_tally();
        Ok(promotions)
    }
}

/// Builds a tree over `space`: shuffles the point ids with the seeded
/// permutation, bootstraps on the first, and inserts the rest one by one.
/// Identical input and seed reproduce an identical tree.
pub fn build(space: MetricSpace, params: Params, seed: u64) -> Result<NetTree> {
    build_with_inspector(space, params, seed, |_, _| Ok(()))
}

/// [`build`] with a callback invoked after every insertion (the bootstrap
/// included), used for per-insertion auditing such as the center oracle.
pub fn build_with_inspector<F>(
    space: MetricSpace,
    params: Params,
    seed: u64,
    mut inspect: F,
) -> Result<NetTree>
where
    F: FnMut(&NetTree, PointId) -> Result<()>,
{
    if space.is_empty() {
        return Err(Error::Input("cannot build on an empty point set".into()));
    }
    let order = shuffled_ids(space.len(), seed);
    let mut tree = NetTree::new(params, space, order[0])?;
    inspect(&tree, order[0])?;
    for &p in &order[1..] {
        tree.insert_point(p)?;
        inspect(&tree, p)?;
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::parse_points;

    fn params6() -> Params {
        Params::new(6.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn insertion_level_bracketing_examples() {
        let p = params6();
        assert_eq!(insertion_level(100.0, &p).unwrap(), 2);
        assert_eq!(insertion_level(6.0, &p).unwrap(), 0);
        assert_eq!(insertion_level(6.000001, &p).unwrap(), 1);
        assert!(insertion_level(0.0, &p).is_err());
        assert!(insertion_level(-1.0, &p).is_err());
    }

    #[test]
    fn two_point_insertion_trace() {
        // Second point at distance 100: h = 2 (36 < 100 <= 216), no packing
        // adjustment. The center point's chain is materialized at levels 2
        // and 3, and the new node hangs off the level-3 node.
        let space = parse_points("0\n100\n", 1).unwrap();
        let mut tree = NetTree::new(params6(), space, 0).unwrap();
        let out = tree.insert_point(1).unwrap();
        let p2 = NodeKey::new(1, Level::Finite(2));
        assert_eq!(out.inserted_node, p2);
        assert_eq!(out.promotions, 0);
        assert_eq!(tree.node_count(), 6); // root, 0@3, 0@2, 1@2, two leaves
        assert_eq!(
            tree.parent_of(p2),
            Some(NodeKey::new(0, Level::Finite(3)))
        );
        assert_eq!(
            tree.parent_of(NodeKey::new(0, Level::Finite(2))),
            Some(NodeKey::new(0, Level::Finite(3)))
        );
        // the two level-2 nodes are relatives (100 <= cr*tau^2 = 216)
        assert!(tree
            .node(p2)
            .unwrap()
            .relatives()
            .contains(&NodeKey::new(0, Level::Finite(2))));
        // with only two points there was nobody to touch
        assert_eq!(tree.counters().touches(), 0);
    }

    #[test]
    fn packing_adjustment_fires_on_equality() {
        // tau = 8 makes the packing band non-empty: cr = 16/4 = 4, so
        // d = 8 = cp*tau^1 lands in (cr*tau^0, cr*tau^1] with h = 1 and the
        // packing test d <= cp*tau^h fires, inserting at level 0.
        let params = Params::new(8.0, 1.0, 1.0).unwrap();
        assert_eq!(params.cr, 4.0);
        let space = parse_points("0\n8\n", 1).unwrap();
        let mut tree = NetTree::new(params, space, 0).unwrap();
        let out = tree.insert_point(1).unwrap();
        assert_eq!(out.inserted_node.level, Level::Finite(0));
        assert_eq!(out.promotions, 0);
    }

    #[test]
    fn three_point_trace_no_promotion() {
        // 0, 2, 11 on the line at tau = 6: both insertions satisfy covering
        // immediately.
        let space = parse_points("0\n2\n11\n", 1).unwrap();
        let mut tree = NetTree::new(params6(), space, 0).unwrap();
        let o1 = tree.insert_point(1).unwrap();
        assert_eq!(o1.inserted_node, NodeKey::new(1, Level::Finite(0)));
        assert_eq!(o1.promotions, 0);
        let o2 = tree.insert_point(2).unwrap();
        assert_eq!(o2.inserted_node, NodeKey::new(2, Level::Finite(1)));
        assert_eq!(o2.promotions, 0);
        // final shape: root -> 0@2 -> {0@1, 11@1}, 0@1 -> {0@0, 2@0}
        assert_eq!(
            tree.parent_of(NodeKey::new(2, Level::Finite(1))),
            Some(NodeKey::new(0, Level::Finite(2)))
        );
        assert_eq!(
            tree.parent_of(NodeKey::new(1, Level::Finite(0))),
            Some(NodeKey::new(0, Level::Finite(1)))
        );
    }

    #[test]
    fn propagation_climbs_until_covering_holds() {
        // tau = 5 (cr = 10), points 0, 100, 126 inserted in order: the third
        // insertion lands at level 1 under 100@2 with d = 26 > cc*tau^2 = 25,
        // then violates again one level up (126 > 125), settling after two
        // promotions with 100@2 adopted by the new 126@3.
        let params = Params::new(5.0, 1.0, 1.0).unwrap();
        let space = parse_points("0\n100\n126\n", 1).unwrap();
        let mut tree = NetTree::new(params, space, 0).unwrap();
        assert_eq!(tree.insert_point(1).unwrap().promotions, 0);
        let out = tree.insert_point(2).unwrap();
        assert_eq!(out.inserted_node, NodeKey::new(2, Level::Finite(1)));
        assert_eq!(out.promotions, 2);
        let n3 = NodeKey::new(2, Level::Finite(3));
        assert_eq!(tree.parent_of(n3), Some(NodeKey::new(0, Level::Finite(4))));
        // the promoted chain adopted 100@2, which is closer to 126 than to 0
        assert_eq!(
            tree.parent_of(NodeKey::new(1, Level::Finite(2))),
            Some(n3)
        );
        assert_eq!(tree.promotions_total(), 2);
    }

    #[test]
    fn double_insert_is_a_state_error() {
        let space = parse_points("0\n100\n", 1).unwrap();
        let mut tree = NetTree::new(params6(), space, 0).unwrap();
        tree.insert_point(1).unwrap();
        assert!(matches!(tree.insert_point(1), Err(Error::State(_))));
    }

    #[test]
    fn build_single_point() {
        let space = parse_points("3.5\n", 1).unwrap();
        let tree = build(space, params6(), 42).unwrap();
        assert_eq!(tree.node_count(), 2);
        assert_eq!(tree.counters().touches(), 0);
    }

    #[test]
    fn build_empty_space_is_an_input_error() {
        let space = parse_points("", 1).unwrap();
        assert!(matches!(
            build(space, params6(), 42),
            Err(Error::Input(_))
        ));
    }
}
