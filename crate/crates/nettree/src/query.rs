//! Read-only services over a finished tree: approximate nearest neighbor via
//! center descent and per-level net extraction.

use crate::error::{Error, Result};
use crate::metric::PointId;
use crate::ploc::{center_score, CenterScore};
use crate::tree::{NetTree, NodeKey};
use std::collections::{BTreeSet, HashSet};

/// An approximate-nearest-neighbor answer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnResult {
    pub point: PointId,
    pub distance: f64,
    /// The guaranteed approximation factor for these tree parameters.
    pub bound_factor: f64,
}

/// Center of an arbitrary query location, found by descending the tree.
///
/// Starting at the root, frontier nodes are expanded through their children
/// and relatives; a subtree is descended only while its root could still hide
/// a closer point than the best score seen (leaves below a node at level `l`
/// stay within `cc*tau/(tau-1) * tau^l` of its point). The full-scan
/// minimizer is the reference oracle for this routine.
pub fn center_descend(tree: &NetTree, q: &[f64]) -> Result<NodeKey> {
    if q.len() != tree.space().dim() {
        return Err(Error::Input(format!(
            "query has dim {}, dataset has dim {}",
            q.len(),
            tree.space().dim()
        )));
    }
    let root = tree.root();
    let d_root = tree.space().dist_to(q, root.point);
    let mut best_key = root;
    let mut best = center_score(tree, d_root, root).expect("root is always eligible");

    let mut visited: HashSet<NodeKey> = HashSet::from([root]);
    let mut stack = vec![root];
    while let Some(k) = stack.pop() {
        let rec = tree.node(k).expect("visited nodes exist");
        for next in rec.children().iter().chain(rec.relatives().iter()).copied() {
            if !visited.insert(next) {
                continue;
            }
            let d = tree.space().dist_to(q, next.point);
            if let Some(score) = center_score(tree, d, next) {
                if score < best {
                    best = score;
                    best_key = next;
                }
            }
            // Descend while the subtree around `next` could still contain a
            // point beating the current best distance.
            if d <= best.dist + tree.params().subtree_radius(next.level) {
                stack.push(next);
            }
        }
    }
    Ok(best_key)
}

/// Approximate nearest neighbor of `q` among the tree's points: the point of
/// `q`'s center. The returned distance is within `bound_factor` of the exact
/// nearest distance.
pub fn ann(tree: &NetTree, q: &[f64]) -> Result<AnnResult> {
    if tree.inserted_count() == 0 {
        return Err(Error::State("tree has no inserted points".into()));
    }
    let bound_factor = tree.params().ann_factor()?;
    let center = center_descend(tree, q)?;
    Ok(AnnResult {
        point: center.point,
        distance: tree.space().dist_to(q, center.point),
        bound_factor,
    })
}

/// The net at a level: all points whose highest finite node is at `level` or
/// above; the root's point always belongs.
pub fn net_at_level(tree: &NetTree, level: i32) -> BTreeSet<PointId> {
    let mut net = BTreeSet::from([tree.root().point]);
    for p in 0..tree.space().len() as PointId {
        if let Some((_, hi)) = tree.finite_span(p) {
            if hi >= level {
                net.insert(p);
            }
        }
    }
    net
}

/// Every finite level at which the tree has at least one node, ascending.
pub fn materialized_levels(tree: &NetTree) -> Vec<i32> {
    let mut levels: Vec<i32> = tree
        .node_keys()
        .filter_map(|k| k.level.finite())
        .collect();
    levels.sort_unstable();
    levels.dedup();
    levels
}

/// Score of the best node of each point against `q`, minimized over the whole
/// tree; the oracle `center_descend` is validated against.
pub fn full_scan_center(tree: &NetTree, q: &[f64]) -> Option<(CenterScore, NodeKey)> {
    let mut best: Option<(CenterScore, NodeKey)> = None;
    for key in tree.node_keys() {
        let d = tree.space().dist_to(q, key.point);
        if let Some(score) = center_score(tree, d, key) {
            if best.as_ref().map(|(b, _)| score < *b).unwrap_or(true) {
                best = Some((score, key));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::build;
    use crate::metric::parse_points;
    use crate::params::Params;

    fn small_tree() -> NetTree {
        let space = parse_points("0\n2\n11\n28\n", 1).unwrap();
        build(space, Params::new(6.0, 1.0, 1.0).unwrap(), 42).unwrap()
    }

    #[test]
    fn ann_of_an_inserted_point_is_itself() {
        let tree = small_tree();
        for (id, coords) in [(0u32, [0.0]), (1, [2.0]), (2, [11.0]), (3, [28.0])] {
            let r = ann(&tree, &coords).unwrap();
            assert_eq!(r.point, id);
            assert_eq!(r.distance, 0.0);
        }
    }

    #[test]
    fn ann_reports_the_default_bound() {
        let tree = small_tree();
        let r = ann(&tree, &[5.0]).unwrap();
        assert_eq!(r.bound_factor, 7.5);
        assert!(r.distance <= 7.5 * 3.0); // exact nearest is 2 at distance 3
    }

    #[test]
    fn descend_matches_full_scan_on_the_line() {
        let tree = small_tree();
        let mut q = -5.0;
        while q < 35.0 {
            let via_descent = center_descend(&tree, &[q]).unwrap();
            let (_, via_scan) = full_scan_center(&tree, &[q]).unwrap();
            assert_eq!(via_descent, via_scan, "query {q}");
            q += 0.37;
        }
    }

    #[test]
    fn net_levels_nest() {
        let tree = small_tree();
        let levels = materialized_levels(&tree);
        assert!(!levels.is_empty());
        // below every node: the whole point set
        let bottom = net_at_level(&tree, levels[0]);
        assert_eq!(bottom.len(), 4);
        // above every finite node: just the root's point
        let top = net_at_level(&tree, levels[levels.len() - 1] + 1);
        assert_eq!(top.len(), 1);
        assert!(top.contains(&tree.root().point));
        // monotone: each net contains the one above it
        for w in levels.windows(2) {
            let lower = net_at_level(&tree, w[0]);
            let upper = net_at_level(&tree, w[1]);
            assert!(lower.is_superset(&upper));
        }
    }
}
