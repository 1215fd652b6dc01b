//! Executable checkers for the structural and metric invariants, plus the
//! brute-force oracles the test suite leans on. Every checker is a pure
//! function of the tree: failures are report entries, never panics.

use crate::error::{Error, Result};
use crate::level::Level;
use crate::metric::{MetricSpace, PointId};
use crate::ploc::brute_force_center;
use crate::query::{materialized_levels, net_at_level};
use crate::tree::{NetTree, NodeKey};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// How many violations a single check lists verbatim; the total is always in
/// `counts["violations"]`.
const MAX_LISTED: usize = 25;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub violations: Vec<String>,
    pub counts: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.checks.extend(other.checks);
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, violations: Vec<String>, counts: BTreeMap<String, u64>) {
        let mut counts = counts;
        counts.insert("violations".into(), violations.len() as u64);
        self.checks.push(CheckResult {
            name: name.into(),
            passed: violations.is_empty(),
            violations: violations.into_iter().take(MAX_LISTED).collect(),
            counts,
        });
    }
}

/// Highest level a point participates in, with the root's point unbounded.
fn effective_top(tree: &NetTree, p: PointId) -> Option<Level> {
    if p == tree.root().point {
        return Some(Level::PosInf);
    }
    tree.finite_span(p).map(|(_, hi)| Level::Finite(hi))
}

/// Structural sanity plus every edge-local invariant: level ordering,
/// nesting, packing, covering, parent optimality in its algorithmic form,
/// relative symmetry/distance/functoriality, and semi-compression.
pub fn check_local(tree: &NetTree) -> ValidationReport {
    let mut report = ValidationReport::default();
    let params = *tree.params();
    let space = tree.space();
    let keys: Vec<NodeKey> = {
        let mut k: Vec<NodeKey> = tree.node_keys().collect();
        k.sort_unstable();
        k
    };

    // structure: link consistency, unique root, leaves, span cache, cells
    {
        let mut v = Vec::new();
        let mut roots = 0u64;
        for &k in &keys {
            let rec = tree.node(k).unwrap();
            match rec.parent() {
                None => {
                    roots += 1;
                    if k != tree.root() {
                        v.push(format!("{k} has no parent but is not the root"));
                    }
                }
                Some(p) => match tree.node(p) {
                    None => v.push(format!("{k} has dangling parent {p}")),
                    Some(pr) => {
                        if !pr.children().contains(&k) {
                            v.push(format!("{p} does not list child {k}"));
                        }
                    }
                },
            }
            for c in rec.children() {
                match tree.node(*c) {
                    None => v.push(format!("{k} has dangling child {c}")),
                    Some(cr) => {
                        if cr.parent() != Some(k) {
                            v.push(format!("{c} does not point back to parent {k}"));
                        }
                    }
                }
            }
            if k.level == Level::NegInf {
                if tree.leaf_of(k.point) != Some(k) {
                    v.push(format!("leaf {k} is not registered for its point"));
                }
            } else if rec.children().is_empty() {
                v.push(format!("internal node {k} has no children"));
            }
        }
        if tree.root().level != Level::PosInf {
            v.push("root is not at level +inf".into());
        }
        if roots != 1 {
            v.push(format!("expected exactly one parentless node, found {roots}"));
        }
        // every registered leaf walks up to the root
        for p in 0..space.len() as PointId {
            if let Some(leaf) = tree.leaf_of(p) {
                let mut cur = leaf;
                let mut steps = 0usize;
                loop {
                    match tree.parent_of(cur) {
                        Some(up) => {
                            cur = up;
                            steps += 1;
                            if steps > tree.node_count() {
                                v.push(format!("parent chain from {leaf} does not terminate"));
                                break;
                            }
                        }
                        None => {
                            if cur != tree.root() {
                                v.push(format!("{leaf} does not reach the root"));
                            }
                            break;
                        }
                    }
                }
            }
        }
        // span cache agrees with the node set
        let mut spans: HashMap<PointId, (i32, i32)> = HashMap::new();
        for &k in &keys {
            if let Level::Finite(l) = k.level {
                spans
                    .entry(k.point)
                    .and_modify(|(lo, hi)| {
                        *lo = (*lo).min(l);
                        *hi = (*hi).max(l);
                    })
                    .or_insert((l, l));
            }
        }
        for p in 0..space.len() as PointId {
            if tree.finite_span(p) != spans.get(&p).copied() {
                v.push(format!(
                    "span cache for point {p} is {:?}, nodes say {:?}",
                    tree.finite_span(p),
                    spans.get(&p)
                ));
            }
        }
        // cells hold exactly the uninserted points, each under its center
        let mut cell_total = 0u64;
        for &k in &keys {
            let rec = tree.node(k).unwrap();
            cell_total += rec.cell_len() as u64;
            for x in rec.cell_in().iter().chain(rec.cell_out().iter()) {
                if tree.center_of(*x) != Some(k) {
                    v.push(format!("point {x} sits in the cell of {k} but is centered elsewhere"));
                }
            }
        }
        let uninserted = tree.uninserted().count() as u64;
        if cell_total != uninserted {
            v.push(format!(
                "cells hold {cell_total} points, center map has {uninserted}"
            ));
        }
        let counts = BTreeMap::from([("nodes".into(), keys.len() as u64)]);
        report.push("structure", v, counts);
    }

    // level ordering
    {
        let mut v = Vec::new();
        for &k in &keys {
            if let Some(p) = tree.parent_of(k) {
                if p.level <= k.level {
                    v.push(format!("edge {p} -> {k} does not descend"));
                }
            }
        }
        report.push("level_ordering", v, BTreeMap::new());
    }

    // nesting
    {
        let mut v = Vec::new();
        for &k in &keys {
            if k.level != Level::NegInf && tree.nesting_child(k).is_none() {
                v.push(format!("{k} has no child with its own point"));
            }
        }
        report.push("nesting", v, BTreeMap::new());
    }

    // local packing: for each pair, the binding level is the lower of the two
    // points' effective tops
    {
        let mut v = Vec::new();
        let mut pairs = 0u64;
        let tops: Vec<(PointId, Level)> = (0..space.len() as PointId)
            .filter_map(|p| effective_top(tree, p).map(|t| (p, t)))
            .collect();
        for i in 0..tops.len() {
            for j in (i + 1)..tops.len() {
                let (p, tp) = tops[i];
                let (q, tq) = tops[j];
                let level = tp.min(tq);
                pairs += 1;
                let d = space.dist(p, q);
                if d <= params.packing_radius(level) {
                    v.push(format!(
                        "points {p} and {q} are {d} apart but share the net at level {level}"
                    ));
                }
            }
        }
        report.push(
            "local_packing",
            v,
            BTreeMap::from([("pairs".into(), pairs)]),
        );
    }

    // local covering, per edge
    {
        let mut v = Vec::new();
        let mut edges = 0u64;
        for &k in &keys {
            if let Some(p) = tree.parent_of(k) {
                edges += 1;
                let d = space.dist(k.point, p.point);
                if d > params.covering_radius(k.level) {
                    v.push(format!(
                        "edge {p} -> {k} has length {d}, exceeding the covering radius {}",
                        params.covering_radius(k.level)
                    ));
                }
            }
        }
        report.push("local_covering", v, BTreeMap::from([("edges".into(), edges)]));
    }

    // local parent, algorithmic form: no relative of the parent is strictly
    // closer to the child than the parent
    {
        let mut v = Vec::new();
        for &k in &keys {
            let Some(p) = tree.parent_of(k) else { continue };
            let d_parent = space.dist(k.point, p.point);
            for r in tree.node(p).unwrap().relatives() {
                if space.dist(k.point, r.point) < d_parent {
                    v.push(format!(
                        "{r} is closer to {k} than its parent {p}"
                    ));
                }
            }
        }
        report.push("local_parent", v, BTreeMap::new());
    }

    // relative symmetry (and level agreement)
    {
        let mut v = Vec::new();
        let mut links = 0u64;
        for &k in &keys {
            for r in tree.node(k).unwrap().relatives() {
                links += 1;
                if *r == k {
                    v.push(format!("{k} lists itself as a relative"));
                    continue;
                }
                if r.level != k.level {
                    v.push(format!("relative pair {k} ~ {r} spans levels"));
                }
                match tree.node(*r) {
                    None => v.push(format!("{k} has dangling relative {r}")),
                    Some(rr) => {
                        if !rr.relatives().contains(&k) {
                            v.push(format!("relative link {k} -> {r} is one-way"));
                        }
                    }
                }
            }
        }
        report.push(
            "relative_symmetry",
            v,
            BTreeMap::from([("links".into(), links)]),
        );
    }

    // relative distance
    {
        let mut v = Vec::new();
        for &k in &keys {
            for r in tree.node(k).unwrap().relatives() {
                let d = space.dist(k.point, r.point);
                if d > params.relative_radius(k.level) {
                    v.push(format!(
                        "relatives {k} ~ {r} are {d} apart, beyond the relative radius"
                    ));
                }
            }
        }
        report.push("relative_distance", v, BTreeMap::new());
    }

    // relative functoriality: relatives' parents, when both one level up, are
    // relatives (or the same node)
    {
        let mut v = Vec::new();
        for &k in &keys {
            for r in tree.node(k).unwrap().relatives() {
                if *r < k {
                    continue; // each pair once
                }
                let (Some(pk), Some(pr)) = (tree.parent_of(k), tree.parent_of(*r)) else {
                    continue;
                };
                if pk.level != k.level.succ() || pr.level != r.level.succ() || pk == pr {
                    continue;
                }
                if !tree.node(pk).unwrap().relatives().contains(&pr) {
                    v.push(format!(
                        "parents {pk} and {pr} of relatives {k} ~ {r} are not relatives"
                    ));
                }
            }
        }
        report.push("relative_functoriality", v, BTreeMap::new());
    }

    // semi-compression
    {
        let mut v = Vec::new();
        for &k in &keys {
            if k == tree.root() || k.level == Level::NegInf {
                continue;
            }
            let rec = tree.node(k).unwrap();
            let only_child = rec
                .parent()
                .map(|p| tree.node(p).unwrap().children().len() == 1)
                .unwrap_or(false);
            if only_child && rec.children().len() == 1 && rec.relatives().is_empty() {
                v.push(format!("{k} should have been compressed away"));
            }
        }
        report.push("semi_compression", v, BTreeMap::new());
    }

    report
}

/// Subtree-global packing and covering, with the constants implied by the
/// local invariants. Exhaustive (quadratic); refuses point sets larger than
/// `cap` unless `force` is set.
pub fn check_global(tree: &NetTree, cap: usize, force: bool) -> Result<ValidationReport> {
    let n = tree.space().len();
    if n > cap && !force {
        return Err(Error::Input(format!(
            "global check is quadratic and n = {n} exceeds the cap {cap}; pass force to run anyway"
        )));
    }
    let (cpg, ccg) = tree.params().global_constants();
    let space = tree.space();
    let mut report = ValidationReport::default();

    // subtree leaf sets, children before parents
    let mut order: Vec<NodeKey> = Vec::with_capacity(tree.node_count());
    let mut stack = vec![tree.root()];
    while let Some(k) = stack.pop() {
        order.push(k);
        stack.extend(tree.node(k).unwrap().children().iter().copied());
    }
    let mut leaves_of: HashMap<NodeKey, BTreeSet<PointId>> = HashMap::new();
    for &k in order.iter().rev() {
        let mut set = BTreeSet::new();
        if k.level == Level::NegInf {
            set.insert(k.point);
        }
        for c in tree.node(k).unwrap().children() {
            set.extend(leaves_of[c].iter().copied());
        }
        leaves_of.insert(k, set);
    }

    let inserted: Vec<PointId> = (0..n as PointId).filter(|p| tree.is_inserted(*p)).collect();

    let mut cover_v = Vec::new();
    let mut pack_v = Vec::new();
    for (&k, leaves) in leaves_of.iter() {
        let cover_r = tree.params().radius(k.level, ccg);
        let pack_r = tree.params().radius(k.level, cpg);
        for &x in &inserted {
            let d = space.dist(k.point, x);
            let in_subtree = leaves.contains(&x);
            if in_subtree && d > cover_r {
                cover_v.push(format!(
                    "leaf {x} of the subtree of {k} lies {d} away, beyond {cover_r}"
                ));
            }
            if !in_subtree && d <= pack_r {
                pack_v.push(format!(
                    "point {x} lies within the packing ball of {k} ({d} <= {pack_r}) but outside its subtree"
                ));
            }
        }
    }
    cover_v.sort();
    pack_v.sort();
    let counts = BTreeMap::from([
        ("nodes".into(), tree.node_count() as u64),
        ("points".into(), inserted.len() as u64),
    ]);
    report.push("global_covering", cover_v, counts.clone());
    report.push("global_packing", pack_v, counts);
    Ok(report)
}

/// Per-level net properties: pairwise packing and covering radius at every
/// materialized level, exact thresholds.
pub fn check_nets(tree: &NetTree) -> ValidationReport {
    let mut report = ValidationReport::default();
    let space = tree.space();
    let params = tree.params();
    let inserted: Vec<PointId> = (0..space.len() as PointId)
        .filter(|p| tree.is_inserted(*p))
        .collect();
    let mut pack_v = Vec::new();
    let mut cover_v = Vec::new();
    let mut levels_checked = 0u64;
    for level in materialized_levels(tree) {
        levels_checked += 1;
        let net: Vec<PointId> = net_at_level(tree, level).into_iter().collect();
        let pack_r = params.packing_radius(Level::Finite(level));
        for i in 0..net.len() {
            for j in (i + 1)..net.len() {
                let d = space.dist(net[i], net[j]);
                if d <= pack_r {
                    pack_v.push(format!(
                        "net points {} and {} at level {level} are only {d} apart",
                        net[i], net[j]
                    ));
                }
            }
        }
        let cover_r = params.subtree_radius(Level::Finite(level));
        for &x in &inserted {
            let d = net
                .iter()
                .map(|&y| space.dist(x, y))
                .fold(f64::INFINITY, f64::min);
            if d > cover_r {
                cover_v.push(format!(
                    "point {x} is {d} from the level-{level} net, beyond {cover_r}"
                ));
            }
        }
    }
    let counts = BTreeMap::from([("levels".into(), levels_checked)]);
    report.push("net_packing", pack_v, counts.clone());
    report.push("net_covering", cover_v, counts);
    report
}

/// Oracle check of the point-location state: every maintained center equals
/// the brute-force lexicographic center, every ring matches its threshold,
/// and every uninserted point sits in exactly one cell.
pub fn check_centers(tree: &NetTree) -> ValidationReport {
    let mut report = ValidationReport::default();
    let space = tree.space();
    let mut center_v = Vec::new();
    let mut ring_v = Vec::new();
    let mut points = 0u64;
    for (x, maintained) in tree.uninserted() {
        points += 1;
        let oracle = brute_force_center(tree, x);
        if oracle != Some(maintained) {
            center_v.push(format!(
                "point {x}: maintained center {maintained}, oracle says {}",
                oracle.map(|k| k.to_string()).unwrap_or_else(|| "none".into())
            ));
        }
        match tree.ring_of(x, maintained) {
            None => ring_v.push(format!("point {x} is missing from the cell of {maintained}")),
            Some(ring) => {
                let d = space.dist(x, maintained.point);
                let expected = tree.classify_ring(d, maintained);
                if ring != expected {
                    ring_v.push(format!(
                        "point {x} sits in the {ring:?} ring of {maintained}, threshold says {expected:?}"
                    ));
                }
            }
        }
    }
    center_v.sort();
    ring_v.sort();
    let counts = BTreeMap::from([("points".into(), points)]);
    report.push("centers", center_v, counts.clone());
    report.push("rings", ring_v, counts);
    report
}

/// Oracle check that every same-level node pair within the relative radius is
/// linked. Quadratic per level; intended for small instances.
pub fn check_relative_completeness(tree: &NetTree) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut by_level: BTreeMap<i32, Vec<NodeKey>> = BTreeMap::new();
    for k in tree.node_keys() {
        if let Level::Finite(l) = k.level {
            by_level.entry(l).or_default().push(k);
        }
    }
    let mut v = Vec::new();
    for (l, mut keys) in by_level {
        keys.sort_unstable();
        let radius = tree.params().relative_radius(Level::Finite(l));
        for i in 0..keys.len() {
            for j in (i + 1)..keys.len() {
                let d = tree.space().dist(keys[i].point, keys[j].point);
                if d <= radius && !tree.node(keys[i]).unwrap().relatives().contains(&keys[j]) {
                    v.push(format!(
                        "{} and {} are {d} apart at level {l} but not linked",
                        keys[i], keys[j]
                    ));
                }
            }
        }
    }
    report.push("relative_completeness", v, BTreeMap::new());
    report
}

/// Oracle check of the parent property in its net form: no point of the net
/// one level above a node is strictly closer than the node's parent.
/// Quadratic; intended for small instances.
pub fn check_local_parent_net(tree: &NetTree) -> ValidationReport {
    let mut report = ValidationReport::default();
    let space = tree.space();
    let mut v = Vec::new();
    let mut nets: HashMap<i32, Vec<PointId>> = HashMap::new();
    for k in tree.node_keys() {
        let Level::Finite(l) = k.level else { continue };
        let Some(parent) = tree.parent_of(k) else { continue };
        let net = nets
            .entry(l + 1)
            .or_insert_with(|| net_at_level(tree, l + 1).into_iter().collect());
        let d_parent = space.dist(k.point, parent.point);
        for &y in net.iter() {
            if space.dist(k.point, y) < d_parent {
                v.push(format!(
                    "net point {y} at level {} is closer to {k} than its parent {parent}",
                    l + 1
                ));
            }
        }
    }
    v.sort();
    report.push("local_parent_net", v, BTreeMap::new());
    report
}

/// Exact nearest neighbor of `q` within `subset` by linear scan, ties to the
/// smaller id.
pub fn brute_force_nn(space: &MetricSpace, subset: &[PointId], q: &[f64]) -> Option<(PointId, f64)> {
    let mut best: Option<(PointId, f64)> = None;
    for &p in subset {
        let d = space.dist_to(q, p);
        let better = match best {
            None => true,
            Some((bp, bd)) => d < bd || (d == bd && p < bp),
        };
        if better {
            best = Some((p, d));
        }
    }
    best
}

/// Size accounting of a finished tree.
#[derive(Debug, Clone, Serialize)]
pub struct SizeStats {
    pub nodes: usize,
    pub relative_edges: usize,
    pub compressed_nodes: usize,
    pub per_point_node_counts: Vec<u32>,
    pub max_child_degree: usize,
    pub max_relative_degree: usize,
}

pub fn size_stats(tree: &NetTree) -> SizeStats {
    let mut per_point = vec![0u32; tree.space().len()];
    let mut max_child = 0;
    let mut max_rel = 0;
    for k in tree.node_keys() {
        per_point[k.point as usize] += 1;
        let rec = tree.node(k).unwrap();
        max_child = max_child.max(rec.children().len());
        max_rel = max_rel.max(rec.relatives().len());
    }
    SizeStats {
        nodes: tree.node_count(),
        relative_edges: tree.relative_edge_count(),
        compressed_nodes: tree.compressed_node_count(),
        per_point_node_counts: per_point,
        max_child_degree: max_child,
        max_relative_degree: max_rel,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::build;
    use crate::metric::parse_points;
    use crate::params::Params;

    fn line_tree(seed: u64) -> NetTree {
        let space = parse_points("0\n2\n11\n28\n", 1).unwrap();
        build(space, Params::new(6.0, 1.0, 1.0).unwrap(), seed).unwrap()
    }

    #[test]
    fn fresh_tree_passes_local_checks() {
        for seed in [1, 2, 3] {
            let tree = line_tree(seed);
            let report = check_local(&tree);
            assert!(report.passed(), "{:#?}", report);
        }
    }

    #[test]
    fn fresh_tree_passes_global_checks() {
        let tree = line_tree(7);
        let report = check_global(&tree, 2000, false).unwrap();
        assert!(report.passed(), "{:#?}", report);
    }

    #[test]
    fn global_check_respects_cap() {
        let tree = line_tree(7);
        assert!(check_global(&tree, 2, false).is_err());
        assert!(check_global(&tree, 2, true).is_ok());
    }

    #[test]
    fn single_point_tree_is_vacuously_global() {
        let space = parse_points("1\n", 1).unwrap();
        let tree = build(space, Params::new(6.0, 1.0, 1.0).unwrap(), 0).unwrap();
        assert!(check_global(&tree, 2000, false).unwrap().passed());
        assert!(check_nets(&tree).passed());
    }

    #[test]
    fn nn_oracle_ties_to_smaller_id() {
        let space = parse_points("0\n4\n2\n", 1).unwrap();
        // query at 2: point 2 itself at distance 0
        assert_eq!(brute_force_nn(&space, &[0, 1, 2], &[2.0]), Some((2, 0.0)));
        // query equidistant from 0 and 4: the smaller id wins
        assert_eq!(brute_force_nn(&space, &[0, 1], &[2.0]), Some((0, 2.0)));
    }

    #[test]
    fn size_stats_bootstrap() {
        let space = parse_points("5\n", 1).unwrap();
        let tree = build(space, Params::new(6.0, 1.0, 1.0).unwrap(), 0).unwrap();
        let stats = size_stats(&tree);
        assert_eq!(stats.nodes, 2);
        assert_eq!(stats.relative_edges, 0);
        assert_eq!(stats.per_point_node_counts, vec![2]);
    }
}
