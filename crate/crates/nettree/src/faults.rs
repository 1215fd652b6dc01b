//! Seeded fault injection for exercising the checkers. Each helper breaks
//! exactly one invariant class so tests can confirm the corresponding check
//! reports it. Not used by construction.

use crate::level::Level;
use crate::metric::PointId;
use crate::ploc::CellRing;
use crate::tree::{NetTree, NodeKey};

/// Adds a one-way relative link, breaking symmetry (and possibly distance).
pub fn add_one_way_relative(tree: &mut NetTree, from: NodeKey, to: NodeKey) {
    tree.record_mut(from).relatives.insert(to);
}

/// Re-parents `child` under `new_parent` without any compression bookkeeping,
/// typically breaking local covering and parent optimality.
pub fn force_reparent(tree: &mut NetTree, child: NodeKey, new_parent: NodeKey) {
    let old = tree
        .record_mut(child)
        .parent
        .replace(new_parent)
        .expect("child had a parent");
    tree.record_mut(old).children.remove(&child);
    tree.record_mut(new_parent).children.insert(child);
}

/// Moves an uninserted point to the wrong ring of its own center.
pub fn flip_ring(tree: &mut NetTree, point: PointId) {
    let center = tree.center_of(point).expect("point has a center");
    let rec = tree.record_mut(center);
    if rec.cell_in.remove(&point) {
        rec.cell_out.insert(point);
    } else if rec.cell_out.remove(&point) {
        rec.cell_in.insert(point);
    }
}

/// Reassigns an uninserted point's center to an arbitrary node, leaving the
/// rings consistent with the new (wrong) center.
pub fn corrupt_center(tree: &mut NetTree, point: PointId, new_center: NodeKey) {
    let old = tree.center_of(point).expect("point has a center");
    tree.pull_from_cell(point, old);
    tree.put_in_cell(point, new_center, CellRing::Outer);
}

/// Materializes a chain node that semi-compression forbids: splits a jump of
/// `point` at `level` without firing any cell updates.
pub fn inject_compression_violation(tree: &mut NetTree, point: PointId, level: i32) -> NodeKey {
    let (node, _) = tree
        .split_jump(point, level)
        .expect("a jump of the point spans the level");
    debug_assert_eq!(node, NodeKey::new(point, Level::Finite(level)));
    node
}
