//! Placement orders fed to the bottom-left engine, including the
//! height-partition order: split the rects into a shelf set `F` that fits
//! side by side, a set `Q` of leftovers at most half the strip wide, and a
//! set `W` of wide leftovers, then emit F by decreasing height, Q by
//! decreasing width, and W in input order.

use crate::model::{Instance, RectId};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// How to order rectangles before bottom-left placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingKind {
    InputOrder,
    DecreasingWidth,
    DecreasingHeight,
    IncreasingWidth,
    /// F by decreasing height, Q by decreasing width, W by input order.
    Fqw,
    /// Like `Fqw` but with F by increasing height.
    FqwIncreasingF,
}

impl OrderingKind {
    pub const ALL: [OrderingKind; 6] = [
        OrderingKind::InputOrder,
        OrderingKind::DecreasingWidth,
        OrderingKind::DecreasingHeight,
        OrderingKind::IncreasingWidth,
        OrderingKind::Fqw,
        OrderingKind::FqwIncreasingF,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OrderingKind::InputOrder => "input-order",
            OrderingKind::DecreasingWidth => "decreasing-width",
            OrderingKind::DecreasingHeight => "decreasing-height",
            OrderingKind::IncreasingWidth => "increasing-width",
            OrderingKind::Fqw => "fqw",
            OrderingKind::FqwIncreasingF => "fqw-increasing-f",
        }
    }
}

impl fmt::Display for OrderingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown ordering `{0}`")]
pub struct UnknownOrdering(String);

impl FromStr for OrderingKind {
    type Err = UnknownOrdering;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OrderingKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownOrdering(s.to_owned()))
    }
}

/// Height partition of an instance. Scanning the rects by decreasing height
/// (ties by input order), `F` greedily collects rects while their total width
/// stays within the strip; of the leftovers, `W` holds those wider than half
/// the strip and `Q` the rest.
///
/// Each id list is in input order; ordering-specific sorts happen in
/// [`order_rects`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FqwPartition {
    #[serde(rename = "F")]
    pub f_set: Vec<RectId>,
    #[serde(rename = "Q")]
    pub q_set: Vec<RectId>,
    #[serde(rename = "W")]
    pub w_set: Vec<RectId>,
    /// |F|
    pub a: usize,
    /// |Q|
    pub b: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionClass {
    F,
    Q,
    W,
}

impl FqwPartition {
    pub fn class_of(&self, id: &str) -> Option<PartitionClass> {
        if self.f_set.iter().any(|r| r == id) {
            Some(PartitionClass::F)
        } else if self.q_set.iter().any(|r| r == id) {
            Some(PartitionClass::Q)
        } else if self.w_set.iter().any(|r| r == id) {
            Some(PartitionClass::W)
        } else {
            None
        }
    }
}

/// Indices 0..n sorted by decreasing height, ties by input order.
fn by_decreasing_height(instance: &Instance) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..instance.len()).collect();
    idx.sort_by(|&a, &b| {
        let (ra, rb) = (&instance.rects[a], &instance.rects[b]);
        rb.h.cmp(&ra.h).then(a.cmp(&b))
    });
    idx
}

pub fn fqw_partition(instance: &Instance) -> FqwPartition {
    let mut f = Vec::new();
    let mut rest = Vec::new();
    let mut shelf_width = Scalar::zero();
    for i in by_decreasing_height(instance) {
        let w = &instance.rects[i].w;
        if &(&shelf_width + w) <= &instance.width {
            shelf_width = &shelf_width + w;
            f.push(i);
        } else {
            rest.push(i);
        }
    }
    let two = Scalar::from_int(2);
    let (mut w_set, mut q): (Vec<usize>, Vec<usize>) = (Vec::new(), Vec::new());
    for i in rest {
        if &two * &instance.rects[i].w > instance.width {
            w_set.push(i);
        } else {
            q.push(i);
        }
    }
    f.sort_unstable();
    q.sort_unstable();
    w_set.sort_unstable();
    let ids = |v: Vec<usize>| -> Vec<RectId> {
        v.into_iter()
            .map(|i| instance.rects[i].id.clone())
            .collect()
    };
    let (a, b) = (f.len(), q.len());
    FqwPartition {
        f_set: ids(f),
        q_set: ids(q),
        w_set: ids(w_set),
        a,
        b,
    }
}

/// Permutation of all rect ids under the given ordering. Every sort breaks
/// ties by input order, so the result is deterministic.
pub fn order_rects(instance: &Instance, kind: OrderingKind) -> Vec<RectId> {
    let mut idx: Vec<usize> = (0..instance.len()).collect();
    let rects = &instance.rects;
    match kind {
        OrderingKind::InputOrder => {}
        OrderingKind::DecreasingWidth => {
            idx.sort_by(|&a, &b| rects[b].w.cmp(&rects[a].w).then(a.cmp(&b)));
        }
        OrderingKind::DecreasingHeight => {
            idx = by_decreasing_height(instance);
        }
        OrderingKind::IncreasingWidth => {
            idx.sort_by(|&a, &b| rects[a].w.cmp(&rects[b].w).then(a.cmp(&b)));
        }
        OrderingKind::Fqw | OrderingKind::FqwIncreasingF => {
            let part = fqw_partition(instance);
            let index_of = |id: &RectId| instance.index_of(id).expect("partition id");
            let mut f: Vec<usize> = part.f_set.iter().map(index_of).collect();
            let mut q: Vec<usize> = part.q_set.iter().map(index_of).collect();
            let w: Vec<usize> = part.w_set.iter().map(index_of).collect();
            if kind == OrderingKind::Fqw {
                f.sort_by(|&a, &b| rects[b].h.cmp(&rects[a].h).then(a.cmp(&b)));
            } else {
                f.sort_by(|&a, &b| rects[a].h.cmp(&rects[b].h).then(a.cmp(&b)));
            }
            q.sort_by(|&a, &b| rects[b].w.cmp(&rects[a].w).then(a.cmp(&b)));
            idx = f;
            idx.extend(q);
            idx.extend(w);
        }
    }
    idx.into_iter().map(|i| rects[i].id.clone()).collect()
}

/// Witness that a non-shelf rect could not have joined the shelf: its width
/// plus the total width of at-least-as-tall shelf rects exceeds the strip.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QHeightWitness {
    pub id: RectId,
    /// `w_r + Σ { w_f : f ∈ F, h_f ≥ h_r }`; must exceed the strip width.
    pub witness_sum: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("rect `{id}` fits the shelf: witness sum {witness_sum} <= strip width {width}")]
pub struct QHeightViolation {
    pub id: RectId,
    pub witness_sum: Scalar,
    pub width: Scalar,
}

/// Checks greedy maximality of the shelf: every rect left out of `F` must be
/// blocked by the at-least-as-tall part of `F`. A violation means the
/// partition was not built greedily.
pub fn check_q_height_criterion(
    instance: &Instance,
    partition: &FqwPartition,
) -> Result<Vec<QHeightWitness>, QHeightViolation> {
    let rect = |id: &RectId| &instance.rects[instance.index_of(id).expect("partition id")];
    let mut out = Vec::new();
    for id in partition.q_set.iter().chain(&partition.w_set) {
        let r = rect(id);
        let shelf: Scalar = partition
            .f_set
            .iter()
            .map(|fid| rect(fid))
            .filter(|f| f.h >= r.h)
            .map(|f| f.w.clone())
            .sum();
        let witness_sum = &r.w + &shelf;
        if witness_sum <= instance.width {
            return Err(QHeightViolation {
                id: id.clone(),
                witness_sum,
                width: instance.width.clone(),
            });
        }
        out.push(QHeightWitness {
            id: id.clone(),
            witness_sum,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Rect;

    fn instance(width: i64, dims: &[(i64, i64)]) -> Instance {
        let rects = dims
            .iter()
            .enumerate()
            .map(|(i, &(w, h))| {
                Rect::new(
                    format!("r{}", i + 1),
                    Scalar::from_int(w),
                    Scalar::from_int(h),
                )
            })
            .collect();
        Instance::new(Scalar::from_int(width), rects).unwrap()
    }

    #[test]
    fn staircase_partition_splits_shelf_and_leftovers() {
        // Tall pair fills the shelf; the three leftovers are at most half the
        // strip wide, so none lands in W.
        let inst = instance(9, &[(3, 5), (4, 4), (4, 4), (4, 1), (4, 4)]);
        let part = fqw_partition(&inst);
        assert_eq!(part.f_set, vec!["r1", "r2"]);
        assert_eq!(part.q_set, vec!["r3", "r4", "r5"]);
        assert!(part.w_set.is_empty());
        assert_eq!((part.a, part.b), (2, 3));
    }

    #[test]
    fn single_rect_goes_to_shelf() {
        let inst = instance(9, &[(4, 4)]);
        let part = fqw_partition(&inst);
        assert_eq!(part.f_set, vec!["r1"]);
        assert!(part.q_set.is_empty() && part.w_set.is_empty());
    }

    #[test]
    fn wide_leftovers_go_to_w() {
        // 7 fills most of the shelf; 6 > 10/2 is a wide leftover, 5 is not.
        let inst = instance(10, &[(7, 3), (6, 2), (5, 1)]);
        let part = fqw_partition(&inst);
        assert_eq!(part.f_set, vec!["r1"]);
        assert_eq!(part.q_set, vec!["r3"]);
        assert_eq!(part.w_set, vec!["r2"]);
    }

    #[test]
    fn equal_heights_scan_in_input_order() {
        let inst = instance(6, &[(4, 2), (3, 2), (2, 2)]);
        let part = fqw_partition(&inst);
        // Scan r1 (4 fits), r2 (7 > 6 out), r3 (6 fits).
        assert_eq!(part.f_set, vec!["r1", "r3"]);
        assert_eq!(part.q_set, vec!["r2"]);
    }

    #[test]
    fn ordering_kinds_sort_with_input_order_ties() {
        let inst = instance(5, &[(2, 9), (5, 1), (5, 9)]);
        assert_eq!(
            order_rects(&inst, OrderingKind::DecreasingWidth),
            vec!["r2", "r3", "r1"]
        );
        assert_eq!(
            order_rects(&inst, OrderingKind::IncreasingWidth),
            vec!["r1", "r2", "r3"]
        );
        assert_eq!(
            order_rects(&inst, OrderingKind::DecreasingHeight),
            vec!["r1", "r3", "r2"]
        );
        assert_eq!(
            order_rects(&inst, OrderingKind::InputOrder),
            vec!["r1", "r2", "r3"]
        );
    }

    #[test]
    fn fqw_order_concatenates_sorted_classes() {
        let inst = instance(9, &[(3, 5), (4, 4), (4, 4), (4, 1), (4, 4)]);
        // Q widths all tie, so Q stays in input order.
        assert_eq!(
            order_rects(&inst, OrderingKind::Fqw),
            vec!["r1", "r2", "r3", "r4", "r5"]
        );
        assert_eq!(
            order_rects(&inst, OrderingKind::FqwIncreasingF),
            vec!["r2", "r1", "r3", "r4", "r5"]
        );
        let mixed = instance(12, &[(2, 6), (3, 6), (4, 2), (6, 3), (5, 1)]);
        // F = {r1, r2, r4} (heights 6, 6, 3), leftovers r3, r5 both <= 6 wide.
        assert_eq!(
            order_rects(&mixed, OrderingKind::Fqw),
            vec!["r1", "r2", "r4", "r5", "r3"]
        );
    }

    #[test]
    fn q_height_criterion_returns_witnesses() {
        let inst = instance(9, &[(3, 5), (4, 4), (4, 4), (4, 1), (4, 4)]);
        let part = fqw_partition(&inst);
        let witnesses = check_q_height_criterion(&inst, &part).unwrap();
        let sums: Vec<(String, Scalar)> = witnesses
            .into_iter()
            .map(|w| (w.id, w.witness_sum))
            .collect();
        assert_eq!(
            sums,
            vec![
                ("r3".to_string(), Scalar::from_int(11)),
                ("r4".to_string(), Scalar::from_int(11)),
                ("r5".to_string(), Scalar::from_int(11)),
            ]
        );
    }

    #[test]
    fn q_height_criterion_rejects_non_greedy_partition() {
        let inst = instance(9, &[(3, 5), (4, 4), (4, 4), (4, 1), (4, 4)]);
        let mut part = fqw_partition(&inst);
        // Move r2 out of the shelf by hand; now r2's witness sum is 4+3 <= 9.
        part.f_set.retain(|id| id != "r2");
        part.q_set.insert(0, "r2".to_owned());
        let err = check_q_height_criterion(&inst, &part).unwrap_err();
        assert_eq!(err.id, "r2");
        assert_eq!(err.witness_sum, Scalar::from_int(7));
    }

    #[test]
    fn ordering_name_round_trip() {
        for kind in OrderingKind::ALL {
            assert_eq!(kind.name().parse::<OrderingKind>().unwrap(), kind);
        }
        assert!("bogus".parse::<OrderingKind>().is_err());
    }
}
