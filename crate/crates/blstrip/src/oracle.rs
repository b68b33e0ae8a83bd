//! Exact optima for small instances.
//!
//! `exact_opt` runs branch and bound over the canonical coordinate grid:
//! some optimal packing is "pushed" so every rect touches either a strip
//! boundary or another rect's edge on its left and bottom, which confines
//! left edges to subset sums of widths and bottoms to subset sums of
//! heights. Enumerating only those positions keeps the search finite and
//! exact. Budget-bounded: once the node budget is hit the best packing found
//! so far is returned with `Aborted` status instead of a proof of optimality.

use crate::bounds::lower_bound;
use crate::engine::bl_pack;
use crate::model::{verify_feasible, Instance, Packing, Placement, RectId};
use crate::ordering::OrderingKind;
use crate::scalar::Scalar;
use serde::Serialize;
use std::collections::BTreeSet;

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptStatus {
    /// The returned height is the optimum.
    Exact,
    /// Node budget exhausted; the returned packing is the best incumbent.
    Aborted,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptResult {
    pub height: Scalar,
    pub witness: Packing,
    pub nodes_explored: u64,
    pub status: OptStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("permutation search is factorial; {len} rects exceed the limit of {limit}")]
    TooManyRects { len: usize, limit: usize },
}

/// Subset sums of `values` that stay at most `cap`, in ascending order.
fn subset_sums(values: &[Scalar], cap: &Scalar) -> Vec<Scalar> {
    let mut sums = BTreeSet::new();
    sums.insert(Scalar::zero());
    for v in values {
        let extended: Vec<Scalar> = sums
            .iter()
            .map(|s| s + v)
            .filter(|s| s <= cap)
            .collect();
        sums.extend(extended);
    }
    sums.into_iter().collect()
}

struct Search<'a> {
    instance: &'a Instance,
    /// Rect indices in branching order (decreasing area, ties input order).
    order: Vec<usize>,
    /// For each branch position, the previous position holding an identical
    /// rect, if any; identical rects are forced into lexicographic (y, x)
    /// order to kill permutation symmetry.
    prev_same: Vec<Option<usize>>,
    xs: Vec<Scalar>,
    ys: Vec<Scalar>,
    /// (x, y, x+w, y+h) per occupied slot, indexed by branch position.
    placed: Vec<(Scalar, Scalar, Scalar, Scalar)>,
    best_height: Scalar,
    best: Vec<(Scalar, Scalar)>,
    static_lb: Scalar,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl Search<'_> {
    fn run(&mut self, depth: usize, partial_top: &Scalar) {
        if self.aborted || (self.best_height == self.static_lb && !self.best.is_empty()) {
            return;
        }
        if depth == self.order.len() {
            // Complete packing strictly better than the incumbent.
            self.best_height = partial_top.clone();
            self.best = self
                .placed
                .iter()
                .map(|(x, y, _, _)| (x.clone(), y.clone()))
                .collect();
            return;
        }
        let rect = self.instance.rects[self.order[depth]].clone();
        let lex_floor = self.prev_same[depth]
            .map(|p| (self.placed[p].1.clone(), self.placed[p].0.clone()));
        for yi in 0..self.ys.len() {
            let y = self.ys[yi].clone();
            let top = &y + &rect.h;
            if top >= self.best_height {
                break; // ys ascend; nothing lower remains
            }
            for xi in 0..self.xs.len() {
                let x = self.xs[xi].clone();
                if &x + &rect.w > self.instance.width {
                    break; // xs ascend
                }
                if let Some((fy, fx)) = &lex_floor {
                    if (&y, &x) < (fy, fx) {
                        continue;
                    }
                }
                let x1 = &x + &rect.w;
                let free = self.placed[..depth].iter().all(|(px, py, px1, py1)| {
                    !(&x < px1 && px < &x1 && &y < py1 && py < &top)
                });
                if !free {
                    continue;
                }
                self.nodes += 1;
                if self.nodes >= self.budget {
                    self.aborted = true;
                    return;
                }
                self.placed.push((x.clone(), y.clone(), x1.clone(), top.clone()));
                let next_top = partial_top.clone().max(top.clone());
                self.run(depth + 1, &next_top);
                self.placed.pop();
                if self.aborted {
                    return;
                }
            }
        }
    }
}

/// Optimal packing height by exhaustive search, up to the node budget.
/// Warm-started from the best bottom-left packing over all orderings, and
/// stopped early when the incumbent matches the static lower bound.
pub fn exact_opt(instance: &Instance, node_budget: u64) -> OptResult {
    let static_lb = lower_bound(instance).lb;
    let mut incumbent: Option<Packing> = None;
    let mut incumbent_height = Scalar::zero();
    for kind in OrderingKind::ALL {
        let packing = bl_pack(instance, kind).packing;
        let h = packing.height();
        if incumbent.is_none() || h < incumbent_height {
            incumbent_height = h;
            incumbent = Some(packing);
        }
    }
    let incumbent = incumbent.expect("at least one ordering");
    if instance.is_empty() || incumbent_height == static_lb {
        return OptResult {
            height: incumbent_height,
            witness: incumbent,
            nodes_explored: 0,
            status: OptStatus::Exact,
        };
    }

    let mut order: Vec<usize> = (0..instance.len()).collect();
    order.sort_by(|&i, &j| {
        instance.rects[j]
            .area()
            .cmp(&instance.rects[i].area())
            .then(i.cmp(&j))
    });
    let prev_same = order
        .iter()
        .enumerate()
        .map(|(pos, &i)| {
            order[..pos].iter().rposition(|&j| {
                instance.rects[j].w == instance.rects[i].w
                    && instance.rects[j].h == instance.rects[i].h
            })
        })
        .collect();

    let widths: Vec<Scalar> = instance.rects.iter().map(|r| r.w.clone()).collect();
    let heights: Vec<Scalar> = instance.rects.iter().map(|r| r.h.clone()).collect();
    let min_h = heights.iter().min().cloned().unwrap_or_else(Scalar::zero);
    let y_cap = &incumbent_height - &min_h;
    let mut search = Search {
        instance,
        order,
        prev_same,
        xs: subset_sums(&widths, &instance.width),
        ys: subset_sums(&heights, &y_cap),
        placed: Vec::with_capacity(instance.len()),
        best_height: incumbent_height.clone(),
        best: Vec::new(),
        static_lb,
        nodes: 0,
        budget: node_budget.max(1),
        aborted: false,
    };
    search.run(0, &Scalar::zero());

    let witness = if search.best.is_empty() {
        incumbent
    } else {
        let placements = search
            .order
            .iter()
            .zip(&search.best)
            .map(|(&i, (x, y))| Placement {
                id: instance.rects[i].id.clone(),
                x: x.clone(),
                y: y.clone(),
            })
            .collect();
        Packing::new(instance.clone(), placements)
    };
    debug_assert!(verify_feasible(&witness).is_ok());
    let height = witness.height();
    OptResult {
        height,
        witness,
        nodes_explored: search.nodes,
        status: if search.aborted {
            OptStatus::Aborted
        } else {
            OptStatus::Exact
        },
    }
}

pub const PERMUTATION_LIMIT: usize = 9;

#[derive(Debug, Clone)]
pub struct PermutationSearch {
    pub order: Vec<RectId>,
    pub height: Scalar,
    pub packing: Packing,
}

/// Best bottom-left packing over all input permutations. Factorial; guarded
/// to at most [`PERMUTATION_LIMIT`] rects.
pub fn best_permutation_bl(instance: &Instance) -> Result<PermutationSearch, OracleError> {
    if instance.len() > PERMUTATION_LIMIT {
        return Err(OracleError::TooManyRects {
            len: instance.len(),
            limit: PERMUTATION_LIMIT,
        });
    }
    let mut indices: Vec<usize> = (0..instance.len()).collect();
    let mut best: Option<PermutationSearch> = None;
    permute(&mut indices, 0, &mut |perm| {
        let rects = perm
            .iter()
            .map(|&i| instance.rects[i].clone())
            .collect::<Vec<_>>();
        let shuffled = Instance::new(instance.width.clone(), rects)
            .expect("permutation of a valid instance");
        let trace = bl_pack(&shuffled, OrderingKind::InputOrder);
        let height = trace.packing.height();
        if best.as_ref().map(|b| height < b.height).unwrap_or(true) {
            // Rebuild the packing against the original instance so ids
            // resolve in its rect order.
            let packing = Packing::new(instance.clone(), trace.packing.placements.clone());
            best = Some(PermutationSearch {
                order: perm.iter().map(|&i| instance.rects[i].id.clone()).collect(),
                height,
                packing,
            });
        }
    });
    Ok(best.expect("identity permutation always evaluated"))
}

fn permute(indices: &mut Vec<usize>, from: usize, visit: &mut impl FnMut(&[usize])) {
    if from == indices.len() {
        visit(indices);
        return;
    }
    for i in from..indices.len() {
        indices.swap(from, i);
        permute(indices, from + 1, visit);
        indices.swap(from, i);
    }
}
