//! Bottom-left placement engine. Each rectangle goes to the feasible position
//! minimizing (y, x) lexicographically; such a position always lies on the
//! candidate grid ({0} ∪ right edges) × ({0} ∪ top edges), because a
//! lexicographically minimal placement is supported on its left and bottom
//! (by a rect face or the strip boundary).
//!
//! Complexity is O(n³) per packing (O(n²) grid points, O(n) overlap tests
//! each) — deliberately simple and auditable rather than asymptotically
//! optimal; an O(n²) method exists in the literature.

use crate::model::{Instance, ModelError, Packing, PlacedRect, Placement, Rect, RectId};
use crate::ordering::{order_rects, OrderingKind};
use crate::scalar::Scalar;
use serde::Serialize;
use std::collections::BTreeSet;

/// What a rect face rests against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Support {
    Boundary,
    Rect(RectId),
}

/// One placement decision: where the rect went and how much of the candidate
/// grid was in play.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub id: RectId,
    pub x: Scalar,
    pub y: Scalar,
    /// In-strip candidate grid size at this step.
    pub grid_candidates: usize,
    /// Feasibility tests performed before the position was fixed.
    pub evaluated_candidates: usize,
}

/// Full bottom-left run: the ordering used, per-step decisions, and the final
/// packing whose placement order equals the step order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlacementTrace {
    pub ordering: OrderingKind,
    pub steps: Vec<TraceStep>,
    pub packing: Packing,
}

impl PlacementTrace {
    pub fn height(&self) -> Scalar {
        self.packing.height()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("rect `{id}` lacks a {side} supporter; the trace is not a bottom-left run")]
    SupportMissing { id: RectId, side: &'static str },
}

fn fits_strip(width: &Scalar, x: &Scalar, w: &Scalar) -> bool {
    &(x + w) <= &width
}

fn free_at(placed: &[PlacedRect], x: &Scalar, y: &Scalar, w: &Scalar, h: &Scalar) -> bool {
    let (x1, y1) = (x + w, y + h);
    placed
        .iter()
        .all(|p| !(x < &p.x1() && p.x < x1 && y < &p.y1() && p.y < y1))
}

/// Sorted, deduplicated candidate coordinates: {0} ∪ right edges for x and
/// {0} ∪ top edges for y.
fn candidate_axes(placed: &[PlacedRect]) -> (Vec<Scalar>, Vec<Scalar>) {
    let mut xs = BTreeSet::new();
    let mut ys = BTreeSet::new();
    xs.insert(Scalar::zero());
    ys.insert(Scalar::zero());
    for p in placed {
        xs.insert(p.x1());
        ys.insert(p.y1());
    }
    (xs.into_iter().collect(), ys.into_iter().collect())
}

struct Chosen {
    x: Scalar,
    y: Scalar,
    grid_candidates: usize,
    evaluated_candidates: usize,
}

/// Scans the candidate grid in (y, x) order and stops at the first feasible
/// point, which is the lexicographic minimum. A feasible point always exists:
/// (0, max top edge) clears everything.
fn choose_position(width: &Scalar, placed: &[PlacedRect], w: &Scalar, h: &Scalar) -> Chosen {
    let (xs, ys) = candidate_axes(placed);
    let xs: Vec<Scalar> = xs
        .into_iter()
        .filter(|x| fits_strip(width, x, w))
        .collect();
    let grid_candidates = xs.len() * ys.len();
    let mut evaluated = 0;
    for y in &ys {
        for x in &xs {
            evaluated += 1;
            if free_at(placed, x, y, w, h) {
                return Chosen {
                    x: x.clone(),
                    y: y.clone(),
                    grid_candidates,
                    evaluated_candidates: evaluated,
                };
            }
        }
    }
    unreachable!("the strip is unbounded above; some candidate is always free")
}

/// Lexicographically minimal feasible position for `rect` given an already
/// placed feasible prefix.
pub fn lowest_leftmost_position(prefix: &Packing, rect: &Rect) -> Result<Placement, ModelError> {
    let placed = prefix.placed()?;
    let chosen = choose_position(&prefix.instance.width, &placed, &rect.w, &rect.h);
    Ok(Placement {
        id: rect.id.clone(),
        x: chosen.x,
        y: chosen.y,
    })
}

/// Packs the whole instance bottom-left in the given order and records the
/// trace. The result is feasible by construction.
pub fn bl_pack(instance: &Instance, kind: OrderingKind) -> PlacementTrace {
    let order = order_rects(instance, kind);
    let mut placed: Vec<PlacedRect> = Vec::with_capacity(instance.len());
    let mut steps = Vec::with_capacity(instance.len());
    let mut placements = Vec::with_capacity(instance.len());
    for (step, id) in order.iter().enumerate() {
        let rect_index = instance.index_of(id).expect("ordering returns instance ids");
        let r = &instance.rects[rect_index];
        let chosen = choose_position(&instance.width, &placed, &r.w, &r.h);
        steps.push(TraceStep {
            id: id.clone(),
            x: chosen.x.clone(),
            y: chosen.y.clone(),
            grid_candidates: chosen.grid_candidates,
            evaluated_candidates: chosen.evaluated_candidates,
        });
        placements.push(Placement {
            id: id.clone(),
            x: chosen.x.clone(),
            y: chosen.y.clone(),
        });
        placed.push(PlacedRect {
            step,
            rect_index,
            id: id.clone(),
            x: chosen.x,
            y: chosen.y,
            w: r.w.clone(),
            h: r.h.clone(),
        });
    }
    PlacementTrace {
        ordering: kind,
        steps,
        packing: Packing::new(instance.clone(), placements),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AuditViolation {
    #[error("step {step}: rect `{id}` at ({x}, {y}) overlaps the prefix or leaves the strip")]
    InfeasibleChoice {
        step: usize,
        id: RectId,
        x: Scalar,
        y: Scalar,
    },
    #[error(
        "step {step}: rect `{id}` at ({x}, {y}) is not bottom-left; ({better_x}, {better_y}) is feasible and lexicographically smaller"
    )]
    NotLowestLeftmost {
        step: usize,
        id: RectId,
        x: Scalar,
        y: Scalar,
        better_x: Scalar,
        better_y: Scalar,
    },
}

/// Re-derives every placement decision from scratch: enumerates the whole
/// in-strip candidate grid for each prefix, re-tests feasibility pairwise,
/// and compares the lexicographic minimum against the recorded choice. Shares
/// no scan logic with the engine's early-exit chooser.
pub fn audit_bl_minimality(trace: &PlacementTrace) -> Result<(), AuditViolation> {
    let placed = trace
        .packing
        .placed()
        .expect("trace packing resolves against its instance");
    let width = &trace.packing.instance.width;
    for (step, current) in placed.iter().enumerate() {
        let prefix = &placed[..step];
        if !(!current.x.is_negative()
            && !current.y.is_negative()
            && fits_strip(width, &current.x, &current.w)
            && free_at(prefix, &current.x, &current.y, &current.w, &current.h))
        {
            return Err(AuditViolation::InfeasibleChoice {
                step: step + 1,
                id: current.id.clone(),
                x: current.x.clone(),
                y: current.y.clone(),
            });
        }
        let mut xs = vec![Scalar::zero()];
        let mut ys = vec![Scalar::zero()];
        xs.extend(prefix.iter().map(PlacedRect::x1));
        ys.extend(prefix.iter().map(PlacedRect::y1));
        let mut best: Option<(Scalar, Scalar)> = None;
        for y in &ys {
            for x in &xs {
                if fits_strip(width, x, &current.w)
                    && free_at(prefix, x, y, &current.w, &current.h)
                    && best
                        .as_ref()
                        .map(|(by, bx)| (y, x) < (by, bx))
                        .unwrap_or(true)
                {
                    best = Some((y.clone(), x.clone()));
                }
            }
        }
        let (best_y, best_x) = best.expect("a feasible candidate always exists");
        if (best_y.clone(), best_x.clone()) < (current.y.clone(), current.x.clone()) {
            return Err(AuditViolation::NotLowestLeftmost {
                step: step + 1,
                id: current.id.clone(),
                x: current.x.clone(),
                y: current.y.clone(),
                better_x: best_x,
                better_y: best_y,
            });
        }
    }
    Ok(())
}

/// Left and bottom supporters of a placed rect: an earlier-placed rect whose
/// facing side touches it with open-interval overlap in the other axis, or
/// the strip boundary. The earliest-placed qualifying rect wins.
pub fn supporters(packing: &Packing, rect_id: &str) -> Result<(Support, Support), EngineError> {
    let placed = packing.placed()?;
    let me = placed
        .iter()
        .find(|p| p.id == rect_id)
        .ok_or_else(|| EngineError::Model(ModelError::UnknownRect(rect_id.to_owned())))?;
    let earlier = &placed[..me.step];
    let left = if me.x.is_zero() {
        Support::Boundary
    } else {
        earlier
            .iter()
            .find(|p| p.x1() == me.x && p.y < me.y1() && me.y < p.y1())
            .map(|p| Support::Rect(p.id.clone()))
            .ok_or(EngineError::SupportMissing {
                id: me.id.clone(),
                side: "left",
            })?
    };
    let bottom = if me.y.is_zero() {
        Support::Boundary
    } else {
        earlier
            .iter()
            .find(|p| p.y1() == me.y && p.x < me.x1() && me.x < p.x1())
            .map(|p| Support::Rect(p.id.clone()))
            .ok_or(EngineError::SupportMissing {
                id: me.id.clone(),
                side: "bottom",
            })?
    };
    Ok((left, bottom))
}

impl PlacementTrace {
    pub fn supporters(&self, rect_id: &str) -> Result<(Support, Support), EngineError> {
        supporters(&self.packing, rect_id)
    }
}
