//! Lower bounds on the optimal strip height, the packing-height guarantee
//! certificate, and empirical approximation ratios.

use crate::engine::bl_pack;
use crate::model::{ModelError, Instance, Packing};
use crate::ordering::{FqwPartition, OrderingKind, PartitionClass};
use crate::oracle::{exact_opt, OptStatus};
use crate::scalar::Scalar;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(
        "exact optimum search aborted after {nodes_explored} nodes (budget {budget}); \
         use the lower-bound reference instead"
    )]
    OracleAborted { nodes_explored: u64, budget: u64 },
}

/// Four elementary lower bounds on the optimal height and their maximum.
/// Every feasible packing is at least as tall as each of these.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LowerBoundReport {
    /// Tallest single rect.
    pub lb_hmax: Scalar,
    /// Total area divided by the strip width.
    pub lb_area: Scalar,
    /// Sum of heights of rects wider than half the strip: no two of them
    /// fit side by side, so they stack.
    pub lb_wide: Scalar,
    /// For a height threshold h: if the rects at least h tall are jointly
    /// wider than the strip, two of them must stack, forcing height 2h.
    pub lb_tall: Scalar,
    pub lb: Scalar,
}

pub fn lower_bound(instance: &Instance) -> LowerBoundReport {
    let width = &instance.width;
    let lb_hmax = instance.max_height();
    let lb_area = instance.total_area() / width.clone();
    let two = Scalar::from_int(2);
    let lb_wide: Scalar = instance
        .rects
        .iter()
        .filter(|r| &(&two * &r.w) > width)
        .map(|r| r.h.clone())
        .sum();
    let mut lb_tall = Scalar::zero();
    for threshold in instance.rects.iter().map(|r| &r.h) {
        let span: Scalar = instance
            .rects
            .iter()
            .filter(|r| &r.h >= threshold)
            .map(|r| r.w.clone())
            .sum();
        if &span > width {
            lb_tall = lb_tall.max(&two * threshold);
        }
    }
    let lb = lb_hmax
        .clone()
        .max(lb_area.clone())
        .max(lb_wide.clone())
        .max(lb_tall.clone());
    LowerBoundReport {
        lb_hmax,
        lb_area,
        lb_wide,
        lb_tall,
        lb,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateBranch {
    /// Leftovers never rise above the tallest rect (or don't exist): the
    /// packing is at most the tallest rect plus the stacked wide rects.
    Degenerate,
    /// Leftovers rise higher: the strip is dense enough that the area bound
    /// takes over.
    Area,
}

/// Certificate that a shelf-ordered bottom-left packing stays within the
/// guaranteed factor of any optimal packing.
///
/// Either branch inequality, combined with the elementary lower bounds
/// (`lb_hmax`, `lb_area`, `lb_wide`), implies
/// `packed_height ≤ 13/6 · optimal height`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HeightCertificate {
    pub branch: CertificateBranch,
    pub packed_height: Scalar,
    pub max_rect_height: Scalar,
    /// Sum of the wide (W) rect heights.
    pub wide_stack: Scalar,
    /// Total rect area divided by the strip width.
    pub density: Scalar,
    /// The branch inequality, evaluated exactly:
    /// Degenerate: `packed_height ≤ max_rect_height + wide_stack`;
    /// Area: `density ≥ packed_height/2 − max_rect_height/12`.
    pub holds: bool,
}

/// The guaranteed approximation factor the certificate implies.
pub fn ratio_bound() -> Scalar {
    Scalar::ratio(13, 6)
}

pub fn certify_height(
    packing: &Packing,
    partition: &FqwPartition,
) -> Result<HeightCertificate, BoundsError> {
    let placed = packing.placed()?;
    if placed.len() != packing.instance.len() {
        return Err(ModelError::MissingPlacement("packing is incomplete".into()).into());
    }
    let packed_height = packing.height();
    let max_rect_height = packing.instance.max_height();
    let wide_stack: Scalar = packing
        .instance
        .rects
        .iter()
        .filter(|r| partition.class_of(&r.id) == Some(PartitionClass::W))
        .map(|r| r.h.clone())
        .sum();
    let density = packing.instance.total_area() / packing.instance.width.clone();

    let leftover_top = placed
        .iter()
        .filter(|p| partition.class_of(&p.id) == Some(PartitionClass::Q))
        .map(|p| p.y1())
        .max();
    let degenerate = match &leftover_top {
        None => true,
        Some(top) => top <= &max_rect_height,
    };
    let (branch, holds) = if degenerate {
        let bound = &max_rect_height + &wide_stack;
        (CertificateBranch::Degenerate, packed_height <= bound)
    } else {
        let needed = &(&packed_height / &Scalar::from_int(2))
            - &(&max_rect_height / &Scalar::from_int(12));
        (CertificateBranch::Area, density >= needed)
    };
    Ok(HeightCertificate {
        branch,
        packed_height,
        max_rect_height,
        wide_stack,
        density,
        holds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptSource {
    /// Reference height from the exact oracle; errors if it aborts.
    Exact,
    /// Reference height from the static lower bound: cheap, and the
    /// resulting ratio is an upper bound on the true ratio.
    LowerBound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RatioReport {
    pub ordering: OrderingKind,
    pub opt_source: OptSource,
    pub packed_height: Scalar,
    /// Optimal height (exact source) or the static lower bound.
    pub reference: Scalar,
    /// `packed_height / reference`; 1 for the empty instance.
    pub ratio: Scalar,
}

/// Packs with the given ordering and compares against a reference height.
pub fn empirical_ratio(
    instance: &Instance,
    ordering: OrderingKind,
    opt_source: OptSource,
    node_budget: u64,
) -> Result<RatioReport, BoundsError> {
    let packed_height = bl_pack(instance, ordering).packing.height();
    let reference = match opt_source {
        OptSource::Exact => {
            let opt = exact_opt(instance, node_budget);
            if opt.status == OptStatus::Aborted {
                return Err(BoundsError::OracleAborted {
                    nodes_explored: opt.nodes_explored,
                    budget: node_budget,
                });
            }
            opt.height
        }
        OptSource::LowerBound => lower_bound(instance).lb,
    };
    let ratio = if reference.is_zero() {
        Scalar::one()
    } else {
        &packed_height / &reference
    };
    Ok(RatioReport {
        ordering,
        opt_source,
        packed_height,
        reference,
        ratio,
    })
}
