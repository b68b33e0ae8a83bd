//! Occupancy analysis of bottom-left packings: the horizontal region
//! partition, exact line profiles, line types (which leftover rects cross a
//! line before anything is placed above it), and a suite of occupancy checks
//! that certify the packed strip is dense enough region by region.
//!
//! All computations are exact. Occupancy along a horizontal line is piecewise
//! constant in y between rect faces, so sweeping one midpoint line per
//! face-free segment yields exact minima and areas — no sampling.

pub mod qp;

use crate::model::{ModelError, Packing, PlacedRect, RectId};
use crate::ordering::{fqw_partition, FqwPartition, PartitionClass};
use crate::scalar::Scalar;
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("line y={y} touches a face of rect `{rect}`; pick a line strictly between faces")]
    NotProper { y: Scalar, rect: RectId },
    #[error("no rect is placed above the line y={y}; line type is undefined there")]
    NoDefiningRect { y: Scalar },
    #[error(
        "half-occupancy split x={x_split} for line y={y} fell outside [{x_shelf_end}, {x_leftmost}]"
    )]
    HalfSplitOutOfRange {
        y: Scalar,
        x_split: Scalar,
        x_shelf_end: Scalar,
        x_leftmost: Scalar,
    },
    #[error("first leftover placement `{id}` has no rect below it; not a valid shelf-order trace")]
    MissingBottomSupporter { id: RectId },
    #[error("placement {step} is `{id}`, which is not in the expected partition class; the trace is not shelf-ordered")]
    NotShelfOrdered { step: usize, id: RectId },
}

// --- intervals --------------------------------------------------------------

fn merge_closed(mut iv: Vec<(Scalar, Scalar)>) -> Vec<(Scalar, Scalar)> {
    iv.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out: Vec<(Scalar, Scalar)> = Vec::new();
    for (lo, hi) in iv {
        match out.last_mut() {
            // Touching closed intervals merge into one.
            Some(last) if lo <= last.1 => {
                if hi > last.1 {
                    last.1 = hi;
                }
            }
            _ => out.push((lo, hi)),
        }
    }
    out
}

fn measure(iv: &[(Scalar, Scalar)]) -> Scalar {
    iv.iter().map(|(lo, hi)| hi - lo).sum()
}

/// Measure of `iv ∩ [lo, hi]`.
fn measure_within(iv: &[(Scalar, Scalar)], lo: &Scalar, hi: &Scalar) -> Scalar {
    iv.iter()
        .map(|(a, b)| {
            let l = a.clone().max(lo.clone());
            let r = b.clone().min(hi.clone());
            if r > l {
                r - l
            } else {
                Scalar::zero()
            }
        })
        .sum()
}

/// Maximal open gaps of `[0, width] \ iv` for merged, sorted `iv`.
fn gaps_of(iv: &[(Scalar, Scalar)], width: &Scalar) -> Vec<(Scalar, Scalar)> {
    let mut out = Vec::new();
    let mut cursor = Scalar::zero();
    for (lo, hi) in iv {
        if lo > &cursor {
            out.push((cursor.clone(), lo.clone()));
        }
        if hi > &cursor {
            cursor = hi.clone();
        }
    }
    if &cursor < width {
        out.push((cursor, width.clone()));
    }
    out
}

/// Merged x-intervals occupied on the horizontal line `y` by the first
/// `upto` placements. Assumes `y` is proper for those placements.
fn occupied_on_line(placed: &[PlacedRect], upto: usize, y: &Scalar) -> Vec<(Scalar, Scalar)> {
    let iv = placed[..upto.min(placed.len())]
        .iter()
        .filter(|p| &p.y < y && y < &p.y1())
        .map(|p| (p.x.clone(), p.x1()))
        .collect();
    merge_closed(iv)
}

fn check_proper(placed: &[PlacedRect], upto: usize, y: &Scalar) -> Result<(), AnalysisError> {
    for p in &placed[..upto.min(placed.len())] {
        if y == &p.y || y == &p.y1() {
            return Err(AnalysisError::NotProper {
                y: y.clone(),
                rect: p.id.clone(),
            });
        }
    }
    Ok(())
}

// --- strip regions ----------------------------------------------------------

/// Horizontal slice of the strip associated with the i-th placement: the
/// space below its bottom face and above the bottom faces of everything
/// placed before it. The final region (index n+1) runs up to the packing
/// height and is closed at the top.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StripRegion {
    /// 1-based region index; 1..=n for placements, n+1 for the top region.
    pub index: usize,
    pub y_lo: Scalar,
    pub y_hi: Scalar,
    /// Placement whose bottom face bounds the region above; None for n+1.
    pub defining_rect: Option<RectId>,
}

impl StripRegion {
    /// Inverted intervals count as empty, same as zero-height ones.
    pub fn is_empty(&self) -> bool {
        self.y_hi <= self.y_lo
    }

    pub fn height(&self) -> Scalar {
        if self.is_empty() {
            Scalar::zero()
        } else {
            &self.y_hi - &self.y_lo
        }
    }
}

/// Regions in placement order. Non-empty regions are disjoint and tile
/// `[0, packing height]` exactly.
pub fn strip_partition(packing: &Packing) -> Result<Vec<StripRegion>, AnalysisError> {
    let placed = packing.placed()?;
    let mut regions = Vec::with_capacity(placed.len() + 1);
    let mut max_bottom = Scalar::zero();
    for p in &placed {
        regions.push(StripRegion {
            index: p.step + 1,
            y_lo: max_bottom.clone(),
            y_hi: p.y.clone(),
            defining_rect: Some(p.id.clone()),
        });
        max_bottom = max_bottom.max(p.y.clone());
    }
    regions.push(StripRegion {
        index: placed.len() + 1,
        y_lo: max_bottom,
        y_hi: packing.height(),
        defining_rect: None,
    });
    Ok(regions)
}

// --- line profiles ----------------------------------------------------------

/// Occupancy of one proper horizontal line: merged closed occupied
/// x-intervals, their total fraction of the strip width, and the maximal
/// open gaps between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineProfile {
    pub y: Scalar,
    pub occupied_intervals: Vec<(Scalar, Scalar)>,
    pub occupied_fraction: Scalar,
    pub gaps: Vec<(Scalar, Scalar)>,
}

/// Profile of the line `y` considering only the first `upto_step` placements
/// (clamped to the trace length). Errors if `y` lies on a face of any
/// considered rect.
pub fn line_profile(
    packing: &Packing,
    y: &Scalar,
    upto_step: usize,
) -> Result<LineProfile, AnalysisError> {
    let placed = packing.placed()?;
    check_proper(&placed, upto_step, y)?;
    let occupied = occupied_on_line(&placed, upto_step, y);
    let occupied_fraction = measure(&occupied) / packing.instance.width.clone();
    let gaps = gaps_of(&occupied, &packing.instance.width);
    Ok(LineProfile {
        y: y.clone(),
        occupied_intervals: occupied,
        occupied_fraction,
        gaps,
    })
}

// --- line types -------------------------------------------------------------

/// Where a less-than-half-occupied line splits: right of `x` the line is
/// exactly half occupied (at the snapshot before the region's defining rect
/// was placed), and `gap` is the unoccupied stretch from the shelf's right
/// edge to `x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HalfSplit {
    pub x: Scalar,
    pub gap: Scalar,
}

/// Type of a proper line: the leftover (Q) rects crossing it before the
/// first rect above it was placed, plus derived quantities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineType {
    pub y: Scalar,
    /// Region containing the line; its defining rect is the first placed
    /// above the line.
    pub region_index: usize,
    /// Crossing Q-rects at that moment, sorted by x.
    pub members: Vec<RectId>,
    pub order: usize,
    pub leftmost_member: Option<RectId>,
    /// Right edge of the rightmost crossing shelf (F) rect; 0 if none.
    pub x_shelf_end: Scalar,
    /// Present only when the snapshot line is less than half occupied and
    /// the stretch between shelf edge and leftmost member is free.
    pub half_split: Option<HalfSplit>,
}

/// Like [`line_type_with`] but derives the height partition from the
/// instance itself.
pub fn line_type(packing: &Packing, y: &Scalar) -> Result<LineType, AnalysisError> {
    line_type_with(packing, &fqw_partition(&packing.instance), y)
}

pub fn line_type_with(
    packing: &Packing,
    partition: &FqwPartition,
    y: &Scalar,
) -> Result<LineType, AnalysisError> {
    let placed = packing.placed()?;
    check_proper(&placed, placed.len(), y)?;
    let regions = strip_partition(packing)?;
    let region = regions
        .iter()
        .filter(|r| !r.is_empty() && &r.y_lo <= y && y < &r.y_hi)
        .find(|r| r.defining_rect.is_some())
        .ok_or_else(|| AnalysisError::NoDefiningRect { y: y.clone() })?;
    Ok(typed_line(packing, partition, &placed, region, y)?.into_line_type())
}

/// Internal typed-line data, with indices into the placement list.
struct TypedLine {
    y: Scalar,
    region_index: usize,
    members: Vec<usize>,
    leftmost: Option<usize>,
    x_shelf_end: Scalar,
    half_split: Option<HalfSplit>,
    ids: Vec<RectId>,
}

impl TypedLine {
    fn into_line_type(self) -> LineType {
        LineType {
            y: self.y,
            region_index: self.region_index,
            order: self.members.len(),
            leftmost_member: self.ids.first().cloned(),
            members: self.ids,
            x_shelf_end: self.x_shelf_end,
            half_split: self.half_split,
        }
    }
}

fn typed_line(
    packing: &Packing,
    partition: &FqwPartition,
    placed: &[PlacedRect],
    region: &StripRegion,
    y: &Scalar,
) -> Result<TypedLine, AnalysisError> {
    let width = &packing.instance.width;
    let i = region.index;
    let prior = &placed[..i - 1];
    let mut members: Vec<&PlacedRect> = prior
        .iter()
        .filter(|p| {
            partition.class_of(&p.id) == Some(PartitionClass::Q) && &p.y < y && y < &p.y1()
        })
        .collect();
    members.sort_by(|a, b| a.x.cmp(&b.x));
    let leftmost = members.first().copied();
    let x_shelf_end = prior
        .iter()
        .filter(|p| {
            partition.class_of(&p.id) == Some(PartitionClass::F) && &p.y < y && y < &p.y1()
        })
        .map(|p| p.x1())
        .max()
        .unwrap_or_else(Scalar::zero);

    let occupied = occupied_on_line(placed, i - 1, y);
    let two = Scalar::from_int(2);
    let twice_occupied = &two * &measure(&occupied);
    let less_than_half = &twice_occupied < width;
    let half_split = match leftmost {
        Some(lm)
            if less_than_half
                && x_shelf_end <= lm.x
                && measure_within(&occupied, &x_shelf_end, &lm.x).is_zero() =>
        {
            let beyond = measure_within(&occupied, &lm.x, width);
            let x_split = width - &(&two * &beyond);
            if x_split < x_shelf_end || x_split > lm.x {
                return Err(AnalysisError::HalfSplitOutOfRange {
                    y: y.clone(),
                    x_split,
                    x_shelf_end,
                    x_leftmost: lm.x.clone(),
                });
            }
            let gap = &x_split - &x_shelf_end;
            Some(HalfSplit { x: x_split, gap })
        }
        _ => None,
    };

    Ok(TypedLine {
        y: y.clone(),
        region_index: i,
        members: members.iter().map(|p| p.step).collect(),
        leftmost: leftmost.map(|p| p.step),
        x_shelf_end,
        half_split,
        ids: members.iter().map(|p| p.id.clone()).collect(),
    })
}

// --- region occupancy sweep ---------------------------------------------------

/// Exact minimum line occupancy of one region, with a witness line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegionOccupancy {
    pub region: StripRegion,
    /// None marks an empty region (skipped).
    pub min_fraction: Option<Scalar>,
    pub witness_y: Option<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegionReport {
    pub height: Scalar,
    pub regions: Vec<RegionOccupancy>,
}

/// All face y-coordinates plus the strip bottom and packing top, sorted.
fn breakpoints(placed: &[PlacedRect], height: &Scalar) -> Vec<Scalar> {
    let mut set = BTreeSet::new();
    set.insert(Scalar::zero());
    set.insert(height.clone());
    for p in placed {
        set.insert(p.y.clone());
        set.insert(p.y1());
    }
    set.into_iter().collect()
}

/// Face-free y-segments of `[lo, hi]`, each with its midpoint (a proper line).
fn segments(breaks: &[Scalar], lo: &Scalar, hi: &Scalar) -> Vec<(Scalar, Scalar, Scalar)> {
    let mut cuts: Vec<&Scalar> = breaks.iter().filter(|b| *b > lo && *b < hi).collect();
    let mut all = vec![lo];
    all.append(&mut cuts);
    all.push(hi);
    let two = Scalar::from_int(2);
    all.windows(2)
        .filter(|w| w[0] < w[1])
        .map(|w| {
            let mid = &(w[0] + w[1]) / &two;
            (w[0].clone(), w[1].clone(), mid)
        })
        .collect()
}

/// Exact minimum occupied fraction per region over all proper lines, by
/// evaluating one midpoint line per face-free segment.
pub fn region_occupancy(packing: &Packing) -> Result<RegionReport, AnalysisError> {
    let placed = packing.placed()?;
    let height = packing.height();
    let breaks = breakpoints(&placed, &height);
    let width = &packing.instance.width;
    let regions = strip_partition(packing)?;
    let mut out = Vec::with_capacity(regions.len());
    for region in regions {
        if region.is_empty() {
            out.push(RegionOccupancy {
                region,
                min_fraction: None,
                witness_y: None,
            });
            continue;
        }
        let mut best: Option<(Scalar, Scalar)> = None;
        for (_, _, mid) in segments(&breaks, &region.y_lo, &region.y_hi) {
            let occ = occupied_on_line(&placed, placed.len(), &mid);
            let fraction = measure(&occ) / width.clone();
            if best.as_ref().map(|(f, _)| &fraction < f).unwrap_or(true) {
                best = Some((fraction, mid));
            }
        }
        let (min_fraction, witness_y) = best.map(|(f, y)| (Some(f), Some(y))).unwrap_or((None, None));
        out.push(RegionOccupancy {
            region,
            min_fraction,
            witness_y,
        });
    }
    Ok(RegionReport {
        height,
        regions: out,
    })
}

/// Occupied area inside the horizontal band `[lo, hi]` of the strip.
fn occupied_area_in_band(
    placed: &[PlacedRect],
    breaks: &[Scalar],
    lo: &Scalar,
    hi: &Scalar,
) -> Scalar {
    segments(breaks, lo, hi)
        .into_iter()
        .map(|(a, b, mid)| {
            let occ = occupied_on_line(placed, placed.len(), &mid);
            measure(&occ) * (&b - &a)
        })
        .sum()
}

// --- analysis context -------------------------------------------------------

/// Landmark placements of a shelf-ordered trace used by the occupancy checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisContext {
    /// Q-rect whose top face is highest (ties: higher bottom face, then
    /// earlier placement).
    pub top_leftover: RectId,
    /// First-placed Q-rect touching the left strip boundary; falls back to
    /// `top_leftover` when none touches it.
    pub left_wall_leftover: RectId,
    /// 1-based placement index of `left_wall_leftover`.
    pub left_wall_step: usize,
    /// Leftmost rect supporting the first Q placement from below.
    pub first_leftover_support: RectId,
    /// Twin bands `[0, h_T]` and `[y_T, y_T + h_T]` around the strip bottom
    /// and the top leftover, where h_T/y_T are `top_leftover`'s height and
    /// bottom.
    pub band_low: (Scalar, Scalar),
    pub band_high: (Scalar, Scalar),
}

/// Resolves the landmark rects. Returns None when the instance has no
/// leftover (Q) rects. The packing must be complete and shelf-ordered: the
/// first |F| placements are shelf rects, then Q, then the wide rects.
pub fn analysis_context(
    packing: &Packing,
    partition: &FqwPartition,
) -> Result<Option<AnalysisContext>, AnalysisError> {
    let placed = packing.placed()?;
    if placed.len() != packing.instance.len() {
        return Err(AnalysisError::Model(ModelError::MissingPlacement(
            "packing is incomplete".into(),
        )));
    }
    let a = partition.f_set.len();
    for p in &placed[..a] {
        if partition.class_of(&p.id) != Some(PartitionClass::F) {
            return Err(AnalysisError::NotShelfOrdered {
                step: p.step + 1,
                id: p.id.clone(),
            });
        }
    }
    if partition.q_set.is_empty() {
        return Ok(None);
    }
    let b = partition.q_set.len();
    for p in &placed[a..a + b] {
        if partition.class_of(&p.id) != Some(PartitionClass::Q) {
            return Err(AnalysisError::NotShelfOrdered {
                step: p.step + 1,
                id: p.id.clone(),
            });
        }
    }
    let leftovers: Vec<&PlacedRect> = placed[a..a + b].iter().collect();
    let top = leftovers
        .iter()
        .max_by(|p, q| {
            p.y1()
                .cmp(&q.y1())
                .then(p.y.cmp(&q.y))
                .then(q.step.cmp(&p.step))
        })
        .expect("nonempty Q");
    let left_wall = leftovers
        .iter()
        .find(|p| p.x.is_zero())
        .unwrap_or(top);
    let first = leftovers[0];
    let support = placed[..first.step]
        .iter()
        .filter(|p| p.y1() == first.y && p.x < first.x1() && first.x < p.x1())
        .min_by(|p, q| p.x.cmp(&q.x))
        .ok_or_else(|| AnalysisError::MissingBottomSupporter {
            id: first.id.clone(),
        })?;
    Ok(Some(AnalysisContext {
        top_leftover: top.id.clone(),
        left_wall_leftover: left_wall.id.clone(),
        left_wall_step: left_wall.step + 1,
        first_leftover_support: support.id.clone(),
        band_low: (Scalar::zero(), top.h.clone()),
        band_high: (top.y.clone(), top.y1()),
    }))
}

// --- check suite --------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub verdict: Verdict,
    /// Measured quantity (fraction/height), when the check computes one.
    pub computed: Option<Scalar>,
    /// Bound the quantity is compared against.
    pub bound: Option<Scalar>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub context: Option<AnalysisContext>,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.verdict == Verdict::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn pass(name: &'static str, computed: Option<Scalar>, bound: Option<Scalar>, detail: String) -> CheckResult {
    CheckResult {
        name,
        verdict: Verdict::Pass,
        computed,
        bound,
        detail,
    }
}

fn fail(name: &'static str, computed: Option<Scalar>, bound: Option<Scalar>, detail: String) -> CheckResult {
    CheckResult {
        name,
        verdict: Verdict::Fail,
        computed,
        bound,
        detail,
    }
}

fn skipped(name: &'static str, detail: &str) -> CheckResult {
    CheckResult {
        name,
        verdict: Verdict::Skipped,
        computed: None,
        bound: None,
        detail: detail.to_owned(),
    }
}

fn compare(
    name: &'static str,
    computed: Scalar,
    bound: Scalar,
    detail: String,
) -> CheckResult {
    if computed >= bound {
        pass(name, Some(computed), Some(bound), detail)
    } else {
        fail(name, Some(computed), Some(bound), detail)
    }
}

pub const CHECK_NAMES: [&str; 12] = [
    "below-first-leftover-half-occupied",
    "upper-regions-half-occupied",
    "twin-bands-half-occupied",
    "middle-regions-in-bands-or-half",
    "middle-span-occupancy-floor",
    "span-line-order-monotone",
    "span-member-width-monotone",
    "span-leftmost-member-shelf-supported",
    "span-order-occupancy-bounds",
    "top-leftover-clears-own-height",
    "left-touch-height-bounded",
    "leftover-heights-at-most-first-support",
];

struct SpanSegment {
    mid: Scalar,
    final_fraction: Scalar,
    order: usize,
    member_steps: Vec<usize>,
    leftmost_step: Option<usize>,
}

/// Runs the full occupancy check suite on a complete shelf-ordered packing.
///
/// The checks mirror the structural guarantees of bottom-left packing in
/// shelf order; on a correct engine every verdict is Pass or Skipped, so a
/// Fail signals an engine or analysis bug, not a property of the instance.
pub fn lemma_suite(
    packing: &Packing,
    partition: &FqwPartition,
) -> Result<SuiteReport, AnalysisError> {
    let placed = packing.placed()?;
    let width = &packing.instance.width;
    let height = packing.height();
    let breaks = breakpoints(&placed, &height);
    let regions = strip_partition(packing)?;
    let occupancy = region_occupancy(packing)?;
    let context = analysis_context(packing, partition)?;
    let half = Scalar::ratio(1, 2);
    let n = placed.len();
    let (a, b) = (partition.f_set.len(), partition.q_set.len());
    let mut checks = Vec::new();

    // (a) region below the first leftover placement is at least half
    // occupied on every proper line.
    if b == 0 {
        checks.push(skipped(CHECK_NAMES[0], "no leftover rects"));
    } else {
        match &occupancy.regions[a].min_fraction {
            Some(min) => checks.push(compare(
                CHECK_NAMES[0],
                min.clone(),
                half.clone(),
                format!("region {} min line fraction {min}", a + 1),
            )),
            None => checks.push(pass(
                CHECK_NAMES[0],
                None,
                None,
                format!("region {} is empty", a + 1),
            )),
        }
    }

    // (b) regions above the leftovers (from a+b+2 on), probed above the top
    // face of the highest leftover. Up there the shelf and leftover rects
    // are all topped out, so a wide rect could only have been blocked by an
    // earlier wide rect; hence every proper line crosses one and is at least
    // half occupied. The slice of these regions at or below that cutoff is
    // covered by the twin-band area check instead, and when the leftovers
    // never rise past the tallest rect the packing is in the degenerate
    // regime where only the height certificate applies.
    {
        let name = CHECK_NAMES[1];
        match &context {
            None => checks.push(skipped(name, "no leftover rects")),
            Some(ctx) => {
                let top = &placed[packing
                    .placements
                    .iter()
                    .position(|p| p.id == ctx.top_leftover)
                    .expect("context id")];
                let cutoff = top.y1();
                if cutoff <= packing.instance.max_height() {
                    checks.push(skipped(name, "leftovers stay at or below the tallest rect"));
                } else {
                    let mut worst: Option<(usize, Scalar)> = None;
                    for r in &regions {
                        if r.index < a + b + 2 || r.is_empty() || r.y_hi <= cutoff {
                            continue;
                        }
                        let lo = r.y_lo.clone().max(cutoff.clone());
                        for (_, _, mid) in segments(&breaks, &lo, &r.y_hi) {
                            let occ = occupied_on_line(&placed, placed.len(), &mid);
                            let fraction = measure(&occ) / width.clone();
                            if worst.as_ref().map(|(_, w)| &fraction < w).unwrap_or(true) {
                                worst = Some((r.index, fraction));
                            }
                        }
                    }
                    match worst {
                        Some((idx, min)) => checks.push(compare(
                            name,
                            min.clone(),
                            half.clone(),
                            format!("worst region {idx} min line fraction {min} above y={cutoff}"),
                        )),
                        None => checks.push(pass(
                            name,
                            None,
                            None,
                            "no proper lines above the top leftover".into(),
                        )),
                    }
                }
            }
        }
    }

    // Context-dependent checks.
    match &context {
        None => {
            for name in CHECK_NAMES[2..].iter().copied() {
                checks.push(skipped(name, "no leftover rects"));
            }
        }
        Some(ctx) => {
            let top = &placed[packing
                .placements
                .iter()
                .position(|p| p.id == ctx.top_leftover)
                .expect("context id")];
            let left_wall_step = ctx.left_wall_step; // 1-based
            let support = &placed[packing
                .placements
                .iter()
                .position(|p| p.id == ctx.first_leftover_support)
                .expect("context id")];

            // (c) the twin bands around the bottom shelf and the top
            // leftover are at least half occupied by area.
            {
                let bands = merge_closed(vec![ctx.band_low.clone(), ctx.band_high.clone()]);
                let band_height: Scalar = measure(&bands);
                let occ: Scalar = bands
                    .iter()
                    .map(|(lo, hi)| occupied_area_in_band(&placed, &breaks, lo, hi))
                    .sum();
                let area = width * &band_height;
                if area.is_zero() {
                    checks.push(pass(CHECK_NAMES[2], None, None, "bands are empty".into()));
                } else {
                    let fraction = occ / area;
                    checks.push(compare(
                        CHECK_NAMES[2],
                        fraction.clone(),
                        half.clone(),
                        format!("occupied fraction {fraction} of bands around `{}`", top.id),
                    ));
                }
            }

            // (d) regions strictly between the left-wall leftover and the
            // end of the leftovers lie inside the twin bands, or are at
            // least half occupied on every line.
            {
                let name = CHECK_NAMES[3];
                let bands = merge_closed(vec![ctx.band_low.clone(), ctx.band_high.clone()]);
                let contained = |r: &StripRegion| {
                    bands
                        .iter()
                        .any(|(lo, hi)| lo <= &r.y_lo && &r.y_hi <= hi)
                };
                let mut failure = None;
                let mut examined = 0usize;
                for r in &occupancy.regions {
                    let idx = r.region.index;
                    if idx >= left_wall_step + 1 && idx <= a + b && !r.region.is_empty() {
                        examined += 1;
                        let min = r.min_fraction.clone().expect("non-empty region");
                        if !contained(&r.region) && min < half {
                            failure = Some((idx, min));
                            break;
                        }
                    }
                }
                match failure {
                    Some((idx, min)) => checks.push(fail(
                        name,
                        Some(min.clone()),
                        Some(half.clone()),
                        format!("region {idx} is outside the bands with min fraction {min}"),
                    )),
                    None => checks.push(pass(
                        name,
                        None,
                        None,
                        format!("{examined} region(s) examined"),
                    )),
                }
            }

            // Middle span: regions a+2 ..= left_wall_step.
            let span_regions: Vec<&StripRegion> = regions
                .iter()
                .filter(|r| r.index >= a + 2 && r.index <= left_wall_step && !r.is_empty())
                .collect();

            // (e) span occupancy floor. A span line of order k that is less
            // than half occupied exceeds the half-width slack by at most
            // W/(2k+1), and the lines where order k dips below half form a
            // band no taller than the tallest leftover rect. Charging the
            // slack greedily against those caps bounds the unoccupied area,
            // so the span's occupied fraction is at least 1/2 − G/(2s) with
            // G = Σ_k min(m, s − (k−1)m)/(2k+1), where s is the span height
            // and m the tallest leftover height. The floor is exactly 1/3
            // when m ≥ s and rises towards 1/2 as the leftovers flatten.
            {
                let name = CHECK_NAMES[4];
                let span_height: Scalar = span_regions.iter().map(|r| r.height()).sum();
                if span_height.is_zero() {
                    checks.push(pass(name, None, None, "span is empty".into()));
                } else {
                    let occ: Scalar = span_regions
                        .iter()
                        .map(|r| occupied_area_in_band(&placed, &breaks, &r.y_lo, &r.y_hi))
                        .sum();
                    let fraction = occ / (width * &span_height);
                    let tallest: Scalar = partition
                        .q_set
                        .iter()
                        .map(|id| {
                            let i = packing.instance.index_of(id).expect("partition id");
                            packing.instance.rects[i].h.clone()
                        })
                        .fold(Scalar::zero(), Scalar::max);
                    let mut gap_budget = Scalar::zero();
                    let mut remaining = span_height.clone();
                    let mut k = 1i64;
                    while remaining.is_positive() {
                        let band = remaining.clone().min(tallest.clone());
                        gap_budget = &gap_budget + &(&band / &Scalar::from_int(2 * k + 1));
                        remaining = &remaining - &band;
                        k += 1;
                    }
                    let floor = &Scalar::ratio(1, 2)
                        - &(gap_budget / (&Scalar::from_int(2) * &span_height));
                    checks.push(compare(
                        name,
                        fraction.clone(),
                        floor,
                        format!(
                            "span height {span_height}, occupied fraction {fraction}, \
                             tallest leftover {tallest}"
                        ),
                    ));
                }
            }

            // Typed segments of the span, ascending in y.
            let mut span_segments: Vec<SpanSegment> = Vec::new();
            for region in &span_regions {
                for (_, _, mid) in segments(&breaks, &region.y_lo, &region.y_hi) {
                    let t = typed_line(packing, partition, &placed, region, &mid)?;
                    let occ = occupied_on_line(&placed, n, &mid);
                    span_segments.push(SpanSegment {
                        mid,
                        final_fraction: measure(&occ) / width.clone(),
                        order: t.members.len(),
                        member_steps: t.members,
                        leftmost_step: t.leftmost,
                    });
                }
            }

            // (f) line order never decreases going up through the span.
            {
                let name = CHECK_NAMES[5];
                let bad = span_segments
                    .windows(2)
                    .find(|w| w[0].order > w[1].order);
                match bad {
                    Some(w) => checks.push(fail(
                        name,
                        Some(Scalar::from_int(w[1].order as i64)),
                        Some(Scalar::from_int(w[0].order as i64)),
                        format!(
                            "order drops from {} (lines near y={}) to {} (y={})",
                            w[0].order, w[0].mid, w[1].order, w[1].mid
                        ),
                    )),
                    None => checks.push(pass(
                        name,
                        None,
                        None,
                        format!("{} span segment(s)", span_segments.len()),
                    )),
                }
            }

            // (g) members joining on a higher line are no wider than members
            // already present on a lower line.
            {
                let name = CHECK_NAMES[6];
                let mut violation = None;
                'outer: for (si, s) in span_segments.iter().enumerate() {
                    for s2 in &span_segments[si + 1..] {
                        for &r in &s.member_steps {
                            for &r2 in &s2.member_steps {
                                if !s.member_steps.contains(&r2) && placed[r].w < placed[r2].w {
                                    violation = Some((r, r2, s.mid.clone(), s2.mid.clone()));
                                    break 'outer;
                                }
                            }
                        }
                    }
                }
                match violation {
                    Some((r, r2, y1, y2)) => checks.push(fail(
                        name,
                        Some(placed[r].w.clone()),
                        Some(placed[r2].w.clone()),
                        format!(
                            "`{}` (width {}) on y={y1} is narrower than later `{}` (width {}) on y={y2}",
                            placed[r].id, placed[r].w, placed[r2].id, placed[r2].w
                        ),
                    )),
                    None => checks.push(pass(name, None, None, "no width inversion".into())),
                }
            }

            // (h) the leftmost member of every span line leans on a shelf
            // rect (or, degenerately, the left wall).
            {
                let name = CHECK_NAMES[7];
                let mut failure = None;
                for s in &span_segments {
                    if let Some(lm) = s.leftmost_step {
                        let lrect = &placed[lm];
                        if lrect.x.is_zero() {
                            continue;
                        }
                        let has_shelf_support = placed[..lm].iter().any(|p| {
                            p.x1() == lrect.x
                                && p.y < lrect.y1()
                                && lrect.y < p.y1()
                                && partition.class_of(&p.id) == Some(PartitionClass::F)
                        });
                        if !has_shelf_support {
                            failure = Some((lrect.id.clone(), s.mid.clone()));
                            break;
                        }
                    }
                }
                match failure {
                    Some((id, y)) => checks.push(fail(
                        name,
                        None,
                        None,
                        format!("leftmost member `{id}` of line y={y} has no shelf rect at its left face"),
                    )),
                    None => checks.push(pass(name, None, None, "all leftmost members supported".into())),
                }
            }

            // (i) per-order occupancy: lines whose members include the
            // leftmost order-k landmark are at least k/(2k+1) occupied;
            // all other order-k lines at least 1/2.
            {
                let name = CHECK_NAMES[8];
                let max_order = span_segments.iter().map(|s| s.order).max().unwrap_or(0);
                let mut failure: Option<(Scalar, Scalar, Scalar)> = None;
                for k in 1..=max_order {
                    // Leftmost landmark of order k: leftmost (ties: highest)
                    // among the leftmost members of all order-k lines.
                    let landmark = span_segments
                        .iter()
                        .filter(|s| s.order == k)
                        .filter_map(|s| s.leftmost_step)
                        .min_by(|&p, &q| {
                            placed[p]
                                .x
                                .cmp(&placed[q].x)
                                .then(placed[q].y.cmp(&placed[p].y))
                                .then(p.cmp(&q))
                        });
                    let Some(landmark) = landmark else { continue };
                    for s in span_segments.iter().filter(|s| s.order == k) {
                        let bound = if s.member_steps.contains(&landmark) {
                            Scalar::ratio(k as i64, 2 * k as i64 + 1)
                        } else {
                            half.clone()
                        };
                        if s.final_fraction < bound {
                            failure = Some((s.mid.clone(), s.final_fraction.clone(), bound));
                            break;
                        }
                    }
                    if failure.is_some() {
                        break;
                    }
                }
                match failure {
                    Some((y, got, bound)) => checks.push(fail(
                        name,
                        Some(got.clone()),
                        Some(bound.clone()),
                        format!("line y={y} is {got} occupied, below {bound}"),
                    )),
                    None => checks.push(pass(
                        name,
                        None,
                        None,
                        format!("orders up to {max_order} satisfied"),
                    )),
                }
            }

            // Context invariants.
            {
                let name = CHECK_NAMES[9];
                checks.push(if top.y >= top.h {
                    pass(
                        name,
                        Some(top.y.clone()),
                        Some(top.h.clone()),
                        format!("`{}` sits at y={} with height {}", top.id, top.y, top.h),
                    )
                } else {
                    fail(
                        name,
                        Some(top.y.clone()),
                        Some(top.h.clone()),
                        format!("`{}` sits at y={} below its own height {}", top.id, top.y, top.h),
                    )
                });
            }
            {
                let name = CHECK_NAMES[10];
                let left_wall = &placed[left_wall_step - 1];
                let bound = packing.instance.max_height() + support.h.clone();
                checks.push(if left_wall.y <= bound {
                    pass(
                        name,
                        Some(left_wall.y.clone()),
                        Some(bound.clone()),
                        format!("`{}` bottom {} within {bound}", left_wall.id, left_wall.y),
                    )
                } else {
                    fail(
                        name,
                        Some(left_wall.y.clone()),
                        Some(bound.clone()),
                        format!("`{}` bottom {} exceeds {bound}", left_wall.id, left_wall.y),
                    )
                });
            }
            {
                let name = CHECK_NAMES[11];
                let tallest = placed[a..a + b]
                    .iter()
                    .max_by(|p, q| p.h.cmp(&q.h))
                    .expect("nonempty Q");
                checks.push(if tallest.h <= support.h {
                    pass(
                        name,
                        Some(tallest.h.clone()),
                        Some(support.h.clone()),
                        format!("tallest leftover `{}` height {}", tallest.id, tallest.h),
                    )
                } else {
                    fail(
                        name,
                        Some(tallest.h.clone()),
                        Some(support.h.clone()),
                        format!(
                            "leftover `{}` (height {}) is taller than support `{}` ({})",
                            tallest.id, tallest.h, support.id, support.h
                        ),
                    )
                });
            }
        }
    }

    Ok(SuiteReport { context, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::bl_pack;
    use crate::model::{Instance, Placement, Rect};
    use crate::ordering::OrderingKind;

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

    fn staircase() -> Packing {
        // W=9: shelf (3,5),(4,4); leftovers (4,4),(4,1),(4,4).
        bl_pack(
            &instance(9, &[(3, 5), (4, 4), (4, 4), (4, 1), (4, 4)]),
            OrderingKind::Fqw,
        )
        .packing
    }

    fn s(v: i64) -> Scalar {
        Scalar::from_int(v)
    }

    fn q(p: i64, q_: i64) -> Scalar {
        Scalar::ratio(p, q_)
    }

    #[test]
    fn staircase_regions_tile_the_strip() {
        let packing = staircase();
        let regions = strip_partition(&packing).unwrap();
        assert_eq!(regions.len(), 6);
        let non_empty: Vec<(usize, i64, i64)> = regions
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| {
                (
                    r.index,
                    r.y_lo.to_f64() as i64,
                    r.y_hi.to_f64() as i64,
                )
            })
            .collect();
        assert_eq!(non_empty, vec![(3, 0, 4), (4, 4, 8), (6, 8, 12)]);
        let total: Scalar = regions.iter().map(|r| r.height()).sum();
        assert_eq!(total, packing.height());
    }

    #[test]
    fn single_rect_partition() {
        let packing = bl_pack(&instance(9, &[(4, 4)]), OrderingKind::Fqw).packing;
        let regions = strip_partition(&packing).unwrap();
        assert!(regions[0].is_empty());
        assert_eq!((regions[1].y_lo.clone(), regions[1].y_hi.clone()), (s(0), s(4)));
    }

    #[test]
    fn line_profile_merges_touching_intervals() {
        let packing = staircase();
        // y = 17/2 crosses r4 on [0,4] and r5 on [4,8]; they touch at x=4
        // and must merge into one interval.
        let p = line_profile(&packing, &q(17, 2), 5).unwrap();
        assert_eq!(p.occupied_intervals, vec![(s(0), s(8))]);
        assert_eq!(p.occupied_fraction, q(8, 9));
        assert_eq!(p.gaps, vec![(s(8), s(9))]);
    }

    #[test]
    fn line_profile_rejects_face_lines() {
        let packing = staircase();
        assert!(matches!(
            line_profile(&packing, &s(4), 5),
            Err(AnalysisError::NotProper { .. })
        ));
        // Proper for the first two placements (faces at 0, 4, 5 only).
        assert!(line_profile(&packing, &s(3), 2).is_ok());
    }

    #[test]
    fn line_profile_is_monotone_in_steps() {
        let packing = staircase();
        let y = q(13, 2);
        let mut last = Scalar::zero();
        for upto in 0..=5 {
            let f = line_profile(&packing, &y, upto).unwrap().occupied_fraction;
            assert!(f >= last);
            last = f;
        }
    }

    #[test]
    fn line_above_everything_is_empty() {
        let packing = staircase();
        let p = line_profile(&packing, &s(100), 5).unwrap();
        assert!(p.occupied_fraction.is_zero());
        assert_eq!(p.gaps.len(), 1);
    }

    #[test]
    fn line_type_reports_members_and_split() {
        let packing = staircase();
        // y = 13/2 sits in region 4 (defined by r4); prior rects r1..r3;
        // only r3 (leftover) crosses. The snapshot line is 4/9 < 1/2
        // occupied, shelf rects end before it, so the split exists.
        let t = line_type(&packing, &q(13, 2)).unwrap();
        assert_eq!(t.region_index, 4);
        assert_eq!(t.members, vec!["r3"]);
        assert_eq!(t.order, 1);
        assert_eq!(t.x_shelf_end, s(0));
        let split = t.half_split.unwrap();
        assert_eq!(split.x, s(1));
        assert_eq!(split.gap, s(1));
    }

    #[test]
    fn line_type_absent_split_when_half_occupied() {
        let packing = staircase();
        // y = 9/2: region 4, prior r1..r3 occupy [0,3] and [3,7]: 7/9 ≥ 1/2.
        let t = line_type(&packing, &q(9, 2)).unwrap();
        assert_eq!(t.order, 1);
        assert!(t.half_split.is_none());
    }

    #[test]
    fn line_type_needs_a_defining_rect() {
        let packing = staircase();
        assert!(matches!(
            line_type(&packing, &q(23, 2)),
            Err(AnalysisError::NoDefiningRect { .. })
        ));
    }

    #[test]
    fn region_minima_are_exact() {
        let packing = staircase();
        let report = region_occupancy(&packing).unwrap();
        let by_index = |i: usize| report.regions[i - 1].min_fraction.clone();
        assert_eq!(by_index(3), Some(q(7, 9)));
        assert_eq!(by_index(4), Some(q(4, 9)));
        // Region 6 spans [8,12]: lines above r4's top (y=9) cross only r5.
        assert_eq!(by_index(6), Some(q(4, 9)));
        assert_eq!(by_index(1), None);
    }

    #[test]
    fn context_finds_landmarks() {
        let packing = staircase();
        let part = fqw_partition(&packing.instance);
        let ctx = analysis_context(&packing, &part).unwrap().unwrap();
        assert_eq!(ctx.top_leftover, "r5");
        assert_eq!(ctx.left_wall_leftover, "r4");
        assert_eq!(ctx.left_wall_step, 4);
        assert_eq!(ctx.first_leftover_support, "r2");
        assert_eq!(ctx.band_low, (s(0), s(4)));
        assert_eq!(ctx.band_high, (s(8), s(12)));
    }

    #[test]
    fn context_none_without_leftovers() {
        let inst = instance(9, &[(4, 4), (5, 3)]);
        let packing = bl_pack(&inst, OrderingKind::Fqw).packing;
        let part = fqw_partition(&inst);
        assert!(analysis_context(&packing, &part).unwrap().is_none());
    }

    #[test]
    fn suite_passes_on_staircase_with_expected_values() {
        let packing = staircase();
        let part = fqw_partition(&packing.instance);
        let report = lemma_suite(&packing, &part).unwrap();
        assert!(report.all_passed(), "failures: {:?}", report.failures().collect::<Vec<_>>());
        let span = report.check("middle-span-occupancy-floor").unwrap();
        assert_eq!(span.computed, Some(q(19, 36)));
        let bands = report.check("twin-bands-half-occupied").unwrap();
        assert_eq!(bands.computed, Some(q(2, 3)));
        let below = report.check("below-first-leftover-half-occupied").unwrap();
        assert_eq!(below.computed, Some(q(7, 9)));
    }

    #[test]
    fn suite_skips_context_checks_without_leftovers() {
        let inst = instance(9, &[(4, 4), (5, 3)]);
        let packing = bl_pack(&inst, OrderingKind::Fqw).packing;
        let part = fqw_partition(&inst);
        let report = lemma_suite(&packing, &part).unwrap();
        assert!(report.all_passed());
        assert_eq!(
            report.check("twin-bands-half-occupied").unwrap().verdict,
            Verdict::Skipped
        );
    }

    #[test]
    fn suite_flags_a_corrupted_packing() {
        // Hand-build a shelf-ordered packing whose later leftovers float far
        // above anything below them: the span is mostly empty and the
        // left-wall leftover sits higher than any support allows.
        let inst = instance(9, &[(3, 5), (4, 4), (4, 4), (4, 1), (4, 4)]);
        let mk = |id: &str, x: i64, y: i64| Placement {
            id: id.into(),
            x: s(x),
            y: s(y),
        };
        let packing = Packing::new(
            inst,
            vec![
                mk("r1", 0, 0),
                mk("r2", 3, 0),
                mk("r3", 3, 4),
                mk("r4", 0, 20),
                mk("r5", 4, 20),
            ],
        );
        let part = fqw_partition(&packing.instance);
        let report = lemma_suite(&packing, &part).unwrap();
        assert!(!report.all_passed());
        let bad: Vec<&str> = report.failures().map(|c| c.name).collect();
        assert!(bad.contains(&"middle-span-occupancy-floor"), "failed: {bad:?}");
        assert!(bad.contains(&"left-touch-height-bounded"), "failed: {bad:?}");
    }

    #[test]
    fn occupied_area_matches_hand_count() {
        let packing = staircase();
        let placed = packing.placed().unwrap();
        let breaks = breakpoints(&placed, &packing.height());
        assert_eq!(
            occupied_area_in_band(&placed, &breaks, &s(4), &s(8)),
            s(19)
        );
        assert_eq!(
            occupied_area_in_band(&placed, &breaks, &s(0), &s(12)),
            s(67)
        );
    }
}
