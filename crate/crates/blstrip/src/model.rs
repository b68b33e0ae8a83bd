//! Instance and packing model: rectangles with exact rational dimensions, a
//! strip of fixed width, and placement sequences ("traces") of axis-parallel
//! placements without rotation.

use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

/// Stable, opaque rectangle identifier. Uniqueness is enforced per instance.
pub type RectId = String;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub id: RectId,
    pub w: Scalar,
    pub h: Scalar,
}

impl Rect {
    pub fn new(id: impl Into<RectId>, w: Scalar, h: Scalar) -> Self {
        Rect { id: id.into(), w, h }
    }

    pub fn area(&self) -> Scalar {
        &self.w * &self.h
    }
}

/// Strip-packing instance: a strip of width `width` (unbounded height) and an
/// ordered list of rectangles. The list order is the input order that
/// tie-breaking rules refer to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Instance {
    pub width: Scalar,
    pub rects: Vec<Rect>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("strip width must be positive, got {0}")]
    NonPositiveWidth(Scalar),
    #[error("rect `{id}` has non-positive dimension {w} x {h}")]
    NonPositiveRect { id: RectId, w: Scalar, h: Scalar },
    #[error("rect `{id}` is wider ({w}) than the strip ({width})")]
    RectWiderThanStrip { id: RectId, w: Scalar, width: Scalar },
    #[error("duplicate rect id `{0}`")]
    DuplicateId(RectId),
    #[error("unknown rect id `{0}`")]
    UnknownRect(RectId),
    #[error("rect `{0}` placed more than once")]
    DuplicatePlacement(RectId),
    #[error("rect `{0}` has no placement")]
    MissingPlacement(RectId),
}

impl Instance {
    /// The empty instance is legal; it packs to height zero.
    pub fn new(width: Scalar, rects: Vec<Rect>) -> Result<Self, ModelError> {
        if !width.is_positive() {
            return Err(ModelError::NonPositiveWidth(width));
        }
        let mut seen = BTreeMap::new();
        for (i, r) in rects.iter().enumerate() {
            if !r.w.is_positive() || !r.h.is_positive() {
                return Err(ModelError::NonPositiveRect {
                    id: r.id.clone(),
                    w: r.w.clone(),
                    h: r.h.clone(),
                });
            }
            if r.w > width {
                return Err(ModelError::RectWiderThanStrip {
                    id: r.id.clone(),
                    w: r.w.clone(),
                    width: width.clone(),
                });
            }
            if seen.insert(r.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateId(r.id.clone()));
            }
        }
        Ok(Instance { width, rects })
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Result<usize, ModelError> {
        self.rects
            .iter()
            .position(|r| r.id == id)
            .ok_or_else(|| ModelError::UnknownRect(id.to_owned()))
    }

    pub fn total_area(&self) -> Scalar {
        self.rects.iter().map(Rect::area).sum()
    }

    pub fn max_height(&self) -> Scalar {
        self.rects
            .iter()
            .map(|r| r.h.clone())
            .max()
            .unwrap_or_else(Scalar::zero)
    }
}

/// Lower-left corner of one rectangle inside the strip.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub id: RectId,
    pub x: Scalar,
    pub y: Scalar,
}

/// A packing is a placement sequence over an instance. The sequence order is
/// meaningful: it is the order in which the rectangles were placed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Packing {
    pub instance: Instance,
    pub placements: Vec<Placement>,
}

/// Placement joined with its rectangle, plus the step (0-based placement
/// position) it was placed at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacedRect {
    pub step: usize,
    pub rect_index: usize,
    pub id: RectId,
    pub x: Scalar,
    pub y: Scalar,
    pub w: Scalar,
    pub h: Scalar,
}

impl PlacedRect {
    pub fn x1(&self) -> Scalar {
        &self.x + &self.w
    }

    pub fn y1(&self) -> Scalar {
        &self.y + &self.h
    }

    /// Open-interior intersection test; touching edges do not overlap.
    pub fn overlaps(&self, other: &PlacedRect) -> bool {
        self.x < other.x1() && other.x < self.x1() && self.y < other.y1() && other.y < self.y1()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    /// Rect sticks out of `[0, W] x [0, inf)`.
    OutOfStrip { id: RectId, x: Scalar, y: Scalar },
    /// Two rects share interior points.
    Overlap { first: RectId, second: RectId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OutOfStrip { id, x, y } => {
                write!(f, "rect `{id}` at ({x}, {y}) leaves the strip")
            }
            Violation::Overlap { first, second } => {
                write!(f, "rects `{first}` and `{second}` overlap")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    /// The placement list does not map one-to-one onto the instance rects.
    #[error(transparent)]
    Structural(#[from] ModelError),
    #[error("infeasible packing: {}", summarize(.0))]
    Infeasible(Vec<Violation>),
}

fn summarize(vs: &[Violation]) -> String {
    vs.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl Packing {
    pub fn new(instance: Instance, placements: Vec<Placement>) -> Self {
        Packing {
            instance,
            placements,
        }
    }

    /// Resolves placements against the instance, rejecting unknown ids and
    /// duplicates. Does not require completeness; `verify_feasible` does.
    pub fn placed(&self) -> Result<Vec<PlacedRect>, ModelError> {
        let mut used = vec![false; self.instance.len()];
        let mut out = Vec::with_capacity(self.placements.len());
        for (step, p) in self.placements.iter().enumerate() {
            let rect_index = self.instance.index_of(&p.id)?;
            if used[rect_index] {
                return Err(ModelError::DuplicatePlacement(p.id.clone()));
            }
            used[rect_index] = true;
            let r = &self.instance.rects[rect_index];
            out.push(PlacedRect {
                step,
                rect_index,
                id: r.id.clone(),
                x: p.x.clone(),
                y: p.y.clone(),
                w: r.w.clone(),
                h: r.h.clone(),
            });
        }
        Ok(out)
    }

    pub fn height(&self) -> Scalar {
        packing_height(self)
    }
}

/// Height of the packing: the highest top face, zero for no placements.
pub fn packing_height(packing: &Packing) -> Scalar {
    packing
        .placements
        .iter()
        .map(|p| {
            let r = &packing.instance.rects[packing
                .instance
                .index_of(&p.id)
                .expect("placement id resolved")];
            &p.y + &r.h
        })
        .max()
        .unwrap_or_else(Scalar::zero)
}

/// Checks that every rect is placed exactly once, inside the strip, with
/// pairwise disjoint interiors. Touching boundaries are feasible.
pub fn verify_feasible(packing: &Packing) -> Result<(), VerifyError> {
    let placed = packing.placed().map_err(VerifyError::Structural)?;
    if placed.len() != packing.instance.len() {
        let mut used = vec![false; packing.instance.len()];
        for p in &placed {
            used[p.rect_index] = true;
        }
        let missing = used.iter().position(|u| !u).expect("some rect missing");
        return Err(VerifyError::Structural(ModelError::MissingPlacement(
            packing.instance.rects[missing].id.clone(),
        )));
    }
    let w = &packing.instance.width;
    let mut violations = Vec::new();
    for r in &placed {
        if r.x.is_negative() || r.y.is_negative() || &r.x1() > w {
            violations.push(Violation::OutOfStrip {
                id: r.id.clone(),
                x: r.x.clone(),
                y: r.y.clone(),
            });
        }
    }
    for i in 0..placed.len() {
        for j in i + 1..placed.len() {
            if placed[i].overlaps(&placed[j]) {
                violations.push(Violation::Overlap {
                    first: placed[i].id.clone(),
                    second: placed[j].id.clone(),
                });
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(VerifyError::Infeasible(violations))
    }
}

pub fn total_area(instance: &Instance) -> Scalar {
    instance.total_area()
}

// --- file formats ---------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FileError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Deserialize)]
struct RawInstance {
    width: Scalar,
    rects: Vec<Rect>,
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawInstance::deserialize(d)?;
        Instance::new(raw.width, raw.rects).map_err(serde::de::Error::custom)
    }
}

/// Packing documents either embed their instance or point at a sibling file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceRef {
    Inline(Instance),
    Path(String),
}

impl Serialize for InstanceRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            InstanceRef::Inline(i) => i.serialize(s),
            InstanceRef::Path(p) => s.serialize_str(p),
        }
    }
}

impl<'de> Deserialize<'de> for InstanceRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        match value {
            serde_json::Value::String(p) => Ok(InstanceRef::Path(p)),
            obj @ serde_json::Value::Object(_) => serde_json::from_value(obj)
                .map(InstanceRef::Inline)
                .map_err(serde::de::Error::custom),
            other => Err(serde::de::Error::custom(format!(
                "instance must be an object or a path string, got {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PackingDoc {
    pub instance: InstanceRef,
    pub placements: Vec<Placement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height: Option<Scalar>,
}

impl PackingDoc {
    pub fn inline(packing: &Packing) -> Self {
        PackingDoc {
            instance: InstanceRef::Inline(packing.instance.clone()),
            placements: packing.placements.clone(),
            height: Some(packing.height()),
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, FileError> {
    let text = std::fs::read_to_string(path).map_err(|e| FileError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| FileError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn read_instance_file(path: &Path) -> Result<Instance, FileError> {
    read_json(path)
}

/// Reads a packing document, resolving a referenced instance path relative to
/// the packing file's directory.
pub fn read_packing_file(path: &Path) -> Result<Packing, FileError> {
    let doc: PackingDoc = read_json(path)?;
    let instance = match doc.instance {
        InstanceRef::Inline(i) => i,
        InstanceRef::Path(rel) => {
            let base = path.parent().unwrap_or_else(|| Path::new("."));
            read_instance_file(&base.join(rel))?
        }
    };
    Ok(Packing::new(instance, doc.placements))
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<(), FileError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| FileError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| FileError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(id: &str, w: i64, h: i64) -> Rect {
        Rect::new(id, Scalar::from_int(w), Scalar::from_int(h))
    }

    #[test]
    fn instance_validation() {
        assert!(Instance::new(Scalar::from_int(4), vec![rect("a", 2, 2)]).is_ok());
        assert!(matches!(
            Instance::new(Scalar::zero(), vec![]),
            Err(ModelError::NonPositiveWidth(_))
        ));
        assert!(matches!(
            Instance::new(Scalar::from_int(4), vec![rect("a", 5, 1)]),
            Err(ModelError::RectWiderThanStrip { .. })
        ));
        assert!(matches!(
            Instance::new(Scalar::from_int(4), vec![rect("a", 1, 1), rect("a", 1, 1)]),
            Err(ModelError::DuplicateId(_))
        ));
        let empty = Instance::new(Scalar::from_int(4), vec![]).unwrap();
        assert_eq!(empty.total_area(), Scalar::zero());
    }

    #[test]
    fn touching_rects_are_feasible() {
        let instance =
            Instance::new(Scalar::from_int(4), vec![rect("a", 2, 2), rect("b", 2, 2)]).unwrap();
        let packing = Packing::new(
            instance,
            vec![
                Placement {
                    id: "a".into(),
                    x: Scalar::zero(),
                    y: Scalar::zero(),
                },
                Placement {
                    id: "b".into(),
                    x: Scalar::from_int(2),
                    y: Scalar::zero(),
                },
            ],
        );
        assert!(verify_feasible(&packing).is_ok());
        assert_eq!(packing.height(), Scalar::from_int(2));
    }

    #[test]
    fn overlapping_rects_name_the_pair() {
        let instance =
            Instance::new(Scalar::from_int(4), vec![rect("a", 2, 2), rect("b", 2, 2)]).unwrap();
        let packing = Packing::new(
            instance,
            vec![
                Placement {
                    id: "a".into(),
                    x: Scalar::zero(),
                    y: Scalar::zero(),
                },
                Placement {
                    id: "b".into(),
                    x: Scalar::one(),
                    y: Scalar::one(),
                },
            ],
        );
        match verify_feasible(&packing) {
            Err(VerifyError::Infeasible(vs)) => {
                assert_eq!(
                    vs,
                    vec![Violation::Overlap {
                        first: "a".into(),
                        second: "b".into()
                    }]
                );
            }
            other => panic!("expected overlap violation, got {other:?}"),
        }
    }

    #[test]
    fn structural_errors_are_distinct_from_violations() {
        let instance = Instance::new(Scalar::from_int(4), vec![rect("a", 2, 2)]).unwrap();
        let unknown = Packing::new(
            instance.clone(),
            vec![Placement {
                id: "zz".into(),
                x: Scalar::zero(),
                y: Scalar::zero(),
            }],
        );
        assert!(matches!(
            verify_feasible(&unknown),
            Err(VerifyError::Structural(ModelError::UnknownRect(_)))
        ));
        let missing = Packing::new(instance, vec![]);
        assert!(matches!(
            verify_feasible(&missing),
            Err(VerifyError::Structural(ModelError::MissingPlacement(_)))
        ));
    }

    #[test]
    fn out_of_strip_is_reported() {
        let instance = Instance::new(Scalar::from_int(4), vec![rect("a", 3, 1)]).unwrap();
        let packing = Packing::new(
            instance,
            vec![Placement {
                id: "a".into(),
                x: Scalar::from_int(2),
                y: Scalar::zero(),
            }],
        );
        assert!(matches!(
            verify_feasible(&packing),
            Err(VerifyError::Infeasible(vs)) if vs.len() == 1
        ));
    }

    #[test]
    fn packing_doc_round_trips_inline_instances() {
        let instance = Instance::new(Scalar::from_int(4), vec![rect("a", 2, 2)]).unwrap();
        let packing = Packing::new(
            instance,
            vec![Placement {
                id: "a".into(),
                x: Scalar::zero(),
                y: Scalar::zero(),
            }],
        );
        let doc = PackingDoc::inline(&packing);
        let text = serde_json::to_string(&doc).unwrap();
        let back: PackingDoc = serde_json::from_str(&text).unwrap();
        match back.instance {
            InstanceRef::Inline(i) => assert_eq!(i, packing.instance),
            _ => panic!("expected inline instance"),
        }
        assert_eq!(back.placements, packing.placements);
    }
}
