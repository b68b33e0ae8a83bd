//! Instance families: fixed worked examples, parametric adversarial
//! constructions, and seeded random generators, plus a reproducible corpus
//! writer.

use crate::engine::bl_pack;
use crate::model::{FileError, Instance, ModelError, Packing, Placement, Rect};
use crate::ordering::OrderingKind;
use crate::scalar::Scalar;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    File(#[from] FileError),
}

fn int_rect(id: impl Into<String>, w: i64, h: i64) -> Rect {
    Rect::new(id, Scalar::from_int(w), Scalar::from_int(h))
}

/// Fixed 15-rect demonstration instance on a strip of width 16. Its
/// bottom-left packing under the partition ordering reaches height 25 and
/// exercises every placement phenomenon the analysis modules care about:
/// tucked rects, overhangs, and wide rects stacked at the end.
pub fn worked_example() -> Instance {
    let dims: [(i64, i64); 15] = [
        (3, 11),
        (2, 10),
        (1, 9),
        (5, 8),
        (3, 6),
        (1, 5),
        (8, 4),
        (7, 3),
        (7, 4),
        (5, 4),
        (3, 6),
        (3, 4),
        (2, 4),
        (11, 2),
        (14, 1),
    ];
    let rects = dims
        .iter()
        .enumerate()
        .map(|(i, &(w, h))| int_rect(format!("r{}", i + 1), w, h))
        .collect();
    Instance::new(Scalar::from_int(16), rects).expect("fixed instance is valid")
}

/// Five-rect staircase family on a strip of width `3w`, with rects
/// `(w, h+1), (w+1, h), (w+1, h), (w+1, 1), (w+1, h)` in that input order.
/// For all `w >= 3`, `h >= 2` the partition ordering packs it to height
/// exactly `3h`, even though stacking the pieces by hand needs only `2h + 1`:
/// the thin `(w+1, 1)` rect wedges under an overhang and forces the last rect
/// a full level higher.
pub fn staircase(w: i64, h: i64) -> Result<Instance, GenError> {
    if w < 3 {
        return Err(GenError::InvalidParam(format!(
            "staircase requires w >= 3 so the wide rects stay in the narrow class, got w = {w}"
        )));
    }
    if h < 2 {
        return Err(GenError::InvalidParam(format!(
            "staircase requires h >= 2 so the floor pair is the tallest, got h = {h}"
        )));
    }
    let dims = [(w, h + 1), (w + 1, h), (w + 1, h), (w + 1, 1), (w + 1, h)];
    let rects = dims
        .iter()
        .enumerate()
        .map(|(i, &(rw, rh))| int_rect(format!("r{}", i + 1), rw, rh))
        .collect();
    Ok(Instance::new(Scalar::from_int(3 * w), rects)?)
}

/// Derived sizes of the [`checkerboard`] construction for a given `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckerboardParams {
    pub k: u32,
    /// Squares that fit beside a slab on one level.
    pub nest_cols: i64,
    /// Side-4 squares in the floor row; the strip is `4 * floor_squares` wide.
    pub floor_squares: i64,
    /// Number of wide slabs.
    pub slabs: i64,
    /// Side-4 squares interleaved with the slabs.
    pub body_squares: i64,
}

impl CheckerboardParams {
    pub fn new(k: u32) -> Result<Self, GenError> {
        if k < 4 {
            return Err(GenError::InvalidParam(format!(
                "checkerboard requires k >= 4, got {k}"
            )));
        }
        let k = i64::from(k);
        // Saturate the shape parameters so instance size stays polynomial in
        // ratio gain rather than in k; beyond the caps only `slabs` grows.
        let nest_cols = (2 * (k / 8) + 2).min(10);
        let floor_squares = 2 * nest_cols + 2;
        let slabs = (nest_cols + 1) * ((k + 31) / 32);
        let body_squares = nest_cols * slabs;
        Ok(CheckerboardParams {
            k: k as u32,
            nest_cols,
            floor_squares,
            slabs,
            body_squares,
        })
    }

    pub fn strip_width(&self) -> i64 {
        4 * self.floor_squares
    }

    pub fn slab_width(&self) -> i64 {
        self.strip_width() - 4 * self.nest_cols
    }
}

/// An adversarial instance together with a hand-constructed packing of it.
/// The constructed packing serves as the ratio denominator: it upper-bounds
/// the optimum without running the exact solver.
#[derive(Debug, Clone)]
pub struct Checkerboard {
    pub params: CheckerboardParams,
    pub instance: Instance,
    pub witness: Packing,
}

/// Parametric adversarial construction: a row of side-4 squares filling the
/// strip, then alternating runs of one wide flat slab and a batch of side-4
/// squares. Everything is 4 tall, so the floor row (listed first) is exactly
/// the greedy floor set and the slabs, wider than half the strip, are saved
/// for last. The bottom-left packing therefore lays all the squares into
/// dense rows and then stacks the slabs one per level, leaving a checkered
/// column of empty cells beside them; the shipped witness tiles the squares
/// into exactly those cells instead. The height ratio between the two grows
/// with `k`.
pub fn checkerboard(k: u32) -> Result<Checkerboard, GenError> {
    let params = CheckerboardParams::new(k)?;
    let width = params.strip_width();
    let slab_w = params.slab_width();

    let mut rects = Vec::new();
    let mut placements = Vec::new();
    // Floor row: m squares of side 4 spanning the strip exactly.
    for j in 0..params.floor_squares {
        rects.push(int_rect(format!("f{}", j + 1), 4, 4));
        placements.push(Placement {
            id: format!("f{}", j + 1),
            x: Scalar::from_int(4 * j),
            y: Scalar::zero(),
        });
    }
    // Body: slabs and squares alternate in the input; the witness stacks
    // slab i on level i and tiles its batch of squares beside that level.
    for i in 0..params.slabs {
        let level_y = Scalar::from_int(4 + 4 * i);
        rects.push(int_rect(format!("s{}", i + 1), slab_w, 4));
        placements.push(Placement {
            id: format!("s{}", i + 1),
            x: Scalar::zero(),
            y: level_y.clone(),
        });
        for c in 0..params.nest_cols {
            let t = i * params.nest_cols + c;
            rects.push(int_rect(format!("q{}", t + 1), 4, 4));
            placements.push(Placement {
                id: format!("q{}", t + 1),
                x: Scalar::from_int(slab_w + 4 * c),
                y: level_y.clone(),
            });
        }
    }

    let instance = Instance::new(Scalar::from_int(width), rects)?;
    let witness = Packing::new(instance.clone(), placements);
    Ok(Checkerboard {
        params,
        instance,
        witness,
    })
}

/// One row of the adversarial ratio table.
#[derive(Debug, Clone, Serialize)]
pub struct RatioRow {
    pub k: u32,
    pub bl_height: Scalar,
    pub witness_height: Scalar,
    pub ratio: Scalar,
}

/// Packs each `checkerboard(k)` with the partition ordering and reports the
/// height against the constructed witness height.
pub fn checkerboard_ratio_table(ks: &[u32]) -> Result<Vec<RatioRow>, GenError> {
    ks.iter()
        .map(|&k| {
            let cb = checkerboard(k)?;
            let bl_height = bl_pack(&cb.instance, OrderingKind::Fqw).packing.height();
            let witness_height = cb.witness.height();
            let ratio = &bl_height / &witness_height;
            Ok(RatioRow {
                k,
                bl_height,
                witness_height,
                ratio,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomRectParams {
    pub n: usize,
    pub seed: u64,
    pub width: i64,
    /// Inclusive bounds on rect widths.
    pub w_range: (i64, i64),
    /// Inclusive bounds on rect heights.
    pub h_range: (i64, i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSquareParams {
    pub n: usize,
    pub seed: u64,
    pub width: i64,
    /// Inclusive bounds on square sides.
    pub side_range: (i64, i64),
}

fn check_range(name: &str, (lo, hi): (i64, i64), max: i64) -> Result<(), GenError> {
    if lo < 1 || hi < lo {
        return Err(GenError::InvalidParam(format!(
            "{name} range must satisfy 1 <= lo <= hi, got {lo}..={hi}"
        )));
    }
    if hi > max {
        return Err(GenError::InvalidParam(format!(
            "{name} range must stay within the strip width {max}, got {lo}..={hi}"
        )));
    }
    Ok(())
}

/// Seeded random instance with integer dimensions drawn uniformly from the
/// given inclusive ranges. The same parameters always produce the same
/// instance.
pub fn random_rects(p: &RandomRectParams) -> Result<Instance, GenError> {
    if p.width < 1 {
        return Err(GenError::InvalidParam(format!(
            "strip width must be positive, got {}",
            p.width
        )));
    }
    check_range("width", p.w_range, p.width)?;
    check_range("height", p.h_range, i64::MAX)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let rects = (0..p.n)
        .map(|i| {
            let w = rng.gen_range(p.w_range.0..=p.w_range.1);
            let h = rng.gen_range(p.h_range.0..=p.h_range.1);
            int_rect(format!("r{}", i + 1), w, h)
        })
        .collect();
    Ok(Instance::new(Scalar::from_int(p.width), rects)?)
}

/// Seeded random squares; like [`random_rects`] with one shared dimension.
pub fn random_squares(p: &RandomSquareParams) -> Result<Instance, GenError> {
    if p.width < 1 {
        return Err(GenError::InvalidParam(format!(
            "strip width must be positive, got {}",
            p.width
        )));
    }
    check_range("side", p.side_range, p.width)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let rects = (0..p.n)
        .map(|i| {
            let s = rng.gen_range(p.side_range.0..=p.side_range.1);
            int_rect(format!("r{}", i + 1), s, s)
        })
        .collect();
    Ok(Instance::new(Scalar::from_int(p.width), rects)?)
}

/// Declarative description of one generated instance, as stored in corpus
/// manifests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    WorkedExample,
    Staircase { w: i64, h: i64 },
    Checkerboard { k: u32 },
    RandomRects(RandomRectParams),
    RandomSquares(RandomSquareParams),
}

impl FamilySpec {
    pub fn family_tag(&self) -> &'static str {
        match self {
            FamilySpec::WorkedExample => "worked_example",
            FamilySpec::Staircase { .. } => "staircase",
            FamilySpec::Checkerboard { .. } => "checkerboard",
            FamilySpec::RandomRects(_) => "random_rects",
            FamilySpec::RandomSquares(_) => "random_squares",
        }
    }
}

pub fn gen(spec: &FamilySpec) -> Result<Instance, GenError> {
    match spec {
        FamilySpec::WorkedExample => Ok(worked_example()),
        FamilySpec::Staircase { w, h } => staircase(*w, *h),
        FamilySpec::Checkerboard { k } => Ok(checkerboard(*k)?.instance),
        FamilySpec::RandomRects(p) => random_rects(p),
        FamilySpec::RandomSquares(p) => random_squares(p),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub spec: FamilySpec,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
}

fn render_json<T: Serialize>(path: &Path, value: &T) -> Result<String, FileError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| FileError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    text.push('\n');
    Ok(text)
}

fn write_text(path: &Path, text: &str) -> Result<(), FileError> {
    std::fs::write(path, text).map_err(|e| FileError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Generates every spec into `out_dir` and writes a `manifest.json` recording
/// file names, parameters, and content hashes. Output is byte-reproducible:
/// the same spec list always produces identical files and manifest.
pub fn gen_corpus(specs: &[FamilySpec], out_dir: &Path) -> Result<CorpusManifest, GenError> {
    std::fs::create_dir_all(out_dir).map_err(|e| FileError::Io {
        path: out_dir.display().to_string(),
        message: e.to_string(),
    })?;
    let mut entries = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let instance = gen(spec)?;
        let file = format!("{:03}_{}.json", i, spec.family_tag());
        let path = out_dir.join(&file);
        let text = render_json(&path, &instance)?;
        let sha256 = format!("{:x}", Sha256::digest(text.as_bytes()));
        write_text(&path, &text)?;
        entries.push(ManifestEntry {
            file,
            spec: spec.clone(),
            sha256,
        });
    }
    let manifest = CorpusManifest { entries };
    let manifest_path = out_dir.join("manifest.json");
    let text = render_json(&manifest_path, &manifest)?;
    write_text(&manifest_path, &text)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::verify_feasible;
    use crate::ordering::{fqw_partition, PartitionClass};

    #[test]
    fn worked_example_packs_to_25() {
        let instance = worked_example();
        assert_eq!(instance.len(), 15);
        let trace = bl_pack(&instance, OrderingKind::Fqw);
        assert_eq!(trace.packing.height(), Scalar::from_int(25));
    }

    #[test]
    fn staircase_rejects_degenerate_parameters() {
        assert!(matches!(staircase(2, 4), Err(GenError::InvalidParam(_))));
        assert!(matches!(staircase(3, 1), Err(GenError::InvalidParam(_))));
    }

    #[test]
    fn staircase_shape_and_height() {
        let instance = staircase(3, 4).unwrap();
        assert_eq!(instance.width, Scalar::from_int(9));
        let dims: Vec<(i64, i64)> = instance
            .rects
            .iter()
            .map(|r| (r.w.to_f64() as i64, r.h.to_f64() as i64))
            .collect();
        assert_eq!(dims, vec![(3, 5), (4, 4), (4, 4), (4, 1), (4, 4)]);
        for (w, h) in [(3i64, 2i64), (4, 3), (7, 2), (5, 6)] {
            let instance = staircase(w, h).unwrap();
            let trace = bl_pack(&instance, OrderingKind::Fqw);
            assert_eq!(
                trace.packing.height(),
                Scalar::from_int(3 * h),
                "staircase({w},{h})"
            );
        }
    }

    #[test]
    fn staircase_partition_matches_construction() {
        let instance = staircase(3, 4).unwrap();
        let partition = fqw_partition(&instance);
        let class = |id: &str| partition.class_of(id).unwrap();
        assert_eq!(class("r1"), PartitionClass::F);
        assert_eq!(class("r2"), PartitionClass::F);
        assert_eq!(class("r3"), PartitionClass::Q);
        assert_eq!(class("r4"), PartitionClass::Q);
        assert_eq!(class("r5"), PartitionClass::Q);
    }

    #[test]
    fn checkerboard_small_params() {
        let p = CheckerboardParams::new(4).unwrap();
        assert_eq!(p.nest_cols, 2);
        assert_eq!(p.floor_squares, 6);
        assert_eq!(p.strip_width(), 24);
        assert_eq!(p.slab_width(), 16);
        assert_eq!(p.slabs, 3);
        assert_eq!(p.body_squares, 6);
        assert!(matches!(
            CheckerboardParams::new(3),
            Err(GenError::InvalidParam(_))
        ));
    }

    #[test]
    fn checkerboard_floor_row_is_the_floor_set() {
        let cb = checkerboard(4).unwrap();
        let partition = fqw_partition(&cb.instance);
        for r in &cb.instance.rects {
            let class = partition.class_of(&r.id).unwrap();
            let expected = if r.id.starts_with('f') {
                PartitionClass::F
            } else if r.id.starts_with('s') {
                PartitionClass::W
            } else {
                PartitionClass::Q
            };
            assert_eq!(class, expected, "rect {}", r.id);
        }
    }

    #[test]
    fn checkerboard_witness_is_feasible_and_heights_match_closed_form() {
        for k in [4u32, 8] {
            let cb = checkerboard(k).unwrap();
            verify_feasible(&cb.witness).unwrap();
            let p = &cb.params;
            assert_eq!(
                cb.witness.height(),
                Scalar::from_int(4 + 4 * p.slabs),
                "witness height for k={k}"
            );
            let bl = bl_pack(&cb.instance, OrderingKind::Fqw).packing.height();
            let square_rows = p.body_squares / p.floor_squares;
            assert_eq!(p.body_squares % p.floor_squares, 0);
            assert_eq!(
                bl,
                Scalar::from_int(4 + 4 * square_rows + 4 * p.slabs),
                "bl height for k={k}"
            );
        }
    }

    #[test]
    fn checkerboard_ratio_grows() {
        let table = checkerboard_ratio_table(&[4, 8]).unwrap();
        assert_eq!(table[0].ratio, Scalar::ratio(5, 4));
        assert_eq!(table[1].ratio, Scalar::ratio(4, 3));
        assert!(table[0].ratio < table[1].ratio);
    }

    #[test]
    fn random_families_are_deterministic_and_in_range() {
        let p = RandomRectParams {
            n: 40,
            seed: 7,
            width: 20,
            w_range: (1, 10),
            h_range: (2, 9),
        };
        let a = random_rects(&p).unwrap();
        let b = random_rects(&p).unwrap();
        assert_eq!(a, b);
        for r in &a.rects {
            assert!(r.w >= Scalar::one() && r.w <= Scalar::from_int(10));
            assert!(r.h >= Scalar::from_int(2) && r.h <= Scalar::from_int(9));
        }
        let other = random_rects(&RandomRectParams { seed: 8, ..p }).unwrap();
        assert_ne!(a, other);

        let sq = random_squares(&RandomSquareParams {
            n: 12,
            seed: 3,
            width: 9,
            side_range: (1, 4),
        })
        .unwrap();
        assert!(sq.rects.iter().all(|r| r.w == r.h));
    }

    #[test]
    fn random_params_are_validated() {
        let bad = RandomRectParams {
            n: 1,
            seed: 0,
            width: 5,
            w_range: (2, 8),
            h_range: (1, 1),
        };
        assert!(matches!(random_rects(&bad), Err(GenError::InvalidParam(_))));
        let empty = RandomSquareParams {
            n: 0,
            seed: 0,
            width: 5,
            side_range: (3, 2),
        };
        assert!(matches!(
            random_squares(&empty),
            Err(GenError::InvalidParam(_))
        ));
    }

    #[test]
    fn corpus_is_byte_reproducible() {
        let specs = vec![
            FamilySpec::WorkedExample,
            FamilySpec::Staircase { w: 3, h: 4 },
            FamilySpec::Checkerboard { k: 4 },
            FamilySpec::RandomRects(RandomRectParams {
                n: 25,
                seed: 1,
                width: 16,
                w_range: (1, 8),
                h_range: (1, 8),
            }),
        ];
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let a = gen_corpus(&specs, dir_a.path()).unwrap();
        let b = gen_corpus(&specs, dir_b.path()).unwrap();
        assert_eq!(a, b);
        for entry in &a.entries {
            let bytes_a = std::fs::read(dir_a.path().join(&entry.file)).unwrap();
            let bytes_b = std::fs::read(dir_b.path().join(&entry.file)).unwrap();
            assert_eq!(bytes_a, bytes_b);
            assert_eq!(format!("{:x}", Sha256::digest(&bytes_a)), entry.sha256);
            let parsed = crate::model::read_instance_file(&dir_a.path().join(&entry.file));
            assert!(parsed.is_ok());
        }
        let manifest_text = std::fs::read_to_string(dir_a.path().join("manifest.json")).unwrap();
        let parsed: CorpusManifest = serde_json::from_str(&manifest_text).unwrap();
        assert_eq!(parsed, a);
    }

    #[test]
    fn family_spec_round_trips_through_json() {
        let spec = FamilySpec::RandomSquares(RandomSquareParams {
            n: 5,
            seed: 2,
            width: 12,
            side_range: (1, 6),
        });
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"family\":\"random_squares\""));
        let back: FamilySpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let tagged: FamilySpec =
            serde_json::from_str(r#"{"family":"staircase","w":3,"h":4}"#).unwrap();
        assert_eq!(tagged, FamilySpec::Staircase { w: 3, h: 4 });
    }
}
