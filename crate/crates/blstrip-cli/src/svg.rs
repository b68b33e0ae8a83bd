//! SVG 1.1 rendering of packings, as a debugging aid. The y-axis is flipped
//! so the strip bottom sits at the image bottom; shelf rects are blue,
//! leftover rects brown, wide rects green. Region boundaries can be drawn as
//! dashed lines with their index in a right-hand gutter.

use blstrip::analysis::StripRegion;
use blstrip::model::{ModelError, Packing};
use blstrip::ordering::{FqwPartition, PartitionClass};

const MARGIN: f64 = 12.0;
const GUTTER: f64 = 30.0;

fn fill(class: Option<PartitionClass>) -> &'static str {
    match class {
        Some(PartitionClass::F) => "#5b8dd9",
        Some(PartitionClass::Q) => "#a7713f",
        Some(PartitionClass::W) => "#63a063",
        None => "#c8c8c8",
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the packing at `scale` pixels per unit. Pass the region partition
/// to draw its boundaries, or an empty slice to omit them. Output is
/// byte-stable for a fixed packing.
pub fn render(
    packing: &Packing,
    partition: &FqwPartition,
    scale: u32,
    regions: &[StripRegion],
) -> Result<String, ModelError> {
    let placed = packing.placed()?;
    let s = f64::from(scale);
    let strip_w = packing.instance.width.to_f64() * s;
    let strip_h = packing.height().to_f64() * s;
    let gutter = if regions.is_empty() { 0.0 } else { GUTTER };
    let img_w = strip_w + 2.0 * MARGIN + gutter;
    let img_h = strip_h.max(1.0) + 2.0 * MARGIN;
    // Image y of a horizontal line at strip height y.
    let flip = |y: f64| MARGIN + strip_h - y;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{img_w:.0}\" height=\"{img_h:.0}\" \
         viewBox=\"0 0 {img_w:.0} {img_h:.0}\">\n"
    ));
    out.push_str(&format!(
        "  <rect x=\"{MARGIN:.2}\" y=\"{:.2}\" width=\"{strip_w:.2}\" height=\"{:.2}\" \
         fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
        flip(strip_h),
        strip_h.max(1.0),
    ));
    for p in &placed {
        let w = p.w.to_f64() * s;
        let h = p.h.to_f64() * s;
        let x = MARGIN + p.x.to_f64() * s;
        let y = flip(p.y.to_f64() * s + h);
        out.push_str(&format!(
            "  <rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" \
             fill=\"{}\" stroke=\"#222222\" stroke-width=\"1\"/>\n",
            fill(partition.class_of(&p.id)),
        ));
        let size = (w.min(h) * 0.5).clamp(8.0, 16.0);
        if w >= size && h >= size {
            out.push_str(&format!(
                "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"{size:.0}\" \
                 font-family=\"sans-serif\" text-anchor=\"middle\" \
                 dominant-baseline=\"central\">{}</text>\n",
                x + w / 2.0,
                y + h / 2.0,
                escape(&p.id),
            ));
        }
    }
    for r in regions.iter().filter(|r| !r.is_empty()) {
        let lo = flip(r.y_lo.to_f64() * s);
        let mid = flip((r.y_lo.to_f64() + r.y_hi.to_f64()) / 2.0 * s);
        out.push_str(&format!(
            "  <line x1=\"{MARGIN:.2}\" y1=\"{lo:.2}\" x2=\"{:.2}\" y2=\"{lo:.2}\" \
             stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n",
            MARGIN + strip_w,
        ));
        out.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{mid:.2}\" font-size=\"10\" \
             font-family=\"sans-serif\" dominant-baseline=\"central\">{}</text>\n",
            MARGIN + strip_w + 6.0,
            r.index,
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
