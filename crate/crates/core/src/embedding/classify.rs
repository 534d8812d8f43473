//! Heuristic widget-type classifier.
//!
//! Decision rules over patch geometry and contrast structure: aspect ratio,
//! dark border rings, interior fill, stroke rows, left/right asymmetry, and
//! circle-versus-square corner behavior. Contrast is judged relative to the
//! screen background sampled just outside the box, which keeps the rules
//! stable across backgrounds and across slightly inflated detected boxes.
//! Total: anything unrecognized falls back to `Icon`.

use super::WidgetType;
use crate::vision::{Image, WidgetBox};

/// Pixels at least this far below the background are "dark" marks
/// (borders, glyphs, thumbs, underlines).
const DARK_DELTA: i32 = 130;
/// Pixels at least this far below the background are "mid" content
/// (filled blocks, tracks, gradients) or darker.
const MID_DELTA: i32 = 55;
/// Pixels within this delta of the background count as background.
const BG_DELTA: i32 = 35;

struct Features {
    w: usize,
    h: usize,
    aspect: f64,
    ring_dark: f64,
    ring_mid: f64,
    fill_dark: f64,
    fill_mid: f64,
    interior_mean: f64,
    corners_mid: usize,
    side_mids_dark: usize,
    bottom_band_dark: f64,
    top_band_dark: f64,
    stroke_rows: usize,
    left_dark: f64,
    right_dark: f64,
    max_col_dark: f64,
    progress_prefix: f64,
    smooth: f64,
    bg_ref: f64,
}

/// Classifies the patch under `bounds` into one of the 14 widget types.
pub fn classify_widget_type(img: &Image, bounds: &WidgetBox) -> WidgetType {
    let Some(f) = extract_features(img, bounds) else {
        return WidgetType::Icon;
    };

    // Thin wide strips: slider or progress track.
    if f.aspect >= 4.5 && f.h <= 20 {
        if f.progress_prefix >= 0.12 {
            return WidgetType::ProgressBar;
        }
        return WidgetType::SeekBar;
    }

    // Wide dark band.
    if f.aspect >= 4.0 && f.h >= 20 && f.fill_mid >= 0.7 && f.interior_mean < f.bg_ref - 120.0 {
        return WidgetType::Toolbar;
    }

    // Ring without corners: a circle. A cross-shaped glyph also touches all
    // four side midpoints but fills entire center columns; a ring does not.
    if f.aspect >= 0.6
        && f.aspect <= 1.6
        && f.corners_mid == 0
        && f.side_mids_dark >= 3
        && f.max_col_dark <= 0.6
    {
        return WidgetType::RadioButton;
    }

    if f.ring_dark >= 0.45 {
        // Dark-framed widgets.
        if f.aspect <= 1.6 {
            if f.fill_mid >= 0.5 {
                return WidgetType::ImageButton;
            }
            return WidgetType::CheckBox;
        }
        if f.right_dark >= 0.10 && f.right_dark >= 2.5 * f.left_dark {
            return WidgetType::Spinner;
        }
        if f.bottom_band_dark >= 0.5 && f.top_band_dark <= 0.2 && f.fill_mid <= 0.4 {
            return WidgetType::EditText;
        }
        return WidgetType::Button;
    }

    // Mid-shade frame on a light interior: list row.
    if f.ring_mid >= 0.45 && f.fill_mid < 0.35 && f.aspect >= 2.5 {
        return WidgetType::ListItem;
    }

    // Compact track with a full-height thumb at one end.
    if f.aspect >= 1.4
        && f.aspect <= 3.2
        && f.fill_mid >= 0.5
        && f.max_col_dark >= 0.8
        && (f.left_dark.min(f.right_dark) <= 0.1)
        && (f.left_dark.max(f.right_dark) >= 0.2)
    {
        return WidgetType::Switch;
    }

    // Filled blocks: text card or image.
    if f.fill_mid >= 0.7 {
        if f.stroke_rows >= 1 && f.fill_dark >= 0.05 {
            return WidgetType::TextView;
        }
        return WidgetType::ImageView;
    }

    WidgetType::Icon
}

fn extract_features(img: &Image, bounds: &WidgetBox) -> Option<Features> {
    // Clip to the image.
    let x0 = bounds.x.min(img.width().saturating_sub(1));
    let y0 = bounds.y.min(img.height().saturating_sub(1));
    let x1 = bounds.right().min(img.width());
    let y1 = bounds.bottom().min(img.height());
    if x1 <= x0 + 2 || y1 <= y0 + 2 {
        return None;
    }

    let bg_ref = background_reference(img, x0, y0, x1, y1);

    // Tighten: detected boxes can carry a ~1-2 px background margin. Trim a
    // side only when its entire outermost row/column is background-like.
    let (mut x0, mut y0, mut x1, mut y1) = (x0, y0, x1, y1);
    for _ in 0..3 {
        if x1 - x0 <= 6 || y1 - y0 <= 6 {
            break;
        }
        let is_bg = |v: u8| (v as f64) >= bg_ref - BG_DELTA as f64;
        if (x0..x1).all(|x| is_bg(img.get(x, y0))) {
            y0 += 1;
            continue;
        }
        if (x0..x1).all(|x| is_bg(img.get(x, y1 - 1))) {
            y1 -= 1;
            continue;
        }
        if (y0..y1).all(|y| is_bg(img.get(x0, y))) {
            x0 += 1;
            continue;
        }
        if (y0..y1).all(|y| is_bg(img.get(x1 - 1, y))) {
            x1 -= 1;
            continue;
        }
        break;
    }

    let w = x1 - x0;
    let h = y1 - y0;
    let dark_cut = bg_ref - DARK_DELTA as f64;
    let mid_cut = bg_ref - MID_DELTA as f64;
    let is_dark = |v: u8| (v as f64) < dark_cut;
    let is_mid = |v: u8| (v as f64) < mid_cut;

    // Perimeter ring, depth 2.
    let mut ring_n = 0usize;
    let mut ring_dark_n = 0usize;
    let mut ring_mid_n = 0usize;
    for y in y0..y1 {
        for x in x0..x1 {
            let on_ring = x < x0 + 2 || x >= x1 - 2 || y < y0 + 2 || y >= y1 - 2;
            if on_ring {
                let v = img.get(x, y);
                ring_n += 1;
                if is_dark(v) {
                    ring_dark_n += 1;
                }
                if is_mid(v) {
                    ring_mid_n += 1;
                }
            }
        }
    }

    // Interior, inset 3 (or 1 for very small boxes).
    let inset = if w > 10 && h > 10 { 3 } else { 1 };
    let (ix0, iy0, ix1, iy1) = (x0 + inset, y0 + inset, x1 - inset, y1 - inset);
    let iw = ix1.saturating_sub(ix0);
    let ih = iy1.saturating_sub(iy0);
    if iw == 0 || ih == 0 {
        return None;
    }

    let mut fill_dark_n = 0usize;
    let mut fill_mid_n = 0usize;
    let mut sum = 0.0f64;
    let mut smooth_acc = 0.0f64;
    let mut smooth_n = 0usize;
    let mut row_dark = vec![0usize; ih];
    let mut col_dark = vec![0usize; iw];
    for y in iy0..iy1 {
        for x in ix0..ix1 {
            let v = img.get(x, y);
            sum += v as f64;
            if is_dark(v) {
                fill_dark_n += 1;
                row_dark[y - iy0] += 1;
                col_dark[x - ix0] += 1;
            }
            if is_mid(v) {
                fill_mid_n += 1;
            }
            if x + 1 < ix1 {
                smooth_acc += (img.get(x + 1, y) as f64 - v as f64).abs();
                smooth_n += 1;
            }
        }
    }
    let interior_area = (iw * ih) as f64;
    let interior_mean = sum / interior_area;
    let fill_dark = fill_dark_n as f64 / interior_area;
    let fill_mid = fill_mid_n as f64 / interior_area;
    let smooth = if smooth_n > 0 {
        smooth_acc / smooth_n as f64
    } else {
        0.0
    };

    // Corners and side midpoints (3x3 blocks on the box frame).
    let block_mid_frac = |cx: usize, cy: usize| -> f64 {
        let mut n = 0usize;
        let mut hits = 0usize;
        for y in cy.saturating_sub(1)..=(cy + 1).min(y1 - 1) {
            for x in cx.saturating_sub(1)..=(cx + 1).min(x1 - 1) {
                if x >= x0 && y >= y0 {
                    n += 1;
                    if is_mid(img.get(x, y)) {
                        hits += 1;
                    }
                }
            }
        }
        if n == 0 {
            0.0
        } else {
            hits as f64 / n as f64
        }
    };
    let corner_blocks = [
        (x0 + 1, y0 + 1),
        (x1 - 2, y0 + 1),
        (x0 + 1, y1 - 2),
        (x1 - 2, y1 - 2),
    ];
    let corners_mid = corner_blocks
        .iter()
        .filter(|(cx, cy)| block_mid_frac(*cx, *cy) >= 0.34)
        .count();
    let cx = (x0 + x1) / 2;
    let cy = (y0 + y1) / 2;
    let side_blocks = [(cx, y0 + 1), (cx, y1 - 2), (x0 + 1, cy), (x1 - 2, cy)];
    let side_mids_dark = side_blocks
        .iter()
        .filter(|(bx, by)| block_mid_frac(*bx, *by) >= 0.34)
        .count();

    // Row bands and stroke runs.
    let band = 3.min(ih);
    let band_frac = |rows: std::ops::Range<usize>| -> f64 {
        let mut n = 0usize;
        let mut d = 0usize;
        for r in rows {
            n += iw;
            d += row_dark[r];
        }
        if n == 0 {
            0.0
        } else {
            d as f64 / n as f64
        }
    };
    let bottom_band_dark = band_frac(ih - band..ih);
    let top_band_dark = band_frac(0..band);
    let mut stroke_rows = 0usize;
    let mut in_run = false;
    for r in 0..ih {
        let frac = row_dark[r] as f64 / iw as f64;
        if frac >= 0.12 {
            if !in_run {
                stroke_rows += 1;
                in_run = true;
            }
        } else {
            in_run = false;
        }
    }

    // Column thirds and the progress prefix.
    let third = (iw / 3).max(1);
    let col_frac = |c: usize| col_dark[c] as f64 / ih as f64;
    let mut left_acc = 0.0;
    let mut right_acc = 0.0;
    for c in 0..third {
        left_acc += col_frac(c);
    }
    for c in iw - third..iw {
        right_acc += col_frac(c);
    }
    let left_dark = left_acc / third as f64;
    let right_dark = right_acc / third as f64;
    let max_col_dark = (0..iw).map(col_frac).fold(0.0f64, f64::max);
    let mut prefix = 0usize;
    for c in 0..iw {
        if col_frac(c) >= 0.6 {
            prefix += 1;
        } else {
            break;
        }
    }
    let progress_prefix = prefix as f64 / iw as f64;

    Some(Features {
        w,
        h,
        aspect: w as f64 / h as f64,
        ring_dark: ring_dark_n as f64 / ring_n.max(1) as f64,
        ring_mid: ring_mid_n as f64 / ring_n.max(1) as f64,
        fill_dark,
        fill_mid,
        interior_mean,
        corners_mid,
        side_mids_dark,
        bottom_band_dark,
        top_band_dark,
        stroke_rows,
        left_dark,
        right_dark,
        max_col_dark,
        progress_prefix,
        smooth,
        bg_ref,
    })
}

/// Median shade of the 3-px ring just outside the box; falls back to the
/// patch's bright quartile when the box touches the image edge everywhere.
fn background_reference(img: &Image, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
    let ox0 = x0.saturating_sub(3);
    let oy0 = y0.saturating_sub(3);
    let ox1 = (x1 + 3).min(img.width());
    let oy1 = (y1 + 3).min(img.height());
    let mut samples: Vec<u8> = Vec::new();
    for y in oy0..oy1 {
        for x in ox0..ox1 {
            let inside = x >= x0 && x < x1 && y >= y0 && y < y1;
            if !inside {
                samples.push(img.get(x, y));
            }
        }
    }
    if samples.is_empty() {
        for y in y0..y1 {
            for x in x0..x1 {
                samples.push(img.get(x, y));
            }
        }
    }
    samples.sort_unstable();
    samples[samples.len() / 2] as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_patch_maps_to_exactly_one_type() {
        // Arbitrary noise patches are still classified (total function).
        let img = Image::from_fn(60, 60, |x, y| ((x * 31 + y * 17) % 256) as u8);
        let t = classify_widget_type(&img, &WidgetBox::new(5, 5, 30, 30));
        assert_eq!(t.one_hot().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn square_high_fill_no_border_is_image_like() {
        // 1:1 aspect, high smooth fill, no dark frame: ImageView per the
        // rule table.
        let img = Image::from_fn(80, 80, |x, y| {
            let inside = (20..60).contains(&x) && (20..60).contains(&y);
            if inside {
                80 + x as i32 as u8
            } else {
                230
            }
        });
        let t = classify_widget_type(&img, &WidgetBox::new(20, 20, 40, 40));
        assert_eq!(t, WidgetType::ImageView);
    }

    #[test]
    fn degenerate_box_falls_back_to_icon() {
        let img = Image::filled(10, 10, 230);
        let t = classify_widget_type(&img, &WidgetBox::new(9, 9, 1, 1));
        assert_eq!(t, WidgetType::Icon);
    }
}
